//! The full pipeline: Frobenius matrix on the basis, then the exact
//! L-polynomial.

use std::time::Duration;

use web_time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::curve::{BasisIndex, CurveSpec};
use crate::error::{Error, Result};
use crate::frob::{frob_terms, FrobCache, FrobTerms};
use crate::horizontal::{h_reduce_full, h_strip_matrices, HMode};
use crate::linrec::{bsgs_applicable, Method};
use crate::padic::{mat_charpoly, PElt, PMat, RingCtx};
use crate::vertical::{bezout_rs, v_batch_matrices, v_reduce, VPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Auto,
    /// Interval products by linear recurrences.
    Bsgs,
    /// One reduction step at a time; little memory, O(p) time.
    Naive,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::Bsgs => "bsgs",
            Strategy::Naive => "naive",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub strategy: Strategy,
    pub interpolation: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            strategy: Strategy::Auto,
            interpolation: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Timings {
    pub expansion: Duration,
    pub horizontal: Duration,
    pub vertical: Duration,
    pub lift: Duration,
}

/// Matrix of the p-power Frobenius on the basis, modulo p^n. Column c is
/// the image of the c-th basis element.
#[derive(Clone, Debug)]
pub struct FrobMatrix {
    pub n: u32,
    pub strategy: Strategy,
    pub m: PMat,
}

/// The bsgs products only pay off once p is large against the number of
/// intervals; below that, or when their preconditions fail, single
/// stepping is used.
pub fn resolve_strategy(curve: &CurveSpec, n: u32, s: Strategy) -> Strategy {
    if s != Strategy::Auto {
        return s;
    }
    let dn = (curve.d as u64) * n as u64;
    let k = curve.p * (curve.d as u64 * n as u64) - curve.d as u64 - 1;
    if (curve.p as u128) < 4 * (dn as u128).pow(2) || !bsgs_applicable(curve.p, k, curve.d) {
        Strategy::Naive
    } else {
        Strategy::Bsgs
    }
}

pub fn frobenius_matrix(curve: &CurveSpec, n: u32, opts: &Options) -> Result<FrobMatrix> {
    frobenius_matrix_timed(curve, n, opts).map(|(m, _)| m)
}

pub fn frobenius_matrix_timed(
    curve: &CurveSpec,
    n: u32,
    opts: &Options,
) -> Result<(FrobMatrix, Timings)> {
    let mut c = curve.clone();
    c.n = n;
    let ctx = c.ring();
    let strategy = resolve_strategy(&c, n, opts.strategy);
    let (hmode, method) = match strategy {
        Strategy::Naive => (HMode::Stepwise, Method::Naive),
        _ => (
            HMode::Intervals {
                method: Method::Bsgs,
                interpolation: opts.interpolation,
            },
            Method::Bsgs,
        ),
    };
    let mut timings = Timings::default();
    let size = c.basis_size();
    if size == 0 {
        let m = PMat::zeros(&RingCtx::new(c.p, n)?, 0, 0);
        return Ok((FrobMatrix { n, strategy, m }, timings));
    }
    let basis = c.basis();

    let clock = Instant::now();
    let cache = FrobCache::new(&c, &ctx);
    let terms: Vec<FrobTerms> = basis
        .par_iter()
        .map(|b| frob_terms(&c, &ctx, &cache, b.i, b.j))
        .collect();
    timings.expansion = clock.elapsed();

    // One strip per (j, k); every i shares its interval matrices.
    let clock = Instant::now();
    let js: Vec<u64> = c.j_range().collect();
    let strips: Vec<(u64, usize)> = js
        .iter()
        .flat_map(|&j| (0..n as usize).map(move |k| (j, k)))
        .collect();
    let horiz: Vec<Vec<Vec<PElt>>> = strips
        .par_iter()
        .map(|&(j, k)| {
            let t = c.p as i128 * (k as i128 * c.r as i128 + j as i128);
            let ell_max = (c.d * k + c.d - 2) as u64;
            let mats = h_strip_matrices(&c, &ctx, t, ell_max, hmode, n)?;
            (0..c.d - 1)
                .map(|i| {
                    let tm = &terms[c.index_of(BasisIndex { i, j })];
                    let w = h_reduce_full(&c, &ctx, tm, k, mats.as_deref(), n)?;
                    if !ctx.is_zero_mod(&w.coeffs[0], n) {
                        return Err(Error::HypothesisViolated(format!(
                            "x^-1 term survived horizontal reduction at t = {t}"
                        )));
                    }
                    Ok(w.coeffs[1..].to_vec())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    timings.horizontal = clock.elapsed();

    let clock = Instant::now();
    let bez = bezout_rs(&c, &ctx)?;
    let columns: Vec<(u64, Vec<Vec<PElt>>)> = js
        .par_iter()
        .enumerate()
        .map(|(jn, &j)| {
            let plan = VPlan::new(&c, j);
            let batches = v_batch_matrices(&c, &ctx, &bez, &plan, method, n)?;
            let cols = (0..c.d - 1)
                .map(|i| {
                    let w: Vec<Vec<PElt>> = (0..n as usize)
                        .map(|k| horiz[jn * n as usize + k][i].clone())
                        .collect();
                    v_reduce(&plan, &ctx, &batches, &w)
                })
                .collect();
            Ok((plan.beta, cols))
        })
        .collect::<Result<_>>()?;
    let mut m = PMat::zeros(&ctx, size, size);
    for (&j, (beta, cols)) in js.iter().zip(columns) {
        let target = beta + c.eps * c.r;
        for (i, col) in cols.into_iter().enumerate() {
            let cidx = c.index_of(BasisIndex { i, j });
            for (i2, e) in col.into_iter().enumerate() {
                m.set(c.index_of(BasisIndex { i: i2, j: target }), cidx, e);
            }
        }
    }
    timings.vertical = clock.elapsed();

    let have = m.min_prec(&ctx);
    if have < n {
        return Err(Error::PrecisionExhausted { needed: n, have });
    }
    // From here on only n digits matter; move to Z/p^n.
    let small = RingCtx::new(c.p, n)?;
    let m = m.map(|e| small.elt(e.residue().clone(), n));
    Ok((
        FrobMatrix { n, strategy, m },
        timings,
    ))
}

/// Power sums of the roots of the characteristic polynomial of Frobenius
/// on ker(eta), the part of the basis span that is not H^1 of the complete
/// curve. Its eigenvalues are those of the permutation of the points at
/// infinity with one eigenvalue 1 removed, so a cycle of length e
/// contributes e when e | i, minus one overall.
pub fn ker_eta_power_sum(curve: &CurveSpec, i: u32) -> BigInt {
    let cycles = curve.infinity_cycle_type();
    let fixed: usize = cycles.iter().filter(|&&e| i as usize % e == 0).sum();
    BigInt::from(fixed) - 1
}

fn mod_floor(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

/// Integer power sums s_1..s_g of the reciprocal roots of L.
///
/// Each trace is known modulo p^N; Newton's identity fixes s_i modulo i as
/// well, and the Weil bound |s_i| <= 2g p^(i/2) then leaves one candidate.
pub fn power_sums(curve: &CurveSpec, fm: &FrobMatrix) -> Result<Vec<BigInt>> {
    let ctx = RingCtx::new(curve.p, fm.n).expect("p is prime");
    let pn = BigInt::from(curve.p).pow(fm.n);
    let g = curve.g as u32;
    let mut s: Vec<BigInt> = Vec::with_capacity(g as usize);
    let mut a: Vec<BigInt> = vec![BigInt::one()];
    let mut pw = fm.m.clone();
    for i in 1..=g {
        if i > 1 {
            pw = pw.mul(&ctx, &fm.m);
        }
        let tr = BigInt::from(pw.trace(&ctx).residue().clone());
        let r1 = mod_floor(&(tr - ker_eta_power_sum(curve, i)), &pn);
        let ib = BigInt::from(i);
        let newton: BigInt = (1..i as usize).map(|k| &a[k] * &s[i as usize - k - 1]).sum();
        let r2 = mod_floor(&-newton.clone(), &ib);
        // Chinese remaindering; i < p so i and p^N are coprime.
        let inv = BigInt::from(crate::fp::inv_mod(
            (&pn % &ib).try_into().unwrap_or(0),
            i as u64,
        )
        .unwrap_or(0));
        let t = mod_floor(&((&r2 - &r1) * inv), &ib);
        let m = &pn * &ib;
        let res = &r1 + &pn * t;
        let bound = (BigInt::from(4u32 * g * g) * BigInt::from(curve.p).pow(i)).sqrt();
        let x0 = -&bound + mod_floor(&(&res + &bound), &m);
        if x0 > bound {
            return Err(Error::BoundViolated { i: i as usize });
        }
        if &x0 + &m <= bound {
            return Err(Error::LiftAmbiguous {
                i: i as usize,
                n: fm.n,
            });
        }
        let (ai, rem) = (-(&x0 + newton)).div_rem(&ib);
        if !rem.is_zero() {
            return Err(Error::NonIntegralCoefficient { i: i as usize });
        }
        s.push(x0);
        a.push(ai);
    }
    Ok(s)
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// L(t) = 1 + a_1 t + ... + a_2g t^2g from s_1..s_g.
pub fn lpolynomial_from_power_sums(s: &[BigInt], g: u64, q: u64) -> Result<Vec<BigInt>> {
    assert_eq!(s.len() as u64, g, "need exactly g power sums");
    let g = g as usize;
    let qb = BigInt::from(q);
    let mut a = vec![BigInt::one()];
    for i in 1..=g {
        let sum: BigInt = (1..i).map(|k| &a[k] * &s[i - k - 1]).sum();
        let (ai, rem) = (-(&s[i - 1] + sum)).div_rem(&BigInt::from(i));
        if !rem.is_zero() {
            return Err(Error::NonIntegralCoefficient { i });
        }
        a.push(ai);
    }
    for i in (0..g).rev() {
        let v = qb.pow((g - i) as u32) * &a[i];
        a.push(v);
    }
    check_lpolynomial(&a, g as u64, q)?;
    Ok(a)
}

/// Functional equation and Weil bounds, both as exact integer identities.
pub fn check_lpolynomial(a: &[BigInt], g: u64, q: u64) -> Result<()> {
    let g = g as usize;
    let qb = BigInt::from(q);
    if a.len() != 2 * g + 1 || !a[0].is_one() {
        return Err(Error::HypothesisViolated("L must have degree 2g and a_0 = 1".into()));
    }
    for i in 0..=2 * g {
        if i <= g && a[2 * g - i] != qb.pow((g - i) as u32) * &a[i] {
            return Err(Error::HypothesisViolated(format!(
                "functional equation fails at a_{}",
                2 * g - i
            )));
        }
        let b = binomial(2 * g as u64, i as u64);
        if &a[i] * &a[i] > &b * &b * qb.pow(i as u32) {
            return Err(Error::BoundViolated { i });
        }
    }
    Ok(())
}

/// det(I - tM) = L(t) rev(U)(t) modulo p^N.
pub fn zeta_check_charpoly(curve: &CurveSpec, fm: &FrobMatrix, l: &[BigInt], u: &[BigInt]) -> bool {
    let ctx = RingCtx::new(curve.p, fm.n).expect("p is prime");
    let chi = mat_charpoly(&ctx, &fm.m);
    let size = fm.m.rows();
    let pb = BigInt::from(curve.p);
    let du = u.len() - 1;
    let rev_u: Vec<BigInt> = u.iter().rev().cloned().collect();
    let mut prod = vec![BigInt::zero(); l.len() + du];
    for (x, lx) in l.iter().enumerate() {
        for (y, uy) in rev_u.iter().enumerate() {
            prod[x + y] += lx * uy;
        }
    }
    if prod.len() != size + 1 {
        return false;
    }
    let pn = pb.pow(fm.n);
    (0..=size).all(|k| {
        let c = BigInt::from(chi.coeff(&ctx, size - k).residue().clone());
        mod_floor(&(c - &prod[k]), &pn).is_zero()
    })
}

/// s_i = sum of i-th powers of the reciprocal roots of L, for i = 1..=imax.
pub fn power_sums_of_l(l: &[BigInt], imax: usize) -> Vec<BigInt> {
    let mut s: Vec<BigInt> = Vec::with_capacity(imax);
    for i in 1..=imax {
        let ai = l.get(i).cloned().unwrap_or_default();
        let mut v = -BigInt::from(i) * ai;
        for k in 1..i {
            if let Some(ak) = l.get(k) {
                v -= ak * &s[i - k - 1];
            }
        }
        s.push(v);
    }
    s
}

/// #C(F_{q^i}) = q^i + 1 - s_i for i = 1..=imax.
pub fn point_counts_from_l(l: &[BigInt], q: u64, imax: usize) -> Vec<BigInt> {
    power_sums_of_l(l, imax)
        .into_iter()
        .enumerate()
        .map(|(k, s)| BigInt::from(q).pow(k as u32 + 1) + 1 - s)
        .collect()
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct ZetaResult {
    pub n: u32,
    pub strategy: Strategy,
    pub matrix: FrobMatrix,
    /// a_0..a_2g.
    pub l: Vec<BigInt>,
    /// U(t), ascending.
    pub u: Vec<BigInt>,
    pub timings: Timings,
}

impl ZetaResult {
    /// The monic reciprocal t^2g L(1/t), ascending.
    pub fn frobenius_polynomial(&self) -> Vec<BigInt> {
        self.l.iter().rev().cloned().collect()
    }
}

pub fn compute_zeta(curve: &CurveSpec, opts: &Options) -> Result<ZetaResult> {
    let (fm, mut timings) = frobenius_matrix_timed(curve, curve.n, opts)?;
    let clock = Instant::now();
    let s = power_sums(curve, &fm)?;
    let l = lpolynomial_from_power_sums(&s, curve.g, curve.p)?;
    let u = curve.ker_eta_charpoly();
    if !zeta_check_charpoly(curve, &fm, &l, &u) {
        return Err(Error::HypothesisViolated(
            "characteristic polynomial of the Frobenius matrix disagrees with L(t) rev(U)".into(),
        ));
    }
    timings.lift = clock.elapsed();
    Ok(ZetaResult {
        n: fm.n,
        strategy: fm.strategy,
        matrix: fm,
        l,
        u,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn newton_base_cases() {
        let l = lpolynomial_from_power_sums(&big(&[0]), 1, 13).unwrap();
        assert_eq!(l, big(&[1, 0, 13]));
        let l = lpolynomial_from_power_sums(&big(&[3]), 1, 13).unwrap();
        assert_eq!(l, big(&[1, -3, 13]));
        assert_eq!(lpolynomial_from_power_sums(&[], 0, 13).unwrap(), big(&[1]));
    }

    #[test]
    fn counts_from_l() {
        assert_eq!(point_counts_from_l(&big(&[1]), 7, 2), big(&[8, 50]));
        // 1 - a t + q t^2: s_1 = a, s_2 = a^2 - 2q.
        assert_eq!(point_counts_from_l(&big(&[1, -3, 13]), 13, 2), big(&[11, 170 - 9 + 26]));
    }

    #[test]
    fn weil_violation_detected() {
        assert!(matches!(
            lpolynomial_from_power_sums(&big(&[100]), 1, 13),
            Err(Error::BoundViolated { .. })
        ));
    }

    #[test]
    fn odd_newton_quotient_detected() {
        assert!(matches!(
            lpolynomial_from_power_sums(&big(&[1, 0]), 2, 101),
            Err(Error::NonIntegralCoefficient { i: 2 })
        ));
    }

    #[test]
    fn small_elliptic_curve_matches_oracle() {
        let c = CurveSpec::new(13, 2, &[1, 1, 0, 1], None).unwrap();
        let z = compute_zeta(&c, &Options::default()).unwrap();
        let n1 = crate::oracle::count_points(&c, 1).unwrap();
        assert_eq!(z.l[1], BigInt::from(n1) - 14);
        assert_eq!(z.u, big(&[1]));
    }

    #[test]
    fn corrupted_matrix_fails_charpoly_check() {
        let c = CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], None).unwrap();
        let z = compute_zeta(&c, &Options::default()).unwrap();
        assert!(zeta_check_charpoly(&c, &z.matrix, &z.l, &z.u));
        let ctx = RingCtx::new(c.p, z.n).unwrap();
        let mut bad = z.matrix.clone();
        let e = ctx.add(bad.m.get(0, 0), &ctx.one());
        bad.m.set(0, 0, e);
        assert!(!zeta_check_charpoly(&c, &bad, &z.l, &z.u));
    }

    #[test]
    fn ker_eta_sums_vanish_for_delta_one() {
        let c = CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], None).unwrap();
        for i in 1..5 {
            assert!(ker_eta_power_sum(&c, i).is_zero());
        }
    }
}
