//! Horizontal reduction: lowering the x-degree of G(x) x^s y^-t dx at a
//! fixed pole order t.
//!
//! A vector in W_{s,t} holds the coefficients of x^s, ..., x^(s+d-1). One
//! step D(s)^-1 M(s) maps W_{s,t} to W_{s-1,t}. Along a Frobenius strip the
//! only p-divisible denominators sit at s = -d mod p, and there the
//! numerator is divisible by p as long as the coordinate holding
//! x^(p l - 1) is kept zero mod p with one extra digit. That bookkeeping is
//! done by the precision tracking of [`RingCtx::mul`].

use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::frob::FrobTerms;
use crate::linrec::{self, IntervalSet, LinMat, Method};
use crate::padic::{eval_matrix_poly, vandermonde_solve, PElt, PMat, RingCtx};

/// G(x) x^s y^-t dx with deg G < d; `coeffs[h]` multiplies x^(s+h).
#[derive(Clone, Debug)]
pub struct WVec {
    pub s: i128,
    pub t: i128,
    pub coeffs: Vec<PElt>,
}

/// The step matrix M_H^t(s) in sparse form: `d` on the subdiagonal and
/// `c` in the last column.
#[derive(Clone, Debug)]
pub struct HStep {
    pub t: i128,
    pub s: i128,
    pub d: PElt,
    pub c: Vec<PElt>,
    /// The denominator as an integer, for the divisibility checks.
    pub d_int: i128,
}

/// Coefficients of P = F - f_d x^d, as signed integers.
fn p_coeffs(curve: &CurveSpec) -> Vec<i128> {
    curve.f[..curve.d].iter().map(|&c| c as i128).collect()
}

pub fn h_step_matrix(curve: &CurveSpec, ctx: &RingCtx, t: i128, s: i128) -> HStep {
    let (d, r, f_d) = (curve.d as i128, curve.r as i128, curve.f_d as i128);
    let d_int = (d * (t - r) - r * s) * f_d;
    let c = p_coeffs(curve)
        .iter()
        .enumerate()
        .map(|(h, &ph)| ctx.from_i128((r * s - (t - r) * h as i128) * ph))
        .collect();
    HStep {
        t,
        s,
        d: ctx.from_i128(d_int),
        c,
        d_int,
    }
}

/// M_H^t(s) = M0 + s M1 as dense matrices, together with D_H^t(s) as a
/// 1 x 1 linear matrix.
pub fn h_step_linmat(curve: &CurveSpec, ctx: &RingCtx, t: i128) -> (LinMat, LinMat) {
    let (d, r, f_d) = (curve.d, curve.r as i128, curve.f_d as i128);
    let pc = p_coeffs(curve);
    let mut m0 = PMat::zeros(ctx, d, d);
    let mut m1 = PMat::zeros(ctx, d, d);
    for h in 0..d {
        if h >= 1 {
            m0.set(h, h - 1, ctx.from_i128(d as i128 * (t - r) * f_d));
            m1.set(h, h - 1, ctx.from_i128(-r * f_d));
        }
        m0.set(h, d - 1, ctx.from_i128(-(t - r) * h as i128 * pc[h]));
        m1.set(h, d - 1, ctx.from_i128(r * pc[h]));
    }
    let scalar = |x: i128| PMat::from_fn(1, 1, |_, _| ctx.from_i128(x));
    let dl = LinMat::new(
        scalar(d as i128 * (t - r) * f_d),
        scalar(-r * f_d),
    );
    (LinMat::new(m0, m1), dl)
}

/// One reduction step W_{s,t} -> W_{s-1,t}.
///
/// A denominator divisible by p is only accepted at s = -d mod p, where it
/// has valuation exactly one and the numerator is divided by p exactly.
pub fn h_reduce_one(curve: &CurveSpec, ctx: &RingCtx, v: &WVec) -> Result<WVec> {
    let st = h_step_matrix(curve, ctx, v.t, v.s);
    let d = curve.d;
    let top = &v.coeffs[d - 1];
    let mut out: Vec<PElt> = (0..d)
        .map(|h| {
            let shifted = if h == 0 {
                ctx.zero()
            } else {
                ctx.mul(&st.d, &v.coeffs[h - 1])
            };
            ctx.add(&shifted, &ctx.mul(&st.c[h], top))
        })
        .collect();
    let p = curve.p as i128;
    let zero_den = Error::UnexpectedZeroDenominator { s: v.s, t: v.t };
    if st.d_int == 0 {
        return Err(zero_den);
    }
    let unit = if st.d_int % p == 0 {
        if (v.s + curve.d as i128).rem_euclid(p) != 0 {
            return Err(zero_den);
        }
        if st.d_int % (p * p) == 0 {
            return Err(Error::HypothesisViolated(format!(
                "p^2 divides the horizontal denominator at s = {}, t = {}",
                v.s, v.t
            )));
        }
        for x in out.iter_mut() {
            *x = ctx.div_p(x, 1)?;
        }
        ctx.from_i128(st.d_int / p)
    } else {
        st.d
    };
    let inv = ctx.inv(&unit)?;
    for x in out.iter_mut() {
        *x = ctx.mul(x, &inv);
    }
    Ok(WVec {
        s: v.s - 1,
        t: v.t,
        coeffs: out,
    })
}

/// Steps a vector down to W_{target,t} one step at a time.
pub fn h_reduce_to(curve: &CurveSpec, ctx: &RingCtx, mut v: WVec, target: i128) -> Result<WVec> {
    while v.s > target {
        v = h_reduce_one(curve, ctx, &v)?;
    }
    Ok(v)
}

/// The interval (p l, p(l+1) - d - 1] for block l.
fn interval(curve: &CurveSpec, l: u64) -> (u64, u64) {
    (curve.p * l, curve.p * (l + 1) - curve.d as u64 - 1)
}

/// D(l) and M(l) = M_H^t(p l, p(l+1) - d - 1) for each requested l,
/// labelled with precision `n`.
pub fn h_interval_matrices(
    curve: &CurveSpec,
    ctx: &RingCtx,
    t: i128,
    ells: &[u64],
    method: Method,
    n: u32,
) -> Vec<(PElt, PMat)> {
    let (lm, dl) = h_step_linmat(curve, ctx, t);
    let iv = IntervalSet::new(ells.iter().map(|&l| interval(curve, l)).collect());
    let ms = linrec::eval_intervals_or_naive(ctx, &lm, &iv, method);
    let ds = linrec::eval_intervals_or_naive(ctx, &dl, &iv, method);
    ds.into_iter()
        .zip(ms)
        .map(|(dm, m)| (dm.get(0, 0).clone().truncated(n), m.truncated(n)))
        .collect()
}

/// Values at `targets` of the polynomial (in l) through the known values
/// at l = 0, 1, ..., known.len() - 1.
pub fn h_interpolate(
    ctx: &RingCtx,
    known: &[(PElt, PMat)],
    targets: &[u64],
) -> Result<Vec<(PElt, PMat)>> {
    if targets.is_empty() {
        return Ok(vec![]);
    }
    let nodes: Vec<PElt> = (0..known.len() as u64).map(|l| ctx.from_u64(l)).collect();
    let ms: Vec<PMat> = known.iter().map(|(_, m)| m.clone()).collect();
    let ds: Vec<PMat> = known
        .iter()
        .map(|(d, _)| PMat::from_fn(1, 1, |_, _| d.clone()))
        .collect();
    let mc = vandermonde_solve(ctx, &nodes, &ms)?;
    let dc = vandermonde_solve(ctx, &nodes, &ds)?;
    Ok(targets
        .iter()
        .map(|&l| {
            let x = ctx.from_u64(l);
            let d = eval_matrix_poly(ctx, &dc, &x).get(0, 0).clone();
            (d, eval_matrix_poly(ctx, &mc, &x))
        })
        .collect())
}

/// How the interval matrices of a strip are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HMode {
    /// Interval products by linear recurrences, optionally interpolating
    /// all but the first N of them.
    Intervals { method: Method, interpolation: bool },
    /// No interval matrices: every step is applied to the vector.
    Stepwise,
}

/// The matrices D(l)^-1 M(l) for l = 0..=ell_max at pole order t, or
/// `None` in stepwise mode.
pub fn h_strip_matrices(
    curve: &CurveSpec,
    ctx: &RingCtx,
    t: i128,
    ell_max: u64,
    mode: HMode,
    n: u32,
) -> Result<Option<Vec<PMat>>> {
    let HMode::Intervals {
        method,
        interpolation,
    } = mode
    else {
        return Ok(None);
    };
    let all: Vec<u64> = (0..=ell_max).collect();
    let big_l = (n as u64 - 1).min(ell_max);
    let pairs = if !interpolation || big_l == ell_max {
        h_interval_matrices(curve, ctx, t, &all, method, n)
    } else {
        // One extra node doubles as a self-check of the interpolation.
        let direct: Vec<u64> = (0..=big_l + 1).collect();
        let mut known = h_interval_matrices(curve, ctx, t, &direct, method, n);
        let check = known.pop().expect("at least two nodes");
        let targets: Vec<u64> = (big_l + 1..=ell_max).collect();
        let guessed = h_interpolate(ctx, &known, &targets)?;
        if ctx.eq_mod(&guessed[0].0, &check.0, n) && guessed[0].1.eq_mod(ctx, &check.1, n) {
            known.extend(guessed);
            known
        } else {
            log::warn!("interpolation self-check failed at t = {t}; computing directly");
            h_interval_matrices(curve, ctx, t, &all, method, n)
        }
    };
    pairs
        .into_iter()
        .map(|(d, m)| Ok(m.scale(ctx, &ctx.inv(&d)?)))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Reduces the k-th group of Frobenius terms of x^i dx / y^j, sitting at
/// pole order t = p(kr + j), down to W_{-1,t}.
///
/// `strip` holds D(l)^-1 M(l) for the intervals of this pole order, or is
/// `None` to step through every interval one step at a time.
pub fn h_reduce_full(
    curve: &CurveSpec,
    ctx: &RingCtx,
    terms: &FrobTerms,
    k: usize,
    strip: Option<&[PMat]>,
    n: u32,
) -> Result<WVec> {
    let (p, d) = (curve.p as i128, curve.d);
    let i = terms.i as i64;
    let t = p * (k as i128 * curve.r as i128 + terms.j as i128);
    let top = (d * k) as i64 + i + 1;
    let mut coeffs = vec![ctx.zero(); d];
    coeffs[0] = terms.get(ctx, k, top - i - 1);
    let mut v = WVec {
        s: p * top as i128 - 1,
        t,
        coeffs,
    };
    for l in (0..top).rev() {
        for _ in 0..d {
            v = h_reduce_one(curve, ctx, &v)?;
        }
        let base = p * l as i128;
        match strip {
            Some(mats) => {
                v.coeffs = mats[l as usize].mul_vec(ctx, &v.coeffs);
                v.s = base;
            }
            None => v = h_reduce_to(curve, ctx, v, base)?,
        }
        v = h_reduce_one(curve, ctx, &v)?;
        v.coeffs[0] = ctx.add(&v.coeffs[0], &terms.get(ctx, k, l - i - 1));
        let lead = &v.coeffs[0];
        if !ctx.is_zero_mod(lead, 1) || lead.prec() < n + 1 {
            return Err(Error::HypothesisViolated(format!(
                "lost 1-correctness at s = {}, t = {t}",
                v.s
            )));
        }
    }
    debug_assert_eq!(v.s, -1);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frob::{frob_terms, FrobCache};
    use num_bigint::BigUint;

    fn quintic127() -> CurveSpec {
        CurveSpec::new(127, 5, &[1, 0, 0, 0, 0, 1], Some(1)).unwrap()
    }

    #[test]
    fn step_denominator_example() {
        let c = quintic127();
        let ctx = c.ring();
        let st = h_step_matrix(&c, &ctx, 127 * 6, 126);
        assert_eq!(st.d_int, 3155);
        // P = 1, so only C_0 = r s is nonzero.
        assert_eq!(st.c[0].residue(), &BigUint::from(5u32 * 126));
        assert!(st.c[1..].iter().all(|x| ctx.is_zero_mod(x, ctx.w())));
    }

    #[test]
    fn step_relation_is_exact() {
        // D x^(s+d-1) - x^(s-1) C(x, s) = -r d(x^s y^-(t-r)) / (y^-t dx)
        //   = -(r s x^(s-1) F - (t - r) x^s F').
        let c = CurveSpec::new(31, 2, &[3, 1, 0, 1], None).unwrap();
        let ctx = c.ring();
        let f: Vec<i128> = c.f.iter().map(|&x| x as i128).collect();
        let r = 2i128;
        for (s, t) in [(1i128, 31i128), (7, 93), (40, 62), (3, 5)] {
            let st = h_step_matrix(&c, &ctx, t, s);
            // Coefficients of x^(s-1+e), e = 0..=d.
            let mut lhs = vec![ctx.zero(); c.d + 1];
            lhs[c.d] = st.d.clone();
            for h in 0..c.d {
                lhs[h] = ctx.sub(&lhs[h], &st.c[h]);
            }
            for (e, &fe) in f.iter().enumerate() {
                // x^(s-1) F contributes f_e, x^s F' contributes e f_e.
                let want = -(r * s * fe - (t - r) * e as i128 * fe);
                assert!(ctx.eq(&lhs[e], &ctx.from_i128(want)), "s = {s}, t = {t}, e = {e}");
            }
        }
    }

    #[test]
    fn zero_vector_stays_zero() {
        let c = quintic127();
        let ctx = c.ring();
        let v = WVec {
            s: 40,
            t: 127 * 6,
            coeffs: vec![ctx.zero(); 5],
        };
        let w = h_reduce_one(&c, &ctx, &v).unwrap();
        assert_eq!(w.s, 39);
        assert!(w.coeffs.iter().all(|x| ctx.is_zero_mod(x, ctx.w())));
    }

    #[test]
    fn unsanctioned_p_divisible_denominator_is_rejected() {
        // d(t - r) - r s = 0 mod p with s != -d mod p needs t != 0 mod p.
        let c = quintic127();
        let ctx = c.ring();
        let v = WVec {
            s: 1,
            t: 6,
            coeffs: vec![ctx.one(); 5],
        };
        // 5(6 - 5) - 5 = 0 exactly.
        assert_eq!(
            h_reduce_one(&c, &ctx, &v).unwrap_err(),
            Error::UnexpectedZeroDenominator { s: 1, t: 6 }
        );
    }

    #[test]
    fn linmat_agrees_with_sparse_step() {
        let c = CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], None).unwrap();
        let ctx = c.ring();
        let t = 1009 * 2;
        let (lm, dl) = h_step_linmat(&c, &ctx, t);
        for s in [0i128, 5, 1000, 2017] {
            let st = h_step_matrix(&c, &ctx, t, s);
            let m = lm.eval(&ctx, s as u64);
            for h in 0..c.d {
                for col in 0..c.d {
                    let want = if col == c.d - 1 {
                        st.c[h].clone()
                    } else if h == col + 1 {
                        st.d.clone()
                    } else {
                        ctx.zero()
                    };
                    assert!(ctx.eq(m.get(h, col), &want));
                }
            }
            assert!(ctx.eq(dl.eval(&ctx, s as u64).get(0, 0), &st.d));
        }
    }

    #[test]
    fn interpolation_matches_direct() {
        let c = CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], Some(2)).unwrap();
        let ctx = c.ring();
        let t = 1009 * (3 + 1);
        let all: Vec<u64> = (0..8).collect();
        let direct = h_interval_matrices(&c, &ctx, t, &all, Method::Naive, 2);
        let guessed = h_interpolate(&ctx, &direct[..2], &all[2..]).unwrap();
        for ((d1, m1), (d2, m2)) in direct[2..].iter().zip(&guessed) {
            assert!(ctx.eq_mod(d1, d2, 2));
            assert!(m1.eq_mod(&ctx, m2, 2));
        }
        assert!(h_interpolate(&ctx, &direct[..2], &[]).unwrap().is_empty());
        let constant = vec![direct[0].clone(), direct[0].clone()];
        let out = h_interpolate(&ctx, &constant, &[5]).unwrap();
        assert!(out[0].1.eq_mod(&ctx, &direct[0].1, 2));
    }

    #[test]
    fn strip_modes_agree() {
        let c = CurveSpec::new(211, 3, &[1, 2, 0, 1], None).unwrap();
        let ctx = c.ring();
        let cache = FrobCache::new(&c, &ctx);
        for k in 0..c.n as usize {
            for j in c.j_range() {
                let t = 211 * (k as i128 * 3 + j as i128);
                let ell_max = (c.d * k + c.d - 2) as u64;
                let modes = [
                    HMode::Stepwise,
                    HMode::Intervals { method: Method::Naive, interpolation: false },
                    HMode::Intervals { method: Method::Bsgs, interpolation: true },
                ];
                let strips: Vec<_> = modes
                    .iter()
                    .map(|&m| h_strip_matrices(&c, &ctx, t, ell_max, m, c.n).unwrap())
                    .collect();
                for i in 0..c.d - 1 {
                    let terms = frob_terms(&c, &ctx, &cache, i, j);
                    let outs: Vec<WVec> = strips
                        .iter()
                        .map(|s| h_reduce_full(&c, &ctx, &terms, k, s.as_deref(), c.n).unwrap())
                        .collect();
                    for o in &outs {
                        assert_eq!(o.s, -1);
                        assert!(ctx.is_zero_mod(&o.coeffs[0], c.n));
                        assert!(o.coeffs.iter().all(|x| x.prec() >= c.n));
                        for (a, b) in o.coeffs.iter().zip(&outs[0].coeffs) {
                            assert!(ctx.eq_mod(a, b, c.n));
                        }
                    }
                }
            }
        }
    }
}
