//! Vertical reduction: lowering the pole order of x^i y^-(rt+j) dx with
//! i <= d - 2, one step of r at a time.
//!
//! Writing x^i = R_i F + S_i F' gives
//! D x^i y^-(rt+j) dx ~ ((rt - r + j) R_i + r S_i') y^-(r(t-1)+j) dx with
//! D = rt - r + j. Exactly one t in every run of p consecutive steps makes D
//! divisible by p, so the steps are grouped into batches of length p whose
//! numerator product is divisible by p; each batch then costs one digit.

use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::linrec::{self, IntervalSet, LinMat, Method};
use crate::padic::{poly_xgcd_lift, PElt, PMat, PPoly, RingCtx};

/// Coefficients of x^i y^-(rt+j) dx for i = 0..d-2.
#[derive(Clone, Debug)]
pub struct VVec {
    pub j: u64,
    pub t: i128,
    pub coeffs: Vec<PElt>,
}

/// M_V^j(t) and D_V^j(t) = rt - r + j.
#[derive(Clone, Debug)]
pub struct VStep {
    pub j: u64,
    pub t: i128,
    pub d: PElt,
    pub m: PMat,
}

/// The pairs (R_i, S_i) with x^i = R_i F + S_i F', deg R_i < d - 1 and
/// deg S_i < d, for i = 0..d-2.
#[derive(Clone, Debug)]
pub struct Bezout {
    pub r: Vec<PPoly>,
    pub s: Vec<PPoly>,
}

fn pad(ctx: &RingCtx, f: PPoly, len: usize, what: &str) -> Result<PPoly> {
    let f = f.trimmed(ctx);
    if f.len() > len {
        return Err(Error::HypothesisViolated(format!(
            "{what} has degree {} but must stay below {len}",
            f.len() - 1
        )));
    }
    Ok(PPoly::new(
        (0..len).map(|k| f.coeff(ctx, k)).collect(),
    ))
}

pub fn bezout_rs(curve: &CurveSpec, ctx: &RingCtx) -> Result<Bezout> {
    let d = curve.d;
    let f = curve.f_poly(ctx);
    let fprime = f.derivative(ctx);
    let (r0, s0) = poly_xgcd_lift(ctx, &f, &fprime)?;
    let mut out = Bezout {
        r: Vec::with_capacity(d - 1),
        s: Vec::with_capacity(d - 1),
    };
    for i in 0..d.saturating_sub(1) {
        let a = PPoly::monomial(ctx, i);
        let (t, s) = a.mul(ctx, &s0).div_rem(ctx, &f)?;
        let r = a.mul(ctx, &r0).add(ctx, &t.mul(ctx, &fprime));
        let r = pad(ctx, r, d - 1, "R_i")?;
        let s = pad(ctx, s, d, "S_i")?;
        let back = r.mul(ctx, &f).add(ctx, &s.mul(ctx, &fprime));
        if !back.eq(ctx, &a) {
            return Err(Error::HypothesisViolated(format!(
                "R_{i} F + S_{i} F' does not reproduce x^{i}"
            )));
        }
        out.r.push(r);
        out.s.push(s);
    }
    Ok(out)
}

pub fn v_step_matrix(curve: &CurveSpec, ctx: &RingCtx, bez: &Bezout, j: u64, t: i128) -> VStep {
    let r = curve.r as i128;
    let dv = ctx.from_i128(r * t - r + j as i128);
    let n = curve.d - 1;
    let cols: Vec<PPoly> = (0..n)
        .map(|i| {
            bez.r[i]
                .scale(ctx, &dv)
                .add(ctx, &bez.s[i].derivative(ctx).scale(ctx, &ctx.from_i128(r)))
        })
        .collect();
    VStep {
        j,
        t,
        d: dv,
        m: PMat::from_fn(n, n, |row, col| cols[col].coeff(ctx, row)),
    }
}

/// M_V^j(t) = M0 + t M1, and D_V^j(t) as a 1 x 1 linear matrix.
pub fn v_step_linmat(curve: &CurveSpec, ctx: &RingCtx, bez: &Bezout, j: u64) -> (LinMat, LinMat) {
    let r = curve.r as i128;
    let n = curve.d - 1;
    let re = ctx.from_i128(r);
    let m1 = PMat::from_fn(n, n, |row, col| ctx.mul(&re, &bez.r[col].coeff(ctx, row)));
    let shift = ctx.from_i128(j as i128 - r);
    let m0 = PMat::from_fn(n, n, |row, col| {
        let a = ctx.mul(&shift, &bez.r[col].coeff(ctx, row));
        let b = ctx.mul(&re, &bez.s[col].derivative(ctx).coeff(ctx, row));
        ctx.add(&a, &b)
    });
    let scalar = |x: i128| PMat::from_fn(1, 1, |_, _| ctx.from_i128(x));
    (
        LinMat::new(m0, m1),
        LinMat::new(scalar(j as i128 - r), scalar(r)),
    )
}

/// Alignment of the descent for the basis column with pole order j:
/// p(kr + j) = r(p(k + lambda) + delta_loc) + beta.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VPlan {
    pub j: u64,
    pub alpha: u64,
    pub beta: u64,
    pub lambda: u64,
    pub delta_loc: u64,
}

impl VPlan {
    pub fn new(curve: &CurveSpec, j: u64) -> Self {
        let (p, r, eps) = (curve.p, curve.r, curve.eps);
        let alpha = p * j / r;
        let beta = p * j % r;
        let lambda = (alpha - eps) / p;
        let delta_loc = (alpha - eps) % p + eps;
        let plan = VPlan {
            j,
            alpha,
            beta,
            lambda,
            delta_loc,
        };
        for k in 0..curve.n as u64 + 1 {
            assert_eq!(
                p as u128 * (k * r + j) as u128,
                r as u128 * plan.level(k, p) as u128 + beta as u128,
                "vertical alignment identity"
            );
        }
        plan
    }

    /// The vertical index t of the horizontal output at y-group k.
    pub fn level(&self, k: u64, p: u64) -> u64 {
        p * (k + self.lambda) + self.delta_loc
    }
}

/// M(0) = D_V(eps, delta_loc)^-1 M_V(eps, delta_loc) and the batches
/// M(l) = D_V(t_l, t_l + p)^-1 M_V(t_l, t_l + p), t_l = delta_loc + p(l-1),
/// for l = 1..=lambda + n - 1.
///
/// Batches are computed with n + 1 digits and divided by p once; the
/// integrality facts that make this legal are checked on the way.
pub fn v_batch_matrices(
    curve: &CurveSpec,
    ctx: &RingCtx,
    bez: &Bezout,
    plan: &VPlan,
    method: Method,
    n: u32,
) -> Result<Vec<PMat>> {
    let (p, r) = (curve.p, curve.r as i128);
    let beta = plan.beta;
    let (lm, dl) = v_step_linmat(curve, ctx, bez, beta);
    let delta = plan.delta_loc;
    let count = plan.lambda + n as u64 - 1;
    let mut iv = vec![(curve.eps, delta)];
    iv.extend((1..=count).map(|l| (delta + p * (l - 1), delta + p * l)));
    let iv = IntervalSet::new(iv);
    let ms = linrec::eval_intervals_or_naive(ctx, &lm, &iv, method);
    let ds = linrec::eval_intervals_or_naive(ctx, &dl, &iv, method);
    let mut out = Vec::with_capacity(ms.len());
    for (l, (m, dm)) in ms.into_iter().zip(ds).enumerate() {
        let m = m.truncated(n + 1);
        let den = dm.get(0, 0).clone().truncated(n + 1);
        if l == 0 {
            out.push(m.scale(ctx, &ctx.inv(&den)?));
            continue;
        }
        let t1 = (delta + p * (l as u64 - 1)) as i128;
        // The single p-divisible denominator of the batch sits at t1 + 1.
        let dv = r * t1 + beta as i128;
        let pi = p as i128;
        if dv % pi != 0 || dv % (pi * pi) == 0 {
            return Err(Error::HypothesisViolated(format!(
                "vertical denominator {dv} at t = {} does not have valuation one",
                t1 + 1
            )));
        }
        let step = v_step_matrix(curve, ctx, bez, beta, t1 + 1).m;
        if step.det_mod_p(ctx) == 0 {
            return Err(Error::IntegralityViolation(format!(
                "M_V({}) is singular modulo p",
                t1 + 1
            )));
        }
        if m.entries().iter().any(|e| !ctx.is_zero_mod(e, 1)) {
            return Err(Error::IntegralityViolation(format!(
                "batch matrix on ({t1}, {}] is not divisible by p",
                t1 + p as i128
            )));
        }
        let m = PMat::from_entries(
            m.rows(),
            m.cols(),
            m.entries()
                .iter()
                .map(|e| ctx.div_p(e, 1))
                .collect::<Result<Vec<_>>>()?,
        );
        let unit = ctx.div_p(&den, 1)?;
        out.push(m.scale(ctx, &ctx.inv(&unit)?));
    }
    audit_almost_integrality(curve, ctx, &lm, &dl, plan, method, n)?;
    Ok(out)
}

/// p D_V(t1, t2)^-1 M_V(t1, t2) is integral for every interval of the run.
/// The sharpest case is an interval of length p + 1 containing two
/// p-divisible denominators, where it forces M_V(t1, t2) = 0 mod p.
fn audit_almost_integrality(
    curve: &CurveSpec,
    ctx: &RingCtx,
    lm: &LinMat,
    dl: &LinMat,
    plan: &VPlan,
    method: Method,
    n: u32,
) -> Result<()> {
    let (t1, t2) = (plan.delta_loc, plan.delta_loc + curve.p + 1);
    let iv = IntervalSet::new(vec![(t1, t2)]);
    let m = &linrec::eval_intervals_or_naive(ctx, lm, &iv, method)[0];
    let den = &linrec::eval_intervals_or_naive(ctx, dl, &iv, method)[0];
    let vd = ctx.valuation(&den.get(0, 0).clone().truncated(n + 1));
    let need = vd.saturating_sub(1);
    if m
        .entries()
        .iter()
        .any(|e| !ctx.is_zero_mod(e, need.min(n + 1)))
    {
        return Err(Error::IntegralityViolation(format!(
            "p D_V^-1 M_V has negative valuation on ({t1}, {t2}]"
        )));
    }
    Ok(())
}

/// Runs the descent for one basis element. `w[k]` is the horizontal output
/// for y-group k, as a vector in V^beta at level p(k + lambda) + delta_loc;
/// the result lies at pole order eps r + beta.
pub fn v_reduce(plan: &VPlan, ctx: &RingCtx, batches: &[PMat], w: &[Vec<PElt>]) -> Vec<PElt> {
    let n = w.len() as u64;
    let lambda = plan.lambda;
    let mut v = w[n as usize - 1].clone();
    for k in (1..n + lambda).rev() {
        v = batches[k as usize].mul_vec(ctx, &v);
        if k > lambda {
            let add = &w[(k - 1 - lambda) as usize];
            v = v.iter().zip(add).map(|(a, b)| ctx.add(a, b)).collect();
        }
    }
    batches[0].mul_vec(ctx, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bezout_small_example() {
        let c = CurveSpec::new(101, 3, &[1, 0, 1], None).unwrap();
        let ctx = c.ring();
        let b = bezout_rs(&c, &ctx).unwrap();
        let f = c.f_poly(&ctx);
        let back = b.r[0]
            .mul(&ctx, &f)
            .add(&ctx, &b.s[0].mul(&ctx, &f.derivative(&ctx)));
        assert!(back.eq(&ctx, &PPoly::constant(ctx.one())));
    }

    #[test]
    fn bezout_identities_and_degrees() {
        let curves = [
            CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], None).unwrap(),
            CurveSpec::new(10007, 5, &[1, 0, 0, 0, 0, 1], None).unwrap(),
            CurveSpec::new(4093, 2, &[3, 1, 4, 1, 5, 9, 2, 6], None).unwrap(),
        ];
        for c in &curves {
            let ctx = c.ring();
            let b = bezout_rs(c, &ctx).unwrap();
            let f = c.f_poly(&ctx);
            let fp = f.derivative(&ctx);
            for i in 0..c.d - 1 {
                assert_eq!(b.r[i].len(), c.d - 1);
                assert_eq!(b.s[i].len(), c.d);
                let back = b.r[i].mul(&ctx, &f).add(&ctx, &b.s[i].mul(&ctx, &fp));
                assert!(back.eq(&ctx, &PPoly::monomial(&ctx, i)));
            }
        }
    }

    #[test]
    fn scalar_case() {
        let c = CurveSpec::new(101, 3, &[1, 0, 1], None).unwrap();
        let ctx = c.ring();
        let b = bezout_rs(&c, &ctx).unwrap();
        let st = v_step_matrix(&c, &ctx, &b, 1, 4);
        let want = ctx.add(
            &ctx.mul(&ctx.from_i64(3 * 4 - 3 + 1), &b.r[0].coeff(&ctx, 0)),
            &ctx.mul(&ctx.from_i64(3), &b.s[0].derivative(&ctx).coeff(&ctx, 0)),
        );
        assert!(ctx.eq(st.m.get(0, 0), &want));
        assert!(ctx.eq(&st.d, &ctx.from_i64(10)));
    }

    #[test]
    fn linmat_agrees_with_step() {
        let c = CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], None).unwrap();
        let ctx = c.ring();
        let b = bezout_rs(&c, &ctx).unwrap();
        let (lm, dl) = v_step_linmat(&c, &ctx, &b, 2);
        for t in [1i128, 17, 3000] {
            let st = v_step_matrix(&c, &ctx, &b, 2, t);
            assert!(lm.eval(&ctx, t as u64).eq(&ctx, &st.m));
            assert!(ctx.eq(dl.eval(&ctx, t as u64).get(0, 0), &st.d));
        }
    }

    #[test]
    fn plan_identity() {
        let c = CurveSpec::new(10007, 5, &[1, 0, 0, 0, 0, 1], None).unwrap();
        for j in c.j_range() {
            let plan = VPlan::new(&c, j);
            assert!(plan.beta >= 1 && plan.beta < c.r);
            assert_eq!(plan.lambda, 1);
        }
    }

    #[test]
    fn trivial_descent() {
        let c = CurveSpec::new(101, 3, &[1, 0, 1, 1], Some(1)).unwrap();
        let ctx = c.ring();
        let b = bezout_rs(&c, &ctx).unwrap();
        let plan = VPlan::new(&c, c.j_min());
        let batches = v_batch_matrices(&c, &ctx, &b, &plan, Method::Naive, 1).unwrap();
        assert_eq!(batches.len() as u64, plan.lambda + 1);
        let zero = vec![vec![ctx.zero(); c.d - 1]];
        let out = v_reduce(&plan, &ctx, &batches, &zero);
        assert!(out.iter().all(|x| ctx.is_zero_mod(x, 1)));
    }

    #[test]
    fn batches_agree_between_methods() {
        let c = CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], None).unwrap();
        let ctx = c.ring();
        let b = bezout_rs(&c, &ctx).unwrap();
        for j in c.j_range() {
            let plan = VPlan::new(&c, j);
            let a = v_batch_matrices(&c, &ctx, &b, &plan, Method::Naive, c.n).unwrap();
            let z = v_batch_matrices(&c, &ctx, &b, &plan, Method::Bsgs, c.n).unwrap();
            for (x, y) in a.iter().zip(&z) {
                assert!(x.eq_mod(&ctx, y, c.n));
                assert!(x.min_prec(&ctx) >= c.n);
            }
        }
    }
}
