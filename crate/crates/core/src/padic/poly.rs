use num_bigint::BigUint;
use num_traits::Zero;

use super::{PElt, RingCtx};
use crate::error::{Error, Result};
use crate::fp::FpPoly;

const KARATSUBA_THRESHOLD: usize = 32;

/// Dense polynomial over Z/p^W, ascending coefficients.
///
/// Trailing coefficients that vanish to their precision are allowed; use
/// [`PPoly::degree`] for the effective degree.
#[derive(Clone, Debug)]
pub struct PPoly {
    pub coeffs: Vec<PElt>,
}

impl PPoly {
    pub fn new(coeffs: Vec<PElt>) -> Self {
        PPoly { coeffs }
    }

    pub fn zero() -> Self {
        PPoly { coeffs: vec![] }
    }

    pub fn constant(c: PElt) -> Self {
        PPoly { coeffs: vec![c] }
    }

    pub fn from_i64s(ctx: &RingCtx, c: &[i64]) -> Self {
        PPoly::new(c.iter().map(|&a| ctx.from_i64(a)).collect())
    }

    pub fn monomial(ctx: &RingCtx, k: usize) -> Self {
        let mut c = vec![ctx.zero(); k + 1];
        c[k] = ctx.one();
        PPoly::new(c)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of x^k (zero past the end).
    pub fn coeff(&self, ctx: &RingCtx, k: usize) -> PElt {
        self.coeffs.get(k).cloned().unwrap_or_else(|| ctx.zero())
    }

    /// Index of the last coefficient that is nonzero modulo p^prec.
    pub fn degree(&self, ctx: &RingCtx) -> Option<usize> {
        self.coeffs
            .iter()
            .rposition(|c| !ctx.is_zero_mod(c, c.prec()))
    }

    /// Drops trailing coefficients that vanish to their precision.
    pub fn trimmed(mut self, ctx: &RingCtx) -> Self {
        let n = self.degree(ctx).map_or(0, |d| d + 1);
        self.coeffs.truncate(n);
        self
    }

    pub fn min_prec(&self, ctx: &RingCtx) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(ctx.w())
    }

    fn min_valuation(&self, ctx: &RingCtx) -> u32 {
        self.coeffs
            .iter()
            .map(|c| ctx.valuation(c))
            .min()
            .unwrap_or(ctx.w())
    }

    pub fn add(&self, ctx: &RingCtx, o: &PPoly) -> PPoly {
        let n = self.len().max(o.len());
        PPoly::new(
            (0..n)
                .map(|i| ctx.add(&self.coeff(ctx, i), &o.coeff(ctx, i)))
                .collect(),
        )
    }

    pub fn sub(&self, ctx: &RingCtx, o: &PPoly) -> PPoly {
        let n = self.len().max(o.len());
        PPoly::new(
            (0..n)
                .map(|i| ctx.sub(&self.coeff(ctx, i), &o.coeff(ctx, i)))
                .collect(),
        )
    }

    pub fn scale(&self, ctx: &RingCtx, s: &PElt) -> PPoly {
        PPoly::new(self.coeffs.iter().map(|c| ctx.mul(c, s)).collect())
    }

    /// Product; schoolbook for short operands, Karatsuba above.
    ///
    /// Coefficient precision of the result is the uniform bound
    /// min(prec(a) + val(b), prec(b) + val(a)).
    pub fn mul(&self, ctx: &RingCtx, o: &PPoly) -> PPoly {
        if self.is_empty() || o.is_empty() {
            return PPoly::zero();
        }
        let w = ctx.w();
        let (pa, pb) = (self.min_prec(ctx), o.min_prec(ctx));
        let prec = if pa >= w && pb >= w {
            w
        } else {
            (pa + o.min_valuation(ctx)).min(pb + self.min_valuation(ctx)).min(w)
        };
        let a: Vec<BigUint> = self.coeffs.iter().map(|c| c.residue().clone()).collect();
        let b: Vec<BigUint> = o.coeffs.iter().map(|c| c.residue().clone()).collect();
        let raw = mul_raw(&a, &b);
        PPoly::new(raw.into_iter().map(|c| ctx.elt(c, prec)).collect())
    }

    pub fn derivative(&self, ctx: &RingCtx) -> PPoly {
        PPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| ctx.mul_u64(c, i as u64))
                .collect(),
        )
    }

    pub fn eval(&self, ctx: &RingCtx, x: &PElt) -> PElt {
        self.coeffs
            .iter()
            .rev()
            .fold(ctx.zero(), |acc, c| ctx.add(&ctx.mul(&acc, x), c))
    }

    /// Euclidean division by a polynomial whose leading coefficient is a
    /// unit.
    pub fn div_rem(&self, ctx: &RingCtx, b: &PPoly) -> Result<(PPoly, PPoly)> {
        let b = b.clone().trimmed(ctx);
        let db = b.len().checked_sub(1).ok_or(Error::NonUnit)?;
        let lead_inv = ctx.inv(&b.coeffs[db])?;
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return Ok((PPoly::zero(), self.clone()));
        }
        let mut q = vec![ctx.zero(); r.len() - db];
        for k in (0..q.len()).rev() {
            let coef = ctx.mul(&r[k + db], &lead_inv);
            for (i, bc) in b.coeffs.iter().enumerate() {
                r[k + i] = ctx.sub(&r[k + i], &ctx.mul(&coef, bc));
            }
            q[k] = coef;
        }
        r.truncate(db);
        Ok((PPoly::new(q), PPoly::new(r)))
    }

    /// Reduction modulo p as a word polynomial.
    pub fn to_fp(&self, ctx: &RingCtx) -> FpPoly {
        FpPoly::new(
            ctx.p(),
            self.coeffs.iter().map(|c| ctx.residue_mod_p(c)).collect(),
        )
    }

    pub fn from_fp(ctx: &RingCtx, f: &FpPoly) -> PPoly {
        PPoly::new(f.c.iter().map(|&a| ctx.from_u64(a)).collect())
    }

    /// Coefficientwise equality modulo p^min(prec).
    pub fn eq(&self, ctx: &RingCtx, o: &PPoly) -> bool {
        let n = self.len().max(o.len());
        (0..n).all(|i| ctx.eq(&self.coeff(ctx, i), &o.coeff(ctx, i)))
    }

    pub fn truncated(mut self, k: u32) -> PPoly {
        self.coeffs = self.coeffs.into_iter().map(|c| c.truncated(k)).collect();
        self
    }
}

/// Integer polynomial product of residue vectors, no reduction.
pub(crate) fn mul_raw(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    if a.len().min(b.len()) < KARATSUBA_THRESHOLD {
        return schoolbook(a, b);
    }
    karatsuba(a, b)
}

fn schoolbook(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_slices(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

fn karatsuba(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let n = a.len().max(b.len());
    let half = n / 2;
    let (a0, a1) = a.split_at(half.min(a.len()));
    let (b0, b1) = b.split_at(half.min(b.len()));
    let z0 = mul_raw(a0, b0);
    let z2 = mul_raw(a1, b1);
    let z1 = mul_raw(&add_slices(a0, a1), &add_slices(b0, b1));
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, c) in z0.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in z2.iter().enumerate() {
        out[i + 2 * half] += c;
    }
    // Middle term z1 - z0 - z2 is a genuine (nonnegative) product sum, so the
    // subtraction stays in the naturals once z1 has been added.
    for (i, c) in z1.iter().enumerate() {
        out[i + half] += c;
    }
    for (i, c) in z0.iter().enumerate() {
        out[i + half] -= c;
    }
    for (i, c) in z2.iter().enumerate() {
        out[i + half] -= c;
    }
    out
}

/// Bezout cofactors (R, S) with R*F + S*G = 1 modulo p^W, deg R < deg G and
/// deg S < deg F.
///
/// The relation is found modulo p by the extended Euclidean algorithm and
/// then lifted by Newton iteration, doubling the number of correct digits
/// per round. F must have a unit leading coefficient.
pub fn poly_xgcd_lift(ctx: &RingCtx, f: &PPoly, g: &PPoly) -> Result<(PPoly, PPoly)> {
    let f = f.clone().trimmed(ctx);
    let g = g.clone().trimmed(ctx);
    let (ff, gf) = (f.to_fp(ctx), g.to_fp(ctx));
    if ff.degree() != f.degree(ctx) {
        return Err(Error::NonUnit);
    }
    let (h, u, v) = ff.xgcd(&gf);
    if h.degree() != Some(0) {
        return Err(Error::NotCoprime);
    }
    let mut r = PPoly::from_fp(ctx, &u);
    let mut s = PPoly::from_fp(ctx, &v);
    // Normalize degrees: deg S < deg F (and then deg R < deg G follows).
    if !f.is_empty() {
        let (t, s_red) = s.div_rem(ctx, &f)?;
        r = r.add(ctx, &t.mul(ctx, &g));
        s = s_red;
    }
    let mut correct = 1u32;
    while correct < ctx.w() {
        let one = PPoly::constant(ctx.one());
        let e = one.sub(ctx, &r.mul(ctx, &f).add(ctx, &s.mul(ctx, &g)));
        let es = e.mul(ctx, &s);
        let (t, b) = es.div_rem(ctx, &f)?;
        let a = e.mul(ctx, &r).add(ctx, &t.mul(ctx, &g));
        r = r.add(ctx, &a);
        s = s.add(ctx, &b);
        correct *= 2;
    }
    // Intermediate rounds may leave high coefficients divisible by the
    // current p-power; once the relation holds modulo p^W they vanish.
    Ok((r.trimmed(ctx), s.trimmed(ctx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, w: u32) -> RingCtx {
        RingCtx::new(p, w).unwrap()
    }

    fn check_bezout(c: &RingCtx, f: &PPoly, g: &PPoly, r: &PPoly, s: &PPoly) {
        let lhs = r.mul(c, f).add(c, &s.mul(c, g));
        assert!(lhs.eq(c, &PPoly::constant(c.one())), "R F + S G != 1");
        if let Some(dr) = r.degree(c) {
            assert!(dr < g.degree(c).unwrap().max(1));
        }
        if let Some(ds) = s.degree(c) {
            assert!(ds < f.degree(c).unwrap().max(1));
        }
    }

    #[test]
    fn xgcd_trivial() {
        let c = ctx(7, 3);
        let f = PPoly::from_i64s(&c, &[0, 1]);
        let g = PPoly::from_i64s(&c, &[1]);
        let (r, s) = poly_xgcd_lift(&c, &f, &g).unwrap();
        assert!(r.degree(&c).is_none());
        assert!(s.eq(&c, &PPoly::constant(c.one())));
    }

    #[test]
    fn xgcd_lifts_to_49() {
        let c = ctx(7, 2);
        let f = PPoly::from_i64s(&c, &[1, 0, 1]);
        let g = f.derivative(&c);
        let (r, s) = poly_xgcd_lift(&c, &f, &g).unwrap();
        check_bezout(&c, &f, &g, &r, &s);
        // By hand: 1 = 1*(x^2+1) + (-x/2)*(2x); -1/2 = 24 mod 49.
        assert!(r.eq(&c, &PPoly::from_i64s(&c, &[1])));
        assert!(s.eq(&c, &PPoly::from_i64s(&c, &[0, 24])));
    }

    #[test]
    fn xgcd_not_coprime() {
        let c = ctx(7, 2);
        let f = PPoly::from_i64s(&c, &[0, 0, 1]);
        let g = PPoly::from_i64s(&c, &[0, 2]);
        assert_eq!(poly_xgcd_lift(&c, &f, &g).unwrap_err(), Error::NotCoprime);
    }

    #[test]
    fn karatsuba_matches_schoolbook() {
        let a: Vec<BigUint> = (0..77u32).map(|i| BigUint::from(i * i + 3)).collect();
        let b: Vec<BigUint> = (0..45u32).map(|i| BigUint::from(7 * i + 1)).collect();
        assert_eq!(karatsuba(&a, &b), schoolbook(&a, &b));
        assert_eq!(mul_raw(&b, &a), schoolbook(&a, &b));
    }

    proptest! {
        #[test]
        fn xgcd_lift_random(coeffs in proptest::collection::vec(-1000i64..1000, 2..8), w in 1u32..7) {
            let c = ctx(11, w);
            let mut coeffs = coeffs;
            let last = coeffs.len() - 1;
            if coeffs[last].rem_euclid(11) == 0 { coeffs[last] = 1; }
            let f = PPoly::from_i64s(&c, &coeffs);
            let g = f.derivative(&c);
            match poly_xgcd_lift(&c, &f, &g) {
                Ok((r, s)) => check_bezout(&c, &f, &g, &r, &s),
                Err(e) => {
                    prop_assert_eq!(e, Error::NotCoprime);
                    let ff = f.to_fp(&c);
                    prop_assert!(ff.gcd(&ff.derivative()).degree() != Some(0));
                }
            }
        }
    }
}
