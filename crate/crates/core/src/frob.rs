//! Sparse Frobenius images of the basis differentials.
//!
//! Over a prime field the Frobenius lift sends F(x) to F(x^p), so
//! sigma(x^i dx / y^j) is a finite sum, modulo p^N, of monomials
//! x^(p(i+1)-1+pb) y^(-p(j+lr)) dx with coefficients
//! mu[l][b] = p D_{j,l} (F^l)_b.

use crate::curve::CurveSpec;
use crate::padic::{PElt, PPoly, RingCtx};

/// binom(-j/r, k) in Z/p^W. Requires k < p and p not dividing r.
pub fn binom_frac(ctx: &RingCtx, j: u64, r: u64, k: u64) -> PElt {
    let mut num = ctx.one();
    let mut den = ctx.one();
    for m in 0..k {
        num = ctx.mul(&num, &ctx.from_i128(-(j as i128) - (m as i128) * r as i128));
        den = ctx.mul(&den, &ctx.from_u64(r * (m + 1)));
    }
    ctx.div(&num, &den).expect("r and k! are units when k < p")
}

/// D_{j,l} = sum over l <= k < N of (-1)^(k-l) binom(-j/r, k) binom(k, l).
pub fn compute_d(ctx: &RingCtx, j: u64, l: u64, n: u64, r: u64) -> PElt {
    let mut acc = ctx.zero();
    for k in l..n {
        let term = ctx.mul(&binom_frac(ctx, j, r, k), &binom_int(ctx, k, l));
        acc = if (k - l) % 2 == 0 {
            ctx.add(&acc, &term)
        } else {
            ctx.sub(&acc, &term)
        };
    }
    acc
}

fn binom_int(ctx: &RingCtx, n: u64, k: u64) -> PElt {
    let mut c = num_bigint::BigUint::from(1u32);
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    ctx.exact(c)
}

/// Powers F^0, ..., F^(N-1), shared by every basis element.
#[derive(Clone, Debug)]
pub struct FrobCache {
    pub fpow: Vec<PPoly>,
}

impl FrobCache {
    pub fn new(curve: &CurveSpec, ctx: &RingCtx) -> Self {
        let f = curve.f_poly(ctx);
        let mut fpow = vec![PPoly::constant(ctx.one())];
        for l in 1..curve.n as usize {
            let next = fpow[l - 1].mul(ctx, &f);
            fpow.push(next);
        }
        FrobCache { fpow }
    }
}

/// The table mu[l][b], 0 <= l < N, 0 <= b <= dl, for the basis element
/// x^i dx / y^j.
#[derive(Clone, Debug)]
pub struct FrobTerms {
    pub i: usize,
    pub j: u64,
    pub mu: Vec<Vec<PElt>>,
}

impl FrobTerms {
    /// Exponents (a, t) of the monomial x^a y^(-t) dx carried by mu[l][b].
    pub fn monomial(&self, p: u64, r: u64, l: usize, b: usize) -> (u64, u64) {
        (
            p * (self.i as u64 + 1) - 1 + p * b as u64,
            p * (self.j + l as u64 * r),
        )
    }

    /// Coefficient mu[l][b], zero outside the table.
    pub fn get(&self, ctx: &RingCtx, l: usize, b: i64) -> PElt {
        if b < 0 {
            return ctx.zero();
        }
        self.mu
            .get(l)
            .and_then(|row| row.get(b as usize))
            .cloned()
            .unwrap_or_else(|| ctx.zero())
    }
}

pub fn frob_terms(
    curve: &CurveSpec,
    ctx: &RingCtx,
    cache: &FrobCache,
    i: usize,
    j: u64,
) -> FrobTerms {
    let n = curve.n as u64;
    let pe = ctx.from_u64(curve.p);
    let mu = (0..n)
        .map(|l| {
            let c = ctx.mul(&pe, &compute_d(ctx, j, l, n, curve.r));
            let pow = &cache.fpow[l as usize];
            (0..=curve.d * l as usize)
                .map(|b| ctx.mul(&c, &pow.coeff(ctx, b)))
                .collect()
        })
        .collect();
    FrobTerms { i, j, mu }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn res(a: &PElt) -> u64 {
        u64::try_from(a.residue()).unwrap()
    }

    #[test]
    fn binom_examples() {
        let ctx = RingCtx::new(7, 2).unwrap();
        assert_eq!(res(&binom_frac(&ctx, 1, 3, 0)), 1);
        // -1/3 mod 49: 3 * 16 = 48.
        assert_eq!(res(&binom_frac(&ctx, 1, 3, 1)), 16);
        assert_eq!(res(&binom_frac(&ctx, 1, 3, 2)), 22);
    }

    #[test]
    fn d_examples() {
        let ctx = RingCtx::new(101, 3).unwrap();
        // 15/8.
        let d = compute_d(&ctx, 1, 0, 3, 2);
        let expect = ctx.div(&ctx.from_u64(15), &ctx.from_u64(8)).unwrap();
        assert!(ctx.eq(&d, &expect));
        assert!(ctx.eq(&compute_d(&ctx, 1, 0, 1, 2), &ctx.one()));
        assert!(ctx.eq(&compute_d(&ctx, 3, 4, 5, 7), &binom_frac(&ctx, 3, 7, 4)));
    }

    #[test]
    fn single_term_when_n_is_one() {
        let c = CurveSpec::new(127, 5, &[1, 0, 0, 0, 0, 1], Some(1)).unwrap();
        let ctx = c.ring();
        let cache = FrobCache::new(&c, &ctx);
        let t = frob_terms(&c, &ctx, &cache, 2, 6);
        assert_eq!(t.mu.len(), 1);
        assert_eq!(res(&t.mu[0][0]), 127);
        assert_eq!(t.monomial(127, 5, 0, 0), (127 * 3 - 1, 127 * 6));
    }

    #[test]
    fn fermat_quintic_terms() {
        let c = CurveSpec::new(127, 5, &[1, 0, 0, 0, 0, 1], Some(2)).unwrap();
        let ctx = c.ring();
        let cache = FrobCache::new(&c, &ctx);
        let t = frob_terms(&c, &ctx, &cache, 0, 6);
        // mu[1][b] = 127 * binom(-6/5, 1) on b in {0, 5}.
        let expect = ctx.mul(
            &ctx.from_u64(127),
            &ctx.div(&ctx.from_i64(-6), &ctx.from_u64(5)).unwrap(),
        );
        for b in 0..=5 {
            let want = if b == 0 || b == 5 { expect.clone() } else { ctx.zero() };
            assert!(ctx.eq(&t.mu[1][b], &want), "b = {b}");
        }
        for row in &t.mu {
            for m in row {
                assert!(ctx.is_zero_mod(m, 1));
            }
        }
    }

    #[test]
    fn square_of_x5_plus_1() {
        let c = CurveSpec::new(10007, 5, &[1, 0, 0, 0, 0, 1], None).unwrap();
        let ctx = c.ring();
        let cache = FrobCache::new(&c, &ctx);
        let sq = &cache.fpow[2];
        let nz: Vec<(usize, BigUint)> = (0..sq.len())
            .filter(|&b| !ctx.is_zero_mod(&sq.coeff(&ctx, b), ctx.w()))
            .map(|b| (b, sq.coeff(&ctx, b).residue().clone()))
            .collect();
        let want: Vec<(usize, BigUint)> =
            vec![(0, 1u32.into()), (5, 2u32.into()), (10, 1u32.into())];
        assert_eq!(nz, want);
    }

    #[test]
    fn rows_reconstruct_scaled_powers() {
        let c = CurveSpec::new(1009, 3, &[2, -1, 3, 1, 5], None).unwrap();
        let ctx = c.ring();
        let cache = FrobCache::new(&c, &ctx);
        let t = frob_terms(&c, &ctx, &cache, 1, 2);
        for l in 0..c.n as usize {
            let scale = ctx.mul(
                &ctx.from_u64(c.p),
                &compute_d(&ctx, 2, l as u64, c.n as u64, c.r),
            );
            let want = cache.fpow[l].scale(&ctx, &scale);
            assert!(PPoly::new(t.mu[l].clone()).eq(&ctx, &want));
        }
    }
}
