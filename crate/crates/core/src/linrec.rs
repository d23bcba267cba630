//! Products M(a+1) M(a+2) ... M(b) of a matrix whose entries are linear in
//! the index, over many intervals at once.
//!
//! The baby-step giant-step method tabulates the block products
//! U(qB) = M(qB+1) ... M(qB+B) for all q by treating them as values of a
//! degree-B matrix polynomial in q and extending known values with
//! Lagrange shifts (Bostan, Gaudry and Schost). Each shift is one middle
//! product per matrix entry, done by Kronecker substitution on top of the
//! big-integer multiplier.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::padic::{PMat, RingCtx};

/// M(x) = M0 + x M1.
#[derive(Clone, Debug)]
pub struct LinMat {
    pub m0: PMat,
    pub m1: PMat,
}

impl LinMat {
    pub fn new(m0: PMat, m1: PMat) -> Self {
        assert_eq!(m0.rows(), m0.cols());
        assert_eq!((m0.rows(), m0.cols()), (m1.rows(), m1.cols()));
        LinMat { m0, m1 }
    }

    pub fn size(&self) -> usize {
        self.m0.rows()
    }

    pub fn eval(&self, ctx: &RingCtx, x: u64) -> PMat {
        self.m0.add(ctx, &self.m1.scale(ctx, &ctx.from_u64(x)))
    }

    fn prec(&self, ctx: &RingCtx) -> u32 {
        self.m0.min_prec(ctx).min(self.m1.min_prec(ctx))
    }
}

/// Sorted, non-overlapping half-open intervals (a, b].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSet(Vec<(u64, u64)>);

impl IntervalSet {
    pub fn new(iv: Vec<(u64, u64)>) -> Self {
        for w in iv.windows(2) {
            assert!(w[0].1 <= w[1].0, "intervals must be sorted and disjoint");
        }
        for &(a, b) in &iv {
            assert!(a <= b, "interval ({a}, {b}] is reversed");
        }
        IntervalSet(iv)
    }

    pub fn intervals(&self) -> &[(u64, u64)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Right end of the last interval.
    pub fn end(&self) -> u64 {
        self.0.last().map_or(0, |iv| iv.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Bsgs,
    Naive,
}

/// All interval products. Output precision is the minimum precision of
/// M0 and M1; the residues are identical for both methods.
pub fn eval_intervals(
    ctx: &RingCtx,
    lm: &LinMat,
    iv: &IntervalSet,
    method: Method,
) -> Result<Vec<PMat>> {
    let raw = Raw::from_linmat(ctx, lm);
    let out = match method {
        Method::Naive => iv
            .intervals()
            .iter()
            .map(|&(a, b)| raw.naive(ctx, a, b))
            .collect(),
        Method::Bsgs => bsgs(ctx, &raw, iv)?,
    };
    let prec = lm.prec(ctx);
    Ok(out.into_iter().map(|m| m.to_pmat(ctx, prec)).collect())
}

/// Interval products, falling back to the naive method when the
/// baby-step giant-step preconditions fail.
pub fn eval_intervals_or_naive(
    ctx: &RingCtx,
    lm: &LinMat,
    iv: &IntervalSet,
    method: Method,
) -> Vec<PMat> {
    match eval_intervals(ctx, lm, iv, method) {
        Ok(v) => v,
        Err(e) => {
            log::debug!("falling back to naive interval products: {e}");
            eval_intervals(ctx, lm, iv, Method::Naive).expect("naive products cannot fail")
        }
    }
}

/// Largest power of two B with B(B+1)/2 < p, so that every Lagrange shift
/// in the doubling phase has invertible denominators.
fn max_block(p: u64) -> u64 {
    let mut b = 1u64;
    while (2 * b) * (2 * b + 1) / 2 < p {
        b *= 2;
    }
    b
}

fn bsgs(ctx: &RingCtx, raw: &Raw, iv: &IntervalSet) -> Result<Vec<RawMat>> {
    let p = ctx.p();
    let k = iv.end();
    let h = iv.len() as u128;
    if h * h >= k as u128 {
        return Err(Error::PreconditionFailed(format!(
            "{h} intervals is not below sqrt(K) for K = {k}"
        )));
    }
    if k as u128 >= (p as u128 - 1).pow(2) {
        return Err(Error::PreconditionFailed(format!(
            "sqrt(K) is not below p - 1 for K = {k}"
        )));
    }
    let sqrt_k = (k as f64).sqrt() as u64;
    let mut b = max_block(p);
    while b > 1 && b > sqrt_k {
        b /= 2;
    }
    if b < 2 {
        return Err(Error::PreconditionFailed("block size below 2".into()));
    }
    let blocks = block_values(ctx, raw, b, k / b)?;
    Ok(iv
        .intervals()
        .iter()
        .map(|&(a, e)| {
            let q0 = a.div_ceil(b);
            let q1 = e / b;
            if q0 >= q1 {
                return raw.naive(ctx, a, e);
            }
            let mut acc = raw.naive(ctx, a, q0 * b);
            for blk in &blocks[q0 as usize..q1 as usize] {
                acc = acc.mul(ctx, blk);
            }
            acc.mul(ctx, &raw.naive(ctx, q1 * b, e))
        })
        .collect())
}

/// U(qB) = M(qB+1) ... M(qB+B) for q = 0..n.
fn block_values(ctx: &RingCtx, raw: &Raw, b: u64, n: u64) -> Result<Vec<RawMat>> {
    let modulus = ctx.modulus();
    let b_inv = BigUint::from(b)
        .modinv(modulus)
        .expect("block size is a power of two");
    // f_s(i) = U_s(iB), known at i = 0..=s.
    let mut vals = vec![raw.eval(ctx, 1), raw.eval(ctx, b + 1)];
    let mut s = 1u64;
    while s < b {
        let ext = shift(ctx, &vals, &BigUint::from(s + 1))?;
        let frac = (BigUint::from(s) * &b_inv) % modulus;
        let sh = shift(ctx, &vals, &frac)?;
        let sh2 = shift(ctx, &sh, &BigUint::from(s + 1))?;
        let f: Vec<&RawMat> = vals.iter().chain(&ext).collect();
        let g: Vec<&RawMat> = sh.iter().chain(&sh2).collect();
        vals = (0..=2 * s as usize)
            .into_par_iter()
            .map(|i| f[i].mul(ctx, g[i]))
            .collect();
        s *= 2;
    }
    while (vals.len() as u64) < n {
        let base = vals[vals.len() - b as usize - 1..].to_vec();
        vals.extend(shift(ctx, &base, &BigUint::from(b + 1))?);
    }
    vals.truncate(n as usize);
    Ok(vals)
}

/// Given values F(0..=s) of a matrix polynomial of degree at most s,
/// returns F(a), ..., F(a+s).
fn shift(ctx: &RingCtx, vals: &[RawMat], a: &BigUint) -> Result<Vec<RawMat>> {
    let modulus = ctx.modulus();
    let p = ctx.p();
    let s = vals.len() - 1;
    let m = vals[0].m;
    let a_mod = a % modulus;
    // a - s + n for n = 0..=2s, all of which must be units.
    let base = (&a_mod + modulus * (s as u64 + 1) - BigUint::from(s as u64)) % modulus;
    let lin: Vec<BigUint> = (0..=2 * s as u64).map(|n| (&base + n) % modulus).collect();
    if lin.iter().any(|x| (x % p).is_zero()) {
        return Err(Error::PreconditionFailed(
            "shift point collides with a sample point modulo p".into(),
        ));
    }
    let c = batch_inverse(&lin, modulus);
    // weights (-1)^(s-i) / (i! (s-i)!).
    let mut fact = vec![BigUint::one(); s + 1];
    for i in 1..=s {
        fact[i] = (&fact[i - 1] * i as u64) % modulus;
    }
    let fact_inv = batch_inverse(&fact, modulus);
    let weights: Vec<BigUint> = (0..=s)
        .map(|i| {
            let w = (&fact_inv[i] * &fact_inv[s - i]) % modulus;
            if (s - i) % 2 == 1 && !w.is_zero() {
                modulus - w
            } else {
                w
            }
        })
        .collect();
    // Delta_k = prod_{m=0..s} (a + k - m).
    let mut delta = vec![BigUint::zero(); s + 1];
    delta[0] = lin[..=s].iter().fold(BigUint::one(), |acc, x| (acc * x) % modulus);
    for k in 0..s {
        let next = (&delta[k] * &lin[k + s + 1]) % modulus;
        delta[k + 1] = (next * &c[k]) % modulus;
    }
    let kron = Kronecker::new(modulus, s);
    let c_packed = kron.pack(&c);
    let entries: Vec<Vec<BigUint>> = (0..m * m)
        .into_par_iter()
        .map(|e| {
            let w: Vec<BigUint> = (0..=s)
                .map(|i| (&vals[i].e[e] * &weights[i]) % modulus)
                .collect();
            let prod = kron.pack(&w) * &c_packed;
            kron.extract(&prod, s, s + 1)
                .into_iter()
                .zip(&delta)
                .map(|(z, dk)| (z % modulus) * dk % modulus)
                .collect()
        })
        .collect();
    Ok((0..=s)
        .map(|k| RawMat {
            m,
            e: (0..m * m).map(|e| entries[e][k].clone()).collect(),
        })
        .collect())
}

fn batch_inverse(xs: &[BigUint], modulus: &BigUint) -> Vec<BigUint> {
    let mut prefix = Vec::with_capacity(xs.len());
    let mut acc = BigUint::one();
    for x in xs {
        prefix.push(acc.clone());
        acc = (acc * x) % modulus;
    }
    let mut inv = acc.modinv(modulus).expect("all inputs are units");
    let mut out = vec![BigUint::zero(); xs.len()];
    for i in (0..xs.len()).rev() {
        out[i] = (&inv * &prefix[i]) % modulus;
        inv = (inv * &xs[i]) % modulus;
    }
    out
}

/// Packing of coefficient vectors into one integer with fixed-width
/// slots, wide enough that convolution sums never carry across slots.
struct Kronecker {
    words: usize,
}

impl Kronecker {
    fn new(modulus: &BigUint, s: usize) -> Self {
        let bits = 2 * modulus.bits() + (s as u64 + 1).ilog2() as u64 + 2;
        Kronecker {
            words: bits.div_ceil(32) as usize,
        }
    }

    fn pack(&self, xs: &[BigUint]) -> BigUint {
        let mut digits = vec![0u32; xs.len() * self.words];
        for (i, x) in xs.iter().enumerate() {
            for (k, d) in x.iter_u32_digits().enumerate() {
                digits[i * self.words + k] = d;
            }
        }
        BigUint::new(digits)
    }

    /// Slots start..start+count of a packed integer.
    fn extract(&self, z: &BigUint, start: usize, count: usize) -> Vec<BigUint> {
        let digits = z.to_u32_digits();
        (start..start + count)
            .map(|i| {
                let lo = (i * self.words).min(digits.len());
                let hi = ((i + 1) * self.words).min(digits.len());
                BigUint::new(digits[lo..hi].to_vec())
            })
            .collect()
    }
}

/// Square matrix of raw residues modulo p^W, row major.
#[derive(Clone, Debug)]
struct RawMat {
    m: usize,
    e: Vec<BigUint>,
}

impl RawMat {
    fn identity(m: usize) -> Self {
        let mut e = vec![BigUint::zero(); m * m];
        for i in 0..m {
            e[i * m + i] = BigUint::one();
        }
        RawMat { m, e }
    }

    fn mul(&self, ctx: &RingCtx, o: &RawMat) -> RawMat {
        let m = self.m;
        let mut e = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = BigUint::zero();
                for k in 0..m {
                    let (a, b) = (&self.e[i * m + k], &o.e[k * m + j]);
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                e.push(acc % ctx.modulus());
            }
        }
        RawMat { m, e }
    }

    fn to_pmat(&self, ctx: &RingCtx, prec: u32) -> PMat {
        PMat::from_fn(self.m, self.m, |i, j| {
            ctx.elt(self.e[i * self.m + j].clone(), prec)
        })
    }
}

struct Raw {
    m0: RawMat,
    m1: RawMat,
}

impl Raw {
    fn from_linmat(_ctx: &RingCtx, lm: &LinMat) -> Self {
        let conv = |a: &PMat| RawMat {
            m: a.rows(),
            e: a.entries().iter().map(|x| x.residue().clone()).collect(),
        };
        Raw {
            m0: conv(&lm.m0),
            m1: conv(&lm.m1),
        }
    }

    fn eval(&self, ctx: &RingCtx, x: u64) -> RawMat {
        let xb = BigUint::from(x);
        RawMat {
            m: self.m0.m,
            e: self
                .m0
                .e
                .iter()
                .zip(&self.m1.e)
                .map(|(a, b)| (a + b * &xb) % ctx.modulus())
                .collect(),
        }
    }

    fn naive(&self, ctx: &RingCtx, a: u64, b: u64) -> RawMat {
        let mut acc = RawMat::identity(self.m0.m);
        for x in a + 1..=b {
            acc = acc.mul(ctx, &self.eval(ctx, x));
        }
        acc
    }
}

/// Whether [`Method::Bsgs`] accepts h intervals ending at K.
pub fn bsgs_applicable(p: u64, k: u64, h: usize) -> bool {
    let h = h as u128;
    h * h < k as u128 && (k as u128) < (p as u128 - 1).pow(2) && max_block(p) >= 2 && k >= 4
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_linmat(ctx: &RingCtx, m: usize, rng: &mut ChaCha8Rng) -> LinMat {
        let mut rand_mat = || {
            PMat::from_fn(m, m, |_, _| {
                ctx.from_u64(rng.gen_range(0..ctx.p().pow(ctx.w())))
            })
        };
        let m0 = rand_mat();
        LinMat::new(m0, rand_mat())
    }

    #[test]
    fn scalar_factorial() {
        let ctx = RingCtx::new(101, 2).unwrap();
        let lm = LinMat::new(
            PMat::from_fn(1, 1, |_, _| ctx.zero()),
            PMat::from_fn(1, 1, |_, _| ctx.one()),
        );
        let iv = IntervalSet::new(vec![(0, 0), (0, 3)]);
        let out = eval_intervals(&ctx, &lm, &iv, Method::Naive).unwrap();
        assert!(out[0].eq(&ctx, &PMat::identity(&ctx, 1)));
        assert_eq!(out[1].get(0, 0).residue(), &BigUint::from(6u32));
    }

    #[test]
    fn factorial_by_bsgs() {
        // 1000! mod 1009^2 from a single long interval.
        let ctx = RingCtx::new(1009, 2).unwrap();
        let lm = LinMat::new(
            PMat::from_fn(1, 1, |_, _| ctx.zero()),
            PMat::from_fn(1, 1, |_, _| ctx.one()),
        );
        let iv = IntervalSet::new(vec![(0, 1000)]);
        let fast = eval_intervals(&ctx, &lm, &iv, Method::Bsgs).unwrap();
        let slow = eval_intervals(&ctx, &lm, &iv, Method::Naive).unwrap();
        assert!(fast[0].eq_mod(&ctx, &slow[0], 2));
    }

    #[test]
    fn preconditions() {
        let ctx = RingCtx::new(101, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lm = random_linmat(&ctx, 2, &mut rng);
        let iv = IntervalSet::new((0..5).map(|i| (i, i + 1)).collect());
        assert!(matches!(
            eval_intervals(&ctx, &lm, &iv, Method::Bsgs),
            Err(Error::PreconditionFailed(_))
        ));
        let long = IntervalSet::new(vec![(0, 100 * 100)]);
        assert!(matches!(
            eval_intervals(&ctx, &lm, &long, Method::Bsgs),
            Err(Error::PreconditionFailed(_))
        ));
        assert_eq!(eval_intervals_or_naive(&ctx, &lm, &iv, Method::Bsgs).len(), 5);
    }

    #[test]
    fn bsgs_matches_naive_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let primes = [10007u64, 3001, 65537, 1009, 20011];
        for case in 0..100 {
            let p = primes[case % primes.len()];
            let ctx = RingCtx::new(p, rng.gen_range(1..4)).unwrap();
            let m = rng.gen_range(1..=4);
            let lm = random_linmat(&ctx, m, &mut rng);
            let k = rng.gen_range(16..=10_000u64);
            let h = rng.gen_range(1..=10usize).min((k as f64).sqrt() as usize - 1);
            let mut cuts: Vec<u64> = (0..2 * h).map(|_| rng.gen_range(0..=k)).collect();
            cuts.push(k);
            cuts.sort();
            let mut iv: Vec<(u64, u64)> = cuts[cuts.len() - 2 * h..]
                .chunks(2)
                .map(|c| (c[0], c[1]))
                .collect();
            iv.last_mut().unwrap().1 = k;
            let iv = IntervalSet::new(iv);
            let fast = eval_intervals(&ctx, &lm, &iv, Method::Bsgs).unwrap();
            let slow = eval_intervals(&ctx, &lm, &iv, Method::Naive).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!(a.eq_mod(&ctx, b, ctx.w()), "case {case}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn multiplicative(seed in any::<u64>(), a in 0u64..300, l1 in 0u64..300, l2 in 0u64..300) {
            let ctx = RingCtx::new(1009, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lm = random_linmat(&ctx, 3, &mut rng);
            let (b, c) = (a + l1, a + l1 + l2);
            let whole = eval_intervals(&ctx, &lm, &IntervalSet::new(vec![(a, c)]), Method::Naive).unwrap();
            let parts = eval_intervals(&ctx, &lm, &IntervalSet::new(vec![(a, b), (b, c)]), Method::Naive).unwrap();
            prop_assert!(whole[0].eq_mod(&ctx, &parts[0].mul(&ctx, &parts[1]), 3));
            let single = eval_intervals(&ctx, &lm, &IntervalSet::new(vec![(a, a + 1)]), Method::Naive).unwrap();
            prop_assert!(single[0].eq_mod(&ctx, &lm.eval(&ctx, a + 1), 3));
        }

        #[test]
        fn precision_is_min_of_inputs(k1 in 1u32..4, k2 in 1u32..4) {
            let ctx = RingCtx::new(1009, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let lm = random_linmat(&ctx, 2, &mut rng);
            let lm = LinMat::new(lm.m0.truncated(k1), lm.m1.truncated(k2));
            let iv = IntervalSet::new(vec![(0, 500), (600, 900)]);
            for m in [Method::Naive, Method::Bsgs] {
                for out in eval_intervals(&ctx, &lm, &iv, m).unwrap() {
                    prop_assert_eq!(out.min_prec(&ctx), k1.min(k2));
                }
            }
        }
    }
}
