//! Arithmetic in Z/p^W with explicit absolute-precision tracking.
//!
//! Every element carries its full residue modulo p^W together with the
//! number of p-adic digits that are actually trusted. Digits above the
//! trusted precision are carried along but never compared.
//!
//! Products use the sharp absolute-precision rule: if `a` is known modulo
//! p^ka and `b` modulo p^kb then `ab` is known modulo
//! p^min(ka + v(b), kb + v(a)). This is never worse than the plain
//! `min(ka, kb)` rule, and it is what lets a vector that was multiplied by a
//! p-divisible denominator keep one extra digit through a later exact
//! division by p.

mod mat;
mod poly;

pub use mat::{eval_matrix_poly, mat_charpoly, vandermonde_solve, PMat};
pub use poly::{poly_xgcd_lift, PPoly};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fp;

/// The coefficient ring Z/p^W.
#[derive(Clone, Debug)]
pub struct RingCtx {
    p: u64,
    w: u32,
    pow: Vec<BigUint>,
}

/// An element of Z/p^W known modulo p^prec.
#[derive(Clone, Debug)]
pub struct PElt {
    residue: BigUint,
    prec: u32,
}

impl PElt {
    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// The same element with its trusted precision lowered to at most `k`.
    pub fn truncated(mut self, k: u32) -> PElt {
        self.prec = self.prec.min(k);
        self
    }
}

impl RingCtx {
    pub fn new(p: u64, w: u32) -> Result<Self> {
        if p < 3 || !fp::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        assert!(w >= 1, "working precision must be positive");
        let mut pow = Vec::with_capacity(w as usize + 1);
        pow.push(BigUint::one());
        for k in 1..=w as usize {
            let next = &pow[k - 1] * p;
            pow.push(next);
        }
        Ok(RingCtx { p, w, pow })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Working exponent W.
    pub fn w(&self) -> u32 {
        self.w
    }

    /// p^W.
    pub fn modulus(&self) -> &BigUint {
        &self.pow[self.w as usize]
    }

    /// p^k for 0 <= k <= W.
    pub fn p_pow(&self, k: u32) -> &BigUint {
        &self.pow[k as usize]
    }

    fn reduce(&self, x: BigUint) -> BigUint {
        if &x < self.modulus() {
            x
        } else {
            x % self.modulus()
        }
    }

    /// Wraps a raw residue (reduced modulo p^W) with the given precision.
    pub fn elt(&self, residue: BigUint, prec: u32) -> PElt {
        PElt {
            residue: self.reduce(residue),
            prec: prec.min(self.w),
        }
    }

    pub fn exact(&self, residue: BigUint) -> PElt {
        self.elt(residue, self.w)
    }

    pub fn zero(&self) -> PElt {
        self.exact(BigUint::zero())
    }

    pub fn one(&self) -> PElt {
        self.exact(BigUint::one())
    }

    pub fn from_u64(&self, a: u64) -> PElt {
        self.exact(BigUint::from(a))
    }

    pub fn from_i64(&self, a: i64) -> PElt {
        self.from_i128(a as i128)
    }

    pub fn from_i128(&self, a: i128) -> PElt {
        self.from_bigint(&BigInt::from(a))
    }

    pub fn from_bigint(&self, a: &BigInt) -> PElt {
        let m = BigInt::from_biguint(Sign::Plus, self.modulus().clone());
        let r = a.mod_floor(&m);
        self.exact(r.to_biguint().expect("mod_floor is nonnegative"))
    }

    /// p-adic valuation of the trusted part of `a`, capped at `a.prec`.
    pub fn valuation(&self, a: &PElt) -> u32 {
        valuation_capped(&a.residue, self.p, a.prec)
    }

    /// True if the residues agree modulo p^min(prec).
    pub fn eq(&self, a: &PElt, b: &PElt) -> bool {
        let k = a.prec.min(b.prec);
        self.eq_mod(a, b, k)
    }

    /// True if the residues agree modulo p^k (ignoring trusted precision).
    pub fn eq_mod(&self, a: &PElt, b: &PElt, k: u32) -> bool {
        let m = self.p_pow(k.min(self.w));
        (&a.residue % m) == (&b.residue % m)
    }

    pub fn is_zero_mod(&self, a: &PElt, k: u32) -> bool {
        (&a.residue % self.p_pow(k.min(self.w))).is_zero()
    }

    pub fn add(&self, a: &PElt, b: &PElt) -> PElt {
        PElt {
            residue: self.reduce(&a.residue + &b.residue),
            prec: a.prec.min(b.prec),
        }
    }

    pub fn sub(&self, a: &PElt, b: &PElt) -> PElt {
        let residue = if a.residue >= b.residue {
            &a.residue - &b.residue
        } else {
            self.modulus() - (&b.residue - &a.residue)
        };
        PElt {
            residue,
            prec: a.prec.min(b.prec),
        }
    }

    pub fn neg(&self, a: &PElt) -> PElt {
        let residue = if a.residue.is_zero() {
            BigUint::zero()
        } else {
            self.modulus() - &a.residue
        };
        PElt {
            residue,
            prec: a.prec,
        }
    }

    /// Precision of a product of elements with precisions and valuations
    /// as given.
    fn product_prec(&self, a: &PElt, b: &PElt) -> u32 {
        let w = self.w;
        if a.prec >= w && b.prec >= w {
            return w;
        }
        let via_a = if b.prec >= w {
            w
        } else {
            b.prec + self.valuation(a)
        };
        let via_b = if a.prec >= w {
            w
        } else {
            a.prec + self.valuation(b)
        };
        via_a.min(via_b).min(w)
    }

    pub fn mul(&self, a: &PElt, b: &PElt) -> PElt {
        PElt {
            residue: self.reduce(&a.residue * &b.residue),
            prec: self.product_prec(a, b),
        }
    }

    pub fn mul_u64(&self, a: &PElt, k: u64) -> PElt {
        self.mul(a, &self.from_u64(k))
    }

    /// a^e for e >= 0.
    pub fn pow(&self, a: &PElt, mut e: u64) -> PElt {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit; the result has the same precision as `a`.
    pub fn inv(&self, a: &PElt) -> Result<PElt> {
        let r = (&a.residue % self.p).to_u64().unwrap_or(0);
        if r == 0 || a.prec == 0 {
            return Err(Error::NonUnit);
        }
        let inv = a
            .residue
            .modinv(self.modulus())
            .ok_or(Error::NonUnit)?;
        Ok(PElt {
            residue: inv,
            prec: a.prec,
        })
    }

    /// a / b for a unit b.
    pub fn div(&self, a: &PElt, b: &PElt) -> Result<PElt> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Exact division by p^v; precision drops by exactly v.
    pub fn div_p(&self, a: &PElt, v: u32) -> Result<PElt> {
        if v > a.prec {
            return Err(Error::PrecisionExhausted {
                needed: v,
                have: a.prec,
            });
        }
        let (q, r) = a.residue.div_rem(self.p_pow(v));
        if !r.is_zero() {
            return Err(Error::InexactDivision { v });
        }
        Ok(PElt {
            residue: q,
            prec: a.prec - v,
        })
    }

    /// Multiplication by p^v; precision rises by v (capped at W).
    pub fn mul_p(&self, a: &PElt, v: u32) -> PElt {
        PElt {
            residue: self.reduce(&a.residue * self.p_pow(v.min(self.w))),
            prec: (a.prec + v).min(self.w),
        }
    }

    /// Representative in (-p^k/2, p^k/2] of the residue modulo p^k.
    pub fn lift_symmetric(&self, a: &PElt, k: u32) -> BigInt {
        let m = self.p_pow(k.min(self.w));
        let r = &a.residue % m;
        let half = m >> 1u32;
        if r > half {
            BigInt::from(r) - BigInt::from(m.clone())
        } else {
            BigInt::from(r)
        }
    }

    /// The residue modulo p as a word.
    pub fn residue_mod_p(&self, a: &PElt) -> u64 {
        (&a.residue % self.p).to_u64().unwrap()
    }
}

/// Largest k <= cap with p^k | x.
pub(crate) fn valuation_capped(x: &BigUint, p: u64, cap: u32) -> u32 {
    if x.is_zero() {
        return cap;
    }
    let mut v = 0;
    let mut y = x.clone();
    while v < cap {
        let (q, r) = y.div_rem(&BigUint::from(p));
        if !r.is_zero() {
            break;
        }
        y = q;
        v += 1;
    }
    v
}
