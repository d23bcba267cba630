//! The curve y^r = F(x) over F_p, its basis of differentials, and the
//! precision needed to pin down its L-polynomial.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fp::{self, FpPoly};
use crate::padic::{PPoly, RingCtx};

/// A validated cyclic cover y^r = F(x) of the projective line over F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    pub p: u64,
    pub r: u64,
    /// Coefficients as given by the caller, ascending.
    pub coeffs: Vec<i64>,
    /// Coefficients reduced into [0, p), ascending, length d + 1.
    pub f: Vec<u64>,
    pub d: usize,
    pub delta: u64,
    pub eps: u64,
    pub g: u64,
    pub f_d: u64,
    /// Target p-adic precision of the Frobenius matrix.
    pub n: u32,
}

/// A basis differential x^i dx / y^j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub i: usize,
    pub j: u64,
}

pub fn genus(d: usize, r: u64) -> u64 {
    let d = d as u64;
    let delta = fp::gcd_u64(r, d);
    ((d - 1) * (r - 1) - (delta - 1)) / 2
}

/// Smallest N with p^N >= (4g/i) p^(i/2) for every 1 <= i <= g.
///
/// The inequality is tested as i^2 p^(2N-i) >= 16 g^2 with exact
/// integers, moving p^(i-2N) to the other side when 2N < i.
pub fn choose_precision(p: u64, g: u64) -> u32 {
    let mut n = 1u32;
    for i in 1..=g {
        let mut m = 0u32;
        while !precision_suffices(p, g, i, m) {
            m += 1;
        }
        n = n.max(m);
    }
    n
}

fn precision_suffices(p: u64, g: u64, i: u64, m: u32) -> bool {
    let two_m = 2 * m as i64;
    let (mut lhs, mut rhs) = (BigInt::from(i * i), BigInt::from(16u64) * g * g);
    let e = two_m - i as i64;
    if e >= 0 {
        lhs *= num_traits::pow(BigInt::from(p), e as usize);
    } else {
        rhs *= num_traits::pow(BigInt::from(p), (-e) as usize);
    }
    lhs >= rhs
}

impl CurveSpec {
    /// Validates the curve and fixes N (from the genus unless overridden).
    pub fn new(p: u64, r: u64, coeffs: &[i64], n_override: Option<u32>) -> Result<Self> {
        if p < 3 || !fp::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let deg_in = coeffs.iter().rposition(|&c| c != 0).unwrap_or(0);
        if r < 2 {
            return Err(Error::DegenerateCover { r, d: deg_in });
        }
        let f: Vec<u64> = coeffs[..=deg_in.min(coeffs.len().saturating_sub(1))]
            .iter()
            .map(|&c| fp::reduce_i128(c as i128, p))
            .collect();
        if deg_in == 0 || f.len() != deg_in + 1 || f[deg_in] == 0 {
            return Err(Error::LeadingCoeffVanishes { p });
        }
        let d = deg_in;
        if r as usize + d < 5 {
            return Err(Error::DegenerateCover { r, d });
        }
        let fp_poly = FpPoly::new(p, f.clone());
        if fp_poly.gcd(&fp_poly.derivative()).degree() != Some(0) {
            return Err(Error::NotSquarefree { p });
        }
        let delta = fp::gcd_u64(r, d as u64);
        let eps = u64::from(delta > 1);
        let g = genus(d, r);
        let n = n_override.unwrap_or_else(|| choose_precision(p, g)).max(1);
        let bound = d as u128 * (n as u128 + eps as u128) * r as u128;
        if (p as u128) <= bound {
            return Err(Error::PTooSmall {
                p,
                bound: bound.min(u64::MAX as u128) as u64,
                n,
            });
        }
        Ok(CurveSpec {
            p,
            r,
            coeffs: coeffs.to_vec(),
            f_d: f[d],
            f,
            d,
            delta,
            eps,
            g,
            n,
        })
    }

    /// Working ring Z/p^(N+2): one guard digit for the p-divisible
    /// horizontal steps and one for the vertical batches.
    pub fn ring(&self) -> RingCtx {
        RingCtx::new(self.p, self.n + 2).expect("p was validated as prime")
    }

    /// F lifted to the working ring with coefficients in [0, p).
    pub fn f_poly(&self, ctx: &RingCtx) -> PPoly {
        PPoly::new(self.f.iter().map(|&c| ctx.from_u64(c)).collect())
    }

    /// First pole order j of the basis.
    pub fn j_min(&self) -> u64 {
        self.eps * self.r + 1
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<u64> {
        self.j_min()..=(1 + self.eps) * self.r - 1
    }

    /// Number of basis differentials, (d - 1)(r - 1).
    pub fn basis_size(&self) -> usize {
        (self.d - 1) * (self.r as usize - 1)
    }

    /// Basis in its fixed order: j outer, i inner.
    pub fn basis(&self) -> Vec<BasisIndex> {
        self.j_range()
            .flat_map(|j| (0..self.d - 1).map(move |i| BasisIndex { i, j }))
            .collect()
    }

    pub fn index_of(&self, b: BasisIndex) -> usize {
        (b.j - self.j_min()) as usize * (self.d - 1) + b.i
    }

    /// Cycle type of Frobenius on the points at infinity.
    pub fn infinity_cycle_type(&self) -> Vec<usize> {
        infinity_cycle_type(self.p, self.delta, self.f_d)
    }

    /// U(t) = det(tI - P) / (t - 1), ascending integer coefficients.
    pub fn ker_eta_charpoly(&self) -> Vec<BigInt> {
        ker_eta_charpoly(self.p, self.delta, self.f_d)
    }
}

/// Degrees of the irreducible factors of T^delta - f_d over F_p.
pub fn infinity_cycle_type(p: u64, delta: u64, f_d: u64) -> Vec<usize> {
    let mut c = vec![0u64; delta as usize + 1];
    c[0] = fp::sub_mod(0, f_d % p, p);
    c[delta as usize] = 1;
    FpPoly::new(p, c).factor_degrees()
}

/// det(tI - P) / (t - 1) for the permutation P of the roots of
/// T^delta - f_d.
pub fn ker_eta_charpoly(p: u64, delta: u64, f_d: u64) -> Vec<BigInt> {
    let full = cycle_charpoly(&infinity_cycle_type(p, delta, f_d));
    let (u, rem) = div_by_t_minus_one(&full);
    assert!(rem.is_zero(), "t - 1 must divide the permutation charpoly");
    assert_eq!(mul_int_poly(&u, &[-BigInt::one(), BigInt::one()]), full);
    u
}

/// Product of t^e - 1 over the cycle lengths e.
pub fn cycle_charpoly(cycles: &[usize]) -> Vec<BigInt> {
    cycles.iter().fold(vec![BigInt::one()], |acc, &e| {
        let mut f = vec![BigInt::zero(); e + 1];
        f[0] = -BigInt::one();
        f[e] = BigInt::one();
        mul_int_poly(&acc, &f)
    })
}

/// Closed form of U(t) for monic F: product over i | delta, i > 1 of
/// (t^k_i - 1)^(phi(i)/k_i), where k_i is the order of p modulo i.
pub fn ker_eta_charpoly_monic(p: u64, delta: u64) -> Vec<BigInt> {
    let mut cycles = Vec::new();
    for i in 2..=delta {
        if delta % i != 0 {
            continue;
        }
        let k = multiplicative_order(p % i, i);
        let phi = (1..=i).filter(|&a| fp::gcd_u64(a, i) == 1).count() as u64;
        cycles.extend(std::iter::repeat_n(k as usize, (phi / k) as usize));
    }
    cycle_charpoly(&cycles)
}

fn multiplicative_order(a: u64, m: u64) -> u64 {
    let mut x = a % m;
    let mut k = 1;
    while x != 1 {
        x = fp::mul_mod(x, a, m);
        k += 1;
    }
    k
}

pub(crate) fn mul_int_poly(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Synthetic division by t - 1; returns (quotient, remainder).
fn div_by_t_minus_one(f: &[BigInt]) -> (Vec<BigInt>, BigInt) {
    if f.len() <= 1 {
        return (vec![], f.first().cloned().unwrap_or_default());
    }
    let mut q = vec![BigInt::zero(); f.len() - 1];
    let mut carry = BigInt::zero();
    for k in (1..f.len()).rev() {
        carry += &f[k];
        q[k - 1] = carry.clone();
    }
    (q, carry + &f[0])
}
