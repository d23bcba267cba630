//! Brute-force point counts over F_{p^i}, i <= 3, for checking the
//! pipeline on small curves.

use rayon::prelude::*;

use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::fp::{self, FpPoly};

/// Largest field that will be enumerated.
pub const MAX_FIELD_SIZE: u128 = 100_000_000;

/// F_p[z]/(modulus) with elements stored as coefficient triples.
#[derive(Clone, Debug)]
pub struct SmallField {
    pub p: u64,
    pub degree: usize,
    /// Monic modulus, ascending, length degree + 1.
    pub modulus: Vec<u64>,
}

type Elt = [u64; 3];

impl SmallField {
    /// Uses the least monic irreducible polynomial of the given degree,
    /// comparing coefficients from z^(degree-1) down to z^0.
    pub fn new(p: u64, degree: usize) -> Self {
        assert!((1..=3).contains(&degree), "field degree must be 1, 2 or 3");
        let q = p.pow(degree as u32);
        let modulus = (0..q)
            .map(|code| {
                let mut c: Vec<u64> = (0..degree)
                    .map(|k| code / p.pow((degree - 1 - k) as u32) % p)
                    .rev()
                    .collect();
                c.push(1);
                c
            })
            .find(|c| is_irreducible_small(p, c))
            .expect("irreducible polynomials exist in every degree");
        SmallField { p, degree, modulus }
    }

    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Self {
        let degree = modulus.len() - 1;
        assert!((1..=3).contains(&degree) && modulus[degree] == 1);
        assert!(is_irreducible_small(p, &modulus), "modulus must be irreducible");
        SmallField { p, degree, modulus }
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.degree as u32)
    }

    fn element_at(&self, mut x: u64) -> Elt {
        let mut e = [0; 3];
        for c in e.iter_mut().take(self.degree) {
            *c = x % self.p;
            x /= self.p;
        }
        e
    }

    fn index(&self, e: &Elt) -> u64 {
        e[..self.degree]
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.p + c)
    }

    fn constant(&self, c: u64) -> Elt {
        [c % self.p, 0, 0]
    }

    fn add(&self, a: &Elt, b: &Elt) -> Elt {
        let p = self.p;
        [(a[0] + b[0]) % p, (a[1] + b[1]) % p, (a[2] + b[2]) % p]
    }

    fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        let (p, n) = (self.p, self.degree);
        let mut prod = [0u64; 5];
        for i in 0..n {
            for j in 0..n {
                prod[i + j] = (prod[i + j] + a[i] * b[j]) % p;
            }
        }
        for k in (n..2 * n - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (m, &mc) in self.modulus[..n].iter().enumerate() {
                prod[k - n + m] = (prod[k - n + m] + (p - mc) * c) % p;
            }
        }
        [prod[0], prod[1], prod[2]]
    }

    fn pow(&self, a: &Elt, mut e: u64) -> Elt {
        let mut base = *a;
        let mut acc = self.constant(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn generator(&self) -> Elt {
        let order = self.size() - 1;
        let primes = fp::prime_factors(order as u128);
        let one = self.constant(1);
        (1..self.size())
            .map(|x| self.element_at(x))
            .find(|g| primes.iter().all(|&l| self.pow(g, order / l as u64) != one))
            .expect("the multiplicative group is cyclic")
    }

    /// Membership table of the nonzero m-th powers, indexed like
    /// `element_at`.
    fn mth_powers(&self, m: u64) -> Vec<bool> {
        let mut table = vec![false; self.size() as usize];
        let step = self.pow(&self.generator(), m);
        let mut x = self.constant(1);
        for _ in 0..(self.size() - 1) / m {
            table[self.index(&x) as usize] = true;
            x = self.mul(&x, &step);
        }
        table
    }
}

fn is_irreducible_small(p: u64, c: &[u64]) -> bool {
    // Degree at most 3: irreducible exactly when there is no root.
    c.len() == 2 || !(0..p).any(|x| FpPoly::new(p, c.to_vec()).eval(x) == 0)
}

/// Number of points on the smooth projective model over F_{p^i}.
pub fn count_points(curve: &CurveSpec, i: usize) -> Result<u64> {
    count_points_in(curve, &SmallField::new(curve.p, i))
}

pub fn count_points_in(curve: &CurveSpec, field: &SmallField) -> Result<u64> {
    let q = field.size() as u128;
    if (curve.p as u128).pow(field.degree as u32) > MAX_FIELD_SIZE {
        return Err(Error::TooLarge {
            size: (curve.p as u128).pow(field.degree as u32),
            limit: MAX_FIELD_SIZE,
        });
    }
    let q = q as u64;
    let m = fp::gcd_u64(curve.r, q - 1);
    let powers = field.mth_powers(m);
    let coeffs: Vec<Elt> = curve.f.iter().map(|&c| field.constant(c)).collect();
    let affine: u64 = (0..q)
        .into_par_iter()
        .map(|xi| {
            let x = field.element_at(xi);
            let fx = coeffs
                .iter()
                .rev()
                .fold([0; 3], |acc, c| field.add(&field.mul(&acc, &x), c));
            if fx == [0; 3] {
                1
            } else if powers[field.index(&fx) as usize] {
                m
            } else {
                0
            }
        })
        .sum();
    // Points at infinity: roots of z^delta = f_d in F_q.
    let e = fp::gcd_u64(curve.delta, q - 1);
    let at_inf = if fp::pow_mod(curve.f_d, ((q - 1) / e) as u128, curve.p) == 1 {
        e
    } else {
        0
    };
    Ok(affine + at_inf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_moduli() {
        assert_eq!(SmallField::new(13, 2).modulus, vec![2, 0, 1]);
        assert_eq!(SmallField::new(7, 2).modulus, vec![1, 0, 1]);
        assert_eq!(SmallField::new(7, 3).modulus, vec![2, 0, 0, 1]);
    }

    #[test]
    fn field_axioms_spot_check() {
        let f = SmallField::new(5, 3);
        let g = f.generator();
        assert_eq!(f.pow(&g, f.size() - 1), f.constant(1));
        for a in 0..f.size() {
            let x = f.element_at(a);
            assert_eq!(f.index(&x), a);
            if a != 0 {
                assert_eq!(f.pow(&x, f.size() - 1), f.constant(1));
            }
        }
    }

    #[test]
    fn elliptic_curve_count() {
        // y^2 = x^3 + x + 1 over F_13 has 18 points.
        let c = CurveSpec::new(13, 2, &[1, 1, 0, 1], None).unwrap();
        assert_eq!(count_points(&c, 1).unwrap(), 18);
    }

    #[test]
    fn no_mth_roots_gives_affine_line() {
        // gcd(3, 16) = 1: every x has exactly one y.
        let c = CurveSpec::new(17, 3, &[1, 0, 0, 1, 0, 1], Some(1)).unwrap();
        assert_eq!(count_points(&c, 1).unwrap(), 17 + 1);
    }

    #[test]
    fn modulus_independence() {
        let c = CurveSpec::new(31, 3, &[2, 1, 0, 1], Some(1)).unwrap();
        let a = count_points_in(&c, &SmallField::new(31, 2)).unwrap();
        let b = count_points_in(&c, &SmallField::with_modulus(31, vec![12, 1, 1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_large() {
        let c = CurveSpec::new(10007, 5, &[1, 0, 0, 0, 0, 1], None).unwrap();
        assert!(matches!(count_points(&c, 2), Err(Error::TooLarge { .. })));
    }
}
