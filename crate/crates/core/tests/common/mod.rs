#![allow(dead_code)]

use cyclic_zeta::curve::{choose_precision, genus, CurveSpec};
use cyclic_zeta::fp::{self, is_prime};
use rand::Rng;

/// Least prime p > lo with p > d(N(p) + eps)r.
pub fn least_admissible_prime(r: u64, d: usize, lo: u64) -> u64 {
    let g = genus(d, r);
    let eps = u64::from(fp::gcd_u64(r, d as u64) > 1);
    let mut p = lo + 1;
    loop {
        if is_prime(p) && p % r != 0 {
            let n = choose_precision(p, g) as u64;
            if p > d as u64 * (n + eps) * r {
                return p;
            }
        }
        p += 1;
    }
}

/// A random valid curve with r <= rmax and d <= dmax over the least
/// admissible prime above `lo`; `None` if p would exceed `pmax`.
pub fn random_curve<R: Rng>(rng: &mut R, rmax: u64, dmax: usize, lo: u64, pmax: u64) -> Option<CurveSpec> {
    loop {
        let r = rng.gen_range(2..=rmax);
        let d = rng.gen_range(1..=dmax);
        if r + (d as u64) < 5 {
            continue;
        }
        let p = least_admissible_prime(r, d, lo);
        if p > pmax {
            return None;
        }
        for _ in 0..20 {
            let mut f: Vec<i64> = (0..=d).map(|_| rng.gen_range(-9..=9)).collect();
            if rng.gen_bool(0.5) {
                f[d] = 1;
            }
            if let Ok(c) = CurveSpec::new(p, r, &f, None) {
                return Some(c);
            }
        }
    }
}
