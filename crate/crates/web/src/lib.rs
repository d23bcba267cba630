//! wasm-bindgen front end: every export takes the curve as (p, r, poly)
//! with `poly` the comma separated coefficients of F, constant term first,
//! and returns JSON.

use cyclic_zeta::{compute_zeta, oracle, zeta, CurveSpec, Options, Strategy};
use num_bigint::BigInt;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn parse_poly(poly: &str) -> Result<Vec<i64>, String> {
    poly.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|_| format!("bad coefficient {s:?}")))
        .collect()
}

fn curve(p: u64, r: u64, poly: &str) -> Result<CurveSpec, String> {
    CurveSpec::new(p, r, &parse_poly(poly)?, None).map_err(|e| e.to_string())
}

/// Integers go out as decimal strings: JSON.parse would round them.
fn nums(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn curve_info_json(p: u64, r: u64, poly: &str) -> Result<String, String> {
    let c = curve(p, r, poly)?;
    Ok(json!({
        "d": c.d,
        "delta": c.delta,
        "genus": c.g,
        "N": c.n,
        "basis_size": c.basis_size(),
        "U": nums(&c.ker_eta_charpoly()),
    })
    .to_string())
}

pub fn l_polynomial_json(p: u64, r: u64, poly: &str, strategy: &str) -> Result<String, String> {
    let c = curve(p, r, poly)?;
    let strategy = match strategy {
        "bsgs" => Strategy::Bsgs,
        "naive" => Strategy::Naive,
        _ => Strategy::Auto,
    };
    let start = web_time::Instant::now();
    let z = compute_zeta(
        &c,
        &Options {
            strategy,
            interpolation: true,
        },
    )
    .map_err(|e| e.to_string())?;
    let ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok(json!({
        "N": z.n,
        "strategy": z.strategy.name(),
        "L": nums(&z.l),
        "frobenius_polynomial": nums(&z.frobenius_polynomial()),
        "counts": nums(&zeta::point_counts_from_l(&z.l, c.p, 3)),
        "ms": ms,
    })
    .to_string())
}

pub fn brute_count_json(p: u64, r: u64, poly: &str, i: usize) -> Result<String, String> {
    let c = curve(p, r, poly)?;
    if !(1..=3).contains(&i) {
        return Err("extension degree must be 1, 2 or 3".into());
    }
    let n = oracle::count_points(&c, i).map_err(|e| e.to_string())?;
    Ok(json!({ "i": i, "count": n }).to_string())
}

#[wasm_bindgen]
pub fn curve_info(p: u32, r: u32, poly: &str) -> Result<String, JsError> {
    curve_info_json(p.into(), r.into(), poly).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compute_l_polynomial(p: u32, r: u32, poly: &str, strategy: &str) -> Result<String, JsError> {
    l_polynomial_json(p.into(), r.into(), poly, strategy).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn brute_count(p: u32, r: u32, poly: &str, i: u32) -> Result<String, JsError> {
    brute_count_json(p.into(), r.into(), poly, i as usize).map_err(|e| JsError::new(&e))
}
