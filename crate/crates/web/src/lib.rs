//! Browser bindings for the static demo in `www/`.
//!
//! Every export returns a flat `Float64Array`; curves are stored as
//! interleaved `x, y` pairs. The `*_impl` functions hold the logic and are
//! what the native tests exercise, since `JsError` only exists on wasm.

use ratchetlab::games::mean_profit_mixture;
use ratchetlab::lattice::evolve_flashing;
use ratchetlab::stats::peak_stats;
use ratchetlab::{FlashingSchedule, GameB, LatticeDistribution, RatchetParams, Rational};
use wasm_bindgen::prelude::*;

/// Largest refinement the demo accepts; keeps a click under a second.
pub const MAX_N: u32 = 200;
/// Largest number of flashing cycles per request.
pub const MAX_CYCLES: u32 = 20;

fn rational(text: &str) -> Result<Rational, String> {
    text.trim().parse().map_err(|e| format!("{e}"))
}

fn model(l: u32, period: u32, lambda: f64, tau1: &str, tau2: &str) -> Result<RatchetParams, String> {
    RatchetParams::new(l, period, lambda, rational(tau1)?, rational(tau2)?).map_err(|e| e.to_string())
}

pub fn potential_curve_impl(l: u32, period: u32, lambda: f64, points: u32) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let p = model(l, period, lambda, "1", "1")?;
    let span = period as f64;
    let mut out = Vec::with_capacity(2 * points as usize);
    for i in 0..points {
        let x = -span + 2.0 * span * i as f64 / (points - 1) as f64;
        out.push(x);
        out.push(p.potential(x));
    }
    Ok(out)
}

/// Density after `cycles` flashing cycles from a point mass at 0, followed
/// by the seven statistics `area1..3, height1..3, mean`.
pub fn flashing_density_impl(
    l: u32,
    period: u32,
    lambda: f64,
    tau1: &str,
    tau2: &str,
    n: u32,
    cycles: u32,
) -> Result<Vec<f64>, String> {
    if n > MAX_N {
        return Err(format!("n is capped at {MAX_N} in the browser"));
    }
    if cycles == 0 || cycles > MAX_CYCLES {
        return Err(format!("cycles must be between 1 and {MAX_CYCLES}"));
    }
    let p = model(l, period, lambda, tau1, tau2)?;
    let schedule = FlashingSchedule::new(&p, n).map_err(|e| e.to_string())?;
    let start = LatticeDistribution::point_mass(0, n);
    let dist = evolve_flashing(&start, &p, &schedule, schedule.cycle_steps() * cycles as u64).map_err(|e| e.to_string())?;
    let stats = peak_stats(&dist, &p);
    let cells = dist.rescaled_density();
    let mut out = Vec::with_capacity(2 * cells.len() + 7);
    for c in &cells {
        out.push(c.position);
        out.push(c.density);
    }
    out.extend(stats.areas);
    out.extend(stats.heights);
    out.push(stats.mean);
    Ok(out)
}

/// Mean profit of the random mixture of games A and B against the
/// probability `c` of playing A, at `c = i/(points + 1)` for `i = 1..=points`.
pub fn parrondo_curve_impl(rho: &str, l: u32, period: u32, points: u32) -> Result<Vec<f64>, String> {
    if points == 0 {
        return Err("need at least 1 point".into());
    }
    let game = GameB::new(rational(rho)?.to_f64(), l, period).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * points as usize);
    for i in 1..=points {
        let c = i as f64 / (points + 1) as f64;
        out.push(c);
        out.push(mean_profit_mixture(c, &game).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn potential_curve(l: u32, period: u32, lambda: f64, points: u32) -> Result<Vec<f64>, JsError> {
    potential_curve_impl(l, period, lambda, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn flashing_density(
    l: u32,
    period: u32,
    lambda: f64,
    tau1: &str,
    tau2: &str,
    n: u32,
    cycles: u32,
) -> Result<Vec<f64>, JsError> {
    flashing_density_impl(l, period, lambda, tau1, tau2, n, cycles).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn parrondo_curve(rho: &str, l: u32, period: u32, points: u32) -> Result<Vec<f64>, JsError> {
    parrondo_curve_impl(rho, l, period, points).map_err(|e| JsError::new(&e))
}
