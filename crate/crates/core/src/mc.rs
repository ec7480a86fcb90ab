//! Euler–Maruyama simulation of the ratchet SDEs, used as an independent
//! check on the exact lattice computations.
//!
//! Each path draws from its own ChaCha8 stream selected by the path index,
//! so a path's trajectory does not depend on how many other paths are run
//! or on how they are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeDistribution;
use crate::model::{FlashingPhase, RatchetParams};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Report endpoints reduced mod `L`.
    pub wrap: bool,
}

impl McConfig {
    pub const DEFAULT_DT: f64 = 1e-4;

    fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidMcConfig("paths must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidMcConfig(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    /// Also requires `dt ≤ min(τ₁, τ₂)/100` so each phase spans many steps.
    pub fn validate_for(&self, params: &RatchetParams) -> Result<()> {
        self.validate()?;
        let limit = params.tau1().to_f64().min(params.tau2().to_f64()) / 100.0;
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::InvalidMcConfig(format!("dt={} exceeds min(tau1, tau2)/100 = {limit}", self.dt)));
        }
        Ok(())
    }
}

/// Random stream of one path.
pub fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

#[derive(Clone, Copy)]
enum Forcing {
    Flashing,
    AlwaysOn,
}

struct Drift {
    period: f64,
    peak: f64,
    left: f64,
    right: f64,
}

impl Drift {
    fn new(params: &RatchetParams) -> Self {
        let alpha = params.alpha_f64();
        Self {
            period: params.period() as f64,
            peak: params.peak_position(),
            left: -params.gamma() / alpha,
            right: params.gamma() / (1.0 - alpha),
        }
    }

    #[inline]
    fn at(&self, y: f64) -> f64 {
        let r = y - self.period * (y / self.period).floor();
        if r < self.peak {
            self.left
        } else {
            self.right
        }
    }
}

fn simulate(
    params: &RatchetParams,
    cfg: &McConfig,
    t_end: f64,
    y0: f64,
    forcing: Forcing,
) -> Result<Vec<f64>> {
    if !(t_end >= 0.0 && t_end.is_finite()) || !y0.is_finite() {
        return Err(Error::InvalidMcConfig(format!("need finite t_end >= 0 and y0, got {t_end}, {y0}")));
    }
    let steps = (t_end / cfg.dt - 1e-9).ceil().max(0.0) as u64;
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let sqrt_dt = dt.sqrt();
    let drift = Drift::new(params);
    let (tau1, tau2) = (params.tau1().to_f64(), params.tau2().to_f64());
    // phase of every step, evaluated at its left endpoint
    let on: Vec<bool> = (0..steps)
        .map(|k| match forcing {
            Forcing::AlwaysOn => true,
            Forcing::Flashing => FlashingPhase::at(k as f64 * dt, tau1, tau2) == FlashingPhase::On,
        })
        .collect();
    let period = params.period() as f64;
    let indices: Vec<usize> = (0..cfg.paths).collect();
    Ok(par::map(&indices, |&path| {
        let mut rng = path_rng(cfg.seed, path);
        let mut y = y0;
        for &active in &on {
            let xi: f64 = StandardNormal.sample(&mut rng);
            if active {
                y += drift.at(y) * dt;
            }
            y += sqrt_dt * xi;
        }
        if cfg.wrap {
            y -= period * (y / period).floor();
        }
        y
    }))
}

/// Endpoints at `t_end` of `dY = η(t)μ(Y)dt + dB`, started at `y0`.
pub fn simulate_flashing(params: &RatchetParams, cfg: &McConfig, t_end: f64, y0: f64) -> Result<Vec<f64>> {
    cfg.validate_for(params)?;
    simulate(params, cfg, t_end, y0, Forcing::Flashing)
}

/// Endpoints at `t_end` of the pure ratchet `dX = μ(X)dt + dB`.
pub fn simulate_ratchet(params: &RatchetParams, cfg: &McConfig, t_end: f64, y0: f64) -> Result<Vec<f64>> {
    cfg.validate()?;
    simulate(params, cfg, t_end, y0, Forcing::AlwaysOn)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Format("samples must be finite".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and
/// the CDF of the lattice histogram, i.e. each site's mass spread evenly
/// over its cell of width [`LatticeDistribution::cell_width`]. This is the
/// continuous law whose density is [`LatticeDistribution::rescaled_density`].
pub fn ks_distance(samples: &[f64], dist: &LatticeDistribution) -> Result<f64> {
    let xs = sorted(samples)?;
    let half = dist.cell_width() / 2.0;
    let cells = dist.rescaled_density();
    let total = xs.len() as f64;
    let mut below = 0.0; // mass of cells entirely left of the current cell
    let mut k = 0;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        while k < cells.len() && cells[k].position + half <= x {
            below += cells[k].mass;
            k += 1;
        }
        let partial = match cells.get(k) {
            Some(c) if x > c.position - half => c.mass * (x - (c.position - half)) / (2.0 * half),
            _ => 0.0,
        };
        let f = below + partial;
        d = d.max((i + 1) as f64 / total - f).max(f - i as f64 / total);
    }
    Ok(d)
}

/// Kolmogorov–Smirnov distance against the raw step-function CDF with jumps
/// at the lattice positions `i/n`. Bounded below by roughly half the largest
/// site mass for continuous samples.
pub fn ks_distance_step(samples: &[f64], dist: &LatticeDistribution) -> Result<f64> {
    let xs = sorted(samples)?;
    let total = xs.len() as f64;
    let points: Vec<(f64, f64)> = dist.iter().filter(|(_, m)| *m > 0.0).map(|(s, m)| (dist.position(s), m)).collect();
    let (mut i, mut k) = (0, 0);
    let mut fl = 0.0;
    let mut d: f64 = 0.0;
    while i < xs.len() || k < points.len() {
        let z = match (xs.get(i), points.get(k)) {
            (Some(&x), Some(&(p, _))) => x.min(p),
            (Some(&x), None) => x,
            (None, Some(&(p, _))) => p,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] <= z {
            i += 1;
        }
        while k < points.len() && points[k].0 <= z {
            fl += points[k].1;
            k += 1;
        }
        d = d.max((i as f64 / total - fl).abs());
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
}

/// Equal-width histogram on `[lo, hi)`; samples outside are ignored.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidParams(format!("bad histogram range [{lo}, {hi}) with {bins} bins")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x >= lo && x < hi {
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(b, count)| HistogramBin { bin_left: lo + b as f64 * width, bin_right: lo + (b + 1) as f64 * width, count })
        .collect())
}

pub fn sample_mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(samples: &[f64]) -> f64 {
    let mean = sample_mean(samples);
    samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn params(lambda: f64) -> RatchetParams {
        let tau: Rational = "2.4".parse().unwrap();
        RatchetParams::new(1, 4, lambda, tau, tau).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = params(5.0);
        let ok = McConfig { paths: 10, dt: 1e-3, seed: 1, wrap: false };
        assert!(ok.validate_for(&p).is_ok());
        assert!(McConfig { paths: 0, ..ok }.validate_for(&p).is_err());
        assert!(McConfig { dt: 0.1, ..ok }.validate_for(&p).is_err());
        assert!(McConfig { dt: -1.0, ..ok }.validate_for(&p).is_err());
    }

    #[test]
    fn same_seed_same_samples() {
        let p = params(5.0);
        let cfg = McConfig { paths: 50, dt: 1e-2, seed: 7, wrap: false };
        let a = simulate_ratchet(&p, &cfg, 1.0, 0.3).unwrap();
        let b = simulate_ratchet(&p, &cfg, 1.0, 0.3).unwrap();
        assert_eq!(a, b);
        // growing the path count leaves existing paths untouched
        let c = simulate_ratchet(&p, &McConfig { paths: 80, ..cfg }, 1.0, 0.3).unwrap();
        assert_eq!(&c[..50], &a[..]);
        let d = simulate_ratchet(&p, &McConfig { seed: 8, ..cfg }, 1.0, 0.3).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn wrapping_reduces_into_one_period() {
        let p = params(5.0);
        let cfg = McConfig { paths: 200, dt: 1e-2, seed: 3, wrap: true };
        let ys = simulate_ratchet(&p, &cfg, 5.0, 0.0).unwrap();
        assert!(ys.iter().all(|y| (0.0..4.0).contains(y)));
    }

    #[test]
    fn ks_against_point_mass() {
        let d = LatticeDistribution::point_mass(0, 10);
        // cell is [-0.1, 0.1); samples spread uniformly over it give D -> 0
        let xs: Vec<f64> = (0..1000).map(|i| -0.1 + 0.2 * (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_distance(&xs, &d).unwrap() < 1e-3);
        // the raw step CDF jumps by 1 at 0, so half the samples disagree
        assert!((ks_distance_step(&xs, &d).unwrap() - 0.5).abs() < 1e-3);
        assert!(matches!(ks_distance(&[], &d), Err(Error::EmptySample)));
    }

    #[test]
    fn ks_detects_shift() {
        let d = LatticeDistribution::point_mass(0, 10);
        let xs: Vec<f64> = (0..1000).map(|i| 0.05 + 0.2 * (i as f64 + 0.5) / 1000.0).collect();
        // shifted by three quarters of the cell: only [0.05, 0.1) overlaps
        let ks = ks_distance(&xs, &d).unwrap();
        assert!((ks - 0.75).abs() < 2e-3, "{ks}");
    }

    #[test]
    fn histogram_bins() {
        let h = histogram(&[0.1, 0.2, 0.6, 1.5, -1.0], 0.0, 1.0, 2).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![2, 1]);
        assert_eq!((h[1].bin_left, h[1].bin_right), (0.5, 1.0));
        assert!(histogram(&[], 1.0, 1.0, 2).is_err());
    }
}
