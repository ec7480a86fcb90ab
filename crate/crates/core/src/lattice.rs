//! Exact distribution evolution of the approximating random walks.
//!
//! Space is refined to `{i/n : i ∈ ℤ}` and time to `n²` steps per unit. While
//! the potential is off the walk is simple and symmetric; while it is on the
//! walk moves forward with probability `p₀` at sites with
//! `mod(i, Ln) < ln` and `p₁` elsewhere, with `ρ = 1 − λ/n`.
//!
//! Distributions are stored densely over their support, including the
//! structural zeros at wrong-parity sites. During evolution, edge cells with
//! mass below [`TAIL_CUTOFF`] are dropped, so the stored window follows the
//! bulk of the distribution instead of growing by two sites per step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::p0_p1_unchecked;
use crate::model::{FlashingPhase, RatchetParams};
use crate::rational::Rational;

/// Conservation tolerance checked after every evolution batch.
pub const MASS_TOLERANCE: f64 = 1e-11;

/// Edge masses at or below this are dropped after each step. Such masses are far
/// below the resolution of any O(1) sum in `f64`, and even ten million steps
/// lose less than `1e-22` in total.
pub const TAIL_CUTOFF: f64 = 1e-30;

/// Smallest `m ≥ 1` such that `m²τ₁` and `m²τ₂` are both integers.
pub fn compute_m(tau1: Rational, tau2: Rational) -> u32 {
    (1u32..)
        .find(|&m| {
            let sq = (m as i64) * (m as i64);
            [tau1, tau2]
                .iter()
                .all(|t| t.checked_mul_int(sq).is_some_and(|v| v.is_integer()))
        })
        .expect("a rational always admits such an m")
}

/// Step counts for one spatial refinement `n` of the flashing schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FlashingSchedule {
    n: u32,
    m: u32,
    steps_off: u64,
    steps_on: u64,
}

impl FlashingSchedule {
    /// `n` must be a positive multiple of [`compute_m`] of the phase durations.
    pub fn new(params: &RatchetParams, n: u32) -> Result<Self> {
        let m = compute_m(params.tau1(), params.tau2());
        if n == 0 || !n.is_multiple_of(m) {
            return Err(Error::NotMultipleOfM { n, m });
        }
        let sq = n as i64 * n as i64;
        let steps = |tau: Rational| {
            tau.checked_mul_int(sq)
                .and_then(|v| v.to_integer())
                .filter(|v| *v >= 1)
                .map(|v| v as u64)
                .ok_or_else(|| Error::InvalidParams(format!("n²τ out of range for n={n}, τ={tau}")))
        };
        Ok(Self { n, m, steps_off: steps(params.tau1())?, steps_on: steps(params.tau2())? })
    }

    /// Smallest valid schedule with `n ≥ floor`.
    pub fn at_least(params: &RatchetParams, floor: u32) -> Result<Self> {
        let m = compute_m(params.tau1(), params.tau2());
        let n = floor.max(1).div_ceil(m) * m;
        Self::new(params, n)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `n²τ₁`
    pub fn steps_off(&self) -> u64 {
        self.steps_off
    }

    /// `n²τ₂`
    pub fn steps_on(&self) -> u64 {
        self.steps_on
    }

    pub fn cycle_steps(&self) -> u64 {
        self.steps_off + self.steps_on
    }

    /// Phase of the `k`-th step (0-based), starting with the potential off.
    pub fn phase_of_step(&self, k: u64) -> FlashingPhase {
        if k % self.cycle_steps() < self.steps_off {
            FlashingPhase::Off
        } else {
            FlashingPhase::On
        }
    }

    /// Consecutive `(phase, count)` runs covering steps `start..start + total`.
    pub fn runs(&self, start: u64, total: u64) -> Vec<(FlashingPhase, u64)> {
        let mut runs = Vec::new();
        let mut k = start;
        let end = start + total;
        while k < end {
            let pos = k % self.cycle_steps();
            let (phase, left) = if pos < self.steps_off {
                (FlashingPhase::Off, self.steps_off - pos)
            } else {
                (FlashingPhase::On, self.cycle_steps() - pos)
            };
            let count = left.min(end - k);
            runs.push((phase, count));
            k += count;
        }
        runs
    }
}

/// One step of the ratchet-phase walk `P_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatchetKernel {
    p0: f64,
    p1: f64,
    period_sites: i64,
    low_sites: i64,
}

impl RatchetKernel {
    /// Kernel for refinement `n`, with `ρ = 1 − λ/n`. Requires `λ < n`.
    pub fn new(params: &RatchetParams, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if params.lambda() >= n as f64 {
            return Err(Error::LambdaTooLarge { lambda: params.lambda(), n });
        }
        let rho = 1.0 - params.lambda() / n as f64;
        let (p0, p1) = p0_p1_unchecked(rho, params.l(), params.period());
        Ok(Self {
            p0,
            p1,
            period_sites: params.period() as i64 * n as i64,
            low_sites: params.l() as i64 * n as i64,
        })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Number of sites `Ln` in one period.
    pub fn period_sites(&self) -> i64 {
        self.period_sites
    }

    /// `P_n(site, site + 1)`.
    pub fn forward_at(&self, site: i64) -> f64 {
        if site.rem_euclid(self.period_sites) < self.low_sites {
            self.p0
        } else {
            self.p1
        }
    }

    /// Writes `P_n(site, site + 1)` for `start..start + out.len()`.
    pub(crate) fn fill_forward(&self, start: i64, out: &mut [f64]) {
        let mut r = start.rem_euclid(self.period_sites);
        for f in out.iter_mut() {
            *f = if r < self.low_sites { self.p0 } else { self.p1 };
            r += 1;
            if r == self.period_sites {
                r = 0;
            }
        }
    }
}

/// Probability masses on the lattice `{i/n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeDistribution {
    offset: i64,
    masses: Vec<f64>,
    n_scale: u32,
    steps_taken: u64,
    /// Parity of the sites that may carry mass, when all mass sits on one
    /// parity class.
    parity: Option<u8>,
}

/// A support point of the rescaled histogram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityPoint {
    pub site: i64,
    pub position: f64,
    pub mass: f64,
    pub density: f64,
}

impl LatticeDistribution {
    pub fn point_mass(site: i64, n_scale: u32) -> Self {
        Self { offset: site, masses: vec![1.0], n_scale, steps_taken: 0, parity: Some(parity_of(site)) }
    }

    /// Distribution with `masses[i]` at site `offset + i`.
    pub fn from_masses(offset: i64, masses: Vec<f64>, n_scale: u32) -> Result<Self> {
        if n_scale == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidParams(format!("masses must be finite and >= 0, got {m}")));
        }
        let mut dist = Self { offset, masses, n_scale, steps_taken: 0, parity: None };
        dist.trim();
        if dist.masses.is_empty() {
            return Err(Error::InvalidParams("distribution has no mass".into()));
        }
        dist.parity = dist.detect_parity();
        Ok(dist)
    }

    pub fn with_steps_taken(mut self, steps: u64) -> Self {
        self.steps_taken = steps;
        self
    }

    fn detect_parity(&self) -> Option<u8> {
        let mut seen = None;
        for (site, m) in self.iter() {
            if m != 0.0 {
                let p = parity_of(site);
                match seen {
                    None => seen = Some(p),
                    Some(q) if q != p => return None,
                    _ => {}
                }
            }
        }
        seen
    }

    /// Lattice index of `masses()[0]`.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn n_scale(&self) -> u32 {
        self.n_scale
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn parity(&self) -> Option<u8> {
        self.parity
    }

    pub fn first_site(&self) -> i64 {
        self.offset
    }

    pub fn last_site(&self) -> i64 {
        self.offset + self.masses.len() as i64 - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses.iter().enumerate().map(move |(i, &m)| (self.offset + i as i64, m))
    }

    pub fn mass_at(&self, site: i64) -> f64 {
        let i = site - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.masses.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn position(&self, site: i64) -> f64 {
        site as f64 / self.n_scale as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `Σ mass · i/n`.
    pub fn mean_position(&self) -> f64 {
        let sum: f64 = self.iter().map(|(site, m)| m * site as f64).sum();
        sum / self.n_scale as f64
    }

    /// Total mass found at sites the parity rule forbids (0 when the
    /// distribution is not single-parity).
    pub fn parity_violation(&self) -> f64 {
        match self.parity {
            None => 0.0,
            Some(p) => self.iter().filter(|(s, _)| parity_of(*s) != p).map(|(_, m)| m).sum(),
        }
    }

    /// The same distribution moved by `sites` lattice cells.
    pub fn shifted(&self, sites: i64) -> Self {
        let mut out = self.clone();
        out.offset += sites;
        out.parity = self.parity.map(|p| (p + parity_of(sites)) % 2);
        out
    }

    /// One step of the simple symmetric walk.
    pub fn step_symmetric(&self) -> Self {
        let mut out = self.clone();
        out.advance(FlashingPhase::Off, None, 1, &mut Scratch::default());
        out
    }

    /// One step of the ratchet walk `P_n`.
    pub fn step_ratchet(&self, kernel: &RatchetKernel) -> Self {
        let mut out = self.clone();
        out.advance(FlashingPhase::On, Some(kernel), 1, &mut Scratch::default());
        out
    }

    /// Support spacing of the rescaled histogram: `2/n` for single-parity
    /// distributions, `1/n` otherwise.
    pub fn cell_width(&self) -> f64 {
        let sites = if self.parity.is_some() { 2.0 } else { 1.0 };
        sites / self.n_scale as f64
    }

    /// Histogram heights `mass / cell_width` at every admissible support point.
    pub fn rescaled_density(&self) -> Vec<DensityPoint> {
        let width = self.cell_width();
        self.iter()
            .filter(|(s, _)| self.parity.is_none_or(|p| parity_of(*s) == p))
            .map(|(site, mass)| DensityPoint { site, position: self.position(site), mass, density: mass / width })
            .collect()
    }

    /// Linearly interpolated histogram height at a lattice site.
    pub fn density_at_site(&self, site: i64) -> f64 {
        let width = self.cell_width();
        match self.parity {
            Some(p) if parity_of(site) != p => {
                0.5 * (self.mass_at(site - 1) + self.mass_at(site + 1)) / width
            }
            _ => self.mass_at(site) / width,
        }
    }

    fn trim(&mut self) {
        self.trim_below(0.0);
    }

    /// Drops edge cells with mass `<= cutoff`; the bulk is never touched.
    fn trim_below(&mut self, cutoff: f64) {
        let lead = self.masses.iter().take_while(|m| **m <= cutoff).count();
        if lead == self.masses.len() {
            self.masses.clear();
            return;
        }
        let trail = self.masses.iter().rev().take_while(|m| **m <= cutoff).count();
        self.masses.truncate(self.masses.len() - trail);
        if lead > 0 {
            self.masses.drain(..lead);
            self.offset += lead as i64;
        }
    }

    /// Applies `count` steps of one phase in place.
    pub(crate) fn advance(
        &mut self,
        phase: FlashingPhase,
        kernel: Option<&RatchetKernel>,
        count: u64,
        scratch: &mut Scratch,
    ) {
        for _ in 0..count {
            let len = self.masses.len();
            scratch.next.clear();
            scratch.next.resize(len + 2, 0.0);
            let next = &mut scratch.next;
            match (phase, kernel) {
                (FlashingPhase::On, Some(kernel)) => {
                    scratch.forward.resize(len, 0.0);
                    kernel.fill_forward(self.offset, &mut scratch.forward);
                    for (i, (&m, &f)) in self.masses.iter().zip(&scratch.forward).enumerate() {
                        next[i] += (1.0 - f) * m;
                        next[i + 2] += f * m;
                    }
                }
                _ => {
                    for (i, &m) in self.masses.iter().enumerate() {
                        let half = 0.5 * m;
                        next[i] += half;
                        next[i + 2] += half;
                    }
                }
            }
            std::mem::swap(&mut self.masses, &mut scratch.next);
            self.offset -= 1;
            self.steps_taken += 1;
            self.parity = self.parity.map(|p| 1 - p);
            self.trim_below(TAIL_CUTOFF);
        }
    }

    fn check_batch(&self, expected_mass: f64) -> Result<()> {
        let total = self.total_mass();
        if (total - expected_mass).abs() > MASS_TOLERANCE {
            return Err(Error::InvariantViolation(format!(
                "mass drifted from {expected_mass} to {total} after {} steps",
                self.steps_taken
            )));
        }
        if self.parity.is_some() && self.parity_violation() != 0.0 {
            return Err(Error::InvariantViolation("mass found at a wrong-parity site".into()));
        }
        Ok(())
    }
}

#[derive(Default)]
pub(crate) struct Scratch {
    next: Vec<f64>,
    forward: Vec<f64>,
}

pub(crate) fn parity_of(site: i64) -> u8 {
    site.rem_euclid(2) as u8
}

/// Runs explicit `(phase, count)` segments. Conservation and parity are
/// checked after every segment.
pub fn evolve_segments(
    initial: &LatticeDistribution,
    kernel: &RatchetKernel,
    segments: &[(FlashingPhase, u64)],
) -> Result<LatticeDistribution> {
    let expected = initial.total_mass();
    let mut dist = initial.clone();
    let mut scratch = Scratch::default();
    for &(phase, count) in segments {
        dist.advance(phase, Some(kernel), count, &mut scratch);
        dist.check_batch(expected)?;
    }
    Ok(dist)
}

/// Alternates `steps_off` symmetric steps and `steps_on` ratchet steps,
/// starting with the potential off. The phase clock continues from
/// `initial.steps_taken()`, so checkpoints resume mid-cycle correctly.
pub fn evolve_flashing(
    initial: &LatticeDistribution,
    params: &RatchetParams,
    schedule: &FlashingSchedule,
    total_steps: u64,
) -> Result<LatticeDistribution> {
    if initial.n_scale() != schedule.n() {
        return Err(Error::InvalidParams(format!(
            "distribution has n={} but the schedule has n={}",
            initial.n_scale(),
            schedule.n()
        )));
    }
    let kernel = RatchetKernel::new(params, schedule.n())?;
    evolve_segments(initial, &kernel, &schedule.runs(initial.steps_taken(), total_steps))
}

/// Steps needed to reach continuous time `t` at refinement `n` (`n²t`, exact).
pub fn steps_for_time(time: Rational, n: u32) -> Result<u64> {
    time.checked_mul_int(n as i64 * n as i64)
        .and_then(|v| v.to_integer())
        .filter(|v| *v >= 0)
        .map(|v| v as u64)
        .ok_or_else(|| Error::InvalidParams(format!("n²t is not a non-negative integer for t={time}, n={n}")))
}
