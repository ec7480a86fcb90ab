//! The flashing walk observed once per flash cycle and wrapped onto the
//! circle `ℤ_{Ln}`: its transition matrix, stationary law `π̄` and the
//! stationary mean displacement `μ̄` per cycle.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{self, FlashingSchedule, LatticeDistribution, RatchetKernel};
use crate::model::{FlashingPhase, RatchetParams};
use crate::par;

/// Which walk takes the extra step when the cycle step count has to be made
/// odd to keep the wrapped chain irreducible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ExtraStep {
    #[default]
    Symmetric,
    Ratchet,
}

/// `(phase, count)` segments of one flash cycle on a ring of `ring_size`
/// states. When both the ring size and `n²(τ₁+τ₂)` are even the chain would
/// split into two parity classes, so one step is appended.
pub fn cycle_plan(schedule: &FlashingSchedule, ring_size: u64, extra: ExtraStep) -> Vec<(FlashingPhase, u64)> {
    let mut plan = vec![(FlashingPhase::Off, schedule.steps_off()), (FlashingPhase::On, schedule.steps_on())];
    if ring_size.is_multiple_of(2) && schedule.cycle_steps().is_multiple_of(2) {
        match extra {
            ExtraStep::Symmetric => plan.push((FlashingPhase::Off, 1)),
            ExtraStep::Ratchet => plan[1].1 += 1,
        }
    }
    plan
}

/// Exact evolution of a probability vector on the ring `ℤ_size`.
struct Ring {
    forward: Vec<f64>,
    backward: Vec<f64>,
}

impl Ring {
    fn new(kernel: &RatchetKernel) -> Self {
        let size = kernel.period_sites() as usize;
        let forward: Vec<f64> = (0..size as i64).map(|s| kernel.forward_at(s)).collect();
        let backward = forward.iter().map(|f| 1.0 - f).collect();
        Self { forward, backward }
    }

    fn size(&self) -> usize {
        self.forward.len()
    }

    fn step(&self, phase: FlashingPhase, src: &[f64], dst: &mut [f64]) {
        let n = src.len();
        match phase {
            FlashingPhase::Off => {
                dst[0] = 0.5 * (src[n - 1] + src[1 % n]);
                for j in 1..n - 1 {
                    dst[j] = 0.5 * (src[j - 1] + src[j + 1]);
                }
                dst[n - 1] = 0.5 * (src[n - 2] + src[0]);
            }
            FlashingPhase::On => {
                let (f, b) = (&self.forward, &self.backward);
                dst[0] = f[n - 1] * src[n - 1] + b[1 % n] * src[1 % n];
                for j in 1..n - 1 {
                    dst[j] = f[j - 1] * src[j - 1] + b[j + 1] * src[j + 1];
                }
                dst[n - 1] = f[n - 2] * src[n - 2] + b[0] * src[0];
            }
        }
    }

    /// Runs the plan. When `drift` is given, the expected displacement
    /// (in lattice sites) accumulated during ratchet steps is added to it.
    fn run(&self, start: &[f64], plan: &[(FlashingPhase, u64)], mut drift: Option<&mut f64>) -> Vec<f64> {
        let mut cur = start.to_vec();
        let mut next = vec![0.0; cur.len()];
        for &(phase, count) in plan {
            for _ in 0..count {
                if let (FlashingPhase::On, Some(acc)) = (phase, drift.as_deref_mut()) {
                    *acc += cur
                        .iter()
                        .zip(&self.forward)
                        .map(|(m, f)| m * (2.0 * f - 1.0))
                        .sum::<f64>();
                }
                self.step(phase, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        cur
    }
}

/// One-cycle transition matrix of the wrapped walk, row-major:
/// `entry(i, j) = P(state j after one cycle | state i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WrappedCycleMatrix {
    size: usize,
    cycle_steps: u64,
    entries: Vec<f64>,
}

impl WrappedCycleMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, cycle_steps: u64) -> Result<Self> {
        let size = rows.len();
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidParams("matrix must be square and non-empty".into()));
        }
        Ok(Self { size, cycle_steps, entries: rows.concat() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cycle_steps(&self) -> u64 {
        self.cycle_steps
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    /// `max_i |Σ_j P(i, j) − 1|`.
    pub fn row_sum_error(&self) -> f64 {
        (0..self.size).map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Every state reaches every other through positive entries.
    pub fn is_irreducible(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.size];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(i) = queue.pop_front() {
                for j in 0..self.size {
                    let w = if forward { self.get(i, j) } else { self.get(j, i) };
                    if w > 0.0 && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// `νP`.
    pub fn left_multiply(&self, nu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (i, &w) in nu.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.row(i)) {
                *o += w * p;
            }
        }
        out
    }

    /// `‖νP − ν‖∞`.
    pub fn residual(&self, nu: &[f64]) -> f64 {
        self.left_multiply(nu).iter().zip(nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.size, self.size, &self.entries)
    }
}

/// Builds the wrapped one-cycle matrix with the symmetric extra step.
pub fn build_wrapped_matrix(params: &RatchetParams, schedule: &FlashingSchedule) -> Result<WrappedCycleMatrix> {
    build_wrapped_matrix_with(params, schedule, ExtraStep::Symmetric)
}

/// Builds the wrapped one-cycle matrix: row `i` is the law after one cycle of
/// a walk started at state `i`, every step taken mod `Ln`.
pub fn build_wrapped_matrix_with(
    params: &RatchetParams,
    schedule: &FlashingSchedule,
    extra: ExtraStep,
) -> Result<WrappedCycleMatrix> {
    let kernel = RatchetKernel::new(params, schedule.n())?;
    let ring = Ring::new(&kernel);
    let size = ring.size();
    if size < 3 {
        return Err(Error::InvalidParams(format!("wrapped ring needs at least 3 states, got {size}")));
    }
    let plan = cycle_plan(schedule, size as u64, extra);
    let cycle_steps = plan.iter().map(|(_, c)| c).sum();
    let starts: Vec<usize> = (0..size).collect();
    let rows = par::map(&starts, |&i| {
        let mut e = vec![0.0; size];
        e[i] = 1.0;
        ring.run(&e, &plan, None)
    });
    let matrix = WrappedCycleMatrix::from_rows(rows, cycle_steps)?;
    let err = matrix.row_sum_error();
    if err > 1e-10 {
        return Err(Error::InvariantViolation(format!("cycle matrix rows deviate from 1 by {err:e}")));
    }
    Ok(matrix)
}

/// Convergence controls for [`power_iteration`].
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    /// Stop when successive iterates differ by less than this (sup norm).
    pub tolerance: f64,
    pub max_iterations: u64,
    /// Give up early when the iterate difference has not improved for this
    /// many iterations.
    pub stall_window: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self { tolerance: 1e-13, max_iterations: 1_000_000, stall_window: 10_000 }
    }
}

/// Lazy power iteration `ν ← (ν + νP)/2`, which has the same fixed points
/// as `P` but also converges when the chain is periodic (the wrapped cycle
/// chain alternates parity classes whenever the ring size is even).
/// Returns the iterate and the iteration count on convergence.
pub fn power_iteration(
    matrix: &WrappedCycleMatrix,
    start: &[f64],
    opts: PowerIteration,
) -> Option<(Vec<f64>, u64)> {
    let total: f64 = start.iter().sum();
    let mut v: Vec<f64> = start.iter().map(|x| x / total).collect();
    let mut best = f64::INFINITY;
    let mut best_at = 0;
    for it in 1..=opts.max_iterations {
        let moved = matrix.left_multiply(&v);
        let next: Vec<f64> = v.iter().zip(&moved).map(|(a, b)| 0.5 * (a + b)).collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < opts.tolerance {
            return Some((v, it));
        }
        if diff < best {
            best = diff;
            best_at = it;
        } else if it - best_at > opts.stall_window {
            return None;
        }
    }
    None
}

/// Stationary distribution of the cycle chain: power iteration from the
/// uniform vector, with a direct solve as fallback. Fails when neither
/// reaches a residual below `1e-10`.
pub fn stationary_distribution(matrix: &WrappedCycleMatrix) -> Result<Vec<f64>> {
    stationary_distribution_with(matrix, PowerIteration::default())
}

pub fn stationary_distribution_with(matrix: &WrappedCycleMatrix, opts: PowerIteration) -> Result<Vec<f64>> {
    const ACCEPT: f64 = 1e-10;
    let uniform = vec![1.0 / matrix.size() as f64; matrix.size()];
    let mut best_residual = f64::INFINITY;
    if let Some((nu, _)) = power_iteration(matrix, &uniform, opts) {
        let r = matrix.residual(&nu);
        if r < ACCEPT {
            return Ok(nu);
        }
        best_residual = r;
    }
    if let Some(nu) = crate::linalg::stationary_direct(&matrix.to_dmatrix()) {
        let r = crate::linalg::stationary_residual(&matrix.to_dmatrix(), &nu);
        if r < ACCEPT && nu.iter().all(|x| *x > -1e-12) {
            return Ok(nu.into_iter().map(|x| x.max(0.0)).collect());
        }
        best_residual = best_residual.min(r);
    }
    Err(Error::StationaryFailed { residual: best_residual })
}

/// A wrapped state placed on the line by the recentering map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecenteredState {
    pub state: usize,
    /// `state / n` in `[0, L)`.
    pub wrapped_position: f64,
    /// Lattice site after recentering, in `[−(L−l)n, ln)`.
    pub site: i64,
    /// `site / n` in `[−(1−α)L, αL)`.
    pub position: f64,
    pub mass: f64,
    /// `mass · n` (unit spacing; both parity classes are populated).
    pub density: f64,
}

/// Maps wrapped positions `x ≥ αL` to `x − L` and orders the result by
/// position, so the law sits on `[−(1−α)L, αL)` around the potential
/// minimum at 0.
pub fn recenter(pibar: &[f64], params: &RatchetParams, n: u32) -> Result<Vec<RecenteredState>> {
    let size = params.period() as usize * n as usize;
    if pibar.len() != size {
        return Err(Error::InvalidParams(format!("expected {size} states, got {}", pibar.len())));
    }
    let low = params.l() as usize * n as usize;
    let scale = n as f64;
    let order = (low..size).chain(0..low);
    Ok(order
        .map(|state| {
            let site = if state >= low { state as i64 - size as i64 } else { state as i64 };
            RecenteredState {
                state,
                wrapped_position: state as f64 / scale,
                site,
                position: site as f64 / scale,
                mass: pibar[state],
                density: pibar[state] * scale,
            }
        })
        .collect())
}

/// The recentered `π̄` as a lattice distribution on the line.
pub fn recentered_distribution(recentered: &[RecenteredState], n: u32) -> Result<LatticeDistribution> {
    let offset = recentered.first().map(|r| r.site).unwrap_or(0);
    LatticeDistribution::from_masses(offset, recentered.iter().map(|r| r.mass).collect(), n)
}

/// Everything the stationary analysis produces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryResult {
    pub n: u32,
    pub cycle_steps: u64,
    pub pibar: Vec<f64>,
    pub pibar_recentered: Vec<RecenteredState>,
    /// Mean displacement per cycle measured on the unwrapped line.
    pub mubar: f64,
    /// The same quantity accumulated on the wrapped chain.
    pub mubar_wrapped: f64,
    pub residual: f64,
}

impl StationaryResult {
    /// `μ̄ / (τ₁ + τ₂)`.
    pub fn rate(&self, params: &RatchetParams) -> f64 {
        self.mubar / (params.tau1() + params.tau2()).to_f64()
    }
}

/// Mean displacement over one cycle, evolving the unwrapped walk from the
/// recentered `π̄`. By linearity this is the `π̄`-weighted average of the
/// per-start mean increments.
pub fn mean_displacement_from(
    start: &LatticeDistribution,
    params: &RatchetParams,
    plan: &[(FlashingPhase, u64)],
) -> Result<f64> {
    let kernel = RatchetKernel::new(params, start.n_scale())?;
    let end = lattice::evolve_segments(start, &kernel, plan)?;
    Ok(end.mean_position() - start.mean_position())
}

/// Mean displacement over one cycle computed on the wrapped chain by
/// accumulating the expected increment of every ratchet step.
pub fn mean_displacement_wrapped(
    pibar: &[f64],
    params: &RatchetParams,
    n: u32,
    plan: &[(FlashingPhase, u64)],
) -> Result<f64> {
    let kernel = RatchetKernel::new(params, n)?;
    let ring = Ring::new(&kernel);
    let mut sites = 0.0;
    ring.run(pibar, plan, Some(&mut sites));
    Ok(sites / n as f64)
}

/// Full analysis with the symmetric extra-step convention.
pub fn analyze(params: &RatchetParams, schedule: &FlashingSchedule) -> Result<StationaryResult> {
    analyze_with(params, schedule, ExtraStep::Symmetric)
}

pub fn analyze_with(params: &RatchetParams, schedule: &FlashingSchedule, extra: ExtraStep) -> Result<StationaryResult> {
    let n = schedule.n();
    let matrix = build_wrapped_matrix_with(params, schedule, extra)?;
    let pibar = stationary_distribution(&matrix)?;
    let residual = matrix.residual(&pibar);
    let pibar_recentered = recenter(&pibar, params, n)?;
    let plan = cycle_plan(schedule, matrix.size() as u64, extra);
    let start = recentered_distribution(&pibar_recentered, n)?;
    let mubar = mean_displacement_from(&start, params, &plan)?;
    let mubar_wrapped = mean_displacement_wrapped(&pibar, params, n, &plan)?;
    Ok(StationaryResult { n, cycle_steps: matrix.cycle_steps(), pibar, pibar_recentered, mubar, mubar_wrapped, residual })
}

/// `μ̄`: stationary mean displacement per flash cycle.
pub fn mean_displacement_stationary(params: &RatchetParams, schedule: &FlashingSchedule) -> Result<f64> {
    Ok(analyze(params, schedule)?.mubar)
}

/// The three snapshots of the stationary cycle: `π̄` itself, the law after
/// the potential-off phase, and the law after the full cycle (including the
/// parity step, if any).
pub fn cycle_snapshots(
    result: &StationaryResult,
    params: &RatchetParams,
    schedule: &FlashingSchedule,
    extra: ExtraStep,
) -> Result<[LatticeDistribution; 3]> {
    let kernel = RatchetKernel::new(params, schedule.n())?;
    let start = recentered_distribution(&result.pibar_recentered, schedule.n())?;
    let size = params.period() as u64 * schedule.n() as u64;
    let plan = cycle_plan(schedule, size, extra);
    let after_off = lattice::evolve_segments(&start, &kernel, &plan[..1])?;
    let after_cycle = lattice::evolve_segments(&after_off, &kernel, &plan[1..])?;
    Ok([start, after_off, after_cycle])
}
