//! Peak statistics of multi-peaked lattice densities, the normal-curve
//! comparison, and the λ / n / (τ₁, τ₂) sweeps.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::lattice::{self, compute_m, FlashingSchedule, LatticeDistribution};
use crate::model::RatchetParams;
use crate::par;
use crate::rational::Rational;
use crate::stationary;

/// Areas and heights of the three peaks around the potential minima
/// `−L`, `0`, `L`, plus the mean displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeakStats {
    pub areas: [f64; 3],
    pub heights: [f64; 3],
    pub mean: f64,
}

/// Potential maxima `αL − L` and `αL` bracketing the minimum at 0.
pub fn peak_partition_boundaries(params: &RatchetParams) -> (f64, f64) {
    let l = params.l() as f64;
    (l - params.period() as f64, l)
}

/// Peak statistics of a distribution.
///
/// The regions are `(−∞, αL − L)`, `[αL − L, αL)` and `[αL, ∞)`: a site
/// sitting exactly on a potential maximum counts toward the peak on its
/// right, the same half-open convention as the drift. Heights are the
/// interpolated histogram heights at the potential minima `−L`, `0`, `L`.
pub fn peak_stats(dist: &LatticeDistribution, params: &RatchetParams) -> PeakStats {
    let n = dist.n_scale() as i64;
    let (l, period) = (params.l() as i64, params.period() as i64);
    let (left, right) = ((l - period) * n, l * n);
    let mut areas = [0.0; 3];
    for (site, mass) in dist.iter() {
        let region = if site < left {
            0
        } else if site < right {
            1
        } else {
            2
        };
        areas[region] += mass;
    }
    let heights = [-period * n, 0, period * n].map(|site| dist.density_at_site(site));
    PeakStats { areas, heights, mean: dist.mean_position() }
}

/// Areas the normal law `N(0, τ₁)` assigns to the three peak regions.
pub fn normal_reference_areas(tau1: f64, params: &RatchetParams) -> Result<[f64; 3]> {
    if !(tau1 > 0.0 && tau1.is_finite()) {
        return Err(Error::InvalidParams(format!("tau1 must be positive, got {tau1}")));
    }
    let sigma = tau1.sqrt();
    let phi = Normal::standard();
    let (left, right) = peak_partition_boundaries(params);
    let a = phi.cdf(left / sigma);
    let b = phi.cdf(right / sigma);
    Ok([a, b - a, 1.0 - b])
}

/// One row of a λ- or n-sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// λ or n, depending on the sweep.
    pub key: f64,
    pub stats: PeakStats,
}

/// Statistics of the walk started at 0 after one full cycle `τ₁ + τ₂`.
pub fn cycle_stats(params: &RatchetParams, n: u32) -> Result<PeakStats> {
    let schedule = FlashingSchedule::new(params, n)?;
    let start = LatticeDistribution::point_mass(0, n);
    let end = lattice::evolve_flashing(&start, params, &schedule, schedule.cycle_steps())?;
    Ok(peak_stats(&end, params))
}

/// Peak statistics for each `λ` at fixed `n`, in input order.
pub fn lambda_sweep(lambdas: &[f64], base: &RatchetParams, n: u32) -> Result<Vec<SweepRow>> {
    let rows = par::map(lambdas, |&lambda| {
        let stats = cycle_stats(&base.with_lambda(lambda)?, n)?;
        Ok(SweepRow { key: lambda, stats })
    });
    rows.into_iter().collect()
}

/// Peak statistics for each refinement `n`, in input order. Every `n` must be
/// a multiple of `m`.
pub fn n_sweep(ns: &[u32], base: &RatchetParams) -> Result<Vec<SweepRow>> {
    let m = compute_m(base.tau1(), base.tau2());
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || n % m != 0) {
        return Err(Error::NotMultipleOfM { n, m });
    }
    let rows = par::map(ns, |&n| Ok(SweepRow { key: n as f64, stats: cycle_stats(base, n)? }));
    rows.into_iter().collect()
}

/// Writes sweep rows as CSV; `key` names the first column.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], key: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([key, "area1", "area2", "area3", "height1", "height2", "height3", "mean"])?;
    for row in rows {
        let s = &row.stats;
        let fields: Vec<String> = std::iter::once(row.key)
            .chain(s.areas)
            .chain(s.heights)
            .chain([s.mean])
            .map(|x| x.to_string())
            .collect();
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text table with six significant digits.
pub fn format_sweep_table(rows: &[SweepRow], key_label: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{key_label:>6}  {:<36}  {:<36}  mean displacement", "areas of the three peaks", "heights of the three peaks");
    for row in rows {
        let s = &row.stats;
        let triple = |v: [f64; 3]| format!("({}, {}, {})", sig6(v[0]), sig6(v[1]), sig6(v[2]));
        let _ = writeln!(out, "{:>6}  {:<36}  {:<36}  {}", row.key, triple(s.areas), triple(s.heights), sig6(s.mean));
    }
    out
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

/// How the refinement `n` is picked for each `(τ₁, τ₂)` cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RefinementPolicy {
    /// Use exactly this `n`; cells whose `m` does not divide it are skipped.
    Fixed(u32),
    /// Smallest multiple of the cell's `m` that is at least this large.
    AtLeast(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellStatus {
    Evaluated,
    /// The required `n` exceeds the compute budget.
    OverBudget,
    /// `Fixed(n)` is not a multiple of the cell's `m`.
    NotMultiple,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauCell {
    pub tau1: Rational,
    pub tau2: Rational,
    pub m: u32,
    pub n: u32,
    pub status: CellStatus,
    pub mubar: Option<f64>,
    /// `μ̄ / (τ₁ + τ₂)`.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauSearch {
    pub cells: Vec<TauCell>,
    /// Index into `cells` of the best rate, ties going to the shorter cycle.
    pub best: Option<usize>,
}

/// Grid search of `μ̄/(τ₁ + τ₂)` over rational `(τ₁, τ₂)` pairs.
pub fn optimize_tau(
    params: &RatchetParams,
    grid: &[(Rational, Rational)],
    policy: RefinementPolicy,
    max_n: u32,
) -> Result<TauSearch> {
    let mut cells = Vec::with_capacity(grid.len());
    for &(tau1, tau2) in grid {
        let cell_params = params.with_taus(tau1, tau2)?;
        let m = compute_m(tau1, tau2);
        let n = match policy {
            RefinementPolicy::Fixed(n) => n,
            RefinementPolicy::AtLeast(floor) => floor.max(1).div_ceil(m) * m,
        };
        let mut cell = TauCell { tau1, tau2, m, n, status: CellStatus::Evaluated, mubar: None, rate: None };
        if n % m != 0 {
            cell.status = CellStatus::NotMultiple;
        } else if n > max_n {
            cell.status = CellStatus::OverBudget;
        } else {
            let schedule = FlashingSchedule::new(&cell_params, n)?;
            let result = stationary::analyze(&cell_params, &schedule)?;
            cell.rate = Some(result.rate(&cell_params));
            cell.mubar = Some(result.mubar);
        }
        cells.push(cell);
    }
    let mut best: Option<usize> = None;
    for (i, cell) in cells.iter().enumerate() {
        let Some(rate) = cell.rate else { continue };
        let better = match best {
            None => true,
            Some(b) => {
                let (br, bs) = (cells[b].rate.unwrap(), cells[b].tau1 + cells[b].tau2);
                rate > br || (rate == br && cell.tau1 + cell.tau2 < bs)
            }
        };
        if better {
            best = Some(i);
        }
    }
    Ok(TauSearch { cells, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(l: u32, period: u32, lambda: f64) -> RatchetParams {
        let tau: Rational = "2.4".parse().unwrap();
        RatchetParams::new(l, period, lambda, tau, tau).unwrap()
    }

    #[test]
    fn boundaries() {
        assert_eq!(peak_partition_boundaries(&params(1, 4, 5.0)), (-3.0, 1.0));
        assert_eq!(peak_partition_boundaries(&params(1, 3, 5.0)), (-2.0, 1.0));
        let p = params(1, 4, 5.0);
        let (a, b) = peak_partition_boundaries(&p);
        assert_eq!(p.potential(a), 4.0);
        assert_eq!(p.potential(b), 4.0);
    }

    #[test]
    fn boundary_sites_belong_to_the_right_region() {
        let p = params(1, 4, 5.0);
        // n = 10: boundaries sit at sites -30 and 10
        let mut masses = vec![0.0; 41];
        masses[0] = 0.25;
        masses[30] = 0.5;
        masses[40] = 0.25;
        let d = LatticeDistribution::from_masses(-30, masses, 10).unwrap();
        let s = peak_stats(&d, &p);
        assert_eq!(s.areas, [0.0, 0.75, 0.25]);
    }

    #[test]
    fn normal_areas_symmetric_potential() {
        let p = params(1, 2, 1.0);
        let a = normal_reference_areas(2.4, &p).unwrap();
        // boundaries at −1 and 1
        assert_abs_diff_eq!(a[0], a[2], epsilon = 1e-15);
        assert_abs_diff_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert!(normal_reference_areas(0.0, &p).is_err());
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(0.0330104), "0.0330104");
        assert_eq!(sig6(2.609742), "2.60974");
        assert_eq!(sig6(18.75991), "18.7599");
    }

    #[test]
    fn n_sweep_rejects_bad_n() {
        let p = params(1, 4, 5.0);
        assert!(matches!(n_sweep(&[10, 12], &p), Err(Error::NotMultipleOfM { n: 12, m: 5 })));
    }

    #[test]
    fn sweep_csv_layout() {
        let row = SweepRow { key: 5.0, stats: PeakStats { areas: [0.1, 0.7, 0.2], heights: [1.0, 2.0, 3.0], mean: 0.5 } };
        let mut buf = Vec::new();
        write_sweep_csv(&[row], "lambda", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "lambda,area1,area2,area3,height1,height2,height3,mean\n5,0.1,0.7,0.2,1,2,3,0.5\n");
    }

    #[test]
    fn tau_grid_single_point_and_budget() {
        let p = params(1, 4, 2.0);
        let one = Rational::from_integer(1);
        let half = Rational::new(1, 2).unwrap();
        let grid = [(one, one), (half, Rational::new(1, 3).unwrap())];
        let search = optimize_tau(&p, &grid, RefinementPolicy::AtLeast(4), 5).unwrap();
        assert_eq!(search.cells[0].status, CellStatus::Evaluated);
        assert_eq!(search.cells[1].status, CellStatus::OverBudget);
        assert_eq!(search.cells[1].n, 6);
        assert_eq!(search.best, Some(0));
        let fixed = optimize_tau(&p, &grid[1..], RefinementPolicy::Fixed(4), 100).unwrap();
        assert_eq!(fixed.cells[0].status, CellStatus::NotMultiple);
        assert_eq!(fixed.best, None);
    }
}
