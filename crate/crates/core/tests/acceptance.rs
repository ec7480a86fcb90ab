//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Built with `harness = false`, so the report is
//! always visible in `cargo test` output.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratchetlab::games::{mean_profit_mixture, mean_profit_pattern, mean_profit_single, GameB};
use ratchetlab::lattice::{evolve_flashing, evolve_segments};
use ratchetlab::mc::{ks_distance, ks_distance_step, sample_mean, simulate_flashing, McConfig};
use ratchetlab::stationary::{analyze, build_wrapped_matrix};
use ratchetlab::stats::{lambda_sweep, n_sweep, normal_reference_areas, optimize_tau, RefinementPolicy};
use ratchetlab::{FlashingPhase, FlashingSchedule, LatticeDistribution, RatchetKernel, RatchetParams, Rational};

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, f: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
}

fn tau() -> Rational {
    "2.4".parse().unwrap()
}

fn base(lambda: f64) -> RatchetParams {
    RatchetParams::new(1, 4, lambda, tau(), tau()).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// lambda, areas, heights, mean
#[rustfmt::skip]
const LAMBDA_SWEEP: [(f64, [f64; 3], [f64; 3], f64); 10] = [
    (1.0, [0.0688267, 0.701114, 0.230060], [0.0627471, 0.566531, 0.121751], 0.0595931),
    (2.0, [0.0500629, 0.734941, 0.214996], [0.0756255, 1.06860, 0.274227], 0.297582),
    (3.0, [0.0400379, 0.737033, 0.222929], [0.0875995, 1.59779, 0.464698], 0.496585),
    (4.0, [0.0354116, 0.734036, 0.230552], [0.1021090, 2.11341, 0.657213], 0.611651),
    (5.0, [0.0330104, 0.731102, 0.235888], [0.117836, 2.60974, 0.839352], 0.678364),
    (10.0, [0.0290537, 0.723174, 0.247772], [0.197900, 4.92657, 1.68412], 0.809036),
    (15.0, [0.0279536, 0.719952, 0.252094], [0.273152, 7.03601, 2.45801], 0.853220),
    (20.0, [0.0274363, 0.718221, 0.254343], [0.342844, 8.97601, 3.17124], 0.875658),
    (25.0, [0.0271326, 0.717131, 0.255736], [0.407788, 10.7794, 3.83499], 0.889397),
    (50.0, [0.0264993, 0.714662, 0.258839], [0.695524, 18.7599, 6.77822], 0.919557),
];

const N_SWEEP: [(u32, f64); 20] = [
    (10, 0.791225),
    (20, 0.713194),
    (30, 0.696690),
    (40, 0.689617),
    (50, 0.685678),
    (60, 0.683162),
    (70, 0.681414),
    (80, 0.680129),
    (90, 0.679144),
    (100, 0.678364),
    (110, 0.677731),
    (120, 0.677208),
    (130, 0.676768),
    (140, 0.676392),
    (150, 0.676068),
    (160, 0.675785),
    (170, 0.675537),
    (180, 0.675316),
    (190, 0.675120),
    (200, 0.674943),
];

fn mean_matches(got: f64, want: f64) -> bool {
    (got - want).abs() < 1e-6
}

/// `x` rounded to `digits` significant figures, the precision of the
/// published values.
fn round_sig(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

fn lambda_sweep_reference() -> Result<String, String> {
    let lambdas: Vec<f64> = LAMBDA_SWEEP.iter().map(|r| r.0).collect();
    let rows = lambda_sweep(&lambdas, &base(5.0), 100).map_err(|e| e.to_string())?;
    let (mut worst_mean, mut worst_area, mut worst_height) = (0.0f64, 0.0f64, 0.0f64);
    let mut bad = Vec::new();
    for (row, (lambda, areas, heights, mean)) in rows.iter().zip(LAMBDA_SWEEP) {
        let s = row.stats;
        let dm = (s.mean - mean).abs();
        let da = (0..3).map(|i| (s.areas[i] - areas[i]).abs()).fold(0.0, f64::max);
        let dh = (0..3).map(|i| ((s.heights[i] - heights[i]) / heights[i]).abs()).fold(0.0, f64::max);
        worst_mean = worst_mean.max(dm);
        worst_area = worst_area.max(da);
        worst_height = worst_height.max(dh);
        if !mean_matches(s.mean, mean) || da >= 2e-4 || dh >= 1e-3 {
            bad.push(format!("lambda={lambda}: mean {} areas {:?} heights {:?}", s.mean, s.areas, s.heights));
        }
    }
    let summary = format!(
        "10 rows, max |d mean| = {worst_mean:.2e}, max |d area| = {worst_area:.2e}, max rel d height = {worst_height:.2e}"
    );
    ensure(bad.is_empty(), format!("{summary}; {}", bad.join("; ")))?;
    Ok(summary)
}

fn n_sweep_reference() -> Result<String, String> {
    let ns: Vec<u32> = N_SWEEP.iter().map(|r| r.0).collect();
    let rows = n_sweep(&ns, &base(5.0)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (row, (n, mean)) in rows.iter().zip(N_SWEEP) {
        worst = worst.max((row.stats.mean - mean).abs());
        if !mean_matches(row.stats.mean, mean) {
            bad.push(format!("n={n}: {} vs {mean}", row.stats.mean));
        }
    }
    let summary = format!("20 rows, max |d mean| = {worst:.2e}");
    ensure(bad.is_empty(), format!("{summary}; {}", bad.join("; ")))?;
    Ok(summary)
}

struct Stationary {
    mubar: f64,
    mubar_wrapped: f64,
    residual: f64,
    cycle_steps: u64,
}

fn stationary_run() -> Result<Stationary, String> {
    let params = base(5.0);
    let schedule = FlashingSchedule::new(&params, 100).map_err(|e| e.to_string())?;
    let r = analyze(&params, &schedule).map_err(|e| e.to_string())?;
    Ok(Stationary { mubar: r.mubar, mubar_wrapped: r.mubar_wrapped, residual: r.residual, cycle_steps: r.cycle_steps })
}

fn mubar(s: &Stationary) -> Result<String, String> {
    let d = (s.mubar - 0.684827).abs();
    let detail = format!(
        "mubar = {:.10} (wrapped route {:.10}), cycle steps {}, |d| = {d:.2e}",
        s.mubar, s.mubar_wrapped, s.cycle_steps
    );
    ensure(d < 1e-5 && (s.mubar - s.mubar_wrapped).abs() < 1e-8 && s.cycle_steps == 48_001, detail.clone())?;
    Ok(detail)
}

fn normal_areas() -> Result<String, String> {
    let got = normal_reference_areas(2.4, &base(5.0)).map_err(|e| e.to_string())?;
    let want = [0.0264038, 0.714294, 0.259303];
    let d = (0..3).map(|i| (got[i] - want[i]).abs()).fold(0.0, f64::max);
    // the published values carry 6 significant figures
    let dr = (0..3).map(|i| (round_sig(got[i], 6) - want[i]).abs()).fold(0.0, f64::max);
    let detail = format!("{got:?}, max |d| = {d:.2e}, after rounding {dr:.1e}");
    ensure(dr < 1e-7, detail.clone())?;
    Ok(detail)
}

fn random_game(rng: &mut ChaCha8Rng) -> GameB {
    loop {
        let period = rng.random_range(2..=12u32);
        let l = rng.random_range(1..period);
        if num_gcd(l, period) != 1 {
            continue;
        }
        let rho = rng.random_range(0.05..0.95);
        return GameB::new(rho, l, period).unwrap();
    }
}

fn num_gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn parrondo() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_b = 0.0f64;
    let mut smallest_mix = f64::INFINITY;
    let mut checked_mix = 0;
    for _ in 0..1000 {
        let game = random_game(&mut rng);
        let profit = mean_profit_single(&game.chain());
        worst_b = worst_b.max(profit.abs());
        ensure(profit.abs() < 1e-12, format!("game B profit {profit} for {game:?}"))?;
        let alpha = game.alpha();
        if (alpha - 0.5).abs() > 1e-12 {
            let c = rng.random_range(0.05..0.95);
            let mix = mean_profit_mixture(c, &game).map_err(|e| e.to_string())?;
            let right_sign = if alpha < 0.5 { mix > 0.0 } else { mix < 0.0 };
            ensure(right_sign, format!("mixture profit {mix} at c={c} for {game:?}"))?;
            smallest_mix = smallest_mix.min(mix.abs());
            checked_mix += 1;
        }
    }
    let classical = GameB::classical();
    let p11 = mean_profit_pattern(1, 1, &classical).map_err(|e| e.to_string())?;
    ensure(p11.abs() < 1e-10, format!("pattern (1,1) profit {p11}"))?;
    // exact rationals from a symbolic stationary solve
    let exact = [((2, 1), 96.0 / 1609.0), ((1, 2), 2416.0 / 11867.0), ((2, 2), 16.0 / 163.0), ((3, 2), 2512.0 / 16643.0)];
    let mut patterns = Vec::new();
    for ((r, s), want) in exact {
        let got = mean_profit_pattern(r, s, &classical).map_err(|e| e.to_string())?;
        ensure(got > 0.0 && (got - want).abs() < 1e-12, format!("pattern ({r},{s}) profit {got}, exact {want}"))?;
        patterns.push(format!("({r},{s})={got:.6}"));
    }
    Ok(format!(
        "1000 games: max |B profit| = {worst_b:.1e}; {checked_mix} mixtures with the right sign (min |profit| {smallest_mix:.1e}); A1B1 = {p11:.1e}; {}",
        patterns.join(" ")
    ))
}

fn oracles() -> Result<String, String> {
    // lattice evolution against all 2^10 paths, with both phases present
    let (l, period, n, lambda) = (1, 3, 1, 0.4);
    let params = RatchetParams::new(l, period, lambda, Rational::from_integer(1), Rational::from_integer(1)).unwrap();
    let kernel = RatchetKernel::new(&params, n).map_err(|e| e.to_string())?;
    let plan = [(FlashingPhase::Off, 3), (FlashingPhase::On, 4), (FlashingPhase::Off, 1), (FlashingPhase::On, 2)];
    let phases: Vec<bool> = plan.iter().flat_map(|&(p, k)| std::iter::repeat_n(p == FlashingPhase::On, k as usize)).collect();
    assert_eq!(phases.len(), 10);
    let law = common::enumerate_paths(0, &phases, n, l, period, 1.0 - lambda);
    let got = evolve_segments(&LatticeDistribution::point_mass(0, n), &kernel, &plan).map_err(|e| e.to_string())?;
    let mut walk_err = 0.0f64;
    for site in -10..=10 {
        walk_err = walk_err.max((got.mass_at(site) - law.get(&site).copied().unwrap_or(0.0)).abs());
    }
    ensure(walk_err < 1e-14, format!("path enumeration differs by {walk_err:e}"))?;

    // wrapped cycle matrix against explicit 3x3 products
    let mut matrix_err = 0.0f64;
    for (t1, t2) in [(1, 1), (2, 1), (1, 3)] {
        let params = RatchetParams::new(l, period, lambda, Rational::from_integer(t1), Rational::from_integer(t2)).unwrap();
        let schedule = FlashingSchedule::new(&params, 1).map_err(|e| e.to_string())?;
        let matrix = build_wrapped_matrix(&params, &schedule).map_err(|e| e.to_string())?;
        let oracle = common::ring_product(&common::cycle_phases(t1 as usize, t2 as usize), 1, l, period, 1.0 - lambda);
        for i in 0..3 {
            for j in 0..3 {
                matrix_err = matrix_err.max((matrix.get(i, j) - oracle[i][j]).abs());
            }
        }
    }
    ensure(matrix_err < 1e-14, format!("matrix differs by {matrix_err:e}"))?;
    Ok(format!("2^10 paths: {walk_err:.1e}; n=1 cycle matrices: {matrix_err:.1e}"))
}

fn monte_carlo() -> Result<String, String> {
    let params = base(5.0);
    let cfg = McConfig { paths: 100_000, dt: 1e-4, seed: 42, wrap: false };
    let samples = simulate_flashing(&params, &cfg, 4.8, 0.0).map_err(|e| e.to_string())?;
    let schedule = FlashingSchedule::new(&params, 100).map_err(|e| e.to_string())?;
    let exact = evolve_flashing(&LatticeDistribution::point_mass(0, 100), &params, &schedule, schedule.cycle_steps())
        .map_err(|e| e.to_string())?;
    let ks = ks_distance(&samples, &exact).map_err(|e| e.to_string())?;
    let ks_step = ks_distance_step(&samples, &exact).map_err(|e| e.to_string())?;
    let mean = sample_mean(&samples);
    let detail = format!(
        "KS (histogram CDF) = {ks:.4}, KS (step CDF, for reference) = {ks_step:.4}, MC mean = {mean:.4}, |d mean| = {:.4}",
        (mean - 0.678364).abs()
    );
    ensure(ks < 0.02 && (mean - 0.678364).abs() < 0.02, detail.clone())?;
    Ok(detail)
}

fn conservation(s: &Stationary) -> Result<String, String> {
    let params = base(5.0);
    let schedule = FlashingSchedule::new(&params, 100).map_err(|e| e.to_string())?;
    let end = evolve_flashing(&LatticeDistribution::point_mass(0, 100), &params, &schedule, 48_000)
        .map_err(|e| e.to_string())?;
    let mass_err = (end.total_mass() - 1.0).abs();
    let parity = end.parity_violation();
    ensure(mass_err < 1e-12, format!("mass error {mass_err:e}"))?;
    ensure(parity == 0.0 && end.parity() == Some(0), format!("parity violation {parity:e}"))?;
    ensure(s.residual < 1e-10, format!("stationary residual {:e}", s.residual))?;

    let flat = base(0.0);
    let flat_end = evolve_flashing(&LatticeDistribution::point_mass(0, 100), &flat, &schedule, 48_000)
        .map_err(|e| e.to_string())?;
    let flat_mean = flat_end.mean_position();
    ensure(flat_mean.abs() < 1e-10, format!("lambda=0 mean {flat_mean:e}"))?;
    let flat_schedule = FlashingSchedule::new(&flat, 20).map_err(|e| e.to_string())?;
    let flat_mubar = analyze(&flat, &flat_schedule).map_err(|e| e.to_string())?.mubar;
    ensure(flat_mubar.abs() < 1e-10, format!("lambda=0 mubar {flat_mubar:e}"))?;
    Ok(format!(
        "48000 steps: |mass-1| = {mass_err:.1e}, parity violation {parity}, residual {:.1e}, lambda=0 mean {flat_mean:.1e}, mubar {flat_mubar:.1e}",
        s.residual
    ))
}

fn tau_cell() -> Result<String, String> {
    let search = optimize_tau(&base(5.0), &[(tau(), tau())], RefinementPolicy::Fixed(100), 100).map_err(|e| e.to_string())?;
    let rate = search.cells[0].rate.ok_or("cell not evaluated")?;
    let detail = format!("rate at (2.4, 2.4) = {rate:.8}");
    ensure((rate - 0.142672).abs() < 3e-6, detail.clone())?;
    Ok(detail)
}

fn main() {
    let mut report = Report { failures: 0 };
    println!("acceptance criteria");
    report.check("1 lambda sweep reference values (n=100)", lambda_sweep_reference);
    report.check("2 refinement sweep reference values (lambda=5)", n_sweep_reference);
    let start = Instant::now();
    let stationary = stationary_run();
    println!("      stationary analysis at n=100 took {:.1}s", start.elapsed().as_secs_f64());
    report.check("3 stationary mean displacement", || mubar(stationary.as_ref().map_err(Clone::clone)?));
    report.check("4 normal reference areas", normal_areas);
    report.check("5 Parrondo suite", parrondo);
    report.check("6 oracle equivalence", oracles);
    report.check("7 Monte Carlo cross-check", monte_carlo);
    report.check("8 conservation and structure", || conservation(stationary.as_ref().map_err(Clone::clone)?));
    report.check("tau grid cell (2.4, 2.4)", tau_cell);
    if report.failures > 0 {
        println!("{} criteria FAILED", report.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
