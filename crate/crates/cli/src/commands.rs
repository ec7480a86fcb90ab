use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ratchetlab::games::{mean_profit_mixture, mean_profit_pattern, mean_profit_single, GameB};
use ratchetlab::lattice::{evolve_flashing, steps_for_time};
use ratchetlab::mc::{self, McConfig};
use ratchetlab::stationary::{self, ExtraStep};
use ratchetlab::stats::{self, RefinementPolicy};
use ratchetlab::{io, FlashingSchedule, LatticeDistribution, PeakStats, Rational};
use serde::Serialize;

use crate::config::RunConfig;
use crate::svg;
use crate::{CliError, ModelArgs};

type Result<T> = std::result::Result<T, CliError>;

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_text(out: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::write(out.join(name), text)?;
    Ok(())
}

/// Every run leaves `run.conf`, which reproduces it via `--config`.
fn emit_config<T: Serialize>(out: &Path, command: &str, args: &T) -> Result<()> {
    write_text(out, "run.conf", &RunConfig::resolved(command, args)?.render())
}

fn density_curve(dist: &LatticeDistribution) -> Vec<(f64, f64)> {
    dist.rescaled_density().iter().map(|p| (p.position, p.density)).collect()
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PotentialArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Left end of the range.
    #[arg(long, allow_negative_numbers = true, default_value_t = -6.0)]
    pub from: f64,
    /// Right end of the range.
    #[arg(long, allow_negative_numbers = true, default_value_t = 6.0)]
    pub to: f64,
    /// Number of evenly spaced points, both ends included.
    #[arg(long, default_value_t = 1201)]
    pub points: usize,
    /// Also draw potential.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Serialize)]
struct PotentialRow {
    x: f64,
    potential: f64,
    drift: f64,
    invariant_density: f64,
}

pub fn potential(args: &PotentialArgs, out: &Path) -> Result<()> {
    if !(args.from.is_finite() && args.to.is_finite() && args.from < args.to) {
        return Err(CliError::Usage(format!("empty range [{}, {}]", args.from, args.to)));
    }
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let p = args.model.params()?;
    let step = (args.to - args.from) / (args.points - 1) as f64;
    let rows: Vec<PotentialRow> = (0..args.points)
        .map(|i| {
            let x = if i + 1 == args.points { args.to } else { args.from + i as f64 * step };
            PotentialRow { x, potential: p.potential(x), drift: p.drift(x), invariant_density: p.invariant_density(x) }
        })
        .collect();
    let mut w = csv::Writer::from_writer(create(out, "potential.csv")?);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    if args.svg {
        let curve: Vec<_> = rows.iter().map(|r| (r.x, r.potential)).collect();
        write_text(out, "potential.svg", &svg::line_plot("V(x)", &[("potential", &curve)]))?;
    }
    emit_config(out, "potential", &PotentialArgs { model: args.model.resolved()?, ..args.clone() })?;
    println!("wrote {} rows to {}", rows.len(), out.join("potential.csv").display());
    Ok(())
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ParrondoArgs {
    /// ρ in (0, 1), e.g. `1/3`.
    #[arg(long, default_value = "1/3")]
    pub rho: Rational,
    /// Number of states with forward probability p₀.
    #[arg(long, default_value_t = 1)]
    pub l: u32,
    /// Number of states on the cycle.
    #[arg(long = "L", default_value_t = 3)]
    #[serde(rename = "L")]
    pub period: u32,
    /// Probability c of playing game A in the random mixture, e.g. `1/2`.
    #[arg(long)]
    pub mix: Option<Rational>,
    /// Periodic pattern: r plays of A, then s plays of B.
    #[arg(long, num_args = 2, value_names = ["R", "S"])]
    pub pattern: Option<Vec<u32>>,
}

#[derive(Serialize)]
struct ParrondoReport {
    rho: f64,
    l: u32,
    period: u32,
    p0: f64,
    p1: f64,
    fairness_residual: f64,
    invariant_measure: Vec<f64>,
    profit_b: f64,
    mix: Option<f64>,
    profit_mixture: Option<f64>,
    pattern: Option<[u32; 2]>,
    profit_pattern: Option<f64>,
}

pub fn parrondo(args: &ParrondoArgs, out: &Path) -> Result<()> {
    let game = GameB::new(args.rho.to_f64(), args.l, args.period)?;
    let mix = args.mix.map(|c| c.to_f64());
    let profit_mixture = mix.map(|c| mean_profit_mixture(c, &game)).transpose()?;
    let pattern = args.pattern.as_ref().map(|v| [v[0], v[1]]);
    let profit_pattern = pattern.map(|[r, s]| mean_profit_pattern(r, s, &game)).transpose()?;
    let report = ParrondoReport {
        rho: game.rho(),
        l: game.l(),
        period: game.period(),
        p0: game.p0(),
        p1: game.p1(),
        fairness_residual: game.fairness_residual(),
        invariant_measure: game.invariant_measure(),
        profit_b: mean_profit_single(&game.chain()),
        mix,
        profit_mixture,
        pattern,
        profit_pattern,
    };
    println!("p0 = {}, p1 = {}", report.p0, report.p1);
    println!("invariant measure of B: {:?}", report.invariant_measure);
    println!("mean profit of B: {:e}", report.profit_b);
    if let (Some(c), Some(v)) = (args.mix, profit_mixture) {
        println!("mean profit of the mixture with c = {c}: {v}");
    }
    if let (Some([r, s]), Some(v)) = (pattern, profit_pattern) {
        println!("mean profit per period of A^{r} B^{s} ({} games): {v}", r + s);
    }
    write_json(out, "parrondo.json", &report)?;
    emit_config(out, "parrondo", args)
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Space refinement; must be a multiple of m.
    #[arg(long, default_value_t = 100)]
    pub n: u32,
    /// Number of lattice steps.
    #[arg(long, conflicts_with = "time")]
    pub steps: Option<u64>,
    /// Continuous time, exact rational [default: τ₁ + τ₂].
    #[arg(long)]
    pub time: Option<Rational>,
    /// Starting position of the point mass; must lie on the lattice [default: 0].
    #[arg(long, allow_negative_numbers = true, conflicts_with = "input")]
    pub start: Option<f64>,
    /// Start from a distribution CSV or a binary checkpoint (`.bin`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also draw distribution.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Serialize)]
struct EvolveReport {
    n: u32,
    m: u32,
    steps: u64,
    steps_taken: u64,
    total_mass: f64,
    stats: PeakStats,
}

fn read_start(args: &EvolveArgs) -> Result<LatticeDistribution> {
    let Some(path) = &args.input else {
        let start = args.start.unwrap_or(0.0);
        let site = start * args.n as f64;
        if !site.is_finite() || (site - site.round()).abs() > 1e-9 {
            return Err(CliError::Usage(format!("--start {start} is not on the lattice of spacing 1/{}", args.n)));
        }
        return Ok(LatticeDistribution::point_mass(site.round() as i64, args.n));
    };
    let file = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e == "bin") {
        Ok(io::read_checkpoint(file)?)
    } else {
        Ok(io::read_distribution_csv(file, Some(args.n))?)
    }
}

pub fn evolve(args: &EvolveArgs, out: &Path) -> Result<()> {
    let p = args.model.params()?;
    let schedule = FlashingSchedule::new(&p, args.n)?;
    let steps = match (args.steps, args.time) {
        (Some(s), _) => s,
        (None, Some(t)) => steps_for_time(t, args.n)?,
        (None, None) => schedule.cycle_steps(),
    };
    let start = read_start(args)?;
    let end = evolve_flashing(&start, &p, &schedule, steps)?;
    let report = EvolveReport {
        n: args.n,
        m: schedule.m(),
        steps,
        steps_taken: end.steps_taken(),
        total_mass: end.total_mass(),
        stats: stats::peak_stats(&end, &p),
    };
    io::write_distribution_csv(&end, create(out, "distribution.csv")?)?;
    io::write_checkpoint(&end, create(out, "checkpoint.bin")?)?;
    write_json(out, "stats.json", &report)?;
    if args.svg {
        write_text(out, "distribution.svg", &svg::line_plot("density", &[("density", &density_curve(&end))]))?;
    }
    emit_config(out, "evolve", &EvolveArgs { model: args.model.resolved()?, ..args.clone() })?;
    let s = report.stats;
    println!("{steps} steps at n = {} (m = {})", args.n, schedule.m());
    println!("areas   {:?}", s.areas.map(stats::sig6));
    println!("heights {:?}", s.heights.map(stats::sig6));
    println!("mean displacement {}", s.mean);
    Ok(())
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtraStepArg {
    Symmetric,
    Ratchet,
}

impl From<ExtraStepArg> for ExtraStep {
    fn from(a: ExtraStepArg) -> Self {
        match a {
            ExtraStepArg::Symmetric => ExtraStep::Symmetric,
            ExtraStepArg::Ratchet => ExtraStep::Ratchet,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StationaryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    pub n: u32,
    /// Walk that takes the extra step when the cycle length must be made odd.
    #[arg(long, value_enum, default_value_t = ExtraStepArg::Symmetric)]
    pub extra_step: ExtraStepArg,
    /// Also write the cycle matrix to matrix.bin.
    #[arg(long)]
    pub matrix: bool,
    /// Also draw stationary.svg with the three snapshots.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Serialize)]
struct StationaryReport {
    n: u32,
    states: usize,
    cycle_steps: u64,
    mubar: f64,
    mubar_wrapped: f64,
    rate: f64,
    residual: f64,
}

pub fn stationary(args: &StationaryArgs, out: &Path) -> Result<()> {
    let p = args.model.params()?;
    let schedule = FlashingSchedule::new(&p, args.n)?;
    let extra = ExtraStep::from(args.extra_step);
    let matrix = stationary::build_wrapped_matrix_with(&p, &schedule, extra)?;
    if args.matrix {
        io::write_matrix(&matrix, create(out, "matrix.bin")?)?;
    }
    let result = stationary::analyze_with(&p, &schedule, extra)?;
    let report = StationaryReport {
        n: args.n,
        states: result.pibar.len(),
        cycle_steps: result.cycle_steps,
        mubar: result.mubar,
        mubar_wrapped: result.mubar_wrapped,
        rate: result.rate(&p),
        residual: result.residual,
    };
    io::write_stationary_csv(&result.pibar_recentered, create(out, "pibar.csv")?)?;
    let panels = stationary::cycle_snapshots(&result, &p, &schedule, extra)?;
    for (i, panel) in panels.iter().enumerate() {
        io::write_distribution_csv(panel, create(out, &format!("panel{}.csv", i + 1))?)?;
    }
    if args.svg {
        let curves: Vec<_> = panels.iter().map(density_curve).collect();
        let series = [("stationary", &curves[0][..]), ("after off phase", &curves[1][..]), ("after cycle", &curves[2][..])];
        write_text(out, "stationary.svg", &svg::line_plot("density over one stationary cycle", &series))?;
    }
    write_json(out, "stationary.json", &report)?;
    emit_config(out, "stationary", &StationaryArgs { model: args.model.resolved()?, ..args.clone() })?;
    println!("{} states, {} steps per cycle", report.states, report.cycle_steps);
    println!("mubar = {} (per unit time {})", report.mubar, report.rate);
    println!("residual {:e}", report.residual);
    Ok(())
}

/// `a,b,c` or `start:end:step` (inclusive).
fn parse_values(list: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("bad value list {list:?}; use `1,2,5` or `10:200:10`"));
    let parts: Vec<&str> = list.split(':').collect();
    let values = match parts[..] {
        [items] => items.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?,
        [a, b, c] => {
            let (a, b, c): (f64, f64, f64) =
                (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?);
            if !(c > 0.0) || b < a {
                return Err(bad());
            }
            let count = ((b - a) / c + 1e-9).floor() as usize + 1;
            (0..count).map(|i| a + i as f64 * c).collect()
        }
        _ => return Err(bad()),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LambdaSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Drift strengths: `1,2,5` or `start:end:step`.
    #[arg(long)]
    pub values: String,
    #[arg(long, default_value_t = 100)]
    pub n: u32,
}

pub fn sweep_lambda(args: &LambdaSweepArgs, out: &Path) -> Result<()> {
    let p = args.model.params()?;
    let rows = stats::lambda_sweep(&parse_values(&args.values)?, &p, args.n)?;
    stats::write_sweep_csv(&rows, "lambda", create(out, "sweep_lambda.csv")?)?;
    emit_config(out, "sweep lambda", &LambdaSweepArgs { model: args.model.resolved()?, ..args.clone() })?;
    print!("{}", stats::format_sweep_table(&rows, "lambda"));
    Ok(())
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Refinements: `10,20` or `start:end:step`.
    #[arg(long)]
    pub values: String,
}

pub fn sweep_n(args: &NSweepArgs, out: &Path) -> Result<()> {
    let p = args.model.params()?;
    let ns = parse_values(&args.values)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(CliError::Usage(format!("n must be a positive integer, got {v}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = stats::n_sweep(&ns, &p)?;
    stats::write_sweep_csv(&rows, "n", create(out, "sweep_n.csv")?)?;
    emit_config(out, "sweep n", &NSweepArgs { model: args.model.resolved()?, ..args.clone() })?;
    print!("{}", stats::format_sweep_table(&rows, "n"));
    Ok(())
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TauSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// CSV with columns `tau1,tau2` (rationals or decimals).
    #[arg(long)]
    pub grid: PathBuf,
    /// Evaluate every cell at exactly this n.
    #[arg(long, conflicts_with = "min_n")]
    pub n: Option<u32>,
    /// Evaluate each cell at the smallest multiple of its m that is at least
    /// this [default: 100].
    #[arg(long)]
    pub min_n: Option<u32>,
    /// Skip cells that would need a larger n.
    #[arg(long, default_value_t = 200)]
    pub max_n: u32,
}

#[derive(serde::Deserialize)]
struct GridRow {
    tau1: String,
    tau2: String,
}

#[derive(Serialize)]
struct TauRow {
    tau1: String,
    tau2: String,
    m: u32,
    n: u32,
    status: String,
    mubar: Option<f64>,
    rate: Option<f64>,
}

pub fn sweep_tau(args: &TauSweepArgs, out: &Path) -> Result<()> {
    let p = args.model.params()?;
    let mut grid = Vec::new();
    for row in csv::Reader::from_reader(BufReader::new(File::open(&args.grid)?)).deserialize() {
        let row: GridRow = row?;
        let tau1: Rational = row.tau1.trim().parse()?;
        let tau2: Rational = row.tau2.trim().parse()?;
        grid.push((tau1, tau2));
    }
    if grid.is_empty() {
        return Err(CliError::Usage(format!("{} has no grid rows", args.grid.display())));
    }
    let policy = match args.n {
        Some(n) => RefinementPolicy::Fixed(n),
        None => RefinementPolicy::AtLeast(args.min_n.unwrap_or(100)),
    };
    let search = stats::optimize_tau(&p, &grid, policy, args.max_n)?;
    let mut w = csv::Writer::from_writer(create(out, "sweep_tau.csv")?);
    println!("{:>8} {:>8} {:>4} {:>5} {:>12} {:>12}  status", "tau1", "tau2", "m", "n", "mubar", "rate");
    for cell in &search.cells {
        let status = format!("{:?}", cell.status).to_lowercase();
        let fmt = |x: Option<f64>| x.map(stats::sig6).unwrap_or_else(|| "-".into());
        println!(
            "{:>8} {:>8} {:>4} {:>5} {:>12} {:>12}  {status}",
            cell.tau1.to_string(),
            cell.tau2.to_string(),
            cell.m,
            cell.n,
            fmt(cell.mubar),
            fmt(cell.rate)
        );
        w.serialize(TauRow {
            tau1: cell.tau1.to_string(),
            tau2: cell.tau2.to_string(),
            m: cell.m,
            n: cell.n,
            status,
            mubar: cell.mubar,
            rate: cell.rate,
        })?;
    }
    w.flush()?;
    match search.best {
        Some(i) => {
            let c = &search.cells[i];
            println!("best: tau1 = {}, tau2 = {}, rate = {}", c.tau1, c.tau2, c.rate.unwrap());
        }
        None => println!("best: no cell was evaluated"),
    }
    emit_config(out, "sweep tau", &TauSweepArgs { model: args.model.resolved()?, ..args.clone() })
}

#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = McConfig::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// End time [default: τ₁ + τ₂].
    #[arg(long)]
    pub time: Option<Rational>,
    /// Starting position.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y0: f64,
    /// Reduce endpoints mod L.
    #[arg(long)]
    pub wrap: bool,
    /// Simulate the pure ratchet (potential always on).
    #[arg(long)]
    pub ratchet: bool,
    /// Histogram bins.
    #[arg(long, default_value_t = 200)]
    pub bins: usize,
    /// Exact distribution CSV to compare against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

#[derive(Serialize)]
struct McReport {
    paths: usize,
    t_end: f64,
    mean: f64,
    variance: f64,
    ks: Option<f64>,
    ks_step: Option<f64>,
    exact_mean: Option<f64>,
}

pub fn mc(args: &McArgs, out: &Path) -> Result<()> {
    let p = args.model.params()?;
    let cfg = McConfig { paths: args.paths, dt: args.dt, seed: args.seed, wrap: args.wrap };
    let t_end = args.time.unwrap_or(p.tau1() + p.tau2()).to_f64();
    let samples = if args.ratchet {
        mc::simulate_ratchet(&p, &cfg, t_end, args.y0)?
    } else {
        mc::simulate_flashing(&p, &cfg, t_end, args.y0)?
    };
    let (lo, hi) = if args.wrap {
        (0.0, p.period() as f64)
    } else {
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, if hi > lo { hi + (hi - lo) * 1e-9 } else { lo + 1.0 })
    };
    let hist = mc::histogram(&samples, lo, hi, args.bins)?;
    let mut report = McReport {
        paths: args.paths,
        t_end,
        mean: mc::sample_mean(&samples),
        variance: if samples.len() > 1 { mc::sample_variance(&samples) } else { 0.0 },
        ks: None,
        ks_step: None,
        exact_mean: None,
    };
    if let Some(path) = &args.compare {
        let exact = io::read_distribution_csv(BufReader::new(File::open(path)?), None)?;
        report.ks = Some(mc::ks_distance(&samples, &exact)?);
        report.ks_step = Some(mc::ks_distance_step(&samples, &exact)?);
        report.exact_mean = Some(exact.mean_position());
    }
    io::write_samples_csv(&samples, create(out, "samples.csv")?)?;
    io::write_histogram_csv(&hist, create(out, "histogram.csv")?)?;
    write_json(out, "mc.json", &report)?;
    emit_config(out, "mc", &McArgs { model: args.model.resolved()?, ..args.clone() })?;
    println!("{} paths to t = {t_end}: mean {}, variance {}", args.paths, report.mean, report.variance);
    if let (Some(ks), Some(ks_step), Some(m)) = (report.ks, report.ks_step, report.exact_mean) {
        println!("KS distance {ks} (step CDF {ks_step}); exact mean {m}");
    }
    Ok(())
}
