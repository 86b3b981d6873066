use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use setmem::pe;
use setmem::sim::{
    self, estimate_dataset, generate_any, lambda_sweep, run_experiment, write_estimates, write_sweep, Dataset,
    SimConfig,
};

/// Interval-valued parameter estimation under bounded noise.
#[derive(Parser)]
#[command(name = "setmem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo study with constant parameters.
    SimulateLti(SimulateArgs),
    /// Monte Carlo study with sinusoidally drifting parameters.
    SimulateLtv(SimulateArgs),
    /// Run the estimator over a data set CSV.
    Estimate(EstimateArgs),
    /// Excitation and contraction diagnostics for a data set.
    AnalyzePe(AnalyzeArgs),
    /// Final widths across forgetting factors.
    SweepLambda(SweepArgs),
}

/// Overrides for the simulation settings. Unset flags keep the value from
/// `--config`, or the built-in default.
#[derive(Args)]
struct Settings {
    /// Flat key=value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "n-a")]
    na: Option<String>,
    #[arg(long = "n-b")]
    nb: Option<String>,
    /// Comma-separated true parameter vector.
    #[arg(long, allow_hyphen_values = true)]
    theta_true: Option<String>,
    /// Noise half-width.
    #[arg(long = "a")]
    noise_half_width: Option<String>,
    /// Samples per run.
    #[arg(long = "horizon", short = 'N')]
    horizon: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    /// Forgetting factor.
    #[arg(long)]
    lambda: Option<String>,
    /// Initial covariance scale, P0 = p0_scale * I.
    #[arg(long)]
    p0_scale: Option<String>,
    /// Half-width of the prior box centred at zero.
    #[arg(long)]
    prior_radius: Option<String>,
    /// Radius modes, e.g. `m20,m50,exact`.
    #[arg(long)]
    modes: Option<String>,
    /// Monotonic refinement on or off.
    #[arg(long)]
    monotonic: Option<String>,
    /// Excitation window length.
    #[arg(long = "pe-window", short = 'T')]
    pe_window: Option<String>,
    #[arg(long)]
    max_horizon: Option<String>,
    /// Per-step drift radius (switches the generator to drifting parameters).
    #[arg(long, allow_hyphen_values = true)]
    r_delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c_delta: Option<String>,
    #[arg(long)]
    drift_period: Option<String>,
}

impl Settings {
    fn resolve(&self, mut cfg: SimConfig, seed: Option<u64>) -> Result<SimConfig> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let pairs = [
            ("n_a", &self.na),
            ("n_b", &self.nb),
            ("theta_true", &self.theta_true),
            ("a", &self.noise_half_width),
            ("N", &self.horizon),
            ("runs", &self.runs),
            ("lambda", &self.lambda),
            ("p0_scale", &self.p0_scale),
            ("prior_radius", &self.prior_radius),
            ("modes", &self.modes),
            ("monotonic", &self.monotonic),
            ("T", &self.pe_window),
            ("max_horizon", &self.max_horizon),
            ("r_delta", &self.r_delta),
            ("c_delta", &self.c_delta),
            ("drift_period", &self.drift_period),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct EstimateArgs {
    /// Data set CSV.
    #[arg(long)]
    input: PathBuf,
    /// Recorded in the output configuration; the estimator itself is deterministic.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Data set CSV. Without it a constant-parameter data set is generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated forgetting factors.
    #[arg(long, default_value = "0.3,0.6,0.9,0.99")]
    lambdas: String,
    #[command(flatten)]
    settings: Settings,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn prepare_out(dir: &Path, cfg: &SimConfig) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.txt"), cfg.to_key_value())?;
    Ok(())
}

fn simulate(args: &SimulateArgs, base: SimConfig) -> Result<bool> {
    let cfg = args.settings.resolve(base, Some(args.seed))?;
    prepare_out(&args.out, &cfg)?;

    let ds = generate_any(&cfg, cfg.seed)?;
    ds.write_csv(create(&args.out.join("dataset.csv"))?)?;
    for &mode in &cfg.modes {
        let est = estimate_dataset(&ds, &cfg.estimator_config(ds.dim(), mode)?)?;
        let path = args.out.join(format!("estimates_{}.csv", mode.label()));
        write_estimates(create(&path)?, ds.dim(), &est)?;
    }

    let res = run_experiment(&cfg)?;
    res.write_mean_bounds(create(&args.out.join("mean_bounds.csv"))?)?;
    res.write_audit(create(&args.out.join("audit.csv"))?)?;
    let summary = res.summary();
    fs::write(args.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(res.all_contained())
}

fn estimate(args: &EstimateArgs) -> Result<bool> {
    let cfg = args.settings.resolve(SimConfig::default_lti(), Some(args.seed))?;
    let ds = Dataset::load(&args.input)?;
    let cfg = SimConfig {
        horizon: cfg.horizon.max(ds.len()),
        ..cfg
    };
    prepare_out(&args.out, &cfg)?;
    let mut clean = true;
    for &mode in &cfg.modes {
        let path = args.out.join(format!("estimates_{}.csv", mode.label()));
        match sim::estimate_from_csv(&args.input, &cfg.estimator_config(ds.dim(), mode)?, &path)? {
            Some(a) => {
                println!("{mode}: {} steps, contained={}", a.steps, a.is_clean());
                clean &= a.is_clean();
            }
            None => println!("{mode}: {} steps, no truth columns", ds.len()),
        }
    }
    Ok(clean)
}

fn analyze(args: &AnalyzeArgs) -> Result<bool> {
    let cfg = args.settings.resolve(SimConfig::default_lti(), Some(args.seed))?;
    prepare_out(&args.out, &cfg)?;
    let ds = match &args.input {
        Some(p) => Dataset::load(p)?,
        None => {
            let ds = generate_any(&cfg, cfg.seed)?;
            ds.write_csv(create(&args.out.join("dataset.csv"))?)?;
            ds
        }
    };
    let radii: Vec<f64> = ds.records().iter().map(|r| 0.5 * (r.v_hi - r.v_lo)).collect();
    let window = cfg.pe_window.unwrap_or_else(|| pe::default_window(ds.dim()));
    let report = pe::analyze(&ds.regressors(), &radii, &cfg.rls_config(ds.dim())?, window)?;
    let text = report.to_key_value();
    fs::write(args.out.join("pe_report.txt"), &text)?;
    fs::write(args.out.join("pe_report.csv"), report.to_csv())?;
    print!("{text}");
    Ok(true)
}

fn sweep(args: &SweepArgs) -> Result<bool> {
    let cfg = args.settings.resolve(SimConfig::default_lti(), Some(args.seed))?;
    let lambdas = sim::parse_vector(&args.lambdas).context("parsing --lambdas")?;
    if lambdas.is_empty() {
        bail!("--lambdas is empty");
    }
    prepare_out(&args.out, &cfg)?;
    let rows = lambda_sweep(&cfg, lambdas.as_slice())?;
    write_sweep(create(&args.out.join("sweep.csv"))?, cfg.dim(), &rows)?;
    for r in &rows {
        println!("lambda={} mode={} width_1={:.6}", r.lambda, r.mode, r.mean_final_width[0]);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SimulateLti(a) => simulate(a, SimConfig::default_lti()),
        Command::SimulateLtv(a) => simulate(a, SimConfig::default_ltv()),
        Command::Estimate(a) => estimate(a),
        Command::AnalyzePe(a) => analyze(a),
        Command::SweepLambda(a) => sweep(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("containment audit reported violations");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
