use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use compound_experiments::config::{load_toml, parse_alphas};
use compound_experiments::tables::pilar_report;
use compound_experiments::{
    emit_tables, plot::plot, run_random_walk_sweep, run_variance_study, with_workers, EnvName, EstimatorSpec,
    ExperimentError, Result, SweepConfig, VarianceConfig,
};

#[derive(Parser)]
#[command(name = "compound", version, about = "Compound-return TD learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Step-size sweep on the 19-state random walk.
    Sweep(SweepArgs),
    /// n-step return variance from the start state against the model bounds.
    Variance(VarianceArgs),
    /// Write the (n, λ) pairing table and both Pilar tables as CSV.
    Tables(TablesArgs),
    /// Search Pilar parameters for target effective n-steps.
    Pilar(PilarArgs),
    /// Render a sweep or variance CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    Nstep,
    Lambda,
    Pilar,
    Custom,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with sweep settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single estimator instead of the configured list.
    #[arg(long, value_enum)]
    estimator: Option<EstimatorKind>,
    /// n-step length, or the target effective length for `pilar`.
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Weights for `custom`, as `len:weight` pairs separated by commas.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of uniform points on [0, 1], or a comma-separated list.
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct VarianceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// rw19, grid4x3 or grid10x8.
    #[arg(long)]
    env: Option<String>,
    /// Largest n in the table.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "variance.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct PilarArgs {
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    /// Target effective n-steps (repeatable); defaults to the reference set.
    #[arg(long)]
    n: Vec<f64>,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Sweep or variance CSV.
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_weights(text: &str) -> Result<Vec<(usize, f64)>> {
    text.split(',')
        .map(|pair| {
            let bad = || ExperimentError::Config(format!("expected `len:weight`, found `{pair}`"));
            let (n, c) = pair.trim().split_once(':').ok_or_else(bad)?;
            Ok((
                n.trim().parse().map_err(|_| bad())?,
                c.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn estimator_from_flags(args: &SweepArgs, kind: EstimatorKind) -> Result<EstimatorSpec> {
    let missing = |flag: &str| ExperimentError::Config(format!("--{flag} is required for this estimator"));
    Ok(match kind {
        EstimatorKind::Nstep => {
            let n = args.n.ok_or_else(|| missing("n"))?;
            if n < 1.0 || n.fract() != 0.0 {
                return Err(ExperimentError::Config(format!(
                    "n-step length {n} must be a positive integer"
                )));
            }
            EstimatorSpec::Nstep { n: n as usize }
        }
        EstimatorKind::Lambda => EstimatorSpec::Lambda {
            lambda: args.lambda.ok_or_else(|| missing("lambda"))?,
        },
        EstimatorKind::Pilar => EstimatorSpec::Pilar {
            n: args.n.ok_or_else(|| missing("n"))?,
        },
        EstimatorKind::Custom => EstimatorSpec::Custom {
            weights: parse_weights(args.weights.as_deref().ok_or_else(|| missing("weights"))?)?,
        },
    })
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut cfg: SweepConfig = match &args.config {
        Some(path) => load_toml(path)?,
        None => SweepConfig::default(),
    };
    if let Some(kind) = args.estimator {
        cfg.estimators = vec![estimator_from_flags(&args, kind)?];
    }
    if let Some(g) = args.gamma {
        cfg.gamma = g;
    }
    if let Some(a) = &args.alphas {
        cfg.alphas = parse_alphas(a)?;
    }
    if let Some(e) = args.episodes {
        cfg.episodes = e;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let result = with_workers(args.workers, || run_random_walk_sweep(&cfg))??;
    result.to_table().write(&args.out)?;
    for spec in &cfg.estimators {
        let name = spec.to_string();
        if let Some(best) = result.min_error(&name) {
            println!(
                "{name}: lowest mean RMS {:.4} ± {:.4} at α = {:.3}",
                best.mean_rms, best.ci_half_width, best.alpha
            );
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn variance(args: VarianceArgs) -> Result<()> {
    let mut cfg: VarianceConfig = match &args.config {
        Some(path) => load_toml(path)?,
        None => VarianceConfig::default(),
    };
    if let Some(env) = &args.env {
        cfg.env = env.parse::<EnvName>()?;
    }
    if let Some(n) = args.n {
        cfg.n_max = n;
    }
    if let Some(e) = args.episodes {
        cfg.episodes = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let study = with_workers(args.workers, || run_variance_study(&cfg))??;
    study.to_table().write(&args.out)?;
    let inside = study.rows.iter().filter(|r| r.within_bounds(3.0)).count();
    println!(
        "{}: κ = {:.6}, γ = {}, {inside}/{} rows within the model bounds ± 3 SE",
        study.env,
        study.kappa,
        study.gamma,
        study.rows.len()
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn tables(args: TablesArgs) -> Result<()> {
    let paths = emit_tables(args.gamma, &args.out)?;
    for p in [&paths.com_pairs, &paths.experiment_pilars, &paths.pilar_reference] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn pilar(args: PilarArgs) -> Result<()> {
    let (text, table) = pilar_report(args.gamma, &args.n)?;
    print!("{text}");
    if let Some(out) = &args.out {
        table.write(out)?;
    }
    Ok(())
}

fn plot_cmd(args: PlotArgs) -> Result<()> {
    let kind = plot(&args.input, &args.out)?;
    println!("wrote {kind:?} chart to {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Variance(a) => variance(a),
        Command::Tables(a) => tables(a),
        Command::Pilar(a) => pilar(a),
        Command::Plot(a) => plot_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
