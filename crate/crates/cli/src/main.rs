//! `carpool` — run, sweep, generate, and inspect carpooling scenarios.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use carpool_core::{
    equal_allocate, generate_scenario, load_scenario, run, save_scenario, shapley_exact,
    shapley_montecarlo, sweep, to_canonical_string, verify_axioms, CoalitionMode, Error,
    GeneratorConfig, ImpatienceGame, Passenger, RunOptions, Scenario, ShapleyMethod, SplitRule,
    SweepGrid, ValueRange,
};

#[derive(Parser)]
#[command(
    name = "carpool",
    version,
    about = "Coalition-game carpooling fare engine",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and emit its results table.
    Run {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Write the results table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        options: RunArgs,
    },
    /// Run a parameter grid against a base scenario.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Output path for the combined results table.
        #[arg(long)]
        out: PathBuf,
        /// Grid axis, `name=v1,v2,...`; repeat per axis. Names: rho, epsilon,
        /// alpha, beta, n_passengers, seed.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        #[command(flatten)]
        options: RunArgs,
    },
    /// Generate a scenario file from a seed.
    Generate {
        /// Generator seed.
        #[arg(long)]
        seed: u64,
        /// Number of passengers to draw.
        #[arg(long)]
        passengers: usize,
        /// Write the scenario here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenario label (defaults to `gen-seed<seed>-n<n>`).
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        tariff: TariffArgs,
        #[command(flatten)]
        ranges: RangeArgs,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Print the optimal service sequence and its impatience breakdown.
    Sequence {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Print Shapley values of the scenario's impatience game.
    Shapley {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long = "shapley", value_enum, default_value_t = ShapleyArg::Exact)]
        method: ShapleyArg,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Monte Carlo seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Compensation split rule.
    #[arg(long, value_enum, default_value_t = SplitArg::Shapley)]
    split: SplitArg,
    /// Shapley computation method.
    #[arg(long = "shapley", value_enum, default_value_t = ShapleyArg::Exact)]
    shapley: ShapleyArg,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coalition mode.
    #[arg(long, value_enum, default_value_t = CoalitionArg::Grand)]
    coalition: CoalitionArg,
}

impl RunArgs {
    fn to_options(&self) -> RunOptions {
        RunOptions {
            split: match self.split {
                SplitArg::Shapley => SplitRule::ShapleyProportional,
                SplitArg::Equal => SplitRule::Equal,
                SplitArg::Baseline => SplitRule::Baseline,
            },
            shapley: match self.shapley {
                ShapleyArg::Exact => ShapleyMethod::Exact,
                ShapleyArg::Mc => ShapleyMethod::MonteCarlo {
                    samples: self.samples,
                    seed: self.seed,
                },
            },
            coalition: match self.coalition {
                CoalitionArg::Grand => CoalitionMode::Grand,
                CoalitionArg::Select => CoalitionMode::Select,
            },
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Shapley,
    Equal,
    Baseline,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ShapleyArg {
    Exact,
    Mc,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CoalitionArg {
    Grand,
    Select,
}

#[derive(Args)]
struct TariffArgs {
    /// Price per kilometer.
    #[arg(long)]
    pr_l: Option<f64>,
    /// Price per minute.
    #[arg(long)]
    pr_t: Option<f64>,
    /// Surge coefficient.
    #[arg(long)]
    rho: Option<f64>,
    /// Willingness-to-pay coefficient.
    #[arg(long)]
    alpha: Option<f64>,
    /// Least-expected-revenue coefficient.
    #[arg(long)]
    beta: Option<f64>,
    /// Incentive coefficient.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct RangeArgs {
    /// Distance draw range, `LO:HI` km.
    #[arg(long)]
    distance_range: Option<String>,
    /// Expected-time draw range, `LO:HI` minutes.
    #[arg(long)]
    time_range: Option<String>,
    /// Sojourn-time draw range, `LO:HI` minutes.
    #[arg(long)]
    theta_range: Option<String>,
    /// Compensation-rate draw range, `LO:HI` money per minute.
    #[arg(long)]
    omega_range: Option<String>,
}

fn parse_range(field: &str, spec: &str) -> Result<ValueRange, Error> {
    let (lo, hi) = spec.split_once(':').ok_or_else(|| Error::Invariant {
        field: field.to_owned(),
        constraint: format!("`{spec}` is not of the form LO:HI"),
    })?;
    let parse = |v: &str| {
        v.trim().parse::<f64>().map_err(|_| Error::Invariant {
            field: field.to_owned(),
            constraint: format!("`{v}` is not a number"),
        })
    };
    Ok(ValueRange::new(parse(lo)?, parse(hi)?))
}

fn generator_config(tariff: &TariffArgs, ranges: &RangeArgs) -> Result<GeneratorConfig, Error> {
    let mut config = GeneratorConfig::default();
    if let Some(v) = tariff.pr_l {
        config.params.pr_l = v;
    }
    if let Some(v) = tariff.pr_t {
        config.params.pr_t = v;
    }
    if let Some(v) = tariff.rho {
        config.params.rho = v;
    }
    if let Some(v) = tariff.alpha {
        config.params.alpha = v;
    }
    if let Some(v) = tariff.beta {
        config.params.beta = v;
    }
    if let Some(v) = tariff.epsilon {
        config.params.epsilon = v;
    }
    if let Some(spec) = &ranges.distance_range {
        config.distance_km = parse_range("distance_range", spec)?;
    }
    if let Some(spec) = &ranges.time_range {
        config.expected_time_min = parse_range("time_range", spec)?;
    }
    if let Some(spec) = &ranges.theta_range {
        config.theta = parse_range("theta_range", spec)?;
    }
    if let Some(spec) = &ranges.omega_range {
        config.omega = parse_range("omega_range", spec)?;
    }
    Ok(config)
}

/// The coalition the report covers, as passenger structs from the scenario.
fn report_coalition(scenario: &Scenario, report: &carpool_core::Report) -> Vec<Passenger> {
    report
        .coalition
        .members
        .iter()
        .filter_map(|id| scenario.passenger(id).cloned())
        .collect()
}

fn cmd_run(scenario: &ScenarioArg, out: Option<&PathBuf>, args: &RunArgs) -> Result<(), Error> {
    let scenario = load_scenario(&scenario.scenario)?;
    let options = args.to_options();
    let report = run(&scenario, &options)?;
    let table = report.to_table();

    match out {
        Some(path) => {
            fs::write(path, &table).map_err(|source| Error::Io {
                context: format!("cannot write `{}`", path.display()),
                source,
            })?;
            // Human-readable summary next to the machine-readable file.
            let members = report_coalition(&scenario, &report);
            println!("scenario: {}", report.scenario);
            println!(
                "coalition: {} | sequence: {}",
                report
                    .coalition
                    .members
                    .iter()
                    .map(|id| id.as_str())
                    .collect::<Vec<_>>()
                    .join(","),
                report
                    .coalition
                    .sequence
                    .iter()
                    .map(|id| id.as_str())
                    .collect::<Vec<_>>()
                    .join("->")
            );
            println!(
                "driver revenue: {} (baseline {}, loss {:.3}%)",
                report.driver.revenue, report.driver.baseline_revenue, report.driver.revenue_loss_pct
            );
            println!(
                "objective ({}): {}",
                match options.split {
                    SplitRule::ShapleyProportional => "shapley split",
                    SplitRule::Equal => "equal split",
                    SplitRule::Baseline => "baseline",
                },
                report.coalition.objective
            );
            if options.split != SplitRule::Equal {
                if let Ok(equal) = equal_allocate(&members, &scenario.params) {
                    println!("objective (equal split): {}", equal.objective);
                }
            }
            println!(
                "audits: {} | individual rationality: {}",
                report.coalition.audits_passed,
                if report.rationality.all_satisfied() { "ok" } else { "VIOLATED" }
            );
            println!("results written to {}", path.display());
        }
        None => print!("{table}"),
    }
    Ok(())
}

fn cmd_sweep(scenario: &ScenarioArg, out: &PathBuf, grid: &[String], args: &RunArgs) -> Result<(), Error> {
    let scenario = load_scenario(&scenario.scenario)?;
    let grid = SweepGrid::parse(grid)?;
    let options = args.to_options();
    let mut buffer = Vec::new();
    let summary = sweep(&scenario, &grid, &options, &mut buffer)?;
    fs::write(out, &buffer).map_err(|source| Error::Io {
        context: format!("cannot write `{}`", out.display()),
        source,
    })?;
    println!(
        "swept {} points ({} failed) -> {}",
        summary.points,
        summary.failures,
        out.display()
    );
    Ok(())
}

fn cmd_generate(
    seed: u64,
    passengers: usize,
    out: Option<&PathBuf>,
    label: Option<&String>,
    tariff: &TariffArgs,
    ranges: &RangeArgs,
) -> Result<(), Error> {
    let config = generator_config(tariff, ranges)?;
    let mut scenario = generate_scenario(seed, passengers, &config)?;
    if let Some(label) = label {
        scenario.label = label.clone();
        scenario.validate()?;
    }
    match out {
        Some(path) => {
            save_scenario(&scenario, path)?;
            println!("wrote {}", path.display());
        }
        None => print!("{}", to_canonical_string(&scenario)?),
    }
    Ok(())
}

fn cmd_validate(scenario: &ScenarioArg) -> Result<(), Error> {
    let loaded = load_scenario(&scenario.scenario)?;
    println!("ok: {} ({} passengers)", loaded.label, loaded.passengers.len());
    Ok(())
}

fn cmd_sequence(scenario: &ScenarioArg) -> Result<(), Error> {
    let scenario = load_scenario(&scenario.scenario)?;
    let mut members = scenario.passengers.clone();
    members.sort_by(|a, b| a.id.cmp(&b.id));
    let sequence = carpool_core::optimal_sequence_smith(&members)?;
    let breakdown = carpool_core::total_impatience(&members, &sequence)?;

    println!("scenario: {}", scenario.label);
    println!(
        "sequence: {}",
        sequence
            .order()
            .iter()
            .map(|id| id.as_str())
            .collect::<Vec<_>>()
            .join(" -> ")
    );
    println!("{:>4}  {:<12}  impatience", "#", "passenger");
    for (position, id) in sequence.order().iter().enumerate() {
        println!("{:>4}  {:<12}  {}", position + 1, id.as_str(), breakdown.per_passenger[id]);
    }
    println!("total impatience: {}", breakdown.total);
    Ok(())
}

fn cmd_shapley(scenario: &ScenarioArg, method: ShapleyArg, samples: u64, seed: u64) -> Result<(), Error> {
    let scenario = load_scenario(&scenario.scenario)?;
    let game = ImpatienceGame::new(scenario.passengers.clone())?;
    let result = match method {
        ShapleyArg::Exact => shapley_exact(&game)?,
        ShapleyArg::Mc => shapley_montecarlo(&game, samples, seed)?,
    };

    println!("scenario: {}", scenario.label);
    match result.method {
        ShapleyMethod::Exact => println!("method: exact"),
        ShapleyMethod::MonteCarlo { samples, seed } => {
            println!("method: monte-carlo (samples {samples}, seed {seed})")
        }
    }
    let total = result.total();
    println!("{:<12}  {:<22}  {:<10}  std_error", "passenger", "phi", "share_pct");
    for (id, phi) in &result.phi {
        let se = result.std_error.get(id).copied().unwrap_or(0.0);
        println!(
            "{:<12}  {:<22}  {:<10.4}  {}",
            id.as_str(),
            phi,
            phi / total * 100.0,
            se
        );
    }
    println!("total: {total}");

    let axioms = verify_axioms(&game, &result);
    let describe = |check: Option<carpool_core::coalition::AxiomCheck>| match check {
        Some(c) if c.passed => "pass",
        Some(_) => "FAIL",
        None => "not evaluated",
    };
    println!(
        "axioms: efficiency {}, symmetry {}, dummy {}",
        if axioms.efficiency.passed { "pass" } else { "FAIL" },
        describe(axioms.symmetry),
        describe(axioms.dummy),
    );
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Run { scenario, out, options } => cmd_run(scenario, out.as_ref(), options),
        Command::Sweep { scenario, out, grid, options } => cmd_sweep(scenario, out, grid, options),
        Command::Generate {
            seed,
            passengers,
            out,
            label,
            tariff,
            ranges,
        } => cmd_generate(*seed, *passengers, out.as_ref(), label.as_ref(), tariff, ranges),
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::Sequence { scenario } => cmd_sequence(scenario),
        Command::Shapley {
            scenario,
            method,
            samples,
            seed,
        } => cmd_shapley(scenario, *method, *samples, *seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {}: {}", error.code(), error);
            ExitCode::FAILURE
        }
    }
}
