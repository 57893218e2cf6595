//! Experiment execution: single runs and parameter sweeps.
//!
//! `run` drives the full pipeline on one scenario — sequence optimization,
//! Shapley values, allocation, the constraint audit, the individual
//! rationality check, and the baseline comparison — and returns the
//! assembled [`Report`]. `sweep` repeats `run` over the cartesian product of
//! a parameter grid, streaming rows in grid order and recording failed
//! points as error rows instead of aborting.

use std::io::Write;

use crate::allocation::{
    allocate, audit_constraints, individual_rationality_check, select_coalition_with_rule,
    total_collected, SplitRule,
};
use crate::coalition::{shapley_exact, shapley_montecarlo, ImpatienceGame, ShapleyMethod};
use crate::error::{Error, Result};
use crate::impatience::total_impatience;
use crate::model::{base_fare, driver_surplus, surge_fare, Money, Passenger};
use crate::report::{self, CoalitionRow, DriverRow, PassengerRow, Report};
use crate::scenario::{generate_scenario, GeneratorConfig, Scenario};

/// Which coalition a run allocates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoalitionMode {
    /// Every passenger in the scenario.
    Grand,
    /// The objective-maximizing subset.
    Select,
}

/// Knobs of a single run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub split: SplitRule,
    pub shapley: ShapleyMethod,
    pub coalition: CoalitionMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            split: SplitRule::ShapleyProportional,
            shapley: ShapleyMethod::Exact,
            coalition: CoalitionMode::Grand,
        }
    }
}

/// Executes the pipeline on one scenario.
pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<Report> {
    scenario.validate()?;
    let params = &scenario.params;

    let mut all: Vec<Passenger> = scenario.passengers.clone();
    all.sort_by(|a, b| a.id.cmp(&b.id));

    let coalition: Vec<Passenger> = match options.coalition {
        CoalitionMode::Grand => all,
        CoalitionMode::Select => select_coalition_with_rule(&all, params, options.split)?.coalition,
    };

    let game = ImpatienceGame::new(coalition.clone())?;
    let shapley = match options.shapley {
        ShapleyMethod::Exact => shapley_exact(&game)?,
        ShapleyMethod::MonteCarlo { samples, seed } => shapley_montecarlo(&game, samples, seed)?,
    };

    let allocation = allocate(&coalition, params, options.split, Some(&shapley))?;
    let audit = audit_constraints(&coalition, &allocation, params)?;
    let rationality = individual_rationality_check(&coalition, &allocation, params)?;
    let breakdown = total_impatience(&coalition, &allocation.sequence)?;

    let passengers = coalition
        .iter()
        .map(|p| {
            let surge = surge_fare(&p.travel, params);
            let compensation = allocation.compensations[&p.id];
            PassengerRow {
                id: p.id.clone(),
                fare: base_fare(&p.travel, params),
                surge,
                phi: shapley.phi[&p.id],
                compensation,
                net_payment: surge - compensation,
                impatience: breakdown.per_passenger[&p.id],
                payment_reduction_pct: compensation / surge * 100.0,
            }
        })
        .collect();

    let fares: Vec<Money> = coalition.iter().map(|p| base_fare(&p.travel, params)).collect();
    let baseline_revenue = total_collected(&coalition, params);
    let driver = DriverRow {
        revenue: allocation.x_d,
        baseline_revenue,
        revenue_loss_pct: (baseline_revenue - allocation.x_d) / baseline_revenue * 100.0,
        surplus: driver_surplus(allocation.x_d, &fares, params),
    };

    let coalition_row = CoalitionRow {
        members: coalition.iter().map(|p| p.id.clone()).collect(),
        sequence: allocation.sequence.order().to_vec(),
        total_impatience: breakdown.total,
        objective: allocation.objective,
        audits_passed: audit.summary(),
    };

    Ok(Report {
        scenario: scenario.label.clone(),
        passengers,
        driver,
        coalition: coalition_row,
        audit,
        rationality,
    })
}

/// One sweep axis: a swept quantity and its values, in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub enum GridAxis {
    Rho(Vec<f64>),
    Epsilon(Vec<f64>),
    Alpha(Vec<f64>),
    Beta(Vec<f64>),
    Passengers(Vec<usize>),
    Seed(Vec<u64>),
}

impl GridAxis {
    fn name(&self) -> &'static str {
        match self {
            GridAxis::Rho(_) => "rho",
            GridAxis::Epsilon(_) => "epsilon",
            GridAxis::Alpha(_) => "alpha",
            GridAxis::Beta(_) => "beta",
            GridAxis::Passengers(_) => "n_passengers",
            GridAxis::Seed(_) => "seed",
        }
    }

    fn len(&self) -> usize {
        match self {
            GridAxis::Rho(v) | GridAxis::Epsilon(v) | GridAxis::Alpha(v) | GridAxis::Beta(v) => v.len(),
            GridAxis::Passengers(v) => v.len(),
            GridAxis::Seed(v) => v.len(),
        }
    }

    fn apply(&self, index: usize, point: &mut GridPoint) {
        match self {
            GridAxis::Rho(v) => point.rho = Some(v[index]),
            GridAxis::Epsilon(v) => point.epsilon = Some(v[index]),
            GridAxis::Alpha(v) => point.alpha = Some(v[index]),
            GridAxis::Beta(v) => point.beta = Some(v[index]),
            GridAxis::Passengers(v) => point.n_passengers = Some(v[index]),
            GridAxis::Seed(v) => point.seed = Some(v[index]),
        }
    }

    fn format_value(&self, index: usize) -> String {
        match self {
            GridAxis::Rho(v) | GridAxis::Epsilon(v) | GridAxis::Alpha(v) | GridAxis::Beta(v) => {
                format!("{}", v[index])
            }
            GridAxis::Passengers(v) => format!("{}", v[index]),
            GridAxis::Seed(v) => format!("{}", v[index]),
        }
    }
}

/// A sweep grid: the cartesian product of its axes, last axis fastest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    axes: Vec<GridAxis>,
}

impl SweepGrid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        let mut names = Vec::new();
        for axis in &axes {
            if axis.len() == 0 {
                return Err(Error::Grid(format!("axis `{}` has no values", axis.name())));
            }
            if names.contains(&axis.name()) {
                return Err(Error::Grid(format!("axis `{}` given twice", axis.name())));
            }
            names.push(axis.name());
        }
        Ok(SweepGrid { axes })
    }

    /// Parses axis specs of the form `name=v1,v2,...` where name is one of
    /// `rho`, `epsilon`, `alpha`, `beta`, `n_passengers`, `seed`.
    pub fn parse(specs: &[String]) -> Result<Self> {
        let mut axes = Vec::with_capacity(specs.len());
        for spec in specs {
            let (name, values) = spec
                .split_once('=')
                .ok_or_else(|| Error::Grid(format!("`{spec}` is not of the form name=v1,v2,...")))?;
            let raw: Vec<&str> = values.split(',').map(str::trim).collect();
            let parse_f64 = |raw: &[&str]| -> Result<Vec<f64>> {
                raw.iter()
                    .map(|v| v.parse::<f64>().map_err(|_| Error::Grid(format!("`{v}` is not a number"))))
                    .collect()
            };
            let axis = match name.trim() {
                "rho" => GridAxis::Rho(parse_f64(&raw)?),
                "epsilon" => GridAxis::Epsilon(parse_f64(&raw)?),
                "alpha" => GridAxis::Alpha(parse_f64(&raw)?),
                "beta" => GridAxis::Beta(parse_f64(&raw)?),
                "n_passengers" => GridAxis::Passengers(
                    raw.iter()
                        .map(|v| v.parse::<usize>().map_err(|_| Error::Grid(format!("`{v}` is not a count"))))
                        .collect::<Result<_>>()?,
                ),
                "seed" => GridAxis::Seed(
                    raw.iter()
                        .map(|v| v.parse::<u64>().map_err(|_| Error::Grid(format!("`{v}` is not a seed"))))
                        .collect::<Result<_>>()?,
                ),
                other => return Err(Error::Grid(format!("unknown axis `{other}`"))),
            };
            axes.push(axis);
        }
        SweepGrid::new(axes)
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    /// Every grid point, in deterministic sweep order.
    pub fn points(&self) -> Vec<GridPoint> {
        if self.axes.is_empty() {
            return vec![GridPoint::default()];
        }
        let mut points = Vec::new();
        let mut indices = vec![0usize; self.axes.len()];
        loop {
            let mut point = GridPoint::default();
            let mut parts = Vec::with_capacity(self.axes.len());
            for (axis, &index) in self.axes.iter().zip(&indices) {
                axis.apply(index, &mut point);
                parts.push(format!("{}={}", axis.name(), axis.format_value(index)));
            }
            point.suffix = format!("[{}]", parts.join(";"));
            points.push(point);

            // Odometer increment, last axis fastest.
            let mut position = self.axes.len();
            loop {
                if position == 0 {
                    return points;
                }
                position -= 1;
                indices[position] += 1;
                if indices[position] < self.axes[position].len() {
                    break;
                }
                indices[position] = 0;
            }
        }
    }
}

/// One point of a sweep: the overrides it applies to the base scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridPoint {
    pub rho: Option<f64>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n_passengers: Option<usize>,
    pub seed: Option<u64>,
    suffix: String,
}

impl GridPoint {
    /// Label suffix recording the overrides, e.g. `[epsilon=1.2;seed=3]`.
    pub fn label_suffix(&self) -> &str {
        &self.suffix
    }
}

/// Builds the scenario a grid point describes. Overriding `n_passengers` or
/// `seed` regenerates the passenger list with the default draw ranges under
/// the (possibly overridden) tariff; otherwise the base passengers are kept.
fn apply_point(base: &Scenario, point: &GridPoint, label: &str) -> Result<Scenario> {
    let mut params = base.params;
    if let Some(v) = point.rho {
        params.rho = v;
    }
    if let Some(v) = point.epsilon {
        params.epsilon = v;
    }
    if let Some(v) = point.alpha {
        params.alpha = v;
    }
    if let Some(v) = point.beta {
        params.beta = v;
    }

    let mut scenario = if point.n_passengers.is_some() || point.seed.is_some() {
        let n = point.n_passengers.unwrap_or(base.passengers.len());
        let seed = point.seed.or(base.seed).unwrap_or(0);
        let config = GeneratorConfig {
            params,
            ..GeneratorConfig::default()
        };
        generate_scenario(seed, n, &config)?
    } else {
        Scenario {
            label: String::new(),
            params,
            passengers: base.passengers.clone(),
            driver: base.driver.clone(),
            seed: base.seed,
        }
    };
    scenario.label = label.to_owned();
    scenario.validate()?;
    Ok(scenario)
}

/// Outcome counts of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSummary {
    pub points: usize,
    pub failures: usize,
}

fn write_error(source: std::io::Error) -> Error {
    Error::Io {
        context: "cannot write sweep output".into(),
        source,
    }
}

/// Runs every grid point against the base scenario, streaming table rows to
/// `out` in grid order. A failing point contributes one error row; the sweep
/// itself fails only on unwritable output or an invalid base scenario.
pub fn sweep<W: Write>(
    base: &Scenario,
    grid: &SweepGrid,
    options: &RunOptions,
    out: &mut W,
) -> Result<SweepSummary> {
    base.validate()?;
    let points = grid.points();
    let mut failures = 0usize;

    writeln!(out, "{}", report::table_header()).map_err(write_error)?;
    for point in &points {
        let label = format!("{}{}", base.label, point.label_suffix());
        match apply_point(base, point, &label).and_then(|scenario| run(&scenario, options)) {
            Ok(report) => {
                for row in report.rows() {
                    writeln!(out, "{row}").map_err(write_error)?;
                }
            }
            Err(error) => {
                failures += 1;
                writeln!(out, "{}", report::failure_row(&label, error.code())).map_err(write_error)?;
            }
        }
    }

    Ok(SweepSummary {
        points: points.len(),
        failures,
    })
}

/// Convenience: `run` rendered straight to its table form.
pub fn run_to_table(scenario: &Scenario, options: &RunOptions) -> Result<String> {
    Ok(run(scenario, options)?.to_table())
}
