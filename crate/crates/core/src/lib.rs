//! Coalition-game engine for single-taxicab carpooling fare design.
//!
//! A driver serves a coalition of passengers; each passenger pays a surge
//! fare but suffers impatience from riding behind the others. The engine
//! computes the impatience-minimizing service order, values every coalition
//! subset by its minimal total impatience, splits the compensation pool
//! `(ρ−ε)·ΣF` by Shapley values of that game, and audits the resulting
//! allocation against the budget, revenue, coefficient, positivity, and
//! sequence-optimality constraints. A harness layer loads, generates, runs,
//! and sweeps scenarios deterministically from explicit seeds.
//!
//! Module map:
//!
//! * [`model`] — tariff parameters, travels, participants, fare formulas.
//! * [`impatience`] — service sequences, impatience, optimal orderings.
//! * [`coalition`] — the characteristic-function game and Shapley values.
//! * [`allocation`] — allocators, the max-min objective, constraint audits.
//! * [`scenario`] / [`engine`] / [`report`] — files, runs, sweeps, tables.
//! * [`rng`] — the documented seeded generator behind all randomness.

pub mod allocation;
pub mod coalition;
pub mod engine;
mod error;
pub mod impatience;
pub mod model;
pub mod report;
pub mod rng;
pub mod scenario;

pub use allocation::{
    allocate, audit_constraints, baseline_allocate, compensation_pool, driver_revenue,
    equal_allocate, evaluate_objective, individual_rationality_check, pca_allocate,
    select_coalition, total_collected, Allocation, CheckStatus, ConstraintAudit, ConstraintCheck,
    RationalityReport, Selection, SplitRule,
};
pub use coalition::{
    shapley_exact, shapley_montecarlo, verify_axioms, AxiomReport, Game, ImpatienceGame,
    ShapleyMethod, ShapleyResult,
};
pub use engine::{run, run_to_table, sweep, CoalitionMode, GridAxis, RunOptions, SweepGrid, SweepSummary};
pub use error::{Error, Result};
pub use impatience::{
    impatience_of, optimal_sequence_exhaustive, optimal_sequence_smith, predecessors,
    total_impatience, ImpatienceBreakdown, ServiceSequence,
};
pub use model::{
    base_fare, driver_surplus, passenger_surplus, surge_fare, Driver, Money, Passenger,
    PassengerId, PricingParams, Travel,
};
pub use report::Report;
pub use rng::SeededRng;
pub use scenario::{
    generate_scenario, load_scenario, parse_scenario, save_scenario, to_canonical_string,
    GeneratorConfig, Scenario, ValueRange,
};
