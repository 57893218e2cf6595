//! Result tables: one comma-separated row per entity, fixed column order.
//!
//! Every run emits three row kinds under one header: a `passenger` row per
//! coalition member, one `driver` row, and one `coalition` row. Cells that do
//! not apply to a row kind are left empty; list cells (`members`, `sequence`)
//! join ids with `|`. Numbers use Rust's shortest round-trip float formatting
//! with a `.` decimal separator, so identical inputs always render to
//! identical bytes.

use crate::allocation::{ConstraintAudit, RationalityReport};
use crate::model::{Money, PassengerId};

/// The documented column order of the results table.
pub const COLUMNS: [&str; 19] = [
    "scenario",
    "row",
    "passenger_id",
    "F",
    "G",
    "phi",
    "x_i",
    "net_payment",
    "impatience",
    "payment_reduction_pct",
    "x_d",
    "baseline_revenue",
    "revenue_loss_pct",
    "driver_surplus",
    "members",
    "sequence",
    "total_impatience",
    "objective",
    "audits_passed",
];

/// The header line of every results file.
pub fn table_header() -> String {
    COLUMNS.join(",")
}

/// Per-passenger outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PassengerRow {
    pub id: PassengerId,
    /// Base fare `F(T_i)`.
    pub fare: Money,
    /// Surge fare `G(T_i)`, the baseline payment.
    pub surge: Money,
    /// Shapley value of the impatience game.
    pub phi: Money,
    /// Compensation `x_i`.
    pub compensation: Money,
    /// `G(T_i) - x_i`.
    pub net_payment: Money,
    /// `I_i(σ*)`.
    pub impatience: Money,
    /// `x_i / G(T_i) * 100` against the zero-compensation baseline.
    pub payment_reduction_pct: f64,
}

/// Driver outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverRow {
    pub revenue: Money,
    pub baseline_revenue: Money,
    pub revenue_loss_pct: f64,
    pub surplus: Money,
}

/// Coalition-level outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionRow {
    pub members: Vec<PassengerId>,
    pub sequence: Vec<PassengerId>,
    pub total_impatience: Money,
    pub objective: f64,
    /// Audit summary in `passed/evaluated` form, e.g. `6/6`.
    pub audits_passed: String,
}

/// Full outcome of one run: table rows plus the embedded audits.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub passengers: Vec<PassengerRow>,
    pub driver: DriverRow,
    pub coalition: CoalitionRow,
    pub audit: ConstraintAudit,
    pub rationality: RationalityReport,
}

fn fmt(value: f64) -> String {
    format!("{value}")
}

fn join_ids(ids: &[PassengerId]) -> String {
    ids.iter().map(|id| id.as_str()).collect::<Vec<_>>().join("|")
}

impl Report {
    /// The data rows of this report, in table column order.
    pub fn rows(&self) -> Vec<String> {
        let mut rows = Vec::with_capacity(self.passengers.len() + 2);
        for p in &self.passengers {
            rows.push(
                [
                    self.scenario.as_str(),
                    "passenger",
                    p.id.as_str(),
                    &fmt(p.fare),
                    &fmt(p.surge),
                    &fmt(p.phi),
                    &fmt(p.compensation),
                    &fmt(p.net_payment),
                    &fmt(p.impatience),
                    &fmt(p.payment_reduction_pct),
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                ]
                .join(","),
            );
        }
        rows.push(
            [
                self.scenario.as_str(),
                "driver",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                &fmt(self.driver.revenue),
                &fmt(self.driver.baseline_revenue),
                &fmt(self.driver.revenue_loss_pct),
                &fmt(self.driver.surplus),
                "",
                "",
                "",
                "",
                "",
            ]
            .join(","),
        );
        rows.push(
            [
                self.scenario.as_str(),
                "coalition",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                &join_ids(&self.coalition.members),
                &join_ids(&self.coalition.sequence),
                &fmt(self.coalition.total_impatience),
                &fmt(self.coalition.objective),
                self.coalition.audits_passed.as_str(),
            ]
            .join(","),
        );
        rows
    }

    /// Header plus rows, newline-terminated.
    pub fn to_table(&self) -> String {
        let mut table = table_header();
        for row in self.rows() {
            table.push('\n');
            table.push_str(&row);
        }
        table.push('\n');
        table
    }
}

/// The row a sweep records for a grid point whose run failed.
pub fn failure_row(scenario_label: &str, error_code: &str) -> String {
    let mut cells = vec![""; COLUMNS.len()];
    cells[0] = scenario_label;
    cells[1] = "coalition";
    let marker = format!("error({error_code})");
    cells[COLUMNS.len() - 1] = &marker;
    cells.join(",")
}
