//! Compensation allocations, the max-min objective, and constraint audits.
//!
//! The driver collects `x_d = ε·ΣF` and the remaining `(ρ−ε)·ΣF` of the
//! surge collection funds the passenger compensation pool. The pool is split
//! in proportion to Shapley values of the impatience game (or equally, or
//! not at all for the zero-compensation baseline), and every allocation can
//! be audited against the six constraints of the allocation program:
//! budget balance (C1), positive driver revenue (C2), the least-expected
//! revenue floor (C3), the coefficient chain (C4), strictly positive
//! compensations (C5), and sequence optimality (C6).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::coalition::{shapley_exact, shapley_montecarlo, ImpatienceGame, ShapleyResult};
use crate::error::{Error, Result};
use crate::impatience::{
    optimal_sequence_exhaustive, optimal_sequence_smith, total_impatience, ServiceSequence,
    EXHAUSTIVE_SEQUENCE_LIMIT, TIE_EPS,
};
use crate::model::{base_fare, index_coalition, Money, Passenger, PassengerId, PricingParams};

/// Absolute tolerance used by the constraint audits.
pub const AUDIT_EPS: f64 = 1e-9;

/// Largest passenger set for exhaustive coalition selection (2^12 subsets).
pub const SELECT_EXHAUSTIVE_LIMIT: usize = 12;

/// Samples used when coalition selection falls back to Monte Carlo Shapley.
pub const FALLBACK_MC_SAMPLES: u64 = 10_000;

/// How the compensation pool is divided among coalition members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRule {
    /// Proportional to Shapley values of the impatience game.
    ShapleyProportional,
    /// Equal shares of the pool.
    Equal,
    /// Zero compensation: the driver keeps the whole surge collection.
    Baseline,
}

/// A complete allocation: driver revenue, per-passenger compensations, the
/// service sequence used, and the max-min objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub x_d: Money,
    pub compensations: BTreeMap<PassengerId, Money>,
    pub sequence: ServiceSequence,
    pub coalition: BTreeSet<PassengerId>,
    /// `min_i x_i / I(S, σ*)`.
    pub objective: f64,
    /// Set by the zero-compensation baseline; audits then skip C5.
    pub baseline: bool,
}

/// Driver revenue `x_d = ε · Σ F(T_i)` over the coalition.
pub fn driver_revenue(coalition: &[Passenger], params: &PricingParams) -> Money {
    params.epsilon * coalition.iter().map(|p| base_fare(&p.travel, params)).sum::<Money>()
}

/// Total surge collection `Σ G(T_i) = ρ · Σ F(T_i)` over the coalition.
pub fn total_collected(coalition: &[Passenger], params: &PricingParams) -> Money {
    params.rho * coalition.iter().map(|p| base_fare(&p.travel, params)).sum::<Money>()
}

/// The compensation pool `Σ G(T_i) − x_d = (ρ−ε) · Σ F(T_i)`.
pub fn compensation_pool(coalition: &[Passenger], params: &PricingParams) -> Money {
    total_collected(coalition, params) - driver_revenue(coalition, params)
}

fn validated_members(coalition: &[Passenger], params: &PricingParams) -> Result<BTreeSet<PassengerId>> {
    params.validate()?;
    let members = index_coalition(coalition)?;
    if members.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    Ok(members.keys().map(|id| (*id).clone()).collect())
}

fn positive_pool(coalition: &[Passenger], params: &PricingParams) -> Result<Money> {
    let pool = compensation_pool(coalition, params);
    if pool <= 0.0 {
        return Err(Error::EmptyPool {
            rho: params.rho,
            epsilon: params.epsilon,
        });
    }
    Ok(pool)
}

fn finish(
    coalition: &[Passenger],
    x_d: Money,
    compensations: BTreeMap<PassengerId, Money>,
    coalition_ids: BTreeSet<PassengerId>,
    baseline: bool,
) -> Result<Allocation> {
    let mut allocation = Allocation {
        x_d,
        compensations,
        sequence: optimal_sequence_smith(coalition)?,
        coalition: coalition_ids,
        objective: 0.0,
        baseline,
    };
    allocation.objective = evaluate_objective(coalition, &allocation)?;
    Ok(allocation)
}

/// The compensation allocation: minimize impatience via the optimal sequence,
/// then split the pool `(ρ−ε)·ΣF` in proportion to Shapley values.
///
/// Constraints C1 through C5 hold by construction; `audit_constraints`
/// re-derives them for regression cover.
pub fn pca_allocate(
    coalition: &[Passenger],
    params: &PricingParams,
    shapley: &ShapleyResult,
) -> Result<Allocation> {
    let ids = validated_members(coalition, params)?;
    let shapley_ids: BTreeSet<PassengerId> = shapley.phi.keys().cloned().collect();
    if shapley_ids != ids {
        return Err(Error::PlayerMismatch(format!(
            "coalition has {} members, Shapley result covers {}",
            ids.len(),
            shapley_ids.len()
        )));
    }
    for (id, &phi) in &shapley.phi {
        if phi.is_nan() || phi <= 0.0 {
            return Err(Error::NonPositiveShare(id.clone()));
        }
    }

    let pool = positive_pool(coalition, params)?;
    let phi_total: f64 = shapley.phi.values().sum();
    let compensations: BTreeMap<PassengerId, Money> = shapley
        .phi
        .iter()
        .map(|(id, &phi)| (id.clone(), pool * phi / phi_total))
        .collect();

    finish(coalition, driver_revenue(coalition, params), compensations, ids, false)
}

/// Equal-share alternative to the Shapley-proportional rule; for a fixed
/// pool this maximizes the smallest compensation.
pub fn equal_allocate(coalition: &[Passenger], params: &PricingParams) -> Result<Allocation> {
    let ids = validated_members(coalition, params)?;
    let pool = positive_pool(coalition, params)?;
    let share = pool / ids.len() as f64;
    let compensations = ids.iter().map(|id| (id.clone(), share)).collect();
    finish(coalition, driver_revenue(coalition, params), compensations, ids, false)
}

/// Zero-compensation baseline: the driver keeps the full surge collection
/// `ρ·ΣF` and every `x_i` is zero. Audits skip C5 for baseline allocations.
pub fn baseline_allocate(coalition: &[Passenger], params: &PricingParams) -> Result<Allocation> {
    let ids = validated_members(coalition, params)?;
    let compensations = ids.iter().map(|id| (id.clone(), 0.0)).collect();
    finish(coalition, total_collected(coalition, params), compensations, ids, true)
}

/// Dispatches to the allocator for `rule`; `shapley` is required only by the
/// Shapley-proportional rule.
pub fn allocate(
    coalition: &[Passenger],
    params: &PricingParams,
    rule: SplitRule,
    shapley: Option<&ShapleyResult>,
) -> Result<Allocation> {
    match rule {
        SplitRule::ShapleyProportional => {
            let shapley = shapley.ok_or_else(|| {
                Error::invariant("shapley", "required for the shapley-proportional split")
            })?;
            pca_allocate(coalition, params, shapley)
        }
        SplitRule::Equal => equal_allocate(coalition, params),
        SplitRule::Baseline => baseline_allocate(coalition, params),
    }
}

/// `min_i x_i / I(S, σ*)` for the allocation's coalition and sequence.
pub fn evaluate_objective(coalition: &[Passenger], allocation: &Allocation) -> Result<f64> {
    let breakdown = total_impatience(coalition, &allocation.sequence)?;
    let min_compensation = allocation
        .compensations
        .values()
        .fold(f64::INFINITY, |acc, &x| acc.min(x));
    Ok(min_compensation / breakdown.total)
}

/// Result of exhaustive coalition selection.
#[derive(Debug, Clone)]
pub struct Selection {
    pub coalition: Vec<Passenger>,
    pub allocation: Allocation,
    /// False when the passenger set exceeded [`SELECT_EXHAUSTIVE_LIMIT`] and
    /// the search fell back to the grand coalition.
    pub exhaustive: bool,
}

/// Maximizes the objective over every nonempty subset of the passengers under
/// the Shapley-proportional rule.
pub fn select_coalition(all_passengers: &[Passenger], params: &PricingParams) -> Result<Selection> {
    select_coalition_with_rule(all_passengers, params, SplitRule::ShapleyProportional)
}

/// Subset search under an arbitrary split rule. Ties within 1e-9 prefer the
/// larger coalition, then the lexicographically smaller member list.
pub fn select_coalition_with_rule(
    all_passengers: &[Passenger],
    params: &PricingParams,
    rule: SplitRule,
) -> Result<Selection> {
    params.validate()?;
    let members = index_coalition(all_passengers)?;
    if members.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    let sorted: Vec<Passenger> = members.values().map(|p| (*p).clone()).collect();
    let n = sorted.len();

    if n > SELECT_EXHAUSTIVE_LIMIT {
        // Fall back to the grand coalition; exact Shapley is out of reach, so
        // the proportional rule uses the seeded Monte Carlo estimator.
        let shapley = match rule {
            SplitRule::ShapleyProportional => Some(shapley_montecarlo(
                &ImpatienceGame::new(sorted.clone())?,
                FALLBACK_MC_SAMPLES,
                0,
            )?),
            _ => None,
        };
        let allocation = allocate(&sorted, params, rule, shapley.as_ref())?;
        return Ok(Selection {
            coalition: sorted,
            allocation,
            exhaustive: false,
        });
    }

    let game = ImpatienceGame::new(sorted.clone())?;
    let mut best: Option<(Vec<Passenger>, Allocation)> = None;
    for mask in 1u64..1 << n {
        let subset: Vec<Passenger> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| sorted[i].clone())
            .collect();
        let shapley = match rule {
            SplitRule::ShapleyProportional => {
                let subset_ids: BTreeSet<PassengerId> = subset.iter().map(|p| p.id.clone()).collect();
                Some(shapley_exact(&game.subgame(&subset_ids)?)?)
            }
            _ => None,
        };
        let allocation = allocate(&subset, params, rule, shapley.as_ref())?;
        let replace = match &best {
            None => true,
            Some((incumbent_members, incumbent)) => {
                prefers(&allocation, &subset, incumbent, incumbent_members)
            }
        };
        if replace {
            best = Some((subset, allocation));
        }
    }

    let (coalition, allocation) = best.expect("at least one nonempty subset");
    Ok(Selection {
        coalition,
        allocation,
        exhaustive: true,
    })
}

fn prefers(
    candidate: &Allocation,
    candidate_members: &[Passenger],
    incumbent: &Allocation,
    incumbent_members: &[Passenger],
) -> bool {
    if candidate.objective > incumbent.objective + TIE_EPS {
        return true;
    }
    if candidate.objective < incumbent.objective - TIE_EPS {
        return false;
    }
    match candidate_members.len().cmp(&incumbent_members.len()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let candidate_ids: Vec<&PassengerId> = candidate_members.iter().map(|p| &p.id).collect();
            let incumbent_ids: Vec<&PassengerId> = incumbent_members.iter().map(|p| &p.id).collect();
            candidate_ids < incumbent_ids
        }
    }
}

/// Pass/fail/skip state of one constraint check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One audited constraint with its slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCheck {
    pub status: CheckStatus,
    pub slack: f64,
}

impl ConstraintCheck {
    fn from(passed: bool, slack: f64) -> Self {
        ConstraintCheck {
            status: if passed { CheckStatus::Pass } else { CheckStatus::Fail },
            slack,
        }
    }
}

/// Audit of the six allocation constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintAudit {
    /// Budget balance: `x_d + Σ x_i − Σ G(T_i)` (signed residual).
    pub c1: ConstraintCheck,
    /// Positive driver revenue; slack is `x_d`.
    pub c2: ConstraintCheck,
    /// Least expected revenue: slack is `x_d − β·ΣF`.
    pub c3: ConstraintCheck,
    /// Coefficient chain: slack is `min(α−ρ, ρ−β, β)`.
    pub c4: ConstraintCheck,
    /// Positive compensations; slack is `min_i x_i`. Skipped for baselines.
    pub c5: ConstraintCheck,
    /// Sequence optimality: slack is `I(S,σ) − I(S,σ*)` (or the best
    /// adjacent-swap improvement above the exhaustive bound).
    pub c6: ConstraintCheck,
}

impl ConstraintAudit {
    pub fn checks(&self) -> [(&'static str, ConstraintCheck); 6] {
        [
            ("C1", self.c1),
            ("C2", self.c2),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C5", self.c5),
            ("C6", self.c6),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.status != CheckStatus::Fail)
    }

    /// Compact `passed/evaluated` form used in result tables, e.g. `6/6`.
    pub fn summary(&self) -> String {
        let evaluated = self.checks().iter().filter(|(_, c)| c.status != CheckStatus::Skipped).count();
        let passed = self.checks().iter().filter(|(_, c)| c.status == CheckStatus::Pass).count();
        format!("{passed}/{evaluated}")
    }
}

/// Evaluates C1 through C6 for an allocation over its coalition.
pub fn audit_constraints(
    coalition: &[Passenger],
    allocation: &Allocation,
    params: &PricingParams,
) -> Result<ConstraintAudit> {
    let members = index_coalition(coalition)?;
    let ids: BTreeSet<PassengerId> = members.keys().map(|id| (*id).clone()).collect();
    if ids != allocation.coalition {
        return Err(Error::PlayerMismatch(
            "allocation coalition differs from the audited coalition".into(),
        ));
    }
    let compensated: BTreeSet<PassengerId> = allocation.compensations.keys().cloned().collect();
    if compensated != ids {
        return Err(Error::PlayerMismatch(
            "compensation entries differ from the audited coalition".into(),
        ));
    }

    let sum_fares: Money = coalition.iter().map(|p| base_fare(&p.travel, params)).sum();
    let collected = total_collected(coalition, params);
    let paid: Money = allocation.compensations.values().sum();

    let c1_residual = allocation.x_d + paid - collected;
    let c1 = ConstraintCheck::from(c1_residual.abs() <= AUDIT_EPS, c1_residual);

    let c2 = ConstraintCheck::from(allocation.x_d > 0.0, allocation.x_d);

    let c3_slack = allocation.x_d - params.beta * sum_fares;
    let c3 = ConstraintCheck::from(c3_slack >= -AUDIT_EPS, c3_slack);

    let c4_slack = (params.alpha - params.rho)
        .min(params.rho - params.beta)
        .min(params.beta);
    let c4 = ConstraintCheck::from(
        params.alpha >= params.rho && params.rho >= params.beta && params.beta > 0.0,
        c4_slack,
    );

    let min_compensation = allocation
        .compensations
        .values()
        .fold(f64::INFINITY, |acc, &x| acc.min(x));
    let c5 = if allocation.baseline {
        ConstraintCheck {
            status: CheckStatus::Skipped,
            slack: min_compensation,
        }
    } else {
        ConstraintCheck::from(min_compensation > 0.0, min_compensation)
    };

    let sequence_value = total_impatience(coalition, &allocation.sequence)?.total;
    let c6 = if coalition.len() <= EXHAUSTIVE_SEQUENCE_LIMIT {
        let (_, optimum) = optimal_sequence_exhaustive(coalition)?;
        let slack = sequence_value - optimum;
        ConstraintCheck::from(slack <= AUDIT_EPS, slack)
    } else {
        // Above the exhaustive bound, check exchange-local optimality: no
        // adjacent swap may improve the total.
        let order = allocation.sequence.order();
        let mut best_gain = 0.0f64;
        for pair in order.windows(2) {
            let earlier = members[&pair[0]];
            let later = members[&pair[1]];
            let gain = later.omega * earlier.theta - earlier.omega * later.theta;
            best_gain = best_gain.max(gain);
        }
        ConstraintCheck::from(best_gain <= AUDIT_EPS, best_gain)
    };

    Ok(ConstraintAudit { c1, c2, c3, c4, c5, c6 })
}

/// One participant's individual-rationality margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticipantRationality {
    pub slack: f64,
    pub satisfied: bool,
}

/// Individual-rationality report: no passenger pays more than their
/// willingness `α·F`, and the driver clears the floor `β·ΣF`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalityReport {
    pub passengers: BTreeMap<PassengerId, ParticipantRationality>,
    pub driver: ParticipantRationality,
}

impl RationalityReport {
    pub fn all_satisfied(&self) -> bool {
        self.driver.satisfied && self.passengers.values().all(|p| p.satisfied)
    }
}

/// Checks individual rationality for every participant; violations are
/// report entries, not errors.
pub fn individual_rationality_check(
    coalition: &[Passenger],
    allocation: &Allocation,
    params: &PricingParams,
) -> Result<RationalityReport> {
    let members = index_coalition(coalition)?;
    let ids: BTreeSet<PassengerId> = members.keys().map(|id| (*id).clone()).collect();
    if ids != allocation.coalition {
        return Err(Error::PlayerMismatch(
            "allocation coalition differs from the checked coalition".into(),
        ));
    }

    let mut passengers = BTreeMap::new();
    for (id, passenger) in &members {
        let fare = base_fare(&passenger.travel, params);
        let compensation = allocation.compensations.get(*id).copied().unwrap_or(0.0);
        let net_payment = params.rho * fare - compensation;
        let slack = params.alpha * fare - net_payment;
        passengers.insert(
            (*id).clone(),
            ParticipantRationality {
                slack,
                satisfied: slack >= -AUDIT_EPS,
            },
        );
    }

    let sum_fares: Money = coalition.iter().map(|p| base_fare(&p.travel, params)).sum();
    let driver_slack = allocation.x_d - params.beta * sum_fares;
    let driver = ParticipantRationality {
        slack: driver_slack,
        satisfied: driver_slack >= -AUDIT_EPS,
    };

    Ok(RationalityReport { passengers, driver })
}
