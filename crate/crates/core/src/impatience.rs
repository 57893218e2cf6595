//! Per-passenger impatience under a service sequence and the
//! impatience-minimizing order.
//!
//! When a coalition is served in sequence `σ`, passenger `i` suffers
//! `I_i(σ) = θ_i·ω_i + ω_i · Σ θ_j` over the passengers `j` served strictly
//! before `i`, and the coalition total is the sum over members. Minimizing
//! the total over all permutations is weighted-completion-time scheduling
//! with processing times `θ` and weights `ω`, so serving in ascending `θ/ω`
//! order attains the optimum: swapping adjacent passengers `a` (earlier) and
//! `b` changes the total by exactly `ω_a·θ_b − ω_b·θ_a`, which is
//! nonnegative for every neighboring pair of the sorted order. Both the
//! brute-force and the ratio-rule solvers are provided; tests hold them
//! equal on every instance where both run.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{index_coalition, Money, Passenger, PassengerId};

/// Largest coalition `optimal_sequence_exhaustive` will enumerate
/// (9! = 362,880 permutations).
pub const EXHAUSTIVE_SEQUENCE_LIMIT: usize = 9;

/// Objective values closer than this are treated as ties and resolved
/// toward the lexicographically smaller candidate.
pub(crate) const TIE_EPS: f64 = 1e-9;

/// The order in which the driver serves a coalition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceSequence {
    order: Vec<PassengerId>,
}

impl ServiceSequence {
    /// Builds a sequence, rejecting empty orders and duplicate ids.
    pub fn new(order: Vec<PassengerId>) -> Result<Self> {
        if order.is_empty() {
            return Err(Error::EmptyCoalition);
        }
        let unique: BTreeSet<&PassengerId> = order.iter().collect();
        if unique.len() != order.len() {
            return Err(Error::BadSequence("duplicate passenger id in sequence".into()));
        }
        Ok(ServiceSequence { order })
    }

    pub fn order(&self) -> &[PassengerId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn position(&self, id: &PassengerId) -> Option<usize> {
        self.order.iter().position(|x| x == id)
    }
}

/// Ids served strictly before `passenger_id`.
pub fn predecessors(sequence: &ServiceSequence, passenger_id: &PassengerId) -> Result<BTreeSet<PassengerId>> {
    let position = sequence
        .position(passenger_id)
        .ok_or_else(|| Error::UnknownPassenger(passenger_id.clone()))?;
    Ok(sequence.order[..position].iter().cloned().collect())
}

/// Per-passenger impatience values and their coalition total.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpatienceBreakdown {
    pub per_passenger: BTreeMap<PassengerId, Money>,
    pub total: Money,
}

fn require_permutation(
    members: &BTreeMap<&PassengerId, &Passenger>,
    sequence: &ServiceSequence,
) -> Result<()> {
    if sequence.len() != members.len() {
        return Err(Error::BadSequence(format!(
            "sequence has {} entries but the coalition has {}",
            sequence.len(),
            members.len()
        )));
    }
    for id in sequence.order() {
        if !members.contains_key(id) {
            return Err(Error::BadSequence(format!("`{id}` is not a coalition member")));
        }
    }
    Ok(())
}

/// `I_i(σ)` for one coalition member.
pub fn impatience_of(
    passenger: &Passenger,
    sequence: &ServiceSequence,
    coalition: &[Passenger],
) -> Result<Money> {
    let members = index_coalition(coalition)?;
    require_permutation(&members, sequence)?;
    if !members.contains_key(&passenger.id) {
        return Err(Error::UnknownPassenger(passenger.id.clone()));
    }
    let position = sequence.position(&passenger.id).expect("member appears in sequence");
    let waited: f64 = sequence.order[..position].iter().map(|id| members[id].theta).sum();
    Ok(passenger.theta * passenger.omega + passenger.omega * waited)
}

/// `I(S, σ)` together with its per-passenger breakdown; the total is the sum
/// of the per-passenger entries.
pub fn total_impatience(coalition: &[Passenger], sequence: &ServiceSequence) -> Result<ImpatienceBreakdown> {
    let members = index_coalition(coalition)?;
    require_permutation(&members, sequence)?;
    let mut per_passenger = BTreeMap::new();
    let mut waited = 0.0;
    for id in sequence.order() {
        let passenger = members[id];
        per_passenger.insert(id.clone(), passenger.theta * passenger.omega + passenger.omega * waited);
        waited += passenger.theta;
    }
    let total = per_passenger.values().sum();
    Ok(ImpatienceBreakdown { per_passenger, total })
}

/// Brute-force minimizer over all `|S|!` sequences.
///
/// Permutations are enumerated in lexicographic id order and a candidate
/// replaces the incumbent only when it improves by more than 1e-9, so ties
/// resolve to the lexicographically smallest optimal order.
pub fn optimal_sequence_exhaustive(coalition: &[Passenger]) -> Result<(ServiceSequence, Money)> {
    let members = index_coalition(coalition)?;
    if members.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    if members.len() > EXHAUSTIVE_SEQUENCE_LIMIT {
        return Err(Error::CoalitionTooLarge {
            size: members.len(),
            limit: EXHAUSTIVE_SEQUENCE_LIMIT,
        });
    }

    let sorted: Vec<&Passenger> = members.values().copied().collect();
    let theta: Vec<f64> = sorted.iter().map(|p| p.theta).collect();
    let omega: Vec<f64> = sorted.iter().map(|p| p.omega).collect();
    let n = sorted.len();

    let mut best: Option<(Vec<usize>, f64)> = None;
    for perm in (0..n).permutations(n) {
        let mut total = 0.0;
        let mut waited = 0.0;
        for &k in &perm {
            total += theta[k] * omega[k] + omega[k] * waited;
            waited += theta[k];
        }
        match &best {
            Some((_, incumbent)) if total >= incumbent - TIE_EPS => {}
            _ => best = Some((perm, total)),
        }
    }

    let (perm, _) = best.expect("coalition is nonempty");
    let sequence = ServiceSequence::new(perm.into_iter().map(|k| sorted[k].id.clone()).collect())?;
    let value = total_impatience(coalition, &sequence)?.total;
    Ok((sequence, value))
}

/// Ratio rule: serve ascending by `θ/ω`, ties broken by ascending id.
///
/// Runs in `O(n log n)`; comparisons use the cross products `θ_a·ω_b` vs
/// `θ_b·ω_a` to avoid dividing.
pub fn optimal_sequence_smith(coalition: &[Passenger]) -> Result<ServiceSequence> {
    let members = index_coalition(coalition)?;
    if members.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    let mut sorted: Vec<&Passenger> = members.values().copied().collect();
    sorted.sort_by(|a, b| {
        (a.theta * b.omega)
            .partial_cmp(&(b.theta * a.omega))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.id.cmp(&b.id))
    });
    ServiceSequence::new(sorted.into_iter().map(|p| p.id.clone()).collect())
}
