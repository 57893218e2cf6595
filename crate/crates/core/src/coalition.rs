//! The cooperative game over passengers and its Shapley values.
//!
//! The default characteristic function values a subset `T` at the total
//! impatience of `T` under its optimal service sequence, `v(T) = I(T, σ*(T))`,
//! so a passenger's Shapley value is their fair share of the impatience the
//! coalition jointly suffers. The [`Game`] trait keeps the value function
//! pluggable; subsets are addressed by bitmask over the game's canonical
//! (id-sorted) player order and subset values are memoized, shared between
//! exact Shapley, Monte Carlo sampling, and coalition selection.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::impatience::{optimal_sequence_smith, total_impatience};
use crate::model::{index_coalition, Money, Passenger, PassengerId};
use crate::rng::SeededRng;

/// Largest player count for exact Shapley computation (2^12 subset values).
pub const EXACT_SHAPLEY_LIMIT: usize = 12;

/// Absolute tolerance for the axiom checks.
pub const AXIOM_EPS: f64 = 1e-9;

/// A transferable-utility game over an ordered set of players.
///
/// Bit `i` of a subset mask selects `player_ids()[i]`.
pub trait Game {
    fn player_ids(&self) -> &[PassengerId];

    /// Value of the subset selected by `mask`; `value(0)` must be 0.
    fn value(&self, mask: u64) -> Money;

    fn player_count(&self) -> usize {
        self.player_ids().len()
    }
}

/// The impatience game `v(T) = I(T, σ*(T))` with memoized subset values.
pub struct ImpatienceGame {
    players: Vec<Passenger>,
    ids: Vec<PassengerId>,
    memo: RefCell<HashMap<u64, Money>>,
}

impl ImpatienceGame {
    /// Builds the game over the given passengers, canonicalized to id order.
    pub fn new(players: Vec<Passenger>) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::EmptyCoalition);
        }
        if players.len() > 63 {
            return Err(Error::invariant("players", "at most 63 players are supported"));
        }
        index_coalition(&players)?;
        let mut players = players;
        players.sort_by(|a, b| a.id.cmp(&b.id));
        let ids = players.iter().map(|p| p.id.clone()).collect();
        Ok(ImpatienceGame {
            players,
            ids,
            memo: RefCell::new(HashMap::from([(0, 0.0)])),
        })
    }

    pub fn players(&self) -> &[Passenger] {
        &self.players
    }

    /// `v(T)` for a subset given by ids; the empty subset is 0 by convention.
    pub fn characteristic_value(&self, subset: &BTreeSet<PassengerId>) -> Result<Money> {
        Ok(self.value(self.mask_of(subset)?))
    }

    /// A view of this game restricted to `member_ids`, sharing the memo table.
    pub fn subgame(&self, member_ids: &BTreeSet<PassengerId>) -> Result<Subgame<'_>> {
        let mut base_bits = Vec::with_capacity(member_ids.len());
        for id in member_ids {
            base_bits.push(self.bit_of(id)? as u32);
        }
        Ok(Subgame {
            base: self,
            ids: member_ids.iter().cloned().collect(),
            base_bits,
        })
    }

    fn bit_of(&self, id: &PassengerId) -> Result<usize> {
        self.ids
            .binary_search(id)
            .map_err(|_| Error::UnknownPassenger(id.clone()))
    }

    fn mask_of(&self, subset: &BTreeSet<PassengerId>) -> Result<u64> {
        let mut mask = 0u64;
        for id in subset {
            mask |= 1 << self.bit_of(id)?;
        }
        Ok(mask)
    }
}

impl Game for ImpatienceGame {
    fn player_ids(&self) -> &[PassengerId] {
        &self.ids
    }

    fn value(&self, mask: u64) -> Money {
        debug_assert!(mask < 1u64 << self.players.len(), "mask outside the player set");
        if let Some(&cached) = self.memo.borrow().get(&mask) {
            return cached;
        }
        let subset: Vec<Passenger> = self
            .players
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect();
        let sequence = optimal_sequence_smith(&subset).expect("subset is nonempty");
        let value = total_impatience(&subset, &sequence)
            .expect("sequence permutes the subset")
            .total;
        self.memo.borrow_mut().insert(mask, value);
        value
    }
}

/// A restriction of an [`ImpatienceGame`] to a subset of its players.
pub struct Subgame<'a> {
    base: &'a ImpatienceGame,
    ids: Vec<PassengerId>,
    base_bits: Vec<u32>,
}

impl Game for Subgame<'_> {
    fn player_ids(&self) -> &[PassengerId] {
        &self.ids
    }

    fn value(&self, mask: u64) -> Money {
        let mut base_mask = 0u64;
        for (i, bit) in self.base_bits.iter().enumerate() {
            if mask >> i & 1 == 1 {
                base_mask |= 1u64 << bit;
            }
        }
        self.base.value(base_mask)
    }
}

/// How a Shapley result was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapleyMethod {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

impl ShapleyMethod {
    pub fn samples(&self) -> u64 {
        match self {
            ShapleyMethod::Exact => 0,
            ShapleyMethod::MonteCarlo { samples, .. } => *samples,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ShapleyMethod::Exact => None,
            ShapleyMethod::MonteCarlo { seed, .. } => Some(*seed),
        }
    }
}

/// Shapley values per player, with per-player standard errors for the
/// Monte Carlo estimator (empty for exact results).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyResult {
    pub phi: BTreeMap<PassengerId, Money>,
    pub std_error: BTreeMap<PassengerId, Money>,
    pub method: ShapleyMethod,
}

impl ShapleyResult {
    pub fn total(&self) -> Money {
        self.phi.values().sum()
    }

    pub fn phi_of(&self, id: &PassengerId) -> Option<Money> {
        self.phi.get(id).copied()
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut table = vec![1.0; n + 1];
    for k in 1..=n {
        table[k] = table[k - 1] * k as f64;
    }
    table
}

/// Exact Shapley values by subset enumeration:
/// `φ_i = Σ_{T ⊆ S\{i}} |T|!(n−|T|−1)!/n! · [v(T∪{i}) − v(T)]`.
pub fn shapley_exact(game: &impl Game) -> Result<ShapleyResult> {
    let ids = game.player_ids();
    let n = ids.len();
    if n == 0 {
        return Err(Error::EmptyCoalition);
    }
    if n > EXACT_SHAPLEY_LIMIT {
        return Err(Error::GameTooLarge {
            size: n,
            limit: EXACT_SHAPLEY_LIMIT,
        });
    }

    let fact = factorials(n);
    let mut phi = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let bit = 1u64 << i;
        let mut acc = 0.0;
        for mask in 0..1u64 << n {
            if mask & bit != 0 {
                continue;
            }
            let t = mask.count_ones() as usize;
            let weight = fact[t] * fact[n - 1 - t] / fact[n];
            acc += weight * (game.value(mask | bit) - game.value(mask));
        }
        phi.insert(id.clone(), acc);
    }

    Ok(ShapleyResult {
        phi,
        std_error: BTreeMap::new(),
        method: ShapleyMethod::Exact,
    })
}

/// Monte Carlo Shapley estimate: averages marginal contributions over
/// `samples` uniformly drawn player orderings from the seeded generator.
/// Deterministic for a fixed `(samples, seed)` pair.
pub fn shapley_montecarlo(game: &impl Game, samples: u64, seed: u64) -> Result<ShapleyResult> {
    let ids = game.player_ids();
    let n = ids.len();
    if n == 0 {
        return Err(Error::EmptyCoalition);
    }
    if n > 63 {
        return Err(Error::invariant("players", "at most 63 players are supported"));
    }
    if samples == 0 {
        return Err(Error::invariant("samples", "must be at least 1"));
    }

    let mut rng = SeededRng::new(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];

    for _ in 0..samples {
        rng.shuffle(&mut order);
        let mut mask = 0u64;
        let mut previous = 0.0;
        for &i in &order {
            mask |= 1u64 << i;
            let value = game.value(mask);
            let marginal = value - previous;
            sum[i] += marginal;
            sum_sq[i] += marginal * marginal;
            previous = value;
        }
    }

    let count = samples as f64;
    let mut phi = BTreeMap::new();
    let mut std_error = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let mean = sum[i] / count;
        let se = if samples > 1 {
            ((sum_sq[i] - sum[i] * sum[i] / count) / (count * (count - 1.0))).max(0.0).sqrt()
        } else {
            0.0
        };
        phi.insert(id.clone(), mean);
        std_error.insert(id.clone(), se);
    }

    Ok(ShapleyResult {
        phi,
        std_error,
        method: ShapleyMethod::MonteCarlo { samples, seed },
    })
}

/// Outcome of a single axiom check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomCheck {
    pub passed: bool,
    pub max_violation: f64,
}

/// Fairness-axiom verification of a Shapley result against its game.
///
/// Symmetry and dummy detection enumerate subsets, so they are reported only
/// for games within [`EXACT_SHAPLEY_LIMIT`]; efficiency is always checked.
/// Monte Carlo results get a widened tolerance of five standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub efficiency: AxiomCheck,
    pub symmetry: Option<AxiomCheck>,
    pub dummy: Option<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.efficiency.passed
            && self.symmetry.is_none_or(|c| c.passed)
            && self.dummy.is_none_or(|c| c.passed)
    }
}

pub fn verify_axioms(game: &impl Game, result: &ShapleyResult) -> AxiomReport {
    let ids = game.player_ids();
    let n = ids.len();
    let full = if n == 0 { 0 } else { (1u64 << n) - 1 };

    let grand = game.value(full);
    let gap = (result.total() - grand).abs();
    let efficiency = AxiomCheck {
        passed: gap <= AXIOM_EPS,
        max_violation: gap,
    };

    if n == 0 || n > EXACT_SHAPLEY_LIMIT {
        return AxiomReport {
            efficiency,
            symmetry: None,
            dummy: None,
        };
    }

    let phi = |i: usize| result.phi.get(&ids[i]).copied().unwrap_or(f64::NAN);
    let se = |i: usize| result.std_error.get(&ids[i]).copied().unwrap_or(0.0);

    // Symmetry: interchangeable players must receive equal values.
    let mut symmetry = AxiomCheck {
        passed: true,
        max_violation: 0.0,
    };
    for i in 0..n {
        for j in i + 1..n {
            let (bi, bj) = (1u64 << i, 1u64 << j);
            let interchangeable = (0..=full)
                .filter(|mask| mask & (bi | bj) == 0)
                .all(|mask| (game.value(mask | bi) - game.value(mask | bj)).abs() <= AXIOM_EPS);
            if interchangeable {
                let violation = (phi(i) - phi(j)).abs();
                let tolerance = AXIOM_EPS + 5.0 * (se(i) + se(j));
                symmetry.max_violation = symmetry.max_violation.max(violation);
                if violation.is_nan() || violation > tolerance {
                    symmetry.passed = false;
                }
            }
        }
    }

    // Dummy: a player whose marginal contribution is zero everywhere must
    // receive zero.
    let mut dummy = AxiomCheck {
        passed: true,
        max_violation: 0.0,
    };
    for i in 0..n {
        let bit = 1u64 << i;
        let null_player = (0..=full)
            .filter(|mask| mask & bit == 0)
            .all(|mask| (game.value(mask | bit) - game.value(mask)).abs() <= AXIOM_EPS);
        if null_player {
            let violation = phi(i).abs();
            let tolerance = AXIOM_EPS + 5.0 * se(i);
            dummy.max_violation = dummy.max_violation.max(violation);
            if violation.is_nan() || violation > tolerance {
                dummy.passed = false;
            }
        }
    }

    AxiomReport {
        efficiency,
        symmetry: Some(symmetry),
        dummy: Some(dummy),
    }
}
