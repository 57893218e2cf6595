//! Independent oracles for the derived values and algorithms.
//!
//! Every check here recomputes expected results through a route the library
//! does not share: impatience through literal nested-loop evaluation of the
//! defining formula, optimal sequences through permutation enumeration
//! instead of the ratio rule, and Shapley values through averaging over all
//! join orders instead of the subset-weight formula.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;

use carpool_core::{
    base_fare, impatience_of, optimal_sequence_exhaustive, optimal_sequence_smith, pca_allocate,
    select_coalition, shapley_exact, total_impatience, Game, ImpatienceGame, Passenger,
    PassengerId, PricingParams, SeededRng, ServiceSequence, Travel,
};

const EPS: f64 = 1e-9;

fn passenger(id: &str, theta: f64, omega: f64, l: f64, t: f64) -> Passenger {
    Passenger::new(id, Travel::new(l, t).unwrap(), theta, omega).unwrap()
}

fn random_coalition(rng: &mut SeededRng, n: usize) -> Vec<Passenger> {
    (0..n)
        .map(|i| {
            passenger(
                &format!("p{i:02}"),
                rng.uniform(1.0, 30.0),
                rng.uniform(0.1, 3.0),
                rng.uniform(1.0, 20.0),
                rng.uniform(1.0, 40.0),
            )
        })
        .collect()
}

/// `I_i(σ)` evaluated exactly as written: own sojourn cost plus omega times
/// the sum of predecessor sojourn times, via nested loops.
fn impatience_formula(coalition: &[Passenger], order: &[PassengerId], id: &PassengerId) -> f64 {
    let lookup: BTreeMap<&PassengerId, &Passenger> = coalition.iter().map(|p| (&p.id, p)).collect();
    let me = lookup[id];
    let position = order.iter().position(|x| x == id).unwrap();
    let mut delay = 0.0;
    for predecessor in &order[..position] {
        delay += lookup[predecessor].theta;
    }
    me.theta * me.omega + me.omega * delay
}

fn total_by_formula(coalition: &[Passenger], order: &[PassengerId]) -> f64 {
    coalition.iter().map(|p| impatience_formula(coalition, order, &p.id)).sum()
}

/// Minimal total impatience by enumerating every permutation.
fn optimum_by_enumeration(coalition: &[Passenger]) -> f64 {
    let n = coalition.len();
    (0..n)
        .permutations(n)
        .map(|perm| {
            let mut total = 0.0;
            let mut waited = 0.0;
            for &k in &perm {
                total += coalition[k].omega * (coalition[k].theta + waited);
                waited += coalition[k].theta;
            }
            total
        })
        .fold(f64::INFINITY, f64::min)
}

/// An impatience game whose subset values come from permutation enumeration
/// rather than the ratio rule; memoized for tractability.
struct EnumerationGame {
    players: Vec<Passenger>,
    ids: Vec<PassengerId>,
    memo: std::cell::RefCell<HashMap<u64, f64>>,
}

impl EnumerationGame {
    fn new(mut players: Vec<Passenger>) -> Self {
        players.sort_by(|a, b| a.id.cmp(&b.id));
        let ids = players.iter().map(|p| p.id.clone()).collect();
        EnumerationGame {
            players,
            ids,
            memo: std::cell::RefCell::new(HashMap::from([(0, 0.0)])),
        }
    }
}

impl Game for EnumerationGame {
    fn player_ids(&self) -> &[PassengerId] {
        &self.ids
    }

    fn value(&self, mask: u64) -> f64 {
        if let Some(&v) = self.memo.borrow().get(&mask) {
            return v;
        }
        let subset: Vec<Passenger> = self
            .players
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect();
        let v = optimum_by_enumeration(&subset);
        self.memo.borrow_mut().insert(mask, v);
        v
    }
}

/// Shapley values as the average marginal contribution over all n! join
/// orders.
fn shapley_by_join_orders(game: &impl Game) -> BTreeMap<PassengerId, f64> {
    let ids = game.player_ids();
    let n = ids.len();
    let mut sums = vec![0.0; n];
    let mut orders = 0u64;
    for perm in (0..n).permutations(n) {
        orders += 1;
        let mut mask = 0u64;
        let mut previous = 0.0;
        for &i in &perm {
            mask |= 1 << i;
            let value = game.value(mask);
            sums[i] += value - previous;
            previous = value;
        }
    }
    ids.iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), sums[i] / orders as f64))
        .collect()
}

#[test]
fn impatience_matches_the_formula_oracle() {
    // The frozen worked values first.
    let riders = vec![
        passenger("p1", 10.0, 2.0, 5.0, 10.0),
        passenger("p2", 20.0, 1.0, 5.0, 10.0),
    ];
    let forward: Vec<PassengerId> = vec!["p1".into(), "p2".into()];
    let reversed: Vec<PassengerId> = vec!["p2".into(), "p1".into()];
    assert_eq!(impatience_formula(&riders, &forward, &"p2".into()), 30.0);
    assert_eq!(impatience_formula(&riders, &reversed, &"p1".into()), 60.0);
    assert_eq!(total_by_formula(&riders, &forward), 50.0);
    assert_eq!(total_by_formula(&riders, &reversed), 80.0);

    // Then random instances against the library.
    let mut rng = SeededRng::new(101);
    for trial in 0..60 {
        let n = 1 + (trial % 7);
        let coalition = random_coalition(&mut rng, n);
        let mut order: Vec<PassengerId> = coalition.iter().map(|p| p.id.clone()).collect();
        rng.shuffle(&mut order);
        let sequence = ServiceSequence::new(order.clone()).unwrap();

        for rider in &coalition {
            let expected = impatience_formula(&coalition, &order, &rider.id);
            let got = impatience_of(rider, &sequence, &coalition).unwrap();
            assert!((got - expected).abs() < EPS);
        }
        let breakdown = total_impatience(&coalition, &sequence).unwrap();
        assert!((breakdown.total - total_by_formula(&coalition, &order)).abs() < EPS);
    }
}

#[test]
fn sequence_solvers_match_the_enumeration_oracle() {
    let mut rng = SeededRng::new(202);
    for trial in 0..80 {
        let n = 2 + (trial % 6);
        let coalition = random_coalition(&mut rng, n);
        let oracle = optimum_by_enumeration(&coalition);

        let (_, exhaustive_value) = optimal_sequence_exhaustive(&coalition).unwrap();
        assert!((exhaustive_value - oracle).abs() < EPS);

        let smith = optimal_sequence_smith(&coalition).unwrap();
        let smith_value = total_impatience(&coalition, &smith).unwrap().total;
        assert!((smith_value - oracle).abs() < EPS);
    }
}

#[test]
fn adjacent_swap_changes_total_by_the_exchange_delta() {
    let mut rng = SeededRng::new(303);
    for trial in 0..60 {
        let n = 2 + (trial % 6);
        let coalition = random_coalition(&mut rng, n);
        let mut order: Vec<PassengerId> = coalition.iter().map(|p| p.id.clone()).collect();
        rng.shuffle(&mut order);
        let position = rng.index(n - 1);

        let before = total_by_formula(&coalition, &order);
        let earlier = coalition.iter().find(|p| p.id == order[position]).unwrap().clone();
        let later = coalition.iter().find(|p| p.id == order[position + 1]).unwrap().clone();
        order.swap(position, position + 1);
        let after = total_by_formula(&coalition, &order);

        let delta = earlier.omega * later.theta - later.omega * earlier.theta;
        assert!((after - before - delta).abs() < 1e-8);
    }
}

#[test]
fn exact_shapley_matches_the_join_order_oracle() {
    let mut rng = SeededRng::new(404);
    for trial in 0..20 {
        let n = 1 + (trial % 6);
        let players = random_coalition(&mut rng, n);

        let game = ImpatienceGame::new(players.clone()).unwrap();
        let exact = shapley_exact(&game).unwrap();

        let oracle_game = EnumerationGame::new(players);
        let oracle = shapley_by_join_orders(&oracle_game);

        for (id, expected) in &oracle {
            let got = exact.phi_of(id).unwrap();
            assert!((got - expected).abs() < 1e-8, "{id}: {got} vs {expected}");
        }
    }
}

#[test]
fn two_rider_worked_values_from_first_principles() {
    let riders = vec![
        passenger("p1", 10.0, 2.0, 10.0, 20.0),
        passenger("p2", 20.0, 1.0, 4.0, 4.0),
    ];
    let params = PricingParams::new(2.0, 0.5, 1.5, 1.8, 0.8, 1.3).unwrap();

    // Oracle Shapley from join orders over the enumeration game.
    let oracle_game = EnumerationGame::new(riders.clone());
    let oracle_phi = shapley_by_join_orders(&oracle_game);
    assert!((oracle_phi[&"p1".into()] - 25.0).abs() < EPS);
    assert!((oracle_phi[&"p2".into()] - 25.0).abs() < EPS);

    // Straight-line allocation arithmetic.
    let fares: Vec<f64> = riders.iter().map(|p| base_fare(&p.travel, &params)).collect();
    assert!((fares[0] - 30.0).abs() < EPS);
    assert!((fares[1] - 10.0).abs() < EPS);
    let sum_f: f64 = fares.iter().sum();
    let pool = (params.rho - params.epsilon) * sum_f;
    let phi_total: f64 = oracle_phi.values().sum();
    let x1 = pool * oracle_phi[&"p1".into()] / phi_total;
    let x2 = pool * oracle_phi[&"p2".into()] / phi_total;
    let x_d = params.epsilon * sum_f;
    assert!((x1 - 4.0).abs() < EPS);
    assert!((x2 - 4.0).abs() < EPS);
    assert!((x_d - 52.0).abs() < EPS);
    assert!((x_d + x1 + x2 - params.rho * sum_f).abs() < EPS);

    let objective = x1.min(x2) / optimum_by_enumeration(&riders);
    assert!((objective - 0.08).abs() < EPS);

    // The library agrees end to end.
    let game = ImpatienceGame::new(riders.clone()).unwrap();
    let allocation = pca_allocate(&riders, &params, &shapley_exact(&game).unwrap()).unwrap();
    assert!((allocation.x_d - x_d).abs() < EPS);
    assert!((allocation.compensations[&"p1".into()] - x1).abs() < EPS);
    assert!((allocation.objective - objective).abs() < EPS);
}

#[test]
fn coalition_selection_matches_the_brute_force_oracle() {
    let mut rng = SeededRng::new(505);
    for trial in 0..100 {
        let n = 1 + (trial % 6);
        let passengers = random_coalition(&mut rng, n);
        let beta = rng.uniform(0.3, 0.9);
        let rho = beta + rng.uniform(0.2, 1.0);
        let alpha = rho + rng.uniform(0.0, 0.5);
        let epsilon = beta + rng.uniform(0.1, 0.9) * (rho - beta);
        let params = PricingParams::new(
            rng.uniform(0.5, 3.0),
            rng.uniform(0.1, 1.0),
            rho,
            alpha,
            beta,
            epsilon,
        )
        .unwrap();

        // Oracle: enumerate subsets, allocating by join-order Shapley values
        // over enumeration-based impatience optima.
        let oracle_game = EnumerationGame::new(passengers.clone());
        let ids = oracle_game.ids.clone();
        let mut best: Option<(f64, Vec<PassengerId>)> = None;
        for mask in 1u64..1 << n {
            let members: Vec<PassengerId> = ids
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, id)| id.clone())
                .collect();
            let subset: Vec<Passenger> = members
                .iter()
                .map(|id| passengers.iter().find(|p| &p.id == id).unwrap().clone())
                .collect();
            let sum_f: f64 = subset.iter().map(|p| base_fare(&p.travel, &params)).sum();
            let pool = params.rho * sum_f - params.epsilon * sum_f;
            let sub_oracle = EnumerationGame::new(subset.clone());
            let phi = shapley_by_join_orders(&sub_oracle);
            let phi_total: f64 = phi.values().sum();
            let min_x = phi
                .values()
                .map(|&p| pool * p / phi_total)
                .fold(f64::INFINITY, f64::min);
            let objective = min_x / optimum_by_enumeration(&subset);

            let replace = match &best {
                None => true,
                Some((incumbent, incumbent_members)) => {
                    if objective > incumbent + EPS {
                        true
                    } else if objective < incumbent - EPS {
                        false
                    } else if members.len() != incumbent_members.len() {
                        members.len() > incumbent_members.len()
                    } else {
                        members < *incumbent_members
                    }
                }
            };
            if replace {
                best = Some((objective, members));
            }
        }
        let (oracle_objective, oracle_members) = best.unwrap();

        let selection = select_coalition(&passengers, &params).unwrap();
        let selected: Vec<PassengerId> = selection.coalition.iter().map(|p| p.id.clone()).collect();
        assert_eq!(selected, oracle_members, "trial {trial}");
        assert!((selection.allocation.objective - oracle_objective).abs() < 1e-8);
    }
}

#[test]
fn identical_passengers_selection_matches_the_objective_formula() {
    // With identical passengers every size-k subset scores pool(S)/(k * I*)
    // and singletons win; ties resolve to the lexicographically smallest set.
    let params = PricingParams::new(2.0, 0.5, 1.5, 1.8, 0.8, 1.3).unwrap();
    let passengers: Vec<Passenger> = (1..=4)
        .map(|i| passenger(&format!("p{i}"), 12.0, 1.5, 6.0, 9.0))
        .collect();

    let fare = base_fare(&passengers[0].travel, &params);
    for mask in 1u64..16 {
        let subset: Vec<Passenger> = passengers
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect();
        let k = subset.len() as f64;
        let pool = (params.rho - params.epsilon) * k * fare;
        let expected = (pool / k) / optimum_by_enumeration(&subset);

        let game = ImpatienceGame::new(subset.clone()).unwrap();
        let allocation = pca_allocate(&subset, &params, &shapley_exact(&game).unwrap()).unwrap();
        assert!((allocation.objective - expected).abs() < EPS);
    }

    let selection = select_coalition(&passengers, &params).unwrap();
    let chosen: Vec<&str> = selection.coalition.iter().map(|p| p.id.as_str()).collect();
    assert_eq!(chosen, vec!["p1"]);
}

#[test]
fn game_is_monotone_and_marginals_dominate_solo_impatience() {
    let mut rng = SeededRng::new(606);
    for trial in 0..12 {
        let n = 2 + (trial % 5);
        let players = random_coalition(&mut rng, n);
        let game = ImpatienceGame::new(players.clone()).unwrap();
        let ids: BTreeSet<PassengerId> = players.iter().map(|p| p.id.clone()).collect();
        let by_id: BTreeMap<PassengerId, &Passenger> =
            players.iter().map(|p| (p.id.clone(), p)).collect();

        // v({i}) = theta_i * omega_i.
        for id in &ids {
            let solo = game.characteristic_value(&BTreeSet::from([id.clone()])).unwrap();
            let p = by_id[id];
            assert!((solo - p.theta * p.omega).abs() < EPS);
        }

        // Monotone under inclusion, and every marginal is at least theta*omega.
        let full = (1u64 << n) - 1;
        for mask in 0..=full {
            let subset: BTreeSet<PassengerId> = ids
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, id)| id.clone())
                .collect();
            let value = game.characteristic_value(&subset).unwrap();
            for (i, id) in ids.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    continue;
                }
                let mut bigger = subset.clone();
                bigger.insert(id.clone());
                let with = game.characteristic_value(&bigger).unwrap();
                let p = by_id[id];
                assert!(with - value >= p.theta * p.omega - EPS);
            }
        }

        // Hence every Shapley value clears the same floor.
        let shapley = shapley_exact(&game).unwrap();
        for id in &ids {
            let p = by_id[id];
            assert!(shapley.phi_of(id).unwrap() >= p.theta * p.omega - EPS);
        }
    }
}

#[test]
fn optimum_is_monotone_in_coalition_size() {
    let mut rng = SeededRng::new(707);
    for _ in 0..10 {
        let players = random_coalition(&mut rng, 5);
        let n = players.len();
        let full = (1u64 << n) - 1;
        let mut optima = vec![0.0; (full + 1) as usize];
        for mask in 1..=full {
            let subset: Vec<Passenger> = players
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect();
            optima[mask as usize] = optimum_by_enumeration(&subset);
        }
        for mask in 1..=full {
            for bit in 0..n {
                let superset = mask | 1 << bit;
                if superset != mask {
                    assert!(optima[superset as usize] >= optima[mask as usize] - EPS);
                }
            }
        }
    }
}
