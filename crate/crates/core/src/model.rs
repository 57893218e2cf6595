//! Tariff parameters, travels, participants, and the fare/surplus formulas.
//!
//! A scenario has one driver, a set of passengers, and a shared
//! [`PricingParams`] bundle. The base fare for a travel of `l` kilometers and
//! `t` minutes is `F = pr_l * l + pr_t * t`; the surge fare collected from a
//! passenger is `G = rho * F`. Passengers are willing to pay up to
//! `alpha * F`, drivers expect at least `beta * F` per travel, and the
//! incentive coefficient `epsilon` (strictly above `beta`, at most `rho`)
//! scales the driver's actual per-travel revenue.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Monetary amounts are plain doubles; tests compare them at 1e-9 absolute.
pub type Money = f64;

/// Identifier of a passenger, unique within a scenario.
///
/// Ids order lexicographically; every deterministic tie-break in the crate
/// (sequence ties, coalition-selection ties) falls back to this order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PassengerId(String);

impl PassengerId {
    pub fn new(id: impl Into<String>) -> Self {
        PassengerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PassengerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PassengerId {
    fn from(id: &str) -> Self {
        PassengerId(id.to_owned())
    }
}

impl From<String> for PassengerId {
    fn from(id: String) -> Self {
        PassengerId(id)
    }
}

/// Tariff and coefficient bundle shared by a whole scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingParams {
    /// Price per kilometer.
    pub pr_l: f64,
    /// Price per minute.
    pub pr_t: f64,
    /// Surge coefficient applied to the base fare.
    pub rho: f64,
    /// Willingness-to-pay coefficient.
    pub alpha: f64,
    /// Least-expected-revenue coefficient.
    pub beta: f64,
    /// Incentive coefficient for the driver's actual revenue.
    pub epsilon: f64,
}

impl PricingParams {
    pub fn new(pr_l: f64, pr_t: f64, rho: f64, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        let params = PricingParams {
            pr_l,
            pr_t,
            rho,
            alpha,
            beta,
            epsilon,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks the coefficient chain `alpha >= rho >= beta > 0`, the incentive
    /// band `beta < epsilon <= rho`, and price sanity.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("params.pr_l", self.pr_l),
            ("params.pr_t", self.pr_t),
            ("params.rho", self.rho),
            ("params.alpha", self.alpha),
            ("params.beta", self.beta),
            ("params.epsilon", self.epsilon),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(Error::invariant(field, "must be a finite number"));
            }
        }
        if self.pr_l < 0.0 {
            return Err(Error::invariant("params.pr_l", "price per kilometer must be nonnegative"));
        }
        if self.pr_t < 0.0 {
            return Err(Error::invariant("params.pr_t", "price per minute must be nonnegative"));
        }
        if self.pr_l == 0.0 && self.pr_t == 0.0 {
            return Err(Error::invariant("params.pr_l", "pr_l and pr_t cannot both be zero"));
        }
        if self.beta <= 0.0 {
            return Err(Error::invariant("params.beta", "C4 violated: beta must be positive"));
        }
        if self.beta > self.rho {
            return Err(Error::invariant("params.beta", "C4 violated: beta > rho"));
        }
        if self.rho > self.alpha {
            return Err(Error::invariant("params.alpha", "C4 violated: rho > alpha"));
        }
        if self.epsilon <= self.beta {
            return Err(Error::invariant("params.epsilon", "epsilon must exceed beta"));
        }
        if self.epsilon > self.rho {
            return Err(Error::invariant("params.epsilon", "epsilon must not exceed rho"));
        }
        Ok(())
    }
}

/// A passenger's travel: distance in kilometers and expected time in minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Travel {
    pub distance_km: f64,
    pub expected_time_min: f64,
}

impl Travel {
    pub fn new(distance_km: f64, expected_time_min: f64) -> Result<Self> {
        let travel = Travel {
            distance_km,
            expected_time_min,
        };
        travel.validate()?;
        Ok(travel)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.distance_km.is_finite() || self.distance_km < 0.0 {
            return Err(Error::invariant("travel.distance_km", "must be finite and nonnegative"));
        }
        if !self.expected_time_min.is_finite() || self.expected_time_min < 0.0 {
            return Err(Error::invariant(
                "travel.expected_time_min",
                "must be finite and nonnegative",
            ));
        }
        if self.distance_km == 0.0 && self.expected_time_min == 0.0 {
            return Err(Error::invariant("travel", "distance and time cannot both be zero"));
        }
        Ok(())
    }
}

/// A rider: travel, expected sojourn time `theta` (minutes) and delay
/// compensation rate `omega` (money per minute).
#[derive(Debug, Clone, PartialEq)]
pub struct Passenger {
    pub id: PassengerId,
    pub travel: Travel,
    pub theta: f64,
    pub omega: f64,
}

impl Passenger {
    pub fn new(id: impl Into<PassengerId>, travel: Travel, theta: f64, omega: f64) -> Result<Self> {
        let passenger = Passenger {
            id: id.into(),
            travel,
            theta,
            omega,
        };
        passenger.validate()?;
        Ok(passenger)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.as_str().is_empty() {
            return Err(Error::invariant("passenger.id", "must not be empty"));
        }
        if self.id.as_str().contains([',', '|', '\n', '\r']) {
            return Err(Error::invariant(
                "passenger.id",
                "must not contain ',', '|', or line breaks",
            ));
        }
        self.travel.validate()?;
        if !self.theta.is_finite() || self.theta <= 0.0 {
            return Err(Error::invariant("passenger.theta", "expected sojourn time must be positive"));
        }
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(Error::invariant(
                "passenger.omega",
                "compensation rate per minute must be positive",
            ));
        }
        Ok(())
    }
}

/// The single driver of a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Driver {
    pub id: String,
}

impl Driver {
    pub fn new(id: impl Into<String>) -> Self {
        Driver { id: id.into() }
    }
}

impl Default for Driver {
    fn default() -> Self {
        Driver::new("d")
    }
}

/// Indexes a coalition by passenger id, rejecting duplicates.
pub(crate) fn index_coalition(coalition: &[Passenger]) -> Result<BTreeMap<&PassengerId, &Passenger>> {
    let mut members = BTreeMap::new();
    for passenger in coalition {
        if members.insert(&passenger.id, passenger).is_some() {
            return Err(Error::invariant(
                "coalition",
                format!("duplicate passenger id `{}`", passenger.id),
            ));
        }
    }
    Ok(members)
}

fn fare_formula(pr_l: f64, pr_t: f64, distance_km: f64, time_min: f64) -> Money {
    pr_l * distance_km + pr_t * time_min
}

/// Base fare `F(T) = pr_l * l + pr_t * t`.
pub fn base_fare(travel: &Travel, params: &PricingParams) -> Money {
    fare_formula(params.pr_l, params.pr_t, travel.distance_km, travel.expected_time_min)
}

/// Surge fare `G(T) = rho * F(T)`.
pub fn surge_fare(travel: &Travel, params: &PricingParams) -> Money {
    params.rho * base_fare(travel, params)
}

/// Passenger surplus `(alpha - rho) * F(T)`: the gap between the highest
/// acceptable price and the surge fare. Nonnegative whenever `alpha >= rho`.
pub fn passenger_surplus(travel: &Travel, params: &PricingParams) -> Money {
    (params.alpha - params.rho) * base_fare(travel, params)
}

/// Driver surplus `x_d - beta * sum(F(T_i))` over the served travels.
pub fn driver_surplus(x_d: Money, coalition_fares: &[Money], params: &PricingParams) -> Money {
    x_d - params.beta * coalition_fares.iter().sum::<Money>()
}
