//! Scenario instances: the on-disk format, validation, and seeded generation.
//!
//! A scenario file is a TOML document with exactly these fields:
//!
//! ```toml
//! label = "two riders"
//! seed = 42            # optional; the seed a generated scenario came from
//!
//! [params]
//! pr_l = 2.0
//! pr_t = 0.5
//! rho = 1.5
//! alpha = 1.8
//! beta = 0.8
//! epsilon = 1.3
//!
//! [[passengers]]
//! id = "p1"
//! distance_km = 10.0
//! expected_time_min = 20.0
//! theta = 10.0
//! omega = 2.0
//! ```
//!
//! Parse errors (malformed TOML), schema errors (missing or unknown fields),
//! and invariant errors (legal file, illegal values) surface as distinct
//! error variants. `save` always emits the canonical form, so
//! `save(load(f))` is byte-stable for canonically formatted files.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{base_fare, Driver, Passenger, PricingParams, Travel};
use crate::rng::SeededRng;

/// Most passengers a scenario may hold.
pub const MAX_PASSENGERS: usize = 20;

/// A validated problem instance: one driver, one tariff, a passenger set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub params: PricingParams,
    pub passengers: Vec<Passenger>,
    pub driver: Driver,
    /// Seed the instance was generated from, when it was generated.
    pub seed: Option<u64>,
}

impl Scenario {
    /// Checks every member invariant plus the scenario-level ones: unique
    /// ids, a bounded passenger count, a table-safe label, and a strictly
    /// positive base fare for every passenger.
    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() {
            return Err(Error::invariant("label", "must not be empty"));
        }
        if self.label.contains([',', '\n', '\r']) {
            return Err(Error::invariant("label", "must not contain ',' or line breaks"));
        }
        self.params.validate()?;
        if self.passengers.is_empty() {
            return Err(Error::invariant("passengers", "at least one passenger is required"));
        }
        if self.passengers.len() > MAX_PASSENGERS {
            return Err(Error::invariant(
                "passengers",
                format!("at most {MAX_PASSENGERS} passengers are supported"),
            ));
        }
        let mut seen = BTreeSet::new();
        for passenger in &self.passengers {
            passenger.validate()?;
            if !seen.insert(&passenger.id) {
                return Err(Error::invariant(
                    "passengers",
                    format!("duplicate passenger id `{}`", passenger.id),
                ));
            }
            if base_fare(&passenger.travel, &self.params) <= 0.0 {
                return Err(Error::invariant(
                    format!("passengers.{}", passenger.id),
                    "base fare must be positive under the scenario tariff",
                ));
            }
        }
        Ok(())
    }

    pub fn passenger(&self, id: &crate::model::PassengerId) -> Option<&Passenger> {
        self.passengers.iter().find(|p| &p.id == id)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    params: ParamsFile,
    passengers: Vec<PassengerFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    pr_l: f64,
    pr_t: f64,
    rho: f64,
    alpha: f64,
    beta: f64,
    epsilon: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PassengerFile {
    id: String,
    distance_km: f64,
    expected_time_min: f64,
    theta: f64,
    omega: f64,
}

impl From<&Scenario> for ScenarioFile {
    fn from(scenario: &Scenario) -> Self {
        ScenarioFile {
            label: scenario.label.clone(),
            seed: scenario.seed,
            params: ParamsFile {
                pr_l: scenario.params.pr_l,
                pr_t: scenario.params.pr_t,
                rho: scenario.params.rho,
                alpha: scenario.params.alpha,
                beta: scenario.params.beta,
                epsilon: scenario.params.epsilon,
            },
            passengers: scenario
                .passengers
                .iter()
                .map(|p| PassengerFile {
                    id: p.id.as_str().to_owned(),
                    distance_km: p.travel.distance_km,
                    expected_time_min: p.travel.expected_time_min,
                    theta: p.theta,
                    omega: p.omega,
                })
                .collect(),
        }
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Scenario {
        Scenario {
            label: self.label,
            params: PricingParams {
                pr_l: self.params.pr_l,
                pr_t: self.params.pr_t,
                rho: self.params.rho,
                alpha: self.params.alpha,
                beta: self.params.beta,
                epsilon: self.params.epsilon,
            },
            passengers: self
                .passengers
                .into_iter()
                .map(|p| Passenger {
                    id: p.id.into(),
                    travel: Travel {
                        distance_km: p.distance_km,
                        expected_time_min: p.expected_time_min,
                    },
                    theta: p.theta,
                    omega: p.omega,
                })
                .collect(),
            driver: Driver::default(),
            seed: self.seed,
        }
    }
}

/// Parses and validates a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let file: ScenarioFile = table.try_into().map_err(|e: toml::de::Error| Error::Schema(e.to_string()))?;
    let scenario = file.into_scenario();
    scenario.validate()?;
    Ok(scenario)
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        context: format!("cannot read `{}`", path.display()),
        source,
    })?;
    parse_scenario(&text)
}

/// Renders the canonical TOML form of a scenario.
pub fn to_canonical_string(scenario: &Scenario) -> Result<String> {
    scenario.validate()?;
    toml::to_string(&ScenarioFile::from(scenario)).map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes the canonical TOML form to `path`.
pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = to_canonical_string(scenario)?;
    fs::write(path, text).map_err(|source| Error::Io {
        context: format!("cannot write `{}`", path.display()),
        source,
    })
}

/// Inclusive-bounds interval for one generated quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValueRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        ValueRange { lo, hi }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invariant(field, "bounds must be finite"));
        }
        if self.lo > self.hi {
            return Err(Error::invariant(field, "lower bound exceeds upper bound"));
        }
        Ok(())
    }
}

/// Ranges and fixed tariff used by [`generate_scenario`].
///
/// The default draw ranges (distance 1-20 km, time 5-40 min, sojourn 5-30
/// min, rate 0.1-2.0 per minute) are harness choices, configurable here.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub params: PricingParams,
    pub distance_km: ValueRange,
    pub expected_time_min: ValueRange,
    pub theta: ValueRange,
    pub omega: ValueRange,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            params: PricingParams {
                pr_l: 2.0,
                pr_t: 0.5,
                rho: 1.5,
                alpha: 1.8,
                beta: 0.8,
                epsilon: 1.3,
            },
            distance_km: ValueRange::new(1.0, 20.0),
            expected_time_min: ValueRange::new(5.0, 40.0),
            theta: ValueRange::new(5.0, 30.0),
            omega: ValueRange::new(0.1, 2.0),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.distance_km.validate("ranges.distance_km")?;
        self.expected_time_min.validate("ranges.expected_time_min")?;
        self.theta.validate("ranges.theta")?;
        self.omega.validate("ranges.omega")?;
        if self.distance_km.lo < 0.0 {
            return Err(Error::invariant("ranges.distance_km", "must be nonnegative"));
        }
        if self.expected_time_min.lo < 0.0 {
            return Err(Error::invariant("ranges.expected_time_min", "must be nonnegative"));
        }
        if self.theta.lo <= 0.0 {
            return Err(Error::invariant("ranges.theta", "must be positive"));
        }
        if self.omega.lo <= 0.0 {
            return Err(Error::invariant("ranges.omega", "must be positive"));
        }
        // The cheapest possible draw must still produce a positive fare.
        if self.params.pr_l * self.distance_km.lo + self.params.pr_t * self.expected_time_min.lo <= 0.0 {
            return Err(Error::invariant(
                "ranges",
                "the cheapest draw would have a zero base fare under these prices",
            ));
        }
        Ok(())
    }
}

/// Deterministically generates a scenario from a 64-bit seed.
///
/// Passenger `i` draws, in order: distance, expected time, theta, omega. Ids
/// are `p1..pN`, zero-padded to the width of `N`.
pub fn generate_scenario(seed: u64, n_passengers: usize, config: &GeneratorConfig) -> Result<Scenario> {
    config.validate()?;
    if n_passengers == 0 {
        return Err(Error::invariant("n_passengers", "at least one passenger is required"));
    }
    if n_passengers > MAX_PASSENGERS {
        return Err(Error::invariant(
            "n_passengers",
            format!("at most {MAX_PASSENGERS} passengers are supported"),
        ));
    }

    let mut rng = SeededRng::new(seed);
    let width = n_passengers.to_string().len();
    let mut passengers = Vec::with_capacity(n_passengers);
    for i in 1..=n_passengers {
        let distance_km = rng.uniform(config.distance_km.lo, config.distance_km.hi);
        let expected_time_min = rng.uniform(config.expected_time_min.lo, config.expected_time_min.hi);
        let theta = rng.uniform(config.theta.lo, config.theta.hi);
        let omega = rng.uniform(config.omega.lo, config.omega.hi);
        passengers.push(Passenger {
            id: format!("p{i:0width$}").into(),
            travel: Travel {
                distance_km,
                expected_time_min,
            },
            theta,
            omega,
        });
    }

    let scenario = Scenario {
        label: format!("gen-seed{seed}-n{n_passengers}"),
        params: config.params,
        passengers,
        driver: Driver::default(),
        seed: Some(seed),
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
label = "solo"

[params]
pr_l = 2.0
pr_t = 0.5
rho = 1.5
alpha = 1.8
beta = 0.8
epsilon = 1.3

[[passengers]]
id = "p1"
distance_km = 10.0
expected_time_min = 20.0
theta = 10.0
omega = 2.0
"#;

    #[test]
    fn minimal_file_parses() {
        let scenario = parse_scenario(MINIMAL).unwrap();
        assert_eq!(scenario.label, "solo");
        assert_eq!(scenario.passengers.len(), 1);
        assert_eq!(scenario.driver, Driver::default());
        assert_eq!(scenario.seed, None);
    }

    #[test]
    fn parse_schema_and_invariant_errors_are_distinct() {
        // Malformed TOML.
        let err = parse_scenario("label = ").unwrap_err();
        assert_eq!(err.code(), "parse");

        // Legal TOML, unknown field.
        let err = parse_scenario(&MINIMAL.replace("omega = 2.0", "omega = 2.0\nfoo = 1")).unwrap_err();
        assert_eq!(err.code(), "schema");

        // Legal file, broken invariant.
        let err = parse_scenario(&MINIMAL.replace("beta = 0.8", "beta = 1.6")).unwrap_err();
        assert_eq!(err.code(), "invariant");
        assert!(err.to_string().contains("C4"), "{err}");
    }

    #[test]
    fn beta_above_rho_names_c4() {
        let err = parse_scenario(&MINIMAL.replace("beta = 0.8", "beta = 1.55")).unwrap_err();
        assert!(err.to_string().contains("C4 violated: beta > rho"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let twice = format!(
            "{MINIMAL}\n[[passengers]]\nid = \"p1\"\ndistance_km = 4.0\nexpected_time_min = 4.0\ntheta = 20.0\nomega = 1.0\n"
        );
        let err = parse_scenario(&twice).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn canonical_round_trip_is_byte_stable() {
        let scenario = parse_scenario(MINIMAL).unwrap();
        let canonical = to_canonical_string(&scenario).unwrap();
        let reparsed = parse_scenario(&canonical).unwrap();
        assert_eq!(reparsed, scenario);
        assert_eq!(to_canonical_string(&reparsed).unwrap(), canonical);
    }

    #[test]
    fn generation_is_deterministic() {
        let config = GeneratorConfig::default();
        let a = generate_scenario(42, 5, &config).unwrap();
        let b = generate_scenario(42, 5, &config).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(43, 5, &config).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generation_rejects_bad_sizes() {
        let config = GeneratorConfig::default();
        assert!(generate_scenario(1, 0, &config).is_err());
        assert!(generate_scenario(1, MAX_PASSENGERS + 1, &config).is_err());
    }

    #[test]
    fn degenerate_ranges_pin_draws() {
        let config = GeneratorConfig {
            distance_km: ValueRange::new(7.0, 7.0),
            expected_time_min: ValueRange::new(11.0, 11.0),
            theta: ValueRange::new(9.0, 9.0),
            omega: ValueRange::new(0.5, 0.5),
            ..GeneratorConfig::default()
        };
        let scenario = generate_scenario(5, 3, &config).unwrap();
        for p in &scenario.passengers {
            assert_eq!(p.travel.distance_km, 7.0);
            assert_eq!(p.travel.expected_time_min, 11.0);
            assert_eq!(p.theta, 9.0);
            assert_eq!(p.omega, 0.5);
        }
    }

    #[test]
    fn generated_ids_are_zero_padded_and_sorted() {
        let scenario = generate_scenario(1, 12, &GeneratorConfig::default()).unwrap();
        assert_eq!(scenario.passengers[0].id.as_str(), "p01");
        assert_eq!(scenario.passengers[11].id.as_str(), "p12");
        let mut ids: Vec<_> = scenario.passengers.iter().map(|p| p.id.clone()).collect();
        let original = ids.clone();
        ids.sort();
        assert_eq!(ids, original);
    }

    #[test]
    fn invalid_ranges_rejected() {
        let config = GeneratorConfig {
            theta: ValueRange::new(10.0, 5.0),
            ..GeneratorConfig::default()
        };
        assert!(generate_scenario(1, 2, &config).is_err());

        let config = GeneratorConfig {
            omega: ValueRange::new(0.0, 1.0),
            ..GeneratorConfig::default()
        };
        assert!(generate_scenario(1, 2, &config).is_err());
    }

    #[test]
    fn generated_scenarios_round_trip_through_the_file_format() {
        let scenario = generate_scenario(9, 4, &GeneratorConfig::default()).unwrap();
        let text = to_canonical_string(&scenario).unwrap();
        let reparsed = parse_scenario(&text).unwrap();
        assert_eq!(reparsed, scenario);
        assert_eq!(reparsed.seed, Some(9));
    }
}
