//! Structured report documents shared by the command-line tool and the play service.
//!
//! Every document carries `schema_version`. Non-finite reals are written as the strings
//! `"infinite"`, `"-infinite"` and `"nan"`.

use serde::{Deserialize, Serialize};

use crate::analytics::{BestResponse, GameValue, ScoreStats, VarianceBreakdown};
use crate::linalg::SimplexVector;
use crate::simulator::{DeviationProbe, MonteCarloReport};
use crate::solver::{Certificate, EquilibriumResult, PureDeviations};

pub const SCHEMA_VERSION: u32 = 1;

/// `#[serde(with = ...)]` adapter writing non-finite `f64` as string tokens.
pub mod extended_f64 {
    use std::fmt;

    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("infinite")
        } else {
            s.serialize_str("-infinite")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"infinite\", \"-infinite\" or \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "infinite" => Ok(f64::INFINITY),
                    "-infinite" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Same as [`extended_f64`] for a `(low, high)` pair.
pub mod extended_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Ext(#[serde(with = "super::extended_f64")] f64);

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (Ext(v.0), Ext(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Ext, Ext)>::deserialize(d)?;
        Ok((a.0, b.0))
    }
}

/// A report wrapped with its schema version and producing command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema_version: u32,
    pub command: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Document<T> {
    pub fn new(command: impl Into<String>, body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            body,
        }
    }
}

impl<T: Serialize> Document<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    #[serde(with = "extended_f64")]
    pub tol: f64,
    pub equilibrium: EquilibriumResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureChoice {
    pub action: usize,
    pub value: GameValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationUnavailable {
    pub code: String,
    pub index: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub max_strategy: SimplexVector,
    pub min_strategy: SimplexVector,
    pub max_value: GameValue,
    pub min_value: GameValue,
    pub certificate: Option<Certificate>,
    pub certification_unavailable: Option<CertificationUnavailable>,
    /// Ratio bracket of the max player against the given min strategy.
    pub max_response: Option<BestResponse>,
    pub min_response: Option<BestResponse>,
    pub best_max_deviation: PureChoice,
    pub best_min_deviation: PureChoice,
    pub pure_deviations: PureDeviations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSide {
    pub stats: ScoreStats,
    pub breakdown: VarianceBreakdown,
    #[serde(with = "extended_f64")]
    pub mean_z: f64,
    #[serde(with = "extended_f64")]
    pub variance_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticComparison {
    /// Threshold mean that scales the single-collision formulas.
    pub mean_threshold: f64,
    pub max_value: GameValue,
    pub min_value: GameValue,
    /// Present when the single-collision variance formula applies (`w = 1`).
    pub max: Option<AnalyticSide>,
    pub min: Option<AnalyticSide>,
    #[serde(with = "extended_f64")]
    pub max_mean_z: f64,
    #[serde(with = "extended_f64")]
    pub min_mean_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub max_agent: String,
    pub min_agent: String,
    pub simulation: MonteCarloReport,
    pub analytic: Option<AnalyticComparison>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundRow {
    pub eps: f64,
    pub min_factor: f64,
    pub max_factor: f64,
    pub strategy_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandCricketReport {
    pub variant: u8,
    pub scores: Vec<f64>,
    pub rho_bracket: (f64, f64),
    pub value: GameValue,
    pub max_strategy: SimplexVector,
    pub min_strategy: SimplexVector,
    pub certificate: Certificate,
    pub error_bounds: Vec<ErrorBoundRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub challenger: String,
    pub probe: DeviationProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub code: String,
    pub message: String,
}

impl From<&crate::Error> for ErrorReport {
    fn from(e: &crate::Error) -> Self {
        Self {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Probe {
        #[serde(with = "extended_f64")]
        x: f64,
        #[serde(with = "extended_pair")]
        b: (f64, f64),
    }

    #[test]
    fn non_finite_tokens_round_trip() {
        let p = Probe {
            x: f64::INFINITY,
            b: (1.5, f64::NEG_INFINITY),
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"x":"infinite","b":[1.5,"-infinite"]}"#);
        assert_eq!(serde_json::from_str::<Probe>(&s).unwrap(), p);
    }

    #[test]
    fn document_has_schema_version() {
        let d = Document::new("noop", ErrorReport {
            code: "X".into(),
            message: "m".into(),
        });
        let v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], "noop");
        assert_eq!(v["code"], "X");
    }
}
