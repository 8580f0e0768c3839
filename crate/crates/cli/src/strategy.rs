//! Agent specifications accepted by `ruc simulate`.

use std::path::PathBuf;
use std::str::FromStr;

use ruc_core::analytics::Role;
use ruc_core::linalg::SimplexVector;
use ruc_core::simulator::StrategyAgent;
use ruc_core::solver::EquilibriumResult;

use crate::{load_vector, CliError, CliResult};

/// Tolerance on the sum of a strategy read from a file.
pub const FILE_SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum AgentSpec {
    /// The equilibrium strategy for the agent's role.
    Perron,
    Uniform,
    Pure(usize),
    File(PathBuf),
    CopyLast,
    Cycle,
    Anti,
}

impl FromStr for AgentSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = || CliError::Usage(format!(
            "unknown agent {s:?}; expected perron, uniform, pure:I, file:PATH, copy-last, cycle or anti"
        ));
        Ok(match s.split_once(':') {
            None => match s {
                "perron" | "equilibrium" => AgentSpec::Perron,
                "uniform" => AgentSpec::Uniform,
                "copy-last" => AgentSpec::CopyLast,
                "cycle" => AgentSpec::Cycle,
                "anti" | "anti-coordinate" => AgentSpec::Anti,
                _ => return Err(bad()),
            },
            Some(("pure", i)) => AgentSpec::Pure(
                i.parse()
                    .map_err(|_| CliError::Usage(format!("bad action index in {s:?}")))?,
            ),
            Some(("file", p)) if !p.is_empty() => AgentSpec::File(PathBuf::from(p)),
            Some(_) => return Err(bad()),
        })
    }
}

impl AgentSpec {
    pub fn needs_equilibrium(&self) -> bool {
        matches!(self, AgentSpec::Perron)
    }

    pub fn build(&self, n: usize, role: Role, eq: Option<&EquilibriumResult>) -> CliResult<StrategyAgent> {
        let stationary = |v: SimplexVector, label: String| Ok(StrategyAgent::stationary_labeled(v, label));
        match self {
            AgentSpec::Perron => {
                let eq = eq.expect("equilibrium computed for perron agents");
                let v = match role {
                    Role::Max => eq.max_strategy.clone(),
                    Role::Min => eq.min_strategy.clone(),
                };
                stationary(v, "perron".into())
            }
            AgentSpec::Uniform => stationary(SimplexVector::uniform(n), "uniform".into()),
            AgentSpec::Pure(i) => {
                if *i >= n {
                    return Err(ruc_core::Error::ScriptedActionOutOfRange { action: *i, n }.into());
                }
                stationary(SimplexVector::pure(n, *i), format!("pure:{i}"))
            }
            AgentSpec::File(path) => {
                let v = SimplexVector::within(load_vector(path)?, FILE_SIMPLEX_TOL)?;
                if v.len() != n {
                    return Err(ruc_core::Error::DimensionMismatch {
                        expected: n,
                        found: v.len(),
                    }
                    .into());
                }
                stationary(v, format!("file:{}", path.display()))
            }
            AgentSpec::CopyLast => Ok(StrategyAgent::copy_last()),
            AgentSpec::Cycle => Ok(StrategyAgent::cycle()),
            AgentSpec::Anti => Ok(StrategyAgent::anti_coordinate()),
        }
    }
}
