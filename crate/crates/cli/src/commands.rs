//! The report-producing subcommands.

use std::path::Path;

use ruc_core::analytics::{
    best_response_bracket, collision_probability, expected_score, score_stats,
    threshold_mean_value, variance_breakdown, GameValue, Role,
};
use ruc_core::handcricket::{
    v1_equilibrium, v1_error_bound, v2_equilibrium, ScoreProfile,
};
use ruc_core::linalg::{PayoffMatrix, SimplexVector};
use ruc_core::report::{
    AnalyticComparison, AnalyticSide, CertificationUnavailable, ErrorBoundRow, HandCricketReport,
    PureChoice, SimulateReport, SolveReport, VerifyReport,
};
use ruc_core::simulator::{
    default_max_rounds, monte_carlo, CollisionRule, EmpiricalStats, MonteCarloConfig,
    StrategyAgent,
};
use ruc_core::solver::{certify_pair, pure_deviations, solve};
use ruc_core::Error;

use crate::render;
use crate::strategy::{AgentSpec, FILE_SIMPLEX_TOL};
use crate::{load_matrix, load_vector, CliResult, Output};

/// ε values listed in the variant-1 error-bound table, after the realized one.
pub const ERROR_TABLE: [f64; 5] = [1e-6, 1e-4, 1e-3, 1e-2, 1e-1];

fn load_pair(a: &Path, b: Option<&Path>) -> CliResult<(PayoffMatrix, PayoffMatrix)> {
    let ma = load_matrix(a)?;
    let mb = match b {
        Some(b) => load_matrix(b)?,
        None => ma.clone(),
    };
    if ma.n() != mb.n() {
        return Err(Error::DimensionMismatch {
            expected: ma.n(),
            found: mb.n(),
        }
        .into());
    }
    Ok((ma, mb))
}

pub fn solve_report(a: &PayoffMatrix, b: &PayoffMatrix, tol: f64) -> CliResult<SolveReport> {
    Ok(SolveReport {
        n: a.n(),
        tol,
        equilibrium: solve(a, b, tol)?,
    })
}

pub fn cmd_solve(a: &Path, b: Option<&Path>, tol: f64) -> CliResult<Output> {
    let (ma, mb) = load_pair(a, b)?;
    let report = solve_report(&ma, &mb, tol)?;
    let human = render::solve(&report);
    Ok(Output::new("solve", report, human))
}

fn best_choice(values: &[GameValue], role: Role) -> PureChoice {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        let (cur, top) = (v.to_f64(), values[best].to_f64());
        let better = match role {
            Role::Max => cur > top,
            Role::Min => cur < top,
        };
        if better {
            best = k;
        }
    }
    PureChoice {
        action: best,
        value: values[best],
    }
}

pub fn verify_report(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    x: &SimplexVector,
    y: &SimplexVector,
) -> CliResult<VerifyReport> {
    let n = a.n();
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.n(),
        }
        .into());
    }
    for v in [x, y] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            }
            .into());
        }
    }
    let (certificate, certification_unavailable) = match certify_pair(a, b, x, y) {
        Ok(c) => (Some(c), None),
        Err(e) => {
            let index = match e {
                Error::NotFullSupport { index } => Some(index),
                _ => None,
            };
            (
                None,
                Some(CertificationUnavailable {
                    code: e.code().into(),
                    index,
                    message: e.to_string(),
                }),
            )
        }
    };
    let deviations = pure_deviations(a, b, x, y)?;
    Ok(VerifyReport {
        n,
        max_strategy: x.clone(),
        min_strategy: y.clone(),
        max_value: expected_score(a, x, y)?,
        min_value: expected_score(b, x, y)?,
        certificate,
        certification_unavailable,
        max_response: best_response_bracket(a, y, Role::Max).ok(),
        min_response: best_response_bracket(b, x, Role::Min).ok(),
        best_max_deviation: best_choice(&deviations.max_player, Role::Max),
        best_min_deviation: best_choice(&deviations.min_player, Role::Min),
        pure_deviations: deviations,
    })
}

pub fn cmd_verify(a: &Path, b: &Path, x: &Path, y: &Path) -> CliResult<Output> {
    let (ma, mb) = load_pair(a, Some(b))?;
    let xs = SimplexVector::within(load_vector(x)?, FILE_SIMPLEX_TOL)?;
    let ys = SimplexVector::within(load_vector(y)?, FILE_SIMPLEX_TOL)?;
    let report = verify_report(&ma, &mb, &xs, &ys)?;
    let human = render::verify(&report);
    Ok(Output::new("verify", report, human))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions {
    pub tol: f64,
    pub seed: u64,
    pub trials: u64,
    pub rule: CollisionRule,
    /// Replaces the default round cap.
    pub max_rounds: Option<u64>,
}

/// `(empirical − analytic) / standard error`, 0 when both agree exactly.
fn z_score(empirical: f64, se: f64, analytic: f64) -> f64 {
    let gap = empirical - analytic;
    if !analytic.is_finite() {
        f64::NAN
    } else if se > 0.0 {
        gap / se
    } else if gap.abs() <= 1e-12 * analytic.abs().max(1.0) {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    }
}

/// Default cap: enough rounds for about 50 expected collisions per required collision.
fn round_cap(max: &StrategyAgent, min: &StrategyAgent, rule: CollisionRule) -> u64 {
    let base = match (max.stationary_dist(), min.stationary_dist()) {
        (Some(x), Some(y)) => default_max_rounds(x, y),
        (Some(d), None) | (None, Some(d)) => {
            // a scripted opponent collides with probability at least the smallest weight
            let floor = d.min_weight();
            if floor > 0.0 {
                10_000u64.max((50.0 / floor).ceil() as u64)
            } else {
                10_000
            }
        }
        (None, None) => 10_000,
    };
    let scale = rule.mean_threshold().ceil().max(1.0);
    (base as f64 * scale).min(u64::MAX as f64 / 2.0) as u64
}

fn analytic_side(
    c: &PayoffMatrix,
    x: &SimplexVector,
    y: &SimplexVector,
    empirical: &EmpiricalStats,
) -> CliResult<Option<AnalyticSide>> {
    if collision_probability(x, y) <= 0.0 {
        return Ok(None);
    }
    let stats = score_stats(c, x, y)?;
    Ok(Some(AnalyticSide {
        stats,
        breakdown: variance_breakdown(c, x, y)?,
        mean_z: z_score(empirical.mean, empirical.std_error, stats.mean),
        variance_z: z_score(empirical.variance, empirical.variance_std_error, stats.variance),
    }))
}

pub fn simulate_report(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    max_spec: &AgentSpec,
    min_spec: &AgentSpec,
    opts: &SimulateOptions,
) -> CliResult<SimulateReport> {
    let n = a.n();
    let eq = if max_spec.needs_equilibrium() || min_spec.needs_equilibrium() {
        Some(solve(a, b, opts.tol)?)
    } else {
        None
    };
    let max = max_spec.build(n, Role::Max, eq.as_ref())?;
    let min = min_spec.build(n, Role::Min, eq.as_ref())?;
    let max_rounds = opts.max_rounds.unwrap_or_else(|| round_cap(&max, &min, opts.rule));
    let cfg = MonteCarloConfig::new(opts.trials, opts.seed, max_rounds).with_rule(opts.rule);
    let sim = monte_carlo(a, b, &max, &min, &cfg)?;

    let analytic = match (max.stationary_dist(), min.stationary_dist()) {
        (Some(x), Some(y)) => {
            let mean_threshold = opts.rule.mean_threshold();
            let max_value = threshold_mean_value(a, x, y, mean_threshold)?;
            let min_value = threshold_mean_value(b, x, y, mean_threshold)?;
            let single = opts.rule == CollisionRule::Fixed { w: 1 };
            Some(AnalyticComparison {
                mean_threshold,
                max_value,
                min_value,
                max: if single { analytic_side(a, x, y, &sim.max_total)? } else { None },
                min: if single { analytic_side(b, x, y, &sim.min_total)? } else { None },
                max_mean_z: z_score(sim.max_total.mean, sim.max_total.std_error, max_value.to_f64()),
                min_mean_z: z_score(sim.min_total.mean, sim.min_total.std_error, min_value.to_f64()),
            })
        }
        _ => None,
    };
    Ok(SimulateReport {
        max_agent: max.label.clone(),
        min_agent: min.label.clone(),
        simulation: sim,
        analytic,
    })
}

pub fn cmd_simulate(
    a: &Path,
    b: Option<&Path>,
    max_agent: &str,
    min_agent: &str,
    opts: &SimulateOptions,
) -> CliResult<Output> {
    let (ma, mb) = load_pair(a, b)?;
    let max_spec: AgentSpec = max_agent.parse()?;
    let min_spec: AgentSpec = min_agent.parse()?;
    let report = simulate_report(&ma, &mb, &max_spec, &min_spec, opts)?;
    let human = render::simulate(&report);
    Ok(Output::new("simulate", report, human))
}

pub fn handcricket_report(variant: u8, scores: &[f64], tol: f64) -> CliResult<HandCricketReport> {
    let s = ScoreProfile::new(scores.to_vec())?;
    let (eq, bracket, error_bounds) = match variant {
        1 => {
            let eq = v1_equilibrium(&s, tol)?;
            let bracket = eq.max_value_bracket.expect("variant 1 reports its bracket");
            let scale = s.total() - s.max();
            let realized = (bracket.1 - bracket.0) / scale;
            let mut rows = Vec::new();
            for eps in std::iter::once(realized).chain(ERROR_TABLE) {
                let (min_factor, max_factor, strategy_rel_err) = v1_error_bound(eps)?;
                rows.push(ErrorBoundRow {
                    eps,
                    min_factor,
                    max_factor,
                    strategy_rel_err,
                });
            }
            (eq, bracket, rows)
        }
        2 => {
            let eq = v2_equilibrium(&s)?;
            let r = s.total();
            (eq, (r, r), Vec::new())
        }
        v => {
            return Err(Error::OutOfRange {
                name: "variant",
                value: v as f64,
            }
            .into())
        }
    };
    Ok(HandCricketReport {
        variant,
        scores: scores.to_vec(),
        rho_bracket: bracket,
        value: eq.max_value,
        max_strategy: eq.max_strategy,
        min_strategy: eq.min_strategy,
        certificate: eq.certificate,
        error_bounds,
    })
}

pub fn cmd_handcricket(variant: u8, scores: &[f64], tol: f64) -> CliResult<Output> {
    let report = handcricket_report(variant, scores, tol)?;
    let human = render::handcricket(&report);
    Ok(Output::new("handcricket", report, human))
}
