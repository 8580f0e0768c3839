//! Plain-text rendering of reports.

use std::fmt::Write;

use ruc_core::linalg::SimplexVector;
use ruc_core::report::{
    AnalyticSide, HandCricketReport, SimulateReport, SolveReport, VerifyReport,
};
use ruc_core::simulator::EmpiricalStats;
use ruc_core::solver::{Certificate, CertificateKind};

fn vector(v: &SimplexVector) -> String {
    let parts: Vec<String> = v.as_slice().iter().map(|w| format!("{w:.9}")).collect();
    format!("[{}]", parts.join(", "))
}

fn bracket(b: Option<(f64, f64)>) -> String {
    match b {
        Some((lo, hi)) => format!("  [{lo:.12}, {hi:.12}]"),
        None => String::new(),
    }
}

fn certificate(out: &mut String, c: &Certificate) {
    match &c.kind {
        CertificateKind::ExactTrivial => {
            let _ = writeln!(out, "certificate:   exact ({})", c.description);
        }
        CertificateKind::RatioCertified {
            eps,
            bracket_eps,
            max_bracket,
            min_bracket,
        } => {
            let _ = writeln!(out, "certificate:   eps = {eps:.3e} (bracket eps {bracket_eps:.3e})");
            let _ = writeln!(out, "  max bracket: [{:.12}, {:.12}]", max_bracket.0, max_bracket.1);
            let _ = writeln!(out, "  min bracket: [{:.12}, {:.12}]", min_bracket.0, min_bracket.1);
        }
    }
}

pub fn solve(r: &SolveReport) -> String {
    let e = &r.equilibrium;
    let mut out = String::new();
    let _ = writeln!(out, "actions:       {}", r.n);
    let _ = writeln!(out, "branch:        {}", serde_json::to_value(e.branch).unwrap().as_str().unwrap());
    let _ = writeln!(out, "max value:     {}{}", e.max_value, bracket(e.max_value_bracket));
    let _ = writeln!(out, "min value:     {}{}", e.min_value, bracket(e.min_value_bracket));
    let _ = writeln!(out, "max strategy:  {}", vector(&e.max_strategy));
    let _ = writeln!(out, "min strategy:  {}", vector(&e.min_strategy));
    certificate(&mut out, &e.certificate);
    let _ = writeln!(out, "uniqueness:    {}", serde_json::to_value(e.uniqueness).unwrap().as_str().unwrap());
    if let Some(c) = &e.comet {
        let _ = writeln!(out, "comet:         delta = {:.6e}, tail mass = {:.6e}, {} source components", c.delta, c.beta, c.source_roots.len());
    }
    out
}

pub fn verify(r: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "max value:     {}", r.max_value);
    let _ = writeln!(out, "min value:     {}", r.min_value);
    match (&r.certificate, &r.certification_unavailable) {
        (Some(c), _) => certificate(&mut out, c),
        (None, Some(u)) => {
            let _ = writeln!(out, "certificate:   unavailable [{}] {}", u.code, u.message);
        }
        (None, None) => {}
    }
    let _ = writeln!(
        out,
        "best max deviation: action {} -> {}",
        r.best_max_deviation.action, r.best_max_deviation.value
    );
    let _ = writeln!(
        out,
        "best min deviation: action {} -> {}",
        r.best_min_deviation.action, r.best_min_deviation.value
    );
    let _ = writeln!(out, "action  max payoff      min cost");
    for (k, (p, c)) in r
        .pure_deviations
        .max_player
        .iter()
        .zip(&r.pure_deviations.min_player)
        .enumerate()
    {
        let _ = writeln!(out, "{k:>6}  {:<14}  {}", p.to_string(), c);
    }
    out
}

fn stats_line(out: &mut String, name: &str, s: &EmpiricalStats) {
    let _ = writeln!(
        out,
        "{name:<10} mean {:.6} ± {:.2e}   variance {:.6} ± {:.2e}",
        s.mean, s.std_error, s.variance, s.variance_std_error
    );
}

fn side_line(out: &mut String, name: &str, s: &Option<AnalyticSide>) {
    if let Some(s) = s {
        let _ = writeln!(
            out,
            "{name:<10} analytic mean {:.6} (z {:+.2})   variance {:.6} (z {:+.2})",
            s.stats.mean, s.mean_z, s.stats.variance, s.variance_z
        );
    }
}

pub fn simulate(r: &SimulateReport) -> String {
    let s = &r.simulation;
    let mut out = String::new();
    let _ = writeln!(out, "agents:    max {} vs min {}", r.max_agent, r.min_agent);
    let _ = writeln!(
        out,
        "trials:    {} (seed {}, round cap {}, rule {})",
        s.trials,
        s.seed,
        s.max_rounds,
        serde_json::to_string(&s.rule).unwrap()
    );
    stats_line(&mut out, "max total", &s.max_total);
    stats_line(&mut out, "min total", &s.min_total);
    stats_line(&mut out, "rounds", &s.rounds);
    let _ = writeln!(out, "truncated: {:.3e}", s.truncation_rate);
    if let Some(a) = &r.analytic {
        let _ = writeln!(
            out,
            "analytic:  max {} (z {:+.2}), min {} (z {:+.2}), mean threshold {}",
            a.max_value, a.max_mean_z, a.min_value, a.min_mean_z, a.mean_threshold
        );
        side_line(&mut out, "max total", &a.max);
        side_line(&mut out, "min total", &a.min);
    }
    out
}

pub fn handcricket(r: &HandCricketReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "variant:       {}", r.variant);
    let _ = writeln!(out, "scores:        {:?}", r.scores);
    let _ = writeln!(out, "value:         {}", r.value);
    let _ = writeln!(out, "rho bracket:   [{:.12}, {:.12}]", r.rho_bracket.0, r.rho_bracket.1);
    let _ = writeln!(out, "batter (max):  {}", vector(&r.max_strategy));
    let _ = writeln!(out, "bowler (min):  {}", vector(&r.min_strategy));
    certificate(&mut out, &r.certificate);
    if !r.error_bounds.is_empty() {
        let _ = writeln!(out, "eps          min factor    max factor    strategy rel err");
        for row in &r.error_bounds {
            let _ = writeln!(
                out,
                "{:<11.3e}  {:<12.9}  {:<12.9}  {:.3e}",
                row.eps, row.min_factor, row.max_factor, row.strategy_rel_err
            );
        }
    }
    out
}
