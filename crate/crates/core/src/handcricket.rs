//! Hand cricket as an RUC game. Each action `i` is worth `s_i` runs; the batter (max)
//! scores the runs of the action they show until the bowler (min) shows the same one.
//!
//! Variant 1 pays the batter's own `s_i`. Variant 2 adds a defensive action `n` that
//! scores whatever the bowler showed.

use serde::{Deserialize, Serialize};

use crate::analytics::GameValue;
use crate::error::{Error, Result};
use crate::linalg::{PayoffMatrix, SimplexVector};
use crate::solver::{certify_epsilon, Branch, Certificate, EquilibriumResult, Uniqueness};

/// Positive run values, kept in the caller's order together with the sorting permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreProfile {
    scores: Vec<f64>,
    /// `order[k]` is the caller index of the `k`-th smallest score.
    order: Vec<usize>,
}

impl ScoreProfile {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::TooFewActions {
                required: 1,
                found: 0,
            });
        }
        if let Some(&bad) = scores.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::OutOfRange {
                name: "score",
                value: bad,
            });
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(i.cmp(&j)));
        Ok(Self { scores, order })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores in the caller's order.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn sorted(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.scores[i]).collect()
    }

    /// `r = Σ s_i`
    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.scores[self.order[0]]
    }

    pub fn max(&self) -> f64 {
        self.scores[*self.order.last().unwrap()]
    }
}

/// `A[i, j] = s_i` off the diagonal, 0 on it.
pub fn v1_payoff_matrix(s: &ScoreProfile) -> PayoffMatrix {
    let sc = s.scores();
    PayoffMatrix::from_fn(s.len(), |i, j| if i == j { 0.0 } else { sc[i] })
        .expect("scores are positive")
}

/// `g(z) = Σ s_i / (z + s_i)`
pub fn v1_g(s: &ScoreProfile, z: f64) -> f64 {
    s.scores().iter().map(|&si| si / (z + si)).sum()
}

fn require_two(s: &ScoreProfile) -> Result<()> {
    if s.len() < 2 {
        return Err(Error::TooFewActions {
            required: 2,
            found: s.len(),
        });
    }
    Ok(())
}

/// Bisection bracket on the root of `g(z) = 1`, started from `[r − s_n, r − s_1]` and
/// stopped once its width is at most `tol · (r − s_n)`.
pub fn v1_rho(s: &ScoreProfile, tol: f64) -> Result<(f64, f64)> {
    require_two(s)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::OutOfRange {
            name: "tol",
            value: tol,
        });
    }
    let r = s.total();
    let (mut lo, mut hi) = (r - s.max(), r - s.min());
    if s.min() == s.max() {
        return Ok((lo, lo));
    }
    let target = tol * lo;
    while hi - lo > target {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if v1_g(s, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// `x_i ∝ ρ̂ / ((n−1)(ρ̂ + s_i))` and `y_j ∝ s_j / (ρ̂ + s_j)`, renormalized.
pub fn v1_strategies(s: &ScoreProfile, rho_hat: f64) -> Result<(SimplexVector, SimplexVector)> {
    require_two(s)?;
    if !(rho_hat > 0.0 && rho_hat.is_finite()) {
        return Err(Error::OutOfRange {
            name: "rho_hat",
            value: rho_hat,
        });
    }
    let n1 = (s.len() - 1) as f64;
    let x = s.scores().iter().map(|&si| rho_hat / (n1 * (rho_hat + si))).collect();
    let y = s.scores().iter().map(|&sj| sj / (rho_hat + sj)).collect();
    Ok((SimplexVector::normalized(x)?, SimplexVector::normalized(y)?))
}

/// Closed-form strategies at the bisection midpoint, certified against the variant-1
/// matrix.
pub fn v1_equilibrium(s: &ScoreProfile, tol: f64) -> Result<EquilibriumResult> {
    let (lo, hi) = v1_rho(s, tol)?;
    let rho = 0.5 * (lo + hi);
    let (x, y) = v1_strategies(s, rho)?;
    let a = v1_payoff_matrix(s);
    let certificate = certify_epsilon(&a, &a, &x, &y)?;
    Ok(EquilibriumResult {
        max_strategy: x,
        min_strategy: y,
        max_value: GameValue::Finite(rho),
        min_value: GameValue::Finite(rho),
        max_value_bracket: Some((lo, hi)),
        min_value_bracket: Some((lo, hi)),
        certificate,
        uniqueness: Uniqueness::Unique,
        branch: Branch::Irreducible,
        comet: None,
    })
}

/// Payoff factors and strategy relative error when `ρ̂` is within `ε (r − s_n)` of `ρ`:
/// `((1−3ε)/(1+ε), (1+ε)/(1−3ε), 2ε/(1−ε))`.
pub fn v1_error_bound(eps: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..1.0 / 3.0).contains(&eps) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
        });
    }
    Ok((
        (1.0 - 3.0 * eps) / (1.0 + eps),
        (1.0 + eps) / (1.0 - 3.0 * eps),
        2.0 * eps / (1.0 - eps),
    ))
}

/// `(n+1) × (n+1)`: rows `0..n` as in variant 1, the last row pays the bowler's `s_j`.
pub fn v2_payoff_matrix(s: &ScoreProfile) -> PayoffMatrix {
    let n = s.len();
    let sc = s.scores();
    PayoffMatrix::from_fn(n + 1, |i, j| {
        if i == j {
            0.0
        } else if i < n {
            sc[i]
        } else {
            sc[j]
        }
    })
    .expect("scores are positive")
}

/// Exact equilibrium of variant 2: uniform batter, `y_j = s_j / (r + s_j)`, value `r`.
pub fn v2_equilibrium(s: &ScoreProfile) -> Result<EquilibriumResult> {
    let n = s.len();
    let r = s.total();
    let mut y: Vec<f64> = s.scores().iter().map(|&sj| sj / (r + sj)).collect();
    let rest = 1.0 - y.iter().sum::<f64>();
    y.push(rest);
    let x = SimplexVector::uniform(n + 1);
    let y = SimplexVector::new(y)?;

    let a = v2_payoff_matrix(s);
    let check = |v: Vec<f64>, w: &SimplexVector, side: &str| -> Result<()> {
        for (k, (&lhs, &wk)) in v.iter().zip(w.as_slice()).enumerate() {
            if (lhs - r * wk).abs() > 1e-12 * r {
                return Err(Error::NumericalCheck(format!(
                    "{side} eigen-identity off at {k}: {lhs} vs {}",
                    r * wk
                )));
            }
        }
        Ok(())
    };
    check(a.mul_vec(y.as_slice()), &y, "Ay = ry")?;
    check(a.tmul_vec(x.as_slice()), &x, "A'x = rx")?;

    Ok(EquilibriumResult {
        max_strategy: x,
        min_strategy: y,
        max_value: GameValue::Finite(r),
        min_value: GameValue::Finite(r),
        max_value_bracket: Some((r, r)),
        min_value_bracket: Some((r, r)),
        certificate: Certificate {
            kind: crate::solver::CertificateKind::ExactTrivial,
            description: "closed form; Ay = ry and A'x = rx verified to 1e-12".into(),
        },
        uniqueness: Uniqueness::Unique,
        branch: Branch::Irreducible,
        comet: None,
    })
}
