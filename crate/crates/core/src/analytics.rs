//! Closed-form payoffs of RUC games: expected totals, exact variances, best-response
//! brackets against stationary opponents, truncated-horizon recursion and
//! multi-collision scaling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{ratio_bracket, ratio_bracket_left, PayoffMatrix, SimplexVector};

/// Expected total payoff of a stationary pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GameValue {
    Finite(f64),
    /// No collision ever happens, but the per-round payoff is positive.
    Infinite,
    /// No collision ever happens and nothing is ever paid.
    ZeroDegenerate,
}

impl GameValue {
    /// Numeric view: `∞` for [`GameValue::Infinite`], `0` for the degenerate case.
    pub fn to_f64(self) -> f64 {
        match self {
            GameValue::Finite(v) => v,
            GameValue::Infinite => f64::INFINITY,
            GameValue::ZeroDegenerate => 0.0,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            GameValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == GameValue::Infinite
    }

    /// Scales by a collision threshold `w`; a zero threshold is the empty game.
    pub fn times(self, w: f64) -> GameValue {
        if w == 0.0 {
            return GameValue::Finite(0.0);
        }
        match self {
            GameValue::Finite(v) => GameValue::Finite(w * v),
            other => other,
        }
    }
}

impl fmt::Display for GameValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameValue::Finite(v) => write!(f, "{v}"),
            GameValue::Infinite => f.write_str("infinite"),
            GameValue::ZeroDegenerate => f.write_str("0 (no collision, no payoff)"),
        }
    }
}

impl Serialize for GameValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GameValue::Finite(v) => s.serialize_f64(*v),
            GameValue::Infinite => s.serialize_str("infinite"),
            GameValue::ZeroDegenerate => s.serialize_str("zero-degenerate"),
        }
    }
}

impl<'de> Deserialize<'de> for GameValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = GameValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"infinite\" or \"zero-degenerate\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<GameValue, E> {
                Ok(GameValue::Finite(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<GameValue, E> {
                Ok(GameValue::Finite(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<GameValue, E> {
                Ok(GameValue::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<GameValue, E> {
                match v {
                    "infinite" => Ok(GameValue::Infinite),
                    "zero-degenerate" => Ok(GameValue::ZeroDegenerate),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[serde(alias = "batter")]
    Max,
    #[serde(alias = "bowler")]
    Min,
}

impl Role {
    pub fn opponent(self) -> Role {
        match self {
            Role::Max => Role::Min,
            Role::Min => Role::Max,
        }
    }
}

fn check_dims(c: &PayoffMatrix, x: &SimplexVector, y: &SimplexVector) -> Result<()> {
    for v in [x, y] {
        if v.len() != c.n() {
            return Err(Error::DimensionMismatch {
                expected: c.n(),
                found: v.len(),
            });
        }
    }
    Ok(())
}

/// Per-round collision probability `xᵀy`.
pub fn collision_probability(x: &SimplexVector, y: &SimplexVector) -> f64 {
    x.dot(y)
}

/// `xᵀCy / xᵀy`, or the infinite / degenerate case when the supports are disjoint.
pub fn expected_score(c: &PayoffMatrix, x: &SimplexVector, y: &SimplexVector) -> Result<GameValue> {
    check_dims(c, x, y)?;
    let p = collision_probability(x, y);
    let per_round = c.bilinear(x.as_slice(), y.as_slice());
    Ok(if p > 0.0 {
        GameValue::Finite(per_round / p)
    } else if per_round > 0.0 {
        GameValue::Infinite
    } else {
        GameValue::ZeroDegenerate
    })
}

fn finite_mean(c: &PayoffMatrix, x: &SimplexVector, y: &SimplexVector) -> Result<(f64, f64)> {
    check_dims(c, x, y)?;
    let p = collision_probability(x, y);
    if !(p > 0.0) {
        return Err(Error::ZeroCollisionProbability);
    }
    Ok((c.bilinear(x.as_slice(), y.as_slice()) / p, p))
}

/// Variance of the total payoff: `Var((C − μI)[X, Y]) / xᵀy` with `X ~ x`, `Y ~ y`.
pub fn score_variance(c: &PayoffMatrix, x: &SimplexVector, y: &SimplexVector) -> Result<f64> {
    let (mu, p) = finite_mean(c, x, y)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let n = c.n();
    let mut first = 0.0;
    let mut second = 0.0;
    for i in 0..n {
        if xs[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let w = xs[i] * ys[j];
            if w == 0.0 {
                continue;
            }
            let d = if i == j { c.get(i, j) - mu } else { c.get(i, j) };
            first += w * d;
            second += w * d * d;
        }
    }
    Ok(((second - first * first) / p).max(0.0))
}

/// Three addends of the total-payoff variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBreakdown {
    /// `μ_B²`, with `μ_B` the mean payoff from off-diagonal entries.
    pub offdiag_mean_sq: f64,
    /// `xᵀ(B∘B)y / xᵀy` over the off-diagonal part `B`.
    pub offdiag_second_moment: f64,
    /// `Σ x_i y_i (C_ii − μ_D)² / xᵀy`.
    pub diagonal_term: f64,
}

impl VarianceBreakdown {
    pub fn total(&self) -> f64 {
        self.offdiag_mean_sq + self.offdiag_second_moment + self.diagonal_term
    }
}

pub fn variance_breakdown(
    c: &PayoffMatrix,
    x: &SimplexVector,
    y: &SimplexVector,
) -> Result<VarianceBreakdown> {
    let (_, p) = finite_mean(c, x, y)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let n = c.n();
    let mut off_first = 0.0;
    let mut off_second = 0.0;
    let mut diag_first = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = xs[i] * ys[j];
            if w == 0.0 {
                continue;
            }
            let v = c.get(i, j);
            if i == j {
                diag_first += w * v;
            } else {
                off_first += w * v;
                off_second += w * v * v;
            }
        }
    }
    let mu_off = off_first / p;
    let mu_diag = diag_first / p;
    let diag_dev: f64 = (0..n)
        .map(|i| {
            let d = c.get(i, i) - mu_diag;
            xs[i] * ys[i] * d * d
        })
        .sum();
    Ok(VarianceBreakdown {
        offdiag_mean_sq: mu_off * mu_off,
        offdiag_second_moment: off_second / p,
        diagonal_term: diag_dev / p,
    })
}

/// Analytic moments of a stationary pair with positive collision probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub mean: f64,
    pub variance: f64,
    pub collision_probability: f64,
    /// `1 / xᵀy`
    pub expected_rounds: f64,
}

pub fn score_stats(c: &PayoffMatrix, x: &SimplexVector, y: &SimplexVector) -> Result<ScoreStats> {
    let (mean, p) = finite_mean(c, x, y)?;
    Ok(ScoreStats {
        mean,
        variance: score_variance(c, x, y)?,
        collision_probability: p,
        expected_rounds: 1.0 / p,
    })
}

/// Range of payoffs any strategy (stationary or not) can achieve against a full-support
/// stationary opponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub alpha: f64,
    pub beta: f64,
    /// Argmax of the ratios for the max player, argmin for the min player.
    pub best_pure_action: usize,
}

impl BestResponse {
    /// Payoff of the best pure response.
    pub fn best_value(&self, role: Role) -> f64 {
        match role {
            Role::Max => self.beta,
            Role::Min => self.alpha,
        }
    }
}

/// For `role = Max` the ratios are `(Mŷ)_i / ŷ_i`; for `role = Min` they are `(Mᵀx̂)_j / x̂_j`.
pub fn best_response_bracket(
    m: &PayoffMatrix,
    opponent: &SimplexVector,
    role: Role,
) -> Result<BestResponse> {
    Ok(match role {
        Role::Max => {
            let b = ratio_bracket(m, opponent)?;
            BestResponse {
                alpha: b.alpha,
                beta: b.beta,
                best_pure_action: b.argmax,
            }
        }
        Role::Min => {
            let b = ratio_bracket_left(m, opponent)?;
            BestResponse {
                alpha: b.alpha,
                beta: b.beta,
                best_pure_action: b.argmin,
            }
        }
    })
}

/// A history-dependent strategy truncated at a finite depth.
///
/// The root distribution is played in the current round; after the player chose `own`
/// and the opponent chose `opp` (with no collision) play continues with
/// `child(own, opp)`. Subtrees are shared through `Arc`, so stationary strategies of
/// large depth stay small.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonStrategy {
    depth: usize,
    root: SimplexVector,
    children: BTreeMap<(usize, usize), Arc<HorizonStrategy>>,
}

impl HorizonStrategy {
    pub fn leaf(root: SimplexVector) -> Self {
        Self {
            depth: 0,
            root,
            children: BTreeMap::new(),
        }
    }

    /// Requires a child for every `own` in the root support and every `opp != own`,
    /// all of the same depth.
    pub fn node(
        root: SimplexVector,
        children: BTreeMap<(usize, usize), Arc<HorizonStrategy>>,
    ) -> Result<Self> {
        let n = root.len();
        let mut depth = None;
        for own in root.support() {
            for opp in (0..n).filter(|&o| o != own) {
                let child = children.get(&(own, opp)).ok_or_else(|| {
                    Error::InvalidInput(format!("missing continuation after ({own}, {opp})"))
                })?;
                if child.root.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: child.root.len(),
                    });
                }
                match depth {
                    None => depth = Some(child.depth),
                    Some(d) if d != child.depth => {
                        return Err(Error::InvalidInput(format!(
                            "children have depths {d} and {}",
                            child.depth
                        )))
                    }
                    _ => {}
                }
            }
        }
        let depth = depth.map_or(1, |d| d + 1);
        Ok(Self {
            depth,
            root,
            children,
        })
    }

    /// Plays `dist` every round for `depth` rounds.
    pub fn stationary(dist: SimplexVector, depth: usize) -> Self {
        let n = dist.len();
        let mut current = Arc::new(Self::leaf(dist.clone()));
        for d in 1..=depth {
            let children = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|k| (k, Arc::clone(&current)))
                .collect();
            current = Arc::new(Self {
                depth: d,
                root: dist.clone(),
                children,
            });
        }
        Arc::try_unwrap(current).unwrap_or_else(|arc| (*arc).clone())
    }

    /// Builds the full tree from `policy(own_history, opponent_history)`.
    /// The tree has `(n(n−1))^depth` leaves, so keep `depth` small.
    pub fn from_fn(
        n: usize,
        depth: usize,
        policy: &dyn Fn(&[usize], &[usize]) -> SimplexVector,
    ) -> Result<Self> {
        fn build(
            n: usize,
            depth: usize,
            own: &mut Vec<usize>,
            opp: &mut Vec<usize>,
            policy: &dyn Fn(&[usize], &[usize]) -> SimplexVector,
        ) -> Result<HorizonStrategy> {
            let root = policy(own, opp);
            if root.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: root.len(),
                });
            }
            if depth == 0 {
                return Ok(HorizonStrategy::leaf(root));
            }
            let mut children = BTreeMap::new();
            for i in root.support() {
                for j in (0..n).filter(|&j| j != i) {
                    own.push(i);
                    opp.push(j);
                    let child = build(n, depth - 1, own, opp, policy)?;
                    own.pop();
                    opp.pop();
                    children.insert((i, j), Arc::new(child));
                }
            }
            HorizonStrategy::node(root, children).map(|mut s| {
                s.depth = depth;
                s
            })
        }
        build(n, depth, &mut Vec::new(), &mut Vec::new(), policy)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> &SimplexVector {
        &self.root
    }

    pub fn child(&self, own: usize, opp: usize) -> Option<&HorizonStrategy> {
        self.children.get(&(own, opp)).map(Arc::as_ref)
    }

    pub fn child_arc(&self, own: usize, opp: usize) -> Option<Arc<HorizonStrategy>> {
        self.children.get(&(own, opp)).cloned()
    }
}

/// Expected payoff of the first `r` rounds when the max player follows `f` and the min
/// player follows `g`.
pub fn finite_horizon_value(
    c: &PayoffMatrix,
    f: &HorizonStrategy,
    g: &HorizonStrategy,
    r: usize,
) -> Result<f64> {
    let available = f.depth.min(g.depth);
    if available < r {
        return Err(Error::InsufficientDepth {
            required: r,
            available,
        });
    }
    check_dims(c, &f.root, &g.root)?;
    let mut memo = HashMap::new();
    Ok(horizon_rec(c, f, g, r, &mut memo))
}

fn horizon_rec(
    c: &PayoffMatrix,
    f: &HorizonStrategy,
    g: &HorizonStrategy,
    r: usize,
    memo: &mut HashMap<(usize, usize, usize), f64>,
) -> f64 {
    if r == 0 {
        return 0.0;
    }
    let key = (
        f as *const HorizonStrategy as usize,
        g as *const HorizonStrategy as usize,
        r,
    );
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let (x, y) = (f.root.as_slice(), g.root.as_slice());
    let mut value = c.bilinear(x, y);
    for i in f.root.support() {
        for j in g.root.support() {
            if i == j {
                continue;
            }
            let fc = f.child(i, j).expect("validated at construction");
            let gc = g.child(j, i).expect("validated at construction");
            value += x[i] * y[j] * horizon_rec(c, fc, gc, r - 1, memo);
        }
    }
    memo.insert(key, value);
    value
}

/// Expected total over a game that ends on the `w`-th collision.
pub fn multi_collision_value(
    c: &PayoffMatrix,
    x: &SimplexVector,
    y: &SimplexVector,
    w: u64,
) -> Result<GameValue> {
    Ok(expected_score(c, x, y)?.times(w as f64))
}

/// Variance counterpart of [`multi_collision_value`]; requires `xᵀy > 0`.
pub fn multi_collision_variance(
    c: &PayoffMatrix,
    x: &SimplexVector,
    y: &SimplexVector,
    w: u64,
) -> Result<f64> {
    Ok(w as f64 * score_variance(c, x, y)?)
}

/// Expected total when the collision threshold is random with mean `mean_threshold`.
pub fn threshold_mean_value(
    c: &PayoffMatrix,
    x: &SimplexVector,
    y: &SimplexVector,
    mean_threshold: f64,
) -> Result<GameValue> {
    if !(mean_threshold >= 0.0) || !mean_threshold.is_finite() {
        return Err(Error::OutOfRange {
            name: "mean_threshold",
            value: mean_threshold,
        });
    }
    Ok(expected_score(c, x, y)?.times(mean_threshold))
}
