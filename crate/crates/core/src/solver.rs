//! Nash equilibria of RUC games `(A, B)`: Perron solutions for irreducible pairs,
//! pure boundary equilibria, comet strategies for reducible cost matrices, and
//! ratio-bracket certificates for approximate pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytics::{expected_score, GameValue};
use crate::error::{Error, Result};
use crate::linalg::{
    build_graph, is_irreducible, perron, scc_decompose, PayoffMatrix, PerronPair, Side,
    SimplexVector,
};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uniqueness {
    Unique,
    NonUnique,
    Unknown,
}

/// Which construction produced an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// One action per player.
    SingleAction,
    Irreducible,
    TrivialEdge,
    ZeroColumn,
    Comet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertificateKind {
    ExactTrivial,
    RatioCertified {
        /// `max(β_A / e^A(x̂,ŷ), e^B(x̂,ŷ) / α_B) − 1`, floored at 0.
        #[serde(with = "crate::report::extended_f64")]
        eps: f64,
        /// `max(β_A / α_A, β_B / α_B) − 1` from the stored brackets; never below `eps`.
        #[serde(with = "crate::report::extended_f64")]
        bracket_eps: f64,
        #[serde(with = "crate::report::extended_pair")]
        max_bracket: (f64, f64),
        #[serde(with = "crate::report::extended_pair")]
        min_bracket: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(flatten)]
    pub kind: CertificateKind,
    pub description: String,
}

impl Certificate {
    fn exact(description: impl Into<String>) -> Self {
        Self {
            kind: CertificateKind::ExactTrivial,
            description: description.into(),
        }
    }

    /// Certified ε; zero for exact certificates.
    pub fn eps(&self) -> f64 {
        match self.kind {
            CertificateKind::ExactTrivial => 0.0,
            CertificateKind::RatioCertified { eps, .. } => eps,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == CertificateKind::ExactTrivial
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRoot {
    /// Vertices of the source component, ascending.
    pub vertices: Vec<usize>,
    /// Left Perron pair of `B[V, V]`.
    pub perron: PerronPair,
}

/// Full-support max strategy that pushes the min player onto the source components of
/// `graph(B)`: Perron mass on the body, geometrically thinning mass along a BFS forest
/// on the tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CometStrategy {
    pub delta: f64,
    pub beta: f64,
    /// `π(v)` for every tail vertex.
    pub forest_parent: BTreeMap<usize, usize>,
    /// `d(v) ≥ 1` for every tail vertex.
    pub forest_depth: BTreeMap<usize, usize>,
    pub strategy: SimplexVector,
    /// Source components sorted by Perron root; the first is `V_1`.
    pub source_roots: Vec<SourceRoot>,
    pub eps_b: f64,
    pub eps_u: f64,
}

impl CometStrategy {
    /// `x[π(j)] ≥ x[j] / δ` for every tail vertex `j`.
    pub fn tail_law_holds(&self) -> bool {
        let x = self.strategy.as_slice();
        self.forest_parent
            .iter()
            .all(|(&j, &p)| x[p] >= x[j] / self.delta)
    }

    pub fn body(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .source_roots
            .iter()
            .flat_map(|s| s.vertices.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn rho_min(&self) -> f64 {
        self.source_roots[0].perron.rho()
    }

    pub fn rho_max(&self) -> f64 {
        self.source_roots
            .iter()
            .map(|s| s.perron.rho())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub max_strategy: SimplexVector,
    pub min_strategy: SimplexVector,
    pub max_value: GameValue,
    pub min_value: GameValue,
    /// Certified enclosure of `max_value` when it comes from a Perron computation.
    pub max_value_bracket: Option<(f64, f64)>,
    pub min_value_bracket: Option<(f64, f64)>,
    pub certificate: Certificate,
    pub uniqueness: Uniqueness,
    pub branch: Branch,
    pub comet: Option<CometStrategy>,
}

fn check_pair(a: &PayoffMatrix, b: &PayoffMatrix) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "tol",
            value: tol,
        })
    }
}

/// `num / den` where `0 / 0` counts as 1 and `positive / 0` as infinity.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

fn bracket_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r), hi.max(r))
    })
}

/// Perron solution of an irreducible pair: `x*` is the left Perron vector of `B`,
/// `y*` the right Perron vector of `A`.
pub fn solve_irreducible(a: &PayoffMatrix, b: &PayoffMatrix, tol: f64) -> Result<EquilibriumResult> {
    check_pair(a, b)?;
    check_tol(tol)?;
    if a.n() == 1 {
        return Ok(single_action(a, b));
    }
    if !is_irreducible(a) || !is_irreducible(b) {
        return Err(Error::NotIrreducible);
    }
    let pa = perron(a, Side::Right, tol)?;
    let pb = perron(b, Side::Left, tol)?;
    let x = pb.vector.clone();
    let y = pa.vector.clone();
    let certificate = certify_epsilon(a, b, &x, &y)?;
    let uniqueness = if build_graph(a).is_subgraph_of(&build_graph(b)) {
        Uniqueness::Unique
    } else {
        Uniqueness::NonUnique
    };
    Ok(EquilibriumResult {
        max_strategy: x,
        min_strategy: y,
        max_value: GameValue::Finite(pa.rho()),
        min_value: GameValue::Finite(pb.rho()),
        max_value_bracket: Some((pa.rho_lower, pa.rho_upper)),
        min_value_bracket: Some((pb.rho_lower, pb.rho_upper)),
        certificate,
        uniqueness,
        branch: Branch::Irreducible,
        comet: None,
    })
}

fn single_action(a: &PayoffMatrix, b: &PayoffMatrix) -> EquilibriumResult {
    let e = SimplexVector::pure(1, 0);
    let (va, vb) = (a.get(0, 0), b.get(0, 0));
    EquilibriumResult {
        max_strategy: e.clone(),
        min_strategy: e,
        max_value: GameValue::Finite(va),
        min_value: GameValue::Finite(vb),
        max_value_bracket: Some((va, va)),
        min_value_bracket: Some((vb, vb)),
        certificate: Certificate::exact("single action: the first round always collides"),
        uniqueness: Uniqueness::Unique,
        branch: Branch::SingleAction,
        comet: None,
    }
}

/// ε for which `(x̂, ŷ)` is an ε-Nash equilibrium against all (including history-dependent)
/// deviations. Both strategies need full support.
pub fn certify_epsilon(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    x_hat: &SimplexVector,
    y_hat: &SimplexVector,
) -> Result<Certificate> {
    check_pair(a, b)?;
    for v in [x_hat, y_hat] {
        if v.len() != a.n() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                found: v.len(),
            });
        }
        if let Some(index) = v.first_zero() {
            return Err(Error::NotFullSupport { index });
        }
    }
    certify_pair(a, b, x_hat, y_hat)
}

/// As [`certify_epsilon`], but `ŷ` may leave out actions `i` with `(Aŷ)_i = 0`: playing
/// such an action never ends the game and never scores, so the max player's bracket
/// only ranges over `support(ŷ)`.
pub fn certify_pair(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    x_hat: &SimplexVector,
    y_hat: &SimplexVector,
) -> Result<Certificate> {
    check_pair(a, b)?;
    let n = a.n();
    for v in [x_hat, y_hat] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    if let Some(index) = x_hat.first_zero() {
        return Err(Error::NotFullSupport { index });
    }
    let (x, y) = (x_hat.as_slice(), y_hat.as_slice());
    let ay = a.mul_vec(y);
    if let Some(index) = (0..n).find(|&i| y[i] == 0.0 && ay[i] > 0.0) {
        return Err(Error::NotFullSupport { index });
    }
    let (alpha_a, beta_a) = bracket_of((0..n).filter(|&i| y[i] > 0.0).map(|i| ay[i] / y[i]));
    let bx = b.tmul_vec(x);
    let (alpha_b, beta_b) = bracket_of((0..n).map(|j| bx[j] / x[j]));

    let e_a = match expected_score(a, x_hat, y_hat)? {
        GameValue::Finite(v) if v > 0.0 || beta_a == 0.0 => v,
        _ => return Err(Error::InfinitePayoff),
    };
    let e_b = expected_score(b, x_hat, y_hat)?.to_f64();
    let eps = (ratio(beta_a, e_a).max(ratio(e_b, alpha_b)) - 1.0).max(0.0);
    let bracket_eps = (ratio(beta_a, alpha_a).max(ratio(beta_b, alpha_b)) - 1.0).max(0.0);
    let support_note = if y_hat.has_full_support() {
        ""
    } else {
        " (max side over support of y)"
    };
    Ok(Certificate {
        kind: CertificateKind::RatioCertified {
            eps,
            bracket_eps,
            max_bracket: (alpha_a, beta_a),
            min_bracket: (alpha_b, beta_b),
        },
        description: format!(
            "max payoff of any deviation <= {beta_a}, min cost of any deviation >= {alpha_b}{support_note}"
        ),
    })
}

/// Pure pair `(e^(i), e^(j))` for the first `i != j` with `A[i,j] > 0 = B[i,j]`: the
/// players never collide, so the max player scores forever and the min player pays nothing.
pub fn trivial_ne_edge(a: &PayoffMatrix, b: &PayoffMatrix) -> Option<EquilibriumResult> {
    if a.n() != b.n() {
        return None;
    }
    let n = a.n();
    let (i, j) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && a.get(i, j) > 0.0 && b.get(i, j) == 0.0)?;
    let uniqueness = if is_irreducible(a) && is_irreducible(b) {
        Uniqueness::NonUnique
    } else {
        Uniqueness::Unknown
    };
    Some(EquilibriumResult {
        max_strategy: SimplexVector::pure(n, i),
        min_strategy: SimplexVector::pure(n, j),
        max_value: GameValue::Infinite,
        min_value: GameValue::Finite(0.0),
        max_value_bracket: None,
        min_value_bracket: None,
        certificate: Certificate::exact(format!(
            "A[{i},{j}] > 0 and B[{i},{j}] = 0: the pure pair never collides"
        )),
        uniqueness,
        branch: Branch::TrivialEdge,
        comet: None,
    })
}

/// `(uniform, e^(j))` for the first all-zero column `j` of `B`.
pub fn trivial_ne_zero_column(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
) -> Result<Option<EquilibriumResult>> {
    check_pair(a, b)?;
    if !build_graph(a).is_subgraph_of(&build_graph(b)) {
        return Err(Error::PreconditionViolated(
            "graph(A) must be a subgraph of graph(B)".into(),
        ));
    }
    let n = a.n();
    let Some(j) = (0..n).find(|&j| b.column_is_zero(j)) else {
        return Ok(None);
    };
    Ok(Some(EquilibriumResult {
        max_strategy: SimplexVector::uniform(n),
        min_strategy: SimplexVector::pure(n, j),
        max_value: GameValue::Finite(a.get(j, j)),
        min_value: GameValue::Finite(0.0),
        max_value_bracket: None,
        min_value_bracket: None,
        certificate: Certificate::exact(format!(
            "column {j} of B is zero: the min player pays nothing by always playing {j}"
        )),
        uniqueness: if n == 1 {
            Uniqueness::Unique
        } else {
            Uniqueness::NonUnique
        },
        branch: Branch::ZeroColumn,
        comet: None,
    }))
}

pub fn comet_strategy(b: &PayoffMatrix, tol: f64) -> Result<CometStrategy> {
    check_tol(tol)?;
    let n = b.n();
    if let Some(column) = (0..n).find(|&j| b.column_is_zero(j)) {
        return Err(Error::ZeroColumn { column });
    }
    let graph = build_graph(b);
    let scc = scc_decompose(&graph);

    let mut roots = Vec::with_capacity(scc.sources.len());
    for &c in &scc.sources {
        let vertices = scc.components[c].clone();
        let perron = perron(&b.submatrix(&vertices), Side::Left, tol)?;
        roots.push(SourceRoot { vertices, perron });
    }
    roots.sort_by(|p, q| {
        p.perron
            .rho()
            .total_cmp(&q.perron.rho())
            .then(p.vertices[0].cmp(&q.vertices[0]))
    });
    // Roots equal up to the certification tolerance count as ties; the lowest vertex wins.
    let rho_1 = roots[0].perron.rho();
    let first = (0..roots.len())
        .filter(|&k| roots[k].perron.rho() <= rho_1 * (1.0 + 4.0 * tol))
        .min_by_key(|&k| roots[k].vertices[0])
        .unwrap_or(0);
    let v1 = roots.remove(first);
    roots.insert(0, v1);

    let q = roots.len();
    let rho_q = roots
        .iter()
        .map(|s| s.perron.rho())
        .fold(f64::NEG_INFINITY, f64::max);
    let eps_b = b.min_positive().expect("nonzero columns imply a positive entry");
    let eps_u = roots
        .iter()
        .map(|s| s.perron.vector.min_weight())
        .fold(f64::INFINITY, f64::min);
    let delta = eps_b / (2.0 * rho_q);

    let mut body: Vec<usize> = roots.iter().flat_map(|s| s.vertices.iter().copied()).collect();
    body.sort_unstable();
    let (parent, depth) = graph.bfs_forest(&body);

    let mut tail: Vec<(usize, usize, usize)> = (0..n)
        .filter_map(|v| match (parent[v], depth[v]) {
            (Some(p), Some(d)) if d > 0 => Some((d, v, p)),
            _ => None,
        })
        .collect();
    tail.sort_unstable();
    if body.len() + tail.len() != n {
        return Err(Error::NumericalCheck(
            "BFS forest from the source components does not reach every vertex".into(),
        ));
    }

    let mut x = vec![0.0; n];
    let beta = if tail.is_empty() {
        0.0
    } else {
        1.0 / (1.0 + n as f64 / (delta * eps_u))
    };
    for s in &roots {
        for (&v, &u) in s.vertices.iter().zip(s.perron.vector.as_slice()) {
            x[v] = (1.0 - beta) * u / q as f64;
        }
    }
    if !tail.is_empty() {
        let weights: Vec<f64> = tail.iter().map(|&(d, _, _)| delta.powi(d as i32 - 1)).collect();
        let total: f64 = weights.iter().sum();
        for (&(_, v, p), &w) in tail.iter().zip(&weights) {
            let mut xv = beta * w / total;
            if !(xv > 0.0) {
                return Err(Error::TailUnderflow { vertex: v });
            }
            // Parents come first in `tail` (sorted by depth), so x[p] is final here.
            while x[p] < xv / delta {
                xv = xv.next_down();
            }
            if !(xv > 0.0) {
                return Err(Error::TailUnderflow { vertex: v });
            }
            x[v] = xv;
        }
    }
    let strategy = SimplexVector::new(x)?;
    let comet = CometStrategy {
        delta,
        beta,
        forest_parent: tail.iter().map(|&(_, v, p)| (v, p)).collect(),
        forest_depth: tail.iter().map(|&(d, v, _)| (v, d)).collect(),
        strategy,
        source_roots: roots,
        eps_b,
        eps_u,
    };
    if !comet.tail_law_holds() || !comet.strategy.has_full_support() {
        return Err(Error::NumericalCheck("comet strategy fails its tail law".into()));
    }
    Ok(comet)
}

/// Equilibrium of any nonnegative pair. Tries, in order: a never-colliding pure pair, a
/// zero cost column, the Perron solution, and finally a comet strategy against the
/// right Perron vector of a source component of `graph(A)` inside `V_1`.
pub fn solve(a: &PayoffMatrix, b: &PayoffMatrix, tol: f64) -> Result<EquilibriumResult> {
    check_pair(a, b)?;
    check_tol(tol)?;
    if let Some(r) = trivial_ne_edge(a, b) {
        return Ok(r);
    }
    if let Some(r) = trivial_ne_zero_column(a, b)? {
        return Ok(r);
    }
    if is_irreducible(a) && is_irreducible(b) {
        return solve_irreducible(a, b, tol);
    }
    solve_comet(a, b, tol)
}

/// Same as [`solve`].
pub fn solve_reducible(a: &PayoffMatrix, b: &PayoffMatrix, tol: f64) -> Result<EquilibriumResult> {
    solve(a, b, tol)
}

fn solve_comet(a: &PayoffMatrix, b: &PayoffMatrix, tol: f64) -> Result<EquilibriumResult> {
    let n = a.n();
    let comet = comet_strategy(b, tol)?;
    let v1 = &comet.source_roots[0];

    let sub = a.submatrix(&v1.vertices);
    let sub_scc = scc_decompose(&build_graph(&sub));
    let u1_local = sub_scc
        .sources
        .iter()
        .map(|&c| &sub_scc.components[c])
        .min_by_key(|c| c[0])
        .expect("a nonempty graph has a source component");
    let u1: Vec<usize> = u1_local.iter().map(|&k| v1.vertices[k]).collect();

    let a_u = a.submatrix(&u1);
    let (rho_a, bracket_a, v) = if u1.len() == 1 && a_u.get(0, 0) == 0.0 {
        (0.0, (0.0, 0.0), SimplexVector::pure(1, 0))
    } else {
        let p = perron(&a_u, Side::Right, tol)?;
        (p.rho(), (p.rho_lower, p.rho_upper), p.vector)
    };
    let y = SimplexVector::embed(n, &u1, &v);
    let x = comet.strategy.clone();
    let certificate = certify_pair(a, b, &x, &y)?;
    let pb = &v1.perron;
    Ok(EquilibriumResult {
        max_strategy: x,
        min_strategy: y,
        max_value: GameValue::Finite(rho_a),
        min_value: GameValue::Finite(pb.rho()),
        max_value_bracket: Some(bracket_a),
        min_value_bracket: Some((pb.rho_lower, pb.rho_upper)),
        certificate,
        uniqueness: Uniqueness::NonUnique,
        branch: Branch::Comet,
        comet: Some(comet),
    })
}

/// Solves many games, in parallel when `parallel` is set and the feature is enabled.
pub fn solve_many(
    games: &[(PayoffMatrix, PayoffMatrix)],
    tol: f64,
    parallel: bool,
) -> Vec<Result<EquilibriumResult>> {
    par::map_indexed(games.len(), parallel, |k| solve(&games[k].0, &games[k].1, tol))
}

/// Payoffs of every pure deviation against a candidate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureDeviations {
    /// `e^A(e^(i), y)` for each `i`.
    pub max_player: Vec<GameValue>,
    /// `e^B(x, e^(j))` for each `j`.
    pub min_player: Vec<GameValue>,
}

impl PureDeviations {
    /// Largest payoff the max player can reach with a pure deviation.
    pub fn best_max(&self) -> GameValue {
        best_of(&self.max_player, |a, b| a > b)
    }

    /// Smallest cost the min player can reach with a pure deviation.
    pub fn best_min(&self) -> GameValue {
        best_of(&self.min_player, |a, b| a < b)
    }
}

fn best_of(values: &[GameValue], better: impl Fn(f64, f64) -> bool) -> GameValue {
    let mut best = values[0];
    for &v in &values[1..] {
        if better(v.to_f64(), best.to_f64()) {
            best = v;
        }
    }
    best
}

fn pure_value(num: f64, den: f64) -> GameValue {
    if den > 0.0 {
        GameValue::Finite(num / den)
    } else if num > 0.0 {
        GameValue::Infinite
    } else {
        GameValue::ZeroDegenerate
    }
}

pub fn pure_deviations(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    x: &SimplexVector,
    y: &SimplexVector,
) -> Result<PureDeviations> {
    check_pair(a, b)?;
    for v in [x, y] {
        if v.len() != a.n() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                found: v.len(),
            });
        }
    }
    let ay = a.mul_vec(y.as_slice());
    let bx = b.tmul_vec(x.as_slice());
    Ok(PureDeviations {
        max_player: ay.iter().zip(y.as_slice()).map(|(&n, &d)| pure_value(n, d)).collect(),
        min_player: bx.iter().zip(x.as_slice()).map(|(&n, &d)| pure_value(n, d)).collect(),
    })
}
