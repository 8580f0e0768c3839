//! Seeded Monte-Carlo play of RUC games.
//!
//! Every trial draws from three ChaCha8 streams (max player, min player, collision
//! threshold) keyed by `(seed, trial, player)`, and trials are aggregated in fixed
//! chunks merged in index order. Results are therefore bit-identical whether or not the
//! chunks run on the rayon pool.

use std::fmt;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use serde::{Deserialize, Serialize};

use crate::analytics::{HorizonStrategy, Role};
use crate::error::{Error, Result};
use crate::linalg::{PayoffMatrix, SimplexVector};
use crate::par;
use crate::solver::EquilibriumResult;

/// Trials per aggregation chunk. Part of the reproducibility contract: changing it
/// changes floating-point summation order.
pub const CHUNK: usize = 4096;

/// A history-dependent strategy. It sees the opponent's past actions (oldest first) and
/// a private random stream; anything else, such as its own past actions, it tracks itself.
pub trait ScriptedPolicy: Send {
    fn next_action(&mut self, opponent_history: &[usize], rng: &mut ChaCha8Rng) -> usize;
}

/// Builds a fresh policy for one trial of an `n`-action game.
pub type PolicyFactory = Arc<dyn Fn(usize) -> Box<dyn ScriptedPolicy> + Send + Sync>;

#[derive(Clone)]
pub enum AgentKind {
    Stationary {
        dist: SimplexVector,
        sampler: Arc<WeightedIndex<f64>>,
    },
    Scripted(PolicyFactory),
}

#[derive(Clone)]
pub struct StrategyAgent {
    pub kind: AgentKind,
    pub label: String,
}

impl fmt::Debug for StrategyAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AgentKind::Stationary { dist, .. } => f
                .debug_struct("StrategyAgent")
                .field("label", &self.label)
                .field("stationary", dist)
                .finish(),
            AgentKind::Scripted(_) => f
                .debug_struct("StrategyAgent")
                .field("label", &self.label)
                .field("scripted", &true)
                .finish(),
        }
    }
}

impl StrategyAgent {
    pub fn stationary(dist: SimplexVector) -> Self {
        let label = format!("stationary{:?}", dist.as_slice());
        Self::stationary_labeled(dist, label)
    }

    pub fn stationary_labeled(dist: SimplexVector, label: impl Into<String>) -> Self {
        let sampler = WeightedIndex::new(dist.as_slice().iter().copied())
            .expect("simplex vectors have positive total weight");
        Self {
            kind: AgentKind::Stationary {
                dist,
                sampler: Arc::new(sampler),
            },
            label: label.into(),
        }
    }

    pub fn scripted(label: impl Into<String>, factory: PolicyFactory) -> Self {
        Self {
            kind: AgentKind::Scripted(factory),
            label: label.into(),
        }
    }

    /// Plays the opponent's previous action; uniform in the first round.
    pub fn copy_last() -> Self {
        Self::scripted("copy-last", Arc::new(|n| Box::new(CopyLast { n })))
    }

    /// Plays `0, 1, ..., n−1, 0, ...` regardless of the opponent.
    pub fn cycle() -> Self {
        Self::scripted("cycle", Arc::new(|n| Box::new(Cycle { n, next: 0 })))
    }

    /// Plays one past the opponent's previous action; uniform in the first round.
    pub fn anti_coordinate() -> Self {
        Self::scripted("anti-coordinate", Arc::new(|n| Box::new(AntiCoordinate { n })))
    }

    /// Follows a finite strategy tree, staying with the deepest node's distribution once
    /// the tree runs out.
    pub fn horizon(tree: Arc<HorizonStrategy>) -> Self {
        Self::scripted(
            format!("horizon(depth {})", tree.depth()),
            Arc::new(move |_| {
                Box::new(HorizonPolicy {
                    node: Arc::clone(&tree),
                    last_own: None,
                })
            }),
        )
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self.kind, AgentKind::Stationary { .. })
    }

    pub fn stationary_dist(&self) -> Option<&SimplexVector> {
        match &self.kind {
            AgentKind::Stationary { dist, .. } => Some(dist),
            AgentKind::Scripted(_) => None,
        }
    }

    fn instantiate(&self, n: usize) -> Result<Player<'_>> {
        match &self.kind {
            AgentKind::Stationary { dist, sampler } => {
                if dist.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: dist.len(),
                    });
                }
                Ok(Player::Stationary(sampler))
            }
            AgentKind::Scripted(factory) => Ok(Player::Scripted(factory(n))),
        }
    }
}

enum Player<'a> {
    Stationary(&'a WeightedIndex<f64>),
    Scripted(Box<dyn ScriptedPolicy>),
}

impl Player<'_> {
    fn act(&mut self, n: usize, opp: &[usize], rng: &mut ChaCha8Rng) -> Result<usize> {
        let action = match self {
            Player::Stationary(s) => s.sample(rng),
            Player::Scripted(p) => p.next_action(opp, rng),
        };
        if action >= n {
            return Err(Error::ScriptedActionOutOfRange { action, n });
        }
        Ok(action)
    }
}

struct CopyLast {
    n: usize,
}

impl ScriptedPolicy for CopyLast {
    fn next_action(&mut self, opp: &[usize], rng: &mut ChaCha8Rng) -> usize {
        match opp.last() {
            Some(&a) => a,
            None => rng.random_range(0..self.n),
        }
    }
}

struct Cycle {
    n: usize,
    next: usize,
}

impl ScriptedPolicy for Cycle {
    fn next_action(&mut self, _: &[usize], _: &mut ChaCha8Rng) -> usize {
        let a = self.next;
        self.next = (self.next + 1) % self.n;
        a
    }
}

struct AntiCoordinate {
    n: usize,
}

impl ScriptedPolicy for AntiCoordinate {
    fn next_action(&mut self, opp: &[usize], rng: &mut ChaCha8Rng) -> usize {
        match opp.last() {
            Some(&a) => (a + 1) % self.n,
            None => rng.random_range(0..self.n),
        }
    }
}

struct HorizonPolicy {
    node: Arc<HorizonStrategy>,
    last_own: Option<usize>,
}

impl ScriptedPolicy for HorizonPolicy {
    fn next_action(&mut self, opp: &[usize], rng: &mut ChaCha8Rng) -> usize {
        if let (Some(own), Some(&o)) = (self.last_own, opp.last()) {
            if let Some(child) = self.node.child_arc(own, o) {
                self.node = child;
            }
        }
        let w = self.node.root().as_slice();
        let mut u: f64 = rng.random();
        let mut action = w.len() - 1;
        for (i, &p) in w.iter().enumerate() {
            if p > 0.0 && u < p {
                action = i;
                break;
            }
            u -= p;
        }
        while w[action] == 0.0 && action > 0 {
            action -= 1;
        }
        self.last_own = Some(action);
        action
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CollisionRule {
    /// Stop at the `w`-th collision; `w = 0` is the empty game.
    Fixed { w: u64 },
    /// Draw `W ≥ 1` with `P(W = k) = (1−p)^(k−1) p` before play.
    Geometric { p: f64 },
}

impl CollisionRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CollisionRule::Fixed { .. } => Ok(()),
            CollisionRule::Geometric { p } if p > 0.0 && p <= 1.0 => Ok(()),
            CollisionRule::Geometric { p } => Err(Error::OutOfRange {
                name: "p",
                value: p,
            }),
        }
    }

    /// `E(W)`
    pub fn mean_threshold(&self) -> f64 {
        match *self {
            CollisionRule::Fixed { w } => w as f64,
            CollisionRule::Geometric { p } => 1.0 / p,
        }
    }

    /// Draws the collision threshold `W` for one game.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        match *self {
            CollisionRule::Fixed { w } => w,
            CollisionRule::Geometric { p } => {
                1 + Geometric::new(p).expect("validated").sample(rng)
            }
        }
    }
}

impl Default for CollisionRule {
    fn default() -> Self {
        CollisionRule::Fixed { w: 1 }
    }
}

/// Which stream of a trial to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    MaxPlayer = 0,
    MinPlayer = 1,
    Threshold = 2,
}

/// Derives the per-trial, per-player ChaCha8 streams from a master seed.
#[derive(Debug, Clone)]
pub struct RngSpec {
    pub master_seed: u64,
    base: ChaCha8Rng,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            base: ChaCha8Rng::seed_from_u64(master_seed),
        }
    }

    pub fn stream(&self, trial: u64, id: StreamId) -> ChaCha8Rng {
        assert!(trial < 1 << 62, "trial index exceeds the stream space");
        let mut rng = self.base.clone();
        rng.set_stream(trial << 2 | id as u64);
        rng.set_word_pos(0);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub max_total: f64,
    pub min_total: f64,
    pub rounds: u64,
    pub collisions: u64,
    pub threshold: u64,
    /// False when the round cap stopped the game.
    pub terminated: bool,
}

fn check_game(a: &PayoffMatrix, b: &PayoffMatrix, max_rounds: u64) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    if max_rounds == 0 {
        return Err(Error::OutOfRange {
            name: "max_rounds",
            value: 0.0,
        });
    }
    Ok(())
}

/// Plays trial `trial` of the stream family `rng`.
#[allow(clippy::too_many_arguments)]
pub fn play_game(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    max_agent: &StrategyAgent,
    min_agent: &StrategyAgent,
    rule: CollisionRule,
    rng: &RngSpec,
    trial: u64,
    max_rounds: u64,
) -> Result<TrialResult> {
    check_game(a, b, max_rounds)?;
    rule.validate()?;
    play_unchecked(a, b, max_agent, min_agent, rule, rng, trial, max_rounds)
}

#[allow(clippy::too_many_arguments)]
fn play_unchecked(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    max_agent: &StrategyAgent,
    min_agent: &StrategyAgent,
    rule: CollisionRule,
    rng: &RngSpec,
    trial: u64,
    max_rounds: u64,
) -> Result<TrialResult> {
    let n = a.n();
    let threshold = rule.draw(&mut rng.stream(trial, StreamId::Threshold));
    let mut res = TrialResult {
        max_total: 0.0,
        min_total: 0.0,
        rounds: 0,
        collisions: 0,
        threshold,
        terminated: true,
    };
    if threshold == 0 {
        return Ok(res);
    }
    let mut pmax = max_agent.instantiate(n)?;
    let mut pmin = min_agent.instantiate(n)?;
    let mut rmax = rng.stream(trial, StreamId::MaxPlayer);
    let mut rmin = rng.stream(trial, StreamId::MinPlayer);
    let track = !(max_agent.is_stationary() && min_agent.is_stationary());
    let (mut hist_max, mut hist_min) = (Vec::new(), Vec::new());

    while res.rounds < max_rounds {
        let i = pmax.act(n, &hist_min, &mut rmax)?;
        let j = pmin.act(n, &hist_max, &mut rmin)?;
        res.rounds += 1;
        res.max_total += a.get(i, j);
        res.min_total += b.get(i, j);
        if track {
            hist_max.push(i);
            hist_min.push(j);
        }
        if i == j {
            res.collisions += 1;
            if res.collisions == threshold {
                return Ok(res);
            }
        }
    }
    res.terminated = false;
    Ok(res)
}

/// Streaming central moments up to order four, mergeable in any grouping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.merge(&Moments {
            n: 1,
            mean: x,
            ..Default::default()
        });
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d_n = d / n;
        let d2 = d * d;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + o.m3
            + d2 * d * na * nb * (na - nb) / (n * n)
            + 3.0 * d_n * (na * o.m2 - nb * self.m2);
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d_n * (na * o.m3 - nb * self.m3);
        self.mean += d_n * nb;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.n += o.n;
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stats(&self) -> EmpiricalStats {
        let n = self.n as f64;
        let var = self.variance();
        let var_se = if self.n < 4 {
            f64::NAN
        } else {
            let mu4 = self.m4 / n;
            ((mu4 - var * var * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
        };
        EmpiricalStats {
            count: self.n,
            mean: self.mean,
            variance: var,
            std_error: (var / n).sqrt(),
            variance_std_error: var_se,
        }
    }
}

/// Sample statistics of one quantity across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub count: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / count)`
    pub std_error: f64,
    /// Standard error of the sample variance, from the fourth central moment.
    #[serde(with = "crate::report::extended_f64")]
    pub variance_std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    pub max_rounds: u64,
    pub rule: CollisionRule,
    /// Run chunks on the rayon pool (ignored without the `parallel` feature).
    pub parallel: bool,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, seed: u64, max_rounds: u64) -> Self {
        Self {
            trials,
            seed,
            max_rounds,
            rule: CollisionRule::default(),
            parallel: true,
        }
    }

    pub fn with_rule(mut self, rule: CollisionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub seed: u64,
    pub max_rounds: u64,
    pub rule: CollisionRule,
    pub max_total: EmpiricalStats,
    pub min_total: EmpiricalStats,
    pub rounds: EmpiricalStats,
    /// Fraction of trials stopped by the round cap.
    pub truncation_rate: f64,
}

#[derive(Default, Clone, Copy)]
struct Chunk {
    max: Moments,
    min: Moments,
    rounds: Moments,
    truncated: u64,
}

pub fn monte_carlo(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    max_agent: &StrategyAgent,
    min_agent: &StrategyAgent,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    check_game(a, b, cfg.max_rounds)?;
    cfg.rule.validate()?;
    if cfg.trials == 0 {
        return Err(Error::OutOfRange {
            name: "trials",
            value: 0.0,
        });
    }
    let rng = RngSpec::new(cfg.seed);
    let chunks = cfg.trials.div_ceil(CHUNK as u64) as usize;
    let partials = par::map_indexed(chunks, cfg.parallel, |c| -> Result<Chunk> {
        let start = c as u64 * CHUNK as u64;
        let end = (start + CHUNK as u64).min(cfg.trials);
        let mut acc = Chunk::default();
        for t in start..end {
            let r = play_unchecked(a, b, max_agent, min_agent, cfg.rule, &rng, t, cfg.max_rounds)?;
            acc.max.push(r.max_total);
            acc.min.push(r.min_total);
            acc.rounds.push(r.rounds as f64);
            acc.truncated += u64::from(!r.terminated);
        }
        Ok(acc)
    });
    let mut total = Chunk::default();
    for p in partials {
        let p = p?;
        total.max.merge(&p.max);
        total.min.merge(&p.min);
        total.rounds.merge(&p.rounds);
        total.truncated += p.truncated;
    }
    Ok(MonteCarloReport {
        trials: cfg.trials,
        seed: cfg.seed,
        max_rounds: cfg.max_rounds,
        rule: cfg.rule,
        max_total: total.max.stats(),
        min_total: total.min.stats(),
        rounds: total.rounds.stats(),
        truncation_rate: total.truncated as f64 / cfg.trials as f64,
    })
}

/// `max(10⁴, ⌈50 / xᵀy⌉)`, or `10⁴` when the strategies never collide.
pub fn default_max_rounds(x: &SimplexVector, y: &SimplexVector) -> u64 {
    let p = x.dot(y);
    let floor = 10_000u64;
    if p > 0.0 {
        floor.max((50.0 / p).ceil() as u64)
    } else {
        floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationProbe {
    pub role: Role,
    pub challenger_mean: f64,
    pub std_error: f64,
    pub equilibrium_value: f64,
    /// `(challenger_mean − equilibrium_value) / std_error`
    #[serde(with = "crate::report::extended_f64")]
    pub z_score: f64,
    pub truncation_rate: f64,
}

/// Plays `challenger` in `role` against the equilibrium strategy of the other player.
pub fn deviation_probe(
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    eq: &EquilibriumResult,
    challenger: &StrategyAgent,
    role: Role,
    cfg: &MonteCarloConfig,
) -> Result<DeviationProbe> {
    let (value, opponent) = match role {
        Role::Max => (eq.max_value, &eq.min_strategy),
        Role::Min => (eq.min_value, &eq.max_strategy),
    };
    let value = value.finite().ok_or_else(|| {
        Error::PreconditionViolated("deviation probe needs a finite equilibrium value".into())
    })?;
    let opponent = StrategyAgent::stationary_labeled(opponent.clone(), "equilibrium");
    let report = match role {
        Role::Max => monte_carlo(a, b, challenger, &opponent, cfg)?,
        Role::Min => monte_carlo(a, b, &opponent, challenger, cfg)?,
    };
    let s = match role {
        Role::Max => report.max_total,
        Role::Min => report.min_total,
    };
    let gap = s.mean - value;
    let z = if s.std_error > 0.0 {
        gap / s.std_error
    } else if gap.abs() <= 1e-12 * value.abs().max(1.0) {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    };
    Ok(DeviationProbe {
        role,
        challenger_mean: s.mean,
        std_error: s.std_error,
        equilibrium_value: value,
        z_score: z,
        truncation_rate: report.truncation_rate,
    })
}
