//! Game sessions: a frozen bot strategy, a seeded stream and the round history.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ruc_core::analytics::{GameValue, Role};
use ruc_core::handcricket::{
    v1_equilibrium, v1_payoff_matrix, v2_equilibrium, v2_payoff_matrix, ScoreProfile,
};
use ruc_core::linalg::{PayoffMatrix, SimplexVector};
use ruc_core::simulator::{CollisionRule, RngSpec, StreamId};
use ruc_core::solver::solve;

/// Tolerance for equilibria computed at session creation.
pub const SOLVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GameSpec {
    HandCricket { variant: u8, scores: Vec<f64> },
    Matrices { a: PayoffMatrix, b: PayoffMatrix },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateRequest {
    pub spec: GameSpec,
    /// The human's role; `batter`/`bowler` are accepted as aliases of `max`/`min`.
    pub role: Role,
    #[serde(default)]
    pub rule: CollisionRule,
    pub seed: Option<u64>,
    /// Include the bot's mixed strategy in responses; defaults to the service setting.
    pub reveal_strategy: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Running,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub human: f64,
    pub bot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub human_action: usize,
    pub bot_action: usize,
    pub human_delta: f64,
    pub bot_delta: f64,
    pub collision: bool,
}

/// Response to a move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    #[serde(flatten)]
    pub record: RoundRecord,
    pub totals: Totals,
    pub collisions: u64,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub spec: GameSpec,
    pub human_role: Role,
    pub rule: CollisionRule,
    pub seed: u64,
    pub n_actions: usize,
    pub action_labels: Vec<String>,
    /// Equilibrium value of the game for the human's role.
    pub equilibrium_value: GameValue,
    pub bot_strategy: Option<SimplexVector>,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    #[serde(flatten)]
    pub summary: SessionSummary,
    pub history: Vec<RoundRecord>,
    pub totals: Totals,
    pub rounds: u64,
    pub collisions: u64,
    /// Revealed once the session is finished.
    pub threshold: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionError {
    Unsolvable(String),
    UnknownSession(String),
    Finished,
    ActionOutOfRange { action: usize, n: usize },
    Capacity(usize),
    Transcript(String),
}

/// A solved game ready to be played.
#[derive(Debug, Clone)]
pub struct SolvedGame {
    pub a: PayoffMatrix,
    pub b: PayoffMatrix,
    pub max_strategy: SimplexVector,
    pub min_strategy: SimplexVector,
    pub max_value: GameValue,
    pub min_value: GameValue,
    pub labels: Vec<String>,
}

fn label(s: f64) -> String {
    format!("{s}")
}

pub fn solve_spec(spec: &GameSpec) -> Result<SolvedGame, SessionError> {
    let err = |e: ruc_core::Error| SessionError::Unsolvable(e.to_string());
    let (a, b, eq, labels) = match spec {
        GameSpec::HandCricket { variant, scores } => {
            let s = ScoreProfile::new(scores.clone()).map_err(err)?;
            let mut labels: Vec<String> = s.scores().iter().map(|&v| label(v)).collect();
            match variant {
                1 => {
                    let a = v1_payoff_matrix(&s);
                    (a.clone(), a, v1_equilibrium(&s, SOLVE_TOL).map_err(err)?, labels)
                }
                2 => {
                    let a = v2_payoff_matrix(&s);
                    labels.push("defend".into());
                    (a.clone(), a, v2_equilibrium(&s).map_err(err)?, labels)
                }
                v => return Err(SessionError::Unsolvable(format!("unknown variant {v}"))),
            }
        }
        GameSpec::Matrices { a, b } => {
            let eq = solve(a, b, SOLVE_TOL).map_err(err)?;
            let labels = (0..a.n()).map(|i| i.to_string()).collect();
            (a.clone(), b.clone(), eq, labels)
        }
    };
    Ok(SolvedGame {
        a,
        b,
        max_strategy: eq.max_strategy,
        min_strategy: eq.min_strategy,
        max_value: eq.max_value,
        min_value: eq.min_value,
        labels,
    })
}

pub struct Session {
    id: String,
    spec: GameSpec,
    human_role: Role,
    rule: CollisionRule,
    seed: u64,
    game: SolvedGame,
    bot_strategy: SimplexVector,
    reveal: bool,
    sampler: WeightedIndex<f64>,
    bot_rng: ChaCha8Rng,
    threshold: u64,
    collisions: u64,
    history: Vec<RoundRecord>,
    totals: Totals,
    state: SessionState,
    last_access: Instant,
    transcript: Option<File>,
}

impl Session {
    pub fn new(id: String, req: &CreateRequest, game: SolvedGame, seed: u64, reveal: bool) -> Result<Self, SessionError> {
        req.rule
            .validate()
            .map_err(|e| SessionError::Unsolvable(e.to_string()))?;
        let bot_strategy = match req.role {
            Role::Max => game.min_strategy.clone(),
            Role::Min => game.max_strategy.clone(),
        };
        let sampler = WeightedIndex::new(bot_strategy.as_slice().iter().copied())
            .map_err(|e| SessionError::Unsolvable(e.to_string()))?;
        let rng = RngSpec::new(seed);
        let bot_stream = match req.role {
            Role::Max => StreamId::MinPlayer,
            Role::Min => StreamId::MaxPlayer,
        };
        let threshold = req.rule.draw(&mut rng.stream(0, StreamId::Threshold));
        Ok(Self {
            id,
            spec: req.spec.clone(),
            human_role: req.role,
            rule: req.rule,
            seed,
            game,
            bot_strategy,
            reveal,
            sampler,
            bot_rng: rng.stream(0, bot_stream),
            threshold,
            collisions: 0,
            history: Vec::new(),
            totals: Totals { human: 0.0, bot: 0.0 },
            state: if threshold == 0 {
                SessionState::Finished
            } else {
                SessionState::Running
            },
            last_access: Instant::now(),
            transcript: None,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.game.a.n()
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            spec: self.spec.clone(),
            human_role: self.human_role,
            rule: self.rule,
            seed: self.seed,
            n_actions: self.n_actions(),
            action_labels: self.game.labels.clone(),
            equilibrium_value: match self.human_role {
                Role::Max => self.game.max_value,
                Role::Min => self.game.min_value,
            },
            bot_strategy: self.reveal.then(|| self.bot_strategy.clone()),
            state: self.state,
        }
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            summary: self.summary(),
            history: self.history.clone(),
            totals: self.totals,
            rounds: self.history.len() as u64,
            collisions: self.collisions,
            threshold: (self.state == SessionState::Finished).then_some(self.threshold),
        }
    }

    /// Plays one round. The bot draws only after the human's action is known.
    pub fn play(&mut self, action: usize) -> Result<RoundOutcome, SessionError> {
        if self.state == SessionState::Finished {
            return Err(SessionError::Finished);
        }
        let n = self.n_actions();
        if action >= n {
            return Err(SessionError::ActionOutOfRange { action, n });
        }
        let bot = self.sampler.sample(&mut self.bot_rng);
        let (i, j) = match self.human_role {
            Role::Max => (action, bot),
            Role::Min => (bot, action),
        };
        let (da, db) = (self.game.a.get(i, j), self.game.b.get(i, j));
        let (human_delta, bot_delta) = match self.human_role {
            Role::Max => (da, db),
            Role::Min => (db, da),
        };
        let collision = i == j;
        self.totals.human += human_delta;
        self.totals.bot += bot_delta;
        if collision {
            self.collisions += 1;
            if self.collisions >= self.threshold {
                self.state = SessionState::Finished;
            }
        }
        let record = RoundRecord {
            round: self.history.len() as u64 + 1,
            human_action: action,
            bot_action: bot,
            human_delta,
            bot_delta,
            collision,
        };
        self.history.push(record);
        let outcome = RoundOutcome {
            record,
            totals: self.totals,
            collisions: self.collisions,
            state: self.state,
        };
        self.append("move", &outcome)?;
        Ok(outcome)
    }

    fn open_transcript(&mut self, dir: &Path) -> Result<(), SessionError> {
        let path: PathBuf = dir.join(format!("{}.jsonl", self.id));
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| SessionError::Transcript(format!("{}: {e}", path.display())))?;
        self.transcript = Some(file);
        let summary = self.summary();
        self.append("create", &summary)
    }

    fn append<T: Serialize>(&mut self, event: &str, body: &T) -> Result<(), SessionError> {
        if let Some(f) = &mut self.transcript {
            let line = serde_json::json!({ "event": event, "body": body });
            writeln!(f, "{line}").map_err(|e| SessionError::Transcript(e.to_string()))?;
        }
        Ok(())
    }

    fn expired(&self, now: Instant, ttl: Duration) -> bool {
        now.duration_since(self.last_access) > ttl
    }
}

#[derive(Debug, Clone)]
pub struct StoreConfig {
    pub ttl: Duration,
    pub max_sessions: usize,
    pub transcript_dir: Option<PathBuf>,
    pub reveal_strategy: bool,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            ttl: Duration::from_secs(3600),
            max_sessions: 10_000,
            transcript_dir: None,
            reveal_strategy: true,
        }
    }
}

/// In-memory session table. Each session has its own lock, so moves on one session are
/// serialized while different sessions proceed independently.
pub struct SessionStore {
    config: StoreConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    pub fn new(config: StoreConfig) -> Self {
        Self {
            config,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops idle sessions and returns how many were removed.
    pub fn sweep(&self) -> usize {
        let now = Instant::now();
        let mut map = self.sessions.lock().unwrap();
        let before = map.len();
        map.retain(|_, s| !s.lock().unwrap().expired(now, self.config.ttl));
        before - map.len()
    }

    pub fn insert(&self, req: &CreateRequest, game: SolvedGame) -> Result<SessionSummary, SessionError> {
        if self.len() >= self.config.max_sessions {
            self.sweep();
        }
        let seed = req.seed.unwrap_or_else(rand::random);
        let reveal = req.reveal_strategy.unwrap_or(self.config.reveal_strategy);
        let mut map = self.sessions.lock().unwrap();
        if map.len() >= self.config.max_sessions {
            return Err(SessionError::Capacity(self.config.max_sessions));
        }
        let id = loop {
            let id = format!("{:032x}", rand::random::<u128>());
            if !map.contains_key(&id) {
                break id;
            }
        };
        let mut session = Session::new(id.clone(), req, game, seed, reveal)?;
        if let Some(dir) = &self.config.transcript_dir {
            session.open_transcript(dir)?;
        }
        let summary = session.summary();
        map.insert(id, Arc::new(Mutex::new(session)));
        Ok(summary)
    }

    /// Runs `f` under the session's lock, refreshing its idle timer.
    pub fn with_session<R>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<R, SessionError>,
    ) -> Result<R, SessionError> {
        let unknown = || SessionError::UnknownSession(id.to_string());
        let session = self.sessions.lock().unwrap().get(id).cloned().ok_or_else(unknown)?;
        let mut s = session.lock().unwrap();
        let now = Instant::now();
        if s.expired(now, self.config.ttl) {
            drop(s);
            self.sessions.lock().unwrap().remove(id);
            return Err(unknown());
        }
        s.last_access = now;
        f(&mut s)
    }
}
