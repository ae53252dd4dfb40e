//! Game state and the round loop.
//!
//! A run starts from empty memories and plays rounds until every agent
//! holds the same single word. [`GameMode::Ngg`] is the group game where
//! every member both speaks and hears; [`GameMode::Ngmh`] lets only the
//! group seed speak; [`GameMode::MinimalNg`] is the classic pairwise game.

mod round;
mod weights;

use std::fmt;
use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::draw::Draw;
use crate::error::{Error, Result};
use crate::metrics::{self, MetricsTrace, RunSummary};
use crate::netgen::Network;

pub use round::{
    form_group, minimal_ng_round, ngmh_round, play_round, run_group_round, run_group_round_with,
    select_transmitting_words, speak, transmit_word, Feedback, Group, RoundOutcome, RoundRules,
    Speakers,
};
pub use weights::{hearing_prob, node_weight, pair_weight, word_weights, WeightTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WordId(pub u64);

impl fmt::Display for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// Words known to one agent, in the order they were learned.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AgentMemory {
    words: Vec<WordId>,
}

impl AgentMemory {
    pub fn words(&self) -> &[WordId] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: WordId) -> bool {
        self.words.contains(&w)
    }
}

/// Memories of all `m` agents plus running word counts.
#[derive(Clone, Debug)]
pub struct PopulationState {
    memories: Vec<AgentMemory>,
    next_fresh_word: u64,
    /// Number of agents holding each word, indexed by word id.
    holders: Vec<u32>,
    distinct: usize,
    total: usize,
}

impl PartialEq for PopulationState {
    fn eq(&self, other: &Self) -> bool {
        self.memories == other.memories && self.next_fresh_word == other.next_fresh_word
    }
}

impl Eq for PopulationState {}

impl Hash for PopulationState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.memories.hash(state);
        self.next_fresh_word.hash(state);
    }
}

impl PopulationState {
    /// `m` agents with empty memories.
    pub fn new(m: usize) -> Self {
        PopulationState {
            memories: vec![AgentMemory::default(); m],
            next_fresh_word: 0,
            holders: Vec::new(),
            distinct: 0,
            total: 0,
        }
    }

    /// Builds a state from explicit memories. `next_fresh_word` must exceed
    /// every id already in use.
    pub fn from_memories(memories: Vec<Vec<WordId>>, next_fresh_word: u64) -> Result<Self> {
        let mut pop = PopulationState::new(memories.len());
        pop.next_fresh_word = next_fresh_word;
        for (i, words) in memories.into_iter().enumerate() {
            for w in words {
                if pop.memories[i].contains(w) {
                    return Err(Error::invalid(
                        "memories",
                        format!("agent {i} holds {w} twice"),
                    ));
                }
                pop.learn(i, w);
            }
        }
        Ok(pop)
    }

    pub fn agent_count(&self) -> usize {
        self.memories.len()
    }

    pub fn memory(&self, agent: usize) -> &AgentMemory {
        &self.memories[agent]
    }

    pub fn memories(&self) -> &[AgentMemory] {
        &self.memories
    }

    pub fn next_fresh_word(&self) -> u64 {
        self.next_fresh_word
    }

    /// Total number of words summed over all memories.
    pub fn n_total(&self) -> usize {
        self.total
    }

    /// Number of distinct words present anywhere in the population.
    pub fn n_diff(&self) -> usize {
        self.distinct
    }

    fn invent(&mut self) -> WordId {
        let w = WordId(self.next_fresh_word);
        self.next_fresh_word += 1;
        w
    }

    fn gain(&mut self, w: WordId) {
        let idx = w.0 as usize;
        if idx >= self.holders.len() {
            self.holders.resize(idx + 1, 0);
        }
        if self.holders[idx] == 0 {
            self.distinct += 1;
        }
        self.holders[idx] += 1;
        self.total += 1;
    }

    fn lose(&mut self, w: WordId) {
        let h = &mut self.holders[w.0 as usize];
        *h -= 1;
        if *h == 0 {
            self.distinct -= 1;
        }
        self.total -= 1;
    }

    /// Appends `w` to the agent's memory unless it is already there.
    pub fn learn(&mut self, agent: usize, w: WordId) {
        if !self.memories[agent].contains(w) {
            self.memories[agent].words.push(w);
            self.gain(w);
        }
    }

    /// Replaces the agent's memory with exactly `{w}`.
    pub fn collapse(&mut self, agent: usize, w: WordId) {
        let old = std::mem::take(&mut self.memories[agent].words);
        for x in old {
            self.lose(x);
        }
        self.memories[agent].words.push(w);
        self.gain(w);
    }
}

/// The word every agent agrees on, if the population has converged.
pub fn is_converged(pop: &PopulationState) -> Option<WordId> {
    // With one distinct word and no duplicates inside a memory, a total of
    // `m` words means every agent holds exactly that word.
    if pop.n_diff() == 1 && pop.n_total() == pop.agent_count() {
        Some(pop.memories[0].words[0])
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameMode {
    #[default]
    Ngg,
    Ngmh,
    MinimalNg,
}

impl fmt::Display for GameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameMode::Ngg => "ngg",
            GameMode::Ngmh => "ngmh",
            GameMode::MinimalNg => "minimal_ng",
        })
    }
}

/// Where a speaker with an empty memory draws its word from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vocabulary {
    /// Every invention is a brand-new word.
    #[default]
    FreshUnbounded,
    /// Uniform over `WordId(0)..WordId(size)`.
    Finite(u64),
}

/// Which group size scales the transmitted-word count and the feedback
/// probability: the configured `N`, or the size of the group actually formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSizeBasis {
    #[default]
    Nominal,
    Actual,
}

pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000;

fn default_max_iterations() -> u64 {
    DEFAULT_MAX_ITERATIONS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameParams {
    /// Nominal group size `N`.
    pub n: usize,
    /// Transmitting proportion: `max(1, round(beta * N))` words per round.
    pub beta: f64,
    #[serde(default)]
    pub mode: GameMode,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: u64,
    #[serde(default)]
    pub vocabulary: Vocabulary,
    #[serde(default)]
    pub group_size_basis: GroupSizeBasis,
}

impl GameParams {
    pub fn new(n: usize, beta: f64) -> Self {
        GameParams {
            n,
            beta,
            mode: GameMode::Ngg,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            vocabulary: Vocabulary::FreshUnbounded,
            group_size_basis: GroupSizeBasis::Nominal,
        }
    }

    pub fn with_mode(mut self, mode: GameMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_max_iterations(mut self, cap: u64) -> Self {
        self.max_iterations = cap;
        self
    }

    /// Checks the parameter ranges that do not depend on the network.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(
                "n",
                format!("group size must be at least 2, got {}", self.n),
            ));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid(
                "beta",
                format!("must lie in (0, 1], got {}", self.beta),
            ));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        if self.vocabulary == Vocabulary::Finite(0) {
            return Err(Error::invalid(
                "vocabulary",
                "finite vocabulary must be nonempty",
            ));
        }
        Ok(())
    }

    pub fn validate_for(&self, m: usize) -> Result<()> {
        self.validate()?;
        if self.n > m {
            return Err(Error::invalid(
                "n",
                format!("group size {} exceeds network size {m}", self.n),
            ));
        }
        Ok(())
    }

    /// Group size used in `beta * N` and in the feedback denominator.
    pub fn basis_size(&self, actual: usize) -> usize {
        match self.group_size_basis {
            GroupSizeBasis::Nominal => self.n,
            GroupSizeBasis::Actual => actual,
        }
    }

    /// Number of transmitting words for a group of `actual` members.
    pub fn transmit_count(&self, actual: usize) -> usize {
        ((self.beta * self.basis_size(actual) as f64).round() as usize).max(1)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: MetricsTrace,
    pub summary: RunSummary,
}

/// Plays rounds from empty memories until convergence or the iteration cap,
/// seeding the random stream from `seed`.
pub fn run_to_convergence(net: &Network, params: &GameParams, seed: u64) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_with(net, params, &mut rng)
}

/// Like [`run_to_convergence`] with a caller-supplied random stream.
///
/// Hitting `max_iterations` is not an error: the summary comes back with
/// `converged == false`.
pub fn run_with<D: Draw + ?Sized>(
    net: &Network,
    params: &GameParams,
    draw: &mut D,
) -> Result<RunOutcome> {
    params.validate_for(net.node_count())?;
    if !net.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut pop = PopulationState::new(net.node_count());
    let mut trace = MetricsTrace::default();
    let mut word = None;
    for iteration in 1..=params.max_iterations {
        let outcome = play_round(net, &mut pop, params, draw)?;
        trace.push(metrics::snapshot(&pop, &outcome, iteration));
        word = is_converged(&pop);
        if word.is_some() {
            break;
        }
    }
    let mut summary = metrics::summarize(&trace, net.node_count())?;
    summary.converged_word = word;
    Ok(RunOutcome { trace, summary })
}
