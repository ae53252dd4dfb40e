use serde::{Deserialize, Serialize};

use super::weights::{pair_weight, word_weights, WeightTable};
use super::{GameMode, GameParams, PopulationState, Vocabulary, WordId};
use crate::draw::Draw;
use crate::error::{Error, Result};
use crate::netgen::Network;

/// A seed node plus some of its neighbors. `members[0]` is the seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub seed: usize,
    pub members: Vec<usize>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub seed: usize,
    pub group_size: usize,
    /// Transmitted words in transmission order with their broadcast successes.
    pub transmitted: Vec<(WordId, usize)>,
    pub successful_members: usize,
    /// `successful_members / group_size`.
    pub sr: f64,
}

/// Uniform seed, then a uniform subset of `min(degree, n - 1)` of its
/// neighbors.
pub fn form_group<D: Draw + ?Sized>(net: &Network, n: usize, draw: &mut D) -> Group {
    let seed = draw.index(net.node_count());
    let neighbors = net.neighbors(seed);
    let take = neighbors.len().min(n - 1);
    let mut members = Vec::with_capacity(take + 1);
    members.push(seed);
    if take == neighbors.len() {
        members.extend_from_slice(neighbors);
    } else {
        // Partial Fisher-Yates.
        let mut pool = neighbors.to_vec();
        for t in 0..take {
            let j = t + draw.index(pool.len() - t);
            pool.swap(t, j);
        }
        members.extend_from_slice(&pool[..take]);
    }
    Group { seed, members }
}

/// The word an agent says: uniform over its memory, or an invented word
/// (which it then remembers) when the memory is empty.
pub fn speak<D: Draw + ?Sized>(
    pop: &mut PopulationState,
    agent: usize,
    vocabulary: Vocabulary,
    draw: &mut D,
) -> WordId {
    let words = pop.memory(agent).words();
    if !words.is_empty() {
        return words[draw.index(words.len())];
    }
    let w = match vocabulary {
        Vocabulary::FreshUnbounded => pop.invent(),
        Vocabulary::Finite(size) => WordId(draw.index(size as usize) as u64),
    };
    pop.learn(agent, w);
    w
}

/// Draws `count` words with replacement from the candidates, by `prob`.
/// The returned order is the transmission order.
pub fn select_transmitting_words<D: Draw + ?Sized>(
    table: &WeightTable,
    count: usize,
    draw: &mut D,
) -> Vec<WordId> {
    (0..count)
        .map(|_| table.candidates[draw.weighted(&table.word)])
        .collect()
}

/// How still-unsuccessful sources of a word fare after its broadcast.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feedback {
    /// Success with probability `n_succ / basis`.
    Probabilistic,
    /// Success iff `floor(n_succ / basis) == 1`.
    Floor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Speakers {
    AllMembers,
    /// Only the seed speaks, and exactly one word is transmitted.
    SeedOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundRules {
    pub speakers: Speakers,
    pub feedback: Feedback,
}

impl RoundRules {
    pub const NGG: RoundRules = RoundRules {
        speakers: Speakers::AllMembers,
        feedback: Feedback::Probabilistic,
    };

    /// The group game with both restrictions that turn it into the
    /// multiple-hearer game.
    pub const NGMH_REDUCTION: RoundRules = RoundRules {
        speakers: Speakers::SeedOnly,
        feedback: Feedback::Floor,
    };
}

/// Broadcasts `word` inside the group and applies feedback to its sources.
///
/// `spoken[k]` and `unsuccessful[k]` refer to member position `k` of
/// `table`. Sources are the members whose round-start word was `word`.
/// Returns the number of broadcast successes.
#[allow(clippy::too_many_arguments)]
pub fn transmit_word<D: Draw + ?Sized>(
    table: &WeightTable,
    spoken: &[WordId],
    word: WordId,
    pop: &mut PopulationState,
    unsuccessful: &mut [bool],
    basis: usize,
    feedback: Feedback,
    draw: &mut D,
) -> Result<usize> {
    let g = table.group_size();
    let sources: Vec<usize> = (0..g).filter(|&k| spoken[k] == word).collect();
    if sources.is_empty() {
        return Err(Error::UnknownSource(word.0));
    }

    let heard: Vec<usize> = (0..g)
        .filter(|&k| unsuccessful[k])
        .filter(|&k| {
            let p = sources
                .iter()
                .map(|&s| table.pair_at(k, s))
                .fold(0.0, f64::max);
            draw.bernoulli(p)
        })
        .collect();

    let mut n_succ = 0;
    for k in heard {
        let agent = table.members[k];
        if pop.memory(agent).contains(word) {
            pop.collapse(agent, word);
            unsuccessful[k] = false;
            n_succ += 1;
        } else {
            pop.learn(agent, word);
        }
    }

    for &s in &sources {
        if !unsuccessful[s] {
            continue;
        }
        let success = match feedback {
            Feedback::Probabilistic => draw.bernoulli(n_succ as f64 / basis as f64),
            Feedback::Floor => n_succ / basis == 1,
        };
        if success {
            pop.collapse(table.members[s], word);
            unsuccessful[s] = false;
        }
    }
    Ok(n_succ)
}

/// One group round of the game where every member speaks and hears.
pub fn run_group_round<D: Draw + ?Sized>(
    net: &Network,
    pop: &mut PopulationState,
    params: &GameParams,
    draw: &mut D,
) -> Result<RoundOutcome> {
    run_group_round_with(net, pop, params, RoundRules::NGG, draw)
}

pub fn run_group_round_with<D: Draw + ?Sized>(
    net: &Network,
    pop: &mut PopulationState,
    params: &GameParams,
    rules: RoundRules,
    draw: &mut D,
) -> Result<RoundOutcome> {
    let group = form_group(net, params.n, draw);
    let g = group.len();

    let spoken: Vec<WordId> = match rules.speakers {
        Speakers::AllMembers => group
            .members
            .iter()
            .map(|&a| speak(pop, a, params.vocabulary, draw))
            .collect(),
        Speakers::SeedOnly => {
            let w = speak(pop, group.seed, params.vocabulary, draw);
            // Silent members get a word no candidate can equal.
            let mut spoken = vec![WordId(u64::MAX); g];
            spoken[0] = w;
            spoken
        }
    };

    let table = match rules.speakers {
        Speakers::AllMembers => word_weights(net, &group, &spoken),
        Speakers::SeedOnly => {
            let mut t = word_weights(net, &group, &spoken);
            t.candidates.retain(|&c| c == spoken[0]);
            t.word = vec![t.node[0]];
            t.prob = vec![1.0];
            t
        }
    };

    let count = match rules.speakers {
        Speakers::AllMembers => params.transmit_count(g),
        Speakers::SeedOnly => 1,
    };
    let words = select_transmitting_words(&table, count, draw);

    let basis = params.basis_size(g);
    let mut unsuccessful = vec![true; g];
    let mut transmitted = Vec::with_capacity(words.len());
    for w in words {
        let n_succ = transmit_word(
            &table,
            &spoken,
            w,
            pop,
            &mut unsuccessful,
            basis,
            rules.feedback,
            draw,
        )?;
        transmitted.push((w, n_succ));
    }

    let successful_members = unsuccessful.iter().filter(|&&u| !u).count();
    Ok(RoundOutcome {
        seed: group.seed,
        group_size: g,
        transmitted,
        successful_members,
        sr: successful_members as f64 / g as f64,
    })
}

/// One round of the multiple-hearer game: only the seed speaks, every other
/// member hears it, and the seed succeeds iff `floor(n_succ / N) == 1`.
pub fn ngmh_round<D: Draw + ?Sized>(
    net: &Network,
    pop: &mut PopulationState,
    params: &GameParams,
    draw: &mut D,
) -> Result<RoundOutcome> {
    let group = form_group(net, params.n, draw);
    let seed = group.seed;
    let w = speak(pop, seed, params.vocabulary, draw);

    let hearers: Vec<usize> = group.members[1..]
        .iter()
        .copied()
        .filter(|&h| draw.bernoulli(pair_weight(net, h, seed)))
        .collect();
    let mut n_succ = 0;
    for h in hearers {
        if pop.memory(h).contains(w) {
            pop.collapse(h, w);
            n_succ += 1;
        } else {
            pop.learn(h, w);
        }
    }

    let seed_success = n_succ / params.basis_size(group.len()) == 1;
    if seed_success {
        pop.collapse(seed, w);
    }
    let successful_members = n_succ + usize::from(seed_success);
    Ok(RoundOutcome {
        seed,
        group_size: group.len(),
        transmitted: vec![(w, n_succ)],
        successful_members,
        sr: successful_members as f64 / group.len() as f64,
    })
}

/// One interaction of the pairwise game on a uniformly chosen edge, with a
/// uniformly chosen direction.
pub fn minimal_ng_round<D: Draw + ?Sized>(
    net: &Network,
    pop: &mut PopulationState,
    vocabulary: Vocabulary,
    draw: &mut D,
) -> Result<RoundOutcome> {
    if net.edge_count() == 0 {
        return Err(Error::Disconnected);
    }
    let (u, v) = net.edges()[draw.index(net.edge_count())];
    let (speaker, hearer) = if draw.index(2) == 0 { (u, v) } else { (v, u) };
    let w = speak(pop, speaker, vocabulary, draw);
    let success = pop.memory(hearer).contains(w);
    if success {
        pop.collapse(speaker, w);
        pop.collapse(hearer, w);
    } else {
        pop.learn(hearer, w);
    }
    let successful_members = if success { 2 } else { 0 };
    Ok(RoundOutcome {
        seed: speaker,
        group_size: 2,
        transmitted: vec![(w, usize::from(success))],
        successful_members,
        sr: successful_members as f64 / 2.0,
    })
}

/// One round of whichever game `params.mode` selects.
pub fn play_round<D: Draw + ?Sized>(
    net: &Network,
    pop: &mut PopulationState,
    params: &GameParams,
    draw: &mut D,
) -> Result<RoundOutcome> {
    match params.mode {
        GameMode::Ngg => run_group_round(net, pop, params, draw),
        GameMode::Ngmh => ngmh_round(net, pop, params, draw),
        GameMode::MinimalNg => minimal_ng_round(net, pop, params.vocabulary, draw),
    }
}
