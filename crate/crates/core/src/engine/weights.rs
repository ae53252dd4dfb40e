//! Pair, node and word weights inside one group.

use super::round::Group;
use super::WordId;
use crate::netgen::Network;

/// 0 on the diagonal, 1 for adjacent nodes, 0.5 for any other pair. Within
/// a group every non-adjacent pair sits at distance exactly 2.
#[inline]
pub fn pair_weight(net: &Network, i: usize, j: usize) -> f64 {
    if i == j {
        0.0
    } else if net.is_adjacent(i, j) {
        1.0
    } else {
        0.5
    }
}

/// Sum of pair weights between `i` and every member of the group.
pub fn node_weight(net: &Network, group: &Group, i: usize) -> f64 {
    group.members.iter().map(|&j| pair_weight(net, i, j)).sum()
}

/// Probability that `i` hears a word broadcast from `sources`: the pair
/// weight to the nearest source.
pub fn hearing_prob(net: &Network, i: usize, sources: &[usize]) -> f64 {
    debug_assert!(!sources.is_empty());
    sources
        .iter()
        .map(|&j| pair_weight(net, i, j))
        .fold(0.0, f64::max)
}

/// Weights for one round, indexed by member position (`0` is the seed) or
/// by candidate position.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    pub members: Vec<usize>,
    /// Row-major `|G| x |G|` pair weights.
    pub pair: Vec<f64>,
    pub node: Vec<f64>,
    /// Distinct spoken words, in order of first speaker.
    pub candidates: Vec<WordId>,
    pub word: Vec<f64>,
    pub prob: Vec<f64>,
}

impl WeightTable {
    pub fn group_size(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn pair_at(&self, a: usize, b: usize) -> f64 {
        self.pair[a * self.members.len() + b]
    }

    pub fn probability_of(&self, w: WordId) -> Option<f64> {
        self.candidates
            .iter()
            .position(|&c| c == w)
            .map(|k| self.prob[k])
    }
}

/// Builds the weight table from the word each member spoke; `spoken[k]`
/// belongs to `group.members[k]`.
pub fn word_weights(net: &Network, group: &Group, spoken: &[WordId]) -> WeightTable {
    let members = group.members.clone();
    let g = members.len();
    assert_eq!(spoken.len(), g, "one spoken word per member");

    let mut pair = vec![0.0; g * g];
    for a in 0..g {
        for b in a + 1..g {
            let p = pair_weight(net, members[a], members[b]);
            pair[a * g + b] = p;
            pair[b * g + a] = p;
        }
    }
    let node: Vec<f64> = (0..g)
        .map(|a| pair[a * g..(a + 1) * g].iter().sum())
        .collect();

    let mut candidates: Vec<WordId> = Vec::new();
    let mut word: Vec<f64> = Vec::new();
    for (a, &w) in spoken.iter().enumerate() {
        match candidates.iter().position(|&c| c == w) {
            Some(k) => word[k] += node[a],
            None => {
                candidates.push(w);
                word.push(node[a]);
            }
        }
    }
    let total: f64 = word.iter().sum();
    let prob = word.iter().map(|&x| x / total).collect();

    WeightTable {
        members,
        pair,
        node,
        candidates,
        word,
        prob,
    }
}
