//! Naming Game in Groups: self-organized consensus on complex networks.
//!
//! Agents on a network repeatedly form small groups around a random seed
//! node. Every group member speaks a word from its memory, a few words are
//! picked by a topology-aware weight and broadcast through the group, and
//! members that already knew a broadcast word drop every other word. The
//! population eventually agrees on a single word.
//!
//! * [`netgen`] builds the random, small-world and scale-free networks and
//!   measures their degree, path length and clustering.
//! * [`engine`] plays rounds of the group game and of two baselines.
//! * [`metrics`] records per-round word counts and summarizes runs.
//! * [`harness`] runs seeded, repeated parameter sweeps and writes artifacts.
//! * [`plot`] turns the written traces into SVG charts.
//!
//! ```
//! use ngg::engine::{run_to_convergence, GameParams};
//! use ngg::netgen::{gen_random_graph, compute_stats};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let net = gen_random_graph(100, 0.1, &mut rng)?;
//! let run = run_to_convergence(&net, &GameParams::new(10, 0.5), 7)?;
//! assert!(run.summary.converged);
//! assert_eq!(run.trace.last().unwrap().n_total, 100);
//! # Ok::<(), ngg::Error>(())
//! ```

pub mod draw;
pub mod engine;
mod error;
pub mod exhaustive;
pub mod harness;
pub mod metrics;
pub mod netgen;
pub mod plot;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/group-round.md")]
    mod group_round {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
