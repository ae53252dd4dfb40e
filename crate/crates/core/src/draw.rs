//! The source of randomness for game rounds.
//!
//! Every stochastic choice a round makes goes through [`Draw`]. Any
//! [`rand::Rng`] implements it, which is what simulations use. The
//! [`exhaustive`](crate::exhaustive) module implements it a second way, by
//! walking every branch, to compute exact transition distributions.

use rand::Rng;

pub trait Draw {
    /// Uniform index in `0..n`. `n` must be nonzero.
    fn index(&mut self, n: usize) -> usize;

    /// `true` with probability `p`. Values outside `[0, 1]` are clamped.
    fn bernoulli(&mut self, p: f64) -> bool;

    /// Index `k` with probability `weights[k] / sum(weights)`.
    fn weighted(&mut self, weights: &[f64]) -> usize;
}

impl<R: Rng + ?Sized> Draw for R {
    fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        if n == 1 {
            0
        } else {
            self.random_range(0..n)
        }
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.random::<f64>() < p
        }
    }

    fn weighted(&mut self, weights: &[f64]) -> usize {
        debug_assert!(!weights.is_empty());
        if weights.len() == 1 {
            return 0;
        }
        let total: f64 = weights.iter().sum();
        let mut target = self.random::<f64>() * total;
        for (k, &w) in weights.iter().enumerate() {
            if target < w {
                return k;
            }
            target -= w;
        }
        // Rounding can leave `target` marginally past the last bucket.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_draws_consume_nothing() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(a.index(1), 0);
        assert!(a.bernoulli(1.0));
        assert!(!a.bernoulli(0.0));
        assert_eq!(a.weighted(&[3.0]), 0);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn weighted_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hits = (0..10_000)
            .filter(|_| rng.weighted(&[3.0, 1.0]) == 0)
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 0.75).abs() < 0.02, "{freq}");
    }

    #[test]
    fn weighted_never_picks_zero_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            assert_ne!(rng.weighted(&[0.0, 1.0, 0.0]), 0);
        }
    }
}
