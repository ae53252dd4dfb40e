//! Exact outcome distributions by enumerating every random branch.
//!
//! [`distribution`] runs a closure once per distinct sequence of draws,
//! walking the choice tree depth-first like an odometer, and merges equal
//! outcomes. It is only practical for tiny instances; the closure must
//! make a finite number of draws and be deterministic given them.

use crate::draw::Draw;

struct Choice {
    taken: usize,
    /// `(value, probability)` for every branch with nonzero probability.
    options: Vec<(usize, f64)>,
}

pub struct Enumerator<'a> {
    path: &'a mut Vec<Choice>,
    depth: usize,
    prob: f64,
}

impl Enumerator<'_> {
    fn choose(&mut self, options: Vec<(usize, f64)>) -> usize {
        if self.depth == self.path.len() {
            self.path.push(Choice { taken: 0, options });
        } else {
            debug_assert_eq!(self.path[self.depth].options.len(), options.len());
        }
        let choice = &self.path[self.depth];
        let (value, p) = choice.options[choice.taken];
        self.prob *= p;
        self.depth += 1;
        value
    }
}

impl Draw for Enumerator<'_> {
    fn index(&mut self, n: usize) -> usize {
        let p = 1.0 / n as f64;
        self.choose((0..n).map(|k| (k, p)).collect())
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        let p = p.clamp(0.0, 1.0);
        let options = [(1, p), (0, 1.0 - p)]
            .into_iter()
            .filter(|&(_, q)| q > 0.0)
            .collect();
        self.choose(options) == 1
    }

    fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let options = weights
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .map(|(k, &w)| (k, w / total))
            .collect();
        self.choose(options)
    }
}

/// Every outcome of `f` with its exact probability; equal outcomes merged.
pub fn distribution<T, F>(mut f: F) -> Vec<(T, f64)>
where
    T: PartialEq,
    F: FnMut(&mut Enumerator<'_>) -> T,
{
    let mut out: Vec<(T, f64)> = Vec::new();
    let mut path: Vec<Choice> = Vec::new();
    loop {
        let mut e = Enumerator {
            path: &mut path,
            depth: 0,
            prob: 1.0,
        };
        let value = f(&mut e);
        let (prob, depth) = (e.prob, e.depth);
        path.truncate(depth);
        match out.iter_mut().find(|(v, _)| *v == value) {
            Some((_, p)) => *p += prob,
            None => out.push((value, prob)),
        }
        while let Some(last) = path.last_mut() {
            if last.taken + 1 < last.options.len() {
                last.taken += 1;
                break;
            }
            path.pop();
        }
        if path.is_empty() {
            return out;
        }
    }
}

/// True when both distributions give every outcome the same probability,
/// within `tol`.
pub fn same_distribution<T: PartialEq>(a: &[(T, f64)], b: &[(T, f64)], tol: f64) -> bool {
    let covered = |x: &[(T, f64)], y: &[(T, f64)]| {
        x.iter().all(|(v, p)| {
            let q = y.iter().find(|(u, _)| u == v).map_or(0.0, |(_, q)| *q);
            (p - q).abs() <= tol
        })
    };
    covered(a, b) && covered(b, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dice_sum() {
        let d = distribution(|e| e.index(6) + e.index(6));
        assert_eq!(d.len(), 11);
        // Zero-based faces: the modal sum is 5.
        let modal = d.iter().find(|(v, _)| *v == 5).unwrap().1;
        assert!((modal - 6.0 / 36.0).abs() < 1e-15);
        assert!((d.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_dependent_depth() {
        // Flip; on heads roll a 3-sided die.
        let d = distribution(|e| if e.bernoulli(0.25) { 1 + e.index(3) } else { 0 });
        let p = |k| d.iter().find(|(v, _)| *v == k).unwrap().1;
        assert!((p(0) - 0.75).abs() < 1e-15);
        assert!((p(2) - 0.25 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_branches_are_skipped() {
        let d = distribution(|e| e.weighted(&[0.0, 2.0, 6.0]));
        assert_eq!(d, vec![(1, 0.25), (2, 0.75)]);
        let certain = distribution(|e| e.bernoulli(1.0));
        assert_eq!(certain, vec![(true, 1.0)]);
    }

    #[test]
    fn distribution_comparison() {
        let a = vec![(1, 0.5), (2, 0.5)];
        let b = vec![(2, 0.5), (1, 0.5)];
        assert!(same_distribution(&a, &b, 0.0));
        assert!(!same_distribution(&a, &[(1, 1.0)], 1e-9));
    }
}
