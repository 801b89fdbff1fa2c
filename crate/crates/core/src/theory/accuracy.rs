use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix as WeightMatrix;

use crate::error::{Error, Result};

/// Fraction of points whose predicted label matches the ground truth under
/// the best one-to-one relabeling, found by the Hungarian method on the
/// contingency table.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let k = 1 + pred.iter().chain(truth).copied().max().unwrap_or(0);
    let mut table = vec![0i64; k * k];
    for (&p, &t) in pred.iter().zip(truth) {
        table[p * k + t] += 1;
    }
    let weights = WeightMatrix::from_vec(k, k, table).expect("square contingency table");
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn brute_force(pred: &[usize], truth: &[usize], k: usize) -> f64 {
        fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
            if items.len() <= 1 {
                return vec![items];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.clone();
                let head = rest.remove(i);
                for mut p in permutations(rest) {
                    p.insert(0, head);
                    out.push(p);
                }
            }
            out
        }
        permutations((0..k).collect())
            .iter()
            .map(|perm| pred.iter().zip(truth).filter(|(&p, &t)| perm[p] == t).count())
            .max()
            .unwrap() as f64
            / pred.len() as f64
    }

    #[test]
    fn small_examples() {
        assert_eq!(clustering_accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert!((clustering_accuracy(&[0, 1, 1], &[0, 0, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(clustering_accuracy(&[0], &[0, 1]).unwrap_err(), Error::LengthMismatch(1, 2));
    }

    #[test]
    fn matches_exhaustive_permutations() {
        let mut rng = Rng::new(21);
        for k in 2..=6 {
            for _ in 0..20 {
                let n = 8 + rng.below(10);
                let pred: Vec<usize> = (0..n).map(|_| rng.below(k)).collect();
                let truth: Vec<usize> = (0..n).map(|_| rng.below(k)).collect();
                let kk = 1 + pred.iter().chain(&truth).max().unwrap();
                let a = clustering_accuracy(&pred, &truth).unwrap();
                assert!((a - brute_force(&pred, &truth, kk)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn invariant_to_relabeling() {
        let mut rng = Rng::new(2);
        let pred: Vec<usize> = (0..30).map(|_| rng.below(4)).collect();
        let truth: Vec<usize> = (0..30).map(|_| rng.below(4)).collect();
        let base = clustering_accuracy(&pred, &truth).unwrap();
        let perm = [2, 0, 3, 1];
        let p2: Vec<usize> = pred.iter().map(|&l| perm[l]).collect();
        let t2: Vec<usize> = truth.iter().map(|&l| perm[3 - l]).collect();
        assert_eq!(clustering_accuracy(&p2, &truth).unwrap(), base);
        assert_eq!(clustering_accuracy(&pred, &t2).unwrap(), base);
    }
}
