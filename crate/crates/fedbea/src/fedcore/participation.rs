//! Partial-participation client sampling.

use rand::Rng;

use crate::rng::{domain, stream};

/// Deterministic pseudo-random subset of `max(1, round(fraction * m))`
/// clients for the given round, returned in ascending order.
pub fn sample_participants(m: usize, fraction: f64, round: u64, seed: u64) -> Vec<usize> {
    let size = ((fraction * m as f64).round() as usize).clamp(1, m);
    if size == m {
        return (0..m).collect();
    }
    let mut ids: Vec<usize> = (0..m).collect();
    let mut rng = stream(seed, domain::PARTICIPATION, &[round]);
    for i in 0..size {
        let j = rng.gen_range(i..m);
        ids.swap(i, j);
    }
    let mut chosen = ids[..size].to_vec();
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_participation_is_everyone() {
        assert_eq!(sample_participants(5, 1.0, 3, 9), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(
            sample_participants(10, 0.3, 17, 4),
            sample_participants(10, 0.3, 17, 4)
        );
    }

    #[test]
    fn tiny_fraction_still_selects_one() {
        assert_eq!(sample_participants(10, 0.01, 0, 0).len(), 1);
    }

    #[test]
    fn selection_counts_are_balanced_over_rounds() {
        // fraction 0.5 of 10 clients over 1000 rounds: each selected 500 +/- 50
        let mut counts = [0usize; 10];
        for round in 0..1000 {
            for id in sample_participants(10, 0.5, round, 31) {
                counts[id] += 1;
            }
        }
        for (id, &count) in counts.iter().enumerate() {
            assert!(
                (count as i64 - 500).abs() <= 50,
                "client {id} selected {count} times"
            );
        }
    }
}
