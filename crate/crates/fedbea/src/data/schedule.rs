//! Per-epoch batch visit orders.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{domain, stream};

/// Deterministic permutation of `0..num_batches` for one (round, client,
/// epoch) cell, derived by hashing rather than by sequential draws so client
/// execution order cannot perturb it.
pub fn batch_schedule(
    num_batches: usize,
    client_id: usize,
    round: u64,
    epoch: usize,
    master_seed: u64,
) -> Result<Vec<usize>> {
    if num_batches == 0 {
        return Err(Error::Domain("schedule for an empty shard".into()));
    }
    let mut order: Vec<usize> = (0..num_batches).collect();
    let mut rng = stream(
        master_seed,
        domain::SCHEDULE,
        &[round, client_id as u64, epoch as u64],
    );
    for i in (1..num_batches).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn same_cell_same_order() {
        assert_eq!(
            batch_schedule(8, 3, 12, 2, 99).unwrap(),
            batch_schedule(8, 3, 12, 2, 99).unwrap()
        );
    }

    #[test]
    fn singleton_schedule() {
        assert_eq!(batch_schedule(1, 0, 0, 0, 0).unwrap(), vec![0]);
    }

    #[test]
    fn orders_are_near_uniform_over_epochs() {
        // 3 batches, 1000 epochs: each of the 6 orders should appear with
        // frequency 1/6 within +/- 0.05.
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for epoch in 0..1000 {
            let order = batch_schedule(3, 0, 0, epoch, 2024).unwrap();
            *counts.entry(order).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (order, &count) in &counts {
            let freq = count as f64 / 1000.0;
            assert!(
                (freq - 1.0 / 6.0).abs() <= 0.05,
                "order {order:?} frequency {freq}"
            );
        }
    }
}
