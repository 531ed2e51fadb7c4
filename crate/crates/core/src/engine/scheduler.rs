//! Block placement and the closed-form kernel timing model.

/// Outcome of placing a kernel's pending blocks on the SMs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    /// SM index of each placed block, in block order.
    pub placed: Vec<u32>,
    /// Blocks that found no free slot and must wait for residency to free.
    pub deferred: u32,
}

/// Places up to `blocks` blocks, each on the SM with the fewest resident
/// blocks (ties go to the lowest index), updating `resident` in place.
pub fn schedule_blocks(blocks: u32, resident: &mut [u32], max_per_sm: u32) -> Placement {
    let mut placed = Vec::new();
    for _ in 0..blocks {
        let Some((sm, _)) = resident
            .iter()
            .enumerate()
            .filter(|(_, &n)| n < max_per_sm)
            .min_by_key(|(i, &n)| (n, *i))
        else {
            break;
        };
        resident[sm] += 1;
        placed.push(sm as u32);
    }
    let deferred = blocks - placed.len() as u32;
    Placement { placed, deferred }
}

/// Number of full-occupancy rounds needed to run `blocks` blocks.
pub fn waves(blocks: u32, capacity: u32) -> u32 {
    blocks.div_ceil(capacity)
}

/// Duration of one block. Never zero, so every block occupies its slot.
pub fn block_cycles(base: u64, work_scale: f64, cold_factor: f64, jitter: f64) -> u64 {
    ((base as f64) * work_scale * cold_factor * jitter)
        .round()
        .max(1.0) as u64
}

/// Execution time of a kernel running alone on an otherwise idle GPU.
pub fn kernel_duration(blocks: u32, capacity: u32, block: u64) -> u64 {
    u64::from(waves(blocks, capacity)) * block
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eight_blocks_spread() {
        let mut r = vec![0; 8];
        let p = schedule_blocks(8, &mut r, 32);
        assert_eq!(p.placed, (0..8).collect::<Vec<_>>());
        assert_eq!(p.deferred, 0);
    }

    #[test]
    fn ninth_block_lands_on_sm0() {
        let mut r = vec![0; 8];
        let p = schedule_blocks(9, &mut r, 32);
        assert_eq!(p.placed[8], 0);
        assert_eq!(r[0], 2);
    }

    #[test]
    fn capacity_defers_excess() {
        let mut r = vec![0; 8];
        let p = schedule_blocks(300, &mut r, 32);
        assert_eq!(p.placed.len(), 256);
        assert_eq!(p.deferred, 300 - 8 * 32);
        assert!(r.iter().all(|&n| n == 32));
    }

    #[test]
    fn wave_arithmetic() {
        assert_eq!(kernel_duration(256, 256, 100), 100);
        assert_eq!(kernel_duration(512, 256, 100), 200);
        assert_eq!(kernel_duration(257, 256, 100), 200);
        assert_eq!(block_cycles(1000, 1.0, 4.0, 1.0), 4000);
        assert_eq!(block_cycles(1000, 0.0, 1.0, 1.0), 1);
    }

    fn oracle(blocks: u32, resident: &[u32], max: u32) -> (Vec<u32>, Vec<u32>) {
        let mut r = resident.to_vec();
        let mut placed = Vec::new();
        for _ in 0..blocks {
            let mut order: Vec<usize> = (0..r.len()).filter(|&i| r[i] < max).collect();
            order.sort_by(|&a, &b| r[a].cmp(&r[b]).then(a.cmp(&b)));
            match order.first() {
                Some(&sm) => {
                    r[sm] += 1;
                    placed.push(sm as u32);
                }
                None => break,
            }
        }
        (placed, r)
    }

    proptest! {
        #[test]
        fn placement_matches_oracle(start in proptest::collection::vec(0u32..=32, 8), blocks in 0u32..400) {
            let mut r = start.clone();
            let p = schedule_blocks(blocks, &mut r, 32);
            let (placed, after) = oracle(blocks, &start, 32);
            prop_assert_eq!(p.deferred as usize, blocks as usize - placed.len());
            prop_assert_eq!(p.placed, placed);
            prop_assert_eq!(r, after);
        }
    }
}
