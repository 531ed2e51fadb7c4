//! Matrix-multiplication benchmark: one kernel launched 300 times over the
//! same inputs, then a single barrier.

use crate::runtime::{
    ArgBlob, ArgLayout, Burst, FixedPlan, GridShape, KernelId, KernelInfo, RoutineCall,
};

pub const LAUNCHES: usize = 300;
pub const KERNEL: KernelId = KernelId(0);
/// Two full waves on the default 8×32 GPU.
pub const GRID: GridShape = GridShape {
    blocks: 512,
    threads_per_block: 256,
};

pub fn kernel() -> KernelInfo {
    KernelInfo {
        id: KERNEL,
        name: "matmul_tiled".into(),
        // a, b, c pointers, then m and n
        layout: ArgLayout::packed(&[8, 8, 8, 4, 4]),
        work_scale: 1.0,
    }
}

fn args() -> ArgBlob {
    let mut bytes = Vec::with_capacity(32);
    for ptr in [0x7000_0000_u64, 0x7100_0000, 0x7200_0000] {
        bytes.extend_from_slice(&ptr.to_le_bytes());
    }
    for dim in [1024_u32, 1024] {
        bytes.extend_from_slice(&dim.to_le_bytes());
    }
    ArgBlob::new(bytes)
}

/// The plan is the same for every seed: the inputs are fixed.
pub fn gen_mmult_workload(_seed: u64) -> FixedPlan {
    let launch = RoutineCall::launch(KERNEL, GRID, args());
    FixedPlan::single(
        vec![RoutineCall::register(kernel())],
        Burst {
            operations: vec![launch; LAUNCHES],
            terminal_barrier: true,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::PlanSource;

    #[test]
    fn shape() {
        let mut plan = gen_mmult_workload(1);
        assert_eq!(plan.prelude().len(), 1);
        let bursts = plan.next_inference().unwrap();
        assert_eq!(bursts.len(), 1);
        assert_eq!(bursts[0].operations.len(), LAUNCHES);
        assert!(bursts[0].terminal_barrier);
        assert!(bursts[0].operations.windows(2).all(|w| w[0] == w[1]));
        assert!(plan.next_inference().is_none());
        assert_eq!(
            gen_mmult_workload(1).inferences,
            gen_mmult_workload(99).inferences
        );
        assert_eq!(args().len(), kernel().layout.total_size());
    }
}
