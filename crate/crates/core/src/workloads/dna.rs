//! Neural-network inference benchmark: repeated inferences, each a few long
//! bursts of small kernels mixed with copies and stream-ordered calls.
//!
//! The shape of an inference (bursts, kernels, grids, copy sizes) is fixed
//! by the seed; every inference gets fresh random inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::runtime::{
    ArgBlob, ArgLayout, Burst, CopyMode, CopySpec, GridShape, HostFn, KernelId, KernelInfo,
    PlanSource, RoutineCall,
};

/// Generator parameters. The defaults describe a synthetic model; nothing
/// here is measured from a real network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DnaParams {
    pub bursts: (u32, u32),
    pub calls_per_burst: (u32, u32),
    pub kernel_pool: (u32, u32),
    pub blocks: (u32, u32),
    pub work_scale: (f64, f64),
    pub copy_bytes: (u64, u64),
    /// Probabilities of a copy, a stream-ordered call and a host callback;
    /// the rest are kernel launches.
    pub p_copy: f64,
    pub p_other: f64,
    pub p_host_fn: f64,
}

impl Default for DnaParams {
    fn default() -> Self {
        Self {
            bursts: (2, 4),
            calls_per_burst: (30, 80),
            kernel_pool: (12, 16),
            blocks: (8, 256),
            work_scale: (0.02, 0.25),
            copy_bytes: (4 << 10, 256 << 10),
            p_copy: 0.15,
            p_other: 0.12,
            p_host_fn: 0.03,
        }
    }
}

const OTHER_SYMBOLS: [&str; 3] = ["cudaMemsetAsync", "cudaEventRecord", "cudaStreamWaitEvent"];

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Kernel { id: KernelId, grid: GridShape },
    Copy(CopySpec),
    Other(&'static str),
    HostFn,
}

/// Seeded structure of one inference.
#[derive(Debug, Clone, PartialEq)]
pub struct DnaModel {
    kernels: Vec<KernelInfo>,
    bursts: Vec<Vec<Shape>>,
}

fn draw<T: rand::distributions::uniform::SampleUniform + PartialOrd + Copy>(
    rng: &mut ChaCha8Rng,
    (lo, hi): (T, T),
) -> T {
    rng.gen_range(lo..=hi)
}

impl DnaModel {
    pub fn new(seed: u64, p: &DnaParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = draw(&mut rng, p.kernel_pool).max(1);
        let kernels: Vec<KernelInfo> = (0..pool)
            .map(|i| {
                let params = rng.gen_range(2..=6);
                let sizes: Vec<u32> = (0..params).map(|_| [4, 8][rng.gen_range(0..2)]).collect();
                KernelInfo {
                    id: KernelId(i),
                    name: format!("layer_{i}"),
                    layout: ArgLayout::packed(&sizes),
                    work_scale: draw(&mut rng, p.work_scale),
                }
            })
            .collect();
        let grids: Vec<GridShape> = (0..pool)
            .map(|_| GridShape {
                blocks: draw(&mut rng, p.blocks),
                threads_per_block: [64, 128, 256][rng.gen_range(0..3)],
            })
            .collect();
        let n_bursts = draw(&mut rng, p.bursts);
        let bursts = (0..n_bursts)
            .map(|_| {
                let calls = draw(&mut rng, p.calls_per_burst);
                (0..calls)
                    .map(|_| {
                        let x: f64 = rng.gen();
                        if x < p.p_copy {
                            let mode = if rng.gen_bool(0.5) {
                                CopyMode::HostToDevice
                            } else {
                                CopyMode::DeviceToHost
                            };
                            Shape::Copy(CopySpec {
                                dst: rng.gen::<u32>().into(),
                                src: rng.gen::<u32>().into(),
                                size_bytes: draw(&mut rng, p.copy_bytes),
                                mode,
                            })
                        } else if x < p.p_copy + p.p_other {
                            Shape::Other(OTHER_SYMBOLS[rng.gen_range(0..OTHER_SYMBOLS.len())])
                        } else if x < p.p_copy + p.p_other + p.p_host_fn {
                            Shape::HostFn
                        } else {
                            let k = rng.gen_range(0..pool) as usize;
                            Shape::Kernel {
                                id: kernels[k].id,
                                grid: grids[k],
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Self { kernels, bursts }
    }

    pub fn kernels(&self) -> &[KernelInfo] {
        &self.kernels
    }

    pub fn burst_lengths(&self) -> Vec<usize> {
        self.bursts.iter().map(Vec::len).collect()
    }

    fn instantiate(&self, rng: &mut ChaCha8Rng) -> Vec<Burst> {
        self.bursts
            .iter()
            .map(|shapes| Burst {
                operations: shapes
                    .iter()
                    .map(|s| match s {
                        Shape::Kernel { id, grid } => {
                            let size = self.kernels[id.index()].layout.total_size();
                            let mut bytes = vec![0u8; size];
                            rng.fill(bytes.as_mut_slice());
                            RoutineCall::launch(*id, *grid, ArgBlob::new(bytes))
                        }
                        Shape::Copy(spec) => RoutineCall::memcpy_async(*spec),
                        Shape::Other(symbol) => RoutineCall::other(symbol),
                        Shape::HostFn => RoutineCall::host_func(HostFn::User),
                    })
                    .collect(),
                terminal_barrier: true,
            })
            .collect()
    }
}

/// One instance of the benchmark: endless inferences unless capped.
#[derive(Debug, Clone)]
pub struct DnaPlan {
    model: DnaModel,
    seed: u64,
    instance: u32,
    issued: u32,
    limit: Option<u32>,
}

impl DnaPlan {
    pub fn issued(&self) -> u32 {
        self.issued
    }
}

fn input_seed(seed: u64, instance: u32, inference: u32) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ u64::from(instance).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ u64::from(inference).wrapping_mul(0x1656_67B1_9E37_79F9)
}

pub fn gen_dna_workload(
    seed: u64,
    instance: u32,
    params: &DnaParams,
    limit: Option<u32>,
) -> DnaPlan {
    DnaPlan {
        model: DnaModel::new(seed, params),
        seed,
        instance,
        issued: 0,
        limit,
    }
}

impl PlanSource for DnaPlan {
    fn prelude(&mut self) -> Vec<RoutineCall> {
        let mut calls = vec![RoutineCall::other("cudaSetDevice")];
        calls.extend(
            self.model
                .kernels
                .iter()
                .cloned()
                .map(RoutineCall::register),
        );
        calls.extend((0..2).map(|_| RoutineCall::other("cudaMalloc")));
        calls
    }

    fn next_inference(&mut self) -> Option<Vec<Burst>> {
        if self.limit.is_some_and(|l| self.issued >= l) {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(input_seed(self.seed, self.instance, self.issued));
        self.issued += 1;
        Some(self.model.instantiate(&mut rng))
    }
}
