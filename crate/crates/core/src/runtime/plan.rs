use super::types::{Burst, RoutineCall};

/// Host program of one application: a prelude run once (kernel
/// registration and the like), then a sequence of inferences, each a list of
/// bursts executed in order.
pub trait PlanSource {
    fn prelude(&mut self) -> Vec<RoutineCall>;

    /// Next inference, or `None` once the application is done.
    fn next_inference(&mut self) -> Option<Vec<Burst>>;
}

/// A finite plan held in memory.
#[derive(Debug, Clone, Default)]
pub struct FixedPlan {
    pub prelude: Vec<RoutineCall>,
    pub inferences: Vec<Vec<Burst>>,
    next: usize,
}

impl FixedPlan {
    pub fn new(prelude: Vec<RoutineCall>, inferences: Vec<Vec<Burst>>) -> Self {
        Self {
            prelude,
            inferences,
            next: 0,
        }
    }

    /// A plan made of a single burst.
    pub fn single(prelude: Vec<RoutineCall>, burst: Burst) -> Self {
        Self::new(prelude, vec![vec![burst]])
    }
}

impl PlanSource for FixedPlan {
    fn prelude(&mut self) -> Vec<RoutineCall> {
        std::mem::take(&mut self.prelude)
    }

    fn next_inference(&mut self) -> Option<Vec<Burst>> {
        let inf = self.inferences.get(self.next)?.clone();
        self.next += 1;
        Some(inf)
    }
}
