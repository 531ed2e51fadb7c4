use std::collections::BTreeMap;

use thiserror::Error;

use crate::runtime::{KernelId, KernelInfo};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("kernel {id} registered again with a different description")]
pub struct RegistryConflictError {
    pub id: KernelId,
}

/// Known kernels of one application, filled from registration calls.
#[derive(Debug, Clone, Default)]
pub struct KernelRegistry {
    kernels: BTreeMap<KernelId, KernelInfo>,
}

impl KernelRegistry {
    /// Registering the same description twice is a no-op.
    pub fn register(&mut self, info: KernelInfo) -> Result<(), RegistryConflictError> {
        match self.kernels.get(&info.id) {
            Some(known) if *known == info => Ok(()),
            Some(_) => Err(RegistryConflictError { id: info.id }),
            None => {
                self.kernels.insert(info.id, info);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: KernelId) -> Option<&KernelInfo> {
        self.kernels.get(&id)
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::ArgLayout;

    fn info(sizes: &[u32]) -> KernelInfo {
        KernelInfo {
            id: KernelId(7),
            name: "k".into(),
            layout: ArgLayout::packed(sizes),
            work_scale: 0.5,
        }
    }

    #[test]
    fn register_is_idempotent() {
        let mut r = KernelRegistry::default();
        r.register(info(&[8, 4])).unwrap();
        r.register(info(&[8, 4])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.get(KernelId(7)).unwrap().layout.param_count(), 2);
    }

    #[test]
    fn conflicting_layout() {
        let mut r = KernelRegistry::default();
        r.register(info(&[8, 4])).unwrap();
        assert_eq!(
            r.register(info(&[8])),
            Err(RegistryConflictError { id: KernelId(7) })
        );
    }
}
