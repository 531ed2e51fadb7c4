use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_TIMING: &str = include_str!("../../assets/timing/default.toml");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("timing parameter `{0}` must be positive")]
    NotPositive(&'static str),
    #[error("cold_penalty_factor must be at least 1, got {0}")]
    ColdPenalty(f64),
    #[error("jitter must lie in [0, 1), got {0}")]
    Jitter(f64),
    #[error("GPU must have at least one SM with room for one block")]
    Shape,
    #[error("invalid timing file: {0}")]
    Parse(String),
}

/// Timing model of the simulated GPU, all durations in cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingParams {
    pub block_base_cycles: u64,
    pub copy_cycles_per_byte: f64,
    /// Cost of switching away from a context that still has pending work.
    pub context_switch_cycles: u64,
    /// Cost of switching away from a context that has nothing to run.
    pub idle_switch_cycles: u64,
    pub cold_penalty_factor: f64,
    pub callback_host_cycles: u64,
    pub timeslice_cycles: u64,
    pub host_call_cycles: u64,
    pub jitter: f64,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TIMING).expect("shipped timing file is valid")
    }
}

impl TimingParams {
    pub fn from_toml(text: &str) -> Result<Self, ParamsError> {
        let params: Self = toml::from_str(text).map_err(|e| ParamsError::Parse(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    /// Applies the keys present in `text` on top of `self`.
    pub fn overridden_by(&self, text: &str) -> Result<Self, ParamsError> {
        let mut base =
            toml::Table::try_from(self).map_err(|e| ParamsError::Parse(e.to_string()))?;
        let patch: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ParamsError::Parse(e.to_string()))?;
        base.extend(patch);
        let params: Self = base
            .try_into()
            .map_err(|e: toml::de::Error| ParamsError::Parse(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let positive = [
            ("block_base_cycles", self.block_base_cycles),
            ("context_switch_cycles", self.context_switch_cycles),
            ("idle_switch_cycles", self.idle_switch_cycles),
            ("callback_host_cycles", self.callback_host_cycles),
            ("timeslice_cycles", self.timeslice_cycles),
            ("host_call_cycles", self.host_call_cycles),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(ParamsError::NotPositive(name));
        }
        if self.copy_cycles_per_byte.is_nan() || self.copy_cycles_per_byte <= 0.0 {
            return Err(ParamsError::NotPositive("copy_cycles_per_byte"));
        }
        if !(1.0..).contains(&self.cold_penalty_factor) {
            return Err(ParamsError::ColdPenalty(self.cold_penalty_factor));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(ParamsError::Jitter(self.jitter));
        }
        Ok(())
    }
}

/// Streaming-multiprocessor layout of the simulated GPU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GpuShape {
    pub sm_count: u32,
    pub max_blocks_per_sm: u32,
}

impl Default for GpuShape {
    fn default() -> Self {
        Self {
            sm_count: 8,
            max_blocks_per_sm: 32,
        }
    }
}

impl GpuShape {
    pub fn capacity(&self) -> u32 {
        self.sm_count * self.max_blocks_per_sm
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.sm_count == 0 || self.max_blocks_per_sm == 0 {
            return Err(ParamsError::Shape);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_validate() {
        let p = TimingParams::default();
        assert!(p.validate().is_ok());
        assert!(p.cold_penalty_factor >= 1.0);
        assert_eq!(GpuShape::default().capacity(), 256);
    }

    #[test]
    fn overrides_apply_partially() {
        let p = TimingParams::default()
            .overridden_by("jitter = 0.0\ntimeslice_cycles = 5")
            .unwrap();
        assert_eq!(p.jitter, 0.0);
        assert_eq!(p.timeslice_cycles, 5);
        assert_eq!(
            p.block_base_cycles,
            TimingParams::default().block_base_cycles
        );
    }

    #[test]
    fn invalid_values() {
        let base = TimingParams::default();
        assert_eq!(
            base.overridden_by("cold_penalty_factor = 0.5"),
            Err(ParamsError::ColdPenalty(0.5))
        );
        assert_eq!(
            base.overridden_by("timeslice_cycles = 0"),
            Err(ParamsError::NotPositive("timeslice_cycles"))
        );
        assert!(matches!(
            base.overridden_by("bogus = 1"),
            Err(ParamsError::Parse(_))
        ));
    }
}
