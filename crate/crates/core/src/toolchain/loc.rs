use serde::{Deserialize, Serialize};

/// Lines that are neither blank nor comments (`//` or `#`).
pub fn count_loc(text: &str) -> usize {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//") && !l.starts_with('#'))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocReport {
    pub configuration: usize,
    pub templates: usize,
    pub generated: usize,
}
