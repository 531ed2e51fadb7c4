use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// What a call to one exported symbol does.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "behavior", rename_all = "snake_case")]
pub enum Behavior {
    StrategyHook { template_id: String },
    Trampoline,
    ErrorStub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HookEntry {
    pub behavior: Behavior,
    pub rendered_source: String,
}

/// Per-symbol behaviour of a hook library. Serializes as a map from
/// symbol to behaviour (the `hooktable.json` format).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HookTable {
    entries: BTreeMap<String, HookEntry>,
}

impl HookTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table of the original, unhooked runtime: every symbol forwards.
    pub fn passthrough<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries = symbols
            .into_iter()
            .map(|s| {
                (
                    s.into(),
                    HookEntry {
                        behavior: Behavior::Trampoline,
                        rendered_source: String::new(),
                    },
                )
            })
            .collect();
        Self { entries }
    }

    pub fn insert(&mut self, symbol: impl Into<String>, entry: HookEntry) -> Option<HookEntry> {
        self.entries.insert(symbol.into(), entry)
    }

    pub fn get(&self, symbol: &str) -> Option<&HookEntry> {
        self.entries.get(symbol)
    }

    pub fn behavior(&self, symbol: &str) -> Option<&Behavior> {
        self.entries.get(symbol).map(|e| &e.behavior)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &HookEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Symbols of `symbols` that have no entry.
    pub fn missing<'a>(&self, symbols: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        symbols
            .into_iter()
            .filter(|s| !self.entries.contains_key(*s))
            .map(str::to_owned)
            .collect()
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, &Behavior> = self
            .entries
            .iter()
            .map(|(k, v)| (k.as_str(), &v.behavior))
            .collect();
        let mut out = serde_json::to_string_pretty(&map).expect("behaviors serialize");
        out.push('\n');
        out
    }

    /// Reads a `hooktable.json`; rendered sources are not part of the file.
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        let map: BTreeMap<String, Behavior> = serde_json::from_str(text)?;
        let entries = map
            .into_iter()
            .map(|(k, behavior)| {
                (
                    k,
                    HookEntry {
                        behavior,
                        rendered_source: String::new(),
                    },
                )
            })
            .collect();
        Ok(Self { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut t = HookTable::passthrough(["cudaGetDevice"]);
        t.insert(
            "cudaLaunchKernel",
            HookEntry {
                behavior: Behavior::StrategyHook {
                    template_id: "synced-launch".into(),
                },
                rendered_source: "x".into(),
            },
        );
        let json = t.to_json();
        assert!(json.contains(r#""behavior": "strategy_hook""#));
        assert!(json.contains(r#""template_id": "synced-launch""#));
        let back = HookTable::from_json(&json).unwrap();
        assert_eq!(back.behavior("cudaGetDevice"), Some(&Behavior::Trampoline));
        assert_eq!(back.len(), 2);
    }

    #[test]
    fn missing_symbols() {
        let t = HookTable::passthrough(["a", "b"]);
        assert_eq!(t.missing(["a", "c"]), vec!["c".to_string()]);
    }
}
