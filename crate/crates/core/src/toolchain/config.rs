//! Hook configuration: which template each symbol gets.
//!
//! ```text
//! # comment
//! default error
//! common lock
//! hook cudaLaunch* callback-launch
//! ignore cudaGetDevice
//! ```
//!
//! `hook` conditions are tried in order and the first match wins; `ignore`
//! patterns make a symbol a trampoline; anything else becomes an error stub.
//! `common` names templates emitted once into the bundle.

use glob::Pattern;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: bad pattern `{pattern}`")]
    Pattern { line: usize, pattern: String },
    #[error("configuration references missing template `{0}`")]
    MissingTemplate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultBehavior {
    ErrorStub,
    Trampoline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub pattern: Pattern,
    pub template_id: String,
}

/// Result of matching a symbol against the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution<'a> {
    Hook(&'a str),
    Ignore,
    Default(DefaultBehavior),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HookConfig {
    pub conditions: Vec<Condition>,
    pub ignore: Vec<Pattern>,
    pub common: Vec<String>,
    pub default: DefaultBehavior,
}

impl Default for HookConfig {
    fn default() -> Self {
        Self {
            conditions: Vec::new(),
            ignore: Vec::new(),
            common: Vec::new(),
            default: DefaultBehavior::ErrorStub,
        }
    }
}

impl HookConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let words: Vec<&str> = raw.split_whitespace().collect();
            if words.is_empty() || words[0].starts_with('#') {
                continue;
            }
            let syntax = |message: &str| ConfigError::Syntax {
                line,
                message: message.to_owned(),
            };
            let pattern = |p: &str| {
                Pattern::new(p).map_err(|_| ConfigError::Pattern {
                    line,
                    pattern: p.to_owned(),
                })
            };
            match words.as_slice() {
                ["default", "error"] => cfg.default = DefaultBehavior::ErrorStub,
                ["default", "trampoline"] => cfg.default = DefaultBehavior::Trampoline,
                ["default", ..] => return Err(syntax("expected `default error|trampoline`")),
                ["common", id] => cfg.common.push((*id).to_owned()),
                ["hook", p, id] => cfg.conditions.push(Condition {
                    pattern: pattern(p)?,
                    template_id: (*id).to_owned(),
                }),
                ["ignore", p] => cfg.ignore.push(pattern(p)?),
                [kw @ ("common" | "hook" | "ignore"), ..] => {
                    return Err(syntax(&format!("wrong number of arguments to `{kw}`")))
                }
                [other, ..] => return Err(syntax(&format!("unknown directive `{other}`"))),
                [] => unreachable!(),
            }
        }
        Ok(cfg)
    }

    pub fn resolve(&self, symbol: &str) -> Resolution<'_> {
        if let Some(c) = self.conditions.iter().find(|c| c.pattern.matches(symbol)) {
            return Resolution::Hook(&c.template_id);
        }
        if self.ignore.iter().any(|p| p.matches(symbol)) {
            return Resolution::Ignore;
        }
        Resolution::Default(self.default)
    }

    /// Every template id the configuration mentions, in first-use order.
    pub fn referenced_templates(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        let all = self
            .conditions
            .iter()
            .map(|c| c.template_id.as_str())
            .chain(self.common.iter().map(String::as_str));
        for id in all {
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_match_wins() {
        let cfg = HookConfig::parse(
            "hook cudaMemcpy a\nhook cudaMemcpy* b\nignore cudaMemcpy*\nignore cudaGet*\n",
        )
        .unwrap();
        assert_eq!(cfg.resolve("cudaMemcpy"), Resolution::Hook("a"));
        assert_eq!(cfg.resolve("cudaMemcpyAsync"), Resolution::Hook("b"));
        assert_eq!(cfg.resolve("cudaGetDevice"), Resolution::Ignore);
        assert_eq!(
            cfg.resolve("cudaFree"),
            Resolution::Default(DefaultBehavior::ErrorStub)
        );
        assert_eq!(cfg.referenced_templates(), ["a", "b"]);
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(
            HookConfig::parse("# ok\nhook x\n"),
            Err(ConfigError::Syntax {
                line: 2,
                message: "wrong number of arguments to `hook`".into()
            })
        );
        assert!(matches!(
            HookConfig::parse("frob x"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            HookConfig::parse("ignore [a"),
            Err(ConfigError::Pattern { line: 1, .. })
        ));
        assert!(HookConfig::parse("default nothing").is_err());
    }

    #[test]
    fn shipped_configs_parse() {
        for s in crate::strategies::Strategy::ALL {
            if let Some(text) = s.hook_config() {
                let cfg = HookConfig::parse(text).unwrap();
                assert_eq!(cfg.default, DefaultBehavior::ErrorStub);
                assert!(cfg.common.contains(&"lock".to_owned()));
            }
        }
    }
}
