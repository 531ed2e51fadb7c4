//! Hook templates and their instantiation.
//!
//! A template body may use `${symbol}`, `${return_type}`, `${params}`,
//! `${param_names}` and `${extra}`. Per-symbol extras follow the body:
//!
//! ```text
//! @extra cudaMemcpy
//!     cook_check(cudaStreamSynchronize(s));
//! @end
//! ```
//!
//! A line holding only `${extra}` disappears when the symbol has no extra.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::decl::Signature;

pub const TRAMPOLINE: &str = "trampoline";
pub const ERROR_STUB: &str = "error-stub";
pub const TEMPLATE_EXT: &str = "tmpl";

const SHIPPED: [(&str, &str); 9] = [
    (
        TRAMPOLINE,
        include_str!("../../assets/templates/trampoline.tmpl"),
    ),
    (
        ERROR_STUB,
        include_str!("../../assets/templates/error-stub.tmpl"),
    ),
    ("lock", include_str!("../../assets/templates/lock.tmpl")),
    (
        "callback-launch",
        include_str!("../../assets/templates/callback-launch.tmpl"),
    ),
    (
        "synced-launch",
        include_str!("../../assets/templates/synced-launch.tmpl"),
    ),
    (
        "worker-launch",
        include_str!("../../assets/templates/worker-launch.tmpl"),
    ),
    (
        "worker-ordered",
        include_str!("../../assets/templates/worker-ordered.tmpl"),
    ),
    (
        "worker-register",
        include_str!("../../assets/templates/worker-register.tmpl"),
    ),
    (
        "worker-runtime",
        include_str!("../../assets/templates/worker-runtime.tmpl"),
    ),
];

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template `{id}` line {line}: {message}")]
    Syntax {
        id: String,
        line: usize,
        message: String,
    },
    #[error("reading templates: {0}")]
    Io(#[from] io::Error),
    #[error("required template `{0}` is missing")]
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HookTemplate {
    pub id: String,
    pub body: String,
    pub extras: BTreeMap<String, String>,
}

impl HookTemplate {
    pub fn parse(id: &str, text: &str) -> Result<Self, TemplateError> {
        let syntax = |line: usize, message: &str| TemplateError::Syntax {
            id: id.to_owned(),
            line,
            message: message.to_owned(),
        };
        let mut body = String::new();
        let mut extras = BTreeMap::new();
        let mut open: Option<(usize, String, String)> = None;
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix("@extra") {
                if open.is_some() {
                    return Err(syntax(i + 1, "nested @extra"));
                }
                let symbol = rest.trim();
                if symbol.is_empty() || symbol.contains(char::is_whitespace) {
                    return Err(syntax(i + 1, "expected `@extra <symbol>`"));
                }
                open = Some((i + 1, symbol.to_owned(), String::new()));
            } else if trimmed == "@end" {
                let (_, symbol, text) = open
                    .take()
                    .ok_or_else(|| syntax(i + 1, "@end without @extra"))?;
                extras.insert(symbol, text.trim_end_matches('\n').to_owned());
            } else if let Some((_, _, text)) = &mut open {
                text.push_str(line);
                text.push('\n');
            } else if !extras.is_empty() {
                if !trimmed.is_empty() {
                    return Err(syntax(i + 1, "body text after @extra blocks"));
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        if let Some((line, ..)) = open {
            return Err(syntax(line, "unterminated @extra"));
        }
        Ok(Self {
            id: id.to_owned(),
            body,
            extras,
        })
    }

    /// Instantiates the template for one declaration.
    pub fn render(&self, symbol: &str, sig: &Signature) -> String {
        let extra = self.extras.get(symbol).map(String::as_str).unwrap_or("");
        let mut out = String::with_capacity(self.body.len() + 64);
        for line in self.body.lines() {
            if line.trim() == "${extra}" {
                if !extra.is_empty() {
                    out.push_str(extra);
                    out.push('\n');
                }
                continue;
            }
            let line = line
                .replace("${symbol}", symbol)
                .replace("${return_type}", &sig.return_type)
                .replace("${params}", &sig.params_text())
                .replace("${param_names}", &sig.param_names())
                .replace("${extra}", extra);
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Templates keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<String, HookTemplate>,
}

impl TemplateSet {
    /// The templates shipped with the crate.
    pub fn shipped() -> Self {
        let mut set = Self::default();
        for (id, text) in SHIPPED {
            set.insert(HookTemplate::parse(id, text).expect("shipped template parses"));
        }
        set
    }

    /// Loads every `*.tmpl` file of `dir`; the file stem is the id.
    pub fn load_dir(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = Self::default();
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        paths.sort();
        for path in paths {
            if path.extension().and_then(|e| e.to_str()) != Some(TEMPLATE_EXT) {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            set.insert(HookTemplate::parse(id, &fs::read_to_string(&path)?)?);
        }
        for required in [TRAMPOLINE, ERROR_STUB] {
            if set.get(required).is_none() {
                return Err(TemplateError::Missing(required.to_owned()));
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, t: HookTemplate) {
        self.templates.insert(t.id.clone(), t);
    }

    pub fn get(&self, id: &str) -> Option<&HookTemplate> {
        self.templates.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &HookTemplate> {
        self.templates.values()
    }

    /// Raw text of a template as it would appear on disk.
    pub fn source_of(&self, id: &str) -> Option<String> {
        let t = self.get(id)?;
        let mut out = t.body.clone();
        for (symbol, text) in &t.extras {
            out.push_str(&format!("@extra {symbol}\n{text}\n@end\n"));
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolchain::decl::Param;

    fn sig() -> Signature {
        Signature {
            return_type: "int".into(),
            params: vec![
                Param {
                    ty: "void*".into(),
                    name: "dst".into(),
                },
                Param {
                    ty: "size_t".into(),
                    name: "n".into(),
                },
            ],
        }
    }

    #[test]
    fn placeholders() {
        let t = HookTemplate::parse(
            "t",
            "${return_type} ${symbol}(${params}) {\n    ${extra}\n    return real(${param_names});\n}\n@extra f\n    sync();\n@end\n",
        )
        .unwrap();
        assert_eq!(
            t.render("f", &sig()),
            "int f(void* dst, size_t n) {\n    sync();\n    return real(dst, n);\n}\n"
        );
        assert_eq!(
            t.render("g", &sig()),
            "int g(void* dst, size_t n) {\n    return real(dst, n);\n}\n"
        );
    }

    #[test]
    fn bad_extras() {
        assert!(HookTemplate::parse("t", "@extra f\nx\n").is_err());
        assert!(HookTemplate::parse("t", "@end\n").is_err());
        assert!(HookTemplate::parse("t", "@extra\n@end\n").is_err());
        assert!(HookTemplate::parse("t", "@extra f\n@end\nbody\n").is_err());
    }

    #[test]
    fn shipped_set() {
        let set = TemplateSet::shipped();
        assert!(set.get(TRAMPOLINE).is_some());
        assert!(set
            .get("callback-launch")
            .unwrap()
            .extras
            .contains_key("cudaMemcpy"));
        for h in crate::strategies::HookImpl::ALL {
            assert!(set.get(h.template_id()).is_some(), "{}", h.template_id());
        }
    }

    #[test]
    fn load_dir_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let set = TemplateSet::shipped();
        for t in set.iter() {
            let path = dir.path().join(format!("{}.{TEMPLATE_EXT}", t.id));
            fs::write(path, set.source_of(&t.id).unwrap()).unwrap();
        }
        fs::write(dir.path().join("README"), "not a template").unwrap();
        assert_eq!(TemplateSet::load_dir(dir.path()).unwrap(), set);
        fs::remove_file(dir.path().join("trampoline.tmpl")).unwrap();
        assert!(matches!(
            TemplateSet::load_dir(dir.path()),
            Err(TemplateError::Missing(_))
        ));
    }
}
