//! Interface-definition and exported-symbol files.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("exported-symbol list is empty")]
pub struct EmptyInterfaceError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub return_type: String,
    pub params: Vec<Param>,
}

impl Signature {
    /// Parameter list as written in a declaration; `void` when empty.
    pub fn params_text(&self) -> String {
        if self.params.is_empty() {
            return "void".into();
        }
        self.params
            .iter()
            .map(|p| format!("{} {}", p.ty, p.name))
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn param_names(&self) -> String {
        self.params
            .iter()
            .map(|p| p.name.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Result of looking a symbol up in the interface definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup<'a> {
    Found(&'a Signature),
    Unknown,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interface {
    decls: BTreeMap<String, Signature>,
}

impl Interface {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut decls = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| ParseError {
                line: i + 1,
                message: message.to_owned(),
            };
            let (symbol, sig) = parse_declaration(line).map_err(err)?;
            if decls.insert(symbol.clone(), sig).is_some() {
                return Err(err(&format!("`{symbol}` declared twice")));
            }
        }
        Ok(Self { decls })
    }

    pub fn find_declaration(&self, symbol: &str) -> Lookup<'_> {
        match self.decls.get(symbol) {
            Some(sig) => Lookup::Found(sig),
            None => Lookup::Unknown,
        }
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `type name` where the name is the trailing identifier.
fn split_trailing_ident(s: &str) -> Option<(&str, &str)> {
    let s = s.trim();
    let at = s
        .rfind(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .map_or(0, |i| i + 1);
    let (ty, name) = (s[..at].trim(), &s[at..]);
    (!ty.is_empty() && is_ident(name)).then_some((ty, name))
}

fn parse_declaration(line: &str) -> Result<(String, Signature), &'static str> {
    let open = line.find('(').ok_or("missing `(`")?;
    let close = line.rfind(')').ok_or("missing `)`")?;
    if close < open || !line[close + 1..].trim().is_empty() {
        return Err("malformed parameter list");
    }
    let (return_type, symbol) =
        split_trailing_ident(&line[..open]).ok_or("expected `<return> <symbol>(`")?;
    let inner = line[open + 1..close].trim();
    let params = if inner.is_empty() || inner == "void" {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|p| {
                split_trailing_ident(p)
                    .map(|(ty, name)| Param {
                        ty: ty.to_owned(),
                        name: name.to_owned(),
                    })
                    .ok_or("expected `<type> <name>` parameter")
            })
            .collect::<Result<_, _>>()?
    };
    Ok((
        symbol.to_owned(),
        Signature {
            return_type: return_type.to_owned(),
            params,
        },
    ))
}

/// Reads an exported-symbol list: one symbol per line, `#` comments,
/// duplicates dropped keeping the first occurrence.
pub fn extract_symbols(text: &str) -> Result<Vec<String>, EmptyInterfaceError> {
    let mut seen = HashSet::new();
    let symbols: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter(|l| seen.insert(*l))
        .map(str::to_owned)
        .collect();
    if symbols.is_empty() {
        return Err(EmptyInterfaceError);
    }
    Ok(symbols)
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (*)({})", self.return_type, self.params_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{MOCK_DECLARATIONS, MOCK_EXPORTS};

    #[test]
    fn launch_signature() {
        let iface = Interface::parse(MOCK_DECLARATIONS).unwrap();
        let Lookup::Found(sig) = iface.find_declaration("cudaLaunchKernel") else {
            panic!("cudaLaunchKernel not declared");
        };
        let names: Vec<&str> = sig.params.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["func", "grid", "args", "stream"]);
        assert_eq!(sig.params[0].ty, "const void*");
        assert_eq!(sig.return_type, "cudaError_t");
        assert_eq!(iface.find_declaration("nope"), Lookup::Unknown);
    }

    #[test]
    fn void_params() {
        let iface = Interface::parse("int f(void)\nvoid** g()\n").unwrap();
        let Lookup::Found(f) = iface.find_declaration("f") else {
            panic!()
        };
        assert!(f.params.is_empty());
        assert_eq!(f.params_text(), "void");
        let Lookup::Found(g) = iface.find_declaration("g") else {
            panic!()
        };
        assert_eq!(g.return_type, "void**");
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = Interface::parse("# c\nint ok(int a)\nint bad(int)\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(Interface::parse("f(int a)").unwrap_err().line, 1);
        assert_eq!(Interface::parse("int f(int a").unwrap_err().line, 1);
        assert!(Interface::parse("int f(int a)\nint f(int b)").is_err());
    }

    #[test]
    fn symbol_list() {
        assert_eq!(
            extract_symbols("a\nb\na\n\n# c\nc\n").unwrap(),
            ["a", "b", "c"]
        );
        assert_eq!(
            extract_symbols("# only a comment\n\n"),
            Err(EmptyInterfaceError)
        );
        let shipped = extract_symbols(MOCK_EXPORTS).unwrap();
        assert_eq!(shipped.len(), 40);
        let iface = Interface::parse(MOCK_DECLARATIONS).unwrap();
        let unknown: Vec<_> = shipped
            .iter()
            .filter(|s| iface.find_declaration(s) == Lookup::Unknown)
            .collect();
        assert_eq!(unknown, ["cudaLaunchKernel_ptsz", "cudaMemcpyAsync_ptsz"]);
    }

    #[test]
    fn many_symbols() {
        let text: String = (0..385).map(|i| format!("sym{i}\n")).collect();
        assert_eq!(extract_symbols(&text).unwrap().len(), 385);
    }
}
