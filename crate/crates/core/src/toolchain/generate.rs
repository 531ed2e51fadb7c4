//! Hook generation and library assembly.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::config::{ConfigError, DefaultBehavior, HookConfig, Resolution};
use super::decl::{extract_symbols, EmptyInterfaceError, Interface, Lookup, ParseError, Signature};
use super::loc::{count_loc, LocReport};
use super::template::{TemplateSet, ERROR_STUB, TRAMPOLINE};
use crate::runtime::{Behavior, HookEntry, HookTable, MOCK_DECLARATIONS, MOCK_EXPORTS};
use crate::strategies::Strategy;

pub const TABLE_FILE: &str = "hooktable.json";
pub const SOURCE_DIR: &str = "src";
pub const SOURCE_EXT: &str = "cook";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no hook entry for {}", .missing.join(", "))]
pub struct CoverageError {
    pub missing: Vec<String>,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Empty(#[from] EmptyInterfaceError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error("writing hook library: {0}")]
    Io(#[from] io::Error),
}

/// Signature used to render stubs for symbols with no declaration.
fn unknown_signature() -> Signature {
    Signature {
        return_type: "int".into(),
        params: Vec::new(),
    }
}

fn render(
    templates: &TemplateSet,
    id: &str,
    symbol: &str,
    sig: &Signature,
) -> Result<String, ConfigError> {
    templates
        .get(id)
        .map(|t| t.render(symbol, sig))
        .ok_or_else(|| ConfigError::MissingTemplate(id.to_owned()))
}

/// Builds the entry of one exported symbol.
pub fn generate_hook(
    symbol: &str,
    lookup: Lookup<'_>,
    config: &HookConfig,
    templates: &TemplateSet,
) -> Result<HookEntry, ConfigError> {
    let Lookup::Found(sig) = lookup else {
        return Ok(HookEntry {
            behavior: Behavior::ErrorStub,
            rendered_source: render(templates, ERROR_STUB, symbol, &unknown_signature())?,
        });
    };
    let (behavior, id) = match config.resolve(symbol) {
        Resolution::Hook(id) => (
            Behavior::StrategyHook {
                template_id: id.to_owned(),
            },
            id,
        ),
        Resolution::Ignore | Resolution::Default(DefaultBehavior::Trampoline) => {
            (Behavior::Trampoline, TRAMPOLINE)
        }
        Resolution::Default(DefaultBehavior::ErrorStub) => (Behavior::ErrorStub, ERROR_STUB),
    };
    Ok(HookEntry {
        behavior,
        rendered_source: render(templates, id, symbol, sig)?,
    })
}

/// Rendered source files keyed by their path relative to the output
/// directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceBundle {
    pub files: BTreeMap<String, String>,
}

impl SourceBundle {
    pub fn loc(&self) -> usize {
        self.files.values().map(|f| count_loc(f)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HookLibrary {
    pub table: HookTable,
    pub bundle: SourceBundle,
}

impl HookLibrary {
    /// Writes `hooktable.json` and the source bundle under `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(TABLE_FILE), self.table.to_json())?;
        for (rel, text) in &self.bundle.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, text)?;
        }
        Ok(())
    }
}

/// Gathers one entry per exported symbol plus the common sources into a
/// library. Refuses if any symbol has no entry.
pub fn assemble_library(
    symbols: &[String],
    mut entries: BTreeMap<String, HookEntry>,
    common: &[(String, String)],
) -> Result<HookLibrary, CoverageError> {
    let missing: Vec<String> = symbols
        .iter()
        .filter(|s| !entries.contains_key(*s))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(CoverageError { missing });
    }
    let mut table = HookTable::new();
    let mut bundle = SourceBundle::default();
    for symbol in symbols {
        let entry = entries.remove(symbol).expect("coverage checked");
        bundle.files.insert(
            format!("{SOURCE_DIR}/{symbol}.{SOURCE_EXT}"),
            entry.rendered_source.clone(),
        );
        table.insert(symbol.clone(), entry);
    }
    for (id, text) in common {
        bundle.files.insert(
            format!("{SOURCE_DIR}/common/{id}.{SOURCE_EXT}"),
            text.clone(),
        );
    }
    Ok(HookLibrary { table, bundle })
}

/// The whole workflow: extract symbols, look up declarations, apply hook
/// conditions and templates, assemble.
pub fn generate_library(
    declarations: &str,
    exports: &str,
    config: &HookConfig,
    templates: &TemplateSet,
) -> Result<HookLibrary, GenerateError> {
    let interface = Interface::parse(declarations)?;
    let symbols = extract_symbols(exports)?;
    for id in config.referenced_templates() {
        if templates.get(id).is_none() {
            return Err(ConfigError::MissingTemplate(id.to_owned()).into());
        }
    }
    let entries = symbols
        .iter()
        .map(|s| {
            generate_hook(s, interface.find_declaration(s), config, templates)
                .map(|e| (s.clone(), e))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let common: Vec<(String, String)> = config
        .common
        .iter()
        .map(|id| (id.clone(), templates.source_of(id).unwrap_or_default()))
        .collect();
    Ok(assemble_library(&symbols, entries, &common)?)
}

/// Line counts of one generation: the configuration, the templates it
/// references and the generated bundle.
pub fn loc_report(
    config_text: &str,
    config: &HookConfig,
    templates: &TemplateSet,
    lib: &HookLibrary,
) -> LocReport {
    let templates = config
        .referenced_templates()
        .into_iter()
        .filter_map(|id| templates.source_of(id))
        .map(|t| count_loc(&t))
        .sum();
    LocReport {
        configuration: count_loc(config_text),
        templates,
        generated: lib.bundle.loc(),
    }
}

/// Hook library of a strategy built from the shipped interface, templates
/// and configuration. `Strategy::None` yields the unhooked runtime.
pub fn shipped_library(strategy: Strategy) -> Result<HookLibrary, GenerateError> {
    let config = match strategy.hook_config() {
        Some(text) => HookConfig::parse(text)?,
        None => HookConfig {
            default: DefaultBehavior::Trampoline,
            ..HookConfig::default()
        },
    };
    generate_library(
        MOCK_DECLARATIONS,
        MOCK_EXPORTS,
        &config,
        &TemplateSet::shipped(),
    )
}

/// Hook table of a strategy over the shipped interface.
pub fn shipped_table(strategy: Strategy) -> HookTable {
    shipped_library(strategy)
        .expect("shipped hook configuration generates")
        .table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(symbol: &str, cfg: &str) -> HookEntry {
        let iface = Interface::parse(MOCK_DECLARATIONS).unwrap();
        let cfg = HookConfig::parse(cfg).unwrap();
        generate_hook(
            symbol,
            iface.find_declaration(symbol),
            &cfg,
            &TemplateSet::shipped(),
        )
        .unwrap()
    }

    #[test]
    fn behaviours() {
        let synced = Strategy::Synced.hook_config().unwrap();
        assert_eq!(
            entry("cudaLaunchKernel", synced).behavior,
            Behavior::StrategyHook {
                template_id: "synced-launch".into()
            }
        );
        assert_eq!(
            entry("cudaGetDevice", synced).behavior,
            Behavior::Trampoline
        );
        assert_eq!(
            entry("cudaDeviceReset", synced).behavior,
            Behavior::ErrorStub
        );
        let src = entry("cudaLaunchKernel", synced).rendered_source;
        assert!(src.contains("cudaError_t cudaLaunchKernel(const void* func, dim3 grid"));
        assert!(src.contains("real(func, grid, args, stream)"));
    }

    #[test]
    fn missing_template() {
        let cfg = HookConfig::parse("hook cudaLaunchKernel nope").unwrap();
        let err = generate_library(
            MOCK_DECLARATIONS,
            MOCK_EXPORTS,
            &cfg,
            &TemplateSet::shipped(),
        );
        assert!(matches!(
            err,
            Err(GenerateError::Config(ConfigError::MissingTemplate(id))) if id == "nope"
        ));
    }

    #[test]
    fn coverage_gap_named() {
        let symbols = vec!["a".to_owned(), "b".to_owned()];
        let mut entries = BTreeMap::new();
        entries.insert(
            "a".to_owned(),
            HookEntry {
                behavior: Behavior::Trampoline,
                rendered_source: String::new(),
            },
        );
        assert_eq!(
            assemble_library(&symbols, entries, &[]),
            Err(CoverageError {
                missing: vec!["b".into()]
            })
        );
    }

    #[test]
    fn unknown_symbols_get_stubs() {
        let lib = shipped_library(Strategy::Worker).unwrap();
        assert_eq!(lib.table.len(), 40);
        assert_eq!(
            lib.table.behavior("cudaLaunchKernel_ptsz"),
            Some(&Behavior::ErrorStub)
        );
        assert!(lib
            .bundle
            .files
            .contains_key("src/common/worker-runtime.cook"));
    }

    #[test]
    fn unhooked_runtime_forwards_everything() {
        let table = shipped_table(Strategy::None);
        let declared = table
            .iter()
            .filter(|(_, e)| e.behavior == Behavior::Trampoline)
            .count();
        assert_eq!(declared, 38);
    }

    #[test]
    fn generated_code_dwarfs_templates() {
        for strategy in [Strategy::Callback, Strategy::Synced, Strategy::Worker] {
            let text = strategy.hook_config().unwrap();
            let cfg = HookConfig::parse(text).unwrap();
            let templates = TemplateSet::shipped();
            let lib = shipped_library(strategy).unwrap();
            let loc = loc_report(text, &cfg, &templates, &lib);
            assert!(loc.generated > loc.templates, "{strategy}: {loc:?}");
            if strategy == Strategy::Synced {
                assert!(loc.generated > 10 * loc.templates, "{loc:?}");
            }
        }
    }
}
