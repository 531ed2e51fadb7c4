//! Hook-library generator: from an interface definition, an exported-symbol
//! list, hook conditions and templates, produce a [`HookTable`] with a
//! rendered source bundle and line counts.
//!
//! [`HookTable`]: crate::runtime::HookTable

pub mod config;
pub mod decl;
pub mod generate;
pub mod loc;
pub mod template;

pub use config::{Condition, ConfigError, DefaultBehavior, HookConfig, Resolution};
pub use decl::{
    extract_symbols, EmptyInterfaceError, Interface, Lookup, Param, ParseError, Signature,
};
pub use generate::{
    assemble_library, generate_hook, generate_library, loc_report, shipped_library, shipped_table,
    CoverageError, GenerateError, HookLibrary, SourceBundle, TABLE_FILE,
};
pub use loc::{count_loc, LocReport};
pub use template::{HookTemplate, TemplateError, TemplateSet};
