//! The standard prelude, written in the language itself.

use crate::eval::Session;
use crate::syntax::{parse_program, Item};
use crate::Error;

pub const PRELUDE_SOURCE: &str = include_str!("../prelude.heh");

/// One prelude definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreludeEntry {
    pub name: String,
    /// The definition as written in `prelude.heh`.
    pub source: String,
    /// The comment block introducing the group the definition belongs to.
    pub doc: String,
}

/// Prelude definitions in load order. A comment block documents the
/// definitions that follow it up to the next blank line.
pub fn manifest() -> Vec<PreludeEntry> {
    let mut out: Vec<PreludeEntry> = Vec::new();
    let mut doc = String::new();
    let mut seen_blank = false;
    for line in PRELUDE_SOURCE.lines() {
        if let Some(c) = line.strip_prefix(';') {
            // the file header (before the first blank line) is not a doc
            if seen_blank {
                doc.push_str(c.trim());
                doc.push(' ');
            }
        } else if line.trim().is_empty() {
            seen_blank = true;
            doc.clear();
        } else if line.starts_with(char::is_whitespace) {
            if let Some(last) = out.last_mut() {
                last.source.push('\n');
                last.source.push_str(line);
            }
        } else {
            out.push(PreludeEntry {
                name: line.split_whitespace().nth(1).unwrap_or_default().to_string(),
                source: line.to_string(),
                doc: doc.trim().to_string(),
            });
        }
    }
    out
}

/// Binds every prelude definition in the session environment.
pub fn load_prelude(session: &mut Session) -> Result<(), Error> {
    let prog = parse_program(PRELUDE_SOURCE)?;
    for item in &prog.items {
        debug_assert!(matches!(item, Item::Decl { .. }));
        session.run_item(item)?;
    }
    Ok(())
}
