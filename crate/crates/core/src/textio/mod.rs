//! Text input and output: the density grammar, context files, and plain,
//! LaTeX and JSON renderings.

mod format;
mod parse;
mod report;

use std::sync::Arc;

pub use format::{format, format_latex, format_plain, to_json, OutputFormat};
pub use parse::{parse_density, ParseError, ParseErrorKind};
pub use report::{format_trace, trace_json};

use crate::expr::{FieldContext, FieldDecl, Parity};

/// Declared independent variables and fields, as read from a context file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextSpec {
    pub indep: Vec<String>,
    pub fields: Vec<FieldDecl>,
}

impl Default for ContextSpec {
    fn default() -> Self {
        ContextSpec {
            indep: vec!["x".into()],
            fields: vec![FieldDecl {
                name: "q".into(),
                parity: Parity::Even,
                antifield: "p".into(),
            }],
        }
    }
}

impl ContextSpec {
    pub fn build(&self) -> Result<Arc<FieldContext>, crate::AlgebraError> {
        FieldContext::new(self.indep.clone(), self.fields.clone()).map(Arc::new)
    }

    /// Renders the spec in the context-file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("indep {}\n", self.indep.join(" "));
        for f in &self.fields {
            out.push_str(&format!(
                "field {} {} antifield {}\n",
                f.name, f.parity, f.antifield
            ));
        }
        out
    }
}

/// Parses a context file: one declaration per line, `indep x [y ...]` or
/// `field NAME even|odd antifield NAME`. Blank lines and `#` comments are
/// ignored. Without an `indep` line the single variable `x` is used.
pub fn parse_context(text: &str) -> Result<ContextSpec, ParseError> {
    let mut indep: Option<Vec<String>> = None;
    let mut fields = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = line.split_whitespace().collect();
        let col = raw.len() - raw.trim_start().len() + 1;
        let fail = |msg: String| ParseError {
            line: line_no,
            column: col,
            kind: ParseErrorKind::Context(msg),
        };
        match words.as_slice() {
            [] => {}
            ["indep", names @ ..] if !names.is_empty() => {
                if indep.is_some() {
                    return Err(fail("duplicate `indep` line".into()));
                }
                indep = Some(names.iter().map(|s| s.to_string()).collect());
            }
            ["field", name, parity, "antifield", anti] => {
                let parity: Parity = parity
                    .parse()
                    .map_err(|e: crate::AlgebraError| fail(e.to_string()))?;
                fields.push(FieldDecl {
                    name: name.to_string(),
                    parity,
                    antifield: anti.to_string(),
                });
            }
            _ => {
                return Err(fail(format!(
                    "expected `indep NAME...` or `field NAME even|odd antifield NAME`, got `{}`",
                    line.trim()
                )))
            }
        }
    }
    let spec = ContextSpec {
        indep: indep.unwrap_or_else(|| vec!["x".into()]),
        fields,
    };
    spec.build().map_err(|e| ParseError {
        line: 1,
        column: 1,
        kind: ParseErrorKind::Context(e.to_string()),
    })?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_file_round_trip() {
        let spec = parse_context("# one field\nindep x\nfield q even antifield p\n").unwrap();
        assert_eq!(spec, ContextSpec::default());
        assert_eq!(parse_context(&spec.to_text()).unwrap(), spec);
    }

    #[test]
    fn context_defaults_and_errors() {
        let spec = parse_context("field u odd antifield w").unwrap();
        assert_eq!(spec.indep, vec!["x".to_string()]);
        let err = parse_context("indep x\nfield q even p").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_context("field q even antifield q").is_err());
        assert!(parse_context("field q weird antifield p").is_err());
    }
}
