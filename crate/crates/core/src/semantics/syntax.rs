//! FunQL surface syntax.
//!
//! ```text
//! lf := entity | rel "(" lf ")" | "count(" lf ")"
//!     | ("argmax(" | "argmin(") lf "," rel ")"
//!     | "filter_" cmp "(" lf "," rel "," value ")"
//!     | ("and(" | "or(") lf "," lf ")"
//! ```
//!
//! Identifiers are any run of characters other than whitespace, parentheses
//! and commas. The printer emits the canonical form: no whitespace except a
//! single space after each comma.

use thiserror::Error;

use super::lf::{format_number, Comparator, LogicalForm, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("syntax error at byte {position}: expected {}", expected.join(" or "))]
    Unexpected {
        position: usize,
        expected: Vec<String>,
    },
    #[error("arity error at byte {position}: `{operator}` takes {expected} argument(s), found {found}")]
    Arity {
        position: usize,
        operator: String,
        expected: usize,
        found: usize,
    },
    #[error("syntax error at byte {position}: argument {index} of `{operator}` must be {expected}")]
    Argument {
        position: usize,
        operator: String,
        index: usize,
        expected: &'static str,
    },
}

/// Names that cannot be used as relations.
pub const RESERVED: [&str; 5] = ["count", "argmax", "argmin", "and", "or"];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name) || name.starts_with("filter_")
}

/// True if `id` can be written as a bare identifier.
pub fn is_valid_identifier(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ','))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Open,
    Close,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the next token and its start offset without consuming it.
    fn peek(&mut self) -> (Tok, usize) {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        match rest.chars().next() {
            None => (Tok::End, start),
            Some('(') => (Tok::Open, start),
            Some(')') => (Tok::Close, start),
            Some(',') => (Tok::Comma, start),
            Some(_) => {
                let len = rest
                    .find(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | ','))
                    .unwrap_or(rest.len());
                (Tok::Ident(rest[..len].to_string()), start)
            }
        }
    }

    fn next(&mut self) -> (Tok, usize) {
        let (tok, start) = self.peek();
        self.pos = start
            + match &tok {
                Tok::Ident(s) => s.len(),
                Tok::End => 0,
                _ => 1,
            };
        (tok, start)
    }
}

/// Generic term tree used before operator signatures are applied.
struct Term {
    name: String,
    pos: usize,
    args: Option<Vec<Term>>,
}

fn unexpected(position: usize, expected: &[&str]) -> SyntaxError {
    SyntaxError::Unexpected {
        position,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn parse_term(lex: &mut Lexer) -> Result<Term, SyntaxError> {
    let (tok, pos) = lex.next();
    let name = match tok {
        Tok::Ident(name) => name,
        _ => return Err(unexpected(pos, &["identifier"])),
    };
    if lex.peek().0 != Tok::Open {
        return Ok(Term {
            name,
            pos,
            args: None,
        });
    }
    lex.next();
    let mut args = vec![parse_term(lex)?];
    loop {
        match lex.next() {
            (Tok::Comma, _) => args.push(parse_term(lex)?),
            (Tok::Close, _) => break,
            (_, p) => return Err(unexpected(p, &["`,`", "`)`"])),
        }
    }
    Ok(Term {
        name,
        pos,
        args: Some(args),
    })
}

fn bare(term: Term, operator: &str, index: usize, expected: &'static str) -> Result<String, SyntaxError> {
    if term.args.is_some() {
        return Err(SyntaxError::Argument {
            position: term.pos,
            operator: operator.to_string(),
            index,
            expected,
        });
    }
    Ok(term.name)
}

fn to_lf(term: Term) -> Result<LogicalForm, SyntaxError> {
    let Some(args) = term.args else {
        return Ok(LogicalForm::Entity(term.name));
    };
    let name = term.name;
    let expected = match name.as_str() {
        "count" => 1,
        "argmax" | "argmin" => 2,
        "and" | "or" => 2,
        n if n.starts_with("filter_") => 3,
        _ => 1,
    };
    if let Some(cmp) = name.strip_prefix("filter_") {
        if Comparator::from_name(cmp).is_none() {
            return Err(unexpected(
                term.pos,
                &["filter_eq", "filter_neq", "filter_gt", "filter_lt", "filter_ge", "filter_le"],
            ));
        }
    }
    if args.len() != expected {
        return Err(SyntaxError::Arity {
            position: term.pos,
            operator: name,
            expected,
            found: args.len(),
        });
    }
    let mut args = args.into_iter();
    let mut next = || args.next().expect("arity checked");
    Ok(match name.as_str() {
        "count" => LogicalForm::count(to_lf(next())?),
        "argmax" | "argmin" => {
            let arg = to_lf(next())?;
            let rel = bare(next(), &name, 1, "a relation")?;
            if name == "argmax" {
                LogicalForm::argmax(arg, rel)
            } else {
                LogicalForm::argmin(arg, rel)
            }
        }
        "and" | "or" => {
            let l = to_lf(next())?;
            let r = to_lf(next())?;
            if name == "and" {
                LogicalForm::and(l, r)
            } else {
                LogicalForm::or(l, r)
            }
        }
        n if n.starts_with("filter_") => {
            let cmp = Comparator::from_name(&n["filter_".len()..]).expect("checked above");
            let arg = to_lf(next())?;
            let rel = bare(next(), &name, 1, "a relation")?;
            let value = bare(next(), &name, 2, "a value")?;
            LogicalForm::filter(cmp, arg, rel, Value::parse_literal(&value))
        }
        _ => LogicalForm::apply(name, to_lf(next())?),
    })
}

/// Parses FunQL surface text.
pub fn parse_funql(text: &str) -> Result<LogicalForm, SyntaxError> {
    let mut lex = Lexer { src: text, pos: 0 };
    let term = parse_term(&mut lex)?;
    match lex.next() {
        (Tok::End, _) => to_lf(term),
        (_, p) => Err(unexpected(p, &["end of input"])),
    }
}

/// Canonical surface form.
pub fn print_funql(lf: &LogicalForm) -> String {
    let mut out = String::new();
    write_lf(lf, &mut out);
    out
}

fn write_lf(lf: &LogicalForm, out: &mut String) {
    match lf {
        LogicalForm::Entity(e) => out.push_str(e),
        LogicalForm::Apply { relation, arg } => {
            out.push_str(relation);
            out.push('(');
            write_lf(arg, out);
            out.push(')');
        }
        LogicalForm::Count(arg) => {
            out.push_str("count(");
            write_lf(arg, out);
            out.push(')');
        }
        LogicalForm::ArgMax { arg, relation } | LogicalForm::ArgMin { arg, relation } => {
            out.push_str(if matches!(lf, LogicalForm::ArgMax { .. }) {
                "argmax("
            } else {
                "argmin("
            });
            write_lf(arg, out);
            out.push_str(", ");
            out.push_str(relation);
            out.push(')');
        }
        LogicalForm::Filter {
            cmp,
            arg,
            relation,
            value,
        } => {
            out.push_str("filter_");
            out.push_str(cmp.name());
            out.push('(');
            write_lf(arg, out);
            out.push_str(", ");
            out.push_str(relation);
            out.push_str(", ");
            match value {
                Value::Number(n) => out.push_str(&format_number(*n)),
                Value::Entity(e) => out.push_str(e),
            }
            out.push(')');
        }
        LogicalForm::And(l, r) | LogicalForm::Or(l, r) => {
            out.push_str(if matches!(lf, LogicalForm::And(..)) { "and(" } else { "or(" });
            write_lf(l, out);
            out.push_str(", ");
            write_lf(r, out);
            out.push(')');
        }
    }
}
