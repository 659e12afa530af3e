//! Textual query form.
//!
//! ```text
//! query := term ( "and" term )*
//! term  := "category" ( "=" | "is" ) value
//!        | entity "." attribute op value
//! op    := "contains" | "=" | "year"
//! value := word | '"' ( char | '\"' | '\\' )* '"'
//! ```
//!
//! Keywords are case-insensitive; `year` takes an integer. Example:
//! `Sat_Title.Title contains factory and Sat_Location.Address = "Tourcoing"`.

use thiserror::Error;

use super::predicate::{AttrRef, Predicate};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, PartialEq, Eq)]
struct Token {
    column: usize,
    text: String,
    quoted: bool,
}

fn tokenize(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        let column = input[..start].chars().count() + 1;
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut text = String::new();
            loop {
                match chars.next() {
                    Some((_, '"')) => break,
                    Some((_, '\\')) => match chars.next() {
                        Some((_, e @ ('"' | '\\'))) => text.push(e),
                        _ => return Err(ParseError { column, message: "bad escape in quoted value".into() }),
                    },
                    Some((_, ch)) => text.push(ch),
                    None => return Err(ParseError { column, message: "unterminated quote".into() }),
                }
            }
            tokens.push(Token { column, text, quoted: true });
        } else if c == '=' {
            chars.next();
            tokens.push(Token { column, text: "=".into(), quoted: false });
        } else {
            let mut text = String::new();
            while let Some(&(_, ch)) = chars.peek() {
                if ch.is_whitespace() || ch == '=' || ch == '"' {
                    break;
                }
                text.push(ch);
                chars.next();
            }
            tokens.push(Token { column, text, quoted: false });
        }
    }
    Ok(tokens)
}

fn keyword(token: &Token, word: &str) -> bool {
    !token.quoted && token.text.eq_ignore_ascii_case(word)
}

pub fn parse_query(input: &str) -> Result<Vec<Predicate>, ParseError> {
    let tokens = tokenize(input)?;
    let end = input.chars().count() + 1;
    let mut pos = 0;
    let mut predicates = Vec::new();
    let next = |pos: &mut usize, what: &str| -> Result<&Token, ParseError> {
        let t = tokens.get(*pos).ok_or_else(|| ParseError { column: end, message: format!("expected {what}") })?;
        *pos += 1;
        Ok(t)
    };
    loop {
        let head = next(&mut pos, "a term")?;
        if keyword(head, "category") {
            let op = next(&mut pos, "`=` or `is`")?;
            if !(keyword(op, "=") || keyword(op, "is")) {
                return Err(ParseError { column: op.column, message: format!("expected `=` or `is`, found `{}`", op.text) });
            }
            let value = next(&mut pos, "a category label")?;
            predicates.push(Predicate::CategoryIs(value.text.clone()));
        } else {
            let (entity, attribute) = head
                .text
                .split_once('.')
                .filter(|(e, a)| !head.quoted && !e.is_empty() && !a.is_empty())
                .ok_or_else(|| ParseError { column: head.column, message: format!("expected Entity.Attribute, found `{}`", head.text) })?;
            let attr = AttrRef::new(entity, attribute);
            let op = next(&mut pos, "an operator")?;
            let value = next(&mut pos, "a value")?;
            let predicate = if keyword(op, "contains") {
                Predicate::ContainsWord(attr, value.text.clone())
            } else if keyword(op, "=") {
                Predicate::Equals(attr, value.text.clone())
            } else if keyword(op, "year") {
                let year = value
                    .text
                    .parse()
                    .map_err(|_| ParseError { column: value.column, message: format!("expected a year, found `{}`", value.text) })?;
                Predicate::YearEquals(attr, year)
            } else {
                return Err(ParseError {
                    column: op.column,
                    message: format!("expected `contains`, `=` or `year`, found `{}`", op.text),
                });
            };
            predicates.push(predicate);
        }
        match tokens.get(pos) {
            None => return Ok(predicates),
            Some(t) if keyword(t, "and") => pos += 1,
            Some(t) => return Err(ParseError { column: t.column, message: format!("expected `and`, found `{}`", t.text) }),
        }
    }
}
