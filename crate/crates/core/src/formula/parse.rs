//! Recursive-descent parser for the constraint language.
//!
//! ```text
//! formula := or
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(" formula ")" | phrase
//! phrase  := '"' word (space word)* '"'
//! ```

use super::{Formula, FormulaError, Phrase};
use crate::scorer::Vocab;
use crate::TokenId;

/// Parses against a fixed vocabulary; unknown words are errors.
pub fn parse_formula(text: &str, vocab: &Vocab) -> Result<Formula, FormulaError> {
    parse_formula_with(text, |word, offset| {
        vocab.id(word).ok_or_else(|| FormulaError::UnknownWord {
            word: word.to_string(),
            offset,
        })
    })
}

/// Parses and adds any unseen words to `vocab`.
pub fn parse_formula_open(text: &str, vocab: &mut Vocab) -> Result<Formula, FormulaError> {
    parse_formula_with(text, |word, _| Ok(vocab.insert(word)))
}

/// Parses with a caller-supplied word resolver `(word, byte offset) -> id`.
pub fn parse_formula_with<F>(text: &str, resolve: F) -> Result<Formula, FormulaError>
where
    F: FnMut(&str, usize) -> Result<TokenId, FormulaError>,
{
    let mut p = Parser {
        src: text,
        pos: 0,
        resolve,
    };
    let f = p.or()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'s, F> {
    src: &'s str,
    pos: usize,
    resolve: F,
}

impl<F> Parser<'_, F>
where
    F: FnMut(&str, usize) -> Result<TokenId, FormulaError>,
{
    fn error(&self, message: &str) -> FormulaError {
        FormulaError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut items = vec![self.and()?];
        while self.eat('|') {
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut items = vec![self.unary()?];
        while self.eat('&') {
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some('(') => {
                self.pos += 1;
                let f = self.or()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(f)
            }
            Some('"') => self.phrase(),
            Some(_) => Err(self.error("expected '!', '(' or a quoted phrase")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn phrase(&mut self) -> Result<Formula, FormulaError> {
        let open = self.pos;
        self.pos += 1;
        let body_start = self.pos;
        let Some(len) = self.src[body_start..].find('"') else {
            self.pos = open;
            return Err(self.error("unterminated phrase"));
        };
        let body = &self.src[body_start..body_start + len];
        let mut tokens = Vec::new();
        let mut cursor = 0;
        for word in body.split_whitespace() {
            // byte offset of this word within the source
            let at = body[cursor..].find(word).unwrap() + cursor;
            cursor = at + word.len();
            tokens.push((self.resolve)(word, body_start + at)?);
        }
        if tokens.is_empty() {
            self.pos = open;
            return Err(self.error("empty phrase"));
        }
        self.pos = body_start + len + 1;
        Ok(Formula::pos(Phrase(tokens)))
    }
}
