//! Line-oriented text format for annotated ALC knowledge bases and queries.
//!
//! ```text
//! # penguins
//! 0.9 :: SubClassOf(Penguin, Bird)
//! SubClassOf(Penguin, Not(Fly))
//! 0.6 :: ClassAssertion(Penguin, pingu)
//! PropertyAssertion(likes, pingu, fish)
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::{Axiom, Concept, KnowledgeBase, ModelError, Name, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    BadProbability,
    DuplicateAxiom,
    BadName,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::BadProbability => "bad probability",
            ParseErrorKind::DuplicateAxiom => "duplicate axiom",
            ParseErrorKind::BadName => "bad name",
        };
        f.write_str(s)
    }
}

/// Error with a 1-based position inside the offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("axiom {0} was generated by the reasoner and has no surface syntax")]
    FreshAxiomPresent(usize),
}

/// A Boolean query: an axiom whose entailment is tested, or plain consistency.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    IsConsistent,
    ConceptAssertion {
        individual: Name,
        concept: Concept,
    },
    Subsumption {
        sub: Concept,
        sup: Concept,
    },
    RoleAssertion {
        role: Name,
        subject: Name,
        object: Name,
    },
}

impl Query {
    pub fn concept_assertion(individual: &str, concept: Concept) -> Query {
        Query::ConceptAssertion {
            individual: Name::new(individual).expect("valid individual name"),
            concept,
        }
    }
}

impl From<Axiom> for Query {
    fn from(ax: Axiom) -> Query {
        match ax {
            Axiom::Gci { sub, sup } => Query::Subsumption { sub, sup },
            Axiom::ConceptAssertion {
                individual,
                concept,
            } => Query::ConceptAssertion {
                individual,
                concept,
            },
            Axiom::RoleAssertion {
                role,
                subject,
                object,
            } => Query::RoleAssertion {
                role,
                subject,
                object,
            },
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::IsConsistent => write!(f, "Consistent()"),
            Query::ConceptAssertion {
                individual,
                concept,
            } => write!(f, "ClassAssertion({concept}, {individual})"),
            Query::Subsumption { sub, sup } => write!(f, "SubClassOf({sub}, {sup})"),
            Query::RoleAssertion {
                role,
                subject,
                object,
            } => write!(f, "PropertyAssertion({role}, {subject}, {object})"),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "SubClassOf",
    "ClassAssertion",
    "PropertyAssertion",
    "Consistent",
    "And",
    "Or",
    "Not",
    "Some",
    "All",
    "Thing",
    "Nothing",
];

/// Parses a KB file. Axiom ids follow line order.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    let mut kb = KnowledgeBase::new();
    let mut first_line: HashMap<Axiom, usize> = HashMap::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let mut cur = Cursor::new(line, line_no);
        cur.skip_ws();
        if cur.at_end() || cur.peek() == Some('#') {
            continue;
        }
        let start = cur.column();
        let probability = cur.probability_prefix()?;
        let axiom = cur.axiom_body()?;
        cur.skip_ws();
        cur.expect_end()?;
        if let Some(&earlier) = first_line.get(&axiom) {
            return Err(ParseError {
                line: line_no,
                column: start,
                kind: ParseErrorKind::DuplicateAxiom,
                message: format!(
                    "axiom already declared on line {earlier}; combine independent evidence \
                     p1, p2 as 1-(1-p1)(1-p2)"
                ),
            });
        }
        match kb.add(axiom.clone(), probability) {
            Ok(_) => {}
            Err(ModelError::ProbabilityOutOfRange(p)) => {
                return Err(cur.error_at(
                    start,
                    ParseErrorKind::BadProbability,
                    format!("probability {p} must lie strictly between 0 and 1"),
                ))
            }
            Err(e) => return Err(cur.error_at(start, ParseErrorKind::Syntax, e.to_string())),
        }
        first_line.insert(axiom, line_no);
    }
    Ok(kb)
}

/// Parses a query: an axiom body or `Consistent()`.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let line = text.trim_end_matches(['\r', '\n']);
    if line.contains('\n') {
        let column = line.find('\n').map_or(1, |b| line[..b].chars().count() + 1);
        return Err(ParseError {
            line: 1,
            column,
            kind: ParseErrorKind::Syntax,
            message: "a query must fit on one line".into(),
        });
    }
    let mut cur = Cursor::new(line, 1);
    cur.skip_ws();
    let query = if cur.peek_ident() == Some("Consistent") {
        cur.ident();
        cur.punct('(')?;
        cur.punct(')')?;
        Query::IsConsistent
    } else {
        Query::from(cur.axiom_body()?)
    };
    cur.skip_ws();
    cur.expect_end()?;
    Ok(query)
}

/// One axiom per line in id order; certain axioms carry no `::` prefix.
pub fn serialize_kb(kb: &KnowledgeBase) -> Result<String, SerializeError> {
    let mut out = String::new();
    for ax in kb.axioms() {
        if ax.origin == Origin::FreshQuery {
            return Err(SerializeError::FreshAxiomPresent(ax.id));
        }
        if let Some(p) = ax.probability {
            // `Display` for f64 prints the shortest round-trip decimal, never an exponent.
            out.push_str(&format!("{p} :: "));
        }
        out.push_str(&ax.axiom.to_string());
        out.push('\n');
    }
    Ok(out)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(line: &str, line_no: usize) -> Cursor {
        Cursor {
            chars: line.chars().collect(),
            pos: 0,
            line: line_no,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.pos += 1;
        }
    }

    fn error_at(&self, column: usize, kind: ParseErrorKind, message: String) -> ParseError {
        ParseError {
            line: self.line,
            column: column.min(self.chars.len() + 1).max(1),
            kind,
            message,
        }
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        self.error_at(self.column(), ParseErrorKind::Syntax, message.into())
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.syntax(format!("unexpected {c:?} after axiom"))),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.syntax(format!("expected {c:?}, found {got:?}"))),
            None => Err(self.syntax(format!("expected {c:?}, found end of line"))),
        }
    }

    /// Identifier-like run `[A-Za-z0-9_]*` at the cursor, without consuming it.
    fn peek_ident(&self) -> Option<&'static str> {
        let end = self.ident_end();
        if end == self.pos {
            return None;
        }
        let word: String = self.chars[self.pos..end].iter().collect();
        KEYWORDS.iter().copied().find(|k| *k == word)
    }

    fn ident_end(&self) -> usize {
        let mut end = self.pos;
        while end < self.chars.len()
            && (self.chars[end].is_ascii_alphanumeric() || self.chars[end] == '_')
        {
            end += 1;
        }
        end
    }

    fn ident(&mut self) -> String {
        let end = self.ident_end();
        let word: String = self.chars[self.pos..end].iter().collect();
        self.pos = end;
        word
    }

    fn probability_prefix(&mut self) -> Result<Option<f64>, ParseError> {
        if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Ok(None);
        }
        let start = self.column();
        let mut literal = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            literal.push(c);
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            literal.push('.');
            self.pos += 1;
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(self.error_at(
                    self.column(),
                    ParseErrorKind::BadProbability,
                    "expected digits after decimal point".into(),
                ));
            }
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                literal.push(c);
                self.pos += 1;
            }
        }
        if self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        {
            return Err(self.error_at(
                start,
                ParseErrorKind::BadProbability,
                "probability must be a plain decimal literal".into(),
            ));
        }
        let value: f64 = literal
            .parse()
            .map_err(|_| self.error_at(start, ParseErrorKind::BadProbability, literal.clone()))?;
        if !(value > 0.0 && value < 1.0) {
            return Err(self.error_at(
                start,
                ParseErrorKind::BadProbability,
                format!("probability {literal} must lie strictly between 0 and 1"),
            ));
        }
        self.skip_ws();
        if self.peek() == Some(':') && self.chars.get(self.pos + 1) == Some(&':') {
            self.pos += 2;
            self.skip_ws();
            Ok(Some(value))
        } else {
            Err(self.syntax("expected '::' after probability"))
        }
    }

    fn axiom_body(&mut self) -> Result<Axiom, ParseError> {
        self.skip_ws();
        let col = self.column();
        let kw = self.ident();
        match kw.as_str() {
            "SubClassOf" => {
                self.punct('(')?;
                let sub = self.concept()?;
                self.punct(',')?;
                let sup = self.concept()?;
                self.punct(')')?;
                Ok(Axiom::Gci { sub, sup })
            }
            "ClassAssertion" => {
                self.punct('(')?;
                let concept = self.concept()?;
                self.punct(',')?;
                let individual = self.name()?;
                self.punct(')')?;
                Ok(Axiom::ConceptAssertion {
                    individual,
                    concept,
                })
            }
            "PropertyAssertion" => {
                self.punct('(')?;
                let role = self.name()?;
                self.punct(',')?;
                let subject = self.name()?;
                self.punct(',')?;
                let object = self.name()?;
                self.punct(')')?;
                Ok(Axiom::RoleAssertion {
                    role,
                    subject,
                    object,
                })
            }
            "" => Err(self.syntax("expected SubClassOf, ClassAssertion or PropertyAssertion")),
            other => Err(self.error_at(
                col,
                ParseErrorKind::Syntax,
                format!("unknown axiom keyword {other:?}"),
            )),
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        self.skip_ws();
        let col = self.column();
        let word = self.ident();
        if word.is_empty() {
            return Err(self.syntax(match self.peek() {
                Some(c) => format!("expected a name, found {c:?}"),
                None => "expected a name, found end of line".into(),
            }));
        }
        if KEYWORDS.contains(&word.as_str()) {
            return Err(self.error_at(
                col,
                ParseErrorKind::BadName,
                format!("{word:?} is a reserved word"),
            ));
        }
        Name::new(&word).map_err(|_| {
            self.error_at(
                col,
                ParseErrorKind::BadName,
                format!("{word:?} does not match [A-Za-z_][A-Za-z0-9_]*"),
            )
        })
    }

    fn concept(&mut self) -> Result<Concept, ParseError> {
        self.skip_ws();
        match self.peek_ident() {
            Some("Thing") => {
                self.ident();
                Ok(Concept::Top)
            }
            Some("Nothing") => {
                self.ident();
                Ok(Concept::Bottom)
            }
            Some("Not") => {
                self.ident();
                self.punct('(')?;
                let c = self.concept()?;
                self.punct(')')?;
                Ok(Concept::not(c))
            }
            Some(kw @ ("And" | "Or")) => {
                self.ident();
                self.punct('(')?;
                let mut args = vec![self.concept()?];
                loop {
                    self.skip_ws();
                    if self.peek() == Some(',') {
                        self.pos += 1;
                        args.push(self.concept()?);
                    } else {
                        break;
                    }
                }
                if args.len() < 2 {
                    return Err(self.syntax(format!("{kw} needs at least two arguments")));
                }
                self.punct(')')?;
                Ok(if kw == "And" {
                    Concept::And(args)
                } else {
                    Concept::Or(args)
                })
            }
            Some(kw @ ("Some" | "All")) => {
                self.ident();
                self.punct('(')?;
                let role = self.name()?;
                self.punct(',')?;
                let filler = Box::new(self.concept()?);
                self.punct(')')?;
                Ok(if kw == "Some" {
                    Concept::Some(role, filler)
                } else {
                    Concept::All(role, filler)
                })
            }
            _ => self.name().map(Concept::Atomic),
        }
    }
}
