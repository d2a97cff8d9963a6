//! Synthetic chain knowledge bases whose justification count doubles with each link.
//!
//! For `i = 1..=n`: `B_{i-1} ⊑ P_i ⊓ Q_i`, `P_i ⊑ B_i`, `Q_i ⊑ B_i`, plus
//! `x : B_0`. Settings add a disjointness axiom and, for S4, a side chain on
//! `C` with its own query.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{Axiom, Concept, KnowledgeBase};
use crate::parser::Query;

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 16;
pub const DEFAULT_P: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("chain length {0} outside {MIN_N}..={MAX_N}")]
    Range(usize),
    #[error("probability {0} is outside the open interval (0, 1)")]
    Probability(f64),
    #[error("unknown {what} {value:?}")]
    Unknown { what: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    /// Consistent chain.
    S1,
    /// `B_0 ⊑ ¬B_1`: two small inconsistency justifications.
    S2,
    /// `B_n ⊑ ¬B_{n-1}`: as many inconsistency justifications as query ones.
    S3,
    /// S3 plus a fixed side chain queried through `x : C_1`.
    S4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbMode {
    #[default]
    None,
    Assertional,
    All,
}

impl FromStr for Setting {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Setting::S1),
            "s2" => Ok(Setting::S2),
            "s3" => Ok(Setting::S3),
            "s4" => Ok(Setting::S4),
            _ => Err(BenchError::Unknown {
                what: "setting",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Setting::S1 => "s1",
            Setting::S2 => "s2",
            Setting::S3 => "s3",
            Setting::S4 => "s4",
        };
        f.write_str(s)
    }
}

impl FromStr for ProbMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ProbMode::None),
            "assertional" => Ok(ProbMode::Assertional),
            "all" => Ok(ProbMode::All),
            _ => Err(BenchError::Unknown {
                what: "probability mode",
                value: s.to_string(),
            }),
        }
    }
}

fn atom(name: &str) -> Concept {
    Concept::atomic(name)
}

fn b(i: usize) -> Concept {
    atom(&format!("B_{i}"))
}

/// The benchmark KB for chain length `n`.
pub fn generate(
    n: usize,
    setting: Setting,
    mode: ProbMode,
    p: f64,
) -> Result<KnowledgeBase, BenchError> {
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(BenchError::Range(n));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(BenchError::Probability(p));
    }
    let mut axioms = Vec::new();
    for i in 1..=n {
        let (pi, qi) = (atom(&format!("P_{i}")), atom(&format!("Q_{i}")));
        axioms.push(Axiom::gci(
            b(i - 1),
            Concept::and(vec![pi.clone(), qi.clone()]),
        ));
        axioms.push(Axiom::gci(pi, b(i)));
        axioms.push(Axiom::gci(qi, b(i)));
    }
    axioms.push(Axiom::concept_assertion("x", b(0)));
    match setting {
        Setting::S1 => {}
        Setting::S2 => axioms.push(Axiom::gci(b(0), Concept::not(b(1)))),
        Setting::S3 | Setting::S4 => axioms.push(Axiom::gci(b(n), Concept::not(b(n - 1)))),
    }
    if setting == Setting::S4 {
        let (c0, c01, c02, c1) = (atom("C_0"), atom("C_0_1"), atom("C_0_2"), atom("C_1"));
        axioms.push(Axiom::gci(
            c0.clone(),
            Concept::and(vec![c01.clone(), c02.clone()]),
        ));
        axioms.push(Axiom::gci(c01, c1.clone()));
        axioms.push(Axiom::gci(c02, c1));
        axioms.push(Axiom::concept_assertion("x", c0));
    }
    let mut kb = KnowledgeBase::new();
    for ax in axioms {
        let prob = match mode {
            ProbMode::None => None,
            ProbMode::Assertional => ax.is_abox().then_some(p),
            ProbMode::All => Some(p),
        };
        kb.add(ax, prob).expect("generated axioms are distinct");
    }
    Ok(kb)
}

/// The query the setting is designed around: `x : B_n`, or `x : C_1` for S4.
pub fn query(n: usize, setting: Setting) -> Query {
    match setting {
        Setting::S4 => Query::concept_assertion("x", atom("C_1")),
        _ => Query::concept_assertion("x", b(n)),
    }
}
