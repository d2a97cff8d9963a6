//! End-to-end query answering: justifications, then DISPONTE probabilities,
//! then repair verdicts, with per-phase timings.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::axiom_set::AxiomSet;
use crate::justify::{
    all_justifications_with, oracle_all_justifications, JustificationBundle, JustifyConfig,
    JustifyError, ORACLE_MAX_AXIOMS,
};
use crate::model::KnowledgeBase;
use crate::parser::Query;
use crate::semantics::{
    oracle_verdict, oracle_world_probs, prob_report, ProbReport, Removability, RepairAnalysis,
    SemanticsError, Verdict,
};
use crate::tableau::{is_consistent, TableauError};

pub const UNDEFINED_REASON: &str = "certainly inconsistent";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SemanticsMode {
    Disponte,
    Repairs,
    #[default]
    All,
}

impl SemanticsMode {
    pub fn wants_repairs(self) -> bool {
        matches!(self, SemanticsMode::Repairs | SemanticsMode::All)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct QueryOptions {
    pub semantics: SemanticsMode,
    pub removability: Removability,
    pub justify: JustifyConfig,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Justify(#[from] JustifyError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl PipelineError {
    /// Step budget or oracle size limit, as opposed to a bug.
    pub fn is_limit(&self) -> bool {
        matches!(
            self,
            PipelineError::Tableau(_)
                | PipelineError::Justify(_)
                | PipelineError::Semantics(
                    SemanticsError::TooLarge { .. } | SemanticsError::Tableau(_)
                )
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub justification_ms: f64,
    pub disponte_ms: f64,
    pub repair_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryReport {
    pub query: String,
    pub consistent: bool,
    pub p_incons: f64,
    pub p_cons: f64,
    pub p_q_and_cons: f64,
    pub p_c: Option<f64>,
    pub p_c_undefined_reason: Option<&'static str>,
    pub verdict: Option<Verdict>,
    pub no_repair: bool,
    pub partial: bool,
    pub query_justifications: Vec<AxiomSet>,
    pub incons_justifications: Vec<AxiomSet>,
    pub timings: Timings,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub oracle: bool,
}

impl QueryReport {
    fn new(q: &Query, prob: ProbReport, bundle: JustificationBundle) -> Self {
        QueryReport {
            query: q.to_string(),
            consistent: bundle.incons_justs.is_empty(),
            p_incons: prob.p_incons,
            p_cons: prob.p_cons,
            p_q_and_cons: prob.p_q_and_cons,
            p_c: prob.p_c,
            p_c_undefined_reason: prob.p_c.is_none().then_some(UNDEFINED_REASON),
            verdict: None,
            no_repair: false,
            partial: prob.partial,
            query_justifications: bundle.query_justs,
            incons_justifications: bundle.incons_justs,
            timings: Timings::default(),
            oracle: false,
        }
    }

    pub fn prob(&self) -> ProbReport {
        ProbReport {
            p_incons: self.p_incons,
            p_cons: self.p_cons,
            p_q_and_cons: self.p_q_and_cons,
            p_c: self.p_c,
            partial: self.partial,
        }
    }

    fn check_invariants(&self) -> Result<(), PipelineError> {
        const EPS: f64 = 1e-12;
        let bad = |msg: String| Err(PipelineError::Invariant(msg));
        if self.p_q_and_cons > self.p_cons + EPS {
            return bad(format!(
                "P(Q, Cons) = {} exceeds P(Cons) = {}",
                self.p_q_and_cons, self.p_cons
            ));
        }
        if let Some(p) = self.p_c {
            if !(-EPS..=1.0 + EPS).contains(&p) {
                return bad(format!("P_C(Q) = {p} is not a probability"));
            }
        }
        Ok(())
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Justifications, probabilities and (if requested) the repair verdict for `q`.
pub fn run_query(
    kb: &KnowledgeBase,
    q: &Query,
    opts: &QueryOptions,
) -> Result<QueryReport, PipelineError> {
    let start = Instant::now();
    let bundle = all_justifications_with(kb, q, &opts.justify)?;
    let justification_ms = ms(start);

    let t = Instant::now();
    let prob = prob_report(kb, &bundle)?;
    let disponte_ms = ms(t);

    let t = Instant::now();
    let mut analysis = RepairAnalysis::new(kb, &bundle, opts.removability)?;
    let no_repair = analysis.no_repair();
    let verdict = if opts.semantics.wants_repairs() {
        Some(analysis.verdict()?)
    } else {
        None
    };
    let repair_ms = ms(t);

    let mut report = QueryReport::new(q, prob, bundle);
    report.verdict = verdict;
    report.no_repair = no_repair;
    report.timings = Timings {
        justification_ms,
        disponte_ms,
        repair_ms,
        total_ms: ms(start),
    };
    report.check_invariants()?;
    Ok(report)
}

/// The same report computed by exhaustive enumeration of worlds, subsets and repairs.
///
/// Justification lists are filled only for KBs of at most
/// [`ORACLE_MAX_AXIOMS`] axioms and are empty otherwise.
pub fn run_oracle(
    kb: &KnowledgeBase,
    q: &Query,
    opts: &QueryOptions,
) -> Result<QueryReport, PipelineError> {
    let start = Instant::now();
    let bundle = if kb.len() <= ORACLE_MAX_AXIOMS {
        oracle_all_justifications(kb, q)?
    } else {
        JustificationBundle::default()
    };
    let justification_ms = ms(start);

    let t = Instant::now();
    let prob = oracle_world_probs(kb, q)?;
    let disponte_ms = ms(t);

    let t = Instant::now();
    let (verdict, no_repair) = match oracle_verdict(kb, q, opts.removability) {
        Ok(v) => (Some(v), false),
        Err(SemanticsError::NoRepair) => (Some(Verdict::NotEntailed), true),
        Err(e) => return Err(e.into()),
    };
    let repair_ms = ms(t);

    let mut report = QueryReport::new(q, prob, bundle);
    report.consistent = is_consistent(kb)?;
    report.verdict = verdict.filter(|_| opts.semantics.wants_repairs());
    report.no_repair = no_repair;
    report.oracle = true;
    report.timings = Timings {
        justification_ms,
        disponte_ms,
        repair_ms,
        total_ms: ms(start),
    };
    report.check_invariants()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_kb, parse_query};

    const PENGUINS_3: &str = "\
0.9 :: SubClassOf(Bird, Fly)
SubClassOf(Penguin, Bird)
0.9 :: SubClassOf(Penguin, Not(Fly))
ClassAssertion(Penguin, pingu)
";

    #[test]
    fn penguins_three_matches_oracle() {
        let kb = parse_kb(PENGUINS_3).unwrap();
        let q = parse_query("ClassAssertion(Not(Fly), pingu)").unwrap();
        let opts = QueryOptions::default();
        let r = run_query(&kb, &q, &opts).unwrap();
        let o = run_oracle(&kb, &q, &opts).unwrap();
        assert!((r.p_cons - 0.19).abs() < 1e-12);
        assert!((r.p_q_and_cons - 0.09).abs() < 1e-12);
        assert!((r.p_c.unwrap() - 0.09 / 0.19).abs() < 1e-12);
        assert!((o.p_c.unwrap() - r.p_c.unwrap()).abs() < 1e-12);
        assert_eq!(r.verdict, o.verdict);
        assert_eq!(r.query_justifications, o.query_justifications);
        assert_eq!(r.incons_justifications, o.incons_justifications);
        assert!(!r.consistent && !o.consistent);
        assert!(o.oracle && !r.oracle);
    }

    #[test]
    fn json_shape() {
        let kb = parse_kb(PENGUINS_3).unwrap();
        let q = parse_query("ClassAssertion(Fly, pingu)").unwrap();
        let opts = QueryOptions {
            semantics: SemanticsMode::Disponte,
            ..Default::default()
        };
        let r = run_query(&kb, &q, &opts).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 13);
        let positions: Vec<usize> = [
            "query",
            "consistent",
            "p_incons",
            "p_cons",
            "p_q_and_cons",
            "p_c",
            "p_c_undefined_reason",
            "verdict",
            "no_repair",
            "partial",
            "query_justifications",
            "incons_justifications",
            "timings",
        ]
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).unwrap())
        .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(v["verdict"].is_null());
        assert_eq!(v["query_justifications"], serde_json::json!([[0, 1, 3]]));
    }

    #[test]
    fn undefined_when_certainly_inconsistent() {
        let kb = parse_kb(&PENGUINS_3.replace("0.9 :: ", "")).unwrap();
        let q = parse_query("ClassAssertion(Fly, pingu)").unwrap();
        let r = run_query(&kb, &q, &QueryOptions::default()).unwrap();
        assert_eq!(r.p_c, None);
        assert_eq!(r.p_c_undefined_reason, Some(UNDEFINED_REASON));
        assert!(r.no_repair);
        assert_eq!(r.verdict, Some(Verdict::NotEntailed));
    }
}
