//! All justifications of a query and of the inconsistency of a KB.
//!
//! The query is folded into the KB with a fresh concept `$Qp`: for
//! `a : C` we add `a : $Qp` and `$Qp ⊑ ¬C`, so a minimal inconsistent subset
//! that uses the fresh axioms is a justification of the query. A Reiter
//! hitting-set tree over single-justification extraction enumerates them all;
//! the fresh axioms are never removed.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::axiom_set::AxiomSet;
use crate::model::{Axiom, AxiomId, Concept, KnowledgeBase, Name};
use crate::parser::Query;
use crate::tableau::{Reasoner, TableauConfig, TableauError};

/// Largest KB the brute-force oracle accepts.
pub const ORACLE_MAX_AXIOMS: usize = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JustifyError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("knowledge base has {axioms} axioms; the oracle handles at most {max}")]
    TooLarge { axioms: usize, max: usize },
}

/// The KB extended with the axioms that encode the negated query.
#[derive(Debug, Clone)]
pub struct QueryTransform {
    /// Source axioms followed by the fresh ones.
    pub kb: KnowledgeBase,
    pub base_ids: AxiomSet,
    pub fresh_ids: AxiomSet,
    pub query: Query,
}

/// Fresh concept standing for the negated query.
pub fn fresh_concept() -> Concept {
    Concept::Atomic(Name::reserved("Qp"))
}

fn fresh_concept_named(suffix: &str) -> Concept {
    Concept::Atomic(Name::reserved(suffix))
}

/// Adds the fresh axioms for `q`. For [`Query::IsConsistent`] nothing is added.
pub fn transform_query(kb: &KnowledgeBase, q: &Query) -> QueryTransform {
    let mut out = kb.clone();
    let base_ids = kb.ids();
    let qp = fresh_concept();
    let fresh_axioms = match q {
        Query::IsConsistent => vec![],
        Query::ConceptAssertion {
            individual,
            concept,
        } => vec![
            Axiom::ConceptAssertion {
                individual: individual.clone(),
                concept: qp.clone(),
            },
            Axiom::gci(qp, concept.complement()),
        ],
        Query::Subsumption { sub, sup } => vec![
            Axiom::ConceptAssertion {
                individual: Name::reserved("q0"),
                concept: qp.clone(),
            },
            Axiom::gci(qp, Concept::And(vec![sub.nnf(), sup.complement()])),
        ],
        // (a, b) : R fails iff a : ∀R.¬D_Qp and b : D_Qp are jointly satisfiable.
        Query::RoleAssertion {
            role,
            subject,
            object,
        } => {
            let dp = fresh_concept_named("Dp");
            vec![
                Axiom::ConceptAssertion {
                    individual: subject.clone(),
                    concept: qp.clone(),
                },
                Axiom::ConceptAssertion {
                    individual: object.clone(),
                    concept: dp.clone(),
                },
                Axiom::gci(qp, Concept::All(role.clone(), Box::new(Concept::not(dp)))),
            ]
        }
    };
    let mut fresh_ids = AxiomSet::new();
    for ax in fresh_axioms {
        let id = out
            .add_fresh(ax)
            .expect("fresh axioms use reserved names and cannot collide");
        fresh_ids.insert(id);
    }
    QueryTransform {
        kb: out,
        base_ids,
        fresh_ids,
        query: q.clone(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JustifyConfig {
    /// Stop after this many justifications (query and inconsistency together).
    pub max_justifications: Option<usize>,
    pub tableau: TableauConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JustificationBundle {
    /// Query justifications with the fresh axioms removed, sorted.
    pub query_justs: Vec<AxiomSet>,
    /// Minimal inconsistent subsets of the KB, sorted.
    pub incons_justs: Vec<AxiomSet>,
    /// Set when the justification cap stopped the enumeration early.
    pub partial: bool,
}

pub fn all_justifications(
    kb: &KnowledgeBase,
    q: &Query,
) -> Result<JustificationBundle, JustifyError> {
    all_justifications_with(kb, q, &JustifyConfig::default())
}

pub fn all_justifications_with(
    kb: &KnowledgeBase,
    q: &Query,
    config: &JustifyConfig,
) -> Result<JustificationBundle, JustifyError> {
    let t = transform_query(kb, q);
    let reasoner = Reasoner::with_config(&t.kb, config.tableau);
    let has_query = !t.fresh_ids.is_empty();
    let all_ids = t.base_ids.union(&t.fresh_ids);

    let mut incons: Vec<AxiomSet> = Vec::new();
    let mut query: Vec<AxiomSet> = Vec::new();
    // Paths whose node KB turned out fully consistent.
    let mut closed: Vec<AxiomSet> = Vec::new();
    // Paths whose pure (fresh-free) KB is consistent.
    let mut pure_ok: Vec<AxiomSet> = Vec::new();
    let mut partial = false;

    let mut queue = VecDeque::from([AxiomSet::new()]);
    let mut visited: HashSet<AxiomSet> = HashSet::from([AxiomSet::new()]);

    let cap_reached = |incons: &Vec<AxiomSet>, query: &Vec<AxiomSet>| {
        config
            .max_justifications
            .is_some_and(|m| incons.len() + query.len() >= m)
    };

    'nodes: while let Some(path) = queue.pop_front() {
        if closed.iter().any(|c| c.is_subset(&path)) {
            continue;
        }
        let mut label: Option<AxiomSet> = None;

        if !pure_ok.iter().any(|p| p.is_subset(&path)) {
            if let Some(j) = incons.iter().find(|j| j.is_disjoint(&path)) {
                label = Some(j.clone());
            } else if cap_reached(&incons, &query) {
                if !reasoner.is_consistent_subset(&t.base_ids.difference(&path))? {
                    partial = true;
                    break 'nodes;
                }
                pure_ok.push(path.clone());
            } else {
                match reasoner.find_justification(&t.base_ids.difference(&path))? {
                    Some(j) => {
                        incons.push(j.clone());
                        label = Some(j);
                    }
                    None => pure_ok.push(path.clone()),
                }
            }
        }

        if label.is_none() && has_query {
            if let Some(j) = query.iter().find(|j| j.is_disjoint(&path)) {
                label = Some(j.clone());
            } else {
                let node = all_ids.difference(&path);
                if cap_reached(&incons, &query) {
                    if !reasoner.is_consistent_subset(&node)? {
                        partial = true;
                        break 'nodes;
                    }
                } else if let Some(j) = reasoner.find_justification(&node)? {
                    debug_assert!(t.fresh_ids.is_subset(&j), "pure part was consistent");
                    query.push(j.clone());
                    label = Some(j);
                }
            }
        }

        let Some(label) = label else {
            closed.push(path);
            continue;
        };
        for id in label.difference(&t.fresh_ids).iter() {
            let mut child = path.clone();
            child.insert(id);
            if visited.insert(child.clone()) {
                queue.push_back(child);
            }
        }
    }

    let mut query_justs: Vec<AxiomSet> = query.iter().map(|j| j.difference(&t.fresh_ids)).collect();
    query_justs.sort();
    incons.sort();
    Ok(JustificationBundle {
        query_justs,
        incons_justs: incons,
        partial,
    })
}

/// Brute-force justifications by enumerating every subset of the KB.
pub fn oracle_all_justifications(
    kb: &KnowledgeBase,
    q: &Query,
) -> Result<JustificationBundle, JustifyError> {
    let ids: Vec<AxiomId> = kb.ids().to_vec();
    let m = ids.len();
    if m > ORACLE_MAX_AXIOMS {
        return Err(JustifyError::TooLarge {
            axioms: m,
            max: ORACLE_MAX_AXIOMS,
        });
    }
    let t = transform_query(kb, q);
    let reasoner = Reasoner::new(&t.kb);
    let has_query = !t.fresh_ids.is_empty();
    let subset = |mask: usize| -> AxiomSet {
        (0..m)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| ids[b])
            .collect()
    };

    // By monotonicity, what the whole KB lacks no subset has.
    let all = kb.ids();
    let all_consistent = reasoner.is_consistent_subset(&all)?;
    let has_query = has_query
        && !(all_consistent && reasoner.is_consistent_subset(&all.union(&t.fresh_ids))?);

    // Masks in increasing order visit every subset before its supersets.
    let n = 1usize << m;
    let mut consistent = vec![false; n];
    let mut entails = vec![false; n];
    for mask in 0..n {
        let smaller = (0..m)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| mask & !(1 << b));
        consistent[mask] = if smaller.clone().any(|s| !consistent[s]) {
            false
        } else if all_consistent {
            true
        } else {
            reasoner.is_consistent_subset(&subset(mask))?
        };
        if has_query {
            // An inconsistent subset entails everything.
            entails[mask] = if !consistent[mask] || smaller.clone().any(|s| entails[s]) {
                true
            } else {
                !reasoner.is_consistent_subset(&subset(mask).union(&t.fresh_ids))?
            };
        }
    }

    let mut bundle = JustificationBundle::default();
    for mask in 0..n {
        let mut smaller = (0..m)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| mask & !(1 << b));
        if !consistent[mask] && smaller.all(|s| consistent[s]) {
            bundle.incons_justs.push(subset(mask));
        }
        let mut smaller = (0..m)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| mask & !(1 << b));
        if consistent[mask] && entails[mask] && smaller.all(|s| !entails[s]) {
            bundle.query_justs.push(subset(mask));
        }
    }
    bundle.query_justs.sort();
    bundle.incons_justs.sort();
    Ok(bundle)
}
