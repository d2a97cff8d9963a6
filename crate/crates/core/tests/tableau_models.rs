//! The tableau agrees with exhaustive model search on existential-free KBs.
//!
//! Without `∃` in negation normal form, any model can be collapsed onto the
//! named individuals (or a single element when there are none), so searching
//! interpretations over that domain is complete.

use std::collections::HashMap;

use pengu_core::tableau::is_consistent;
use pengu_core::{Axiom, Concept, KnowledgeBase, Name};
use proptest::prelude::*;

const NAMES: [&str; 3] = ["A", "B", "C"];
const INDS: [&str; 2] = ["a", "b"];

fn leaf() -> impl Strategy<Value = Concept> {
    prop_oneof![
        prop::sample::select(NAMES.to_vec()).prop_map(Concept::atomic),
        prop::sample::select(NAMES.to_vec()).prop_map(|n| Concept::not(Concept::atomic(n))),
        Just(Concept::Top),
        Just(Concept::Bottom),
    ]
}

/// Concepts whose NNF has no `∃` (`positive`) or whose complement has none.
fn concept(positive: bool) -> impl Strategy<Value = Concept> {
    leaf().prop_recursive(2, 8, 2, move |inner| {
        let quantified = if positive {
            inner.clone().prop_map(|c| Concept::all("r", c)).boxed()
        } else {
            inner.clone().prop_map(|c| Concept::some("r", c)).boxed()
        };
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::and(vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Concept::or(vec![a, b])),
            quantified,
        ]
    })
}

fn axiom() -> impl Strategy<Value = Axiom> {
    prop_oneof![
        (concept(false), concept(true)).prop_map(|(c, d)| Axiom::gci(c, d)),
        (prop::sample::select(INDS.to_vec()), concept(true))
            .prop_map(|(i, c)| Axiom::concept_assertion(i, c)),
        (
            prop::sample::select(INDS.to_vec()),
            prop::sample::select(INDS.to_vec())
        )
            .prop_map(|(a, b)| Axiom::role_assertion("r", a, b)),
    ]
}

fn kb_strategy() -> impl Strategy<Value = KnowledgeBase> {
    prop::collection::vec(axiom(), 0..=6).prop_map(|axioms| {
        let mut kb = KnowledgeBase::new();
        for ax in axioms {
            let _ = kb.add(ax, None);
        }
        kb
    })
}

struct Interp {
    size: usize,
    concepts: HashMap<String, u32>,
    role: u32,
}

impl Interp {
    fn has_edge(&self, x: usize, y: usize) -> bool {
        self.role & (1 << (x * self.size + y)) != 0
    }

    fn sat(&self, c: &Concept, x: usize) -> bool {
        match c {
            Concept::Top => true,
            Concept::Bottom => false,
            Concept::Atomic(n) => self.concepts[n.as_str()] & (1 << x) != 0,
            Concept::Not(c) => !self.sat(c, x),
            Concept::And(cs) => cs.iter().all(|c| self.sat(c, x)),
            Concept::Or(cs) => cs.iter().any(|c| self.sat(c, x)),
            Concept::Some(_, c) => (0..self.size).any(|y| self.has_edge(x, y) && self.sat(c, y)),
            Concept::All(_, c) => (0..self.size).all(|y| !self.has_edge(x, y) || self.sat(c, y)),
        }
    }
}

fn has_model(kb: &KnowledgeBase) -> bool {
    let mut inds: Vec<&Name> = Vec::new();
    for a in kb.axioms() {
        match &a.axiom {
            Axiom::ConceptAssertion { individual, .. } => inds.push(individual),
            Axiom::RoleAssertion {
                subject, object, ..
            } => {
                inds.push(subject);
                inds.push(object);
            }
            Axiom::Gci { .. } => {}
        }
    }
    inds.sort();
    inds.dedup();
    let size = inds.len().max(1);
    let index = |n: &Name| inds.iter().position(|m| *m == n).unwrap();
    let ext_bits = size * NAMES.len();
    for ext in 0u32..1 << ext_bits {
        for role in 0u32..1 << (size * size) {
            let concepts = NAMES
                .iter()
                .enumerate()
                .map(|(k, n)| (n.to_string(), (ext >> (k * size)) & ((1 << size) - 1)))
                .collect();
            let i = Interp {
                size,
                concepts,
                role,
            };
            let ok = kb.axioms().iter().all(|a| match &a.axiom {
                Axiom::Gci { sub, sup } => (0..size).all(|x| !i.sat(sub, x) || i.sat(sup, x)),
                Axiom::ConceptAssertion {
                    individual,
                    concept,
                } => i.sat(concept, index(individual)),
                Axiom::RoleAssertion {
                    subject, object, ..
                } => i.has_edge(index(subject), index(object)),
            });
            if ok {
                return true;
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn tableau_agrees_with_model_search(kb in kb_strategy()) {
        prop_assert_eq!(is_consistent(&kb).unwrap(), has_model(&kb), "{:#?}", kb);
    }
}

#[test]
fn model_search_sanity() {
    let mut kb = KnowledgeBase::new();
    kb.add(Axiom::concept_assertion("a", Concept::atomic("A")), None)
        .unwrap();
    kb.add(Axiom::role_assertion("r", "a", "b"), None).unwrap();
    assert!(has_model(&kb));
    kb.add(
        Axiom::gci(
            Concept::atomic("A"),
            Concept::all("r", Concept::atomic("B")),
        ),
        None,
    )
    .unwrap();
    kb.add(
        Axiom::concept_assertion("b", Concept::not(Concept::atomic("B"))),
        None,
    )
    .unwrap();
    assert!(!has_model(&kb));
    assert_eq!(is_consistent(&kb), Ok(false));
}
