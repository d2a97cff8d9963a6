#![allow(dead_code)]

use pengu_core::{Axiom, Concept, KnowledgeBase, Query};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PENGUINS_1: &str = "\
0.9 :: SubClassOf(Penguin, Bird)
0.9 :: SubClassOf(Penguin, Not(Fly))
0.6 :: ClassAssertion(Penguin, pingu)
";

pub const PENGUINS_1_1: &str = "\
0.9 :: SubClassOf(Penguin, Bird)
0.6 :: ClassAssertion(Penguin, pingu)
0.6 :: ClassAssertion(Bird, pingu)
";

pub const PENGUINS_3: &str = "\
0.9 :: SubClassOf(Bird, Fly)
SubClassOf(Penguin, Bird)
0.9 :: SubClassOf(Penguin, Not(Fly))
ClassAssertion(Penguin, pingu)
";

/// Flying penguins 3 with axiom (3) certain.
pub const PENGUINS_3_CERTAIN: &str = "\
0.9 :: SubClassOf(Bird, Fly)
SubClassOf(Penguin, Bird)
SubClassOf(Penguin, Not(Fly))
ClassAssertion(Penguin, pingu)
";

pub const PENGUINS_4: &str = "\
SubClassOf(Bird, Fly)
SubClassOf(Penguin, Bird)
SubClassOf(Penguin, Not(Fly))
ClassAssertion(Penguin, pingu)
";

pub const UNIVERSITY_TBOX: &str = "\
SubClassOf(And(Professor, Tutor), Lecturer)
SubClassOf(And(Person, Professor), PhD)
SubClassOf(Or(Professor, Tutor), UniversityEmployee)
";

pub const UNIVERSITY_DISJOINT: &str = "SubClassOf(Professor, Not(Tutor))\n";

pub const UNIVERSITY_ABOX: &str = "\
0.9 :: ClassAssertion(Person, alice)
0.2 :: ClassAssertion(Professor, alice)
0.8 :: ClassAssertion(Tutor, alice)
";

pub fn university() -> String {
    format!("{UNIVERSITY_TBOX}{UNIVERSITY_DISJOINT}{UNIVERSITY_ABOX}")
}

/// The university KB without the disjointness axiom.
pub fn university_consistent() -> String {
    format!("{UNIVERSITY_TBOX}{UNIVERSITY_ABOX}")
}

pub const UNIVERSITY_QUERIES: [&str; 4] = [
    "ClassAssertion(Lecturer, alice)",
    "ClassAssertion(PhD, alice)",
    "ClassAssertion(UniversityEmployee, alice)",
    "ClassAssertion(Person, alice)",
];

pub const CONCEPTS: [&str; 4] = ["A", "B", "C", "D"];
pub const INDIVIDUALS: [&str; 3] = ["a", "b", "c"];
const PROBS: [f64; 4] = [0.3, 0.5, 0.6, 0.9];

pub fn random_concept(rng: &mut ChaCha8Rng, depth: usize) -> Concept {
    let atom = |rng: &mut ChaCha8Rng| Concept::atomic(CONCEPTS.choose(rng).unwrap());
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..10) {
            0 => Concept::Top,
            1 => Concept::Bottom,
            2..=4 => Concept::not(atom(rng)),
            _ => atom(rng),
        };
    }
    match rng.gen_range(0..6) {
        0 => Concept::and(vec![
            random_concept(rng, depth - 1),
            random_concept(rng, depth - 1),
        ]),
        1 => Concept::or(vec![
            random_concept(rng, depth - 1),
            random_concept(rng, depth - 1),
        ]),
        2 => Concept::some("r", random_concept(rng, depth - 1)),
        3 => Concept::all("r", random_concept(rng, depth - 1)),
        _ => Concept::not(random_concept(rng, depth - 1)),
    }
}

/// A KB with at most `max_tbox` GCIs and `max_abox` assertions over a small
/// signature, roughly half of the axioms probabilistic.
pub fn random_kb(
    rng: &mut ChaCha8Rng,
    max_tbox: usize,
    max_abox: usize,
    depth: usize,
) -> KnowledgeBase {
    let mut axioms = Vec::new();
    for _ in 0..rng.gen_range(0..=max_tbox) {
        axioms.push(Axiom::gci(
            random_concept(rng, depth),
            random_concept(rng, depth),
        ));
    }
    for _ in 0..rng.gen_range(1..=max_abox) {
        let a = *INDIVIDUALS.choose(rng).unwrap();
        if rng.gen_bool(0.2) {
            let b = *INDIVIDUALS.choose(rng).unwrap();
            axioms.push(Axiom::role_assertion("r", a, b));
        } else {
            axioms.push(Axiom::concept_assertion(a, random_concept(rng, depth)));
        }
    }
    axioms.shuffle(rng);
    let mut kb = KnowledgeBase::new();
    for ax in axioms {
        let p = rng.gen_bool(0.5).then(|| *PROBS.choose(rng).unwrap());
        // Duplicates are simply dropped.
        let _ = kb.add(ax, p);
    }
    kb
}

pub fn random_atomic_query(rng: &mut ChaCha8Rng) -> Query {
    let c = Concept::atomic(CONCEPTS.choose(rng).unwrap());
    let c = if rng.gen_bool(0.25) {
        Concept::not(c)
    } else {
        c
    };
    Query::concept_assertion(INDIVIDUALS.choose(rng).unwrap(), c)
}

/// Boolean formula over variables `0..vars`, for checking the BDD engine.
#[derive(Debug, Clone)]
pub enum Formula {
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn random(rng: &mut ChaCha8Rng, vars: usize, depth: usize) -> Formula {
        if depth == 0 || rng.gen_bool(0.2) {
            return Formula::Var(rng.gen_range(0..vars));
        }
        let op = rng.gen_range(0..5);
        let mut sub = || Box::new(Formula::random(rng, vars, depth - 1));
        match op {
            0 => Formula::Not(sub()),
            1 | 2 => Formula::And(sub(), sub()),
            _ => Formula::Or(sub(), sub()),
        }
    }

    pub fn eval(&self, bits: u32) -> bool {
        match self {
            Formula::Var(i) => bits & (1 << i) != 0,
            Formula::Not(f) => !f.eval(bits),
            Formula::And(a, b) => a.eval(bits) && b.eval(bits),
            Formula::Or(a, b) => a.eval(bits) || b.eval(bits),
        }
    }

    /// The same function written differently: De Morgan, swapped operands.
    pub fn rewritten(&self) -> Formula {
        match self {
            Formula::Var(i) => Formula::Not(Box::new(Formula::Not(Box::new(Formula::Var(*i))))),
            Formula::Not(f) => Formula::Not(Box::new(f.rewritten())),
            Formula::And(a, b) => Formula::Not(Box::new(Formula::Or(
                Box::new(Formula::Not(Box::new(b.rewritten()))),
                Box::new(Formula::Not(Box::new(a.rewritten()))),
            ))),
            Formula::Or(a, b) => Formula::Or(Box::new(b.rewritten()), Box::new(a.rewritten())),
        }
    }

    pub fn build(&self, m: &mut pengu_core::bdd::BddManager) -> pengu_core::bdd::BddRef {
        match self {
            Formula::Var(i) => m.var(*i).unwrap(),
            Formula::Not(f) => {
                let x = f.build(m);
                m.not(x).unwrap()
            }
            Formula::And(a, b) => {
                let (x, y) = (a.build(m), b.build(m));
                m.and(x, y).unwrap()
            }
            Formula::Or(a, b) => {
                let (x, y) = (a.build(m), b.build(m));
                m.or(x, y).unwrap()
            }
        }
    }

    /// Weighted model count by enumerating all `2^vars` assignments.
    pub fn weighted_count(&self, vars: usize, weights: &[f64]) -> f64 {
        (0..1u32 << vars)
            .filter(|&bits| self.eval(bits))
            .map(|bits| {
                (0..vars)
                    .map(|i| {
                        if bits & (1 << i) != 0 {
                            weights[i]
                        } else {
                            1.0 - weights[i]
                        }
                    })
                    .product::<f64>()
            })
            .sum()
    }
}
