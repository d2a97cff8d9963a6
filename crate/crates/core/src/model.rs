//! ALC concepts, axioms and probabilistically annotated knowledge bases.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::axiom_set::AxiomSet;

/// Dense axiom identifier, assigned in declaration order. Doubles as the
/// BDD variable index of the axiom.
pub type AxiomId = usize;

/// Prefix reserved for names generated by the reasoner. It is outside the
/// lexical space of user names, so generated names never collide.
pub const RESERVED_PREFIX: char = '$';

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(
        "duplicate axiom (already declared as axiom {existing}); combine independent \
         evidence p1, p2 into a single axiom with probability 1-(1-p1)(1-p2)"
    )]
    DuplicateAxiom { existing: AxiomId },
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("unknown axiom id {0}")]
    UnknownAxiomId(AxiomId),
    #[error("invalid name {0:?}")]
    BadName(String),
}

/// A concept, role or individual name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    /// Validates `s` against `[A-Za-z_][A-Za-z0-9_]*`.
    pub fn new(s: &str) -> Result<Name, ModelError> {
        if is_valid_name(s) {
            Ok(Name(Arc::from(s)))
        } else {
            Err(ModelError::BadName(s.to_string()))
        }
    }

    /// A reasoner-generated name, prefixed with [`RESERVED_PREFIX`].
    pub(crate) fn reserved(suffix: &str) -> Name {
        Name(Arc::from(format!("{RESERVED_PREFIX}{suffix}")))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with(RESERVED_PREFIX)
    }
}

pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// ALC concept expression.
///
/// `And`/`Or` are n-ary and keep their arguments in authored order;
/// structural equality is order-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Concept {
    Atomic(Name),
    Top,
    Bottom,
    Not(Box<Concept>),
    And(Vec<Concept>),
    Or(Vec<Concept>),
    Some(Name, Box<Concept>),
    All(Name, Box<Concept>),
}

impl Concept {
    pub fn atomic(name: &str) -> Concept {
        Concept::Atomic(Name::new(name).expect("valid concept name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Concept {
        Concept::Not(Box::new(c))
    }

    /// Panics if fewer than two arguments are given.
    pub fn and(args: Vec<Concept>) -> Concept {
        assert!(args.len() >= 2, "And needs at least two arguments");
        Concept::And(args)
    }

    /// Panics if fewer than two arguments are given.
    pub fn or(args: Vec<Concept>) -> Concept {
        assert!(args.len() >= 2, "Or needs at least two arguments");
        Concept::Or(args)
    }

    pub fn some(role: &str, filler: Concept) -> Concept {
        Concept::Some(Name::new(role).expect("valid role name"), Box::new(filler))
    }

    pub fn all(role: &str, filler: Concept) -> Concept {
        Concept::All(Name::new(role).expect("valid role name"), Box::new(filler))
    }

    /// Negation normal form: `Not` only occurs directly above `Atomic`.
    pub fn nnf(&self) -> Concept {
        match self {
            Concept::Atomic(_) | Concept::Top | Concept::Bottom => self.clone(),
            Concept::Not(inner) => inner.negated_nnf(),
            Concept::And(xs) => Concept::And(xs.iter().map(Concept::nnf).collect()),
            Concept::Or(xs) => Concept::Or(xs.iter().map(Concept::nnf).collect()),
            Concept::Some(r, c) => Concept::Some(r.clone(), Box::new(c.nnf())),
            Concept::All(r, c) => Concept::All(r.clone(), Box::new(c.nnf())),
        }
    }

    /// `nnf(Not(self))`.
    pub fn complement(&self) -> Concept {
        self.negated_nnf()
    }

    fn negated_nnf(&self) -> Concept {
        match self {
            Concept::Atomic(_) => Concept::Not(Box::new(self.clone())),
            Concept::Top => Concept::Bottom,
            Concept::Bottom => Concept::Top,
            Concept::Not(inner) => inner.nnf(),
            Concept::And(xs) => Concept::Or(xs.iter().map(Concept::negated_nnf).collect()),
            Concept::Or(xs) => Concept::And(xs.iter().map(Concept::negated_nnf).collect()),
            Concept::Some(r, c) => Concept::All(r.clone(), Box::new(c.negated_nnf())),
            Concept::All(r, c) => Concept::Some(r.clone(), Box::new(c.negated_nnf())),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Concept::Atomic(_) | Concept::Top | Concept::Bottom => true,
            Concept::Not(inner) => matches!(**inner, Concept::Atomic(_)),
            Concept::And(xs) | Concept::Or(xs) => xs.iter().all(Concept::is_nnf),
            Concept::Some(_, c) | Concept::All(_, c) => c.is_nnf(),
        }
    }

    /// Nesting depth; atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Concept::Atomic(_) | Concept::Top | Concept::Bottom => 0,
            Concept::Not(c) | Concept::Some(_, c) | Concept::All(_, c) => 1 + c.depth(),
            Concept::And(xs) | Concept::Or(xs) => {
                1 + xs.iter().map(Concept::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn mentions_concept(&self, name: &Name) -> bool {
        match self {
            Concept::Atomic(n) => n == name,
            Concept::Top | Concept::Bottom => false,
            Concept::Not(c) | Concept::Some(_, c) | Concept::All(_, c) => c.mentions_concept(name),
            Concept::And(xs) | Concept::Or(xs) => xs.iter().any(|c| c.mentions_concept(name)),
        }
    }

    pub fn has_existential(&self) -> bool {
        match self {
            Concept::Atomic(_) | Concept::Top | Concept::Bottom => false,
            Concept::Some(_, _) => true,
            Concept::Not(c) | Concept::All(_, c) => c.has_existential(),
            Concept::And(xs) | Concept::Or(xs) => xs.iter().any(Concept::has_existential),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, kw: &str, xs: &[Concept]) -> fmt::Result {
            write!(f, "{kw}(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        }
        match self {
            Concept::Atomic(n) => write!(f, "{n}"),
            Concept::Top => write!(f, "Thing"),
            Concept::Bottom => write!(f, "Nothing"),
            Concept::Not(c) => write!(f, "Not({c})"),
            Concept::And(xs) => list(f, "And", xs),
            Concept::Or(xs) => list(f, "Or", xs),
            Concept::Some(r, c) => write!(f, "Some({r}, {c})"),
            Concept::All(r, c) => write!(f, "All({r}, {c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// `sub ⊑ sup`
    Gci { sub: Concept, sup: Concept },
    /// `individual : concept`
    ConceptAssertion { individual: Name, concept: Concept },
    /// `(subject, object) : role`
    RoleAssertion {
        role: Name,
        subject: Name,
        object: Name,
    },
}

impl Axiom {
    pub fn gci(sub: Concept, sup: Concept) -> Axiom {
        Axiom::Gci { sub, sup }
    }

    pub fn concept_assertion(individual: &str, concept: Concept) -> Axiom {
        Axiom::ConceptAssertion {
            individual: Name::new(individual).expect("valid individual name"),
            concept,
        }
    }

    pub fn role_assertion(role: &str, subject: &str, object: &str) -> Axiom {
        Axiom::RoleAssertion {
            role: Name::new(role).expect("valid role name"),
            subject: Name::new(subject).expect("valid individual name"),
            object: Name::new(object).expect("valid individual name"),
        }
    }

    pub fn is_tbox(&self) -> bool {
        matches!(self, Axiom::Gci { .. })
    }

    pub fn is_abox(&self) -> bool {
        !self.is_tbox()
    }
}

/// Serializes in the KB file syntax.
impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Gci { sub, sup } => write!(f, "SubClassOf({sub}, {sup})"),
            Axiom::ConceptAssertion {
                individual,
                concept,
            } => write!(f, "ClassAssertion({concept}, {individual})"),
            Axiom::RoleAssertion {
                role,
                subject,
                object,
            } => write!(f, "PropertyAssertion({role}, {subject}, {object})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Source,
    /// Injected by the query transformation; always certain.
    FreshQuery,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedAxiom {
    pub id: AxiomId,
    pub axiom: Axiom,
    /// `None` for certain axioms, otherwise a value in (0, 1).
    pub probability: Option<f64>,
    pub origin: Origin,
}

impl AnnotatedAxiom {
    pub fn is_certain(&self) -> bool {
        self.probability.is_none()
    }
}

impl fmt::Display for AnnotatedAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.axiom)?;
        if let Some(p) = self.probability {
            write!(f, " [p={p}]")?;
        }
        Ok(())
    }
}

/// A DISPONTE knowledge base: certain and probabilistic axioms with stable ids.
///
/// Ids are dense for knowledge bases built with [`KnowledgeBase::add`]; sub-KBs
/// produced by [`KnowledgeBase::world_kb`] keep the parent's ids and may have gaps.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    axioms: Vec<AnnotatedAxiom>,
    index: HashMap<Axiom, AxiomId>,
    next_id: AxiomId,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.axioms == other.axioms
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an axiom with the next dense id.
    pub fn add(&mut self, axiom: Axiom, probability: Option<f64>) -> Result<AxiomId, ModelError> {
        self.push(axiom, probability, Origin::Source)
    }

    pub(crate) fn add_fresh(&mut self, axiom: Axiom) -> Result<AxiomId, ModelError> {
        self.push(axiom, None, Origin::FreshQuery)
    }

    fn push(
        &mut self,
        axiom: Axiom,
        probability: Option<f64>,
        origin: Origin,
    ) -> Result<AxiomId, ModelError> {
        if let Some(p) = probability {
            // NaN fails both comparisons and is rejected too.
            if !(p > 0.0 && p < 1.0) {
                return Err(ModelError::ProbabilityOutOfRange(p));
            }
        }
        if let Some(&existing) = self.index.get(&axiom) {
            return Err(ModelError::DuplicateAxiom { existing });
        }
        let id = self.next_id;
        self.next_id += 1;
        self.index.insert(axiom.clone(), id);
        self.axioms.push(AnnotatedAxiom {
            id,
            axiom,
            probability,
            origin,
        });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    /// Axioms in id order.
    pub fn axioms(&self) -> &[AnnotatedAxiom] {
        &self.axioms
    }

    pub fn get(&self, id: AxiomId) -> Option<&AnnotatedAxiom> {
        self.axioms
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.axioms[i])
    }

    pub fn id_of(&self, axiom: &Axiom) -> Option<AxiomId> {
        self.index.get(axiom).copied()
    }

    /// One past the largest id ever assigned.
    pub fn id_bound(&self) -> usize {
        self.next_id
    }

    pub fn ids(&self) -> AxiomSet {
        self.axioms.iter().map(|a| a.id).collect()
    }

    pub fn tbox_ids(&self) -> AxiomSet {
        self.select(|a| a.axiom.is_tbox())
    }

    pub fn abox_ids(&self) -> AxiomSet {
        self.select(|a| a.axiom.is_abox())
    }

    pub fn probabilistic_ids(&self) -> AxiomSet {
        self.select(|a| a.probability.is_some())
    }

    pub fn certain_ids(&self) -> AxiomSet {
        self.select(|a| a.probability.is_none())
    }

    pub fn fresh_ids(&self) -> AxiomSet {
        self.select(|a| a.origin == Origin::FreshQuery)
    }

    fn select(&self, pred: impl Fn(&AnnotatedAxiom) -> bool) -> AxiomSet {
        self.axioms
            .iter()
            .filter(|a| pred(a))
            .map(|a| a.id)
            .collect()
    }

    pub fn probability(&self, id: AxiomId) -> Option<f64> {
        self.get(id).and_then(|a| a.probability)
    }

    /// Whether any axiom mentions the concept name.
    pub fn mentions_concept(&self, name: &Name) -> bool {
        self.axioms.iter().any(|a| match &a.axiom {
            Axiom::Gci { sub, sup } => sub.mentions_concept(name) || sup.mentions_concept(name),
            Axiom::ConceptAssertion { concept, .. } => concept.mentions_concept(name),
            Axiom::RoleAssertion { .. } => false,
        })
    }

    pub fn mentions_individual(&self, name: &Name) -> bool {
        self.axioms.iter().any(|a| match &a.axiom {
            Axiom::ConceptAssertion { individual, .. } => individual == name,
            Axiom::RoleAssertion {
                subject, object, ..
            } => subject == name || object == name,
            Axiom::Gci { .. } => false,
        })
    }

    /// Sub-KB over the given ids, preserving ids and annotations.
    pub fn restrict(&self, ids: &AxiomSet) -> Result<KnowledgeBase, ModelError> {
        for id in ids.iter() {
            if self.get(id).is_none() {
                return Err(ModelError::UnknownAxiomId(id));
            }
        }
        let axioms: Vec<AnnotatedAxiom> = self
            .axioms
            .iter()
            .filter(|a| ids.contains(a.id))
            .cloned()
            .collect();
        let index = axioms.iter().map(|a| (a.axiom.clone(), a.id)).collect();
        Ok(KnowledgeBase {
            axioms,
            index,
            next_id: self.next_id,
        })
    }

    fn check_world(&self, w: &World) -> Result<(), ModelError> {
        let probabilistic = self.probabilistic_ids();
        match w.selection.difference(&probabilistic).iter().next() {
            Some(id) => Err(ModelError::UnknownAxiomId(id)),
            None => Ok(()),
        }
    }

    /// `P(w)`: product of `p` over selected probabilistic axioms and `1 - p`
    /// over the unselected ones.
    pub fn world_probability(&self, w: &World) -> Result<f64, ModelError> {
        self.check_world(w)?;
        Ok(self
            .axioms
            .iter()
            .filter_map(|a| a.probability.map(|p| (a.id, p)))
            .map(|(id, p)| if w.selection.contains(id) { p } else { 1.0 - p })
            .product())
    }

    /// The world's KB: all certain axioms plus the selected probabilistic ones.
    pub fn world_kb(&self, w: &World) -> Result<KnowledgeBase, ModelError> {
        self.check_world(w)?;
        self.restrict(&self.certain_ids().union(&w.selection))
    }
}

/// Assignment of the probabilistic axioms' Boolean variables: the selected
/// axioms are the ones set to 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct World {
    pub selection: AxiomSet,
}

impl World {
    pub fn new(selection: AxiomSet) -> Self {
        World { selection }
    }
}

/// Every world of `kb`, as subsets of its probabilistic ids, in binary counting order.
pub fn all_worlds(kb: &KnowledgeBase) -> impl Iterator<Item = World> {
    let ids = kb.probabilistic_ids().to_vec();
    let m = ids.len();
    assert!(m < 64, "too many probabilistic axioms to enumerate worlds");
    (0..1u64 << m).map(move |mask| {
        World::new(
            ids.iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &id)| id)
                .collect(),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(n: &str) -> Concept {
        Concept::atomic(n)
    }

    fn flying_penguins_1() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.add(Axiom::gci(a("Penguin"), a("Bird")), Some(0.9))
            .unwrap();
        kb.add(Axiom::gci(a("Penguin"), Concept::not(a("Fly"))), Some(0.9))
            .unwrap();
        kb.add(Axiom::concept_assertion("pingu", a("Penguin")), Some(0.6))
            .unwrap();
        kb
    }

    #[test]
    fn nnf_examples() {
        assert_eq!(a("A").nnf(), a("A"));
        assert_eq!(
            Concept::not(Concept::and(vec![a("A"), a("B")])).nnf(),
            Concept::or(vec![Concept::not(a("A")), Concept::not(a("B"))])
        );
        assert_eq!(
            Concept::not(Concept::some("R", a("C"))).nnf(),
            Concept::all("R", Concept::not(a("C")))
        );
    }

    #[test]
    fn complement_examples() {
        assert_eq!(Concept::Top.complement(), Concept::Bottom);
        assert_eq!(a("Fly").complement(), Concept::not(a("Fly")));
        assert_eq!(Concept::not(a("Fly")).complement(), a("Fly"));
    }

    #[test]
    fn add_assigns_dense_ids() {
        let mut kb = KnowledgeBase::new();
        let id = kb
            .add(Axiom::gci(a("Penguin"), a("Bird")), Some(0.9))
            .unwrap();
        assert_eq!(id, 0);
        let again = kb.add(Axiom::gci(a("Penguin"), a("Bird")), Some(0.5));
        assert_eq!(again, Err(ModelError::DuplicateAxiom { existing: 0 }));
        let err = kb
            .add(Axiom::concept_assertion("pingu", a("Penguin")), Some(1.5))
            .unwrap_err();
        assert_eq!(err, ModelError::ProbabilityOutOfRange(1.5));
        let id = kb
            .add(Axiom::concept_assertion("pingu", a("Penguin")), None)
            .unwrap();
        assert_eq!(id, 1);
        assert_eq!(kb.probabilistic_ids().to_vec(), vec![0]);
        assert_eq!(kb.tbox_ids().to_vec(), vec![0]);
        assert_eq!(kb.abox_ids().to_vec(), vec![1]);
    }

    #[test]
    fn duplicate_error_cites_combination_rule() {
        let msg = ModelError::DuplicateAxiom { existing: 3 }.to_string();
        assert!(msg.contains("1-(1-p1)(1-p2)"));
    }

    #[test]
    fn boundary_probabilities_rejected() {
        let mut kb = KnowledgeBase::new();
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                kb.add(Axiom::gci(a("A"), a("B")), Some(p)),
                Err(ModelError::ProbabilityOutOfRange(_))
            ));
        }
    }

    #[test]
    fn world_probability_examples() {
        let kb = flying_penguins_1();
        let w = World::new([0, 2].into_iter().collect());
        assert!((kb.world_probability(&w).unwrap() - 0.054).abs() < 1e-12);
        let all = World::new([0, 1, 2].into_iter().collect());
        assert!((kb.world_probability(&all).unwrap() - 0.486).abs() < 1e-12);

        let mut certain = KnowledgeBase::new();
        certain.add(Axiom::gci(a("A"), a("B")), None).unwrap();
        assert_eq!(certain.world_probability(&World::default()).unwrap(), 1.0);
        assert_eq!(
            certain.world_probability(&World::new(AxiomSet::singleton(0))),
            Err(ModelError::UnknownAxiomId(0))
        );
    }

    #[test]
    fn world_kb_examples() {
        let kb = flying_penguins_1();
        assert!(kb.world_kb(&World::default()).unwrap().is_empty());
        assert_eq!(
            kb.world_kb(&World::new(kb.probabilistic_ids())).unwrap(),
            kb
        );

        // Flying Penguins 3: (1) and (3) probabilistic, (2) and (4) certain.
        let mut kb3 = KnowledgeBase::new();
        kb3.add(Axiom::gci(a("Bird"), a("Fly")), Some(0.9)).unwrap();
        kb3.add(Axiom::gci(a("Penguin"), a("Bird")), None).unwrap();
        kb3.add(Axiom::gci(a("Penguin"), Concept::not(a("Fly"))), Some(0.9))
            .unwrap();
        kb3.add(Axiom::concept_assertion("pingu", a("Penguin")), None)
            .unwrap();
        let w3 = kb3.world_kb(&World::new(AxiomSet::singleton(2))).unwrap();
        assert_eq!(w3.ids().to_vec(), vec![1, 2, 3]);
        for ax in w3.axioms() {
            assert_eq!(Some(ax), kb3.get(ax.id));
        }
    }

    pub(crate) fn arb_concept() -> impl Strategy<Value = Concept> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["A", "B", "C"]).prop_map(Concept::atomic),
            Just(Concept::Top),
            Just(Concept::Bottom),
        ];
        leaf.prop_recursive(5, 48, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Concept::not),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Concept::And),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Concept::Or),
                (prop::sample::select(vec!["r", "s"]), inner.clone())
                    .prop_map(|(r, c)| Concept::some(r, c)),
                (prop::sample::select(vec!["r", "s"]), inner).prop_map(|(r, c)| Concept::all(r, c)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn nnf_is_idempotent(c in arb_concept()) {
            let n = c.nnf();
            prop_assert!(n.is_nnf());
            prop_assert_eq!(n.nnf(), n);
        }

        #[test]
        fn double_complement_is_nnf(c in arb_concept()) {
            prop_assert_eq!(c.complement().complement(), c.nnf());
        }

        #[test]
        fn world_probabilities_sum_to_one(ps in prop::collection::vec(0.01f64..0.99, 0..=16)) {
            let mut kb = KnowledgeBase::new();
            for (i, p) in ps.iter().enumerate() {
                let name = format!("A{i}");
                kb.add(Axiom::concept_assertion("x", Concept::atomic(&name)), Some(*p)).unwrap();
            }
            kb.add(Axiom::gci(a("A"), a("B")), None).unwrap();
            let total: f64 = all_worlds(&kb).map(|w| kb.world_probability(&w).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
