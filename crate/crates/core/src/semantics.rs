//! DISPONTE probabilities and inconsistency-tolerant repair semantics.
//!
//! Both are computed from a [`JustificationBundle`]: the query and
//! inconsistency justifications become BDDs `BDDQ` and `BDDI`, with
//! `BDDC = ¬BDDI` describing the consistent worlds.

use serde::Serialize;
use thiserror::Error;

use crate::axiom_set::{minimize, AxiomSet};
use crate::bdd::{BddError, BddManager, BddRef, VarMap, WeightMap};
use crate::justify::{transform_query, JustificationBundle};
use crate::model::{all_worlds, AxiomId, KnowledgeBase};
use crate::parser::Query;
use crate::tableau::{Reasoner, TableauError};

/// Largest number of probabilistic axioms for world enumeration.
pub const ORACLE_MAX_WORLD_AXIOMS: usize = 20;
/// Largest number of removable axioms for repair enumeration.
pub const ORACLE_MAX_REMOVABLE: usize = 16;
/// Cause/conflict pairs up to which AR allocates one variable per pair.
pub const MAX_CONTRADICTION_VARS: usize = 4096;
/// Allowed gap between `P(Cons)` and `1 - P(Incons)`.
pub const CONS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Bdd(#[from] BddError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("{count} {what} axioms exceed the oracle limit of {max}")]
    TooLarge {
        what: &'static str,
        count: usize,
        max: usize,
    },
    #[error("the non-removable axioms are inconsistent, so there is no repair")]
    NoRepair,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbReport {
    pub p_incons: f64,
    pub p_cons: f64,
    pub p_q_and_cons: f64,
    /// `P(Q, Cons) / P(Cons)`; `None` when the KB is certainly inconsistent.
    pub p_c: Option<f64>,
    /// The justification cap was hit: `p_incons` and `p_q_and_cons` are lower bounds.
    pub partial: bool,
}

/// Which axioms a repair may drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Removability {
    /// The probabilistic axioms.
    #[default]
    Probabilistic,
    /// The ABox assertions, as in classical ABox repairs.
    Abox,
}

impl Removability {
    pub fn removable_ids(self, kb: &KnowledgeBase) -> AxiomSet {
        match self {
            Removability::Probabilistic => kb.probabilistic_ids(),
            Removability::Abox => kb.abox_ids(),
        }
    }
}

/// How the "every cause is contradicted" condition of AR is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArEncoding {
    /// One variable `X_{C,B}` per cause `C` and conflict `B` meeting it, with
    /// `X_{C,B}` forcing the axioms of `B ∖ C`.
    ContradictionVars,
    /// The same formula with the `X_{C,B}` existentially quantified away:
    /// `⋀_C ⋁_B ⋀ (B ∖ C)`. Equisatisfiable and free of extra variables.
    Quantified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NotEntailed,
    #[serde(rename = "brave")]
    BraveOnly,
    Ar,
    Iar,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotEntailed => "not_entailed",
            Verdict::BraveOnly => "brave",
            Verdict::Ar => "ar",
            Verdict::Iar => "iar",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn prob_report(
    kb: &KnowledgeBase,
    bundle: &JustificationBundle,
) -> Result<ProbReport, SemanticsError> {
    let vars = VarMap::for_kb(kb, &kb.probabilistic_ids());
    let weights = WeightMap::for_kb(kb);
    let mut m = BddManager::new(kb.id_bound());
    let bddq = m.from_justifications(&bundle.query_justs, &vars)?;
    let bddi = m.from_justifications(&bundle.incons_justs, &vars)?;
    let bddc = m.not(bddi)?;
    let q_and_c = m.and(bddq, bddc)?;
    let p_incons = m.probability(bddi, &weights)?;
    let p_cons = m.probability(bddc, &weights)?;
    let p_q_and_cons = m.probability(q_and_c, &weights)?;
    if (p_cons - (1.0 - p_incons)).abs() > CONS_TOLERANCE {
        return Err(SemanticsError::Invariant(format!(
            "P(Cons) = {p_cons} but 1 - P(Incons) = {}",
            1.0 - p_incons
        )));
    }
    let p_c = if m.is_zero(bddc) {
        None
    } else {
        Some(p_q_and_cons / p_cons)
    };
    Ok(ProbReport {
        p_incons,
        p_cons,
        p_q_and_cons,
        p_c,
        partial: bundle.partial,
    })
}

/// Repair-semantics view of a bundle: causes and conflicts are the removable
/// parts of the query and inconsistency justifications.
pub struct RepairAnalysis {
    removable: AxiomSet,
    causes: Vec<AxiomSet>,
    conflicts: Vec<AxiomSet>,
    no_repair: bool,
    manager: BddManager,
    bddq: BddRef,
    bddc: BddRef,
}

impl RepairAnalysis {
    pub fn new(
        kb: &KnowledgeBase,
        bundle: &JustificationBundle,
        removability: Removability,
    ) -> Result<Self, SemanticsError> {
        let removable = removability.removable_ids(kb);
        let project = |js: &[AxiomSet]| {
            js.iter()
                .map(|j| j.intersection(&removable))
                .collect::<Vec<_>>()
        };
        let conflicts = minimize(project(&bundle.incons_justs));
        let causes = minimize(project(&bundle.query_justs));
        let no_repair = conflicts.first().is_some_and(|c| c.is_empty());
        let vars = VarMap::for_kb(kb, &removable);
        let mut manager = BddManager::new(kb.id_bound());
        let bddq = manager.from_justifications(&causes, &vars)?;
        let bddi = manager.from_justifications(&conflicts, &vars)?;
        let bddc = manager.not(bddi)?;
        Ok(RepairAnalysis {
            removable,
            causes,
            conflicts,
            no_repair,
            manager,
            bddq,
            bddc,
        })
    }

    pub fn removable(&self) -> &AxiomSet {
        &self.removable
    }

    /// Minimal removable projections of the query justifications.
    pub fn causes(&self) -> &[AxiomSet] {
        &self.causes
    }

    /// Minimal removable projections of the inconsistency justifications.
    pub fn conflicts(&self) -> &[AxiomSet] {
        &self.conflicts
    }

    /// The non-removable axioms alone are inconsistent.
    pub fn no_repair(&self) -> bool {
        self.no_repair
    }

    /// Removable axioms occurring in some conflict.
    pub fn tainted(&self) -> AxiomSet {
        let mut t = AxiomSet::new();
        for c in &self.conflicts {
            t.union_with(c);
        }
        t
    }

    /// Q holds in at least one repair.
    pub fn brave(&mut self) -> Result<bool, SemanticsError> {
        let f = self.manager.and(self.bddq, self.bddc)?;
        Ok(!self.manager.is_zero(f))
    }

    /// Q holds in the intersection of all repairs.
    pub fn iar(&self) -> bool {
        if self.no_repair {
            return false;
        }
        let tainted = self.tainted();
        self.causes.iter().any(|c| c.is_disjoint(&tainted))
    }

    /// Q holds in every repair. Only meaningful when [`Self::brave`] holds.
    ///
    /// Uses [`ArEncoding::ContradictionVars`] up to [`MAX_CONTRADICTION_VARS`]
    /// cause/conflict pairs and [`ArEncoding::Quantified`] beyond that.
    pub fn ar(&mut self) -> Result<bool, SemanticsError> {
        let pairs: usize = self
            .causes
            .iter()
            .map(|c| self.conflicts.iter().filter(|b| !b.is_disjoint(c)).count())
            .sum();
        let encoding = if pairs <= MAX_CONTRADICTION_VARS {
            ArEncoding::ContradictionVars
        } else {
            ArEncoding::Quantified
        };
        self.ar_with(encoding)
    }

    pub fn ar_with(&mut self, encoding: ArEncoding) -> Result<bool, SemanticsError> {
        if self.no_repair || self.causes.is_empty() {
            return Ok(false);
        }
        let conflicting: Vec<Vec<&AxiomSet>> = self
            .causes
            .iter()
            .map(|c| {
                self.conflicts
                    .iter()
                    .filter(|b| !b.is_disjoint(c))
                    .collect()
            })
            .collect();
        // A cause that nothing contradicts survives in every repair.
        if self
            .causes
            .iter()
            .zip(&conflicting)
            .any(|(c, bs)| c.is_empty() || bs.is_empty())
        {
            return Ok(true);
        }
        let m = &mut self.manager;
        let mut f = self.bddc;
        for (c, bs) in self.causes.iter().zip(&conflicting) {
            let mut contradicted = BddRef::ZERO;
            for b in bs {
                let mut rest = BddRef::ONE;
                for beta in b.difference(c).iter().collect::<Vec<_>>().into_iter().rev() {
                    let xb = m.var(beta)?;
                    rest = m.and(rest, xb)?;
                }
                let term = match encoding {
                    // X_{C,B} ∧ (¬X_{C,B} ∨ ⋀ (B ∖ C))
                    ArEncoding::ContradictionVars => {
                        let x = m.add_var();
                        let xv = m.var(x)?;
                        let nx = m.not(xv)?;
                        let implied = m.or(nx, rest)?;
                        f = m.and(f, implied)?;
                        xv
                    }
                    ArEncoding::Quantified => rest,
                };
                contradicted = m.or(contradicted, term)?;
            }
            f = m.and(f, contradicted)?;
            if m.is_zero(f) {
                break;
            }
        }
        Ok(m.is_zero(f))
    }

    /// Brave first, then IAR, then AR.
    pub fn verdict(&mut self) -> Result<Verdict, SemanticsError> {
        if !self.brave()? {
            return Ok(Verdict::NotEntailed);
        }
        if self.iar() {
            return Ok(Verdict::Iar);
        }
        if self.ar()? {
            return Ok(Verdict::Ar);
        }
        Ok(Verdict::BraveOnly)
    }
}

pub fn brave_check(
    kb: &KnowledgeBase,
    bundle: &JustificationBundle,
    removability: Removability,
) -> Result<bool, SemanticsError> {
    RepairAnalysis::new(kb, bundle, removability)?.brave()
}

pub fn iar_check(
    kb: &KnowledgeBase,
    bundle: &JustificationBundle,
    removability: Removability,
) -> Result<bool, SemanticsError> {
    Ok(RepairAnalysis::new(kb, bundle, removability)?.iar())
}

pub fn ar_check(
    kb: &KnowledgeBase,
    bundle: &JustificationBundle,
    removability: Removability,
) -> Result<bool, SemanticsError> {
    RepairAnalysis::new(kb, bundle, removability)?.ar()
}

pub fn verdict(
    kb: &KnowledgeBase,
    bundle: &JustificationBundle,
    removability: Removability,
) -> Result<Verdict, SemanticsError> {
    RepairAnalysis::new(kb, bundle, removability)?.verdict()
}

/// Entailment of `q` by subsets of `kb`, through the fresh-concept transform.
struct EntailmentOracle {
    reasoner: Reasoner,
    fresh: AxiomSet,
    query_is_consistency: bool,
}

impl EntailmentOracle {
    fn new(kb: &KnowledgeBase, q: &Query) -> Self {
        let t = transform_query(kb, q);
        EntailmentOracle {
            reasoner: Reasoner::new(&t.kb),
            fresh: t.fresh_ids,
            query_is_consistency: matches!(q, Query::IsConsistent),
        }
    }

    fn consistent(&self, s: &AxiomSet) -> Result<bool, TableauError> {
        self.reasoner.is_consistent_subset(s)
    }

    /// Consistency is not itself an entailed axiom, so it is never counted as one.
    fn entails(&self, s: &AxiomSet) -> Result<bool, TableauError> {
        if self.query_is_consistency {
            return Ok(false);
        }
        Ok(!self.reasoner.is_consistent_subset(&s.union(&self.fresh))?)
    }
}

/// Probabilities by summing over every world.
pub fn oracle_world_probs(kb: &KnowledgeBase, q: &Query) -> Result<ProbReport, SemanticsError> {
    let count = kb.probabilistic_ids().len();
    if count > ORACLE_MAX_WORLD_AXIOMS {
        return Err(SemanticsError::TooLarge {
            what: "probabilistic",
            count,
            max: ORACLE_MAX_WORLD_AXIOMS,
        });
    }
    let oracle = EntailmentOracle::new(kb, q);
    let certain = kb.certain_ids();
    let (mut p_incons, mut p_cons, mut p_q_and_cons) = (0.0, 0.0, 0.0);
    for w in all_worlds(kb) {
        let p = kb.world_probability(&w).expect("world drawn from kb");
        let axioms = certain.union(&w.selection);
        if oracle.consistent(&axioms)? {
            p_cons += p;
            if oracle.entails(&axioms)? {
                p_q_and_cons += p;
            }
        } else {
            p_incons += p;
        }
    }
    let p_c = (p_cons > 0.0).then(|| p_q_and_cons / p_cons);
    Ok(ProbReport {
        p_incons,
        p_cons,
        p_q_and_cons,
        p_c,
        partial: false,
    })
}

/// Maximal subsets `R` of the removable axioms with `fixed ∪ R` consistent.
pub fn oracle_repairs(
    kb: &KnowledgeBase,
    removability: Removability,
) -> Result<Vec<AxiomSet>, SemanticsError> {
    let oracle = EntailmentOracle::new(kb, &Query::IsConsistent);
    repairs_with(kb, removability, &oracle)
}

fn repairs_with(
    kb: &KnowledgeBase,
    removability: Removability,
    oracle: &EntailmentOracle,
) -> Result<Vec<AxiomSet>, SemanticsError> {
    let removable: Vec<AxiomId> = removability.removable_ids(kb).to_vec();
    let r = removable.len();
    if r > ORACLE_MAX_REMOVABLE {
        return Err(SemanticsError::TooLarge {
            what: "removable",
            count: r,
            max: ORACLE_MAX_REMOVABLE,
        });
    }
    let fixed = kb.ids().difference(&removable.iter().copied().collect());
    let subset = |mask: usize| -> AxiomSet {
        (0..r)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| removable[b])
            .collect()
    };
    let n = 1usize << r;
    let mut consistent = vec![false; n];
    for mask in 0..n {
        let smaller_bad = (0..r).any(|b| mask & (1 << b) != 0 && !consistent[mask & !(1 << b)]);
        consistent[mask] = !smaller_bad && oracle.consistent(&fixed.union(&subset(mask)))?;
    }
    let mut repairs: Vec<AxiomSet> = (0..n)
        .filter(|&mask| {
            consistent[mask] && (0..r).all(|b| mask & (1 << b) != 0 || !consistent[mask | (1 << b)])
        })
        .map(subset)
        .collect();
    repairs.sort();
    Ok(repairs)
}

/// Brave, AR and IAR evaluated literally over the enumerated repairs.
pub fn oracle_verdict(
    kb: &KnowledgeBase,
    q: &Query,
    removability: Removability,
) -> Result<Verdict, SemanticsError> {
    let oracle = EntailmentOracle::new(kb, q);
    let repairs = repairs_with(kb, removability, &oracle)?;
    if repairs.is_empty() {
        return Err(SemanticsError::NoRepair);
    }
    let fixed = kb.ids().difference(&removability.removable_ids(kb));
    let mut in_all = true;
    let mut in_some = false;
    for r in &repairs {
        if oracle.entails(&fixed.union(r))? {
            in_some = true;
        } else {
            in_all = false;
        }
    }
    if !in_some {
        return Ok(Verdict::NotEntailed);
    }
    let mut core = repairs[0].clone();
    for r in &repairs[1..] {
        core = core.intersection(r);
    }
    if oracle.entails(&fixed.union(&core))? {
        Ok(Verdict::Iar)
    } else if in_all {
        Ok(Verdict::Ar)
    } else {
        Ok(Verdict::BraveOnly)
    }
}
