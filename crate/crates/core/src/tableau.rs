//! ALC tableau with justification tracing.
//!
//! Every label and edge carries a tracing set τ (alternative axiom sets that
//! produced it) and the set of branch points it depends on. A clash joins the
//! τ values of its two labels; when every branch of a disjunction closes, the
//! branch clashes are joined into one candidate. Clashes that do not depend on
//! a branch point skip its remaining alternatives.
//!
//! Rules fire in the order ⊓ > ∀ > GCI > ⊔ > ∃. Among disjunctions, ones
//! with at most one open disjunct are resolved before any real branching.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::axiom_set::{minimize, AxiomSet};
use crate::model::{Axiom, AxiomId, Concept, KnowledgeBase, Name};

/// Rule applications allowed per consistency check unless overridden.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Alternatives kept per tracing set.
const MAX_TAU: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("tableau exceeded its budget of {limit} rule applications")]
    ResourceLimit { limit: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableauConfig {
    pub max_steps: u64,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig {
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

pub fn is_consistent(kb: &KnowledgeBase) -> Result<bool, TableauError> {
    Reasoner::new(kb).is_consistent_subset(&kb.ids())
}

/// One subset-minimal inconsistent set of axiom ids, or `None` if `kb` is consistent.
pub fn find_one_incons_justification(kb: &KnowledgeBase) -> Result<Option<AxiomSet>, TableauError> {
    Reasoner::new(kb).find_justification(&kb.ids())
}

type CId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CNode {
    Top,
    Bottom,
    Atom(u32),
    NegAtom(u32),
    And(Vec<CId>),
    Or(Vec<CId>),
    Some(u32, CId),
    All(u32, CId),
}

/// Hash-consed NNF concepts.
#[derive(Debug, Default)]
struct ConceptTable {
    nodes: Vec<CNode>,
    index: HashMap<CNode, CId>,
    atoms: HashMap<Name, u32>,
    roles: HashMap<Name, u32>,
}

impl ConceptTable {
    fn intern_node(&mut self, node: CNode) -> CId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len() as CId;
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    fn atom(&mut self, name: &Name) -> u32 {
        let next = self.atoms.len() as u32;
        *self.atoms.entry(name.clone()).or_insert(next)
    }

    fn role(&mut self, name: &Name) -> u32 {
        let next = self.roles.len() as u32;
        *self.roles.entry(name.clone()).or_insert(next)
    }

    /// Interns a concept already in NNF.
    fn intern(&mut self, c: &Concept) -> CId {
        let node = match c {
            Concept::Top => CNode::Top,
            Concept::Bottom => CNode::Bottom,
            Concept::Atomic(n) => CNode::Atom(self.atom(n)),
            Concept::Not(inner) => match &**inner {
                Concept::Atomic(n) => CNode::NegAtom(self.atom(n)),
                other => return self.intern(&other.complement()),
            },
            Concept::And(xs) => CNode::And(xs.iter().map(|x| self.intern(x)).collect()),
            Concept::Or(xs) => CNode::Or(xs.iter().map(|x| self.intern(x)).collect()),
            Concept::Some(r, f) => {
                let r = self.role(r);
                CNode::Some(r, self.intern(f))
            }
            Concept::All(r, f) => {
                let r = self.role(r);
                CNode::All(r, self.intern(f))
            }
        };
        self.intern_node(node)
    }

    fn get(&self, id: CId) -> &CNode {
        &self.nodes[id as usize]
    }

    fn lookup(&self, node: &CNode) -> Option<CId> {
        self.index.get(node).copied()
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    /// Internalized GCI: the concept `¬C ⊔ D` added to every node.
    Gci(CId),
    Assert(u32, CId),
    Role(u32, u32, u32),
}

/// Tableau reasoner over a fixed KB, answering questions about subsets of its axioms.
pub struct Reasoner {
    table: ConceptTable,
    compiled: Vec<Option<Compiled>>,
    individuals: usize,
    config: TableauConfig,
}

impl Reasoner {
    pub fn new(kb: &KnowledgeBase) -> Self {
        Self::with_config(kb, TableauConfig::default())
    }

    pub fn with_config(kb: &KnowledgeBase, config: TableauConfig) -> Self {
        let mut table = ConceptTable::default();
        let mut inds: HashMap<Name, u32> = HashMap::new();
        let mut ind = |n: &Name| {
            let next = inds.len() as u32;
            *inds.entry(n.clone()).or_insert(next)
        };
        let mut compiled = vec![None; kb.id_bound()];
        for ax in kb.axioms() {
            let c = match &ax.axiom {
                Axiom::Gci { sub, sup } => {
                    let neg = table.intern(&sub.complement());
                    let pos = table.intern(&sup.nnf());
                    Compiled::Gci(table.intern_node(CNode::Or(vec![neg, pos])))
                }
                Axiom::ConceptAssertion {
                    individual,
                    concept,
                } => {
                    let i = ind(individual);
                    Compiled::Assert(i, table.intern(&concept.nnf()))
                }
                Axiom::RoleAssertion {
                    role,
                    subject,
                    object,
                } => {
                    let r = table.role(role);
                    Compiled::Role(r, ind(subject), ind(object))
                }
            };
            compiled[ax.id] = Some(c);
        }
        Reasoner {
            table,
            individuals: inds.len(),
            compiled,
            config,
        }
    }

    pub fn is_consistent_subset(&self, subset: &AxiomSet) -> Result<bool, TableauError> {
        Ok(self.run(subset)?.is_none())
    }

    /// A subset-minimal inconsistent subset of `subset`, or `None` when it is consistent.
    pub fn find_justification(&self, subset: &AxiomSet) -> Result<Option<AxiomSet>, TableauError> {
        let Some(clash) = self.run(subset)? else {
            return Ok(None);
        };
        let mut candidate = clash.intersection(subset);
        if self.is_consistent_subset(&candidate)? {
            // The trace missed a dependency; fall back to shrinking everything.
            candidate = subset.clone();
        }
        for id in candidate.to_vec() {
            candidate.remove(id);
            if self.is_consistent_subset(&candidate)? {
                candidate.insert(id);
            }
        }
        Ok(Some(candidate))
    }

    /// Runs the tableau on `subset`; returns the traced clash set if every branch closes.
    fn run(&self, subset: &AxiomSet) -> Result<Option<AxiomSet>, TableauError> {
        let mut run = Run {
            r: self,
            steps: 0,
            next_branch: 0,
        };
        let mut state = State::default();
        let mut gcis = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; self.individuals];
        let mut seeds: Vec<(usize, CId, AxiomId)> = Vec::new();
        let mut role_seeds: Vec<(u32, usize, usize, AxiomId)> = Vec::new();
        for id in subset.iter() {
            let Some(Some(c)) = self.compiled.get(id) else {
                continue;
            };
            let mut root = |state: &mut State, i: u32| {
                *root_of[i as usize].get_or_insert_with(|| state.new_node(None))
            };
            match *c {
                Compiled::Gci(cid) => gcis.push((cid, id)),
                Compiled::Assert(i, cid) => {
                    let n = root(&mut state, i);
                    seeds.push((n, cid, id));
                }
                Compiled::Role(r, s, o) => {
                    let s = root(&mut state, s);
                    let o = root(&mut state, o);
                    role_seeds.push((r, s, o, id));
                }
            }
        }
        if state.nodes.is_empty() {
            if gcis.is_empty() {
                return Ok(None);
            }
            // Models have a nonempty domain.
            state.new_node(None);
        }
        state.gcis = gcis;
        for n in 0..state.nodes.len() {
            state.gci_q.push_back(n);
        }
        for (r, s, o, id) in role_seeds {
            state.add_edge(s, o, r, vec![AxiomSet::singleton(id)], AxiomSet::new());
        }
        for (n, cid, id) in seeds {
            if let Some(clash) = run.add_label(
                &mut state,
                n,
                cid,
                vec![AxiomSet::singleton(id)],
                AxiomSet::new(),
            ) {
                return Ok(Some(clash.tau));
            }
        }
        match run.expand(state)? {
            Outcome::Open => Ok(None),
            Outcome::Clash(c) => Ok(Some(c.tau)),
        }
    }
}

#[derive(Debug, Clone)]
struct Label {
    concept: CId,
    tau: Vec<AxiomSet>,
    deps: AxiomSet,
}

#[derive(Debug, Clone, Default)]
struct TNode {
    parent: Option<usize>,
    labels: Vec<Label>,
    index: HashMap<CId, usize>,
    ors: Vec<usize>,
    somes: Vec<usize>,
    alls: Vec<usize>,
    out_edges: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    role: u32,
    tau: Vec<AxiomSet>,
    deps: AxiomSet,
}

#[derive(Debug, Clone, Copy)]
enum ForallJob {
    Label(usize, usize),
    Edge(usize, usize),
}

#[derive(Debug, Clone, Default)]
struct State {
    nodes: Vec<TNode>,
    edges: Vec<(usize, Edge)>,
    gcis: Vec<(CId, AxiomId)>,
    and_q: VecDeque<(usize, usize)>,
    all_q: VecDeque<ForallJob>,
    gci_q: VecDeque<usize>,
    pending_clash: Option<Clash>,
}

impl State {
    fn new_node(&mut self, parent: Option<usize>) -> usize {
        self.nodes.push(TNode {
            parent,
            ..TNode::default()
        });
        self.nodes.len() - 1
    }

    fn add_edge(&mut self, from: usize, to: usize, role: u32, tau: Vec<AxiomSet>, deps: AxiomSet) {
        let e = self.edges.len();
        self.edges.push((
            from,
            Edge {
                to,
                role,
                tau,
                deps,
            },
        ));
        self.nodes[from].out_edges.push(e);
        self.all_q.push_back(ForallJob::Edge(from, e));
    }

    /// Subset blocking: some ancestor's concept set contains this node's.
    fn is_blocked(&self, n: usize) -> bool {
        let node = &self.nodes[n];
        let mut cur = node.parent;
        while let Some(a) = cur {
            let anc = &self.nodes[a];
            if node
                .labels
                .iter()
                .all(|l| anc.index.contains_key(&l.concept))
            {
                return true;
            }
            cur = anc.parent;
        }
        false
    }
}

#[derive(Debug, Clone)]
struct Clash {
    tau: AxiomSet,
    deps: AxiomSet,
}

enum Outcome {
    Open,
    Clash(Clash),
}

struct Run<'a> {
    r: &'a Reasoner,
    steps: u64,
    next_branch: usize,
}

/// Pairwise unions of two tracing sets, minimality-filtered.
fn join(a: &[AxiomSet], b: &[AxiomSet]) -> Vec<AxiomSet> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.union(y));
        }
    }
    let mut out = minimize(out);
    out.truncate(MAX_TAU);
    out
}

/// Smallest member (by cardinality, then ids).
fn best(tau: &[AxiomSet]) -> AxiomSet {
    tau.iter().min().cloned().unwrap_or_default()
}

enum Disjunction {
    /// Every disjunct clashes immediately.
    Closed(Clash),
    /// Exactly one disjunct can hold.
    Unit {
        node: usize,
        concept: CId,
        tau: Vec<AxiomSet>,
        deps: AxiomSet,
    },
    Branch {
        node: usize,
        open: Vec<CId>,
        closed: Vec<Clash>,
        tau: Vec<AxiomSet>,
        deps: AxiomSet,
    },
}

impl Run<'_> {
    fn tick(&mut self) -> Result<(), TableauError> {
        self.steps += 1;
        if self.steps > self.r.config.max_steps {
            Err(TableauError::ResourceLimit {
                limit: self.r.config.max_steps,
            })
        } else {
            Ok(())
        }
    }

    fn add_label(
        &mut self,
        state: &mut State,
        n: usize,
        concept: CId,
        tau: Vec<AxiomSet>,
        deps: AxiomSet,
    ) -> Option<Clash> {
        let node = &mut state.nodes[n];
        if let Some(&li) = node.index.get(&concept) {
            let label = &mut node.labels[li];
            // Alternatives are only sound to merge if they need no extra branch choices.
            if deps.is_subset(&label.deps) {
                let mut merged = std::mem::take(&mut label.tau);
                merged.extend(tau);
                let mut merged = minimize(merged);
                merged.truncate(MAX_TAU);
                label.tau = merged;
            }
            return None;
        }
        let li = node.labels.len();
        node.labels.push(Label { concept, tau, deps });
        node.index.insert(concept, li);
        let table = &self.r.table;
        match table.get(concept) {
            CNode::Top => None,
            CNode::Bottom => {
                let l = &node.labels[li];
                Some(Clash {
                    tau: best(&l.tau),
                    deps: l.deps.clone(),
                })
            }
            CNode::Atom(a) | CNode::NegAtom(a) => {
                let opposite = match table.get(concept) {
                    CNode::Atom(_) => CNode::NegAtom(*a),
                    _ => CNode::Atom(*a),
                };
                let other = table.lookup(&opposite)?;
                let &oi = node.index.get(&other)?;
                let (l, o) = (&node.labels[li], &node.labels[oi]);
                Some(Clash {
                    tau: best(&join(&l.tau, &o.tau)),
                    deps: l.deps.union(&o.deps),
                })
            }
            CNode::And(_) => {
                state.and_q.push_back((n, li));
                None
            }
            CNode::All(_, _) => {
                node.alls.push(li);
                state.all_q.push_back(ForallJob::Label(n, li));
                None
            }
            CNode::Or(_) => {
                node.ors.push(li);
                None
            }
            CNode::Some(_, _) => {
                node.somes.push(li);
                None
            }
        }
    }

    /// Applies ⊓, ∀ and GCI rules to a fixpoint.
    fn saturate(&mut self, state: &mut State) -> Result<Option<Clash>, TableauError> {
        let table = &self.r.table;
        loop {
            if let Some((n, li)) = state.and_q.pop_front() {
                self.tick()?;
                let label = state.nodes[n].labels[li].clone();
                let CNode::And(parts) = table.get(label.concept) else {
                    unreachable!("and queue holds conjunctions");
                };
                for &p in parts {
                    if let Some(c) =
                        self.add_label(state, n, p, label.tau.clone(), label.deps.clone())
                    {
                        return Ok(Some(c));
                    }
                }
                continue;
            }
            if let Some(job) = state.all_q.pop_front() {
                self.tick()?;
                let pairs: Vec<(usize, usize)> = match job {
                    ForallJob::Label(n, li) => {
                        state.nodes[n].out_edges.iter().map(|&e| (li, e)).collect()
                    }
                    ForallJob::Edge(n, e) => {
                        state.nodes[n].alls.iter().map(|&li| (li, e)).collect()
                    }
                };
                let n = match job {
                    ForallJob::Label(n, _) | ForallJob::Edge(n, _) => n,
                };
                for (li, e) in pairs {
                    let label = &state.nodes[n].labels[li];
                    let CNode::All(role, filler) = *table.get(label.concept) else {
                        unreachable!("forall index holds universals");
                    };
                    let edge = &state.edges[e].1;
                    if edge.role != role {
                        continue;
                    }
                    let tau = join(&label.tau, &edge.tau);
                    let deps = label.deps.union(&edge.deps);
                    let to = edge.to;
                    if let Some(c) = self.add_label(state, to, filler, tau, deps) {
                        return Ok(Some(c));
                    }
                }
                continue;
            }
            if let Some(n) = state.gci_q.pop_front() {
                for i in 0..state.gcis.len() {
                    self.tick()?;
                    let (cid, id) = state.gcis[i];
                    if let Some(c) = self.add_label(
                        state,
                        n,
                        cid,
                        vec![AxiomSet::singleton(id)],
                        AxiomSet::new(),
                    ) {
                        return Ok(Some(c));
                    }
                }
                continue;
            }
            return Ok(None);
        }
    }

    /// Whether disjunct `d` clashes as soon as it is added to node `n`.
    fn closes(
        &self,
        state: &State,
        n: usize,
        d: CId,
        tau: &[AxiomSet],
        deps: &AxiomSet,
    ) -> Option<Clash> {
        let table = &self.r.table;
        let killer = match table.get(d) {
            CNode::Bottom => {
                return Some(Clash {
                    tau: best(tau),
                    deps: deps.clone(),
                })
            }
            CNode::Atom(a) => table.lookup(&CNode::NegAtom(*a))?,
            CNode::NegAtom(a) => table.lookup(&CNode::Atom(*a))?,
            _ => return None,
        };
        let node = &state.nodes[n];
        let &ki = node.index.get(&killer)?;
        let k = &node.labels[ki];
        Some(Clash {
            tau: best(&join(tau, &k.tau)),
            deps: deps.union(&k.deps),
        })
    }

    fn pick_disjunction(&self, state: &State) -> Option<Disjunction> {
        let table = &self.r.table;
        let mut first_branch = None;
        for (n, node) in state.nodes.iter().enumerate() {
            for &li in &node.ors {
                let label = &node.labels[li];
                let CNode::Or(ds) = table.get(label.concept) else {
                    unreachable!("or index holds disjunctions");
                };
                if ds.iter().any(|d| node.index.contains_key(d)) {
                    continue;
                }
                let mut open = Vec::new();
                let mut closed = Vec::new();
                for &d in ds {
                    match self.closes(state, n, d, &label.tau, &label.deps) {
                        Some(c) => closed.push(c),
                        None if !open.contains(&d) => open.push(d),
                        None => {}
                    }
                }
                match open.len() {
                    0 => {
                        let mut tau = best(&label.tau);
                        let mut deps = label.deps.clone();
                        for c in &closed {
                            tau.union_with(&c.tau);
                            deps.union_with(&c.deps);
                        }
                        return Some(Disjunction::Closed(Clash { tau, deps }));
                    }
                    1 => {
                        let mut tau = label.tau.clone();
                        let mut deps = label.deps.clone();
                        for c in &closed {
                            tau = join(&tau, std::slice::from_ref(&c.tau));
                            deps.union_with(&c.deps);
                        }
                        return Some(Disjunction::Unit {
                            node: n,
                            concept: open[0],
                            tau,
                            deps,
                        });
                    }
                    _ => {
                        if first_branch.is_none() {
                            first_branch = Some(Disjunction::Branch {
                                node: n,
                                open,
                                closed,
                                tau: label.tau.clone(),
                                deps: label.deps.clone(),
                            });
                        }
                    }
                }
            }
        }
        first_branch
    }

    /// Applies the ∃-rule once; returns whether anything changed.
    fn apply_exists(&mut self, state: &mut State) -> Result<bool, TableauError> {
        let table = &self.r.table;
        for n in 0..state.nodes.len() {
            if state.nodes[n].somes.is_empty() || state.is_blocked(n) {
                continue;
            }
            for k in 0..state.nodes[n].somes.len() {
                let li = state.nodes[n].somes[k];
                let label = &state.nodes[n].labels[li];
                let CNode::Some(role, filler) = *table.get(label.concept) else {
                    unreachable!("some index holds existentials");
                };
                let witnessed = state.nodes[n].out_edges.iter().any(|&e| {
                    let edge = &state.edges[e].1;
                    edge.role == role && state.nodes[edge.to].index.contains_key(&filler)
                });
                if witnessed {
                    continue;
                }
                self.tick()?;
                let (tau, deps) = (label.tau.clone(), label.deps.clone());
                let child = state.new_node(Some(n));
                state.gci_q.push_back(child);
                state.add_edge(n, child, role, tau.clone(), deps.clone());
                // Only ⊥ can clash on a fresh node's first label.
                state.pending_clash = self.add_label(state, child, filler, tau, deps);
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn expand(&mut self, mut state: State) -> Result<Outcome, TableauError> {
        loop {
            if let Some(c) = state.pending_clash.take() {
                return Ok(Outcome::Clash(c));
            }
            if let Some(c) = self.saturate(&mut state)? {
                return Ok(Outcome::Clash(c));
            }
            match self.pick_disjunction(&state) {
                Some(Disjunction::Closed(c)) => {
                    self.tick()?;
                    return Ok(Outcome::Clash(c));
                }
                Some(Disjunction::Unit {
                    node,
                    concept,
                    tau,
                    deps,
                }) => {
                    self.tick()?;
                    if let Some(c) = self.add_label(&mut state, node, concept, tau, deps) {
                        return Ok(Outcome::Clash(c));
                    }
                    continue;
                }
                Some(Disjunction::Branch {
                    node,
                    open,
                    closed,
                    tau,
                    deps,
                }) => {
                    self.tick()?;
                    let b = self.next_branch;
                    self.next_branch += 1;
                    let mut branch_deps = deps.clone();
                    branch_deps.insert(b);
                    let mut collected = closed;
                    for d in open {
                        let mut child = state.clone();
                        let outcome = match self.add_label(
                            &mut child,
                            node,
                            d,
                            tau.clone(),
                            branch_deps.clone(),
                        ) {
                            Some(c) => Outcome::Clash(c),
                            None => self.expand(child)?,
                        };
                        match outcome {
                            Outcome::Open => return Ok(Outcome::Open),
                            Outcome::Clash(c) if !c.deps.contains(b) => {
                                return Ok(Outcome::Clash(c))
                            }
                            Outcome::Clash(c) => collected.push(c),
                        }
                    }
                    let mut joined = Clash {
                        tau: best(&tau),
                        deps,
                    };
                    for c in collected {
                        joined.tau.union_with(&c.tau);
                        joined.deps.union_with(&c.deps);
                    }
                    joined.deps.remove(b);
                    return Ok(Outcome::Clash(joined));
                }
                None => {}
            }
            if !self.apply_exists(&mut state)? {
                return Ok(Outcome::Open);
            }
        }
    }
}
