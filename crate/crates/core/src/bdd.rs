//! Reduced ordered binary decision diagrams with weighted model counting.
//!
//! Variable `i` is tested before variable `j` whenever `i < j`. Axiom ids are
//! used directly as variable indices; extra variables (for instance the AR
//! contradiction variables) are appended with [`BddManager::add_var`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

use crate::axiom_set::AxiomSet;
use crate::model::{AxiomId, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BddError {
    #[error("BDD reference belongs to a different manager")]
    ForeignRef,
    #[error("variable {var} out of range (manager has {count})")]
    VarOutOfRange { var: usize, count: usize },
    #[error("axiom {0} has no variable mapping")]
    UnmappedAxiom(AxiomId),
    #[error("variable {0} has no weight")]
    MissingWeight(usize),
}

static NEXT_MANAGER: AtomicU32 = AtomicU32::new(1);

/// Handle to a BDD node. Terminals are valid in every manager.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BddRef {
    manager: u32,
    index: u32,
}

impl BddRef {
    pub const ZERO: BddRef = BddRef {
        manager: 0,
        index: 0,
    };
    pub const ONE: BddRef = BddRef {
        manager: 0,
        index: 1,
    };

    pub fn is_terminal(self) -> bool {
        self.index < 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BddNode {
    var: u32,
    low: BddRef,
    high: BddRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
    Not,
}

pub struct BddManager {
    id: u32,
    var_count: usize,
    /// Indices 0 and 1 are placeholders for the terminals.
    nodes: Vec<BddNode>,
    unique: HashMap<BddNode, BddRef>,
    cache: HashMap<(Op, BddRef, BddRef), BddRef>,
}

impl BddManager {
    pub fn new(var_count: usize) -> Self {
        let placeholder = BddNode {
            var: u32::MAX,
            low: BddRef::ZERO,
            high: BddRef::ZERO,
        };
        BddManager {
            id: NEXT_MANAGER.fetch_add(1, Ordering::Relaxed),
            var_count,
            nodes: vec![placeholder, placeholder],
            unique: HashMap::new(),
            cache: HashMap::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    /// Appends a variable after all existing ones and returns its index.
    pub fn add_var(&mut self) -> usize {
        self.var_count += 1;
        self.var_count - 1
    }

    /// Number of internal (non-terminal) nodes allocated so far.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - 2
    }

    fn check(&self, f: BddRef) -> Result<(), BddError> {
        if f.is_terminal() || f.manager == self.id {
            Ok(())
        } else {
            Err(BddError::ForeignRef)
        }
    }

    fn node(&self, f: BddRef) -> BddNode {
        self.nodes[f.index as usize]
    }

    fn level(&self, f: BddRef) -> u32 {
        if f.is_terminal() {
            u32::MAX
        } else {
            self.node(f).var
        }
    }

    fn mk(&mut self, var: u32, low: BddRef, high: BddRef) -> BddRef {
        if low == high {
            return low;
        }
        let node = BddNode { var, low, high };
        if let Some(&r) = self.unique.get(&node) {
            return r;
        }
        let r = BddRef {
            manager: self.id,
            index: self.nodes.len() as u32,
        };
        self.nodes.push(node);
        self.unique.insert(node, r);
        r
    }

    pub fn zero(&self) -> BddRef {
        BddRef::ZERO
    }

    pub fn one(&self) -> BddRef {
        BddRef::ONE
    }

    pub fn var(&mut self, i: usize) -> Result<BddRef, BddError> {
        if i >= self.var_count {
            return Err(BddError::VarOutOfRange {
                var: i,
                count: self.var_count,
            });
        }
        Ok(self.mk(i as u32, BddRef::ZERO, BddRef::ONE))
    }

    pub fn nvar(&mut self, i: usize) -> Result<BddRef, BddError> {
        let v = self.var(i)?;
        self.not(v)
    }

    pub fn and(&mut self, a: BddRef, b: BddRef) -> Result<BddRef, BddError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.apply(Op::And, a, b))
    }

    pub fn or(&mut self, a: BddRef, b: BddRef) -> Result<BddRef, BddError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.apply(Op::Or, a, b))
    }

    pub fn not(&mut self, a: BddRef) -> Result<BddRef, BddError> {
        self.check(a)?;
        Ok(self.negate(a))
    }

    pub fn and_all(&mut self, fs: impl IntoIterator<Item = BddRef>) -> Result<BddRef, BddError> {
        let mut acc = BddRef::ONE;
        for f in fs {
            acc = self.and(acc, f)?;
        }
        Ok(acc)
    }

    pub fn or_all(&mut self, fs: impl IntoIterator<Item = BddRef>) -> Result<BddRef, BddError> {
        let mut acc = BddRef::ZERO;
        for f in fs {
            acc = self.or(acc, f)?;
        }
        Ok(acc)
    }

    /// Canonicity makes this an unsatisfiability test.
    pub fn is_zero(&self, f: BddRef) -> bool {
        f == BddRef::ZERO
    }

    pub fn is_one(&self, f: BddRef) -> bool {
        f == BddRef::ONE
    }

    fn negate(&mut self, a: BddRef) -> BddRef {
        if a == BddRef::ZERO {
            return BddRef::ONE;
        }
        if a == BddRef::ONE {
            return BddRef::ZERO;
        }
        let key = (Op::Not, a, a);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let n = self.node(a);
        let low = self.negate(n.low);
        let high = self.negate(n.high);
        let r = self.mk(n.var, low, high);
        self.cache.insert(key, r);
        r
    }

    fn apply(&mut self, op: Op, a: BddRef, b: BddRef) -> BddRef {
        match op {
            Op::And => {
                if a == BddRef::ZERO || b == BddRef::ZERO {
                    return BddRef::ZERO;
                }
                if a == BddRef::ONE {
                    return b;
                }
                if b == BddRef::ONE || a == b {
                    return a;
                }
            }
            Op::Or => {
                if a == BddRef::ONE || b == BddRef::ONE {
                    return BddRef::ONE;
                }
                if a == BddRef::ZERO {
                    return b;
                }
                if b == BddRef::ZERO || a == b {
                    return a;
                }
            }
            Op::Not => unreachable!("negation has its own recursion"),
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let key = (op, a, b);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let (la, lb) = (self.level(a), self.level(b));
        let top = la.min(lb);
        let (a0, a1) = if la == top {
            let n = self.node(a);
            (n.low, n.high)
        } else {
            (a, a)
        };
        let (b0, b1) = if lb == top {
            let n = self.node(b);
            (n.low, n.high)
        } else {
            (b, b)
        };
        let low = self.apply(op, a0, b0);
        let high = self.apply(op, a1, b1);
        let r = self.mk(top, low, high);
        self.cache.insert(key, r);
        r
    }

    /// `⋁_{J} ⋀_{i ∈ J} X_i`. Axioms mapped to no variable (certain ones)
    /// contribute the constant true.
    pub fn from_justifications(
        &mut self,
        justs: &[AxiomSet],
        vars: &VarMap,
    ) -> Result<BddRef, BddError> {
        let mut acc = BddRef::ZERO;
        for j in justs {
            let mut conj = BddRef::ONE;
            // Highest variable first keeps intermediate results small.
            let ids: Vec<AxiomId> = j.iter().collect();
            for &id in ids.iter().rev() {
                if let Some(v) = vars.lookup(id)? {
                    let x = self.var(v)?;
                    conj = self.apply(Op::And, conj, x);
                }
            }
            acc = self.apply(Op::Or, acc, conj);
        }
        Ok(acc)
    }

    /// Probability that `f` is true when each variable is independently true
    /// with its weight.
    pub fn probability(&self, f: BddRef, weights: &WeightMap) -> Result<f64, BddError> {
        self.check(f)?;
        let mut memo: HashMap<u32, f64> = HashMap::new();
        self.prob_rec(f, weights, &mut memo)
    }

    fn prob_rec(
        &self,
        f: BddRef,
        w: &WeightMap,
        memo: &mut HashMap<u32, f64>,
    ) -> Result<f64, BddError> {
        if f == BddRef::ZERO {
            return Ok(0.0);
        }
        if f == BddRef::ONE {
            return Ok(1.0);
        }
        if let Some(&p) = memo.get(&f.index) {
            return Ok(p);
        }
        let n = self.node(f);
        let pv = w
            .get(n.var as usize)
            .ok_or(BddError::MissingWeight(n.var as usize))?;
        let p =
            pv * self.prob_rec(n.high, w, memo)? + (1.0 - pv) * self.prob_rec(n.low, w, memo)?;
        memo.insert(f.index, p);
        Ok(p)
    }

    /// Evaluates `f` under a total assignment.
    pub fn eval(&self, f: BddRef, assignment: impl Fn(usize) -> bool) -> bool {
        let mut cur = f;
        while !cur.is_terminal() {
            let n = self.node(cur);
            cur = if assignment(n.var as usize) {
                n.high
            } else {
                n.low
            };
        }
        cur == BddRef::ONE
    }

    /// Graphviz rendering: solid edges for the high child, dashed for the low child.
    pub fn to_dot(&self, f: BddRef) -> String {
        let mut out = String::from(
            "digraph bdd {\n  zero [shape=box,label=\"0\"];\n  one [shape=box,label=\"1\"];\n",
        );
        let name = |r: BddRef| match r {
            BddRef::ZERO => "zero".to_string(),
            BddRef::ONE => "one".to_string(),
            r => format!("n{}", r.index),
        };
        let mut stack = vec![f];
        let mut seen = std::collections::HashSet::new();
        while let Some(r) = stack.pop() {
            if r.is_terminal() || !seen.insert(r) {
                continue;
            }
            let n = self.node(r);
            let _ = writeln!(out, "  {} [label=\"x{}\"];", name(r), n.var);
            let _ = writeln!(out, "  {} -> {};", name(r), name(n.high));
            let _ = writeln!(out, "  {} -> {} [style=dashed];", name(r), name(n.low));
            stack.push(n.low);
            stack.push(n.high);
        }
        if f.is_terminal() {
            let _ = writeln!(out, "  root -> {};", name(f));
        }
        out.push_str("}\n");
        out
    }

    /// Checks reduction, ordering and sharing of everything reachable from `f`.
    pub fn check_invariants(&self, f: BddRef) -> bool {
        let mut seen: HashMap<BddNode, BddRef> = HashMap::new();
        let mut stack = vec![f];
        while let Some(r) = stack.pop() {
            if r.is_terminal() {
                continue;
            }
            let n = self.node(r);
            if n.low == n.high || self.level(n.low) <= n.var || self.level(n.high) <= n.var {
                return false;
            }
            match seen.get(&n) {
                Some(&other) if other != r => return false,
                Some(_) => continue,
                None => {
                    seen.insert(n, r);
                }
            }
            stack.push(n.low);
            stack.push(n.high);
        }
        true
    }
}

/// Mapping from axiom ids to BDD variables. Mapped-to-`None` axioms are
/// treated as always present.
#[derive(Debug, Clone, Default)]
pub struct VarMap {
    map: HashMap<AxiomId, Option<usize>>,
}

impl VarMap {
    /// Axioms in `variables` get the variable equal to their id; every other
    /// axiom of `kb` is constant.
    pub fn for_kb(kb: &KnowledgeBase, variables: &AxiomSet) -> Self {
        VarMap {
            map: kb
                .axioms()
                .iter()
                .map(|a| (a.id, variables.contains(a.id).then_some(a.id)))
                .collect(),
        }
    }

    pub fn insert(&mut self, id: AxiomId, var: Option<usize>) {
        self.map.insert(id, var);
    }

    fn lookup(&self, id: AxiomId) -> Result<Option<usize>, BddError> {
        self.map
            .get(&id)
            .copied()
            .ok_or(BddError::UnmappedAxiom(id))
    }
}

/// Probability of each variable being true.
#[derive(Debug, Clone, Default)]
pub struct WeightMap {
    weights: Vec<Option<f64>>,
}

impl WeightMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Weights of the probabilistic axioms of `kb`, keyed by axiom id.
    pub fn for_kb(kb: &KnowledgeBase) -> Self {
        let mut w = WeightMap::new();
        for a in kb.axioms() {
            if let Some(p) = a.probability {
                w.set(a.id, p);
            }
        }
        w
    }

    pub fn set(&mut self, var: usize, p: f64) {
        if var >= self.weights.len() {
            self.weights.resize(var + 1, None);
        }
        self.weights[var] = Some(p);
    }

    pub fn get(&self, var: usize) -> Option<f64> {
        self.weights.get(var).copied().flatten()
    }
}
