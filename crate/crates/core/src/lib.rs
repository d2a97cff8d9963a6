//! Probabilistic query answering over possibly inconsistent ALC knowledge bases.
//!
//! Axioms may carry a probability `p ∈ (0, 1)`; each probabilistic axiom is an
//! independent Boolean variable, and a world is the KB obtained by keeping the
//! certain axioms plus the selected probabilistic ones. For a query `Q` the
//! reasoner computes
//!
//! * all justifications of `Q` and of the inconsistency ([`justify`]),
//! * `P(Incons)`, `P(Cons)`, `P(Q, Cons)` and `P_C(Q) = P(Q, Cons) / P(Cons)`
//!   from BDDs over those justifications ([`bdd`], [`semantics`]),
//! * whether `Q` holds under the Brave, AR or IAR repair semantics.

pub mod axiom_set;
pub mod bdd;
pub mod bench;
pub mod justify;
pub mod model;
pub mod parser;
pub mod pipeline;
pub mod semantics;
pub mod tableau;

pub use axiom_set::AxiomSet;
pub use model::{Axiom, AxiomId, Concept, KnowledgeBase, Name, World};
pub use parser::{parse_kb, parse_query, serialize_kb, Query};
