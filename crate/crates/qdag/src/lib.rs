//! Compile discrete belief networks into *query DAGs* — parameterized
//! arithmetic expressions — and answer probabilistic queries by evaluating
//! them with a tiny runtime.
//!
//! Exact inference in a belief network does almost all of its work
//! independently of the specific evidence values: only the numbers fed into
//! the arithmetic change. This crate exploits that by splitting inference in
//! two:
//!
//! 1. **Off-line**: [`compile()`] runs a cluster-tree inference pass over the
//!    network with evidence left symbolic, producing a [`QDag`] — a DAG of
//!    number nodes, evidence-specific nodes (ESNs) and `*`/`+` nodes whose
//!    designated query nodes evaluate to `Pr(x, e)`.
//! 2. **On-line**: [`evaluate`] (or the incremental [`Evaluator`]) plugs in
//!    evidence and folds the DAG with plain multiplication and addition.
//!    Nothing about graphical models survives into the runtime; the compiled
//!    artifact serializes to a line-oriented text file that a few dozen lines
//!    of code on any platform can load and evaluate.
//!
//! An evidence variable may be set to a value, or to the *unknown* marker
//! (`◊`, spelled `*UNKNOWN*` in text formats) when no observation is
//! available — so sensor dropouts need no recompilation. A variable may be
//! declared both evidence and query.
//!
//! ```
//! use qdag::{compile, evaluate, BeliefNetwork, CompileRequest, Evidence};
//!
//! let bn = BeliefNetwork::parse(
//!     "network fork
//!      variable A { ON OFF }
//!      variable B { ON OFF }
//!      variable C { ON OFF }
//!      cpt A { .3 .7 }
//!      cpt B | A { ON : .25 .75  OFF : .8 .2 }
//!      cpt C | A { ON : .9 .1   OFF : .5 .5 }",
//! )
//! .unwrap();
//! let dag = compile(&bn, &CompileRequest::new(&["C"], &["B"])).unwrap();
//!
//! let mut ev = Evidence::for_dag(&dag);
//! ev.assign(&dag, "C", Some("ON")).unwrap();
//! let values = evaluate(&dag, &ev);
//! assert!((values[0] - 0.3475).abs() < 1e-9); // Pr(B=ON, C=ON)
//! assert!((values[1] - 0.2725).abs() < 1e-9); // Pr(B=OFF, C=ON)
//! ```
//!
//! The `examples/` directory walks through each capability: compilation,
//! file round-trips, incremental evidence updates, reduction, the join-tree
//! structure, and verification against brute-force enumeration.

mod idx;

pub mod compile;
pub mod dag;
pub mod eval;
pub mod jointree;
pub mod network;
pub mod oracle;
pub mod verify;

mod dag_text;

pub use compile::{
    compile, compile_full, numeric_reference, reduce, Compilation, CompileError, CompileRequest,
    NumericRun, SymbolicPotential,
};
pub use dag::{DagError, DagStats, EvidenceVar, NodeId, QDag, QDagBuilder, QNode, Query};
pub use dag_text::TextError;
pub use eval::{evaluate, evaluate_with_stats, marginal, Evaluator, Evidence, EvalError, Marginal, Propagation};
pub use jointree::{build_join_tree, moralize, place_tables, triangulate, JoinTree, MoralGraph, Placement, Triangulation};
pub use network::{BeliefNetwork, Cpt, NetworkBuilder, NetworkError, Variable, Violation, UNKNOWN_MARKER};
pub use oracle::OracleError;
pub use verify::{sweep_against_oracle, sweep_pair, SweepReport};
