//! The query-DAG data model: an append-only, hash-consed store of number
//! nodes, evidence-specific nodes and n-ary `*`/`+` nodes, with designated
//! query nodes.
//!
//! A node's value under evidence is defined recursively: a number node is
//! its number; an evidence-specific node (ESN) for `(V, v)` is 1 when the
//! evidence sets `V` to `v` or leaves it unknown, else 0; a `*`/`+` node is
//! the product/sum of its inputs' values. Query nodes are the designated
//! outputs whose values are `Pr(x, e)`.
//!
//! Construction goes through [`QDagBuilder`], which interns structurally
//! identical nodes (so shared subexpressions share one id) and, unless
//! disabled, applies value-preserving local simplifications: dropping
//! multiplicative ones and additive zeros, short-circuiting products on
//! zero, and folding runs of constants. Node ids are handed out in creation
//! order, so the store is always topologically sorted: inputs precede
//! consumers.

use crate::network::UNKNOWN_MARKER;
use std::collections::HashMap;
use thiserror::Error;

/// Slack tolerated when folded constants drift past 1 by rounding.
pub(crate) const NUM_SLACK: f64 = 1e-9;

/// Identifier of a node in one store; also its topological rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn new(i: usize) -> NodeId {
        NodeId(u32::try_from(i).expect("node store exceeds u32 ids"))
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One node of a query DAG.
#[derive(Debug, Clone, PartialEq)]
pub enum QNode {
    /// A probability in [0, 1].
    Num(f64),
    /// Evidence-specific node for (variable, value), as indices into the
    /// dag's evidence-variable table.
    Esn { var: usize, value: usize },
    /// Product of two or more inputs.
    Mul(Vec<NodeId>),
    /// Sum of two or more inputs.
    Add(Vec<NodeId>),
}

impl QNode {
    pub fn inputs(&self) -> &[NodeId] {
        match self {
            QNode::Mul(inputs) | QNode::Add(inputs) => inputs,
            _ => &[],
        }
    }
}

/// An evidence variable and the values it may take on-line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceVar {
    pub name: String,
    pub values: Vec<String>,
}

impl EvidenceVar {
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// A designated output: the node evaluating to Pr(variable = value, e).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub variable: String,
    pub value: String,
    pub node: NodeId,
}

#[derive(Debug, Error, PartialEq)]
pub enum DagError {
    #[error("number {0} is outside [0, 1]")]
    NumOutOfRange(f64),
    #[error("folded constant sum {0} exceeds 1")]
    ConstantSumOutOfRange(f64),
    #[error("unknown evidence variable index {0}")]
    UnknownEvidenceVar(usize),
    #[error("value index {value} out of range for evidence variable `{variable}`")]
    UnknownEvidenceValue { variable: String, value: usize },
    #[error("operator node needs at least one input")]
    EmptyInputs,
    #[error("input id {0} does not exist in this store")]
    InvalidInput(NodeId),
    #[error("evidence variable `{0}` already declared")]
    DuplicateEvidenceVar(String),
    #[error("invalid name `{0}`")]
    BadName(String),
    #[error("query ({variable}, {value}) already registered")]
    DuplicateQuery { variable: String, value: String },
}

#[derive(PartialEq, Eq, Hash)]
enum NodeKey {
    Num(u64),
    Esn(usize, usize),
    Mul(Vec<NodeId>),
    Add(Vec<NodeId>),
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s != UNKNOWN_MARKER
        && !s.contains(|c: char| c.is_whitespace() || "{}|:#".contains(c))
}

/// Single-writer constructor for a [`QDag`].
pub struct QDagBuilder {
    evidence_vars: Vec<EvidenceVar>,
    nodes: Vec<QNode>,
    interned: HashMap<NodeKey, NodeId>,
    queries: Vec<Query>,
    fold_constants: bool,
    mul_nodes_created: u64,
    add_nodes_created: u64,
}

impl QDagBuilder {
    /// `fold_constants` enables the value-based simplifications (identity
    /// and zero elimination, constant folding). Interning of structurally
    /// identical nodes and collapsing of single-input operators are always
    /// on.
    pub fn new(fold_constants: bool) -> QDagBuilder {
        QDagBuilder {
            evidence_vars: Vec::new(),
            nodes: Vec::new(),
            interned: HashMap::new(),
            queries: Vec::new(),
            fold_constants,
            mul_nodes_created: 0,
            add_nodes_created: 0,
        }
    }

    pub fn declare_evidence_var(
        &mut self,
        name: &str,
        values: &[String],
    ) -> Result<usize, DagError> {
        if !valid_name(name) || values.iter().any(|v| !valid_name(v)) || values.is_empty() {
            return Err(DagError::BadName(name.to_string()));
        }
        if self.evidence_vars.iter().any(|v| v.name == name) {
            return Err(DagError::DuplicateEvidenceVar(name.to_string()));
        }
        self.evidence_vars.push(EvidenceVar { name: name.to_string(), values: values.to_vec() });
        Ok(self.evidence_vars.len() - 1)
    }

    /// Number node; interned, so equal payloads share an id.
    pub fn num(&mut self, p: f64) -> Result<NodeId, DagError> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(DagError::NumOutOfRange(p));
        }
        Ok(self.num_normalized(p))
    }

    /// Internal variant that forgives sums a hair above 1 from float
    /// rounding; anything further out is a bug in the caller.
    pub(crate) fn num_clamped(&mut self, p: f64) -> NodeId {
        debug_assert!(p.is_finite() && (0.0..=1.0 + NUM_SLACK).contains(&p));
        self.num_normalized(p.min(1.0))
    }

    fn num_normalized(&mut self, p: f64) -> NodeId {
        let p = if p == 0.0 { 0.0 } else { p }; // collapse -0.0
        self.intern(NodeKey::Num(p.to_bits()), || QNode::Num(p))
    }

    /// Evidence-specific node for (var, value).
    pub fn esn(&mut self, var: usize, value: usize) -> Result<NodeId, DagError> {
        let ev = self.evidence_vars.get(var).ok_or(DagError::UnknownEvidenceVar(var))?;
        if value >= ev.values.len() {
            return Err(DagError::UnknownEvidenceValue { variable: ev.name.clone(), value });
        }
        Ok(self.intern(NodeKey::Esn(var, value), || QNode::Esn { var, value }))
    }

    /// Product node over the inputs.
    pub fn mul(&mut self, inputs: &[NodeId]) -> Result<NodeId, DagError> {
        self.check_inputs(inputs)?;
        Ok(self.mul_simplified(inputs))
    }

    /// Sum node over the inputs.
    pub fn add(&mut self, inputs: &[NodeId]) -> Result<NodeId, DagError> {
        self.check_inputs(inputs)?;
        self.add_simplified(inputs)
    }

    fn check_inputs(&self, inputs: &[NodeId]) -> Result<(), DagError> {
        if inputs.is_empty() {
            return Err(DagError::EmptyInputs);
        }
        for &id in inputs {
            if id.index() >= self.nodes.len() {
                return Err(DagError::InvalidInput(id));
            }
        }
        Ok(())
    }

    pub(crate) fn mul_simplified(&mut self, inputs: &[NodeId]) -> NodeId {
        let kept: Vec<NodeId>;
        if self.fold_constants {
            let mut constant = 1.0f64;
            let mut constants_seen = 0usize;
            let mut first_const_pos = usize::MAX;
            let mut rest: Vec<NodeId> = Vec::with_capacity(inputs.len());
            for &id in inputs {
                match self.nodes[id.index()] {
                    QNode::Num(p) => {
                        if p == 0.0 {
                            return self.num_clamped(0.0);
                        }
                        constant *= p;
                        constants_seen += 1;
                        if first_const_pos == usize::MAX {
                            first_const_pos = rest.len();
                            rest.push(id); // placeholder, patched below
                        }
                    }
                    _ => rest.push(id),
                }
            }
            if constants_seen > 0 {
                if constant == 1.0 {
                    rest.remove(first_const_pos);
                } else {
                    let c = self.num_clamped(constant);
                    rest[first_const_pos] = c;
                }
            }
            kept = rest;
        } else {
            kept = inputs.to_vec();
        }
        match kept.len() {
            0 => self.num_clamped(1.0),
            1 => kept[0],
            _ => self.intern_op(NodeKey::Mul(kept.clone()), QNode::Mul(kept)),
        }
    }

    /// Sum node with no value-based simplification, for rebuilding existing
    /// structures whose constants may not fold within range.
    pub(crate) fn add_raw(&mut self, inputs: Vec<NodeId>) -> NodeId {
        match inputs.len() {
            1 => inputs[0],
            _ => self.intern_op(NodeKey::Add(inputs.clone()), QNode::Add(inputs)),
        }
    }

    pub(crate) fn add_simplified(&mut self, inputs: &[NodeId]) -> Result<NodeId, DagError> {
        let kept: Vec<NodeId>;
        if self.fold_constants {
            let mut constant = 0.0f64;
            let mut constants_seen = 0usize;
            let mut first_const_pos = usize::MAX;
            let mut rest: Vec<NodeId> = Vec::with_capacity(inputs.len());
            for &id in inputs {
                match self.nodes[id.index()] {
                    QNode::Num(0.0) => {} // additive identity
                    QNode::Num(p) => {
                        constant += p;
                        constants_seen += 1;
                        if first_const_pos == usize::MAX {
                            first_const_pos = rest.len();
                            rest.push(id);
                        }
                    }
                    _ => rest.push(id),
                }
            }
            if constants_seen > 0 {
                if constant > 1.0 + NUM_SLACK {
                    return Err(DagError::ConstantSumOutOfRange(constant));
                }
                let c = self.num_clamped(constant);
                rest[first_const_pos] = c;
            }
            kept = rest;
        } else {
            kept = inputs.to_vec();
        }
        Ok(match kept.len() {
            0 => self.num_clamped(0.0),
            1 => kept[0],
            _ => self.intern_op(NodeKey::Add(kept.clone()), QNode::Add(kept)),
        })
    }

    fn intern(&mut self, key: NodeKey, make: impl FnOnce() -> QNode) -> NodeId {
        if let Some(&id) = self.interned.get(&key) {
            return id;
        }
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(make());
        self.interned.insert(key, id);
        id
    }

    fn intern_op(&mut self, key: NodeKey, node: QNode) -> NodeId {
        if let Some(&id) = self.interned.get(&key) {
            return id;
        }
        let id = NodeId::new(self.nodes.len());
        match &node {
            QNode::Mul(_) => self.mul_nodes_created += 1,
            QNode::Add(_) => self.add_nodes_created += 1,
            _ => unreachable!(),
        }
        self.nodes.push(node);
        self.interned.insert(key, id);
        id
    }

    /// Registers a query output. The variable need not be an evidence
    /// variable.
    pub fn mark_query(&mut self, variable: &str, value: &str, node: NodeId) -> Result<(), DagError> {
        if !valid_name(variable) || !valid_name(value) {
            return Err(DagError::BadName(format!("{variable}={value}")));
        }
        if node.index() >= self.nodes.len() {
            return Err(DagError::InvalidInput(node));
        }
        if self.queries.iter().any(|q| q.variable == variable && q.value == value) {
            return Err(DagError::DuplicateQuery {
                variable: variable.to_string(),
                value: value.to_string(),
            });
        }
        self.queries.push(Query {
            variable: variable.to_string(),
            value: value.to_string(),
            node,
        });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &QNode {
        &self.nodes[id.index()]
    }

    /// How many `*` nodes this builder has appended (interning hits and
    /// simplified-away calls do not count).
    pub fn mul_nodes_created(&self) -> u64 {
        self.mul_nodes_created
    }

    /// How many `+` nodes this builder has appended.
    pub fn add_nodes_created(&self) -> u64 {
        self.add_nodes_created
    }

    /// Seals the store. The result is immutable and cheap to share.
    pub fn finish(self) -> QDag {
        QDag {
            evidence_vars: self.evidence_vars,
            nodes: self.nodes,
            queries: self.queries,
        }
    }
}

/// A sealed, immutable query DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct QDag {
    evidence_vars: Vec<EvidenceVar>,
    nodes: Vec<QNode>,
    queries: Vec<Query>,
}

impl QDag {
    pub(crate) fn from_parts(
        evidence_vars: Vec<EvidenceVar>,
        nodes: Vec<QNode>,
        queries: Vec<Query>,
    ) -> QDag {
        QDag { evidence_vars, nodes, queries }
    }

    pub fn evidence_vars(&self) -> &[EvidenceVar] {
        &self.evidence_vars
    }

    pub fn evidence_var_index(&self, name: &str) -> Option<usize> {
        self.evidence_vars.iter().position(|v| v.name == name)
    }

    pub fn nodes(&self) -> &[QNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &QNode {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    /// Query entries for one variable, in emission order.
    pub fn queries_for(&self, variable: &str) -> Vec<&Query> {
        self.queries.iter().filter(|q| q.variable == variable).collect()
    }

    /// Distinct query variables, in emission order.
    pub fn query_variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for q in &self.queries {
            if !out.contains(&q.variable.as_str()) {
                out.push(&q.variable);
            }
        }
        out
    }

    /// True iff every operator input precedes its consumer. Holds by
    /// construction; exposed so tests and file loading can assert it.
    pub fn is_topologically_ordered(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| n.inputs().iter().all(|id| id.index() < i))
    }

    /// Node ids reachable from the query nodes, ascending.
    pub fn reachable_from_queries(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self.queries.iter().map(|q| q.node.index()).collect();
        while let Some(i) = stack.pop() {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            for id in self.nodes[i].inputs() {
                if !seen[id.index()] {
                    stack.push(id.index());
                }
            }
        }
        (0..self.nodes.len()).filter(|&i| seen[i]).map(NodeId::new).collect()
    }

    pub fn stats(&self) -> DagStats {
        let mut stats = DagStats {
            num_nodes: 0,
            esn_nodes: 0,
            mul_nodes: 0,
            add_nodes: 0,
            edges: 0,
            max_depth: 0,
            queries: self.queries.len(),
            esn_per_var: self.evidence_vars.iter().map(|v| (v.name.clone(), 0)).collect(),
        };
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                QNode::Num(_) => stats.num_nodes += 1,
                QNode::Esn { var, .. } => {
                    stats.esn_nodes += 1;
                    stats.esn_per_var[*var].1 += 1;
                }
                QNode::Mul(inputs) => {
                    stats.mul_nodes += 1;
                    stats.edges += inputs.len();
                    depth[i] = 1 + inputs.iter().map(|id| depth[id.index()]).max().unwrap();
                }
                QNode::Add(inputs) => {
                    stats.add_nodes += 1;
                    stats.edges += inputs.len();
                    depth[i] = 1 + inputs.iter().map(|id| depth[id.index()]).max().unwrap();
                }
            }
            stats.max_depth = stats.max_depth.max(depth[i]);
        }
        stats
    }
}

/// Node and edge counts of a sealed dag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagStats {
    pub num_nodes: usize,
    pub esn_nodes: usize,
    pub mul_nodes: usize,
    pub add_nodes: usize,
    pub edges: usize,
    pub max_depth: usize,
    pub queries: usize,
    pub esn_per_var: Vec<(String, usize)>,
}

impl DagStats {
    pub fn total_nodes(&self) -> usize {
        self.num_nodes + self.esn_nodes + self.mul_nodes + self.add_nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_c(b: &mut QDagBuilder) -> usize {
        b.declare_evidence_var("C", &["ON".into(), "OFF".into()]).unwrap()
    }

    #[test]
    fn num_is_interned() {
        let mut b = QDagBuilder::new(true);
        let a = b.num(0.3).unwrap();
        let c = b.num(0.3).unwrap();
        assert_eq!(a, c);
        let d = b.num(0.7).unwrap();
        assert_ne!(a, d);
        assert_eq!(b.node_count(), 2);
    }

    #[test]
    fn num_range_is_enforced() {
        let mut b = QDagBuilder::new(true);
        assert!(matches!(b.num(1.1), Err(DagError::NumOutOfRange(_))));
        assert!(matches!(b.num(-0.1), Err(DagError::NumOutOfRange(_))));
        assert!(matches!(b.num(f64::NAN), Err(DagError::NumOutOfRange(_))));
    }

    #[test]
    fn esn_is_interned_and_bounded_by_the_domain() {
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let on1 = b.esn(c, 0).unwrap();
        let on2 = b.esn(c, 0).unwrap();
        assert_eq!(on1, on2);
        let off = b.esn(c, 1).unwrap();
        assert_ne!(on1, off);
        assert_eq!(b.node_count(), 2); // exactly the domain size
        assert!(matches!(b.esn(c, 2), Err(DagError::UnknownEvidenceValue { .. })));
        assert!(matches!(b.esn(9, 0), Err(DagError::UnknownEvidenceVar(9))));
    }

    #[test]
    fn structurally_equal_operators_share_an_id() {
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let n9 = b.num(0.9).unwrap();
        let on = b.esn(c, 0).unwrap();
        let m1 = b.mul(&[n9, on]).unwrap();
        let m2 = b.mul(&[n9, on]).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(b.mul_nodes_created(), 1);
    }

    #[test]
    fn zero_annihilates_a_product() {
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let zero = b.num(0.0).unwrap();
        let on = b.esn(c, 0).unwrap();
        let m = b.mul(&[zero, on]).unwrap();
        assert_eq!(m, zero);
        assert_eq!(b.mul_nodes_created(), 0);
    }

    #[test]
    fn ones_are_dropped_from_products() {
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let one = b.num(1.0).unwrap();
        let on = b.esn(c, 0).unwrap();
        assert_eq!(b.mul(&[one, on]).unwrap(), on);
        let all_ones = b.mul(&[one, one]).unwrap();
        assert_eq!(b.node(all_ones), &QNode::Num(1.0));
    }

    #[test]
    fn zeros_are_dropped_from_sums() {
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let zero = b.num(0.0).unwrap();
        let on = b.esn(c, 0).unwrap();
        assert_eq!(b.add(&[zero, on]).unwrap(), on);
        let all_zero = b.add(&[zero, zero]).unwrap();
        assert_eq!(b.node(all_zero), &QNode::Num(0.0));
    }

    #[test]
    fn constant_runs_fold() {
        let mut b = QDagBuilder::new(true);
        let p = b.num(0.25).unwrap();
        let q = b.num(0.3).unwrap();
        let m = b.mul(&[p, q]).unwrap();
        assert_eq!(b.node(m), &QNode::Num(0.075));

        let a = b.num(0.075).unwrap();
        let c = b.num(0.225).unwrap();
        let s = b.add(&[a, c]).unwrap();
        assert_eq!(b.node(s), &QNode::Num(0.3));
    }

    #[test]
    fn folding_keeps_mixed_products_in_place() {
        // x * .5 * y * .4 -> x * .2 * y, constant at the first constant slot
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let x = b.esn(c, 0).unwrap();
        let y = b.esn(c, 1).unwrap();
        let half = b.num(0.5).unwrap();
        let point4 = b.num(0.4).unwrap();
        let m = b.mul(&[x, half, y, point4]).unwrap();
        match b.node(m) {
            QNode::Mul(inputs) => {
                assert_eq!(inputs.len(), 3);
                assert_eq!(b.node(inputs[0]), &QNode::Esn { var: 0, value: 0 });
                assert!(matches!(b.node(inputs[1]), QNode::Num(p) if (p - 0.2).abs() < 1e-15));
                assert_eq!(b.node(inputs[2]), &QNode::Esn { var: 0, value: 1 });
            }
            n => panic!("expected a product, got {n:?}"),
        }
    }

    #[test]
    fn overfull_constant_sum_is_rejected() {
        let mut b = QDagBuilder::new(true);
        let x = b.num(0.9).unwrap();
        let y = b.num(0.8).unwrap();
        assert!(matches!(b.add(&[x, y]), Err(DagError::ConstantSumOutOfRange(_))));
    }

    #[test]
    fn singleton_operators_collapse_to_their_input() {
        let mut b = QDagBuilder::new(false);
        let c = binary_c(&mut b);
        let on = b.esn(c, 0).unwrap();
        assert_eq!(b.mul(&[on]).unwrap(), on);
        assert_eq!(b.add(&[on]).unwrap(), on);
        assert_eq!(b.mul_nodes_created() + b.add_nodes_created(), 0);
    }

    #[test]
    fn empty_input_list_is_an_error() {
        let mut b = QDagBuilder::new(true);
        assert_eq!(b.mul(&[]), Err(DagError::EmptyInputs));
        assert_eq!(b.add(&[]), Err(DagError::EmptyInputs));
    }

    #[test]
    fn disabled_folding_keeps_the_raw_structure() {
        let mut b = QDagBuilder::new(false);
        let p = b.num(0.25).unwrap();
        let q = b.num(0.3).unwrap();
        let m = b.mul(&[p, q]).unwrap();
        assert_eq!(b.node(m), &QNode::Mul(vec![p, q]));
        // interning still applies
        assert_eq!(b.mul(&[p, q]).unwrap(), m);
        assert_eq!(b.mul_nodes_created(), 1);
    }

    #[test]
    fn message_shaped_expression_builds_as_written() {
        // .9 * (C,ON) + .1 * (C,OFF)
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let n9 = b.num(0.9).unwrap();
        let n1 = b.num(0.1).unwrap();
        let on = b.esn(c, 0).unwrap();
        let off = b.esn(c, 1).unwrap();
        let t1 = b.mul(&[n9, on]).unwrap();
        let t2 = b.mul(&[n1, off]).unwrap();
        let msg = b.add(&[t1, t2]).unwrap();
        assert_eq!(b.node(msg), &QNode::Add(vec![t1, t2]));
        assert_eq!(b.node(t1), &QNode::Mul(vec![n9, on]));
    }

    #[test]
    fn store_is_topologically_ordered() {
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let n9 = b.num(0.9).unwrap();
        let on = b.esn(c, 0).unwrap();
        let m = b.mul(&[n9, on]).unwrap();
        b.mark_query("C", "ON", m).unwrap();
        let dag = b.finish();
        assert!(dag.is_topologically_ordered());
    }

    #[test]
    fn stats_count_by_kind_and_depth() {
        let mut b = QDagBuilder::new(true);
        let c = binary_c(&mut b);
        let n9 = b.num(0.9).unwrap();
        let n1 = b.num(0.1).unwrap();
        let on = b.esn(c, 0).unwrap();
        let off = b.esn(c, 1).unwrap();
        let t1 = b.mul(&[n9, on]).unwrap();
        let t2 = b.mul(&[n1, off]).unwrap();
        let msg = b.add(&[t1, t2]).unwrap();
        b.mark_query("X", "x", msg).unwrap();
        let dag = b.finish();
        let stats = dag.stats();
        assert_eq!(stats.num_nodes, 2);
        assert_eq!(stats.esn_nodes, 2);
        assert_eq!(stats.mul_nodes, 2);
        assert_eq!(stats.add_nodes, 1);
        assert_eq!(stats.edges, 6);
        assert_eq!(stats.max_depth, 2);
        assert_eq!(stats.esn_per_var, vec![("C".to_string(), 2)]);
    }

    #[test]
    fn sealed_dags_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<QDag>();
    }

    #[test]
    fn duplicate_queries_are_rejected() {
        let mut b = QDagBuilder::new(true);
        let n = b.num(0.5).unwrap();
        b.mark_query("B", "ON", n).unwrap();
        assert!(matches!(
            b.mark_query("B", "ON", n),
            Err(DagError::DuplicateQuery { .. })
        ));
    }
}
