//! Off-line compilation: run cluster-tree inference with evidence left
//! symbolic, emitting dag nodes instead of numbers.
//!
//! The engine is generic over the value algebra. Instantiated with the
//! symbolic algebra it builds a [`QDag`]; instantiated with plain `f64`
//! arithmetic it is an ordinary numeric join-tree inference pass. Both run
//! the identical schedule over the identical tree, which is what makes the
//! operation accounting meaningful: every `*`/`+` node the compiler creates
//! corresponds to arithmetic the numeric pass performs.
//!
//! Cluster potentials are initialized from the CPTs placed in each cluster
//! times one evidence indicator per attached evidence variable. Messages
//! flow inward to a fixed root and back out, so afterwards every cluster's
//! posterior is available. A query node for (X, x) sums the posterior of
//! X's home cluster over everything but X.

use crate::dag::{DagError, NodeId, QDag, QDagBuilder, QNode};
use crate::eval::{node_values, Evidence};
use crate::idx::Shape;
use crate::jointree::{join_tree_for, place_tables, JoinTree, Placement};
use crate::network::{BeliefNetwork, Violation};
use thiserror::Error;

/// What to compile: which variables may receive evidence on-line, which
/// distributions the dag must answer, and the backend switches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileRequest {
    pub evidence: Vec<String>,
    pub query: Vec<String>,
    /// Fold constants inside the node constructors (on by default). Turning
    /// it off preserves the raw operation structure, one node per arithmetic
    /// operation.
    pub fold_constants: bool,
    /// Collapse evidence-independent subexpressions into single number nodes
    /// after compilation (on by default).
    pub reduce: bool,
}

impl CompileRequest {
    pub fn new(evidence: &[&str], query: &[&str]) -> CompileRequest {
        CompileRequest {
            evidence: evidence.iter().map(|s| s.to_string()).collect(),
            query: query.iter().map(|s| s.to_string()).collect(),
            fold_constants: true,
            reduce: true,
        }
    }

    pub fn without_folding(mut self) -> CompileRequest {
        self.fold_constants = false;
        self
    }

    pub fn without_reduction(mut self) -> CompileRequest {
        self.reduce = false;
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error("evidence variable `{0}` is not in the network")]
    UnknownEvidenceVariable(String),
    #[error("query variable `{0}` is not in the network")]
    UnknownQueryVariable(String),
    #[error("network is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<Violation>),
    #[error("dag construction failed: {0}")]
    Dag(#[from] DagError),
}

// ---------------------------------------------------------------------------
// generic cluster algebra

/// The operations cluster-tree inference needs from its value domain.
trait ClusterAlgebra {
    type Value: Clone;

    /// A table entry that is just a probability.
    fn constant(&mut self, p: f64) -> Self::Value;
    /// The likelihood-vector entry for (variable, value).
    fn indicator(&mut self, var: usize, value: usize) -> Self::Value;
    /// Product of the factors; empty product is the unit.
    fn product(&mut self, factors: Vec<Self::Value>) -> Self::Value;
    /// Sum of the terms (never called empty).
    fn sum(&mut self, terms: Vec<Self::Value>) -> Self::Value;
}

/// Builds dag nodes.
struct Symbolic<'a> {
    builder: &'a mut QDagBuilder,
    /// network variable index -> dag evidence-variable index
    evar_of: Vec<Option<usize>>,
}

impl ClusterAlgebra for Symbolic<'_> {
    type Value = NodeId;

    fn constant(&mut self, p: f64) -> NodeId {
        self.builder.num_clamped(p)
    }

    fn indicator(&mut self, var: usize, value: usize) -> NodeId {
        let evar = self.evar_of[var].expect("indicator for an undeclared evidence variable");
        self.builder.esn(evar, value).expect("evidence variable was declared with this domain")
    }

    fn product(&mut self, factors: Vec<NodeId>) -> NodeId {
        if factors.is_empty() {
            return self.builder.num_clamped(1.0);
        }
        self.builder.mul_simplified(&factors)
    }

    fn sum(&mut self, terms: Vec<NodeId>) -> NodeId {
        self.builder
            .add_simplified(&terms)
            .expect("cluster sums stay within probability range")
    }
}

/// Plain arithmetic with operation counters.
struct Numeric<'a> {
    /// Per network variable: observed value, or None for unknown.
    evidence: &'a [Option<usize>],
    mul_ops: u64,
    add_ops: u64,
}

impl ClusterAlgebra for Numeric<'_> {
    type Value = f64;

    fn constant(&mut self, p: f64) -> f64 {
        p
    }

    fn indicator(&mut self, var: usize, value: usize) -> f64 {
        match self.evidence[var] {
            None => 1.0,
            Some(v) if v == value => 1.0,
            Some(_) => 0.0,
        }
    }

    fn product(&mut self, factors: Vec<f64>) -> f64 {
        self.mul_ops += factors.len().saturating_sub(1) as u64;
        factors.into_iter().product()
    }

    fn sum(&mut self, terms: Vec<f64>) -> f64 {
        self.add_ops += terms.len().saturating_sub(1) as u64;
        terms.into_iter().sum()
    }
}

// ---------------------------------------------------------------------------
// the engine

/// A table mapping instantiations of `scope` to values.
struct Potential<V> {
    scope: Vec<usize>,
    shape: Shape,
    table: Vec<V>,
}

impl<V: Clone> Potential<V> {
    /// Value at the instantiation of a superset scope, restricted to ours.
    fn at_superset(&self, superset_positions: &[usize], inst: &[usize]) -> V {
        let restricted: Vec<usize> =
            superset_positions.iter().map(|&p| inst[p]).collect();
        self.table[self.shape.index_of(&restricted)].clone()
    }
}

/// A cluster potential over dag nodes: the symbolic counterpart of a
/// numeric table.
pub struct SymbolicPotential {
    inner: Potential<NodeId>,
}

impl SymbolicPotential {
    /// Scope variables (network indices), ascending.
    pub fn scope(&self) -> &[usize] {
        &self.inner.scope
    }

    /// Node for one instantiation of the scope.
    pub fn node_at(&self, instantiation: &[usize]) -> NodeId {
        self.inner.table[self.inner.shape.index_of(instantiation)]
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.inner.table
    }
}

struct Engine<'a, A: ClusterAlgebra> {
    bn: &'a BeliefNetwork,
    tree: &'a JoinTree,
    placement: &'a Placement,
    alg: A,
}

struct EngineOutput<V> {
    potentials: Vec<Potential<V>>,
    /// Directed messages: slot 2e is low->high along edge e, 2e+1 the reverse.
    messages: Vec<Option<Potential<V>>>,
    posteriors: Vec<Potential<V>>,
    /// Per query variable: (network var, one value per domain element).
    query_tables: Vec<(usize, Vec<V>)>,
}

impl<'a, A: ClusterAlgebra> Engine<'a, A> {
    fn scope_of(&self, cluster: usize) -> Vec<usize> {
        self.tree.clusters[cluster].iter().copied().collect()
    }

    fn shape_for(&self, scope: &[usize]) -> Shape {
        Shape::new(scope.iter().map(|&v| self.bn.card(v)).collect())
    }

    fn run(&mut self, query_vars: &[usize]) -> EngineOutput<A::Value> {
        let cluster_count = self.tree.cluster_count();
        let potentials: Vec<Potential<A::Value>> =
            (0..cluster_count).map(|c| self.initial_potential(c)).collect();

        // two-phase schedule around root 0: discovery order via BFS with
        // ascending neighbors, collect = reverse discovery, distribute =
        // discovery
        let mut parent: Vec<Option<usize>> = vec![None; cluster_count];
        let mut discovery = Vec::with_capacity(cluster_count);
        let mut seen = vec![false; cluster_count];
        let mut frontier = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(c) = frontier.pop_front() {
            discovery.push(c);
            for &(nb, _) in self.tree.neighbors(c) {
                if !seen[nb] {
                    seen[nb] = true;
                    parent[nb] = Some(c);
                    frontier.push_back(nb);
                }
            }
        }

        let mut messages: Vec<Option<Potential<A::Value>>> =
            (0..2 * self.tree.edges.len()).map(|_| None).collect();
        for &c in discovery.iter().rev() {
            if let Some(p) = parent[c] {
                let msg = self.message(c, p, &potentials, &messages);
                messages[slot(self.tree, c, p)] = Some(msg);
            }
        }
        for &c in &discovery {
            if let Some(p) = parent[c] {
                let msg = self.message(p, c, &potentials, &messages);
                messages[slot(self.tree, p, c)] = Some(msg);
            }
        }

        let posteriors: Vec<Potential<A::Value>> =
            (0..cluster_count).map(|c| self.posterior(c, &potentials, &messages)).collect();

        let query_tables = query_vars
            .iter()
            .map(|&x| (x, self.query_table(x, &posteriors)))
            .collect();

        EngineOutput { potentials, messages, posteriors, query_tables }
    }

    /// Product of the CPT entries placed here and the indicators of the
    /// evidence variables attached here, per instantiation. A cluster with
    /// nothing placed gets unit entries.
    fn initial_potential(&mut self, cluster: usize) -> Potential<A::Value> {
        let scope = self.scope_of(cluster);
        let shape = self.shape_for(&scope);
        let assigned: Vec<usize> = (0..self.bn.variable_count())
            .filter(|&v| self.placement.cpt_cluster[v] == cluster)
            .collect();
        let attached: Vec<usize> = self
            .placement
            .lambda_cluster
            .iter()
            .filter(|(_, c)| *c == cluster)
            .map(|(v, _)| *v)
            .collect();
        let pos_of = |v: usize| scope.iter().position(|&s| s == v).unwrap();

        let mut table = Vec::with_capacity(shape.len());
        for inst in shape.assignments() {
            let mut factors = Vec::with_capacity(assigned.len() + attached.len());
            for &x in &assigned {
                let parent_values: Vec<usize> =
                    self.bn.cpt(x).parents.iter().map(|&p| inst[pos_of(p)]).collect();
                let p = self.bn.cpt_entry(x, &parent_values, inst[pos_of(x)]);
                factors.push(self.alg.constant(p));
            }
            for &e in &attached {
                factors.push(self.alg.indicator(e, inst[pos_of(e)]));
            }
            table.push(self.alg.product(factors));
        }
        Potential { scope, shape, table }
    }

    /// Message from cluster `from` to neighbor `to`: the potential times all
    /// other inbound messages, summed down to the separator.
    fn message(
        &mut self,
        from: usize,
        to: usize,
        potentials: &[Potential<A::Value>],
        messages: &[Option<Potential<A::Value>>],
    ) -> Potential<A::Value> {
        let scope = self.scope_of(from);
        let shape = self.shape_for(&scope);
        let edge = self
            .tree
            .neighbors(from)
            .iter()
            .find(|(nb, _)| *nb == to)
            .map(|&(_, e)| e)
            .expect("message along a tree edge");
        let sep: Vec<usize> = self.tree.edges[edge].2.iter().copied().collect();
        let sep_shape = self.shape_for(&sep);
        let sep_positions: Vec<usize> =
            sep.iter().map(|v| scope.iter().position(|s| s == v).unwrap()).collect();

        let inbound: Vec<(&Potential<A::Value>, Vec<usize>)> = self
            .tree
            .neighbors(from)
            .iter()
            .filter(|(nb, _)| *nb != to)
            .map(|&(nb, _)| {
                let msg = messages[slot(self.tree, nb, from)]
                    .as_ref()
                    .expect("inward messages precede outward ones");
                let positions = msg
                    .scope
                    .iter()
                    .map(|v| scope.iter().position(|s| s == v).unwrap())
                    .collect();
                (msg, positions)
            })
            .collect();

        let mut groups: Vec<Vec<A::Value>> = (0..sep_shape.len()).map(|_| Vec::new()).collect();
        for (flat, inst) in shape.assignments().enumerate() {
            let mut factors = Vec::with_capacity(1 + inbound.len());
            factors.push(potentials[from].table[flat].clone());
            for (msg, positions) in &inbound {
                factors.push(msg.at_superset(positions, &inst));
            }
            let term = self.alg.product(factors);
            let sep_values: Vec<usize> = sep_positions.iter().map(|&p| inst[p]).collect();
            groups[sep_shape.index_of(&sep_values)].push(term);
        }
        let table = groups.into_iter().map(|terms| self.alg.sum(terms)).collect();
        Potential { scope: sep, shape: sep_shape, table }
    }

    /// Cluster potential times every inbound message.
    fn posterior(
        &mut self,
        cluster: usize,
        potentials: &[Potential<A::Value>],
        messages: &[Option<Potential<A::Value>>],
    ) -> Potential<A::Value> {
        let scope = self.scope_of(cluster);
        let shape = self.shape_for(&scope);
        let inbound: Vec<(&Potential<A::Value>, Vec<usize>)> = self
            .tree
            .neighbors(cluster)
            .iter()
            .map(|&(nb, _)| {
                let msg = messages[slot(self.tree, nb, cluster)]
                    .as_ref()
                    .expect("two-phase pass fills every directed slot");
                let positions = msg
                    .scope
                    .iter()
                    .map(|v| scope.iter().position(|s| s == v).unwrap())
                    .collect();
                (msg, positions)
            })
            .collect();

        let mut table = Vec::with_capacity(shape.len());
        for (flat, inst) in shape.assignments().enumerate() {
            let mut factors = Vec::with_capacity(1 + inbound.len());
            factors.push(potentials[cluster].table[flat].clone());
            for (msg, positions) in &inbound {
                factors.push(msg.at_superset(positions, &inst));
            }
            table.push(self.alg.product(factors));
        }
        Potential { scope, shape, table }
    }

    /// Sums the home cluster's posterior over everything but the query
    /// variable, once per value.
    fn query_table(&mut self, var: usize, posteriors: &[Potential<A::Value>]) -> Vec<A::Value> {
        let home = self.tree.home_of(var).expect("query variable appears in some cluster");
        let posterior = &posteriors[home];
        let pos = posterior.scope.iter().position(|&s| s == var).unwrap();
        let mut groups: Vec<Vec<A::Value>> =
            (0..self.bn.card(var)).map(|_| Vec::new()).collect();
        for (flat, inst) in posterior.shape.assignments().enumerate() {
            groups[inst[pos]].push(posterior.table[flat].clone());
        }
        groups.into_iter().map(|terms| self.alg.sum(terms)).collect()
    }
}

fn slot(tree: &JoinTree, from: usize, to: usize) -> usize {
    let (edge, forward) = tree
        .neighbors(from)
        .iter()
        .find(|(nb, _)| *nb == to)
        .map(|&(_, e)| (e, tree.edges[e].0 == from))
        .expect("slot of a tree edge");
    2 * edge + usize::from(!forward)
}

// ---------------------------------------------------------------------------
// public entry points

/// Everything the compiler produced, including the intermediate symbolic
/// tables. `qdag` is the unreduced artifact; apply [`reduce`] separately if
/// wanted.
pub struct Compilation {
    pub qdag: QDag,
    pub tree: JoinTree,
    pub placement: Placement,
    potentials: Vec<SymbolicPotential>,
    messages: Vec<Option<SymbolicPotential>>,
    posteriors: Vec<SymbolicPotential>,
    /// `*` nodes appended while compiling.
    pub mul_nodes_created: u64,
    /// `+` nodes appended while compiling.
    pub add_nodes_created: u64,
}

impl Compilation {
    pub fn potential(&self, cluster: usize) -> &SymbolicPotential {
        &self.potentials[cluster]
    }

    pub fn posterior(&self, cluster: usize) -> &SymbolicPotential {
        &self.posteriors[cluster]
    }

    /// The message sent from one cluster to an adjacent one, if they are
    /// adjacent.
    pub fn message(&self, from: usize, to: usize) -> Option<&SymbolicPotential> {
        let adjacent = self.tree.neighbors(from).iter().any(|(nb, _)| *nb == to);
        if !adjacent {
            return None;
        }
        self.messages[slot(&self.tree, from, to)].as_ref()
    }
}

fn resolve_request(
    bn: &BeliefNetwork,
    req: &CompileRequest,
) -> Result<(Vec<usize>, Vec<usize>), CompileError> {
    let violations = bn.validate();
    if !violations.is_empty() {
        return Err(CompileError::InvalidNetwork(violations));
    }
    let mut evidence = Vec::new();
    for name in &req.evidence {
        let v = bn
            .var_index(name)
            .ok_or_else(|| CompileError::UnknownEvidenceVariable(name.clone()))?;
        if !evidence.contains(&v) {
            evidence.push(v);
        }
    }
    let mut query = Vec::new();
    for name in &req.query {
        let v = bn
            .var_index(name)
            .ok_or_else(|| CompileError::UnknownQueryVariable(name.clone()))?;
        if !query.contains(&v) {
            query.push(v);
        }
    }
    // declaration order keeps the artifact independent of flag order
    evidence.sort_unstable();
    query.sort_unstable();
    Ok((evidence, query))
}

/// Compiles the network into a query dag, reducing it afterwards unless the
/// request says otherwise.
pub fn compile(bn: &BeliefNetwork, req: &CompileRequest) -> Result<QDag, CompileError> {
    let compilation = compile_full(bn, req)?;
    if req.reduce {
        Ok(reduce(&compilation.qdag))
    } else {
        Ok(compilation.qdag)
    }
}

/// Compiles and keeps the intermediate structures. Reduction is never
/// applied here so the tables always refer into the returned dag.
pub fn compile_full(bn: &BeliefNetwork, req: &CompileRequest) -> Result<Compilation, CompileError> {
    let (evidence_vars, query_vars) = resolve_request(bn, req)?;
    let tree = join_tree_for(bn);
    let placement = place_tables(&tree, bn, &evidence_vars);

    let mut builder = QDagBuilder::new(req.fold_constants);
    let mut evar_of: Vec<Option<usize>> = vec![None; bn.variable_count()];
    for &v in &evidence_vars {
        let var = &bn.variables()[v];
        let evar = builder.declare_evidence_var(&var.name, &var.values)?;
        evar_of[v] = Some(evar);
    }

    let out = {
        let mut engine = Engine {
            bn,
            tree: &tree,
            placement: &placement,
            alg: Symbolic { builder: &mut builder, evar_of },
        };
        engine.run(&query_vars)
    };

    for (x, nodes) in &out.query_tables {
        let var = &bn.variables()[*x];
        for (value, &node) in var.values.iter().zip(nodes) {
            builder.mark_query(&var.name, value, node)?;
        }
    }

    let mul_nodes_created = builder.mul_nodes_created();
    let add_nodes_created = builder.add_nodes_created();
    let qdag = builder.finish();
    let wrap = |p: Potential<NodeId>| SymbolicPotential { inner: p };
    Ok(Compilation {
        qdag,
        tree,
        placement,
        potentials: out.potentials.into_iter().map(wrap).collect(),
        messages: out.messages.into_iter().map(|m| m.map(wrap)).collect(),
        posteriors: out.posteriors.into_iter().map(wrap).collect(),
        mul_nodes_created,
        add_nodes_created,
    })
}

/// Result of one numeric join-tree pass over the same tree and schedule the
/// compiler uses.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericRun {
    /// Per query variable (network index): Pr(x, e) per value.
    pub answers: Vec<(usize, Vec<f64>)>,
    pub mul_ops: u64,
    pub add_ops: u64,
}

/// Runs ordinary numeric clustering for one concrete evidence setting
/// (`None` = unknown) and counts every binary `*` and `+` it performs.
pub fn numeric_reference(
    bn: &BeliefNetwork,
    req: &CompileRequest,
    observed: &[Option<usize>],
) -> Result<NumericRun, CompileError> {
    let (evidence_vars, query_vars) = resolve_request(bn, req)?;
    debug_assert_eq!(observed.len(), bn.variable_count());
    let tree = join_tree_for(bn);
    let placement = place_tables(&tree, bn, &evidence_vars);
    let mut engine = Engine {
        bn,
        tree: &tree,
        placement: &placement,
        alg: Numeric { evidence: observed, mul_ops: 0, add_ops: 0 },
    };
    let out = engine.run(&query_vars);
    Ok(NumericRun {
        answers: out.query_tables,
        mul_ops: engine.alg.mul_ops,
        add_ops: engine.alg.add_ops,
    })
}

/// Replaces every maximal evidence-independent subexpression with a single
/// number node and drops nodes the queries cannot reach. Query values are
/// preserved for every evidence assignment.
pub fn reduce(dag: &QDag) -> QDag {
    let n = dag.node_count();
    // constants of the evidence-free regions; evidence is irrelevant there
    let all_unknown = Evidence::for_dag(dag);
    let values = node_values(dag, &all_unknown);

    // a subexpression collapses to a number if no ESN feeds it and its
    // value fits a number node (compiled dags always fit; hand-built ones
    // may not and are left structural)
    let mut reducible = vec![false; n];
    for (i, node) in dag.nodes().iter().enumerate() {
        let evidence_free = match node {
            QNode::Esn { .. } => false,
            QNode::Num(_) => true,
            QNode::Mul(inputs) | QNode::Add(inputs) => {
                inputs.iter().all(|id| reducible[id.index()])
            }
        };
        reducible[i] = evidence_free && values[i] <= 1.0 + crate::dag::NUM_SLACK;
    }

    let mut reachable = vec![false; n];
    for id in dag.reachable_from_queries() {
        reachable[id.index()] = true;
    }
    // a node is emitted if a query points at it, it survives structurally,
    // or a surviving consumer reads its folded value
    let mut demanded = vec![false; n];
    for q in dag.queries() {
        demanded[q.node.index()] = true;
    }
    for (i, node) in dag.nodes().iter().enumerate() {
        if reachable[i] && !reducible[i] {
            demanded[i] = true;
            for id in node.inputs() {
                if reducible[id.index()] {
                    demanded[id.index()] = true;
                }
            }
        }
    }

    let mut builder = QDagBuilder::new(true);
    for v in dag.evidence_vars() {
        builder
            .declare_evidence_var(&v.name, &v.values)
            .expect("source dag had valid evidence variables");
    }
    let mut remap: Vec<Option<NodeId>> = vec![None; n];
    for i in 0..n {
        if !demanded[i] || !reachable[i] {
            continue;
        }
        let fresh = if reducible[i] {
            builder.num_clamped(values[i])
        } else {
            match dag.node(NodeId::new(i)) {
                QNode::Esn { var, value } => builder
                    .esn(*var, *value)
                    .expect("evidence variables were re-declared in order"),
                QNode::Mul(inputs) => {
                    let mapped: Vec<NodeId> =
                        inputs.iter().map(|id| remap[id.index()].unwrap()).collect();
                    builder.mul_simplified(&mapped)
                }
                QNode::Add(inputs) => {
                    let mapped: Vec<NodeId> =
                        inputs.iter().map(|id| remap[id.index()].unwrap()).collect();
                    match builder.add_simplified(&mapped) {
                        Ok(id) => id,
                        // constants summing past 1: keep the raw structure
                        Err(_) => builder.add_raw(mapped),
                    }
                }
                QNode::Num(_) => unreachable!("number nodes always reduce"),
            }
        };
        remap[i] = Some(fresh);
    }
    for q in dag.queries() {
        builder
            .mark_query(&q.variable, &q.value, remap[q.node.index()].unwrap())
            .expect("source dag had unique queries");
    }
    builder.finish()
}
