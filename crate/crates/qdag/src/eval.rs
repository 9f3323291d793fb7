//! The on-line runtime: plug evidence into a compiled dag and read the query
//! values back out.
//!
//! Two evaluation styles are provided. [`evaluate`] walks backward from the
//! query nodes, computing each reachable node once. [`Evaluator`] keeps every
//! node's value cached and propagates evidence changes forward along output
//! edges, so a single observation only recomputes the nodes downstream of the
//! flipped ESNs. Both agree exactly: a dirty node is always recomputed from
//! its inputs' cached values (never by dividing deltas back out, which breaks
//! down on zeros).

use crate::dag::{NodeId, QDag, QNode};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("`{0}` is not an evidence variable of this dag")]
    UnknownVariable(String),
    #[error("`{value}` is not a value of evidence variable `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("`{0}` is not a query variable of this dag")]
    UnknownQueryVariable(String),
    #[error("evidence has probability zero; no posterior exists")]
    InconsistentEvidence,
}

/// An assignment of every evidence variable to a value or to unknown.
///
/// `None` is the unknown value: the evidence says nothing about the
/// variable, and all of its ESNs read 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    values: Vec<Option<usize>>,
}

impl Evidence {
    /// Everything unknown.
    pub fn for_dag(dag: &QDag) -> Evidence {
        Evidence { values: vec![None; dag.evidence_vars().len()] }
    }

    /// Sets one variable by name; `None` marks it unknown.
    pub fn assign(
        &mut self,
        dag: &QDag,
        variable: &str,
        value: Option<&str>,
    ) -> Result<(), EvalError> {
        let (var, val) = resolve(dag, variable, value)?;
        self.values[var] = val;
        Ok(())
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.values[var]
    }

    pub fn slots(&self) -> &[Option<usize>] {
        &self.values
    }

    /// Index-addressed assignment. The value index is not checked against
    /// the variable's domain; prefer [`Evidence::assign`] for named access.
    pub fn set_index(&mut self, var: usize, value: Option<usize>) {
        self.values[var] = value;
    }

    fn esn_value(&self, var: usize, value: usize) -> f64 {
        match self.values[var] {
            None => 1.0,
            Some(v) if v == value => 1.0,
            Some(_) => 0.0,
        }
    }
}

fn resolve(
    dag: &QDag,
    variable: &str,
    value: Option<&str>,
) -> Result<(usize, Option<usize>), EvalError> {
    let var = dag
        .evidence_var_index(variable)
        .ok_or_else(|| EvalError::UnknownVariable(variable.to_string()))?;
    let val = match value {
        None => None,
        Some(v) => Some(dag.evidence_vars()[var].value_index(v).ok_or_else(|| {
            EvalError::UnknownValue { variable: variable.to_string(), value: v.to_string() }
        })?),
    };
    Ok((var, val))
}

fn node_value(node: &QNode, values: &[f64], evidence: &Evidence) -> f64 {
    match node {
        QNode::Num(p) => *p,
        QNode::Esn { var, value } => evidence.esn_value(*var, *value),
        QNode::Mul(inputs) => inputs.iter().map(|id| values[id.index()]).product(),
        QNode::Add(inputs) => inputs.iter().map(|id| values[id.index()]).sum(),
    }
}

/// Values of the query nodes, aligned with `dag.queries()`.
pub fn evaluate(dag: &QDag, evidence: &Evidence) -> Vec<f64> {
    evaluate_with_stats(dag, evidence).0
}

/// Instrumentation for one backward evaluation pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalStats {
    /// Nodes computed; equals the number of nodes reachable from the query
    /// nodes, each visited exactly once.
    pub visited: usize,
}

pub fn evaluate_with_stats(dag: &QDag, evidence: &Evidence) -> (Vec<f64>, EvalStats) {
    assert_eq!(
        evidence.values.len(),
        dag.evidence_vars().len(),
        "evidence was built for a different dag"
    );
    let reachable = dag.reachable_from_queries();
    let mut values = vec![0.0f64; dag.node_count()];
    for &id in &reachable {
        values[id.index()] = node_value(dag.node(id), &values, evidence);
    }
    let out = dag.queries().iter().map(|q| values[q.node.index()]).collect();
    (out, EvalStats { visited: reachable.len() })
}

/// Values of every node in the store (not just those the queries reach).
pub fn node_values(dag: &QDag, evidence: &Evidence) -> Vec<f64> {
    let mut values = vec![0.0f64; dag.node_count()];
    for i in 0..dag.node_count() {
        values[i] = node_value(dag.node(NodeId::new(i)), &values, evidence);
    }
    values
}

/// Pr(e) together with the normalized posterior of one query variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub pr_evidence: f64,
    /// (value name, posterior probability), in the variable's value order.
    pub posterior: Vec<(String, f64)>,
}

/// Normalizes the query-node values of `variable` into a posterior.
/// Pr(e) is the sum of the variable's query values.
pub fn marginal(dag: &QDag, evidence: &Evidence, variable: &str) -> Result<Marginal, EvalError> {
    let values = evaluate(dag, evidence);
    marginal_from_values(dag, &values, variable)
}

fn marginal_from_values(
    dag: &QDag,
    query_values: &[f64],
    variable: &str,
) -> Result<Marginal, EvalError> {
    let entries: Vec<(usize, &crate::dag::Query)> = dag
        .queries()
        .iter()
        .enumerate()
        .filter(|(_, q)| q.variable == variable)
        .collect();
    if entries.is_empty() {
        return Err(EvalError::UnknownQueryVariable(variable.to_string()));
    }
    let pr_evidence: f64 = entries.iter().map(|(i, _)| query_values[*i]).sum();
    if pr_evidence == 0.0 {
        return Err(EvalError::InconsistentEvidence);
    }
    Ok(Marginal {
        pr_evidence,
        posterior: entries
            .iter()
            .map(|(i, q)| (q.value.clone(), query_values[*i] / pr_evidence))
            .collect(),
    })
}

/// Outcome of one incremental evidence update.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// Indices into `dag.queries()` whose cached value changed.
    pub changed_queries: Vec<usize>,
    /// Nodes whose value was recomputed during the update.
    pub recomputed: usize,
}

/// Event-driven evaluator: caches a value per node and pushes changes
/// forward from flipped ESNs along output edges.
///
/// Many evaluators may share one dag; each evaluator is single-owner.
pub struct Evaluator<'d> {
    dag: &'d QDag,
    evidence: Evidence,
    values: Vec<f64>,
    consumers: Vec<Vec<u32>>,
    esns_of_var: Vec<Vec<u32>>,
    queries_at: Vec<Vec<u32>>, // node index -> query indices rooted there
    in_heap: Vec<bool>,
}

impl<'d> Evaluator<'d> {
    /// Starts with every evidence variable unknown.
    pub fn new(dag: &'d QDag) -> Evaluator<'d> {
        let n = dag.node_count();
        let mut consumers: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut esns_of_var: Vec<Vec<u32>> = vec![Vec::new(); dag.evidence_vars().len()];
        for (i, node) in dag.nodes().iter().enumerate() {
            for id in node.inputs() {
                consumers[id.index()].push(i as u32);
            }
            if let QNode::Esn { var, .. } = node {
                esns_of_var[*var].push(i as u32);
            }
        }
        for c in &mut consumers {
            c.dedup();
        }
        let mut queries_at: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (qi, q) in dag.queries().iter().enumerate() {
            queries_at[q.node.index()].push(qi as u32);
        }
        let evidence = Evidence::for_dag(dag);
        let values = node_values(dag, &evidence);
        Evaluator {
            dag,
            evidence,
            values,
            consumers,
            esns_of_var,
            queries_at,
            in_heap: vec![false; n],
        }
    }

    pub fn dag(&self) -> &QDag {
        self.dag
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn value(&self, node: NodeId) -> f64 {
        self.values[node.index()]
    }

    /// Cached query values, aligned with `dag.queries()`.
    pub fn query_values(&self) -> Vec<f64> {
        self.dag.queries().iter().map(|q| self.values[q.node.index()]).collect()
    }

    pub fn marginal(&self, variable: &str) -> Result<Marginal, EvalError> {
        marginal_from_values(self.dag, &self.query_values(), variable)
    }

    /// Sets one evidence variable by name (`None` = unknown) and propagates.
    pub fn set(&mut self, variable: &str, value: Option<&str>) -> Result<Propagation, EvalError> {
        let (var, val) = resolve(self.dag, variable, value)?;
        Ok(self.set_index(var, val))
    }

    /// Same as [`Evaluator::set`], addressing the variable by index.
    pub fn set_index(&mut self, var: usize, value: Option<usize>) -> Propagation {
        if self.evidence.values[var] == value {
            return Propagation { changed_queries: Vec::new(), recomputed: 0 };
        }
        self.evidence.set_index(var, value);

        let mut heap: BinaryHeap<Reverse<u32>> = BinaryHeap::new();
        let mut changed_nodes: Vec<u32> = Vec::new();
        let mut recomputed = 0usize;

        // only this variable's ESNs can flip
        for &esn in &self.esns_of_var[var] {
            let node = self.dag.node(NodeId::new(esn as usize));
            let fresh = node_value(node, &self.values, &self.evidence);
            recomputed += 1;
            if fresh != self.values[esn as usize] {
                self.values[esn as usize] = fresh;
                changed_nodes.push(esn);
                for &c in &self.consumers[esn as usize] {
                    if !self.in_heap[c as usize] {
                        self.in_heap[c as usize] = true;
                        heap.push(Reverse(c));
                    }
                }
            }
        }

        // recompute in id order: ids are topological ranks, so every node
        // settles after a single visit
        while let Some(Reverse(i)) = heap.pop() {
            self.in_heap[i as usize] = false;
            let fresh = node_value(self.dag.node(NodeId::new(i as usize)), &self.values, &self.evidence);
            recomputed += 1;
            if fresh != self.values[i as usize] {
                self.values[i as usize] = fresh;
                changed_nodes.push(i);
                for &c in &self.consumers[i as usize] {
                    if !self.in_heap[c as usize] {
                        self.in_heap[c as usize] = true;
                        heap.push(Reverse(c));
                    }
                }
            }
        }

        let mut changed_queries: Vec<usize> = changed_nodes
            .iter()
            .flat_map(|&i| self.queries_at[i as usize].iter().map(|&q| q as usize))
            .collect();
        changed_queries.sort_unstable();
        Propagation { changed_queries, recomputed }
    }
}
