//! Exhaustive cross-checking of compiled dags against brute-force
//! enumeration.
//!
//! A sweep enumerates every evidence assignment the dag can receive — each
//! evidence variable runs over its values plus unknown — evaluates the dag,
//! and compares every query value against the enumeration oracle (or against
//! a second dag). The oracle side accumulates all assignments in one pass
//! over the joint table: a world `w` contributes `Pr(w)` to exactly those
//! assignments that agree with `w` or leave variables unknown.

use crate::dag::QDag;
use crate::eval::{evaluate, Evidence};
use crate::idx::Shape;
use crate::network::BeliefNetwork;
use crate::oracle::{self, OracleError};

/// Outcome of one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepReport {
    /// Evidence assignments enumerated.
    pub assignments: usize,
    /// Query values compared.
    pub comparisons: usize,
    /// Largest |dag - reference| seen.
    pub max_abs_dev: f64,
    /// Largest disagreement between per-variable normalizers Pr(e).
    pub max_normalizer_dev: f64,
}

/// Every evidence assignment of the dag, as slot vectors (None = unknown).
fn assignment_space(dag: &QDag) -> (Shape, Vec<usize>) {
    // radix per evidence variable: domain size + 1, the extra digit = unknown
    let cards: Vec<usize> = dag.evidence_vars().iter().map(|v| v.values.len() + 1).collect();
    let unknown_digit: Vec<usize> = dag.evidence_vars().iter().map(|v| v.values.len()).collect();
    (Shape::new(cards), unknown_digit)
}

fn to_evidence(dag: &QDag, digits: &[usize], unknown_digit: &[usize]) -> Evidence {
    let mut ev = Evidence::for_dag(dag);
    for (var, (&d, &u)) in digits.iter().zip(unknown_digit).enumerate() {
        ev.set_index(var, if d == u { None } else { Some(d) });
    }
    ev
}

/// Hard ceiling on accumulator cells (assignments x query values) so a
/// sweep refuses politely instead of exhausting memory.
pub const SWEEP_CELL_CAP: usize = 1 << 22;

/// Sweeps all evidence assignments of `dag`, comparing each query value to
/// the enumeration oracle on `bn`.
pub fn sweep_against_oracle(bn: &BeliefNetwork, dag: &QDag) -> Result<SweepReport, OracleError> {
    let (space, unknown_digit) = assignment_space(dag);
    // dag evidence variable -> network variable
    let net_var: Vec<usize> = dag
        .evidence_vars()
        .iter()
        .map(|v| bn.var_index(&v.name).expect("dag was compiled from this network"))
        .collect();
    let query_vars: Vec<usize> = dag
        .query_variables()
        .iter()
        .map(|name| bn.var_index(name).expect("dag was compiled from this network"))
        .collect();

    // oracle accumulator: per assignment, per query variable, per value
    let q_offsets: Vec<usize> = query_vars
        .iter()
        .scan(0usize, |acc, &v| {
            let start = *acc;
            *acc += bn.card(v);
            Some(start)
        })
        .collect();
    let width: usize = query_vars.iter().map(|&v| bn.card(v)).sum();
    let cells = space.len().saturating_mul(width);
    if cells > SWEEP_CELL_CAP {
        return Err(OracleError::StateSpaceTooLarge { states: cells, cap: SWEEP_CELL_CAP });
    }
    let mut truth = vec![0.0f64; cells];

    let world_shape = Shape::new((0..bn.variable_count()).map(|v| bn.card(v)).collect());
    let mut worlds: usize = 1;
    for &c in world_shape.cards() {
        worlds = worlds.saturating_mul(c);
    }
    if worlds > oracle::DEFAULT_STATE_CAP {
        return Err(OracleError::StateSpaceTooLarge {
            states: worlds,
            cap: oracle::DEFAULT_STATE_CAP,
        });
    }
    let masks = 1usize << net_var.len();
    let mut digits = vec![0usize; net_var.len()];
    for world in world_shape.assignments() {
        let p = oracle::joint(bn, &world);
        // distribute this world over every assignment consistent with it:
        // each evidence variable either carries its world value or unknown
        for mask in 0..masks {
            for (i, &v) in net_var.iter().enumerate() {
                digits[i] = if mask & (1 << i) != 0 { unknown_digit[i] } else { world[v] };
            }
            let base = space.index_of(&digits) * width;
            for (qi, &qv) in query_vars.iter().enumerate() {
                truth[base + q_offsets[qi] + world[qv]] += p;
            }
        }
    }

    let mut report = SweepReport {
        assignments: space.len(),
        comparisons: 0,
        max_abs_dev: 0.0,
        max_normalizer_dev: 0.0,
    };
    for digits in space.assignments() {
        let ev = to_evidence(dag, &digits, &unknown_digit);
        let values = evaluate(dag, &ev);
        let base = space.index_of(&digits) * width;

        let mut normalizers = vec![0.0f64; query_vars.len()];
        for (value, q) in values.iter().zip(dag.queries()) {
            let qv = bn.var_index(&q.variable).expect("query variable names the network");
            let vi = query_vars.iter().position(|&v| v == qv).unwrap();
            let val = bn.variables()[qv].value_index(&q.value).expect("query value in domain");
            let dev = (value - truth[base + q_offsets[vi] + val]).abs();
            report.max_abs_dev = report.max_abs_dev.max(dev);
            report.comparisons += 1;
            normalizers[vi] += value;
        }
        for w in &normalizers {
            report.max_normalizer_dev =
                report.max_normalizer_dev.max((w - normalizers[0]).abs());
        }
    }
    Ok(report)
}

/// Sweeps all evidence assignments, comparing two dags with identical
/// evidence declarations and query indexes (e.g. raw vs reduced).
pub fn sweep_pair(a: &QDag, b: &QDag) -> SweepReport {
    assert_eq!(a.evidence_vars(), b.evidence_vars(), "dags declare different evidence");
    assert_eq!(a.queries().len(), b.queries().len(), "dags answer different queries");
    let (space, unknown_digit) = assignment_space(a);
    let mut report = SweepReport {
        assignments: space.len(),
        comparisons: 0,
        max_abs_dev: 0.0,
        max_normalizer_dev: 0.0,
    };
    for digits in space.assignments() {
        let ev_a = to_evidence(a, &digits, &unknown_digit);
        let ev_b = to_evidence(b, &digits, &unknown_digit);
        for (x, y) in evaluate(a, &ev_a).iter().zip(evaluate(b, &ev_b)) {
            report.max_abs_dev = report.max_abs_dev.max((x - y).abs());
            report.comparisons += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile, reduce, CompileRequest};
    use crate::testnet::fork_abc;

    #[test]
    fn fork_dag_matches_the_oracle_everywhere() {
        let bn = fork_abc();
        let dag = compile(&bn, &CompileRequest::new(&["C"], &["B"])).unwrap();
        let report = sweep_against_oracle(&bn, &dag).unwrap();
        assert_eq!(report.assignments, 3); // ON, OFF, unknown
        assert_eq!(report.comparisons, 6);
        assert!(report.max_abs_dev <= 1e-9, "max dev {}", report.max_abs_dev);
    }

    #[test]
    fn raw_and_reduced_dags_agree_everywhere() {
        let bn = fork_abc();
        let raw =
            compile(&bn, &CompileRequest::new(&["B", "C"], &["A", "B"]).without_reduction())
                .unwrap();
        let reduced = reduce(&raw);
        let report = sweep_pair(&raw, &reduced);
        assert_eq!(report.assignments, 9);
        assert!(report.max_abs_dev <= 1e-9);
    }

    #[test]
    fn normalizers_agree_across_query_variables() {
        let bn = fork_abc();
        let dag = compile(&bn, &CompileRequest::new(&["C"], &["A", "B", "C"])).unwrap();
        let report = sweep_against_oracle(&bn, &dag).unwrap();
        assert!(report.max_normalizer_dev <= 1e-9);
        assert!(report.max_abs_dev <= 1e-9);
    }
}
