//! Exact inference by brute-force joint enumeration.
//!
//! This is the ground truth the compiled evaluators are checked against, so
//! it deliberately shares nothing with the cluster-tree machinery: plain
//! nested loops over complete instantiations, nothing else.

use crate::idx::Shape;
use crate::network::BeliefNetwork;
use thiserror::Error;

/// Largest joint state space the enumerator will walk. Anything bigger is
/// refused rather than silently taking forever.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("joint state space has {states} instantiations, above the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },
}

/// Probability of one complete instantiation: the chain-rule product of the
/// matching CPT entries.
pub fn joint(bn: &BeliefNetwork, world: &[usize]) -> f64 {
    debug_assert_eq!(world.len(), bn.variable_count());
    let mut p = 1.0;
    for var in 0..bn.variable_count() {
        let cpt = bn.cpt(var);
        let parent_values: Vec<usize> = cpt.parents.iter().map(|&q| world[q]).collect();
        p *= bn.cpt_entry(var, &parent_values, world[var]);
    }
    p
}

fn joint_shape(bn: &BeliefNetwork) -> Shape {
    Shape::new((0..bn.variable_count()).map(|v| bn.card(v)).collect())
}

fn check_cap(bn: &BeliefNetwork, cap: usize) -> Result<Shape, OracleError> {
    let shape = joint_shape(bn);
    let mut states: usize = 1;
    for &c in shape.cards() {
        states = match states.checked_mul(c) {
            Some(s) if s <= cap => s,
            _ => return Err(OracleError::StateSpaceTooLarge { states: usize::MAX, cap }),
        };
    }
    if states > cap {
        return Err(OracleError::StateSpaceTooLarge { states, cap });
    }
    Ok(shape)
}

/// Pr(x, e) for every value x of `target`, by summing the joint over all
/// completions consistent with the partial instantiation `evidence`
/// (None = unobserved).
pub fn query(
    bn: &BeliefNetwork,
    evidence: &[Option<usize>],
    target: usize,
) -> Result<Vec<f64>, OracleError> {
    let per_var = marginals(bn, evidence)?;
    Ok(per_var.into_iter().nth(target).unwrap())
}

/// Pr(x, e) for every variable and value at once, in a single sweep.
pub fn marginals(
    bn: &BeliefNetwork,
    evidence: &[Option<usize>],
) -> Result<Vec<Vec<f64>>, OracleError> {
    marginals_capped(bn, evidence, DEFAULT_STATE_CAP)
}

pub fn marginals_capped(
    bn: &BeliefNetwork,
    evidence: &[Option<usize>],
    cap: usize,
) -> Result<Vec<Vec<f64>>, OracleError> {
    debug_assert_eq!(evidence.len(), bn.variable_count());
    let shape = check_cap(bn, cap)?;
    let mut acc: Vec<Vec<f64>> =
        (0..bn.variable_count()).map(|v| vec![0.0; bn.card(v)]).collect();
    'world: for world in shape.assignments() {
        for (v, &observed) in evidence.iter().enumerate() {
            if let Some(val) = observed {
                if world[v] != val {
                    continue 'world;
                }
            }
        }
        let p = joint(bn, &world);
        for (v, &val) in world.iter().enumerate() {
            acc[v][val] += p;
        }
    }
    Ok(acc)
}
