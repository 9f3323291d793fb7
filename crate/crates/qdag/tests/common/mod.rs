#![allow(dead_code)] // each test binary uses its own slice of this module

//! Shared fixtures for the integration suites: the worked three-variable
//! fork network and a seeded random-network corpus.

use qdag::{BeliefNetwork, NetworkBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FORK_TEXT: &str = "\
network fork
variable A { ON OFF }
variable B { ON OFF }
variable C { ON OFF }
cpt A { .3 .7 }
cpt B | A {
  ON : .25 .75
  OFF : .8 .2
}
cpt C | A {
  ON : .9 .1
  OFF : .5 .5
}
";

pub fn fork() -> BeliefNetwork {
    BeliefNetwork::parse(FORK_TEXT).unwrap()
}

/// Joint state-space ceiling for generated networks; keeps enumeration fast.
const STATE_CAP: usize = 4096;

/// A random network: up to 12 variables with 2-3 values each, a sparse
/// random DAG (at most 3 parents), and random normalized CPTs with an
/// occasional structural zero.
pub fn random_network(seed: u64) -> BeliefNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = rng.gen_range(1..=12);
    let mut cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
    while cards.iter().product::<usize>() > STATE_CAP {
        let i = rng.gen_range(0..n);
        cards[i] = 2;
    }

    let mut b = NetworkBuilder::new(&format!("random{seed}"));
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let value_names = ["a", "b", "c"];
    for (name, &card) in names.iter().zip(&cards) {
        b.variable(name, &value_names[..card]).unwrap();
    }

    for child in 0..n {
        let mut parents: Vec<usize> = Vec::new();
        let take = if child == 0 { 0.0 } else { (1.2 / child as f64).min(0.5) };
        for candidate in 0..child {
            if parents.len() < 3 && rng.gen_bool(take) {
                parents.push(candidate);
            }
        }
        let row_count: usize = parents.iter().map(|&p| cards[p]).product();
        let rows: Vec<Vec<f64>> =
            (0..row_count).map(|_| random_row(&mut rng, cards[child])).collect();
        let parent_names: Vec<&str> = parents.iter().map(|&p| names[p].as_str()).collect();
        b.cpt(&names[child], &parent_names, rows).unwrap();
    }
    let bn = b.finish().unwrap();
    assert!(bn.validate().is_empty(), "generated network must be valid");
    bn
}

fn random_row(rng: &mut ChaCha8Rng, card: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
    // sprinkle in hard zeros so annihilation paths get exercised
    if card > 1 && rng.gen_bool(0.05) {
        let i = rng.gen_range(0..card);
        row[i] = 0.0;
    }
    let sum: f64 = row.iter().sum();
    for p in &mut row {
        *p /= sum;
    }
    row
}

/// The seeded corpus shared by the property and acceptance suites.
pub fn corpus(count: u64) -> Vec<BeliefNetwork> {
    (0..count).map(random_network).collect()
}

/// All subsets of 0..n with at most `k` elements (including the empty set).
pub fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(n <= 16, "subset enumeration is for small variable counts");
    (0u32..(1u32 << n))
        .filter(|mask| (mask.count_ones() as usize) <= k)
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Variable names for a set of indices.
pub fn names_of(bn: &BeliefNetwork, vars: &[usize]) -> Vec<String> {
    vars.iter().map(|&v| bn.variables()[v].name.clone()).collect()
}
