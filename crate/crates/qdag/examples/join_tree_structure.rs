//! Peek at the secondary structure the compiler builds: moral graph,
//! triangulation cliques, join tree and table placement.
//!
//! ```bash
//! cargo run --example join_tree_structure
//! ```

use qdag::{build_join_tree, moralize, place_tables, triangulate, BeliefNetwork};

const NETWORK: &str = "
network diamond
variable A { t f }
variable B { t f }
variable C { t f }
variable D { t f }
variable E { t f }
cpt A { .5 .5 }
cpt B | A { t : .7 .3  f : .2 .8 }
cpt C | A { t : .6 .4  f : .1 .9 }
cpt D | B C {
  t t : .99 .01
  t f : .7  .3
  f t : .6  .4
  f f : .05 .95
}
cpt E | D { t : .8 .2  f : .3 .7 }
";

fn main() {
    let bn = BeliefNetwork::parse(NETWORK).unwrap();
    let name = |v: usize| bn.variables()[v].name.as_str();
    let set =
        |s: &std::collections::BTreeSet<usize>| {
            s.iter().map(|&v| name(v)).collect::<Vec<_>>().join(" ")
        };

    let moral = moralize(&bn);
    println!("moral graph edges:");
    for (u, v) in moral.edges() {
        println!("  {} - {}", name(u), name(v));
    }

    let triangulation = triangulate(&moral);
    let order: Vec<&str> = triangulation.order.iter().map(|&v| name(v)).collect();
    println!("\nelimination order: {}", order.join(", "));
    println!("fill-in edges: {}", triangulation.chordal.edge_count() - moral.edge_count());
    println!("maximal cliques:");
    for clique in &triangulation.cliques {
        println!("  {{{}}}", set(clique));
    }

    let tree = build_join_tree(&triangulation.cliques);
    println!("\njoin tree edges:");
    for (a, b, sep) in &tree.edges {
        println!("  {{{}}} - {{{}}} over {{{}}}", set(&tree.clusters[*a]), set(&tree.clusters[*b]), set(sep));
    }
    assert!(tree.satisfies_running_intersection());

    let evidence: Vec<usize> = vec![bn.var_index("E").unwrap()];
    let placement = place_tables(&tree, &bn, &evidence);
    println!("\ntable placement:");
    for v in 0..bn.variable_count() {
        println!("  Pr({}) -> {{{}}}", name(v), set(&tree.clusters[placement.cpt_cluster[v]]));
    }
    for (v, c) in &placement.lambda_cluster {
        println!("  evidence indicators for {} -> {{{}}}", name(*v), set(&tree.clusters[*c]));
    }
}
