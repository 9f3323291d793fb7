//! What the backend switches buy: constant folding inside the constructors,
//! the post-pass that collapses evidence-independent regions, and how node
//! creation compares to the arithmetic a numeric inference pass performs.
//!
//! ```bash
//! cargo run --example reduction_and_node_counts
//! ```

use qdag::{compile_full, numeric_reference, reduce, BeliefNetwork, CompileRequest};

const NETWORK: &str = "
network ladder
variable A { t f }
variable B { t f }
variable C { t f }
variable D { t f }
variable E { t f }
variable F { t f }
cpt A { .3 .7 }
cpt B | A { t : .9 .1  f : .4 .6 }
cpt C | B { t : .8 .2  f : .3 .7 }
cpt D | C { t : .7 .3  f : .2 .8 }
cpt E | D { t : .6 .4  f : .1 .9 }
cpt F | E { t : .55 .45  f : .15 .85 }
";

fn main() {
    let bn = BeliefNetwork::parse(NETWORK).unwrap();
    // one observable in the middle, queries at both ends
    let base = CompileRequest::new(&["D"], &["A", "F"]);

    println!("{:<28} {:>6} {:>6} {:>6} {:>6} {:>7}", "variant", "num", "esn", "mul", "add", "total");
    for (label, request, reduced) in [
        ("raw (no folding)", base.clone().without_folding().without_reduction(), false),
        ("folded", base.clone().without_reduction(), false),
        ("folded + reduced", base.clone().without_reduction(), true),
    ] {
        let c = compile_full(&bn, &request).unwrap();
        let dag = if reduced { reduce(&c.qdag) } else { c.qdag };
        let s = dag.stats();
        println!(
            "{label:<28} {:>6} {:>6} {:>6} {:>6} {:>7}",
            s.num_nodes,
            s.esn_nodes,
            s.mul_nodes,
            s.add_nodes,
            s.total_nodes()
        );
    }

    // node creation is bounded by the arithmetic of one numeric pass
    let raw = base.clone().without_folding().without_reduction();
    let c = compile_full(&bn, &raw).unwrap();
    let run = numeric_reference(&bn, &raw, &vec![None; bn.variable_count()]).unwrap();
    println!(
        "\ncompiler created {} * nodes and {} + nodes",
        c.mul_nodes_created, c.add_nodes_created
    );
    println!(
        "numeric inference performed {} multiplications and {} additions",
        run.mul_ops, run.add_ops
    );
    assert!(c.mul_nodes_created <= run.mul_ops);
    assert!(c.add_nodes_created <= run.add_ops);

    // the numeric pass answers the same queries, a useful cross-check
    println!("\nnumeric answers with everything unknown:");
    for (var, values) in &run.answers {
        let name = &bn.variables()[*var].name;
        let rendered: Vec<String> = bn.variables()[*var]
            .values
            .iter()
            .zip(values)
            .map(|(v, p)| format!("{v} {p:.4}"))
            .collect();
        println!("  {name}: {}", rendered.join(", "));
    }
}
