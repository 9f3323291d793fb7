//! Compile a small network and answer queries under different evidence.
//!
//! ```bash
//! cargo run --example compile_and_evaluate
//! ```

use qdag::{compile, evaluate, BeliefNetwork, CompileRequest, Evidence};

const NETWORK: &str = "
network sprinkler
variable Rain { yes no }
variable Sprinkler { on off }
variable GrassWet { yes no }
cpt Rain { .2 .8 }
cpt Sprinkler | Rain {
  yes : .01 .99
  no  : .4  .6
}
cpt GrassWet | Rain Sprinkler {
  yes on  : .99 .01
  yes off : .8  .2
  no  on  : .9  .1
  no  off : .05 .95
}
";

fn main() {
    let bn = BeliefNetwork::parse(NETWORK).expect("network parses");

    // GrassWet is observable; we care about Rain and Sprinkler.
    let request = CompileRequest::new(&["GrassWet"], &["Rain", "Sprinkler"]);
    let dag = compile(&bn, &request).expect("network compiles");
    println!(
        "compiled {} nodes answering {} queries\n",
        dag.node_count(),
        dag.queries().len()
    );

    for observation in [None, Some("yes"), Some("no")] {
        let mut evidence = Evidence::for_dag(&dag);
        evidence.assign(&dag, "GrassWet", observation).unwrap();
        let shown = observation.unwrap_or("unknown");
        println!("GrassWet = {shown}");

        // raw query values are joint probabilities Pr(x, e)
        for (query, value) in dag.queries().iter().zip(evaluate(&dag, &evidence)) {
            println!("  Pr({} = {}, e) = {value:.6}", query.variable, query.value);
        }
        // normalized posteriors divide out Pr(e)
        for variable in dag.query_variables() {
            let m = qdag::marginal(&dag, &evidence, variable).unwrap();
            let rendered: Vec<String> = m
                .posterior
                .iter()
                .map(|(value, p)| format!("{value} {p:.4}"))
                .collect();
            println!("  {variable} | e : {}", rendered.join(", "));
        }
        println!();
    }
}
