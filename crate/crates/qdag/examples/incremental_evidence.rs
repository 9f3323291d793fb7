//! Event-driven updates: observations arrive one at a time and only the
//! affected nodes recompute.
//!
//! ```bash
//! cargo run --example incremental_evidence
//! ```

use qdag::{compile, BeliefNetwork, CompileRequest, Evaluator};

const NETWORK: &str = "
network monitors
variable Fault { none sensor pump }
variable Pressure { ok low }
variable Temperature { ok high }
variable Vibration { ok high }
cpt Fault { .9 .06 .04 }
cpt Pressure | Fault {
  none   : .98 .02
  sensor : .60 .40
  pump   : .15 .85
}
cpt Temperature | Fault {
  none   : .95 .05
  sensor : .80 .20
  pump   : .30 .70
}
cpt Vibration | Fault {
  none   : .97 .03
  sensor : .90 .10
  pump   : .20 .80
}
";

fn main() {
    let bn = BeliefNetwork::parse(NETWORK).unwrap();
    let sensors = ["Pressure", "Temperature", "Vibration"];
    let dag = compile(&bn, &CompileRequest::new(&sensors, &["Fault"])).unwrap();
    println!("dag has {} nodes\n", dag.node_count());

    let mut state = Evaluator::new(&dag);
    let readings: [(&str, Option<&str>); 5] = [
        ("Pressure", Some("low")),
        ("Temperature", Some("high")),
        ("Temperature", Some("high")), // repeated reading: nothing to do
        ("Vibration", Some("high")),
        ("Pressure", None), // sensor dropout: back to unknown
    ];

    print_fault(&state);
    for (variable, value) in readings {
        let outcome = state.set(variable, value).unwrap();
        println!(
            "set {variable} = {:7} -> {} nodes recomputed, {} query values changed",
            value.unwrap_or("unknown"),
            outcome.recomputed,
            outcome.changed_queries.len()
        );
        print_fault(&state);
    }
}

fn print_fault(state: &Evaluator) {
    match state.marginal("Fault") {
        Ok(m) => {
            let rendered: Vec<String> =
                m.posterior.iter().map(|(v, p)| format!("{v} {p:.4}")).collect();
            println!("  Fault | e : {}  (Pr(e) = {:.5})\n", rendered.join(", "), m.pr_evidence);
        }
        Err(e) => println!("  {e}\n"),
    }
}
