//! The two-phase split: compile off-line, ship a text artifact, evaluate
//! on-line with nothing but the artifact.
//!
//! ```bash
//! cargo run --example offline_online
//! ```

use qdag::{compile, evaluate, BeliefNetwork, CompileRequest, Evidence, QDag};

const NETWORK: &str = "
network pump
variable Voltage { ok low }
variable Pump { runs stalls }
variable FlowSensor { flow none }
cpt Voltage { .9 .1 }
cpt Pump | Voltage {
  ok  : .98 .02
  low : .55 .45
}
cpt FlowSensor | Pump {
  runs   : .95 .05
  stalls : .02 .98
}
";

fn main() {
    // off-line: a workstation compiles the network and writes the artifact
    let bn = BeliefNetwork::parse(NETWORK).unwrap();
    let dag = compile(&bn, &CompileRequest::new(&["FlowSensor"], &["Pump"])).unwrap();
    let artifact = std::env::temp_dir().join("pump.qdag");
    std::fs::write(&artifact, dag.to_text()).unwrap();
    println!("wrote {} ({} nodes)", artifact.display(), dag.node_count());
    println!("--- artifact ---\n{}----------------\n", dag.to_text());

    // on-line: the target loads the artifact; no network, no compiler
    let text = std::fs::read_to_string(&artifact).unwrap();
    let loaded = QDag::from_text(&text).unwrap();
    assert_eq!(loaded, dag);

    for observation in [Some("flow"), Some("none"), None] {
        let mut evidence = Evidence::for_dag(&loaded);
        evidence.assign(&loaded, "FlowSensor", observation).unwrap();
        let values = evaluate(&loaded, &evidence);
        println!(
            "FlowSensor = {:7}: Pr(Pump=runs, e) = {:.5}, Pr(Pump=stalls, e) = {:.5}",
            observation.unwrap_or("unknown"),
            values[0],
            values[1]
        );
    }
}
