//! Command-line front end: compile networks off-line, evaluate compiled
//! dags on-line, and cross-check against brute-force enumeration.

use clap::{Args, Parser, Subcommand};
use qdag::{
    compile, compile_full, evaluate, reduce, BeliefNetwork, CompileRequest, Evaluator, Evidence,
    QDag, UNKNOWN_MARKER,
};
use std::io::{BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Prints one line, exiting quietly if the reader went away (broken pipe).
macro_rules! outln {
    ($($arg:tt)*) => {{
        let mut out = std::io::stdout().lock();
        if out.write_fmt(format_args!($($arg)*)).is_err()
            || out.write_all(b"\n").is_err()
        {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "qdag", version, about = "Compile belief networks into query dags and evaluate them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RequestArgs {
    /// Network file to compile.
    #[arg(long)]
    network: PathBuf,
    /// Variable that may receive evidence on-line (repeatable).
    #[arg(long = "evidence")]
    evidence: Vec<String>,
    /// Variable whose distribution the dag answers (repeatable; all
    /// variables when omitted).
    #[arg(long = "query")]
    query: Vec<String>,
    /// Keep raw operation structure: no constant folding in the node
    /// constructors.
    #[arg(long)]
    no_fold: bool,
    /// Skip the reduction pass that collapses evidence-independent
    /// subexpressions.
    #[arg(long)]
    no_reduce: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a network into a query-dag file.
    Compile {
        #[command(flatten)]
        request: RequestArgs,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a compiled dag under evidence and print Pr(x, e) per query.
    Eval {
        /// Compiled dag file.
        qdag: PathBuf,
        /// Observe a variable, e.g. --set C=ON (repeatable). Unmentioned
        /// evidence variables stay unknown.
        #[arg(long = "set")]
        set: Vec<String>,
        /// Explicitly mark a variable unknown (repeatable).
        #[arg(long = "unknown")]
        unknown: Vec<String>,
        /// Also print Pr(e) and normalized posteriors.
        #[arg(long)]
        normalize: bool,
    },
    /// Compile and sweep every evidence assignment against brute-force
    /// enumeration.
    Verify {
        #[command(flatten)]
        request: RequestArgs,
        /// Largest acceptable |dag - enumeration| deviation.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Print node statistics of a dag file, or cluster and dag statistics
    /// for a network.
    Stats {
        /// Compiled dag file.
        qdag: Option<PathBuf>,
        /// Network file to analyze instead of a dag file.
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long = "evidence")]
        evidence: Vec<String>,
        #[arg(long = "query")]
        query: Vec<String>,
    },
    /// Interactively set and unset evidence on a compiled dag; changed
    /// posteriors reprint after each command.
    Repl {
        /// Compiled dag file.
        qdag: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Compile { request, output } => {
            let (_, dag) = compile_from_args(&request)?;
            let text = dag.to_text();
            match output {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => {
                    if std::io::stdout().lock().write_all(text.as_bytes()).is_err() {
                        std::process::exit(0);
                    }
                }
            }
            Ok(())
        }
        Command::Eval { qdag, set, unknown, normalize } => {
            let dag = load_dag(&qdag)?;
            let mut ev = Evidence::for_dag(&dag);
            apply_evidence_flags(&dag, &mut ev, &set, &unknown)?;
            let values = evaluate(&dag, &ev);
            if normalize {
                for variable in dag.query_variables() {
                    let m = qdag::marginal(&dag, &ev, variable).map_err(|e| e.to_string())?;
                    outln!("Pr(e) = {}", m.pr_evidence);
                    for (value, p) in &m.posterior {
                        outln!("{variable} {value} {p}");
                    }
                }
            } else {
                for (q, v) in dag.queries().iter().zip(values) {
                    outln!("{} {} {}", q.variable, q.value, v);
                }
            }
            Ok(())
        }
        Command::Verify { request, tolerance } => {
            let (bn, dag) = compile_from_args(&request)?;
            let report = qdag::sweep_against_oracle(&bn, &dag).map_err(|e| e.to_string())?;
            outln!(
                "assignments {}  comparisons {}  max abs deviation {:e}",
                report.assignments, report.comparisons, report.max_abs_dev
            );
            if report.max_abs_dev > tolerance {
                return Err(format!(
                    "max deviation {:e} exceeds tolerance {tolerance:e}",
                    report.max_abs_dev
                ));
            }
            outln!("ok (tolerance {tolerance:e})");
            Ok(())
        }
        Command::Stats { qdag, network, evidence, query } => match (qdag, network) {
            (Some(path), None) => {
                print_dag_stats(&load_dag(&path)?);
                Ok(())
            }
            (None, Some(network)) => {
                let request =
                    RequestArgs { network, evidence, query, no_fold: false, no_reduce: false };
                let bn = load_network(&request.network)?;
                let req = build_request(&bn, &request);
                let compilation = compile_full(&bn, &req).map_err(|e| e.to_string())?;
                outln!("clusters {}", compilation.tree.cluster_count());
                for (i, cluster) in compilation.tree.clusters.iter().enumerate() {
                    let names: Vec<&str> =
                        cluster.iter().map(|&v| bn.variables()[v].name.as_str()).collect();
                    outln!("  {i}: {{{}}} size {}", names.join(" "), cluster.len());
                }
                for (a, b, sep) in &compilation.tree.edges {
                    let names: Vec<&str> =
                        sep.iter().map(|&v| bn.variables()[v].name.as_str()).collect();
                    outln!("edge {a}-{b} separator {{{}}} size {}", names.join(" "), sep.len());
                }
                print_dag_stats(&reduce(&compilation.qdag));
                Ok(())
            }
            _ => Err("stats needs exactly one of: a dag file, or --network".into()),
        },
        Command::Repl { qdag } => {
            let dag = load_dag(&qdag)?;
            repl(&dag)
        }
    }
}

fn load_network(path: &Path) -> Result<BeliefNetwork, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let bn = BeliefNetwork::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = bn.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(format!("{} is invalid:\n  {}", path.display(), lines.join("\n  ")));
    }
    Ok(bn)
}

fn load_dag(path: &Path) -> Result<QDag, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    QDag::from_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn build_request(bn: &BeliefNetwork, args: &RequestArgs) -> CompileRequest {
    let query: Vec<String> = if args.query.is_empty() {
        bn.variables().iter().map(|v| v.name.clone()).collect()
    } else {
        args.query.clone()
    };
    CompileRequest {
        evidence: args.evidence.clone(),
        query,
        fold_constants: !args.no_fold,
        reduce: !args.no_reduce,
    }
}

fn compile_from_args(args: &RequestArgs) -> Result<(BeliefNetwork, QDag), String> {
    let bn = load_network(&args.network)?;
    let req = build_request(&bn, args);
    let dag = compile(&bn, &req).map_err(|e| e.to_string())?;
    Ok((bn, dag))
}

fn apply_evidence_flags(
    dag: &QDag,
    ev: &mut Evidence,
    set: &[String],
    unknown: &[String],
) -> Result<(), String> {
    for s in set {
        let (var, val) = s
            .split_once('=')
            .ok_or_else(|| format!("--set expects Var=value, got `{s}`"))?;
        let value = if val == UNKNOWN_MARKER { None } else { Some(val) };
        ev.assign(dag, var, value).map_err(|e| e.to_string())?;
    }
    for var in unknown {
        ev.assign(dag, var, None).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn print_dag_stats(dag: &QDag) {
    let stats = dag.stats();
    outln!("nodes {}", stats.total_nodes());
    outln!("  num {}", stats.num_nodes);
    outln!("  esn {}", stats.esn_nodes);
    outln!("  mul {}", stats.mul_nodes);
    outln!("  add {}", stats.add_nodes);
    outln!("edges {}", stats.edges);
    outln!("max depth {}", stats.max_depth);
    outln!("queries {}", stats.queries);
    outln!("evidence vars {}", dag.evidence_vars().len());
    for (name, count) in &stats.esn_per_var {
        outln!("  {name}: {count} esns");
    }
}

fn repl(dag: &QDag) -> Result<(), String> {
    let mut state = Evaluator::new(dag);
    let stdin = std::io::stdin();
    let interactive = stdin.is_terminal();
    let mut out = std::io::stdout();
    if interactive {
        outln!("commands: set Var=value | unset Var | show | quit");
    }
    loop {
        if interactive {
            let _ = write!(out, "> ");
            let _ = out.flush();
        }
        let mut line = String::new();
        if stdin.lock().read_line(&mut line).map_err(|e| e.to_string())? == 0 {
            return Ok(()); // EOF
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (cmd, rest) = match line.split_once(char::is_whitespace) {
            Some((c, r)) => (c, r.trim()),
            None => (line, ""),
        };
        match cmd {
            "quit" => return Ok(()),
            "show" => {
                for (var, slot) in dag.evidence_vars().iter().zip(state.evidence().slots()) {
                    let value = match slot {
                        Some(v) => var.values[*v].as_str(),
                        None => UNKNOWN_MARKER,
                    };
                    outln!("evidence {} = {}", var.name, value);
                }
                print_posteriors(&state, &dag.query_variables());
            }
            "set" => {
                let Some((var, val)) = rest.split_once('=') else {
                    eprintln!("set expects Var=value");
                    continue;
                };
                let value = if val == UNKNOWN_MARKER { None } else { Some(val) };
                match state.set(var.trim(), value) {
                    Ok(p) => print_changed(&state, &p),
                    Err(e) => eprintln!("{e}"),
                }
            }
            "unset" => match state.set(rest, None) {
                Ok(p) => print_changed(&state, &p),
                Err(e) => eprintln!("{e}"),
            },
            other => eprintln!("unknown command `{other}`"),
        }
    }
}

fn print_changed(state: &Evaluator, p: &qdag::Propagation) {
    let mut variables: Vec<&str> = Vec::new();
    for &qi in &p.changed_queries {
        let v = state.dag().queries()[qi].variable.as_str();
        if !variables.contains(&v) {
            variables.push(v);
        }
    }
    if variables.is_empty() {
        outln!("(no change, {} nodes recomputed)", p.recomputed);
    } else {
        print_posteriors(state, &variables);
    }
}

fn print_posteriors(state: &Evaluator, variables: &[&str]) {
    for variable in variables {
        match state.marginal(variable) {
            Ok(m) => {
                outln!("Pr(e) = {}", m.pr_evidence);
                for (value, p) in &m.posterior {
                    outln!("{variable} {value} {p}");
                }
            }
            Err(e) => outln!("{variable}: {e}"),
        }
    }
}
