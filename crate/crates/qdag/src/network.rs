//! Discrete belief networks: variables, directed structure and conditional
//! probability tables, plus the text format they are written in.
//!
//! A network is immutable once built. Structural rules (names resolve, every
//! variable has one table of the right arity) are enforced at construction;
//! semantic rules (rows normalized, graph acyclic) are reported by
//! [`BeliefNetwork::validate`] as data rather than failures, so that tools can
//! show all problems at once.

use crate::idx::Shape;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Sentinel token for "no evidence about this variable". Rejected as a value
/// name so it can never collide with a real value.
pub const UNKNOWN_MARKER: &str = "*UNKNOWN*";

/// Tolerance for CPT row normalization checks.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A discrete variable and its ordered value domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// Conditional probability table for one variable.
///
/// `rows` has one entry per instantiation of `parents` (leftmost parent
/// varying slowest); each row holds one probability per child value.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub child: usize,
    pub parents: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

/// An immutable discrete belief network.
///
/// The directed structure is implied by the tables: there is an edge P -> X
/// exactly when P appears among the parents of X's table.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefNetwork {
    name: String,
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

/// A single rule violation found by [`BeliefNetwork::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowNotNormalized { variable: String, row: usize, sum: f64 },
    ProbabilityOutOfRange { variable: String, row: usize, value: f64 },
    Cycle { variables: Vec<String> },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RowNotNormalized { variable, row, sum } => {
                write!(f, "cpt {variable}: row {row} sums to {sum}, expected 1")
            }
            Violation::ProbabilityOutOfRange { variable, row, value } => {
                write!(f, "cpt {variable}: row {row} contains {value}, outside [0, 1]")
            }
            Violation::Cycle { variables } => {
                write!(f, "directed structure is cyclic; involved: {}", variables.join(", "))
            }
        }
    }
}

/// Errors raised while building or parsing a network.
#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: `{value}` is not a value of variable `{variable}`")]
    UnknownValue { line: usize, variable: String, value: String },
    #[error("line {line}: cpt for `{variable}` row has {got} entries, expected {expected}")]
    RowArity { line: usize, variable: String, got: usize, expected: usize },
    #[error("invalid identifier `{0}`")]
    BadIdentifier(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate value `{value}` in variable `{variable}`")]
    DuplicateValue { variable: String, value: String },
    #[error("variable `{0}` declared with no values")]
    EmptyDomain(String),
    #[error("duplicate cpt for `{0}`")]
    DuplicateCpt(String),
    #[error("variable `{0}` has no cpt")]
    MissingCpt(String),
    #[error("cpt for `{variable}` has {got} rows, expected {expected}")]
    RowCount { variable: String, got: usize, expected: usize },
    #[error("duplicate parent `{parent}` in cpt for `{variable}`")]
    DuplicateParent { variable: String, parent: String },
    #[error("variable `{0}` listed as its own parent")]
    SelfParent(String),
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s != UNKNOWN_MARKER
        && !s.contains(|c: char| c.is_whitespace() || "{}|:#".contains(c))
}

/// Incremental constructor for [`BeliefNetwork`].
pub struct NetworkBuilder {
    name: String,
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    cpts: Vec<Option<Cpt>>,
}

impl NetworkBuilder {
    pub fn new(name: &str) -> NetworkBuilder {
        NetworkBuilder {
            name: name.to_string(),
            variables: Vec::new(),
            index: HashMap::new(),
            cpts: Vec::new(),
        }
    }

    pub fn variable(&mut self, name: &str, values: &[&str]) -> Result<usize, NetworkError> {
        if !valid_ident(name) {
            return Err(NetworkError::BadIdentifier(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(NetworkError::DuplicateVariable(name.to_string()));
        }
        if values.is_empty() {
            return Err(NetworkError::EmptyDomain(name.to_string()));
        }
        let mut vals = Vec::with_capacity(values.len());
        for v in values {
            if !valid_ident(v) {
                return Err(NetworkError::BadIdentifier(v.to_string()));
            }
            if vals.iter().any(|x| x == v) {
                return Err(NetworkError::DuplicateValue {
                    variable: name.to_string(),
                    value: v.to_string(),
                });
            }
            vals.push(v.to_string());
        }
        let id = self.variables.len();
        self.index.insert(name.to_string(), id);
        self.variables.push(Variable { name: name.to_string(), values: vals });
        self.cpts.push(None);
        Ok(id)
    }

    pub fn cpt(
        &mut self,
        child: &str,
        parents: &[&str],
        rows: Vec<Vec<f64>>,
    ) -> Result<(), NetworkError> {
        let child_id = self.lookup(child)?;
        let mut parent_ids = Vec::with_capacity(parents.len());
        for p in parents {
            let pid = self.lookup(p)?;
            if pid == child_id {
                return Err(NetworkError::SelfParent(child.to_string()));
            }
            if parent_ids.contains(&pid) {
                return Err(NetworkError::DuplicateParent {
                    variable: child.to_string(),
                    parent: p.to_string(),
                });
            }
            parent_ids.push(pid);
        }
        if self.cpts[child_id].is_some() {
            return Err(NetworkError::DuplicateCpt(child.to_string()));
        }
        let expected_rows = Shape::new(
            parent_ids.iter().map(|&p| self.variables[p].values.len()).collect(),
        )
        .len();
        if rows.len() != expected_rows {
            return Err(NetworkError::RowCount {
                variable: child.to_string(),
                got: rows.len(),
                expected: expected_rows,
            });
        }
        let arity = self.variables[child_id].values.len();
        for row in &rows {
            if row.len() != arity {
                return Err(NetworkError::RowArity {
                    line: 0,
                    variable: child.to_string(),
                    got: row.len(),
                    expected: arity,
                });
            }
        }
        self.cpts[child_id] = Some(Cpt { child: child_id, parents: parent_ids, rows });
        Ok(())
    }

    pub fn finish(self) -> Result<BeliefNetwork, NetworkError> {
        let mut cpts = Vec::with_capacity(self.cpts.len());
        for (i, cpt) in self.cpts.into_iter().enumerate() {
            match cpt {
                Some(c) => cpts.push(c),
                None => return Err(NetworkError::MissingCpt(self.variables[i].name.clone())),
            }
        }
        Ok(BeliefNetwork { name: self.name, variables: self.variables, cpts })
    }

    fn lookup(&self, name: &str) -> Result<usize, NetworkError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownVariable { line: 0, name: name.to_string() })
    }
}

impl BeliefNetwork {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, var: usize) -> &Cpt {
        &self.cpts[var]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn card(&self, var: usize) -> usize {
        self.variables[var].values.len()
    }

    /// Parent -> child pairs implied by the tables.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cpts
            .iter()
            .flat_map(|cpt| cpt.parents.iter().map(move |&p| (p, cpt.child)))
    }

    /// CPT entry P(child = value | parents = parent_values).
    pub fn cpt_entry(&self, var: usize, parent_values: &[usize], value: usize) -> f64 {
        let cpt = &self.cpts[var];
        let shape = Shape::new(cpt.parents.iter().map(|&p| self.card(p)).collect());
        cpt.rows[shape.index_of(parent_values)][value]
    }

    /// Checks every semantic rule and reports all violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (v, cpt) in self.cpts.iter().enumerate() {
            let name = &self.variables[v].name;
            for (r, row) in cpt.rows.iter().enumerate() {
                for &p in row {
                    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                        out.push(Violation::ProbabilityOutOfRange {
                            variable: name.clone(),
                            row: r,
                            value: p,
                        });
                    }
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    out.push(Violation::RowNotNormalized {
                        variable: name.clone(),
                        row: r,
                        sum,
                    });
                }
            }
        }
        if self.topological_order().is_none() {
            // variables that cannot be ordered: cycle members and anything
            // downstream of them
            let in_cycle = self.cyclic_variables();
            out.push(Violation::Cycle {
                variables: in_cycle.iter().map(|&v| self.variables[v].name.clone()).collect(),
            });
        }
        out
    }

    /// A topological order of the variables, or None if the edges cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        let mut children = vec![Vec::new(); n];
        for (p, c) in self.edges() {
            indegree[c] += 1;
            children[p].push(c);
        }
        // pop lowest id first so the order is deterministic
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    fn cyclic_variables(&self) -> Vec<usize> {
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        let mut children = vec![Vec::new(); n];
        for (p, c) in self.edges() {
            indegree[c] += 1;
            children[p].push(c);
        }
        let mut queue: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut removed = vec![false; n];
        while let Some(v) = queue.pop() {
            removed[v] = true;
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        (0..n).filter(|&v| !removed[v]).collect()
    }

    /// Parses the network text format. See the crate docs for the grammar.
    pub fn parse(text: &str) -> Result<BeliefNetwork, NetworkError> {
        parse_network(text)
    }

    /// Canonical text form; `parse(to_text(n))` reproduces `n` exactly,
    /// including every probability bit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "network {}", self.name);
        for v in &self.variables {
            let _ = writeln!(out, "variable {} {{ {} }}", v.name, v.values.join(" "));
        }
        for cpt in &self.cpts {
            let child = &self.variables[cpt.child];
            if cpt.parents.is_empty() {
                let probs: Vec<String> = cpt.rows[0].iter().map(|p| p.to_string()).collect();
                let _ = writeln!(out, "cpt {} {{ {} }}", child.name, probs.join(" "));
            } else {
                let parent_names: Vec<&str> =
                    cpt.parents.iter().map(|&p| self.variables[p].name.as_str()).collect();
                let _ = writeln!(out, "cpt {} | {} {{", child.name, parent_names.join(" "));
                let shape =
                    Shape::new(cpt.parents.iter().map(|&p| self.card(p)).collect());
                for (row, inst) in cpt.rows.iter().zip(shape.assignments()) {
                    let labels: Vec<&str> = inst
                        .iter()
                        .zip(&cpt.parents)
                        .map(|(&val, &p)| self.variables[p].values[val].as_str())
                        .collect();
                    let probs: Vec<String> = row.iter().map(|p| p.to_string()).collect();
                    let _ = writeln!(out, "  {} : {}", labels.join(" "), probs.join(" "));
                }
                let _ = writeln!(out, "}}");
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// text format parser

#[derive(Debug, Clone)]
struct Token {
    text: String,
    line: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let mut word = String::new();
        for c in content.chars() {
            if c.is_whitespace() {
                if !word.is_empty() {
                    tokens.push(Token { text: std::mem::take(&mut word), line });
                }
            } else if "{}|:".contains(c) {
                if !word.is_empty() {
                    tokens.push(Token { text: std::mem::take(&mut word), line });
                }
                tokens.push(Token { text: c.to_string(), line });
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            tokens.push(Token { text: word, line });
        }
    }
    tokens
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token, NetworkError> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| NetworkError::Syntax {
            line: self.tokens.last().map_or(0, |t| t.line),
            msg: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, lit: &str) -> Result<Token, NetworkError> {
        let t = self.next(&format!("`{lit}`"))?;
        if t.text != lit {
            return Err(NetworkError::Syntax {
                line: t.line,
                msg: format!("expected `{lit}`, found `{}`", t.text),
            });
        }
        Ok(t)
    }

    fn prob(&mut self, variable: &str) -> Result<(f64, usize), NetworkError> {
        let t = self.next("a probability")?;
        match t.text.parse::<f64>() {
            Ok(p) => Ok((p, t.line)),
            Err(_) => Err(NetworkError::Syntax {
                line: t.line,
                msg: format!("expected a probability for `{variable}`, found `{}`", t.text),
            }),
        }
    }
}

fn parse_network(text: &str) -> Result<BeliefNetwork, NetworkError> {
    let mut p = Parser { tokens: tokenize(text), pos: 0 };
    p.expect("network")?;
    let name = p.next("a network name")?;
    if !valid_ident(&name.text) {
        return Err(NetworkError::Syntax {
            line: name.line,
            msg: format!("invalid network name `{}`", name.text),
        });
    }

    let mut builder = NetworkBuilder::new(&name.text);
    // names seen so far, for line-accurate lookups during parsing
    let mut domains: HashMap<String, Vec<String>> = HashMap::new();

    while let Some(tok) = p.peek().cloned() {
        match tok.text.as_str() {
            "variable" => {
                p.pos += 1;
                let vname = p.next("a variable name")?;
                p.expect("{")?;
                let mut values = Vec::new();
                loop {
                    let t = p.next("a value name or `}`")?;
                    if t.text == "}" {
                        break;
                    }
                    if t.text == UNKNOWN_MARKER {
                        return Err(NetworkError::Syntax {
                            line: t.line,
                            msg: format!("`{UNKNOWN_MARKER}` is reserved and cannot name a value"),
                        });
                    }
                    values.push(t.text);
                }
                let refs: Vec<&str> = values.iter().map(String::as_str).collect();
                builder.variable(&vname.text, &refs).map_err(|e| at_line(e, vname.line))?;
                domains.insert(vname.text.clone(), values);
            }
            "cpt" => {
                p.pos += 1;
                parse_cpt(&mut p, &mut builder, &domains)?;
            }
            other => {
                return Err(NetworkError::Syntax {
                    line: tok.line,
                    msg: format!("expected `variable` or `cpt`, found `{other}`"),
                });
            }
        }
    }
    builder.finish()
}

fn at_line(e: NetworkError, line: usize) -> NetworkError {
    match e {
        NetworkError::UnknownVariable { name, .. } => NetworkError::UnknownVariable { line, name },
        NetworkError::RowArity { variable, got, expected, .. } => {
            NetworkError::RowArity { line, variable, got, expected }
        }
        other => other,
    }
}

fn parse_cpt(
    p: &mut Parser,
    builder: &mut NetworkBuilder,
    domains: &HashMap<String, Vec<String>>,
) -> Result<(), NetworkError> {
    let child = p.next("a variable name")?;
    let child_domain = domains
        .get(&child.text)
        .ok_or_else(|| NetworkError::UnknownVariable { line: child.line, name: child.text.clone() })?
        .clone();

    let mut parents: Vec<Token> = Vec::new();
    let t = p.next("`|` or `{`")?;
    match t.text.as_str() {
        "{" => {}
        "|" => loop {
            let t = p.next("a parent name or `{`")?;
            if t.text == "{" {
                break;
            }
            if !domains.contains_key(&t.text) {
                return Err(NetworkError::UnknownVariable { line: t.line, name: t.text });
            }
            parents.push(t);
        },
        other => {
            return Err(NetworkError::Syntax {
                line: t.line,
                msg: format!("expected `|` or `{{`, found `{other}`"),
            });
        }
    }

    if parents.is_empty() {
        // single row of probabilities
        let mut row = Vec::with_capacity(child_domain.len());
        let mut last_line = child.line;
        loop {
            let t = p.next("a probability or `}`")?;
            if t.text == "}" {
                break;
            }
            last_line = t.line;
            let prob = t.text.parse::<f64>().map_err(|_| NetworkError::Syntax {
                line: t.line,
                msg: format!("expected a probability, found `{}`", t.text),
            })?;
            row.push(prob);
        }
        if row.len() != child_domain.len() {
            return Err(NetworkError::RowArity {
                line: last_line,
                variable: child.text.clone(),
                got: row.len(),
                expected: child_domain.len(),
            });
        }
        let parent_refs: Vec<&str> = Vec::new();
        builder
            .cpt(&child.text, &parent_refs, vec![row])
            .map_err(|e| at_line(e, child.line))?;
        return Ok(());
    }

    // labeled rows; any order accepted, stored canonically
    let parent_cards: Vec<usize> = parents.iter().map(|t| domains[&t.text].len()).collect();
    let shape = Shape::new(parent_cards);
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; shape.len()];
    loop {
        let t = p.next("a parent value or `}`")?;
        if t.text == "}" {
            break;
        }
        // one row: parent values, ':', probabilities
        let mut inst = Vec::with_capacity(parents.len());
        let mut label = t;
        for (i, parent) in parents.iter().enumerate() {
            let dom = &domains[&parent.text];
            let vi = dom.iter().position(|v| *v == label.text).ok_or_else(|| {
                NetworkError::UnknownValue {
                    line: label.line,
                    variable: parent.text.clone(),
                    value: label.text.clone(),
                }
            })?;
            inst.push(vi);
            if i + 1 < parents.len() {
                label = p.next("a parent value")?;
            }
        }
        p.expect(":")?;
        let mut row = Vec::with_capacity(child_domain.len());
        let mut line = 0;
        for _ in 0..child_domain.len() {
            let (prob, l) = p.prob(&child.text)?;
            row.push(prob);
            line = l;
        }
        // over-long rows surface as a syntax error on the next token
        let idx = shape.index_of(&inst);
        if rows[idx].is_some() {
            return Err(NetworkError::Syntax {
                line,
                msg: format!("duplicate cpt row for `{}`", child.text),
            });
        }
        rows[idx] = Some(row);
    }
    let mut complete = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Some(r) => complete.push(r),
            None => {
                return Err(NetworkError::Syntax {
                    line: child.line,
                    msg: format!("cpt for `{}` is missing row {i}", child.text),
                });
            }
        }
    }
    let parent_refs: Vec<&str> = parents.iter().map(|t| t.text.as_str()).collect();
    builder.cpt(&child.text, &parent_refs, complete).map_err(|e| at_line(e, child.line))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testnet::{fork_abc, FORK_ABC_TEXT};

    #[test]
    fn parses_the_fork_network() {
        let bn = BeliefNetwork::parse(FORK_ABC_TEXT).unwrap();
        assert_eq!(bn.name(), "fork");
        assert_eq!(bn.variable_count(), 3);
        assert_eq!(bn.variables()[0].values, vec!["ON", "OFF"]);
        assert_eq!(bn.cpt(0).rows, vec![vec![0.3, 0.7]]);
        assert_eq!(bn.cpt(1).parents, vec![0]);
        assert_eq!(bn.cpt(1).rows, vec![vec![0.25, 0.75], vec![0.8, 0.2]]);
        assert_eq!(bn.cpt(2).rows, vec![vec![0.9, 0.1], vec![0.5, 0.5]]);
        assert!(bn.validate().is_empty());
        assert_eq!(bn, fork_abc());
    }

    #[test]
    fn rows_accepted_in_any_label_order() {
        let text = "network t
variable A { ON OFF }
variable B { ON OFF }
cpt A { .3 .7 }
cpt B | A {
  OFF : .8 .2
  ON : .25 .75
}";
        let bn = BeliefNetwork::parse(text).unwrap();
        assert_eq!(bn.cpt(1).rows, vec![vec![0.25, 0.75], vec![0.8, 0.2]]);
    }

    #[test]
    fn empty_domain_is_rejected() {
        let text = "network t\nvariable A { }\ncpt A { }";
        let err = BeliefNetwork::parse(text).unwrap_err();
        assert_eq!(err, NetworkError::EmptyDomain("A".into()));
    }

    #[test]
    fn wrong_row_arity_is_rejected_with_line() {
        let text = "network t\nvariable A { ON OFF }\ncpt A { .2 .3 .5 }";
        match BeliefNetwork::parse(text).unwrap_err() {
            NetworkError::RowArity { line, got, expected, .. } => {
                assert_eq!((line, got, expected), (3, 3, 2));
            }
            e => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn undeclared_references_are_rejected() {
        let text = "network t\nvariable A { ON OFF }\ncpt B { .5 .5 }";
        assert!(matches!(
            BeliefNetwork::parse(text).unwrap_err(),
            NetworkError::UnknownVariable { .. }
        ));

        let text = "network t
variable A { ON OFF }
variable B { ON OFF }
cpt A { .5 .5 }
cpt B | A {
  MAYBE : .5 .5
  OFF : .5 .5
}";
        assert!(matches!(
            BeliefNetwork::parse(text).unwrap_err(),
            NetworkError::UnknownValue { .. }
        ));
    }

    #[test]
    fn unknown_marker_is_not_a_legal_value_name() {
        let text = "network t\nvariable A { ON *UNKNOWN* }\ncpt A { .5 .5 }";
        assert!(matches!(BeliefNetwork::parse(text).unwrap_err(), NetworkError::Syntax { .. }));
    }

    #[test]
    fn missing_cpt_is_rejected() {
        let text = "network t\nvariable A { ON OFF }";
        assert_eq!(BeliefNetwork::parse(text).unwrap_err(), NetworkError::MissingCpt("A".into()));
    }

    #[test]
    fn missing_row_is_rejected() {
        let text = "network t
variable A { ON OFF }
variable B { ON OFF }
cpt A { .5 .5 }
cpt B | A { ON : .5 .5 }";
        assert!(matches!(BeliefNetwork::parse(text).unwrap_err(), NetworkError::Syntax { .. }));
    }

    #[test]
    fn validate_reports_bad_row_sum() {
        let mut b = NetworkBuilder::new("t");
        b.variable("A", &["ON", "OFF"]).unwrap();
        b.cpt("A", &[], vec![vec![0.5, 0.6]]).unwrap();
        let bn = b.finish().unwrap();
        let violations = bn.validate();
        assert_eq!(violations.len(), 1);
        assert!(matches!(violations[0], Violation::RowNotNormalized { .. }));
    }

    #[test]
    fn validate_reports_two_cycle() {
        let mut b = NetworkBuilder::new("t");
        b.variable("A", &["ON", "OFF"]).unwrap();
        b.variable("B", &["ON", "OFF"]).unwrap();
        b.cpt("A", &["B"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        b.cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let bn = b.finish().unwrap();
        assert!(bn.validate().iter().any(|v| matches!(v, Violation::Cycle { .. })));
        assert!(bn.topological_order().is_none());
    }

    #[test]
    fn topological_order_exists_iff_acyclic() {
        let bn = fork_abc();
        let order = bn.topological_order().unwrap();
        assert_eq!(order[0], 0); // A precedes its children
    }

    #[test]
    fn text_round_trip_is_exact() {
        let bn = fork_abc();
        let again = BeliefNetwork::parse(&bn.to_text()).unwrap();
        assert_eq!(bn, again);
        // a second round trip is byte-identical
        assert_eq!(bn.to_text(), again.to_text());
    }

    #[test]
    fn probability_out_of_range_is_a_violation() {
        let mut b = NetworkBuilder::new("t");
        b.variable("A", &["ON", "OFF"]).unwrap();
        b.cpt("A", &[], vec![vec![1.4, -0.4]]).unwrap();
        let bn = b.finish().unwrap();
        let violations = bn.validate();
        assert_eq!(
            violations.iter().filter(|v| matches!(v, Violation::ProbabilityOutOfRange { .. })).count(),
            2
        );
    }
}
