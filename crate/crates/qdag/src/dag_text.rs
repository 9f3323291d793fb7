//! Text form of a compiled dag: the hand-off artifact between the off-line
//! compiler and an on-line evaluator.
//!
//! The format is line-oriented and whitespace-split so a few dozen lines of
//! code in any language can load it:
//!
//! ```text
//! QDAG 1
//! VAR <name> <k> <val_1> ... <val_k>
//! NODE <id> NUM <decimal>
//! NODE <id> ESN <var> <val>
//! NODE <id> MUL <k> <id_1> ... <id_k>
//! NODE <id> ADD <k> <id_1> ... <id_k>
//! QUERY <var> <val> <id>
//! ```
//!
//! Node ids are consecutive from 0 and every referenced id appears earlier
//! in the file, so a loader can evaluate in a single forward pass. Numbers
//! print with enough digits to reproduce the exact double, making the round
//! trip bit-identical. `#` starts a comment.

use crate::dag::{EvidenceVar, NodeId, QDag, QNode, Query};
use std::fmt::Write as _;
use thiserror::Error;

const VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: unsupported format version {found}")]
    Version { line: usize, found: String },
    #[error("line {line}: node {id} declared out of order (expected {expected})")]
    IdOutOfOrder { line: usize, id: usize, expected: usize },
    #[error("line {line}: reference to id {reference} ahead of its declaration")]
    ForwardReference { line: usize, reference: usize },
    #[error("line {line}: unknown evidence variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: `{value}` is not a value of `{variable}`")]
    UnknownValue { line: usize, variable: String, value: String },
}

impl QDag {
    /// Serializes the dag to its text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "QDAG {VERSION}");
        for v in self.evidence_vars() {
            let _ = writeln!(out, "VAR {} {} {}", v.name, v.values.len(), v.values.join(" "));
        }
        for (i, node) in self.nodes().iter().enumerate() {
            match node {
                QNode::Num(p) => {
                    let _ = writeln!(out, "NODE {i} NUM {p}");
                }
                QNode::Esn { var, value } => {
                    let ev = &self.evidence_vars()[*var];
                    let _ = writeln!(out, "NODE {i} ESN {} {}", ev.name, ev.values[*value]);
                }
                QNode::Mul(inputs) => {
                    let _ = writeln!(out, "NODE {i} MUL {} {}", inputs.len(), join_ids(inputs));
                }
                QNode::Add(inputs) => {
                    let _ = writeln!(out, "NODE {i} ADD {} {}", inputs.len(), join_ids(inputs));
                }
            }
        }
        for q in self.queries() {
            let _ = writeln!(out, "QUERY {} {} {}", q.variable, q.value, q.node);
        }
        out
    }

    /// Parses the text form back into a dag structurally identical to the
    /// one serialized.
    pub fn from_text(text: &str) -> Result<QDag, TextError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| {
                let content = match raw.find('#') {
                    Some(p) => &raw[..p],
                    None => raw,
                };
                (i + 1, content.split_whitespace().collect::<Vec<&str>>())
            })
            .filter(|(_, fields)| !fields.is_empty());

        let (line, header) = lines
            .next()
            .ok_or_else(|| TextError::Malformed { line: 0, msg: "empty file".into() })?;
        if header.first() != Some(&"QDAG") {
            return Err(TextError::Malformed { line, msg: "expected `QDAG <version>` header".into() });
        }
        if header.get(1) != Some(&"1") {
            return Err(TextError::Version {
                line,
                found: header.get(1).unwrap_or(&"").to_string(),
            });
        }

        let mut evidence_vars: Vec<EvidenceVar> = Vec::new();
        let mut nodes: Vec<QNode> = Vec::new();
        let mut queries: Vec<Query> = Vec::new();

        for (line, fields) in lines {
            match fields[0] {
                "VAR" => {
                    if fields.len() < 3 {
                        return Err(malformed(line, "VAR needs a name and a value count"));
                    }
                    let name = fields[1].to_string();
                    let k: usize = parse_count(line, fields[2])?;
                    if fields.len() != 3 + k || k == 0 {
                        return Err(malformed(line, "VAR value count does not match the values"));
                    }
                    if evidence_vars.iter().any(|v| v.name == name) {
                        return Err(malformed(line, "duplicate VAR"));
                    }
                    let values: Vec<String> = fields[3..].iter().map(|s| s.to_string()).collect();
                    evidence_vars.push(EvidenceVar { name, values });
                }
                "NODE" => {
                    if fields.len() < 3 {
                        return Err(malformed(line, "NODE needs an id and a kind"));
                    }
                    let id: usize = parse_count(line, fields[1])?;
                    if id != nodes.len() {
                        return Err(TextError::IdOutOfOrder { line, id, expected: nodes.len() });
                    }
                    let node = match fields[2] {
                        "NUM" => {
                            if fields.len() != 4 {
                                return Err(malformed(line, "NUM carries exactly one number"));
                            }
                            let p: f64 = fields[3].parse().map_err(|_| {
                                malformed(line, &format!("`{}` is not a number", fields[3]))
                            })?;
                            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                                return Err(malformed(line, "NUM payload outside [0, 1]"));
                            }
                            QNode::Num(p)
                        }
                        "ESN" => {
                            if fields.len() != 5 {
                                return Err(malformed(line, "ESN carries a variable and a value"));
                            }
                            let var = evidence_vars
                                .iter()
                                .position(|v| v.name == fields[3])
                                .ok_or_else(|| TextError::UnknownVariable {
                                    line,
                                    name: fields[3].to_string(),
                                })?;
                            let value = evidence_vars[var]
                                .value_index(fields[4])
                                .ok_or_else(|| TextError::UnknownValue {
                                    line,
                                    variable: fields[3].to_string(),
                                    value: fields[4].to_string(),
                                })?;
                            QNode::Esn { var, value }
                        }
                        kind @ ("MUL" | "ADD") => {
                            if fields.len() < 4 {
                                return Err(malformed(line, "operator needs an input count"));
                            }
                            let k: usize = parse_count(line, fields[3])?;
                            if k < 2 {
                                return Err(malformed(line, "operator needs at least 2 inputs"));
                            }
                            if fields.len() != 4 + k {
                                return Err(malformed(line, "input count does not match the inputs"));
                            }
                            let mut inputs = Vec::with_capacity(k);
                            for f in &fields[4..] {
                                let reference: usize = parse_count(line, f)?;
                                if reference >= id {
                                    return Err(TextError::ForwardReference { line, reference });
                                }
                                inputs.push(NodeId::new(reference));
                            }
                            if kind == "MUL" {
                                QNode::Mul(inputs)
                            } else {
                                QNode::Add(inputs)
                            }
                        }
                        other => {
                            return Err(malformed(line, &format!("unknown node kind `{other}`")));
                        }
                    };
                    nodes.push(node);
                }
                "QUERY" => {
                    if fields.len() != 4 {
                        return Err(malformed(line, "QUERY carries variable, value and node id"));
                    }
                    let reference: usize = parse_count(line, fields[3])?;
                    if reference >= nodes.len() {
                        return Err(TextError::ForwardReference { line, reference });
                    }
                    let (variable, value) = (fields[1].to_string(), fields[2].to_string());
                    if queries.iter().any(|q| q.variable == variable && q.value == value) {
                        return Err(malformed(line, "duplicate QUERY"));
                    }
                    queries.push(Query { variable, value, node: NodeId::new(reference) });
                }
                other => {
                    return Err(malformed(line, &format!("unknown record `{other}`")));
                }
            }
        }
        Ok(QDag::from_parts(evidence_vars, nodes, queries))
    }
}

fn malformed(line: usize, msg: &str) -> TextError {
    TextError::Malformed { line, msg: msg.to_string() }
}

fn parse_count(line: usize, s: &str) -> Result<usize, TextError> {
    s.parse().map_err(|_| malformed(line, &format!("`{s}` is not a non-negative integer")))
}

fn join_ids(ids: &[NodeId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(" ")
}
