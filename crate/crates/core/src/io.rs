//! Text formats for datasets, vtrees and PSDDs.
//!
//! * Datasets: one record per line, comma-separated `0`/`1` values.
//! * Vtrees: `vtree N`, then `L <id> <var>` and `I <id> <left> <right>`
//!   lines, children before parents, root last.
//! * PSDDs: `psdd N`, then `L <id> <vtree> <signed var>`,
//!   `T <id> <vtree> <var> <ln theta>` and
//!   `D <id> <vtree> <k> (<prime> <sub> <ln weight>)*k`, children before
//!   parents, root last. Vtree ids are the post-order ids that
//!   [`write_vtree`] emits.
//!
//! Lines starting with `c` are comments; `\r\n` line endings are accepted.
//! Logarithms are written with 17 significant digits.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::circuit::{Circuit, CircuitBuilder, Element, NodeId, PsddNode};
use crate::dataset::Dataset;
use crate::error::{Error, FileFormatError, Result};
use crate::vtree::{Vtree, VtreeId, VtreeNode};

/// Tolerance on the exponentiated weights of a decision line.
pub const READ_WEIGHT_TOLERANCE: f64 = 1e-6;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str, comments: bool) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n').enumerate().filter_map(move |(i, line)| {
        let line = line.strip_suffix('\r').unwrap_or(line).trim();
        if line.is_empty() || (comments && line.starts_with('c')) {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    Ok(parse_dataset(&read_text(path)?, path)?)
}

pub fn parse_dataset(text: &str, path: &Path) -> Result<Dataset, FileFormatError> {
    let err = |line, msg: String| FileFormatError::new(path, line, msg);
    let mut n = None;
    let mut rows = Vec::new();
    for (line, content) in content_lines(text, false) {
        let row = content
            .split(',')
            .map(|tok| match tok.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(err(line, format!("expected 0 or 1, found '{other}'"))),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        match n {
            None => n = Some(row.len()),
            Some(n) if n != row.len() => {
                return Err(err(line, format!("expected {n} values, found {}", row.len())))
            }
            _ => {}
        }
        rows.push(row);
    }
    let n = n.ok_or_else(|| err(1, "no records".into()))?;
    Dataset::from_rows(n, rows).map_err(|e| err(1, e.to_string()))
}

/// Comma-separated 0/1 record, as in the dataset format.
pub fn format_record(values: &[bool]) -> String {
    let mut s = String::with_capacity(2 * values.len());
    for (i, &b) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push(if b { '1' } else { '0' });
    }
    s
}

struct Tokens<'a> {
    path: &'a Path,
    line: usize,
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn new(path: &'a Path, line: usize, content: &'a str) -> Self {
        Tokens {
            path,
            line,
            iter: content.split_whitespace(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> FileFormatError {
        FileFormatError::new(self.path, self.line, msg)
    }

    fn word(&mut self, what: &str) -> Result<&'a str, FileFormatError> {
        self.iter
            .next()
            .ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, FileFormatError> {
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| self.err(format!("invalid {what} '{w}'")))
    }

    fn end(&mut self) -> Result<(), FileFormatError> {
        match self.iter.next() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("unexpected token '{w}'"))),
        }
    }
}

fn header(
    lines: &mut dyn Iterator<Item = (usize, &str)>,
    keyword: &str,
    path: &Path,
) -> Result<(usize, usize), FileFormatError> {
    let (line, content) = lines
        .next()
        .ok_or_else(|| FileFormatError::new(path, 1, format!("missing '{keyword}' header")))?;
    let mut t = Tokens::new(path, line, content);
    if t.word("header")? != keyword {
        return Err(t.err(format!("expected '{keyword} <count>' header")));
    }
    let count = t.parse("node count")?;
    t.end()?;
    Ok((line, count))
}

pub fn read_vtree(path: impl AsRef<Path>) -> Result<Vtree> {
    let path = path.as_ref();
    Ok(parse_vtree(&read_text(path)?, path)?)
}

pub fn parse_vtree(text: &str, path: &Path) -> Result<Vtree, FileFormatError> {
    let mut lines = content_lines(text, true);
    let (mut last_line, count) = header(&mut lines, "vtree", path)?;
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut seen_vars = HashSet::new();
    for (line, content) in lines {
        last_line = line;
        let mut t = Tokens::new(path, line, content);
        let tag = t.word("node tag")?;
        let id: u64 = t.parse("node id")?;
        let node = match tag {
            "L" => {
                let var: usize = t.parse("variable")?;
                if var == 0 {
                    return Err(t.err("variables are numbered from 1"));
                }
                if !seen_vars.insert(var) {
                    return Err(t.err(format!("duplicate variable {var}")));
                }
                VtreeNode::Leaf(var)
            }
            "I" => {
                let mut child = |what| -> Result<VtreeId, FileFormatError> {
                    let c: u64 = t.parse(what)?;
                    ids.get(&c)
                        .map(|&i| VtreeId(i))
                        .ok_or_else(|| t.err(format!("{what} {c} is not declared before use")))
                };
                let left = child("left child")?;
                let right = child("right child")?;
                VtreeNode::Internal { left, right }
            }
            other => return Err(t.err(format!("unknown tag '{other}'"))),
        };
        t.end()?;
        if ids.insert(id, nodes.len()).is_some() {
            return Err(t.err(format!("duplicate node id {id}")));
        }
        nodes.push(node);
    }
    if nodes.len() != count {
        return Err(FileFormatError::new(
            path,
            last_line,
            format!("header declares {count} nodes, found {}", nodes.len()),
        ));
    }
    if nodes.is_empty() {
        return Err(FileFormatError::new(path, last_line, "empty vtree"));
    }
    let root = VtreeId(nodes.len() - 1);
    Vtree::from_nodes(&nodes, root).map_err(|e| FileFormatError::new(path, last_line, e.to_string()))
}

pub fn vtree_to_string(vtree: &Vtree) -> String {
    let mut s = format!("vtree {}\n", vtree.len());
    for (i, node) in vtree.nodes().iter().enumerate() {
        match node {
            VtreeNode::Leaf(v) => writeln!(s, "L {i} {v}"),
            VtreeNode::Internal { left, right } => writeln!(s, "I {i} {} {}", left.0, right.0),
        }
        .expect("writing to a string");
    }
    s
}

pub fn write_vtree(vtree: &Vtree, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &vtree_to_string(vtree))
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_psdd(path: impl AsRef<Path>, vtree: &Vtree) -> Result<Circuit> {
    let path = path.as_ref();
    Ok(parse_psdd(&read_text(path)?, vtree, path)?)
}

pub fn parse_psdd(text: &str, vtree: &Vtree, path: &Path) -> Result<Circuit, FileFormatError> {
    let mut lines = content_lines(text, true);
    let (mut last_line, count) = header(&mut lines, "psdd", path)?;
    let mut ids: HashMap<u64, NodeId> = HashMap::new();
    let mut builder = CircuitBuilder::new(vtree.clone());
    let mut last = None;
    let mut declared = 0usize;
    for (line, content) in lines {
        last_line = line;
        declared += 1;
        let mut t = Tokens::new(path, line, content);
        let tag = t.word("node tag")?;
        let id: u64 = t.parse("node id")?;
        let vid: usize = t.parse("vtree id")?;
        let leaf_check = |t: &Tokens, var: usize| -> Result<(), FileFormatError> {
            match vtree.leaf_of(var) {
                Some(leaf) if leaf.0 == vid => Ok(()),
                Some(leaf) => Err(t.err(format!(
                    "variable {var} sits on vtree node {}, not {vid}",
                    leaf.0
                ))),
                None => Err(t.err(format!("variable {var} is not in the vtree"))),
            }
        };
        let node = match tag {
            "L" => {
                let lit: i64 = t.parse("literal")?;
                if lit == 0 {
                    return Err(t.err("literal 0 is not a variable"));
                }
                let var = lit.unsigned_abs() as usize;
                leaf_check(&t, var)?;
                PsddNode::Literal {
                    var,
                    positive: lit > 0,
                }
            }
            "T" => {
                let var: usize = t.parse("variable")?;
                leaf_check(&t, var)?;
                let log_theta: f64 = t.parse("log-parameter")?;
                PsddNode::True {
                    var,
                    theta: log_theta.exp(),
                }
            }
            "D" => {
                if vid >= vtree.len() || vtree.is_leaf(VtreeId(vid)) {
                    return Err(t.err(format!("vtree node {vid} is not an internal node")));
                }
                let k: usize = t.parse("element count")?;
                if k == 0 {
                    return Err(t.err("decision node without elements"));
                }
                let mut elements = Vec::with_capacity(k);
                for _ in 0..k {
                    let mut child = |what| -> Result<NodeId, FileFormatError> {
                        let c: u64 = t.parse(what)?;
                        ids.get(&c)
                            .copied()
                            .ok_or_else(|| t.err(format!("{what} {c} is not declared before use")))
                    };
                    let prime = child("prime")?;
                    let sub = child("sub")?;
                    let lw: f64 = t.parse("log-weight")?;
                    elements.push(Element {
                        prime,
                        sub,
                        weight: lw.exp(),
                    });
                }
                let total: f64 = elements.iter().map(|e| e.weight).sum();
                if total.is_nan() || (total - 1.0).abs() > READ_WEIGHT_TOLERANCE {
                    return Err(t.err(format!("weights sum to {total}, expected 1")));
                }
                PsddNode::Sum {
                    vtree: VtreeId(vid),
                    elements,
                }
            }
            other => return Err(t.err(format!("unknown tag '{other}'"))),
        };
        t.end()?;
        let nid = builder.push(node).map_err(|e| t.err(e.to_string()))?;
        if ids.insert(id, nid).is_some() {
            return Err(t.err(format!("duplicate node id {id}")));
        }
        last = Some(nid);
    }
    if declared != count {
        return Err(FileFormatError::new(
            path,
            last_line,
            format!("header declares {count} nodes, found {declared}"),
        ));
    }
    let root = last.ok_or_else(|| FileFormatError::new(path, last_line, "empty circuit"))?;
    builder
        .finish(root)
        .map_err(|e| FileFormatError::new(path, last_line, e.to_string()))
}

pub fn psdd_to_string(circuit: &Circuit) -> String {
    let mut s = format!("psdd {}\n", circuit.nodes().len());
    for (i, node) in circuit.nodes().iter().enumerate() {
        let vid = circuit.vtree_of(NodeId(i)).0;
        match node {
            PsddNode::Literal { var, positive } => {
                let lit = if *positive { *var as i64 } else { -(*var as i64) };
                writeln!(s, "L {i} {vid} {lit}")
            }
            PsddNode::True { var, theta } => {
                writeln!(s, "T {i} {vid} {var} {}", format_float(theta.ln()))
            }
            PsddNode::Sum { elements, .. } => {
                write!(s, "D {i} {vid} {}", elements.len()).expect("writing to a string");
                for e in elements {
                    write!(s, " {} {} {}", e.prime.0, e.sub.0, format_float(e.weight.ln()))
                        .expect("writing to a string");
                }
                writeln!(s)
            }
        }
        .expect("writing to a string");
    }
    s
}

pub fn write_psdd(circuit: &Circuit, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &psdd_to_string(circuit))
}
