//! Line-oriented instance files.
//!
//! ```text
//! nwpc tree 3 2
//! root 0
//! e 0 1
//! e 1 2
//! w 1 5
//! p 2 3
//! ```
//!
//! Forest files use the `forest` header and `d i j num/den` demand lines in
//! place of `root` and `p`. Blank lines and `#` comments are ignored.
//! [`write_tree`] and [`write_forest`] emit a canonical order: header, root,
//! edges sorted, then weights, penalties and demands by vertex id.

use crate::graph::Graph;
use crate::instance::{ForestInstance, InstanceError, TreeInstance};
use crate::rational::{self, Rational};
use num_traits::Zero;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing header line")]
    MissingHeader,
    #[error("header declares {declared} edges but {found} were given")]
    EdgeCount { declared: usize, found: usize },
    #[error("tree instance has no root line")]
    MissingRoot,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Tree(TreeInstance),
    Forest(ForestInstance),
}

/// Upper bound on the declared vertex count, so a hostile header cannot
/// make the parser allocate unbounded memory.
pub const MAX_VERTICES: usize = 1 << 16;

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let syntax = |line: usize, message: String| ParseError::Syntax { line, message };
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "nwpc" {
        return Err(syntax(hline, "expected `nwpc tree|forest <n> <m>`".into()));
    }
    let forest = match h[1] {
        "tree" => false,
        "forest" => true,
        other => return Err(syntax(hline, format!("unknown problem kind `{other}`"))),
    };
    let n = parse_count(h[2]).map_err(|m| syntax(hline, m))?;
    let m = parse_count(h[3]).map_err(|m| syntax(hline, m))?;
    if n > MAX_VERTICES {
        return Err(syntax(hline, format!("vertex count {n} exceeds {MAX_VERTICES}")));
    }

    let mut graph = Graph::empty(n);
    let mut edges = 0usize;
    let mut weight: Vec<Option<Rational>> = vec![None; n];
    let mut penalty: Vec<Option<Rational>> = vec![None; n];
    let mut root = None;
    let mut demands = Vec::new();

    for (line, body) in lines {
        let f: Vec<&str> = body.split_whitespace().collect();
        let vertex = |s: &str| -> Result<usize, ParseError> {
            let v = parse_count(s).map_err(|m| syntax(line, m))?;
            if v >= n {
                return Err(syntax(line, format!("vertex {v} out of range")));
            }
            Ok(v)
        };
        let value = |s: &str| -> Result<Rational, ParseError> {
            let r = rational::parse(s).map_err(|e| syntax(line, e.to_string()))?;
            if r < Rational::zero() {
                return Err(syntax(line, format!("negative value `{s}`")));
            }
            Ok(r)
        };
        let arity = |k: usize| -> Result<(), ParseError> {
            if f.len() != k {
                return Err(syntax(line, format!("`{}` takes {} fields", f[0], k - 1)));
            }
            Ok(())
        };
        match f[0] {
            "e" => {
                arity(3)?;
                let (u, v) = (vertex(f[1])?, vertex(f[2])?);
                graph.add_edge(u, v).map_err(|e| syntax(line, e.to_string()))?;
                edges += 1;
            }
            "w" => {
                arity(3)?;
                let v = vertex(f[1])?;
                if weight[v].replace(value(f[2])?).is_some() {
                    return Err(syntax(line, format!("duplicate weight for vertex {v}")));
                }
            }
            "root" if !forest => {
                arity(2)?;
                if root.replace(vertex(f[1])?).is_some() {
                    return Err(syntax(line, "duplicate root".into()));
                }
            }
            "p" if !forest => {
                arity(3)?;
                let v = vertex(f[1])?;
                if penalty[v].replace(value(f[2])?).is_some() {
                    return Err(syntax(line, format!("duplicate penalty for vertex {v}")));
                }
            }
            "d" if forest => {
                arity(4)?;
                let (i, j) = (vertex(f[1])?, vertex(f[2])?);
                demands.push((i, j, value(f[3])?));
            }
            other => {
                return Err(syntax(line, format!("unexpected record `{other}`")));
            }
        }
    }
    if edges != m {
        return Err(ParseError::EdgeCount {
            declared: m,
            found: edges,
        });
    }
    let weight: Vec<Rational> = weight.into_iter().map(Option::unwrap_or_default).collect();
    if forest {
        Ok(Instance::Forest(ForestInstance::new(graph, weight, demands)?))
    } else {
        let root = root.ok_or(ParseError::MissingRoot)?;
        let penalty = penalty.into_iter().map(Option::unwrap_or_default).collect();
        Ok(Instance::Tree(TreeInstance::new(graph, root, weight, penalty)?))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("invalid count `{s}`"));
    }
    s.parse().map_err(|_| format!("count `{s}` too large"))
}

fn write_graph(out: &mut String, g: &Graph) {
    for (u, v) in g.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
}

fn write_weights(out: &mut String, key: &str, values: &[Rational]) {
    for (v, w) in values.iter().enumerate() {
        if !w.is_zero() {
            let _ = writeln!(out, "{key} {v} {}", rational::format(w));
        }
    }
}

pub fn write_tree(inst: &TreeInstance) -> String {
    let g = &inst.graph;
    let mut out = format!("nwpc tree {} {}\nroot {}\n", g.vertex_count(), g.edge_count(), inst.root);
    write_graph(&mut out, g);
    write_weights(&mut out, "w", &inst.weight);
    write_weights(&mut out, "p", &inst.penalty);
    out
}

pub fn write_forest(inst: &ForestInstance) -> String {
    let g = &inst.graph;
    let mut out = format!("nwpc forest {} {}\n", g.vertex_count(), g.edge_count());
    write_graph(&mut out, g);
    write_weights(&mut out, "w", &inst.weight);
    for d in &inst.demands {
        let _ = writeln!(out, "d {} {} {}", d.a, d.b, rational::format(&d.penalty));
    }
    out
}

pub fn write_instance(inst: &Instance) -> String {
    match inst {
        Instance::Tree(t) => write_tree(t),
        Instance::Forest(f) => write_forest(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    const PATH3: &str = "nwpc tree 3 2\nroot 0\ne 0 1\ne 1 2\nw 1 5\np 2 3\n";

    #[test]
    fn parses_tree() {
        let Instance::Tree(t) = parse_instance(PATH3).unwrap() else { panic!() };
        assert_eq!(t.root, 0);
        assert_eq!(t.weight, vec![int(0), int(5), int(0)]);
        assert_eq!(t.penalty, vec![int(0), int(0), int(3)]);
        assert_eq!(write_tree(&t), PATH3);
    }

    #[test]
    fn canonical_output_sorts() {
        let messy = "# comment\nnwpc tree 3 2\np 2 6/2\ne 2 1\nw 1 10/2  # five\n\ne 1 0\nroot 0\n";
        let Instance::Tree(t) = parse_instance(messy).unwrap() else { panic!() };
        assert_eq!(write_tree(&t), PATH3);
    }

    #[test]
    fn parses_forest_and_merges() {
        let text = "nwpc forest 3 2\ne 0 1\ne 1 2\nw 1 3\nd 2 0 1/2\nd 0 2 7/2\n";
        let Instance::Forest(f) = parse_instance(text).unwrap() else { panic!() };
        assert_eq!(f.demands.len(), 1);
        assert_eq!(f.demands[0].penalty, int(4));
        assert_eq!(write_forest(&f), "nwpc forest 3 2\ne 0 1\ne 1 2\nw 1 3\nd 0 2 4\n");
        assert_eq!(f.weight[1], ratio(3, 1));
    }

    #[test]
    fn error_cases() {
        let bad = [
            "",
            "nwpc tree 2",
            "nwpc graph 2 0\nroot 0",
            "nwpc tree 2 1\nroot 0\ne 0 2",
            "nwpc tree 2 1\nroot 0\ne 0 0",
            "nwpc tree 2 2\nroot 0\ne 0 1\ne 1 0",
            "nwpc tree 2 1\nroot 0",
            "nwpc tree 2 0\n",
            "nwpc tree 2 0\nroot 0\nroot 1",
            "nwpc tree 2 0\nroot 0\nw 1 -3",
            "nwpc tree 2 0\nroot 0\nw 1 1/0",
            "nwpc tree 2 0\nroot 0\nw 1 1\nw 1 2",
            "nwpc tree 2 0\nroot 0\nd 0 1 1",
            "nwpc forest 2 0\nroot 0",
            "nwpc forest 2 0\nd 1 1 1",
            "nwpc forest 2 0\nd 0 1 0",
            "nwpc tree 99999999999 0\nroot 0",
            "nwpc tree 2 0\nroot 0 1",
        ];
        for text in bad {
            assert!(parse_instance(text).is_err(), "accepted {text:?}");
        }
    }
}
