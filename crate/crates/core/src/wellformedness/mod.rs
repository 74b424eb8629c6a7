use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::ast::{ExprKind, Expression, Location, Specification, StreamRef};
use crate::diagnostic::{Diagnostic, DiagnosticKind, Span};
use crate::time::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessKind {
    Sync,
    Hold,
    Offset(u32),
    Aggr(Rational),
}

impl fmt::Display for AccessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccessKind::Sync => write!(f, "Sync"),
            AccessKind::Hold => write!(f, "Hold"),
            AccessKind::Offset(n) => write!(f, "Offset({n})"),
            AccessKind::Aggr(d) => write!(f, "Aggr({}s)", format_rational(d)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Label {
    pub location: Location,
    pub access: AccessKind,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.location.name(), self.access)
    }
}

/// `source` reads `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: StreamRef,
    pub label: Label,
    pub target: StreamRef,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DependencyGraph {
    pub vertices: Vec<StreamRef>,
    pub edges: Vec<Edge>,
}

pub fn build_graph(spec: &Specification) -> DependencyGraph {
    let mut g = DependencyGraph::default();
    g.vertices.extend((0..spec.inputs.len()).map(StreamRef::Input));
    g.vertices.extend((0..spec.outputs.len()).map(StreamRef::Output));
    for (o, out) in spec.outputs.iter().enumerate() {
        for (location, e) in out.expressions() {
            e.walk(&mut |sub| {
                if let Some(access) = access_kind(sub) {
                    let (target, _) = sub.access().expect("access node");
                    g.edges.push(Edge {
                        source: StreamRef::Output(o),
                        label: Label { location, access },
                        target,
                        span: sub.span,
                    });
                }
            });
        }
    }
    g
}

fn access_kind(e: &Expression) -> Option<AccessKind> {
    Some(match &e.kind {
        ExprKind::Sync { .. } => AccessKind::Sync,
        ExprKind::Hold { .. } => AccessKind::Hold,
        ExprKind::Offset { offset, .. } => AccessKind::Offset(*offset),
        ExprKind::Aggregate { window, .. } => AccessKind::Aggr(*window),
        _ => return None,
    })
}

impl DependencyGraph {
    pub fn to_dot(&self, spec: &Specification) -> String {
        let mut s = String::from("digraph dependencies {\n");
        for &v in &self.vertices {
            let shape = if matches!(v, StreamRef::Input(_)) { "box" } else { "ellipse" };
            let _ = writeln!(s, "  {} [label=\"{}\", shape={shape}];", node_id(v), spec.stream_name(v));
        }
        for e in &self.edges {
            let _ = writeln!(s, "  {} -> {} [label=\"{}\"];", node_id(e.source), node_id(e.target), e.label);
        }
        s.push_str("}\n");
        s
    }
}

fn node_id(v: StreamRef) -> String {
    match v {
        StreamRef::Input(i) => format!("i{i}"),
        StreamRef::Output(o) => format!("o{o}"),
    }
}

/// One cycle violating well-formedness, as a sequence of edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleDiagnostic {
    pub cycle: Vec<Edge>,
}

impl CycleDiagnostic {
    pub fn describe(&self, spec: &Specification) -> String {
        let mut s = String::new();
        for (k, e) in self.cycle.iter().enumerate() {
            if k == 0 {
                s.push_str(&format!("`{}`", spec.stream_name(e.source)));
            }
            s.push_str(&format!(" -[{}]-> `{}`", e.label, spec.stream_name(e.target)));
        }
        s
    }

    pub fn to_diagnostic(&self, spec: &Specification) -> Diagnostic {
        Diagnostic::error(
            DiagnosticKind::IllFormedCycle,
            self.cycle[0].span,
            format!("ill-formed dependency cycle {}", self.describe(spec)),
        )
        .with_note("every cycle needs a close edge or a negative offset on an eval-with path")
    }
}

/// A cycle is fine if one of its edges sits in a close clause, or if all
/// edges are eval-with accesses and one of them is a real offset. Hold and
/// aggregation read the current prefix and count as zero delay.
///
/// Working on the graph without close edges, a bad cycle exists iff some
/// non-eval-with edge lies inside a strongly connected component, or the
/// zero-delay eval-with edges alone form a cycle. A closed walk splits into
/// simple cycles, one of which keeps the offending edge, so walks suffice.
pub fn check_wellformed(g: &DependencyGraph) -> Vec<CycleDiagnostic> {
    let index: HashMap<StreamRef, usize> = g.vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let open: Vec<usize> =
        (0..g.edges.len()).filter(|&e| g.edges[e].label.location != Location::Close).collect();
    let zero: Vec<usize> = open
        .iter()
        .copied()
        .filter(|&e| {
            let l = g.edges[e].label;
            l.location == Location::EvalWith && !matches!(l.access, AccessKind::Offset(n) if n > 0)
        })
        .collect();

    let comp = components(g, &index, &open);
    let zero_comp = components(g, &index, &zero);
    let mut diags = Vec::new();
    let mut reported = vec![false; g.vertices.len()];

    let end = |e: &Edge| (index[&e.source], index[&e.target]);
    // Prefer cycles through a non eval-with edge, then zero-delay cycles.
    let culprits = open
        .iter()
        .filter(|&&e| g.edges[e].label.location != Location::EvalWith)
        .map(|&e| (e, &open, &comp))
        .chain(zero.iter().map(|&e| (e, &zero, &zero_comp)));
    for (e, allowed, comps) in culprits {
        let (u, v) = end(&g.edges[e]);
        if comps[u] != comps[v] || reported[comp[u]] {
            continue;
        }
        reported[comp[u]] = true;
        let mut cycle = vec![g.edges[e]];
        cycle.extend(path(g, &index, allowed, v, u).into_iter().map(|k| g.edges[k]));
        diags.push(CycleDiagnostic { cycle });
    }
    diags
}

/// Component id per vertex, considering only the given edges.
fn components(g: &DependencyGraph, index: &HashMap<StreamRef, usize>, edges: &[usize]) -> Vec<usize> {
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<NodeIndex> = g.vertices.iter().map(|_| graph.add_node(())).collect();
    for &e in edges {
        let edge = &g.edges[e];
        graph.add_edge(nodes[index[&edge.source]], nodes[index[&edge.target]], ());
    }
    let mut comp = vec![0; g.vertices.len()];
    for (c, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for n in scc {
            comp[n.index()] = c;
        }
    }
    comp
}

/// Shortest edge path from `from` to `to` over the allowed edges.
fn path(g: &DependencyGraph, index: &HashMap<StreamRef, usize>, allowed: &[usize], from: usize, to: usize) -> Vec<usize> {
    if from == to {
        return Vec::new();
    }
    let mut prev: Vec<Option<usize>> = vec![None; g.vertices.len()];
    let mut seen = vec![false; g.vertices.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &e in allowed {
            let (s, t) = (index[&g.edges[e].source], index[&g.edges[e].target]);
            if s == x && !seen[t] {
                seen[t] = true;
                prev[t] = Some(e);
                queue.push_back(t);
            }
        }
    }
    let mut out = Vec::new();
    let mut at = to;
    while at != from {
        let e = prev[at].expect("vertices share a component");
        out.push(e);
        at = index[&g.edges[e].source];
    }
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::desugar;
    use crate::parser::parse;

    fn spec(src: &str) -> Specification {
        desugar(&parse(src).unwrap()).unwrap()
    }

    fn label(location: Location, access: AccessKind) -> Label {
        Label { location, access }
    }

    #[test]
    fn offset_self_loop() {
        let s = spec("output a: Int64 := a.offset(by: -1).defaults(to: 0)");
        let g = build_graph(&s);
        assert_eq!(g.edges.len(), 1);
        let e = g.edges[0];
        assert_eq!((e.source, e.label, e.target), (StreamRef::Output(0), label(Location::EvalWith, AccessKind::Offset(1)), StreamRef::Output(0)));
        assert!(check_wellformed(&g).is_empty());
    }

    #[test]
    fn zero_delay_self_loop() {
        let s = spec("output a: Int64 := a");
        let d = check_wellformed(&build_graph(&s));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].describe(&s), "`a` -[EvalWith/Sync]-> `a`");
    }

    #[test]
    fn inputs_only() {
        let g = build_graph(&spec("input x: Int64\ninput y: Bool"));
        assert_eq!(g.vertices.len(), 2);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn close_breaks_cycles() {
        let s = spec("input x: Bool\noutput a: Bool eval when b.hold(or: false) with x close when b.hold(or: false)\noutput b: Bool := a.hold(or: false)");
        let d = check_wellformed(&build_graph(&s));
        assert_eq!(d.len(), 1, "the eval-when edge still closes a cycle");
        let s = spec("input x: Int64\noutput a(p: Int64) spawn with x eval @x@ with p close when b(p).hold(or: false)\n\
            output b(p: Int64) spawn with x eval @x@ with a(p).hold(or: 0) > 3");
        assert!(check_wellformed(&build_graph(&s)).is_empty());
    }

    #[test]
    fn intruder_edges() {
        let s = spec(include_str!("../../specs/corpus/intruder.lola"));
        let g = build_graph(&s);
        let find = |from: &str, to: &str, l: Label| {
            let (a, b) = (s.lookup(from).unwrap(), s.lookup(to).unwrap());
            g.edges.iter().any(|e| e.source == a && e.target == b && e.label == l)
        };
        assert!(find("intruder_pos", "stale", label(Location::Close, AccessKind::Hold)));
        assert!(find("stale", "stale", label(Location::Close, AccessKind::Hold)));
        assert!(check_wellformed(&g).is_empty());
    }

    #[test]
    fn dot_output() {
        let s = spec("input x: Int64\noutput a: Int64 := x + a.offset(by: -2).defaults(to: 0)");
        let dot = build_graph(&s).to_dot(&s);
        assert!(dot.contains("o0 -> i0 [label=\"EvalWith/Sync\"]"));
        assert!(dot.contains("o0 -> o0 [label=\"EvalWith/Offset(2)\"]"));
    }
}
