//! Graph isomorphism as an action-synthesis problem.
//!
//! Each graph becomes a single-step trace that adds one `edge` fact per edge
//! from the empty state. A shared action with `|V|` parameters explaining
//! both steps yields substitutions `σ1`, `σ2`, and `σ2 ∘ σ1⁻¹` is an
//! isomorphism.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{GroundFact, Name, State};
use crate::synth::{synth_fixed_k, SynthError, SynthLimits};
use crate::trace::{decompose, Trace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub nodes: Vec<Name>,
    pub edges: BTreeSet<(Name, Name)>,
    pub directed: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GiError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graphs have {0} and {1} nodes")]
    NodeCountMismatch(usize, usize),
    #[error("isolated vertex `{0}`")]
    IsolatedVertexPresent(Name),
    #[error("brute force limited to 8 nodes, got {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("decoded mapping is not an isomorphism")]
    BadMapping,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoResult {
    Iso(BTreeMap<Name, Name>),
    NotIsomorphic,
}

impl IsoResult {
    pub fn is_iso(&self) -> bool {
        matches!(self, IsoResult::Iso(_))
    }
}

impl fmt::Display for IsoResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsoResult::NotIsomorphic => f.write_str("not-isomorphic"),
            IsoResult::Iso(m) => {
                f.write_str("iso:")?;
                for (a, b) in m {
                    write!(f, " {a}->{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl Graph {
    pub fn new<I, S>(nodes: &[&str], edges: I, directed: bool) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        Graph {
            nodes: nodes.iter().map(|n| Name::new(n)).collect(),
            edges: edges
                .into_iter()
                .map(|(a, b)| (Name::new(a.as_ref()), Name::new(b.as_ref())))
                .collect(),
            directed,
        }
    }

    pub fn has_edge(&self, u: &Name, v: &Name) -> bool {
        let (u, v) = (u.clone(), v.clone());
        if self.directed {
            self.edges.contains(&(u, v))
        } else {
            self.edges.contains(&(u.clone(), v.clone())) || self.edges.contains(&(v, u))
        }
    }

    fn touched(&self) -> BTreeSet<&Name> {
        self.edges.iter().flat_map(|(a, b)| [a, b]).collect()
    }

    /// Nodes on no edge, sorted.
    pub fn isolated(&self) -> Vec<Name> {
        let touched = self.touched();
        let mut out: Vec<Name> = self
            .nodes
            .iter()
            .filter(|n| !touched.contains(n))
            .cloned()
            .collect();
        out.sort();
        out
    }

    /// Same graph without isolated nodes.
    pub fn strip_isolated(&self) -> Graph {
        let touched = self.touched();
        Graph {
            nodes: self
                .nodes
                .iter()
                .filter(|n| touched.contains(n))
                .cloned()
                .collect(),
            edges: self.edges.clone(),
            directed: self.directed,
        }
    }

    /// Ordered edge facts; undirected edges in both orientations.
    fn edge_facts(&self, prefix: &str) -> State {
        let obj = |n: &Name| format!("{prefix}{n}");
        let mut s = State::new();
        for (a, b) in &self.edges {
            s.insert(GroundFact::new("edge", [obj(a), obj(b)]));
            if !self.directed {
                s.insert(GroundFact::new("edge", [obj(b), obj(a)]));
            }
        }
        s
    }
}

/// Parses `nodes: a b c` followed by one `u v` edge per line. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_graph(text: &str, directed: bool) -> Result<Graph, GiError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line, message: &str| GiError::Parse {
        line,
        message: message.to_string(),
    };
    let (first, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing `nodes:` line"))?;
    let rest = header
        .strip_prefix("nodes:")
        .ok_or_else(|| err(first, "expected `nodes:` line"))?;
    let nodes: Vec<Name> = rest.split_whitespace().map(Name::new).collect();
    let known: BTreeSet<&Name> = nodes.iter().collect();
    if known.len() != nodes.len() {
        return Err(err(first, "duplicate node"));
    }
    let mut edges = BTreeSet::new();
    for (line, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let [a, b] = parts[..] else {
            return Err(err(line, "expected `u v`"));
        };
        let (a, b) = (Name::new(a), Name::new(b));
        for n in [&a, &b] {
            if !known.contains(n) {
                return Err(err(line, &format!("unknown node `{n}`")));
            }
        }
        edges.insert((a, b));
    }
    Ok(Graph {
        nodes,
        edges,
        directed,
    })
}

/// Two single-step traces over disjoint objects sharing the label `connect`,
/// and the parameter count to synthesize with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GiTask {
    pub traces: [Trace; 2],
    pub k: usize,
}

pub const PREFIXES: [&str; 2] = ["g1-", "g2-"];

/// Builds the synthesis task for two graphs without isolated vertices.
pub fn encode_gi(g1: &Graph, g2: &Graph) -> Result<GiTask, GiError> {
    if g1.nodes.len() != g2.nodes.len() {
        return Err(GiError::NodeCountMismatch(g1.nodes.len(), g2.nodes.len()));
    }
    for g in [g1, g2] {
        if let Some(n) = g.isolated().into_iter().next() {
            return Err(GiError::IsolatedVertexPresent(n));
        }
    }
    let label = Name::new("connect");
    let trace = |g: &Graph, prefix: &str| {
        let objects = g
            .nodes
            .iter()
            .map(|n| (Name::new(&format!("{prefix}{n}")), Name::new("object")))
            .collect();
        Trace::from_states(
            Name::new(prefix.trim_end_matches('-')),
            objects,
            &[State::new(), g.edge_facts(prefix)],
            std::slice::from_ref(&label),
        )
    };
    Ok(GiTask {
        traces: [trace(g1, PREFIXES[0]), trace(g2, PREFIXES[1])],
        k: g1.nodes.len(),
    })
}

/// `true` iff `f` is a bijection between the node sets under which edges
/// correspond in both directions.
pub fn is_isomorphism(g1: &Graph, g2: &Graph, f: &BTreeMap<Name, Name>) -> bool {
    let dom: BTreeSet<&Name> = f.keys().collect();
    let img: BTreeSet<&Name> = f.values().collect();
    if dom != g1.nodes.iter().collect() || img != g2.nodes.iter().collect() || img.len() != f.len()
    {
        return false;
    }
    g1.nodes.iter().all(|u| {
        g1.nodes
            .iter()
            .all(|v| g1.has_edge(u, v) == g2.has_edge(&f[u], &f[v]))
    })
}

fn unprefix(o: &Name, prefix: &str) -> Name {
    Name::new(
        o.as_str()
            .strip_prefix(prefix)
            .expect("object carries its graph prefix"),
    )
}

/// Decides isomorphism through effect synthesis at a fixed parameter count.
/// Isolated vertices are removed first and paired in sorted order.
pub fn solve_gi(g1: &Graph, g2: &Graph) -> Result<IsoResult, GiError> {
    let (iso1, iso2) = (g1.isolated(), g2.isolated());
    if g1.nodes.len() != g2.nodes.len() || iso1.len() != iso2.len() {
        return Ok(IsoResult::NotIsomorphic);
    }
    let (s1, s2) = (g1.strip_isolated(), g2.strip_isolated());
    let mut f: BTreeMap<Name, Name> = iso1.into_iter().zip(iso2).collect();
    if !s1.nodes.is_empty() {
        let task = encode_gi(&s1, &s2)?;
        let groups = decompose(&task.traces).expect("generated traces are consistent");
        let group = groups.values().next().expect("one label");
        let Some((sol, _)) = synth_fixed_k(group, task.k, &SynthLimits::default())? else {
            return Ok(IsoResult::NotIsomorphic);
        };
        let sigma1 = &sol.substitutions[&group.transitions[0].id];
        let sigma2 = &sol.substitutions[&group.transitions[1].id];
        let distinct: BTreeSet<&Name> = sigma1.objects().iter().collect();
        assert_eq!(
            distinct.len(),
            task.k,
            "first substitution must be a bijection"
        );
        for (a, b) in sigma1.objects().iter().zip(sigma2.objects()) {
            f.insert(unprefix(a, PREFIXES[0]), unprefix(b, PREFIXES[1]));
        }
    }
    if !is_isomorphism(g1, g2, &f) {
        return Err(GiError::BadMapping);
    }
    Ok(IsoResult::Iso(f))
}

/// Exhaustive search over node bijections, trying images in sorted order.
pub fn brute_force_iso(g1: &Graph, g2: &Graph) -> Result<IsoResult, GiError> {
    let n = g1.nodes.len().max(g2.nodes.len());
    if n > 8 {
        return Err(GiError::TooLarge(n));
    }
    if g1.nodes.len() != g2.nodes.len() {
        return Ok(IsoResult::NotIsomorphic);
    }
    let mut from = g1.nodes.clone();
    from.sort();
    let mut to = g2.nodes.clone();
    to.sort();
    fn go(
        g1: &Graph,
        g2: &Graph,
        from: &[Name],
        to: &[Name],
        used: &mut Vec<bool>,
        img: &mut Vec<usize>,
    ) -> bool {
        let i = img.len();
        if i == from.len() {
            return true;
        }
        for j in 0..to.len() {
            if used[j] {
                continue;
            }
            // edges between the new node and already mapped ones (and itself)
            let ok = (0..=i).all(|p| {
                let jp = if p == i { j } else { img[p] };
                g1.has_edge(&from[i], &from[p]) == g2.has_edge(&to[j], &to[jp])
                    && g1.has_edge(&from[p], &from[i]) == g2.has_edge(&to[jp], &to[j])
            });
            if ok {
                used[j] = true;
                img.push(j);
                if go(g1, g2, from, to, used, img) {
                    return true;
                }
                img.pop();
                used[j] = false;
            }
        }
        false
    }
    let mut img = Vec::new();
    if go(g1, g2, &from, &to, &mut vec![false; to.len()], &mut img) {
        Ok(IsoResult::Iso(
            from.iter()
                .cloned()
                .zip(img.iter().map(|&j| to[j].clone()))
                .collect(),
        ))
    } else {
        Ok(IsoResult::NotIsomorphic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::new(
            &["a", "b", "c"],
            [("a", "b"), ("b", "c"), ("c", "a")],
            false,
        )
    }

    fn path3() -> Graph {
        Graph::new(&["x", "y", "z"], [("x", "y"), ("y", "z")], false)
    }

    #[test]
    fn different_edge_counts_are_refuted_quickly() {
        let g1 = Graph::new(
            &["v0", "v1", "v2", "v3", "v4", "v5"],
            [
                ("v1", "v5"),
                ("v2", "v4"),
                ("v2", "v5"),
                ("v3", "v0"),
                ("v4", "v0"),
            ]
            .into_iter()
            .chain([
                ("v4", "v1"),
                ("v5", "v0"),
                ("v5", "v1"),
                ("v5", "v3"),
                ("v5", "v4"),
            ]),
            true,
        );
        let g2 = Graph::new(
            &["w0", "w1", "w2", "w3", "w4", "w5"],
            [("w0", "w1"), ("w0", "w2"), ("w3", "w0"), ("w3", "w2")]
                .into_iter()
                .chain([("w4", "w1"), ("w4", "w2"), ("w4", "w5"), ("w5", "w4")]),
            true,
        );
        let start = std::time::Instant::now();
        assert_eq!(solve_gi(&g1, &g2).unwrap(), IsoResult::NotIsomorphic);
        assert!(start.elapsed() < std::time::Duration::from_secs(5));
    }

    #[test]
    fn triangle_task_has_six_edge_facts() {
        let t = encode_gi(&k3(), &k3()).unwrap();
        assert_eq!(t.k, 3);
        for tr in &t.traces {
            assert_eq!(tr.steps[0].added.len(), 6);
            assert!(tr.init.is_empty());
        }
        let a: BTreeSet<&Name> = t.traces[0].objects.keys().collect();
        assert!(t.traces[1].objects.keys().all(|o| !a.contains(o)));
    }

    #[test]
    fn encode_rejects_bad_inputs() {
        let two = Graph::new(&["a", "b"], [("a", "b")], false);
        assert_eq!(
            encode_gi(&two, &k3()),
            Err(GiError::NodeCountMismatch(2, 3))
        );
        let lonely = Graph::new(&["a", "b", "c"], [("a", "b")], false);
        assert_eq!(
            encode_gi(&lonely, &k3()),
            Err(GiError::IsolatedVertexPresent(Name::new("c")))
        );
        let empty = Graph::new::<[(&str, &str); 0], &str>(&[], [], false);
        let t = encode_gi(&empty, &empty).unwrap();
        assert_eq!(t.k, 0);
        assert!(t.traces[0].steps[0].added.is_empty());
    }

    #[test]
    fn triangle_is_self_isomorphic() {
        let r = solve_gi(&k3(), &k3()).unwrap();
        let IsoResult::Iso(f) = &r else {
            panic!("expected iso")
        };
        assert!(is_isomorphism(&k3(), &k3(), f));
        assert_eq!(
            brute_force_iso(&k3(), &k3()).unwrap().to_string(),
            "iso: a->a b->b c->c"
        );
    }

    #[test]
    fn triangle_is_not_a_path() {
        assert_eq!(solve_gi(&k3(), &path3()).unwrap(), IsoResult::NotIsomorphic);
        assert_eq!(
            brute_force_iso(&k3(), &path3()).unwrap(),
            IsoResult::NotIsomorphic
        );
        let two = Graph::new(&["a", "b"], [("a", "b")], false);
        assert_eq!(solve_gi(&two, &k3()).unwrap(), IsoResult::NotIsomorphic);
    }

    #[test]
    fn directed_path_orientation_matters() {
        let p = Graph::new(&["a", "b", "c"], [("a", "b"), ("b", "c")], true);
        let q = Graph::new(&["x", "y", "z"], [("y", "x"), ("z", "y")], true);
        let r = solve_gi(&p, &q).unwrap();
        let IsoResult::Iso(f) = r else { panic!() };
        assert_eq!(f[&Name::new("a")], Name::new("z"));
        let star_out = Graph::new(&["a", "b", "c"], [("a", "b"), ("a", "c")], true);
        let star_in = Graph::new(&["a", "b", "c"], [("b", "a"), ("c", "a")], true);
        assert_eq!(
            solve_gi(&star_out, &star_in).unwrap(),
            IsoResult::NotIsomorphic
        );
    }

    #[test]
    fn isolated_vertices_pair_up() {
        let g = Graph::new(&["a", "b", "q"], [("a", "b")], false);
        let h = Graph::new(&["u", "p", "v"], [("u", "v")], false);
        let r = solve_gi(&g, &h).unwrap();
        let IsoResult::Iso(f) = r else { panic!() };
        assert_eq!(f[&Name::new("q")], Name::new("p"));
        let lone = Graph::new::<[(&str, &str); 0], &str>(&["n"], [], true);
        assert!(solve_gi(&lone, &lone).unwrap().is_iso());
        assert!(brute_force_iso(&lone, &lone).unwrap().is_iso());
    }

    #[test]
    fn brute_force_limit() {
        let names: Vec<String> = (0..9).map(|i| format!("n{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let g = Graph::new::<[(&str, &str); 0], &str>(&refs, [], true);
        assert_eq!(brute_force_iso(&g, &g), Err(GiError::TooLarge(9)));
    }

    #[test]
    fn graph_files() {
        let g = parse_graph("nodes: a b c\na b\n\n# comment\nb c\n", false).unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(
            parse_graph("nodes: a b\na b c\n", true),
            Err(GiError::Parse {
                line: 2,
                message: "expected `u v`".into()
            })
        );
        assert!(matches!(
            parse_graph("nodes: a\na z\n", true),
            Err(GiError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("a b\n", true),
            Err(GiError::Parse { line: 1, .. })
        ));
    }
}
