//! Graphs of groups with free or free abelian vertex groups and trivial,
//! cyclic or free abelian edge groups.
//!
//! Oriented edges are stored in pairs: edge `2k` is the orientation given in
//! the input and `2k + 1` its reverse, so `ē = e ^ 1`. Only the boundary
//! images of the stored orientation are kept; `α_ē = ω_e` is derived.
//!
//! Elements of `π₁(𝔸)` are handled as 𝔸-paths. [`GraphOfGroups::normal_form`]
//! pushes edge-group factors to the right, picking the shortlex-least (free
//! vertex) or Hermite-reduced (abelian vertex) left coset representative in
//! front of every edge, and collapses pinches on the way. This gives a
//! canonical form and hence the word problem.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{input, Error, Result};
use crate::lattice::{hermite, to_bigints, Hermite, IntMatrix};
use crate::words::{is_identifier, Alphabet, Word};

/// Orders ids numerically when both parse as integers, otherwise as strings.
pub(crate) fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Disconnected,
    BrokenInvolution,
    NonInjectiveBoundary,
    RankDeficient,
    KindMismatch,
    ImageShape,
    DuplicateGenerator(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match &self.kind {
            ViolationKind::Disconnected => "graph is not connected".to_string(),
            ViolationKind::BrokenInvolution => "edge involution broken".to_string(),
            ViolationKind::NonInjectiveBoundary => "non-injective boundary".to_string(),
            ViolationKind::RankDeficient => "rank deficient".to_string(),
            ViolationKind::KindMismatch => "edge group kind incompatible with vertex group".to_string(),
            ViolationKind::ImageShape => "boundary image has the wrong shape".to_string(),
            ViolationKind::DuplicateGenerator(n) => format!("generator `{n}` declared twice"),
        };
        write!(f, "{}: {}", self.subject, what)
    }
}

#[derive(Clone, Debug)]
struct OrientedEdge {
    id: String,
    from: usize,
    to: usize,
}

/// The underlying graph `(VA, EA, α, ω, ⁻¹)`.
#[derive(Clone, Debug)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<OrientedEdge>,
}

impl Graph {
    /// `pairs` lists `(id, reverse id, from, to)` per edge pair. Vertices are
    /// ordered by id.
    pub fn new(mut vertices: Vec<String>, pairs: &[(String, String, String, String)]) -> Result<Self> {
        vertices.sort_by(|a, b| id_order(a, b));
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return input(format!("vertex `{}` declared twice", w[0]));
        }
        let find = |v: &str| {
            vertices
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| Error::Input(format!("unknown vertex `{v}`")))
        };
        let mut edges = Vec::with_capacity(2 * pairs.len());
        let mut seen = BTreeSet::new();
        for (id, rev, from, to) in pairs {
            for e in [id, rev] {
                if !seen.insert(e.clone()) {
                    return input(format!("edge id `{e}` used twice"));
                }
            }
            let (f, t) = (find(from)?, find(to)?);
            edges.push(OrientedEdge { id: id.clone(), from: f, to: t });
            edges.push(OrientedEdge { id: rev.clone(), from: t, to: f });
        }
        Ok(Graph { vertices, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of oriented edges, `|EA|`.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edges[e].id
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn alpha(&self, e: usize) -> usize {
        self.edges[e].from
    }

    pub fn omega(&self, e: usize) -> usize {
        self.edges[e].to
    }

    pub fn reverse(&self, e: usize) -> usize {
        e ^ 1
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for e in 0..self.edges.len() {
            let r = self.reverse(e);
            if r == e || self.reverse(r) != e || self.alpha(r) != self.omega(e) {
                out.push(Violation { subject: format!("edge {}", self.edge_id(e)), kind: ViolationKind::BrokenInvolution });
            }
        }
        if !self.vertices.is_empty() && self.bfs_tree().1.iter().any(|&seen| !seen) {
            out.push(Violation { subject: "graph".into(), kind: ViolationKind::Disconnected });
        }
        out
    }

    /// Breadth-first search from vertex 0, least edge id first. Returns the
    /// parent edge of every vertex (pointing into it) and the visited set.
    fn bfs_tree(&self) -> (Vec<Option<usize>>, Vec<bool>) {
        let n = self.vertices.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        if n == 0 {
            return (parent, seen);
        }
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| id_order(&self.edges[a].id, &self.edges[b].id));
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &e in order.iter().filter(|&&e| self.alpha(e) == v) {
                let w = self.omega(e);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    queue.push_back(w);
                }
            }
        }
        (parent, seen)
    }
}

/// A maximal subtree as a set of oriented edges, closed under reversal.
/// Deterministic: breadth-first from the least vertex id, least edge id first.
pub fn spanning_tree(g: &Graph) -> Result<BTreeSet<usize>> {
    let (parent, seen) = g.bfs_tree();
    if seen.iter().any(|&s| !s) {
        return input("graph is not connected");
    }
    Ok(parent.into_iter().flatten().flat_map(|e| [e, e ^ 1]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Free,
    FreeAbelian,
}

/// An element of a vertex group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    Free(Word),
    Abelian(Vec<i64>),
}

impl Element {
    pub fn is_identity(&self) -> bool {
        match self {
            Element::Free(w) => w.is_identity(),
            Element::Abelian(v) => v.iter().all(|&x| x == 0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VertexGroup {
    kind: GroupKind,
    alphabet: Alphabet,
}

impl VertexGroup {
    pub fn free<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        Ok(VertexGroup { kind: GroupKind::Free, alphabet: Alphabet::new(names)? })
    }

    pub fn abelian<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        Ok(VertexGroup { kind: GroupKind::FreeAbelian, alphabet: Alphabet::new(names)? })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn identity(&self) -> Element {
        match self.kind {
            GroupKind::Free => Element::Free(Word::identity()),
            GroupKind::FreeAbelian => Element::Abelian(vec![0; self.rank()]),
        }
    }

    pub fn generator(&self, i: usize, sign: i64) -> Element {
        match self.kind {
            GroupKind::Free => {
                let name = self.alphabet.names().nth(i).expect("generator index in range");
                Element::Free(Word::power_of_generator(name, sign))
            }
            GroupKind::FreeAbelian => {
                let mut v = vec![0; self.rank()];
                v[i] = sign;
                Element::Abelian(v)
            }
        }
    }

    pub fn contains(&self, a: &Element) -> bool {
        match (self.kind, a) {
            (GroupKind::Free, Element::Free(w)) => self.alphabet.check(w).is_ok(),
            (GroupKind::FreeAbelian, Element::Abelian(v)) => v.len() == self.rank(),
            _ => false,
        }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Free(x), Element::Free(y)) => Element::Free(x.mul(y)),
            (Element::Abelian(x), Element::Abelian(y)) => {
                Element::Abelian(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            _ => panic!("mixed element kinds in one vertex group"),
        }
    }

    pub fn inverse(&self, a: &Element) -> Element {
        match a {
            Element::Free(x) => Element::Free(x.inverse()),
            Element::Abelian(x) => Element::Abelian(x.iter().map(|p| -p).collect()),
        }
    }

    pub fn pow(&self, a: &Element, k: i64) -> Element {
        match a {
            Element::Free(x) => Element::Free(x.pow(k)),
            Element::Abelian(x) => Element::Abelian(x.iter().map(|p| p * k).collect()),
        }
    }

    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let w = self.alphabet.parse(text)?;
        Ok(match self.kind {
            GroupKind::Free => Element::Free(w),
            GroupKind::FreeAbelian => Element::Abelian(w.exponent_vector(&self.alphabet)?),
        })
    }

    /// The element as a word in the vertex generators.
    pub fn word(&self, a: &Element) -> Word {
        match a {
            Element::Free(w) => w.clone(),
            Element::Abelian(v) => Word::from_exponents(&self.alphabet, v),
        }
    }

    /// Defining relators: commutators of the generators when abelian.
    pub fn relators(&self) -> Vec<Word> {
        if self.kind == GroupKind::Free {
            return Vec::new();
        }
        let names: Vec<&str> = self.alphabet.names().collect();
        let mut out = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let (x, y) = (Word::generator(names[i]), Word::generator(names[j]));
                out.push(x.mul(&y).mul(&x.inverse()).mul(&y.inverse()));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Trivial,
    Cyclic,
    FreeAbelian(usize),
}

/// Edge group of a stored edge with the images of its generators under the
/// two boundary maps.
#[derive(Clone, Debug)]
pub struct EdgeGroup {
    kind: EdgeKind,
    alpha: Vec<Element>,
    omega: Vec<Element>,
}

impl EdgeGroup {
    pub fn trivial() -> Self {
        EdgeGroup { kind: EdgeKind::Trivial, alpha: Vec::new(), omega: Vec::new() }
    }

    pub fn cyclic(alpha: Element, omega: Element) -> Self {
        EdgeGroup { kind: EdgeKind::Cyclic, alpha: vec![alpha], omega: vec![omega] }
    }

    /// Columns of the matrices are the images of the edge generators.
    pub fn abelian(alpha: &[Vec<i64>], omega: &[Vec<i64>]) -> Self {
        EdgeGroup {
            kind: EdgeKind::FreeAbelian(alpha.len()),
            alpha: alpha.iter().cloned().map(Element::Abelian).collect(),
            omega: omega.iter().cloned().map(Element::Abelian).collect(),
        }
    }

    pub fn kind(&self) -> EdgeKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        match self.kind {
            EdgeKind::Trivial => 0,
            EdgeKind::Cyclic => 1,
            EdgeKind::FreeAbelian(r) => r,
        }
    }
}

/// Hermite data of `α_e(A_e)` inside an abelian vertex group.
#[derive(Clone, Debug)]
struct EdgeLattice {
    hnf: Hermite,
}

/// An 𝔸-path `(a₀, e₁, a₁, …, e_k, a_k)` starting at `start`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct APath {
    pub start: usize,
    pub labels: Vec<Element>,
    pub edges: Vec<usize>,
}

impl APath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// A finite presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.relators.iter().map(|r| r.to_string()).collect();
        write!(f, "<{} | {}>", self.generators.join(", "), rels.join(", "))
    }
}

/// `π₁(𝔸, T)` after eliminating tree letters and reverse-edge letters.
#[derive(Clone, Debug)]
pub struct Pi1 {
    pub presentation: Presentation,
    /// One letter `s_e` per oriented edge before elimination, i.e. `|EA|`.
    pub edge_letters: usize,
    /// Letters killed by the tree relators `s_e` for `e ∈ ET`.
    pub killed: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
enum Letter {
    Vertex(usize, usize),
    Edge(usize),
}

#[derive(Clone, Debug)]
pub struct GraphOfGroups {
    graph: Graph,
    groups: Vec<VertexGroup>,
    edge_groups: Vec<EdgeGroup>,
    lattices: Vec<Option<EdgeLattice>>,
    tree_parent: Vec<Option<usize>>,
    tree: BTreeSet<usize>,
    letters: HashMap<String, Letter>,
}

impl GraphOfGroups {
    /// `groups` follows the graph's vertex order, `edge_groups` its edge pairs.
    pub fn new(graph: Graph, groups: Vec<VertexGroup>, edge_groups: Vec<EdgeGroup>) -> Result<Self> {
        if groups.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch { expected: graph.vertex_count(), got: groups.len() });
        }
        if 2 * edge_groups.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch { expected: graph.edge_count() / 2, got: edge_groups.len() });
        }
        let (tree_parent, seen) = graph.bfs_tree();
        let tree = if seen.iter().all(|&s| s) {
            tree_parent.iter().flatten().flat_map(|&e| [e, e ^ 1]).collect()
        } else {
            BTreeSet::new()
        };
        let mut g = GraphOfGroups {
            graph,
            groups,
            edge_groups,
            lattices: Vec::new(),
            tree_parent,
            tree,
            letters: HashMap::new(),
        };
        g.lattices = (0..g.graph.edge_count()).map(|e| g.edge_lattice(e)).collect();
        for (v, grp) in g.groups.iter().enumerate() {
            for (i, name) in grp.alphabet.names().enumerate() {
                g.letters.entry(name.to_string()).or_insert(Letter::Vertex(v, i));
            }
        }
        for k in 0..g.edge_groups.len() {
            let name = g.edge_letter(2 * k);
            g.letters.entry(name).or_insert(Letter::Edge(k));
        }
        Ok(g)
    }

    fn edge_lattice(&self, e: usize) -> Option<EdgeLattice> {
        let v = self.graph.alpha(e);
        if self.groups[v].kind != GroupKind::FreeAbelian || self.edge_group(e).kind == EdgeKind::Trivial {
            return None;
        }
        let cols: Vec<Vec<BigInt>> = self
            .alpha_images(e)
            .iter()
            .map(|x| match x {
                Element::Abelian(v) => Some(to_bigints(v)),
                Element::Free(_) => None,
            })
            .collect::<Option<_>>()?;
        if cols.iter().any(|c| c.len() != self.groups[v].rank()) {
            return None;
        }
        let hnf = hermite(&IntMatrix::from_columns(self.groups[v].rank(), &cols));
        (hnf.rank() == cols.len()).then_some(EdgeLattice { hnf })
    }

    /// Parses the line-oriented text format:
    ///
    /// ```text
    /// vertex <id> free <rank> <names…>
    /// vertex <id> abelian <rank> <names…>
    /// edge <id> <revId> <from> <to> trivial
    /// edge <id> <revId> <from> <to> cyclic alpha=<word> omega=<word>
    /// edge <id> <revId> <from> <to> abelian alphaMatrix=<rows;…> omegaMatrix=<rows;…>
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices: Vec<(String, VertexGroup)> = Vec::new();
        let mut pairs = Vec::new();
        let mut specs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "vertex" => {
                    if tokens.len() < 4 {
                        return Err(err("vertex needs `<id> <kind> <rank> <names…>`"));
                    }
                    let rank: usize = tokens[3].parse().map_err(|_| err("bad rank"))?;
                    let names = &tokens[4..];
                    if names.len() != rank {
                        return Err(err("rank does not match number of generator names"));
                    }
                    let group = match tokens[2] {
                        "free" => VertexGroup::free(names)?,
                        "abelian" => VertexGroup::abelian(names)?,
                        _ => return Err(err("vertex kind must be `free` or `abelian`")),
                    };
                    vertices.push((tokens[1].to_string(), group));
                }
                "edge" => {
                    if tokens.len() < 6 {
                        return Err(err("edge needs `<id> <revId> <from> <to> <kind> …`"));
                    }
                    pairs.push((
                        tokens[1].to_string(),
                        tokens[2].to_string(),
                        tokens[3].to_string(),
                        tokens[4].to_string(),
                    ));
                    let rest = line.splitn(7, char::is_whitespace).nth(6).unwrap_or("").trim();
                    specs.push((lineno + 1, tokens[5].to_string(), rest.to_string()));
                }
                other => return Err(err(&format!("unknown directive `{other}`"))),
            }
        }
        let graph = Graph::new(vertices.iter().map(|(id, _)| id.clone()).collect(), &pairs)?;
        let group_of = |id: &str| &vertices.iter().find(|(v, _)| v == id).expect("vertex resolved").1;
        let mut groups_sorted = Vec::new();
        for v in 0..graph.vertex_count() {
            groups_sorted.push(group_of(graph.vertex_id(v)).clone());
        }
        let mut edge_groups = Vec::new();
        for ((lineno, kind, rest), (_, _, from, to)) in specs.iter().zip(&pairs) {
            let err = |msg: &str| Error::Parse(format!("line {lineno}: {msg}"));
            let kv = key_values(rest, &["alpha", "omega", "alphaMatrix", "omegaMatrix"]);
            let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
            let eg = match kind.as_str() {
                "trivial" => EdgeGroup::trivial(),
                "cyclic" => {
                    let a = get("alpha").ok_or_else(|| err("cyclic edge needs alpha="))?;
                    let o = get("omega").ok_or_else(|| err("cyclic edge needs omega="))?;
                    EdgeGroup::cyclic(group_of(from).parse_element(a)?, group_of(to).parse_element(o)?)
                }
                "abelian" => {
                    let a = get("alphaMatrix").ok_or_else(|| err("abelian edge needs alphaMatrix="))?;
                    let o = get("omegaMatrix").ok_or_else(|| err("abelian edge needs omegaMatrix="))?;
                    let (a, o) = (matrix_columns(a)?, matrix_columns(o)?);
                    if a.len() != o.len() {
                        return Err(err("alpha and omega matrices have different column counts"));
                    }
                    EdgeGroup::abelian(&a, &o)
                }
                _ => return Err(err("edge kind must be trivial, cyclic or abelian")),
            };
            edge_groups.push(eg);
        }
        GraphOfGroups::new(graph, groups_sorted, edge_groups)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_group(&self, v: usize) -> &VertexGroup {
        &self.groups[v]
    }

    /// Edge group of an oriented edge.
    pub fn edge_group(&self, e: usize) -> &EdgeGroup {
        &self.edge_groups[e / 2]
    }

    /// Images of the edge generators under `α_e`.
    pub fn alpha_images(&self, e: usize) -> &[Element] {
        let eg = self.edge_group(e);
        if e % 2 == 0 {
            &eg.alpha
        } else {
            &eg.omega
        }
    }

    /// `α_e(c)` for an edge-group element given by its coordinates.
    pub fn alpha_image(&self, e: usize, c: &[i64]) -> Element {
        let grp = &self.groups[self.graph.alpha(e)];
        let mut out = grp.identity();
        for (x, &k) in self.alpha_images(e).iter().zip(c) {
            out = grp.mul(&out, &grp.pow(x, k));
        }
        out
    }

    /// `ω_e(c) = α_ē(c)`.
    pub fn omega_image(&self, e: usize, c: &[i64]) -> Element {
        self.alpha_image(e ^ 1, c)
    }

    /// The oriented edges of the default spanning tree.
    pub fn tree(&self) -> &BTreeSet<usize> {
        &self.tree
    }

    /// Name of the letter `s_e` of a stored edge: its id when that is a valid
    /// generator name, `s_<id>` otherwise.
    pub fn edge_letter(&self, e: usize) -> String {
        let id = self.graph.edge_id(e & !1);
        if is_identifier(id) {
            id.to_string()
        } else {
            format!("s_{id}")
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = self.graph.violations();
        let mut names: HashMap<String, usize> = HashMap::new();
        for grp in &self.groups {
            for n in grp.alphabet.names() {
                *names.entry(n.to_string()).or_default() += 1;
            }
        }
        for k in 0..self.edge_groups.len() {
            *names.entry(self.edge_letter(2 * k)).or_default() += 1;
        }
        let mut dups: Vec<_> = names.into_iter().filter(|(_, c)| *c > 1).map(|(n, _)| n).collect();
        dups.sort();
        for n in dups {
            out.push(Violation { subject: "generators".into(), kind: ViolationKind::DuplicateGenerator(n) });
        }
        for k in 0..self.edge_groups.len() {
            let e = 2 * k;
            let subject = format!("edge {}", self.graph.edge_id(e));
            let eg = &self.edge_groups[k];
            let ends = [self.graph.alpha(e), self.graph.omega(e)];
            let mut push = |kind| out.push(Violation { subject: subject.clone(), kind });
            if let EdgeKind::FreeAbelian(_) = eg.kind {
                if ends.iter().any(|&v| self.groups[v].kind != GroupKind::FreeAbelian) {
                    push(ViolationKind::KindMismatch);
                    continue;
                }
            }
            let shaped = [(&eg.alpha, ends[0]), (&eg.omega, ends[1])].iter().all(|(imgs, v)| {
                imgs.len() == eg.rank() && imgs.iter().all(|x| self.groups[*v].contains(x))
            });
            if !shaped {
                push(ViolationKind::ImageShape);
                continue;
            }
            for side in [e, e ^ 1] {
                let imgs = self.alpha_images(side);
                match eg.kind {
                    EdgeKind::Trivial => {}
                    EdgeKind::Cyclic => {
                        if imgs[0].is_identity() {
                            push(ViolationKind::NonInjectiveBoundary);
                        }
                    }
                    EdgeKind::FreeAbelian(_) => {
                        if self.lattices[side].is_none() {
                            push(ViolationKind::RankDeficient);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Writes `a = r · α_e(c)` with `r` the canonical representative of the
    /// left coset `a·α_e(A_e)`.
    pub fn coset_decompose(&self, e: usize, a: &Element) -> (Element, Vec<i64>) {
        let eg = self.edge_group(e);
        if eg.kind == EdgeKind::Trivial {
            return (a.clone(), Vec::new());
        }
        match a {
            Element::Free(w) => {
                let Element::Free(u) = &self.alpha_images(e)[0] else {
                    unreachable!("validated: free vertex carries word images")
                };
                let grp = &self.groups[self.graph.alpha(e)];
                let core = u.cyclic_reduce().0.len().max(1);
                let bound = (2 * w.len() / core + 1) as i64;
                let mut best = (w.clone(), 0i64);
                for c in -bound..=bound {
                    let r = w.mul(&u.pow(-c));
                    if grp.alphabet.shortlex(&r, &best.0) == Ordering::Less {
                        best = (r, c);
                    }
                }
                (Element::Free(best.0), vec![best.1])
            }
            Element::Abelian(v) => {
                let lat = self.lattices[e].as_ref().expect("validated: full-rank abelian edge image");
                let (residue, q) = lat.hnf.reduce(&to_bigints(v));
                // the pivot columns of H = M·U are all columns, so c = U·q
                let c = lat.hnf.u.mul_vec(&q).expect("dimensions agree");
                (
                    Element::Abelian(residue.iter().map(|x| x.to_i64().expect("fits i64")).collect()),
                    c.iter().map(|x| x.to_i64().expect("fits i64")).collect(),
                )
            }
        }
    }

    pub fn end_vertex(&self, p: &APath) -> usize {
        p.edges.last().map_or(p.start, |&e| self.graph.omega(e))
    }

    pub fn check_path(&self, p: &APath) -> Result<()> {
        if p.start >= self.graph.vertex_count() {
            return input("path starts at an unknown vertex");
        }
        if p.labels.len() != p.edges.len() + 1 {
            return input("path needs one more label than edges");
        }
        let mut at = p.start;
        if !self.groups[at].contains(&p.labels[0]) {
            return input("label 0 is not in the start vertex group");
        }
        for (i, &e) in p.edges.iter().enumerate() {
            if e >= self.graph.edge_count() || self.graph.alpha(e) != at {
                return input(format!("edge {} does not continue the path", i + 1));
            }
            at = self.graph.omega(e);
            if !self.groups[at].contains(&p.labels[i + 1]) {
                return input(format!("label {} is not in its vertex group", i + 1));
            }
        }
        Ok(())
    }

    /// Canonical representative of the class of `p`.
    pub fn normal_form(&self, p: &APath) -> Result<APath> {
        self.check_path(p)?;
        let mut edges: Vec<usize> = Vec::with_capacity(p.edges.len());
        let mut labels: Vec<Element> = vec![p.labels[0].clone()];
        for (i, &e) in p.edges.iter().enumerate() {
            let next = &p.labels[i + 1];
            let pending = labels.pop().expect("a pending label is always present");
            let (rep, c) = self.coset_decompose(e, &pending);
            if edges.last() == Some(&(e ^ 1)) && rep.is_identity() {
                // (prev, ē, ω_ē(c), e, next) ~ (prev · α_ē(c) · next)
                edges.pop();
                let prev = labels.pop().expect("label before the popped edge");
                let grp = &self.groups[self.graph.omega(e)];
                let merged = grp.mul(&grp.mul(&prev, &self.omega_image(e, &c)), next);
                labels.push(merged);
            } else {
                let grp = &self.groups[self.graph.omega(e)];
                labels.push(rep);
                edges.push(e);
                labels.push(grp.mul(&self.omega_image(e, &c), next));
            }
        }
        Ok(APath { start: p.start, labels, edges })
    }

    /// Concatenation of composable paths.
    pub fn concat(&self, p: &APath, q: &APath) -> Result<APath> {
        let end = self.end_vertex(p);
        if end != q.start {
            return input("paths are not composable");
        }
        let grp = &self.groups[end];
        let mut labels = p.labels.clone();
        let last = labels.pop().expect("non-empty labels");
        labels.push(grp.mul(&last, &q.labels[0]));
        labels.extend_from_slice(&q.labels[1..]);
        let mut edges = p.edges.clone();
        edges.extend_from_slice(&q.edges);
        Ok(APath { start: p.start, labels, edges })
    }

    pub fn inverse_path(&self, p: &APath) -> APath {
        let mut at = self.end_vertex(p);
        let mut labels = Vec::with_capacity(p.labels.len());
        for (i, a) in p.labels.iter().enumerate().rev() {
            labels.push(self.groups[at].inverse(a));
            if i > 0 {
                at = self.graph.alpha(p.edges[i - 1]);
            }
        }
        APath { start: self.end_vertex(p), labels, edges: p.edges.iter().rev().map(|e| e ^ 1).collect() }
    }

    pub fn trivial_path(&self, v: usize) -> APath {
        APath { start: v, labels: vec![self.groups[v].identity()], edges: Vec::new() }
    }

    /// A path along `edges` from `start` with identity labels.
    pub fn edge_path(&self, start: usize, edges: &[usize]) -> APath {
        let mut labels = vec![self.groups[start].identity()];
        labels.extend(edges.iter().map(|&e| self.groups[self.graph.omega(e)].identity()));
        APath { start, labels, edges: edges.to_vec() }
    }

    pub fn base_vertex(&self) -> usize {
        0
    }

    /// Tree edges from the base vertex to `v`.
    fn tree_path(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut at = v;
        while let Some(e) = self.tree_parent[at] {
            out.push(e);
            at = self.graph.alpha(e);
        }
        out.reverse();
        out
    }

    /// The loop at the base vertex representing a presentation generator.
    fn letter_path(&self, name: &str, inverse: bool) -> Result<APath> {
        let letter = self.letters.get(name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        let path = match *letter {
            Letter::Vertex(v, i) => {
                let mut edges = self.tree_path(v);
                let k = edges.len();
                edges.extend(self.tree_path(v).iter().rev().map(|e| e ^ 1));
                let mut p = self.edge_path(self.base_vertex(), &edges);
                p.labels[k] = self.groups[v].generator(i, if inverse { -1 } else { 1 });
                p
            }
            Letter::Edge(k) => {
                if self.tree.contains(&(2 * k)) {
                    return Err(Error::UnknownGenerator(name.to_string()));
                }
                let e = if inverse { 2 * k + 1 } else { 2 * k };
                let mut edges = self.tree_path(self.graph.alpha(e));
                edges.push(e);
                edges.extend(self.tree_path(self.graph.omega(e)).iter().rev().map(|e| e ^ 1));
                self.edge_path(self.base_vertex(), &edges)
            }
        };
        Ok(path)
    }

    /// Translates a word over the presentation generators into a loop at the
    /// base vertex.
    pub fn word_to_path(&self, w: &Word) -> Result<APath> {
        self.validate()?;
        let mut p = self.trivial_path(self.base_vertex());
        for g in w.letters() {
            p = self.concat(&p, &self.letter_path(g.name(), g.is_inverse())?)?;
        }
        Ok(p)
    }

    /// Reads a loop at the base vertex back as a word: `a₀ s_{e₁} a₁ …` with
    /// tree letters dropped and `s_ē = s_e⁻¹`.
    pub fn path_to_word(&self, p: &APath) -> Result<Word> {
        self.check_path(p)?;
        if p.start != self.base_vertex() || self.end_vertex(p) != self.base_vertex() {
            return input("only loops at the base vertex read as words");
        }
        let mut at = p.start;
        let mut out = self.groups[at].word(&p.labels[0]);
        for (i, &e) in p.edges.iter().enumerate() {
            if !self.tree.contains(&e) {
                let s = Word::generator(&self.edge_letter(e));
                out = out.mul(&if e % 2 == 0 { s } else { s.inverse() });
            }
            at = self.graph.omega(e);
            out = out.mul(&self.groups[at].word(&p.labels[i + 1]));
        }
        Ok(out)
    }

    /// Word problem in `π₁(𝔸, T)` for words over the presentation generators.
    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        let nf = self.normal_form(&self.word_to_path(w)?)?;
        Ok(nf.edges.is_empty() && nf.labels[0].is_identity())
    }

    /// `π₁(𝔸, T)` with tree letters and reverse-edge letters eliminated.
    pub fn fundamental_group(&self, tree: &BTreeSet<usize>) -> Result<Pi1> {
        self.validate()?;
        self.check_tree(tree)?;
        let mut generators: Vec<String> = Vec::new();
        let mut relators: Vec<Word> = Vec::new();
        for grp in &self.groups {
            generators.extend(grp.alphabet.names().map(str::to_string));
            relators.extend(grp.relators());
        }
        let mut killed = Vec::new();
        for k in 0..self.edge_groups.len() {
            let e = 2 * k;
            let in_tree = tree.contains(&e);
            let s = Word::generator(&self.edge_letter(e));
            if in_tree {
                killed.push(self.graph.edge_id(e).to_string());
                killed.push(self.graph.edge_id(e ^ 1).to_string());
            } else {
                generators.push(self.edge_letter(e));
            }
            let (ga, go) = (&self.groups[self.graph.alpha(e)], &self.groups[self.graph.omega(e)]);
            for j in 0..self.edge_group(e).rank() {
                let mut c = vec![0; self.edge_group(e).rank()];
                c[j] = 1;
                let a = ga.word(&self.alpha_image(e, &c));
                let o = go.word(&self.omega_image(e, &c));
                // s_e ω_e(x) s_e⁻¹ = α_e(x); with s_e = 1 it reads α_e(x) = ω_e(x)
                let r = if in_tree {
                    a.mul(&o.inverse())
                } else {
                    s.mul(&o).mul(&s.inverse()).mul(&a.inverse())
                };
                if !r.is_identity() {
                    relators.push(r);
                }
            }
        }
        Ok(Pi1 {
            presentation: Presentation { generators, relators },
            edge_letters: self.graph.edge_count(),
            killed,
        })
    }

    pub fn pi1_presentation(&self, tree: &BTreeSet<usize>) -> Result<Presentation> {
        Ok(self.fundamental_group(tree)?.presentation)
    }

    /// Presentation over the default spanning tree.
    pub fn presentation(&self) -> Result<Presentation> {
        self.pi1_presentation(&self.tree.clone())
    }

    fn check_tree(&self, tree: &BTreeSet<usize>) -> Result<()> {
        let n = self.graph.vertex_count();
        if tree.iter().any(|&e| e >= self.graph.edge_count() || !tree.contains(&(e ^ 1))) {
            return input("tree must be a set of edge pairs");
        }
        if tree.len() != 2 * n.saturating_sub(1) {
            return input("tree has the wrong number of edges");
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            for &e in tree.iter().filter(|&&e| self.graph.alpha(e) == v) {
                let w = self.graph.omega(e);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return input("tree does not span the graph");
        }
        Ok(())
    }

    /// Parses `[<vertex>:] label ; edge ; label ; …`. Without a vertex prefix
    /// the path starts at the initial vertex of its first edge.
    pub fn parse_path(&self, text: &str) -> Result<APath> {
        let (start, body) = match text.split_once(':') {
            Some((v, rest)) => {
                let v = v.trim();
                let idx = self
                    .graph
                    .vertex_index(v)
                    .ok_or_else(|| Error::Input(format!("unknown vertex `{v}`")))?;
                (Some(idx), rest)
            }
            None => (None, text),
        };
        let parts: Vec<&str> = body.split(';').map(str::trim).collect();
        if parts.len() % 2 == 0 {
            return Err(Error::Parse("path must alternate label ; edge ; label".into()));
        }
        let edges = parts
            .iter()
            .skip(1)
            .step_by(2)
            .map(|id| self.graph.edge_index(id).ok_or_else(|| Error::Input(format!("unknown edge `{id}`"))))
            .collect::<Result<Vec<_>>>()?;
        let start = match (start, edges.first()) {
            (Some(v), _) => v,
            (None, Some(&e)) => self.graph.alpha(e),
            (None, None) => return Err(Error::Parse("a path without edges needs `<vertex>:`".into())),
        };
        let mut labels = Vec::with_capacity(edges.len() + 1);
        let mut at = start;
        for (i, text) in parts.iter().step_by(2).enumerate() {
            if i > 0 {
                let e = edges[i - 1];
                if self.graph.alpha(e) != at {
                    return input(format!("edge `{}` does not continue the path", self.graph.edge_id(e)));
                }
                at = self.graph.omega(e);
            }
            labels.push(self.groups[at].parse_element(if text.is_empty() { "1" } else { text })?);
        }
        Ok(APath { start, labels, edges })
    }

    pub fn format_path(&self, p: &APath) -> String {
        let mut out = format!("{}: {}", self.graph.vertex_id(p.start), self.groups[p.start].word(&p.labels[0]));
        for (i, &e) in p.edges.iter().enumerate() {
            let at = self.graph.omega(e);
            out.push_str(&format!(" ; {} ; {}", self.graph.edge_id(e), self.groups[at].word(&p.labels[i + 1])));
        }
        out
    }
}

/// Splits `alpha=a b omega=c` style text on the given keys.
fn key_values(text: &str, keys: &[&str]) -> Vec<(String, String)> {
    let mut marks: Vec<(usize, &str)> = Vec::new();
    for key in keys {
        let pat = format!("{key}=");
        let mut from = 0;
        while let Some(pos) = text[from..].find(&pat) {
            let at = from + pos;
            let boundary = at == 0 || text[..at].ends_with(char::is_whitespace);
            if boundary {
                marks.push((at, key));
            }
            from = at + pat.len();
        }
    }
    marks.sort();
    marks
        .iter()
        .enumerate()
        .map(|(i, &(at, key))| {
            let start = at + key.len() + 1;
            let end = marks.get(i + 1).map_or(text.len(), |m| m.0);
            (key.to_string(), text[start..end].trim().to_string())
        })
        .collect()
}

fn matrix_columns(text: &str) -> Result<Vec<Vec<i64>>> {
    let m = IntMatrix::parse(text)?;
    m.columns()
        .iter()
        .map(|c| {
            c.iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::Parse("matrix entry out of range".into())))
                .collect()
        })
        .collect()
}
