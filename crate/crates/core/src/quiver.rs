//! Quivers with potential.
//!
//! Paths are arrow-index sequences read in travel order: `[a, b]` means `a`
//! followed by `b`, so `t(a) = s(b)`. A potential is a finite map from cyclic
//! words, stored in their lexicographically least rotation, to Novikov scalars,
//! and carries the truncation order `N` beyond which words are discarded.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::SparseEchelon;
use crate::novikov::NovikovScalar;
use crate::surface::{Dart, IdealTriangulation, Signing, SurfaceError};

/// Default truncation order for potentials.
pub const DEFAULT_ORDER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("vertex {0} carries a loop")]
    LoopAtVertex(usize),
    #[error("vertex {0} lies on a 2-cycle")]
    TwoCycleAtVertex(usize),
    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("triangulation has self-folded triangles {0:?}")]
    SelfFolded(Vec<usize>),
    #[error("quadratic part cannot be split within truncation order {0}")]
    TruncationTooSmall(usize),
    #[error("substitution for arrow {0} has a term with wrong endpoints")]
    EndpointMismatch(usize),
    #[error("linear part of the substitution is not invertible")]
    NonInvertibleLinearPart,
    #[error("word {0:?} is not a cycle in the quiver")]
    NotACycle(Vec<usize>),
    #[error("malformed quiver data: {0}")]
    Malformed(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub src: usize,
    pub tgt: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Quiver {
    pub num_vertices: usize,
    pub arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new(num_vertices: usize) -> Self {
        Quiver { num_vertices, arrows: Vec::new() }
    }

    pub fn add_arrow(&mut self, src: usize, tgt: usize, label: impl Into<String>) -> usize {
        self.arrows.push(Arrow { src, tgt, label: label.into() });
        self.arrows.len() - 1
    }

    /// Quiver from `(src, tgt)` pairs, labelled `a0, a1, ...`.
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize)]) -> Self {
        let mut q = Quiver::new(num_vertices);
        for (i, &(s, t)) in edges.iter().enumerate() {
            q.add_arrow(s, t, format!("a{i}"));
        }
        q
    }

    pub fn src(&self, a: usize) -> usize {
        self.arrows[a].src
    }

    pub fn tgt(&self, a: usize) -> usize {
        self.arrows[a].tgt
    }

    /// `count[i][j]` = number of arrows `i -> j`.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut m = vec![vec![0; self.num_vertices]; self.num_vertices];
        for a in &self.arrows {
            m[a.src][a.tgt] += 1;
        }
        m
    }

    pub fn has_loop_at(&self, k: usize) -> bool {
        self.arrows.iter().any(|a| a.src == k && a.tgt == k)
    }

    pub fn has_two_cycle_at(&self, k: usize) -> bool {
        let outs: BTreeSet<usize> = self.arrows.iter().filter(|a| a.src == k).map(|a| a.tgt).collect();
        self.arrows.iter().any(|a| a.tgt == k && a.src != k && outs.contains(&a.src))
    }

    pub fn has_two_cycles(&self) -> bool {
        (0..self.num_vertices).any(|k| self.has_two_cycle_at(k))
    }

    pub fn is_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.num_vertices];
        for a in &self.arrows {
            indeg[a.tgt] += 1;
        }
        let mut stack: Vec<usize> = (0..self.num_vertices).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for a in self.arrows.iter().filter(|a| a.src == v) {
                indeg[a.tgt] -= 1;
                if indeg[a.tgt] == 0 {
                    stack.push(a.tgt);
                }
            }
        }
        seen == self.num_vertices
    }

    /// Underlying undirected multigraph is a single cycle through all vertices.
    pub fn is_cycle_graph(&self) -> bool {
        let n = self.num_vertices;
        if n == 0 || self.arrows.len() != n {
            return false;
        }
        let mut deg = vec![0; n];
        for a in &self.arrows {
            deg[a.src] += 1;
            deg[a.tgt] += 1;
        }
        if deg.iter().any(|&d| d != 2) {
            return false;
        }
        // connected
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for a in &self.arrows {
                for (x, y) in [(a.src, a.tgt), (a.tgt, a.src)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn is_path(&self, path: &[usize]) -> bool {
        path.iter().all(|&a| a < self.arrows.len()) && path.windows(2).all(|w| self.tgt(w[0]) == self.src(w[1]))
    }

    pub fn is_cycle(&self, path: &[usize]) -> bool {
        !path.is_empty() && self.is_path(path) && self.tgt(*path.last().unwrap()) == self.src(path[0])
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.num_vertices,
            "arrows": self.arrows.iter().enumerate().map(|(i, a)| json!({"id": i, "src": a.src, "tgt": a.tgt, "label": a.label})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, QuiverError> {
        let bad = |m: &str| QuiverError::Malformed(m.to_string());
        let n = v.get("vertices").ok_or_else(|| bad("missing vertices"))?;
        let n = match n {
            Value::Number(x) => x.as_u64().ok_or_else(|| bad("vertices must be a count"))? as usize,
            Value::Array(xs) => xs.len(),
            _ => return Err(bad("vertices must be a count or a list")),
        };
        let mut q = Quiver::new(n);
        let arrows = v.get("arrows").and_then(|a| a.as_array()).ok_or_else(|| bad("missing arrows"))?;
        let mut entries: Vec<(usize, usize, usize, String)> = Vec::new();
        for (i, a) in arrows.iter().enumerate() {
            let id = a.get("id").and_then(|x| x.as_u64()).map_or(i, |x| x as usize);
            let s = a.get("src").and_then(|x| x.as_u64()).ok_or_else(|| bad("arrow without src"))? as usize;
            let t = a.get("tgt").and_then(|x| x.as_u64()).ok_or_else(|| bad("arrow without tgt"))? as usize;
            if s >= n || t >= n {
                return Err(bad("arrow endpoint out of range"));
            }
            let label = a.get("label").and_then(|x| x.as_str()).map_or_else(|| format!("a{id}"), str::to_string);
            entries.push((id, s, t, label));
        }
        entries.sort_by_key(|e| e.0);
        if entries.iter().enumerate().any(|(i, e)| e.0 != i) {
            return Err(bad("arrow ids must be 0..n-1"));
        }
        for (_, s, t, label) in entries {
            q.add_arrow(s, t, label);
        }
        Ok(q)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph quiver {\n");
        for v in 0..self.num_vertices {
            let _ = writeln!(s, "  {v};");
        }
        for a in &self.arrows {
            let _ = writeln!(s, "  {} -> {} [label=\"{}\"];", a.src, a.tgt, a.label);
        }
        s.push_str("}\n");
        s
    }
}

/// A cyclic word in its canonical (least) rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Vec<usize>);

impl CyclicWord {
    pub fn new(word: &[usize]) -> Self {
        CyclicWord(least_rotation(word))
    }

    pub fn arrows(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of rotations fixing the word.
    pub fn symmetry(&self) -> usize {
        let n = self.0.len();
        (0..n).filter(|&r| (0..n).all(|i| self.0[i] == self.0[(i + r) % n])).count()
    }

    pub fn contains(&self, a: usize) -> bool {
        self.0.contains(&a)
    }
}

/// Least rotation of a sequence.
pub fn least_rotation(word: &[usize]) -> Vec<usize> {
    let n = word.len();
    if n == 0 {
        return Vec::new();
    }
    let best =
        (0..n).min_by(|&i, &j| (0..n).map(|k| word[(i + k) % n]).cmp((0..n).map(|k| word[(j + k) % n]))).unwrap_or(0);
    (0..n).map(|k| word[(best + k) % n]).collect()
}

/// Formal sum of paths.
pub type PathSum = BTreeMap<Vec<usize>, NovikovScalar>;

pub fn path_sum_add(target: &mut PathSum, path: Vec<usize>, c: &NovikovScalar) {
    if c.is_zero() {
        return;
    }
    match target.get_mut(&path) {
        Some(v) => {
            *v += c;
            if v.is_zero() {
                target.remove(&path);
            }
        }
        None => {
            target.insert(path, c.clone());
        }
    }
}

/// Product of path sums, dropping paths longer than `max_len`.
pub fn path_sum_mul(a: &PathSum, b: &PathSum, max_len: usize) -> PathSum {
    let mut out = PathSum::new();
    for (p, c) in a {
        for (q, d) in b {
            if p.len() + q.len() > max_len {
                continue;
            }
            let mut r = p.clone();
            r.extend_from_slice(q);
            path_sum_add(&mut out, r, &(c * d));
        }
    }
    out
}

/// A potential truncated at `order`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Potential {
    terms: BTreeMap<CyclicWord, NovikovScalar>,
    pub order: usize,
}

impl Potential {
    pub fn new(order: usize) -> Self {
        Potential { terms: BTreeMap::new(), order }
    }

    /// Add `c * word`, normalising the rotation; words longer than the order
    /// are dropped.
    pub fn add_term(&mut self, word: &[usize], c: &NovikovScalar) {
        if word.len() > self.order || c.is_zero() {
            return;
        }
        let w = CyclicWord::new(word);
        match self.terms.get_mut(&w) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c.clone());
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<CyclicWord, NovikovScalar> {
        &self.terms
    }

    pub fn coefficient(&self, word: &[usize]) -> NovikovScalar {
        self.terms.get(&CyclicWord::new(word)).cloned().unwrap_or_else(NovikovScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_word_length(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// All words have length at least 3.
    pub fn is_reduced(&self) -> bool {
        self.terms.keys().all(|w| w.len() >= 3)
    }

    pub fn scale(&self, t: &NovikovScalar) -> Self {
        let mut out = Potential::new(self.order);
        for (w, c) in &self.terms {
            out.add_term(&w.0, &(c * t));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Potential::new(self.order.max(other.order));
        for (w, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(&w.0, c);
        }
        out
    }

    /// Terms of one length.
    pub fn homogeneous_part(&self, len: usize) -> Self {
        let mut out = Potential::new(self.order);
        for (w, c) in &self.terms {
            if w.len() == len {
                out.add_term(&w.0, c);
            }
        }
        out
    }

    /// Drop words longer than `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut out = Potential::new(order);
        for (w, c) in &self.terms {
            out.add_term(&w.0, c);
        }
        out
    }

    /// Cyclic derivative: for every occurrence of `a`, the path obtained by
    /// rotating that occurrence to the front and deleting it.
    pub fn cyclic_derivative(&self, a: usize) -> PathSum {
        let mut out = PathSum::new();
        for (w, c) in &self.terms {
            let n = w.len();
            for i in 0..n {
                if w.0[i] == a {
                    let p: Vec<usize> = (1..n).map(|k| w.0[(i + k) % n]).collect();
                    path_sum_add(&mut out, p, c);
                }
            }
        }
        out
    }

    pub fn support(&self) -> BTreeSet<CyclicWord> {
        self.terms.keys().cloned().collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(w, c)| json!({"word": w.0, "coeff": c.to_string()})).collect())
    }

    pub fn from_json(v: &Value, order: usize) -> Result<Self, QuiverError> {
        let bad = |m: &str| QuiverError::Malformed(m.to_string());
        let mut p = Potential::new(order);
        for t in v.as_array().ok_or_else(|| bad("potential must be a list"))? {
            let word: Vec<usize> = serde_json::from_value(t.get("word").cloned().unwrap_or(Value::Null))
                .map_err(|_| bad("term needs a word of arrow ids"))?;
            let c: NovikovScalar = serde_json::from_value(t.get("coeff").cloned().unwrap_or(Value::from("1")))
                .map_err(|e| bad(&e.to_string()))?;
            p.add_term(&word, &c);
        }
        Ok(p)
    }

    pub fn display(&self, q: &Quiver) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(w, c)| {
                let word: Vec<&str> = w.0.iter().map(|&a| q.arrows[a].label.as_str()).collect();
                format!("({c}) {}", word.join("."))
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Cyclic equivalence up to the smaller of the two truncation orders.
pub fn are_cyclically_equivalent(w1: &Potential, w2: &Potential) -> bool {
    let n = w1.order.min(w2.order);
    w1.truncate(n) == w2.truncate(n)
}

/// No cyclic word occurs in both.
pub fn disjoint(w1: &Potential, w2: &Potential) -> bool {
    w1.terms.keys().all(|w| !w2.terms.contains_key(w))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverWithPotential {
    pub quiver: Quiver,
    pub potential: Potential,
}

impl QuiverWithPotential {
    pub fn new(quiver: Quiver, potential: Potential) -> Result<Self, QuiverError> {
        for w in potential.terms.keys() {
            if !quiver.is_cycle(&w.0) {
                return Err(QuiverError::NotACycle(w.0.clone()));
            }
        }
        Ok(QuiverWithPotential { quiver, potential })
    }

    pub fn order(&self) -> usize {
        self.potential.order
    }

    pub fn with_order(&self, order: usize) -> Self {
        QuiverWithPotential { quiver: self.quiver.clone(), potential: self.potential.truncate(order) }
    }

    /// The 3-cycle `a: 0 -> 1`, `b: 1 -> 2`, `c: 2 -> 0` with `W = abc`.
    pub fn triangle() -> Self {
        let q = Quiver::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let mut w = Potential::new(DEFAULT_ORDER);
        w.add_term(&[0, 1, 2], &NovikovScalar::one());
        QuiverWithPotential { quiver: q, potential: w }
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.quiver.to_json();
        v["potential"] = self.potential.to_json();
        v["order"] = json!(self.potential.order);
        v
    }

    pub fn from_json(v: &Value) -> Result<Self, QuiverError> {
        let quiver = Quiver::from_json(v)?;
        let potential_json = v.get("potential").cloned().unwrap_or(Value::Array(Vec::new()));
        let longest = potential_json
            .as_array()
            .map(|ts| {
                ts.iter().filter_map(|t| t.get("word").and_then(|w| w.as_array()).map(|w| w.len())).max().unwrap_or(0)
            })
            .unwrap_or(0);
        let order = v.get("order").and_then(|x| x.as_u64()).map_or(DEFAULT_ORDER.max(longest), |x| x as usize);
        let potential = Potential::from_json(&potential_json, order)?;
        QuiverWithPotential::new(quiver, potential)
    }
}

/// The quiver with potential of a triangulation, with the bookkeeping that ties
/// it back to the surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceQp {
    pub qp: QuiverWithPotential,
    /// Quiver vertex to edge of the triangulation.
    pub vertex_edge: Vec<usize>,
    /// Arrow to the corner it sits in.
    pub arrow_corner: Vec<Dart>,
    /// Clockwise 3-cycles of triangles with three interior sides.
    pub face_words: Vec<(usize, Vec<usize>)>,
    /// Anticlockwise corner cycle around each puncture.
    pub puncture_words: Vec<(usize, Vec<usize>)>,
}

/// Quiver of a triangulation together with its face and puncture cycles;
/// the potential is left empty.
pub fn surface_quiver(t: &IdealTriangulation) -> Result<SurfaceQp, QuiverError> {
    let folded = t.self_folded_triangles();
    if !folded.is_empty() {
        return Err(QuiverError::SelfFolded(folded));
    }
    let vertex_edge = t.interior_edges();
    let vertex_of: HashMap<usize, usize> = vertex_edge.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut quiver = Quiver::new(vertex_edge.len());
    let mut arrow_corner = Vec::new();
    let mut arrow_at: HashMap<Dart, usize> = HashMap::new();
    for c in t.corner_arrows() {
        let id = quiver.add_arrow(vertex_of[&c.from], vertex_of[&c.to], format!("a{}", arrow_corner.len()));
        arrow_corner.push(c.corner);
        arrow_at.insert(c.corner, id);
    }
    let mut face_words = Vec::new();
    for tri in 0..t.triangles.len() {
        let corners: Vec<Option<&usize>> = (0..3).map(|i| arrow_at.get(&Dart { tri, slot: i })).collect();
        if let [Some(&a0), Some(&a1), Some(&a2)] = corners[..] {
            // arrow at corner i runs from side i to side i-1
            face_words.push((tri, vec![a0, a2, a1]));
        }
    }
    let mut puncture_words = Vec::new();
    for (p, cw) in t.corner_cycles() {
        if !t.surface.is_puncture(p) {
            continue;
        }
        let mut word: Vec<usize> = cw.iter().rev().filter_map(|d| arrow_at.get(d).copied()).collect();
        if word.len() == cw.len() && !word.is_empty() {
            word.rotate_right(1);
            puncture_words.push((p, word));
        }
    }
    Ok(SurfaceQp {
        qp: QuiverWithPotential { quiver, potential: Potential::new(DEFAULT_ORDER) },
        vertex_edge,
        arrow_corner,
        face_words,
        puncture_words,
    })
}

/// `W = sum_f T(f) - sum_p lambda_p C(p)`, truncation raised to the longest word.
pub fn surface_potential(sq: &SurfaceQp, lambda: &[NovikovScalar]) -> Potential {
    let longest = sq.face_words.iter().chain(sq.puncture_words.iter()).map(|(_, w)| w.len()).max().unwrap_or(0);
    let mut w = Potential::new(DEFAULT_ORDER.max(longest));
    for (_, f) in &sq.face_words {
        w.add_term(f, &NovikovScalar::one());
    }
    for (p, c) in &sq.puncture_words {
        w.add_term(c, &(-&lambda[*p]));
    }
    w
}

/// The signed quiver with potential `Q(T)`, `W(T, eps)`.
pub fn qp_from_triangulation(t: &IdealTriangulation, eps: &Signing) -> Result<SurfaceQp, QuiverError> {
    eps.validate(&t.surface)?;
    let mut sq = surface_quiver(t)?;
    let lambda: Vec<NovikovScalar> = eps.0.iter().map(|&s| NovikovScalar::from_integer(s as i64)).collect();
    sq.qp.potential = surface_potential(&sq, &lambda);
    Ok(sq)
}

/// Outcome of splitting a potential into face terms, puncture terms and rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlfsDecomposition {
    pub success: bool,
    /// `lambda_p` for each puncture (zero when the cycle is absent).
    pub lambda: Vec<NovikovScalar>,
    pub remainder: Potential,
    pub diagnostics: Vec<String>,
}

/// Write `W = sum T(f) - sum lambda_p C(p) + W'` with `W'` disjoint from the
/// face and puncture cycles. Face coefficients must be exactly 1 and every
/// `lambda_p` nonzero.
pub fn glfs_decompose(w: &Potential, sq: &SurfaceQp, punctures: usize) -> GlfsDecomposition {
    let mut rest = w.clone();
    let mut diagnostics = Vec::new();
    for (tri, f) in &sq.face_words {
        let c = w.coefficient(f);
        if c != NovikovScalar::one() {
            diagnostics.push(if c.is_zero() {
                format!("face term of triangle {tri} is missing")
            } else {
                format!("face term of triangle {tri} has coefficient {c}, expected 1")
            });
        }
        rest.add_term(f, &-c);
    }
    let mut lambda = vec![NovikovScalar::zero(); punctures];
    for (p, cyc) in &sq.puncture_words {
        let c = w.coefficient(cyc);
        if c.is_zero() {
            diagnostics.push(format!("puncture cycle of puncture {p} is missing"));
        }
        lambda[*p] = -&c;
        rest.add_term(cyc, &-c);
    }
    let mut special = Potential::new(w.order);
    for (_, f) in sq.face_words.iter().chain(sq.puncture_words.iter()) {
        special.add_term(f, &NovikovScalar::one());
    }
    if !disjoint(&rest, &special) {
        diagnostics.push("remainder shares words with the face or puncture cycles".into());
    }
    GlfsDecomposition { success: diagnostics.is_empty(), lambda, remainder: rest, diagnostics }
}

fn check_mutable(q: &Quiver, k: usize) -> Result<(), QuiverError> {
    if k >= q.num_vertices {
        return Err(QuiverError::NoSuchVertex(k));
    }
    if q.has_loop_at(k) {
        return Err(QuiverError::LoopAtVertex(k));
    }
    if q.has_two_cycle_at(k) {
        return Err(QuiverError::TwoCycleAtVertex(k));
    }
    Ok(())
}

/// Mutation at `k`: composites for paths through `k`, reversal of the arrows
/// at `k`, then removal of a maximal set of disjoint 2-cycles.
pub fn mutate_quiver(q: &Quiver, k: usize) -> Result<Quiver, QuiverError> {
    check_mutable(q, k)?;
    let (pre, _) = premutated_quiver(q, k);
    let mut arrows = pre.arrows;
    // cancel opposite pairs, newest arrows first
    loop {
        let mut found = None;
        'outer: for i in (0..arrows.len()).rev() {
            for j in (0..i).rev() {
                if arrows[i].src == arrows[j].tgt && arrows[i].tgt == arrows[j].src && arrows[i].src != arrows[i].tgt {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        match found {
            Some((i, j)) => {
                arrows.remove(i);
                arrows.remove(j);
            }
            None => break,
        }
    }
    Ok(Quiver { num_vertices: q.num_vertices, arrows })
}

/// Arrow bookkeeping of a premutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PremutationMap {
    /// Old arrow not touching `k` to its new index.
    pub kept: BTreeMap<usize, usize>,
    /// `(a, b)` with `t(a) = k = s(b)` to the composite `[ab]`.
    pub composite: BTreeMap<(usize, usize), usize>,
    /// Old arrow at `k` to its reversal.
    pub reversed: BTreeMap<usize, usize>,
}

fn premutated_quiver(q: &Quiver, k: usize) -> (Quiver, PremutationMap) {
    let mut out = Quiver::new(q.num_vertices);
    let mut map = PremutationMap { kept: BTreeMap::new(), composite: BTreeMap::new(), reversed: BTreeMap::new() };
    for (i, a) in q.arrows.iter().enumerate() {
        if a.src != k && a.tgt != k {
            let id = out.add_arrow(a.src, a.tgt, a.label.clone());
            map.kept.insert(i, id);
        }
    }
    let ins: Vec<usize> = (0..q.arrows.len()).filter(|&a| q.tgt(a) == k).collect();
    let outs: Vec<usize> = (0..q.arrows.len()).filter(|&b| q.src(b) == k).collect();
    for &a in &ins {
        for &b in &outs {
            let id = out.add_arrow(q.src(a), q.tgt(b), format!("[{}{}]", q.arrows[a].label, q.arrows[b].label));
            map.composite.insert((a, b), id);
        }
    }
    for &a in ins.iter().chain(outs.iter()) {
        let id = out.add_arrow(q.tgt(a), q.src(a), format!("{}*", q.arrows[a].label));
        map.reversed.insert(a, id);
    }
    (out, map)
}

/// Premutation at `k`: `[W] + sum [ab] b* a*`, each new cubic term with
/// coefficient `+1`.
pub fn premutate_qp(qp: &QuiverWithPotential, k: usize) -> Result<(QuiverWithPotential, PremutationMap), QuiverError> {
    let q = &qp.quiver;
    check_mutable(q, k)?;
    let (nq, map) = premutated_quiver(q, k);
    let mut w = Potential::new(qp.potential.order);
    for (word, c) in &qp.potential.terms {
        let n = word.len();
        let start = (0..n).find(|&i| q.src(word.0[i]) != k).unwrap_or(0);
        let rotated: Vec<usize> = (0..n).map(|i| word.0[(start + i) % n]).collect();
        let mut out = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let a = rotated[i];
            if q.tgt(a) == k && i + 1 < n {
                out.push(map.composite[&(a, rotated[i + 1])]);
                i += 2;
            } else {
                out.push(map.kept[&a]);
                i += 1;
            }
        }
        w.add_term(&out, c);
    }
    for (&(a, b), &ab) in &map.composite {
        w.add_term(&[ab, map.reversed[&b], map.reversed[&a]], &NovikovScalar::one());
    }
    Ok((QuiverWithPotential { quiver: nq, potential: w }, map))
}

/// Substitution of arrows by path sums; arrows not listed are fixed.
pub type Substitution = BTreeMap<usize, PathSum>;

fn linear_part_invertible(q: &Quiver, sigma: &Substitution) -> bool {
    let mut ech = SparseEchelon::<NovikovScalar>::new();
    for a in 0..q.arrows.len() {
        let row: Vec<(usize, NovikovScalar)> = match sigma.get(&a) {
            None => vec![(a, NovikovScalar::one())],
            Some(ps) => ps.iter().filter(|(p, _)| p.len() == 1).map(|(p, c)| (p[0], c.clone())).collect(),
        };
        if !ech.insert(row) {
            return false;
        }
    }
    true
}

/// Transport the potential through `sigma`, expanding and truncating.
pub fn apply_substitution(qp: &QuiverWithPotential, sigma: &Substitution) -> Result<QuiverWithPotential, QuiverError> {
    let q = &qp.quiver;
    for (&a, ps) in sigma {
        if a >= q.arrows.len() {
            return Err(QuiverError::EndpointMismatch(a));
        }
        for p in ps.keys() {
            if p.is_empty() || !q.is_path(p) || q.src(p[0]) != q.src(a) || q.tgt(*p.last().unwrap()) != q.tgt(a) {
                return Err(QuiverError::EndpointMismatch(a));
            }
        }
    }
    if !linear_part_invertible(q, sigma) {
        return Err(QuiverError::NonInvertibleLinearPart);
    }
    Ok(QuiverWithPotential { quiver: q.clone(), potential: substitute(&qp.potential, sigma) })
}

fn substitute(w: &Potential, sigma: &Substitution) -> Potential {
    let n = w.order;
    let mut out = Potential::new(n);
    let image = |a: usize| -> PathSum {
        sigma.get(&a).cloned().unwrap_or_else(|| PathSum::from([(vec![a], NovikovScalar::one())]))
    };
    for (word, c) in &w.terms {
        if word.0.iter().all(|a| !sigma.contains_key(a)) {
            out.add_term(&word.0, c);
            continue;
        }
        let mut acc = PathSum::from([(Vec::new(), c.clone())]);
        for &a in &word.0 {
            acc = path_sum_mul(&acc, &image(a), n);
            if acc.is_empty() {
                break;
            }
        }
        for (p, d) in acc {
            out.add_term(&p, &d);
        }
    }
    out
}

/// Report of a reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub reduced: QuiverWithPotential,
    /// `(x, y)` pairs of original arrows split off as the trivial part.
    pub cancelled: Vec<(usize, usize)>,
    /// Substitutions applied, in order.
    pub substitutions: Vec<Substitution>,
    /// Original arrow to its index in the reduced quiver.
    pub arrow_map: BTreeMap<usize, usize>,
}

/// Split off the trivial part of the potential, degree by degree up to the
/// truncation order, and delete the trivial arrows.
pub fn reduce_qp(qp: &QuiverWithPotential) -> Result<Reduction, QuiverError> {
    let q = &qp.quiver;
    let n = qp.potential.order;
    let mut w = qp.potential.clone();
    let mut substitutions = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut trivial: BTreeSet<usize> = BTreeSet::new();

    // quadratic part: bring to the form sum x_k y_k
    loop {
        let pivot = w
            .terms
            .iter()
            .filter(|(word, c)| {
                word.len() == 2 && !trivial.contains(&word.0[0]) && !trivial.contains(&word.0[1]) && c.is_monomial()
            })
            .map(|(word, c)| (word.0[0], word.0[1], c.clone()))
            .next();
        let Some((x, y, c)) = pivot else {
            break;
        };
        if q.src(x) == q.tgt(x) || x == y {
            return Err(QuiverError::LoopAtVertex(q.src(x)));
        }
        let cinv = c.monomial_inverse().expect("monomial");
        // y -> (1/c)(y - sum_{y' != y} c_{xy'} y')
        let mut ys = PathSum::new();
        path_sum_add(&mut ys, vec![y], &cinv);
        for (word, d) in &w.terms {
            if word.len() == 2 && word != &CyclicWord::new(&[x, y]) {
                if let Some(pos) = word.0.iter().position(|&u| u == x) {
                    let other = word.0[1 - pos];
                    path_sum_add(&mut ys, vec![other], &-(&cinv * d));
                }
            }
        }
        let s1 = Substitution::from([(y, ys)]);
        w = substitute(&w, &s1);
        substitutions.push(s1);
        // x -> x - sum_{x' != x} d_{x'} x'
        let mut xs = PathSum::new();
        path_sum_add(&mut xs, vec![x], &NovikovScalar::one());
        for (word, d) in &w.terms {
            if word.len() == 2 && word != &CyclicWord::new(&[x, y]) {
                if let Some(pos) = word.0.iter().position(|&u| u == y) {
                    let other = word.0[1 - pos];
                    path_sum_add(&mut xs, vec![other], &-d.clone());
                }
            }
        }
        if xs.len() > 1 {
            let s2 = Substitution::from([(x, xs)]);
            w = substitute(&w, &s2);
            substitutions.push(s2);
        }
        debug_assert_eq!(w.coefficient(&[x, y]), NovikovScalar::one());
        trivial.insert(x);
        trivial.insert(y);
        pairs.push((x, y));
    }
    if w.terms.keys().any(|word| word.len() == 2 && !(trivial.contains(&word.0[0]) && trivial.contains(&word.0[1]))) {
        return Err(QuiverError::TruncationTooSmall(n));
    }
    let partner: HashMap<usize, usize> = pairs.iter().flat_map(|&(x, y)| [(x, y), (y, x)]).collect();

    // higher terms containing trivial arrows
    for d in 3..=n {
        let mut sigma = Substitution::new();
        for (word, c) in &w.terms {
            if word.len() != d {
                continue;
            }
            let Some(pos) = word.0.iter().position(|a| trivial.contains(a)) else {
                continue;
            };
            let a = word.0[pos];
            let rest: Vec<usize> = (1..d).map(|i| word.0[(pos + i) % d]).collect();
            // c a u cancels against the pair term once the partner of a absorbs -c u
            let other = partner[&a];
            let entry = sigma.entry(other).or_insert_with(|| PathSum::from([(vec![other], NovikovScalar::one())]));
            path_sum_add(entry, rest, &-c.clone());
        }
        if sigma.is_empty() {
            continue;
        }
        w = substitute(&w, &sigma);
        substitutions.push(sigma);
    }
    if w.terms.iter().any(|(word, _)| word.0.iter().any(|a| trivial.contains(a)) && word.len() > 2) {
        return Err(QuiverError::TruncationTooSmall(n));
    }

    let mut arrow_map = BTreeMap::new();
    let mut rq = Quiver::new(q.num_vertices);
    for (i, a) in q.arrows.iter().enumerate() {
        if !trivial.contains(&i) {
            arrow_map.insert(i, rq.add_arrow(a.src, a.tgt, a.label.clone()));
        }
    }
    let mut rw = Potential::new(n);
    for (word, c) in &w.terms {
        if word.0.iter().any(|a| trivial.contains(a)) {
            continue;
        }
        let mapped: Vec<usize> = word.0.iter().map(|a| arrow_map[a]).collect();
        rw.add_term(&mapped, c);
    }
    Ok(Reduction {
        reduced: QuiverWithPotential { quiver: rq, potential: rw },
        cancelled: pairs,
        substitutions,
        arrow_map,
    })
}

/// Premutation followed by reduction.
pub fn mutate_qp(qp: &QuiverWithPotential, k: usize) -> Result<QuiverWithPotential, QuiverError> {
    let (pre, _) = premutate_qp(qp, k)?;
    Ok(reduce_qp(&pre)?.reduced)
}

fn refine(adj: &[Vec<u32>], colors: &mut Vec<usize>) {
    let n = colors.len();
    loop {
        let sigs: Vec<(usize, Vec<(usize, u32)>, Vec<(usize, u32)>)> = (0..n)
            .map(|v| {
                let mut outs: Vec<(usize, u32)> =
                    (0..n).filter(|&w| adj[v][w] > 0).map(|w| (colors[w], adj[v][w])).collect();
                let mut ins: Vec<(usize, u32)> =
                    (0..n).filter(|&w| adj[w][v] > 0).map(|w| (colors[w], adj[w][v])).collect();
                outs.sort_unstable();
                ins.sort_unstable();
                (colors[v], outs, ins)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        let new: Vec<usize> = sigs.iter().map(|s| distinct.binary_search(s).unwrap()).collect();
        let before = colors.iter().collect::<BTreeSet<_>>().len();
        *colors = new;
        if distinct.len() == before {
            return;
        }
    }
}

fn search(adj: &[Vec<u32>], colors: Vec<usize>, best: &mut Option<Vec<u32>>) {
    let n = colors.len();
    let mut counts = vec![0usize; n.max(1)];
    for &c in &colors {
        counts[c] += 1;
    }
    match (0..n).filter(|&c| counts[c] > 1).min_by_key(|&c| (counts[c], c)) {
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| colors[v]);
            let code: Vec<u32> = order.iter().flat_map(|&i| order.iter().map(move |&j| adj[i][j])).collect();
            if best.as_ref().is_none_or(|b| &code < b) {
                *best = Some(code);
            }
        }
        Some(cell) => {
            for v in (0..n).filter(|&v| colors[v] == cell) {
                // individualize v: it precedes the rest of its cell
                let mut c: Vec<usize> = colors.iter().map(|&x| 2 * x + 1).collect();
                c[v] = 2 * cell;
                let mut sorted: Vec<usize> = c.clone();
                sorted.sort_unstable();
                sorted.dedup();
                let mut c: Vec<usize> = c.iter().map(|x| sorted.binary_search(x).unwrap()).collect();
                refine(adj, &mut c);
                search(adj, c, best);
            }
        }
    }
}

/// Canonical adjacency code: least relabelled adjacency matrix over the
/// leaves of an individualization-refinement search. Exact.
pub fn canonical_quiver_code(q: &Quiver) -> Vec<u32> {
    let adj = q.adjacency();
    let mut colors = vec![0; q.num_vertices];
    refine(&adj, &mut colors);
    let mut best = None;
    search(&adj, colors, &mut best);
    best.unwrap_or_default()
}

pub fn quivers_isomorphic(a: &Quiver, b: &Quiver) -> bool {
    a.num_vertices == b.num_vertices
        && a.arrows.len() == b.arrows.len()
        && canonical_quiver_code(a) == canonical_quiver_code(b)
}
