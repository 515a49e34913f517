//! Marked bordered surfaces and their ideal triangulations.
//!
//! A triangulation is stored as a list of triangles, each holding three
//! counterclockwise slots. Slot `i` of a triangle runs from its corner `i` to
//! corner `i + 1`; it names an edge and whether it traverses that edge against
//! the edge's stored `[tail, head]` orientation. The surface orientation is the
//! one in which every triangle reads counterclockwise, so clockwise and
//! anticlockwise are intrinsic to the data.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("invalid marked surface: {0}")]
    InvalidSurface(String),
    #[error("edge {0} does not exist")]
    NoSuchEdge(usize),
    #[error("edge {0} is a boundary edge and cannot be flipped")]
    BoundaryEdge(usize),
    #[error("edge {0} is enclosed in a self-folded triangle")]
    SelfFoldedFlip(usize),
    #[error("triangulation is degenerate: {0}")]
    Degenerate(String),
    #[error("malformed triangulation: {0}")]
    Malformed(String),
}

/// Genus, number of punctures and marked points per boundary component.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedSurface {
    pub genus: u32,
    pub punctures: u32,
    #[serde(default)]
    pub boundary: Vec<u32>,
}

/// What a marked point is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MarkedPoint {
    Puncture(usize),
    Boundary { component: usize, index: usize },
}

impl MarkedSurface {
    pub fn closed(genus: u32, punctures: u32) -> Self {
        MarkedSurface { genus, punctures, boundary: Vec::new() }
    }

    pub fn num_marked(&self) -> usize {
        self.punctures as usize + self.boundary.iter().map(|&m| m as usize).sum::<usize>()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    /// Punctures come first, then boundary points component by component.
    pub fn marked_point(&self, id: usize) -> Option<MarkedPoint> {
        if id < self.punctures as usize {
            return Some(MarkedPoint::Puncture(id));
        }
        let mut offset = self.punctures as usize;
        for (c, &m) in self.boundary.iter().enumerate() {
            if id < offset + m as usize {
                return Some(MarkedPoint::Boundary { component: c, index: id - offset });
            }
            offset += m as usize;
        }
        None
    }

    pub fn boundary_point(&self, component: usize, index: usize) -> usize {
        self.punctures as usize + self.boundary[..component].iter().map(|&m| m as usize).sum::<usize>() + index
    }

    pub fn is_puncture(&self, id: usize) -> bool {
        id < self.punctures as usize
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundary.len() as i64
    }

    /// Checks the structural invariants of a marked bordered surface.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        if self.boundary.contains(&0) {
            return Err(SurfaceError::InvalidSurface("boundary component without marked points".into()));
        }
        if self.num_marked() == 0 {
            return Err(SurfaceError::InvalidSurface("no marked points".into()));
        }
        if self.genus == 0 && self.boundary.is_empty() && self.punctures < 5 {
            return Err(SurfaceError::InvalidSurface("sphere with fewer than five marked points".into()));
        }
        Ok(())
    }

    /// Number of arcs in any ideal triangulation: `6g - 6 + 3p + sum(m_i + 3)`.
    pub fn arc_count(&self) -> i64 {
        6 * self.genus as i64 - 6 + 3 * self.punctures as i64 + self.boundary.iter().map(|&m| m as i64 + 3).sum::<i64>()
    }
}

/// Input for [`rank_formula`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankInput {
    Surface(MarkedSurface),
    /// Genus and the orders of the poles of a quadratic differential.
    PoleOrders {
        genus: u32,
        orders: Vec<u32>,
    },
}

/// `6g - 6 + sum(ord(p) + 1)`, where a puncture counts as a pole of order 2 and
/// a boundary component with `m` marked points as a pole of order `m + 2`.
pub fn rank_formula(input: &RankInput) -> i64 {
    match input {
        RankInput::Surface(s) => s.arc_count(),
        RankInput::PoleOrders { genus, orders } => {
            6 * *genus as i64 - 6 + orders.iter().map(|&o| o as i64 + 1).sum::<i64>()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    /// `[tail, head]` marked points.
    pub ends: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub edge: usize,
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub slots: [Slot; 3],
}

/// A dart: slot `slot` of triangle `tri`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub tri: usize,
    pub slot: usize,
}

impl Dart {
    pub fn next(self) -> Dart {
        Dart { tri: self.tri, slot: (self.slot + 1) % 3 }
    }
    pub fn prev(self) -> Dart {
        Dart { tri: self.tri, slot: (self.slot + 2) % 3 }
    }
}

/// An ideal triangulation of a marked bordered surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealTriangulation {
    pub surface: MarkedSurface,
    pub edges: Vec<Edge>,
    pub triangles: Vec<Triangle>,
}

/// Signs `+1`/`-1` on the punctures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signing(pub Vec<i8>);

impl Signing {
    pub fn all_positive(surface: &MarkedSurface) -> Self {
        Signing(vec![1; surface.punctures as usize])
    }

    pub fn validate(&self, surface: &MarkedSurface) -> Result<(), SurfaceError> {
        if self.0.len() != surface.punctures as usize {
            return Err(SurfaceError::Malformed(format!(
                "signing has {} entries for {} punctures",
                self.0.len(),
                surface.punctures
            )));
        }
        if self.0.iter().any(|&s| s != 1 && s != -1) {
            return Err(SurfaceError::Malformed("signing entries must be +1 or -1".into()));
        }
        Ok(())
    }
}

/// One line of a validation report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub interior_edges: usize,
    pub boundary_edges: usize,
    pub triangles: usize,
    pub non_degenerate: bool,
}

impl ValidationReport {
    /// True when every structural check passed. The non-degeneracy flag is
    /// reported separately and does not affect validity.
    pub fn valid(&self) -> bool {
        self.checks.iter().filter(|c| c.name != "non-degenerate").all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Per-condition admissibility report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub no_self_folded: bool,
    pub no_loops: bool,
    pub valency_at_least_four: bool,
    pub no_double_arrows: bool,
    pub reasons: Vec<String>,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.no_self_folded && self.no_loops && self.valency_at_least_four && self.no_double_arrows
    }
}

type Face = [(usize, usize); 3];

/// Assemble a triangulation from counterclockwise faces given as
/// `(corner vertex, edge of the side leaving that corner)`. An edge used once is
/// a boundary edge. Loop edges take their orientation from first use.
pub fn from_faces(surface: MarkedSurface, faces: &[Face]) -> Result<IdealTriangulation, SurfaceError> {
    let num_edges = faces.iter().flat_map(|f| f.iter().map(|s| s.1)).max().map_or(0, |m| m + 1);
    let mut ends: Vec<Option<[usize; 2]>> = vec![None; num_edges];
    let mut uses = vec![0usize; num_edges];
    let mut triangles = Vec::with_capacity(faces.len());
    for f in faces {
        let mut slots = [Slot { edge: 0, reversed: false }; 3];
        for i in 0..3 {
            let (u, e) = f[i];
            let w = f[(i + 1) % 3].0;
            uses[e] += 1;
            let reversed = match ends[e] {
                None => {
                    ends[e] = Some([u, w]);
                    false
                }
                Some(_) if u == w => uses[e] > 1,
                Some([a, b]) if a == u && b == w => false,
                Some([a, b]) if a == w && b == u => true,
                Some(_) => return Err(SurfaceError::Malformed(format!("edge {e} used with inconsistent ends"))),
            };
            slots[i] = Slot { edge: e, reversed };
        }
        triangles.push(Triangle { slots });
    }
    let mut edges = Vec::with_capacity(num_edges);
    for e in 0..num_edges {
        let ends = ends[e].ok_or_else(|| SurfaceError::Malformed(format!("edge {e} unused")))?;
        let kind = match uses[e] {
            1 => EdgeKind::Boundary,
            2 => EdgeKind::Interior,
            n => return Err(SurfaceError::Malformed(format!("edge {e} used {n} times"))),
        };
        edges.push(Edge { kind, ends });
    }
    Ok(IdealTriangulation { surface, edges, triangles })
}

fn stellar(faces: &mut Vec<Face>, target: usize, vertex: usize, next_edge: &mut usize) {
    let [(v0, e0), (v1, e1), (v2, e2)] = faces[target];
    let (f0, f1, f2) = (*next_edge, *next_edge + 1, *next_edge + 2);
    *next_edge += 3;
    faces[target] = [(v0, e0), (v1, f1), (vertex, f0)];
    faces.push([(v1, e1), (v2, f2), (vertex, f1)]);
    faces.push([(v2, e2), (v0, f0), (vertex, f2)]);
}

impl IdealTriangulation {
    /// Torus with `d >= 1` punctures: a `d x 1` strip of squares, each cut by a
    /// diagonal. Every puncture has valency 6.
    pub fn torus(d: usize) -> Result<Self, SurfaceError> {
        if d == 0 {
            return Err(SurfaceError::InvalidSurface("torus needs at least one puncture".into()));
        }
        let (h, v, g) = (|k: usize| k, |k: usize| d + k % d, |k: usize| 2 * d + k);
        let mut faces = Vec::with_capacity(2 * d);
        for k in 0..d {
            let k1 = (k + 1) % d;
            faces.push([(k, h(k)), (k1, v(k + 1)), (k1, g(k))]);
            faces.push([(k, g(k)), (k1, h(k)), (k, v(k))]);
        }
        from_faces(MarkedSurface::closed(1, d as u32), &faces)
    }

    /// Closed surface of genus `g` with `d` punctures. Genus 1 uses [`Self::torus`];
    /// genus 0 is a bipyramid; higher genus is a fan on the standard `4g`-gon
    /// with further punctures added by stellar subdivision.
    pub fn closed(genus: u32, d: usize) -> Result<Self, SurfaceError> {
        let surface = MarkedSurface::closed(genus, d as u32);
        surface.validate()?;
        match genus {
            0 => {
                let n = d - 2;
                let (north, south) = (n, n + 1);
                let mut faces = Vec::new();
                // equator edges 0..n, spokes to north n..2n, to south 2n..3n
                for i in 0..n {
                    let j = (i + 1) % n;
                    faces.push([(north, n + i), (i, i), (j, n + j)]);
                    faces.push([(south, 2 * n + j), (j, i), (i, 2 * n + i)]);
                }
                from_faces(surface, &faces)
            }
            1 => Self::torus(d),
            _ => {
                let g = genus as usize;
                let sides = 4 * g;
                // polygon side j glued according to a1 b1 a1^-1 b1^-1 ...
                let side_edge = |j: usize| -> usize {
                    let (block, pos) = (j / 4, j % 4);
                    2 * block + (pos % 2)
                };
                let mut next_edge = 2 * g;
                let mut diag = HashMap::new();
                for j in 2..sides - 1 {
                    diag.insert(j, next_edge);
                    next_edge += 1;
                }
                let mut faces = Vec::new();
                for j in 1..sides - 1 {
                    let first = if j == 1 { side_edge(0) } else { diag[&j] };
                    let last = if j == sides - 2 { side_edge(sides - 1) } else { diag[&(j + 1)] };
                    faces.push([(0, first), (0, side_edge(j)), (0, last)]);
                }
                if d == 0 {
                    return Err(SurfaceError::InvalidSurface("need at least one puncture".into()));
                }
                if d - 1 > faces.len() {
                    return Err(SurfaceError::InvalidSurface("too many punctures for the fan construction".into()));
                }
                for extra in 1..d {
                    stellar(&mut faces, extra - 1, extra, &mut next_edge);
                }
                from_faces(surface, &faces)
            }
        }
    }

    /// Annulus with `p` marked points on the outer and `q` on the inner
    /// boundary, triangulated by two fans. Its quiver is an acyclic orientation
    /// of the affine diagram with `p + q` vertices.
    pub fn annulus(p: usize, q: usize) -> Result<Self, SurfaceError> {
        if p == 0 || q == 0 {
            return Err(SurfaceError::InvalidSurface("annulus needs marked points on both boundaries".into()));
        }
        let surface = MarkedSurface { genus: 0, punctures: 0, boundary: vec![p as u32, q as u32] };
        let outer = |k: usize| k % p;
        let inner = |j: usize| p + (q - j % q) % q;
        // edges: outer boundary 0..p, inner boundary p..p+q, rungs to I_0: r_0..r_p,
        // rungs O_0-I_j for 1 <= j < q
        let ob = |k: usize| k % p;
        let ib = |j: usize| p + j % q;
        let r = |k: usize| p + q + k;
        let s = |j: usize| {
            if j == 0 {
                r(p)
            } else if j == q {
                r(0)
            } else {
                2 * p + q + j
            }
        };
        let mut faces = Vec::new();
        for k in 0..p {
            faces.push([(inner(0), r(k)), (outer(k), ob(k)), (outer(k + 1), r(k + 1))]);
        }
        for j in 0..q {
            faces.push([(inner(j + 1), ib(j)), (inner(j), s(j)), (outer(0), s(j + 1))]);
        }
        from_faces(surface, &faces)
    }

    /// Disk with one puncture and `m >= 2` boundary marked points, fanned from
    /// the puncture. For `m = 2` the puncture has valency 2.
    pub fn punctured_disk(m: usize) -> Result<Self, SurfaceError> {
        if m < 2 {
            return Err(SurfaceError::InvalidSurface("punctured disk needs at least two boundary points".into()));
        }
        let surface = MarkedSurface { genus: 0, punctures: 1, boundary: vec![m as u32] };
        // boundary edges 0..m, spokes m..2m
        let faces: Vec<Face> = (0..m).map(|i| [(0, m + i), (1 + i, i), (1 + (i + 1) % m, m + (i + 1) % m)]).collect();
        from_faces(surface, &faces)
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Interior).count()
    }

    pub fn interior_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].kind == EdgeKind::Interior).collect()
    }

    pub fn slot(&self, d: Dart) -> Slot {
        self.triangles[d.tri].slots[d.slot]
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        (0..self.triangles.len()).flat_map(|t| (0..3).map(move |i| Dart { tri: t, slot: i }))
    }

    /// Marked point at which the dart starts.
    pub fn origin(&self, d: Dart) -> usize {
        let s = self.slot(d);
        let ends = self.edges[s.edge].ends;
        if s.reversed {
            ends[1]
        } else {
            ends[0]
        }
    }

    /// The darts carrying each edge.
    pub fn edge_darts(&self) -> Vec<Vec<Dart>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for d in self.darts() {
            if let Some(v) = out.get_mut(self.slot(d).edge) {
                v.push(d);
            }
        }
        out
    }

    /// Opposite dart across an interior edge.
    pub fn twin_map(&self) -> HashMap<Dart, Dart> {
        let mut map = HashMap::new();
        for ds in self.edge_darts() {
            if let [a, b] = ds[..] {
                map.insert(a, b);
                map.insert(b, a);
            }
        }
        map
    }

    /// Number of edge ends at each marked point (loops count twice).
    pub fn valencies(&self) -> Vec<usize> {
        let mut val = vec![0; self.surface.num_marked()];
        for e in &self.edges {
            for &v in &e.ends {
                if let Some(x) = val.get_mut(v) {
                    *x += 1;
                }
            }
        }
        val
    }

    /// Triangles with a repeated edge.
    pub fn self_folded_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&t| {
                let s = &self.triangles[t].slots;
                s[0].edge == s[1].edge || s[1].edge == s[2].edge || s[0].edge == s[2].edge
            })
            .collect()
    }

    /// No self-folded triangle and every marked point of valency at least 3.
    pub fn is_non_degenerate(&self) -> bool {
        self.self_folded_triangles().is_empty() && self.valencies().iter().all(|&v| v >= 3)
    }

    /// Corners (as darts: the corner at the origin of the dart) around each
    /// marked point, in clockwise order. Around a boundary point the list starts
    /// right after the boundary edge that ends there.
    pub fn corner_cycles(&self) -> BTreeMap<usize, Vec<Dart>> {
        let twin = self.twin_map();
        let mut seen = std::collections::HashSet::new();
        let mut out = BTreeMap::new();
        // clockwise rotation: across the dart's own edge
        let rot = |d: Dart| twin.get(&d).map(|t| t.next());
        // start boundary corners at darts with no predecessor
        let mut starts: Vec<Dart> = Vec::new();
        for d in self.darts() {
            // counterclockwise predecessor of d crosses d.prev()'s edge
            if !twin.contains_key(&d.prev()) {
                starts.push(d);
            }
        }
        starts.extend(self.darts());
        for d0 in starts {
            if seen.contains(&d0) {
                continue;
            }
            let mut cycle = vec![d0];
            seen.insert(d0);
            let mut d = d0;
            while let Some(n) = rot(d) {
                if n == d0 || !seen.insert(n) {
                    break;
                }
                cycle.push(n);
                d = n;
            }
            out.entry(self.origin(d0)).or_insert_with(Vec::new).push(cycle);
        }
        out.into_iter()
            .map(|(v, mut cycles): (usize, Vec<Vec<Dart>>)| {
                cycles.sort_by_key(|c| std::cmp::Reverse(c.len()));
                (v, cycles.into_iter().flatten().collect())
            })
            .collect()
    }

    /// Structural validation with per-invariant diagnostics.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let mut push = |name: &str, pass: bool, detail: String| checks.push(Check { name: name.into(), pass, detail });

        push(
            "surface",
            self.surface.validate().is_ok(),
            self.surface.validate().err().map(|e| e.to_string()).unwrap_or_default(),
        );

        let n_marked = self.surface.num_marked();
        let bad_ends: Vec<usize> =
            (0..self.edges.len()).filter(|&e| self.edges[e].ends.iter().any(|&v| v >= n_marked)).collect();
        let bad_slots: Vec<usize> = (0..self.triangles.len())
            .filter(|&t| self.triangles[t].slots.iter().any(|s| s.edge >= self.edges.len()))
            .collect();
        push(
            "references",
            bad_ends.is_empty() && bad_slots.is_empty(),
            if bad_ends.is_empty() && bad_slots.is_empty() {
                String::new()
            } else {
                format!("edges with unknown endpoints {bad_ends:?}; triangles with unknown edges {bad_slots:?}")
            },
        );
        if !bad_ends.is_empty() || !bad_slots.is_empty() {
            return ValidationReport {
                checks,
                interior_edges: self.num_interior_edges(),
                boundary_edges: self.edges.len() - self.num_interior_edges(),
                triangles: self.triangles.len(),
                non_degenerate: false,
            };
        }

        let darts = self.edge_darts();
        let mut bad_counts = Vec::new();
        let mut bad_orientation = Vec::new();
        for (e, ds) in darts.iter().enumerate() {
            let expected = match self.edges[e].kind {
                EdgeKind::Interior => 2,
                EdgeKind::Boundary => 1,
            };
            if ds.len() != expected {
                bad_counts.push(e);
            } else if expected == 2 && self.slot(ds[0]).reversed == self.slot(ds[1]).reversed {
                bad_orientation.push(e);
            }
        }
        push(
            "edge slots",
            bad_counts.is_empty(),
            if bad_counts.is_empty() { String::new() } else { format!("edges with wrong slot count {bad_counts:?}") },
        );
        push(
            "orientable gluing",
            bad_orientation.is_empty(),
            if bad_orientation.is_empty() {
                String::new()
            } else {
                format!("edges glued without reversal {bad_orientation:?}")
            },
        );

        // corner labels must agree with edge endpoints going around each vertex
        let mut bad_corners = Vec::new();
        for t in 0..self.triangles.len() {
            for i in 0..3 {
                let d = Dart { tri: t, slot: i };
                let s = self.slot(d.prev());
                let end = self.edges[s.edge].ends[if s.reversed { 0 } else { 1 }];
                if end != self.origin(d) {
                    bad_corners.push(t);
                    break;
                }
            }
        }
        push(
            "corner labels",
            bad_corners.is_empty(),
            if bad_corners.is_empty() {
                String::new()
            } else {
                format!("triangles whose consecutive sides do not meet {bad_corners:?}")
            },
        );

        let mut vertex_classes = BTreeMap::new();
        {
            let twin = self.twin_map();
            let mut seen = std::collections::HashSet::new();
            for d0 in self.darts() {
                if seen.contains(&d0) {
                    continue;
                }
                // orbit of the corner under rotation in both directions
                let mut stack = vec![d0];
                seen.insert(d0);
                while let Some(d) = stack.pop() {
                    let mut nbrs = Vec::new();
                    if let Some(t) = twin.get(&d) {
                        nbrs.push(t.next());
                    }
                    if let Some(t) = twin.get(&d.prev()) {
                        nbrs.push(*t);
                    }
                    for n in nbrs {
                        if seen.insert(n) {
                            stack.push(n);
                        }
                    }
                }
                *vertex_classes.entry(self.origin(d0)).or_insert(0usize) += 1;
            }
        }
        let split: Vec<usize> = vertex_classes.iter().filter(|(_, &c)| c > 1).map(|(&v, _)| v).collect();
        let missing: Vec<usize> = (0..n_marked).filter(|v| !vertex_classes.contains_key(v)).collect();
        push(
            "vertex classes",
            split.is_empty() && missing.is_empty(),
            if split.is_empty() && missing.is_empty() {
                String::new()
            } else {
                format!("labels on several vertices {split:?}; unused marked points {missing:?}")
            },
        );

        let chi = n_marked as i64 - self.edges.len() as i64 + self.triangles.len() as i64;
        let expected_chi = self.surface.euler_characteristic();
        push("euler characteristic", chi == expected_chi, format!("V - E + F = {chi}, expected {expected_chi}"));

        let interior = self.num_interior_edges() as i64;
        let arcs = self.surface.arc_count();
        push("arc count", interior == arcs, format!("{interior} interior edges, expected {arcs}"));

        // boundary components: boundary edges chained head to tail
        let mut boundary_ok = true;
        let mut boundary_detail = String::new();
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.kind == EdgeKind::Boundary {
                let d = darts[e][0];
                let s = self.slot(d);
                let (a, b) = if s.reversed { (edge.ends[1], edge.ends[0]) } else { (edge.ends[0], edge.ends[1]) };
                next.entry(a).or_default().push(b);
                if !matches!(self.surface.marked_point(a), Some(MarkedPoint::Boundary { .. }))
                    || !matches!(self.surface.marked_point(b), Some(MarkedPoint::Boundary { .. }))
                {
                    boundary_ok = false;
                    let _ = write!(boundary_detail, "boundary edge {e} touches a puncture; ");
                }
            }
        }
        for (c, &m) in self.surface.boundary.iter().enumerate() {
            for i in 0..m as usize {
                let a = self.surface.boundary_point(c, i);
                let b = self.surface.boundary_point(c, (i + 1) % m as usize);
                if next.get(&a).map(|v| v.as_slice()) != Some(&[b]) {
                    boundary_ok = false;
                    let _ = write!(boundary_detail, "component {c} not traversed in order at point {i}; ");
                }
            }
        }
        if next.values().map(|v| v.len()).sum::<usize>()
            != self.surface.boundary.iter().map(|&m| m as usize).sum::<usize>()
        {
            boundary_ok = false;
            boundary_detail.push_str("wrong number of boundary edges");
        }
        push("boundary cycles", boundary_ok, boundary_detail);

        let folded = self.self_folded_triangles();
        let val = self.valencies();
        let low: Vec<usize> = (0..val.len()).filter(|&v| val[v] < 3).collect();
        let non_degenerate = folded.is_empty() && low.is_empty();
        push(
            "non-degenerate",
            non_degenerate,
            if non_degenerate {
                String::new()
            } else {
                let mut s = String::new();
                if !folded.is_empty() {
                    let _ = write!(s, "self-folded triangles {folded:?}; ");
                }
                if !low.is_empty() {
                    let _ = write!(s, "marked points of valency < 3: {low:?}");
                }
                s
            },
        );

        ValidationReport {
            checks,
            interior_edges: self.num_interior_edges(),
            boundary_edges: self.edges.len() - self.num_interior_edges(),
            triangles: self.triangles.len(),
            non_degenerate,
        }
    }

    /// Replace the diagonal `e` of its quadrilateral by the other diagonal. The
    /// edge keeps its identifier.
    pub fn flip(&self, e: usize) -> Result<Self, SurfaceError> {
        let edge = self.edges.get(e).ok_or(SurfaceError::NoSuchEdge(e))?;
        if edge.kind == EdgeKind::Boundary {
            return Err(SurfaceError::BoundaryEdge(e));
        }
        let ds = &self.edge_darts()[e];
        let [d1, d2] = ds[..] else {
            return Err(SurfaceError::Malformed(format!("edge {e} is not carried by two slots")));
        };
        if d1.tri == d2.tri {
            return Err(SurfaceError::SelfFoldedFlip(e));
        }
        let (t1, t2) = (d1.tri, d2.tri);
        let x = self.origin(d1.prev());
        let y = self.origin(d2.prev());
        let s1n = self.slot(d1.next()); // b -> x
        let s1p = self.slot(d1.prev()); // x -> a
        let s2n = self.slot(d2.next()); // a -> y
        let s2p = self.slot(d2.prev()); // y -> b
        let mut out = self.clone();
        out.edges[e].ends = [x, y];
        out.triangles[t1] = Triangle { slots: [Slot { edge: e, reversed: false }, s2p, s1n] };
        out.triangles[t2] = Triangle { slots: [Slot { edge: e, reversed: true }, s1p, s2n] };
        Ok(out)
    }

    /// Interior edges whose flip keeps the triangulation non-degenerate.
    pub fn flippable_edges(&self) -> Vec<usize> {
        self.interior_edges()
            .into_iter()
            .filter(|&e| self.flip(e).map(|t| t.is_non_degenerate()).unwrap_or(false))
            .collect()
    }

    /// Seeded random walk of `steps` flips through non-degenerate triangulations.
    pub fn random_flips(&self, steps: usize, seed: u64) -> (Self, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = self.clone();
        let mut path = Vec::with_capacity(steps);
        for _ in 0..steps {
            let candidates = t.flippable_edges();
            let Some(&e) = candidates.choose(&mut rng) else {
                break;
            };
            t = t.flip(e).expect("flippable edge");
            path.push(e);
        }
        (t, path)
    }

    fn bfs_code(&self, start: Dart, twin: &HashMap<Dart, Dart>) -> (Vec<i64>, Vec<Dart>) {
        let n = self.triangles.len() * 3;
        let mut index: HashMap<Dart, usize> = HashMap::with_capacity(n);
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        index.insert(start, 0);
        order.push(start);
        queue.push_back(start);
        let mut code = Vec::with_capacity(3 * n);
        let visit = |d: Dart, index: &mut HashMap<Dart, usize>, order: &mut Vec<Dart>, queue: &mut VecDeque<Dart>| {
            *index.entry(d).or_insert_with(|| {
                order.push(d);
                queue.push_back(d);
                order.len() - 1
            }) as i64
        };
        while let Some(d) = queue.pop_front() {
            let nx = visit(d.next(), &mut index, &mut order, &mut queue);
            let tw = match twin.get(&d) {
                Some(&t) => visit(t, &mut index, &mut order, &mut queue),
                None => -1,
            };
            let kind = match self.surface.marked_point(self.origin(d)) {
                Some(MarkedPoint::Puncture(_)) => 0,
                _ => 1,
            };
            code.push(nx);
            code.push(tw);
            code.push(kind);
        }
        (code, order)
    }

    /// Canonical code: minimal BFS encoding over all starting darts. Two
    /// triangulations are isomorphic by an orientation-preserving relabeling
    /// exactly when their codes coincide and their surfaces agree up to
    /// permutation of boundary components.
    pub fn canonical_code(&self) -> Vec<i64> {
        self.canonical_start().0
    }

    fn canonical_start(&self) -> (Vec<i64>, Vec<Dart>) {
        let twin = self.twin_map();
        self.darts().map(|d| self.bfs_code(d, &twin)).min_by(|a, b| a.0.cmp(&b.0)).unwrap_or_default()
    }

    pub fn is_isomorphic(&self, other: &Self) -> bool {
        let mut a = self.surface.boundary.clone();
        let mut b = other.surface.boundary.clone();
        a.sort_unstable();
        b.sort_unstable();
        self.surface.genus == other.surface.genus
            && self.surface.punctures == other.surface.punctures
            && a == b
            && self.canonical_code() == other.canonical_code()
    }

    /// Relabel triangles, edges and marked points in canonical BFS order.
    pub fn canonicalize(&self) -> Self {
        let (_, order) = self.canonical_start();
        let mut tri_map = HashMap::new();
        let mut tri_order = Vec::new();
        let mut rotation = HashMap::new();
        for d in &order {
            if let std::collections::hash_map::Entry::Vacant(e) = tri_map.entry(d.tri) {
                e.insert(tri_order.len());
                tri_order.push(d.tri);
                rotation.insert(d.tri, d.slot);
            }
        }
        let mut edge_map: HashMap<usize, usize> = HashMap::new();
        let mut point_first: Vec<usize> = Vec::new();
        for d in &order {
            let e = self.slot(*d).edge;
            let n = edge_map.len();
            edge_map.entry(e).or_insert(n);
            let v = self.origin(*d);
            if !point_first.contains(&v) {
                point_first.push(v);
            }
        }
        // punctures by first visit; boundary components by first visit, each
        // starting at its first-visited point and following the boundary order
        let mut point_map = HashMap::new();
        let mut next_id = 0;
        for &v in &point_first {
            if let Some(MarkedPoint::Puncture(_)) = self.surface.marked_point(v) {
                point_map.insert(v, next_id);
                next_id += 1;
            }
        }
        let mut new_boundary = Vec::new();
        for &v in &point_first {
            if let Some(MarkedPoint::Boundary { component, index }) = self.surface.marked_point(v) {
                if point_map.contains_key(&v) {
                    continue;
                }
                let m = self.surface.boundary[component] as usize;
                for k in 0..m {
                    point_map.insert(self.surface.boundary_point(component, (index + k) % m), next_id);
                    next_id += 1;
                }
                new_boundary.push(m as u32);
            }
        }
        let mut edges = vec![Edge { kind: EdgeKind::Interior, ends: [0, 0] }; self.edges.len()];
        let mut oriented = vec![false; self.edges.len()];
        let mut triangles = Vec::with_capacity(self.triangles.len());
        for &t in &tri_order {
            let r = rotation[&t];
            let mut slots = [Slot { edge: 0, reversed: false }; 3];
            for (i, slot) in slots.iter_mut().enumerate() {
                let d = Dart { tri: t, slot: (r + i) % 3 };
                let s = self.slot(d);
                let ne = edge_map[&s.edge];
                let from = point_map[&self.origin(d)];
                let to = point_map[&self.origin(d.next())];
                if !oriented[ne] {
                    oriented[ne] = true;
                    edges[ne] = Edge { kind: self.edges[s.edge].kind, ends: [from, to] };
                    *slot = Slot { edge: ne, reversed: false };
                } else {
                    *slot = Slot { edge: ne, reversed: true };
                }
            }
            triangles.push(Triangle { slots });
        }
        IdealTriangulation {
            surface: MarkedSurface {
                genus: self.surface.genus,
                punctures: self.surface.punctures,
                boundary: new_boundary,
            },
            edges,
            triangles,
        }
    }

    /// Per-condition check of the admissibility hypotheses: no self-folded
    /// triangles, no loops, valency at least 4 and no double arrows in the
    /// associated quiver.
    pub fn glfs_admissibility(&self) -> Admissibility {
        let folded = self.self_folded_triangles();
        let loops: Vec<usize> =
            (0..self.edges.len()).filter(|&e| self.edges[e].ends[0] == self.edges[e].ends[1]).collect();
        let val = self.valencies();
        let low: Vec<usize> = (0..val.len()).filter(|&v| val[v] < 4).collect();
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for (from, to) in self.corner_arrows().into_iter().map(|c| (c.from, c.to)) {
            *counts.entry((from, to)).or_default() += 1;
        }
        let mut doubles: Vec<(usize, usize)> = counts.iter().filter(|(_, &c)| c >= 2).map(|(&k, _)| k).collect();
        doubles.sort_unstable();
        let mut reasons = Vec::new();
        if !folded.is_empty() {
            reasons.push(format!("self-folded triangles {folded:?}"));
        }
        if !loops.is_empty() {
            reasons.push(format!("loop edges {loops:?}"));
        }
        if !low.is_empty() {
            reasons.push(format!("marked points of valency < 4: {low:?}"));
        }
        if !doubles.is_empty() {
            reasons.push(format!("double arrows between edges {doubles:?}"));
        }
        Admissibility {
            no_self_folded: folded.is_empty(),
            no_loops: loops.is_empty(),
            valency_at_least_four: low.is_empty(),
            no_double_arrows: doubles.is_empty(),
            reasons,
        }
    }

    /// One arrow per corner whose two sides are interior edges, from the side
    /// leaving the corner to the side entering it. The arrows inside a triangle
    /// form a clockwise 3-cycle.
    pub fn corner_arrows(&self) -> Vec<CornerArrow> {
        let mut out = Vec::new();
        for d in self.darts() {
            let from = self.slot(d).edge;
            let to = self.slot(d.prev()).edge;
            if self.edges[from].kind == EdgeKind::Interior && self.edges[to].kind == EdgeKind::Interior {
                out.push(CornerArrow { corner: d, from, to });
            }
        }
        out
    }

    /// Combinatorial dual. Vertices are triangles, edges are interior edges,
    /// boundary edges become legs, faces are the marked points.
    pub fn dual_cellulation(&self) -> Result<DualCellulation, SurfaceError> {
        let folded = self.self_folded_triangles();
        if !folded.is_empty() {
            return Err(SurfaceError::Degenerate(format!("self-folded triangles {folded:?}")));
        }
        let vertices = self
            .triangles
            .iter()
            .map(|t| {
                t.slots.map(|s| match self.edges[s.edge].kind {
                    EdgeKind::Interior => DualEnd::Edge(s.edge),
                    EdgeKind::Boundary => DualEnd::Leg(s.edge),
                })
            })
            .collect();
        let ed = self.edge_darts();
        let mut edges = BTreeMap::new();
        for e in self.interior_edges() {
            edges.insert(e, [(ed[e][0].tri, ed[e][0].slot), (ed[e][1].tri, ed[e][1].slot)]);
        }
        let faces = self
            .corner_cycles()
            .into_iter()
            .map(|(p, corners)| DualFace {
                marked_point: p,
                puncture: self.surface.is_puncture(p),
                corners: corners.into_iter().map(|d| (d.tri, d.slot)).collect(),
            })
            .collect();
        Ok(DualCellulation { surface: self.surface.clone(), vertices, edges, faces })
    }

    /// JSON form with edges and signed slots.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "genus": self.surface.genus,
            "punctures": self.surface.punctures,
            "boundary": self.surface.boundary,
            "edges": self.edges.iter().map(|e| serde_json::json!({"kind": e.kind, "ends": e.ends})).collect::<Vec<_>>(),
            "triangles": self.triangles.iter().map(|t| {
                t.slots.iter().map(|s| serde_json::json!([s.edge, if s.reversed { -1 } else { 1 }])).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }

    /// Parse the JSON form. With no `triangles` key, a standard triangulation of
    /// the described surface is generated (closed surfaces, annuli and
    /// once-punctured disks).
    pub fn from_json(v: &serde_json::Value) -> Result<Self, SurfaceError> {
        let bad = |m: &str| SurfaceError::Malformed(m.to_string());
        let surface: MarkedSurface =
            serde_json::from_value(v.clone()).map_err(|e| SurfaceError::Malformed(e.to_string()))?;
        let Some(tris) = v.get("triangles") else {
            return Self::standard(&surface);
        };
        let tris = tris.as_array().ok_or_else(|| bad("triangles must be an array"))?;
        let mut triangles = Vec::with_capacity(tris.len());
        for t in tris {
            let slots = t.as_array().filter(|s| s.len() == 3).ok_or_else(|| bad("each triangle needs 3 slots"))?;
            let mut out = [Slot { edge: 0, reversed: false }; 3];
            for (i, s) in slots.iter().enumerate() {
                let e = s.get(0).and_then(|x| x.as_u64()).ok_or_else(|| bad("slot edge must be an integer"))?;
                let sign = s.get(1).and_then(|x| x.as_i64()).ok_or_else(|| bad("slot sign must be +1 or -1"))?;
                out[i] = Slot { edge: e as usize, reversed: sign < 0 };
            }
            triangles.push(Triangle { slots: out });
        }
        let edges: Vec<Edge> = match v.get("edges") {
            Some(e) => serde_json::from_value(e.clone()).map_err(|e| SurfaceError::Malformed(e.to_string()))?,
            None => return Err(bad("missing edges")),
        };
        Ok(IdealTriangulation { surface, edges, triangles })
    }

    /// A fixed triangulation of the surface, where one is available.
    pub fn standard(surface: &MarkedSurface) -> Result<Self, SurfaceError> {
        surface.validate()?;
        match (surface.genus, surface.punctures, surface.boundary.as_slice()) {
            (g, d, []) => Self::closed(g, d as usize),
            (0, 0, [p, q]) => Self::annulus(*p as usize, *q as usize),
            (0, 1, [m]) => Self::punctured_disk(*m as usize),
            _ => Err(SurfaceError::InvalidSurface("no standard triangulation for this surface".into())),
        }
    }
}

/// An arrow of the quiver attached to a corner of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CornerArrow {
    pub corner: Dart,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DualEnd {
    Edge(usize),
    Leg(usize),
}

impl DualEnd {
    pub fn id(self) -> usize {
        match self {
            DualEnd::Edge(e) | DualEnd::Leg(e) => e,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualFace {
    pub marked_point: usize,
    pub puncture: bool,
    /// `(vertex, end)` pairs: the corner of the face at that vertex lies between
    /// end `end - 1` and end `end`.
    pub corners: Vec<(usize, usize)>,
}

/// Trivalent graph dual to a triangulation, with counterclockwise cyclic order
/// of edge ends at each vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualCellulation {
    pub surface: MarkedSurface,
    pub vertices: Vec<[DualEnd; 3]>,
    /// Interior edge id to its two `(vertex, end)` incidences.
    pub edges: BTreeMap<usize, [(usize, usize); 2]>,
    pub faces: Vec<DualFace>,
}

impl DualCellulation {
    pub fn is_trivalent(&self) -> bool {
        self.vertices.iter().all(|v| v.len() == 3)
    }

    /// Sum over vertices of the number of edge ends (legs excluded).
    pub fn valency_sum(&self) -> usize {
        self.vertices.iter().map(|v| v.iter().filter(|x| matches!(x, DualEnd::Edge(_))).count()).sum()
    }

    /// Rebuild the triangulation this graph is dual to.
    pub fn to_triangulation(&self) -> Result<IdealTriangulation, SurfaceError> {
        let mut label = HashMap::new();
        for f in &self.faces {
            for &c in &f.corners {
                label.insert(c, f.marked_point);
            }
        }
        let mut edges: Vec<Option<Edge>> = Vec::new();
        let mut triangles = Vec::with_capacity(self.vertices.len());
        for (t, ends) in self.vertices.iter().enumerate() {
            let mut slots = [Slot { edge: 0, reversed: false }; 3];
            for i in 0..3 {
                let from = *label
                    .get(&(t, i))
                    .ok_or_else(|| SurfaceError::Malformed(format!("corner ({t},{i}) unlabeled")))?;
                let to = *label
                    .get(&(t, (i + 1) % 3))
                    .ok_or_else(|| SurfaceError::Malformed(format!("corner ({t},{}) unlabeled", (i + 1) % 3)))?;
                let (id, kind) = match ends[i] {
                    DualEnd::Edge(e) => (e, EdgeKind::Interior),
                    DualEnd::Leg(e) => (e, EdgeKind::Boundary),
                };
                if edges.len() <= id {
                    edges.resize(id + 1, None);
                }
                let reversed = match &edges[id] {
                    None => {
                        edges[id] = Some(Edge { kind, ends: [from, to] });
                        false
                    }
                    Some(_) => true,
                };
                slots[i] = Slot { edge: id, reversed };
            }
            triangles.push(Triangle { slots });
        }
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or_else(|| SurfaceError::Malformed(format!("edge {i} missing"))))
            .collect::<Result<_, _>>()?;
        Ok(IdealTriangulation { surface: self.surface.clone(), edges, triangles })
    }

    /// Graphviz rendering; legs are drawn to small boundary nodes.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph cellulation {\n  node [shape=point];\n");
        for (e, [(a, _), (b, _)]) in &self.edges {
            let _ = writeln!(s, "  v{a} -- v{b} [label=\"{e}\"];");
        }
        for (t, ends) in self.vertices.iter().enumerate() {
            for end in ends {
                if let DualEnd::Leg(e) = end {
                    let _ = writeln!(
                        s,
                        "  b{e} [shape=box,label=\"\",width=0.05,height=0.05];\n  v{t} -- b{e} [style=dashed];"
                    );
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_two_punctures() {
        let t = IdealTriangulation::torus(2).unwrap();
        let r = t.validate();
        assert!(r.valid(), "{:?}", r.failures());
        assert!(r.non_degenerate);
        assert_eq!(r.interior_edges, 6);
        assert_eq!(r.triangles, 4);
        assert_eq!(t.valencies(), vec![6, 6]);
    }

    #[test]
    fn closed_constructors_validate() {
        for (g, d) in [(0, 5), (0, 7), (1, 1), (1, 3), (2, 1), (2, 2), (3, 2)] {
            let t = IdealTriangulation::closed(g, d).unwrap();
            let r = t.validate();
            assert!(r.valid(), "g={g} d={d}: {:?}", r.failures());
            assert!(r.non_degenerate, "g={g} d={d}");
            assert_eq!(t.num_interior_edges() as i64, 6 * g as i64 - 6 + 3 * d as i64);
            assert_eq!(t.triangles.len() as i64, 4 * g as i64 - 4 + 2 * d as i64);
        }
    }

    #[test]
    fn bordered_constructors_validate() {
        for (p, q) in [(1, 1), (1, 2), (2, 2), (3, 1)] {
            let t = IdealTriangulation::annulus(p, q).unwrap();
            let r = t.validate();
            assert!(r.valid(), "annulus({p},{q}): {:?}", r.failures());
            assert_eq!(r.interior_edges, p + q);
        }
        let digon = IdealTriangulation::punctured_disk(2).unwrap();
        let r = digon.validate();
        assert!(r.valid(), "{:?}", r.failures());
        assert!(!r.non_degenerate);
        assert_eq!(r.interior_edges, 2);
        assert!(IdealTriangulation::punctured_disk(4).unwrap().validate().non_degenerate);
    }

    #[test]
    fn self_folded_is_flagged() {
        let mut t = IdealTriangulation::torus(2).unwrap();
        t.triangles[0].slots[1] = t.triangles[0].slots[0];
        let r = t.validate();
        let nd = r.checks.iter().find(|c| c.name == "non-degenerate").unwrap();
        assert!(!nd.pass);
        assert!(nd.detail.contains("self-folded"));
    }

    #[test]
    fn flip_is_an_involution() {
        let t = IdealTriangulation::torus(2).unwrap();
        for e in t.interior_edges() {
            let f = t.flip(e).unwrap();
            assert!(f.validate().valid());
            assert!(f.flip(e).unwrap().is_isomorphic(&t));
            assert_eq!(f.flip(e).unwrap().canonicalize(), t.canonicalize());
        }
    }

    #[test]
    fn flip_swaps_the_diagonal() {
        let t = IdealTriangulation::closed(0, 5).unwrap();
        let e = t.interior_edges()[0];
        let ds = &t.edge_darts()[e];
        let (x, y) = (t.origin(ds[0].prev()), t.origin(ds[1].prev()));
        let f = t.flip(e).unwrap();
        assert_eq!(f.edges[e].ends, [x, y]);
    }

    #[test]
    fn flip_errors() {
        let a = IdealTriangulation::annulus(1, 2).unwrap();
        let b = (0..a.edges.len()).find(|&e| a.edges[e].kind == EdgeKind::Boundary).unwrap();
        assert_eq!(a.flip(b), Err(SurfaceError::BoundaryEdge(b)));
        // punctured digon with a self-folded triangle around the puncture
        let surface = MarkedSurface { genus: 0, punctures: 1, boundary: vec![2] };
        let t = from_faces(surface, &[[(1, 2), (0, 2), (1, 3)], [(1, 0), (2, 1), (1, 3)]]).unwrap();
        assert!(t.validate().valid(), "{:?}", t.validate().failures());
        assert_eq!(t.self_folded_triangles(), vec![0]);
        let e = 2;
        assert_eq!(t.flip(e), Err(SurfaceError::SelfFoldedFlip(e)));
    }

    #[test]
    fn dual_round_trip() {
        for t in [IdealTriangulation::torus(2).unwrap(), IdealTriangulation::annulus(1, 2).unwrap()] {
            let d = t.dual_cellulation().unwrap();
            assert!(d.is_trivalent());
            assert_eq!(d.faces.len(), t.surface.num_marked());
            assert_eq!(d.valency_sum(), 2 * d.edges.len());
            assert!(d.to_triangulation().unwrap().is_isomorphic(&t));
        }
        let d = IdealTriangulation::torus(2).unwrap().dual_cellulation().unwrap();
        assert_eq!((d.vertices.len(), d.edges.len(), d.faces.len()), (4, 6, 2));
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_formula(&RankInput::Surface(MarkedSurface::closed(1, 2))), 6);
        assert_eq!(rank_formula(&RankInput::Surface(MarkedSurface::closed(2, 2))), 12);
        assert_eq!(rank_formula(&RankInput::PoleOrders { genus: 0, orders: vec![2, 4] }), 2);
        let s = MarkedSurface { genus: 0, punctures: 0, boundary: vec![1, 2] };
        assert_eq!(rank_formula(&RankInput::Surface(s)), 3);
    }

    #[test]
    fn admissibility_reports() {
        let t = IdealTriangulation::torus(2).unwrap();
        let a = t.glfs_admissibility();
        assert!(a.no_self_folded);
        assert!(!a.no_loops);
        assert!(!a.admissible());
        let s = IdealTriangulation::closed(0, 5).unwrap();
        assert!(!s.glfs_admissibility().valency_at_least_four);
        assert!(!IdealTriangulation::annulus(1, 2).unwrap().glfs_admissibility().admissible());
    }

    #[test]
    fn json_round_trip() {
        let t = IdealTriangulation::closed(2, 2).unwrap();
        let back = IdealTriangulation::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        let gen = IdealTriangulation::from_json(&serde_json::json!({"genus": 1, "punctures": 2})).unwrap();
        assert_eq!(gen, IdealTriangulation::torus(2).unwrap());
    }

    #[test]
    fn canonical_form_is_label_independent() {
        let t = IdealTriangulation::closed(2, 2).unwrap();
        let (walked, _) = t.random_flips(10, 7);
        let c = walked.canonicalize();
        assert!(c.validate().valid());
        assert!(c.is_isomorphic(&walked));
        assert_eq!(c.canonicalize(), c);
    }
}
