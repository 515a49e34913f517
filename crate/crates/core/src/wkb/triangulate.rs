//! WKB triangulations from the separatrix graph.
//!
//! The separatrices cut the sphere, blown up at the poles of order at least 3,
//! into horizontal strips and half-planes. Viewing zeroes, punctures and the
//! asymptotic directions at higher-order poles as the nodes of a ribbon graph
//! (separatrices and boundary arcs as its edges, cyclic orders read off from
//! launch and arrival angles), the strips and half-planes are its faces. Each
//! strip gives an interior edge and each half-plane a boundary edge of the
//! triangulation, which has one triangle per zero.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use super::trace::{saddles_from, Tracer};
use super::{
    ser_complex, Classification, QuadraticDifferential, SaddleConnection, Separatrix, Terminal, TraceParams, WkbError,
};
use crate::surface::{
    from_faces, rank_formula, DualCellulation, IdealTriangulation, MarkedSurface, RankInput, Signing,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    Strip,
    HalfPlane,
}

/// A strip or half-plane of the horizontal foliation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Region {
    pub kind: RegionKind,
    /// The triangulation edge crossing it.
    pub edge: usize,
    /// Zeroes on its boundary, one per boundary line that carries a zero.
    pub zeros: Vec<usize>,
    /// Marked points at the two ends of its generic trajectories.
    pub ends: [usize; 2],
}

/// A marked point of the surface attached to the differential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarkedPointInfo {
    pub pole: usize,
    /// Asymptotic direction at a pole of order at least 3.
    pub direction: Option<usize>,
    /// Angle of that direction in the local chart.
    pub angle: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct WkbResult {
    pub theta: f64,
    pub classification: Classification,
    pub separatrices: Vec<Separatrix>,
    pub saddle_connections: Vec<SaddleConnection>,
    pub marked_points: Vec<MarkedPointInfo>,
    pub regions: Vec<Region>,
    pub triangulation: IdealTriangulation,
    pub dual: Option<DualCellulation>,
    /// `(pole, m)` for every double pole, in puncture order.
    pub residues: Vec<(usize, Complex64)>,
    /// `+1` at every puncture: the residue `+sqrt(m)` is chosen.
    pub signing: Signing,
    /// No self-folded triangles.
    pub non_degenerate: bool,
    pub expected_edges: i64,
}

impl WkbResult {
    pub fn to_json(&self) -> Value {
        #[derive(Serialize)]
        struct Res {
            pole: usize,
            #[serde(serialize_with = "ser_complex")]
            m: Complex64,
        }
        let residues: Vec<Res> = self.residues.iter().map(|&(pole, m)| Res { pole, m }).collect();
        let terminals: Vec<Value> = self
            .separatrices
            .iter()
            .map(|s| {
                json!({
                    "zero": s.zero,
                    "index": s.index,
                    "launch_angle": s.launch_angle,
                    "length": s.trajectory.length,
                    "terminal": s.trajectory.terminal,
                })
            })
            .collect();
        json!({
            "theta": self.theta,
            "classification": self.classification,
            "separatrices": terminals,
            "saddle_connections": self.saddle_connections,
            "marked_points": self.marked_points,
            "regions": self.regions,
            "triangulation": self.triangulation.to_json(),
            "dual": self.dual,
            "residues": residues,
            "signing": self.signing.0,
            "non_degenerate": self.non_degenerate,
            "expected_edges": self.expected_edges,
        })
    }
}

/// Reject pole data for which no trivalent cellulation with one face per pole
/// exists: without poles the Euler characteristic leaves no room for faces.
pub fn cellulation_obstruction(genus: u32, pole_orders: &[u32]) -> Result<(), WkbError> {
    if let Some(i) = pole_orders.iter().position(|&k| k == 1) {
        return Err(WkbError::SimplePolePresent(format!("pole {i}")));
    }
    if pole_orders.is_empty() {
        let g = genus as i64;
        let zeros = 4 * g - 4;
        let edges = 6 * g - 6;
        let euler = 2 - 2 * g;
        return Err(WkbError::NoTrivalentCellulation { genus, zeros, edges, euler, faces: euler - zeros + edges });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
enum DartKind {
    Sep,
    ArcForward,
    ArcBackward,
}

#[derive(Clone, Copy, Debug)]
struct RDart {
    tail: usize,
    head: usize,
    twin: usize,
    kind: DartKind,
}

fn rel_angle(a: f64, base: f64) -> f64 {
    let d = (a - base).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// The WKB triangulation of `phi` at phase `theta`.
pub fn wkb_triangulation(phi: &QuadraticDifferential, theta: f64, params: TraceParams) -> Result<WkbResult, WkbError> {
    let tracer = Tracer::new(phi, theta, params)?;
    let cls = tracer.cls.clone();
    cellulation_obstruction(0, &cls.pole_orders())?;
    let orders = cls.pole_orders();
    MarkedSurface {
        genus: 0,
        punctures: orders.iter().filter(|&&k| k == 2).count() as u32,
        boundary: orders.iter().filter(|&&k| k > 2).map(|&k| k - 2).collect(),
    }
    .validate()?;
    if cls.zeros.is_empty() {
        return Err(WkbError::DegenerateInput(
            "the differential has no zeroes, so there is nothing to triangulate".into(),
        ));
    }
    let seps = tracer.all_separatrices();
    let saddles = saddles_from(&seps, theta);
    if !saddles.is_empty() {
        return Err(WkbError::SaddleConnectionPresent(saddles.iter().map(|s| (s.from, s.to)).collect()));
    }
    for s in &seps {
        if !matches!(s.trajectory.terminal, Terminal::PoleCapture { .. }) {
            return Err(WkbError::TracingInconclusive(format!(
                "separatrix {} of zero {} ended with {:?}",
                s.index, s.zero, s.trajectory.terminal
            )));
        }
    }

    // marked points
    let mut marked_points = Vec::new();
    let mut puncture_of = HashMap::new();
    for (i, p) in cls.poles.iter().enumerate() {
        if p.pole_order() == 2 {
            puncture_of.insert(i, marked_points.len());
            marked_points.push(MarkedPointInfo { pole: i, direction: None, angle: None });
        }
    }
    let punctures = marked_points.len() as u32;
    let mut boundary = Vec::new();
    // pole -> (first marked id, directions)
    let mut boundary_of: HashMap<usize, (usize, Vec<f64>)> = HashMap::new();
    for (i, p) in cls.poles.iter().enumerate() {
        if p.pole_order() >= 3 {
            let dirs = tracer.pole_directions(i);
            let k = dirs.len();
            let first = marked_points.len();
            // boundary points are numbered clockwise, direction j gets (k - j) % k
            for idx in 0..k {
                let j = (k - idx) % k;
                marked_points.push(MarkedPointInfo { pole: i, direction: Some(j), angle: Some(dirs[j]) });
            }
            boundary.push(k as u32);
            boundary_of.insert(i, (first, dirs));
        }
    }
    let marked_id = |pole: usize, direction: Option<usize>| -> usize {
        match (puncture_of.get(&pole), boundary_of.get(&pole), direction) {
            (Some(&m), _, _) => m,
            (None, Some((first, dirs)), Some(j)) => first + (dirs.len() - j) % dirs.len(),
            _ => unreachable!("captured pole without a marked point"),
        }
    };

    // ribbon graph
    let nz = cls.zeros.len();
    let node_of_marked = |m: usize| nz + m;
    let mut darts: Vec<RDart> = Vec::new();
    let mut sep_end = Vec::with_capacity(seps.len());
    for (i, s) in seps.iter().enumerate() {
        let Terminal::PoleCapture { pole, direction, .. } = s.trajectory.terminal else { unreachable!() };
        let m = marked_id(pole, direction);
        sep_end.push(m);
        darts.push(RDart { tail: s.zero, head: node_of_marked(m), twin: 2 * i + 1, kind: DartKind::Sep });
        darts.push(RDart { tail: node_of_marked(m), head: s.zero, twin: 2 * i, kind: DartKind::Sep });
    }
    // arcs: forward dart from direction j to j + 1 (counterclockwise about the pole)
    let mut arc_darts: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut higher: Vec<usize> = boundary_of.keys().copied().collect();
    higher.sort_unstable();
    for &pole in &higher {
        let k = boundary_of[&pole].1.len();
        for j in 0..k {
            let (a, b) = (node_of_marked(marked_id(pole, Some(j))), node_of_marked(marked_id(pole, Some((j + 1) % k))));
            let f = darts.len();
            darts.push(RDart { tail: a, head: b, twin: f + 1, kind: DartKind::ArcForward });
            darts.push(RDart { tail: b, head: a, twin: f, kind: DartKind::ArcBackward });
            arc_darts.insert((pole, j), (f, f + 1));
        }
    }
    // counterclockwise rotations
    let num_nodes = nz + marked_points.len();
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    for (i, s) in seps.iter().enumerate() {
        rotation[s.zero].push(2 * i);
    }
    for r in rotation.iter_mut().take(nz) {
        r.sort_by_key(|&d| seps[d / 2].index);
    }
    let mut incoming: Vec<Vec<(f64, usize)>> = vec![Vec::new(); marked_points.len()];
    for (i, s) in seps.iter().enumerate() {
        let Terminal::PoleCapture { entry_angle, .. } = s.trajectory.terminal else { unreachable!() };
        let m = sep_end[i];
        let key = match marked_points[m].angle {
            Some(base) => rel_angle(entry_angle, base),
            None => entry_angle,
        };
        incoming[m].push((key, 2 * i + 1));
    }
    for (m, list) in incoming.iter_mut().enumerate() {
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        if list.windows(2).any(|w| (w[1].0 - w[0].0).abs() < 1e-12) {
            return Err(WkbError::TracingInconclusive(format!(
                "separatrices arrive at marked point {m} at the same angle"
            )));
        }
        let node = node_of_marked(m);
        let info = marked_points[m];
        match info.direction {
            None => rotation[node] = list.iter().map(|e| e.1).collect(),
            Some(j) => {
                let k = boundary_of[&info.pole].1.len();
                let back = arc_darts[&(info.pole, (j + k - 1) % k)].1;
                let fwd = arc_darts[&(info.pole, j)].0;
                let mut rot = vec![back];
                rot.extend(list.iter().map(|e| e.1));
                rot.push(fwd);
                rotation[node] = rot;
            }
        }
    }
    let mut position = vec![(0usize, 0usize); darts.len()];
    for (v, rot) in rotation.iter().enumerate() {
        for (i, &d) in rot.iter().enumerate() {
            if darts[d].tail != v {
                return Err(WkbError::TracingInconclusive("inconsistent ribbon graph".into()));
            }
            position[d] = (v, i);
        }
    }
    // faces lie to the left of their darts
    let face_next = |d: usize| {
        let t = darts[d].twin;
        let (v, i) = position[t];
        let rot = &rotation[v];
        rot[(i + rot.len() - 1) % rot.len()]
    };
    let mut face_of = vec![usize::MAX; darts.len()];
    let mut regions = Vec::new();
    let mut region_of_face: Vec<Option<usize>> = Vec::new();
    for start in 0..darts.len() {
        if face_of[start] != usize::MAX {
            continue;
        }
        let f = region_of_face.len();
        let mut cycle = Vec::new();
        let mut d = start;
        loop {
            face_of[d] = f;
            cycle.push(d);
            d = face_next(d);
            if d == start {
                break;
            }
            if cycle.len() > darts.len() {
                return Err(WkbError::TracingInconclusive("face tracing did not close".into()));
            }
        }
        let fwd = cycle.iter().filter(|&&d| matches!(darts[d].kind, DartKind::ArcForward)).count();
        let back = cycle.iter().filter(|&&d| matches!(darts[d].kind, DartKind::ArcBackward)).count();
        let outs: Vec<usize> =
            cycle.iter().copied().filter(|&d| matches!(darts[d].kind, DartKind::Sep) && darts[d].tail < nz).collect();
        let seps_in_face = cycle.iter().filter(|&&d| matches!(darts[d].kind, DartKind::Sep)).count();
        let kind = if fwd == cycle.len() {
            region_of_face.push(None);
            continue;
        } else if fwd == 0 && back == 0 && seps_in_face == 4 && outs.len() == 2 {
            RegionKind::Strip
        } else if fwd == 0 && back == 1 && seps_in_face == 2 && outs.len() == 1 {
            RegionKind::HalfPlane
        } else {
            return Err(WkbError::TracingInconclusive(format!(
                "region with {} separatrix sides and {} boundary arcs",
                seps_in_face,
                fwd + back
            )));
        };
        let zeros: Vec<usize> = outs.iter().map(|&d| darts[d].tail).collect();
        let a = sep_end[outs[0] / 2];
        let b = match kind {
            RegionKind::Strip => {
                // the two corners of the strip other than its zeroes
                let other = cycle
                    .iter()
                    .filter(|&&d| matches!(darts[d].kind, DartKind::Sep) && darts[d].tail >= nz)
                    .map(|&d| darts[d].tail - nz)
                    .find(|&m| m != a);
                other.unwrap_or(a)
            }
            RegionKind::HalfPlane => {
                let arc = cycle.iter().find(|&&d| matches!(darts[d].kind, DartKind::ArcBackward)).unwrap();
                let (x, y) = (darts[*arc].tail - nz, darts[*arc].head - nz);
                if x == a {
                    y
                } else {
                    x
                }
            }
        };
        region_of_face.push(Some(regions.len()));
        regions.push(Region { kind, edge: regions.len(), zeros, ends: [a.min(b), a.max(b)] });
    }

    // one triangle per zero
    let mut faces = Vec::with_capacity(nz);
    for z in 0..nz {
        let rot = &rotation[z];
        let mut face = [(0usize, 0usize); 3];
        for (k, &d) in rot.iter().enumerate() {
            let region = region_of_face[face_of[d]]
                .ok_or_else(|| WkbError::TracingInconclusive(format!("zero {z} borders a pole disk")))?;
            face[k] = (sep_end[d / 2], region);
        }
        faces.push(face);
    }
    let surface = MarkedSurface { genus: 0, punctures, boundary };
    let triangulation = from_faces(surface, &faces)?;
    let report = triangulation.validate();
    let failures: Vec<String> = report
        .failures()
        .iter()
        .filter(|c| c.name != "non-degenerate")
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if !failures.is_empty() {
        return Err(WkbError::TracingInconclusive(format!(
            "assembled triangulation is invalid: {}",
            failures.join("; ")
        )));
    }
    let expected_edges = rank_formula(&RankInput::PoleOrders { genus: 0, orders: cls.pole_orders() });
    if triangulation.num_interior_edges() as i64 != expected_edges {
        return Err(WkbError::TracingInconclusive(format!(
            "{} strips, expected {expected_edges}",
            triangulation.num_interior_edges()
        )));
    }
    let non_degenerate = triangulation.self_folded_triangles().is_empty();
    let dual = triangulation.dual_cellulation().ok();
    let residues: Vec<(usize, Complex64)> =
        marked_points.iter().filter(|m| m.direction.is_none()).map(|m| (m.pole, cls.poles[m.pole].leading)).collect();
    let signing = Signing(vec![1; punctures as usize]);
    Ok(WkbResult {
        theta,
        classification: cls,
        saddle_connections: saddles,
        separatrices: seps,
        marked_points,
        regions,
        triangulation,
        dual,
        residues,
        signing,
        non_degenerate,
        expected_edges,
    })
}
