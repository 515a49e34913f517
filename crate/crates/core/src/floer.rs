//! Combinatorial model of the Floer side: graded morphisms between the
//! Lagrangian spheres of a trivalent cellulation and the potential recording
//! the holomorphic polygons bounded by them.
//!
//! Objects are the edges of the dual cellulation. At every trivalent vertex two
//! consecutive edge ends meet in one intersection point, of degree 1 read
//! clockwise and of degree 2 read anticlockwise.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ainfty::{euler_form, graded_hom_dims, kernel_rank};
use crate::novikov::{GaussianRational, NovikovScalar};
use crate::quiver::{
    are_cyclically_equivalent, glfs_decompose, qp_from_triangulation, Potential, Quiver, QuiverError,
    QuiverWithPotential, DEFAULT_ORDER,
};
use crate::surface::{rank_formula, DualCellulation, DualEnd, RankInput, Signing, SurfaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FloerError {
    #[error("degenerate cellulation: {0}")]
    Degenerate(String),
    #[error("area of puncture {0} is not positive")]
    NonPositiveArea(usize),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

/// Background class toggle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    B0,
    None,
}

/// Maslov index of an intersection point at a trivalent vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CornerGrading {
    pub vertex: usize,
    /// Edge ids of the source and target object.
    pub from: usize,
    pub to: usize,
    /// End positions at the vertex.
    pub from_end: usize,
    pub to_end: usize,
    pub degree: u8,
}

/// Both readings of every intersection point between two edges at a vertex.
/// Ends are in counterclockwise order, so `end -> end - 1` turns clockwise.
pub fn maslov_gradings(dual: &DualCellulation) -> Vec<CornerGrading> {
    let mut out = Vec::new();
    for (v, ends) in dual.vertices.iter().enumerate() {
        for i in 0..3 {
            let j = (i + 2) % 3;
            if let (DualEnd::Edge(a), DualEnd::Edge(b)) = (ends[i], ends[j]) {
                out.push(CornerGrading { vertex: v, from: a, to: b, from_end: i, to_end: j, degree: 1 });
                out.push(CornerGrading { vertex: v, from: b, to: a, from_end: j, to_end: i, degree: 2 });
            }
        }
    }
    out
}

/// Graded dimensions of `Hom(L_e, L_f)` for every ordered pair of objects,
/// objects numbered by sorted edge id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedHomTable {
    pub objects: Vec<usize>,
    pub dims: Vec<Vec<[usize; 4]>>,
}

impl GradedHomTable {
    pub fn to_json(&self) -> Value {
        json!({ "objects": self.objects, "dims": self.dims })
    }

    /// Entry-wise comparison with the morphism spaces of the cyclic category
    /// of a quiver on the same vertex order.
    pub fn matches_quiver(&self, q: &Quiver) -> bool {
        q.num_vertices == self.objects.len()
            && (0..q.num_vertices).all(|i| (0..q.num_vertices).all(|j| self.dims[i][j] == graded_hom_dims(q, i, j)))
    }
}

pub fn graded_hom_table(dual: &DualCellulation) -> Result<GradedHomTable, FloerError> {
    check_cellulation(dual)?;
    let objects: Vec<usize> = dual.edges.keys().copied().collect();
    let index: HashMap<usize, usize> = objects.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let n = objects.len();
    let mut dims = vec![vec![[0usize; 4]; n]; n];
    for (i, row) in dims.iter_mut().enumerate() {
        row[i] = [1, 0, 0, 1];
    }
    for g in maslov_gradings(dual) {
        dims[index[&g.from]][index[&g.to]][g.degree as usize] += 1;
    }
    Ok(GradedHomTable { objects, dims })
}

// a self-folded triangle shows up as a puncture face with a single corner
fn check_cellulation(dual: &DualCellulation) -> Result<(), FloerError> {
    for f in &dual.faces {
        if f.puncture && f.corners.len() < 2 {
            return Err(FloerError::Degenerate(format!("puncture {} has valency {}", f.marked_point, f.corners.len())));
        }
    }
    Ok(())
}

/// Input of the assembler.
#[derive(Clone, Debug, PartialEq)]
pub struct WkbAlgebraSpec {
    pub cellulation: DualCellulation,
    pub background: Background,
    /// `A_p` for each puncture.
    pub areas: Vec<BigRational>,
    pub signing: Signing,
}

impl WkbAlgebraSpec {
    /// Unit areas, all signs positive.
    pub fn standard(cellulation: DualCellulation, background: Background) -> Self {
        let d = cellulation.surface.punctures as usize;
        WkbAlgebraSpec { signing: Signing(vec![1; d]), areas: vec![BigRational::one(); d], cellulation, background }
    }
}

/// The assembled potential together with the corner of every arrow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloerQp {
    pub qp: QuiverWithPotential,
    /// Arrow to `(vertex, end)` of the corner it sits at.
    pub arrow_corner: Vec<(usize, usize)>,
    /// Constant triangles: vertex and word.
    pub face_words: Vec<(usize, Vec<usize>)>,
    /// Polygons around punctures: marked point and word.
    pub puncture_words: Vec<(usize, Vec<usize>)>,
    /// `lambda_p` used for each puncture.
    pub lambda: Vec<NovikovScalar>,
    pub background: Background,
    pub warnings: Vec<String>,
}

impl FloerQp {
    pub fn to_json(&self) -> Value {
        let lambda: Vec<Value> = self.lambda.iter().map(|l| json!(l.to_string())).collect();
        json!({
            "qp": self.qp.to_json(),
            "lambda": lambda,
            "provenance": {
                "background": self.background,
                "higher_terms": "omitted; equality holds up to weak right equivalence",
                "sign_of_lambda": "lambda_p = eps(p) * 2 * q^A_p; the opposite global sign gives a weakly right-equivalent potential",
                "warnings": self.warnings,
            },
        })
    }
}

/// `lambda_p = eps(p) 2 q^{A_p}` with background `b0`, and zero without.
pub fn puncture_coefficients(spec: &WkbAlgebraSpec) -> Result<Vec<NovikovScalar>, FloerError> {
    let d = spec.cellulation.surface.punctures as usize;
    spec.signing.validate(&spec.cellulation.surface)?;
    if spec.areas.len() != d {
        return Err(FloerError::Malformed(format!("{} areas for {d} punctures", spec.areas.len())));
    }
    if let Some(p) = spec.areas.iter().position(|a| !a.is_positive()) {
        return Err(FloerError::NonPositiveArea(p));
    }
    Ok(spec
        .areas
        .iter()
        .zip(&spec.signing.0)
        .map(|(a, &s)| match spec.background {
            Background::B0 => NovikovScalar::monomial(GaussianRational::from_integer(2 * s as i64), a.clone()),
            Background::None => NovikovScalar::zero(),
        })
        .collect())
}

/// Quiver of degree-1 generators and the potential
/// `sum_f T(f) - sum_p lambda_p C(p)`.
pub fn assemble_floer_potential(spec: &WkbAlgebraSpec) -> Result<FloerQp, FloerError> {
    let dual = &spec.cellulation;
    check_cellulation(dual)?;
    let lambda = puncture_coefficients(spec)?;
    let objects: Vec<usize> = dual.edges.keys().copied().collect();
    let index: HashMap<usize, usize> = objects.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut quiver = Quiver::new(objects.len());
    let mut arrow_corner = Vec::new();
    let mut arrow_at = HashMap::new();
    for g in maslov_gradings(dual).into_iter().filter(|g| g.degree == 1) {
        let id = quiver.add_arrow(index[&g.from], index[&g.to], format!("a{}", arrow_corner.len()));
        arrow_corner.push((g.vertex, g.from_end));
        arrow_at.insert((g.vertex, g.from_end), id);
    }
    let mut face_words = Vec::new();
    for v in 0..dual.vertices.len() {
        if let (Some(&a0), Some(&a1), Some(&a2)) = (arrow_at.get(&(v, 0)), arrow_at.get(&(v, 1)), arrow_at.get(&(v, 2)))
        {
            face_words.push((v, vec![a0, a2, a1]));
        }
    }
    let mut puncture_words = Vec::new();
    for f in dual.faces.iter().filter(|f| f.puncture) {
        let word: Option<Vec<usize>> = f.corners.iter().rev().map(|c| arrow_at.get(c).copied()).collect();
        if let Some(word) = word {
            puncture_words.push((f.marked_point, word));
        }
    }
    let longest = face_words.iter().chain(&puncture_words).map(|(_, w)| w.len()).max().unwrap_or(0);
    let mut w = Potential::new(DEFAULT_ORDER.max(longest));
    for (_, word) in &face_words {
        w.add_term(word, &NovikovScalar::one());
    }
    for (p, word) in &puncture_words {
        w.add_term(word, &-&lambda[*p]);
    }
    let mut warnings = Vec::new();
    let s = &dual.surface;
    if s.is_closed() && s.punctures == 1 {
        warnings.push("a closed surface with one puncture lies outside the comparison theorem; only simple puncture polygons are emitted".into());
    }
    Ok(FloerQp {
        qp: QuiverWithPotential::new(quiver, w)?,
        arrow_corner,
        face_words,
        puncture_words,
        lambda,
        background: spec.background,
        warnings,
    })
}

/// `(-1)^d` for a disk meeting the background cycle `d` times.
pub fn twist_sign(intersection_count: i64) -> i64 {
    if intersection_count.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub pass: bool,
    pub quiver_equal: bool,
    pub decomposition_ok: bool,
    pub potential_equal: bool,
    pub diff: Vec<String>,
    pub note: String,
}

/// Compare an assembled potential with the signed potential of the dual
/// triangulation: decompose into face and puncture terms, replace every
/// `lambda_p` by `eps(p)` and test cyclic equality.
pub fn compare_with_quiver(floer: &FloerQp, dual: &DualCellulation, eps: &Signing) -> Result<Comparison, FloerError> {
    let t = dual.to_triangulation()?;
    let sq = qp_from_triangulation(&t, eps)?;
    let d = dual.surface.punctures as usize;
    let mut diff = Vec::new();
    let quiver_equal = floer.qp.quiver == sq.qp.quiver;
    if !quiver_equal {
        diff.push("quivers differ".into());
    }
    let dec = glfs_decompose(&floer.qp.potential, &sq, d);
    let face_names: BTreeMap<Vec<usize>, usize> = sq.face_words.iter().map(|(t, w)| (least(w), *t)).collect();
    for msg in &dec.diagnostics {
        diff.push(msg.clone());
    }
    let decomposition_ok = dec.success && dec.remainder.is_zero();
    if !dec.remainder.is_zero() {
        diff.push(format!("{} terms outside the face and puncture cycles", dec.remainder.len()));
    }
    let mut substituted = floer.qp.potential.clone();
    for (p, word) in &sq.puncture_words {
        let c = substituted.coefficient(word);
        substituted.add_term(word, &-c);
        substituted.add_term(word, &NovikovScalar::from_integer(-(eps.0[*p] as i64)));
    }
    let potential_equal = are_cyclically_equivalent(&substituted, &sq.qp.potential);
    if !potential_equal {
        let a = substituted.terms();
        let b = sq.qp.potential.terms();
        for (word, c) in b {
            let other = a.get(word).cloned().unwrap_or_else(NovikovScalar::zero);
            if &other != c {
                diff.push(match face_names.get(&least(word.arrows())) {
                    Some(tri) => format!("face {tri}: coefficient {other}, expected {c}"),
                    None => format!("word {:?}: coefficient {other}, expected {c}", word.arrows()),
                });
            }
        }
        for (word, c) in a {
            if !b.contains_key(word) {
                diff.push(format!("word {:?}: unexpected coefficient {c}", word.arrows()));
            }
        }
    }
    Ok(Comparison {
        pass: quiver_equal && decomposition_ok && potential_equal,
        quiver_equal,
        decomposition_ok,
        potential_equal,
        diff,
        note: "equality is claimed up to weak right equivalence; higher-order terms are set to zero".into(),
    })
}

fn least(w: &[usize]) -> Vec<usize> {
    crate::quiver::least_rotation(w)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub vertices: usize,
    pub expected_rank: i64,
    pub kernel_rank: usize,
    /// Number of punctures, checked against the kernel in the closed case.
    pub expected_kernel: Option<usize>,
    pub pass: bool,
}

/// Rank of the lattice spanned by the objects and the kernel of its
/// intersection form.
pub fn homology_check(input: &RankInput, qp: &QuiverWithPotential) -> HomologyReport {
    let expected_rank = rank_formula(input);
    let vertices = qp.quiver.num_vertices;
    let kernel = kernel_rank(&euler_form(&qp.quiver));
    let expected_kernel = match input {
        RankInput::Surface(s) if s.is_closed() => Some(s.punctures as usize),
        RankInput::PoleOrders { orders, .. } if orders.iter().all(|&o| o == 2) => Some(orders.len()),
        _ => None,
    };
    let pass = vertices as i64 == expected_rank && expected_kernel.is_none_or(|k| k == kernel);
    HomologyReport { vertices, expected_rank, kernel_rank: kernel, expected_kernel, pass }
}

/// Each potential term read as a closed walk through the cellulation: the
/// arrows must chain through shared edges and all but at most one turn must be
/// clockwise. Returns the offending words.
pub fn boundary_walk_violations(floer: &FloerQp, dual: &DualCellulation) -> Vec<Vec<usize>> {
    let gradings: HashMap<(usize, usize, usize), u8> =
        maslov_gradings(dual).into_iter().map(|g| ((g.vertex, g.from_end, g.to_end), g.degree)).collect();
    let edge_at = |v: usize, end: usize| dual.vertices[v][end].id();
    let mut bad = Vec::new();
    for word in floer.qp.potential.terms().keys() {
        let arrows = word.arrows();
        let mut anticlockwise = 0;
        let mut ok = true;
        for (k, &a) in arrows.iter().enumerate() {
            let (v, i) = floer.arrow_corner[a];
            let j = (i + 2) % 3;
            match gradings.get(&(v, i, j)) {
                Some(1) => {}
                Some(_) => anticlockwise += 1,
                None => ok = false,
            }
            let (w, i2) = floer.arrow_corner[arrows[(k + 1) % arrows.len()]];
            if edge_at(v, j) != edge_at(w, i2) {
                ok = false;
            }
        }
        if !ok || anticlockwise > 1 {
            bad.push(arrows.to_vec());
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novikov::ratio;
    use crate::surface::IdealTriangulation;

    fn torus2() -> DualCellulation {
        IdealTriangulation::torus(2).unwrap().dual_cellulation().unwrap()
    }

    #[test]
    fn two_edges_at_one_vertex() {
        let dual = IdealTriangulation::punctured_disk(3).unwrap().dual_cellulation().unwrap();
        let table = graded_hom_table(&dual).unwrap();
        let n = table.objects.len();
        let mut found = false;
        for i in 0..n {
            for j in 0..n {
                if table.dims[i][j] == [0, 1, 0, 0] {
                    assert_eq!(table.dims[j][i], [0, 0, 1, 0]);
                    found = true;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn torus_table_matches_quiver() {
        let t = IdealTriangulation::torus(2).unwrap();
        let sq = qp_from_triangulation(&t, &Signing::all_positive(&t.surface)).unwrap();
        let table = graded_hom_table(&t.dual_cellulation().unwrap()).unwrap();
        assert!(table.matches_quiver(&sq.qp.quiver));
        assert_eq!(table.objects.len(), 6);
    }

    #[test]
    fn poincare_duality_at_corners() {
        let g = maslov_gradings(&torus2());
        assert_eq!(g.len(), 2 * 12);
        for pair in g.chunks(2) {
            assert_eq!(pair[0].degree + pair[1].degree, 3);
            assert_eq!((pair[0].from, pair[0].to), (pair[1].to, pair[1].from));
        }
    }

    #[test]
    fn torus_potential() {
        let spec = WkbAlgebraSpec::standard(torus2(), Background::B0);
        let f = assemble_floer_potential(&spec).unwrap();
        assert_eq!(f.face_words.len(), 4);
        assert_eq!(f.puncture_words.len(), 2);
        let two_q = NovikovScalar::monomial(GaussianRational::from_integer(2), ratio(1, 1));
        for (_, w) in &f.puncture_words {
            assert_eq!(f.qp.potential.coefficient(w), -two_q.clone());
        }
        for (_, w) in &f.face_words {
            assert_eq!(f.qp.potential.coefficient(w), NovikovScalar::one());
        }
        assert_eq!(f.qp.potential.len(), 6);
        assert!(boundary_walk_violations(&f, &spec.cellulation).is_empty());
    }

    #[test]
    fn untwisted_is_truncation() {
        let twisted = assemble_floer_potential(&WkbAlgebraSpec::standard(torus2(), Background::B0)).unwrap();
        let plain = assemble_floer_potential(&WkbAlgebraSpec::standard(torus2(), Background::None)).unwrap();
        let mut zeroed = twisted.qp.potential.clone();
        for (_, w) in &twisted.puncture_words {
            let c = zeroed.coefficient(w);
            zeroed.add_term(w, &-c);
        }
        assert_eq!(plain.qp.potential, zeroed);
        assert_eq!(plain.qp.quiver, twisted.qp.quiver);
    }

    #[test]
    fn comparison_round_trip() {
        let dual = torus2();
        let mut spec = WkbAlgebraSpec::standard(dual.clone(), Background::B0);
        spec.signing = Signing(vec![1, -1]);
        spec.areas = vec![ratio(1, 2), ratio(3, 1)];
        let f = assemble_floer_potential(&spec).unwrap();
        let cmp = compare_with_quiver(&f, &dual, &spec.signing).unwrap();
        assert!(cmp.pass, "{:?}", cmp.diff);
    }

    #[test]
    fn annulus_comparison_has_empty_potential() {
        let dual = IdealTriangulation::annulus(1, 2).unwrap().dual_cellulation().unwrap();
        let f = assemble_floer_potential(&WkbAlgebraSpec::standard(dual.clone(), Background::B0)).unwrap();
        assert!(f.qp.potential.is_zero());
        assert!(compare_with_quiver(&f, &dual, &Signing(vec![])).unwrap().pass);
    }

    #[test]
    fn corrupted_face_is_named() {
        let dual = torus2();
        let mut f = assemble_floer_potential(&WkbAlgebraSpec::standard(dual.clone(), Background::B0)).unwrap();
        let (_, w) = f.face_words[0].clone();
        f.qp.potential.add_term(&w, &NovikovScalar::one());
        let cmp = compare_with_quiver(&f, &dual, &Signing(vec![1, 1])).unwrap();
        assert!(!cmp.pass);
        assert!(cmp.diff.iter().any(|d| d.starts_with("face ")), "{:?}", cmp.diff);
    }

    #[test]
    fn areas_must_be_positive() {
        let mut spec = WkbAlgebraSpec::standard(torus2(), Background::B0);
        spec.areas[1] = ratio(0, 1);
        assert_eq!(assemble_floer_potential(&spec), Err(FloerError::NonPositiveArea(1)));
    }

    #[test]
    fn twist_signs() {
        assert_eq!([0, 1, 2, 3, -1].map(twist_sign), [1, -1, 1, -1, -1]);
    }

    #[test]
    fn homology_ranks() {
        for (g, d, rank) in [(1u32, 2usize, 6i64), (2, 2, 12)] {
            let t = IdealTriangulation::closed(g, d).unwrap();
            let sq = qp_from_triangulation(&t, &Signing::all_positive(&t.surface)).unwrap();
            let r = homology_check(&RankInput::Surface(t.surface.clone()), &sq.qp);
            assert!(r.pass, "{r:?}");
            assert_eq!((r.expected_rank, r.kernel_rank), (rank, d));
        }
        let r = homology_check(
            &RankInput::PoleOrders { genus: 0, orders: vec![2, 4] },
            &QuiverWithPotential::new(Quiver::new(2), Potential::new(3)).unwrap(),
        );
        assert!(r.pass);
    }
}
