//! Meromorphic quadratic differentials `R(z) dz^2` on the Riemann sphere.
//!
//! The horizontal foliation at phase `theta` consists of the curves along
//! which `e^{-i theta} sqrt(R) dz` is real and positive, i.e. the horizontal
//! trajectories of `e^{-2 i theta} R dz^2`. Near infinity everything is computed
//! in the chart `w = 1/z`, where the differential reads
//! `w^{deg Q - deg P - 4} P~(w) / Q~(w) dw^2` with reversed coefficient lists.

mod period;
mod plot;
mod poly;
mod trace;
mod triangulate;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::surface::SurfaceError;

pub use period::{constant_triangle_index, phase_and_period, Period};
pub use plot::{plot_data, svg_plot};
pub use poly::{cluster_roots, Poly, RootCluster};
pub use trace::{
    detect_saddle_connections, separatrices, trace_trajectory, SaddleConnection, Separatrix, Terminal, TraceParams,
    Trajectory,
};
pub use triangulate::{cellulation_obstruction, wkb_triangulation, Region, RegionKind, WkbResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WkbError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("zero of order {order} at {at}; only simple zeroes are supported")]
    NonSimpleZero { at: String, order: usize },
    #[error("point {0} is not a double pole")]
    NotDoublePole(String),
    #[error("residue at {0} vanishes")]
    ZeroResidue(String),
    #[error("trajectory starts at a zero or pole")]
    StartAtSingularity,
    #[error("{} saddle connection(s) at this phase, first between zeroes {} and {}; rotate the phase", .0.len(), .0[0].0, .0[0].1)]
    SaddleConnectionPresent(Vec<(usize, usize)>),
    #[error("simple pole at {0} is not supported")]
    SimplePolePresent(String),
    #[error("tracing inconclusive: {0}")]
    TracingInconclusive(String),
    #[error("branch of sqrt(R) is ambiguous along the path: {0}")]
    BranchAmbiguity(String),
    #[error(
        "no trivalent cellulation: genus {genus} without poles has {zeros} zeroes and {edges} edges, so V - E + F = {euler} leaves {faces} faces"
    )]
    NoTrivalentCellulation { genus: u32, zeros: i64, edges: i64, euler: i64, faces: i64 },
    #[error("malformed differential: {0}")]
    Malformed(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

impl WkbError {
    /// Whether the failure is numerical rather than a property of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            WkbError::TracingInconclusive(_) | WkbError::BranchAmbiguity(_) | WkbError::SaddleConnectionPresent(_)
        )
    }
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    pub(crate) fn chart(self) -> (Chart, Complex64) {
        match self {
            Point::Finite(z) => (Chart::Finite, z),
            Point::Infinity => (Chart::Infinite, Complex64::new(0.0, 0.0)),
        }
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            Point::Infinity => write!(f, "infinity"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Finite(z) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(&z.re)?;
                seq.serialize_element(&z.im)?;
                seq.end()
            }
            Point::Infinity => s.serialize_str("infinity"),
        }
    }
}

pub(crate) fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// `z = x` or `w = 1/z = x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Chart {
    Finite,
    Infinite,
}

/// A zero or pole. `order` is positive for zeroes and minus the pole order for
/// poles; `leading` is `a` in `R ~ a u^order` for the local chart coordinate `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Singularity {
    pub point: Point,
    pub order: i32,
    #[serde(serialize_with = "ser_complex")]
    pub leading: Complex64,
}

impl Singularity {
    pub fn pole_order(&self) -> usize {
        (-self.order).max(0) as usize
    }
}

/// Zeroes and poles, each sorted by position with infinity last.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub zeros: Vec<Singularity>,
    pub poles: Vec<Singularity>,
}

impl Classification {
    /// `#zeroes - sum of pole orders`; `-4` on the sphere.
    pub fn divisor_degree(&self) -> i64 {
        self.zeros.iter().map(|z| z.order as i64).sum::<i64>() + self.poles.iter().map(|p| p.order as i64).sum::<i64>()
    }

    pub fn pole_orders(&self) -> Vec<u32> {
        self.poles.iter().map(|p| p.pole_order() as u32).collect()
    }

    pub fn double_poles(&self) -> Vec<usize> {
        (0..self.poles.len()).filter(|&i| self.poles[i].pole_order() == 2).collect()
    }
}

/// `phi = P(z)/Q(z) dz^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticDifferential {
    p: Poly,
    q: Poly,
    p_rev: Poly,
    q_rev: Poly,
}

impl QuadraticDifferential {
    pub fn new(p: Poly, q: Poly) -> Result<Self, WkbError> {
        if p.is_zero() {
            return Err(WkbError::DegenerateInput("numerator is zero".into()));
        }
        if q.is_zero() {
            return Err(WkbError::DegenerateInput("denominator is zero".into()));
        }
        if p.coeffs().iter().chain(q.coeffs()).any(|c| !c.is_finite()) {
            return Err(WkbError::Malformed("non-finite coefficient".into()));
        }
        let (p_rev, q_rev) = (p.reversed(), q.reversed());
        Ok(QuadraticDifferential { p, q, p_rev, q_rev })
    }

    /// From ascending real coefficient lists.
    pub fn from_real(p: &[f64], q: &[f64]) -> Result<Self, WkbError> {
        let conv = |v: &[f64]| Poly::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        QuadraticDifferential::new(conv(p), conv(q))
    }

    pub fn numerator(&self) -> &Poly {
        &self.p
    }

    pub fn denominator(&self) -> &Poly {
        &self.q
    }

    /// `deg Q - deg P - 4`: the order of the differential at infinity.
    pub fn order_at_infinity(&self) -> i32 {
        self.q.degree() as i32 - self.p.degree() as i32 - 4
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.p.eval(z) / self.q.eval(z)
    }

    /// Coefficient function in the given chart.
    pub(crate) fn eval_chart(&self, chart: Chart, u: Complex64) -> Complex64 {
        match chart {
            Chart::Finite => self.eval(u),
            Chart::Infinite => u.powi(self.order_at_infinity()) * self.p_rev.eval(u) / self.q_rev.eval(u),
        }
    }

    /// `c * phi`.
    pub fn scaled(&self, c: Complex64) -> Self {
        QuadraticDifferential::new(self.p.scale(c), self.q.clone()).expect("nonzero scaling")
    }

    /// `e^{-2 i theta} phi`, whose horizontal foliation is the phase-`theta`
    /// foliation of `phi`.
    pub fn rotated(&self, theta: f64) -> Self {
        self.scaled(Complex64::from_polar(1.0, -2.0 * theta))
    }

    /// Pullback under `z -> a z + b`: `R(a z + b) a^2 dz^2`.
    pub fn pullback_affine(&self, a: Complex64, b: Complex64) -> Self {
        QuadraticDifferential::new(self.p.compose_affine(a, b).scale(a * a), self.q.compose_affine(a, b))
            .expect("affine pullback of a nonzero differential")
    }

    /// `{"P": [...], "Q": [...]}` with ascending coefficients, each a number,
    /// a pair `[re, im]` or an object `{"re", "im"}`.
    pub fn from_json(v: &Value) -> Result<Self, WkbError> {
        let list = |key: &str| -> Result<Poly, WkbError> {
            let arr = v
                .get(key)
                .and_then(|x| x.as_array())
                .ok_or_else(|| WkbError::Malformed(format!("missing coefficient list {key}")))?;
            let mut out = Vec::with_capacity(arr.len());
            for c in arr {
                out.push(parse_complex(c).ok_or_else(|| WkbError::Malformed(format!("bad coefficient {c} in {key}")))?);
            }
            Ok(Poly::new(out))
        };
        QuadraticDifferential::new(list("P")?, list("Q")?)
    }

    pub fn to_json(&self) -> Value {
        let enc = |p: &Poly| p.coeffs().iter().map(|c| json!([c.re, c.im])).collect::<Vec<_>>();
        json!({"P": enc(&self.p), "Q": enc(&self.q)})
    }
}

pub(crate) fn parse_complex(v: &Value) -> Option<Complex64> {
    match v {
        Value::Number(x) => Some(Complex64::new(x.as_f64()?, 0.0)),
        Value::Array(xs) if xs.len() == 2 => Some(Complex64::new(xs[0].as_f64()?, xs[1].as_f64()?)),
        Value::Object(m) => Some(Complex64::new(
            m.get("re").and_then(Value::as_f64).unwrap_or(0.0),
            m.get("im").and_then(Value::as_f64).unwrap_or(0.0),
        )),
        _ => None,
    }
}

/// Roots are polished to `tol`; two roots closer than `sqrt(tol)` (relative to
/// their size) count as one multiple root.
pub fn classify_points(phi: &QuadraticDifferential, tol: f64) -> Result<Classification, WkbError> {
    let radius = tol.sqrt();
    let pz = cluster_roots(&phi.p, radius);
    let qz = cluster_roots(&phi.q, radius);
    for a in &pz {
        for b in &qz {
            if (a.center - b.center).norm() < radius * a.center.norm().max(1.0) {
                return Err(WkbError::DegenerateInput(format!(
                    "numerator and denominator share the root {}",
                    Point::Finite(a.center)
                )));
            }
        }
    }
    let mut zeros = Vec::new();
    for r in &pz {
        if r.multiplicity > 1 {
            return Err(WkbError::NonSimpleZero { at: Point::Finite(r.center).to_string(), order: r.multiplicity });
        }
        let leading = phi.p.derivative().eval(r.center) / phi.q.eval(r.center);
        zeros.push(Singularity { point: Point::Finite(r.center), order: 1, leading });
    }
    let mut poles = Vec::new();
    for r in &qz {
        let k = r.multiplicity;
        let leading = phi.p.eval(r.center) / phi.q.taylor(k).eval(r.center);
        poles.push(Singularity { point: Point::Finite(r.center), order: -(k as i32), leading });
    }
    let inf = phi.order_at_infinity();
    let leading = phi.p.leading() / phi.q.leading();
    if inf > 1 {
        return Err(WkbError::NonSimpleZero { at: "infinity".into(), order: inf as usize });
    } else if inf == 1 {
        zeros.push(Singularity { point: Point::Infinity, order: 1, leading });
    } else if inf < 0 {
        poles.push(Singularity { point: Point::Infinity, order: inf, leading });
    }
    Ok(Classification { zeros, poles })
}

/// `m = lim (z - p)^2 R(z)` at a double pole, in the local chart there.
pub fn residue_at_double_pole(phi: &QuadraticDifferential, pole: Point, tol: f64) -> Result<Complex64, WkbError> {
    let cls = classify_points(phi, tol)?;
    let found = cls.poles.iter().find(|s| match (s.point, pole) {
        (Point::Infinity, Point::Infinity) => true,
        (Point::Finite(a), Point::Finite(b)) => (a - b).norm() < tol.sqrt() * a.norm().max(1.0),
        _ => false,
    });
    match found {
        Some(s) if s.pole_order() == 2 => {
            if s.leading.norm() <= tol {
                Err(WkbError::ZeroResidue(pole.to_string()))
            } else {
                Ok(s.leading)
            }
        }
        _ => Err(WkbError::NotDoublePole(pole.to_string())),
    }
}

/// The residue `sign * sqrt(m)` chosen at a double pole, with `sqrt` the
/// principal branch, together with the recorded sign.
pub fn sign_residue(phi: &QuadraticDifferential, pole: Point, sign: i8, tol: f64) -> Result<(Complex64, i8), WkbError> {
    let m = residue_at_double_pole(phi, pole, tol)?;
    let s = if sign < 0 { -1 } else { 1 };
    Ok((m.sqrt() * s as f64, s))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = 24;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push(((1.0 - x) / 2.0, w / 2.0));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    })
}

/// Square root of `r` on the branch closest to `prev`, and whether the choice
/// was unambiguous (the two candidates are not equidistant).
pub(crate) fn continue_sqrt(r: Complex64, prev: Complex64) -> (Complex64, bool) {
    let s = r.sqrt();
    let dot = (s * prev.conj()).re;
    let chosen = if dot < 0.0 { -s } else { s };
    (chosen, dot.abs() > 1e-3 * s.norm() * prev.norm())
}

/// `arg` normalized to `[0, 2 pi)`.
pub(crate) fn angle_0_2pi(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classification_examples() {
        let phi = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap();
        let cls = classify_points(&phi, 1e-10).unwrap();
        assert_eq!(cls.zeros.len(), 2);
        assert!(matches!(cls.zeros[0].point, Point::Finite(z) if (z - c(-1.0, 0.0)).norm() < 1e-12));
        assert_eq!(cls.poles.len(), 2);
        assert_eq!(cls.poles[0].order, -2);
        assert_eq!(cls.poles[1].point, Point::Infinity);
        assert_eq!(cls.poles[1].order, -4);
        assert_eq!(cls.divisor_degree(), -4);

        let z = QuadraticDifferential::from_real(&[0.0, 1.0], &[1.0]).unwrap();
        let cls = classify_points(&z, 1e-10).unwrap();
        assert_eq!((cls.zeros.len(), cls.poles.len(), cls.poles[0].order), (1, 1, -5));

        let flat = QuadraticDifferential::from_real(&[1.0], &[1.0]).unwrap();
        let cls = classify_points(&flat, 1e-10).unwrap();
        assert_eq!((cls.zeros.len(), cls.pole_orders()), (0, vec![4]));
    }

    #[test]
    fn classification_errors() {
        let double_zero = QuadraticDifferential::from_real(&[1.0, 2.0, 1.0], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(classify_points(&double_zero, 1e-10), Err(WkbError::NonSimpleZero { order: 2, .. })));
        let shared = QuadraticDifferential::from_real(&[-1.0, 1.0], &[0.0, -1.0, 1.0]).unwrap();
        assert!(matches!(classify_points(&shared, 1e-10), Err(WkbError::DegenerateInput(_))));
        assert!(QuadraticDifferential::from_real(&[], &[1.0]).is_err());
    }

    #[test]
    fn residues() {
        let five = QuadraticDifferential::from_real(&[5.0], &[0.0, 0.0, 1.0]).unwrap();
        let m = residue_at_double_pole(&five, Point::Finite(c(0.0, 0.0)), 1e-10).unwrap();
        assert!((m - c(5.0, 0.0)).norm() < 1e-9);
        let m_inf = residue_at_double_pole(&five, Point::Infinity, 1e-10).unwrap();
        assert!((m_inf - c(5.0, 0.0)).norm() < 1e-9);

        let phi = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap();
        let m = residue_at_double_pole(&phi, Point::Finite(c(0.0, 0.0)), 1e-10).unwrap();
        assert!((m - c(-1.0, 0.0)).norm() < 1e-9);
        assert!(matches!(residue_at_double_pole(&phi, Point::Infinity, 1e-10), Err(WkbError::NotDoublePole(_))));

        let shifted = QuadraticDifferential::from_real(&[1.0], &[4.0, -4.0, 1.0]).unwrap();
        let m = residue_at_double_pole(&shifted, Point::Finite(c(2.0, 0.0)), 1e-10).unwrap();
        assert!((m - c(1.0, 0.0)).norm() < 1e-9);

        let (r, s) = sign_residue(&five, Point::Finite(c(0.0, 0.0)), -1, 1e-10).unwrap();
        assert_eq!(s, -1);
        assert!((r + c(5f64.sqrt(), 0.0)).norm() < 1e-9);
    }

    #[test]
    fn residues_are_affine_invariant() {
        let phi = QuadraticDifferential::new(
            Poly::new(vec![c(0.3, -1.0), c(1.0, 2.0), c(1.0, 0.0)]),
            Poly::from_roots(c(1.0, 0.0), &[c(0.5, 0.5), c(0.5, 0.5), c(-1.0, 0.0)]),
        )
        .unwrap();
        let m = residue_at_double_pole(&phi, Point::Finite(c(0.5, 0.5)), 1e-10).unwrap();
        let moved = phi.pullback_affine(c(1.0, 0.0), c(1.0, 0.0));
        let m1 = residue_at_double_pole(&moved, Point::Finite(c(-0.5, 0.5)), 1e-10).unwrap();
        let scaled = phi.pullback_affine(c(2.0, 0.0), c(0.0, 0.0));
        let m2 = residue_at_double_pole(&scaled, Point::Finite(c(0.25, 0.25)), 1e-10).unwrap();
        assert!((m - m1).norm() < 1e-9 && (m - m2).norm() < 1e-9, "{m} {m1} {m2}");
    }

    #[test]
    fn json_round_trip() {
        let v = json!({"P": [[-1, 0], 0, {"re": 1}], "Q": [0, 0, [1, 0]]});
        let phi = QuadraticDifferential::from_json(&v).unwrap();
        assert_eq!(QuadraticDifferential::from_json(&phi.to_json()).unwrap(), phi);
        assert!(QuadraticDifferential::from_json(&json!({"P": [1]})).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let s: f64 = gauss_legendre().iter().map(|&(x, w)| w * x.powi(9)).sum();
        assert!((s - 0.1).abs() < 1e-14);
    }
}
