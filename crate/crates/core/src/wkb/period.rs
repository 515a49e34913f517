//! Periods `int_gamma sqrt(phi)` along polygonal paths.

use num_complex::Complex64;
use serde::Serialize;

use super::{
    angle_0_2pi, classify_points, continue_sqrt, gauss_legendre, ser_complex, Point, QuadraticDifferential, WkbError,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Period {
    #[serde(serialize_with = "ser_complex")]
    pub period: Complex64,
    /// `arg(period) / pi` in `[0, 2)`.
    pub phase: f64,
    /// `int |sqrt(phi)| |dz|` along the path.
    pub length: f64,
}

struct Piece {
    a: Complex64,
    b: Complex64,
    zero_at_a: bool,
    zero_at_b: bool,
}

fn seg_dist(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() == 0.0 { 0.0 } else { (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) };
    (a + d * t - p).norm()
}

/// Period of `phi` along the polyline `path` (finite points), with the branch
/// of `sqrt(R)` continued from the principal value at the first quadrature
/// node. Endpoints may be zeroes; the path must otherwise keep away from zeroes
/// and poles.
pub fn phase_and_period(phi: &QuadraticDifferential, path: &[Complex64], tol: f64) -> Result<Period, WkbError> {
    if path.len() < 2 {
        return Err(WkbError::Malformed("a path needs at least two points".into()));
    }
    let cls = classify_points(phi, tol)?;
    let finite = |list: &[super::Singularity]| -> Vec<Complex64> {
        list.iter()
            .filter_map(|s| match s.point {
                Point::Finite(z) => Some(z),
                Point::Infinity => None,
            })
            .collect()
    };
    let zeros = finite(&cls.zeros);
    let poles = finite(&cls.poles);
    let near = |p: Complex64, s: Complex64| (p - s).norm() <= 1e-9 * s.norm().max(1.0);
    let mut pieces = Vec::new();
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if poles.iter().any(|&p| seg_dist(p, a, b) <= 1e-12 * p.norm().max(1.0)) {
            return Err(WkbError::BranchAmbiguity(format!("segment {a} -> {b} meets a pole")));
        }
        let zero_at_a = zeros.iter().any(|&z| near(a, z));
        let zero_at_b = zeros.iter().any(|&z| near(b, z));
        let others: Vec<Complex64> = zeros
            .iter()
            .chain(poles.iter())
            .copied()
            .filter(|&s| !(near(a, s) && zero_at_a) && !(near(b, s) && zero_at_b))
            .collect();
        subdivide(a, b, zero_at_a, zero_at_b, &others, 0, &mut pieces)?;
    }
    let mut prev: Option<Complex64> = None;
    let mut period = Complex64::new(0.0, 0.0);
    let mut length = 0.0;
    for piece in &pieces {
        let d = piece.b - piece.a;
        // (node, jacobian weight) in path order
        let nodes: Vec<(Complex64, Complex64)> = if piece.zero_at_a {
            gauss_legendre().iter().map(|&(v, w)| (piece.a + d * (v * v), d * (2.0 * v * w))).collect()
        } else if piece.zero_at_b {
            gauss_legendre().iter().rev().map(|&(v, w)| (piece.b - d * (v * v), d * (2.0 * v * w))).collect()
        } else {
            gauss_legendre().iter().map(|&(t, w)| (piece.a + d * t, d * w)).collect()
        };
        for (u, jw) in nodes {
            let r = phi.eval(u);
            let s = match prev {
                None => r.sqrt(),
                Some(p) => {
                    let (s, ok) = continue_sqrt(r, p);
                    if !ok {
                        return Err(WkbError::BranchAmbiguity(format!("near {u}")));
                    }
                    s
                }
            };
            prev = Some(s);
            period += s * jw;
            length += s.norm() * jw.norm();
        }
    }
    Ok(Period { period, phase: angle_0_2pi(period.arg()) / std::f64::consts::PI, length })
}

fn subdivide(
    a: Complex64,
    b: Complex64,
    zero_at_a: bool,
    zero_at_b: bool,
    others: &[Complex64],
    depth: usize,
    out: &mut Vec<Piece>,
) -> Result<(), WkbError> {
    let len = (b - a).norm();
    let clearance = others.iter().map(|&s| seg_dist(s, a, b)).fold(f64::INFINITY, f64::min);
    // a piece may touch at most one singular endpoint
    if len <= 0.25 * clearance && !(zero_at_a && zero_at_b) {
        out.push(Piece { a, b, zero_at_a, zero_at_b });
        return Ok(());
    }
    if depth > 40 {
        return Err(WkbError::BranchAmbiguity(format!("path passes too close to a singular point near {a}")));
    }
    let m = (a + b) / 2.0;
    subdivide(a, m, zero_at_a, false, others, depth + 1, out)?;
    subdivide(m, b, false, zero_at_b, others, depth + 1, out)
}

/// `i(L0, L2) - i(L0, L1) - i(L1, L2)`: the index of a constant holomorphic
/// triangle with the given intersection indices.
pub fn constant_triangle_index(i02: i64, i01: i64, i12: i64) -> i64 {
    i02 - i01 - i12
}
