//! Adaptive tracing of horizontal trajectories.
//!
//! Trajectories are integrated in Euclidean arc length of the current chart,
//! `du/dt = e^{i theta} conj(s) / |s|` with `s` the continued branch of
//! `sqrt(R)`, while the `phi`-length `int |s| |du|` is carried along. Steps are
//! classical RK4 with step doubling for error control.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::ser::Serializer;
use serde::Serialize;

use super::{
    angle_0_2pi, classify_points, continue_sqrt, gauss_legendre, Chart, Classification, Point, QuadraticDifferential,
    WkbError,
};

/// Numerical parameters of the tracer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceParams {
    /// Local error per step, relative to the distance to the nearest
    /// singularity.
    pub tol: f64,
    /// Capture radius around a pole, as a fraction of the distance to the
    /// nearest other singularity.
    pub capture: f64,
    /// A trajectory within this `phi`-distance of a zero has hit it.
    pub zero_tol: f64,
    /// Root polishing tolerance for the classification of singular points.
    pub root_tol: f64,
    pub max_steps: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams { tol: 1e-9, capture: 0.05, zero_tol: 1e-6, root_tol: 1e-10, max_steps: 200_000 }
    }
}

impl TraceParams {
    pub fn with_tol(self, tol: f64) -> Self {
        TraceParams { tol, ..self }
    }

    pub fn validate(&self) -> Result<(), WkbError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.tol) && ok(self.capture) && self.capture < 0.5 && ok(self.zero_tol) && ok(self.root_tol) {
            Ok(())
        } else {
            Err(WkbError::Malformed("tolerances must be positive and the capture fraction below 0.5".into()))
        }
    }
}

/// How a trajectory ended.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Terminal {
    /// Entered the capture disk of a pole and approached it monotonically.
    /// `direction` indexes the asymptotic horizontal directions at a pole of
    /// order at least 3, counterclockwise from the smallest angle in `[0, 2 pi)`.
    PoleCapture {
        pole: usize,
        direction: Option<usize>,
        entry_angle: f64,
    },
    /// Came within the zero tolerance of a zero.
    ZeroHit {
        zero: usize,
        distance: f64,
    },
    /// The step size collapsed or the state became non-finite.
    Escaped,
    StepLimit,
}

fn ser_points<S: Serializer>(pts: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    pts.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub theta: f64,
    /// Samples in the coordinate `z`.
    #[serde(serialize_with = "ser_points")]
    pub points: Vec<Complex64>,
    /// `phi`-length up to the capture circle, the zero, or the last sample.
    pub length: f64,
    pub terminal: Terminal,
    pub steps: usize,
}

/// One of the three horizontal rays leaving a simple zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separatrix {
    pub zero: usize,
    pub index: usize,
    /// Launch angle from the local model `a u du^2`, in `[0, 2 pi)`.
    pub launch_angle: f64,
    pub trajectory: Trajectory,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleConnection {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    /// `arg(period) / pi` in `[0, 2)`.
    pub phase: f64,
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Zero(usize),
    Pole(usize),
}

#[derive(Clone, Copy, Debug)]
struct LocalSing {
    kind: Kind,
    u: Complex64,
    /// Distance to the nearest other singularity in the chart.
    scale: f64,
}

/// Classified differential with chart data, shared by all traces at a phase.
pub(crate) struct Tracer<'a> {
    phi: &'a QuadraticDifferential,
    factored: Option<Factored>,
    pub cls: Classification,
    theta: f64,
    rot: Complex64,
    params: TraceParams,
    chart_radius: f64,
    local: [Vec<LocalSing>; 2],
}

/// `R` as `c prod (z - a)^m`, which keeps full relative accuracy next to a
/// multiple root of the denominator where the expanded form cancels.
struct Factored {
    c: Complex64,
    order_at_infinity: i32,
    roots: Vec<(Complex64, i32)>,
}

impl Factored {
    fn new(phi: &QuadraticDifferential, cls: &Classification) -> Option<Self> {
        let roots: Vec<(Complex64, i32)> = cls
            .zeros
            .iter()
            .chain(&cls.poles)
            .filter_map(|s| match s.point {
                Point::Finite(z) => Some((z, s.order)),
                Point::Infinity => None,
            })
            .collect();
        let zeros: i32 = roots.iter().filter(|r| r.1 > 0).map(|r| r.1).sum();
        let poles: i32 = roots.iter().filter(|r| r.1 < 0).map(|r| -r.1).sum();
        if zeros != phi.p.degree() as i32 || poles != phi.q.degree() as i32 {
            return None;
        }
        Some(Factored { c: phi.p.leading() / phi.q.leading(), order_at_infinity: phi.order_at_infinity(), roots })
    }

    fn eval(&self, chart: Chart, u: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match chart {
            Chart::Finite => self.roots.iter().fold(self.c, |acc, &(a, m)| acc * (u - a).powi(m)),
            Chart::Infinite => self
                .roots
                .iter()
                .fold(self.c * u.powi(self.order_at_infinity), |acc, &(a, m)| acc * (one - a * u).powi(m)),
        }
    }
}

#[derive(Clone, Copy)]
struct State {
    chart: Chart,
    u: Complex64,
    s: Complex64,
    length: f64,
}

fn chart_index(c: Chart) -> usize {
    match c {
        Chart::Finite => 0,
        Chart::Infinite => 1,
    }
}

fn to_z(chart: Chart, u: Complex64) -> Complex64 {
    match chart {
        Chart::Finite => u,
        Chart::Infinite => u.inv(),
    }
}

impl<'a> Tracer<'a> {
    pub(crate) fn new(phi: &'a QuadraticDifferential, theta: f64, params: TraceParams) -> Result<Self, WkbError> {
        params.validate()?;
        let cls = classify_points(phi, params.root_tol)?;
        let mut sings: Vec<(Kind, Point)> = Vec::new();
        sings.extend(cls.zeros.iter().enumerate().map(|(i, s)| (Kind::Zero(i), s.point)));
        sings.extend(cls.poles.iter().enumerate().map(|(i, s)| (Kind::Pole(i), s.point)));
        let max_abs = sings
            .iter()
            .filter_map(|(_, p)| match p {
                Point::Finite(z) => Some(z.norm()),
                Point::Infinity => None,
            })
            .fold(1.0, f64::max);
        let chart_radius = 4.0 * max_abs;
        let mut local: [Vec<LocalSing>; 2] = [Vec::new(), Vec::new()];
        for &(kind, p) in &sings {
            match p {
                Point::Finite(z) => {
                    local[0].push(LocalSing { kind, u: z, scale: 0.0 });
                    if z.norm() > 0.0 {
                        local[1].push(LocalSing { kind, u: z.inv(), scale: 0.0 });
                    }
                }
                Point::Infinity => local[1].push(LocalSing { kind, u: Complex64::new(0.0, 0.0), scale: 0.0 }),
            }
        }
        let default_scale = [max_abs, 1.0 / max_abs];
        for (c, list) in local.iter_mut().enumerate() {
            let pts: Vec<Complex64> = list.iter().map(|s| s.u).collect();
            for (i, s) in list.iter_mut().enumerate() {
                s.scale = pts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| (v - s.u).norm())
                    .fold(f64::INFINITY, f64::min)
                    .min(default_scale[c].max(1e-300) * 4.0);
                if !s.scale.is_finite() {
                    s.scale = default_scale[c];
                }
            }
        }
        let factored = Factored::new(phi, &cls);
        Ok(Tracer { phi, factored, cls, theta, rot: Complex64::from_polar(1.0, theta), params, chart_radius, local })
    }

    fn eval(&self, chart: Chart, u: Complex64) -> Complex64 {
        match &self.factored {
            Some(f) => f.eval(chart, u),
            None => self.phi.eval_chart(chart, u),
        }
    }

    fn sing_in(&self, chart: Chart, kind_match: impl Fn(Kind) -> bool) -> Option<LocalSing> {
        self.local[chart_index(chart)].iter().copied().find(|s| kind_match(s.kind))
    }

    fn dist_near(&self, chart: Chart, u: Complex64) -> f64 {
        let d = self.local[chart_index(chart)].iter().map(|s| (u - s.u).norm()).fold(f64::INFINITY, f64::min);
        let cap = match chart {
            Chart::Finite => self.chart_radius,
            Chart::Infinite => 2.0 / self.chart_radius,
        };
        d.min(cap)
    }

    /// Asymptotic horizontal directions at a pole of order `k >= 3`, sorted in
    /// `[0, 2 pi)`: the solutions of `arg a + (2 - k) alpha = 2 theta`.
    pub(crate) fn pole_directions(&self, pole: usize) -> Vec<f64> {
        let s = &self.cls.poles[pole];
        let k = s.pole_order() as i32;
        if k < 3 {
            return Vec::new();
        }
        let m = (k - 2) as f64;
        let mut out: Vec<f64> =
            (0..k - 2).map(|j| angle_0_2pi((s.leading.arg() - 2.0 * self.theta + 2.0 * PI * j as f64) / m)).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    fn field(&self, chart: Chart, u: Complex64, sref: Complex64) -> Option<(Complex64, f64, Complex64)> {
        let r = self.eval(chart, u);
        if !r.is_finite() || r.norm() == 0.0 {
            return None;
        }
        let (s, ok) = continue_sqrt(r, sref);
        if !ok {
            return None;
        }
        let speed = s.norm();
        Some((self.rot * s.conj() / speed, speed, s))
    }

    fn rk4(&self, st: &State, h: f64) -> Option<State> {
        let (d1, v1, _) = self.field(st.chart, st.u, st.s)?;
        let (d2, v2, _) = self.field(st.chart, st.u + d1 * (h / 2.0), st.s)?;
        let (d3, v3, _) = self.field(st.chart, st.u + d2 * (h / 2.0), st.s)?;
        let (d4, v4, _) = self.field(st.chart, st.u + d3 * h, st.s)?;
        let u = st.u + (d1 + d2 * 2.0 + d3 * 2.0 + d4) * (h / 6.0);
        let length = st.length + (v1 + 2.0 * v2 + 2.0 * v3 + v4) * (h / 6.0);
        let (_, _, s) = self.field(st.chart, u, st.s)?;
        if !u.is_finite() || !length.is_finite() {
            return None;
        }
        Some(State { chart: st.chart, u, s, length })
    }

    /// `int_{u0}^{u1} sqrt(R)` along a straight segment starting at a zero
    /// `u0`, with `u = u0 + (u1 - u0) v^2` to absorb the square-root behaviour.
    pub(crate) fn integral_from_zero(&self, chart: Chart, u0: Complex64, u1: Complex64) -> Complex64 {
        let delta = u1 - u0;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut prev: Option<Complex64> = None;
        for &(v, w) in gauss_legendre() {
            let r = self.eval(chart, u0 + delta * (v * v));
            let s = match prev {
                None => r.sqrt(),
                Some(p) => continue_sqrt(r, p).0,
            };
            prev = Some(s);
            sum += s * delta * (2.0 * v * w);
        }
        sum
    }

    fn switch_chart(&self, st: &mut State) -> bool {
        match st.chart {
            Chart::Finite if st.u.norm() > self.chart_radius => {
                let z = st.u;
                st.chart = Chart::Infinite;
                st.s = -(z * z) * st.s;
                st.u = z.inv();
                true
            }
            Chart::Infinite if st.u.norm() > 2.0 / self.chart_radius => {
                let w = st.u;
                st.chart = Chart::Finite;
                st.s = -(w * w) * st.s;
                st.u = w.inv();
                true
            }
            _ => false,
        }
    }

    /// Follow the trajectory from `start`, ignoring `own_zero` until the trace
    /// has left its neighbourhood.
    fn run(&self, start: State, own_zero: Option<usize>) -> Trajectory {
        let tol = self.params.tol;
        let mut st = start;
        let mut points = vec![to_z(st.chart, st.u)];
        let mut h = 0.01 * self.dist_near(st.chart, st.u);
        let mut own_zone = own_zero;
        // (pole, radius at last step, entry angle, length at entry)
        let mut candidate: Option<(usize, f64, f64, f64)> = None;
        let mut steps = 0;
        let finish = |points: Vec<Complex64>, length: f64, terminal: Terminal, steps: usize| Trajectory {
            theta: self.theta,
            points,
            length,
            terminal,
            steps,
        };
        while steps < self.params.max_steps {
            let near = self.dist_near(st.chart, st.u);
            h = h.min(0.2 * near);
            let hmin = 1e-14 * near.max(1e-300);
            // adaptive step
            let (next, used) = loop {
                if h < hmin {
                    return finish(points, st.length, Terminal::Escaped, steps);
                }
                let full = self.rk4(&st, h);
                let half = self.rk4(&st, h / 2.0).and_then(|m| self.rk4(&m, h / 2.0));
                let (Some(full), Some(half)) = (full, half) else {
                    h /= 2.0;
                    continue;
                };
                let du = (full.u - half.u).norm() / near;
                let dl = (full.length - half.length).abs() / (half.length - st.length).abs().max(1e-300);
                let err = du.max(dl);
                let factor = if err == 0.0 { 4.0 } else { 0.9 * (tol / err).powf(0.2) };
                if err <= tol {
                    let used = h;
                    h *= factor.min(4.0);
                    break (half, used);
                }
                h *= factor.clamp(0.1, 0.9);
            };
            let prev = st;
            st = next;
            steps += 1;

            // zeroes
            for s in &self.local[chart_index(st.chart)] {
                let Kind::Zero(zi) = s.kind else { continue };
                let r = (st.u - s.u).norm();
                let zone = 0.2 * s.scale;
                if own_zone == Some(zi) {
                    if r > zone {
                        own_zone = None;
                    }
                    continue;
                }
                if r < zone {
                    let d = self.integral_from_zero(st.chart, s.u, st.u).norm();
                    if d < self.params.zero_tol {
                        points.push(to_z(st.chart, s.u));
                        return finish(points, st.length + d, Terminal::ZeroHit { zero: zi, distance: d }, steps);
                    }
                }
            }

            // poles
            if let Some((pi, last_r, angle, len)) = candidate {
                let Some(p) = self.sing_in(st.chart, |k| matches!(k, Kind::Pole(j) if j == pi)) else {
                    candidate = None;
                    continue;
                };
                let r = (st.u - p.u).norm();
                if r >= last_r {
                    candidate = None;
                } else {
                    candidate = Some((pi, r, angle, len));
                    if r < 0.1 * self.params.capture * p.scale {
                        points.push(to_z(st.chart, st.u));
                        let direction = self.direction_of(pi, (st.u - p.u).arg());
                        return finish(
                            points,
                            len,
                            Terminal::PoleCapture { pole: pi, direction, entry_angle: angle },
                            steps,
                        );
                    }
                }
            }
            if candidate.is_none() {
                for s in &self.local[chart_index(st.chart)] {
                    let Kind::Pole(pi) = s.kind else { continue };
                    let rho = self.params.capture * s.scale;
                    let (r_prev, r) = ((prev.u - s.u).norm(), (st.u - s.u).norm());
                    if prev.chart == st.chart && r_prev >= rho && r < rho {
                        let entry = self.locate_entry(&prev, used, s.u, rho).unwrap_or(st);
                        candidate = Some((pi, r, angle_0_2pi((entry.u - s.u).arg()), entry.length));
                        break;
                    }
                }
            }

            points.push(to_z(st.chart, st.u));
            if self.switch_chart(&mut st) {
                h = 0.01 * self.dist_near(st.chart, st.u);
                candidate = None;
            }
        }
        finish(points, st.length, Terminal::StepLimit, steps)
    }

    /// Point where a step from `from` of length at most `h` crosses the circle
    /// of radius `rho` about `center`, by bisection on the step length.
    fn locate_entry(&self, from: &State, h: f64, center: Complex64, rho: f64) -> Option<State> {
        let (mut lo, mut hi) = (0.0, h);
        let mut best = None;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let s = self.rk4(from, mid)?;
            if (s.u - center).norm() < rho {
                hi = mid;
                best = Some(s);
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 * h {
                break;
            }
        }
        best.or_else(|| self.rk4(from, hi))
    }

    fn direction_of(&self, pole: usize, angle: f64) -> Option<usize> {
        let dirs = self.pole_directions(pole);
        let circ = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d)
        };
        (0..dirs.len()).min_by(|&i, &j| circ(dirs[i], angle).total_cmp(&circ(dirs[j], angle)))
    }

    pub(crate) fn trace_from(&self, z0: Complex64) -> Result<Trajectory, WkbError> {
        let chart = if z0.norm() > self.chart_radius { Chart::Infinite } else { Chart::Finite };
        let u = match chart {
            Chart::Finite => z0,
            Chart::Infinite => z0.inv(),
        };
        for s in &self.local[chart_index(chart)] {
            if (u - s.u).norm() <= 1e-9 * s.u.norm().max(1.0) {
                return Err(WkbError::StartAtSingularity);
            }
        }
        let r = self.eval(chart, u);
        if !r.is_finite() || r.norm() == 0.0 {
            return Err(WkbError::StartAtSingularity);
        }
        Ok(self.run(State { chart, u, s: r.sqrt(), length: 0.0 }, None))
    }

    /// The three separatrices at zero `zi`.
    pub(crate) fn launch(&self, zi: usize) -> Vec<Separatrix> {
        let zero = self.cls.zeros[zi];
        let (chart, u0) = zero.point.chart();
        let scale = self.sing_in(chart, |k| matches!(k, Kind::Zero(j) if j == zi)).map_or(1.0, |s| s.scale);
        let delta = 1e-3 * scale;
        let model: Vec<f64> =
            (0..3).map(|k| angle_0_2pi((2.0 * self.theta - zero.leading.arg() + 2.0 * PI * k as f64) / 3.0)).collect();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| model[a].total_cmp(&model[b]));
        let rot_inv = self.rot.conj();
        let horizontal = |alpha: f64| -> Complex64 {
            let i = self.integral_from_zero(chart, u0, u0 + Complex64::from_polar(delta, alpha)) * rot_inv;
            if i.re < 0.0 {
                -i
            } else {
                i
            }
        };
        std::thread::scope(|scope| {
            let handles: Vec<_> = order
                .iter()
                .enumerate()
                .map(|(index, &k)| {
                    let launch_angle = model[k];
                    scope.spawn(move || {
                        let mut alpha = launch_angle;
                        for _ in 0..8 {
                            let g = horizontal(alpha);
                            if g.im.abs() <= 1e-15 * g.norm() {
                                break;
                            }
                            let eps = 1e-7;
                            let dg = (horizontal(alpha + eps).im - horizontal(alpha - eps).im) / (2.0 * eps);
                            if dg == 0.0 || !dg.is_finite() {
                                break;
                            }
                            alpha -= g.im / dg;
                        }
                        let dir = Complex64::from_polar(1.0, alpha);
                        let u = u0 + dir * delta;
                        let r = self.eval(chart, u);
                        let mut s = r.sqrt();
                        if (rot_inv * s * dir).re < 0.0 {
                            s = -s;
                        }
                        let start = State { chart, u, s, length: horizontal(alpha).norm() };
                        let mut trajectory = self.run(start, Some(zi));
                        trajectory.points.insert(0, to_z(chart, u0));
                        Separatrix { zero: zi, index, launch_angle, trajectory }
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("separatrix trace panicked")).collect()
        })
    }

    pub(crate) fn all_separatrices(&self) -> Vec<Separatrix> {
        (0..self.cls.zeros.len()).flat_map(|z| self.launch(z)).collect()
    }
}

/// Trace the horizontal trajectory of `phi` at phase `theta` through `z0`,
/// oriented so that `e^{-i theta} sqrt(R(z0)) dz > 0` for the principal root.
pub fn trace_trajectory(
    phi: &QuadraticDifferential,
    z0: Complex64,
    theta: f64,
    params: TraceParams,
) -> Result<Trajectory, WkbError> {
    Tracer::new(phi, theta, params)?.trace_from(z0)
}

/// All separatrices at phase `theta`, three per zero in counterclockwise order
/// of launch angle.
pub fn separatrices(phi: &QuadraticDifferential, theta: f64, params: TraceParams) -> Result<Vec<Separatrix>, WkbError> {
    Ok(Tracer::new(phi, theta, params)?.all_separatrices())
}

pub(crate) fn saddles_from(seps: &[Separatrix], theta: f64) -> Vec<SaddleConnection> {
    let mut out: Vec<SaddleConnection> = Vec::new();
    for s in seps {
        if let Terminal::ZeroHit { zero, .. } = s.trajectory.terminal {
            let (from, to, phase) =
                if s.zero <= zero { (s.zero, zero, theta / PI) } else { (zero, s.zero, theta / PI + 1.0) };
            let phase = phase.rem_euclid(2.0);
            let length = s.trajectory.length;
            let dup = out
                .iter()
                .any(|c| c.from == from && c.to == to && (c.length - length).abs() <= 1e-6 * length.max(1e-12));
            if !dup {
                out.push(SaddleConnection { from, to, length, phase });
            }
        }
    }
    out
}

/// Separatrices that end in a zero, each connection reported once with
/// `from <= to`.
pub fn detect_saddle_connections(
    phi: &QuadraticDifferential,
    theta: f64,
    params: TraceParams,
) -> Result<Vec<SaddleConnection>, WkbError> {
    Ok(saddles_from(&separatrices(phi, theta, params)?, theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_trajectory_is_a_horizontal_line() {
        let phi = QuadraticDifferential::from_real(&[1.0], &[1.0]).unwrap();
        let t = trace_trajectory(&phi, c(0.0, 1.0), 0.0, TraceParams::default()).unwrap();
        assert!(matches!(t.terminal, Terminal::PoleCapture { pole: 0, .. }), "{:?}", t.terminal);
        assert!(t.points.iter().all(|z| (z.im - 1.0).abs() < 1e-9));
        assert!(t.points.last().unwrap().re > 10.0);
    }

    #[test]
    fn circles_around_a_double_pole_with_negative_residue() {
        let phi = QuadraticDifferential::from_real(&[-1.0], &[0.0, 0.0, 1.0]).unwrap();
        let params = TraceParams { max_steps: 3000, ..TraceParams::default() };
        let t = trace_trajectory(&phi, c(1.0, 0.0), 0.0, params).unwrap();
        assert_eq!(t.terminal, Terminal::StepLimit);
        assert!(t.points.iter().all(|z| (z.norm() - 1.0).abs() < 1e-6));
    }

    #[test]
    fn logarithmic_spirals_match_the_local_model() {
        let m = c(2.0, 1.0);
        let phi = QuadraticDifferential::new(
            super::super::Poly::constant(m),
            super::super::Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        let theta = 0.3;
        let z0 = c(0.7, 0.2);
        let t = trace_trajectory(&phi, z0, theta, TraceParams::default()).unwrap();
        // along the flow log(z/z0) is a real multiple of e^{i theta} / sqrt(m)
        let dir = Complex64::from_polar(1.0, theta) / m.sqrt();
        let mut winding = 0.0;
        let mut prev = z0;
        for &z in &t.points {
            winding += (z / prev).arg();
            prev = z;
            let l = Complex64::new((z / z0).norm().ln(), winding);
            assert!((l / dir).im.abs() < 1e-6, "{z}");
        }
        assert!(matches!(t.terminal, Terminal::PoleCapture { .. }));
    }

    #[test]
    fn launch_angles_of_a_simple_zero() {
        let phi = QuadraticDifferential::from_real(&[0.0, 1.0], &[1.0]).unwrap();
        let seps = separatrices(&phi, 0.0, TraceParams::default()).unwrap();
        assert_eq!(seps.len(), 3);
        for (k, s) in seps.iter().enumerate() {
            assert!((s.launch_angle - 2.0 * PI * k as f64 / 3.0).abs() < 1e-8);
            assert!(matches!(s.trajectory.terminal, Terminal::PoleCapture { pole: 0, direction: Some(_), .. }));
        }
        let dirs: Vec<_> = seps
            .iter()
            .map(|s| match s.trajectory.terminal {
                Terminal::PoleCapture { direction, .. } => direction.unwrap(),
                _ => unreachable!(),
            })
            .collect();
        let mut sorted = dirs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 3);
    }

    #[test]
    fn saddle_connection_on_the_real_segment() {
        // (z^2 - 1) dz^2: the segment [-1, 1] is horizontal at phase pi/2 only
        let phi = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap();
        let at_half_pi = detect_saddle_connections(&phi, PI / 2.0, TraceParams::default()).unwrap();
        assert_eq!(at_half_pi.len(), 1);
        assert_eq!((at_half_pi[0].from, at_half_pi[0].to), (0, 1));
        assert!((at_half_pi[0].length - PI / 2.0).abs() < 1e-5);
        assert!(detect_saddle_connections(&phi, 0.0, TraceParams::default()).unwrap().is_empty());
    }

    #[test]
    fn wall_at_phase_zero() {
        let phi = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap();
        let a = detect_saddle_connections(&phi, 0.0, TraceParams::default()).unwrap();
        let b = detect_saddle_connections(&phi, 0.1, TraceParams::default()).unwrap();
        assert!(!a.is_empty());
        assert!(b.is_empty());
        let seps = separatrices(&phi, 0.1, TraceParams::default()).unwrap();
        assert_eq!(seps.len(), 6);
    }

    #[test]
    fn start_at_singularity_is_rejected() {
        let phi = QuadraticDifferential::from_real(&[0.0, 1.0], &[1.0]).unwrap();
        assert_eq!(trace_trajectory(&phi, c(0.0, 0.0), 0.0, TraceParams::default()), Err(WkbError::StartAtSingularity));
    }

    #[test]
    fn stable_under_tolerance_halving() {
        let phi = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap();
        let p = TraceParams::default();
        let a = trace_trajectory(&phi, c(2.0, 0.0), 0.0, p).unwrap();
        let b = trace_trajectory(&phi, c(2.0, 0.0), 0.0, p.with_tol(p.tol / 2.0)).unwrap();
        assert_eq!(std::mem::discriminant(&a.terminal), std::mem::discriminant(&b.terminal));
        assert!(matches!(a.terminal, Terminal::PoleCapture { pole: 1, .. }));
        assert!((a.length - b.length).abs() <= 1e-4 * a.length);
    }
}
