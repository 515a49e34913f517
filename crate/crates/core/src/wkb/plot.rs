//! Plot data and SVG rendering of trajectories.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::{Classification, Point, Trajectory};

fn finite_points(cls: &Classification) -> (Vec<Complex64>, Vec<Complex64>) {
    let pick = |list: &[super::Singularity]| {
        list.iter()
            .filter_map(|s| match s.point {
                Point::Finite(z) => Some(z),
                Point::Infinity => None,
            })
            .collect()
    };
    (pick(&cls.zeros), pick(&cls.poles))
}

/// Polylines and singular points as JSON.
pub fn plot_data(cls: &Classification, trajectories: &[&Trajectory]) -> Value {
    json!({
        "zeros": cls.zeros,
        "poles": cls.poles,
        "trajectories": trajectories,
    })
}

/// SVG picture of the square `[-radius, radius]^2`. Polylines are cut where
/// they leave a disk of ten times that radius.
pub fn svg_plot(cls: &Classification, trajectories: &[&Trajectory], radius: f64) -> String {
    let r = radius;
    let size = 800.0;
    let sx = |z: Complex64| (z.re + r) / (2.0 * r) * size;
    let sy = |z: Complex64| (r - z.im) / (2.0 * r) * size;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(s, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>");
    for t in trajectories {
        let mut runs: Vec<Vec<Complex64>> = vec![Vec::new()];
        for &z in &t.points {
            if z.norm() > 10.0 * r || !z.is_finite() {
                if !runs.last().unwrap().is_empty() {
                    runs.push(Vec::new());
                }
            } else {
                runs.last_mut().unwrap().push(z);
            }
        }
        for run in runs.iter().filter(|run| run.len() > 1) {
            let pts: Vec<String> = run.iter().map(|&z| format!("{:.2},{:.2}", sx(z), sy(z))).collect();
            let _ = writeln!(
                s,
                "<polyline fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1\" points=\"{}\"/>",
                pts.join(" ")
            );
        }
    }
    let (zeros, poles) = finite_points(cls);
    for z in zeros {
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#c0392b\"/>", sx(z), sy(z));
    }
    for p in poles {
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"8\" height=\"8\" fill=\"#27ae60\"/>",
            sx(p) - 4.0,
            sy(p) - 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
