//! Complex polynomials and their roots.

use num_complex::Complex64;

/// Polynomial with coefficients in ascending order of degree. The zero
/// polynomial has no coefficients; otherwise the last coefficient is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// `lead * prod (z - r)`.
    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Self {
        let mut p = Poly::constant(lead);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has degree 0 here.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `(p(z), p'(z))` by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect())
    }

    /// `k`-th derivative divided by `k!`, i.e. the `k`-th Taylor coefficient map.
    pub fn taylor(&self, k: usize) -> Poly {
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(k));
        for i in k..self.coeffs.len() {
            let mut binom = 1.0;
            for j in 0..k {
                binom *= (i - j) as f64 / (j + 1) as f64;
            }
            out.push(self.coeffs[i] * binom);
        }
        Poly::new(out)
    }

    /// `z^deg p(1/z)`.
    pub fn reversed(&self) -> Poly {
        Poly::new(self.coeffs.iter().rev().copied().collect())
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(Vec::new());
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `p(a z + b)`.
    pub fn compose_affine(&self, a: Complex64, b: Complex64) -> Poly {
        let lin = Poly::new(vec![b, a]);
        let mut out = Poly::new(Vec::new());
        for &c in self.coeffs.iter().rev() {
            out = out.mul(&lin);
            let mut coeffs = out.coeffs;
            if coeffs.is_empty() {
                coeffs.push(c);
            } else {
                coeffs[0] += c;
            }
            out = Poly::new(coeffs);
        }
        out
    }

    /// All complex roots with multiplicity by the Aberth-Ehrlich iteration.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let monic = self.scale(lead.inv());
        // trailing zero coefficients are exact roots at the origin
        let zeros = monic.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
        let reduced = Poly::new(monic.coeffs[zeros..].to_vec());
        let m = reduced.degree();
        let mut out = vec![Complex64::new(0.0, 0.0); zeros];
        if m == 0 {
            return out;
        }
        let c = reduced.coeffs();
        let radius = (0..m).map(|i| c[i].norm().powf(1.0 / (m - i) as f64)).fold(0.0, f64::max).max(1e-300);
        let mut z: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / m as f64 + 0.4))
            .collect();
        for _ in 0..2000 {
            let mut max_step: f64 = 0.0;
            for k in 0..m {
                let (p, dp) = reduced.eval_with_derivative(z[k]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let sum: Complex64 = (0..m).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
                let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
                if w.is_finite() {
                    z[k] -= w;
                    max_step = max_step.max(w.norm() / z[k].norm().max(1.0));
                }
            }
            if max_step < 1e-16 {
                break;
            }
        }
        out.extend(z);
        out
    }
}

/// A root together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

/// Roots grouped into clusters: two roots closer than `radius * max(1, |z|)`
/// are taken to be one multiple root. Each cluster center is polished by
/// Newton's method on the derivative of order `multiplicity - 1`.
pub fn cluster_roots(p: &Poly, radius: f64) -> Vec<RootCluster> {
    let roots = p.roots();
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() < radius * roots[i].norm().max(1.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Complex64>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(roots[i]);
    }
    let mut out: Vec<RootCluster> = groups
        .into_values()
        .map(|g| {
            let k = g.len();
            let mean = g.iter().sum::<Complex64>() / k as f64;
            let d = p.taylor(k - 1);
            let mut z = mean;
            for _ in 0..30 {
                let (v, dv) = d.eval_with_derivative(z);
                let step = v / dv;
                if !step.is_finite() {
                    break;
                }
                z -= step;
                if step.norm() < 1e-17 * z.norm().max(1.0) {
                    break;
                }
            }
            let center = if (z - mean).norm() < radius * mean.norm().max(1.0) { z } else { mean };
            RootCluster { center, multiplicity: k }
        })
        .collect();
    out.sort_by(|a, b| a.center.re.total_cmp(&b.center.re).then(a.center.im.total_cmp(&b.center.im)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn simple_roots() {
        let p = Poly::from_roots(c(2.0, 1.0), &[c(1.0, 0.0), c(-1.0, 0.5), c(0.0, 3.0)]);
        let cl = cluster_roots(&p, 1e-5);
        assert_eq!(cl.len(), 3);
        assert!(cl.iter().all(|r| r.multiplicity == 1));
        assert!((cl[0].center - c(-1.0, 0.5)).norm() < 1e-12);
        assert!((cl[2].center - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn multiple_roots_are_clustered() {
        let p = Poly::from_roots(c(1.0, 0.0), &[c(0.5, 0.5), c(0.5, 0.5), c(-2.0, 0.0), c(0.5, 0.5)]);
        let cl = cluster_roots(&p, 1e-5);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[1].multiplicity, 3);
        assert!((cl[1].center - c(0.5, 0.5)).norm() < 1e-10);
        let z2 = Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(cluster_roots(&z2, 1e-5), vec![RootCluster { center: c(0.0, 0.0), multiplicity: 2 }]);
    }

    #[test]
    fn affine_composition_and_taylor() {
        let p = Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let q = p.compose_affine(c(2.0, 0.0), c(1.0, 0.0));
        assert_eq!(q.coeffs(), &[c(2.0, 0.0), c(4.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(p.taylor(2).coeffs(), &[c(1.0, 0.0)]);
        assert_eq!(p.reversed().coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }
}
