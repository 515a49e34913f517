//! The cyclic minimal A∞ category of a quiver with potential.
//!
//! Objects are the vertices. `Hom(i, j)` has a unit (degree 0) when `i = j`,
//! the arrows `i -> j` (degree 1), formal duals of the arrows `j -> i`
//! (degree 2) and a counit (degree 3) when `i = j`. Products are written
//! `m_n(x_n, ..., x_1)` with `x_1` applied first.
//!
//! Convention: `m_2(x_2, x_1) = (-1)^{|x_1|} x_2 x_1` for the graded algebra with
//! `e` as unit, `a . ā = ā . a = ω` and, for arrows, `f_2 . f_1 = sum_a c(f_1 f_2 a) ā`.
//! For `n >= 3`, `m_n(f_n, ..., f_1) = -sum_a c(f_1 ... f_n a) ā` on arrows and
//! zero otherwise. Here `c` is the cyclic tensor of the potential evaluated on a
//! linear word. The relations use the sign `(-1)^{sum_{k <= i} (|x_k| - 1)}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::linalg::rank_integer;
use crate::novikov::NovikovScalar;
use crate::quiver::{Quiver, QuiverWithPotential};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AinftyError {
    #[error("potential is not reduced (it has words of length < 3)")]
    NotReduced,
    #[error("pairing between Hom({0},{1}) and Hom({2},{3}) is not defined")]
    ObjectMismatch(usize, usize, usize, usize),
    #[error("rescaling by zero")]
    ZeroScalar,
}

/// Basis element of a Hom space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Basis {
    Unit(usize),
    Arrow(usize),
    Dual(usize),
    Counit(usize),
}

impl Basis {
    pub fn degree(self) -> i32 {
        match self {
            Basis::Unit(_) => 0,
            Basis::Arrow(_) => 1,
            Basis::Dual(_) => 2,
            Basis::Counit(_) => 3,
        }
    }
}

/// Sign convention for products and relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// Signs as documented at module level.
    Standard,
    /// Mirror image: `m_2(x_2, x_1) = (-1)^{|x_2|} x_2 x_1` and relation signs
    /// counted from the last input.
    Mirrored,
}

pub type Combination = Vec<(Basis, NovikovScalar)>;

/// Graded dimensions `(deg 0, deg 1, deg 2, deg 3)` of `Hom(i, j)`.
pub fn graded_hom_dims(q: &Quiver, i: usize, j: usize) -> [usize; 4] {
    let d = usize::from(i == j);
    let fwd = q.arrows.iter().filter(|a| a.src == i && a.tgt == j).count();
    let back = q.arrows.iter().filter(|a| a.src == j && a.tgt == i).count();
    [d, fwd, back, d]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicAInfinity {
    pub quiver: Quiver,
    /// Word length to cyclic tensor on linear arrow words; every rotation of a
    /// stored word is present, so a word fixed by `s` rotations carries `s`
    /// times its coefficient.
    pub tensors: BTreeMap<usize, HashMap<Vec<usize>, NovikovScalar>>,
    pub order: usize,
    pub convention: Convention,
    /// Prefix `f_1 ... f_n` to the closing arrows `a` with `c(f_1 ... f_n a)`.
    closing: HashMap<Vec<usize>, Vec<(usize, NovikovScalar)>>,
}

fn build_closing(
    tensors: &BTreeMap<usize, HashMap<Vec<usize>, NovikovScalar>>,
) -> HashMap<Vec<usize>, Vec<(usize, NovikovScalar)>> {
    let mut closing: HashMap<Vec<usize>, Vec<(usize, NovikovScalar)>> = HashMap::new();
    for t in tensors.values() {
        for (w, c) in t {
            let (last, prefix) = w.split_last().unwrap();
            closing.entry(prefix.to_vec()).or_default().push((*last, c.clone()));
        }
    }
    for v in closing.values_mut() {
        v.sort_by_key(|e| e.0);
    }
    closing
}

/// Cyclic tensors `c_n = W_n` of a reduced potential and the products they
/// determine.
pub fn build_category(qp: &QuiverWithPotential) -> Result<CyclicAInfinity, AinftyError> {
    build_category_with(qp, Convention::Standard)
}

pub fn build_category_with(qp: &QuiverWithPotential, convention: Convention) -> Result<CyclicAInfinity, AinftyError> {
    if !qp.potential.is_reduced() {
        return Err(AinftyError::NotReduced);
    }
    let mut tensors: BTreeMap<usize, HashMap<Vec<usize>, NovikovScalar>> = BTreeMap::new();
    for (w, c) in qp.potential.terms() {
        let n = w.len();
        let t = tensors.entry(n).or_default();
        for r in 0..n {
            let rot: Vec<usize> = (0..n).map(|k| w.arrows()[(r + k) % n]).collect();
            let e = t.entry(rot).or_insert_with(NovikovScalar::zero);
            *e += c;
        }
    }
    let closing = build_closing(&tensors);
    Ok(CyclicAInfinity { quiver: qp.quiver.clone(), tensors, order: qp.order(), convention, closing })
}

impl CyclicAInfinity {
    /// `(source, target)` of a basis element.
    pub fn ends(&self, x: Basis) -> (usize, usize) {
        match x {
            Basis::Unit(v) | Basis::Counit(v) => (v, v),
            Basis::Arrow(a) => (self.quiver.src(a), self.quiver.tgt(a)),
            Basis::Dual(a) => (self.quiver.tgt(a), self.quiver.src(a)),
        }
    }

    /// Basis of `Hom(i, *)`, i.e. elements starting at `i`.
    pub fn basis_from(&self, i: usize) -> Vec<Basis> {
        let mut out = vec![Basis::Unit(i)];
        for (a, arrow) in self.quiver.arrows.iter().enumerate() {
            if arrow.src == i {
                out.push(Basis::Arrow(a));
            }
        }
        for (a, arrow) in self.quiver.arrows.iter().enumerate() {
            if arrow.tgt == i {
                out.push(Basis::Dual(a));
            }
        }
        out.push(Basis::Counit(i));
        out
    }

    /// Cyclic tensor on a linear word of arrows.
    pub fn tensor(&self, word: &[usize]) -> NovikovScalar {
        self.tensors.get(&word.len()).and_then(|t| t.get(word)).cloned().unwrap_or_else(NovikovScalar::zero)
    }

    /// Underlying associative product `x_2 . x_1` (`x_1` first).
    fn compose(&self, x2: Basis, x1: Basis) -> Combination {
        let one = NovikovScalar::one;
        match (x2, x1) {
            (Basis::Unit(_), x) | (x, Basis::Unit(_)) => vec![(x, one())],
            (Basis::Dual(b), Basis::Arrow(a)) if a == b => {
                vec![(Basis::Counit(self.quiver.src(a)), one())]
            }
            (Basis::Arrow(a), Basis::Dual(b)) if a == b => {
                vec![(Basis::Counit(self.quiver.tgt(a)), one())]
            }
            (Basis::Arrow(f2), Basis::Arrow(f1)) => self
                .closing
                .get(&vec![f1, f2])
                .map(|v| v.iter().map(|(a, c)| (Basis::Dual(*a), c.clone())).collect())
                .unwrap_or_default(),
            _ => Vec::new(),
        }
    }

    /// `m_n(x_n, ..., x_1)`; `inputs[0]` is `x_1`.
    pub fn product(&self, inputs: &[Basis]) -> Combination {
        let n = inputs.len();
        if n < 2 {
            return Vec::new();
        }
        if inputs.windows(2).any(|w| self.ends(w[0]).1 != self.ends(w[1]).0) {
            return Vec::new();
        }
        if n == 2 {
            let (x1, x2) = (inputs[0], inputs[1]);
            let sign_deg = match self.convention {
                Convention::Standard => x1.degree(),
                Convention::Mirrored => x2.degree(),
            };
            let prod = self.compose(x2, x1);
            return if sign_deg % 2 == 0 { prod } else { prod.into_iter().map(|(b, c)| (b, -c)).collect() };
        }
        let mut word = Vec::with_capacity(n);
        for &x in inputs {
            match x {
                Basis::Arrow(a) => word.push(a),
                _ => return Vec::new(),
            }
        }
        self.closing.get(&word).map(|v| v.iter().map(|(a, c)| (Basis::Dual(*a), -c)).collect()).unwrap_or_default()
    }

    /// The perfect pairing of `Hom(i, j)` with `Hom(j, i)` into degree 3.
    pub fn pairing(&self, x: Basis, y: Basis) -> Result<NovikovScalar, AinftyError> {
        let (a, b) = self.ends(x);
        let (c, d) = self.ends(y);
        if a != d || b != c {
            return Err(AinftyError::ObjectMismatch(a, b, c, d));
        }
        let one = NovikovScalar::one();
        Ok(match (x, y) {
            (Basis::Unit(_), Basis::Counit(_)) | (Basis::Counit(_), Basis::Unit(_)) => one,
            (Basis::Arrow(p), Basis::Dual(q)) | (Basis::Dual(p), Basis::Arrow(q)) if p == q => one,
            _ => NovikovScalar::zero(),
        })
    }

    /// Largest `n` with a nonzero `m_n`.
    pub fn max_product_arity(&self) -> usize {
        self.tensors.keys().max().map_or(2, |&l| l - 1).max(2)
    }

    /// Nonzero structure constants on arrow inputs as JSON.
    pub fn structure_constants_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        let mut words: Vec<(&Vec<usize>, &NovikovScalar)> = self.tensors.values().flat_map(|t| t.iter()).collect();
        words.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        for (w, c) in words {
            if c.is_zero() {
                continue;
            }
            let (last, prefix) = w.split_last().unwrap();
            entries.push(json!({
                "n": prefix.len(),
                "inputs": prefix,
                "output": {"dual_of": last},
                "coeff": if prefix.len() == 2 { c.to_string() } else { (-c).to_string() },
            }));
        }
        json!({"convention": format!("{:?}", self.convention), "products": entries})
    }
}

/// Multiply every `m_n` by `lambda^{n-2}`, i.e. the tensor on words of length
/// `L` by `lambda^{L-3}`.
pub fn rescale_action(c: &CyclicAInfinity, lambda: &NovikovScalar) -> Result<CyclicAInfinity, AinftyError> {
    if lambda.is_zero() {
        return Err(AinftyError::ZeroScalar);
    }
    let mut out = c.clone();
    for (&len, t) in out.tensors.iter_mut() {
        let f = lambda.pow((len - 3) as u32);
        for v in t.values_mut() {
            *v = &*v * &f;
        }
        t.retain(|_, v| !v.is_zero());
    }
    out.closing = build_closing(&out.tensors);
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct AinftyReport {
    pub n_max: usize,
    pub convention: Convention,
    pub tuples_checked: usize,
    pub relation_failures: Vec<String>,
    pub degree_failures: Vec<String>,
    /// Outcome of the same check under the mirrored convention.
    pub mirrored_pass: Option<bool>,
}

impl AinftyReport {
    pub fn pass(&self) -> bool {
        self.relation_failures.is_empty() && self.degree_failures.is_empty()
    }
}

fn add_comb(target: &mut HashMap<Basis, NovikovScalar>, comb: Combination, sign: bool, scale: &NovikovScalar) {
    for (b, c) in comb {
        let v = &c * scale;
        let v = if sign { -v } else { v };
        let e = target.entry(b).or_insert_with(NovikovScalar::zero);
        *e += &v;
    }
}

fn relation(c: &CyclicAInfinity, xs: &[Basis]) -> HashMap<Basis, NovikovScalar> {
    let n = xs.len();
    let mut out: HashMap<Basis, NovikovScalar> = HashMap::new();
    let one = NovikovScalar::one();
    for j in 2..n {
        for i in 0..=(n - j) {
            let inner = c.product(&xs[i..i + j]);
            if inner.is_empty() {
                continue;
            }
            let dagger: i32 = match c.convention {
                Convention::Standard => xs[..i].iter().map(|x| x.degree() - 1).sum(),
                Convention::Mirrored => xs[i + j..].iter().map(|x| x.degree() - 1).sum(),
            };
            for (b, coeff) in inner {
                let mut outer_inputs = Vec::with_capacity(n - j + 1);
                outer_inputs.extend_from_slice(&xs[..i]);
                outer_inputs.push(b);
                outer_inputs.extend_from_slice(&xs[i + j..]);
                let outer = c.product(&outer_inputs);
                add_comb(&mut out, outer, dagger.rem_euclid(2) == 1, &(&coeff * &one));
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn dfs(
    c: &CyclicAInfinity,
    n: usize,
    xs: &mut Vec<Basis>,
    deg: i32,
    report: &mut AinftyReport,
    basis_from: &[Vec<Basis>],
) {
    if xs.len() == n {
        if deg < n as i32 - 3 {
            return;
        }
        report.tuples_checked += 1;
        let r = relation(c, xs);
        if !r.is_empty() && report.relation_failures.len() < 20 {
            report.relation_failures.push(format!("relation on {xs:?} gives {r:?}"));
        }
        return;
    }
    let remaining = (n - xs.len()) as i32;
    let start = match xs.last() {
        Some(&x) => c.ends(x).1,
        None => unreachable!(),
    };
    // m_k for k >= 3 vanishes unless all inputs are arrows, so for n >= 4 every
    // term of the relation on two or more other inputs is zero
    let others = xs.iter().filter(|x| x.degree() != 1).count();
    for &b in &basis_from[start] {
        let d = deg + b.degree();
        if d > n as i32 || d + 3 * (remaining - 1) < n as i32 - 3 {
            continue;
        }
        if n >= 4 && others + usize::from(b.degree() != 1) > 1 {
            continue;
        }
        xs.push(b);
        dfs(c, n, xs, d, report, basis_from);
        xs.pop();
    }
}

fn check(c: &CyclicAInfinity, n_max: usize) -> AinftyReport {
    let mut report = AinftyReport {
        n_max,
        convention: c.convention,
        tuples_checked: 0,
        relation_failures: Vec::new(),
        degree_failures: Vec::new(),
        mirrored_pass: None,
    };
    // m_n on n arrows must land in degree n + 2 - n = 2
    for t in c.tensors.values() {
        for (w, v) in t {
            if v.is_zero() {
                continue;
            }
            let n = w.len() - 1;
            let out = c.product(&w[..n].iter().map(|&a| Basis::Arrow(a)).collect::<Vec<_>>());
            for (b, _) in out {
                if b.degree() != 2 {
                    report.degree_failures.push(format!("m_{n} on {:?} has output degree {}", &w[..n], b.degree()));
                }
            }
        }
    }
    let basis_from: Vec<Vec<Basis>> = (0..c.quiver.num_vertices).map(|i| c.basis_from(i)).collect();
    let mut roots = Vec::new();
    for n in 3..=n_max {
        for from in &basis_from {
            roots.extend(from.iter().filter(|b| b.degree() <= n as i32).map(|&b| (n, b)));
        }
    }
    // tuples are split by their first input and checked on all cores
    let next = AtomicUsize::new(0);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(roots.len().max(1));
    let partial: Vec<AinftyReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = AinftyReport { tuples_checked: 0, relation_failures: Vec::new(), ..report.clone() };
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        let Some(&(n, b)) = roots.get(k) else { break };
                        let mut xs = vec![b];
                        dfs(c, n, &mut xs, b.degree(), &mut local, &basis_from);
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("relation check panicked")).collect()
    });
    for p in partial {
        report.tuples_checked += p.tuples_checked;
        report.relation_failures.extend(p.relation_failures);
    }
    report.relation_failures.sort();
    report.relation_failures.truncate(20);
    report
}

/// Check the A∞ relations on every composable basis tuple of length
/// `3..=n_max` whose degrees allow a nonzero result, and the degree of every
/// product. A failure is re-run under the mirrored convention.
pub fn verify_ainfty(c: &CyclicAInfinity, n_max: usize) -> AinftyReport {
    let mut report = check(c, n_max);
    if !report.pass() {
        let mut mirrored = c.clone();
        mirrored.convention = match c.convention {
            Convention::Standard => Convention::Mirrored,
            Convention::Mirrored => Convention::Standard,
        };
        report.mirrored_pass = Some(check(&mirrored, n_max).pass());
    }
    report
}

/// `B[i][j] = #(j -> i) - #(i -> j)`.
pub fn euler_form(q: &Quiver) -> Vec<Vec<i64>> {
    let n = q.num_vertices;
    let mut b = vec![vec![0i64; n]; n];
    for a in &q.arrows {
        b[a.tgt][a.src] += 1;
        b[a.src][a.tgt] -= 1;
    }
    b
}

pub fn kernel_rank(b: &[Vec<i64>]) -> usize {
    b.len() - rank_integer(b)
}
