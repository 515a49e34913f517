//! The Ginzburg dg quiver and truncated Jacobian algebras.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{EchelonScalar, SparseEchelon};
use crate::novikov::NovikovScalar;
use crate::quiver::{path_sum_add, PathSum, QuiverWithPotential};

/// Generator of the Ginzburg quiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    /// Original arrow, degree 0.
    Arrow(usize),
    /// Reversed arrow `a*`, degree -1.
    Dual(usize),
    /// Loop `t_i`, degree -2.
    Loop(usize),
}

impl Gen {
    pub fn degree(self) -> i32 {
        match self {
            Gen::Arrow(_) => 0,
            Gen::Dual(_) => -1,
            Gen::Loop(_) => -2,
        }
    }
}

/// Formal sum of Ginzburg paths.
pub type GradedElement = BTreeMap<Vec<Gen>, NovikovScalar>;

fn add_to(target: &mut GradedElement, path: Vec<Gen>, c: &NovikovScalar) {
    if c.is_zero() {
        return;
    }
    let entry = target.entry(path);
    match entry {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c.clone());
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// The Ginzburg quiver of a quiver with potential together with its differential.
#[derive(Clone, Debug)]
pub struct Ginzburg {
    pub qp: QuiverWithPotential,
    d_dual: Vec<GradedElement>,
    d_loop: Vec<GradedElement>,
}

impl Ginzburg {
    pub fn new(qp: &QuiverWithPotential) -> Self {
        let q = &qp.quiver;
        let d_dual = (0..q.arrows.len())
            .map(|a| {
                qp.potential
                    .cyclic_derivative(a)
                    .into_iter()
                    .map(|(p, c)| (p.into_iter().map(Gen::Arrow).collect(), c))
                    .collect()
            })
            .collect();
        let mut d_loop = vec![GradedElement::new(); q.num_vertices];
        let one = NovikovScalar::one();
        for (a, arrow) in q.arrows.iter().enumerate() {
            add_to(&mut d_loop[arrow.src], vec![Gen::Arrow(a), Gen::Dual(a)], &one);
            add_to(&mut d_loop[arrow.tgt], vec![Gen::Dual(a), Gen::Arrow(a)], &-&one);
        }
        Ginzburg { qp: qp.clone(), d_dual, d_loop }
    }

    pub fn src(&self, g: Gen) -> usize {
        let q = &self.qp.quiver;
        match g {
            Gen::Arrow(a) => q.src(a),
            Gen::Dual(a) => q.tgt(a),
            Gen::Loop(i) => i,
        }
    }

    pub fn tgt(&self, g: Gen) -> usize {
        let q = &self.qp.quiver;
        match g {
            Gen::Arrow(a) => q.tgt(a),
            Gen::Dual(a) => q.src(a),
            Gen::Loop(i) => i,
        }
    }

    pub fn generators(&self) -> Vec<Gen> {
        let m = self.qp.quiver.arrows.len();
        (0..m)
            .map(Gen::Arrow)
            .chain((0..m).map(Gen::Dual))
            .chain((0..self.qp.quiver.num_vertices).map(Gen::Loop))
            .collect()
    }

    /// Differential on a generator.
    pub fn d_gen(&self, g: Gen) -> GradedElement {
        match g {
            Gen::Arrow(_) => GradedElement::new(),
            Gen::Dual(a) => self.d_dual[a].clone(),
            Gen::Loop(i) => self.d_loop[i].clone(),
        }
    }

    /// `d(x_1...x_n) = sum_k (-1)^{deg(x_1...x_{k-1})} x_1...d(x_k)...x_n`.
    pub fn apply_d(&self, x: &GradedElement) -> GradedElement {
        let mut out = GradedElement::new();
        for (path, c) in x {
            let mut deg = 0;
            for (k, &g) in path.iter().enumerate() {
                if !matches!(g, Gen::Arrow(_)) {
                    let sign = if deg % 2 == 0 { c.clone() } else { -c };
                    let dg = match g {
                        Gen::Dual(a) => &self.d_dual[a],
                        Gen::Loop(i) => &self.d_loop[i],
                        Gen::Arrow(_) => unreachable!(),
                    };
                    for (p, e) in dg {
                        let mut np = Vec::with_capacity(path.len() + p.len());
                        np.extend_from_slice(&path[..k]);
                        np.extend_from_slice(p);
                        np.extend_from_slice(&path[k + 1..]);
                        add_to(&mut out, np, &(&sign * e));
                    }
                }
                deg += g.degree();
            }
        }
        out
    }

    /// Random composable word of length `1..=max_len`.
    fn random_word(&self, rng: &mut ChaCha8Rng, max_len: usize, gens: &[Gen]) -> Vec<Gen> {
        let len = rng.gen_range(1..=max_len);
        let mut word = vec![gens[rng.gen_range(0..gens.len())]];
        while word.len() < len {
            let v = self.tgt(*word.last().unwrap());
            let next: Vec<Gen> = gens.iter().copied().filter(|&g| self.src(g) == v).collect();
            if next.is_empty() {
                break;
            }
            word.push(next[rng.gen_range(0..next.len())]);
        }
        word
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DSquaredReport {
    pub generators_checked: usize,
    pub words_checked: usize,
    pub failures: Vec<String>,
}

impl DSquaredReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check `d^2 = 0` on every generator and on `samples` random words of length
/// at most `max_len` drawn with the given seed. No truncation is applied.
pub fn check_d_squared(qp: &QuiverWithPotential, samples: usize, max_len: usize, seed: u64) -> DSquaredReport {
    let g = Ginzburg::new(qp);
    let mut failures = Vec::new();
    let gens = g.generators();
    for &x in &gens {
        let dd = g.apply_d(&g.apply_d(&GradedElement::from([(vec![x], NovikovScalar::one())])));
        if !dd.is_empty() {
            failures.push(format!("d^2({x:?}) has {} nonzero terms", dd.len()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words_checked = 0;
    if !gens.is_empty() {
        for _ in 0..samples {
            let w = g.random_word(&mut rng, max_len, &gens);
            let dd = g.apply_d(&g.apply_d(&GradedElement::from([(w.clone(), NovikovScalar::one())])));
            words_checked += 1;
            if !dd.is_empty() {
                failures.push(format!("d^2({w:?}) has {} nonzero terms", dd.len()));
            }
        }
    }
    DSquaredReport { generators_checked: gens.len(), words_checked, failures }
}

/// Dimensions of `J / m^j` for `j = 1..=order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobianDims {
    pub order: usize,
    /// `totals[j - 1] = dim J/m^j`.
    pub totals: Vec<usize>,
    /// `(i, k)` to `dim e_i (J/m^j) e_k` for each `j`.
    pub by_pair: BTreeMap<(usize, usize), Vec<usize>>,
    /// Least `j` with `dim J/m^j = dim J/m^{j-1}`, if any.
    pub stabilized_at: Option<usize>,
}

impl JacobianDims {
    pub fn to_json(&self) -> serde_json::Value {
        let by_pair: serde_json::Map<String, serde_json::Value> =
            self.by_pair.iter().map(|((i, k), v)| (format!("{i}->{k}"), serde_json::json!(v))).collect();
        serde_json::json!({
            "order": self.order,
            "totals": self.totals,
            "by_pair": by_pair,
            "stabilized_at": self.stabilized_at,
        })
    }
}

/// Paths of length `< order` grouped by length; idempotents are the empty
/// paths at each vertex.
struct PathIndex {
    /// `(src, arrows)`; arrows empty for an idempotent.
    paths: Vec<(usize, Vec<usize>)>,
    index: HashMap<(usize, Vec<usize>), usize>,
    /// `len_start[l]` = first column of length `l`.
    len_start: Vec<usize>,
}

fn enumerate_paths(qp: &QuiverWithPotential, order: usize) -> PathIndex {
    let q = &qp.quiver;
    let mut out_arrows = vec![Vec::new(); q.num_vertices];
    for (a, arrow) in q.arrows.iter().enumerate() {
        out_arrows[arrow.src].push(a);
    }
    let mut paths: Vec<(usize, Vec<usize>)> = (0..q.num_vertices).map(|v| (v, Vec::new())).collect();
    let mut len_start = vec![0];
    let mut layer_start = 0;
    for _ in 1..order {
        len_start.push(paths.len());
        let layer_end = paths.len();
        for i in layer_start..layer_end {
            let (s, p) = paths[i].clone();
            let end = p.last().map_or(s, |&a| q.tgt(a));
            for &a in &out_arrows[end] {
                let mut np = p.clone();
                np.push(a);
                paths.push((s, np));
            }
        }
        layer_start = layer_end;
    }
    len_start.push(paths.len());
    let index = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    PathIndex { paths, index, len_start }
}

fn relation_rows(qp: &QuiverWithPotential, idx: &PathIndex, order: usize) -> Vec<Vec<(usize, NovikovScalar)>> {
    let q = &qp.quiver;
    let mut rows = Vec::new();
    let ends = |p: &(usize, Vec<usize>)| p.1.last().map_or(p.0, |&a| q.tgt(a));
    for a in 0..q.arrows.len() {
        let da: PathSum = qp.potential.cyclic_derivative(a).into_iter().filter(|(p, _)| p.len() < order).collect();
        let Some(min_len) = da.keys().map(|p| p.len()).min() else {
            continue;
        };
        let (from, to) = (q.tgt(a), q.src(a));
        let lefts: Vec<&(usize, Vec<usize>)> =
            idx.paths.iter().filter(|p| ends(p) == from && p.1.len() + min_len < order).collect();
        let rights: Vec<&(usize, Vec<usize>)> =
            idx.paths.iter().filter(|p| p.0 == to && p.1.len() + min_len < order).collect();
        for u in &lefts {
            for v in &rights {
                if u.1.len() + v.1.len() + min_len >= order {
                    continue;
                }
                let mut row = PathSum::new();
                for (p, c) in &da {
                    if u.1.len() + p.len() + v.1.len() >= order {
                        continue;
                    }
                    let mut w = u.1.clone();
                    w.extend_from_slice(p);
                    w.extend_from_slice(&v.1);
                    path_sum_add(&mut row, w, c);
                }
                let start = u.0;
                let r: Vec<(usize, NovikovScalar)> =
                    row.into_iter().map(|(w, c)| (idx.index[&(start, w)], c)).collect();
                if !r.is_empty() {
                    rows.push(r);
                }
            }
        }
    }
    rows
}

fn eliminate<S: EchelonScalar>(rows: Vec<Vec<(usize, S)>>) -> Vec<usize> {
    let mut ech = SparseEchelon::new();
    for r in rows {
        ech.insert(r);
    }
    ech.pivot_columns()
}

/// Dimensions of the truncated Jacobian algebra, by exact elimination on the
/// span of paths of length `< order` modulo the two-sided ideal of cyclic
/// derivatives.
pub fn jacobian_dims(qp: &QuiverWithPotential, order: usize) -> JacobianDims {
    let q = &qp.quiver;
    let idx = enumerate_paths(qp, order);
    let rows = relation_rows(qp, &idx, order);
    let rational = rows.iter().flatten().all(|(_, c)| c.is_constant() && c.constant_coefficient().is_real());
    let pivots = if rational {
        eliminate::<BigRational>(
            rows.into_iter().map(|r| r.into_iter().map(|(i, c)| (i, c.constant_coefficient().re)).collect()).collect(),
        )
    } else {
        eliminate::<NovikovScalar>(rows)
    };
    let endpoint = |i: usize| {
        let (s, p) = &idx.paths[i];
        (*s, p.last().map_or(*s, |&a| q.tgt(a)))
    };
    let mut totals = Vec::with_capacity(order);
    let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for i in 0..q.num_vertices {
        for k in 0..q.num_vertices {
            by_pair.insert((i, k), vec![0; order]);
        }
    }
    for j in 1..=order {
        let cols = idx.len_start[j.min(idx.len_start.len() - 1)];
        let rank = pivots.iter().filter(|&&c| c < cols).count();
        totals.push(cols - rank);
    }
    for c in 0..idx.paths.len() {
        let len = idx.paths[c].1.len();
        let e = endpoint(c);
        for j in (len + 1)..=order {
            by_pair.get_mut(&e).unwrap()[j - 1] += 1;
        }
    }
    for &c in &pivots {
        let len = idx.paths[c].1.len();
        let e = endpoint(c);
        for j in (len + 1)..=order {
            by_pair.get_mut(&e).unwrap()[j - 1] -= 1;
        }
    }
    by_pair.retain(|_, v| v.iter().any(|&x| x > 0));
    let stabilized_at = (2..=order).find(|&j| totals[j - 1] == totals[j - 2]);
    JacobianDims { order, totals, by_pair, stabilized_at }
}
