//! Multi-parameter maximal truncations over chains of nested sets.
//!
//! The domain 𝕐 = 𝕐₁×⋯×𝕐_d is flattened row-major (last factor fastest).
//! Chain positions and split indices are 0-based.

use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{
    holder_upper_bound, norm_exact_endpoint, norm_lower_bound_ascent, p_mass, pair, weighted_norm, AscentConfig,
    Exponent, Kernel, Signal, SublinearOperator, WeightedSpace,
};

/// Relative tolerance for inequalities recorded in certificates.
pub const CERTIFICATE_RTOL: f64 = 1e-9;

/// A nested increasing family of subsets of one factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    axis_size: usize,
    sets: Vec<Vec<bool>>,
}

impl Chain {
    /// Builds a chain from index sets; each set must contain the previous one.
    pub fn new(axis_size: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(sets.len());
        for set in sets {
            let mut m = vec![false; axis_size];
            for &a in set {
                if a >= axis_size {
                    return Err(Error::arg(format!("atom {a} outside factor of size {axis_size}")));
                }
                m[a] = true;
            }
            masks.push(m);
        }
        Self::from_masks(axis_size, masks)
    }

    pub fn from_masks(axis_size: usize, sets: Vec<Vec<bool>>) -> Result<Self> {
        if sets.iter().any(|m| m.len() != axis_size) {
            return Err(Error::arg("chain mask length differs from factor size"));
        }
        for w in sets.windows(2) {
            if w[0].iter().zip(&w[1]).any(|(a, b)| *a && !*b) {
                return Err(Error::arg("chain sets are not nested increasing"));
            }
        }
        Ok(Self { axis_size, sets })
    }

    /// The chain of initial segments {0..k} for each k in `lens`.
    pub fn initial_segments(axis_size: usize, lens: &[usize]) -> Result<Self> {
        let sets: Vec<Vec<usize>> = lens.iter().map(|&k| (0..k).collect()).collect();
        Self::new(axis_size, &sets)
    }

    pub fn axis_size(&self) -> usize {
        self.axis_size
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, i: usize) -> &[bool] {
        &self.sets[i]
    }

    /// A copy with one more set appended.
    pub fn extended(&self, superset: Vec<bool>) -> Result<Self> {
        let mut sets = self.sets.clone();
        sets.push(superset);
        Self::from_masks(self.axis_size, sets)
    }
}

/// d chains, chain j living on factor j of the product domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSystem {
    chains: Vec<Chain>,
}

impl ChainSystem {
    pub fn new(chains: Vec<Chain>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::arg("chain system needs at least one chain"));
        }
        if chains.iter().any(|c| c.axis_size == 0) {
            return Err(Error::arg("factor sizes must be positive"));
        }
        Ok(Self { chains })
    }

    pub fn d(&self) -> usize {
        self.chains.len()
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn factor_sizes(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.axis_size).collect()
    }

    pub fn domain_size(&self) -> usize {
        self.chains.iter().map(|c| c.axis_size).product()
    }

    pub fn chain_lengths(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.len()).collect()
    }

    /// Number of index tuples, Π |I_j|.
    pub fn tuple_count(&self) -> usize {
        self.chains.iter().map(|c| c.len()).product()
    }

    /// Chain sets lifted to cylinder masks on the flattened domain.
    pub fn cylinder_masks(&self) -> MaskSystem {
        let sizes = self.factor_sizes();
        let n = self.domain_size();
        let mut stride = vec![1usize; sizes.len()];
        for j in (0..sizes.len().saturating_sub(1)).rev() {
            stride[j] = stride[j + 1] * sizes[j + 1];
        }
        let axes = self
            .chains
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.sets
                    .iter()
                    .map(|set| (0..n).map(|y| set[(y / stride[j]) % sizes[j]]).collect())
                    .collect()
            })
            .collect();
        MaskSystem { axes }
    }

    fn check_domain(&self, k: &Kernel) -> Result<()> {
        if self.domain_size() != k.cols() {
            return Err(Error::DimensionMismatch { expected: k.cols(), found: self.domain_size() });
        }
        Ok(())
    }
}

/// Increasing set families given directly as masks on the whole domain.
///
/// This is the form the induction works with, since set differences of
/// cylinders are no longer cylinders.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSystem {
    pub axes: Vec<Vec<Vec<bool>>>,
}

impl MaskSystem {
    pub fn tuple_count(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    fn lengths(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    /// Intersection mask of the tuple with row-major index `t`.
    fn tuple_mask(&self, t: usize, n: usize) -> Vec<bool> {
        let idx = unravel(t, &self.lengths());
        let mut m = vec![true; n];
        for (axis, &i) in self.axes.iter().zip(&idx) {
            for (a, b) in m.iter_mut().zip(&axis[i]) {
                *a &= *b;
            }
        }
        m
    }
}

fn unravel(mut t: usize, lens: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; lens.len()];
    for j in (0..lens.len()).rev() {
        idx[j] = t % lens[j];
        t /= lens[j];
    }
    idx
}

/// A position (i₁,…,i_d) in the chains.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TruncationIndex(pub Vec<usize>);

/// Values of T⋆f with one maximizing tuple per output atom.
///
/// `argmax` is `None` when there are no tuples at all.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalTruncation {
    pub values: Vec<f64>,
    pub argmax: Vec<Option<TruncationIndex>>,
}

impl MaximalTruncation {
    pub fn to_signal(&self, space: Arc<WeightedSpace>) -> Result<Signal> {
        Signal::from_real(space, &self.values)
    }
}

/// (1 − 2^{1/q − 1/p})^{−d}.
pub fn ck_constant(p: Exponent, q: Exponent, d: usize) -> Result<f64> {
    if p >= q {
        return Err(Error::pre(format!("constant needs p < q, got p={p}, q={q}")));
    }
    let base = 1.0 - (q.reciprocal() - p.reciprocal()).exp2();
    Ok(base.powi(-(d as i32)))
}

/// Π (⌈log₂ n_j⌉ + 1).
pub fn rm_constant(sizes: &[usize]) -> Result<f64> {
    if sizes.is_empty() {
        return Err(Error::arg("empty size list"));
    }
    let mut acc = 1.0;
    for &n in sizes {
        if n == 0 {
            return Err(Error::arg("index set sizes must be at least 1"));
        }
        let ceil_log = usize::BITS - (n - 1).leading_zeros();
        acc *= f64::from(ceil_log + 1);
    }
    Ok(acc)
}

/// Per-tuple magnitudes |T(g·1_tuple)(x)|, indexed [tuple][x].
fn tuple_magnitudes(k: &Kernel, masks: &MaskSystem, g: &[Complex64]) -> Vec<Vec<f64>> {
    let n = k.cols();
    let w = k.domain().weights();
    par::map_range(masks.tuple_count(), |t| {
        let m = masks.tuple_mask(t, n);
        let gt: Vec<Complex64> =
            g.iter().zip(&m).map(|(v, b)| if *b { *v } else { Complex64::new(0.0, 0.0) }).collect();
        (0..k.rows()).map(|x| pair(k.row(x), &gt, w).norm()).collect()
    })
}

/// Pointwise max over the selected tuples; ties keep the earliest tuple.
fn reduce_max(vals: &[Vec<f64>], rows: usize, select: impl Fn(usize) -> bool) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut best = vec![0.0; rows];
    let mut arg = vec![None; rows];
    for (t, v) in vals.iter().enumerate() {
        if !select(t) {
            continue;
        }
        for x in 0..rows {
            if arg[x].is_none() || v[x] > best[x] {
                best[x] = v[x];
                arg[x] = Some(t);
            }
        }
    }
    (best, arg)
}

/// T⋆f(x) = max over tuples of |T(f·1_{A₁^{i₁}×⋯×A_d^{i_d}})(x)| by exhaustive scan.
pub fn maximal_truncation(k: &Kernel, sys: &ChainSystem, f: &Signal) -> Result<MaximalTruncation> {
    sys.check_domain(k)?;
    if f.values().len() != k.cols() {
        return Err(Error::DimensionMismatch { expected: k.cols(), found: f.values().len() });
    }
    let masks = sys.cylinder_masks();
    let lens = sys.chain_lengths();
    let vals = tuple_magnitudes(k, &masks, f.values());
    let (values, arg) = reduce_max(&vals, k.rows(), |_| true);
    let argmax = arg.into_iter().map(|a| a.map(|t| TruncationIndex(unravel(t, &lens)))).collect();
    Ok(MaximalTruncation { values, argmax })
}

/// The same supremum taken as d nested one-parameter suprema.
pub fn maximal_truncation_iterated(k: &Kernel, sys: &ChainSystem, f: &Signal) -> Result<Vec<f64>> {
    sys.check_domain(k)?;
    let masks = sys.cylinder_masks();
    let n = k.cols();
    let full = vec![true; n];
    Ok(iterate_axes(k, &masks.axes, f.values(), &full))
}

fn iterate_axes(k: &Kernel, axes: &[Vec<Vec<bool>>], g: &[Complex64], acc: &[bool]) -> Vec<f64> {
    let rows = k.rows();
    match axes.split_first() {
        None => {
            let gt: Vec<Complex64> =
                g.iter().zip(acc).map(|(v, b)| if *b { *v } else { Complex64::new(0.0, 0.0) }).collect();
            let w = k.domain().weights();
            (0..rows).map(|x| pair(k.row(x), &gt, w).norm()).collect()
        }
        Some((first, rest)) => {
            let mut best = vec![0.0; rows];
            for set in first {
                let m: Vec<bool> = acc.iter().zip(set).map(|(a, b)| *a && *b).collect();
                let inner = iterate_axes(k, rest, g, &m);
                for (b, v) in best.iter_mut().zip(inner) {
                    if v > *b {
                        *b = v;
                    }
                }
            }
            best
        }
    }
}

/// The maximal truncation as an operator for the norm ascent.
pub struct MaximalTruncationOperator {
    kernel: Kernel,
    rows: Vec<Vec<Complex64>>,
    zero_row: Vec<Complex64>,
}

impl MaximalTruncationOperator {
    pub fn new(k: &Kernel, sys: &ChainSystem) -> Result<Self> {
        sys.check_domain(k)?;
        let masks = sys.cylinder_masks();
        let n = k.cols();
        let rows = (0..masks.tuple_count())
            .map(|t| {
                let m = masks.tuple_mask(t, n);
                let mut r = Vec::with_capacity(n * k.rows());
                for x in 0..k.rows() {
                    r.extend(k.row(x).iter().zip(&m).map(|(v, b)| if *b { *v } else { Complex64::new(0.0, 0.0) }));
                }
                r
            })
            .collect();
        Ok(Self { kernel: k.clone(), rows, zero_row: vec![Complex64::new(0.0, 0.0); n] })
    }
}

impl SublinearOperator for MaximalTruncationOperator {
    fn domain(&self) -> &Arc<WeightedSpace> {
        self.kernel.domain()
    }
    fn codomain(&self) -> &Arc<WeightedSpace> {
        self.kernel.codomain()
    }
    fn active<'a>(&'a self, f: &[Complex64], out: &mut Vec<(Complex64, &'a [Complex64])>) {
        out.clear();
        let n = self.kernel.cols();
        let w = self.kernel.domain().weights();
        for x in 0..self.kernel.rows() {
            let mut best: (Complex64, &[Complex64]) = (Complex64::new(0.0, 0.0), &self.zero_row);
            let mut best_abs = -1.0;
            for t in &self.rows {
                let row = &t[x * n..(x + 1) * n];
                let z = pair(row, f, w);
                if z.norm() > best_abs {
                    best_abs = z.norm();
                    best = (z, row);
                }
            }
            out.push(best);
        }
    }
    fn dual_rows(&self) -> Vec<&[Complex64]> {
        let n = self.kernel.cols();
        let mu = self.kernel.codomain().weights();
        let mut out = Vec::new();
        for t in &self.rows {
            for x in 0..self.kernel.rows() {
                if mu[x] > 0.0 {
                    out.push(&t[x * n..(x + 1) * n]);
                }
            }
        }
        out
    }
}

/// Exact ‖T⋆‖_{p→∞}: the largest L^{p′}(ν) norm of a truncated row.
pub fn maximal_truncation_norm_to_infinity(k: &Kernel, sys: &ChainSystem, p: Exponent) -> Result<f64> {
    let op = MaximalTruncationOperator::new(k, sys)?;
    let nu = k.domain().weights();
    Ok(op
        .dual_rows()
        .iter()
        .map(|r| {
            let mags: Vec<f64> = r.iter().map(|z| z.norm()).collect();
            weighted_norm(&mags, nu, p.conjugate())
        })
        .fold(0.0, f64::max))
}

/// Smallest l with cumulative[l] ≥ cumulative[last]/2; 0 when the total is 0.
pub fn half_mass_index(cumulative: &[f64]) -> Result<usize> {
    let total = *cumulative.last().ok_or_else(|| Error::arg("no masses"))?;
    if total <= 0.0 {
        return Ok(0);
    }
    let half = 0.5 * total;
    Ok(cumulative.iter().position(|m| *m >= half).unwrap_or(cumulative.len() - 1))
}

/// Masks F(i) = E₁(last)∩⋯∩E_{d−1}(last)∩E_d(i) for i over the last axis.
fn last_axis_masks(axes: &[Vec<Vec<bool>>], n: usize) -> Vec<Vec<bool>> {
    let (last, others) = axes.split_last().expect("at least one axis");
    let mut base = vec![true; n];
    for axis in others {
        match axis.last() {
            Some(top) => {
                for (b, t) in base.iter_mut().zip(top) {
                    *b &= *t;
                }
            }
            None => base.fill(false),
        }
    }
    last.iter().map(|set| base.iter().zip(set).map(|(a, b)| *a && *b).collect()).collect()
}

/// Cumulative p-masses ‖f‖^p on F(i) along the last chain.
pub fn cumulative_masses(f: &Signal, sys: &ChainSystem, p: Exponent) -> Result<Vec<f64>> {
    if p.is_infinite() {
        return Err(Error::pre("half-mass split needs p < inf"));
    }
    if f.values().len() != sys.domain_size() {
        return Err(Error::DimensionMismatch { expected: sys.domain_size(), found: f.values().len() });
    }
    let masks = sys.cylinder_masks();
    let fs = last_axis_masks(&masks.axes, f.values().len());
    Ok(fs.iter().map(|m| p_mass(f.values(), f.space().weights(), m, p)).collect())
}

/// The minimal half-mass split index on the last chain (0-based).
pub fn half_mass_split(f: &Signal, sys: &ChainSystem, p: Exponent) -> Result<usize> {
    if sys.chains().last().is_none_or(|c| c.is_empty()) {
        return Err(Error::pre("last chain must be nonempty"));
    }
    half_mass_index(&cumulative_masses(f, sys, p)?)
}

/// One recorded inequality `lhs ≤ rhs` (or `lhs < rhs` when strict).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
}

impl CkCheck {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs + CERTIFICATE_RTOL * rhs.abs().max(lhs.abs());
        Self { name: name.into(), lhs, rhs, strict: false, holds }
    }

    fn exact(name: &str, lhs: f64, rhs: f64, strict: bool) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        Self { name: name.into(), lhs, rhs, strict, holds }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkSplit {
    /// Index of the active (last) axis within the node's chains.
    pub axis: usize,
    pub index: usize,
    /// ‖g‖^p on F(0), …, F(n−1).
    pub cumulative_masses: Vec<f64>,
}

/// A node of the induction replay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkNode {
    pub depth: usize,
    pub parameters: usize,
    pub chain_lengths: Vec<usize>,
    pub input_norm: f64,
    pub maximal_norm: f64,
    pub split: Option<CkSplit>,
    pub checks: Vec<CkCheck>,
    /// Indices below the split on the active axis.
    pub left: Option<Box<CkNode>>,
    /// Set differences beyond the split.
    pub right: Option<Box<CkNode>>,
    /// The active axis frozen at the split set.
    pub reduced: Option<Box<CkNode>>,
}

impl CkNode {
    fn children(&self) -> impl Iterator<Item = &CkNode> {
        [&self.left, &self.right, &self.reduced].into_iter().flatten().map(|b| b.as_ref())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormBoundKind {
    Exact,
    Holder,
}

/// Replay of the half-mass induction for one (kernel, chains, f).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkCertificate {
    pub p: f64,
    pub q: f64,
    pub d: usize,
    pub constant: f64,
    /// The number N used in place of ‖T‖ (an upper bound for it).
    pub norm_bound: f64,
    pub norm_bound_kind: NormBoundKind,
    pub root: CkNode,
}

impl CkCertificate {
    /// Nodes in preorder.
    pub fn nodes(&self) -> Vec<&CkNode> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(n) = stack.pop() {
            out.push(n);
            let kids: Vec<&CkNode> = n.children().collect();
            stack.extend(kids.into_iter().rev());
        }
        out
    }

    pub fn checks(&self) -> impl Iterator<Item = &CkCheck> {
        self.nodes().into_iter().flat_map(|n| n.checks.iter())
    }

    pub fn failures(&self) -> Vec<&CkCheck> {
        self.checks().filter(|c| !c.holds).collect()
    }

    pub fn all_hold(&self) -> bool {
        self.checks().all(|c| c.holds)
    }

    /// Every split index is the smallest one reaching half the mass.
    pub fn splits_minimal(&self) -> bool {
        self.nodes().iter().filter_map(|n| n.split.as_ref()).all(|s| {
            let m = &s.cumulative_masses;
            let total = *m.last().unwrap_or(&0.0);
            if total <= 0.0 {
                return s.index == 0;
            }
            let half = 0.5 * total;
            m[s.index] >= half && m[..s.index].iter().all(|v| *v < half)
        })
    }
}

struct Replay<'a> {
    k: &'a Kernel,
    p: Exponent,
    q: Exponent,
    n: f64,
    constants: Vec<f64>,
}

impl Replay<'_> {
    fn norm_out(&self, v: &[f64]) -> f64 {
        weighted_norm(v, self.k.codomain().weights(), self.q)
    }

    fn norm_in(&self, g: &[Complex64]) -> f64 {
        let mags: Vec<f64> = g.iter().map(|z| z.norm()).collect();
        weighted_norm(&mags, self.k.domain().weights(), self.p)
    }

    fn node(&self, axes: &[Vec<Vec<bool>>], g: &[Complex64], depth: usize) -> CkNode {
        let dd = axes.len();
        let c_d = self.constants[dd];
        let ny = self.k.cols();
        let masks = MaskSystem { axes: axes.to_vec() };
        let vals = tuple_magnitudes(self.k, &masks, g);
        let rows = self.k.rows();
        let (tstar, _) = reduce_max(&vals, rows, |_| true);
        let gnorm = self.norm_in(g);
        let tnorm = self.norm_out(&tstar);
        let mut node = CkNode {
            depth,
            parameters: dd,
            chain_lengths: masks.lengths(),
            input_norm: gnorm,
            maximal_norm: tnorm,
            split: None,
            checks: vec![CkCheck::le("claim", tnorm, c_d * self.n * gnorm)],
            left: None,
            right: None,
            reduced: None,
        };
        let lens = masks.lengths();
        let n_last = *lens.last().expect("axes");
        if lens.contains(&0) || (dd == 1 && n_last == 1) {
            return node;
        }

        let fs = last_axis_masks(axes, ny);
        let w = self.k.domain().weights();
        let cum: Vec<f64> = fs.iter().map(|m| p_mass(g, w, m, self.p)).collect();
        let total = cum[n_last - 1];
        let l = half_mass_index(&cum).expect("nonempty");
        let gain = (-self.p.reciprocal()).exp2();
        node.split = Some(CkSplit { axis: dd - 1, index: l, cumulative_masses: cum.clone() });
        node.checks.push(CkCheck::exact("split_reached", 0.5 * total, cum[l], false));
        if l > 0 {
            node.checks.push(CkCheck::exact("split_below", cum[l - 1], 0.5 * total, total > 0.0));
        }

        // left: last axis indices < l
        let m1 = if l > 0 {
            let (m1, _) = reduce_max(&vals, rows, |t| t % n_last < l);
            let g1 = mask_signal(g, &fs[l - 1]);
            let mut sub = axes.to_vec();
            sub[dd - 1].truncate(l);
            node.left = Some(Box::new(self.node(&sub, &g1, depth + 1)));
            node.checks.push(CkCheck::le("bound_left", self.norm_out(&m1), gain * c_d * self.n * gnorm));
            Some(m1)
        } else {
            None
        };

        // right: differences E_d(i) ∖ E_d(l) for i > l
        let outside: Vec<bool> = fs[n_last - 1].iter().zip(&fs[l]).map(|(a, b)| *a && !*b).collect();
        let right_mass = p_mass(g, w, &outside, self.p);
        node.checks.push(CkCheck::le("right_mass", right_mass, 0.5 * total));
        let m2 = if l + 1 < n_last {
            let g2 = mask_signal(g, &outside);
            let mut sub = axes.to_vec();
            let split_set = sub[dd - 1][l].clone();
            sub[dd - 1] = sub[dd - 1][l + 1..]
                .iter()
                .map(|s| s.iter().zip(&split_set).map(|(a, b)| *a && !*b).collect())
                .collect();
            let child = self.node(&sub, &g2, depth + 1);
            let sub_masks = MaskSystem { axes: sub };
            let (m2, _) = reduce_max(&tuple_magnitudes(self.k, &sub_masks, &g2), rows, |_| true);
            node.right = Some(Box::new(child));
            node.checks.push(CkCheck::le("bound_right", self.norm_out(&m2), gain * c_d * self.n * gnorm));
            m2
        } else {
            vec![0.0; rows]
        };

        // reduced: freeze the last axis at E_d(l)
        let g3 = mask_signal(g, &axes[dd - 1][l]);
        let m3 = if dd >= 2 {
            let sub: Vec<Vec<Vec<bool>>> = axes[..dd - 1].to_vec();
            let child = self.node(&sub, &g3, depth + 1);
            let sub_masks = MaskSystem { axes: sub };
            let (m3, _) = reduce_max(&tuple_magnitudes(self.k, &sub_masks, &g3), rows, |_| true);
            node.reduced = Some(Box::new(child));
            m3
        } else {
            let wy = self.k.domain().weights();
            (0..rows).map(|x| pair(self.k.row(x), &g3, wy).norm()).collect()
        };
        node.checks.push(CkCheck::le(
            "bound_reduced",
            self.norm_out(&m3),
            self.constants[dd - 1] * self.n * gnorm,
        ));

        // combine on S = {M1 = T⋆} and its complement
        let in_s: Vec<bool> = match &m1 {
            Some(m1) => m1.iter().zip(&tstar).map(|(a, b)| a == b).collect(),
            None => vec![false; rows],
        };
        let restrict = |v: &[f64], keep: bool| -> Vec<f64> {
            v.iter().zip(&in_s).map(|(x, s)| if *s == keep { *x } else { 0.0 }).collect()
        };
        let zero = vec![0.0; rows];
        let a = self.norm_out(&restrict(m1.as_deref().unwrap_or(&zero), true));
        let b = self.norm_out(&restrict(&m2, false));
        let c = self.norm_out(&restrict(&m3, false));
        let first = if self.q.is_infinite() {
            a.max(b)
        } else {
            let qv = self.q.value();
            (a.powf(qv) + b.powf(qv)).powf(1.0 / qv)
        };
        node.checks.push(CkCheck::le("combine", tnorm, first + c));
        node.checks.push(CkCheck::le("combine_bound", first + c, c_d * self.n * gnorm));
        node
    }
}

fn mask_signal(g: &[Complex64], m: &[bool]) -> Vec<Complex64> {
    g.iter().zip(m).map(|(v, b)| if *b { *v } else { Complex64::new(0.0, 0.0) }).collect()
}

/// The norm bound N used by certificates: exact at the endpoints, Hölder otherwise.
pub fn certified_norm_bound(k: &Kernel, p: Exponent, q: Exponent) -> (f64, NormBoundKind) {
    match norm_exact_endpoint(k, p, q) {
        Ok(v) => (v, NormBoundKind::Exact),
        Err(_) => (holder_upper_bound(k, p, q), NormBoundKind::Holder),
    }
}

/// Replays the half-mass induction and records every inequality it uses.
pub fn build_ck_certificate(
    k: &Kernel,
    sys: &ChainSystem,
    f: &Signal,
    p: Exponent,
    q: Exponent,
) -> Result<CkCertificate> {
    sys.check_domain(k)?;
    if f.values().len() != k.cols() {
        return Err(Error::DimensionMismatch { expected: k.cols(), found: f.values().len() });
    }
    let d = sys.d();
    let constants = (0..=d).map(|j| ck_constant(p, q, j)).collect::<Result<Vec<_>>>()?;
    let (n, kind) = certified_norm_bound(k, p, q);
    let replay = Replay { k, p, q, n, constants };
    let masks = sys.cylinder_masks();
    let root = replay.node(&masks.axes, f.values(), 0);
    Ok(CkCertificate {
        p: p.value(),
        q: q.value(),
        d,
        constant: replay.constants[d],
        norm_bound: n,
        norm_bound_kind: kind,
        root,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkBoundReport {
    /// Ascent lower bound on ‖T⋆‖_{p→q}.
    pub lower: f64,
    /// Hölder upper bound on ‖T‖_{p→q}.
    pub upper: f64,
    pub constant: f64,
    /// constant · upper.
    pub bound: f64,
    pub holds: bool,
    /// Ascent lower bound on ‖T‖_{p→q}.
    pub plain_lower: f64,
    /// lower / plain_lower; diagnostic only.
    pub empirical_ratio: f64,
}

/// Checks L ≤ C·U with L the ascent estimate of ‖T⋆‖ and U the Hölder bound of ‖T‖.
pub fn verify_ck_bound(
    k: &Kernel,
    sys: &ChainSystem,
    p: Exponent,
    q: Exponent,
    cfg: &AscentConfig,
) -> Result<CkBoundReport> {
    let constant = ck_constant(p, q, sys.d())?;
    let op = MaximalTruncationOperator::new(k, sys)?;
    let lower = norm_lower_bound_ascent(&op, p, q, cfg)?.ratio;
    let plain_lower = norm_lower_bound_ascent(k, p, q, cfg)?.ratio;
    let upper = holder_upper_bound(k, p, q);
    let bound = constant * upper;
    let empirical_ratio = if plain_lower > 0.0 { lower / plain_lower } else { f64::NAN };
    Ok(CkBoundReport { lower, upper, constant, bound, holds: lower <= bound, plain_lower, empirical_ratio })
}

/// Shape of randomly generated test instances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceShape {
    pub d: usize,
    /// Largest factor size.
    pub max_factor: usize,
    /// Largest codomain size.
    pub max_outputs: usize,
    /// Largest chain length.
    pub max_chain: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        Self { d: 2, max_factor: 4, max_outputs: 8, max_chain: 4 }
    }
}

/// A random kernel, chain system and input.
#[derive(Clone, Debug)]
pub struct CkInstance {
    pub kernel: Kernel,
    pub system: ChainSystem,
    pub f: Signal,
}

/// A random nested chain: initial segments of a random permutation.
pub fn random_chain<R: Rng>(rng: &mut R, axis_size: usize, len: usize) -> Chain {
    let mut perm: Vec<usize> = (0..axis_size).collect();
    perm.shuffle(rng);
    let mut cuts: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=axis_size)).collect();
    cuts.sort_unstable();
    let sets: Vec<Vec<usize>> = cuts.iter().map(|&c| perm[..c].to_vec()).collect();
    Chain::new(axis_size, &sets).expect("initial segments are nested")
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_instance<R: Rng>(rng: &mut R, shape: &InstanceShape) -> Result<CkInstance> {
    if shape.d == 0 || shape.max_factor == 0 || shape.max_outputs == 0 || shape.max_chain == 0 {
        return Err(Error::arg("instance shape entries must be positive"));
    }
    let sizes: Vec<usize> = (0..shape.d).map(|_| rng.gen_range(1..=shape.max_factor)).collect();
    let chains: Vec<Chain> = sizes
        .iter()
        .map(|&s| {
            let len = rng.gen_range(1..=shape.max_chain);
            random_chain(rng, s, len)
        })
        .collect();
    let system = ChainSystem::new(chains)?;
    let ny = system.domain_size();
    let nx = rng.gen_range(1..=shape.max_outputs);
    let domain = Arc::new(WeightedSpace::new((0..ny).map(|_| rng.gen_range(0.25..2.0)).collect())?);
    let codomain = Arc::new(WeightedSpace::new((0..nx).map(|_| rng.gen_range(0.25..2.0)).collect())?);
    let entries = (0..nx * ny).map(|_| complex_normal(rng)).collect();
    let kernel = Kernel::new(domain.clone(), codomain, entries)?;
    let f = Signal::new(domain, (0..ny).map(|_| complex_normal(rng)).collect())?;
    Ok(CkInstance { kernel, system, f })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn constants() {
        let one = Exponent::ONE;
        let two = Exponent::TWO;
        let inf = Exponent::INFINITY;
        let four = Exponent::new(4.0).unwrap();
        assert!((ck_constant(one, inf, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!((ck_constant(one, two, 1).unwrap() - (2.0 + 2f64.sqrt())).abs() < 1e-13);
        assert!((ck_constant(two, four, 2).unwrap() - 39.504).abs() < 1e-3);
        assert!(ck_constant(two, two, 1).is_err());
        assert_eq!(rm_constant(&[1]).unwrap(), 1.0);
        assert_eq!(rm_constant(&[8, 4]).unwrap(), 12.0);
        assert_eq!(rm_constant(&[2]).unwrap(), 2.0);
        assert_eq!(rm_constant(&[5]).unwrap(), 4.0);
        assert!(rm_constant(&[]).is_err());
    }

    #[test]
    fn row_kernel_example() {
        let y = Arc::new(WeightedSpace::uniform(2).unwrap());
        let x = Arc::new(WeightedSpace::uniform(1).unwrap());
        let k = Kernel::from_real(y.clone(), x, &[1.0, 1.0]).unwrap();
        let sys = ChainSystem::new(vec![Chain::new(2, &[vec![0], vec![0, 1]]).unwrap()]).unwrap();
        let f = Signal::from_real(y, &[3.0, -4.0]).unwrap();
        let mt = maximal_truncation(&k, &sys, &f).unwrap();
        assert_eq!(mt.values, vec![3.0]);
        assert_eq!(mt.argmax, vec![Some(TruncationIndex(vec![0]))]);
    }

    #[test]
    fn empty_chain_gives_zero() {
        let y = Arc::new(WeightedSpace::uniform(2).unwrap());
        let k = Kernel::from_real(y.clone(), y.clone(), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let sys = ChainSystem::new(vec![Chain::new(2, &[]).unwrap()]).unwrap();
        let f = Signal::from_real(y, &[1.0, 1.0]).unwrap();
        let mt = maximal_truncation(&k, &sys, &f).unwrap();
        assert_eq!(mt.values, vec![0.0, 0.0]);
        assert_eq!(mt.argmax, vec![None, None]);
    }

    #[test]
    fn identity_with_full_chain() {
        let y = Arc::new(WeightedSpace::uniform(3).unwrap());
        let k = Kernel::from_real(y.clone(), y.clone(), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let sys = ChainSystem::new(vec![Chain::initial_segments(3, &[1, 3]).unwrap()]).unwrap();
        let f = Signal::new(y, vec![c(-2.0), Complex64::new(0.0, 5.0), c(0.5)]).unwrap();
        let mt = maximal_truncation(&k, &sys, &f).unwrap();
        assert_eq!(mt.values, vec![2.0, 5.0, 0.5]);
    }

    #[test]
    fn rejects_bad_chains() {
        assert!(Chain::new(2, &[vec![0, 1], vec![0]]).is_err());
        assert!(Chain::new(2, &[vec![2]]).is_err());
        let y = Arc::new(WeightedSpace::uniform(3).unwrap());
        let k = Kernel::from_real(y.clone(), y, &[0.0; 9]).unwrap();
        let sys = ChainSystem::new(vec![Chain::initial_segments(2, &[1]).unwrap()]).unwrap();
        assert!(MaximalTruncationOperator::new(&k, &sys).is_err());
    }

    #[test]
    fn half_mass_examples() {
        assert_eq!(half_mass_index(&[0.1, 0.3, 0.6, 1.0]).unwrap(), 2);
        assert_eq!(half_mass_index(&[0.5, 1.0]).unwrap(), 0);
        assert_eq!(half_mass_index(&[0.0, 0.0, 0.0]).unwrap(), 0);
        let y = Arc::new(WeightedSpace::uniform(3).unwrap());
        let sys = ChainSystem::new(vec![Chain::initial_segments(3, &[1, 2]).unwrap()]).unwrap();
        let f = Signal::from_real(y, &[0.0, 0.0, 5.0]).unwrap();
        assert_eq!(half_mass_split(&f, &sys, Exponent::TWO).unwrap(), 0);
        assert!(half_mass_split(&f, &sys, Exponent::INFINITY).is_err());
    }

    #[test]
    fn basis_certificate_is_a_leaf() {
        let y = Arc::new(WeightedSpace::uniform(2).unwrap());
        let x = Arc::new(WeightedSpace::uniform(2).unwrap());
        let k = Kernel::from_real(y.clone(), x, &[1.0, -1.0, 0.5, 2.0]).unwrap();
        let sys = ChainSystem::new(vec![Chain::initial_segments(2, &[2]).unwrap()]).unwrap();
        let f = Signal::from_real(y, &[1.0, 2.0]).unwrap();
        let cert = build_ck_certificate(&k, &sys, &f, Exponent::TWO, Exponent::INFINITY).unwrap();
        assert!(cert.root.split.is_none());
        assert_eq!(cert.nodes().len(), 1);
        assert!(cert.all_hold());
    }

    #[test]
    fn concentrated_mass_splits_first() {
        let y = Arc::new(WeightedSpace::uniform(4).unwrap());
        let k = Kernel::from_real(y.clone(), y.clone(), &[1.0; 16]).unwrap();
        let sys = ChainSystem::new(vec![Chain::initial_segments(4, &[1, 2, 3, 4]).unwrap()]).unwrap();
        let f = Signal::from_real(y, &[10.0, 0.1, 0.1, 0.1]).unwrap();
        let cert = build_ck_certificate(&k, &sys, &f, Exponent::ONE, Exponent::TWO).unwrap();
        let split = cert.root.split.as_ref().unwrap();
        assert_eq!(split.index, 0);
        let right = cert.root.right.as_ref().unwrap();
        assert!(right.input_norm <= 0.5 * cert.root.input_norm);
        assert!(cert.all_hold() && cert.splits_minimal());
    }

    #[test]
    fn verify_examples() {
        let y = Arc::new(WeightedSpace::uniform(2).unwrap());
        let x = Arc::new(WeightedSpace::uniform(1).unwrap());
        let k = Kernel::from_real(y, x, &[1.0, 1.0]).unwrap();
        let sys = ChainSystem::new(vec![Chain::new(2, &[vec![0], vec![0, 1]]).unwrap()]).unwrap();
        let cfg = AscentConfig::default();
        let r = verify_ck_bound(&k, &sys, Exponent::TWO, Exponent::INFINITY, &cfg).unwrap();
        assert!((r.lower - 2f64.sqrt()).abs() < 1e-9);
        assert!(r.holds);
        assert!(verify_ck_bound(&k, &sys, Exponent::TWO, Exponent::TWO, &cfg).is_err());
    }
}
