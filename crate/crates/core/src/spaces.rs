//! Lebesgue exponents, finite weighted measure spaces, kernels and operator
//! norm estimates.
//!
//! Kernels act by the integral convention `Tf(x) = Σ_y K(x,y) f(y) ν_y`,
//! accumulated left to right over `y`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// A Lebesgue exponent in [1, ∞].
///
/// The conjugate is stored alongside the value so that conjugation is an exact
/// involution.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent {
    value: f64,
    conj: f64,
}

impl Exponent {
    pub const ONE: Exponent = Exponent { value: 1.0, conj: f64::INFINITY };
    pub const TWO: Exponent = Exponent { value: 2.0, conj: 2.0 };
    pub const INFINITY: Exponent = Exponent { value: f64::INFINITY, conj: 1.0 };

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let conj = if p == 1.0 {
            f64::INFINITY
        } else if p.is_infinite() {
            1.0
        } else {
            p / (p - 1.0)
        };
        Ok(Self { value: p, conj })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn is_infinite(self) -> bool {
        self.value.is_infinite()
    }

    /// 1/p with 1/∞ = 0.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.value
        }
    }

    pub fn conjugate(self) -> Exponent {
        Exponent { value: self.conj, conj: self.value }
    }
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.value
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// The Hölder conjugate p′ with 1/p + 1/p′ = 1.
pub fn holder_conjugate(p: Exponent) -> Exponent {
    p.conjugate()
}

/// A finite measure space of weighted atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpace {
    weights: Vec<f64>,
}

impl WeightedSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::arg("weights must be finite and nonnegative"));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::arg("at least one weight must be positive"));
        }
        Ok(Self { weights })
    }

    /// n atoms of unit mass.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A function on a weighted space.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    space: Arc<WeightedSpace>,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(space: Arc<WeightedSpace>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: values.len() });
        }
        Ok(Self { space, values })
    }

    pub fn from_real(space: Arc<WeightedSpace>, values: &[f64]) -> Result<Self> {
        Self::new(space, values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    pub fn zeros(space: Arc<WeightedSpace>) -> Self {
        let n = space.len();
        Self { space, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn space(&self) -> &Arc<WeightedSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Pointwise product with the indicator of `mask`.
    pub fn restrict(&self, mask: &[bool]) -> Result<Signal> {
        if mask.len() != self.values.len() {
            return Err(Error::DimensionMismatch { expected: self.values.len(), found: mask.len() });
        }
        let values = self
            .values
            .iter()
            .zip(mask)
            .map(|(v, m)| if *m { *v } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok(Signal { space: self.space.clone(), values })
    }
}

/// L^p norm of `magnitudes` against `weights`; atoms of zero weight are
/// ignored by the sup norm.
pub fn weighted_norm(magnitudes: &[f64], weights: &[f64], p: Exponent) -> f64 {
    if p.is_infinite() {
        magnitudes
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > 0.0)
            .fold(0.0, |m, (v, _)| m.max(*v))
    } else if p.value() == 1.0 {
        magnitudes.iter().zip(weights).map(|(v, w)| v * w).sum()
    } else if p.value() == 2.0 {
        magnitudes.iter().zip(weights).map(|(v, w)| v * v * w).sum::<f64>().sqrt()
    } else {
        let pv = p.value();
        magnitudes
            .iter()
            .zip(weights)
            .map(|(v, w)| v.powf(pv) * w)
            .sum::<f64>()
            .powf(1.0 / pv)
    }
}

/// p-th power of the L^p norm restricted to the atoms where `mask` holds.
pub fn p_mass(values: &[Complex64], weights: &[f64], mask: &[bool], p: Exponent) -> f64 {
    let pv = p.value();
    values
        .iter()
        .zip(weights)
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|((v, w), _)| v.norm().powf(pv) * w)
        .sum()
}

pub fn lp_norm(f: &Signal, p: Exponent) -> f64 {
    let mags: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    weighted_norm(&mags, f.space.weights(), p)
}

/// A finite integral kernel K(x, y), rows indexed by the codomain.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    domain: Arc<WeightedSpace>,
    codomain: Arc<WeightedSpace>,
    entries: Vec<Complex64>,
}

impl Kernel {
    pub fn new(domain: Arc<WeightedSpace>, codomain: Arc<WeightedSpace>, entries: Vec<Complex64>) -> Result<Self> {
        let expected = domain.len() * codomain.len();
        if entries.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("kernel entry".into()));
        }
        Ok(Self { domain, codomain, entries })
    }

    pub fn from_real(domain: Arc<WeightedSpace>, codomain: Arc<WeightedSpace>, entries: &[f64]) -> Result<Self> {
        Self::new(domain, codomain, entries.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    pub fn domain(&self) -> &Arc<WeightedSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<WeightedSpace> {
        &self.codomain
    }

    pub fn rows(&self) -> usize {
        self.codomain.len()
    }

    pub fn cols(&self) -> usize {
        self.domain.len()
    }

    pub fn row(&self, x: usize) -> &[Complex64] {
        let n = self.cols();
        &self.entries[x * n..(x + 1) * n]
    }

    pub fn entry(&self, x: usize, y: usize) -> Complex64 {
        self.entries[x * self.cols() + y]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// The kernel multiplied by a scalar.
    pub fn scaled(&self, alpha: Complex64) -> Kernel {
        Kernel {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.iter().map(|z| z * alpha).collect(),
        }
    }
}

/// Σ_y row[y] f[y] ν_y, accumulated left to right.
pub fn pair(row: &[Complex64], f: &[Complex64], weights: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((k, v), w) in row.iter().zip(f).zip(weights) {
        acc += k * v * *w;
    }
    acc
}

fn same_space(a: &Arc<WeightedSpace>, b: &Arc<WeightedSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub fn apply_kernel(k: &Kernel, f: &Signal) -> Result<Signal> {
    if !same_space(k.domain(), f.space()) {
        return Err(Error::DimensionMismatch { expected: k.cols(), found: f.values.len() });
    }
    let w = k.domain.weights();
    let values = (0..k.rows()).map(|x| pair(k.row(x), &f.values, w)).collect();
    Signal::new(k.codomain.clone(), values)
}

/// Exact ‖K‖_{p→q} when p = 1 (column scan) or q = ∞ (row scan).
pub fn norm_exact_endpoint(k: &Kernel, p: Exponent, q: Exponent) -> Result<f64> {
    let mu = k.codomain.weights();
    let nu = k.domain.weights();
    if p.value() == 1.0 {
        let mut best: f64 = 0.0;
        for (y, &w) in nu.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let col: Vec<f64> = (0..k.rows()).map(|x| k.entry(x, y).norm()).collect();
            best = best.max(weighted_norm(&col, mu, q));
        }
        Ok(best)
    } else if q.is_infinite() {
        let mut best: f64 = 0.0;
        for (x, &w) in mu.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            best = best.max(row_norm(k.row(x), nu, p.conjugate()));
        }
        Ok(best)
    } else {
        Err(Error::pre(format!("no exact formula for p={p}, q={q}: need p=1 or q=inf")))
    }
}

fn row_norm(row: &[Complex64], nu: &[f64], r: Exponent) -> f64 {
    let mags: Vec<f64> = row.iter().map(|z| z.norm()).collect();
    weighted_norm(&mags, nu, r)
}

/// ‖x ↦ ‖K(x,·)‖_{L^{p′}(ν)}‖_{L^q(μ)}, an upper bound on ‖K‖_{p→q}.
pub fn holder_upper_bound(k: &Kernel, p: Exponent, q: Exponent) -> f64 {
    let nu = k.domain.weights();
    let rows: Vec<f64> = (0..k.rows()).map(|x| row_norm(k.row(x), nu, p.conjugate())).collect();
    weighted_norm(&rows, k.codomain.weights(), q)
}

/// An operator of the form `(Af)(x) = max_t |⟨r_{x,t}, f⟩_ν|`.
///
/// Implementors report, for each output atom, the value of the active linear
/// functional and its row, which is what the ascent needs for a subgradient.
pub trait SublinearOperator: Sync {
    fn domain(&self) -> &Arc<WeightedSpace>;
    fn codomain(&self) -> &Arc<WeightedSpace>;
    /// Writes the active pairing value and row for every output atom.
    fn active<'a>(&'a self, f: &[Complex64], out: &mut Vec<(Complex64, &'a [Complex64])>);
    /// Rows whose dual-aligned inputs serve as deterministic ascent starts.
    fn dual_rows(&self) -> Vec<&[Complex64]> {
        Vec::new()
    }
}

impl SublinearOperator for Kernel {
    fn domain(&self) -> &Arc<WeightedSpace> {
        &self.domain
    }
    fn codomain(&self) -> &Arc<WeightedSpace> {
        &self.codomain
    }
    fn active<'a>(&'a self, f: &[Complex64], out: &mut Vec<(Complex64, &'a [Complex64])>) {
        out.clear();
        let w = self.domain.weights();
        for x in 0..self.rows() {
            let row = self.row(x);
            out.push((pair(row, f, w), row));
        }
    }
    fn dual_rows(&self) -> Vec<&[Complex64]> {
        (0..self.rows()).filter(|&x| self.codomain.weights()[x] > 0.0).map(|x| self.row(x)).collect()
    }
}

/// Evaluates |Af| on every output atom.
pub fn apply_sublinear(op: &dyn SublinearOperator, f: &Signal) -> Result<Vec<f64>> {
    if !same_space(op.domain(), f.space()) {
        return Err(Error::DimensionMismatch { expected: op.domain().len(), found: f.values.len() });
    }
    let mut buf = Vec::new();
    op.active(&f.values, &mut buf);
    Ok(buf.iter().map(|(z, _)| z.norm()).collect())
}

/// Settings for [`norm_lower_bound_ascent`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    pub restarts: usize,
    pub steps: usize,
    pub seed: u64,
    /// Step constant c in the c/√k schedule.
    pub step_scale: f64,
    /// Iterations of the fixed-point polish applied to each run's best point.
    pub polish_iterations: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self { restarts: 8, steps: 200, seed: 0, step_scale: 0.5, polish_iterations: 50 }
    }
}

#[derive(Clone, Debug)]
pub struct AscentResult {
    pub ratio: f64,
    pub witness: Signal,
    /// Index of the start that produced the witness (atom starts come first).
    pub start: usize,
}

/// Multi-start projected subgradient ascent for ‖Af‖_q / ‖f‖_p.
///
/// Starts are the normalized indicators of every positive-weight atom, then
/// the inputs aligned with each of the operator's dual rows (these runs only
/// get the polish), then `restarts` seeded random points. Each run takes
/// normalized steps of
/// length c/√k relative to the current Euclidean size, projects back to the
/// unit L^p sphere, and finishes with a nonlinear power iteration
/// f ← ψ_{p′}(∇) that is kept only while the ratio improves. The best run
/// wins, ties going to the lowest start index.
pub fn norm_lower_bound_ascent(
    op: &dyn SublinearOperator,
    p: Exponent,
    q: Exponent,
    cfg: &AscentConfig,
) -> Result<AscentResult> {
    if cfg.restarts == 0 || cfg.steps == 0 {
        return Err(Error::arg("restarts and steps must be positive"));
    }
    if p.is_infinite() {
        return Err(Error::pre("ascent requires p < inf"));
    }
    let nu = op.domain().weights().to_vec();
    let atoms: Vec<usize> = (0..nu.len()).filter(|&y| nu[y] > 0.0).collect();
    let duals = op.dual_rows();
    let fixed = atoms.len() + duals.len();
    let runs = fixed + cfg.restarts;
    let results = par::map_range(runs, |s| {
        if s < atoms.len() {
            let mut v = vec![Complex64::new(0.0, 0.0); nu.len()];
            v[atoms[s]] = Complex64::new(1.0, 0.0);
            ascend(op, p, q, cfg, &nu, v, cfg.steps)
        } else if s < fixed {
            let v = dual_power(&conj_all(duals[s - atoms.len()]), p.conjugate());
            ascend(op, p, q, cfg, &nu, v, 0)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream((s - fixed) as u64);
            let v = (0..nu.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            ascend(op, p, q, cfg, &nu, v, cfg.steps)
        }
    });
    let mut best: Option<(usize, f64, Vec<Complex64>)> = None;
    for (s, (r, f)) in results.into_iter().enumerate() {
        if best.as_ref().is_none_or(|(_, br, _)| r > *br) {
            best = Some((s, r, f));
        }
    }
    let (start, ratio, f) = best.expect("at least one run");
    Ok(AscentResult { ratio, witness: Signal::new(op.domain().clone(), f)?, start })
}

struct Objective<'a> {
    op: &'a dyn SublinearOperator,
    p: Exponent,
    q: Exponent,
    nu: &'a [f64],
    mu: &'a [f64],
}

impl Objective<'_> {
    fn ratio(&self, f: &[Complex64]) -> f64 {
        let denom = norm_of(f, self.nu, self.p);
        if denom == 0.0 {
            return 0.0;
        }
        let mut act = Vec::new();
        self.op.active(f, &mut act);
        let mags: Vec<f64> = act.iter().map(|(z, _)| z.norm()).collect();
        weighted_norm(&mags, self.mu, self.q) / denom
    }

    /// Direction of steepest increase of ‖Af‖_q in the coordinates f_y,
    /// without the ν_y factor (the ν-dual representative).
    fn dual_gradient(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut act = Vec::new();
        self.op.active(f, &mut act);
        let n = f.len();
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        let coeffs: Vec<f64> = if self.q.is_infinite() {
            let mut arg = None;
            let mut top = -1.0;
            for (x, (z, _)) in act.iter().enumerate() {
                if self.mu[x] > 0.0 && z.norm() > top {
                    top = z.norm();
                    arg = Some(x);
                }
            }
            (0..act.len()).map(|x| if Some(x) == arg { 1.0 } else { 0.0 }).collect()
        } else {
            let qv = self.q.value();
            act.iter()
                .zip(self.mu)
                .map(|((z, _), m)| {
                    let a = z.norm();
                    if a == 0.0 {
                        0.0
                    } else {
                        m * a.powf(qv - 1.0)
                    }
                })
                .collect()
        };
        for ((z, row), c) in act.iter().zip(&coeffs) {
            if *c == 0.0 || z.norm() == 0.0 {
                continue;
            }
            let phase = z / z.norm() * *c;
            for (gy, r) in g.iter_mut().zip(row.iter()) {
                *gy += phase * r.conj();
            }
        }
        g
    }
}

fn norm_of(f: &[Complex64], w: &[f64], p: Exponent) -> f64 {
    let mags: Vec<f64> = f.iter().map(|z| z.norm()).collect();
    weighted_norm(&mags, w, p)
}

fn normalize(f: &mut [Complex64], w: &[f64], p: Exponent) -> bool {
    let n = norm_of(f, w, p);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    for v in f.iter_mut() {
        *v /= n;
    }
    true
}

fn conj_all(row: &[Complex64]) -> Vec<Complex64> {
    row.iter().map(|z| z.conj()).collect()
}

/// ψ_{r}(g) = |g|^{r−1} g/|g| applied entrywise; r = ∞ keeps only the phase.
fn dual_power(g: &[Complex64], r: Exponent) -> Vec<Complex64> {
    let rv = r.value();
    g.iter()
        .map(|z| {
            let a = z.norm();
            if a == 0.0 {
                *z
            } else if rv.is_infinite() {
                z / a
            } else {
                z * a.powf(rv - 2.0)
            }
        })
        .collect()
}

fn ascend(
    op: &dyn SublinearOperator,
    p: Exponent,
    q: Exponent,
    cfg: &AscentConfig,
    nu: &[f64],
    mut f: Vec<Complex64>,
    steps: usize,
) -> (f64, Vec<Complex64>) {
    let mu = op.codomain().weights().to_vec();
    let obj = Objective { op, p, q, nu, mu: &mu };
    if !normalize(&mut f, nu, p) {
        return (0.0, f);
    }
    let mut best_r = obj.ratio(&f);
    let mut best_f = f.clone();
    for k in 1..=steps {
        // Euclidean gradient in the coordinates f_y carries the factor ν_y
        let g: Vec<Complex64> = obj.dual_gradient(&f).iter().zip(nu).map(|(g, w)| g * *w).collect();
        let gn = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if gn == 0.0 {
            break;
        }
        let fn2 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let step = cfg.step_scale / (k as f64).sqrt() * fn2 / gn;
        for (v, gy) in f.iter_mut().zip(&g) {
            *v += gy * step;
        }
        if !normalize(&mut f, nu, p) {
            break;
        }
        let r = obj.ratio(&f);
        if r > best_r {
            best_r = r;
            best_f.clone_from(&f);
        }
    }
    if p.value() > 1.0 {
        let mut cur = best_f.clone();
        for _ in 0..cfg.polish_iterations {
            let mut next = dual_power(&obj.dual_gradient(&cur), p.conjugate());
            if !normalize(&mut next, nu, p) {
                break;
            }
            let r = obj.ratio(&next);
            if r > best_r {
                best_r = r;
                best_f.clone_from(&next);
                cur = next;
            } else {
                break;
            }
        }
    }
    (best_r, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn conjugates() {
        assert_eq!(holder_conjugate(Exponent::TWO).value(), 2.0);
        assert!(holder_conjugate(Exponent::ONE).is_infinite());
        assert_eq!(holder_conjugate(Exponent::INFINITY).value(), 1.0);
        let p = Exponent::new(4.0 / 3.0).unwrap();
        assert!((p.conjugate().value() - 4.0).abs() < 1e-12);
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
    }

    #[test]
    fn norms_of_small_signals() {
        let s = Arc::new(WeightedSpace::uniform(2).unwrap());
        let zero = Signal::zeros(s.clone());
        assert_eq!(lp_norm(&zero, Exponent::new(3.0).unwrap()), 0.0);
        let ones = Signal::from_real(s.clone(), &[1.0, 1.0]).unwrap();
        assert!((lp_norm(&ones, Exponent::TWO) - 2f64.sqrt()).abs() < 1e-15);
        let f = Signal::from_real(s, &[3.0, 4.0]).unwrap();
        assert_eq!(lp_norm(&f, Exponent::INFINITY), 4.0);
    }

    #[test]
    fn zero_weight_atoms_are_ignored_by_sup() {
        let s = Arc::new(WeightedSpace::new(vec![1.0, 0.0]).unwrap());
        let f = Signal::from_real(s, &[1.0, 7.0]).unwrap();
        assert_eq!(lp_norm(&f, Exponent::INFINITY), 1.0);
        assert!(WeightedSpace::new(vec![0.0, 0.0]).is_err());
        assert!(WeightedSpace::new(vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn kernel_application() {
        let s2 = Arc::new(WeightedSpace::uniform(2).unwrap());
        let s1 = Arc::new(WeightedSpace::uniform(1).unwrap());
        let id = Kernel::from_real(s2.clone(), s2.clone(), &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let f = Signal::new(s2.clone(), vec![Complex64::new(1.0, 2.0), c(-3.0)]).unwrap();
        assert_eq!(apply_kernel(&id, &f).unwrap().values(), f.values());
        let row = Kernel::from_real(s2.clone(), s1.clone(), &[1.0, 1.0]).unwrap();
        let g = Signal::from_real(s2.clone(), &[3.0, -4.0]).unwrap();
        assert_eq!(apply_kernel(&row, &g).unwrap().values(), &[c(-1.0)]);
        let zero = Kernel::from_real(s2.clone(), s1.clone(), &[0.0, 0.0]).unwrap();
        assert_eq!(apply_kernel(&zero, &g).unwrap().values(), &[c(0.0)]);
        let s3 = Arc::new(WeightedSpace::uniform(3).unwrap());
        let h = Signal::zeros(s3);
        assert!(matches!(apply_kernel(&row, &h), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weights_enter_the_pairing() {
        let y = Arc::new(WeightedSpace::new(vec![0.5, 2.0]).unwrap());
        let x = Arc::new(WeightedSpace::uniform(1).unwrap());
        let k = Kernel::from_real(y.clone(), x, &[1.0, 1.0]).unwrap();
        let f = Signal::from_real(y, &[2.0, 1.0]).unwrap();
        assert_eq!(apply_kernel(&k, &f).unwrap().values(), &[c(3.0)]);
    }

    #[test]
    fn endpoint_norms() {
        let s2 = Arc::new(WeightedSpace::uniform(2).unwrap());
        let s1 = Arc::new(WeightedSpace::uniform(1).unwrap());
        let id = Kernel::from_real(s2.clone(), s2.clone(), &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(norm_exact_endpoint(&id, Exponent::ONE, Exponent::TWO).unwrap(), 1.0);
        let row = Kernel::from_real(s2.clone(), s1.clone(), &[1.0, 1.0]).unwrap();
        let v = norm_exact_endpoint(&row, Exponent::TWO, Exponent::INFINITY).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        let col = Kernel::from_real(s1, s2.clone(), &[1.0, 1.0]).unwrap();
        let v = norm_exact_endpoint(&col, Exponent::ONE, Exponent::TWO).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        assert!(norm_exact_endpoint(&id, Exponent::TWO, Exponent::TWO).is_err());
    }

    #[test]
    fn holder_bounds() {
        let s2 = Arc::new(WeightedSpace::uniform(2).unwrap());
        let s1 = Arc::new(WeightedSpace::uniform(1).unwrap());
        let id = Kernel::from_real(s2.clone(), s2.clone(), &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((holder_upper_bound(&id, Exponent::TWO, Exponent::TWO) - 2f64.sqrt()).abs() < 1e-15);
        let row = Kernel::from_real(s2.clone(), s1.clone(), &[1.0, -2.0]).unwrap();
        let p = Exponent::new(3.0).unwrap();
        assert_eq!(
            holder_upper_bound(&row, p, Exponent::INFINITY),
            norm_exact_endpoint(&row, p, Exponent::INFINITY).unwrap()
        );
        let zero = Kernel::from_real(s2, s1, &[0.0, 0.0]).unwrap();
        assert_eq!(holder_upper_bound(&zero, p, Exponent::TWO), 0.0);
    }

    #[test]
    fn ascent_on_simple_kernels() {
        let s2 = Arc::new(WeightedSpace::uniform(2).unwrap());
        let s1 = Arc::new(WeightedSpace::uniform(1).unwrap());
        let cfg = AscentConfig { seed: 3, ..Default::default() };
        let id = Kernel::from_real(s2.clone(), s2.clone(), &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = norm_lower_bound_ascent(&id, Exponent::TWO, Exponent::TWO, &cfg).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-9);
        assert!((lp_norm(&r.witness, Exponent::TWO) - 1.0).abs() < 1e-12);
        let row = Kernel::from_real(s2.clone(), s1, &[1.0, 1.0]).unwrap();
        let r = norm_lower_bound_ascent(&row, Exponent::TWO, Exponent::INFINITY, &cfg).unwrap();
        assert!((r.ratio - 2f64.sqrt()).abs() < 1e-6);
        let w = r.witness.values();
        assert!((w[0] - w[1]).norm() < 1e-6);
        let bad = AscentConfig { restarts: 0, ..cfg };
        assert!(norm_lower_bound_ascent(&row, Exponent::TWO, Exponent::TWO, &bad).is_err());
    }

    #[test]
    fn exponent_serde_roundtrip() {
        let p = Exponent::new(1.5).unwrap();
        let v: f64 = p.into();
        let back = Exponent::try_from(v).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.conjugate().value(), p.conjugate().value());
    }
}
