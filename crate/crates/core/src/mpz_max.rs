//! Maximal rectangular partial Fourier integrals of sampled signals.
//!
//! Transforms use (Ff)(ξ) = ∫ f(x) e^{−2πi x·ξ} dx, discretized as a Riemann
//! sum with weight Π h_j per sample. Arrays are row-major with the last axis
//! fastest.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::spaces::Exponent;

/// Tolerance for the closed truncation rectangle |x_j| ≤ R_j.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Default cap on tuple count × frequency grid size.
pub const DEFAULT_BUDGET: usize = 1 << 28;

/// A uniform tensor grid: coordinates origin_j + i·spacing_j, 0 ≤ i < shape_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() != spacing.len() || shape.len() != origin.len() {
            return Err(Error::arg("shape, spacing and origin must have the same nonzero length"));
        }
        if shape.contains(&0) {
            return Err(Error::arg("every axis needs at least one sample"));
        }
        if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::arg("spacing must be positive and origin finite"));
        }
        Ok(Self { shape, spacing, origin })
    }

    /// n samples per axis covering [−extent, extent) in every one of d axes.
    pub fn centered(d: usize, n: usize, extent: f64) -> Result<Self> {
        if !(extent > 0.0) {
            return Err(Error::arg("extent must be positive"));
        }
        Self::new(vec![n; d], vec![2.0 * extent / n as f64; d], vec![-extent; d])
    }

    /// The centered frequency grid matching an FFT of length
    /// `n.next_power_of_two()` per axis: spacing 1/(M·h), M bins.
    pub fn fft_dual(x: &Grid) -> Self {
        let (mut shape, mut spacing, mut origin) = (vec![], vec![], vec![]);
        for (&n, &h) in x.shape.iter().zip(&x.spacing) {
            let m = n.next_power_of_two();
            let dxi = 1.0 / (m as f64 * h);
            shape.push(m);
            spacing.push(dxi);
            origin.push(-((m / 2) as f64) * dxi);
        }
        Self { shape, spacing, origin }
    }

    /// Frequencies kΔ with Δ = 1/(M·h), M = `n.next_power_of_two()`, covering
    /// [−half_width, half_width) per axis. Refining the x grid at fixed extent
    /// keeps this grid unchanged.
    pub fn fitted_dual(x: &Grid, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::arg("half width must be positive"));
        }
        let (mut shape, mut spacing, mut origin) = (vec![], vec![], vec![]);
        for (&n, &h) in x.shape.iter().zip(&x.spacing) {
            let dxi = 1.0 / (n.next_power_of_two() as f64 * h);
            let k = (half_width / dxi).round().max(1.0) as usize;
            shape.push(2 * k);
            spacing.push(dxi);
            origin.push(-(k as f64) * dxi);
        }
        Self::new(shape, spacing, origin)
    }

    pub fn d(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight Π h_j of one sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    /// Coordinates of the sample at flat index `flat`.
    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.d()];
        for axis in (0..self.d()).rev() {
            let n = self.shape[axis];
            x[axis] = self.coord(axis, flat % n);
            flat /= n;
        }
        x
    }
}

/// Complex samples on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSignal {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridSignal {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("grid signal samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn sample(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// (Σ |f|^p Π h_j)^{1/p}, or max |f| for p = ∞.
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        real_lp_norm(self.values.iter().map(|v| v.norm()), self.grid.cell_volume(), p)
    }

    /// Multiplies by 1 on the closed rectangle |x_j| ≤ R_j and by 0 elsewhere.
    pub fn truncated(&self, radii: &[f64]) -> Result<Self> {
        check_radii(radii, self.grid.d())?;
        let mut out = self.clone();
        for (axis, &r) in radii.iter().enumerate() {
            mask_axis(&mut out.values, &self.grid, axis, r);
        }
        Ok(out)
    }
}

/// A nonnegative real field on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        real_lp_norm(self.values.iter().copied(), self.grid.cell_volume(), p)
    }
}

fn real_lp_norm(vals: impl Iterator<Item = f64>, w: f64, p: Exponent) -> f64 {
    if p.is_infinite() {
        return vals.fold(0.0, f64::max);
    }
    let p = p.value();
    let vals: Vec<f64> = vals.collect();
    let m = vals.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * (vals.iter().map(|v| (v / m).powf(p)).sum::<f64>() * w).powf(1.0 / p)
}

fn check_radii(radii: &[f64], d: usize) -> Result<()> {
    if radii.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: radii.len() });
    }
    if radii.iter().any(|r| !(*r > 0.0) || r.is_nan()) {
        return Err(Error::arg("radii must be positive"));
    }
    Ok(())
}

fn inside(x: f64, r: f64) -> bool {
    x.abs() <= r + BOUNDARY_TOL * r.max(1.0)
}

/// Zeroes samples with |x_axis| > r; the axis must still be in x space.
fn mask_axis(values: &mut [Complex64], grid: &Grid, axis: usize, r: f64) {
    let n = grid.shape[axis];
    let inner: usize = grid.shape[axis + 1..].iter().product();
    let keep: Vec<bool> = (0..n).map(|i| inside(grid.coord(axis, i), r)).collect();
    for (chunk_i, chunk) in values.chunks_mut(inner).enumerate() {
        if !keep[chunk_i % n] {
            chunk.fill(Complex64::new(0.0, 0.0));
        }
    }
}

enum Method {
    Fft { plan: Arc<dyn Fft<f64>>, m: usize, pre: Vec<Complex64> },
    Direct { matrix: Vec<Complex64> },
}

/// One-axis transform out[k] = Σ_n in[n] e^{−2πi x_n ξ_k} h.
struct AxisTransform {
    n: usize,
    k: usize,
    post: Vec<Complex64>,
    method: Method,
}

impl AxisTransform {
    fn new(n: usize, h: f64, x0: f64, k: usize, dxi: f64, xi0: f64, planner: &mut FftPlanner<f64>) -> Self {
        let xi = |j: usize| xi0 + j as f64 * dxi;
        let ratio = 1.0 / (h * dxi);
        let m = ratio.round();
        let fft_ok = (ratio - m).abs() <= 1e-9 * m && m >= n as f64 && m >= k as f64 && m <= 8.0 * n.max(k) as f64;
        if fft_ok {
            // x_n ξ_k = x0 ξ_k + n h ξ0 + n k / M
            let m = m as usize;
            let pre = (0..n).map(|i| Complex64::from_polar(1.0, -TAU * (i as f64 * h * xi0))).collect();
            let post = (0..k).map(|j| Complex64::from_polar(h, -TAU * x0 * xi(j))).collect();
            Self { n, k, post, method: Method::Fft { plan: planner.plan_fft_forward(m), m, pre } }
        } else {
            let mut matrix = Vec::with_capacity(n * k);
            for j in 0..k {
                for i in 0..n {
                    matrix.push(Complex64::from_polar(h, -TAU * (x0 + i as f64 * h) * xi(j)));
                }
            }
            Self { n, k, post: vec![], method: Method::Direct { matrix } }
        }
    }

    fn apply(&self, line: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        match &self.method {
            Method::Fft { plan, m, pre } => {
                scratch.clear();
                scratch.extend(line.iter().zip(pre).map(|(a, b)| a * b));
                scratch.resize(*m, Complex64::new(0.0, 0.0));
                plan.process(scratch);
                // bins for ξ_k = ξ0 + kΔ sit at index k since ξ0 is in the pre-twiddle
                for j in 0..self.k {
                    out[j] = scratch[j] * self.post[j];
                }
            }
            Method::Direct { matrix } => {
                for (j, o) in out.iter_mut().enumerate().take(self.k) {
                    let row = &matrix[j * self.n..(j + 1) * self.n];
                    *o = row.iter().zip(line).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b);
                }
            }
        }
    }

    fn uses_fft(&self) -> bool {
        matches!(self.method, Method::Fft { .. })
    }
}

/// Per-axis transforms from an x grid to a ξ grid.
struct Plan {
    axes: Vec<AxisTransform>,
}

impl Plan {
    fn new(x: &Grid, xi: &Grid) -> Result<Self> {
        if x.d() != xi.d() {
            return Err(Error::DimensionMismatch { expected: x.d(), found: xi.d() });
        }
        let mut planner = FftPlanner::new();
        let axes = (0..x.d())
            .map(|a| {
                AxisTransform::new(
                    x.shape[a],
                    x.spacing[a],
                    x.origin[a],
                    xi.shape[a],
                    xi.spacing[a],
                    xi.origin[a],
                    &mut planner,
                )
            })
            .collect();
        Ok(Self { axes })
    }

    /// Transforms `axis` of a row-major array whose current shape is `shape`.
    fn transform_axis(&self, values: &[Complex64], shape: &mut [usize], axis: usize) -> Vec<Complex64> {
        let t = &self.axes[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); outer * t.k * inner];
        let mut line = vec![Complex64::new(0.0, 0.0); t.n];
        let mut res = vec![Complex64::new(0.0, 0.0); t.k];
        let mut scratch = Vec::new();
        for o in 0..outer {
            let src = &values[o * t.n * inner..(o + 1) * t.n * inner];
            let dst = &mut out[o * t.k * inner..(o + 1) * t.k * inner];
            for i in 0..inner {
                for (n, l) in line.iter_mut().enumerate() {
                    *l = src[n * inner + i];
                }
                if line.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                    continue;
                }
                t.apply(&line, &mut res, &mut scratch);
                for (k, r) in res.iter().enumerate() {
                    dst[k * inner + i] = *r;
                }
            }
        }
        shape[axis] = t.k;
        out
    }

    fn transform_all(&self, values: &[Complex64], x: &Grid) -> Vec<Complex64> {
        let mut shape = x.shape.clone();
        let mut cur = values.to_vec();
        for axis in (0..x.d()).rev() {
            cur = self.transform_axis(&cur, &mut shape, axis);
        }
        cur
    }
}

/// Whether the transform to `xi` uses the FFT on every axis.
pub fn uses_fft(x: &Grid, xi: &Grid) -> Result<bool> {
    Ok(Plan::new(x, xi)?.axes.iter().all(AxisTransform::uses_fft))
}

/// Riemann-sum Fourier transform of `f` sampled on the frequency grid `xi`.
///
/// Uses an FFT with twiddle corrections on axes where h·Δξ = 1/M for an
/// integer M no smaller than the sample counts, and a direct DFT otherwise.
pub fn grid_fourier(f: &GridSignal, xi: &Grid) -> Result<GridSignal> {
    let plan = Plan::new(&f.grid, xi)?;
    let values = plan.transform_all(&f.values, &f.grid);
    GridSignal::new(xi.clone(), values)
}

/// Fourier transform of f·1_{[−R₁,R₁]×⋯×[−R_d,R_d]}, boundary samples included.
pub fn partial_ft(f: &GridSignal, radii: &[f64], xi: &Grid) -> Result<GridSignal> {
    grid_fourier(&f.truncated(radii)?, xi)
}

/// Per-axis strictly increasing positive truncation radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    radii: Vec<Vec<f64>>,
}

impl RGrid {
    pub fn new(radii: Vec<Vec<f64>>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| r.is_empty()) {
            return Err(Error::arg("every axis needs at least one radius"));
        }
        for r in &radii {
            if r.iter().any(|v| !(*v > 0.0 && v.is_finite())) || r.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::arg("radii must be positive, finite and strictly increasing"));
            }
        }
        Ok(Self { radii })
    }

    /// `count` dyadic radii r_min·2^i on each of d axes.
    pub fn dyadic(d: usize, r_min: f64, count: usize) -> Result<Self> {
        Self::new(vec![(0..count).map(|i| r_min * 2f64.powi(i as i32)).collect(); d])
    }

    pub fn d(&self) -> usize {
        self.radii.len()
    }

    pub fn axis(&self, j: usize) -> &[f64] {
        &self.radii[j]
    }

    pub fn tuple_count(&self) -> usize {
        self.radii.iter().map(Vec::len).product()
    }

    /// All tuples, last axis fastest.
    pub fn tuples(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![]];
        for axis in &self.radii {
            out = out
                .into_iter()
                .flat_map(|t: Vec<f64>| {
                    axis.iter().map(move |&r| {
                        let mut t = t.clone();
                        t.push(r);
                        t
                    })
                })
                .collect();
        }
        out
    }
}

fn max_into(acc: &mut [f64], vals: &[Complex64]) {
    for (a, v) in acc.iter_mut().zip(vals) {
        *a = a.max(v.norm());
    }
}

/// sup over all tuples of `rg` of |partial_ft(f, R)|, pointwise on `xi`.
///
/// Axes are masked and transformed from last to first, so tuples sharing
/// their trailing radii share that work. `budget` caps tuple count × |xi|.
pub fn mpz_maximal_field(f: &GridSignal, rg: &RGrid, xi: &Grid, budget: usize) -> Result<RealField> {
    let d = f.grid.d();
    if rg.d() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rg.d() });
    }
    let required = rg.tuple_count().saturating_mul(xi.len());
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let plan = Plan::new(&f.grid, xi)?;
    let last = d - 1;
    let top = rg.axis(last);
    let partial = par::map_slice(top, |&r| {
        let mut vals = f.values.clone();
        mask_axis(&mut vals, &f.grid, last, r);
        let mut shape = f.grid.shape.clone();
        let vals = plan.transform_axis(&vals, &mut shape, last);
        let mut acc = vec![0.0; xi.len()];
        descend(&plan, f, rg, vals, shape, last, &mut acc);
        acc
    });
    let mut values = vec![0.0f64; xi.len()];
    for p in partial {
        for (a, b) in values.iter_mut().zip(p) {
            *a = a.max(b);
        }
    }
    Ok(RealField { grid: xi.clone(), values })
}

fn descend(plan: &Plan, f: &GridSignal, rg: &RGrid, vals: Vec<Complex64>, shape: Vec<usize>, done: usize, acc: &mut [f64]) {
    if done == 0 {
        max_into(acc, &vals);
        return;
    }
    let axis = done - 1;
    for &r in rg.axis(axis) {
        let mut v = vals.clone();
        // axis is still in x space; the mask only reads its coordinates
        let mut view = f.grid.clone();
        view.shape = shape.clone();
        mask_axis(&mut v, &view, axis, r);
        let mut s = shape.clone();
        let next = plan.transform_axis(&v, &mut s, axis);
        descend(plan, f, rg, next, s, axis, acc);
    }
}

/// ‖mpz_maximal_field‖_{L^{p′}(xi)} / ‖f‖_{L^p} for 1 ≤ p < 2.
pub fn mpz_ratio(f: &GridSignal, p: Exponent, rg: &RGrid, xi: &Grid, budget: usize) -> Result<f64> {
    if !(p.value() >= 1.0 && p.value() < 2.0) {
        return Err(Error::pre("mpz ratio needs 1 <= p < 2"));
    }
    let den = f.lp_norm(p);
    if den == 0.0 {
        return Err(Error::pre("signal has zero L^p norm"));
    }
    let field = mpz_maximal_field(f, rg, xi, budget)?;
    Ok(field.lp_norm(p.conjugate()) / den)
}

/// Direct Riemann sum of F(f·1_R)(ξ) at one frequency; `None` means no truncation.
pub fn fourier_at(f: &GridSignal, xi: &[f64], radii: Option<&[f64]>) -> Result<Complex64> {
    let g = &f.grid;
    if xi.len() != g.d() {
        return Err(Error::DimensionMismatch { expected: g.d(), found: xi.len() });
    }
    if let Some(r) = radii {
        check_radii(r, g.d())?;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in f.values.iter().enumerate() {
        let x = g.point(i);
        if let Some(r) = radii {
            if !x.iter().zip(r).all(|(&a, &b)| inside(a, b)) {
                continue;
            }
        }
        let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        acc += v * Complex64::from_polar(1.0, -TAU * phase);
    }
    Ok(acc * g.cell_volume())
}

/// |F(f·1_R)(ξ) − Ff(ξ)| along a path of radius tuples nondecreasing in every coordinate.
pub fn convergence_profile(f: &GridSignal, xi: &[f64], path: &[Vec<f64>]) -> Result<Vec<f64>> {
    for w in path.windows(2) {
        if w[0].len() != w[1].len() || w[0].iter().zip(&w[1]).any(|(a, b)| b < a) {
            return Err(Error::pre("radius path must be nondecreasing in every coordinate"));
        }
    }
    let full = fourier_at(f, xi, None)?;
    let vals = par::try_map_range(path.len(), |i| fourier_at(f, xi, Some(&path[i])))?;
    Ok(vals.into_iter().map(|v| (v - full).norm()).collect())
}

/// A Gaussian wave packet a·e^{−π|x−c|²/s²}·e^{2πi ω·x}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    pub amplitude: Complex64,
    pub center: Vec<f64>,
    pub width: f64,
    pub frequency: Vec<f64>,
}

/// A finite sum of wave packets, evaluated exactly at any point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketSignal {
    pub packets: Vec<WavePacket>,
}

impl PacketSignal {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.packets
            .iter()
            .map(|p| {
                let r2: f64 = x.iter().zip(&p.center).map(|(a, c)| (a - c) * (a - c)).sum();
                let ph: f64 = x.iter().zip(&p.frequency).map(|(a, w)| a * w).sum();
                p.amplitude * (-std::f64::consts::PI * r2 / (p.width * p.width)).exp() * Complex64::from_polar(1.0, TAU * ph)
            })
            .sum()
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridSignal> {
        GridSignal::sample(grid.clone(), |x| self.eval(x))
    }
}

/// Parameters of random packet sums whose spectra concentrate in |ξ| ≲ max_frequency + 1/width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSpec {
    pub packets: usize,
    pub center_extent: f64,
    pub min_width: f64,
    pub max_width: f64,
    pub max_frequency: f64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self { packets: 3, center_extent: 1.5, min_width: 0.5, max_width: 1.0, max_frequency: 1.0 }
    }
}

pub fn random_packet_signal<R: Rng + ?Sized>(rng: &mut R, d: usize, spec: &PacketSpec) -> Result<PacketSignal> {
    if spec.packets == 0 || !(spec.min_width > 0.0 && spec.max_width >= spec.min_width) {
        return Err(Error::arg("packet spec needs at least one packet and 0 < min_width <= max_width"));
    }
    let packets = (0..spec.packets)
        .map(|_| WavePacket {
            amplitude: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            center: (0..d).map(|_| rng.gen_range(-spec.center_extent..=spec.center_extent)).collect(),
            width: rng.gen_range(spec.min_width..=spec.max_width),
            frequency: (0..d).map(|_| rng.gen_range(-spec.max_frequency..=spec.max_frequency)).collect(),
        })
        .collect();
    Ok(PacketSignal { packets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(d: usize, n: usize, extent: f64) -> GridSignal {
        let g = Grid::centered(d, n, extent).unwrap();
        GridSignal::sample(g, |x| {
            Complex64::new((-std::f64::consts::PI * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn gaussian_is_self_dual() {
        let f = gaussian(2, 64, 8.0);
        let xi = Grid::fft_dual(f.grid());
        assert!(uses_fft(f.grid(), &xi).unwrap());
        let ff = grid_fourier(&f, &xi).unwrap();
        let g1 = |k: f64| (-std::f64::consts::PI * k * k).exp();
        for (i, v) in ff.values().iter().enumerate() {
            let k = xi.point(i);
            // the Riemann sum is the periodization with period 1/h = 4
            let periodized: f64 = k.iter().map(|&t| (-3..=3).map(|m| g1(t + 4.0 * m as f64)).sum::<f64>()).product();
            assert!((v - periodized).norm() < 1e-12);
            if k.iter().all(|t| t.abs() <= 1.5) {
                assert!((v - g1(k[0]) * g1(k[1])).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap();
        let f = s.sample(&Grid::new(vec![12, 20], vec![0.4, 0.3], vec![-2.3, -3.1]).unwrap()).unwrap();
        let fast = Grid::fitted_dual(f.grid(), 1.0).unwrap();
        assert!(uses_fft(f.grid(), &fast).unwrap());
        let slow = Grid::new(fast.shape().to_vec(), vec![fast.spacing()[0] * (1.0 + 1e-7), fast.spacing()[1]], fast.origin().to_vec()).unwrap();
        assert!(!uses_fft(f.grid(), &slow).unwrap());
        let a = grid_fourier(&f, &fast).unwrap();
        for i in [0, 7, 31] {
            let direct = fourier_at(&f, &fast.point(i), None).unwrap();
            assert!((a.values()[i] - direct).norm() < 1e-12);
        }
        let b = grid_fourier(&f, &slow).unwrap();
        for i in [0, 5, 18] {
            let direct = fourier_at(&f, &slow.point(i), None).unwrap();
            assert!((b.values()[i] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_and_impulse() {
        let g = Grid::centered(1, 16, 2.0).unwrap();
        let xi = Grid::fft_dual(&g);
        let z = grid_fourier(&GridSignal::zeros(g.clone()), &xi).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
        let mut vals = vec![Complex64::new(0.0, 0.0); 16];
        vals[11] = Complex64::new(1.0 / 0.25, 0.0);
        let imp = grid_fourier(&GridSignal::new(g, vals).unwrap(), &xi).unwrap();
        assert!(imp.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn parseval_on_the_full_fft_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap();
        let f = s.sample(&Grid::centered(2, 32, 4.0).unwrap()).unwrap();
        let ff = grid_fourier(&f, &Grid::fft_dual(f.grid())).unwrap();
        assert!((ff.lp_norm(Exponent::TWO) - f.lp_norm(Exponent::TWO)).abs() < 1e-8);
    }

    #[test]
    fn truncated_box_matches_dirichlet_sum() {
        // 1_{[−1,1]} on step h = 1/64, truncated at R = 1/2: the closed
        // rectangle keeps 2m+1 samples, m = 32
        let g = Grid::new(vec![257], vec![1.0 / 64.0], vec![-2.0]).unwrap();
        let f = GridSignal::sample(g.clone(), |x| Complex64::new(if x[0].abs() <= 1.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let xi = Grid::new(vec![41], vec![0.1], vec![-2.0]).unwrap();
        let pf = partial_ft(&f, &[0.5], &xi).unwrap();
        let h = 1.0 / 64.0;
        for (i, v) in pf.values().iter().enumerate() {
            let k = xi.coord(0, i);
            let discrete = if k == 0.0 { 65.0 * h } else { h * (std::f64::consts::PI * 65.0 * h * k).sin() / (std::f64::consts::PI * h * k).sin() };
            assert!((v - discrete).norm() < 1e-12);
            let analytic = if k == 0.0 { 1.0 } else { (std::f64::consts::PI * k).sin() / (std::f64::consts::PI * k) };
            assert!((v - analytic).norm() < 2.0 * h);
        }
        let full = partial_ft(&f, &[10.0], &xi).unwrap();
        assert_eq!(full, grid_fourier(&f, &xi).unwrap());
        let tiny = partial_ft(&f, &[1e-3], &xi).unwrap();
        assert!(tiny.values().iter().all(|v| (v.norm() - h).abs() < 1e-15));
    }

    #[test]
    fn maximal_field_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap();
        let f = s.sample(&Grid::centered(2, 16, 4.0).unwrap()).unwrap();
        let xi = Grid::fitted_dual(f.grid(), 1.5).unwrap();
        let rg = RGrid::new(vec![vec![0.5, 1.0, 3.0], vec![0.25, 2.0]]).unwrap();
        let field = mpz_maximal_field(&f, &rg, &xi, DEFAULT_BUDGET).unwrap();
        let mut brute = vec![0.0f64; xi.len()];
        for t in rg.tuples() {
            let p = partial_ft(&f, &t, &xi).unwrap();
            for (b, v) in brute.iter_mut().zip(p.values()) {
                *b = b.max(v.norm());
            }
        }
        assert_eq!(field.values, brute);
        let one = RGrid::new(vec![vec![1.0], vec![2.0]]).unwrap();
        let single = mpz_maximal_field(&f, &one, &xi, DEFAULT_BUDGET).unwrap();
        let p = partial_ft(&f, &[1.0, 2.0], &xi).unwrap();
        assert!(single.values.iter().zip(p.values()).all(|(a, b)| *a == b.norm()));
        assert!(matches!(mpz_maximal_field(&f, &rg, &xi, 10), Err(Error::Budget { .. })));
    }

    #[test]
    fn ratio_endpoint_and_homogeneity() {
        let f = gaussian(2, 32, 4.0);
        let xi = Grid::fitted_dual(f.grid(), 2.0).unwrap();
        let rg = RGrid::dyadic(2, 0.5, 4).unwrap();
        let r1 = mpz_ratio(&f, Exponent::ONE, &rg, &xi, DEFAULT_BUDGET).unwrap();
        assert!(r1 <= 1.0 + 1e-12);
        let p = Exponent::new(4.0 / 3.0).unwrap();
        let a = mpz_ratio(&f, p, &rg, &xi, DEFAULT_BUDGET).unwrap();
        let scaled = GridSignal::new(f.grid().clone(), f.values().iter().map(|v| v * Complex64::new(0.0, -3.5)).collect()).unwrap();
        let b = mpz_ratio(&scaled, p, &rg, &xi, DEFAULT_BUDGET).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert!(mpz_ratio(&f, Exponent::TWO, &rg, &xi, DEFAULT_BUDGET).is_err());
        assert!(mpz_ratio(&GridSignal::zeros(f.grid().clone()), p, &rg, &xi, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn convergence_profiles() {
        let f = gaussian(2, 64, 8.0);
        let path: Vec<Vec<f64>> = (1..=8).map(|i| { let t = 0.5 * i as f64; vec![t, t * t] }).collect();
        let errs = convergence_profile(&f, &[0.3, -0.2], &path).unwrap();
        assert!(errs.last().unwrap() < &1e-6);
        let flat = convergence_profile(&f, &[0.3, -0.2], &[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(flat[0], flat[1]);
        assert!(convergence_profile(&f, &[0.0, 0.0], &[vec![1.0, 1.0], vec![0.5, 2.0]]).is_err());
    }

    #[test]
    fn rgrid_validation() {
        assert!(RGrid::new(vec![vec![1.0, 1.0]]).is_err());
        assert!(RGrid::new(vec![vec![0.0, 1.0]]).is_err());
        assert!(RGrid::new(vec![]).is_err());
        let rg = RGrid::new(vec![vec![1.0, 2.0], vec![3.0]]).unwrap();
        assert_eq!(rg.tuples(), vec![vec![1.0, 3.0], vec![2.0, 3.0]]);
    }
}
