//! Mollified multi-parameter maximal restriction to a sampled parabola,
//! ellipsoid averages, and the quadrant expansion of a dilated mollifier.
//!
//! The mollifier is the normalized Gaussian χ(x) = e^{−π|x|²}, so that
//! χ̂ = χ̌ = χ and the dilate χ_r(x) = χ(x₁/r₁, …)/(r₁⋯r_d) has transform
//! e^{−π Σ r_j² ξ_j²}.

use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpz_max::{fourier_at, grid_fourier, Grid, GridSignal, RGrid};
use crate::oscillatory::{log_growth_fit, LogFit};
use crate::par;
use crate::quadrature::{integrate_panels, uniform_breakpoints, AdaptiveControl};
use crate::spaces::Exponent;

/// Points (u, u²) of a parabola arc with trapezoid weights for dσ = du.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSurface {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl SampledSurface {
    pub fn new(points: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::arg("surface needs matching nonempty points and weights"));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::arg("surface weights must be positive"));
        }
        for (i, a) in points.iter().enumerate() {
            if points[..i].contains(a) {
                return Err(Error::arg("surface points must be distinct"));
            }
        }
        Ok(Self { points, weights })
    }

    /// `n` uniform samples of u ∈ [−1, 1].
    pub fn parabola(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg("parabola needs at least two samples"));
        }
        let du = 2.0 / (n - 1) as f64;
        let points = (0..n)
            .map(|i| {
                let u = -1.0 + i as f64 * du;
                [u, u * u]
            })
            .collect();
        let weights = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * du } else { du }).collect();
        Self::new(points, weights)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierKind {
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MollifierSpec {
    pub kind: MollifierKind,
    /// Decay margin δ in |∂₁⋯∂_d χ̂(x)| ≲ (1+|x|)^{−d−δ}.
    pub delta: f64,
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self { kind: MollifierKind::Gaussian, delta: 1.0 }
    }
}

impl MollifierSpec {
    pub fn chi(&self, x: &[f64]) -> f64 {
        match self.kind {
            MollifierKind::Gaussian => (-PI * x.iter().map(|v| v * v).sum::<f64>()).exp(),
        }
    }

    /// χ̂ (equal to χ̌ and χ for the Gaussian).
    pub fn chi_hat(&self, x: &[f64]) -> f64 {
        self.chi(x)
    }

    /// ∂₁⋯∂_d χ̂(x).
    pub fn mixed_derivative(&self, x: &[f64]) -> f64 {
        match self.kind {
            MollifierKind::Gaussian => x.iter().map(|&t| -TAU * t * (-PI * t * t).exp()).product(),
        }
    }

    /// One-axis factor of the transform of χ_r at x: e^{−π r² x²}.
    fn dilated_hat_factor(&self, r: f64, x: f64) -> f64 {
        match self.kind {
            MollifierKind::Gaussian => (-PI * r * r * x * x).exp(),
        }
    }
}

/// sup over sampled x ∈ [−extent, extent]^d of |∂₁⋯∂_d χ̂(x)|·(1+|x|)^{d+δ}.
pub fn mollifier_admissibility(spec: &MollifierSpec, d: usize, extent: f64, samples: usize) -> Result<f64> {
    if d == 0 || samples < 2 {
        return Err(Error::arg("need d >= 1 and at least two samples per axis"));
    }
    let grid = Grid::new(vec![samples; d], vec![2.0 * extent / (samples - 1) as f64; d], vec![-extent; d])?;
    Ok((0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            spec.mixed_derivative(&x).abs() * (1.0 + norm).powf(d as f64 + spec.delta)
        })
        .fold(0.0, f64::max))
}

/// χ_r(x) = χ(x₁/r₁, …, x_d/r_d)/(r₁⋯r_d).
pub fn dilate_mollifier(spec: &MollifierSpec, r: &[f64], x: &[f64]) -> Result<f64> {
    check_tuple(r, x.len())?;
    let y: Vec<f64> = x.iter().zip(r).map(|(a, b)| a / b).collect();
    Ok(spec.chi(&y) / r.iter().product::<f64>())
}

fn check_tuple(r: &[f64], d: usize) -> Result<()> {
    if r.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: r.len() });
    }
    if r.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::arg("dilation parameters must be positive and finite"));
    }
    Ok(())
}

/// Per-axis increasing dilation parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationGrid(RGrid);

impl DilationGrid {
    pub fn new(radii: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Self(RGrid::new(radii)?))
    }

    pub fn dyadic(d: usize, r_min: f64, count: usize) -> Result<Self> {
        Ok(Self(RGrid::dyadic(d, r_min, count)?))
    }

    pub fn d(&self) -> usize {
        self.0.d()
    }

    pub fn axis(&self, j: usize) -> &[f64] {
        self.0.axis(j)
    }

    pub fn tuple_count(&self) -> usize {
        self.0.tuple_count()
    }

    pub fn tuples(&self) -> Vec<Vec<f64>> {
        self.0.tuples()
    }
}

/// Both sides of χ̌(r₁x₁, …) = Π_j(−ε_j) ∫_{Q(ε), |t_j| ≥ r_j|x_j|} ∂₁⋯∂_d χ̌(t) dt,
/// ε the sign pattern of x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub evaluations: usize,
}

/// Truncation length beyond which the Gaussian mixed derivative is below 1e−150.
const GAUSSIAN_TAIL: f64 = 11.0;

/// Quadrant expansion residual, the right side by nested adaptive quadrature.
pub fn quadrant_identity_check(spec: &MollifierSpec, r: &[f64], x: &[f64]) -> Result<QuadrantCheck> {
    let d = x.len();
    check_tuple(r, d)?;
    if !(1..=3).contains(&d) {
        return Err(Error::arg("quadrant identity is evaluated for 1 <= d <= 3"));
    }
    if x.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::pre("point must lie off the coordinate axes"));
    }
    let y: Vec<f64> = x.iter().zip(r).map(|(a, b)| a * b).collect();
    let lhs = spec.chi_hat(&y);
    let sign: f64 = y.iter().map(|v| -v.signum()).product();
    let ctl = AdaptiveControl { abs_tol: 1e-13, max_subdivisions: 100_000, max_depth: 30 };
    let evals = AtomicUsize::new(0);
    let rhs = sign * nested(spec, &y, &[], ctl, &evals)?;
    Ok(QuadrantCheck { lhs, rhs, residual: (lhs - rhs).abs(), evaluations: evals.into_inner() })
}

/// ∫ over {ε_j t_j ≥ |y_j|, j ≥ axis} of the mixed derivative, earlier axes fixed in `prefix`.
fn nested(spec: &MollifierSpec, y: &[f64], prefix: &[f64], ctl: AdaptiveControl, evals: &AtomicUsize) -> Result<f64> {
    let axis = prefix.len();
    if axis == y.len() {
        evals.fetch_add(1, Ordering::Relaxed);
        return Ok(spec.mixed_derivative(prefix));
    }
    let a = y[axis].abs();
    let s = y[axis].signum();
    let bp = uniform_breakpoints(a, a + GAUSSIAN_TAIL, 1.0);
    let f = |u: f64| -> f64 {
        let mut t = prefix.to_vec();
        t.push(s * u);
        nested(spec, y, &t, ctl, evals).unwrap_or(f64::NAN)
    };
    Ok(integrate_panels(f, &bp, ctl, "quadrant integral")?.value)
}

/// Contracts the last axis of a row-major array with `w`.
fn contract_last(vals: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
    vals.chunks(w.len())
        .map(|row| row.iter().zip(w).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
        .collect()
}

/// Per-axis, per-radius weights h·e^{−π r² x²} on the signal grid.
fn dilation_weights(spec: &MollifierSpec, g: &Grid, dg: &DilationGrid) -> Vec<Vec<Vec<f64>>> {
    (0..g.d())
        .map(|axis| {
            dg.axis(axis)
                .iter()
                .map(|&r| {
                    (0..g.shape()[axis])
                        .map(|i| g.spacing()[axis] * spec.dilated_hat_factor(r, g.coord(axis, i)))
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn max_over_tuples(vals: &[Complex64], phases: &[Vec<Complex64>], weights: &[Vec<Vec<f64>>], axis_count: usize) -> f64 {
    if axis_count == 0 {
        return vals[0].norm();
    }
    let axis = axis_count - 1;
    weights[axis]
        .iter()
        .map(|wr| {
            let w: Vec<Complex64> = wr.iter().zip(&phases[axis]).map(|(a, p)| p * *a).collect();
            let next = contract_last(vals, &w);
            max_over_tuples(&next, phases, weights, axis)
        })
        .fold(0.0, f64::max)
}

/// Mollified transform (f̂ ∗ χ_r)(ξ) = Σ_x f(x) e^{−π Σ r_j² x_j²} e^{−2πi x·ξ} Π h_j,
/// exact for the Riemann-sum f̂ at every ξ and every r.
pub fn mollified_transform(f: &GridSignal, spec: &MollifierSpec, r: &[f64], xi: &[f64]) -> Result<Complex64> {
    let g = f.grid();
    check_tuple(r, g.d())?;
    if xi.len() != g.d() {
        return Err(Error::DimensionMismatch { expected: g.d(), found: xi.len() });
    }
    let dg = DilationGrid::new(r.iter().map(|v| vec![*v]).collect())?;
    let weights = dilation_weights(spec, g, &dg);
    let phases = axis_phases(g, xi);
    let mut vals = f.values().to_vec();
    for axis in (0..g.d()).rev() {
        let w: Vec<Complex64> = weights[axis][0].iter().zip(&phases[axis]).map(|(a, p)| p * *a).collect();
        vals = contract_last(&vals, &w);
    }
    Ok(vals[0])
}

fn axis_phases(g: &Grid, xi: &[f64]) -> Vec<Vec<Complex64>> {
    (0..g.d())
        .map(|axis| (0..g.shape()[axis]).map(|i| Complex64::from_polar(1.0, -TAU * g.coord(axis, i) * xi[axis])).collect())
        .collect()
}

/// (f̂ ∗ χ_r)(ξ) by direct quadrature of a sampled f̂ on its grid.
pub fn mollified_on_grid(fhat: &GridSignal, spec: &MollifierSpec, r: &[f64], xi: &[f64]) -> Result<Complex64> {
    let g = fhat.grid();
    check_tuple(r, g.d())?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut diff = vec![0.0; g.d()];
    for (i, v) in fhat.values().iter().enumerate() {
        let eta = g.point(i);
        for j in 0..g.d() {
            diff[j] = xi[j] - eta[j];
        }
        acc += v * dilate_mollifier(spec, r, &diff)?;
    }
    Ok(acc * g.cell_volume())
}

/// max over the tuples of `dg` of |(f̂ ∗ χ_r)(ξ)| at each surface point.
/// `budget` caps tuple count × surface size.
pub fn maximal_restriction_field(
    f: &GridSignal,
    surf: &SampledSurface,
    spec: &MollifierSpec,
    dg: &DilationGrid,
    budget: usize,
) -> Result<Vec<f64>> {
    let g = f.grid();
    if g.d() != 2 || dg.d() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: if g.d() != 2 { g.d() } else { dg.d() } });
    }
    let required = dg.tuple_count().saturating_mul(surf.len());
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let weights = dilation_weights(spec, g, dg);
    Ok(par::map_slice(surf.points(), |xi| {
        let phases = axis_phases(g, xi);
        max_over_tuples(f.values(), &phases, &weights, g.d())
    }))
}

/// ‖maximal field‖_{L^q(σ)} / ‖f‖_{L^p}.
pub fn restriction_ratio(
    f: &GridSignal,
    surf: &SampledSurface,
    spec: &MollifierSpec,
    dg: &DilationGrid,
    p: Exponent,
    q: Exponent,
    budget: usize,
) -> Result<f64> {
    let den = f.lp_norm(p);
    if den == 0.0 {
        return Err(Error::pre("signal has zero L^p norm"));
    }
    let field = maximal_restriction_field(f, surf, spec, dg, budget)?;
    let num = if q.is_infinite() {
        field.iter().copied().fold(0.0, f64::max)
    } else {
        let q = q.value();
        field.iter().zip(surf.weights()).map(|(v, w)| v.powf(q) * w).sum::<f64>().powf(1.0 / q)
    };
    Ok(num / den)
}

/// Mean of `fhat` over grid samples whose centers lie in the ellipsoid
/// Σ ((η_j − ξ_j)/r_j)² ≤ 1.
pub fn ellipsoid_average(fhat: &GridSignal, xi: &[f64], r: &[f64]) -> Result<Complex64> {
    let g = fhat.grid();
    check_tuple(r, g.d())?;
    if xi.len() != g.d() {
        return Err(Error::DimensionMismatch { expected: g.d(), found: xi.len() });
    }
    for j in 0..g.d() {
        let lo = g.origin()[j];
        let hi = g.coord(j, g.shape()[j] - 1);
        let slack = (0.5 + 1e-9) * g.spacing()[j];
        if xi[j] - r[j] < lo - slack || xi[j] + r[j] > hi + slack {
            return Err(Error::pre("ellipsoid leaves the grid"));
        }
    }
    let unit_ball = match g.d() {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        d => PI.powf(d as f64 / 2.0) / gamma_half_int(d + 2),
    };
    if unit_ball * r.iter().product::<f64>() < g.cell_volume() {
        return Err(Error::pre("ellipsoid smaller than one grid cell"));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for (i, v) in fhat.values().iter().enumerate() {
        let eta = g.point(i);
        let s: f64 = eta.iter().zip(xi).zip(r).map(|((e, c), rr)| ((e - c) / rr).powi(2)).sum();
        if s <= 1.0 {
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::pre("no grid sample inside the ellipsoid"));
    }
    Ok(sum / count as f64)
}

/// Γ(k/2) for integer k ≥ 1.
fn gamma_half_int(k: usize) -> f64 {
    match k {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half_int(k - 2),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueRow {
    pub radii: Vec<f64>,
    pub max_radius: f64,
    pub deviation: f64,
}

/// Cells per axis of the local f̂ grid used for each ellipsoid.
pub const LOCAL_CELLS: usize = 48;

/// (1/|B_r|)∫_{B_r(ξ)} |f̂(η) − f̂(ξ)| dη along a path shrinking in every coordinate.
///
/// f̂ is the Riemann-sum transform of `f`, sampled on a cell-centered local
/// grid of `LOCAL_CELLS` per axis spanning the bounding box of each ellipsoid.
pub fn lebesgue_point_profile(f: &GridSignal, xi: &[f64], path: &[Vec<f64>]) -> Result<Vec<LebesgueRow>> {
    let d = f.grid().d();
    for r in path {
        check_tuple(r, d)?;
    }
    if path.windows(2).any(|w| w[0].iter().zip(&w[1]).any(|(a, b)| !(b < a))) {
        return Err(Error::pre("radius path must shrink in every coordinate"));
    }
    let center = fourier_at(f, xi, None)?;
    par::try_map_range(path.len(), |k| {
        let r = &path[k];
        let n = LOCAL_CELLS;
        let spacing: Vec<f64> = r.iter().map(|v| 2.0 * v / n as f64).collect();
        let origin: Vec<f64> = xi.iter().zip(r).zip(&spacing).map(|((c, v), h)| c - v + 0.5 * h).collect();
        let local = Grid::new(vec![n; d], spacing, origin)?;
        let fhat = grid_fourier(f, &local)?;
        let dev: Vec<Complex64> = fhat.values().iter().map(|v| Complex64::new((v - center).norm(), 0.0)).collect();
        let dev = GridSignal::new(local, dev)?;
        let avg = ellipsoid_average(&dev, xi, r)?;
        Ok(LebesgueRow { radii: r.clone(), max_radius: r.iter().copied().fold(0.0, f64::max), deviation: avg.re })
    })
}

/// Slack on a fitted first-order rate: smooth data approach order 1 from below.
pub const LEBESGUE_ORDER_TOL: f64 = 1e-3;

/// Least-squares slope of ln(deviation) against ln(max r_j); rows with zero deviation are skipped.
pub fn lebesgue_order(rows: &[LebesgueRow]) -> Result<LogFit> {
    let mut pairs: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.deviation > 0.0).map(|r| (r.max_radius, r.deviation.ln())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    log_growth_fit(&pairs)
}
