use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::special::{si, si_diff, sinc_unnormalized};
use super::QuadratureConfig;
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{gl15, integrate_panels, uniform_breakpoints, Integral};

/// Below this distance from the origin the odd difference quotient is frozen.
const QUOTIENT_SWITCH: f64 = 1e-4;
/// Beyond this argument ∫ Si(u)/u du is continued by its asymptotic tail.
const SI_TAIL_START: f64 = 2000.0;

/// A principal-value integral with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl From<Integral<Complex64>> for PvResult {
    fn from(r: Integral<Complex64>) -> Self {
        PvResult { value: r.value, abs_error_estimate: r.abs_error, evaluations: r.evaluations }
    }
}

/// p.v.∫_{−1}^{1} h(y)/y dy = ∫₀¹ (h(y) − h(−y))/y dy.
///
/// The quotient is even in y, so on [0, τ] with τ = 1e−4 it is replaced by
/// a + b·y² fitted to the central differences at τ and τ/2.
pub fn pv_odd_singular<F>(h: F, cfg: &QuadratureConfig) -> Result<PvResult>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    cfg.validate()?;
    let tau = QUOTIENT_SWITCH;
    let q_outer = (h(tau) - h(-tau)) / tau;
    let q_inner = (h(0.5 * tau) - h(-0.5 * tau)) / (0.5 * tau);
    if ![q_outer, q_inner].iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("pv_odd_singular sample".into()));
    }
    let b = (q_outer - q_inner) / (0.75 * tau * tau);
    let a = q_outer - b * (tau * tau);
    let near = a * tau + b * (tau * tau * tau / 3.0);
    let bp = uniform_breakpoints(tau, 1.0, 1.0 / 32.0);
    let r = integrate_panels(|y: f64| (h(y) - h(-y)) / y, &bp, cfg.control(), "pv_odd_singular")?;
    Ok(PvResult { value: r.value + near, abs_error_estimate: r.abs_error, evaluations: r.evaluations + 4 })
}

/// ∫₀^A Si(u)/u du for A ≥ 0, with the closed asymptotic tail past 2000.
pub fn si_over_u_integral(a: f64, cfg: &QuadratureConfig) -> Result<(f64, f64, usize)> {
    if !(a >= 0.0) {
        return Err(Error::arg("upper limit must be nonnegative"));
    }
    let top = a.min(SI_TAIL_START);
    let width = cfg.panel_width(1.0 / TAU).min(2.0);
    let bp = uniform_breakpoints(0.0, top, width);
    let r = integrate_panels(|u: f64| if u == 0.0 { 1.0 } else { si(u) / u }, &bp, cfg.control(), "si_over_u")?;
    let mut value = r.value;
    if a > SI_TAIL_START {
        // Si(u) = π/2 − f cos u − g sin u; integrating the leading terms by parts
        let edge = |u: f64| u.sin() / (u * u) - 3.0 * u.cos() / (u * u * u);
        value += 0.5 * PI * (a / SI_TAIL_START).ln() - (edge(a) - edge(SI_TAIL_START));
    }
    Ok((value, r.abs_error, r.evaluations.max(1)))
}

/// p.v.∫∫_{[−1,1]²} e^{2πi(Λxy + Ux + Vy)} / (xy) dx dy for Λ ≥ 0.
///
/// The inner integral is 2i·Si(2π(Λy + U)); the outer integrand is folded to
/// (0, 1] where it is regular.
pub fn pv_bilinear(lam: f64, u: f64, v: f64, cfg: &QuadratureConfig) -> Result<PvResult> {
    cfg.validate()?;
    if !(lam >= 0.0 && lam.is_finite() && u.is_finite() && v.is_finite()) {
        return Err(Error::arg("pv_bilinear needs finite Λ ≥ 0, U, V"));
    }
    if u == 0.0 && v == 0.0 {
        let (j, err, evals) = si_over_u_integral(TAU * lam, cfg)?;
        return Ok(PvResult {
            value: Complex64::new(0.0, 4.0 * j),
            abs_error_estimate: 4.0 * err,
            evaluations: evals,
        });
    }
    let omega = TAU * v;
    let q = move |y: f64| -> Complex64 {
        let a = TAU * (u + lam * y);
        let b = TAU * (u - lam * y);
        let d_over_y = if lam == 0.0 { 0.0 } else { si_diff(b, a) / y };
        let s = si(a) + si(b);
        let cos_part = Complex64::new(0.0, 2.0 * (omega * y).cos() * d_over_y);
        let sin_part = 2.0 * omega * sinc_unnormalized(omega * y) * s;
        cos_part - sin_part
    };
    let rate = lam + v.abs();
    let width = cfg.panel_width(rate).min(1.0 / 16.0);
    let bp = uniform_breakpoints(0.0, 1.0, width);
    let r = integrate_panels(q, &bp, cfg.control(), "pv_bilinear")?;
    Ok(r.into())
}

/// p.v.∫∫_{[−1,1]²} e^{2πiλ(x₁x₂ + c₁x₁ + c₂x₂)} / (x₁x₂) dx₁ dx₂.
pub fn pv_product_phase(lambda: f64, c1: f64, c2: f64, cfg: &QuadratureConfig) -> Result<PvResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg("lambda must be positive and finite"));
    }
    pv_bilinear(lambda, lambda * c1, lambda * c2, cfg)
}

/// Direct tensor-product evaluation of [`pv_product_phase`] for small λ.
///
/// The four quadrants are folded onto [0,1]² where the signed sum
/// Σ ε₁ε₂ φ(ε₁x, ε₂y)/(xy) is bounded; `panels` GL15 panels per axis.
pub fn pv_product_phase_tensor(lambda: f64, c1: f64, c2: f64, panels: usize) -> Complex64 {
    let rule = gl15();
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|i| rule.mapped(i as f64 / panels as f64, (i + 1) as f64 / panels as f64).collect::<Vec<_>>())
        .collect();
    let theta = TAU * lambda;
    let phase = |x: f64, y: f64| Complex64::from_polar(1.0, theta * (x * y + c1 * x + c2 * y));
    let rows = par::map_slice(&nodes, |&(x, wx)| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(y, wy) in &nodes {
            let s = phase(x, y) - phase(-x, y) - phase(x, -y) + phase(-x, -y);
            acc += s * (wy / (x * y));
        }
        acc * wx
    });
    rows.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Least-squares fit of magnitude = slope·ln λ + intercept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn log_growth_fit(pairs: &[(f64, f64)]) -> Result<LogFit> {
    if pairs.len() < 3 {
        return Err(Error::arg("log fit needs at least three points"));
    }
    for w in pairs.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::arg("lambda values must be strictly increasing"));
        }
    }
    if pairs.iter().any(|(l, m)| !(*l > 0.0) || !l.is_finite() || !m.is_finite()) {
        return Err(Error::arg("lambda must be positive and magnitudes finite"));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(l, _)| l.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = pairs.iter().map(|(_, m)| m).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(pairs).map(|(x, (_, m))| (x - mx) * (m - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::arg("degenerate lambda values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(pairs)
        .map(|(x, (_, m))| (m - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(LogFit { slope, intercept, max_residual })
}
