//! p.v.∫∫_B e^{2πi(Λxy + Ux + Vy)} / (xy) dx dy over an axis-parallel box B.
//!
//! Each axis interval splits into a symmetric core [−w, w] around 0 and
//! regular pieces away from 0. The core×core part is a rescaled
//! [`pv_bilinear`]; a core factor collapses to 2i·Si(·); on
//! regular×regular the inner integral is the closed form
//! ∫_a^b e^{ikx}/x dx, leaving one-dimensional outer quadratures.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EvalPath, FeffermanConfig, PathChoice};
use crate::error::{Error, Result};
use crate::oscillatory::special::{exp_over_x, si};
use crate::oscillatory::{pv_bilinear, QuadratureConfig};
use crate::quadrature::{graded_breakpoints, integrate_panels};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct AxisSplit {
    pub core: Option<f64>,
    pub regular: Vec<(f64, f64)>,
}

pub(crate) fn split_axis(a: f64, b: f64) -> Result<AxisSplit> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::arg("box sides must be finite, nonempty intervals"));
    }
    if a == 0.0 || b == 0.0 {
        return Err(Error::pre("singular point on the box boundary"));
    }
    if a > 0.0 || b < 0.0 {
        return Ok(AxisSplit { core: None, regular: vec![(a, b)] });
    }
    let w = 1f64.min(-a).min(b);
    let mut regular = Vec::new();
    if a < -w {
        regular.push((a, -w));
    }
    if b > w {
        regular.push((w, b));
    }
    Ok(AxisSplit { core: Some(w), regular })
}

/// Region-wise contributions of a box integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionValues {
    pub core: Complex64,
    pub core_x_regular_y: Complex64,
    pub regular_x_core_y: Complex64,
    pub regular_regular: Complex64,
}

impl RegionValues {
    pub fn total(&self) -> Complex64 {
        self.core + self.core_x_regular_y + self.regular_x_core_y + self.regular_regular
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct BoxIntegral {
    pub regions: RegionValues,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub path: EvalPath,
}

#[derive(Clone, Copy)]
pub(crate) struct Phase {
    pub lam: f64,
    pub u: f64,
    pub v: f64,
}

pub(crate) fn box_integral(
    ph: Phase,
    bx: (f64, f64),
    by: (f64, f64),
    cfg: &FeffermanConfig,
) -> Result<BoxIntegral> {
    cfg.quad.validate()?;
    if !(ph.lam >= 0.0) || !ph.lam.is_finite() || !ph.u.is_finite() || !ph.v.is_finite() {
        return Err(Error::arg("phase coefficients must be finite with Λ ≥ 0"));
    }
    let sx = split_axis(bx.0, bx.1)?;
    let sy = split_axis(by.0, by.1)?;
    let path = match cfg.path {
        PathChoice::Quadrature => EvalPath::Quadrature,
        PathChoice::Asymptotic => EvalPath::Asymptotic,
        PathChoice::Auto => {
            if estimated_panels(ph, &sx, &sy, &cfg.quad) <= cfg.panel_budget as f64 {
                EvalPath::Quadrature
            } else {
                EvalPath::Asymptotic
            }
        }
    };
    match path {
        EvalPath::Quadrature => quadrature_path(ph, &sx, &sy, &cfg.quad),
        EvalPath::Asymptotic => asymptotic_path(ph, &sx, &sy, cfg),
    }
}

fn estimated_panels(ph: Phase, sx: &AxisSplit, sy: &AxisSplit, q: &QuadratureConfig) -> f64 {
    let per = |len: f64, rate: f64| len / q.panel_width(rate).min(0.25);
    let mut total = 0.0;
    if let (Some(w1), Some(w2)) = (sx.core, sy.core) {
        if ph.u != 0.0 || ph.v != 0.0 {
            total += per(1.0, ph.lam * w1 * w2 + (ph.v * w2).abs());
        }
    }
    if let Some(w1) = sx.core {
        for &(c, d) in &sy.regular {
            total += per(d - c, w1 * ph.lam + ph.v.abs());
        }
    }
    if let Some(w2) = sy.core {
        for &(a, b) in &sx.regular {
            total += per(b - a, w2 * ph.lam + ph.u.abs());
        }
    }
    for &(a, b) in &sx.regular {
        let m = a.abs().max(b.abs());
        for &(c, d) in &sy.regular {
            total += per(d - c, ph.lam * m + ph.v.abs());
        }
    }
    total
}

struct Acc {
    err: f64,
    evals: usize,
}

fn quadrature_path(ph: Phase, sx: &AxisSplit, sy: &AxisSplit, q: &QuadratureConfig) -> Result<BoxIntegral> {
    let mut r = RegionValues::default();
    let mut acc = Acc { err: 0.0, evals: 0 };
    if let (Some(w1), Some(w2)) = (sx.core, sy.core) {
        let c = core_exact_or_quadrature(ph, w1, w2, q)?;
        r.core = c.0;
        acc.err += c.1;
        acc.evals += c.2;
    }
    if let Some(w1) = sx.core {
        for &(c, d) in &sy.regular {
            r.core_x_regular_y += strip_quadrature(ph.lam, ph.u, ph.v, w1, (c, d), q, &mut acc)?;
        }
    }
    if let Some(w2) = sy.core {
        for &(a, b) in &sx.regular {
            r.regular_x_core_y += strip_quadrature(ph.lam, ph.v, ph.u, w2, (a, b), q, &mut acc)?;
        }
    }
    for &(a, b) in &sx.regular {
        for &(c, d) in &sy.regular {
            r.regular_regular += outer_quadrature(ph, (a, b), (c, d), q, &mut acc)?;
        }
    }
    Ok(BoxIntegral { regions: r, abs_error_estimate: acc.err, evaluations: acc.evals, path: EvalPath::Quadrature })
}

/// The core region [−w₁,w₁]×[−w₂,w₂] rescaled to [−1,1]².
fn core_exact_or_quadrature(ph: Phase, w1: f64, w2: f64, q: &QuadratureConfig) -> Result<(Complex64, f64, usize)> {
    let lam = ph.lam * w1 * w2;
    let (u, v) = (ph.u * w1, ph.v * w2);
    if lam == 0.0 {
        return Ok((-4.0 * si(TAU * u) * si(TAU * v) * Complex64::new(1.0, 0.0), 0.0, 1));
    }
    let r = pv_bilinear(lam, u, v, q)?;
    Ok((r.value, r.abs_error_estimate, r.evaluations))
}

/// ∫_c^d e^{2πiVy}/y · 2i·Si(2πw(Λy + U)) dy, the core in the other variable
/// integrated out.
#[allow(clippy::too_many_arguments)]
fn strip_quadrature(
    lam: f64,
    u: f64,
    v: f64,
    w: f64,
    (c, d): (f64, f64),
    q: &QuadratureConfig,
    acc: &mut Acc,
) -> Result<Complex64> {
    if lam == 0.0 {
        return Ok(2.0 * I * si(TAU * w * u) * exp_over_x(TAU * v, c, d));
    }
    let f = |y: f64| Complex64::from_polar(1.0 / y, TAU * v * y) * (2.0 * I * si(TAU * w * (lam * y + u)));
    let width = q.panel_width(w * lam + v.abs()).min(0.25);
    let bp = graded_breakpoints(c, d, width);
    let r = integrate_panels(f, &bp, q.control(), "strip region")?;
    acc.err += r.abs_error;
    acc.evals += r.evaluations;
    Ok(r.value)
}

/// ∫_c^d e^{2πiVy}/y · ∫_a^b e^{2πi(Λy+U)x}/x dx dy.
fn outer_quadrature(
    ph: Phase,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    q: &QuadratureConfig,
    acc: &mut Acc,
) -> Result<Complex64> {
    if ph.lam == 0.0 {
        return Ok(exp_over_x(TAU * ph.u, a, b) * exp_over_x(TAU * ph.v, c, d));
    }
    let f = |y: f64| Complex64::from_polar(1.0 / y, TAU * ph.v * y) * exp_over_x(TAU * (ph.lam * y + ph.u), a, b);
    let m = a.abs().max(b.abs());
    let width = q.panel_width(ph.lam * m + ph.v.abs()).min(0.25);
    let bp = graded_breakpoints(c, d, width);
    let r = integrate_panels(f, &bp, q.control(), "outer region")?;
    acc.err += r.abs_error;
    acc.evals += r.evaluations;
    Ok(r.value)
}

fn asymptotic_path(ph: Phase, sx: &AxisSplit, sy: &AxisSplit, cfg: &FeffermanConfig) -> Result<BoxIntegral> {
    let z = cfg.asymptotic_min_argument;
    let invalid = |what: &str| Error::NonConvergence {
        context: format!("{what}: outside both the quadrature budget and the asymptotic regime"),
        abs_error: f64::INFINITY,
        evaluations: 0,
    };
    let mut r = RegionValues::default();
    let mut err = 0.0;
    let mut evals = 0;
    let lnz = 1.0 + z.ln();
    if let (Some(w1), Some(w2)) = (sx.core, sy.core) {
        let lam = ph.lam * w1 * w2;
        // the core integrand is symmetric under (x, U) ↔ (y, V); collapse
        // along the axis with the larger shift
        let (u, v) = (ph.u * w1, ph.v * w2);
        let (u, v) = if u.abs() >= v.abs() { (u, v) } else { (v, u) };
        if lam == 0.0 || (u == 0.0 && v == 0.0) {
            let c = core_exact_or_quadrature(ph, w1, w2, &cfg.quad)?;
            r.core = c.0;
            err += c.1;
            evals += c.2;
        } else {
            let y0 = u.abs() / lam;
            let ok = if y0 >= 1.0 { TAU * lam * (y0 - 1.0) >= z } else { TAU * lam * y0.min(1.0 - y0) >= z };
            if !ok {
                return Err(invalid("core region"));
            }
            let omega = TAU * v;
            let mut val = -2.0 * PI * u.signum() * si(omega * y0.min(1.0)) * Complex64::new(1.0, 0.0);
            if y0 < 1.0 {
                val += 2.0 * PI * I * exp_over_x(omega, y0, 1.0).re;
            }
            r.core = val;
            err += 8.0 * lnz / z;
            evals += 1;
        }
    }
    let strip = |lam: f64, u: f64, v: f64, w: f64, pieces: &[(f64, f64)]| -> Result<(Complex64, f64)> {
        let mut total = Complex64::new(0.0, 0.0);
        let mut e = 0.0;
        for &(c, d) in pieces {
            if lam == 0.0 {
                total += 2.0 * I * si(TAU * w * u) * exp_over_x(TAU * v, c, d);
                continue;
            }
            let ystar = -u / lam;
            let omega = TAU * v;
            let near = c.abs().min(d.abs());
            if ystar > c && ystar < d {
                if TAU * w * lam * (ystar - c).min(d - ystar) < z {
                    return Err(invalid("strip region"));
                }
                // sgn(Λy + U) is −1 before y* and +1 after; pieces avoid 0
                total += I * PI * (exp_over_x(omega, ystar, d) - exp_over_x(omega, c, ystar));
            } else {
                let zc = TAU * w * (lam * c + u);
                let zd = TAU * w * (lam * d + u);
                if zc.abs().min(zd.abs()) < z {
                    return Err(invalid("strip region"));
                }
                total += I * PI * zc.signum() * exp_over_x(omega, c, d);
            }
            e += 4.0 * (d - c) / near * lnz / z;
        }
        Ok((total, e))
    };
    if let Some(w1) = sx.core {
        let (val, e) = strip(ph.lam, ph.u, ph.v, w1, &sy.regular)?;
        r.core_x_regular_y = val;
        err += e;
        evals += 1;
    }
    if let Some(w2) = sy.core {
        let (val, e) = strip(ph.lam, ph.v, ph.u, w2, &sx.regular)?;
        r.regular_x_core_y = val;
        err += e;
        evals += 1;
    }
    for &(a, b) in &sx.regular {
        for &(c, d) in &sy.regular {
            if ph.lam == 0.0 {
                r.regular_regular += exp_over_x(TAU * ph.u, a, b) * exp_over_x(TAU * ph.v, c, d);
                continue;
            }
            let m = a.abs().min(b.abs());
            let ystar = -ph.u / ph.lam;
            let ok = if ystar > c && ystar < d {
                TAU * ph.lam * m * (ystar - c).min(d - ystar) >= z
            } else {
                let kc = TAU * (ph.lam * c + ph.u);
                let kd = TAU * (ph.lam * d + ph.u);
                kc.abs().min(kd.abs()) * m >= z
            };
            if !ok {
                return Err(invalid("outer region"));
            }
            err += 4.0 * (d - c) / c.abs().min(d.abs()) * lnz / z;
            evals += 1;
        }
    }
    Ok(BoxIntegral { regions: r, abs_error_estimate: err, evaluations: evals.max(1), path: EvalPath::Asymptotic })
}
