//! Gauss–Legendre rules and a panel-adaptive integrator.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;

/// Values that can be integrated: closed under addition and real scaling.
pub trait Integrand: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl Integrand for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Integrand for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on [a, b]; summation runs in node order.
    pub fn integrate<T: Integrand>(&self, f: &dyn Fn(f64) -> T, a: f64, b: f64) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * *w;
        }
        acc * h
    }

    /// The rule's value together with Σ w|f|, the absolute mass it samples.
    fn integrate_with_mass<T: Integrand>(&self, f: &dyn Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = T::default();
        let mut mass = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(c + h * x);
            mass += v.magnitude() * w;
            acc = acc + v * *w;
        }
        (acc * h, mass * h.abs())
    }

    /// Mapped nodes and weights on [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// The shared 15-point rule.
pub fn gl15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

/// A short 10-point rule for entire integrands on short intervals.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Result of a panel quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Controls for [`integrate_panels`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveControl {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub max_depth: u32,
}

struct PanelOutcome<T> {
    value: T,
    error: f64,
    evaluations: usize,
    bisections: usize,
    converged: bool,
    finite: bool,
}

/// Integrates over consecutive panels given by sorted breakpoints.
///
/// Each panel is refined by comparing GL15 on the panel with GL15 on its two
/// halves; the panel tolerance is the global tolerance shared in proportion to
/// panel width. The returned error is the sum of the panel estimates.
pub fn integrate_panels<T, F>(
    f: F,
    breakpoints: &[f64],
    ctl: AdaptiveControl,
    context: &str,
) -> Result<Integral<T>>
where
    T: Integrand,
    F: Fn(f64) -> T + Sync,
{
    if breakpoints.len() < 2 {
        return Ok(Integral { value: T::default(), abs_error: 0.0, evaluations: 0 });
    }
    let total: f64 = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    if !total.is_finite() {
        return Err(Error::arg(format!("{context}: non-finite integration range")));
    }
    let rule = gl15();
    let fref = &f;
    let outcomes = par::map_range(breakpoints.len() - 1, |i| {
        let (a, b) = (breakpoints[i], breakpoints[i + 1]);
        let tol = if total > 0.0 { ctl.abs_tol * (b - a).abs() / total.abs() } else { ctl.abs_tol };
        adapt_panel(rule, fref, a, b, tol, ctl.max_depth)
    });
    let mut value = T::default();
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut bisections = 0;
    let mut converged = true;
    for o in &outcomes {
        if !o.finite {
            return Err(Error::NonFinite(format!("{context}: integrand sample")));
        }
        value = value + o.value;
        error += o.error;
        evaluations += o.evaluations;
        bisections += o.bisections;
        converged &= o.converged;
    }
    if !converged || bisections > ctl.max_subdivisions {
        return Err(Error::NonConvergence { context: context.to_string(), abs_error: error, evaluations });
    }
    Ok(Integral { value, abs_error: error, evaluations })
}

fn adapt_panel<T, F>(rule: &GaussLegendre, f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> PanelOutcome<T>
where
    T: Integrand,
    F: Fn(f64) -> T + Sync,
{
    let whole = rule.integrate(f, a, b);
    let mut out = PanelOutcome {
        value: T::default(),
        error: 0.0,
        evaluations: rule.len(),
        bisections: 0,
        converged: true,
        finite: true,
    };
    refine(rule, f, a, b, whole, tol, max_depth, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn refine<T, F>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    whole: T,
    tol: f64,
    depth: u32,
    out: &mut PanelOutcome<T>,
) where
    T: Integrand,
    F: Fn(f64) -> T + Sync,
{
    let m = 0.5 * (a + b);
    let (left, mass_left) = rule.integrate_with_mass(f, a, m);
    let (right, mass_right) = rule.integrate_with_mass(f, m, b);
    out.evaluations += 2 * rule.len();
    let halves = left + right;
    if !halves.is_finite_value() || !whole.is_finite_value() {
        out.finite = false;
        return;
    }
    let err = (whole + halves * -1.0).magnitude();
    // round-off floor relative to the absolute mass, not the possibly
    // cancelling net value
    let floor = 1e-13 * (mass_left + mass_right);
    if err <= tol.max(floor) {
        out.value = out.value + halves;
        out.error += err;
        return;
    }
    if depth == 0 || m <= a || m >= b {
        out.value = out.value + halves;
        out.error += err;
        out.converged = false;
        return;
    }
    out.bisections += 1;
    refine(rule, f, a, m, left, 0.5 * tol, depth - 1, out);
    refine(rule, f, m, b, right, 0.5 * tol, depth - 1, out);
}

/// Breakpoints covering [a, b] with uniform panels no wider than `max_width`.
pub fn uniform_breakpoints(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let len = b - a;
    if len <= 0.0 {
        return vec![a, b];
    }
    let n = (len / max_width).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..n).map(|i| a + len * i as f64 / n as f64).collect();
    pts.push(b);
    pts
}

/// Breakpoints for an integrand with a 1/x-type scale near the origin.
///
/// The interval must not contain 0. Panels grow geometrically away from the
/// origin (width at most half the distance to 0) and are capped at `max_width`.
pub fn graded_breakpoints(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    debug_assert!(a < b && (a > 0.0 || b < 0.0));
    if a < 0.0 {
        let mut pts = graded_breakpoints(-b, -a, max_width);
        pts.reverse();
        for p in &mut pts {
            *p = -*p;
        }
        return pts;
    }
    let mut pts = vec![a];
    let mut x = a;
    while x < b {
        let step = max_width.min(0.5 * x);
        let next = x + step;
        // fold a short remainder into the last panel
        if next >= b || (b - next) < 0.25 * step {
            pts.push(b);
            break;
        }
        pts.push(next);
        x = next;
    }
    pts
}
