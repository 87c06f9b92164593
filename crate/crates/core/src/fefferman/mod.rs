//! Rectangular partial Fourier integrals of f_λ(x) = e^{2πiλx₁x₂}·1_{[−2,2]²}.
//!
//! S_{R₁,R₂} is evaluated through the four quadrant operators
//! T_{r₁,r₂}f(x) = −(1/4π²) p.v.∫∫ e^{2πi(r₁s₁ + r₂s₂)} f(x − s)/(s₁s₂) ds,
//! S_{R₁,R₂} = T_{R₁,R₂} − T_{−R₁,R₂} − T_{R₁,−R₂} + T_{−R₁,−R₂}.
//! Writing f_λ(x − s) out, T becomes a bilinear-phase p.v. integral over the
//! box [x₁−2, x₁+2]×[x₂−2, x₂+2].

mod regions;
mod sequences;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillatory::special::sinc_unnormalized;
use crate::oscillatory::{log_growth_fit, LogFit, QuadratureConfig};
use crate::par;
use crate::quadrature::gl15;

pub use regions::RegionValues;
pub use sequences::{counterexample_sequences, CounterexampleSequences, PowerOfTwo, Representation, SequenceTerm};

/// The pulse f_λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscPulse {
    lambda: f64,
}

impl OscPulse {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::arg("lambda must be positive and finite"));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eval(&self, x1: f64, x2: f64) -> Complex64 {
        eval_f_lambda(self.lambda, x1, x2)
    }
}

/// e^{2πiλx₁x₂} on the closed square [−2,2]², 0 outside.
pub fn eval_f_lambda(lambda: f64, x1: f64, x2: f64) -> Complex64 {
    if x1.abs() <= 2.0 && x2.abs() <= 2.0 {
        Complex64::from_polar(1.0, TAU * lambda * x1 * x2)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// How region integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    /// Quadrature when the estimated panel count fits the budget, else asymptotic.
    Auto,
    Quadrature,
    Asymptotic,
}

/// The evaluation actually used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    Quadrature,
    /// Si(z) replaced by ±π/2 and ∫_a^b e^{ikx}/x dx by 0 where |z|, |k·x|
    /// exceed `asymptotic_min_argument`.
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeffermanConfig {
    pub quad: QuadratureConfig,
    /// Largest estimated panel count evaluated by quadrature under `Auto`.
    pub panel_budget: usize,
    pub asymptotic_min_argument: f64,
    pub path: PathChoice,
}

impl Default for FeffermanConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::default(),
            panel_budget: 400_000,
            asymptotic_min_argument: 1e5,
            path: PathChoice::Auto,
        }
    }
}

/// One quadrant operator value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TValue {
    pub value: Complex64,
    /// Box-integral contributions before the −e^{2πiλx₁x₂}/4π² prefactor.
    pub regions: RegionValues,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub path: EvalPath,
}

/// T_{r₁,r₂}f_λ(x₁,x₂).
pub fn t_quadrant(lambda: f64, r1: f64, r2: f64, x1: f64, x2: f64, cfg: &FeffermanConfig) -> Result<TValue> {
    OscPulse::new(lambda)?;
    if ![r1, r2, x1, x2].iter().all(|v| v.is_finite()) {
        return Err(Error::arg("frequencies and point must be finite"));
    }
    let ph = regions::Phase { lam: lambda, u: r1 - lambda * x2, v: r2 - lambda * x1 };
    let b = regions::box_integral(ph, (x1 - 2.0, x1 + 2.0), (x2 - 2.0, x2 + 2.0), cfg)?;
    let pre = -Complex64::from_polar(1.0, TAU * lambda * x1 * x2) / (4.0 * PI * PI);
    Ok(TValue {
        value: pre * b.regions.total(),
        regions: b.regions,
        abs_error_estimate: b.abs_error_estimate / (4.0 * PI * PI),
        evaluations: b.evaluations,
        path: b.path,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SValue {
    pub value: Complex64,
    /// T_{R₁,R₂}, T_{−R₁,R₂}, T_{R₁,−R₂}, T_{−R₁,−R₂}.
    pub terms: [Complex64; 4],
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// Asymptotic if any of the four terms used it.
    pub path: EvalPath,
}

/// S_{R₁,R₂}f_λ(x₁,x₂) from the four quadrant operators.
pub fn s_partial(lambda: f64, big_r1: f64, big_r2: f64, x1: f64, x2: f64, cfg: &FeffermanConfig) -> Result<SValue> {
    if !(big_r1 > 0.0 && big_r2 > 0.0) {
        return Err(Error::arg("radii must be positive"));
    }
    let signs = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];
    let ts = par::try_map_range(4, |i| t_quadrant(lambda, signs[i].0 * big_r1, signs[i].1 * big_r2, x1, x2, cfg))?;
    let value = ts[0].value - ts[1].value - ts[2].value + ts[3].value;
    Ok(SValue {
        value,
        terms: [ts[0].value, ts[1].value, ts[2].value, ts[3].value],
        abs_error_estimate: ts.iter().map(|t| t.abs_error_estimate).sum(),
        evaluations: ts.iter().map(|t| t.evaluations).sum(),
        path: if ts.iter().any(|t| t.path == EvalPath::Asymptotic) { EvalPath::Asymptotic } else { EvalPath::Quadrature },
    })
}

/// Dirichlet kernel D_R(t) = sin(2πRt)/(πt).
pub fn dirichlet_kernel(r: f64, t: f64) -> f64 {
    2.0 * r * sinc_unnormalized(TAU * r * t)
}

/// Direct convolution (f_λ ∗ D_{R₁}⊗D_{R₂})(x) by tensor GL15 panels of
/// width at most `panel_width`; for low frequencies only.
pub fn s_partial_direct(lambda: f64, big_r1: f64, big_r2: f64, x1: f64, x2: f64, panel_width: f64) -> Complex64 {
    let rule = gl15();
    let nodes = |c: f64| -> Vec<(f64, f64)> {
        let n = (4.0 / panel_width).ceil() as usize;
        (0..n)
            .flat_map(|i| {
                let a = c - 2.0 + 4.0 * i as f64 / n as f64;
                let b = c - 2.0 + 4.0 * (i + 1) as f64 / n as f64;
                rule.mapped(a, b).collect::<Vec<_>>()
            })
            .collect()
    };
    // substitute y = x − t so that y ranges over the support [−2,2]²
    let ys1 = nodes(0.0);
    let ys2 = nodes(0.0);
    let rows = par::map_slice(&ys1, |&(y1, w1)| {
        let d1 = dirichlet_kernel(big_r1, x1 - y1);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(y2, w2) in &ys2 {
            acc += Complex64::from_polar(1.0, TAU * lambda * y1 * y2) * (dirichlet_kernel(big_r2, x2 - y2) * w2);
        }
        acc * (d1 * w1)
    });
    rows.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Young's bound |S_{R₁,R₂}g| ≤ ‖g‖₂·‖D_{R₁}⊗D_{R₂}‖₂ = ‖g‖₂·2√(R₁R₂), with ‖f_λ‖₂ = 4.
pub fn young_bound(big_r1: f64, big_r2: f64) -> f64 {
    8.0 * (big_r1 * big_r2).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub point_x1: f64,
    pub point_x2: f64,
    pub lambda: f64,
    pub magnitude: f64,
    pub magnitude_over_log_lambda: f64,
}

fn check_square(points: &[(f64, f64)]) -> Result<()> {
    let inside = |v: f64| (2.0 / 3.0..=1.0).contains(&v);
    if let Some(p) = points.iter().find(|(a, b)| !inside(*a) || !inside(*b)) {
        return Err(Error::pre(format!("point ({}, {}) outside [2/3, 1]^2", p.0, p.1)));
    }
    Ok(())
}

/// |S_{λx₂,λx₁}f_λ(x₁,x₂)| over points × λ values, rows grouped by point.
pub fn growth_table(points: &[(f64, f64)], lambdas: &[f64], cfg: &FeffermanConfig) -> Result<Vec<GrowthRow>> {
    check_square(points)?;
    if lambdas.is_empty() || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg("lambda list must be nonempty and strictly increasing"));
    }
    if lambdas[0] <= 1.0 {
        return Err(Error::arg("lambda must exceed 1 so that ln lambda > 0"));
    }
    let jobs: Vec<(f64, f64, f64)> =
        points.iter().flat_map(|&(a, b)| lambdas.iter().map(move |&l| (a, b, l))).collect();
    let vals = par::map_slice(&jobs, |&(x1, x2, l)| s_partial(l, l * x2, l * x1, x1, x2, cfg));
    jobs.iter()
        .zip(vals)
        .map(|(&(x1, x2, l), v)| {
            let m = v?.value.norm();
            Ok(GrowthRow { point_x1: x1, point_x2: x2, lambda: l, magnitude: m, magnitude_over_log_lambda: m / l.ln() })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessRow {
    pub point_x1: f64,
    pub point_x2: f64,
    pub lambda: f64,
    pub multiplier: f64,
    pub lambda_prime: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessTable {
    pub rows: Vec<FlatnessRow>,
    /// Fit of magnitude against ln λ′, one per point, when at least three multipliers.
    pub fits: Vec<Option<LogFit>>,
}

/// |S_{λ′x₂,λ′x₁}f_λ(x₁,x₂)| for λ′ = m·λ, m ≥ 3.
pub fn flatness_table(
    points: &[(f64, f64)],
    lambda: f64,
    multipliers: &[f64],
    cfg: &FeffermanConfig,
) -> Result<FlatnessTable> {
    check_square(points)?;
    OscPulse::new(lambda)?;
    if multipliers.is_empty() || multipliers.iter().any(|m| !(*m >= 3.0) || !m.is_finite()) {
        return Err(Error::pre("multipliers must be at least 3"));
    }
    let jobs: Vec<(f64, f64, f64)> =
        points.iter().flat_map(|&(a, b)| multipliers.iter().map(move |&m| (a, b, m))).collect();
    let vals = par::map_slice(&jobs, |&(x1, x2, m)| {
        let lp = m * lambda;
        s_partial(lambda, lp * x2, lp * x1, x1, x2, cfg)
    });
    let mut rows = Vec::with_capacity(jobs.len());
    for (&(x1, x2, m), v) in jobs.iter().zip(vals) {
        rows.push(FlatnessRow {
            point_x1: x1,
            point_x2: x2,
            lambda,
            multiplier: m,
            lambda_prime: m * lambda,
            magnitude: v?.value.norm(),
        });
    }
    let fits = rows
        .chunks(multipliers.len())
        .map(|chunk| {
            let pairs: Vec<(f64, f64)> = chunk.iter().map(|r| (r.lambda_prime, r.magnitude)).collect();
            log_growth_fit(&pairs).ok()
        })
        .collect();
    Ok(FlatnessTable { rows, fits })
}

/// One term a_k·|S_{λ_n x₂, λ_n x₁} f_{λ_k}(x)| of the divergent series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub k: usize,
    pub a: f64,
    pub lambda: f64,
    pub magnitude: f64,
    pub weighted: f64,
    pub abs_error_estimate: f64,
    pub path: EvalPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesBreakdown {
    pub n: usize,
    pub point: (f64, f64),
    pub radii: (f64, f64),
    /// The k = n term.
    pub main: SeriesTerm,
    /// Terms k < n.
    pub lower_terms: Vec<SeriesTerm>,
    /// Terms n < k ≤ 3, evaluated numerically.
    pub upper_terms: Vec<SeriesTerm>,
    /// Young bound on Σ_{k≥4} a_k|S f_{λ_k}| using Σ_{k≥4} a_k ≤ 2a₄.
    pub tail_bound: f64,
    /// main − Σ lower − Σ upper − tail.
    pub lower: f64,
    /// main / (a_n ln λ_n).
    pub main_over_log: f64,
}

/// Largest n whose λ_n is a double.
pub const MAX_SERIES_INDEX: usize = 3;

/// Termwise lower bound for |S_{λ_n x₂, λ_n x₁} Σ_k a_k f_{λ_k}| at a point.
pub fn series_lower_bound(n: usize, point: (f64, f64), cfg: &FeffermanConfig) -> Result<SeriesBreakdown> {
    let seq = counterexample_sequences(MAX_SERIES_INDEX + 1)?;
    if n == 0 {
        return Err(Error::arg("series index starts at 1"));
    }
    if n > MAX_SERIES_INDEX {
        return Err(Error::Unrepresentable(format!("lambda_{n} overflows double precision")));
    }
    check_square(&[point])?;
    let (x1, x2) = point;
    let ln = seq.lambda(n)?;
    let (r1, r2) = (ln * x2, ln * x1);
    let terms = par::try_map_range(MAX_SERIES_INDEX, |i| -> Result<SeriesTerm> {
        let k = i + 1;
        let a = seq.a(k)?;
        let l = seq.lambda(k)?;
        let s = s_partial(l, r1, r2, x1, x2, cfg)?;
        let m = s.value.norm();
        Ok(SeriesTerm { k, a, lambda: l, magnitude: m, weighted: a * m, abs_error_estimate: s.abs_error_estimate, path: s.path })
    })?;
    let a4 = seq.a(MAX_SERIES_INDEX + 1)?;
    let tail_bound = 2.0 * a4 * young_bound(r1, r2);
    let main = terms[n - 1];
    let lower_terms = terms[..n - 1].to_vec();
    let upper_terms = terms[n..].to_vec();
    let lower = main.weighted
        - lower_terms.iter().map(|t| t.weighted).sum::<f64>()
        - upper_terms.iter().map(|t| t.weighted).sum::<f64>()
        - tail_bound;
    Ok(SeriesBreakdown {
        n,
        point,
        radii: (r1, r2),
        main,
        lower_terms,
        upper_terms,
        tail_bound,
        lower,
        main_over_log: main.magnitude / ln.ln(),
    })
}
