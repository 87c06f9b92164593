//! Experiment configuration: a JSON file with per-kind parameters.

use std::fmt;
use std::path::PathBuf;

use maxtrunc_core::fefferman::FeffermanConfig;
use maxtrunc_core::mpz_max::PacketSpec;
use maxtrunc_core::oscillatory::QuadratureConfig;
use maxtrunc_core::restriction_lab::MollifierSpec;
use maxtrunc_core::spaces::AscentConfig;
use maxtrunc_core::Exponent;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CkVerify,
    CkCertificate,
    MpzMax,
    MpzConverge,
    FeffermanGrowth,
    FeffermanFlatness,
    Oscint,
    RestrictionMax,
    LebesgueProfile,
    QuadrantIdentity,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::CkVerify,
        Kind::CkCertificate,
        Kind::MpzMax,
        Kind::MpzConverge,
        Kind::FeffermanGrowth,
        Kind::FeffermanFlatness,
        Kind::Oscint,
        Kind::RestrictionMax,
        Kind::LebesgueProfile,
        Kind::QuadrantIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::CkVerify => "ck-verify",
            Kind::CkCertificate => "ck-certificate",
            Kind::MpzMax => "mpz-max",
            Kind::MpzConverge => "mpz-converge",
            Kind::FeffermanGrowth => "fefferman-growth",
            Kind::FeffermanFlatness => "fefferman-flatness",
            Kind::Oscint => "oscint",
            Kind::RestrictionMax => "restriction-max",
            Kind::LebesgueProfile => "lebesgue-profile",
            Kind::QuadrantIdentity => "quadrant-identity",
        }
    }

    pub fn parse(s: &str) -> Result<Kind, RunError> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RunError::Config(format!("unknown experiment kind {s:?}")))
    }

    pub fn summary(self) -> &'static str {
        match self {
            Kind::CkVerify => "ascent lower bound of the maximal truncation norm vs the constant times the Hölder bound",
            Kind::CkCertificate => "replay of the half-mass induction with every inequality recorded",
            Kind::MpzMax => "multi-parameter maximal partial Fourier transform ratios with refinement check",
            Kind::MpzConverge => "truncated transform error along a growing rectangle path",
            Kind::FeffermanGrowth => "|S f_lambda| against ln lambda at fixed points",
            Kind::FeffermanFlatness => "|S f_lambda| at mismatched radii lambda' = m lambda",
            Kind::Oscint => "p.v. product-phase integral magnitudes and their log-slope",
            Kind::RestrictionMax => "maximal mollified restriction to a parabola arc",
            Kind::LebesgueProfile => "ellipsoid-average deviations of the transform along shrinking paths",
            Kind::QuadrantIdentity => "quadrant expansion of the dilated mollifier at random points",
        }
    }

    /// Default parameters as JSON, used by `list` as the parameter schema.
    pub fn default_params(self) -> Value {
        let v = match self {
            Kind::CkVerify => serde_json::to_value(CkParams::verify_default()),
            Kind::CkCertificate => serde_json::to_value(CkParams::certificate_default()),
            Kind::MpzMax => serde_json::to_value(MpzMaxParams::default()),
            Kind::MpzConverge => serde_json::to_value(MpzConvergeParams::default()),
            Kind::FeffermanGrowth => serde_json::to_value(GrowthParams::default()),
            Kind::FeffermanFlatness => serde_json::to_value(FlatnessParams::default()),
            Kind::Oscint => serde_json::to_value(OscintParams::default()),
            Kind::RestrictionMax => serde_json::to_value(RestrictionParams::default()),
            Kind::LebesgueProfile => serde_json::to_value(LebesgueParams::default()),
            Kind::QuadrantIdentity => serde_json::to_value(QuadrantParams::default()),
        };
        v.expect("parameter defaults serialize")
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An exponent written as a number or as the string "inf".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentArg(pub Exponent);

impl Serialize for ExponentArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0.value())
        }
    }
}

impl<'de> Deserialize<'de> for ExponentArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(v) => v,
            Raw::Word(w) if w == "inf" || w == "infinity" => f64::INFINITY,
            Raw::Word(w) => return Err(serde::de::Error::custom(format!("bad exponent {w:?}"))),
        };
        Exponent::new(p).map(ExponentArg).map_err(serde::de::Error::custom)
    }
}

fn exponent(p: f64) -> ExponentArg {
    ExponentArg(Exponent::new(p).expect("valid default exponent"))
}

fn check(cond: bool, msg: &str) -> Result<(), RunError> {
    if cond {
        Ok(())
    } else {
        Err(RunError::Config(msg.into()))
    }
}

fn check_increasing(v: &[f64], what: &str) -> Result<(), RunError> {
    check(
        !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0]),
        &format!("{what} must be nonempty, finite and strictly increasing"),
    )
}

/// Shared by ck-verify and ck-certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CkParams {
    pub instances: usize,
    pub d: usize,
    /// Largest factor size.
    pub n: usize,
    /// Largest codomain size.
    pub outputs: usize,
    /// Largest chain length.
    pub chain: usize,
    pub p: ExponentArg,
    pub q: ExponentArg,
    pub ascent: AscentConfig,
}

impl CkParams {
    fn verify_default() -> Self {
        Self {
            instances: 100,
            d: 2,
            n: 4,
            outputs: 8,
            chain: 4,
            p: exponent(2.0),
            q: exponent(4.0),
            ascent: AscentConfig::default(),
        }
    }

    fn certificate_default() -> Self {
        Self { instances: 20, ..Self::verify_default() }
    }

    fn validate(&self) -> Result<(), RunError> {
        check(self.instances > 0, "instances must be positive")?;
        check((1..=4).contains(&self.d), "d must lie in 1..=4")?;
        check(self.n > 0 && self.outputs > 0 && self.chain > 0, "n, outputs and chain must be positive")?;
        check(self.n.checked_pow(self.d as u32).is_some_and(|s| s <= 4096), "domain size n^d must not exceed 4096")?;
        check(self.p.0 < self.q.0, "p must be smaller than q")?;
        check(self.ascent.steps > 0 && self.ascent.step_scale > 0.0, "ascent steps and step_scale must be positive")
    }
}

impl Default for CkParams {
    fn default() -> Self {
        Self::verify_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpzMaxParams {
    pub signals: usize,
    pub d: usize,
    /// Grid points per axis.
    pub n: usize,
    /// Grid half-width.
    pub extent: f64,
    pub p: ExponentArg,
    pub r_min: f64,
    pub r_count: usize,
    /// Half-width of the frequency box.
    pub xi_half_width: f64,
    pub packets: PacketSpec,
    /// Also evaluate on the doubled grid and bound the relative change.
    pub refine: bool,
    pub refine_tolerance: f64,
    pub budget: usize,
}

impl Default for MpzMaxParams {
    fn default() -> Self {
        Self {
            signals: 5,
            d: 2,
            n: 32,
            extent: 4.0,
            p: exponent(4.0 / 3.0),
            r_min: 0.5,
            r_count: 4,
            xi_half_width: 2.0,
            packets: PacketSpec::default(),
            refine: true,
            refine_tolerance: 0.1,
            budget: maxtrunc_core::mpz_max::DEFAULT_BUDGET,
        }
    }
}

impl MpzMaxParams {
    fn validate(&self) -> Result<(), RunError> {
        check(self.signals > 0, "signals must be positive")?;
        check((1..=3).contains(&self.d), "d must lie in 1..=3")?;
        check(self.n >= 2 && self.extent > 0.0 && self.xi_half_width > 0.0, "need n >= 2 and positive extents")?;
        check(self.p.0.value() >= 1.0 && self.p.0.value() < 2.0, "p must lie in [1, 2)")?;
        check(self.r_min > 0.0 && self.r_count > 0, "need r_min > 0 and r_count > 0")?;
        check(self.refine_tolerance > 0.0, "refine_tolerance must be positive")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalChoice {
    /// e^{−π|x|²}.
    Gaussian,
    /// A seeded random packet sum.
    Packets,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpzConvergeParams {
    pub signal: SignalChoice,
    pub packets: PacketSpec,
    pub n: usize,
    pub extent: f64,
    pub xi: Vec<f64>,
    /// Radii tuples, nondecreasing in every coordinate.
    pub path: Vec<Vec<f64>>,
    /// Required error at the last path entry.
    pub tolerance: f64,
}

impl Default for MpzConvergeParams {
    fn default() -> Self {
        Self {
            signal: SignalChoice::Gaussian,
            packets: PacketSpec::default(),
            n: 64,
            extent: 8.0,
            xi: vec![0.3, -0.2],
            path: (1..=8)
                .map(|i| {
                    let t = 0.5 * i as f64;
                    vec![t, t * t]
                })
                .collect(),
            tolerance: 1e-3,
        }
    }
}

impl MpzConvergeParams {
    fn validate(&self) -> Result<(), RunError> {
        let d = self.xi.len();
        check((1..=3).contains(&d), "xi must have 1 to 3 coordinates")?;
        check(self.n >= 2 && self.extent > 0.0, "need n >= 2 and extent > 0")?;
        check(!self.path.is_empty() && self.path.iter().all(|r| r.len() == d), "path tuples must match xi in length")?;
        check(self.tolerance > 0.0, "tolerance must be positive")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthParams {
    pub points: Vec<(f64, f64)>,
    pub lambdas: Vec<f64>,
    /// Largest allowed max/min of |S|/ln λ over the upper half of the sweep.
    pub band: f64,
    pub fefferman: FeffermanConfig,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            points: vec![(0.8, 0.8)],
            lambdas: (4..=12).map(|k| 2f64.powi(k)).collect(),
            band: 3.0,
            fefferman: FeffermanConfig::default(),
        }
    }
}

impl GrowthParams {
    fn validate(&self) -> Result<(), RunError> {
        check(!self.points.is_empty(), "points must be nonempty")?;
        check_increasing(&self.lambdas, "lambdas")?;
        check(self.lambdas.len() >= 3, "need at least three lambdas for the fit")?;
        check(self.band > 1.0, "band must exceed 1")?;
        check_fefferman(&self.fefferman)
    }
}

fn check_fefferman(cfg: &FeffermanConfig) -> Result<(), RunError> {
    cfg.quad.validate().map_err(|e| RunError::Config(e.to_string()))?;
    check(cfg.asymptotic_min_argument > 0.0, "asymptotic_min_argument must be positive")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlatnessParams {
    pub points: Vec<(f64, f64)>,
    pub lambda: f64,
    pub multipliers: Vec<f64>,
    /// λ values of the growth sweep the flat slope is compared with.
    pub growth_lambdas: Vec<f64>,
    /// Required |flat slope| / growth slope upper limit.
    pub slope_fraction: f64,
    pub fefferman: FeffermanConfig,
}

impl Default for FlatnessParams {
    fn default() -> Self {
        Self {
            points: vec![(0.8, 0.8)],
            lambda: 16.0,
            multipliers: vec![3.0, 9.0, 27.0],
            growth_lambdas: (4..=12).map(|k| 2f64.powi(k)).collect(),
            slope_fraction: 0.2,
            fefferman: FeffermanConfig::default(),
        }
    }
}

impl FlatnessParams {
    fn validate(&self) -> Result<(), RunError> {
        check(!self.points.is_empty(), "points must be nonempty")?;
        check_increasing(&self.multipliers, "multipliers")?;
        check(self.multipliers.len() >= 3, "need at least three multipliers for the fit")?;
        check_increasing(&self.growth_lambdas, "growth_lambdas")?;
        check(self.growth_lambdas.len() >= 3, "need at least three growth lambdas")?;
        check(self.slope_fraction > 0.0, "slope_fraction must be positive")?;
        check_fefferman(&self.fefferman)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscintParams {
    pub lambdas: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub quad: QuadratureConfig,
}

impl Default for OscintParams {
    fn default() -> Self {
        Self { lambdas: vec![1e2, 1e3, 1e4, 1e5], c1: 0.0, c2: 0.0, quad: QuadratureConfig::default() }
    }
}

impl OscintParams {
    fn validate(&self) -> Result<(), RunError> {
        check_increasing(&self.lambdas, "lambdas")?;
        check(self.lambdas.len() >= 3 && self.lambdas[0] > 0.0, "need at least three positive lambdas")?;
        check(self.c1.is_finite() && self.c2.is_finite(), "c1 and c2 must be finite")?;
        self.quad.validate().map_err(|e| RunError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RestrictionParams {
    pub signals: usize,
    pub n: usize,
    pub extent: f64,
    pub surface_points: usize,
    pub r_min: f64,
    pub r_count: usize,
    pub p: ExponentArg,
    pub q: ExponentArg,
    pub packets: PacketSpec,
    pub mollifier: MollifierSpec,
    pub refine: bool,
    /// Largest allowed max(a/b, b/a) between the two resolutions.
    pub band: f64,
    pub budget: usize,
}

impl Default for RestrictionParams {
    fn default() -> Self {
        Self {
            signals: 5,
            n: 32,
            extent: 4.0,
            surface_points: 201,
            r_min: 0.05,
            r_count: 4,
            p: exponent(1.2),
            q: exponent(2.0),
            packets: PacketSpec::default(),
            mollifier: MollifierSpec::default(),
            refine: true,
            band: 3.0,
            budget: maxtrunc_core::mpz_max::DEFAULT_BUDGET,
        }
    }
}

impl RestrictionParams {
    fn validate(&self) -> Result<(), RunError> {
        check(self.signals > 0, "signals must be positive")?;
        check(self.n >= 2 && self.extent > 0.0, "need n >= 2 and extent > 0")?;
        check(self.surface_points >= 2, "need at least two surface points")?;
        check(self.r_min > 0.0 && self.r_count > 0, "need r_min > 0 and r_count > 0")?;
        check(self.band > 1.0, "band must exceed 1")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPath {
    pub name: String,
    pub radii: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LebesgueParams {
    pub signal: SignalChoice,
    pub packets: PacketSpec,
    pub n: usize,
    pub extent: f64,
    pub xi: Vec<f64>,
    pub paths: Vec<NamedPath>,
    /// Required fitted order is at least `min_order`.
    pub min_order: f64,
}

impl Default for LebesgueParams {
    fn default() -> Self {
        let iso = (4..=9).map(|k| vec![0.5f64.powi(k); 2]).collect();
        let aniso = (4..=9)
            .map(|k| {
                let t = 0.5f64.powi(k);
                vec![t, t * t]
            })
            .collect();
        Self {
            signal: SignalChoice::Gaussian,
            packets: PacketSpec::default(),
            n: 64,
            extent: 8.0,
            xi: vec![0.3, 0.09],
            paths: vec![
                NamedPath { name: "isotropic".into(), radii: iso },
                NamedPath { name: "parabolic".into(), radii: aniso },
            ],
            min_order: 1.0 - maxtrunc_core::restriction_lab::LEBESGUE_ORDER_TOL,
        }
    }
}

impl LebesgueParams {
    fn validate(&self) -> Result<(), RunError> {
        let d = self.xi.len();
        check((1..=3).contains(&d), "xi must have 1 to 3 coordinates")?;
        check(self.n >= 2 && self.extent > 0.0, "need n >= 2 and extent > 0")?;
        check(!self.paths.is_empty(), "paths must be nonempty")?;
        for p in &self.paths {
            check(p.radii.len() >= 3, "each path needs at least three tuples")?;
            check(p.radii.iter().all(|r| r.len() == d), "path tuples must match xi in length")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadrantParams {
    pub draws: usize,
    pub max_d: usize,
    /// |x_j| is drawn uniformly from this range, with a random sign.
    pub x_range: (f64, f64),
    /// log10 r_j is drawn uniformly from this range.
    pub log10_r_range: (f64, f64),
    pub mollifier: MollifierSpec,
    pub tolerance: f64,
}

impl Default for QuadrantParams {
    fn default() -> Self {
        Self {
            draws: 100,
            max_d: 2,
            x_range: (0.05, 2.0),
            log10_r_range: (-1.0, 1.0),
            mollifier: MollifierSpec::default(),
            tolerance: 1e-6,
        }
    }
}

impl QuadrantParams {
    fn validate(&self) -> Result<(), RunError> {
        check(self.draws > 0, "draws must be positive")?;
        check((1..=3).contains(&self.max_d), "max_d must lie in 1..=3")?;
        check(0.0 < self.x_range.0 && self.x_range.0 < self.x_range.1, "x_range must be positive and increasing")?;
        check(self.log10_r_range.0 < self.log10_r_range.1, "log10_r_range must be increasing")?;
        check(self.tolerance > 0.0, "tolerance must be positive")
    }
}

/// Validated parameters of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    CkVerify(CkParams),
    CkCertificate(CkParams),
    MpzMax(MpzMaxParams),
    MpzConverge(MpzConvergeParams),
    FeffermanGrowth(GrowthParams),
    FeffermanFlatness(FlatnessParams),
    Oscint(OscintParams),
    RestrictionMax(RestrictionParams),
    LebesgueProfile(LebesgueParams),
    QuadrantIdentity(QuadrantParams),
}

impl Params {
    pub fn to_json(&self) -> Value {
        let v = match self {
            Params::CkVerify(p) | Params::CkCertificate(p) => serde_json::to_value(p),
            Params::MpzMax(p) => serde_json::to_value(p),
            Params::MpzConverge(p) => serde_json::to_value(p),
            Params::FeffermanGrowth(p) => serde_json::to_value(p),
            Params::FeffermanFlatness(p) => serde_json::to_value(p),
            Params::Oscint(p) => serde_json::to_value(p),
            Params::RestrictionMax(p) => serde_json::to_value(p),
            Params::LebesgueProfile(p) => serde_json::to_value(p),
            Params::QuadrantIdentity(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }
}

/// The file format: `{"kind": ..., "seed": ..., "out": ..., "threads": ..., "params": {...}}`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub kind: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub params: Option<Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 means one per core.
    pub threads: usize,
    pub params: Params,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub kind: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn typed<T: DeserializeOwned + Default>(v: &Option<Value>, kind: Kind) -> Result<T, RunError> {
    match v {
        None | Some(Value::Null) => Ok(T::default()),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| RunError::Config(format!("{kind} params: {e}"))),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str, ov: &Overrides) -> Result<Self, RunError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| RunError::Config(format!("config: {e}")))?;
        Self::resolve(raw, ov)
    }

    pub fn resolve(raw: RawConfig, ov: &Overrides) -> Result<Self, RunError> {
        let kind_name = ov
            .kind
            .clone()
            .or(raw.kind)
            .ok_or_else(|| RunError::Config("no experiment kind given".into()))?;
        let kind = Kind::parse(&kind_name)?;
        let params = match kind {
            Kind::CkVerify => {
                let p: CkParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::CkVerify(p)
            }
            Kind::CkCertificate => {
                let p: CkParams = match &raw.params {
                    None | Some(Value::Null) => CkParams::certificate_default(),
                    Some(_) => typed(&raw.params, kind)?,
                };
                p.validate()?;
                Params::CkCertificate(p)
            }
            Kind::MpzMax => {
                let p: MpzMaxParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::MpzMax(p)
            }
            Kind::MpzConverge => {
                let p: MpzConvergeParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::MpzConverge(p)
            }
            Kind::FeffermanGrowth => {
                let p: GrowthParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::FeffermanGrowth(p)
            }
            Kind::FeffermanFlatness => {
                let p: FlatnessParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::FeffermanFlatness(p)
            }
            Kind::Oscint => {
                let p: OscintParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::Oscint(p)
            }
            Kind::RestrictionMax => {
                let p: RestrictionParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::RestrictionMax(p)
            }
            Kind::LebesgueProfile => {
                let p: LebesgueParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::LebesgueProfile(p)
            }
            Kind::QuadrantIdentity => {
                let p: QuadrantParams = typed(&raw.params, kind)?;
                p.validate()?;
                Params::QuadrantIdentity(p)
            }
        };
        Ok(Self {
            kind,
            seed: ov.seed.or(raw.seed).unwrap_or(0),
            out: ov.out.clone().or(raw.out).unwrap_or_else(|| PathBuf::from("out")),
            threads: ov.threads.or(raw.threads).unwrap_or(0),
            params,
        })
    }

    /// The resolved configuration, defaults filled in.
    pub fn echo(&self) -> Value {
        serde_json::json!({
            "kind": self.kind.name(),
            "seed": self.seed,
            "out": self.out,
            "threads": self.threads,
            "params": self.params.to_json(),
        })
    }
}
