//! One runner per experiment kind.
//!
//! Runners append to the [`Outcome`] as they go, so on a numerical failure the
//! rows finished so far still reach the partial report.

use std::f64::consts::{PI, TAU};

use maxtrunc_core::christ_kiselev::{
    build_ck_certificate, random_instance, verify_ck_bound, CkInstance, InstanceShape, CERTIFICATE_RTOL,
};
use maxtrunc_core::fefferman::{flatness_table, growth_table};
use maxtrunc_core::mpz_max::{
    convergence_profile, mpz_maximal_field, mpz_ratio, random_packet_signal, Grid, GridSignal, PacketSpec, RGrid,
};
use maxtrunc_core::oscillatory::{log_growth_fit, pv_product_phase};
use maxtrunc_core::par;
use maxtrunc_core::restriction_lab::{
    lebesgue_order, lebesgue_point_profile, maximal_restriction_field, quadrant_identity_check, restriction_ratio,
    DilationGrid, SampledSurface,
};
use maxtrunc_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{
    CkParams, ExperimentConfig, FlatnessParams, GrowthParams, LebesgueParams, MpzConvergeParams, MpzMaxParams,
    OscintParams, Params, QuadrantParams, RestrictionParams, SignalChoice,
};
use crate::error::RunError;
use crate::report::{num, Assertion, Outcome, Table};
use crate::svg;

pub fn run(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), RunError> {
    let seed = cfg.seed;
    match &cfg.params {
        Params::CkVerify(p) => ck_verify(p, seed, out),
        Params::CkCertificate(p) => ck_certificate(p, seed, out),
        Params::MpzMax(p) => mpz_max(p, seed, out),
        Params::MpzConverge(p) => mpz_converge(p, seed, out),
        Params::FeffermanGrowth(p) => fefferman_growth(p, out),
        Params::FeffermanFlatness(p) => fefferman_flatness(p, out),
        Params::Oscint(p) => oscint(p, out),
        Params::RestrictionMax(p) => restriction_max(p, seed, out),
        Params::LebesgueProfile(p) => lebesgue_profile(p, seed, out),
        Params::QuadrantIdentity(p) => quadrant_identity(p, seed, out),
    }
}

fn joined(v: &[usize]) -> String {
    v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x")
}

fn exponent_cell(p: maxtrunc_core::Exponent) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        num(p.value())
    }
}

/// Instances drawn in sequence from one seeded stream, plus a per-instance ascent seed.
fn ck_instances(p: &CkParams, seed: u64) -> Result<Vec<(CkInstance, u64)>, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = InstanceShape { d: p.d, max_factor: p.n, max_outputs: p.outputs, max_chain: p.chain };
    (0..p.instances)
        .map(|_| {
            let inst = random_instance(&mut rng, &shape)?;
            Ok((inst, rng.gen()))
        })
        .collect()
}

fn ck_verify(p: &CkParams, seed: u64, out: &mut Outcome) -> Result<(), RunError> {
    let instances = ck_instances(p, seed)?;
    let results = par::map_slice(&instances, |(inst, s)| {
        let ascent = maxtrunc_core::spaces::AscentConfig { seed: *s, ..p.ascent };
        verify_ck_bound(&inst.kernel, &inst.system, p.p.0, p.q.0, &ascent)
    });
    let mut table = Table::new(
        "ck_verify.csv",
        &[
            "instance", "factor_sizes", "outputs", "tuples", "p", "q", "lower", "plain_lower", "upper", "constant",
            "bound", "holds",
        ],
    );
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for (i, ((inst, _), r)) in instances.iter().zip(results).enumerate() {
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        table.push(vec![
            i.to_string(),
            joined(&inst.system.factor_sizes()),
            inst.kernel.rows().to_string(),
            inst.system.tuple_count().to_string(),
            exponent_cell(p.p.0),
            exponent_cell(p.q.0),
            num(r.lower),
            num(r.plain_lower),
            num(r.upper),
            num(r.constant),
            num(r.bound),
            r.holds.to_string(),
        ]);
        worst = worst.max(r.lower / r.bound);
        out.assertions.push(Assertion::le(format!("instance {i}: ascent ||T*|| <= constant * Holder ||T||"), r.lower, r.bound));
        out.item(json!({"instance": i, "report": r}));
    }
    out.tables.push(table);
    out.note("max_lower_over_bound", worst);
    failure.map_or(Ok(()), |e| Err(e.into()))
}

fn ck_certificate(p: &CkParams, seed: u64, out: &mut Outcome) -> Result<(), RunError> {
    let instances = ck_instances(p, seed)?;
    let certs = par::map_slice(&instances, |(inst, _)| build_ck_certificate(&inst.kernel, &inst.system, &inst.f, p.p.0, p.q.0));
    let mut table = Table::new(
        "ck_certificates.csv",
        &[
            "instance", "factor_sizes", "outputs", "nodes", "inequalities", "violated", "splits_minimal", "constant",
            "norm_bound", "norm_bound_kind", "input_norm", "maximal_norm",
        ],
    );
    let mut failure = None;
    for (i, ((inst, _), c)) in instances.iter().zip(certs).enumerate() {
        let c = match c {
            Ok(c) => c,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let nodes = c.nodes().len();
        let checks = c.checks().count();
        let violated = c.failures().len();
        let minimal = c.splits_minimal();
        let kind = serde_json::to_value(c.norm_bound_kind).expect("kind serializes");
        table.push(vec![
            i.to_string(),
            joined(&inst.system.factor_sizes()),
            inst.kernel.rows().to_string(),
            nodes.to_string(),
            checks.to_string(),
            violated.to_string(),
            minimal.to_string(),
            num(c.constant),
            num(c.norm_bound),
            kind.as_str().unwrap_or_default().to_string(),
            num(c.root.input_norm),
            num(c.root.maximal_norm),
        ]);
        let rhs = c.constant * c.norm_bound * c.root.input_norm;
        out.assertions.push(Assertion::le(
            format!("instance {i}: ||T*f||_q <= constant * N * ||f||_p"),
            c.root.maximal_norm,
            rhs * (1.0 + CERTIFICATE_RTOL),
        ));
        out.assertions.push(Assertion::le(format!("instance {i}: violated recorded inequalities"), violated as f64, 0.0));
        out.assertions.push(Assertion::ge(
            format!("instance {i}: splits at the minimal half-mass index"),
            f64::from(u8::from(minimal)),
            1.0,
        ));
        out.item(json!({"instance": i, "certificate": c}));
    }
    out.tables.push(table);
    failure.map_or(Ok(()), |e| Err(e.into()))
}

fn packet_signals(spec: &PacketSpec, d: usize, count: usize, seed: u64) -> Result<Vec<maxtrunc_core::mpz_max::PacketSignal>, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_packet_signal(&mut rng, d, spec).map_err(RunError::from)).collect()
}

fn field_table(file: &str, grid: &Grid, values: &[f64]) -> Table {
    let d = grid.d();
    let mut cols: Vec<String> = (1..=d).map(|j| format!("xi_{j}")).collect();
    cols.push("value".into());
    let mut t = Table { file: file.into(), columns: cols, rows: Vec::new() };
    for (i, v) in values.iter().enumerate() {
        let mut row: Vec<String> = grid.point(i).into_iter().map(num).collect();
        row.push(num(*v));
        t.push(row);
    }
    t
}

fn mpz_max(p: &MpzMaxParams, seed: u64, out: &mut Outcome) -> Result<(), RunError> {
    let signals = packet_signals(&p.packets, p.d, p.signals, seed)?;
    let coarse = Grid::centered(p.d, p.n, p.extent)?;
    let fine = Grid::centered(p.d, 2 * p.n, p.extent)?;
    let xi = Grid::fitted_dual(&coarse, p.xi_half_width)?;
    let rg = RGrid::dyadic(p.d, p.r_min, p.r_count)?;
    out.tables.push(Table::new(
        "mpz_max.csv",
        &["signal", "p", "grid_size", "tuple_count", "ratio", "ratio_refined", "relative_change"],
    ));
    let t = out.tables.len() - 1;
    let mut worst: f64 = 0.0;
    for (i, s) in signals.iter().enumerate() {
        let f = s.sample(&coarse)?;
        if i == 0 {
            let field = mpz_maximal_field(&f, &rg, &xi, p.budget)?;
            out.tables.push(field_table("mpz_field.csv", &xi, &field.values));
            let plot = if p.d == 2 {
                svg::heatmap("maximal partial transform, signal 0", xi.shape()[0], xi.shape()[1], &field.values)
            } else {
                let pts = (0..xi.len()).map(|k| (xi.point(k)[0], field.values[k])).collect();
                svg::line_plot("maximal partial transform, signal 0", "xi_1", "value", &[("signal 0".into(), pts)])
            };
            out.plots.push(("mpz_field.svg".into(), plot));
        }
        let a = mpz_ratio(&f, p.p.0, &rg, &xi, p.budget)?;
        let (refined, change) = if p.refine {
            let b = mpz_ratio(&s.sample(&fine)?, p.p.0, &rg, &xi, p.budget)?;
            let c = (b - a).abs() / a;
            worst = worst.max(c);
            out.assertions.push(Assertion::lt(
                format!("signal {i}: relative ratio change under grid doubling"),
                c,
                p.refine_tolerance,
            ));
            (num(b), num(c))
        } else {
            (String::new(), String::new())
        };
        out.tables[t].push(vec![
            i.to_string(),
            num(p.p.0.value()),
            joined(coarse.shape()),
            rg.tuple_count().to_string(),
            num(a),
            refined,
            change,
        ]);
        out.item(json!({"signal": i, "packets": s, "ratio": a}));
    }
    if p.refine {
        out.note("max_relative_change", worst);
    }
    Ok(())
}

fn gaussian(x: &[f64]) -> Complex64 {
    Complex64::new((-PI * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
}

fn test_signal(choice: SignalChoice, spec: &PacketSpec, grid: Grid, seed: u64) -> Result<GridSignal, RunError> {
    Ok(match choice {
        SignalChoice::Gaussian => GridSignal::sample(grid, gaussian)?,
        SignalChoice::Packets => {
            let d = grid.d();
            packet_signals(spec, d, 1, seed)?[0].sample(&grid)?
        }
    })
}

fn mpz_converge(p: &MpzConvergeParams, seed: u64, out: &mut Outcome) -> Result<(), RunError> {
    let d = p.xi.len();
    let f = test_signal(p.signal, &p.packets, Grid::centered(d, p.n, p.extent)?, seed)?;
    let errs = convergence_profile(&f, &p.xi, &p.path)?;
    let mut cols: Vec<String> = vec!["step".into()];
    cols.extend((1..=d).map(|j| format!("r_{j}")));
    cols.push("error".into());
    let mut t = Table { file: "mpz_converge.csv".into(), columns: cols, rows: Vec::new() };
    for (k, (r, e)) in p.path.iter().zip(&errs).enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(r.iter().map(|v| num(*v)));
        row.push(num(*e));
        t.push(row);
    }
    out.tables.push(t);
    let last = *errs.last().expect("path is nonempty");
    out.note("final_error", last);
    out.assertions.push(Assertion::le("error at the last rectangle", last, p.tolerance));
    let pts = errs.iter().enumerate().map(|(k, e)| (k as f64, e.max(1e-300).log10())).collect();
    out.plots.push((
        "mpz_converge.svg".into(),
        svg::line_plot("truncated transform error", "path step", "log10 error", &[("error".into(), pts)]),
    ));
    Ok(())
}

const GROWTH_COLUMNS: [&str; 5] = ["point_x1", "point_x2", "lambda", "magnitude", "magnitude_over_log_lambda"];

fn fefferman_growth(p: &GrowthParams, out: &mut Outcome) -> Result<(), RunError> {
    let rows = growth_table(&p.points, &p.lambdas, &p.fefferman)?;
    let mut t = Table::new("fefferman_growth.csv", &GROWTH_COLUMNS);
    for r in &rows {
        t.push(vec![num(r.point_x1), num(r.point_x2), num(r.lambda), num(r.magnitude), num(r.magnitude_over_log_lambda)]);
        out.item(r);
    }
    out.tables.push(t);
    let mut series = Vec::new();
    let mut fits = Vec::new();
    for (k, chunk) in rows.chunks(p.lambdas.len()).enumerate() {
        let (x1, x2) = p.points[k];
        let fit = log_growth_fit(&chunk.iter().map(|r| (r.lambda, r.magnitude)).collect::<Vec<_>>())?;
        fits.push(json!({"point": [x1, x2], "fit": fit}));
        let min_ratio = chunk.iter().map(|r| r.magnitude_over_log_lambda).fold(f64::INFINITY, f64::min);
        out.assertions.push(Assertion::gt(format!("({x1}, {x2}): min |S|/ln lambda"), min_ratio, 0.0));
        let upper = &chunk[chunk.len() / 2..];
        let hi = upper.iter().map(|r| r.magnitude_over_log_lambda).fold(0.0, f64::max);
        let lo = upper.iter().map(|r| r.magnitude_over_log_lambda).fold(f64::INFINITY, f64::min);
        out.assertions.push(Assertion::lt(format!("({x1}, {x2}): upper-half max/min of |S|/ln lambda"), hi / lo, p.band));
        series.push((format!("({x1}, {x2})"), chunk.iter().map(|r| (r.lambda.ln(), r.magnitude_over_log_lambda)).collect()));
    }
    out.note("fits", fits);
    out.plots.push(("fefferman_growth.svg".into(), svg::line_plot("|S| / ln lambda", "ln lambda", "|S| / ln lambda", &series)));
    Ok(())
}

fn fefferman_flatness(p: &FlatnessParams, out: &mut Outcome) -> Result<(), RunError> {
    let flat = flatness_table(&p.points, p.lambda, &p.multipliers, &p.fefferman)?;
    let mut t = Table::new(
        "fefferman_flatness.csv",
        &["point_x1", "point_x2", "lambda", "multiplier", "lambda_prime", "magnitude"],
    );
    for r in &flat.rows {
        t.push(vec![num(r.point_x1), num(r.point_x2), num(r.lambda), num(r.multiplier), num(r.lambda_prime), num(r.magnitude)]);
        out.item(r);
    }
    out.tables.push(t);
    let growth = growth_table(&p.points, &p.growth_lambdas, &p.fefferman)?;
    let mut gt = Table::new("fefferman_flatness_growth.csv", &GROWTH_COLUMNS);
    for r in &growth {
        gt.push(vec![num(r.point_x1), num(r.point_x2), num(r.lambda), num(r.magnitude), num(r.magnitude_over_log_lambda)]);
    }
    out.tables.push(gt);
    let mut series = Vec::new();
    let mut notes = Vec::new();
    for (k, (chunk, fit)) in growth.chunks(p.growth_lambdas.len()).zip(&flat.fits).enumerate() {
        let (x1, x2) = p.points[k];
        let g = log_growth_fit(&chunk.iter().map(|r| (r.lambda, r.magnitude)).collect::<Vec<_>>())?;
        let fit = fit.ok_or_else(|| RunError::Config("flatness fit needs at least three multipliers".into()))?;
        out.assertions.push(Assertion::lt(
            format!("({x1}, {x2}): |flat slope| < fraction * growth slope"),
            fit.slope.abs(),
            p.slope_fraction * g.slope,
        ));
        notes.push(json!({"point": [x1, x2], "flat_fit": fit, "growth_fit": g}));
        let rows = flat.rows.iter().filter(|r| r.point_x1 == x1 && r.point_x2 == x2);
        series.push((format!("({x1}, {x2})"), rows.map(|r| (r.lambda_prime.ln(), r.magnitude)).collect()));
    }
    out.note("fits", notes);
    out.plots.push((
        "fefferman_flatness.svg".into(),
        svg::line_plot("|S| at mismatched radii", "ln lambda'", "|S|", &series),
    ));
    Ok(())
}

fn oscint(p: &OscintParams, out: &mut Outcome) -> Result<(), RunError> {
    out.tables.push(Table::new("oscint.csv", &["lambda", "magnitude", "re", "im", "abs_error_estimate"]));
    let t = out.tables.len() - 1;
    let mut pairs = Vec::new();
    for &l in &p.lambdas {
        let r = pv_product_phase(l, p.c1, p.c2, &p.quad)?;
        let m = r.value.norm();
        out.tables[t].push(vec![num(l), num(m), num(r.value.re), num(r.value.im), num(r.abs_error_estimate)]);
        pairs.push((l, m));
    }
    let fit = log_growth_fit(&pairs)?;
    out.note("fit", fit);
    let shift = p.c1.abs().max(p.c2.abs());
    if shift == 0.0 {
        out.assertions.push(Assertion::le("|slope - 2 pi| relative to 2 pi", (fit.slope - TAU).abs() / TAU, 0.05));
    } else if shift >= 4.0 / 3.0 {
        out.assertions.push(Assertion::lt("|slope| relative to 2 pi", fit.slope.abs() / TAU, 0.2));
    }
    let pts = pairs.iter().map(|(l, m)| (l.ln(), *m)).collect();
    out.plots.push((
        "oscint.svg".into(),
        svg::line_plot("p.v. product-phase integral", "ln lambda", "magnitude", &[(format!("c = ({}, {})", p.c1, p.c2), pts)]),
    ));
    Ok(())
}

fn restriction_max(p: &RestrictionParams, seed: u64, out: &mut Outcome) -> Result<(), RunError> {
    let signals = packet_signals(&p.packets, 2, p.signals, seed)?;
    let surf = SampledSurface::parabola(p.surface_points)?;
    let dg = DilationGrid::dyadic(2, p.r_min, p.r_count)?;
    let coarse = Grid::centered(2, p.n, p.extent)?;
    let fine = Grid::centered(2, 2 * p.n, p.extent)?;
    out.tables.push(Table::new(
        "restriction_ratios.csv",
        &["signal", "p", "q", "grid_size", "tuple_count", "ratio", "ratio_refined", "factor"],
    ));
    let t = out.tables.len() - 1;
    let mut worst: f64 = 1.0;
    for (i, s) in signals.iter().enumerate() {
        let f = s.sample(&coarse)?;
        if i == 0 {
            let field = maximal_restriction_field(&f, &surf, &p.mollifier, &dg, p.budget)?;
            let mut ft = Table::new("restriction_field.csv", &["u", "xi_1", "xi_2", "value"]);
            for (pt, v) in surf.points().iter().zip(&field) {
                ft.push(vec![num(pt[0]), num(pt[0]), num(pt[1]), num(*v)]);
            }
            out.tables.push(ft);
            let pts = surf.points().iter().zip(&field).map(|(pt, v)| (pt[0], *v)).collect();
            out.plots.push((
                "restriction_field.svg".into(),
                svg::line_plot("maximal restriction field, signal 0", "u", "value", &[("signal 0".into(), pts)]),
            ));
        }
        let a = restriction_ratio(&f, &surf, &p.mollifier, &dg, p.p.0, p.q.0, p.budget)?;
        let (refined, factor) = if p.refine {
            let b = restriction_ratio(&s.sample(&fine)?, &surf, &p.mollifier, &dg, p.p.0, p.q.0, p.budget)?;
            let k = (a / b).max(b / a);
            worst = worst.max(k);
            out.assertions.push(Assertion::lt(format!("signal {i}: ratio factor under grid doubling"), k, p.band));
            (num(b), num(k))
        } else {
            (String::new(), String::new())
        };
        out.tables[t].push(vec![
            i.to_string(),
            exponent_cell(p.p.0),
            exponent_cell(p.q.0),
            joined(coarse.shape()),
            dg.tuple_count().to_string(),
            num(a),
            refined,
            factor,
        ]);
        out.item(json!({"signal": i, "packets": s, "ratio": a}));
    }
    if p.refine {
        out.note("max_refinement_factor", worst);
    }
    Ok(())
}

fn lebesgue_profile(p: &LebesgueParams, seed: u64, out: &mut Outcome) -> Result<(), RunError> {
    let d = p.xi.len();
    let f = test_signal(p.signal, &p.packets, Grid::centered(d, p.n, p.extent)?, seed)?;
    let mut cols: Vec<String> = vec!["path".into(), "step".into()];
    cols.extend((1..=d).map(|j| format!("r_{j}")));
    cols.extend(["max_radius".into(), "deviation".into()]);
    out.tables.push(Table { file: "lebesgue_profile.csv".into(), columns: cols, rows: Vec::new() });
    let t = out.tables.len() - 1;
    let mut series = Vec::new();
    let mut orders = Vec::new();
    for path in &p.paths {
        let rows = lebesgue_point_profile(&f, &p.xi, &path.radii)?;
        for (k, r) in rows.iter().enumerate() {
            let mut row = vec![path.name.clone(), k.to_string()];
            row.extend(r.radii.iter().map(|v| num(*v)));
            row.extend([num(r.max_radius), num(r.deviation)]);
            out.tables[t].push(row);
        }
        let fit = lebesgue_order(&rows)?;
        out.assertions.push(Assertion::ge(format!("{}: fitted order in max r_j", path.name), fit.slope, p.min_order));
        orders.push(json!({"path": path.name, "fit": fit}));
        series.push((
            path.name.clone(),
            rows.iter().map(|r| (r.max_radius.log10(), r.deviation.max(1e-300).log10())).collect(),
        ));
    }
    out.note("orders", orders);
    out.plots.push((
        "lebesgue_profile.svg".into(),
        svg::line_plot("Lebesgue-point deviation", "log10 max r_j", "log10 deviation", &series),
    ));
    Ok(())
}

fn quadrant_identity(p: &QuadrantParams, seed: u64, out: &mut Outcome) -> Result<(), RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..p.draws)
        .map(|i| {
            let d = 1 + i % p.max_d;
            let x = (0..d)
                .map(|_| {
                    let v: f64 = rng.gen_range(p.x_range.0..p.x_range.1);
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            let r = (0..d).map(|_| 10f64.powf(rng.gen_range(p.log10_r_range.0..p.log10_r_range.1))).collect();
            (x, r)
        })
        .collect();
    let checks = par::map_slice(&draws, |(x, r)| quadrant_identity_check(&p.mollifier, r, x));
    let mut cols: Vec<String> = vec!["draw".into(), "d".into()];
    cols.extend((1..=p.max_d).map(|j| format!("x_{j}")));
    cols.extend((1..=p.max_d).map(|j| format!("r_{j}")));
    cols.extend(["lhs".into(), "rhs".into(), "residual".into(), "evaluations".into()]);
    let mut t = Table { file: "quadrant_identity.csv".into(), columns: cols, rows: Vec::new() };
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for (i, ((x, r), c)) in draws.iter().zip(checks).enumerate() {
        let c = match c {
            Ok(c) => c,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let pad = |v: &[f64]| (0..p.max_d).map(|j| v.get(j).map_or(String::new(), |a| num(*a))).collect::<Vec<_>>();
        let mut row = vec![i.to_string(), x.len().to_string()];
        row.extend(pad(x));
        row.extend(pad(r));
        row.extend([num(c.lhs), num(c.rhs), num(c.residual), c.evaluations.to_string()]);
        t.push(row);
        worst = worst.max(c.residual);
    }
    out.tables.push(t);
    out.note("max_residual", worst);
    out.assertions.push(Assertion::lt("max quadrant residual", worst, p.tolerance));
    failure.map_or(Ok(()), |e| Err(e.into()))
}
