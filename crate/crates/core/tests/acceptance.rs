//! Acceptance criteria, one pass/fail line each.
//!
//! Runs without the libtest harness so that every line is printed; the
//! process exits nonzero when any criterion fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use maxtrunc_core::christ_kiselev::{
    build_ck_certificate, maximal_truncation_norm_to_infinity, random_chain, random_instance, verify_ck_bound,
    ChainSystem, InstanceShape, MaximalTruncationOperator,
};
use maxtrunc_core::fefferman::{
    counterexample_sequences, flatness_table, growth_table, s_partial, s_partial_direct, FeffermanConfig,
    Representation,
};
use maxtrunc_core::mpz_max::{
    convergence_profile, mpz_maximal_field, mpz_ratio, partial_ft, random_packet_signal, Grid, GridSignal,
    PacketSpec, RGrid, DEFAULT_BUDGET,
};
use maxtrunc_core::oscillatory::{log_growth_fit, pv_product_phase, pv_product_phase_tensor, QuadratureConfig};
use maxtrunc_core::restriction_lab::{
    lebesgue_order, lebesgue_point_profile, quadrant_identity_check, restriction_ratio, DilationGrid,
    MollifierSpec, SampledSurface, LEBESGUE_ORDER_TOL,
};
use maxtrunc_core::spaces::{
    apply_sublinear, norm_exact_endpoint, norm_lower_bound_ascent, weighted_norm, AscentConfig, SublinearOperator,
};
use maxtrunc_core::{Complex64, Exponent, Kernel, WeightedSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn exp(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

const PAIRS: [(f64, f64); 3] = [(1.0, 2.0), (2.0, 4.0), (2.0, f64::INFINITY)];

fn ck_sound_bound() -> Outcome {
    let t = Instant::now();
    let cfg = AscentConfig::default();
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let shape = InstanceShape { d: 1 + (i % 2) as usize, max_factor: 4, max_outputs: 8, max_chain: 4 };
        let inst = random_instance(&mut rng, &shape).unwrap();
        let (p, q) = PAIRS[(i % 3) as usize];
        let r = verify_ck_bound(&inst.kernel, &inst.system, exp(p), exp(q), &AscentConfig { seed: i, ..cfg }).unwrap();
        if !r.holds {
            failures += 1;
        }
        worst = worst.max(r.lower / r.bound);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 60.0,
        format!("500 instances, {failures} failures, max lower/bound {worst:.3}, {secs:.1} s (limit 60 s)"),
    )
}

fn ck_certificates() -> Outcome {
    let mut bad_checks = 0;
    let mut non_minimal = 0;
    let mut checks = 0;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + i);
        let shape = InstanceShape { d: 1 + (i % 2) as usize, ..InstanceShape::default() };
        let inst = random_instance(&mut rng, &shape).unwrap();
        let (p, q) = PAIRS[(i % 3) as usize];
        let cert = build_ck_certificate(&inst.kernel, &inst.system, &inst.f, exp(p), exp(q)).unwrap();
        checks += cert.checks().count();
        bad_checks += cert.failures().len();
        if !cert.splits_minimal() {
            non_minimal += 1;
        }
    }
    outcome(
        bad_checks == 0 && non_minimal == 0,
        format!("200 certificates, {checks} inequalities, {bad_checks} violated, {non_minimal} non-minimal splits"),
    )
}

fn random_small_kernel(rng: &mut ChaCha8Rng) -> Kernel {
    let ny = rng.gen_range(1..=3);
    let nx = rng.gen_range(1..=4);
    let dom = Arc::new(WeightedSpace::new((0..ny).map(|_| rng.gen_range(0.25..2.0)).collect()).unwrap());
    let cod = Arc::new(WeightedSpace::new((0..nx).map(|_| rng.gen_range(0.25..2.0)).collect()).unwrap());
    let entries = (0..nx * ny).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    Kernel::new(dom, cod, entries).unwrap()
}

fn brute_force_norm(op: &dyn SublinearOperator, p: Exponent, q: Exponent, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let nu = op.domain().weights().to_vec();
    let mu = op.codomain().weights().to_vec();
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let vals: Vec<Complex64> =
            nu.iter().map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mags: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
        let den = weighted_norm(&mags, &nu, p);
        if den == 0.0 {
            continue;
        }
        let f = maxtrunc_core::Signal::new(op.domain().clone(), vals).unwrap();
        let out = apply_sublinear(op, &f).unwrap();
        best = best.max(weighted_norm(&out, &mu, q) / den);
    }
    best
}

fn ascent_oracles() -> Outcome {
    let cfg = AscentConfig::default();
    let mut worst_sampling: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    for i in 0..6u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + i);
        let k = random_small_kernel(&mut rng);
        let chain = random_chain(&mut rng, k.cols(), 3);
        let sys = ChainSystem::new(vec![chain]).unwrap();
        let maximal = MaximalTruncationOperator::new(&k, &sys).unwrap();
        let ops: [&dyn SublinearOperator; 2] = [&k, &maximal];
        for op in ops {
            let (p, q) = (exp(2.0), exp(4.0));
            let a = norm_lower_bound_ascent(op, p, q, &AscentConfig { seed: i, ..cfg }).unwrap().ratio;
            let b = brute_force_norm(op, p, q, 200_000, &mut rng);
            worst_sampling = worst_sampling.max((a - b).abs() / b);
        }
        for (p, q) in [(1.0, 2.0), (1.0, 4.0), (2.0, f64::INFINITY), (4.0 / 3.0, f64::INFINITY)] {
            let (p, q) = (exp(p), exp(q));
            let exact = norm_exact_endpoint(&k, p, q).unwrap();
            let a = norm_lower_bound_ascent(&k, p, q, &cfg).unwrap().ratio;
            worst_exact = worst_exact.max((a - exact).abs() / exact);
            if q.is_infinite() {
                let exact = maximal_truncation_norm_to_infinity(&k, &sys, p).unwrap();
                let a = norm_lower_bound_ascent(&maximal, p, q, &cfg).unwrap().ratio;
                worst_exact = worst_exact.max((a - exact).abs() / exact);
            }
        }
    }
    outcome(
        worst_sampling <= 0.02 && worst_exact <= 1e-6,
        format!(
            "(2,4) vs 2e5-sample brute force: max rel gap {worst_sampling:.2e} (limit 2e-2); endpoints: max rel gap {worst_exact:.2e} (limit 1e-6)"
        ),
    )
}

fn oscillatory_log_growth() -> Outcome {
    let t = Instant::now();
    let cfg = QuadratureConfig::default();
    let pairs: Vec<(f64, f64)> =
        [1e2, 1e3, 1e4, 1e5].iter().map(|&l| (l, pv_product_phase(l, 0.0, 0.0, &cfg).unwrap().value.norm())).collect();
    let fit = log_growth_fit(&pairs).unwrap();
    let rel = (fit.slope - TAU).abs() / TAU;
    let one_d = pv_product_phase(3.0, 0.0, 0.0, &cfg).unwrap().value;
    let two_d = pv_product_phase_tensor(3.0, 0.0, 0.0, 64);
    let gap = (one_d - two_d).norm();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        rel <= 0.05 && gap <= 1e-6 && secs < 30.0,
        format!(
            "slope {:.6} vs 2pi (rel {rel:.2e}, limit 5e-2); 1D vs 2D at lambda=3: {gap:.2e} (limit 1e-6); {secs:.1} s (limit 30 s)",
            fit.slope
        ),
    )
}

fn shifted_phase_bounded() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let (c1, c2) = loop {
            let c: (f64, f64) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            if c.0.abs().max(c.1.abs()) >= 4.0 / 3.0 {
                break c;
            }
        };
        let pairs: Vec<(f64, f64)> =
            [10.0, 100.0, 1000.0].iter().map(|&l| (l, pv_product_phase(l, c1, c2, &cfg).unwrap().value.norm())).collect();
        let s = log_growth_fit(&pairs).unwrap().slope.abs();
        worst = worst.max(s);
        if s >= 0.2 * TAU {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("100 draws, {failures} failures, max |slope|/2pi {:.3} (limit 0.2)", worst / TAU))
}

fn fefferman_separation() -> Outcome {
    let t = Instant::now();
    let cfg = FeffermanConfig::default();
    let lambdas: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
    let rows = growth_table(&[(0.8, 0.8)], &lambdas, &cfg).unwrap();
    let upper: Vec<f64> = rows[rows.len() / 2..].iter().map(|r| r.magnitude_over_log_lambda).collect();
    let positive = rows.iter().all(|r| r.magnitude_over_log_lambda > 0.0);
    let spread = upper.iter().copied().fold(0.0, f64::max) / upper.iter().copied().fold(f64::INFINITY, f64::min);
    let growth = log_growth_fit(&rows.iter().map(|r| (r.lambda, r.magnitude)).collect::<Vec<_>>()).unwrap().slope;
    let flat = flatness_table(&[(0.8, 0.8)], 16.0, &[3.0, 9.0, 27.0], &cfg).unwrap();
    let flat_slope = flat.fits[0].unwrap().slope.abs();
    let mut oracle_gap: f64 = 0.0;
    for (l, r1, r2, x1, x2) in [(0.5, 1.0, 2.0, 0.3, -0.4), (1.0, 2.0, 2.0, 0.8, 0.8), (0.25, 1.5, 0.5, 1.9, 0.1)] {
        let a = s_partial(l, r1, r2, x1, x2, &cfg).unwrap().value;
        let b = s_partial_direct(l, r1, r2, x1, x2, 0.05);
        oracle_gap = oracle_gap.max((a - b).norm());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        positive && spread < 3.0 && flat_slope < 0.2 * growth && oracle_gap <= 1e-4 && secs < 600.0,
        format!(
            "upper-half max/min {spread:.3} (limit 3); flatness slope {flat_slope:.2e} vs 0.2*growth {:.3e}; Dirichlet oracle gap {oracle_gap:.2e} (limit 1e-4); {secs:.1} s (limit 600 s)",
            0.2 * growth
        ),
    )
}

fn sequences() -> Outcome {
    let s = counterexample_sequences(5).unwrap();
    let exact = s.a(1).ok() == Some(1.0)
        && s.a(2).ok() == Some(0.5)
        && s.a(3).ok() == Some(1.0 / 16.0)
        && s.lambda(2).ok() == Some(16.0)
        && s.lambda(3).ok() == Some(2f64.powi(48));
    let flagged = s.terms[3].lambda.representation == Representation::Overflow
        && s.terms[4].a.representation == Representation::Underflow
        && s.terms[4].lambda.representation == Representation::ExponentOverflow
        && s.lambda(4).is_err()
        && s.a(5).is_err()
        && s.terms.iter().all(|t| t.a.value != Some(0.0) && t.lambda.value != Some(0.0));
    outcome(
        exact && flagged && s.identities_hold(),
        format!("exact values {exact}; lambda_4 overflow and a_5 underflow flagged {flagged}; identities {}", s.identities_hold()),
    )
}

fn mpz() -> Outcome {
    let t = Instant::now();
    let rg = RGrid::dyadic(2, 0.5, 4).unwrap();
    let mut mismatches = 0;
    for i in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + i);
        let s = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap();
        let f = s.sample(&Grid::centered(2, 32, 4.0).unwrap()).unwrap();
        let xi = Grid::fitted_dual(f.grid(), 2.0).unwrap();
        let field = mpz_maximal_field(&f, &rg, &xi, DEFAULT_BUDGET).unwrap();
        let mut brute = vec![0.0f64; xi.len()];
        for tuple in rg.tuples() {
            let pf = partial_ft(&f, &tuple, &xi).unwrap();
            for (b, v) in brute.iter_mut().zip(pf.values()) {
                *b = b.max(v.norm());
            }
        }
        if field.values != brute {
            mismatches += 1;
        }
    }
    let p = exp(4.0 / 3.0);
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + i);
        let s = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap();
        let coarse = Grid::centered(2, 32, 4.0).unwrap();
        let fine = Grid::centered(2, 64, 4.0).unwrap();
        let xi = Grid::fitted_dual(&coarse, 2.0).unwrap();
        let a = mpz_ratio(&s.sample(&coarse).unwrap(), p, &rg, &xi, DEFAULT_BUDGET).unwrap();
        let b = mpz_ratio(&s.sample(&fine).unwrap(), p, &rg, &xi, DEFAULT_BUDGET).unwrap();
        worst = worst.max((b - a).abs() / a);
    }
    let gauss = GridSignal::sample(Grid::centered(2, 64, 8.0).unwrap(), |x| {
        Complex64::new((-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
    })
    .unwrap();
    let path: Vec<Vec<f64>> = (1..=8).map(|i| {
        let t = 0.5 * i as f64;
        vec![t, t * t]
    }).collect();
    let errs = convergence_profile(&gauss, &[0.3, -0.2], &path).unwrap();
    let last = *errs.last().unwrap();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && worst < 0.1 && last < 1e-3 && secs < 300.0,
        format!(
            "brute-force mismatches {mismatches}/10; max refinement change {worst:.2e} (limit 0.1); final Gaussian error {last:.2e} (limit 1e-3); {secs:.1} s (limit 300 s)"
        ),
    )
}

fn restriction() -> Outcome {
    let spec = MollifierSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_residual: f64 = 0.0;
    for i in 0..100 {
        let d = 1 + i % 2;
        let x: Vec<f64> = (0..d)
            .map(|_| {
                let v: f64 = rng.gen_range(0.05..2.0);
                if rng.gen_bool(0.5) { v } else { -v }
            })
            .collect();
        let r: Vec<f64> = (0..d).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
        worst_residual = worst_residual.max(quadrant_identity_check(&spec, &r, &x).unwrap().residual);
    }
    let gauss = GridSignal::sample(Grid::centered(2, 64, 8.0).unwrap(), |x| {
        Complex64::new((-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
    })
    .unwrap();
    let iso: Vec<Vec<f64>> = (4..=9).map(|k| vec![0.5f64.powi(k); 2]).collect();
    let aniso: Vec<Vec<f64>> = (4..=9).map(|k| {
        let t = 0.5f64.powi(k);
        vec![t, t * t]
    }).collect();
    let orders: Vec<f64> = [iso, aniso]
        .iter()
        .map(|path| lebesgue_order(&lebesgue_point_profile(&gauss, &[0.3, 0.09], path).unwrap()).unwrap().slope)
        .collect();
    let surf = SampledSurface::parabola(201).unwrap();
    let dg = DilationGrid::dyadic(2, 0.05, 4).unwrap();
    let (p, q) = (exp(1.2), Exponent::TWO);
    let mut worst_factor: f64 = 1.0;
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + i);
        let s = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap();
        let ratio = |n: usize| {
            let f = s.sample(&Grid::centered(2, n, 4.0).unwrap()).unwrap();
            restriction_ratio(&f, &surf, &spec, &dg, p, q, DEFAULT_BUDGET).unwrap()
        };
        let (a, b) = (ratio(32), ratio(64));
        worst_factor = worst_factor.max((a / b).max(b / a));
    }
    outcome(
        worst_residual < 1e-6 && orders.iter().all(|o| *o >= 1.0 - LEBESGUE_ORDER_TOL) && worst_factor < 3.0,
        format!(
            "quadrant residual {worst_residual:.2e} (limit 1e-6); Lebesgue orders iso {:.4} aniso {:.4} (limit 1 - {LEBESGUE_ORDER_TOL}); refinement factor {worst_factor:.4} (limit 3)",
            orders[0], orders[1]
        ),
    )
}

/// Serialized outputs of a seeded slice of the pipeline.
fn reproducible_slice() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let inst = random_instance(&mut rng, &InstanceShape::default()).unwrap();
    let ck = verify_ck_bound(&inst.kernel, &inst.system, exp(2.0), exp(4.0), &AscentConfig { seed: 42, ..AscentConfig::default() }).unwrap();
    let cert = build_ck_certificate(&inst.kernel, &inst.system, &inst.f, exp(1.0), exp(2.0)).unwrap();
    let growth = growth_table(&[(0.8, 0.8), (0.7, 0.9)], &[16.0, 64.0, 256.0], &FeffermanConfig::default()).unwrap();
    let s = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap();
    let f = s.sample(&Grid::centered(2, 32, 4.0).unwrap()).unwrap();
    let xi = Grid::fitted_dual(f.grid(), 2.0).unwrap();
    let field = mpz_maximal_field(&f, &RGrid::dyadic(2, 0.5, 4).unwrap(), &xi, DEFAULT_BUDGET).unwrap();
    serde_json::to_string(&(ck, cert, growth, field)).unwrap()
}

fn reproducibility_and_wall_clock(started: Instant) -> Outcome {
    let serial = || rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = serial().install(reproducible_slice);
    let b = serial().install(reproducible_slice);
    let pooled = reproducible_slice();
    let elapsed = started.elapsed();
    let limit = Duration::from_secs(15 * 60);
    outcome(
        a == b && elapsed < limit,
        format!(
            "serial reruns byte-identical {} ({} bytes), pooled run identical {}; acceptance wall clock {:.1} s (limit 900 s)",
            a == b,
            a.len(),
            a == pooled,
            elapsed.as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn main() {
    let started = Instant::now();
    let criteria: Vec<Criterion> = vec![
        ("christ-kiselev sound bound", Box::new(ck_sound_bound)),
        ("certificate validity", Box::new(ck_certificates)),
        ("exact-vs-ascent oracle", Box::new(ascent_oracles)),
        ("oscillatory log growth", Box::new(oscillatory_log_growth)),
        ("shifted-phase boundedness", Box::new(shifted_phase_bounded)),
        ("fefferman growth/flatness separation", Box::new(fefferman_separation)),
        ("counterexample sequences", Box::new(sequences)),
        ("mpz maximal operator", Box::new(mpz)),
        ("restriction lab", Box::new(restriction)),
        ("wall clock and reproducibility", Box::new(move || reproducibility_and_wall_clock(started))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} [{:.1} s] {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
