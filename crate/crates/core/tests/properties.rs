use std::sync::Arc;

use maxtrunc_core::christ_kiselev::{
    ck_constant, maximal_truncation, maximal_truncation_iterated, maximal_truncation_norm_to_infinity,
    random_instance, ChainSystem, InstanceShape, MaximalTruncationOperator,
};
use maxtrunc_core::mpz_max::{mpz_maximal_field, random_packet_signal, Grid, PacketSpec, RGrid, DEFAULT_BUDGET};
use maxtrunc_core::restriction_lab::{maximal_restriction_field, DilationGrid, MollifierSpec, SampledSurface};
use maxtrunc_core::spaces::{
    apply_kernel, holder_conjugate, holder_upper_bound, lp_norm, norm_exact_endpoint, norm_lower_bound_ascent,
    AscentConfig,
};
use maxtrunc_core::{Complex64, Exponent, Signal, WeightedSpace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::INFINITY),
        (1.0f64..50.0).prop_map(|p| Exponent::new(p).unwrap()),
    ]
}

fn instance(seed: u64, d: usize) -> maxtrunc_core::christ_kiselev::CkInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(&mut rng, &InstanceShape { d, max_factor: 3, max_outputs: 4, max_chain: 3 }).unwrap()
}

fn quick() -> AscentConfig {
    AscentConfig { restarts: 3, steps: 60, polish_iterations: 20, ..AscentConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_is_an_involution(p in exponent()) {
        let pc = holder_conjugate(p);
        prop_assert_eq!(holder_conjugate(pc), p);
        if !p.is_infinite() && !pc.is_infinite() {
            prop_assert!((p.reciprocal() + pc.reciprocal() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_norms_grow_with_the_set(
        weights in prop::collection::vec(0.1f64..3.0, 1..8),
        p in exponent(),
        cut in 0usize..8,
    ) {
        let n = weights.len();
        let space = Arc::new(WeightedSpace::new(weights).unwrap());
        let ind = |k: usize| Signal::from_real(space.clone(), &(0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect::<Vec<_>>()).unwrap();
        let k = cut.min(n);
        prop_assert!(lp_norm(&ind(k), p) <= lp_norm(&ind(n), p) + 1e-12);
    }

    #[test]
    fn kernels_and_norms_scale(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0, p in exponent()) {
        let inst = instance(seed, 1);
        let a = Complex64::new(re, im);
        let scaled = Signal::new(inst.f.space().clone(), inst.f.values().iter().map(|v| v * a).collect()).unwrap();
        let lhs = apply_kernel(&inst.kernel, &scaled).unwrap();
        let rhs = apply_kernel(&inst.kernel, &inst.f).unwrap();
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((x - y * a).norm() <= 1e-12 * (1.0 + x.norm()));
        }
        let n = lp_norm(&inst.f, p);
        prop_assert!((lp_norm(&scaled, p) - a.norm() * n).abs() <= 1e-12 * (1.0 + a.norm() * n));
    }

    #[test]
    fn constants_multiply_across_dimensions(p in 1.0f64..3.0, gap in 0.1f64..5.0, d1 in 0usize..4, d2 in 0usize..4) {
        let (p, q) = (Exponent::new(p).unwrap(), Exponent::new(p + gap).unwrap());
        let joint = ck_constant(p, q, d1 + d2).unwrap();
        let split = ck_constant(p, q, d1).unwrap() * ck_constant(p, q, d2).unwrap();
        prop_assert!((joint - split).abs() <= 1e-12 * joint);
        prop_assert!(ck_constant(p, q, 1).unwrap() > 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ascent_never_exceeds_holder(seed in any::<u64>(), pi in 0usize..3) {
        let inst = instance(seed, 1);
        let (p, q) = [(1.0, 2.0), (2.0, 4.0), (1.5, 3.0)][pi];
        let (p, q) = (Exponent::new(p).unwrap(), Exponent::new(q).unwrap());
        let lower = norm_lower_bound_ascent(&inst.kernel, p, q, &quick()).unwrap().ratio;
        prop_assert!(lower <= holder_upper_bound(&inst.kernel, p, q) * (1.0 + 1e-12));
    }

    #[test]
    fn maximal_truncation_dominates_every_tuple(seed in any::<u64>(), d in 1usize..3) {
        let inst = instance(seed, d);
        let star = maximal_truncation(&inst.kernel, &inst.system, &inst.f).unwrap();
        let full = apply_kernel(&inst.kernel, &inst.f).unwrap();
        // appending the whole factor to every chain adds the untruncated tuple
        let extended = ChainSystem::new(
            inst.system.chains().iter().map(|c| c.extended(vec![true; c.axis_size()]).unwrap()).collect(),
        )
        .unwrap();
        let star_ext = maximal_truncation(&inst.kernel, &extended, &inst.f).unwrap();
        for x in 0..inst.kernel.rows() {
            prop_assert!(star_ext.values[x] >= full.values()[x].norm() * (1.0 - 1e-12));
            prop_assert!(star_ext.values[x] >= star.values[x]);
        }
    }

    #[test]
    fn iterated_and_flat_suprema_agree(seed in any::<u64>(), d in 1usize..3) {
        let inst = instance(seed, d);
        let flat = maximal_truncation(&inst.kernel, &inst.system, &inst.f).unwrap().values;
        let iterated = maximal_truncation_iterated(&inst.kernel, &inst.system, &inst.f).unwrap();
        prop_assert_eq!(flat, iterated);
    }

    #[test]
    fn ascent_is_exact_into_l_infinity(seed in any::<u64>(), p in 1.0f64..4.0) {
        let inst = instance(seed, 1);
        let p = Exponent::new(p).unwrap();
        let exact = norm_exact_endpoint(&inst.kernel, p, Exponent::INFINITY).unwrap();
        let a = norm_lower_bound_ascent(&inst.kernel, p, Exponent::INFINITY, &quick()).unwrap().ratio;
        prop_assert!((a - exact).abs() <= 1e-9 * exact.max(1e-300));
        let op = MaximalTruncationOperator::new(&inst.kernel, &inst.system).unwrap();
        let exact = maximal_truncation_norm_to_infinity(&inst.kernel, &inst.system, p).unwrap();
        let a = norm_lower_bound_ascent(&op, p, Exponent::INFINITY, &quick()).unwrap().ratio;
        prop_assert!((a - exact).abs() <= 1e-9 * exact.max(1e-300));
    }
}

fn sorted_radii(raw: Vec<f64>) -> Vec<f64> {
    let mut r = raw;
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mpz_field_grows_with_more_radii(
        seed in any::<u64>(),
        a in prop::collection::vec(0.2f64..4.0, 1..4),
        b in prop::collection::vec(0.2f64..4.0, 1..4),
        extra in 0.2f64..4.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap().sample(&Grid::centered(2, 24, 4.0).unwrap()).unwrap();
        let xi = Grid::centered(2, 8, 1.5).unwrap();
        let (a, b) = (sorted_radii(a), sorted_radii(b));
        let small = RGrid::new(vec![a.clone(), b.clone()]).unwrap();
        let big = RGrid::new(vec![sorted_radii([a, vec![extra]].concat()), b]).unwrap();
        let lo = mpz_maximal_field(&f, &small, &xi, DEFAULT_BUDGET).unwrap();
        let hi = mpz_maximal_field(&f, &big, &xi, DEFAULT_BUDGET).unwrap();
        for (l, h) in lo.values.iter().zip(&hi.values) {
            prop_assert!(h >= l);
        }
    }

    #[test]
    fn restriction_field_grows_with_more_radii(
        seed in any::<u64>(),
        a in prop::collection::vec(0.05f64..2.0, 1..4),
        b in prop::collection::vec(0.05f64..2.0, 1..4),
        extra in 0.05f64..2.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_packet_signal(&mut rng, 2, &PacketSpec::default()).unwrap().sample(&Grid::centered(2, 24, 4.0).unwrap()).unwrap();
        let surf = SampledSurface::parabola(16).unwrap();
        let spec = MollifierSpec::default();
        let (a, b) = (sorted_radii(a), sorted_radii(b));
        let small = DilationGrid::new(vec![a.clone(), b.clone()]).unwrap();
        let big = DilationGrid::new(vec![a, sorted_radii([b, vec![extra]].concat())]).unwrap();
        let lo = maximal_restriction_field(&f, &surf, &spec, &small, DEFAULT_BUDGET).unwrap();
        let hi = maximal_restriction_field(&f, &surf, &spec, &big, DEFAULT_BUDGET).unwrap();
        for (l, h) in lo.iter().zip(&hi) {
            prop_assert!(h >= l);
        }
    }
}
