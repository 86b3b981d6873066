use nalgebra::DVector;
use proptest::prelude::*;
use setmem::oracle::{ltv_vertex_oracle, ltv_vertex_oracle_with, vertex_oracle, OracleMethod};
use setmem::sim::SimRng;
use setmem::{DriftBounds, IntervalVector, LtiConfig, LtiEstimator, LtvEstimator, RadiusMode, RlsConfig};

struct Instance {
    xs: Vec<DVector<f64>>,
    ys: Vec<f64>,
    noise: Vec<IntervalVector>,
    drift: Vec<DriftBounds>,
    cfg: LtiConfig,
}

fn instance(seed: u64, n: usize, len: usize, mode: RadiusMode) -> Instance {
    let mut rng = SimRng::new(seed);
    let lambda = rng.uniform_in(0.2, 0.99);
    let p0 = rng.uniform_in(0.5, 50.0);
    let c = DVector::from_fn(n, |_, _| rng.uniform_in(-1.0, 1.0));
    let r = DVector::from_fn(n, |_, _| rng.uniform_in(0.1, 2.0));
    let prior = IntervalVector::from_center_radius(&c, &r).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut noise = Vec::new();
    let mut drift = Vec::new();
    for _ in 0..len {
        xs.push(DVector::from_fn(n, |_, _| rng.standard_normal()));
        ys.push(rng.standard_normal());
        let lo = rng.uniform_in(-0.5, 0.0);
        let hi = rng.uniform_in(0.0, 0.5);
        noise.push(IntervalVector::scalar(lo, hi).unwrap());
        drift.push(
            DriftBounds::new(
                DVector::from_fn(n, |_, _| rng.uniform_in(-0.05, 0.05)),
                DVector::from_fn(n, |_, _| rng.uniform_in(0.0, 0.1)),
            )
            .unwrap(),
        );
    }
    let cfg = LtiConfig::new(RlsConfig::isotropic(n, p0, lambda).unwrap(), prior, mode);
    Instance { xs, ys, noise, drift, cfg }
}

fn close(a: &IntervalVector, b: &IntervalVector, tol: f64) -> bool {
    let scale = 1.0 + a.lower().amax().max(a.upper().amax());
    (a.lower() - b.lower()).amax() <= tol * scale && (a.upper() - b.upper()).amax() <= tol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_radius_is_the_vertex_hull(seed in any::<u64>(), len in 1usize..=8) {
        let inst = instance(seed, 2, len, RadiusMode::Exact);
        let mut est = LtiEstimator::new(&inst.cfg).unwrap();
        for t in 1..=len {
            let e = est.step(&inst.xs[t - 1], inst.ys[t - 1], &inst.noise[t - 1]).unwrap();
            let o = vertex_oracle(&inst.xs[..t], &inst.ys[..t], &inst.noise[..t], &inst.cfg.prior, &inst.cfg.rls).unwrap();
            prop_assert!((e.raw.radius() - o.error.radius()).amax() <= 1e-10);
            prop_assert!(close(&e.raw, &o.parameter_box(), 1e-10));
        }
    }

    #[test]
    fn ltv_exact_radius_is_the_vertex_hull(seed in any::<u64>(), len in 1usize..=4) {
        let inst = instance(seed, 2, len, RadiusMode::Exact);
        let mut est = LtvEstimator::new(&inst.cfg).unwrap();
        for t in 1..=len {
            let e = est.step(&inst.xs[t - 1], inst.ys[t - 1], &inst.noise[t - 1], &inst.drift[t - 1]).unwrap();
            let o = ltv_vertex_oracle(&inst.xs[..t], &inst.ys[..t], &inst.noise[..t], &inst.drift[..t], &inst.cfg.prior, &inst.cfg.rls).unwrap();
            prop_assert!((e.raw.radius() - o.error.radius()).amax() <= 1e-10);
            prop_assert!(close(&e.raw, &o.parameter_box(), 1e-10));
        }
    }

    #[test]
    fn sign_pattern_matches_enumeration(seed in any::<u64>(), len in 1usize..=3) {
        let inst = instance(seed, 2, len, RadiusMode::Exact);
        let args = (&inst.xs[..], &inst.ys[..], &inst.noise[..], &inst.drift[..]);
        let a = ltv_vertex_oracle_with(args.0, args.1, args.2, args.3, &inst.cfg.prior, &inst.cfg.rls, OracleMethod::Enumerate).unwrap();
        let b = ltv_vertex_oracle_with(args.0, args.1, args.2, args.3, &inst.cfg.prior, &inst.cfg.rls, OracleMethod::SignPattern).unwrap();
        prop_assert!(close(&a.error, &b.error, 1e-12));
    }

    #[test]
    fn truncation_never_tightens(seed in any::<u64>(), m in 1usize..=6) {
        let inst = instance(seed, 3, 40, RadiusMode::Exact);
        let mut exact = LtiEstimator::new(&inst.cfg).unwrap();
        let mut trunc = LtiEstimator::new(&LtiConfig { radius_mode: RadiusMode::Truncated(m), ..inst.cfg.clone() }).unwrap();
        for t in 0..40 {
            let e = exact.step(&inst.xs[t], inst.ys[t], &inst.noise[t]).unwrap();
            let h = trunc.step(&inst.xs[t], inst.ys[t], &inst.noise[t]).unwrap();
            prop_assert!((e.raw.center() - h.raw.center()).amax() <= 1e-12 * (1.0 + h.raw.radius().amax()));
            let slack = 1e-9 * (1.0 + e.raw.radius().amax());
            prop_assert!(e.raw.radius().iter().zip(h.raw.radius().iter()).all(|(a, b)| *a <= b + slack));
            if t < m {
                prop_assert_eq!(&e.raw, &h.raw);
            }
        }
    }

    #[test]
    fn refined_box_sits_inside_raw_and_prior(seed in any::<u64>()) {
        let inst = instance(seed, 2, 30, RadiusMode::Truncated(4));
        let cfg = inst.cfg.clone().with_monotonic(true);
        let mut est = LtiEstimator::new(&cfg).unwrap();
        let mut prev = cfg.prior.clone();
        for t in 0..30 {
            let e = est.step(&inst.xs[t], inst.ys[t], &inst.noise[t]).unwrap();
            let r = e.refined.unwrap();
            if !e.inconsistent {
                prop_assert!(r.is_subset_of(&e.raw, 0.0).unwrap());
            }
            prop_assert!(r.is_subset_of(&prev, 0.0).unwrap());
            prev = r;
        }
    }
}
