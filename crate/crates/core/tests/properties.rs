//! Randomized invariants of the cone, utility, budget, demand, estimate and
//! oracle modules.

mod common;

use common::{budget_point, dot, rng, CdInstance};
use consumer_sensitivity::oracles::{dini_pair, epsilon_normal_test, BudgetGraphSampler, SamplingSchedule};
use consumer_sensitivity::subdiff::Hypothesis;
use consumer_sensitivity::utility::{central_difference, midpoint_concavity_violation};
use consumer_sensitivity::{
    budget_contains, coderivative_budget, demand, demand_closed_form, demand_grid, limiting_subdiff_estimate,
    normal_cone_at, normal_cone_contains, rate_of_change_bounds, Exactness, Hypotheses, LimitingMode,
    Maximizers, OrthantCone, RaySegmentSet, SolverConfig, SubgradientSet, UtilityModel, DEFAULT_ACTIVE_TOL,
};
use proptest::prelude::*;

fn all_hypotheses() -> Hypotheses {
    [
        Hypothesis::NonSatiety,
        Hypothesis::InnerSemicontinuity,
        Hypothesis::UpperLipschitzianSelection,
        Hypothesis::DirectionalLipschitz,
    ]
    .into_iter()
    .collect()
}

fn bundle() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 1e-3..5.0f64], 1..5)
}

fn cd_instance() -> impl Strategy<Value = CdInstance> {
    (any::<u64>(), 2..4usize).prop_map(|(seed, n)| CdInstance::random(&mut rng(seed), n))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn normal_cone_contains_zero_and_is_a_cone(x in bundle(), raw in prop::collection::vec(-3.0..3.0f64, 4), t in 0.0..100.0f64) {
        let n = x.len();
        let d = normal_cone_at(&OrthantCone::new(n).unwrap(), &x, DEFAULT_ACTIVE_TOL).unwrap();
        prop_assert!(normal_cone_contains(&d, &vec![0.0; n], 0.0).unwrap());
        let z = &raw[..n];
        if normal_cone_contains(&d, z, 0.0).unwrap() {
            let tz: Vec<f64> = z.iter().map(|v| t * v).collect();
            prop_assert!(normal_cone_contains(&d, &tz, 0.0).unwrap());
        }
    }

    #[test]
    fn utility_gradients_match_central_differences(inst in cd_instance(), w in prop::collection::vec(0.1..3.0f64, 3)) {
        let x = &w[..inst.alphas.len()];
        let g = inst.model.gradient(x).unwrap();
        let fd = central_difference(&inst.model, x, 1e-6).unwrap();
        prop_assert!(common::rel_err(&fd, &g) < 1e-5, "{:?} vs {:?}", g, fd);
        prop_assert_eq!(inst.model.upper_subdifferential(x).unwrap(), SubgradientSet::Singleton(g));
    }

    #[test]
    fn cobb_douglas_is_strictly_increasing(inst in cd_instance(), w in prop::collection::vec(0.1..3.0f64, 3), i in 0..3usize, bump in 1e-3..1.0f64) {
        let n = inst.alphas.len();
        let x = w[..n].to_vec();
        let mut y = x.clone();
        y[i % n] += bump;
        prop_assert!(inst.model.value(&y).unwrap() > inst.model.value(&x).unwrap());
    }

    #[test]
    fn coderivative_is_graphically_regular(seed in any::<u64>(), n in 1..4usize, active in any::<bool>(), line in any::<bool>()) {
        let mut r = rng(seed);
        let p = common::interior_price(&mut r, n, 0.2, 5.0);
        let x = budget_point(&mut r, &p, active, line);
        let x_star: Vec<f64> = p.iter().map(|pi| -0.5 * pi).collect();
        let c = coderivative_budget(&p, &x, &x_star, 1e-9).unwrap();
        prop_assert!(std::ptr::eq(c.frechet(), c.limiting()));
    }

    #[test]
    fn maximizers_are_feasible_and_saturate(inst in cd_instance(), c in prop::collection::vec(0.1..2.0f64, 3)) {
        let cfg = SolverConfig::default();
        let n = inst.alphas.len();
        let lin = UtilityModel::linear(c[..n].to_vec()).unwrap();
        for u in [&inst.model, &lin] {
            let r = demand(u, &inst.price, &cfg).unwrap();
            for x in r.maximizers.sample_points(3) {
                prop_assert!(budget_contains(&inst.price, &x, 1e-8).unwrap());
                prop_assert!((dot(&inst.price, &x) - 1.0).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn exact_case_collapse(inst in cd_instance(), seed in any::<u64>()) {
        let hyps = all_hypotheses();
        let x = inst.demand();
        let mode = LimitingMode::InnerSemicontinuous { x_bar: x.clone() };
        let report = limiting_subdiff_estimate(&inst.model, &inst.price, &mode, &hyps, 1e-9).unwrap();
        let frechet = report.frechet.clone().unwrap();
        prop_assert_eq!(frechet.exactness, Exactness::Exact);
        prop_assert_eq!(report.limiting.exactness, Exactness::Exact);
        let lambda = dot(&inst.model.gradient(&x).unwrap(), &x);
        let point: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        prop_assert!(frechet.set.contains(&point, 1e-12));
        prop_assert!(report.limiting.set.contains(&point, 1e-12));
        let (f, l) = (frechet.set.segments(), report.limiting.set.segments());
        prop_assert_eq!(f.len(), 1);
        prop_assert_eq!(l.len(), 1);
        prop_assert_eq!(&f[0].base, &l[0].base);
        let (a, b) = (f[0].lambdas.bounds().unwrap(), l[0].lambdas.bounds().unwrap());
        prop_assert!((a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);

        let q = common::unit_direction(&mut rng(seed), x.len());
        let b = rate_of_change_bounds(&report, &q, &hyps).unwrap();
        let reference = dot(&inst.grad_v(&inst.price), &q);
        prop_assert!((b.upper - reference).abs() <= 1e-6 && (b.lower - reference).abs() <= 1e-6);

        let t = 3.7;
        let tq: Vec<f64> = q.iter().map(|v| t * v).collect();
        let bt = rate_of_change_bounds(&report, &tq, &hyps).unwrap();
        prop_assert!((bt.upper - t * b.upper).abs() <= 1e-12 * (1.0 + bt.upper.abs()));
        prop_assert!((bt.lower - t * b.lower).abs() <= 1e-12 * (1.0 + bt.lower.abs()));
    }

    #[test]
    fn dini_estimates_are_ordered_and_schedule_robust(inst in cd_instance(), seed in any::<u64>()) {
        let cfg = SolverConfig::default();
        let q = common::unit_direction(&mut rng(seed), inst.alphas.len());
        let sched = SamplingSchedule::default();
        let halved = SamplingSchedule::new(sched.t0() / 2.0, sched.ratio(), sched.count(), sched.radius()).unwrap();
        let (lo, hi) = dini_pair(&inst.model, &inst.price, &q, &sched, &cfg).unwrap();
        let (lo2, hi2) = dini_pair(&inst.model, &inst.price, &q, &halved, &cfg).unwrap();
        prop_assert!(lo <= hi);
        prop_assert!((lo - lo2).abs() <= 1e-3 && (hi - hi2).abs() <= 1e-3);
    }
}

#[test]
fn declared_concave_models_pass_the_midpoint_test() {
    let models = [
        UtilityModel::cobb_douglas(1.0, vec![0.3, 0.5]).unwrap(),
        UtilityModel::cobb_douglas(2.0, vec![0.2, 0.3, 0.4]).unwrap(),
        UtilityModel::linear(vec![1.0, 0.5, 2.0]).unwrap(),
        UtilityModel::capped_identity(1.0).unwrap(),
    ];
    for (k, u) in models.iter().enumerate() {
        assert!(u.is_concave());
        assert_eq!(midpoint_concavity_violation(u, 500, 4.0, k as u64).unwrap(), None);
    }
}

#[test]
fn closed_form_agrees_with_grid_on_two_goods() {
    let mut r = rng(8);
    for _ in 0..50 {
        let mut inst = CdInstance::random(&mut r, 2);
        inst.price = common::interior_price(&mut r, 2, 0.7, 3.0);
        let cf = demand_closed_form(&inst.model, &inst.price).unwrap();
        let grid = demand_grid(&inst.model, &inst.price, 1e-3, 1e-9).unwrap();
        assert!((cf.value - grid.value).abs() <= 1e-3 * (1.0 + cf.value.abs()), "{} vs {}", cf.value, grid.value);
    }
}

#[test]
fn coderivative_outputs_are_fine_epsilon_normals() {
    let mut r = rng(21);
    for k in 0..10 {
        let n = 1 + k % 2;
        let p = common::interior_price(&mut r, n, 0.5, 2.0);
        let x = budget_point(&mut r, &p, k % 3 == 0, true);
        let x_star: Vec<f64> = p.iter().map(|pi| -0.5 * pi).collect();
        let value = coderivative_budget(&p, &x, &x_star, 1e-9).unwrap().into_set();
        let RaySegmentSet::Union(segs) = &value else { panic!("{value:?}") };
        let out: Vec<f64> = segs[0].base.iter().map(|b| 0.5 * b).collect();
        let minus_star: Vec<f64> = x_star.iter().map(|v| -v).collect();
        let mut sampler = BudgetGraphSampler::new(&p, &x, 1e-3, k as u64).unwrap();
        let outcome = epsilon_normal_test(&mut sampler, &out, &minus_star, 1e-3, 10_000).unwrap();
        assert!(outcome.passed, "{outcome:?}");
    }
}

#[test]
fn singular_estimate_is_zero_for_the_capped_identity_on_a_demand_segment() {
    let u = UtilityModel::capped_identity(1.0).unwrap();
    let d = demand(&u, &[0.5], &SolverConfig::default()).unwrap();
    assert_eq!(d.maximizers, Maximizers::Interval1D { lo: 1.0, hi: 2.0 });
    for x in d.maximizers.sample_points(99) {
        let mode = LimitingMode::InnerSemicontinuous { x_bar: x };
        let r = limiting_subdiff_estimate(&u, &[0.5], &mode, &all_hypotheses(), 1e-9).unwrap();
        assert_eq!(r.singular.set, RaySegmentSet::ZeroSingleton);
        assert_eq!(r.limiting.set, RaySegmentSet::ZeroSingleton);
    }
}
