//! Cross-evaluator invariants: optimizer dominance, closed-form/numeric
//! agreement, and monotone response to each query field.

use pacbayes::bounds::{
    chernoff_binary_kl, fixed_lambda_bound, l2_bound, logsobolev_oracle_bound, mcallester_bound,
    pac_bayes_chernoff, seeger_bound, subgamma_bound, subgaussian_bound, BoundQuery,
    FixedLambdaVariant,
};
use pacbayes::cgf::RateFunction;
use pacbayes::SimplexDistribution;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_query(rng: &mut ChaCha8Rng) -> BoundQuery {
    BoundQuery::new(
        rng.gen_range(0.0..1.0),
        rng.gen_range(0.0..3.0),
        rng.gen_range(10..2000),
        rng.gen_range(0.01..0.3),
    )
    .unwrap()
}

fn random_rate(rng: &mut ChaCha8Rng) -> RateFunction {
    match rng.gen_range(0..4) {
        0 => RateFunction::sub_gaussian(rng.gen_range(0.01..4.0)).unwrap(),
        1 => RateFunction::sub_gamma(rng.gen_range(0.01..4.0), rng.gen_range(0.01..2.0)).unwrap(),
        2 => RateFunction::bernoulli(rng.gen_range(0.05..0.95)).unwrap(),
        _ => RateFunction::l2(rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0)).unwrap(),
    }
}

#[test]
fn optimized_bound_dominates_every_fixed_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let q = random_query(&mut rng);
        let rf = random_rate(&mut rng);
        let opt = pac_bayes_chernoff(&q, &rf).unwrap();
        let b = rf.domain_sup();
        for _ in 0..20 {
            let lambda = if b.is_finite() {
                rng.gen_range(1e-6..b * (1.0 - 1e-9))
            } else {
                // Log-uniform over a wide range.
                (rng.gen_range(-3.0..3.0f64)).exp2()
            };
            let fixed = fixed_lambda_bound(&q, &rf, lambda, FixedLambdaVariant::Chernoff).unwrap();
            assert!(
                opt.value <= fixed.value + 1e-12,
                "optimized {} above fixed({lambda}) = {} for {rf:?}",
                opt.value,
                fixed.value
            );
        }
    }
}

#[test]
fn closed_forms_agree_with_the_numeric_inverter_on_random_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let q = random_query(&mut rng);

        let sigma2 = rng.gen_range(0.01..4.0);
        let closed = subgaussian_bound(&q, sigma2).unwrap();
        let numeric =
            pac_bayes_chernoff(&q, &RateFunction::sub_gaussian(sigma2).unwrap()).unwrap();
        assert!(
            (closed.value - numeric.value).abs() <= 1e-8 * numeric.value.max(1.0),
            "sub-Gaussian: {} vs {}",
            closed.value,
            numeric.value
        );

        let c = rng.gen_range(0.01..2.0);
        let closed = subgamma_bound(&q, sigma2, c).unwrap();
        let numeric =
            pac_bayes_chernoff(&q, &RateFunction::sub_gamma(sigma2, c).unwrap()).unwrap();
        assert!(
            (closed.value - numeric.value).abs() <= 1e-8 * numeric.value.max(1.0),
            "sub-gamma: {} vs {}",
            closed.value,
            numeric.value
        );

        let m = rng.gen_range(0.05..2.0);
        let norm2 = rng.gen_range(0.05..3.0);
        let closed = l2_bound(&q, m, norm2).unwrap();
        let numeric = pac_bayes_chernoff(&q, &RateFunction::l2(m, norm2).unwrap()).unwrap();
        assert!(
            (closed.report.value - numeric.value).abs() <= 1e-8 * numeric.value.max(1.0),
            "parameter-norm: {} vs {}",
            closed.report.value,
            numeric.value
        );

        let ls_c = rng.gen_range(0.001..0.1);
        let grad2 = rng.gen_range(1.0..1000.0);
        let closed = logsobolev_oracle_bound(&q, ls_c, grad2).unwrap();
        let numeric =
            pac_bayes_chernoff(&q, &RateFunction::log_sobolev(ls_c, grad2).unwrap()).unwrap();
        assert!(
            (closed.value - numeric.value).abs() <= 1e-8 * numeric.value.max(1.0),
            "log-Sobolev: {} vs {}",
            closed.value,
            numeric.value
        );
    }
}

#[test]
fn subgaussian_mixture_average_equals_averaged_sigma2() {
    let q = BoundQuery::new(0.1, 0.5, 101, 0.05).unwrap();
    let averaged = subgaussian_bound(&q, 0.25).unwrap();
    let weights = SimplexDistribution::new(vec![0.5, 0.5]).unwrap();
    let mix = pacbayes::cgf::expected_rate(
        &weights,
        vec![
            RateFunction::sub_gaussian(0.1).unwrap(),
            RateFunction::sub_gaussian(0.4).unwrap(),
        ],
    )
    .unwrap();
    let numeric = pac_bayes_chernoff(&q, &mix).unwrap();
    assert!((averaged.value - numeric.value).abs() <= 1e-10 * numeric.value.max(1.0));
}

/// Gap response to each query field, with everything else pinned.
#[test]
fn gaps_are_monotone_in_kl_delta_and_n() {
    type Evaluator = fn(&BoundQuery) -> f64;
    let evaluators: Vec<(&str, Evaluator)> = vec![
        ("mcallester", |q| mcallester_bound(q).unwrap().gap),
        ("seeger", |q| seeger_bound(q).unwrap().gap),
        ("chernoff_binary_kl", |q| chernoff_binary_kl(q).unwrap().gap),
        ("sub_gaussian", |q| subgaussian_bound(q, 0.25).unwrap().gap),
        ("sub_gamma", |q| subgamma_bound(q, 0.25, 0.3).unwrap().gap),
        ("l2_norm", |q| l2_bound(q, 0.5, 1.0).unwrap().report.gap),
        ("pac_bayes_chernoff", |q| {
            pac_bayes_chernoff(q, &RateFunction::sub_gamma(0.25, 0.3).unwrap())
                .unwrap()
                .gap
        }),
    ];

    for (name, eval) in evaluators {
        // Nondecreasing in KL.
        let mut last = -f64::INFINITY;
        for i in 0..40 {
            let q = BoundQuery::new(0.2, 0.1 * i as f64, 101, 0.05).unwrap();
            let gap = eval(&q);
            assert!(gap >= last - 1e-12, "{name}: gap not monotone in kl at {i}");
            last = gap;
        }
        // Nondecreasing as δ shrinks.
        last = -f64::INFINITY;
        for i in 0..30 {
            let delta = 0.5 * 0.8f64.powi(i);
            let q = BoundQuery::new(0.2, 0.5, 101, delta).unwrap();
            let gap = eval(&q);
            assert!(gap >= last - 1e-12, "{name}: gap not monotone in δ at {delta}");
            last = gap;
        }
        // Nonincreasing in n (n >= 3).
        last = f64::INFINITY;
        for n in (3..400).step_by(7) {
            let q = BoundQuery::new(0.2, 0.5, n, 0.05).unwrap();
            let gap = eval(&q);
            assert!(gap <= last + 1e-12, "{name}: gap not monotone in n at {n}");
            last = gap;
        }
    }
}

#[test]
fn seeger_and_mcallester_share_the_pinsker_relation() {
    // The kl-inverse gap never exceeds √(radius/2), which ties the two
    // baselines together wherever they use the same radius.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..500 {
        let q = random_query(&mut rng);
        let seeger = seeger_bound(&q).unwrap();
        assert!(
            seeger.value <= q.emp_gibbs_risk + (seeger.complexity / 2.0).sqrt() + 1e-12,
            "Pinsker violated: {} vs {} + √({}/2)",
            seeger.value,
            q.emp_gibbs_risk,
            seeger.complexity
        );
    }
}
