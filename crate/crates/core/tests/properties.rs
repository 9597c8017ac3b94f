mod common;

use gauge_core::accuracy::nested_anova;
use gauge_core::agreement::{assess_icc, bland_altman, twoway_anova};
use gauge_core::data::{build_dataset, MeasurementDataset, MeasurementRecord, PairedMeasurements};
use gauge_core::ingest::{
    parse_measurements_csv, score_outcomes, write_measurements_csv, ErrorPolicy, Granularity, Outcome, TestOutcome,
    TestOutcomeMatrix,
};
use gauge_core::mixed::{fit_at_lambda, reml_fit};
use gauge_core::simulate::{gen_experiment, ExperimentSpec};
use gauge_core::stats::{f_pvalue, pearson, regularized_incomplete_beta, t_cdf, t_quantile};
use proptest::prelude::*;

const VAR: &str = "Y";

/// A complete object x instrument x replicate grid.
#[derive(Debug, Clone)]
struct Grid {
    n_obj: usize,
    n_ins: usize,
    reps: usize,
    values: Vec<f64>,
}

impl Grid {
    fn dataset_with(&self, f: impl Fn(usize, usize, f64) -> f64) -> MeasurementDataset {
        let mut records = Vec::new();
        let mut k = 0;
        for i in 0..self.n_obj {
            for j in 0..self.n_ins {
                for r in 0..self.reps {
                    let v = f(i, j, self.values[k]);
                    records.push(MeasurementRecord::new(format!("P{i}"), format!("I{j}"), r as u32 + 1, VAR, v));
                    k += 1;
                }
            }
        }
        build_dataset(records).unwrap()
    }

    fn dataset(&self) -> MeasurementDataset {
        self.dataset_with(|_, _, v| v)
    }
}

fn grid(max_reps: usize) -> impl Strategy<Value = Grid> {
    (2usize..10, 2usize..5, 1usize..=max_reps).prop_flat_map(|(n_obj, n_ins, reps)| {
        prop::collection::vec(-100.0f64..100.0, n_obj * n_ins * reps).prop_map(move |values| Grid {
            n_obj,
            n_ins,
            reps,
            values,
        })
    })
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.max(1.0)
}

fn corrected_ss(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum()
}

fn pairs_from(values: &[(f64, f64)]) -> PairedMeasurements {
    let (a, b): (Vec<f64>, Vec<f64>) = values.iter().copied().unzip();
    PairedMeasurements::from_values(&a, &b).unwrap()
}

fn spread_pairs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nested_ss_add_up(g in grid(3)) {
        let t = nested_anova(&g.dataset(), VAR).unwrap();
        let total = corrected_ss(&g.values);
        prop_assert!(close(t.total_ss(), total, total));
        prop_assert_eq!(t.total_df(), (g.values.len() - 1) as u64);
    }

    #[test]
    fn twoway_ss_add_up(g in grid(1)) {
        let t = twoway_anova(&g.dataset(), VAR).unwrap();
        let total = corrected_ss(&g.values);
        prop_assert!(close(t.total_ss(), total, total));
        prop_assert_eq!(t.total_df(), (g.values.len() - 1) as u64);
    }

    #[test]
    fn location_shift_leaves_spread_alone(g in grid(2), c in -500.0f64..500.0) {
        let base = nested_anova(&g.dataset(), VAR).unwrap();
        let shifted = nested_anova(&g.dataset_with(|_, _, v| v + c), VAR).unwrap();
        let scale = corrected_ss(&g.values);
        for (a, b) in base.rows.iter().zip(&shifted.rows) {
            prop_assert!(close(a.ss, b.ss, scale), "{} {} {}", a.term, a.ss, b.ss);
        }
    }

    #[test]
    fn location_shift_bland_altman(v in spread_pairs(), c in -500.0f64..500.0) {
        let base = bland_altman(&pairs_from(&v), 2.0).unwrap();
        let moved: Vec<_> = v.iter().map(|(a, b)| (a + c, b + c)).collect();
        let ba = bland_altman(&pairs_from(&moved), 2.0).unwrap();
        prop_assert!((ba.d_bar - base.d_bar).abs() < 1e-9);
        prop_assert!((ba.s_d - base.s_d).abs() < 1e-9);
    }

    #[test]
    fn location_shift_icc(g in grid(1), c in -500.0f64..500.0) {
        let base = assess_icc(&g.dataset(), VAR);
        let moved = assess_icc(&g.dataset_with(|_, _, v| v + c), VAR);
        if let (Ok(a), Ok(b)) = (base, moved) {
            prop_assert!((a.rho - b.rho).abs() < 1e-9);
        }
    }

    #[test]
    fn swapping_instruments(v in spread_pairs()) {
        let p = pairs_from(&v);
        let ba = bland_altman(&p, 2.0).unwrap();
        let sw = bland_altman(&p.swapped(), 2.0).unwrap();
        prop_assert_eq!(sw.d_bar, -ba.d_bar);
        prop_assert!((sw.s_d - ba.s_d).abs() <= 1e-12 * ba.s_d.max(1.0));
        prop_assert!((sw.lower + ba.upper).abs() < 1e-9);
        let (r1, r2) = (pearson(&p).unwrap().r, pearson(&p.swapped()).unwrap().r);
        prop_assert!((r1 - r2).abs() < 1e-12);
    }

    #[test]
    fn relabelling_instruments_keeps_twoway_table(g in grid(1)) {
        let t = twoway_anova(&g.dataset(), VAR).unwrap();
        // reverse the instrument order
        let mut rev = g.clone();
        let n_ins = g.n_ins;
        rev.values = (0..g.n_obj)
            .flat_map(|i| (0..n_ins).rev().map(move |j| (i, j)))
            .map(|(i, j)| g.values[i * n_ins + j])
            .collect();
        let r = twoway_anova(&rev.dataset(), VAR).unwrap();
        let scale = corrected_ss(&g.values);
        for (a, b) in t.rows.iter().zip(&r.rows) {
            prop_assert!(close(a.ss, b.ss, scale));
        }
    }

    #[test]
    fn scaling(g in grid(1), a in 0.1f64..10.0) {
        let base = twoway_anova(&g.dataset(), VAR).unwrap();
        let scaled = twoway_anova(&g.dataset_with(|_, _, v| a * v), VAR).unwrap();
        let scale = a * a * corrected_ss(&g.values);
        for (x, y) in base.rows.iter().zip(&scaled.rows) {
            prop_assert!(close(a * a * x.ss, y.ss, scale));
        }
        if let (Ok(i1), Ok(i2)) = (assess_icc(&g.dataset(), VAR), assess_icc(&g.dataset_with(|_, _, v| a * v), VAR)) {
            prop_assert!((i1.rho - i2.rho).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_bland_altman(v in spread_pairs(), a in 0.1f64..10.0) {
        let base = bland_altman(&pairs_from(&v), 2.0).unwrap();
        let scaled: Vec<_> = v.iter().map(|(x, y)| (a * x, a * y)).collect();
        let ba = bland_altman(&pairs_from(&scaled), 2.0).unwrap();
        prop_assert!((ba.s_d - a * base.s_d).abs() <= 1e-9 * (a * base.s_d).max(1.0));
        prop_assert!((ba.d_bar - a * base.d_bar).abs() <= 1e-9 * (a * base.d_bar.abs()).max(1.0));
    }

    #[test]
    fn pearson_affine(v in spread_pairs(), a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], b in -100.0f64..100.0) {
        let p = pairs_from(&v);
        let Ok(base) = pearson(&p) else { return Ok(()); };
        let moved: Vec<_> = v.iter().map(|(x, y)| (a * x + b, *y)).collect();
        let r = pearson(&pairs_from(&moved)).unwrap().r;
        prop_assert!((r - a.signum() * base.r).abs() < 1e-9);
    }

    #[test]
    fn incomplete_beta_symmetry(x in 0.0f64..=1.0, a in 0.05f64..200.0, b in 0.05f64..200.0) {
        let s = regularized_incomplete_beta(x, a, b) + regularized_incomplete_beta(1.0 - x, b, a);
        prop_assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn f_pvalue_decreases(f1 in 0.0f64..50.0, step in 0.001f64..10.0, d1 in 1u64..100, d2 in 1u64..100) {
        let p1 = f_pvalue(f1, d1, d2).unwrap();
        let p2 = f_pvalue(f1 + step, d1, d2).unwrap();
        prop_assert!(p2 <= p1);
    }

    #[test]
    fn t_quantile_inverts_cdf(p in 0.0005f64..0.9995, df in 0.5f64..500.0) {
        let q = t_quantile(p, df).unwrap();
        prop_assert!((t_cdf(q, df) - p).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip(g in grid(2), big in prop::num::f64::NORMAL) {
        let mut records = g.dataset().into_records();
        records[0].value = big;
        let ds = build_dataset(records).unwrap();
        let back = parse_measurements_csv(write_measurements_csv(&ds).as_bytes()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn scoring_is_order_free_and_flips(
        outcomes in prop::collection::vec((0usize..4, 0usize..2, prop::bool::ANY), 1..60),
        seed in any::<u64>(),
    ) {
        let entries: Vec<TestOutcome> = outcomes
            .iter()
            .enumerate()
            .map(|(k, (obj, suite, pass))| TestOutcome {
                object_id: format!("P{obj}"),
                suite_id: format!("S{suite}"),
                case_id: format!("c{k}"),
                granularity: Granularity::Method,
                outcome: if *pass { Outcome::Pass } else { Outcome::Fail },
            })
            .collect();
        let mut shuffled = entries.clone();
        let n = shuffled.len();
        for i in 0..n {
            let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % n as u64) as usize;
            shuffled.swap(i, j);
        }
        let flipped: Vec<_> = entries.iter().cloned().map(|mut e| { e.outcome = e.outcome.flipped(); e }).collect();
        let score = |e: Vec<TestOutcome>| score_outcomes(&TestOutcomeMatrix::new(e).unwrap(), Granularity::Method, ErrorPolicy::AsFail).unwrap();
        let (a, b, f) = (score(entries), score(shuffled), score(flipped));
        for s in &a.scores {
            let t = b.get(&s.object_id, &s.suite_id).unwrap();
            prop_assert_eq!(s.percent, t.percent);
            let u = f.get(&s.object_id, &s.suite_id).unwrap();
            prop_assert!((u.percent - (100.0 - s.percent)).abs() < 1e-12);
        }
    }
}

fn experiment(seed: u64) -> Vec<gauge_core::mixed::ExperimentRow> {
    gen_experiment(&ExperimentSpec {
        n_subjects: 20,
        intercept: 50.0,
        treatment_tdd: -6.0,
        task_mr: 21.0,
        group_mr_bsk: 0.0,
        sigma_subject: 15.0,
        sigma_residual: 15.0,
        seed,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mixed_shift_moves_only_intercept(seed in any::<u64>(), c in -100.0f64..100.0, drop in 0usize..40) {
        let mut rows = experiment(seed);
        // unbalanced: one subject loses a period
        rows.remove(drop);
        let base = reml_fit(&rows).unwrap();
        let moved: Vec<_> = rows.iter().cloned().map(|mut r| { r.y += c; r }).collect();
        let fit = reml_fit(&moved).unwrap();
        prop_assert!((fit.coefficients[0].estimate - base.coefficients[0].estimate - c).abs() < 1e-8);
        for k in 1..4 {
            prop_assert!((fit.coefficients[k].estimate - base.coefficients[k].estimate).abs() < 1e-8);
        }
        prop_assert!((fit.var_subject - base.var_subject).abs() < 1e-8 * base.var_residual);
        prop_assert!((fit.var_residual - base.var_residual).abs() < 1e-8 * base.var_residual);
    }

    #[test]
    fn mixed_doubling(seed in any::<u64>()) {
        let rows = experiment(seed);
        let base = reml_fit(&rows).unwrap();
        let doubled: Vec<_> = rows.iter().cloned().map(|mut r| { r.y *= 2.0; r }).collect();
        let fit = reml_fit(&doubled).unwrap();
        for (a, b) in base.coefficients.iter().zip(&fit.coefficients) {
            prop_assert!((b.estimate - 2.0 * a.estimate).abs() < 1e-8 * a.estimate.abs().max(1.0));
            prop_assert!((b.std_error - 2.0 * a.std_error).abs() < 1e-8 * a.std_error);
        }
        prop_assert!((fit.var_residual - 4.0 * base.var_residual).abs() < 1e-8 * base.var_residual);
        prop_assert!((fit.var_subject - 4.0 * base.var_subject).abs() < 1e-8 * base.var_residual);
    }

    #[test]
    fn mixed_local_optimum(seed in any::<u64>()) {
        let rows = experiment(seed);
        let fit = reml_fit(&rows).unwrap();
        for factor in [0.99, 1.01] {
            let nearby = gauge_core::mixed::reml_criterion(&rows, fit.lambda * factor).unwrap();
            prop_assert!(fit.reml_criterion <= nearby);
        }
    }

    #[test]
    fn lambda_zero_is_ols(seed in any::<u64>(), drop in 0usize..40) {
        let mut rows = experiment(seed);
        rows.remove(drop);
        let fit = fit_at_lambda(&rows, 0.0).unwrap();
        let ols = common::ols(&rows);
        for (c, o) in fit.coefficients.iter().zip(&ols) {
            prop_assert!((c.estimate - o).abs() < 1e-9 * o.abs().max(1.0));
        }
    }
}
