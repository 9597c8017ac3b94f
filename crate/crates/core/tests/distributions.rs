mod common;

use gauge_core::stats::{f_pvalue, normal_quantile, t_cdf, t_quantile, t_sf};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

#[test]
fn oracle_sanity() {
    // Cauchy and df = 2 have closed forms
    for x in [0.3f64, 1.0, 7.0] {
        let cauchy = 0.5 - x.atan() / std::f64::consts::PI;
        assert!(common::rel_err(common::t_sf(x, 1.0), cauchy) < 1e-13);
        let df2 = 0.5 - x / (2.0 * (2.0 + x * x).sqrt());
        assert!(common::rel_err(common::t_sf(x, 2.0), df2) < 1e-12);
    }
    // F(2, d2) upper tail is (1 + 2f/d2)^(-d2/2)
    let f = 1.7;
    assert!(common::rel_err(common::f_sf(f, 2.0, 9.0), (1.0 + 2.0 * f / 9.0).powf(-4.5)) < 1e-12);
}

#[test]
fn t_quantile_matches_bisection_oracle() {
    let mut worst = 0.0f64;
    for (p, df) in common::t_grid() {
        let got = t_quantile(p, df).unwrap();
        let want = common::t_quantile(p, df);
        let e = common::rel_err(got, want);
        assert!(e < 1e-8, "p={p} df={df}: {got} vs {want} ({e:e})");
        worst = worst.max(e);
    }
    assert!(worst < 1e-8);
}

#[test]
fn f_pvalue_matches_integration_oracle() {
    for (f, d1, d2) in common::f_grid() {
        let got = f_pvalue(f, d1, d2).unwrap();
        let want = common::f_sf(f, d1 as f64, d2 as f64);
        let e = common::rel_err(got, want);
        assert!(e < 1e-8, "f={f} ({d1},{d2}): {got:e} vs {want:e} ({e:e})");
    }
}

#[test]
fn t_tails_agree_with_statrs() {
    for df in [1.0, 3.0, 12.0, 200.0] {
        let d = StudentsT::new(0.0, 1.0, df).unwrap();
        for x in [-4.0, -0.5, 0.0, 1.3, 6.0] {
            assert!((t_cdf(x, df) - d.cdf(x)).abs() < 1e-12);
            assert!((t_sf(x, df) - d.sf(x)).abs() < 1e-12);
        }
    }
}

#[test]
fn f_pvalue_agrees_with_statrs() {
    for (d1, d2) in [(1u64, 73u64), (73, 73), (3, 12)] {
        let d = FisherSnedecor::new(d1 as f64, d2 as f64).unwrap();
        for f in [0.4, 1.0, 3.38] {
            assert!((f_pvalue(f, d1, d2).unwrap() - d.sf(f)).abs() < 1e-12);
        }
    }
}

#[test]
fn large_df_approaches_normal() {
    let q = t_quantile(0.975, 1e6).unwrap();
    assert!((q - 1.96).abs() <= 0.0005, "{q}");
    assert!((q - normal_quantile(0.975).unwrap()).abs() < 1e-5);
}

#[test]
fn published_f_tests_are_highly_significant() {
    assert!(f_pvalue(96.79, 1, 73).unwrap() < 0.001);
    assert!(f_pvalue(3.38, 73, 73).unwrap() < 0.001);
}
