use std::sync::Arc;

use blowup_lab::grid::{integrate, Field, Grid};
use blowup_lab::weight::{build_weight, choose_eta, search_parameters, validate_constraints, CONTINUITY_TOL};
use proptest::prelude::*;

fn certified(n: f64) -> blowup_lab::weight::WeightSpec {
    search_parameters(&[n], 1.0, 2.0, 1024.0, 256).unwrap().weight
}

#[test]
fn norm_matches_dense_quadrature_plus_tail() {
    for n in [1.5, 2.0, 3.0] {
        let w = certified(n);
        let y_big = 200.0;
        let grid = Arc::new(Grid::new(y_big, 400_000).unwrap());
        let sampled = Field::from_fn(grid, |y| w.eval(y).0);
        let total = integrate(&sampled).unwrap() + w.tail_integral(y_big);
        assert!((total - w.c_y).abs() <= 1e-6 * w.c_y, "n = {n}: {total} vs {}", w.c_y);
    }
}

#[test]
fn search_hits_survive_denser_validation() {
    for n in [1.5, 2.0, 3.0] {
        let hit = search_parameters(&[n], 1.0, 2.0, 1024.0, 128).unwrap();
        assert!(hit.report.overall);
        assert!(validate_constraints(&hit.weight, 512).unwrap().overall, "n = {n}");
    }
}

#[test]
fn tail_slope_at_delta_from_both_sides() {
    for n in [1.5, 2.0, 3.0] {
        let w = certified(n);
        let left = w.eval_left(2.0).1;
        let right = w.eval(2.0).1;
        let target = -n / w.m;
        assert!((left - target).abs() <= 1e-12, "{left} vs {target}");
        assert!((right - target).abs() <= 1e-12, "{right} vs {target}");
        let report = validate_constraints(&w, 256).unwrap();
        assert!(report.continuity.iter().all(|c| c.value_gap <= CONTINUITY_TOL && c.slope_gap <= CONTINUITY_TOL));
    }
}

proptest! {
    #[test]
    fn exponent_rules(n in 1.0001f64..20.0, m in 0.5f64..500.0) {
        let w = build_weight(n, m).unwrap();
        prop_assert!(w.sigma < 1.0);
        prop_assert_eq!(w.sigma, n / (n + 1.0));
        let eta = choose_eta(w.sigma).unwrap();
        prop_assert!(eta > 1.0 && eta < 2.0 && eta * w.sigma < 1.0);
        prop_assert!(w.alpha < w.beta && w.beta < w.gamma && w.gamma < w.delta);
        prop_assert!(w.c_y > 0.0 && w.c_y.is_finite());
    }
}
