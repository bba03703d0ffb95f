use blowup_lab::grid::Grid;
use blowup_lab::lift::{phi, phi_derivatives, phi_on_grid, LiftParams};
use proptest::prelude::*;

proptest! {
    #[test]
    fn lift_is_monotone_and_bounded(c_e in 0.0f64..5.0, c_p in 0.0f64..5.0, t in 0.0f64..10.0) {
        let p = LiftParams::new(c_e, c_p).unwrap();
        let grid = Grid::new(40.0, 800).unwrap();
        let values = phi_on_grid(t, &grid, &p);
        for pair in values.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-12);
        }
        for &v in &values {
            prop_assert!(v >= 0.0 && v <= c_e + c_p * t + 1e-12, "phi = {v}");
        }
    }

    #[test]
    fn slope_matches_centered_differences(c_e in 0.0f64..3.0, c_p in 0.0f64..3.0, t in 0.1f64..5.0, y in 0.0f64..10.0) {
        let p = LiftParams::new(c_e, c_p).unwrap();
        let d = 1e-4;
        // one-sided second-order difference at the wall
        let fd = if y < d {
            (-3.0 * phi(t, y, &p).unwrap() + 4.0 * phi(t, y + d, &p).unwrap() - phi(t, y + 2.0 * d, &p).unwrap()) / (2.0 * d)
        } else {
            (phi(t, y + d, &p).unwrap() - phi(t, y - d, &p).unwrap()) / (2.0 * d)
        };
        let (d1, d2) = phi_derivatives(t, y, &p).unwrap();
        prop_assert!((d1 - fd).abs() <= 1e-7, "{d1} vs {fd}");
        prop_assert!(d1 >= -1e-12 && d2 <= 1e-12);
    }
}
