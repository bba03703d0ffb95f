use std::sync::Arc;

use blowup_lab::grid::{cumulative_integral, first_derivative, integrate, Field, Grid};
use proptest::prelude::*;

fn field(grid: &Arc<Grid>, values: &[f64]) -> Field {
    Field::new(grid.clone(), values.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn integration_is_linear(
        values in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 9..200),
        alpha in -5.0f64..5.0,
        beta in -5.0f64..5.0,
        y_max in 0.5f64..50.0,
    ) {
        let grid = Arc::new(Grid::new(y_max, values.len() - 1).unwrap());
        let f: Vec<f64> = values.iter().map(|p| p.0).collect();
        let g: Vec<f64> = values.iter().map(|p| p.1).collect();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = integrate(&field(&grid, &combo)).unwrap();
        let (i_f, i_g) = (integrate(&field(&grid, &f)).unwrap(), integrate(&field(&grid, &g)).unwrap());
        let abs_f: Vec<f64> = f.iter().map(|x| x.abs()).collect();
        let abs_g: Vec<f64> = g.iter().map(|x| x.abs()).collect();
        let scale = alpha.abs() * integrate(&field(&grid, &abs_f)).unwrap() + beta.abs() * integrate(&field(&grid, &abs_g)).unwrap();
        prop_assert!((lhs - (alpha * i_f + beta * i_g)).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn integral_is_last_cumulative_node(values in prop::collection::vec(-1e3f64..1e3, 9..300), y_max in 0.1f64..100.0) {
        let grid = Arc::new(Grid::new(y_max, values.len() - 1).unwrap());
        let f = field(&grid, &values);
        let cum = cumulative_integral(&f).unwrap();
        prop_assert_eq!(cum.values()[0], 0.0);
        prop_assert_eq!(*cum.values().last().unwrap(), integrate(&f).unwrap());
    }

    #[test]
    fn affine_data_is_integrated_exactly(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 8usize..400) {
        let grid = Arc::new(Grid::new(5.0, n).unwrap());
        let f = Field::from_fn(grid.clone(), |y| a + 2.0 * b * y);
        let cum = cumulative_integral(&f).unwrap();
        for (&y, &c) in grid.nodes().iter().zip(cum.values()) {
            prop_assert!((c - (a * y + b * y * y)).abs() <= 1e-11 * (1.0 + a.abs() + b.abs()) * (1.0 + y * y));
        }
    }
}

/// Antiderivative then derivative returns the data with second-order error.
#[test]
fn cumulative_then_derivative_is_second_order() {
    let f = |y: f64| (-0.3 * y).exp() * (2.0 * y).cos();
    let err = |n: usize| {
        let grid = Arc::new(Grid::new(6.0, n).unwrap());
        let back = first_derivative(&cumulative_integral(&Field::from_fn(grid.clone(), f)).unwrap()).unwrap();
        (1..n).map(|k| (back.values()[k] - f(grid.nodes()[k])).abs()).fold(0.0, f64::max)
    };
    let errors = [err(100), err(200), err(400)];
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(order >= 1.9, "order {order} from {errors:?}");
    }
}
