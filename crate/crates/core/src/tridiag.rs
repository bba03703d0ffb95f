//! Thomas algorithm for tridiagonal systems.

/// Solves `A x = rhs` in place, where `A` has sub-diagonal `lower`,
/// diagonal `diag` and super-diagonal `upper`. `lower[0]` and
/// `upper[n - 1]` are ignored. `scratch` must have length `n`.
///
/// No pivoting; callers only pass diagonally dominant matrices.
pub(crate) fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = rhs.len();
    debug_assert!(diag.len() == n && lower.len() == n && upper.len() == n);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

/// Matrix of `I - c·D₂` on a uniform grid with Dirichlet rows at both ends.
#[derive(Debug, Clone)]
pub(crate) struct DirichletDiffusion {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl DirichletDiffusion {
    /// `coef` is `dt / h²` (times the implicitness weight, if any).
    pub(crate) fn new(n: usize, coef: f64) -> Self {
        let mut lower = vec![-coef; n];
        let mut diag = vec![1.0 + 2.0 * coef; n];
        let mut upper = vec![-coef; n];
        lower[0] = 0.0;
        upper[0] = 0.0;
        diag[0] = 1.0;
        lower[n - 1] = 0.0;
        upper[n - 1] = 0.0;
        diag[n - 1] = 1.0;
        Self {
            lower,
            diag,
            upper,
            scratch: vec![0.0; n],
        }
    }

    /// Solves in place. `rhs[0]` and `rhs[n-1]` must already hold the boundary values.
    pub(crate) fn solve(&mut self, rhs: &mut [f64]) {
        solve_in_place(&self.lower, &self.diag, &self.upper, rhs, &mut self.scratch);
    }
}
