pub mod audit;
pub mod error;
pub mod grid;
pub mod lift;
pub mod lyapunov;
pub mod scenario;
pub mod solver;
mod tridiag;
pub mod weight;
