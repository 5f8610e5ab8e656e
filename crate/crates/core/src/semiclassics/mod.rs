//! The λ-family of van Vleck type propagators.
//!
//! For each λ > 0 the position propagator is evaluated at a single complex trajectory that
//! solves the stationary-point conditions of the off-center pre-saddle integral,
//!
//! ⟨x″|K(t)|x′⟩_sc = e^{Γ₀} / (b √(2πi m_qp)),
//!
//! and reduces to the van Vleck formula at λ = 1. Trajectories are integrated with fixed-step
//! RK4 together with the stability matrix and the action.

mod boundary;
mod caustics;
mod exponent;
mod propagator;
mod system;
mod trajectory;

pub use boundary::{
    boundary_residual, solve_boundary_conditions, solve_boundary_detailed, solve_from_guess,
    BoundaryProblem, BoundarySolution, BOUNDARY_TOLERANCE, CAUSTIC_TOLERANCE,
};
pub use caustics::{detect_caustics, detect_caustics_for, CausticSample, CausticScan};
pub use exponent::{
    gamma_exponent, gamma_exponent_with_width, gamma_gradient, gamma_second_derivatives,
    quadratic_form_eigenvalues,
};
pub use propagator::{
    gamma0, heller_propagator, numeric_resolution_propagator, propagate_row, sc_propagator,
    sc_propagator_detailed, van_vleck, ScPropagation, ScanRow,
};
pub use system::SystemModel;
pub use trajectory::{
    dividing_step, evolve_trajectory, step_count, StabilityMatrix, TrajectoryResult,
};
