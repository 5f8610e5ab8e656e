use super::boundary::BoundaryProblem;
use super::trajectory::{evolve_trajectory, StabilityMatrix, TrajectoryResult};
use crate::{Error, OscillatorFrame, Result, C64};

/// The pre-saddle exponent Γ(q, p; λ) for a trajectory launched from (q, p), with the
/// Gaussian width ξ supplied separately so it can be held fixed.
pub fn gamma_exponent_with_width(
    q: C64,
    p: C64,
    xi: C64,
    problem: &BoundaryProblem,
    traj: &TrajectoryResult,
) -> C64 {
    let frame = &problem.frame;
    let (b, hbar) = (frame.b(), frame.hbar());
    let (b2, l) = (b * b, problem.lambda);
    let (x1, x2) = (problem.x_initial, problem.x_final);
    let i = C64::i();
    let d = x2 - traj.qt;
    -xi * d * d / (2.0 * b2) + i / hbar * (traj.action + traj.pt * d + 0.5 * q * p)
        - 0.5 * (l * l + 2.0 * l - 1.0) * q * q / (2.0 * b2)
        + 0.5 * (l - 1.0).powi(2) * b2 * p * p / (2.0 * hbar * hbar)
        + i * l * l * q * p / (2.0 * hbar)
        + l * x1 * q / b2
        - i * l * x1 * p / hbar
        - x1 * x1 / (2.0 * b2)
}

/// Γ(q, p; λ) with the trajectory's own ξ; `traj` must start at (q, p).
pub fn gamma_exponent(q: C64, p: C64, problem: &BoundaryProblem, traj: &TrajectoryResult) -> C64 {
    gamma_exponent_with_width(q, p, traj.xi, problem, traj)
}

/// Central-difference gradient (∂Γ/∂q, ∂Γ/∂p) at (q, p), re-evolving the trajectory for each
/// displaced point while holding ξ at its value at (q, p).
pub fn gamma_gradient(
    problem: &BoundaryProblem,
    q: C64,
    p: C64,
    dt: f64,
    step: f64,
) -> Result<(C64, C64)> {
    let base = evolve_trajectory(&problem.system, q, p, problem.t, dt, &problem.frame)?;
    let xi = base.xi;
    let eval = |q: C64, p: C64| -> Result<C64> {
        let tr = evolve_trajectory(&problem.system, q, p, problem.t, dt, &problem.frame)?;
        Ok(gamma_exponent_with_width(q, p, xi, problem, &tr))
    };
    let gq = (eval(q + step, p)? - eval(q - step, p)?) / (2.0 * step);
    let gp = (eval(q, p + step)? - eval(q, p - step)?) / (2.0 * step);
    Ok((gq, gp))
}

/// (Γ_qq, Γ_qp, Γ_pp) at the stationary point, with the stability matrix held fixed.
pub fn gamma_second_derivatives(
    lambda: f64,
    stability: &StabilityMatrix,
    frame: &OscillatorFrame,
) -> (C64, C64, C64) {
    let (b, hbar) = (frame.b(), frame.hbar());
    let b2 = b * b;
    let i = C64::i();
    let x = stability.gaussian_width_denominator();
    let qq = (1.0 - 2.0 * lambda - lambda * lambda) / (2.0 * b2) - stability.m_qq / (x * b2);
    let qp = i * (lambda * lambda - 1.0) / (2.0 * hbar) - stability.m_qp / (x * hbar);
    let pp = b2 * (lambda - 1.0).powi(2) / (2.0 * hbar * hbar) - i * b2 * stability.m_qp / (hbar * hbar * x);
    (qq, qp, pp)
}

/// σ± = λ[−1 ± (m_qq − i m_qp)/√(m_qq² + m_qp²)], the eigenvalues of the quadratic form of
/// the saddle expansion. Established for real stability matrices only.
pub fn quadratic_form_eigenvalues(lambda: f64, stability: &StabilityMatrix) -> Result<(C64, C64)> {
    let (a, b) = (stability.m_qq, stability.m_qp);
    if a.norm() == 0.0 && b.norm() == 0.0 {
        return Err(Error::DegenerateStability);
    }
    let ratio = (a - C64::i() * b) / (a * a + b * b).sqrt();
    Ok((lambda * (ratio - 1.0), lambda * (-ratio - 1.0)))
}
