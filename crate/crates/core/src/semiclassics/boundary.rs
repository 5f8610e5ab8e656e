use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use super::trajectory::{evolve_trajectory, TrajectoryResult};
use super::SystemModel;
use crate::error::invalid;
use crate::{Error, OscillatorFrame, Result, C64};

/// Tolerance on |m_qp| (scaled units) below which a trajectory is treated as a caustic.
pub const CAUSTIC_TOLERANCE: f64 = 1e-8;

/// Residual accepted from the boundary solve.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

const HOMOTOPY_STEP: f64 = 0.1;
const NEWTON_MAX_ITER: usize = 60;
const NEWTON_TARGET: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProblem {
    pub x_initial: f64,
    pub x_final: f64,
    pub t: f64,
    pub lambda: f64,
    pub frame: OscillatorFrame,
    pub system: SystemModel,
}

impl BoundaryProblem {
    pub fn new(
        x_initial: f64,
        x_final: f64,
        t: f64,
        lambda: f64,
        frame: OscillatorFrame,
        system: SystemModel,
    ) -> Result<Self> {
        let p = Self {
            x_initial,
            x_final,
            t,
            lambda,
            frame,
            system,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_initial.is_finite() && self.x_final.is_finite()) {
            return Err(invalid("x", "endpoints must be finite"));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(invalid("t", format!("must be > 0, got {}", self.t)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid("lambda", format!("must be > 0, got {}", self.lambda)));
        }
        self.system.validate()?;
        if self.system.mass() != self.frame.mass() {
            return Err(invalid(
                "mass",
                format!(
                    "system mass {} differs from frame mass {}",
                    self.system.mass(),
                    self.frame.mass()
                ),
            ));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn with_time(&self, t: f64) -> Self {
        Self { t, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySolution {
    pub trajectory: TrajectoryResult,
    /// |(F₁, F₂)| at the returned trajectory.
    pub residual: f64,
    pub homotopy_steps: usize,
    pub newton_iterations: usize,
}

/// The two stationary-point conditions
/// F₁ = (λ−1)v₀ − √2(x′−q₀)/b,  F₂ = (λ−1)v₀(m_qq + i m_qp) − √2(x″−q_t)/b.
pub fn boundary_residual(problem: &BoundaryProblem, traj: &TrajectoryResult) -> [C64; 2] {
    let b = problem.frame.b();
    let l1 = problem.lambda - 1.0;
    let x = traj.stability.gaussian_width_denominator();
    [
        l1 * traj.v0 - SQRT_2 * (problem.x_initial - traj.q0) / b,
        l1 * traj.v0 * x - SQRT_2 * (problem.x_final - traj.qt) / b,
    ]
}

fn norm2(f: &[C64; 2]) -> f64 {
    (f[0].norm_sqr() + f[1].norm_sqr()).sqrt()
}

/// Damped Newton on (q₀, p₀) from an explicit starting point, at the problem's λ.
pub fn solve_from_guess(
    problem: &BoundaryProblem,
    dt: f64,
    q0: C64,
    p0: C64,
) -> Result<BoundarySolution> {
    problem.validate()?;
    let frame = &problem.frame;
    let (b, hbar) = (frame.b(), frame.hbar());
    let l1 = problem.lambda - 1.0;
    let i = C64::i();
    let evolve = |q: C64, p: C64| evolve_trajectory(&problem.system, q, p, problem.t, dt, frame);

    let mut traj = evolve(q0, p0)?;
    let mut f = boundary_residual(problem, &traj);
    let mut res = norm2(&f);
    let mut iterations = 0;
    let dv_dq = C64::new(1.0 / (SQRT_2 * b), 0.0);
    let dv_dp = -i * (b / (SQRT_2 * hbar));
    while res > NEWTON_TARGET && iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let raw = traj.stability.monodromy(frame);
        let x = traj.stability.gaussian_width_denominator();
        // X depends on the initial data only through V‴ ≠ 0
        let (dx_dq, dx_dp) = if problem.system.is_quadratic() || l1 == 0.0 {
            (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
        } else {
            let h = 1e-6 * (1.0 + traj.q0.norm().max(traj.p0.norm()));
            let xq = |q: C64, p: C64| -> Result<C64> {
                Ok(evolve(q, p)?.stability.gaussian_width_denominator())
            };
            (
                (xq(traj.q0 + h, traj.p0)? - xq(traj.q0 - h, traj.p0)?) / (2.0 * h),
                (xq(traj.q0, traj.p0 + h)? - xq(traj.q0, traj.p0 - h)?) / (2.0 * h),
            )
        };
        let j11 = l1 * dv_dq + SQRT_2 / b;
        let j12 = l1 * dv_dp;
        let j21 = l1 * (dv_dq * x + traj.v0 * dx_dq) + SQRT_2 / b * raw[0];
        let j22 = l1 * (dv_dp * x + traj.v0 * dx_dp) + SQRT_2 / b * raw[1];
        let det = j11 * j22 - j12 * j21;
        if det.norm() == 0.0 || !det.is_finite() {
            break;
        }
        let dq = -(j22 * f[0] - j12 * f[1]) / det;
        let dp = -(-j21 * f[0] + j11 * f[1]) / det;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = evolve(traj.q0 + alpha * dq, traj.p0 + alpha * dp);
            if let Ok(c) = candidate {
                let fc = boundary_residual(problem, &c);
                let rc = norm2(&fc);
                if rc.is_finite() && rc < res {
                    traj = c;
                    f = fc;
                    res = rc;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res.is_nan() || res > BOUNDARY_TOLERANCE {
        return Err(Error::NewtonStagnation {
            lambda: problem.lambda,
            residual: res,
        });
    }
    Ok(BoundarySolution {
        trajectory: traj,
        residual: res,
        homotopy_steps: 0,
        newton_iterations: iterations,
    })
}

/// Solves the stationary-point conditions: real shooting at λ = 1 from p = m(x″−x′)/t, then
/// continuation in λ in steps of at most 0.1.
pub fn solve_boundary_detailed(problem: &BoundaryProblem, dt: f64) -> Result<BoundarySolution> {
    problem.validate()?;
    let seed_problem = problem.with_lambda(1.0);
    let p_guess = problem.system.mass() * (problem.x_final - problem.x_initial) / problem.t;
    let mut sol = solve_from_guess(
        &seed_problem,
        dt,
        C64::new(problem.x_initial, 0.0),
        C64::new(p_guess, 0.0),
    )
    .map_err(|e| match e {
        Error::NewtonStagnation { residual, .. } => Error::NewtonStagnation {
            lambda: 1.0,
            residual,
        },
        other => other,
    })?;
    let m_qp = sol.trajectory.stability.m_qp.norm();
    if m_qp < CAUSTIC_TOLERANCE {
        return Err(Error::SeedCaustic { m_qp });
    }
    let span = problem.lambda - 1.0;
    let steps = (span.abs() / HOMOTOPY_STEP - 1e-12).ceil().max(0.0) as usize;
    let mut iterations = sol.newton_iterations;
    for k in 1..=steps {
        let lambda = if k == steps {
            problem.lambda
        } else {
            1.0 + span * k as f64 / steps as f64
        };
        let tr = sol.trajectory;
        sol = solve_from_guess(&problem.with_lambda(lambda), dt, tr.q0, tr.p0)?;
        iterations += sol.newton_iterations;
    }
    sol.homotopy_steps = steps;
    sol.newton_iterations = iterations;
    Ok(sol)
}

pub fn solve_boundary_conditions(problem: &BoundaryProblem, dt: f64) -> Result<TrajectoryResult> {
    Ok(solve_boundary_detailed(problem, dt)?.trajectory)
}
