use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::boundary::{solve_boundary_detailed, BoundaryProblem, CAUSTIC_TOLERANCE};
use super::exponent::gamma_exponent;
use super::trajectory::{evolve_trajectory, TrajectoryResult};
use crate::cs::{complex_phase_to_label, label_to_phase, ln_position_wavefunction};
use crate::error::invalid;
use crate::quadrature::{pairwise_sum, QuadratureSpec};
use crate::resolution::{ClosureMap, OffCenterMap, Ordering};
use crate::{Error, OscillatorFrame, PhaseLabel, Result, C64};

/// ⟨x|K(t)|z⟩ in the thawed-Gaussian approximation,
/// π^{−1/4} b^{−1/2} (m_qq + i m_qp)^{−1/2} exp[−ξ(x−q_t)²/2b² + (i/ħ)(S + p_t(x−q_t) + ½ q p)].
pub fn heller_propagator(
    x: f64,
    z: PhaseLabel,
    traj: &TrajectoryResult,
    frame: &OscillatorFrame,
) -> Result<C64> {
    let launched = complex_phase_to_label(traj.q0, traj.p0, frame);
    if (launched - z.z).norm() > 1e-12 * (1.0 + z.z.norm()) {
        return Err(invalid(
            "traj",
            format!("trajectory starts at label {launched}, not at {}", z.z),
        ));
    }
    Ok(ln_heller(x, traj, frame)?.exp())
}

fn ln_heller(x: f64, traj: &TrajectoryResult, frame: &OscillatorFrame) -> Result<C64> {
    if traj.stability.gaussian_width_denominator().norm() < CAUSTIC_TOLERANCE {
        return Err(Error::GaussianCaustic);
    }
    let (b, hbar) = (frame.b(), frame.hbar());
    let d = x - traj.qt;
    Ok(-0.25 * PI.ln() - 0.5 * b.ln() - traj.sqrt_width.ln() - traj.xi * d * d / (2.0 * b * b)
        + C64::i() / hbar * (traj.action + traj.pt * d + 0.5 * traj.q0 * traj.p0))
}

/// Γ₀ at a solution of the stationary-point conditions; exactly iS/ħ at λ = 1.
pub fn gamma0(traj: &TrajectoryResult, problem: &BoundaryProblem) -> C64 {
    let frame = &problem.frame;
    let (b, hbar) = (frame.b(), frame.hbar());
    let b2 = b * b;
    let lambda = problem.lambda;
    let i = C64::i();
    if lambda == 1.0 {
        return i * traj.action / hbar;
    }
    let (x1, x2) = (problem.x_initial, problem.x_final);
    let d0 = x1 - traj.q0;
    let dt = x2 - traj.qt;
    -(x1 * x1 - traj.q0 * traj.q0) / (2.0 * b2) + (lambda + 1.0) / (lambda - 1.0) * d0 * d0 / b2
        - traj.xi * dt * dt / (2.0 * b2)
        + i / hbar * (traj.action + traj.pt * dt)
}

fn check_caustic(traj: &TrajectoryResult, problem: &BoundaryProblem) -> Result<()> {
    let m_qp = traj.stability.m_qp.norm();
    if m_qp < CAUSTIC_TOLERANCE {
        return Err(Error::Caustic {
            time: problem.t,
            lambda: problem.lambda,
            m_qp,
        });
    }
    Ok(())
}

fn assemble(exponent: C64, traj: &TrajectoryResult, frame: &OscillatorFrame) -> C64 {
    exponent.exp() / (frame.b() * traj.sqrt_prefactor)
}

/// e^{iS/ħ}/(b √(2πi m_qp)) on the real trajectory x′ → x″.
pub fn van_vleck(problem: &BoundaryProblem, dt: f64) -> Result<C64> {
    if problem.lambda != 1.0 {
        return Err(invalid("lambda", "the van Vleck formula is the lambda = 1 member"));
    }
    let traj = solve_boundary_detailed(problem, dt)?.trajectory;
    check_caustic(&traj, problem)?;
    let exponent = C64::i() * traj.action / problem.frame.hbar();
    Ok(assemble(exponent, &traj, &problem.frame))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScPropagation {
    pub value: C64,
    pub gamma0: C64,
    pub trajectory: TrajectoryResult,
    pub residual: f64,
}

/// e^{Γ₀}/(b √(2πi m_qp)) with the λ-dependent complex trajectory.
pub fn sc_propagator(problem: &BoundaryProblem, dt: f64) -> Result<C64> {
    Ok(sc_propagator_detailed(problem, dt)?.value)
}

pub fn sc_propagator_detailed(problem: &BoundaryProblem, dt: f64) -> Result<ScPropagation> {
    let sol = solve_boundary_detailed(problem, dt)?;
    let traj = sol.trajectory;
    check_caustic(&traj, problem)?;
    let g0 = gamma0(&traj, problem);
    Ok(ScPropagation {
        value: assemble(g0, &traj, &problem.frame),
        gamma0: g0,
        trajectory: traj,
        residual: sol.residual,
    })
}

/// Brute-force phase-space quadrature of the pre-saddle integral
/// ∫ (d²z/π) λ e^{(λ−1)²|z|²/2} ⟨x″|K|z⟩_Heller ⟨λz|x′⟩ (`BraMapped`, the default), or of
/// ∫ (d²z/π) λ e^{(λ−1)²|z|²/2} ⟨x″|K|λz⟩_Heller ⟨z|x′⟩ (`KetMapped`). One real trajectory
/// is evolved per node.
pub fn numeric_resolution_propagator(
    problem: &BoundaryProblem,
    spec: &QuadratureSpec,
    dt: f64,
    ordering: Ordering,
) -> Result<C64> {
    problem.validate()?;
    let frame = problem.frame;
    let lambda = problem.lambda;
    let map = OffCenterMap::scaling(lambda)?;
    let nodes = spec.nodes();
    let samples: Vec<Result<C64>> = nodes
        .par_iter()
        .map(|&(z, w)| {
            let value = match ordering {
                Ordering::BraMapped => {
                    let (q, p) = label_to_phase(PhaseLabel::new(z), &frame);
                    let (q, p) = (C64::new(q, 0.0), C64::new(p, 0.0));
                    let tr = evolve_trajectory(&problem.system, q, p, problem.t, dt, &frame)?;
                    let ln = gamma_exponent(q, p, problem, &tr) - tr.sqrt_width.ln();
                    lambda / (frame.b() * PI.sqrt()) * ln.exp()
                }
                Ordering::KetMapped => {
                    let (q, p) = label_to_phase(PhaseLabel::new(lambda * z), &frame);
                    let tr = evolve_trajectory(
                        &problem.system,
                        C64::new(q, 0.0),
                        C64::new(p, 0.0),
                        problem.t,
                        dt,
                        &frame,
                    )?;
                    let ln = map.ln_measure(z)
                        + ln_heller(problem.x_final, &tr, &frame)?
                        + ln_position_wavefunction(problem.x_initial, z, frame.b()).conj();
                    ln.exp()
                }
            };
            Ok(value * w)
        })
        .collect();
    let mut weighted = Vec::with_capacity(samples.len());
    for (index, s) in samples.into_iter().enumerate() {
        let v = s?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteSample {
                index,
                z: nodes[index].0,
            });
        }
        weighted.push(v);
    }
    Ok(pairwise_sum(&weighted))
}

/// One row of a propagator scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x_initial: f64,
    pub x_final: f64,
    pub t: f64,
    pub lambda: f64,
    pub q0: Option<C64>,
    pub p0: Option<C64>,
    pub action: Option<C64>,
    pub m_qp: Option<C64>,
    pub value: Option<C64>,
    pub exact: Option<C64>,
    pub abs_error: Option<f64>,
    pub caustic: bool,
    pub caustic_crossings: usize,
    pub error: Option<String>,
}

/// Evaluates the semiclassical propagator and, where available, the exact one; failures
/// are recorded in the row rather than returned.
pub fn propagate_row(problem: &BoundaryProblem, dt: f64) -> ScanRow {
    let exact = problem
        .system
        .exact_propagator(problem.x_final, problem.x_initial, problem.t, &problem.frame)
        .and_then(|r| r.ok());
    let mut row = ScanRow {
        x_initial: problem.x_initial,
        x_final: problem.x_final,
        t: problem.t,
        lambda: problem.lambda,
        q0: None,
        p0: None,
        action: None,
        m_qp: None,
        value: None,
        exact,
        abs_error: None,
        caustic: false,
        caustic_crossings: 0,
        error: None,
    };
    match sc_propagator_detailed(problem, dt) {
        Ok(sc) => {
            let tr = sc.trajectory;
            row.q0 = Some(tr.q0);
            row.p0 = Some(tr.p0);
            row.action = Some(tr.action);
            row.m_qp = Some(tr.stability.m_qp);
            row.value = Some(sc.value);
            row.caustic_crossings = tr.caustic_crossings;
            row.abs_error = exact.map(|e| (e - sc.value).norm());
        }
        Err(e) => {
            row.caustic = matches!(e, Error::Caustic { .. } | Error::SeedCaustic { .. });
            row.error = Some(e.to_string());
        }
    }
    row
}
