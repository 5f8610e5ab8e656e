use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boundary::{solve_boundary_conditions, solve_from_guess, BoundaryProblem};
use super::trajectory::{dividing_step, TrajectoryResult};
use crate::error::invalid;
use crate::{Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausticSample {
    pub t: f64,
    pub m_qp: Option<C64>,
    pub abs_m_qp: Option<f64>,
    /// Whether the root was continued from the previous sample rather than re-seeded by the
    /// λ-homotopy; a re-seeded root may lie on another branch.
    pub continued: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausticScan {
    pub lambda: f64,
    pub samples: Vec<CausticSample>,
    /// Zeros of Re m_qp, linearly interpolated inside each sign-change bracket of
    /// successfully solved neighbours.
    pub caustic_times: Vec<f64>,
    /// Interior local minima of |m_qp| as (t, |m_qp|), refined by a parabola through the
    /// three bracketing samples. For λ ≠ 1 the trajectory is complex and m_qp generally
    /// misses zero on the real t axis, so these mark the near-caustics.
    pub near_caustics: Vec<(f64, f64)>,
}

/// Scans |m_qp(t)| for the boundary problem `template` (its t and λ are replaced) over an
/// increasing list of times. Each point is continued from the previous solution and falls
/// back to a fresh λ-homotopy when continuation fails.
pub fn detect_caustics(
    template: &BoundaryProblem,
    t_list: &[f64],
    lambda: f64,
    max_dt: f64,
) -> Result<CausticScan> {
    if t_list.is_empty() {
        return Err(invalid("t_list", "at least one time is required"));
    }
    if t_list.windows(2).any(|w| w[1] <= w[0]) || t_list[0] <= 0.0 {
        return Err(invalid("t_list", "times must be positive and strictly increasing"));
    }
    template.with_lambda(lambda).validate()?;
    let mut samples = Vec::with_capacity(t_list.len());
    let mut previous: Option<TrajectoryResult> = None;
    for &t in t_list {
        let problem = template.with_time(t).with_lambda(lambda);
        let dt = dividing_step(t, max_dt);
        let continued = previous.and_then(|tr| solve_from_guess(&problem, dt, tr.q0, tr.p0).ok());
        let was_continued = continued.is_some();
        let solved = match continued {
            Some(sol) => Ok(sol.trajectory),
            None => solve_boundary_conditions(&problem, dt),
        };
        match solved {
            Ok(tr) => {
                previous = Some(tr);
                samples.push(CausticSample {
                    t,
                    m_qp: Some(tr.stability.m_qp),
                    abs_m_qp: Some(tr.stability.m_qp.norm()),
                    continued: was_continued,
                    error: None,
                });
            }
            Err(e) => samples.push(CausticSample {
                t,
                m_qp: None,
                abs_m_qp: None,
                continued: false,
                error: Some(e.to_string()),
            }),
        }
    }
    let solved: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| s.m_qp.map(|m| (s.t, m.re)))
        .collect();
    let caustic_times = solved
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| {
            let ((t0, a), (t1, b)) = (w[0], w[1]);
            t0 + (t1 - t0) * a / (a - b)
        })
        .collect();
    let moduli: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| s.abs_m_qp.map(|a| (s.t, a)))
        .collect();
    let near_caustics = moduli
        .windows(3)
        .filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1)
        .map(|w| parabola_minimum(w[0], w[1], w[2]))
        .collect();
    Ok(CausticScan {
        lambda,
        samples,
        caustic_times,
        near_caustics,
    })
}

fn parabola_minimum((t0, f0): (f64, f64), (t1, f1): (f64, f64), (t2, f2): (f64, f64)) -> (f64, f64) {
    let (a, b) = (t1 - t0, t1 - t2);
    let den = a * (f1 - f2) - b * (f1 - f0);
    if den == 0.0 {
        return (t1, f1);
    }
    let t = t1 - 0.5 * (a * a * (f1 - f2) - b * b * (f1 - f0)) / den;
    let t = t.clamp(t0, t2);
    // Lagrange interpolation through the three samples
    let l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    (t, (f0 * l0 + f1 * l1 + f2 * l2).max(0.0))
}

/// [`detect_caustics`] for several λ in parallel.
pub fn detect_caustics_for(
    template: &BoundaryProblem,
    t_list: &[f64],
    lambdas: &[f64],
    max_dt: f64,
) -> Result<Vec<CausticScan>> {
    lambdas
        .par_iter()
        .map(|&l| detect_caustics(template, t_list, l, max_dt))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiclassics::SystemModel;
    use crate::OscillatorFrame;
    use std::f64::consts::PI;

    const F: OscillatorFrame = OscillatorFrame::DIMENSIONLESS;

    fn grid(a: f64, b: f64, h: f64) -> Vec<f64> {
        let n = ((b - a) / h).round() as usize;
        (0..=n).map(|k| a + k as f64 * h).collect()
    }

    #[test]
    fn free_particle_has_no_caustics() {
        let p = BoundaryProblem::new(0.0, 1.0, 1.0, 1.0, F, SystemModel::free(1.0).unwrap()).unwrap();
        let scan = detect_caustics(&p, &grid(0.1, 5.0, 0.1), 2.0, 0.01).unwrap();
        assert!(scan.caustic_times.is_empty());
        for s in &scan.samples {
            assert!(s.error.is_none());
            assert!((s.abs_m_qp.unwrap() - s.t).abs() < 1e-10);
        }
    }

    #[test]
    fn harmonic_caustics_at_multiples_of_pi() {
        let p = BoundaryProblem::new(0.2, 0.7, 1.0, 1.0, F, SystemModel::harmonic(1.0, 1.0).unwrap()).unwrap();
        let h = 0.01;
        let scan = detect_caustics(&p, &grid(0.05, 6.9, h), 1.0, 0.002).unwrap();
        assert_eq!(scan.caustic_times.len(), 2, "{:?}", scan.caustic_times);
        assert!((scan.caustic_times[0] - PI).abs() < h);
        assert!((scan.caustic_times[1] - 2.0 * PI).abs() < h);
        assert_eq!(scan.near_caustics.len(), 2);
        assert!((scan.near_caustics[0].0 - PI).abs() < h && scan.near_caustics[0].1 < 1e-2);
    }

    #[test]
    fn quartic_caustic_moves_with_lambda() {
        let p = BoundaryProblem::new(0.5, -0.5, 1.0, 1.0, F, SystemModel::quartic(1.0, 1.0, 0.1).unwrap()).unwrap();
        let ts = grid(2.5, 3.5, 0.005);
        let scans = detect_caustics_for(&p, &ts, &[1.0, 1.5], 0.002).unwrap();
        assert_eq!(scans[0].caustic_times.len(), 1, "{:?}", scans[0].caustic_times);
        assert!(scans[1].caustic_times.is_empty());
        let real = scans[0].caustic_times[0];
        let (near, depth) = scans[1].near_caustics[0];
        assert!(depth > 1e-3);
        assert!((near - real).abs() > 1e-3 && (near - real).abs() < 0.2, "{real} {near}");
    }

    #[test]
    fn rejects_bad_time_lists() {
        let p = BoundaryProblem::new(0.0, 1.0, 1.0, 1.0, F, SystemModel::free(1.0).unwrap()).unwrap();
        assert!(detect_caustics(&p, &[], 1.0, 0.01).is_err());
        assert!(detect_caustics(&p, &[1.0, 0.5], 1.0, 0.01).is_err());
    }
}
