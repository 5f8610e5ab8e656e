use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use super::SystemModel;
use crate::error::invalid;
use crate::{Error, OscillatorFrame, Result, C64};

/// Stability (monodromy) matrix in the scaled convention
/// δq_t = m_qq δq₀ + (b²/ħ) m_qp δp₀,  δp_t = (ħ/b²) m_pq δq₀ + m_pp δp₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityMatrix {
    pub m_qq: C64,
    pub m_qp: C64,
    pub m_pq: C64,
    pub m_pp: C64,
}

impl StabilityMatrix {
    pub const IDENTITY: StabilityMatrix = StabilityMatrix {
        m_qq: C64::new(1.0, 0.0),
        m_qp: C64::new(0.0, 0.0),
        m_pq: C64::new(0.0, 0.0),
        m_pp: C64::new(1.0, 0.0),
    };

    /// From the raw monodromy ∂(q_t, p_t)/∂(q₀, p₀).
    pub fn from_monodromy(raw: [C64; 4], frame: &OscillatorFrame) -> Self {
        let scale = frame.hbar() / (frame.b() * frame.b());
        StabilityMatrix {
            m_qq: raw[0],
            m_qp: raw[1] * scale,
            m_pq: raw[2] / scale,
            m_pp: raw[3],
        }
    }

    /// ∂(q_t, p_t)/∂(q₀, p₀) in physical units.
    pub fn monodromy(&self, frame: &OscillatorFrame) -> [C64; 4] {
        let scale = frame.hbar() / (frame.b() * frame.b());
        [self.m_qq, self.m_qp / scale, self.m_pq * scale, self.m_pp]
    }

    pub fn determinant(&self) -> C64 {
        self.m_qq * self.m_pp - self.m_qp * self.m_pq
    }

    /// m_qq + i m_qp
    pub fn gaussian_width_denominator(&self) -> C64 {
        self.m_qq + C64::i() * self.m_qp
    }

    /// ξ = (m_pp − i m_pq)/(m_qq + i m_qp)
    pub fn xi(&self) -> C64 {
        (self.m_pp - C64::i() * self.m_pq) / self.gaussian_width_denominator()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub q0: C64,
    pub p0: C64,
    pub qt: C64,
    pub pt: C64,
    /// S = ∫ (p q̇ − H) dt
    pub action: C64,
    pub stability: StabilityMatrix,
    pub xi: C64,
    /// v₀ = q₀/√2b − i b p₀/√2ħ
    pub v0: C64,
    pub time: f64,
    pub steps: usize,
    /// √(m_qq + i m_qp), phase tracked continuously from 1 at t = 0.
    pub sqrt_width: C64,
    /// √(2πi m_qp), phase tracked from the principal value after the first step.
    pub sqrt_prefactor: C64,
    /// Number of steps where the tracked phase of 2πi m_qp jumped by more than π/2;
    /// each such jump was resolved by advancing the phase by +π.
    pub caustic_crossings: usize,
}

impl TrajectoryResult {
    pub fn recomputed_xi(&self) -> C64 {
        self.stability.xi()
    }

    pub fn recomputed_v0(&self, frame: &OscillatorFrame) -> C64 {
        v0_of(self.q0, self.p0, frame)
    }
}

pub(crate) fn v0_of(q0: C64, p0: C64, frame: &OscillatorFrame) -> C64 {
    let (b, hbar) = (frame.b(), frame.hbar());
    q0 / (SQRT_2 * b) - C64::i() * p0 * (b / (SQRT_2 * hbar))
}

type State = [C64; 7];

fn derivative(system: &SystemModel, y: &State) -> State {
    let m = system.mass();
    let (q, p) = (y[0], y[1]);
    let k = system.curvature(q);
    [
        p / m,
        system.force(q),
        y[4] / m,
        y[5] / m,
        -k * y[2],
        -k * y[3],
        p * p / (2.0 * m) - system.potential(q),
    ]
}

fn rk4_step(system: &SystemModel, y: &State, dt: f64) -> State {
    let axpy = |a: &State, k: &State, h: f64| -> State {
        let mut out = *a;
        for (o, d) in out.iter_mut().zip(k) {
            *o += d * h;
        }
        out
    };
    let k1 = derivative(system, y);
    let k2 = derivative(system, &axpy(y, &k1, 0.5 * dt));
    let k3 = derivative(system, &axpy(y, &k2, 0.5 * dt));
    let k4 = derivative(system, &axpy(y, &k3, dt));
    let mut out = *y;
    for i in 0..7 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Continuous phase of a sampled complex curve; a jump above π/2 is resolved as +π.
#[derive(Clone, Copy, Debug)]
struct PhaseTracker {
    phase: f64,
    jumps: usize,
}

impl PhaseTracker {
    fn new(initial: C64) -> Self {
        Self {
            phase: initial.arg(),
            jumps: 0,
        }
    }

    fn advance(&mut self, value: C64) {
        let mut delta = value.arg() - self.phase;
        delta -= 2.0 * PI * (delta / (2.0 * PI)).round();
        if delta.abs() > FRAC_PI_2 {
            self.jumps += 1;
            if delta < 0.0 {
                delta += 2.0 * PI;
            }
        }
        self.phase += delta;
    }

    fn sqrt(&self, value: C64) -> C64 {
        C64::from_polar(value.norm().sqrt(), 0.5 * self.phase)
    }
}

/// Number of fixed steps of size dt covering [0, t]; dt must divide t.
pub fn step_count(t: f64, dt: f64) -> Result<usize> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    let n = (t / dt).round();
    if (n * dt - t).abs() > 1e-9 * t.max(dt) {
        return Err(invalid("dt", format!("{dt} does not divide t = {t}")));
    }
    Ok(n as usize)
}

/// A step no larger than `max_dt` that divides t exactly.
pub fn dividing_step(t: f64, max_dt: f64) -> f64 {
    if t <= 0.0 {
        return max_dt;
    }
    t / (t / max_dt).ceil()
}

/// Integrates Hamilton's equations, the variational system and the action with classic
/// fixed-step RK4 from complex initial data.
pub fn evolve_trajectory(
    system: &SystemModel,
    q0: C64,
    p0: C64,
    t: f64,
    dt: f64,
    frame: &OscillatorFrame,
) -> Result<TrajectoryResult> {
    system.validate()?;
    let steps = step_count(t, dt)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut y: State = [q0, p0, one, zero, zero, one, zero];
    let mut width = PhaseTracker::new(one);
    let mut prefactor: Option<PhaseTracker> = None;
    let scale = frame.hbar() / (frame.b() * frame.b());
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    for k in 0..steps {
        y = rk4_step(system, &y, h);
        if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::TrajectoryEscape {
                time: (k + 1) as f64 * h,
            });
        }
        width.advance(y[2] + C64::i() * y[3] * scale);
        let pref = 2.0 * PI * C64::i() * y[3] * scale;
        match prefactor.as_mut() {
            Some(tr) => tr.advance(pref),
            None => prefactor = Some(PhaseTracker::new(pref)),
        }
    }
    let stability = StabilityMatrix::from_monodromy([y[2], y[3], y[4], y[5]], frame);
    let x = stability.gaussian_width_denominator();
    let pref = 2.0 * PI * C64::i() * stability.m_qp;
    let prefactor = prefactor.unwrap_or_else(|| PhaseTracker::new(pref));
    Ok(TrajectoryResult {
        q0,
        p0,
        qt: y[0],
        pt: y[1],
        action: y[6],
        stability,
        xi: stability.xi(),
        v0: v0_of(q0, p0, frame),
        time: t,
        steps,
        sqrt_width: width.sqrt(x),
        sqrt_prefactor: prefactor.sqrt(pref),
        caustic_crossings: prefactor.jumps,
    })
}
