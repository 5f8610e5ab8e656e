use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::invalid;
use crate::{Error, OscillatorFrame, Result, C64};

/// Polynomial one-dimensional Hamiltonians H = p²/2m + V(q), continued to complex q by
/// evaluating the same polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemModel {
    Free { mass: f64 },
    Harmonic { mass: f64, omega: f64 },
    /// V = ½ m ω² q² + a₄ q⁴
    Quartic { mass: f64, omega: f64, a4: f64 },
}

impl SystemModel {
    pub fn free(mass: f64) -> Result<Self> {
        let s = SystemModel::Free { mass };
        s.validate()?;
        Ok(s)
    }

    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        let s = SystemModel::Harmonic { mass, omega };
        s.validate()?;
        Ok(s)
    }

    pub fn quartic(mass: f64, omega: f64, a4: f64) -> Result<Self> {
        let s = SystemModel::Quartic { mass, omega, a4 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (mass, omega, a4) = self.parameters();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("must be > 0, got {mass}")));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(invalid("omega", format!("must be >= 0, got {omega}")));
        }
        if let SystemModel::Harmonic { .. } = self {
            if omega == 0.0 {
                return Err(invalid("omega", "harmonic system needs omega > 0"));
            }
        }
        if !a4.is_finite() {
            return Err(invalid("a4", format!("must be finite, got {a4}")));
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.parameters().0
    }

    fn parameters(&self) -> (f64, f64, f64) {
        match *self {
            SystemModel::Free { mass } => (mass, 0.0, 0.0),
            SystemModel::Harmonic { mass, omega } => (mass, omega, 0.0),
            SystemModel::Quartic { mass, omega, a4 } => (mass, omega, a4),
        }
    }

    /// True when V is at most quadratic, so the stability matrix is independent of the
    /// initial data.
    pub fn is_quadratic(&self) -> bool {
        self.parameters().2 == 0.0
    }

    pub fn potential(&self, q: C64) -> C64 {
        let (m, w, a4) = self.parameters();
        let q2 = q * q;
        0.5 * m * w * w * q2 + a4 * q2 * q2
    }

    /// −V′(q)
    pub fn force(&self, q: C64) -> C64 {
        let (m, w, a4) = self.parameters();
        -(m * w * w * q + 4.0 * a4 * q * q * q)
    }

    /// V″(q)
    pub fn curvature(&self, q: C64) -> C64 {
        let (m, w, a4) = self.parameters();
        m * w * w + 12.0 * a4 * q * q
    }

    pub fn hamiltonian(&self, q: C64, p: C64) -> C64 {
        p * p / (2.0 * self.mass()) + self.potential(q)
    }

    /// ⟨x″|e^{−iHt/ħ}|x′⟩ where a closed form exists (free particle; harmonic oscillator as
    /// the Mehler kernel with the Maslov phase e^{−ikπ/2}, k = ⌊ωt/π⌋). `None` for the
    /// quartic system.
    pub fn exact_propagator(
        &self,
        x_final: f64,
        x_initial: f64,
        t: f64,
        frame: &OscillatorFrame,
    ) -> Option<Result<C64>> {
        if !(t.is_finite() && t > 0.0) {
            return Some(Err(invalid("t", format!("must be > 0, got {t}"))));
        }
        let hbar = frame.hbar();
        let i = C64::i();
        match *self {
            SystemModel::Free { mass } => {
                let pref = (C64::new(mass, 0.0) / (2.0 * PI * i * hbar * t)).sqrt();
                let d = x_final - x_initial;
                Some(Ok(pref * (i * mass * d * d / (2.0 * hbar * t)).exp()))
            }
            SystemModel::Harmonic { mass, omega } => {
                let wt = omega * t;
                let s = wt.sin();
                let k = (wt / PI).floor();
                if s.abs() < 1e-12 || (wt / PI - (wt / PI).round()).abs() < 1e-12 {
                    return Some(Err(Error::Caustic {
                        time: t,
                        lambda: 1.0,
                        m_qp: s.abs(),
                    }));
                }
                let modulus = (mass * omega / (2.0 * PI * hbar * s.abs())).sqrt();
                let phase = -PI / 4.0 - k * PI / 2.0;
                let (xi, xf) = (x_initial, x_final);
                let arg = mass * omega / (2.0 * hbar * s) * ((xi * xi + xf * xf) * wt.cos() - 2.0 * xi * xf);
                Some(Ok(C64::from_polar(modulus, phase + arg)))
            }
            SystemModel::Quartic { .. } => None,
        }
    }
}
