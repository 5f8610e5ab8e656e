//! Coherent- and squeezed-state algebra.
//!
//! A coherent state |z⟩ is labelled by the complex number
//! z = q/(√2 b) + i b p/(√2 ħ); all labels are stored as `z` and (q, p) views are derived
//! on demand from an [`OscillatorFrame`].

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::invalid;
use crate::special::{ln_factorial, ln_factorials};
use crate::{Result, C64};

/// Physical constants fixing the unit conversions: ħ, the mass and the coherent-state width b.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorFrame {
    hbar: f64,
    mass: f64,
    b: f64,
}

impl OscillatorFrame {
    /// The dimensionless frame ħ = m = b = 1.
    pub const DIMENSIONLESS: OscillatorFrame = OscillatorFrame {
        hbar: 1.0,
        mass: 1.0,
        b: 1.0,
    };

    pub fn new(hbar: f64, mass: f64, b: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("b", b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { hbar, mass, b })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

impl Default for OscillatorFrame {
    fn default() -> Self {
        Self::DIMENSIONLESS
    }
}

/// Phase-space point stored as its complex coherent-state label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub z: C64,
}

impl PhaseLabel {
    pub fn new(z: C64) -> Self {
        Self { z }
    }
}

impl From<C64> for PhaseLabel {
    fn from(z: C64) -> Self {
        Self { z }
    }
}

/// Label of a squeezed Gaussian |w⟩ of position width `width` (B), with
/// w = q'/(√2 B) + i B p'/(√2 ħ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedLabel {
    pub w: C64,
    width: f64,
}

impl SqueezedLabel {
    pub fn new(w: C64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("B", format!("squeezed width must be > 0, got {width}")));
        }
        Ok(Self { w, width })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// (B² − b²)/(b² + B²) and 2bB/(b² + B²) for the frame width b.
    fn squeeze_factors(&self, frame: &OscillatorFrame) -> (f64, f64) {
        let (b, bb) = (frame.b(), self.width);
        let den = b * b + bb * bb;
        ((bb * bb - b * b) / den, 2.0 * b * bb / den)
    }
}

/// A state in the number basis, truncated at `n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    coefficients: Vec<C64>,
}

impl FockVector {
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("coefficients", "at least c_0 is required"));
        }
        if coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("coefficients", "non-finite coefficient"));
        }
        Ok(Self { coefficients })
    }

    /// The number state |n⟩.
    pub fn basis(n: usize) -> Self {
        let mut coefficients = vec![C64::new(0.0, 0.0); n + 1];
        coefficients[n] = C64::new(1.0, 0.0);
        Self { coefficients }
    }

    /// Coherent state |z⟩ truncated at `n_max` (not renormalised).
    pub fn coherent(z: C64, n_max: usize) -> Self {
        Self {
            coefficients: fock_coefficients(z, n_max),
        }
    }

    pub fn n_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    /// ⟨n|ψ⟩, zero beyond the stored range.
    pub fn coefficient(&self, n: usize) -> C64 {
        self.coefficients
            .get(n)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &FockVector) -> Self {
        let len = self.coefficients.len().max(other.coefficients.len());
        Self {
            coefficients: (0..len)
                .map(|n| self.coefficient(n) + other.coefficient(n))
                .collect(),
        }
    }
}

pub fn phase_to_label(q: f64, p: f64, frame: &OscillatorFrame) -> PhaseLabel {
    PhaseLabel::new(complex_phase_to_label(
        C64::new(q, 0.0),
        C64::new(p, 0.0),
        frame,
    ))
}

pub fn label_to_phase(label: PhaseLabel, frame: &OscillatorFrame) -> (f64, f64) {
    let (b, hbar) = (frame.b(), frame.hbar());
    (SQRT_2 * b * label.z.re, SQRT_2 * hbar * label.z.im / b)
}

/// Analytic continuation of the label map to complex (q, p).
pub fn complex_phase_to_label(q: C64, p: C64, frame: &OscillatorFrame) -> C64 {
    let (b, hbar) = (frame.b(), frame.hbar());
    q / (SQRT_2 * b) + C64::i() * p * (b / (SQRT_2 * hbar))
}

/// ⟨n|z⟩ = e^{−|z|²/2} zⁿ/√n!, evaluated in log space.
pub fn fock_coefficient(n: usize, z: PhaseLabel) -> C64 {
    let z = z.z;
    if z == C64::new(0.0, 0.0) {
        return if n == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
    }
    (z.ln() * n as f64 - 0.5 * z.norm_sqr() - 0.5 * ln_factorial(n)).exp()
}

/// ⟨n|z⟩ for n = 0..=n_max by the recurrence c_n = c_{n−1} z/√n.
pub fn fock_coefficients(z: C64, n_max: usize) -> Vec<C64> {
    scaled_monomials(C64::new(-0.5 * z.norm_sqr(), 0.0), z, n_max)
}

/// e^{ln_prefactor} zⁿ/√n! for n = 0..=n_max, each term formed in log space.
pub(crate) fn scaled_monomials(ln_prefactor: C64, z: C64, n_max: usize) -> Vec<C64> {
    if z == C64::new(0.0, 0.0) {
        let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
        out[0] = ln_prefactor.exp();
        return out;
    }
    let ln_z = z.ln();
    ln_factorials(n_max)
        .iter()
        .enumerate()
        .map(|(n, lf)| (ln_prefactor + ln_z * n as f64 - 0.5 * lf).exp())
        .collect()
}

/// ⟨x|z⟩ = π^{−1/4} b^{−1/2} exp[−(x/b − √2 z)²/2 + z(z − z*)/2].
///
/// The modulus is the decaying Gaussian (π b²)^{−1/4} e^{−(x−q)²/2b²}.
pub fn position_wavefunction(x: f64, z: PhaseLabel, frame: &OscillatorFrame) -> C64 {
    ln_position_wavefunction(x, z.z, frame.b()).exp()
}

pub(crate) fn ln_position_wavefunction(x: f64, z: C64, b: f64) -> C64 {
    let u = C64::new(x / b, 0.0) - z * SQRT_2;
    -0.25 * PI.ln() - 0.5 * b.ln() - 0.5 * u * u + 0.5 * z * (z - z.conj())
}

/// ⟨w|z⟩ between a squeezed state of width B and a coherent state of the frame width b.
pub fn squeezed_overlap(w: &SqueezedLabel, z: PhaseLabel, frame: &OscillatorFrame) -> C64 {
    ln_squeezed_overlap(w, z.z, frame).exp()
}

pub(crate) fn ln_squeezed_overlap(w: &SqueezedLabel, z: C64, frame: &OscillatorFrame) -> C64 {
    let (s, c) = w.squeeze_factors(frame);
    let wc = w.w.conj();
    0.5 * c.ln() - 0.5 * w.w.norm_sqr() - 0.5 * z.norm_sqr() + 0.5 * s * (z * z - wc * wc)
        + c * wc * z
}

/// ⟨n|w⟩ for a squeezed state, n = 0..=n_max.
///
/// The Bargmann function of |w⟩ is √c e^{−|w|²/2 − s w²/2} exp(s ζ²/2 + c w ζ); its Taylor
/// coefficients obey (n+1) a_{n+1} = c w a_n + s a_{n−1}, and ⟨n|w⟩ = √n! a_n × prefactor.
pub fn squeezed_fock_coefficients(
    w: &SqueezedLabel,
    n_max: usize,
    frame: &OscillatorFrame,
) -> Vec<C64> {
    let (s, c) = w.squeeze_factors(frame);
    let pref = (0.5 * c.ln() - 0.5 * w.w.norm_sqr() - 0.5 * s * w.w * w.w).exp();
    let mut d = Vec::with_capacity(n_max + 1);
    d.push(C64::new(1.0, 0.0));
    if n_max >= 1 {
        d.push(c * w.w);
    }
    for n in 1..n_max {
        let next = (c * w.w * d[n] + s * (n as f64).sqrt() * d[n - 1]) / ((n + 1) as f64).sqrt();
        d.push(next);
    }
    d.into_iter().map(|x| x * pref).collect()
}

/// ⟨z1|z2⟩ = exp(−|z1|²/2 − |z2|²/2 + z1* z2).
pub fn coherent_overlap(z1: PhaseLabel, z2: PhaseLabel) -> C64 {
    let (a, b) = (z1.z, z2.z);
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}

/// Σ_n φ_n* ψ_n over the common range.
pub fn fock_inner(phi: &FockVector, psi: &FockVector) -> C64 {
    phi.coefficients
        .iter()
        .zip(&psi.coefficients)
        .map(|(a, b)| a.conj() * b)
        .sum()
}
