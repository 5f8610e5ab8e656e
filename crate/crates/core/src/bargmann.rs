//! Bargmann functions ψ(z*) = (z|ψ⟩ and the two ladders of reproducing kernels.
//!
//! With the non-normalised states |z) = e^{|z|²/2}|z⟩ the scaled closure reads
//! ∫ (d²z/π) λ e^{−λ|z|²} |λz)(z| = 1, whose kernel is K(z*, z′; λ) = e^{λ z* z′}. The
//! secondary kernels K^(N) = (λᴺ/N!)[z′(z′* − z*)]ᴺ K reproduce the same functions under the
//! same weight; the uniform-measure kernels K̃^(N) = λ e^{−λ|z′|²} K^(N) absorb the weight.

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::quadrature::{integrate_phase_space, truncation_radius, QuadratureSpec, TailModel};
use crate::special::ln_factorial;
use crate::{FockVector, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BargmannFunction {
    pub source: FockVector,
}

impl BargmannFunction {
    pub fn new(source: FockVector) -> Self {
        Self { source }
    }

    /// z*ᵏ/√k!
    pub fn monomial(k: usize) -> Self {
        Self::new(FockVector::basis(k))
    }

    pub fn degree(&self) -> usize {
        self.source.n_max()
    }
}

/// ψ(z*) = Σ cₙ z*ⁿ/√n! by a Horner recurrence with the √n! folded into the steps.
pub fn bargmann_eval(psi: &BargmannFunction, zstar: C64) -> C64 {
    let c = psi.source.coefficients();
    let mut acc = c[c.len() - 1];
    for n in (0..c.len() - 1).rev() {
        acc = c[n] + acc * zstar / ((n + 1) as f64).sqrt();
    }
    acc
}

/// K(z*, z′; λ) = e^{λ z* z′}.
pub fn kernel(zstar: C64, zprime: C64, lambda: f64) -> C64 {
    (lambda * zstar * zprime).exp()
}

/// K^(N) = (λᴺ/N!) [z′(z′* − z*)]ᴺ e^{λ z* z′}; K^(0) is [`kernel`] itself.
pub fn secondary_kernel(n: usize, zstar: C64, zprime: C64, lambda: f64) -> C64 {
    let k = kernel(zstar, zprime, lambda);
    if n == 0 {
        return k;
    }
    let base = lambda * zprime * (zprime.conj() - zstar);
    base.powu(n as u32) * (-ln_factorial(n)).exp() * k
}

/// K̃^(N) = ((−1)ᴺ λ^{N+1}/N!) ∂ᴺ_λ [e^{−λ|z′|²} e^{λ z* z′}]
///       = (λ^{N+1}/N!) [z′(z′* − z*)]ᴺ e^{−λ|z′|² + λ z* z′}.
pub fn uniform_kernel(n: usize, zstar: C64, zprime: C64, lambda: f64) -> C64 {
    lambda * (-lambda * zprime.norm_sqr()).exp() * secondary_kernel(n, zstar, zprime, lambda)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    Ok(())
}

/// Polar spec for the reproducing integrals: the Gaussian e^{−λ|z′|²} times a polynomial of
/// total degree `degree` in (z′, z′*), shifted by the kernel's e^{λ Re z* z′} drift.
pub fn kernel_spec(lambda: f64, degree: usize, zstar: C64) -> Result<QuadratureSpec> {
    check_lambda(lambda)?;
    let half_degree = degree.div_ceil(2);
    let radius = truncation_radius(lambda, half_degree, 1e-15)? + zstar.norm();
    let n_radial = 128 + 4 * degree;
    let n_angular = 64 + 2 * degree + (8.0 * lambda * zstar.norm() * radius).ceil() as usize;
    Ok(
        QuadratureSpec::polar(radius, n_radial, n_angular)?.with_tail(TailModel::Gaussian {
            rate: lambda,
            degree: half_degree,
        }),
    )
}

/// ∫ (d²z′/π) λ e^{−λ|z′|²} K^(N)(z*, z′; λ) ψ(z′*).
pub fn reproduce(
    psi: &BargmannFunction,
    zstar: C64,
    lambda: f64,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<C64> {
    check_lambda(lambda)?;
    let r = integrate_phase_space(
        |zp| {
            lambda
                * (-lambda * zp.norm_sqr()).exp()
                * secondary_kernel(n, zstar, zp, lambda)
                * bargmann_eval(psi, zp.conj())
        },
        spec,
    )?;
    Ok(r.value)
}

/// ∫ (d²z′/π) K̃^(N)(z*, z′; λ) ψ(z′*).
pub fn reproduce_uniform(
    psi: &BargmannFunction,
    zstar: C64,
    lambda: f64,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<C64> {
    check_lambda(lambda)?;
    let r = integrate_phase_space(
        |zp| uniform_kernel(n, zstar, zp, lambda) * bargmann_eval(psi, zp.conj()),
        spec,
    )?;
    Ok(r.value)
}

/// ∫ (d²z′/π) λ e^{−λ|z′|²} K(z*, z′) K(z′*, z″), which should equal K(z*, z″).
pub fn kernel_self_consistency(
    zstar: C64,
    zdoubleprime: C64,
    lambda: f64,
    spec: &QuadratureSpec,
) -> Result<C64> {
    check_lambda(lambda)?;
    let r = integrate_phase_space(
        |zp| {
            lambda
                * (-lambda * zp.norm_sqr()).exp()
                * kernel(zstar, zp, lambda)
                * kernel(zp.conj(), zdoubleprime, lambda)
        },
        spec,
    )?;
    Ok(r.value)
}

/// N-th central difference Σₖ (−1)ᵏ C(N, k) f(x + (N/2 − k)h) / hᴺ.
pub fn central_difference<F>(f: F, x: f64, order: usize, step: f64) -> C64
where
    F: Fn(f64) -> C64,
{
    let mut binom = 1.0;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=order {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(x + (0.5 * order as f64 - k as f64) * step);
        binom = binom * (order - k) as f64 / (k + 1) as f64;
    }
    acc / step.powi(order as i32)
}

/// |Δᴺ_λ K − (z* z′)ᴺ K| with an N-th central difference of the given step.
pub fn kernel_lambda_derivative_check(
    zstar: C64,
    zprime: C64,
    lambda: f64,
    n: usize,
    step: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    if !(1..=3).contains(&n) {
        return Err(invalid("N", format!("derivative order must be 1, 2 or 3, got {n}")));
    }
    if !(step > 0.0 && step < lambda) {
        return Err(invalid("step", format!("must lie in (0, lambda), got {step}")));
    }
    let fd = central_difference(|l| kernel(zstar, zprime, l), lambda, n, step);
    let exact = (zstar * zprime).powu(n as u32) * kernel(zstar, zprime, lambda);
    Ok((fd - exact).norm())
}
