//! Deterministic phase-space and circle quadrature.
//!
//! Phase-space integrals are normalised with the coherent-state measure d²z/π. Samples may
//! be evaluated in parallel but are always reduced in a fixed pairwise tree over the node
//! order, so results are bit-identical regardless of the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::invalid;
use crate::special::regularized_gamma;
use crate::{Error, Result, C64};

/// Node layout on the disk (or square) of radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Trapezoid in φ, Gauss–Legendre in x = r² on [0, R²].
    PolarGauss,
    /// Trapezoid in φ, Gauss–Legendre in r on [0, R]; suited to integrands with a 1/|z|
    /// weight or e^{−c|z|} decay.
    PolarGaussLinear,
    /// Trapezoid on the square |Re z|, |Im z| ≤ R; `n_radial` points along Re z and
    /// `n_angular` along Im z.
    CartesianGrid,
}

/// Envelope assumed for the integrand beyond the truncation radius, used for the attached
/// truncation estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailModel {
    /// |f| ≲ |z|^{2·degree} e^{−rate |z|²}: bound Q(degree + 1, rate R²).
    Gaussian { rate: f64, degree: usize },
    /// |f| ≲ |z|^{degree} e^{−rate |z|} in the radial measure dr: bound Q(degree + 1, rate R).
    Exponential { rate: f64, degree: usize },
}

impl TailModel {
    pub fn bound(&self, radius: f64) -> f64 {
        let (order, x) = match *self {
            TailModel::Gaussian { rate, degree } => (degree + 1, rate * radius * radius),
            TailModel::Exponential { rate, degree } => (degree + 1, rate * radius),
        };
        regularized_gamma(order, C64::new(x, 0.0))
            .map(|g| g.upper.re.clamp(0.0, 1.0))
            .unwrap_or(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radius: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub scheme: Scheme,
    pub center: C64,
    pub tail: TailModel,
}

impl QuadratureSpec {
    pub fn new(radius: f64, n_radial: usize, n_angular: usize, scheme: Scheme) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("must be > 0, got {radius}")));
        }
        if n_radial < 2 {
            return Err(invalid("n_radial", format!("must be >= 2, got {n_radial}")));
        }
        if n_angular < 4 {
            return Err(invalid("n_angular", format!("must be >= 4, got {n_angular}")));
        }
        Ok(Self {
            radius,
            n_radial,
            n_angular,
            scheme,
            center: C64::new(0.0, 0.0),
            tail: TailModel::Gaussian {
                rate: 1.0,
                degree: 0,
            },
        })
    }

    pub fn polar(radius: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        Self::new(radius, n_radial, n_angular, Scheme::PolarGauss)
    }

    pub fn with_center(mut self, center: C64) -> Self {
        self.center = center;
        self
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("must be > 0, got {radius}")));
        }
        self.radius = radius;
        Ok(self)
    }

    /// Same layout with both node counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            n_radial: 2 * self.n_radial,
            n_angular: 2 * self.n_angular,
            ..*self
        }
    }

    pub fn node_count(&self) -> usize {
        self.n_radial * self.n_angular
    }

    /// Nodes and weights such that ∫ (d²z/π) f ≈ Σ wᵢ f(zᵢ).
    pub fn nodes(&self) -> Vec<(C64, f64)> {
        let na = self.n_angular;
        let angles: Vec<C64> = (0..na)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / na as f64))
            .collect();
        let mut out = Vec::with_capacity(self.node_count());
        match self.scheme {
            Scheme::PolarGauss => {
                let r2 = self.radius * self.radius;
                for (x, w) in gauss_legendre(self.n_radial, 0.0, r2) {
                    let r = x.sqrt();
                    for e in &angles {
                        out.push((self.center + e * r, w / na as f64));
                    }
                }
            }
            Scheme::PolarGaussLinear => {
                for (r, w) in gauss_legendre(self.n_radial, 0.0, self.radius) {
                    for e in &angles {
                        out.push((self.center + e * r, 2.0 * w * r / na as f64));
                    }
                }
            }
            Scheme::CartesianGrid => {
                let trapezoid = |n: usize| -> Vec<(f64, f64)> {
                    let h = 2.0 * self.radius / (n - 1) as f64;
                    (0..n)
                        .map(|k| {
                            let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
                            (-self.radius + k as f64 * h, w)
                        })
                        .collect()
                };
                let xs = trapezoid(self.n_radial);
                let ys = trapezoid(self.n_angular);
                for &(x, wx) in &xs {
                    for &(y, wy) in &ys {
                        out.push((self.center + C64::new(x, y), wx * wy / PI));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: C64,
    pub truncation_bound: f64,
    pub nodes_used: usize,
}

/// Gauss–Legendre nodes and weights on [a, b] (Newton iteration on Pₙ).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut nodes = vec![(0.0, 0.0); n];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = (mid - half * x, half * w);
        nodes[n - 1 - i] = (mid + half * x, half * w);
    }
    nodes
}

/// Sum in a fixed binary tree over the slice order.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().fold(C64::new(0.0, 0.0), |acc, v| acc + v);
    }
    let (l, r) = values.split_at(values.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// ∫_{|z|≤R} (d²z/π) f(z).
pub fn integrate_phase_space<F>(f: F, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(C64) -> C64 + Sync,
{
    try_integrate_phase_space(|z| Ok(f(z)), spec)
}

/// As [`integrate_phase_space`] for a fallible integrand; the first failing node in node
/// order is reported.
pub fn try_integrate_phase_space<F>(f: F, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    let nodes = spec.nodes();
    let samples: Vec<Result<C64>> = nodes.par_iter().map(|&(z, w)| f(z).map(|v| v * w)).collect();
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
    Ok(IntegralResult {
        value: pairwise_sum(&weighted),
        truncation_bound: spec.tail.bound(spec.radius),
        nodes_used: nodes.len(),
    })
}

/// (1/2π) ∫₀^{2π} g(φ) dφ by the n-point trapezoid rule.
pub fn integrate_circle<G>(g: G, n_angular: usize) -> Result<C64>
where
    G: Fn(f64) -> C64,
{
    if n_angular == 0 {
        return Err(invalid("n_angular", "must be >= 1"));
    }
    let mut samples = Vec::with_capacity(n_angular);
    for k in 0..n_angular {
        let phi = 2.0 * PI * k as f64 / n_angular as f64;
        let v = g(phi);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteSample {
                index: k,
                z: C64::from_polar(1.0, phi),
            });
        }
        samples.push(v);
    }
    Ok(pairwise_sum(&samples) / n_angular as f64)
}

/// Radius grid spacing used by [`truncation_radius`].
pub const RADIUS_GRID_STEP: f64 = 0.05;
const RADIUS_GRID_MAX: usize = 2000;

/// Smallest R on the grid k·0.05 (k ≤ 2000) with 1 − γ_n(λ, R) ≤ tol for every n ≤ n_max,
/// where γ_n = P(n + 1, λR²).
pub fn truncation_radius(lambda: f64, n_max: usize, tol: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", format!("must lie in (0, 1), got {tol}")));
    }
    let radius = |k: usize| k as f64 / (1.0 / RADIUS_GRID_STEP);
    let bound = |k: usize| -> Result<f64> {
        let r = radius(k);
        let mut worst = 0.0f64;
        for n in 0..=n_max {
            let g = regularized_gamma(n + 1, C64::new(lambda * r * r, 0.0))?;
            worst = worst.max(g.upper.re);
        }
        Ok(worst)
    };
    // float slack on the comparison only
    let accept = |b: f64| b <= tol * (1.0 + 1e-10);
    let best = bound(RADIUS_GRID_MAX)?;
    if !accept(best) {
        return Err(Error::ToleranceUnreachable {
            tol,
            best,
            radius: radius(RADIUS_GRID_MAX),
        });
    }
    // the bound is monotone non-increasing in R
    let (mut lo, mut hi) = (0usize, RADIUS_GRID_MAX);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if accept(bound(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(radius(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::polar(0.0, 10, 10).is_err());
        assert!(QuadratureSpec::polar(1.0, 1, 10).is_err());
        assert!(QuadratureSpec::polar(1.0, 10, 3).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let nodes = gauss_legendre(7, -1.0, 2.0);
        let total: f64 = nodes.iter().map(|(x, w)| w * x.powi(13)).sum();
        let exact = (2f64.powi(14) - 1.0) / 14.0;
        assert!((total - exact).abs() < 1e-11 * exact);
        let ws: f64 = gauss_legendre(64, 0.0, 5.0).iter().map(|n| n.1).sum();
        assert!((ws - 5.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_disk_integral() {
        let spec = QuadratureSpec::polar(6.0, 64, 16).unwrap();
        let r = integrate_phase_space(|z| (-z.norm_sqr()).exp().into(), &spec).unwrap();
        assert!((r.value.re - (1.0 - (-36.0f64).exp())).abs() < 1e-14);
        assert!((r.value.re - 1.0).abs() < 1e-14);
        assert_eq!(r.nodes_used, 64 * 16);
        assert!(r.truncation_bound <= (-36.0f64).exp() * 1.0001);

        let odd = integrate_phase_space(|z| z * (-z.norm_sqr()).exp(), &spec).unwrap();
        assert!(odd.value.norm() < 1e-15);

        let spec = QuadratureSpec::polar(9.0, 96, 16).unwrap();
        let second = integrate_phase_space(|z| (z.norm_sqr() * (-z.norm_sqr()).exp()).into(), &spec).unwrap();
        assert!((second.value.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn all_schemes_agree_on_shifted_gaussian() {
        let f = |z: C64| (-(z - c(0.5, -0.3)).norm_sqr()).exp().into();
        let exact = 1.0;
        for scheme in [Scheme::PolarGauss, Scheme::PolarGaussLinear, Scheme::CartesianGrid] {
            let spec = QuadratureSpec::new(8.0, 120, 120, scheme).unwrap();
            let r = integrate_phase_space(f, &spec).unwrap();
            assert!((r.value.re - exact).abs() < 1e-12, "{scheme:?}: {}", r.value);
        }
    }

    #[test]
    fn monomial_moments_factorise() {
        // ∫ e^{−|z|²} zⁿ z*ᵐ d²z/π over the disk = δ_nm n! P(n+1, R²)
        let spec = QuadratureSpec::polar(3.0, 48, 32).unwrap();
        for n in 0..6usize {
            for m in 0..6usize {
                let r = integrate_phase_space(
                    |z| (-z.norm_sqr()).exp() * z.powu(n as u32) * z.conj().powu(m as u32),
                    &spec,
                )
                .unwrap();
                let expected = if n == m {
                    let fact: f64 = (1..=n).map(|k| k as f64).product();
                    fact * regularized_gamma(n + 1, c(9.0, 0.0)).unwrap().lower.re
                } else {
                    0.0
                };
                assert!((r.value - expected).norm() < 1e-12, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn refinement_is_converged_for_gaussian_integrands() {
        let spec = QuadratureSpec::polar(7.0, 48, 48).unwrap();
        let f = |z: C64| (-(z - c(1.0, 0.5)).norm_sqr()).exp() * z.conj() * z.conj();
        let a = integrate_phase_space(f, &spec).unwrap().value;
        let b = integrate_phase_space(f, &spec.refined()).unwrap().value;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = QuadratureSpec::polar(5.0, 40, 40).unwrap();
        let f = |z: C64| (z * 0.3).sin() * (-z.norm_sqr()).exp();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| integrate_phase_space(f, &spec).unwrap().value)
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn non_finite_sample_names_the_node() {
        let spec = QuadratureSpec::new(1.0, 3, 5, Scheme::CartesianGrid).unwrap();
        let err = integrate_phase_space(|z| (1.0 / z.norm()).into(), &spec).unwrap_err();
        match err {
            Error::NonFiniteSample { index, z } => {
                assert_eq!(index, 5 + 2);
                assert!(z.re == 0.0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn circle_examples() {
        assert!((integrate_circle(|_| c(1.0, 0.0), 8).unwrap() - 1.0).norm() < 1e-15);
        let v = integrate_circle(|p| C64::from_polar(1.0, 3.0 * p), 8).unwrap();
        assert!(v.norm() < 1e-15);
        let v = integrate_circle(|p| C64::from_polar(1.0, p) * C64::from_polar(1.0, -p), 8).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        assert!(integrate_circle(|_| c(f64::NAN, 0.0), 4).is_err());
    }

    #[test]
    fn truncation_radius_examples() {
        let r = truncation_radius(1.0, 0, (-4.0f64).exp()).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let loose = truncation_radius(1.0, 5, 1e-4).unwrap();
        let tight = truncation_radius(1.0, 5, 1e-10).unwrap();
        assert!(tight > loose);
        assert!(truncation_radius(4.0, 5, 1e-8).unwrap() < truncation_radius(1.0, 5, 1e-8).unwrap());
        assert!(truncation_radius(0.0, 5, 1e-8).is_err());
        assert!(truncation_radius(1.0, 5, 1.5).is_err());
        match truncation_radius(1e-6, 0, 1e-10) {
            Err(Error::ToleranceUnreachable { best, .. }) => assert!(best > 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tail_bound_is_monotone() {
        let t = TailModel::Gaussian { rate: 0.5, degree: 4 };
        let mut prev = 1.0;
        for k in 1..60 {
            let b = t.bound(k as f64 * 0.25);
            assert!(b <= prev);
            prev = b;
        }
    }
}
