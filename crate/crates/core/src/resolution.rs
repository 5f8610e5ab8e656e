//! Off-center resolutions of unity ∫ (d²z/π) μ(z) |f(z)⟩⟨z| and their numerical verification.
//!
//! Two maps ship verified: the scaling map f = λz (real λ > 0 is unconditionally convergent,
//! complex λ with Re λ > 0 only conditionally) and the circle map f = z/|z|. Further maps can
//! be checked through [`ClosureMap`] and [`identity_matrix_with`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cs::{ln_squeezed_overlap, scaled_monomials, squeezed_fock_coefficients};
use crate::error::invalid;
use crate::quadrature::{
    integrate_circle, pairwise_sum, try_integrate_phase_space, QuadratureSpec, Scheme, TailModel,
};
use crate::special::regularized_gamma;
use crate::{Error, FockVector, OscillatorFrame, PhaseLabel, Result, SqueezedLabel, C64};

/// A pair (f, μ) defining ∫ (d²z/π) μ(z) |f(z)⟩⟨z|.
pub trait ClosureMap: Sync {
    /// The ket label f(z).
    fn image(&self, z: C64) -> C64;
    /// ln μ(z).
    fn ln_measure(&self, z: C64) -> C64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OffCenterMap {
    Scaling { lambda: C64 },
    Circle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Unconditional,
    Conditional,
}

/// Which side of the projector carries the mapped label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    /// μ |f(z)⟩⟨z|
    #[default]
    KetMapped,
    /// μ* |z⟩⟨f(z)|, the adjoint form.
    BraMapped,
}

impl OffCenterMap {
    pub fn scaling(lambda: f64) -> Result<Self> {
        Self::complex_scaling(C64::new(lambda, 0.0))
    }

    pub fn complex_scaling(lambda: C64) -> Result<Self> {
        check_complex_lambda(lambda)?;
        Ok(OffCenterMap::Scaling { lambda })
    }

    pub fn circle() -> Self {
        OffCenterMap::Circle
    }

    pub fn convergence(&self) -> Convergence {
        match self {
            OffCenterMap::Scaling { lambda } if lambda.im == 0.0 => Convergence::Unconditional,
            _ => Convergence::Conditional,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            OffCenterMap::Scaling { lambda } => check_complex_lambda(lambda),
            OffCenterMap::Circle => Ok(()),
        }
    }

    /// Exact diagonal of the operator truncated to the disk |z| ≤ R (the off-diagonal
    /// elements vanish by angular symmetry).
    pub fn truncated_diagonal(&self, n_max: usize, radius: f64) -> Result<Vec<C64>> {
        (0..=n_max)
            .map(|n| match *self {
                OffCenterMap::Scaling { lambda } => gamma_n(n, lambda, radius),
                OffCenterMap::Circle => {
                    Ok(regularized_gamma(n + 1, C64::new(radius, 0.0))?.lower)
                }
            })
            .collect()
    }
}

impl ClosureMap for OffCenterMap {
    fn image(&self, z: C64) -> C64 {
        match *self {
            OffCenterMap::Scaling { lambda } => lambda * z,
            OffCenterMap::Circle => z / z.norm(),
        }
    }

    fn ln_measure(&self, z: C64) -> C64 {
        match *self {
            OffCenterMap::Scaling { lambda } => {
                lambda.ln() + 0.5 * (lambda.norm_sqr() + 1.0 - 2.0 * lambda) * z.norm_sqr()
            }
            OffCenterMap::Circle => {
                let r = z.norm();
                C64::new(0.5 * (r - 1.0) * (r - 1.0) - (2.0 * r).ln(), 0.0)
            }
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    Ok(())
}

fn check_complex_lambda(lambda: C64) -> Result<()> {
    if !(lambda.re.is_finite() && lambda.im.is_finite() && lambda.re > 0.0) {
        return Err(invalid("lambda", format!("Re(lambda) must be > 0, got {lambda}")));
    }
    Ok(())
}

/// μ(z) = λ e^{(λ−1)²|z|²/2}.
pub fn measure(z: PhaseLabel, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(lambda * (0.5 * (lambda - 1.0).powi(2) * z.z.norm_sqr()).exp())
}

/// μ(z) = λ e^{(|λ|² + 1 − 2λ)|z|²/2}.
pub fn complex_lambda_measure(z: PhaseLabel, lambda: C64) -> Result<C64> {
    check_complex_lambda(lambda)?;
    Ok(OffCenterMap::Scaling { lambda }.ln_measure(z.z).exp())
}

/// γ_n = P(n + 1, λR²).
pub fn gamma_n(n: usize, lambda: C64, radius: f64) -> Result<C64> {
    check_complex_lambda(lambda)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("radius", format!("must be > 0, got {radius}")));
    }
    Ok(regularized_gamma(n + 1, lambda * radius * radius)?.lower)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheckReport {
    pub map: OffCenterMap,
    pub ordering: Ordering,
    pub convergence: Convergence,
    pub n_max: usize,
    pub spec: QuadratureSpec,
    /// A[n][m] = ⟨n| (truncated operator) |m⟩.
    pub matrix: Vec<Vec<C64>>,
    /// max |A_nm − δ_nm|.
    pub max_deviation: f64,
    /// Exact truncated diagonal (γ_n for the scaling map).
    pub truncated_diagonal: Vec<C64>,
    /// max_n |1 − truncated diagonal|, the disk-truncation part of the deviation.
    pub truncation_bound: f64,
    /// max |A_nm − δ_nm · truncated diagonal|, the quadrature part of the deviation.
    pub quadrature_deviation: f64,
}

/// Quadrature of A_nm = ⟨n| ∫ (d²z/π) μ |f(z)⟩⟨z| |m⟩ for an arbitrary map.
pub fn identity_matrix_with<M: ClosureMap>(
    map: &M,
    n_max: usize,
    spec: &QuadratureSpec,
    ordering: Ordering,
) -> Result<Vec<Vec<C64>>> {
    let nodes = spec.nodes();
    let dim = n_max + 1;
    // per node: the (n_max+1)² weighted products, with μ and both Gaussian prefactors
    // combined in log space and shared evenly between the two monomial vectors
    let samples: Vec<Vec<C64>> = nodes
        .par_iter()
        .map(|&(z, w)| {
            let fz = map.image(z);
            let ln_total = map.ln_measure(z) - 0.5 * z.norm_sqr() - 0.5 * fz.norm_sqr();
            let half = 0.5 * ln_total + 0.5 * w.ln();
            let ket = scaled_monomials(half, fz, n_max);
            let bra = scaled_monomials(half, z.conj(), n_max);
            let mut out = Vec::with_capacity(dim * dim);
            for n in 0..dim {
                for m in 0..dim {
                    out.push(match ordering {
                        Ordering::KetMapped => ket[n] * bra[m],
                        Ordering::BraMapped => (ket[m] * bra[n]).conj(),
                    });
                }
            }
            out
        })
        .collect();
    for (index, s) in samples.iter().enumerate() {
        if s.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteSample {
                index,
                z: nodes[index].0,
            });
        }
    }
    let entries: Vec<C64> = (0..dim * dim)
        .into_par_iter()
        .map(|k| {
            let column: Vec<C64> = samples.iter().map(|s| s[k]).collect();
            pairwise_sum(&column)
        })
        .collect();
    Ok(entries.chunks(dim).map(|row| row.to_vec()).collect())
}

pub fn identity_matrix_elements(
    map: &OffCenterMap,
    n_max: usize,
    spec: &QuadratureSpec,
) -> Result<IdentityCheckReport> {
    identity_matrix_elements_ordered(map, n_max, spec, Ordering::KetMapped)
}

pub fn identity_matrix_elements_ordered(
    map: &OffCenterMap,
    n_max: usize,
    spec: &QuadratureSpec,
    ordering: Ordering,
) -> Result<IdentityCheckReport> {
    map.validate()?;
    let matrix = identity_matrix_with(map, n_max, spec, ordering)?;
    let mut diagonal = map.truncated_diagonal(n_max, spec.radius)?;
    if ordering == Ordering::BraMapped {
        diagonal.iter_mut().for_each(|d| *d = d.conj());
    }
    let one = C64::new(1.0, 0.0);
    let mut max_deviation = 0.0f64;
    let mut quadrature_deviation = 0.0f64;
    for (n, row) in matrix.iter().enumerate() {
        for (m, a) in row.iter().enumerate() {
            let (ideal, exact) = if n == m {
                (one, diagonal[n])
            } else {
                (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            };
            max_deviation = max_deviation.max((a - ideal).norm());
            quadrature_deviation = quadrature_deviation.max((a - exact).norm());
        }
    }
    let truncation_bound = diagonal.iter().map(|d| (one - d).norm()).fold(0.0, f64::max);
    Ok(IdentityCheckReport {
        map: *map,
        ordering,
        convergence: map.convergence(),
        n_max,
        spec: *spec,
        matrix,
        max_deviation,
        truncated_diagonal: diagonal,
        truncation_bound,
        quadrature_deviation,
    })
}

/// A γ_n-controlled polar spec for the real scaling map: R from
/// [`truncation_radius`](crate::quadrature::truncation_radius), Gauss–Legendre in r² sized to
/// the radial degree and a trapezoid resolving every angular harmonic up to n_max.
pub fn scaling_spec(lambda: f64, n_max: usize, tol: f64) -> Result<QuadratureSpec> {
    check_lambda(lambda)?;
    let radius = crate::quadrature::truncation_radius(lambda, n_max, tol)?;
    let n_radial = 96 + 4 * n_max;
    let n_angular = (2 * n_max + 4).max(16);
    Ok(QuadratureSpec::polar(radius, n_radial, n_angular)?.with_tail(TailModel::Gaussian {
        rate: lambda,
        degree: n_max,
    }))
}

/// A spec for the circle map on |z| ≤ R, linear in r; the caller chooses R.
pub fn circle_spec(radius: f64, n_max: usize) -> Result<QuadratureSpec> {
    let n_radial = (4.0 * radius).ceil() as usize + 64 + 4 * n_max;
    let n_angular = (2 * n_max + 4).max(16);
    Ok(
        QuadratureSpec::new(radius, n_radial, n_angular, Scheme::PolarGaussLinear)?.with_tail(
            TailModel::Exponential {
                rate: 1.0,
                degree: n_max,
            },
        ),
    )
}

/// ⟨φ|ψ⟩ = ∫ (d²z/π) λ e^{(λ−1)²|z|²/2} ⟨φ|λz⟩⟨z|ψ⟩ by quadrature.
pub fn inner_product_via_identity(
    phi: &FockVector,
    psi: &FockVector,
    lambda: f64,
    spec: &QuadratureSpec,
) -> Result<C64> {
    check_lambda(lambda)?;
    let map = OffCenterMap::Scaling {
        lambda: C64::new(lambda, 0.0),
    };
    let (np, ns) = (phi.n_max(), psi.n_max());
    let r = try_integrate_phase_space(
        |z| {
            let fz = lambda * z;
            let ln_total = map.ln_measure(z) - 0.5 * z.norm_sqr() - 0.5 * fz.norm_sqr();
            let ket = scaled_monomials(0.5 * ln_total, fz, np);
            let bra = scaled_monomials(0.5 * ln_total, z.conj(), ns);
            let left: C64 = phi.coefficients().iter().zip(&ket).map(|(c, k)| c.conj() * k).sum();
            let right: C64 = psi.coefficients().iter().zip(&bra).map(|(c, b)| c * b).sum();
            Ok(left * right)
        },
        spec,
    )?;
    Ok(r.value)
}

/// ⟨w|w⟩ = ∫ (d²z/π) μ(z; λ) ⟨w|λz⟩⟨z|w⟩ for a squeezed state, complex λ allowed.
pub fn squeezed_norm_via_identity(
    w: &SqueezedLabel,
    lambda: C64,
    spec: &QuadratureSpec,
    frame: &OscillatorFrame,
) -> Result<C64> {
    check_complex_lambda(lambda)?;
    let map = OffCenterMap::Scaling { lambda };
    let r = try_integrate_phase_space(
        |z| {
            let ln = map.ln_measure(z)
                + ln_squeezed_overlap(w, lambda * z, frame)
                + ln_squeezed_overlap(w, z, frame).conj();
            Ok(ln.exp())
        },
        spec,
    )?;
    Ok(r.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleNormStatus {
    Converging,
    Divergent,
    /// B = b; excluded from the convergence classification.
    BoundaryCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleNormSequence {
    pub radii: Vec<f64>,
    /// Phase-space quadrature of ⟨w| A_R |w⟩ on |z| ≤ R.
    pub values: Vec<C64>,
    /// Σ_n |⟨n|w⟩|² P(n + 1, R), the same truncated quantity summed in the number basis.
    pub fock_series: Vec<f64>,
    pub status: CircleNormStatus,
}

/// ⟨w| ∫_{|z|≤R} (d²z/π) e^{(|z|−1)²/2}/(2|z|) |z/|z|⟩⟨z| |w⟩ for each R in `radii`.
///
/// The sequence is flagged divergent when it increases monotonically over its last half
/// and its last value exceeds ten times its first.
pub fn circle_norm_convergence(
    w: &SqueezedLabel,
    radii: &[f64],
    spec: &QuadratureSpec,
    frame: &OscillatorFrame,
) -> Result<CircleNormSequence> {
    if radii.is_empty() {
        return Err(invalid("radii", "at least one radius is required"));
    }
    let map = OffCenterMap::Circle;
    let mut values = Vec::with_capacity(radii.len());
    for &radius in radii {
        let spec = spec.with_radius(radius)?;
        let r = try_integrate_phase_space(
            |z| {
                let ln = map.ln_measure(z)
                    + ln_squeezed_overlap(w, map.image(z), frame)
                    + ln_squeezed_overlap(w, z, frame).conj();
                Ok(ln.exp())
            },
            &spec,
        )?;
        values.push(r.value);
    }
    let weights = squeezed_populations(w, frame);
    let fock_series = radii
        .iter()
        .map(|&radius| {
            let mut acc = 0.0;
            for (n, p) in weights.iter().enumerate() {
                acc += p * regularized_gamma(n + 1, C64::new(radius, 0.0))?.lower.re;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let status = if w.width() == frame.b() {
        CircleNormStatus::BoundaryCase
    } else if is_divergent(&values) {
        CircleNormStatus::Divergent
    } else {
        CircleNormStatus::Converging
    };
    Ok(CircleNormSequence {
        radii: radii.to_vec(),
        values,
        fock_series,
        status,
    })
}

/// |⟨n|w⟩|² until the populations account for all but 1e−15 of the norm.
fn squeezed_populations(w: &SqueezedLabel, frame: &OscillatorFrame) -> Vec<f64> {
    let mut n_max = 64;
    loop {
        let p: Vec<f64> = squeezed_fock_coefficients(w, n_max, frame)
            .iter()
            .map(|c| c.norm_sqr())
            .collect();
        if 1.0 - p.iter().sum::<f64>() < 1e-15 || n_max >= 4096 {
            return p;
        }
        n_max *= 2;
    }
}

fn is_divergent(values: &[C64]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let tail = &re[re.len() / 2..];
    let monotone = tail.windows(2).all(|p| p[1] > p[0]);
    monotone && re[re.len() - 1].abs() > 10.0 * re[0].abs()
}

/// |n⟩ = (√(n! e)/2π) ∫ dφ e^{−inφ} |e^{iφ}⟩, projected on m = 0..n_angular−1 by the
/// n_angular-point trapezoid rule.
pub fn fock_from_circle(n: usize, n_angular: usize) -> Result<FockVector> {
    if n_angular <= 2 * n + 2 {
        return Err(invalid(
            "n_angular",
            format!("must exceed 2n + 2 = {}, got {n_angular}", 2 * n + 2),
        ));
    }
    let ln_pref = 0.5 * (crate::special::ln_factorial(n) + 1.0);
    let coefficients = (0..n_angular)
        .map(|m| {
            let ln_m = -0.5 - 0.5 * crate::special::ln_factorial(m);
            let avg = integrate_circle(
                |phi| C64::from_polar((ln_pref + ln_m).exp(), (m as f64 - n as f64) * phi),
                n_angular,
            )?;
            Ok(avg)
        })
        .collect::<Result<Vec<C64>>>()?;
    FockVector::new(coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const F: OscillatorFrame = OscillatorFrame::DIMENSIONLESS;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn measure_examples() {
        assert_eq!(measure(PhaseLabel::new(c(0.3, 0.7)), 1.0).unwrap(), 1.0);
        let m = measure(PhaseLabel::new(c(0.6, 0.8)), 2.0).unwrap();
        assert!((m - 3.297442541400256).abs() < 1e-14);
        assert_eq!(measure(PhaseLabel::new(c(0.0, 0.0)), 0.5).unwrap(), 0.5);
        assert!(measure(PhaseLabel::new(c(0.0, 0.0)), 0.0).is_err());
        assert!(measure(PhaseLabel::new(c(0.0, 0.0)), -1.0).is_err());
    }

    #[test]
    fn complex_measure_examples() {
        let z = PhaseLabel::new(c(0.4, -1.1));
        for l in [0.5, 1.0, 2.5] {
            let a = complex_lambda_measure(z, c(l, 0.0)).unwrap();
            let b = measure(z, l).unwrap();
            assert!((a - b).norm() < 1e-14 * b);
        }
        let v = complex_lambda_measure(PhaseLabel::new(c(0.0, 0.0)), c(1.0, 1.0)).unwrap();
        assert!((v - c(1.0, 1.0)).norm() < 1e-15);
        let l = C64::from_polar(1.0, PI / 4.0);
        let z = PhaseLabel::new(c(1.0, 0.0));
        let expected = l * (0.5 * (2.0 - 2.0 * l)).exp();
        assert!((complex_lambda_measure(z, l).unwrap() - expected).norm() < 1e-15);
        assert!(complex_lambda_measure(z, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn gamma_n_examples() {
        let g = gamma_n(0, c(1.0, 0.0), 2.0).unwrap();
        assert!((g.re - (1.0 - (-4.0f64).exp())).abs() < 1e-15);
        let l = C64::from_polar(1.0, PI / 4.0);
        let g = gamma_n(0, l, (2f64.sqrt() * PI).sqrt()).unwrap();
        assert!((g.re - (1.0 + (-PI).exp())).abs() < 1e-12);
        assert!(gamma_n(0, c(-1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn gamma_n_monotone_in_radius() {
        for n in [0, 3, 10] {
            let mut prev = 0.0;
            for k in 1..80 {
                let g = gamma_n(n, c(0.7, 0.0), k as f64 * 0.1).unwrap().re;
                assert!(g >= prev);
                prev = g;
            }
        }
    }

    #[test]
    fn standard_closure() {
        let spec = QuadratureSpec::polar(8.0, 96, 16).unwrap();
        let r = identity_matrix_elements(&OffCenterMap::scaling(1.0).unwrap(), 6, &spec).unwrap();
        assert!(r.max_deviation < 1e-10, "{}", r.max_deviation);
        assert_eq!(r.convergence, Convergence::Unconditional);
    }

    #[test]
    fn scaling_identity_half() {
        let spec = scaling_spec(0.5, 10, 1e-10).unwrap();
        assert!(0.5 * spec.radius * spec.radius >= 40.0);
        let r = identity_matrix_elements(&OffCenterMap::scaling(0.5).unwrap(), 10, &spec).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
        assert!(r.max_deviation <= r.truncation_bound + 1e-10);
    }

    #[test]
    fn deviation_split_matches_truncated_diagonal() {
        // deliberately short radius: the deviation is then the γ_n deficit
        let spec = QuadratureSpec::polar(2.5, 96, 24).unwrap();
        let r = identity_matrix_elements(&OffCenterMap::scaling(2.0).unwrap(), 8, &spec).unwrap();
        assert!(r.quadrature_deviation < 1e-12);
        assert!((r.max_deviation - r.truncation_bound).abs() < 1e-12);
    }

    #[test]
    fn circle_identity() {
        let spec = circle_spec(45.0, 8).unwrap();
        let r = identity_matrix_elements(&OffCenterMap::circle(), 8, &spec).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
        assert_eq!(r.convergence, Convergence::Conditional);
        // A_00(R) = 1 − e^{−R}
        let short = identity_matrix_elements(&OffCenterMap::circle(), 0, &spec.with_radius(3.0).unwrap())
            .unwrap();
        assert!((short.matrix[0][0].re - (1.0 - (-3.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn hermiticity_of_the_two_orderings() {
        for lambda in [0.5, 2.0] {
            let map = OffCenterMap::scaling(lambda).unwrap();
            let spec = QuadratureSpec::polar(3.0, 96, 24).unwrap();
            let ket = identity_matrix_elements_ordered(&map, 6, &spec, Ordering::KetMapped).unwrap();
            let bra = identity_matrix_elements_ordered(&map, 6, &spec, Ordering::BraMapped).unwrap();
            for n in 0..=6 {
                for m in 0..=6 {
                    let d = ket.matrix[n][m] - bra.matrix[m][n].conj();
                    assert!(d.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lambda_inverse_duality() {
        // the disk of radius R for λ maps onto radius λR for 1/λ with the orderings swapped
        let (lambda, radius) = (2.0, 2.2);
        let direct = identity_matrix_elements_ordered(
            &OffCenterMap::scaling(lambda).unwrap(),
            6,
            &QuadratureSpec::polar(radius, 96, 24).unwrap(),
            Ordering::KetMapped,
        )
        .unwrap();
        let dual = identity_matrix_elements_ordered(
            &OffCenterMap::scaling(1.0 / lambda).unwrap(),
            6,
            &QuadratureSpec::polar(lambda * radius, 96, 24).unwrap(),
            Ordering::BraMapped,
        )
        .unwrap();
        for n in 0..=6 {
            for m in 0..=6 {
                assert!((direct.matrix[n][m] - dual.matrix[n][m]).norm() < 1e-12);
            }
        }
        assert!(direct.max_deviation > 1e-3);
    }

    #[test]
    fn custom_map_matches_builtin() {
        struct Doubling;
        impl ClosureMap for Doubling {
            fn image(&self, z: C64) -> C64 {
                2.0 * z
            }
            fn ln_measure(&self, z: C64) -> C64 {
                c(2f64.ln() + 0.5 * z.norm_sqr(), 0.0)
            }
        }
        let spec = QuadratureSpec::polar(5.0, 64, 16).unwrap();
        let a = identity_matrix_with(&Doubling, 4, &spec, Ordering::KetMapped).unwrap();
        let b = identity_matrix_with(&OffCenterMap::scaling(2.0).unwrap(), 4, &spec, Ordering::KetMapped)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inner_products() {
        let spec = scaling_spec(2.0, 3, 1e-12).unwrap();
        let e0 = FockVector::basis(0);
        let e3 = FockVector::basis(3);
        let v = inner_product_via_identity(&e0, &e0, 2.0, &spec).unwrap();
        assert!((v - 1.0).norm() < 1e-8);
        for lambda in [0.5, 1.0, 2.0] {
            let spec = scaling_spec(lambda, 3, 1e-12).unwrap();
            let v = inner_product_via_identity(&e0, &e3, lambda, &spec).unwrap();
            assert!(v.norm() < 1e-8);
        }
        let psi = e0.add(&e3).scale(c(0.5f64.sqrt(), 0.0));
        let spec = scaling_spec(0.7, 3, 1e-12).unwrap();
        let v = inner_product_via_identity(&psi, &psi, 0.7, &spec).unwrap();
        assert!((v - 1.0).norm() < 1e-8);
    }

    #[test]
    fn squeezed_norms() {
        let spec = QuadratureSpec::polar(10.0, 160, 96).unwrap();
        let vac = SqueezedLabel::new(c(0.0, 0.0), 1.0).unwrap();
        let v = squeezed_norm_via_identity(&vac, c(1.0, 0.0), &spec, &F).unwrap();
        assert!((v - 1.0).norm() < 1e-8);
        let w = SqueezedLabel::new(c(1.0, 1.0), 2.0).unwrap();
        let v = squeezed_norm_via_identity(&w, c(1.0, 0.5), &spec, &F).unwrap();
        assert!((v - 1.0).norm() < 1e-6, "{v}");
        let w = SqueezedLabel::new(c(0.0, 0.0), 0.5).unwrap();
        let v = squeezed_norm_via_identity(&w, c(0.8, 0.0), &spec, &F).unwrap();
        assert!((v - 1.0).norm() < 1e-6, "{v}");
        assert!(squeezed_norm_via_identity(&w, c(-0.1, 1.0), &spec, &F).is_err());
    }

    #[test]
    fn circle_norm_sequence_structure() {
        let spec = circle_spec(1.0, 0).unwrap().refined();
        let radii = [2.0, 4.0, 6.0, 8.0];
        let w = SqueezedLabel::new(c(0.0, 0.0), 1.0).unwrap();
        let seq = circle_norm_convergence(&w, &radii, &spec, &F).unwrap();
        assert_eq!(seq.status, CircleNormStatus::BoundaryCase);
        // coherent vacuum: only n = 0 is populated
        for (k, r) in radii.iter().enumerate() {
            let exact = 1.0 - (-r).exp();
            assert!((seq.fock_series[k] - exact).abs() < 1e-14);
            assert!((seq.values[k] - exact).norm() < 1e-10, "{}", seq.values[k]);
        }
        assert!(circle_norm_convergence(&w, &[], &spec, &F).is_err());
    }

    #[test]
    fn divergence_flag() {
        let grow: Vec<C64> = [1.0, 2.0, 5.0, 20.0].iter().map(|&x| c(x, 0.0)).collect();
        assert!(is_divergent(&grow));
        let settle: Vec<C64> = [0.5, 0.9, 0.99, 0.999].iter().map(|&x| c(x, 0.0)).collect();
        assert!(!is_divergent(&settle));
    }

    #[test]
    fn fock_from_circle_examples() {
        let v = fock_from_circle(0, 8).unwrap();
        let e0 = FockVector::basis(0);
        assert!((fock_inner_distance(&v, &e0)) < 1e-10);
        let v = fock_from_circle(3, 32).unwrap();
        assert!((fock_inner_distance(&v, &FockVector::basis(3))) < 1e-10);
        assert!(fock_from_circle(3, 8).is_err());
    }

    fn fock_inner_distance(a: &FockVector, b: &FockVector) -> f64 {
        let n = a.n_max().max(b.n_max());
        (0..=n)
            .map(|k| (a.coefficient(k) - b.coefficient(k)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn real_scaling_deviation_bounded_by_gamma(lambda in prop::sample::select(vec![0.5, 1.0, 2.0, 5.0]),
                                                   n_max in 0usize..=10) {
            let spec = scaling_spec(lambda, n_max, 1e-10).unwrap();
            let r = identity_matrix_elements(&OffCenterMap::scaling(lambda).unwrap(), n_max, &spec).unwrap();
            prop_assert!(r.max_deviation <= r.truncation_bound + 1e-10);
        }

        #[test]
        fn gamma_n_in_unit_interval(n in 0usize..=20, lambda in 0.1f64..10.0, radius in 0.5f64..10.0) {
            let g = regularized_gamma(n + 1, c(lambda * radius * radius, 0.0)).unwrap();
            prop_assert!(g.lower.re > 0.0);
            prop_assert!(g.ln_upper.re.is_finite());
        }
    }
}
