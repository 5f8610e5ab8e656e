use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// Flags shared by every subcommand; never read from the config file.
#[derive(Args, Debug, Clone, Default)]
pub struct Io {
    /// JSON file with default parameters; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report destination. `.csv` selects CSV where the command has a table, anything else JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub trait Merge: Sized {
    fn merge(self, file: Self) -> Self;
}

macro_rules! merge_options {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl Merge for $ty {
            fn merge(self, file: Self) -> Self {
                Self {
                    $($field: self.$field.or(file.$field),)*
                    ..self
                }
            }
        }
    };
}

/// Applies the `--config` file underneath the command-line flags.
pub fn resolve<T>(args: T, io: &Io) -> Result<T>
where
    T: Merge + DeserializeOwned,
{
    match &io.config {
        None => Ok(args),
        Some(path) => Ok(args.merge(load(path)?)),
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Scaling,
    Circle,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingKind {
    Ket,
    Bra,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Free,
    Harmonic,
    Quartic,
}

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct IdentityArgs {
    /// Scaling parameters λ (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Option<Vec<f64>>,
    /// Highest number state of the matrix check.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Pass threshold on max |A − I|.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub map: Option<MapKind>,
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingKind>,
    /// Truncation tolerance used to pick the integration radius.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_tol: Option<f64>,
    /// Explicit integration radius, overriding the γ_n choice.
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}
merge_options!(IdentityArgs { lambda, nmax, tol, map, ordering, gamma_tol, radius });

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct KernelArgs {
    /// Kernel ladder orders N (comma separated).
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N")]
    pub ladder: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Option<Vec<f64>>,
    /// Highest monomial degree reproduced.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Pass threshold on the relative reproduction error.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Evaluation point z*, e.g. `0.6-0.4i`.
    #[arg(long, allow_hyphen_values = true)]
    pub zstar: Option<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}
merge_options!(KernelArgs { ladder, lambda, kmax, tol, zstar });

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PropagateArgs {
    #[arg(long, value_enum)]
    pub system: Option<SystemKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Quartic coupling in V = mω²q²/2 + a4 q⁴.
    #[arg(long, allow_negative_numbers = true)]
    pub a4: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub hbar: Option<f64>,
    /// Coherent-state width b.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Initial position x′.
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Final positions x″ (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub xf: Option<Vec<f64>>,
    /// Propagation times (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Option<Vec<f64>>,
    /// Largest RK4 step; each time uses the largest step dividing it.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Pass threshold on |K_sc − K_exact| where an exact kernel exists.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Scan |m_qp(t)| for each λ instead of evaluating the propagator.
    #[arg(long)]
    #[serde(skip)]
    pub scan_caustics: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_step: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}
merge_options!(PropagateArgs {
    system, mass, omega, a4, hbar, b, xi, xf, t, lambda, dt, tol, t_min, t_max, t_step
});

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CircleArgs {
    /// Highest number state reconstructed from the unit circle.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Trapezoid points on the circle; defaults to 4n + 8 per state.
    #[arg(long)]
    pub n_angular: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Squeezed widths B whose circle-operator norm sequence is reported.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub width: Option<Vec<f64>>,
    /// Squeezed-state centre w, e.g. `1+1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub grid_radial: Option<usize>,
    #[arg(long)]
    pub grid_angular: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}
merge_options!(CircleArgs { nmax, n_angular, tol, width, w, radii, grid_radial, grid_angular });

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SqueezedArgs {
    /// Squeezed widths B (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub width: Option<Vec<f64>>,
    /// Squeezed-state centre w, e.g. `1+1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    /// Complex λ values, e.g. `1,1+0.5i`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<String>>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub n_radial: Option<usize>,
    #[arg(long)]
    pub n_angular: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}
merge_options!(SqueezedArgs { width, w, lambda, b, radius, n_radial, n_angular, tol });

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    match cleaned.parse::<Complex64>() {
        Ok(z) if z.re.is_finite() && z.im.is_finite() => Ok(z),
        _ => bail!("cannot parse complex number {s:?} (expected e.g. 1+0.5i)"),
    }
}

pub fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        bail!("--{name} must be finite and > 0, got {v}");
    }
    Ok(v)
}

pub fn non_empty<T>(name: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        bail!("--{name} needs at least one value");
    }
    Ok(v)
}
