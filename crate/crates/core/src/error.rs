use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite integrand sample at node {index} (z = {z})")]
    NonFiniteSample { index: usize, z: C64 },

    #[error("incomplete gamma continued fraction did not converge after {iterations} iterations")]
    GammaNonConvergence { iterations: usize },

    #[error("tolerance {tol:e} unreachable on the radius grid; best bound {best:e} at R = {radius}")]
    ToleranceUnreachable { tol: f64, best: f64, radius: f64 },

    #[error("trajectory escaped (non-finite state) at t = {time}")]
    TrajectoryEscape { time: f64 },

    #[error("boundary solve stagnated at lambda = {lambda} with residual {residual:e}")]
    NewtonStagnation { lambda: f64, residual: f64 },

    #[error("seed trajectory at caustic (|m_qp| = {m_qp:e})")]
    SeedCaustic { m_qp: f64 },

    #[error("caustic: |m_qp| = {m_qp:e} below tolerance at t = {time}, lambda = {lambda}")]
    Caustic { time: f64, lambda: f64, m_qp: f64 },

    #[error("Gaussian caustic: m_qq + i m_qp vanishes")]
    GaussianCaustic,

    #[error("degenerate stability matrix: m_qq = m_qp = 0")]
    DegenerateStability,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
