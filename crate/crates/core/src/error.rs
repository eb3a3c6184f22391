use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge after {levels} refinements (last two values {previous} and {last})")]
    QuadratureNotConverged { levels: usize, previous: f64, last: f64 },

    #[error("height profile is not periodic: psi(0) = {start}, psi(eps) = {end}")]
    NonPeriodicProfile { start: f64, end: f64 },

    /// The line average of cos(theta_s - theta_g) * weight left [-1, 1].
    #[error("total wetting/dewetting: no apparent angle (line average = {average})")]
    NoApparentAngle { average: f64 },

    #[error("surface is not geometrically flat along the contact line; use apparent_angle")]
    NotFlat,

    #[error("surface chemistry is not homogeneous; use apparent_angle")]
    NotHomogeneous,

    #[error("outside partial wetting regime: nu = {nu} >= 1")]
    OutsidePartialWetting { nu: f64 },

    #[error("strip exhausted: contact line reached |z| = {height} >= M = {limit}")]
    StripExhausted { height: f64, limit: f64 },

    #[error("no partial-wetting contact line found")]
    NoValidLine,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
