use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("degenerate 2-jet at ({u}, {v}): EG - F^2 = {det:e}")]
    DegenerateJet { u: f64, v: f64, det: f64 },
    #[error("minimal point: H = {h:e}, K = {k:e}, harmonic mean undefined")]
    MinimalPoint { h: f64, k: f64 },
    #[error("harmonic mean undefined: |H| = {0:e} below tolerance")]
    HarmonicUndefined(f64),
    #[error("mean curvature function undefined: {0}")]
    MuUndefined(String),
    #[error("point is umbilic (H^2 - K = {0:e})")]
    UmbilicPoint(f64),
    #[error("ambiguous foliation branch: |tau_g| = {0:e}")]
    AmbiguousBranch(f64),
    #[error("bad seed: {0}")]
    BadSeed(String),
    #[error("tangential contact with the parabolic set at ({u}, {v})")]
    TangentialContact { u: f64, v: f64 },
    #[error("point is not umbilic (H^2 - K = {0:e})")]
    NotUmbilic(f64),
    #[error("cubic jet vanishes at the umbilic; classification not attempted")]
    DegenerateCubic,
    #[error("singular parabolic point: |grad K| = {0:e}")]
    SingularParabolicPoint(f64),
    #[error("both principal curvatures vanish (umbilic parabolic point)")]
    UmbilicParabolic,
    #[error("geodesic torsion vanishes along the arc (|tau_g| = {0:e})")]
    TorsionVanishes(f64),
    #[error("no return to the section within the length budget")]
    NoReturn,
    #[error("integral curve left the chart domain")]
    LeftDomain,
    #[error("too few transits: {0} (need at least 2)")]
    TooFewTransits(usize),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Errors caused by the request rather than by the numerics.
    pub fn is_input(&self) -> bool {
        matches!(self, Self::InvalidParameters(_) | Self::BadSeed(_) | Self::Config(_))
    }
}
