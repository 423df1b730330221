use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NonHermitian { defect: f64 },
    #[error("effect {index} has negative eigenvalue {worst:.3e}")]
    NegativeEffect { index: usize, worst: f64 },
    #[error("effects do not sum to identity (max deviation {deviation:.3e})")]
    NotNormalized { deviation: f64 },
    #[error("empty effect list")]
    Empty,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("noise parameter t = {0} outside [0, 1]")]
    TOutOfRange(f64),
    #[error("expected two outcomes, found {0}")]
    NotDichotomic(usize),
    #[error("spectrum of observable leaves [-1, 1] (worst {0:.3e})")]
    SpectrumOutOfRange(f64),
    #[error("rank {rank} outside [0, {dim}]")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("ancilla too small: k*n = {kn} < d = {d}")]
    AncillaTooSmall { kn: usize, d: usize },
    #[error("too many observables for sign enumeration: g = {g} > {max}")]
    GTooLarge { g: usize, max: usize },
    #[error("problem too large: {0}")]
    ProblemTooLarge(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("no non-trivial principal angle available")]
    NoNontrivialAngle,
    #[error("selected principal angle is zero (sin = {0:.3e})")]
    SinZero(f64),
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
