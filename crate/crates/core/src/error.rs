use thiserror::Error;

/// Errors produced by the simulation and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("mode `{0}` is already registered")]
    DuplicateMode(String),

    #[error("beam splitter must act on two distinct modes")]
    DegenerateBeamSplitter,

    #[error("transmissivity {0} is outside [0, 1]")]
    InvalidTransmissivity(f64),

    #[error("state would hold {photons} photons, cap is {cap}")]
    PhotonCapExceeded { photons: u32, cap: u32 },

    #[error("occupation vector has {got} modes, expected {expected}")]
    ModeCountMismatch { got: usize, expected: usize },

    #[error("invalid Fock state: {0}")]
    InvalidState(String),

    #[error("coincidence projection requires exactly two photons on every term")]
    NotTwoPhoton,

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("parameter `{name}` = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("measurement strength is zero: {0} is indeterminate")]
    IndeterminateStrength(&'static str),

    #[error("weak value unbounded: measurement strength K = 0")]
    WeakValueUnbounded,

    #[error("weak value diverges: postselection is orthogonal in this limit")]
    WeakValueDiverges,

    #[error("postselection probability is zero")]
    PostselectionImpossible,

    #[error("malformed probability distribution: {0}")]
    MalformedDistribution(String),

    #[error("target postselection probability {target} is outside the model range [{min}, {max}]")]
    InfeasibleTarget { target: f64, min: f64, max: f64 },

    #[error("value {value} is outside the invertible model range [{min}, {max}]")]
    InversionOutOfRange { value: f64, min: f64, max: f64 },

    #[error("channel is not trace non-increasing (largest effect eigenvalue {0})")]
    TraceIncreasing(f64),

    #[error("tomography basis is singular")]
    SingularBasis,

    #[error("no counts recorded")]
    NoCounts,

    #[error("empty measurement-strength grid")]
    EmptyGrid,

    #[error("sample has {got} outcome classes, expected {expected}")]
    WrongOutcomeCount { got: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
