use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid rational {0:?}: expected \"num/den\" with non-zero den")]
    ParseRational(String),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),

    #[error("infeasible count spec: {0}")]
    InfeasibleCounts(String),

    #[error("distribution violates the CH inequality (CH = {0})")]
    ViolatesCh(String),

    #[error(
        "probability with denominator {den} cannot be realized in a block of {block_length} trials"
    )]
    Denominator { den: String, block_length: u64 },

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("no complete cycles")]
    NoCycles,
}
