use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("ill-conditioned problem (condition ~1e{log10_cond:.1}): {advice}")]
    IllConditioned { log10_cond: f64, advice: String },
    #[error("eigensolver did not converge after {iterations} iterations (last subdiagonal {last_subdiag:e})")]
    EigenNonConvergence { iterations: usize, last_subdiag: f64, trace: Vec<f64> },
    #[error("series truncation failed: {0}")]
    Truncation(String),
    #[error("integration failure at |z|={abs_z:e}, arg z={arg_z}: {reason}")]
    Integration {
        reason: String,
        abs_z: f64,
        arg_z: f64,
        /// Last trusted solution vector, as decimal strings at working precision.
        last_value: Vec<(String, String)>,
    },
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid data: {0}")]
    Data(String),
}
