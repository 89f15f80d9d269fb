use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes of the library.
///
/// The "result class" variants (`NotInSpectrum`, `MmaxExhausted`,
/// `FullSpectrum`) report outcomes of a computation rather than bad input;
/// callers that surface exit codes treat them separately.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate basis")]
    DegenerateBasis,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("missing velocity for joint {0}")]
    MissingJoint(usize),
    #[error("window exceeded")]
    WindowExceeded,
    #[error("window too small")]
    WindowTooSmall,
    #[error("not in spectrum (sigma_min = {0:e})")]
    NotInSpectrum(f64),
    #[error("line not in spectrum")]
    LineNotInSpectrum,
    #[error("m_max exhausted (tried up to m = {0})")]
    MmaxExhausted(usize),
    #[error("spectrum is all of the torus")]
    FullSpectrum,
    #[error("spectrum is not all of the torus")]
    ProperSpectrum,
    #[error("not a first-order shear")]
    NotAShear,
    #[error("singular multigrid: {0}")]
    SingularMultigrid(String),
    #[error("parallel grid families {0} and {1}")]
    ParallelFamilies(usize, usize),
    #[error("limit spectrum only computed for multigrid frameworks")]
    NotMultigrid,
    #[error("field is not localised")]
    NotLocalised,
    #[error("empty figure")]
    EmptyFigure,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for outcomes that are reported results rather than input errors.
    pub fn is_result_class(&self) -> bool {
        matches!(
            self,
            Error::NotInSpectrum(_)
                | Error::LineNotInSpectrum
                | Error::MmaxExhausted(_)
                | Error::FullSpectrum
                | Error::ProperSpectrum
        )
    }
}
