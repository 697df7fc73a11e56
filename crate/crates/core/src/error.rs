use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("argument {re}{im:+}i is outside the half-plane Im <= 0 and the profile has no closed form")]
    OutOfDomain { re: f64, im: f64 },

    #[error("singular argument: {0}")]
    SingularArgument(String),

    #[error("quadrature did not converge (estimate {estimate:e} > tol {tol:e}, best value {best_re}{best_im:+}i)")]
    AccuracyFailure {
        estimate: f64,
        tol: f64,
        best_re: f64,
        best_im: f64,
    },

    #[error("singular point lies on the contour: {0}")]
    InvalidContour(String),

    #[error("ray truncation failed: integrand still above threshold at R = {0}")]
    TruncationFailure(f64),

    #[error("term {term}: {source}")]
    Term {
        term: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported derivative order: {0}")]
    UnsupportedOrder(String),

    #[error("recipe degenerate: boundary step datum vanishes at the corner (g0(0) = {0})")]
    RecipeDegenerate(f64),

    #[error("stencil leaves the open quarter-plane at ({x}, {t})")]
    StencilOutOfDomain { x: f64, t: f64 },

    #[error("energy tail beyond L = {0} exceeds threshold; enlarge L")]
    EnlargeDomain(f64),

    #[error("finite-difference run unstable: {0}")]
    Unstable(String),

    #[error("covered by the Dirichlet case (B = 0)")]
    CoveredByDirichlet,

    #[error("parameters outside the stated problem class: {0}")]
    OutsideProblemClass(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn in_term(self, term: &'static str) -> Self {
        Error::Term {
            term,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
