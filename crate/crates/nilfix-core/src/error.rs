//! Error type shared by all modules.

use std::fmt;

use crate::group::BasisIndex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Matrix or coordinate shape does not match the declared dimensions.
    Dimension(String),
    /// A rational, integer or JSON field could not be parsed.
    Parse(String),
    /// JSON syntax error, with the position reported by the parser.
    Json(String),
    /// Builtin presentation name not recognized.
    UnknownBuiltin(String),
    /// Endomorphism input lacks the image of a basis element.
    MissingBasisImage(BasisIndex),
    /// Endomorphism input names the same basis element twice.
    DuplicateBasisImage(BasisIndex),
    /// Image of a basis element has nonzero coordinates below its own layer,
    /// so the layer matrices are not well defined.
    FiltrationViolation { basis: BasisIndex },
    /// An operation restricted to the lattice received rational coordinates.
    NotLatticeElement(String),
    /// A lattice element did not factor integrally over the basis; the
    /// presentation's integer points are not closed under its own law.
    NonIntegralFactorization(String),
    /// Layer datum invariant broken: B singular or M*B not integral.
    InvalidLayerDatum(String),
    /// Claimed subgroup index disagrees with the per-layer lattice data.
    IndexMismatch { expected: String, given: String },
    /// No lift matches a translated lift-factor: the tuple does not define
    /// an n-valued map on the nilmanifold.
    SigmaNoMatch { lift: usize, element: String },
    /// More than one lift matches, so the permutation data is ambiguous.
    SigmaAmbiguous { lift: usize, element: String, first: usize, second: usize },
    /// Two lifts map onto the same target, so sigma is not a bijection.
    SigmaCollision { target: usize, element: String },
    /// Fixed point enumeration hit a lift with det(I - M) = 0.
    SingularLift { lift: usize },
    /// Lifts in one sigma orbit carry different linear parts.
    InconsistentOrbit(String),
    /// Operation requires an abelian presentation.
    NotAbelian,
    /// A tractability guard of a brute-force oracle was violated.
    GuardViolation(String),
    /// A count that must be a non-negative integer came out fractional.
    NonIntegralCount(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that mean the input file itself is malformed,
    /// as opposed to describing a mathematically invalid object.
    pub fn is_malformed_input(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::Parse(_)
                | Error::Json(_)
                | Error::UnknownBuiltin(_)
                | Error::MissingBasisImage(_)
                | Error::DuplicateBasisImage(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Json(msg) => write!(f, "invalid JSON: {msg}"),
            Error::UnknownBuiltin(name) => write!(f, "unknown builtin presentation '{name}'"),
            Error::MissingBasisImage(idx) => {
                write!(f, "missing image for basis element a[{},{}]", idx.layer, idx.pos)
            }
            Error::DuplicateBasisImage(idx) => {
                write!(f, "duplicate image for basis element a[{},{}]", idx.layer, idx.pos)
            }
            Error::FiltrationViolation { basis } => write!(
                f,
                "image of a[{},{}] has nonzero coordinates below layer {}",
                basis.layer, basis.pos, basis.layer
            ),
            Error::NotLatticeElement(what) => {
                write!(f, "not a lattice element (integer coordinates required): {what}")
            }
            Error::NonIntegralFactorization(what) => {
                write!(f, "lattice element does not factor integrally over the basis: {what}")
            }
            Error::InvalidLayerDatum(msg) => write!(f, "invalid layer datum: {msg}"),
            Error::IndexMismatch { expected, given } => write!(
                f,
                "index [N:H] = {given} does not match the product of layer indices {expected}"
            ),
            Error::SigmaNoMatch { lift, element } => write!(
                f,
                "no match: translated lift-factor {lift} at {element} differs from every lift \
                 by a non-lattice element"
            ),
            Error::SigmaAmbiguous { lift, element, first, second } => write!(
                f,
                "ambiguous match: lift-factor {lift} at {element} matches lifts {first} and {second}"
            ),
            Error::SigmaCollision { target, element } => write!(
                f,
                "sigma is not a bijection at {element}: two lifts map onto lift {target}"
            ),
            Error::SingularLift { lift } => write!(
                f,
                "lift {lift} has det(I - M) = 0, so its fixed point set is infinite \
                 (pass the skip flag to ignore singular lifts)"
            ),
            Error::InconsistentOrbit(msg) => write!(f, "inconsistent sigma orbit: {msg}"),
            Error::NotAbelian => write!(f, "operation requires an abelian presentation"),
            Error::GuardViolation(msg) => write!(f, "oracle guard violated: {msg}"),
            Error::NonIntegralCount(msg) => write!(f, "non-integral count: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
