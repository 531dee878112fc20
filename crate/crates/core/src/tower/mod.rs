//! Towers of function fields of quadrics over ℚ or over an abstract base.
//!
//! A tower is a base field followed by a list of adjoined forms; level `ℓ`
//! is the field after the first `ℓ` adjunctions. Isotropy facts are derived
//! only by the rules in [`cert::Rule`] and every derived fact carries a
//! replayable [`Certificate`]. Anything the rules cannot settle is reported
//! as `UNKNOWN`.

mod cert;
mod formal;
mod state;
mod steps;

use thiserror::Error;

pub use cert::{replay, tamper, Certificate, CertificateSource, Rule, RuleParams, Status};
pub use formal::{formal_pfister, recognize_pfister, Algebra, FormalClass, TowerForm};
pub use state::{
    Adjunction, Assumption, Base, Derivation, LabelledStatement, LogEntry, TowerState,
    TrackedStatement, UnknownReason,
};
pub use steps::{
    compute_s, iterate_theorem1, run_theorem_c_truncation, step_linking_extension,
    step_pushing_extension, AdjoinedAlbert, ClassExclusion, ContainmentEntry, EmbeddingClaim,
    Family, IterationReport, IterationRound, LinkingReport, PairLinkage, PairState, PushedPair,
    PushingReport, TheoremCReport, TheoremCRound, Unresolved, Verdict, WindowRow, WindowScan,
};

use crate::quaternion::QuatError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("empty form")]
    EmptyForm,
    #[error("cannot parse coefficient {0:?}")]
    Coefficient(String),
    #[error("cannot adjoin {form}: the function field needs a form of dimension at least 2")]
    AdjoinTooSmall { form: String },
    #[error(
        "cannot adjoin {form}: status over the top level is {status}, not ANISOTROPIC ({reason})"
    )]
    AdjoinRefused {
        form: String,
        status: Status,
        reason: String,
    },
    #[error("{0} requires the rational base")]
    AbstractBase(&'static str),
    #[error("algebra {0} has formal entries; the rational base needs rational entries")]
    FormalAlgebra(String),
    #[error("{0} is not a division algebra")]
    NotDivision(String),
    #[error("{0} and {1} are isomorphic; the family must list distinct classes")]
    Isomorphic(String, String),
    #[error("{0} and {1} are not linked")]
    Unlinked(String, String),
    #[error("the class 1 does not define a quadratic extension")]
    TrivialClass,
    #[error(
        "linkage of {first} and {second} is undetermined; declare the pair linked or add an \
         assumption id for the anisotropy of {albert}"
    )]
    MissingAssumption {
        first: String,
        second: String,
        albert: String,
    },
    #[error("declared pair ({0}, {1}) refers to a missing algebra")]
    BadPair(usize, usize),
    #[error("duplicate assumption id {0:?}")]
    DuplicateAssumption(String),
    #[error("internal bookkeeping check failed: {0}")]
    Bookkeeping(String),
    #[error(transparent)]
    Quat(#[from] QuatError),
}
