//! Pareto sets for multicriteria choice under complete and incomplete
//! information, and an interactive refinement dialogue over them.
//!
//! Three information structures are supported: point criterion values,
//! one preference relation per criterion, and interval estimates. Relation
//! problems with incomparable pairs are turned into interval problems via
//! lower/upper utility bounds. A [`session::Session`] then accepts additional
//! true information, contracting intervals and shrinking the Pareto set along
//! a verified nested chain.

pub mod error;
pub mod generate;
pub mod interval;
pub mod pareto;
pub mod problem;
pub mod relation;
pub mod session;
pub mod utility;
pub mod verify;

pub use error::{Error, Result};
pub use interval::{interval_dominates, DominanceMode, Interval};
pub use pareto::{
    check_nesting, dominance_explanations, interval_pareto, pareto, point_pareto, vpr_pareto,
    DominationRelation, ParetoReport, ParetoResult, Witness, WitnessReport,
};
pub use problem::{
    criterion_to_relation, parse_problem, AlternativeId, CriterionId, Matrix, Problem, ProblemFile,
    Structure,
};
pub use relation::PreferenceRelation;
pub use session::{
    EventPayload, HistoryReport, RefinementEvent, Session, SessionDelta, SessionFile, SessionSnapshot, Suggestion,
    SuggestionKind,
};
