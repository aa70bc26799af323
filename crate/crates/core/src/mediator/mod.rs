//! A mediator that bids on behalf of a coalition of advertisers, lowers their
//! payments by flattening their bids, and keeps a share of the savings.

mod incentives;
mod plan;
mod scenario;
mod settle;

use thiserror::Error;

use crate::auction::{AuctionError, BidderId, Concept, Violation};

pub use incentives::{verify_i_incentives, IncentiveReport, TargetedCheck};
pub use plan::{
    plan, plan_interior, plan_interior_at, plan_nonsym, plan_slide, plan_top, plan_top_at,
    r_star_interior, r_star_nonsym, r_star_top, Candidate, MediatorPlan, MemberTerms, PlanOutcome,
    RStar, Strategy,
};
pub use scenario::MediatorScenario;
pub use settle::{settle, Ledger, SettlementEvent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediatorError {
    #[error("mediator share {0} must lie in (0, 1)")]
    InvalidShare(f64),
    #[error("coalition is empty")]
    EmptyCoalition,
    #[error("coalition member {0} has no bid")]
    UnknownMember(BidderId),
    #[error("base profile is not a {concept:?} equilibrium: {violation:?}")]
    NotEquilibrium {
        concept: Concept,
        violation: Box<Violation>,
    },
    #[error("coalition ranks {0:?} are not consecutive")]
    NotConsecutive(Vec<usize>),
    #[error("strategy needs the coalition at ranks {expected}, found {found}")]
    WrongBlock { expected: String, found: String },
    #[error("position {0} below the coalition has no click-through rate")]
    AnchorOutOfRange(usize),
    #[error("flattened score {0} must be finite and non-negative")]
    InvalidScore(f64),
    #[error("sliding needs an outside bidder directly below the coalition")]
    SlideUnavailable,
    #[error("slide score {score} is outside [{lo}, {hi})")]
    SlideOutOfRange { score: f64, lo: f64, hi: f64 },
    #[error("no admissible slide score: {0}")]
    NoAdmissibleSlide(String),
    #[error(transparent)]
    Auction(#[from] AuctionError),
}
