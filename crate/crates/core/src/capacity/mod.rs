//! Auctioneer-provided capacity: one original slot is replaced by a link to a
//! landing page carrying `L` more slots, and everything is sold in a single
//! combined auction.

mod conditions;
mod examples;
mod fork;
mod sweep;

use thiserror::Error;

use crate::auction::AuctionError;

pub use conditions::{
    beta, check_efficiency_condition, check_lemma_preconditions, check_revenue_condition,
    efficiency_after_fork, eta, revenue_after_fork, value_of_capacity, ConditionCheck, LemmaCheck,
};
pub use examples::{example2_threshold, make_example1, make_example2, ForkInstance};
pub use fork::{capacity, fork, fork_with, ForkSpec, MergedCurve, SlotOrigin, TiePolicy};
pub use sweep::{
    critical_fitness, fitness_grid, scan_sign_changes, sweep_fitness, Sweep, SweepRow, Target,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForkError {
    #[error("forked slot {slot} is outside 1..={slots}")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("extra slot count {extra} is outside 1..={slots}")]
    ExtraSlotsOutOfRange { extra: usize, slots: usize },
    #[error("fitness {0} must be positive and finite")]
    InvalidFitness(f64),
    #[error("fitness {fitness} times top CTR {top} must stay below 1")]
    FitnessTooHigh { fitness: f64, top: f64 },
    #[error("fitness {fitness} differs from landing relevance × page boost = {product}")]
    InconsistentFitness { fitness: f64, product: f64 },
    #[error("merged CTRs tie at {value} between {first:?} and {second:?}")]
    Tie {
        value: f64,
        first: SlotOrigin,
        second: SlotOrigin,
    },
    #[error("invalid scores at position {position}: {reason}")]
    InvalidScores { position: usize, reason: &'static str },
    #[error("baseline revenue {0} must be positive")]
    NonPositiveBaseline(f64),
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
    #[error("fitness range ({lo}, {hi}) must satisfy 0 < lo < hi and hi · γ_1 < 1")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("tolerance {0} must be positive")]
    InvalidTolerance(f64),
    #[error(
        "value of capacity is not known to be monotone here (gap failures {gap_failures:?}, \
         score failures {score_failures:?}); use a grid scan instead"
    )]
    NotMonotone {
        gap_failures: Vec<usize>,
        score_failures: Vec<usize>,
    },
    #[error("premise violated: {0}")]
    Premise(String),
    #[error(transparent)]
    Auction(#[from] AuctionError),
}
