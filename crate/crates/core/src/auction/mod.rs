//! Rank-by-revenue position auction with generalized second pricing.

mod allocation;
mod curve;
mod equilibrium;
mod oracle;
mod profile;

use thiserror::Error;

pub use allocation::{allocate, payoff, Allocation, Placement};
pub use curve::SlotCurve;
pub use equilibrium::{
    efficiency, efficiency_of, min_sne_bids, min_sne_revenue, revenue_min_sne, sort_by_score,
    sorted_scores, value_scores, verify_nash, verify_sne, Concept, EquilibriumReport,
    LocalCheck, Violation,
};
pub use oracle::{best_response_oracle, BidderGain, OracleReport};
pub use profile::{BidEntry, BidProfile, Bidder, BidderId, RankedBidder, Ranking};

pub(crate) use allocation::allocate_ranked;
pub(crate) use curve::{gamma_at, score_at};
pub(crate) use equilibrium::check_ranked;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuctionError {
    #[error("CTR at position {position} is {value}, expected a value in (0, 1]")]
    InvalidCtr { position: usize, value: f64 },
    #[error("CTRs must strictly decrease, but position {position} is not above position {}", position + 1)]
    CurveNotDecreasing { position: usize },
    #[error("bidder {id} has invalid value {value}")]
    InvalidValue { id: BidderId, value: f64 },
    #[error("bidder {id} has relevance {relevance}, expected a value in (0, 1]")]
    InvalidRelevance { id: BidderId, relevance: f64 },
    #[error("bid profile names unknown bidder {0}")]
    UnknownBidder(BidderId),
    #[error("bidder {0} has no bid")]
    MissingBid(BidderId),
    #[error("bidder {0} appears more than once")]
    DuplicateBidder(BidderId),
    #[error("tie rank {0} is used more than once")]
    DuplicateTieRank(u32),
    #[error("bidder {id} has invalid bid {bid}")]
    NegativeBid { id: BidderId, bid: f64 },
    #[error("reserve score {0} must be finite and non-negative")]
    InvalidReserve(f64),
    #[error("score at position {position} is {value}, expected finite and non-negative")]
    InvalidScore { position: usize, value: f64 },
    #[error("bidders are not sorted by decreasing score at position {position}")]
    NotSortedByScore { position: usize },
    #[error("need at least {needed} bidders, got {got}")]
    TooFewBidders { needed: usize, got: usize },
    #[error("grid step {0} must be positive")]
    InvalidGridStep(f64),
}
