//! Brute-force unilateral deviation search.
//!
//! Independent of the closed-form equilibrium inequalities: for every bidder
//! and every bid on a grid it re-ranks the field with that single bid
//! replaced and reads off the deviator's slot and GSP price.

use serde::Serialize;

use super::profile::rank_order;
use super::{AuctionError, BidProfile, Bidder, BidderId, Ranking, SlotCurve};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BidderGain {
    pub bidder: BidderId,
    pub current_payoff: f64,
    pub best_payoff: f64,
    /// Per-click bid achieving `best_payoff`.
    pub best_bid: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub grid_step: f64,
    pub per_bidder: Vec<BidderGain>,
    pub max_gain: f64,
    /// Some pair of distinct scores is closer than one grid step, so a
    /// deviation between them may be missed.
    pub coarse_grid: bool,
}

impl OracleReport {
    pub fn is_nash_on_grid(&self, tol: f64) -> bool {
        self.max_gain <= tol
    }

    pub fn gain_of(&self, id: BidderId) -> Option<f64> {
        self.per_bidder.iter().find(|g| g.bidder == id).map(|g| g.gain)
    }
}

/// Payoff (score units) of a bidder placing score `score` with tie rank
/// `tie` against the others, who are already sorted.
fn payoff_against(
    curve: &SlotCurve,
    others: &[(f64, u32)],
    reserve: f64,
    value_score: f64,
    score: f64,
    tie: u32,
) -> f64 {
    let above = others
        .iter()
        .take_while(|&&(r, t)| rank_order(r, t, score, tie).is_lt())
        .count();
    let position = above + 1;
    let price = others.get(above).map(|&(r, _)| r).unwrap_or(reserve);
    curve.gamma(position) * (value_score - price)
}

pub fn best_response_oracle(
    curve: &SlotCurve,
    bidders: &[Bidder],
    profile: &BidProfile,
    grid_step: f64,
) -> Result<OracleReport, AuctionError> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(AuctionError::InvalidGridStep(grid_step));
    }
    let ranking = Ranking::new(bidders, profile)?;
    let reserve = ranking.reserve();

    let mut distinct: Vec<f64> = ranking.scores();
    distinct.push(reserve);
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let max_relevance = ranking.iter().map(|rb| rb.relevance).fold(0.0, f64::max);
    let coarse_grid = distinct
        .windows(2)
        .any(|w| w[0] - w[1] < grid_step * max_relevance);

    let mut per_bidder = Vec::with_capacity(ranking.len());
    for me in ranking.iter() {
        let others: Vec<(f64, u32)> = ranking
            .iter()
            .filter(|rb| rb.id != me.id)
            .map(|rb| (rb.score, rb.tie_rank))
            .collect();
        let eval = |score: f64| {
            payoff_against(curve, &others, reserve, me.value_score, score, me.tie_rank)
        };
        // Grid reaches one step past the bid that outranks everybody.
        let top = others.iter().map(|&(r, _)| r).fold(reserve, f64::max);
        let steps = ((top / me.relevance + grid_step) / grid_step).ceil() as u64;
        let current = eval(me.score);
        let mut best = current;
        let mut best_bid = me.score / me.relevance;
        for k in 0..=steps {
            let bid = k as f64 * grid_step;
            let p = eval(me.relevance * bid);
            if p > best {
                best = p;
                best_bid = bid;
            }
        }
        per_bidder.push(BidderGain {
            bidder: me.id,
            current_payoff: current,
            best_payoff: best,
            best_bid,
            gain: best - current,
        });
    }

    let max_gain = per_bidder.iter().map(|g| g.gain).fold(0.0, f64::max);
    Ok(OracleReport {
        grid_step,
        per_bidder,
        max_gain,
        coarse_grid,
    })
}
