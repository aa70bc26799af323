use serde::Serialize;

use super::{AuctionError, BidProfile, Bidder, BidderId, Ranking, SlotCurve};

/// Outcome for one ranked bidder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    pub rank: usize,
    pub bidder: BidderId,
    /// 1-based slot, `None` when ranked below the last slot.
    pub slot: Option<usize>,
    pub score: f64,
    /// `e_i · p_i`, the score of the next ranked bidder (or the reserve).
    pub price_score: f64,
    pub price_per_click: f64,
    /// `γ_slot · e_i`
    pub ctr: f64,
    /// `γ_slot · e_i · p_i`
    pub payment_per_impression: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    placements: Vec<Placement>,
}

impl Allocation {
    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn placement(&self, id: BidderId) -> Option<&Placement> {
        self.placements.iter().find(|p| p.bidder == id)
    }

    pub fn slot_of(&self, id: BidderId) -> Option<usize> {
        self.placement(id).and_then(|p| p.slot)
    }

    /// Slot-to-bidder map for the slotted bidders, in slot order.
    pub fn assignment(&self) -> Vec<(usize, BidderId)> {
        self.placements
            .iter()
            .filter_map(|p| p.slot.map(|s| (s, p.bidder)))
            .collect()
    }

    /// Expected auctioneer revenue per impression.
    pub fn revenue(&self) -> f64 {
        self.placements.iter().map(|p| p.payment_per_impression).sum()
    }
}

/// Rank-by-revenue allocation with generalized second pricing.
pub fn allocate(
    curve: &SlotCurve,
    bidders: &[Bidder],
    profile: &BidProfile,
) -> Result<Allocation, AuctionError> {
    let ranking = Ranking::new(bidders, profile)?;
    Ok(allocate_ranked(curve, &ranking))
}

pub(crate) fn allocate_ranked(curve: &SlotCurve, ranking: &Ranking) -> Allocation {
    let slots = curve.slots();
    let placements = ranking
        .iter()
        .enumerate()
        .map(|(idx, rb)| {
            let rank = idx + 1;
            if rank <= slots {
                let gamma = curve.gamma(rank);
                let price_score = ranking.price_score(rank);
                Placement {
                    rank,
                    bidder: rb.id,
                    slot: Some(rank),
                    score: rb.score,
                    price_score,
                    price_per_click: price_score / rb.relevance,
                    ctr: gamma * rb.relevance,
                    payment_per_impression: gamma * price_score,
                }
            } else {
                Placement {
                    rank,
                    bidder: rb.id,
                    slot: None,
                    score: rb.score,
                    price_score: 0.0,
                    price_per_click: 0.0,
                    ctr: 0.0,
                    payment_per_impression: 0.0,
                }
            }
        })
        .collect();
    Allocation { placements }
}

/// Expected payoff per impression, `e_i · γ · (v_i − p)`.
pub fn payoff(bidder: &Bidder, slot_ctr: f64, price_per_click: f64) -> f64 {
    bidder.relevance() * slot_ctr * (bidder.value() - price_per_click)
}
