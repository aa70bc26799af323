use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AuctionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BidderId(pub u32);

impl fmt::Display for BidderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An advertiser with a private per-click value and a relevance (click
/// probability once noticed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bidder {
    pub id: BidderId,
    value: f64,
    relevance: f64,
}

impl Bidder {
    pub fn new(id: u32, value: f64, relevance: f64) -> Result<Self, AuctionError> {
        let id = BidderId(id);
        if !(value >= 0.0 && value.is_finite()) {
            return Err(AuctionError::InvalidValue { id, value });
        }
        if !(relevance > 0.0 && relevance <= 1.0) {
            return Err(AuctionError::InvalidRelevance { id, relevance });
        }
        Ok(Self {
            id,
            value,
            relevance,
        })
    }

    /// Bidder whose relevance is 1, so value and score coincide.
    pub fn with_score(id: u32, score: f64) -> Result<Self, AuctionError> {
        Self::new(id, score, 1.0)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn relevance(&self) -> f64 {
        self.relevance
    }

    /// `e_i · v_i`.
    pub fn score(&self) -> f64 {
        self.relevance * self.value
    }
}

/// One reported bid, held in ranking-score units (`r_i = e_i · b_i`).
///
/// `tie_rank` orders equal scores: lower wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BidEntry {
    pub id: BidderId,
    pub score: f64,
    pub tie_rank: u32,
}

/// A full bid profile plus the reserve score charged to the lowest ranked
/// bidder when nobody sits below it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BidProfile {
    entries: Vec<BidEntry>,
    reserve: f64,
}

impl BidProfile {
    /// Builds a profile from per-click bids; scores are `e_i · b_i` and ties
    /// are broken by insertion order.
    pub fn from_bids(bidders: &[Bidder], bids: &[(BidderId, f64)]) -> Result<Self, AuctionError> {
        let relevance: BTreeMap<BidderId, f64> =
            bidders.iter().map(|b| (b.id, b.relevance)).collect();
        let mut scored = Vec::with_capacity(bids.len());
        for &(id, bid) in bids {
            let e = *relevance.get(&id).ok_or(AuctionError::UnknownBidder(id))?;
            if !(bid >= 0.0 && bid.is_finite()) {
                return Err(AuctionError::NegativeBid { id, bid });
            }
            scored.push((id, e * bid));
        }
        Self::from_scores(scored)
    }

    /// Builds a profile directly in score units, ties broken by insertion
    /// order.
    pub fn from_scores(
        scores: impl IntoIterator<Item = (BidderId, f64)>,
    ) -> Result<Self, AuctionError> {
        let entries = scores
            .into_iter()
            .enumerate()
            .map(|(idx, (id, score))| BidEntry {
                id,
                score,
                tie_rank: idx as u32,
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<BidEntry>) -> Result<Self, AuctionError> {
        let mut ids = BTreeSet::new();
        let mut ranks = BTreeSet::new();
        for entry in &entries {
            if !(entry.score >= 0.0 && entry.score.is_finite()) {
                return Err(AuctionError::NegativeBid {
                    id: entry.id,
                    bid: entry.score,
                });
            }
            if !ids.insert(entry.id) {
                return Err(AuctionError::DuplicateBidder(entry.id));
            }
            if !ranks.insert(entry.tie_rank) {
                return Err(AuctionError::DuplicateTieRank(entry.tie_rank));
            }
        }
        Ok(Self {
            entries,
            reserve: 0.0,
        })
    }

    pub fn with_reserve(mut self, reserve: f64) -> Result<Self, AuctionError> {
        if !(reserve >= 0.0 && reserve.is_finite()) {
            return Err(AuctionError::InvalidReserve(reserve));
        }
        self.reserve = reserve;
        Ok(self)
    }

    pub fn entries(&self) -> &[BidEntry] {
        &self.entries
    }

    pub fn reserve(&self) -> f64 {
        self.reserve
    }

    pub fn entry(&self, id: BidderId) -> Option<&BidEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn score_of(&self, id: BidderId) -> Option<f64> {
        self.entry(id).map(|e| e.score)
    }

    /// Per-click bid `b_i = r_i / e_i`.
    pub fn bid_of(&self, bidder: &Bidder) -> Option<f64> {
        self.score_of(bidder.id).map(|r| r / bidder.relevance)
    }

    /// Same profile with one bidder's score replaced; its tie rank is kept.
    pub fn with_score(&self, id: BidderId, score: f64) -> Result<Self, AuctionError> {
        let mut entries = self.entries.clone();
        let entry = entries
            .iter_mut()
            .find(|e| e.id == id)
            .ok_or(AuctionError::UnknownBidder(id))?;
        entry.score = score;
        Self::from_entries(entries)?.with_reserve(self.reserve)
    }

    /// All scores multiplied by `factor`; the reserve is scaled too.
    pub fn scaled(&self, factor: f64) -> Result<Self, AuctionError> {
        let entries = self
            .entries
            .iter()
            .map(|e| BidEntry {
                score: e.score * factor,
                ..*e
            })
            .collect();
        Self::from_entries(entries)?.with_reserve(self.reserve * factor)
    }
}

/// Orders two entries by decreasing score, then ascending tie rank.
pub(crate) fn rank_order(a_score: f64, a_tie: u32, b_score: f64, b_tie: u32) -> Ordering {
    b_score.total_cmp(&a_score).then(a_tie.cmp(&b_tie))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedBidder {
    pub id: BidderId,
    /// `s_i = e_i · v_i`
    pub value_score: f64,
    /// `r_i = e_i · b_i`
    pub score: f64,
    pub relevance: f64,
    pub tie_rank: u32,
}

/// Bidders sorted by the rank-by-revenue rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    ranked: Vec<RankedBidder>,
    reserve: f64,
}

impl Ranking {
    pub fn new(bidders: &[Bidder], profile: &BidProfile) -> Result<Self, AuctionError> {
        let mut by_id = BTreeMap::new();
        for b in bidders {
            if by_id.insert(b.id, b).is_some() {
                return Err(AuctionError::DuplicateBidder(b.id));
            }
        }
        let mut ranked = Vec::with_capacity(profile.entries.len());
        for entry in &profile.entries {
            let bidder = by_id
                .get(&entry.id)
                .ok_or(AuctionError::UnknownBidder(entry.id))?;
            ranked.push(RankedBidder {
                id: entry.id,
                value_score: bidder.score(),
                score: entry.score,
                relevance: bidder.relevance,
                tie_rank: entry.tie_rank,
            });
        }
        if ranked.len() != by_id.len() {
            let missing = by_id
                .keys()
                .find(|id| profile.entry(**id).is_none())
                .copied()
                .expect("a bidder without a bid");
            return Err(AuctionError::MissingBid(missing));
        }
        ranked.sort_by(|a, b| rank_order(a.score, a.tie_rank, b.score, b.tie_rank));
        Ok(Self {
            ranked,
            reserve: profile.reserve,
        })
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn reserve(&self) -> f64 {
        self.reserve
    }

    /// Bidder at a 1-based rank.
    pub fn at(&self, rank: usize) -> &RankedBidder {
        &self.ranked[rank - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &RankedBidder> {
        self.ranked.iter()
    }

    /// `r_rank` for a ranked bidder, or the reserve past the last one.
    pub fn score_at(&self, rank: usize) -> f64 {
        if rank >= 1 && rank <= self.ranked.len() {
            self.ranked[rank - 1].score
        } else {
            self.reserve
        }
    }

    /// Score the occupant of `position` pays under GSP: `r_{position+1}`.
    pub fn price_score(&self, position: usize) -> f64 {
        self.score_at(position + 1)
    }

    pub fn rank_of(&self, id: BidderId) -> Option<usize> {
        self.ranked.iter().position(|r| r.id == id).map(|i| i + 1)
    }

    pub fn order(&self) -> Vec<BidderId> {
        self.ranked.iter().map(|r| r.id).collect()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.ranked.iter().map(|r| r.score).collect()
    }

    pub fn value_scores(&self) -> Vec<f64> {
        self.ranked.iter().map(|r| r.value_score).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bidders() -> Vec<Bidder> {
        vec![
            Bidder::new(1, 10.0, 0.5).unwrap(),
            Bidder::new(2, 8.0, 1.0).unwrap(),
            Bidder::new(3, 4.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn ranks_by_relevance_times_bid() {
        let bs = bidders();
        let profile = BidProfile::from_bids(
            &bs,
            &[(BidderId(1), 10.0), (BidderId(2), 6.0), (BidderId(3), 4.0)],
        )
        .unwrap();
        let ranking = Ranking::new(&bs, &profile).unwrap();
        assert_eq!(ranking.order(), vec![BidderId(2), BidderId(1), BidderId(3)]);
        assert_eq!(ranking.at(2).score, 5.0);
        assert_eq!(ranking.price_score(3), 0.0);
    }

    #[test]
    fn ties_follow_tie_rank() {
        let bs = bidders();
        let profile = BidProfile::from_entries(vec![
            BidEntry { id: BidderId(1), score: 5.0, tie_rank: 2 },
            BidEntry { id: BidderId(2), score: 5.0, tie_rank: 0 },
            BidEntry { id: BidderId(3), score: 5.0, tie_rank: 1 },
        ])
        .unwrap();
        let ranking = Ranking::new(&bs, &profile).unwrap();
        assert_eq!(ranking.order(), vec![BidderId(2), BidderId(3), BidderId(1)]);
    }

    #[test]
    fn profile_errors() {
        let bs = bidders();
        assert!(matches!(
            BidProfile::from_bids(&bs, &[(BidderId(9), 1.0)]),
            Err(AuctionError::UnknownBidder(BidderId(9)))
        ));
        assert!(matches!(
            BidProfile::from_bids(&bs, &[(BidderId(1), -1.0)]),
            Err(AuctionError::NegativeBid { .. })
        ));
        assert!(matches!(
            BidProfile::from_scores([(BidderId(1), 1.0), (BidderId(1), 2.0)]),
            Err(AuctionError::DuplicateBidder(_))
        ));
        let partial = BidProfile::from_scores([(BidderId(1), 1.0)]).unwrap();
        assert!(matches!(
            Ranking::new(&bs, &partial),
            Err(AuctionError::MissingBid(BidderId(2)))
        ));
    }

    #[test]
    fn bidder_validation() {
        assert!(Bidder::new(1, -1.0, 0.5).is_err());
        assert!(Bidder::new(1, 1.0, 0.0).is_err());
        assert!(Bidder::new(1, 1.0, 1.5).is_err());
        assert_eq!(Bidder::new(1, 4.0, 0.25).unwrap().score(), 1.0);
    }
}
