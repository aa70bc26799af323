//! Equilibrium checks and the advertiser-optimal symmetric equilibrium.
//!
//! All payoffs here are in score units: a bidder with value score `s` in a
//! position with CTR `γ` that pays price score `q` earns `γ · (s − q)` per
//! impression, which equals `e · γ · (v − p)`.

use serde::Serialize;

use super::curve::{gamma_at, score_at};
use super::{AuctionError, BidProfile, Bidder, BidderId, Ranking, SlotCurve};

/// Which equilibrium notion a report was produced for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Concept {
    /// Locally envy-free: any position may be taken at the price its current
    /// occupant pays, `r_{t+1}`.
    Symmetric,
    /// Plain Nash: moving up to position `t` means outbidding its occupant
    /// and paying `r_t`; moving down costs `r_{t+1}`.
    Nash,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub rank: usize,
    pub target: usize,
    pub bidder: BidderId,
    pub payoff: f64,
    pub deviation_payoff: f64,
    /// `payoff − deviation_payoff`; negative for a violation.
    pub gap: f64,
}

/// One row of the adjacent-only table: stay, move one up, move one down.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalCheck {
    pub position: usize,
    pub bidder: BidderId,
    pub payoff: f64,
    pub payoff_up: Option<f64>,
    pub payoff_down: Option<f64>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub concept: Concept,
    pub holds: bool,
    pub violations: Vec<Violation>,
    pub local: Vec<LocalCheck>,
}

impl EquilibriumReport {
    /// True when every adjacent (one up, one down) check passes.
    pub fn locally_envy_free(&self) -> bool {
        self.local.iter().all(|row| row.satisfied)
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    /// Violations committed by the given bidders only.
    pub fn violations_for<'a>(
        &'a self,
        ids: &'a std::collections::BTreeSet<BidderId>,
    ) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| ids.contains(&v.bidder))
    }

    pub fn holds_for(&self, ids: &std::collections::BTreeSet<BidderId>) -> bool {
        self.violations_for(ids).next().is_none()
    }
}

/// Checks the symmetric Nash (locally envy-free) conditions against every
/// target position, not only the adjacent ones.
pub fn verify_sne(
    curve: &SlotCurve,
    bidders: &[Bidder],
    profile: &BidProfile,
    tol: f64,
) -> Result<EquilibriumReport, AuctionError> {
    let ranking = Ranking::new(bidders, profile)?;
    Ok(check_ranked(curve, &ranking, Concept::Symmetric, tol))
}

/// Same as [`verify_sne`] under plain Nash prices for upward moves.
pub fn verify_nash(
    curve: &SlotCurve,
    bidders: &[Bidder],
    profile: &BidProfile,
    tol: f64,
) -> Result<EquilibriumReport, AuctionError> {
    let ranking = Ranking::new(bidders, profile)?;
    Ok(check_ranked(curve, &ranking, Concept::Nash, tol))
}

/// Price score a bidder at `rank` faces when moving to `target`.
fn deviation_price(ranking: &Ranking, concept: Concept, rank: usize, target: usize) -> f64 {
    match concept {
        Concept::Nash if target < rank => ranking.score_at(target),
        _ => ranking.price_score(target),
    }
}

pub(crate) fn check_ranked(
    curve: &SlotCurve,
    ranking: &Ranking,
    concept: Concept,
    tol: f64,
) -> EquilibriumReport {
    let n = ranking.len();
    let positions = n.max(curve.slots());
    let mut violations = Vec::new();
    let mut local = Vec::with_capacity(n);

    for rank in 1..=n {
        let rb = ranking.at(rank);
        let s = rb.value_score;
        let payoff = curve.gamma(rank) * (s - ranking.price_score(rank));
        let deviation = |target: usize| {
            curve.gamma(target) * (s - deviation_price(ranking, concept, rank, target))
        };

        for target in (1..=positions).filter(|&t| t != rank) {
            let dev = deviation(target);
            if payoff - dev < -tol {
                violations.push(Violation {
                    rank,
                    target,
                    bidder: rb.id,
                    payoff,
                    deviation_payoff: dev,
                    gap: payoff - dev,
                });
            }
        }

        let payoff_up = (rank > 1).then(|| deviation(rank - 1));
        let payoff_down = Some(deviation(rank + 1));
        let satisfied = [payoff_up, payoff_down]
            .iter()
            .flatten()
            .all(|&dev| payoff - dev >= -tol);
        local.push(LocalCheck {
            position: rank,
            bidder: rb.id,
            payoff,
            payoff_up,
            payoff_down,
            satisfied,
        });
    }

    EquilibriumReport {
        concept,
        holds: violations.is_empty(),
        violations,
        local,
    }
}

fn check_sorted(scores: &[f64]) -> Result<(), AuctionError> {
    for (idx, &s) in scores.iter().enumerate() {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(AuctionError::InvalidScore {
                position: idx + 1,
                value: s,
            });
        }
    }
    for (idx, pair) in scores.windows(2).enumerate() {
        if pair[0] < pair[1] {
            return Err(AuctionError::NotSortedByScore { position: idx + 2 });
        }
    }
    Ok(())
}

/// Value scores `s_i` of bidders, in the order given.
pub fn value_scores(bidders: &[Bidder]) -> Vec<f64> {
    bidders.iter().map(Bidder::score).collect()
}

/// Value scores sorted in decreasing order.
pub fn sorted_scores(bidders: &[Bidder]) -> Vec<f64> {
    let mut s = value_scores(bidders);
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Bidders sorted by decreasing value score, ties kept in input order.
pub fn sort_by_score(bidders: &[Bidder]) -> Vec<Bidder> {
    let mut sorted = bidders.to_vec();
    sorted.sort_by(|a, b| b.score().total_cmp(&a.score()));
    sorted
}

/// Minimum symmetric equilibrium: the lowest bid profile that satisfies the
/// equilibrium inequalities. Bidders are ranked by value score; equal scores
/// keep their input order.
///
/// For slots `i = 1..=K`, `γ_i · r_{i+1} = Σ_{j=i}^{K} (γ_j − γ_{j+1}) s_{j+1}`.
/// The top score is `r_2 + 1`; bidders below `K + 1` bid their value score.
pub fn min_sne_bids(curve: &SlotCurve, bidders: &[Bidder]) -> Result<BidProfile, AuctionError> {
    let bidders = sort_by_score(bidders);
    let scores = value_scores(&bidders);
    check_sorted(&scores)?;
    let k = curve.slots();
    let n = bidders.len();
    if k >= 1 && n < 2 {
        return Err(AuctionError::TooFewBidders { needed: 2, got: n });
    }

    let mut r = scores.clone();
    let mut tail = 0.0;
    for i in (1..=k).rev() {
        let g = curve.gamma(i);
        tail += (g - curve.gamma(i + 1)) * score_at(&scores, i + 1);
        if i < n {
            r[i] = tail / g;
        }
    }
    if k >= 1 {
        r[0] = r[1] + 1.0;
    }

    BidProfile::from_scores(bidders.iter().map(|b| b.id).zip(r))
}

/// `Σ_{j=1}^{K} (γ_j − γ_{j+1}) · j · s_{j+1}` for any CTR vector, scores
/// zero-padded.
pub fn min_sne_revenue(gammas: &[f64], scores: &[f64]) -> f64 {
    (1..=gammas.len())
        .map(|j| (gamma_at(gammas, j) - gamma_at(gammas, j + 1)) * j as f64 * score_at(scores, j + 1))
        .sum()
}

/// Auctioneer revenue per impression at the minimum symmetric equilibrium.
pub fn revenue_min_sne(curve: &SlotCurve, scores: &[f64]) -> Result<f64, AuctionError> {
    check_sorted(scores)?;
    if curve.slots() >= 1 && scores.len() < 2 {
        return Err(AuctionError::TooFewBidders {
            needed: 2,
            got: scores.len(),
        });
    }
    Ok(min_sne_revenue(curve.as_slice(), scores))
}

/// `Σ_j γ_j · s_j` over the slotted positions.
pub fn efficiency_of(gammas: &[f64], scores: &[f64]) -> f64 {
    (1..=gammas.len())
        .map(|j| gamma_at(gammas, j) * score_at(scores, j))
        .sum()
}

/// Social value per impression when bidders sit in the given order.
pub fn efficiency(curve: &SlotCurve, scores_in_order: &[f64]) -> f64 {
    efficiency_of(curve.as_slice(), scores_in_order)
}
