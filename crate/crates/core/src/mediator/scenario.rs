use std::collections::BTreeSet;

use serde::Serialize;

use super::MediatorError;
use crate::auction::{
    check_ranked, BidProfile, Bidder, BidderId, Concept, Ranking, SlotCurve,
};
use crate::DEFAULT_TOL;

/// A base equilibrium plus the coalition bidding through the mediator.
#[derive(Debug, Clone, Serialize)]
pub struct MediatorScenario {
    curve: SlotCurve,
    bidders: Vec<Bidder>,
    profile: BidProfile,
    #[serde(skip)]
    ranking: Ranking,
    members: BTreeSet<BidderId>,
    share: f64,
    concept: Concept,
    tol: f64,
}

impl MediatorScenario {
    /// Scenario over a symmetric-equilibrium base profile.
    pub fn new(
        curve: SlotCurve,
        bidders: Vec<Bidder>,
        profile: BidProfile,
        members: impl IntoIterator<Item = BidderId>,
        share: f64,
    ) -> Result<Self, MediatorError> {
        Self::with_options(curve, bidders, profile, members, share, Concept::Symmetric, DEFAULT_TOL)
    }

    /// Scenario whose base profile only has to be an equilibrium under
    /// `concept`, checked at tolerance `tol`.
    pub fn with_options(
        curve: SlotCurve,
        bidders: Vec<Bidder>,
        profile: BidProfile,
        members: impl IntoIterator<Item = BidderId>,
        share: f64,
        concept: Concept,
        tol: f64,
    ) -> Result<Self, MediatorError> {
        if !(share > 0.0 && share < 1.0) {
            return Err(MediatorError::InvalidShare(share));
        }
        let ranking = Ranking::new(&bidders, &profile)?;
        let members: BTreeSet<BidderId> = members.into_iter().collect();
        if members.is_empty() {
            return Err(MediatorError::EmptyCoalition);
        }
        if let Some(id) = members.iter().find(|id| ranking.rank_of(**id).is_none()) {
            return Err(MediatorError::UnknownMember(*id));
        }
        let report = check_ranked(&curve, &ranking, concept, tol);
        if let Some(v) = report.violations.first() {
            return Err(MediatorError::NotEquilibrium {
                concept,
                violation: Box::new(v.clone()),
            });
        }
        Ok(Self {
            curve,
            bidders,
            profile,
            ranking,
            members,
            share,
            concept,
            tol,
        })
    }

    pub fn curve(&self) -> &SlotCurve {
        &self.curve
    }

    pub fn bidders(&self) -> &[Bidder] {
        &self.bidders
    }

    pub fn profile(&self) -> &BidProfile {
        &self.profile
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    /// `M`
    pub fn members(&self) -> &BTreeSet<BidderId> {
        &self.members
    }

    /// `I`, everyone outside the coalition.
    pub fn outsiders(&self) -> BTreeSet<BidderId> {
        self.ranking
            .iter()
            .map(|rb| rb.id)
            .filter(|id| !self.members.contains(id))
            .collect()
    }

    /// Fraction of the coalition's savings the mediator keeps.
    pub fn share(&self) -> f64 {
        self.share
    }

    pub fn concept(&self) -> Concept {
        self.concept
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn is_member(&self, id: BidderId) -> bool {
        self.members.contains(&id)
    }

    /// Ranks `first..=last` of the coalition when they are consecutive.
    pub(crate) fn member_block(&self) -> Result<(usize, usize), MediatorError> {
        let mut ranks: Vec<usize> = self
            .members
            .iter()
            .filter_map(|id| self.ranking.rank_of(*id))
            .collect();
        ranks.sort_unstable();
        let first = ranks[0];
        let last = *ranks.last().expect("non-empty coalition");
        if last - first + 1 != ranks.len() {
            return Err(MediatorError::NotConsecutive(ranks));
        }
        Ok((first, last))
    }
}
