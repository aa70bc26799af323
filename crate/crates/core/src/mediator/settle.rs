use std::collections::BTreeMap;

use serde::Serialize;

use super::{MediatorError, MediatorPlan};
use crate::auction::BidderId;

/// Clicks received by one member during settlement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettlementEvent {
    pub bidder: BidderId,
    pub clicks: u64,
    pub saving_per_click: f64,
    /// `clicks · saving`
    pub saving: f64,
    pub mediator_take: f64,
    /// Paid back to the coalition, split evenly across members.
    pub rebate_pool: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ledger {
    pub events: Vec<SettlementEvent>,
    pub total_savings: f64,
    pub mediator_total: f64,
    pub rebates: BTreeMap<BidderId, f64>,
}

impl Ledger {
    /// `|savings − mediator − Σ rebates|`
    pub fn conservation_error(&self) -> f64 {
        let rebates: f64 = self.rebates.values().sum();
        (self.total_savings - self.mediator_total - rebates).abs()
    }
}

/// Books each member's clicks against the plan: the mediator keeps share
/// `α` of every click's saving and the rest is rebated to all members in
/// equal parts.
pub fn settle(plan: &MediatorPlan, clicks: &[(BidderId, u64)]) -> Result<Ledger, MediatorError> {
    let members = plan.members.len() as f64;
    let mut rebates: BTreeMap<BidderId, f64> =
        plan.members.iter().map(|m| (m.bidder, 0.0)).collect();
    let mut events = Vec::with_capacity(clicks.len());
    let mut total_savings = 0.0;
    let mut mediator_total = 0.0;

    for &(id, count) in clicks {
        let terms = plan.member(id).ok_or(MediatorError::UnknownMember(id))?;
        let saving = count as f64 * terms.saving_per_click;
        let take = plan.share * saving;
        let pool = saving - take;
        for r in rebates.values_mut() {
            *r += pool / members;
        }
        total_savings += saving;
        mediator_total += take;
        events.push(SettlementEvent {
            bidder: id,
            clicks: count,
            saving_per_click: terms.saving_per_click,
            saving,
            mediator_take: take,
            rebate_pool: pool,
        });
    }

    Ok(Ledger {
        events,
        total_savings,
        mediator_total,
        rebates,
    })
}
