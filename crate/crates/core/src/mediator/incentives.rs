use serde::Serialize;

use super::{MediatorError, MediatorPlan, MediatorScenario, Strategy};
use crate::auction::{
    allocate_ranked, check_ranked, BidderId, Concept, EquilibriumReport, Ranking, Violation,
};

/// An outside bidder's payoff against jumping into the flattened block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetedCheck {
    pub bidder: BidderId,
    pub rank: usize,
    pub target: usize,
    pub payoff: f64,
    pub deviation_payoff: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncentiveReport {
    /// Equilibrium check of the modified profile; only outside bidders'
    /// violations count towards `passes`.
    pub equilibrium: EquilibriumReport,
    pub outsider_violations: Vec<Violation>,
    pub targeted: Vec<TargetedCheck>,
    /// Every outside bidder pays exactly what it paid before.
    pub prices_unchanged: bool,
    /// Every outside bidder keeps its slot.
    pub positions_unchanged: bool,
    pub passes: bool,
}

impl IncentiveReport {
    pub fn describe_failure(&self) -> String {
        if let Some(v) = self.outsider_violations.first() {
            return format!(
                "bidder {} at rank {} prefers position {} ({} > {})",
                v.bidder, v.rank, v.target, v.deviation_payoff, v.payoff
            );
        }
        if let Some(t) = self.targeted.iter().find(|t| !t.holds) {
            return format!(
                "bidder {} at rank {} prefers position {} at the flat score ({} > {})",
                t.bidder, t.rank, t.target, t.deviation_payoff, t.payoff
            );
        }
        if !self.prices_unchanged {
            return "an outside bidder's price changed".into();
        }
        if !self.positions_unchanged {
            return "an outside bidder changed position".into();
        }
        "none".into()
    }
}

/// Checks that the modified profile leaves outside bidders with no reason to
/// deviate and, except under sliding, with the same positions and prices.
///
/// The non-symmetric plan is checked under Nash prices, every other plan
/// under the scenario's own concept.
pub fn verify_i_incentives(
    scenario: &MediatorScenario,
    plan: &MediatorPlan,
) -> Result<IncentiveReport, MediatorError> {
    let curve = scenario.curve();
    let outsiders = scenario.outsiders();
    let ranking = Ranking::new(scenario.bidders(), &plan.modified_profile)?;
    let concept = match plan.strategy {
        Strategy::NonSymmetric => Concept::Nash,
        _ => scenario.concept(),
    };
    let tol = scenario.tolerance();
    let equilibrium = check_ranked(curve, &ranking, concept, tol);
    let outsider_violations: Vec<Violation> =
        equilibrium.violations_for(&outsiders).cloned().collect();

    let target = match plan.strategy {
        Strategy::Top | Strategy::Slide => 1,
        Strategy::NonSymmetric => plan.flattened.0,
        Strategy::Interior => plan.flattened.0 - 1,
    };
    let targeted = ranking
        .iter()
        .enumerate()
        .map(|(idx, rb)| (idx + 1, rb))
        .filter(|(rank, rb)| outsiders.contains(&rb.id) && *rank != target)
        .map(|(rank, rb)| {
            let payoff = curve.gamma(rank) * (rb.value_score - ranking.price_score(rank));
            let deviation_payoff = curve.gamma(target) * (rb.value_score - plan.flat_score);
            TargetedCheck {
                bidder: rb.id,
                rank,
                target,
                payoff,
                deviation_payoff,
                holds: payoff - deviation_payoff >= -tol,
            }
        })
        .collect::<Vec<_>>();

    let before = allocate_ranked(curve, scenario.ranking());
    let after = allocate_ranked(curve, &ranking);
    let mut prices_unchanged = true;
    let mut positions_unchanged = true;
    for id in &outsiders {
        let b = before.placement(*id).expect("ranked");
        let a = after.placement(*id).expect("ranked");
        prices_unchanged &= b.price_per_click == a.price_per_click;
        positions_unchanged &= b.slot == a.slot;
    }

    let keeps = plan.strategy == Strategy::Slide || (prices_unchanged && positions_unchanged);
    let passes = outsider_violations.is_empty() && targeted.iter().all(|t| t.holds) && keeps;
    Ok(IncentiveReport {
        equilibrium,
        outsider_violations,
        targeted,
        prices_unchanged,
        positions_unchanged,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mediator::{plan_nonsym, plan_slide, plan_top, plan_top_at};

    fn scenario() -> MediatorScenario {
        let (curve, bidders, profile) = crate::mediator::plan::tests::table1();
        MediatorScenario::new(curve, bidders, profile, (1..=5).map(BidderId), 0.3).unwrap()
    }

    #[test]
    fn top_plan_passes_and_lower_score_fails() {
        let s = scenario();
        let plan = plan_top(&s).unwrap().into_plan().unwrap();
        let report = verify_i_incentives(&s, &plan).unwrap();
        assert!(report.passes, "{}", report.describe_failure());
        assert!(report.prices_unchanged && report.positions_unchanged);
        // Coalition members themselves are not in equilibrium.
        assert!(!report.equilibrium.holds);

        let low = plan_top_at(&s, 14.1).unwrap().into_plan().unwrap();
        let report = verify_i_incentives(&s, &low).unwrap();
        assert!(!report.passes);
        let failing = report.targeted.iter().find(|t| !t.holds).unwrap();
        assert_eq!(failing.bidder, BidderId(6));
    }

    #[test]
    fn nonsym_passes_under_nash() {
        let s = scenario();
        let plan = plan_nonsym(&s).unwrap().into_plan().unwrap();
        let report = verify_i_incentives(&s, &plan).unwrap();
        assert_eq!(report.equilibrium.concept, Concept::Nash);
        assert!(report.passes, "{}", report.describe_failure());
    }

    #[test]
    fn slide_moves_outsider_up() {
        let s = scenario();
        let plan = plan_slide(&s, None).unwrap().into_plan().unwrap();
        let report = verify_i_incentives(&s, &plan).unwrap();
        assert!(report.passes);
        assert!(!report.positions_unchanged);
    }
}
