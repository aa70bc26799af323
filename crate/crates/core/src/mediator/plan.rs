//! Bid-flattening strategies. Every plan keeps the outside bidders' positions
//! and prices (except when sliding) and pushes the coalition's bids down to a
//! common score `r`, no lower than the point where some outside bidder would
//! rather jump into the flattened block.

use serde::Serialize;

use super::incentives::verify_i_incentives;
use super::{MediatorError, MediatorScenario};
use crate::auction::{allocate_ranked, BidEntry, BidProfile, BidderId, Ranking};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Coalition holds the top ranks; all of them flatten.
    Top,
    /// Coalition sits below an outside anchor; the block below its highest
    /// member flattens.
    Interior,
    /// Coalition holds the top ranks; its highest member keeps its bid.
    NonSymmetric,
    /// Coalition drops one rank so the outside bidder below takes the top.
    Slide,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "top" => Ok(Strategy::Top),
            "interior" => Ok(Strategy::Interior),
            "nonsym" | "non-symmetric" | "nonsymmetric" => Ok(Strategy::NonSymmetric),
            "slide" => Ok(Strategy::Slide),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// Lowest flat score outside bidder `bidder` tolerates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub rank: usize,
    pub bidder: BidderId,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RStar {
    /// Largest threshold, or the reserve when nobody constrains the plan.
    pub value: f64,
    pub candidates: Vec<Candidate>,
}

/// Prices for one coalition member before and after the plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberTerms {
    pub bidder: BidderId,
    pub base_rank: usize,
    pub new_rank: usize,
    /// What the member paid per click in the base profile.
    pub base_price_per_click: f64,
    /// What the auction now charges per click.
    pub paid_per_click: f64,
    /// `base − paid`, split with the mediator at settlement.
    pub saving_per_click: f64,
    /// Member's own click-through rate `e_i · γ` in its new position.
    pub ctr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediatorPlan {
    pub strategy: Strategy,
    pub share: f64,
    pub r_star: f64,
    /// Common score of the flattened block; may sit above `r_star` after
    /// clamping to the next outside bid.
    pub flat_score: f64,
    /// Base-profile ranks whose bids were replaced by `flat_score`.
    pub flattened: (usize, usize),
    /// `l` for the top strategies, `s` for interior, `L` for sliding.
    pub pivot: usize,
    pub modified_profile: BidProfile,
    /// Coalition savings per impression before the mediator's cut, `U_M / α`.
    pub payoff_per_share: f64,
    /// `α · U_M / α`
    pub mediator_payoff: f64,
    pub members: Vec<MemberTerms>,
}

impl MediatorPlan {
    pub fn member(&self, id: BidderId) -> Option<&MemberTerms> {
        self.members.iter().find(|m| m.bidder == id)
    }

    /// Outside bidders never change rank except under sliding.
    pub fn keeps_positions(&self) -> bool {
        self.members.iter().all(|m| m.base_rank == m.new_rank)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanOutcome {
    Plan(Box<MediatorPlan>),
    /// The constraints leave nothing to save.
    NoImprovement { strategy: Strategy, r_star: f64, reason: String },
}

impl PlanOutcome {
    pub fn plan(&self) -> Option<&MediatorPlan> {
        match self {
            PlanOutcome::Plan(p) => Some(p),
            PlanOutcome::NoImprovement { .. } => None,
        }
    }

    pub fn into_plan(self) -> Option<MediatorPlan> {
        match self {
            PlanOutcome::Plan(p) => Some(*p),
            PlanOutcome::NoImprovement { .. } => None,
        }
    }
}

const MIN_SAVING: f64 = 1e-9;

/// Score `r` at which a bidder with value score `s` holding CTR `own` and
/// paying `price` is indifferent to taking CTR `target` at price `r`.
fn threshold(s: f64, own: f64, target: f64, price: f64) -> f64 {
    let w = own / target;
    (1.0 - w) * s + w * price
}

fn candidates(
    scenario: &MediatorScenario,
    ranks: impl Iterator<Item = usize>,
    target_position: usize,
) -> RStar {
    let ranking = scenario.ranking();
    let curve = scenario.curve();
    let target = curve.gamma(target_position);
    let candidates: Vec<Candidate> = ranks
        .map(|rank| {
            let rb = ranking.at(rank);
            Candidate {
                rank,
                bidder: rb.id,
                threshold: threshold(
                    rb.value_score,
                    curve.gamma(rank),
                    target,
                    ranking.price_score(rank),
                ),
            }
        })
        .collect();
    let value = candidates
        .iter()
        .map(|c| c.threshold)
        .fold(ranking.reserve(), f64::max);
    RStar { value, candidates }
}

fn block_label(first: usize, last: usize) -> String {
    format!("{first}..={last}")
}

fn top_block(scenario: &MediatorScenario) -> Result<usize, MediatorError> {
    let (first, last) = scenario.member_block()?;
    if first != 1 {
        return Err(MediatorError::WrongBlock {
            expected: block_label(1, last - first + 1),
            found: block_label(first, last),
        });
    }
    Ok(last)
}

/// `r*` for the top strategy: outside bidders below the coalition must not
/// want the top position at price `r`.
pub fn r_star_top(scenario: &MediatorScenario) -> Result<RStar, MediatorError> {
    let size = top_block(scenario)?;
    Ok(candidates(scenario, size + 1..=scenario.ranking().len(), 1))
}

/// `r*` for the non-symmetric strategy: outside bidders must not want
/// position 2 at price `r`.
pub fn r_star_nonsym(scenario: &MediatorScenario) -> Result<RStar, MediatorError> {
    let size = top_block(scenario)?;
    Ok(candidates(scenario, size + 1..=scenario.ranking().len(), 2))
}

/// `r*` for an interior coalition at ranks `anchor+1..=anchor+L`: every
/// outside bidder, above or below, must not want position `anchor + 1` at
/// price `r`.
pub fn r_star_interior(
    scenario: &MediatorScenario,
    anchor: usize,
) -> Result<RStar, MediatorError> {
    let size = interior_block(scenario, anchor)?;
    let n = scenario.ranking().len();
    let outside = (1..=anchor).chain(anchor + size + 1..=n);
    Ok(candidates(scenario, outside, anchor + 1))
}

fn interior_block(scenario: &MediatorScenario, anchor: usize) -> Result<usize, MediatorError> {
    let (first, last) = scenario.member_block()?;
    let size = last - first + 1;
    if first != anchor + 1 {
        return Err(MediatorError::WrongBlock {
            expected: block_label(anchor + 1, anchor + size),
            found: block_label(first, last),
        });
    }
    if scenario.curve().gamma(anchor + 1) <= 0.0 {
        return Err(MediatorError::AnchorOutOfRange(anchor + 1));
    }
    Ok(size)
}

fn check_score(r: f64) -> Result<(), MediatorError> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(MediatorError::InvalidScore(r));
    }
    Ok(())
}

/// Base profile re-keyed so tie ranks follow the base order, with the given
/// ranks replaced by `score`.
fn flattened_profile(
    ranking: &Ranking,
    ranks: std::ops::RangeInclusive<usize>,
    score: f64,
) -> Result<BidProfile, MediatorError> {
    let entries = ranking
        .iter()
        .enumerate()
        .map(|(idx, rb)| BidEntry {
            id: rb.id,
            score: if ranks.contains(&(idx + 1)) { score } else { rb.score },
            tie_rank: idx as u32,
        })
        .collect();
    Ok(BidProfile::from_entries(entries)?.with_reserve(ranking.reserve())?)
}

struct Flattening {
    first: usize,
    last: usize,
    score: f64,
    /// Ranks `from..last` save `γ_j (r_{j+1} − r)`.
    savings_from: usize,
}

/// Largest rank in `from..=limit` whose base score is at least `r`, with `r`
/// raised to `r_{limit+1}` when the block reaches the limit.
fn flatten_range(ranking: &Ranking, from: usize, limit: usize, r: f64) -> Option<(usize, f64)> {
    let last = (from..=limit).take_while(|&j| ranking.score_at(j) >= r).last()?;
    let r = if last == limit { r.max(ranking.score_at(limit + 1)) } else { r };
    Some((last, r))
}

fn build(
    scenario: &MediatorScenario,
    strategy: Strategy,
    r_star: f64,
    flat: Option<Flattening>,
    pivot: usize,
) -> Result<PlanOutcome, MediatorError> {
    let Some(flat) = flat else {
        return Ok(PlanOutcome::NoImprovement {
            strategy,
            r_star,
            reason: "no coalition bid lies at or above r".into(),
        });
    };
    let ranking = scenario.ranking();
    let curve = scenario.curve();
    let savings: f64 = (flat.savings_from..flat.last)
        .map(|j| curve.gamma(j) * (ranking.score_at(j + 1) - flat.score))
        .sum();
    if savings < MIN_SAVING {
        return Ok(PlanOutcome::NoImprovement {
            strategy,
            r_star,
            reason: format!("flattening ranks {}..={} saves nothing", flat.first, flat.last),
        });
    }
    let profile = flattened_profile(ranking, flat.first..=flat.last, flat.score)?;
    finish(scenario, strategy, r_star, flat.score, (flat.first, flat.last), pivot, profile, savings)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    scenario: &MediatorScenario,
    strategy: Strategy,
    r_star: f64,
    flat_score: f64,
    flattened: (usize, usize),
    pivot: usize,
    profile: BidProfile,
    payoff_per_share: f64,
) -> Result<PlanOutcome, MediatorError> {
    let base = allocate_ranked(scenario.curve(), scenario.ranking());
    let new_ranking = Ranking::new(scenario.bidders(), &profile)?;
    let after = allocate_ranked(scenario.curve(), &new_ranking);
    let members = scenario
        .members()
        .iter()
        .map(|&id| {
            let b = base.placement(id).expect("member is ranked");
            let a = after.placement(id).expect("member is ranked");
            MemberTerms {
                bidder: id,
                base_rank: b.rank,
                new_rank: a.rank,
                base_price_per_click: b.price_per_click,
                paid_per_click: a.price_per_click,
                saving_per_click: b.price_per_click - a.price_per_click,
                ctr: a.ctr,
            }
        })
        .collect();
    Ok(PlanOutcome::Plan(Box::new(MediatorPlan {
        strategy,
        share: scenario.share(),
        r_star,
        flat_score,
        flattened,
        pivot,
        modified_profile: profile,
        payoff_per_share,
        mediator_payoff: scenario.share() * payoff_per_share,
        members,
    })))
}

/// Top strategy at `r*`.
pub fn plan_top(scenario: &MediatorScenario) -> Result<PlanOutcome, MediatorError> {
    let r = r_star_top(scenario)?.value;
    plan_top_inner(scenario, r, r)
}

/// Top strategy at an explicit flat score; `r` below `r*` yields a plan that
/// fails [`verify_i_incentives`].
pub fn plan_top_at(scenario: &MediatorScenario, r: f64) -> Result<PlanOutcome, MediatorError> {
    check_score(r)?;
    let r_star = r_star_top(scenario)?.value;
    plan_top_inner(scenario, r_star, r)
}

fn plan_top_inner(
    scenario: &MediatorScenario,
    r_star: f64,
    r: f64,
) -> Result<PlanOutcome, MediatorError> {
    let size = top_block(scenario)?;
    let flat = flatten_range(scenario.ranking(), 1, size, r).map(|(last, score)| Flattening {
        first: 1,
        last,
        score,
        savings_from: 1,
    });
    let pivot = flat.as_ref().map_or(0, |f| f.last);
    build(scenario, Strategy::Top, r_star, flat, pivot)
}

/// Non-symmetric strategy: the top member keeps its bid, ranks `2..=l`
/// flatten to `r*`.
pub fn plan_nonsym(scenario: &MediatorScenario) -> Result<PlanOutcome, MediatorError> {
    let size = top_block(scenario)?;
    let r_star = r_star_nonsym(scenario)?.value;
    let flat = if size < 2 {
        None
    } else {
        flatten_range(scenario.ranking(), 2, size, r_star).map(|(last, score)| Flattening {
            first: 2,
            last,
            score,
            savings_from: 1,
        })
    };
    let pivot = flat.as_ref().map_or(0, |f| f.last);
    build(scenario, Strategy::NonSymmetric, r_star, flat, pivot)
}

/// Interior strategy for a coalition right below the outside bidder at
/// rank `anchor`.
pub fn plan_interior(
    scenario: &MediatorScenario,
    anchor: usize,
) -> Result<PlanOutcome, MediatorError> {
    let r = r_star_interior(scenario, anchor)?.value;
    plan_interior_inner(scenario, anchor, r, r)
}

pub fn plan_interior_at(
    scenario: &MediatorScenario,
    anchor: usize,
    r: f64,
) -> Result<PlanOutcome, MediatorError> {
    check_score(r)?;
    let r_star = r_star_interior(scenario, anchor)?.value;
    plan_interior_inner(scenario, anchor, r_star, r)
}

fn plan_interior_inner(
    scenario: &MediatorScenario,
    anchor: usize,
    r_star: f64,
    r: f64,
) -> Result<PlanOutcome, MediatorError> {
    let size = interior_block(scenario, anchor)?;
    let top = anchor + 1;
    let flat = if size < 2 {
        None
    } else {
        flatten_range(scenario.ranking(), top + 1, anchor + size, r).map(|(last, score)| {
            Flattening {
                first: top + 1,
                last,
                score,
                savings_from: top,
            }
        })
    };
    let pivot = flat.as_ref().map_or(0, |f| f.last - anchor);
    build(scenario, Strategy::Interior, r_star, flat, pivot)
}

/// Sliding strategy: the top-`L` coalition bids `r'` so the outside bidder
/// at rank `L + 1` takes the top position.
///
/// With `r = None` the candidate scores (profile scores and outsider
/// thresholds) are scanned from the top and the largest admissible `r'` is
/// chosen; an explicit `r'` must satisfy
/// `r_{L+2} ≤ r' < r_{L+1}` and keep the outside bidders content.
pub fn plan_slide(
    scenario: &MediatorScenario,
    r: Option<f64>,
) -> Result<PlanOutcome, MediatorError> {
    let size = top_block(scenario)?;
    let ranking = scenario.ranking();
    if size + 1 > ranking.len() {
        return Err(MediatorError::SlideUnavailable);
    }
    let lo = ranking.score_at(size + 2);
    let hi = ranking.score_at(size + 1);
    let r_star = candidates(scenario, size + 2..=ranking.len(), 1).value.max(lo);

    let attempt = |r: f64| -> Result<(MediatorPlan, Option<String>), MediatorError> {
        let profile = flattened_profile(ranking, 1..=size, r)?;
        let outcome = finish(scenario, Strategy::Slide, r_star, r, (1, size), size, profile, 0.0)?;
        let mut plan = outcome.into_plan().expect("finish always yields a plan");
        let base = allocate_ranked(scenario.curve(), ranking);
        let after = allocate_ranked(
            scenario.curve(),
            &Ranking::new(scenario.bidders(), &plan.modified_profile)?,
        );
        let paid = |alloc: &crate::auction::Allocation| -> f64 {
            scenario
                .members()
                .iter()
                .filter_map(|id| alloc.placement(*id))
                .map(|p| p.payment_per_impression)
                .sum()
        };
        plan.payoff_per_share = paid(&base) - paid(&after);
        plan.mediator_payoff = scenario.share() * plan.payoff_per_share;
        let report = verify_i_incentives(scenario, &plan)?;
        let failure = (!report.passes).then(|| report.describe_failure());
        Ok((plan, failure))
    };

    match r {
        Some(r) => {
            check_score(r)?;
            if !(r >= lo && r < hi) {
                return Err(MediatorError::SlideOutOfRange { score: r, lo, hi });
            }
            let (plan, failure) = attempt(r)?;
            match failure {
                Some(why) => Err(MediatorError::NoAdmissibleSlide(why)),
                None => Ok(PlanOutcome::Plan(Box::new(plan))),
            }
        }
        None => {
            let mut grid: Vec<f64> = candidates(scenario, 1..=ranking.len(), 1)
                .candidates
                .iter()
                .map(|c| c.threshold)
                .chain(ranking.iter().map(|rb| rb.score))
                .chain([lo, r_star])
                .filter(|&x| x >= lo && x < hi)
                .collect();
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let mut last_failure = format!("no candidate in [{lo}, {hi})");
            let mut flat = None;
            for r in grid.into_iter().rev().filter(|&x| x >= r_star) {
                let (plan, failure) = attempt(r)?;
                match failure {
                    None if plan.payoff_per_share >= MIN_SAVING => {
                        return Ok(PlanOutcome::Plan(Box::new(plan)))
                    }
                    None => flat = Some(r),
                    Some(why) => last_failure = why,
                }
            }
            if let Some(r) = flat {
                return Ok(PlanOutcome::NoImprovement {
                    strategy: Strategy::Slide,
                    r_star,
                    reason: format!("sliding to {r} saves nothing"),
                });
            }
            Err(MediatorError::NoAdmissibleSlide(last_failure))
        }
    }
}

/// Dispatches on `strategy`; `anchor` is only used by the interior plan and
/// `r` overrides the flat score where the strategy allows it.
pub fn plan(
    scenario: &MediatorScenario,
    strategy: Strategy,
    anchor: Option<usize>,
    r: Option<f64>,
) -> Result<PlanOutcome, MediatorError> {
    match (strategy, r) {
        (Strategy::Top, None) => plan_top(scenario),
        (Strategy::Top, Some(r)) => plan_top_at(scenario, r),
        (Strategy::NonSymmetric, _) => plan_nonsym(scenario),
        (Strategy::Interior, r) => {
            let anchor = match anchor {
                Some(a) => a,
                None => scenario.member_block()?.0 - 1,
            };
            match r {
                None => plan_interior(scenario, anchor),
                Some(r) => plan_interior_at(scenario, anchor, r),
            }
        }
        (Strategy::Slide, r) => plan_slide(scenario, r),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::auction::{Bidder, SlotCurve};

    pub(crate) fn table1() -> (SlotCurve, Vec<Bidder>, BidProfile) {
        let curve = SlotCurve::new(vec![1.0, 0.6, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1]).unwrap();
        let values = [26.0, 22.0, 20.0, 18.0, 17.0, 15.0, 12.0, 12.0, 9.0];
        let bids = [25.0, 20.0, 16.0, 15.0, 14.0, 13.0, 11.0, 10.0, 9.0];
        let bidders: Vec<Bidder> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Bidder::new(i as u32 + 1, v, 1.0).unwrap())
            .collect();
        let profile = BidProfile::from_scores(
            bids.iter().enumerate().map(|(i, &b)| (BidderId(i as u32 + 1), b)),
        )
        .unwrap();
        (curve, bidders, profile)
    }

    fn scenario(members: &[u32]) -> MediatorScenario {
        let (curve, bidders, profile) = table1();
        MediatorScenario::new(curve, bidders, profile, members.iter().map(|&i| BidderId(i)), 0.3)
            .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn top_thresholds() {
        let s = scenario(&[1, 2, 3, 4, 5]);
        let r = r_star_top(&s).unwrap();
        let xs: Vec<f64> = r.candidates.iter().map(|c| c.threshold).collect();
        let expected = [14.2, 11.7, 11.7, 9.0];
        assert_eq!(xs.len(), 4);
        for (x, e) in xs.iter().zip(expected) {
            assert!(close(*x, e), "{x} vs {e}");
        }
        assert!(close(r.value, 14.2));
    }

    #[test]
    fn top_plan() {
        let s = scenario(&[1, 2, 3, 4, 5]);
        let plan = plan_top(&s).unwrap().into_plan().unwrap();
        assert_eq!(plan.pivot, 4);
        assert_eq!(plan.flattened, (1, 4));
        assert!(close(plan.payoff_per_share, 7.28));
        assert!(close(plan.mediator_payoff, 0.3 * 7.28));
        assert!(plan.keeps_positions());
        let scores: Vec<f64> = plan.modified_profile.entries().iter().map(|e| e.score).collect();
        assert_eq!(&scores[..5], &[14.2, 14.2, 14.2, 14.2, 14.0]);
    }

    #[test]
    fn interior_without_gain() {
        let s = scenario(&[2, 3, 4, 5]);
        let r = r_star_interior(&s, 1).unwrap();
        assert!(close(r.value, 16.0));
        assert!(matches!(plan_interior(&s, 1).unwrap(), PlanOutcome::NoImprovement { .. }));
        assert!(matches!(
            r_star_interior(&s, 2),
            Err(MediatorError::WrongBlock { .. })
        ));
    }

    #[test]
    fn nonsym_plan() {
        let s = scenario(&[1, 2, 3, 4, 5]);
        let plan = plan_nonsym(&s).unwrap().into_plan().unwrap();
        assert!(close(plan.r_star, 41.0 / 3.0));
        assert_eq!(plan.pivot, 5);
        assert!(close(plan.payoff_per_share, 8.0 + 8.0 / 15.0));
    }

    #[test]
    fn slide_default_and_explicit() {
        let s = scenario(&[1, 2, 3, 4, 5]);
        let plan = plan_slide(&s, None).unwrap().into_plan().unwrap();
        assert!(close(plan.flat_score, 11.7));
        assert!(close(plan.payoff_per_share, 46.6 - (1.8 * 11.7 + 2.2)));
        assert!(!plan.keeps_positions());
        let at12 = plan_slide(&s, Some(12.0)).unwrap().into_plan().unwrap();
        assert!(close(at12.payoff_per_share, 22.8));
        assert!(matches!(
            plan_slide(&s, Some(13.0)),
            Err(MediatorError::SlideOutOfRange { .. })
        ));
        assert!(matches!(
            plan_slide(&s, Some(11.5)),
            Err(MediatorError::NoAdmissibleSlide(_))
        ));
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("Top".parse::<Strategy>().unwrap(), Strategy::Top);
        assert_eq!("nonsym".parse::<Strategy>().unwrap(), Strategy::NonSymmetric);
        assert!("other".parse::<Strategy>().is_err());
    }
}
