//! One function per subcommand. Each returns named tables plus whether the
//! analysis came out negative; printing is left to the caller.

use thiserror::Error;

use super::scenario::{Scenario, ScenarioError};
use super::table::{Cell, ResultTable};
use crate::auction::{
    allocate, efficiency, min_sne_bids, min_sne_revenue, sorted_scores, verify_nash, verify_sne,
    AuctionError, BidderId, Concept, Ranking,
};
use crate::capacity::{fitness_grid, sweep_fitness, ForkError, ForkSpec, TiePolicy};
use crate::mediator::{
    plan, verify_i_incentives, MediatorError, MediatorScenario, PlanOutcome, Strategy,
};

#[derive(Debug, Error)]
pub enum CommandError {
    /// Malformed or inconsistent input.
    #[error("{0}")]
    Input(String),
    /// The input is fine but the analysis cannot proceed, e.g. a base
    /// profile that is not an equilibrium.
    #[error("{0}")]
    Negative(String),
}

impl From<ScenarioError> for CommandError {
    fn from(e: ScenarioError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<AuctionError> for CommandError {
    fn from(e: AuctionError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<ForkError> for CommandError {
    fn from(e: ForkError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<MediatorError> for CommandError {
    fn from(e: MediatorError) -> Self {
        match e {
            MediatorError::NotEquilibrium { .. } | MediatorError::NoAdmissibleSlide(_) => {
                CommandError::Negative(e.to_string())
            }
            other => CommandError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<(&'static str, ResultTable)>,
    /// Exit with status 1 when set.
    pub negative: bool,
    /// Lines for stderr.
    pub notices: Vec<String>,
}

impl Report {
    fn new(tables: Vec<(&'static str, ResultTable)>) -> Self {
        Self {
            tables,
            negative: false,
            notices: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|(n, _)| *n == name).map(|(_, t)| t)
    }
}

fn yes_no(b: bool) -> Cell {
    Cell::Text(if b { "YES" } else { "NO" }.into())
}

/// Per-position stay/up/down table plus every failing (bidder, target) pair.
pub fn verify(scn: &Scenario, concept: Concept, tol: f64) -> Result<Report, CommandError> {
    let profile = scn.require_profile()?;
    let report = match concept {
        Concept::Symmetric => verify_sne(&scn.curve, &scn.bidders, profile, tol)?,
        Concept::Nash => verify_nash(&scn.curve, &scn.bidders, profile, tol)?,
    };
    let mut positions = ResultTable::new([
        "position",
        "bidder",
        "payoff",
        "payoff_up",
        "payoff_down",
        "envy_free",
    ]);
    for row in &report.local {
        positions.push(vec![
            row.position.into(),
            row.bidder.0.into(),
            row.payoff.into(),
            row.payoff_up.into(),
            row.payoff_down.into(),
            yes_no(row.satisfied),
        ]);
    }
    let mut violations =
        ResultTable::new(["rank", "bidder", "target", "payoff", "deviation_payoff", "gap"]);
    for v in &report.violations {
        violations.push(vec![
            v.rank.into(),
            v.bidder.0.into(),
            v.target.into(),
            v.payoff.into(),
            v.deviation_payoff.into(),
            v.gap.into(),
        ]);
    }
    let mut out = Report::new(vec![("positions", positions), ("violations", violations)]);
    out.negative = !report.holds;
    Ok(out)
}

/// Minimum symmetric equilibrium scores and the payments they induce.
pub fn min_sne(scn: &Scenario) -> Result<Report, CommandError> {
    let profile = min_sne_bids(&scn.curve, &scn.bidders)?.with_reserve(scn.reserve)?;
    let ranking = Ranking::new(&scn.bidders, &profile)?;
    let mut table = ResultTable::new([
        "position",
        "bidder",
        "value_score",
        "score",
        "bid",
        "price_score",
        "payment",
    ]);
    for (idx, rb) in ranking.iter().enumerate() {
        let pos = idx + 1;
        let gamma = scn.curve.gamma(pos);
        let price = if gamma > 0.0 { ranking.price_score(pos) } else { 0.0 };
        table.push(vec![
            pos.into(),
            rb.id.0.into(),
            rb.value_score.into(),
            rb.score.into(),
            (rb.score / rb.relevance).into(),
            price.into(),
            (gamma * price).into(),
        ]);
    }
    Ok(Report::new(vec![("min_sne", table)]))
}

/// Minimum-equilibrium revenue by the closed-form sum and by pricing the
/// constructed bids; the two must agree within `tol`.
pub fn revenue(scn: &Scenario, tol: f64) -> Result<Report, CommandError> {
    let scores = sorted_scores(&scn.bidders);
    let direct = min_sne_revenue(scn.curve.as_slice(), &scores);
    let profile = min_sne_bids(&scn.curve, &scn.bidders)?;
    let priced = allocate(&scn.curve, &scn.bidders, &profile)?.revenue();
    let agree = (direct - priced).abs() <= tol;

    let mut table = ResultTable::new(["quantity", "value"]);
    table.push(vec!["direct_sum".into(), direct.into()]);
    table.push(vec!["price_sum".into(), priced.into()]);
    table.push(vec!["agree".into(), agree.into()]);
    if let Some(p) = &scn.profile {
        let current = allocate(&scn.curve, &scn.bidders, p)?.revenue();
        table.push(vec!["current_profile".into(), current.into()]);
    }
    let mut out = Report::new(vec![("revenue", table)]);
    out.negative = !agree;
    Ok(out)
}

/// Efficiency of the score-sorted allocation and, when bids are present, of
/// the allocation they produce.
pub fn efficiency_report(scn: &Scenario) -> Result<Report, CommandError> {
    let mut table = ResultTable::new(["quantity", "value"]);
    let sorted = efficiency(&scn.curve, &sorted_scores(&scn.bidders));
    table.push(vec!["efficiency".into(), sorted.into()]);
    if let Some(p) = &scn.profile {
        let ranking = Ranking::new(&scn.bidders, p)?;
        table.push(vec![
            "current_profile".into(),
            efficiency(&scn.curve, &ranking.value_scores()).into(),
        ]);
    }
    Ok(Report::new(vec![("efficiency", table)]))
}

#[derive(Debug, Clone, Default)]
pub struct SweepArgs {
    pub slot: Option<usize>,
    pub extra: Option<usize>,
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub steps: usize,
    pub original_first: bool,
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "f",
    "capacity",
    "revenue",
    "efficiency",
    "value_of_capacity",
    "eta",
    "beta",
    "thm_rev1",
    "thm_eff1",
];

pub fn capacity_sweep(scn: &Scenario, args: &SweepArgs) -> Result<Report, CommandError> {
    let from_file = scn.fork.as_ref();
    let missing = |what: &str| CommandError::Input(format!("--{what} is required without a fork block"));
    let slot = args.slot.or(from_file.map(|f| f.slot)).ok_or_else(|| missing("l"))?;
    let extra = args
        .extra
        .or(from_file.map(|f| f.extra_slots))
        .ok_or_else(|| missing("L"))?;
    let top = scn.curve.gamma(1);
    let f_min = args.f_min.unwrap_or(0.05 / top);
    let f_max = args.f_max.unwrap_or(0.95 / top);
    if args.steps == 0 {
        return Err(CommandError::Input("--steps must be at least 1".into()));
    }
    ForkSpec::new(slot, extra, f_min).validate(&scn.curve)?;

    let policy = if args.original_first {
        TiePolicy::OriginalFirst
    } else {
        TiePolicy::Reject
    };
    let grid = fitness_grid(f_min, f_max, args.steps);
    let scores = sorted_scores(&scn.bidders);
    let sweep = sweep_fitness(&scn.curve, &scores, slot, extra, &grid, policy)?;

    let mut table = ResultTable::new(SWEEP_COLUMNS);
    for row in &sweep.rows {
        table.push(vec![
            row.fitness.into(),
            row.capacity.into(),
            row.revenue.into(),
            row.efficiency.into(),
            row.value_of_capacity.into(),
            row.eta.into(),
            row.beta.into(),
            row.revenue_condition_holds.into(),
            row.efficiency_condition_holds.into(),
        ]);
    }
    let mut out = Report::new(vec![("sweep", table)]);
    out.notices = sweep
        .skipped
        .iter()
        .map(|(f, e)| format!("skipped f = {f}: {e}"))
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct MediatorArgs {
    pub strategy: Option<Strategy>,
    pub size: Option<usize>,
    pub anchor: Option<usize>,
    pub r: Option<f64>,
    pub share: Option<f64>,
}

pub fn mediator(scn: &Scenario, args: &MediatorArgs, tol: f64) -> Result<Report, CommandError> {
    let profile = scn.require_profile()?;
    let block = scn.mediator.as_ref();
    let strategy = match args.strategy {
        Some(s) => s,
        None => block
            .and_then(|m| m.strategy.as_deref())
            .map(|s| s.parse::<Strategy>().map_err(CommandError::Input))
            .transpose()?
            .unwrap_or(Strategy::Top),
    };
    let share = args.share.or(block.map(|m| m.share)).unwrap_or(0.5);

    let ranking = Ranking::new(&scn.bidders, profile)?;
    let members: Vec<BidderId> = match args.size {
        Some(size) => {
            let first = match strategy {
                Strategy::Interior => args.anchor.ok_or_else(|| {
                    CommandError::Input("--anchor is required with --L for interior".into())
                })? + 1,
                _ => 1,
            };
            let last = first + size - 1;
            if size == 0 || last > ranking.len() {
                return Err(CommandError::Input(format!(
                    "--L {size} does not fit ranks {first}..={}",
                    ranking.len()
                )));
            }
            (first..=last).map(|r| ranking.at(r).id).collect()
        }
        None => block
            .map(|m| m.m_ids.iter().map(|&i| BidderId(i)).collect())
            .ok_or_else(|| CommandError::Input("pass --L or add a mediator block".into()))?,
    };

    let concept = match strategy {
        Strategy::NonSymmetric => Concept::Nash,
        _ => Concept::Symmetric,
    };
    let scenario = MediatorScenario::with_options(
        scn.curve.clone(),
        scn.bidders.clone(),
        profile.clone(),
        members,
        share,
        concept,
        tol,
    )?;
    let outcome = plan(&scenario, strategy, args.anchor, args.r)?;

    let mut summary = ResultTable::new(["key", "value"]);
    summary.push(vec!["strategy".into(), strategy_name(strategy).into()]);
    let plan = match outcome {
        PlanOutcome::NoImprovement { r_star, reason, .. } => {
            summary.push(vec!["status".into(), "no_improvement".into()]);
            summary.push(vec!["r_star".into(), r_star.into()]);
            summary.push(vec!["reason".into(), reason.into()]);
            let mut out = Report::new(vec![("summary", summary)]);
            out.negative = true;
            return Ok(out);
        }
        PlanOutcome::Plan(p) => p,
    };
    let incentives = verify_i_incentives(&scenario, &plan)?;
    summary.push(vec!["status".into(), "plan".into()]);
    summary.push(vec!["r_star".into(), plan.r_star.into()]);
    summary.push(vec!["flat_score".into(), plan.flat_score.into()]);
    summary.push(vec!["pivot".into(), plan.pivot.into()]);
    summary.push(vec!["flattened_first".into(), plan.flattened.0.into()]);
    summary.push(vec!["flattened_last".into(), plan.flattened.1.into()]);
    summary.push(vec!["payoff_per_share".into(), plan.payoff_per_share.into()]);
    summary.push(vec!["share".into(), plan.share.into()]);
    summary.push(vec!["mediator_payoff".into(), plan.mediator_payoff.into()]);
    summary.push(vec!["incentives_pass".into(), incentives.passes.into()]);

    let new_ranking = Ranking::new(&scn.bidders, &plan.modified_profile)?;
    let base_alloc = allocate(&scn.curve, &scn.bidders, profile)?;
    let new_alloc = allocate(&scn.curve, &scn.bidders, &plan.modified_profile)?;
    let mut rows = ResultTable::new([
        "base_rank",
        "bidder",
        "member",
        "base_score",
        "new_score",
        "new_rank",
        "base_price_score",
        "new_price_score",
    ]);
    for (idx, rb) in ranking.iter().enumerate() {
        let before = base_alloc.placement(rb.id).expect("ranked");
        let after = new_alloc.placement(rb.id).expect("ranked");
        rows.push(vec![
            (idx + 1).into(),
            rb.id.0.into(),
            scenario.is_member(rb.id).into(),
            rb.score.into(),
            plan.modified_profile.score_of(rb.id).into(),
            new_ranking.rank_of(rb.id).into(),
            before.price_score.into(),
            after.price_score.into(),
        ]);
    }

    let mut checks =
        ResultTable::new(["bidder", "rank", "target", "payoff", "deviation_payoff", "holds"]);
    for t in &incentives.targeted {
        checks.push(vec![
            t.bidder.0.into(),
            t.rank.into(),
            t.target.into(),
            t.payoff.into(),
            t.deviation_payoff.into(),
            t.holds.into(),
        ]);
    }

    let mut out = Report::new(vec![
        ("summary", summary),
        ("profile", rows),
        ("incentives", checks),
    ]);
    out.negative = !incentives.passes;
    if !incentives.passes {
        out.notices.push(format!("incentive check failed: {}", incentives.describe_failure()));
    }
    Ok(out)
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::Top => "top",
        Strategy::Interior => "interior",
        Strategy::NonSymmetric => "nonsym",
        Strategy::Slide => "slide",
    }
}
