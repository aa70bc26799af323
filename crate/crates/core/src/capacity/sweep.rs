use rayon::prelude::*;
use serde::Serialize;

use super::conditions::{
    check_efficiency_condition, check_lemma_preconditions, check_revenue_condition, check_scores,
};
use super::{
    beta, efficiency_after_fork, eta, fork_with, revenue_after_fork, value_of_capacity, ForkError,
    ForkSpec, TiePolicy,
};
use crate::auction::{efficiency_of, min_sne_revenue, SlotCurve};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub fitness: f64,
    pub capacity: f64,
    pub revenue: f64,
    pub efficiency: f64,
    pub value_of_capacity: f64,
    pub eta: f64,
    pub beta: f64,
    pub revenue_condition_holds: bool,
    pub efficiency_condition_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub baseline_revenue: f64,
    pub baseline_efficiency: f64,
    pub rows: Vec<SweepRow>,
    /// Grid points whose merged curve could not be built.
    #[serde(skip)]
    pub skipped: Vec<(f64, ForkError)>,
}

/// `steps` evenly spaced fitness values from `min` to `max` inclusive; a
/// single step yields `min`.
pub fn fitness_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps)
            .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

fn baseline(curve: &SlotCurve, scores: &[f64]) -> Result<(f64, f64), ForkError> {
    check_scores(scores)?;
    let r0 = min_sne_revenue(curve.as_slice(), scores);
    if !(r0 > 0.0) {
        return Err(ForkError::NonPositiveBaseline(r0));
    }
    Ok((r0, efficiency_of(curve.as_slice(), scores)))
}

fn row(
    curve: &SlotCurve,
    scores: &[f64],
    spec: &ForkSpec,
    policy: TiePolicy,
    r0: f64,
) -> Result<SweepRow, ForkError> {
    let merged = fork_with(curve, spec, policy)?;
    let revenue = revenue_after_fork(&merged, scores);
    let rev = check_revenue_condition(curve, &merged, scores).ok();
    let eff = check_efficiency_condition(curve, &merged, scores).ok();
    Ok(SweepRow {
        fitness: spec.fitness,
        capacity: merged.capacity(),
        revenue,
        efficiency: efficiency_after_fork(&merged, scores),
        value_of_capacity: value_of_capacity(revenue, r0)?,
        eta: eta(curve, &merged),
        beta: beta(curve, &merged),
        revenue_condition_holds: rev.is_some_and(|c| c.holds),
        efficiency_condition_holds: eff.is_some_and(|c| c.holds),
    })
}

/// One row per fitness value, in grid order. Grid points with `f · γ_1 ≥ 1`
/// reject the whole sweep; tied merged curves are skipped and reported.
pub fn sweep_fitness(
    curve: &SlotCurve,
    scores: &[f64],
    slot: usize,
    extra_slots: usize,
    grid: &[f64],
    policy: TiePolicy,
) -> Result<Sweep, ForkError> {
    let (r0, e0) = baseline(curve, scores)?;
    let base = ForkSpec::new(slot, extra_slots, grid.first().copied().unwrap_or(0.5));
    for &f in grid {
        base.with_fitness(f).validate(curve)?;
    }

    let results: Vec<Result<SweepRow, ForkError>> = grid
        .par_iter()
        .map(|&f| row(curve, scores, &base.with_fitness(f), policy, r0))
        .collect();

    let mut rows = Vec::with_capacity(grid.len());
    let mut skipped = Vec::new();
    for (&f, result) in grid.iter().zip(results) {
        match result {
            Ok(r) => rows.push(r),
            Err(e @ ForkError::Tie { .. }) => skipped.push((f, e)),
            Err(e) => return Err(e),
        }
    }
    Ok(Sweep {
        baseline_revenue: r0,
        baseline_efficiency: e0,
        rows,
        skipped,
    })
}

/// Quantity whose sign flip marks the phase transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Value of capacity `(R − R_0) / R_0`.
    Revenue,
    /// `E − E_0`.
    Efficiency,
}

fn signed_change(
    curve: &SlotCurve,
    scores: &[f64],
    spec: &ForkSpec,
    target: Target,
    r0: f64,
    e0: f64,
) -> Result<f64, ForkError> {
    let merged = fork_with(curve, spec, TiePolicy::OriginalFirst)?;
    match target {
        Target::Revenue => value_of_capacity(revenue_after_fork(&merged, scores), r0),
        Target::Efficiency => Ok(efficiency_after_fork(&merged, scores) - e0),
    }
}

fn check_range(curve: &SlotCurve, range: (f64, f64)) -> Result<(), ForkError> {
    let (lo, hi) = range;
    if !(lo > 0.0 && lo < hi && hi * curve.gamma(1) < 1.0) {
        return Err(ForkError::InvalidRange { lo, hi });
    }
    Ok(())
}

/// Fitness at which the target changes sign, by bisection to `tol`.
///
/// Revenue is only bisected when one of the revenue-loss lemmas applies, so
/// the value of capacity is known to be monotone in `f`; efficiency is
/// always monotone. Returns `None` when both ends of the range agree in sign
/// (for efficiency: `E ≥ E_0` at both ends, or at neither).
pub fn critical_fitness(
    curve: &SlotCurve,
    scores: &[f64],
    slot: usize,
    extra_slots: usize,
    target: Target,
    range: (f64, f64),
    tol: f64,
) -> Result<Option<f64>, ForkError> {
    check_range(curve, range)?;
    if !(tol > 0.0) {
        return Err(ForkError::InvalidTolerance(tol));
    }
    let (r0, e0) = baseline(curve, scores)?;
    let spec = ForkSpec::new(slot, extra_slots, range.0);
    spec.validate(curve)?;

    if target == Target::Revenue {
        let lemmas = check_lemma_preconditions(curve, scores, slot);
        if !(lemmas.l1_holds || lemmas.l2_holds) {
            return Err(ForkError::NotMonotone {
                gap_failures: lemmas.gap_failures,
                score_failures: lemmas.score_failures,
            });
        }
    }

    // `side(f)` is true on the "gained" side of the transition.
    let side = |f: f64| -> Result<bool, ForkError> {
        let change = signed_change(curve, scores, &spec.with_fitness(f), target, r0, e0)?;
        Ok(match target {
            Target::Revenue => change > 0.0,
            Target::Efficiency => change >= 0.0,
        })
    };

    let (mut lo, mut hi) = range;
    let lo_side = side(lo)?;
    if lo_side == side(hi)? {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if side(mid)? == lo_side {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Grid scan reporting every bracket `(f_i, f_{i+1})` where the target
/// changes sign. Works without any monotonicity assumption.
pub fn scan_sign_changes(
    curve: &SlotCurve,
    scores: &[f64],
    slot: usize,
    extra_slots: usize,
    target: Target,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>, ForkError> {
    let (r0, e0) = baseline(curve, scores)?;
    let spec = ForkSpec::new(slot, extra_slots, grid.first().copied().unwrap_or(0.5));
    let values = grid
        .iter()
        .map(|&f| {
            let s = spec.with_fitness(f);
            s.validate(curve)?;
            signed_change(curve, scores, &s, target, r0, e0)
        })
        .collect::<Result<Vec<f64>, ForkError>>()?;
    Ok(grid
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| (v[0] > 0.0) != (v[1] > 0.0))
        .map(|(f, _)| (f[0], f[1]))
        .collect())
}
