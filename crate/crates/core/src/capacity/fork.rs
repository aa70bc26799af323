use serde::{Deserialize, Serialize};

use super::ForkError;
use crate::auction::{gamma_at, SlotCurve};

/// Forking original slot `slot` into `extra_slots` landing-page slots whose
/// effective CTRs are `γ_slot · fitness · γ_k` for `k = 1..=extra_slots`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForkSpec {
    /// `l`, 1-based.
    pub slot: usize,
    /// `L`
    pub extra_slots: usize,
    /// `f`
    pub fitness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landing_relevance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_boost: Option<f64>,
}

impl ForkSpec {
    pub fn new(slot: usize, extra_slots: usize, fitness: f64) -> Self {
        Self {
            slot,
            extra_slots,
            fitness,
            landing_relevance: None,
            page_boost: None,
        }
    }

    /// Fitness as the product of the landing link's click probability and the
    /// landing page's CTR multiplier.
    pub fn from_landing(
        slot: usize,
        extra_slots: usize,
        landing_relevance: f64,
        page_boost: f64,
    ) -> Self {
        Self {
            slot,
            extra_slots,
            fitness: landing_relevance * page_boost,
            landing_relevance: Some(landing_relevance),
            page_boost: Some(page_boost),
        }
    }

    pub fn with_fitness(&self, fitness: f64) -> Self {
        Self {
            fitness,
            landing_relevance: None,
            page_boost: None,
            ..*self
        }
    }

    pub fn with_extra_slots(&self, extra_slots: usize) -> Self {
        Self {
            extra_slots,
            ..*self
        }
    }

    pub fn validate(&self, curve: &SlotCurve) -> Result<(), ForkError> {
        let k = curve.slots();
        if self.slot < 1 || self.slot > k {
            return Err(ForkError::SlotOutOfRange { slot: self.slot, slots: k });
        }
        if self.extra_slots < 1 || self.extra_slots > k {
            return Err(ForkError::ExtraSlotsOutOfRange {
                extra: self.extra_slots,
                slots: k,
            });
        }
        if !(self.fitness > 0.0 && self.fitness.is_finite()) {
            return Err(ForkError::InvalidFitness(self.fitness));
        }
        if self.fitness * curve.gamma(1) >= 1.0 {
            return Err(ForkError::FitnessTooHigh {
                fitness: self.fitness,
                top: curve.gamma(1),
            });
        }
        if let (Some(rel), Some(boost)) = (self.landing_relevance, self.page_boost) {
            if (rel * boost - self.fitness).abs() > 1e-12 * self.fitness.max(1.0) {
                return Err(ForkError::InconsistentFitness {
                    fitness: self.fitness,
                    product: rel * boost,
                });
            }
        }
        Ok(())
    }
}

/// Where a merged position came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum SlotOrigin {
    /// Original slot index `j`.
    Original(usize),
    /// Landing-page sub-slot `k`.
    Forked(usize),
}

/// How exact CTR ties in the merged curve are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    #[default]
    Reject,
    /// Original slots rank before forked sub-slots of equal CTR.
    OriginalFirst,
}

/// CTRs of the combined auction, sorted in decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedCurve {
    spec: ForkSpec,
    tilde: Vec<f64>,
    provenance: Vec<SlotOrigin>,
    crossing_index: usize,
}

impl MergedCurve {
    pub fn spec(&self) -> &ForkSpec {
        &self.spec
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.tilde
    }

    /// `K̃ = K + L − 1`
    pub fn slots(&self) -> usize {
        self.tilde.len()
    }

    /// `γ̃_j`, zero beyond `K̃`.
    pub fn gamma(&self, position: usize) -> f64 {
        gamma_at(&self.tilde, position)
    }

    pub fn provenance(&self) -> &[SlotOrigin] {
        &self.provenance
    }

    /// `i_0 = max{ i ≤ K : γ_l · f · γ_1 < γ_i }`, which is also the merged
    /// position of the top landing-page sub-slot.
    pub fn crossing_index(&self) -> usize {
        self.crossing_index
    }

    pub fn capacity(&self) -> f64 {
        self.tilde.iter().sum()
    }

    /// Positions held by landing-page sub-slots.
    pub fn forked_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.provenance
            .iter()
            .enumerate()
            .filter(|(_, o)| matches!(o, SlotOrigin::Forked(_)))
            .map(|(i, _)| i + 1)
    }
}

pub fn fork(curve: &SlotCurve, spec: &ForkSpec) -> Result<MergedCurve, ForkError> {
    fork_with(curve, spec, TiePolicy::Reject)
}

pub fn fork_with(
    curve: &SlotCurve,
    spec: &ForkSpec,
    policy: TiePolicy,
) -> Result<MergedCurve, ForkError> {
    spec.validate(curve)?;
    let k = curve.slots();
    let l = spec.slot;
    let gamma_l = curve.gamma(l);

    let mut entries: Vec<(f64, SlotOrigin)> = (1..=k)
        .filter(|&j| j != l)
        .map(|j| (curve.gamma(j), SlotOrigin::Original(j)))
        .chain(
            (1..=spec.extra_slots)
                .map(|sub| (gamma_l * spec.fitness * curve.gamma(sub), SlotOrigin::Forked(sub))),
        )
        .collect();

    // Originals precede forked entries and each group is already in
    // decreasing order, so a stable sort puts originals first on ties.
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));

    if policy == TiePolicy::Reject {
        if let Some(idx) = entries.windows(2).position(|w| w[0].0 == w[1].0) {
            return Err(ForkError::Tie {
                value: entries[idx].0,
                first: entries[idx].1,
                second: entries[idx + 1].1,
            });
        }
    }

    let top_forked = gamma_l * spec.fitness * curve.gamma(1);
    let crossing_index = (1..=k)
        .filter(|&i| top_forked < curve.gamma(i))
        .max()
        .unwrap_or(0);

    let (tilde, provenance) = entries.into_iter().unzip();
    Ok(MergedCurve {
        spec: *spec,
        tilde,
        provenance,
        crossing_index,
    })
}

/// Sum of position CTRs.
pub fn capacity(gammas: &[f64]) -> f64 {
    gammas.iter().sum()
}
