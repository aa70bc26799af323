//! Scenario files: one JSON document describing a slot curve, bidders, an
//! optional bid profile, and optional fork and mediator settings.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auction::{AuctionError, BidProfile, Bidder, BidderId, SlotCurve};
use crate::capacity::ForkSpec;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: field `{field}`: {message}")]
    Invalid {
        path: String,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidderSpec {
    pub id: u32,
    pub value: f64,
    #[serde(default = "one")]
    pub relevance: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidSpec {
    pub id: u32,
    pub bid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForkBlock {
    pub l: usize,
    #[serde(rename = "L")]
    pub extra: usize,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediatorBlock {
    pub m_ids: Vec<u32>,
    pub share: f64,
    #[serde(default)]
    pub strategy: Option<String>,
}

/// On-disk layout. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub gammas: Vec<f64>,
    pub bidders: Vec<BidderSpec>,
    #[serde(default)]
    pub bids: Option<Vec<BidSpec>>,
    #[serde(default)]
    pub reserve: Option<f64>,
    #[serde(default)]
    pub fork: Option<ForkBlock>,
    #[serde(default)]
    pub mediator: Option<MediatorBlock>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub source: String,
    pub curve: SlotCurve,
    pub bidders: Vec<Bidder>,
    pub profile: Option<BidProfile>,
    pub reserve: f64,
    pub fork: Option<ForkSpec>,
    pub mediator: Option<MediatorBlock>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses scenario text; `source` only labels diagnostics.
    pub fn parse(text: &str, source: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
                path: source.to_string(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        Self::from_file(file, source)
    }

    pub fn from_file(file: ScenarioFile, source: &str) -> Result<Self, ScenarioError> {
        let invalid = |field: &str, message: String| ScenarioError::Invalid {
            path: source.to_string(),
            field: field.to_string(),
            message,
        };
        let auction = |field: &str| {
            let field = field.to_string();
            move |e: AuctionError| ScenarioError::Invalid {
                path: source.to_string(),
                field,
                message: e.to_string(),
            }
        };

        if file.gammas.is_empty() {
            return Err(invalid("gammas", "must not be empty".into()));
        }
        let curve = SlotCurve::new(file.gammas.clone()).map_err(auction("gammas"))?;
        if file.bidders.is_empty() {
            return Err(invalid("bidders", "must not be empty".into()));
        }

        let mut ids = BTreeSet::new();
        let mut bidders = Vec::with_capacity(file.bidders.len());
        for (idx, b) in file.bidders.iter().enumerate() {
            if !ids.insert(b.id) {
                return Err(invalid(&format!("bidders[{idx}].id"), format!("duplicate id {}", b.id)));
            }
            bidders.push(
                Bidder::new(b.id, b.value, b.relevance)
                    .map_err(auction(&format!("bidders[{idx}]")))?,
            );
        }

        let reserve = file.reserve.unwrap_or(0.0);
        let profile = match &file.bids {
            None => None,
            Some(bids) => {
                for (idx, bid) in bids.iter().enumerate() {
                    if !ids.contains(&bid.id) {
                        return Err(invalid(
                            &format!("bids[{idx}].id"),
                            format!("unknown bidder {}", bid.id),
                        ));
                    }
                }
                let pairs: Vec<(BidderId, f64)> =
                    bids.iter().map(|b| (BidderId(b.id), b.bid)).collect();
                let profile = BidProfile::from_bids(&bidders, &pairs)
                    .and_then(|p| p.with_reserve(reserve))
                    .map_err(auction("bids"))?;
                if let Some(missing) = ids.iter().find(|id| profile.entry(BidderId(**id)).is_none())
                {
                    return Err(invalid("bids", format!("no bid for bidder {missing}")));
                }
                Some(profile)
            }
        };
        if !(reserve >= 0.0 && reserve.is_finite()) {
            return Err(invalid("reserve", format!("{reserve} must be non-negative")));
        }

        let fork = file.fork.as_ref().map(|f| ForkSpec::new(f.l, f.extra, f.f));
        if let Some(spec) = &fork {
            spec.validate(&curve)
                .map_err(|e| invalid("fork", e.to_string()))?;
        }

        if let Some(m) = &file.mediator {
            if let Some(id) = m.m_ids.iter().find(|id| !ids.contains(id)) {
                return Err(invalid("mediator.m_ids", format!("unknown bidder {id}")));
            }
            if let Some(s) = &m.strategy {
                s.parse::<crate::mediator::Strategy>()
                    .map_err(|e| invalid("mediator.strategy", e))?;
            }
        }

        Ok(Self {
            source: source.to_string(),
            curve,
            bidders,
            profile,
            reserve,
            fork,
            mediator: file.mediator,
        })
    }

    pub fn require_profile(&self) -> Result<&BidProfile, ScenarioError> {
        self.profile.as_ref().ok_or_else(|| ScenarioError::Invalid {
            path: self.source.clone(),
            field: "bids".into(),
            message: "this command needs a bid profile".into(),
        })
    }
}
