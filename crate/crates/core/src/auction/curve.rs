use serde::Serialize;

use super::AuctionError;

/// Position click-through rates `γ_1 > γ_2 > ... > γ_K`.
///
/// Positions are 1-based. Any position beyond `K` has CTR zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SlotCurve {
    gammas: Vec<f64>,
}

impl SlotCurve {
    pub fn new(gammas: Vec<f64>) -> Result<Self, AuctionError> {
        for (idx, &g) in gammas.iter().enumerate() {
            if !(g > 0.0 && g <= 1.0) {
                return Err(AuctionError::InvalidCtr {
                    position: idx + 1,
                    value: g,
                });
            }
        }
        for (idx, pair) in gammas.windows(2).enumerate() {
            if pair[0] <= pair[1] {
                return Err(AuctionError::CurveNotDecreasing { position: idx + 1 });
            }
        }
        Ok(Self { gammas })
    }

    /// `γ_j = γ_1 · ratio^(j-1)` for `j = 1..=slots`.
    pub fn geometric(slots: usize, top: f64, ratio: f64) -> Result<Self, AuctionError> {
        let gammas = (0..slots).map(|j| top * ratio.powi(j as i32)).collect();
        Self::new(gammas)
    }

    pub fn empty() -> Self {
        Self { gammas: Vec::new() }
    }

    /// Number of slots `K`.
    pub fn slots(&self) -> usize {
        self.gammas.len()
    }

    /// CTR of a 1-based position; zero outside `1..=K`.
    pub fn gamma(&self, position: usize) -> f64 {
        gamma_at(&self.gammas, position)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gammas
    }

    pub fn capacity(&self) -> f64 {
        self.gammas.iter().sum()
    }
}

/// 1-based lookup into a CTR vector, zero outside the stored range.
pub(crate) fn gamma_at(gammas: &[f64], position: usize) -> f64 {
    if position == 0 {
        return 0.0;
    }
    gammas.get(position - 1).copied().unwrap_or(0.0)
}

/// 1-based lookup into a score vector, zero-padded beyond its end.
pub(crate) fn score_at(scores: &[f64], position: usize) -> f64 {
    gamma_at(scores, position)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_decreasing() {
        assert!(matches!(
            SlotCurve::new(vec![0.5, 0.5]),
            Err(AuctionError::CurveNotDecreasing { position: 1 })
        ));
        assert!(SlotCurve::new(vec![0.4, 0.6]).is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SlotCurve::new(vec![1.2]).is_err());
        assert!(SlotCurve::new(vec![0.5, 0.0]).is_err());
        assert!(SlotCurve::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn zero_beyond_k() {
        let c = SlotCurve::new(vec![1.0, 0.6]).unwrap();
        assert_eq!(c.gamma(1), 1.0);
        assert_eq!(c.gamma(3), 0.0);
        assert_eq!(c.gamma(0), 0.0);
        assert_eq!(c.slots(), 2);
    }

    #[test]
    fn geometric_curve() {
        let c = SlotCurve::geometric(3, 1.0, 0.5).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 0.5, 0.25]);
        assert_eq!(c.capacity(), 1.75);
    }
}
