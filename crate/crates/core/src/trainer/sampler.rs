use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::graph::NodeId;

/// Draws nodes with probability proportional to `degree^alpha`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    probabilities: Vec<f64>,
    index: WeightedIndex<f64>,
}

/// `degree^alpha` normalised to sum to one. `0^0` is taken as 1, so
/// `alpha = 0` is uniform over every node including isolated ones.
pub fn degree_power_weights(degrees: &[usize], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    let raw: Vec<f64> = degrees
        .iter()
        .map(|&d| if alpha == 0.0 { 1.0 } else { (d as f64).powf(alpha) })
        .collect();
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(invalid("sampling distribution has no mass"));
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

impl NegativeSampler {
    pub fn new(degrees: &[usize], alpha: f64) -> Result<NegativeSampler> {
        let probabilities = degree_power_weights(degrees, alpha)?;
        let index = WeightedIndex::new(&probabilities).map_err(|e| invalid(e.to_string()))?;
        Ok(NegativeSampler { probabilities, index })
    }

    pub fn uniform(n: usize) -> Result<NegativeSampler> {
        Self::new(&vec![0; n], 0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        self.index.sample(rng) as NodeId
    }
}
