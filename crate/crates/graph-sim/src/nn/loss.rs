//! Class-weighted binary cross-entropy.

use super::layers::sigmoid;

/// Probability clamp applied before the logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
pub struct ClassWeights {
    pub positive: f64,
    pub negative: f64,
}

impl Default for ClassWeights {
    fn default() -> Self {
        ClassWeights {
            positive: 1.0,
            negative: 1.0,
        }
    }
}

impl ClassWeights {
    /// Negative-to-positive sample ratio on the positive class.
    pub fn from_counts(n_pos: usize, n_neg: usize) -> Self {
        ClassWeights {
            positive: n_neg as f64 / n_pos as f64,
            negative: 1.0,
        }
    }
}

/// Weighted BCE of a single prediction. `y` must be 0 or 1.
pub fn bce_loss(p: f64, y: u8, weights: ClassWeights) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if y == 1 {
        -weights.positive * p.ln()
    } else {
        -weights.negative * (1.0 - p).ln()
    }
}

/// Mean weighted BCE over a batch of (probability, label) pairs.
pub fn bce_loss_batch(pairs: &[(f64, u8)], weights: ClassWeights) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.iter().map(|(p, y)| bce_loss(*p, *y, weights)).sum::<f64>() / pairs.len() as f64
}

/// Loss and its gradient with respect to the logit, composing the logistic
/// and the clamped log exactly as the forward evaluation does (the clamp
/// kills the gradient in saturation, matching finite differences).
pub fn bce_with_logit(logit: f64, y: u8, weights: ClassWeights) -> (f64, f64) {
    let p_raw = sigmoid(logit);
    let loss = bce_loss(p_raw, y, weights);
    let clamped = p_raw < PROB_CLAMP || p_raw > 1.0 - PROB_CLAMP;
    if clamped {
        return (loss, 0.0);
    }
    let dp = if y == 1 {
        -weights.positive / p_raw
    } else {
        weights.negative / (1.0 - p_raw)
    };
    (loss, dp * p_raw * (1.0 - p_raw))
}
