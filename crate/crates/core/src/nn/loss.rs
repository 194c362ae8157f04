/// Probabilities are clamped to `[ε, 1 − ε]` before taking logarithms.
pub const PROB_EPSILON: f64 = 1e-12;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of predicted probability `p` against target `y`.
pub fn loss_bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

pub fn bce_mean(probs: &[f64], targets: &[f64]) -> f64 {
    let total: f64 = probs.iter().zip(targets).map(|(&p, &y)| loss_bce(p, y)).sum();
    total / probs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        assert!((loss_bce(0.5, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((loss_bce(0.5, 1.0) - 0.693147).abs() < 1e-6);
        assert!(loss_bce(1.0 - PROB_EPSILON, 1.0) < 1e-11);
        assert!((loss_bce(0.9, 0.0) - 2.302585).abs() < 1e-6);
    }

    #[test]
    fn clamping_keeps_loss_finite() {
        assert!(loss_bce(0.0, 1.0).is_finite());
        assert!(loss_bce(1.0, 0.0).is_finite());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }
}
