//! Reward for moving a token's state to a label.
//!
//! `r = tanh(ln(‖o_true − p‖₂ / (‖o_state − o_true‖₂ + ε)))`
//!
//! The numerator is floored at the smallest positive normal `f64` so an
//! exactly one-hot correct base prediction evaluates to `tanh(very negative)
//! = −1` instead of `tanh(−∞)`.

use crate::corpus::LabelId;
use crate::error::{Error, Result};
use crate::tagger::check_distribution;

pub const DEFAULT_REWARD_EPSILON: f64 = 1e-8;

pub fn one_hot(label: LabelId, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[label.index()] = 1.0;
    v
}

fn check_one_hot(v: &[f64], what: &str) -> Result<()> {
    let ones = v.iter().filter(|&&x| x == 1.0).count();
    let zeros = v.iter().filter(|&&x| x == 0.0).count();
    if ones != 1 || ones + zeros != v.len() {
        return Err(Error::InvalidDistribution(format!("{what} is not a one-hot vector")));
    }
    Ok(())
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn reward(o_true: &[f64], o_state: &[f64], p: &[f64], epsilon: f64) -> Result<f64> {
    if o_state.len() != o_true.len() || p.len() != o_true.len() {
        return Err(Error::DimensionMismatch {
            expected: o_true.len(),
            got: if o_state.len() != o_true.len() { o_state.len() } else { p.len() },
        });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!("reward epsilon must be positive, got {epsilon}")));
    }
    check_one_hot(o_true, "true label")?;
    check_one_hot(o_state, "state label")?;
    check_distribution(p)?;
    let prediction_error = l2_distance(o_true, p).max(f64::MIN_POSITIVE);
    let state_error = l2_distance(o_state, o_true);
    Ok((prediction_error / (state_error + epsilon)).ln().tanh())
}

/// [`reward`] with labels given as indices.
pub fn reward_for_labels(truth: LabelId, state: LabelId, p: &[f64], epsilon: f64) -> Result<f64> {
    let w = p.len();
    if truth.index() >= w || state.index() >= w {
        return Err(Error::IndexOutOfRange {
            index: truth.index().max(state.index()),
            len: w,
        });
    }
    reward(&one_hot(truth, w), &one_hot(state, w), p, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        // |(0.4, -0.3, -0.1)| = sqrt(0.26); |(−1, 1, 0)| = sqrt(2)
        let r = reward_for_labels(LabelId(0), LabelId(1), &[0.6, 0.3, 0.1], 1e-8).unwrap();
        let expected = (0.26f64.sqrt() / (2f64.sqrt() + 1e-8)).ln().tanh();
        assert!((r - expected).abs() < 1e-15);
        // tanh(ln x) = (x^2 - 1) / (x^2 + 1) with x^2 = 0.13
        assert!((r - (0.13 - 1.0) / 1.13).abs() < 1e-7, "{r}");
        assert!((r - (-0.7700)).abs() < 1e-4, "{r}");
    }

    #[test]
    fn perfect_prediction_with_correct_state_is_minus_one() {
        let r = reward_for_labels(LabelId(2), LabelId(2), &[0.0, 0.0, 1.0], 1e-8).unwrap();
        assert!((r + 1.0).abs() < 1e-6);
        assert!(r.is_finite());
    }

    #[test]
    fn wrong_prediction_with_correct_state_is_plus_one() {
        let r = reward_for_labels(LabelId(0), LabelId(0), &[0.3, 0.7], 1e-8).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        assert!(reward(&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.6], 1e-8).is_err());
        assert!(reward(&[1.0, 1.0], &[0.0, 1.0], &[0.5, 0.5], 1e-8).is_err());
        assert!(reward(&[1.0, 0.0], &[0.0, 0.5], &[0.5, 0.5], 1e-8).is_err());
        assert!(reward(&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.5], 0.0).is_err());
        assert!(reward(&[1.0, 0.0, 0.0], &[0.0, 1.0], &[0.5, 0.5], 1e-8).is_err());
    }

    #[test]
    fn monotone_in_prediction_error() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=10 {
            let q = k as f64 / 10.0;
            let r = reward_for_labels(LabelId(0), LabelId(1), &[1.0 - q, q], 1e-8).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }
}
