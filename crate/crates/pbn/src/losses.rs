//! Loss functions shared by every risk estimator: the logistic surrogate used
//! for training and the 0-1 loss used for evaluation and the
//! false-negative-rate criterion.

/// Logistic loss `ℓ(z) = log(1 + e^{−z})`, evaluated in the numerically
/// stable form `max(−z, 0) + log1p(e^{−|z|})` so that margins scaled by
/// weights up to 99 neither overflow nor lose precision.
///
/// The input must be finite (callers validate data once at the boundary).
#[inline]
pub fn logistic_loss(z: f64) -> f64 {
    debug_assert!(z.is_finite(), "logistic_loss expects finite input");
    z.max(0.0) - z + (-z.abs()).exp().ln_1p()
}

/// Derivative of the logistic loss: `ℓ'(z) = −1 / (1 + e^{z})`, always in
/// `(−1, 0)`. Evaluated branch-wise to avoid overflow of `e^{z}`.
#[inline]
pub fn logistic_loss_grad(z: f64) -> f64 {
    debug_assert!(z.is_finite(), "logistic_loss_grad expects finite input");
    if z >= 0.0 {
        let e = (-z).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + z.exp())
    }
}

/// 0-1 loss `ℓ01(z) = (1 − sign(z)) / 2` with `sign(0) = 0`, so a zero margin
/// costs 1/2. This is the evaluation convention; the classifier's prediction
/// tie rule (zero margin → +1) lives in [`crate::core`].
#[inline]
pub fn zero_one_loss(z: f64) -> f64 {
    if z > 0.0 {
        0.0
    } else if z < 0.0 {
        1.0
    } else {
        0.5
    }
}
