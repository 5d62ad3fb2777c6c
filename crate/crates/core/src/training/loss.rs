use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// Mean binary cross-entropy and its gradient with respect to each
/// probability. Probabilities are clamped to `[eps, 1 - eps]` first and the
/// gradient is taken at the clamped value.
pub fn bce_loss<T: Scalar>(p: &[T], y: &[u8], eps: T) -> Result<(T, Vec<T>)> {
    if p.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: y.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let one = T::one();
    let n = T::from_usize(p.len()).unwrap();
    let mut total = T::zero();
    let mut grad = Vec::with_capacity(p.len());
    for (&pi, &yi) in p.iter().zip(y) {
        let pc = pi.max(eps).min(one - eps);
        if yi == 1 {
            total -= pc.ln();
            grad.push(-(one / pc) / n);
        } else {
            total -= (one - pc).ln();
            grad.push((one / (one - pc)) / n);
        }
    }
    Ok((total / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_flip_loss_is_ln2() {
        let (l, g) = bce_loss(&[0.5f64], &[1], 1e-7).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((g[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_prediction_under_clamp() {
        let eps = 1e-7;
        let (l, _) = bce_loss(&[1.0 - eps, 1.0], &[1, 1], eps).unwrap();
        assert!(l <= 1.1e-7, "{l}");
        let (l, _) = bce_loss(&[0.0f64], &[0], eps).unwrap();
        assert!(l <= 1.1e-7, "{l}");
    }

    #[test]
    fn two_sample_mean() {
        // (-ln 0.9 - ln 0.9) / 2
        let (l, _) = bce_loss(&[0.9f64, 0.1], &[1, 0], 1e-7).unwrap();
        assert!((l - 0.105_360_515_657_826_3).abs() < 1e-12, "{l}");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            bce_loss::<f32>(&[], &[], 1e-7),
            Err(Error::EmptyBatch)
        ));
        assert!(matches!(
            bce_loss(&[0.5f32], &[1, 0], 1e-7),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gradient_matches_central_difference() {
        let y = [1u8, 0, 1];
        let p = [0.3f64, 0.6, 0.8];
        let (_, g) = bce_loss(&p, &y, 1e-7).unwrap();
        for k in 0..3 {
            let mut up = p;
            let mut down = p;
            up[k] += 1e-6;
            down[k] -= 1e-6;
            let num =
                (bce_loss(&up, &y, 1e-7).unwrap().0 - bce_loss(&down, &y, 1e-7).unwrap().0) / 2e-6;
            assert!((num - g[k]).abs() < 1e-6);
        }
    }
}
