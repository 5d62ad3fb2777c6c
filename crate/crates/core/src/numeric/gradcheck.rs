use super::Matrix;
use crate::error::{Error, Result};

/// Compares an analytic gradient with central differences of `f`.
///
/// Each coordinate of `params` is perturbed by `±h` in turn. Returns the
/// largest relative error, where the denominator for a coordinate is
/// `max(|analytic|, |numeric|, 1e-8)`.
pub fn finite_diff_check<F>(
    mut f: F,
    params: &Matrix<f64>,
    analytic_grad: &Matrix<f64>,
    h: f64,
) -> Result<f64>
where
    F: FnMut(&Matrix<f64>) -> f64,
{
    if params.shape() != analytic_grad.shape() {
        return Err(Error::shape(format!(
            "params {:?} vs gradient {:?}",
            params.shape(),
            analytic_grad.shape()
        )));
    }
    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for idx in 0..params.as_slice().len() {
        let orig = params.as_slice()[idx];
        probe.as_mut_slice()[idx] = orig + h;
        let up = f(&probe);
        probe.as_mut_slice()[idx] = orig - h;
        let down = f(&probe);
        probe.as_mut_slice()[idx] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFiniteLoss);
        }
        let numeric = (up - down) / (2.0 * h);
        let analytic = analytic_grad.as_slice()[idx];
        let denom = analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix<f64> {
        Matrix::from_vec(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn square_at_three() {
        let err =
            finite_diff_check(|p| p.get(0, 0).powi(2), &scalar(3.0), &scalar(6.0), 1e-5).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn constant_function() {
        let err = finite_diff_check(|_| 4.2, &scalar(1.0), &scalar(0.0), 1e-5).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn doubled_gradient_is_detected() {
        // analytic 12 vs numeric 6: |12 - 6| / 12
        let err =
            finite_diff_check(|p| p.get(0, 0).powi(2), &scalar(3.0), &scalar(12.0), 1e-5).unwrap();
        assert!((err - 0.5).abs() < 1e-6, "{err}");
        // same check expressed against a doubled gradient of a vector function
        let p = Matrix::from_vec(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let g = Matrix::from_vec(1, 3, vec![4.0, -8.0, 2.0]).unwrap();
        let err =
            finite_diff_check(|q| q.as_slice().iter().map(|v| v * v).sum(), &p, &g, 1e-5).unwrap();
        assert!(err > 0.4, "{err}");
    }

    #[test]
    fn non_finite_loss() {
        let r = finite_diff_check(|_| f64::NAN, &scalar(1.0), &scalar(0.0), 1e-5);
        assert!(matches!(r, Err(Error::NonFiniteLoss)));
    }
}
