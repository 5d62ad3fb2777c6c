use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Logistic function in the branch form that never evaluates `exp` of a
/// large positive argument.
#[inline]
pub fn sigmoid_scalar<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub fn sigmoid<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    x.map(sigmoid_scalar)
}

pub fn tanh<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    x.map(T::tanh)
}

pub fn relu<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

pub fn hadamard<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "hadamard {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| x * y)
        .collect();
    Matrix::from_vec(a.rows(), a.cols(), data)
}

/// Row-wise concatenation `[h | x]`: each output row is the matching row of
/// `h` followed by the matching row of `x`.
pub fn hconcat<T: Scalar>(h: &Matrix<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    if h.rows() != x.rows() {
        return Err(Error::shape(format!(
            "concat needs equal batch size, got {} and {}",
            h.rows(),
            x.rows()
        )));
    }
    let cols = h.cols() + x.cols();
    let mut data = Vec::with_capacity(h.rows() * cols);
    for r in 0..h.rows() {
        data.extend_from_slice(h.row(r));
        data.extend_from_slice(x.row(r));
    }
    Matrix::from_vec(h.rows(), cols, data)
}

/// Rank-3 activation laid out `[batch, channels, time]`, time fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T = f32> {
    batch: usize,
    channels: usize,
    time: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor3<T> {
    pub fn zeros(batch: usize, channels: usize, time: usize) -> Self {
        Tensor3 {
            batch,
            channels,
            time,
            data: vec![T::zero(); batch * channels * time],
        }
    }

    pub fn from_vec(batch: usize, channels: usize, time: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != batch * channels * time {
            return Err(Error::shape(format!(
                "{} values cannot fill [{batch}, {channels}, {time}]",
                data.len()
            )));
        }
        Ok(Tensor3 {
            batch,
            channels,
            time,
            data,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.batch, self.channels, self.time]
    }

    #[inline]
    pub fn get(&self, b: usize, c: usize, t: usize) -> T {
        self.data[(b * self.channels + c) * self.time + t]
    }

    #[inline]
    pub fn set(&mut self, b: usize, c: usize, t: usize, v: T) {
        self.data[(b * self.channels + c) * self.time + t] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Global average pooling over the time axis: `[batch, channels, time]` to
/// `[batch, channels]`.
pub fn mean_over_time<T: Scalar>(x: &Tensor3<T>) -> Result<Matrix<T>> {
    if x.time == 0 {
        return Err(Error::EmptyTimeAxis);
    }
    let inv = T::one() / T::from_usize(x.time).unwrap();
    let mut out = Matrix::zeros(x.batch, x.channels);
    for (dst, series) in out.as_mut_slice().iter_mut().zip(x.data.chunks(x.time)) {
        let s: T = series.iter().copied().sum();
        *dst = s * inv;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn activation_fixed_points() {
        let z = Matrix::<f32>::zeros(1, 1);
        assert_eq!(sigmoid(&z).as_slice(), &[0.5]);
        assert_eq!(tanh(&z).as_slice(), &[0.0]);
        let r = relu(&Matrix::from_vec(1, 2, vec![-3.0f32, 2.0]).unwrap());
        assert_eq!(r.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn sigmoid_saturates_without_nan() {
        let x = Matrix::from_vec(1, 4, vec![-1e4f32, -100.0, 100.0, 1e4]).unwrap();
        let s = sigmoid(&x);
        assert!(s.is_finite());
        assert_eq!(s.as_slice()[0], 0.0);
        assert_eq!(s.as_slice()[3], 1.0);
    }

    #[test]
    fn hadamard_cases() {
        let a = Matrix::from_vec(1, 2, vec![1.0f32, 2.0]).unwrap();
        let b = Matrix::from_vec(1, 2, vec![3.0f32, 4.0]).unwrap();
        assert_eq!(hadamard(&a, &b).unwrap().as_slice(), &[3.0, 8.0]);
        assert_eq!(hadamard(&a, &Matrix::filled(1, 2, 1.0)).unwrap(), a);
        assert_eq!(
            hadamard(&a, &Matrix::zeros(1, 2)).unwrap(),
            Matrix::zeros(1, 2)
        );
        assert!(hadamard(&a, &Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn concat_widths() {
        let h = Matrix::<f32>::zeros(1, 50);
        let x = Matrix::<f32>::zeros(1, 66);
        assert_eq!(hconcat(&h, &x).unwrap().shape(), (1, 116));

        let h = Matrix::from_vec(2, 2, vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(hconcat(&h, &Matrix::zeros(2, 0)).unwrap(), h);
        assert!(hconcat(&h, &Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn concat_places_h_first() {
        let h = Matrix::from_vec(2, 1, vec![1.0f32, 2.0]).unwrap();
        let x = Matrix::from_vec(2, 2, vec![10.0f32, 11.0, 20.0, 21.0]).unwrap();
        let c = hconcat(&h, &x).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 10.0, 11.0, 2.0, 20.0, 21.0]);
    }

    #[test]
    fn mean_over_time_cases() {
        let one = Tensor3::from_vec(1, 2, 1, vec![4.0f32, -1.0]).unwrap();
        assert_eq!(mean_over_time(&one).unwrap().as_slice(), &[4.0, -1.0]);

        let ramp = Tensor3::from_vec(1, 1, 3, vec![1.0f32, 2.0, 3.0]).unwrap();
        assert_eq!(mean_over_time(&ramp).unwrap().as_slice(), &[2.0]);

        let c = 0.375f32;
        let flat = Tensor3::from_vec(2, 1, 13, vec![c; 26]).unwrap();
        assert_eq!(mean_over_time(&flat).unwrap().as_slice(), &[c, c]);

        let empty = Tensor3::<f32>::zeros(1, 3, 0);
        assert!(matches!(mean_over_time(&empty), Err(Error::EmptyTimeAxis)));
    }

    proptest! {
        #[test]
        fn activation_ranges(v in -1e6f64..1e6) {
            let m = Matrix::from_vec(1, 1, vec![v]).unwrap();
            let s = sigmoid(&m).as_slice()[0];
            let t = tanh(&m).as_slice()[0];
            // the open interval is only representable away from saturation
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((-1.0..=1.0).contains(&t));
            if v.abs() < 30.0 {
                prop_assert!(s > 0.0 && s < 1.0);
            }
            if v.abs() < 15.0 {
                prop_assert!(t > -1.0 && t < 1.0);
            }
            prop_assert!(relu(&m).as_slice()[0] >= 0.0);
        }
    }
}
