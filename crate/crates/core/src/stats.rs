//! Mean and sample standard deviation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Mean ± sample (n − 1) standard deviation over `n` observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MeanStd<T> {
    pub mean: T,
    pub std: T,
    pub n: usize,
}

/// Two-pass mean and sample standard deviation; `std` is zero for a single
/// observation. Returns `None` for empty input.
pub fn mean_std<T: Scalar>(values: &[T]) -> Option<MeanStd<T>> {
    if values.is_empty() {
        return None;
    }
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let std = if values.len() < 2 {
        T::zero()
    } else {
        let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        (ss / (n - T::one())).sqrt()
    };
    Some(MeanStd {
        mean,
        std,
        n: values.len(),
    })
}

impl<T: Scalar> fmt::Display for MeanStd<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let precision = f.precision().unwrap_or(1);
        write!(
            f,
            "{:.*} ± {:.*}",
            precision,
            self.mean.to_f64_lossy(),
            precision,
            self.std.to_f64_lossy()
        )
    }
}
