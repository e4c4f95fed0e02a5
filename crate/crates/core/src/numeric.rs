// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction for the real-valued parts of the models.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used for ratios, fitted parameters and analytic
/// expectations. Implemented for `f32` and `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts")
    }

    fn of_u64(x: u64) -> Self {
        Self::from_u64(x).expect("u64 converts")
    }
}

impl Real for f32 {}
impl Real for f64 {}
