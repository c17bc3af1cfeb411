use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::rng::RngStream;

/// Floating point scalar the samplers are generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Uniform on `[0, 1)`.
    fn draw_unit(rng: &mut RngStream) -> Self;
    /// Uniform on `(0, 1)`.
    fn draw_open01(rng: &mut RngStream) -> Self;

    fn half() -> Self {
        Self::from_f64(0.5).unwrap()
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }
}

impl Real for f32 {
    fn draw_unit(rng: &mut RngStream) -> Self {
        rng.uniform()
    }

    fn draw_open01(rng: &mut RngStream) -> Self {
        rng.open01()
    }
}

impl Real for f64 {
    fn draw_unit(rng: &mut RngStream) -> Self {
        rng.uniform()
    }

    fn draw_open01(rng: &mut RngStream) -> Self {
        rng.open01()
    }
}
