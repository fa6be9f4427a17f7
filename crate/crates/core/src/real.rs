use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Scalar type the field layer is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; every constant in the field layer goes through here.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap()
    }

    fn to_le_bytes_f64(self) -> [u8; 8] {
        self.to_f64_lossy().to_le_bytes()
    }
}

impl Real for f32 {}
impl Real for f64 {}
