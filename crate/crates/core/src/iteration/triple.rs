use std::sync::Arc;

use super::flow::Profile;
use super::stage::StepContext;
use crate::field::{GridSpec, TimeField};
use crate::{ScalarField, TensorField, VectorField};

/// v(x, t) = profile(t)·shape(x)
#[derive(Clone)]
pub struct Separable {
    pub profile: Profile,
    pub shape: VectorField,
}

/// One stage (v_q, p_q, R̊_q) of the construction.
pub struct EulerReynoldsTriple {
    pub q: usize,
    pub grid: GridSpec,
    /// closed time interval outside which v, p and R̊ vanish
    pub support: (f64, f64),
    pub v: TimeField<VectorField>,
    pub p: TimeField<ScalarField>,
    pub r: TimeField<TensorField>,
    /// exact ∂_t v when it is available in closed form
    pub dv_dt: Option<TimeField<VectorField>>,
    pub separable: Option<Separable>,
    /// internals of the step that produced this stage
    pub step: Option<Arc<StepContext>>,
}

impl EulerReynoldsTriple {
    pub fn velocity(&self, t: f64) -> crate::Result<Arc<VectorField>> {
        self.v.eval::<f64>(t)
    }

    pub fn pressure(&self, t: f64) -> crate::Result<Arc<ScalarField>> {
        self.p.eval::<f64>(t)
    }

    pub fn stress(&self, t: f64) -> crate::Result<Arc<TensorField>> {
        self.r.eval::<f64>(t)
    }

    pub fn velocity_rate(&self, t: f64) -> crate::Result<Option<Arc<VectorField>>> {
        match &self.dv_dt {
            Some(f) => f.eval::<f64>(t).map(Some),
            None => Ok(None),
        }
    }

    pub fn clear_caches(&self) {
        self.v.clear();
        self.p.clear();
        self.r.clear();
        if let Some(d) = &self.dv_dt {
            d.clear();
        }
        if let Some(s) = &self.step {
            s.clear();
        }
    }
}
