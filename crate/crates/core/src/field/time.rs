use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use super::{Field, GridSpec};
use crate::error::Result;
use crate::real::Real;

type Evaluator<F> = dyn Fn(f64) -> Result<F> + Send + Sync;

/// A field depending on time, zero outside a closed support interval.
///
/// Evaluations are memoized by the exact bits of `t` in a small FIFO cache.
pub struct TimeField<F> {
    grid: GridSpec,
    support: (f64, f64),
    evaluator: Arc<Evaluator<F>>,
    memo: Mutex<VecDeque<(u64, Arc<F>)>>,
    capacity: usize,
}

impl<F> TimeField<F> {
    pub fn new(
        grid: GridSpec,
        support: (f64, f64),
        evaluator: impl Fn(f64) -> Result<F> + Send + Sync + 'static,
    ) -> Self {
        TimeField {
            grid,
            support,
            evaluator: Arc::new(evaluator),
            memo: Mutex::new(VecDeque::new()),
            capacity: 4,
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn in_support(&self, t: f64) -> bool {
        t >= self.support.0 && t <= self.support.1
    }

    pub fn clear(&self) {
        self.memo.lock().unwrap().clear();
    }
}

impl<F> TimeField<F> {
    pub fn eval<T: Real>(&self, t: f64) -> Result<Arc<F>>
    where
        F: Field<T>,
    {
        if !self.in_support(t) {
            return Ok(Arc::new(F::zeros(&self.grid)));
        }
        let key = t.to_bits();
        if let Some((_, f)) = self.memo.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(f.clone());
        }
        let f = Arc::new((self.evaluator)(t)?);
        let mut memo = self.memo.lock().unwrap();
        if self.capacity > 0 {
            if memo.len() >= self.capacity {
                memo.pop_front();
            }
            memo.push_back((key, f.clone()));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn memoized_and_zero_outside_support() {
        let g = GridSpec::new(8).unwrap();
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let tf = TimeField::new(g, (-0.5, 0.5), move |t| {
            c.fetch_add(1, Ordering::SeqCst);
            Ok(ScalarField::<f64>::constant(&g, t + 1.0))
        });
        let a = tf.eval(0.25).unwrap();
        let b = tf.eval(0.25).unwrap();
        assert_eq!(a.data, b.data);
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        let z = tf.eval(0.75).unwrap();
        assert!(z.data.iter().all(|&x| x == 0.0));
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }
}
