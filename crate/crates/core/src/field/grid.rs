use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cubic periodic lattice with `n` points per axis and period 2π.
///
/// Samples are stored x₁-fastest: `index = i1 + n * (i2 + n * i3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealias(n, 2.0 / 3.0)
    }

    pub fn with_dealias(n: usize, dealias_fraction: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {dealias_fraction} outside (0, 1]"
            )));
        }
        Ok(GridSpec {
            n,
            dealias_fraction,
        })
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.n * (i2 + self.n * i3)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let c = self.coords(idx);
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Signed wavenumber of FFT bin `i`; the Nyquist bin maps to `-n/2`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Wavenumber with the Nyquist bin zeroed, used by every odd-order operator.
    #[inline]
    pub fn kappa(&self, i: usize) -> f64 {
        if self.is_nyquist(i) {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    /// Largest retained |k_i| after dealiasing.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * (self.n / 2) as f64
    }

    /// Bin of a signed wavenumber, if it is representable without aliasing.
    pub fn bin(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k.abs() >= half {
            return None;
        }
        Some(k.rem_euclid(self.n as i64) as usize)
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch(self.n, other.n));
        }
        Ok(())
    }
}
