//! Periodic fields on the 3-torus and the spectral calculus on them.

mod fft;
mod grid;
pub mod eval;
pub mod mollify;
pub mod norms;
pub mod ops;
pub mod snapshot;
pub mod time;

pub use fft::Fft3;
pub use grid::GridSpec;
pub use mollify::{mollifier_symbol, mollify, Mollified};
pub use norms::{c0_norm, cn_norm, energy, holder_norm, holder_seminorm, mean};
pub use ops::{
    curl, dealias, derivative_field, divergence, divergence_tensor, gradient, leray_project,
    spectral_derivative, sym_product,
};
pub use time::TimeField;

use crate::error::{Error, Result};
use crate::linalg;
use crate::real::Real;

/// Storage order of symmetric tensor components.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Position of entry (i, j) in symmetric storage.
#[inline]
pub fn sym_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Common interface of scalar, vector and symmetric-tensor fields.
pub trait Field<T: Real>: Clone + Send + Sync + Sized {
    const COMPONENTS: usize;

    fn grid(&self) -> &GridSpec;
    fn components(&self) -> &[Vec<T>];
    fn components_mut(&mut self) -> &mut [Vec<T>];
    fn from_components(grid: GridSpec, comps: Vec<Vec<T>>) -> Result<Self>;

    fn zeros(grid: &GridSpec) -> Self {
        let comps = (0..Self::COMPONENTS)
            .map(|_| vec![T::zero(); grid.len()])
            .collect();
        Self::from_components(*grid, comps).unwrap()
    }

    /// Pointwise size used by the C⁰ norm.
    fn point_norm(&self, idx: usize) -> T;

    /// Size of the difference between two lattice points, used by Hölder quotients.
    fn diff_norm(&self, a: usize, b: usize) -> T {
        let mut s = T::zero();
        for c in self.components() {
            let d = c[a] - c[b];
            s = s + d * d;
        }
        s.sqrt()
    }

    fn map_components(&self, f: impl Fn(&[T]) -> Vec<T>) -> Self {
        let comps = self.components().iter().map(|c| f(c)).collect();
        Self::from_components(*self.grid(), comps).unwrap()
    }

    fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    fn scale(&self, s: T) -> Self {
        self.map_components(|c| c.iter().map(|&x| x * s).collect())
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        let comps = self
            .components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x + y).collect())
            .collect();
        Self::from_components(*self.grid(), comps)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    /// Largest absolute componentwise difference.
    fn max_abs_diff(&self, other: &Self) -> T {
        let mut m = T::zero();
        for (a, b) in self.components().iter().zip(other.components()) {
            for (&x, &y) in a.iter().zip(b) {
                m = m.max((x - y).abs());
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T: Real> {
    pub grid: GridSpec,
    pub data: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T: Real> {
    pub grid: GridSpec,
    pub comps: [Vec<T>; 3],
}

/// Symmetric 3×3 tensor field; six stored components in [`SYM_PAIRS`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField<T: Real> {
    pub grid: GridSpec,
    pub comps: [Vec<T>; 6],
}

fn check_len<T>(grid: &GridSpec, comps: &[Vec<T>], want: usize) -> Result<()> {
    if comps.len() != want {
        return Err(Error::InvalidArgument(format!(
            "expected {want} components, got {}",
            comps.len()
        )));
    }
    if comps.iter().any(|c| c.len() != grid.len()) {
        return Err(Error::InvalidArgument(format!(
            "component length differs from n³ = {}",
            grid.len()
        )));
    }
    Ok(())
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: GridSpec, data: Vec<T>) -> Result<Self> {
        check_len(&grid, std::slice::from_ref(&data), 1)?;
        Ok(ScalarField { grid, data })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| T::lit(f(grid.point(i)))).collect();
        ScalarField { grid: *grid, data }
    }

    pub fn constant(grid: &GridSpec, c: T) -> Self {
        ScalarField {
            grid: *grid,
            data: vec![c; grid.len()],
        }
    }
}

impl<T: Real> Field<T> for ScalarField<T> {
    const COMPONENTS: usize = 1;

    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn components(&self) -> &[Vec<T>] {
        std::slice::from_ref(&self.data)
    }
    fn components_mut(&mut self) -> &mut [Vec<T>] {
        std::slice::from_mut(&mut self.data)
    }
    fn from_components(grid: GridSpec, mut comps: Vec<Vec<T>>) -> Result<Self> {
        check_len(&grid, &comps, 1)?;
        Ok(ScalarField {
            grid,
            data: comps.pop().unwrap(),
        })
    }
    fn point_norm(&self, idx: usize) -> T {
        self.data[idx].abs()
    }
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: GridSpec, comps: [Vec<T>; 3]) -> Result<Self> {
        check_len(&grid, &comps, 3)?;
        Ok(VectorField { grid, comps })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut comps: [Vec<T>; 3] = Default::default();
        for c in comps.iter_mut() {
            c.reserve(grid.len());
        }
        for i in 0..grid.len() {
            let v = f(grid.point(i));
            for a in 0..3 {
                comps[a].push(T::lit(v[a]));
            }
        }
        VectorField { grid: *grid, comps }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [T; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    /// Pointwise inner product ⟨u, w⟩.
    pub fn dot(&self, other: &Self) -> ScalarField<T> {
        let data = (0..self.grid.len())
            .map(|i| {
                self.comps[0][i] * other.comps[0][i]
                    + self.comps[1][i] * other.comps[1][i]
                    + self.comps[2][i] * other.comps[2][i]
            })
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }
}

impl<T: Real> Field<T> for VectorField<T> {
    const COMPONENTS: usize = 3;

    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn components(&self) -> &[Vec<T>] {
        &self.comps
    }
    fn components_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.comps
    }
    fn from_components(grid: GridSpec, comps: Vec<Vec<T>>) -> Result<Self> {
        check_len(&grid, &comps, 3)?;
        let comps: [Vec<T>; 3] = comps.try_into().ok().unwrap();
        Ok(VectorField { grid, comps })
    }
    fn point_norm(&self, idx: usize) -> T {
        let [a, b, c] = self.at(idx);
        (a * a + b * b + c * c).sqrt()
    }
}

impl<T: Real> TensorField<T> {
    pub fn new(grid: GridSpec, comps: [Vec<T>; 6]) -> Result<Self> {
        check_len(&grid, &comps, 6)?;
        Ok(TensorField { grid, comps })
    }

    /// Builds a symmetric field from a function returning the full matrix;
    /// the upper triangle is stored.
    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> [[f64; 3]; 3]) -> Self {
        let mut comps: [Vec<T>; 6] = Default::default();
        for i in 0..grid.len() {
            let m = f(grid.point(i));
            for (c, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                comps[c].push(T::lit(m[a][b]));
            }
        }
        TensorField { grid: *grid, comps }
    }

    pub fn constant(grid: &GridSpec, m: [f64; 6]) -> Self {
        let comps = m.map(|x| vec![T::lit(x); grid.len()]);
        TensorField { grid: *grid, comps }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [T; 6] {
        [
            self.comps[0][idx],
            self.comps[1][idx],
            self.comps[2][idx],
            self.comps[3][idx],
            self.comps[4][idx],
            self.comps[5][idx],
        ]
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &[T] {
        &self.comps[sym_index(i, j)]
    }

    pub fn trace(&self) -> ScalarField<T> {
        let data = (0..self.grid.len())
            .map(|i| self.comps[0][i] + self.comps[3][i] + self.comps[5][i])
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    /// Removes the trace pointwise.
    pub fn trace_free(&self) -> Self {
        let mut out = self.clone();
        let third = T::one() / T::lit(3.0);
        for i in 0..self.grid.len() {
            let t = (self.comps[0][i] + self.comps[3][i] + self.comps[5][i]) * third;
            out.comps[0][i] = out.comps[0][i] - t;
            out.comps[3][i] = out.comps[3][i] - t;
            out.comps[5][i] = out.comps[5][i] - t;
        }
        out
    }

    /// Adds `s(x)·Id`.
    pub fn add_identity(&mut self, s: &[T]) {
        for &d in &[0, 3, 5] {
            for (x, &y) in self.comps[d].iter_mut().zip(s) {
                *x = *x + y;
            }
        }
    }
}

impl<T: Real> Field<T> for TensorField<T> {
    const COMPONENTS: usize = 6;

    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn components(&self) -> &[Vec<T>] {
        &self.comps
    }
    fn components_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.comps
    }
    fn from_components(grid: GridSpec, comps: Vec<Vec<T>>) -> Result<Self> {
        check_len(&grid, &comps, 6)?;
        let comps: [Vec<T>; 6] = comps.try_into().ok().unwrap();
        Ok(TensorField { grid, comps })
    }
    /// Operator norm, the largest |eigenvalue|.
    fn point_norm(&self, idx: usize) -> T {
        linalg::sym_op_norm(self.at(idx))
    }
    /// Frobenius norm of the full (not stored) matrix difference.
    fn diff_norm(&self, a: usize, b: usize) -> T {
        let mut s = T::zero();
        for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            let d = self.comps[c][a] - self.comps[c][b];
            let w = if i == j { T::one() } else { T::lit(2.0) };
            s = s + w * d * d;
        }
        s.sqrt()
    }
}
