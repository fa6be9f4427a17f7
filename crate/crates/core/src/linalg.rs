//! Small fixed-size linear algebra used pointwise on the lattice.

use crate::field::SYM_PAIRS;
use crate::real::Real;
use crate::Complex;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
/// Symmetric matrix in (11, 12, 13, 22, 23, 33) order.
pub type Sym3 = [f64; 6];
pub type CVec3 = [Complex; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
pub const SYM_IDENTITY: Sym3 = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0];

/// Eigenvalues of a symmetric 3×3 matrix, closed-form trigonometric method,
/// returned in descending order.
pub fn sym_eigenvalues<T: Real>(a: [T; 6]) -> [T; 3] {
    let [a11, a12, a13, a22, a23, a33] = a;
    let p1 = a12 * a12 + a13 * a13 + a23 * a23;
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    if p1 == T::zero() {
        let mut e = [a11, a22, a33];
        e.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        return e;
    }
    let q = (a11 + a22 + a33) / three;
    let p2 = (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + (a33 - q) * (a33 - q) + two * p1;
    let p = (p2 / T::lit(6.0)).sqrt();
    let b11 = (a11 - q) / p;
    let b22 = (a22 - q) / p;
    let b33 = (a33 - q) / p;
    let b12 = a12 / p;
    let b13 = a13 / p;
    let b23 = a23 / p;
    let det = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13)
        + b13 * (b12 * b23 - b22 * b13);
    let r = (det / two).max(-T::one()).min(T::one());
    let phi = r.acos() / three;
    let pi = T::PI();
    let e1 = q + two * p * phi.cos();
    let e3 = q + two * p * (phi + two * pi / three).cos();
    let e2 = three * q - e1 - e3;
    [e1, e2, e3]
}

/// Operator norm of a symmetric matrix.
pub fn sym_op_norm<T: Real>(a: [T; 6]) -> T {
    let e = sym_eigenvalues(a);
    e[0].abs().max(e[2].abs())
}

pub fn sym_to_mat(s: &Sym3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        m[i][j] = s[c];
        m[j][i] = s[c];
    }
    m
}

pub fn mat_to_sym(m: &Mat3) -> Sym3 {
    let mut s = [0.0; 6];
    for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        s[c] = 0.5 * (m[i][j] + m[j][i]);
    }
    s
}

pub fn sym_sub(a: &Sym3, b: &Sym3) -> Sym3 {
    std::array::from_fn(|c| a[c] - b[c])
}

pub fn sym_scale(a: &Sym3, s: f64) -> Sym3 {
    a.map(|x| x * s)
}

/// Frobenius inner product of two symmetric matrices.
pub fn sym_inner(a: &Sym3, b: &Sym3) -> f64 {
    a[0] * b[0] + a[3] * b[3] + a[5] * b[5] + 2.0 * (a[1] * b[1] + a[2] * b[2] + a[4] * b[4])
}

pub fn sym_trace(a: &Sym3) -> f64 {
    a[0] + a[3] + a[5]
}

/// Operator norm of a general 3×3 matrix.
pub fn op_norm(m: &Mat3) -> f64 {
    let mut ata = [0.0; 6];
    for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        ata[c] = (0..3).map(|k| m[k][i] * m[k][j]).sum();
    }
    sym_eigenvalues(ata)[0].max(0.0).sqrt()
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn ccross(a: &CVec3, b: &CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

/// mᵀ v
pub fn mat_t_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|j| m[0][j] * v[0] + m[1][j] * v[1] + m[2][j] * v[2])
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i] * b[j]))
}

/// Id − k̂⊗k̂ in symmetric storage.
pub fn transverse_projector(k: &[i32; 3]) -> Sym3 {
    let kf = k.map(f64::from);
    let k2 = dot(&kf, &kf);
    let mut s = SYM_IDENTITY;
    for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        s[c] -= kf[i] * kf[j] / k2;
    }
    s
}
