use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use super::gamma;
use crate::error::{Error, Result};
use crate::linalg::{self, Sym3, Vec3};
use crate::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "e")]
    Even,
    #[serde(rename = "o")]
    Odd,
}

impl Parity {
    /// Family used by time slice `l`.
    pub fn of_slice(l: i64) -> Self {
        if l.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Representatives of the six ± pairs of each family, taken from the 24
/// integer vectors with |k|² = 5. Each pair of rows is orthogonal within one
/// coordinate plane.
const EVEN_REPS: [[i32; 3]; 6] = [
    [1, 2, 0],
    [2, -1, 0],
    [0, 1, 2],
    [0, 2, -1],
    [2, 0, 1],
    [-1, 0, 2],
];
const ODD_REPS: [[i32; 3]; 6] = [
    [1, -2, 0],
    [2, 1, 0],
    [0, 1, -2],
    [0, 2, 1],
    [2, 0, -1],
    [1, 0, 2],
];

pub const LAMBDA_BAR_SQ: i32 = 5;

/// Members are stored pairwise: `members[2p] = k_p`, `members[2p + 1] = -k_p`.
#[derive(Clone, Debug)]
pub struct FrequencyFamily {
    pub parity: Parity,
    pub lambda_bar_sq: i32,
    pub members: Vec<[i32; 3]>,
    pub a: Vec<Vec3>,
    pub b: Vec<[Complex; 3]>,
    /// Inverse of the map from pair coefficients c_p to Σ_p c_p (Id − k̂_p⊗k̂_p),
    /// in symmetric coordinates.
    pub gamma_matrix: Matrix6<f64>,
    pub r0: f64,
}

/// Sign-canonical representative of ±k: first nonzero component positive.
fn canonical(k: &[i32; 3]) -> [i32; 3] {
    let first = k.iter().find(|&&c| c != 0).copied().unwrap_or(1);
    if first > 0 {
        *k
    } else {
        k.map(|c| -c)
    }
}

/// A_k = (1/√2)·normalize(k̃ × e_ref) with k̃ the canonical representative of
/// ±k, so A_{−k} = A_k.
pub fn polarization(k: &[i32; 3]) -> Vec3 {
    let kc = canonical(k).map(f64::from);
    let e_ref = (0..3)
        .map(|i| {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            e
        })
        .find(|e| linalg::norm(&linalg::cross(&kc, e)) > 0.0)
        .unwrap();
    let c = linalg::cross(&kc, &e_ref);
    let s = std::f64::consts::FRAC_1_SQRT_2 / linalg::norm(&c);
    c.map(|x| x * s)
}

/// B_k = A_k + i k̂ × A_k
pub fn beltrami_vector(k: &[i32; 3], a: &Vec3) -> [Complex; 3] {
    let kf = k.map(f64::from);
    let kn = linalg::norm(&kf);
    let khat = kf.map(|x| x / kn);
    let c = linalg::cross(&khat, a);
    std::array::from_fn(|i| Complex::new(a[i], c[i]))
}

impl FrequencyFamily {
    fn from_reps(parity: Parity, reps: &[[i32; 3]; 6]) -> Result<Self> {
        let members: Vec<[i32; 3]> = reps.iter().flat_map(|k| [*k, k.map(|c| -c)]).collect();
        let a: Vec<Vec3> = members.iter().map(polarization).collect();
        Self::from_parts(parity, members, a, None)
    }

    /// Assembles and validates a family. When `r0` is `None` it is certified.
    pub fn from_parts(
        parity: Parity,
        members: Vec<[i32; 3]>,
        a: Vec<Vec3>,
        r0: Option<f64>,
    ) -> Result<Self> {
        if members.len() != 12 || a.len() != 12 {
            return Err(Error::FamilyInvariant(format!(
                "family must have 12 members with polarizations, got {} and {}",
                members.len(),
                a.len()
            )));
        }
        let b = members
            .iter()
            .zip(&a)
            .map(|(k, a)| beltrami_vector(k, a))
            .collect();
        let pair_sum = pair_projectors(&members);
        let m = span_matrix(&pair_sum);
        let inv = m.try_inverse().ok_or_else(|| {
            Error::FamilyInvariant("span: {Id - k̂⊗k̂} does not span the symmetric matrices".into())
        })?;
        let mut fam = FrequencyFamily {
            parity,
            lambda_bar_sq: LAMBDA_BAR_SQ,
            members,
            a,
            b,
            gamma_matrix: inv,
            r0: 0.0,
        };
        fam.validate_structure()?;
        fam.r0 = match r0 {
            Some(r) => r,
            None => gamma::certify_r0(&fam)?,
        };
        if !(fam.r0 > 0.0) {
            return Err(Error::FamilyInvariant(format!("r0 = {} must be positive", fam.r0)));
        }
        Ok(fam)
    }

    pub fn pairs(&self) -> usize {
        self.members.len() / 2
    }

    /// Runs every structural invariant; returns the first violation.
    pub fn validate_structure(&self) -> Result<()> {
        let fail = |s: String| Err(Error::FamilyInvariant(s));
        for (p, pair) in self.members.chunks(2).enumerate() {
            if pair[1] != pair[0].map(|c| -c) {
                return fail(format!("symmetry: −k missing for k = {:?}", pair[0]));
            }
            let _ = p;
        }
        for (i, k) in self.members.iter().enumerate() {
            let kf = k.map(f64::from);
            if k.iter().map(|c| c * c).sum::<i32>() != self.lambda_bar_sq {
                return fail(format!("modulus: |k|² ≠ {} for k = {k:?}", self.lambda_bar_sq));
            }
            let a = &self.a[i];
            if linalg::dot(a, &kf).abs() > 1e-12 {
                return fail(format!("A_k·k = 0 fails for k = {k:?}"));
            }
            if (linalg::dot(a, a) - 0.5).abs() > 1e-12 {
                return fail(format!("|A_k|² = 1/2 fails for k = {k:?}"));
            }
            let j = i ^ 1;
            if (0..3).any(|c| (self.a[j][c] - a[c]).abs() > 1e-14) {
                return fail(format!("A_(-k) = A_k fails for k = {k:?}"));
            }
            let want = beltrami_vector(k, a);
            if (0..3).any(|c| (self.b[i][c] - want[c]).norm() > 1e-14) {
                return fail(format!("B_k = A_k + i k̂×A_k fails for k = {k:?}"));
            }
        }
        let mut iso = [0.0; 6];
        for k in &self.members {
            let p = linalg::transverse_projector(k);
            for c in 0..6 {
                iso[c] += linalg::SYM_IDENTITY[c] - p[c];
            }
        }
        let target = self.members.len() as f64 / 3.0;
        for c in 0..6 {
            if (iso[c] - target * linalg::SYM_IDENTITY[c]).abs() > 1e-12 {
                return fail("isotropy: Σ k̂⊗k̂ ≠ (|Λ|/3) Id".into());
            }
        }
        let det = span_matrix(&pair_projectors(&self.members)).determinant();
        if det.abs() < 1e-10 {
            return fail("span: {Id - k̂⊗k̂} does not span the symmetric matrices".into());
        }
        Ok(())
    }

    /// Pair coefficients c_p(R), linear in R.
    pub fn pair_coefficients(&self, r: &Sym3) -> [f64; 6] {
        let v = self.gamma_matrix * nalgebra::Vector6::from_column_slice(&to_coords(r));
        std::array::from_fn(|p| v[p])
    }

    /// Gradient of c_p as a symmetric matrix C_p with c_p(R) = ⟨C_p, R⟩ (Frobenius).
    pub fn coefficient_duals(&self) -> [Sym3; 6] {
        std::array::from_fn(|p| {
            let row = self.gamma_matrix.row(p);
            // coordinates are (R11, R12, R13, R22, R23, R33), off-diagonals counted once
            [row[0], 0.5 * row[1], 0.5 * row[2], row[3], 0.5 * row[4], row[5]]
        })
    }
}

fn to_coords(r: &Sym3) -> [f64; 6] {
    *r
}

fn pair_projectors(members: &[[i32; 3]]) -> Vec<Sym3> {
    members
        .chunks(2)
        .map(|pair| linalg::transverse_projector(&pair[0]))
        .collect()
}

fn span_matrix(projs: &[Sym3]) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for (p, proj) in projs.iter().enumerate().take(6) {
        for c in 0..6 {
            m[(c, p)] = proj[c];
        }
    }
    m
}

/// The two disjoint twelve-member families Λᵉ, Λᵒ, validated and certified.
pub fn build_families() -> Result<(FrequencyFamily, FrequencyFamily)> {
    let even = FrequencyFamily::from_reps(Parity::Even, &EVEN_REPS)?;
    let odd = FrequencyFamily::from_reps(Parity::Odd, &ODD_REPS)?;
    if even.members.iter().any(|k| odd.members.contains(k)) {
        return Err(Error::FamilyInvariant("disjointness: Λᵉ ∩ Λᵒ ≠ ∅".into()));
    }
    Ok((even, odd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_partition_the_orbit() {
        let (e, o) = build_families().unwrap();
        assert_eq!(e.members.len(), 12);
        assert_eq!(o.members.len(), 12);
        let mut all: Vec<[i32; 3]> = e.members.iter().chain(&o.members).copied().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 24);
        // enumerate the orbit independently
        let mut orbit = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                for c in -2..=2 {
                    if a * a + b * b + c * c == 5 {
                        orbit.push([a, b, c]);
                    }
                }
            }
        }
        orbit.sort();
        assert_eq!(orbit, all);
    }

    #[test]
    fn isotropy_by_direct_summation() {
        let (e, o) = build_families().unwrap();
        for fam in [&e, &o] {
            let mut s = [[0.0; 3]; 3];
            for k in &fam.members {
                let kf = k.map(f64::from);
                for i in 0..3 {
                    for j in 0..3 {
                        s[i][j] += kf[i] * kf[j] / 5.0;
                    }
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 4.0 } else { 0.0 };
                    assert!((s[i][j] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn polarizations() {
        let (e, o) = build_families().unwrap();
        for fam in [&e, &o] {
            for (k, a) in fam.members.iter().zip(&fam.a) {
                assert!(linalg::dot(a, &k.map(f64::from)).abs() < 1e-15);
                assert!((linalg::dot(a, a) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn corrupted_polarization_is_named() {
        let (e, _) = build_families().unwrap();
        let mut a = e.a.clone();
        a[2] = [0.5, 0.5, 0.0];
        a[3] = [0.5, 0.5, 0.0];
        let err = FrequencyFamily::from_parts(Parity::Even, e.members.clone(), a, Some(e.r0));
        assert!(err.unwrap_err().to_string().contains("A_k·k"));
    }
}
