use super::FrequencyFamily;
use crate::error::{Error, Result};
use crate::linalg::{self, Sym3};

/// Number of quasi-random directions used to certify r0.
pub const SPHERE_SAMPLES: usize = 500;

/// γ_k(R) for every member, in member order.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaCoefficients {
    pub values: Vec<f64>,
}

impl GammaCoefficients {
    /// ½ Σ γ_k² (Id − k̂⊗k̂)
    pub fn reconstruct(&self, family: &FrequencyFamily) -> Sym3 {
        let mut r = [0.0; 6];
        for (k, g) in family.members.iter().zip(&self.values) {
            let p = linalg::transverse_projector(k);
            for c in 0..6 {
                r[c] += 0.5 * g * g * p[c];
            }
        }
        r
    }
}

/// γ_k(R) = sqrt(c_k(R)), defined on the certified ball around Id.
pub fn gamma(r: &Sym3, family: &FrequencyFamily) -> Result<GammaCoefficients> {
    let distance = linalg::sym_op_norm(linalg::sym_sub(r, &linalg::SYM_IDENTITY));
    if !(distance < family.r0) {
        return Err(Error::OutOfBall {
            distance,
            r0: family.r0,
        });
    }
    let c = family.pair_coefficients(r);
    let mut values = Vec::with_capacity(family.members.len());
    for (p, &cp) in c.iter().enumerate() {
        if !(cp > 0.0) {
            return Err(Error::NegativeCoefficient {
                k: family.members[2 * p],
                value: cp,
            });
        }
        let g = cp.sqrt();
        values.push(g);
        values.push(g);
    }
    Ok(GammaCoefficients { values })
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Fixed quasi-random directions on the unit operator-norm sphere of
/// symmetric matrices (Halton sequence in six coordinates).
pub fn sphere_directions() -> Vec<Sym3> {
    const BASES: [usize; 6] = [2, 3, 5, 7, 11, 13];
    (1..=SPHERE_SAMPLES)
        .map(|i| {
            let d: Sym3 = std::array::from_fn(|c| 2.0 * radical_inverse(i, BASES[c]) - 1.0);
            let s = linalg::sym_op_norm(d);
            d.map(|x| x / s)
        })
        .collect()
}

/// For each coefficient c_p = ⟨C_p, ·⟩ the unit direction minimizing it,
/// D = −Σ sign(λ_i) v_i⊗v_i over the eigenpairs of C_p.
pub fn extremal_directions(family: &FrequencyFamily) -> Vec<Sym3> {
    family
        .coefficient_duals()
        .iter()
        .map(|c| {
            let eig = nalgebra::Matrix3::from(linalg::sym_to_mat(c)).symmetric_eigen();
            let mut d = nalgebra::Matrix3::zeros();
            for i in 0..3 {
                let v = eig.eigenvectors.column(i);
                let s = if eig.eigenvalues[i] > 0.0 { -1.0 } else { 1.0 };
                d += v * v.transpose() * s;
            }
            let m: linalg::Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| d[(i, j)]));
            linalg::mat_to_sym(&m)
        })
        .collect()
}

/// Largest sampled radius keeping every c_k positive, found by bisection and
/// shrunk by 0.9. The sample is the fixed quasi-random set plus the extremal
/// direction of each coefficient.
pub fn certify_r0(family: &FrequencyFamily) -> Result<f64> {
    let mut dirs = sphere_directions();
    dirs.extend(extremal_directions(family));
    let ok = |r: f64| {
        dirs.iter().all(|d| {
            let m: Sym3 = std::array::from_fn(|c| linalg::SYM_IDENTITY[c] + r * d[c]);
            family.pair_coefficients(&m).iter().all(|&c| c > 0.0)
        })
    };
    let mut hi = 1.0;
    while ok(hi) && hi < 64.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r0 = 0.9 * lo;
    if r0 < 1e-3 {
        return Err(Error::RadiusTooSmall(r0));
    }
    Ok(r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beltrami::build_families;

    #[test]
    fn identity_gives_one_half() {
        let (e, o) = build_families().unwrap();
        for fam in [&e, &o] {
            let g = gamma(&linalg::SYM_IDENTITY, fam).unwrap();
            assert!(g.values.iter().all(|v| (v - 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn quarter_coefficients_rebuild_identity() {
        // ½ Σ ¼ (Id − k̂⊗k̂) = ⅛ (12 Id − 4 Id) = Id
        let (e, _) = build_families().unwrap();
        let g = GammaCoefficients {
            values: vec![0.5; 12],
        };
        let r = g.reconstruct(&e);
        for c in 0..6 {
            assert!((r[c] - linalg::SYM_IDENTITY[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn certified_radius_is_below_exact_radius() {
        // c_p(Id + rD) = ¼ + r⟨C_p, D⟩; the exact radius over the whole sphere is
        // ¼ / max_p ‖C_p‖_nuclear. Sampling can only overshoot it, the 0.9 factor
        // must bring the result back inside.
        let (e, o) = build_families().unwrap();
        for fam in [&e, &o] {
            let nuclear = fam
                .coefficient_duals()
                .iter()
                .map(|c| {
                    let ev = linalg::sym_eigenvalues(*c);
                    ev.iter().map(|x| x.abs()).sum::<f64>()
                })
                .fold(0.0, f64::max);
            let exact = 0.25 / nuclear;
            assert!(fam.r0 < exact);
            assert!((fam.r0 / 0.9 - exact).abs() < 1e-12);
            assert!(fam.r0 > 1e-3);
        }
    }

    #[test]
    fn quasi_random_sample_alone_overshoots_the_odd_family() {
        let (_, o) = build_families().unwrap();
        let dirs = sphere_directions();
        let ok = |r: f64| {
            dirs.iter().all(|d| {
                let m: Sym3 = std::array::from_fn(|c| linalg::SYM_IDENTITY[c] + r * d[c]);
                o.pair_coefficients(&m).iter().all(|&c| c > 0.0)
            })
        };
        // 0.9 × (sampled radius) would exceed the exact radius 0.10797
        assert!(ok(0.1079670232436209 / 0.9 - 1e-3));
    }

    #[test]
    fn duals_match_coefficients() {
        let (e, _) = build_families().unwrap();
        let r = [1.1, 0.05, -0.02, 0.93, 0.01, 0.97];
        let c = e.pair_coefficients(&r);
        for (p, dual) in e.coefficient_duals().iter().enumerate() {
            assert!((linalg::sym_inner(dual, &r) - c[p]).abs() < 1e-13);
        }
    }

    #[test]
    fn out_of_ball_is_rejected() {
        let (e, _) = build_families().unwrap();
        let r = [1.0 + 2.0 * e.r0, 0.0, 0.0, 1.0, 0.0, 1.0];
        assert!(matches!(gamma(&r, &e), Err(Error::OutOfBall { .. })));
    }
}
