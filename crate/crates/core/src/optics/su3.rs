//! SU(3) elements generated by the Gell-Mann matrices.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BiphotonOperator, Mat3};

/// Eight real coefficients on the Gell-Mann basis `lambda_1..lambda_8`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Su3Params {
    pub theta: [f64; 8],
}

impl Su3Params {
    pub fn new(theta: [f64; 8]) -> Self {
        Self { theta }
    }
}

/// Gell-Mann matrix `lambda_k` for `k` in `1..=8`.
pub fn gell_mann(k: usize) -> Mat3 {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let s = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    match k {
        1 => [[z, o, z], [o, z, z], [z, z, z]],
        2 => [[z, -i, z], [i, z, z], [z, z, z]],
        3 => [[o, z, z], [z, -o, z], [z, z, z]],
        4 => [[z, z, o], [z, z, z], [o, z, z]],
        5 => [[z, z, -i], [z, z, z], [i, z, z]],
        6 => [[z, z, z], [z, z, o], [z, o, z]],
        7 => [[z, z, z], [z, z, -i], [z, i, z]],
        8 => [[s, z, z], [z, s, z], [z, z, -2.0 * s]],
        _ => panic!("Gell-Mann index {k} out of 1..=8"),
    }
}

/// `exp(i sum_k theta_k lambda_k)` via eigendecomposition of the Hermitian
/// generator, so the result is unitary to rounding and has unit determinant.
pub fn su3_exp(p: &Su3Params) -> BiphotonOperator {
    let mut h = Matrix3::<Complex64>::zeros();
    for (k, &t) in p.theta.iter().enumerate() {
        let l = gell_mann(k + 1);
        for r in 0..3 {
            for c in 0..3 {
                h[(r, c)] += l[r][c] * t;
            }
        }
    }
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases = eig.eigenvalues.map(|e| Complex64::from_polar(1.0, e));
    let g = v * Matrix3::from_diagonal(&phases) * v.adjoint();
    BiphotonOperator::new([0, 1, 2].map(|r| [0, 1, 2].map(|c| g[(r, c)])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_give_identity() {
        let g = su3_exp(&Su3Params::default());
        assert!(g.max_abs_diff(&BiphotonOperator::IDENTITY) < 1e-14);
    }

    #[test]
    fn lambda3_is_diagonal_phase() {
        let t = 0.83;
        let mut theta = [0.0; 8];
        theta[2] = t;
        let g = su3_exp(&Su3Params::new(theta));
        let want = BiphotonOperator::diagonal([
            Complex64::from_polar(1.0, t),
            Complex64::from_polar(1.0, -t),
            Complex64::new(1.0, 0.0),
        ]);
        assert!(g.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn generators_are_traceless_hermitian() {
        for k in 1..=8 {
            let l = gell_mann(k);
            let tr: Complex64 = (0..3).map(|i| l[i][i]).sum();
            assert!(tr.norm() < 1e-15);
            for r in 0..3 {
                for c in 0..3 {
                    assert!((l[r][c] - l[c][r].conj()).norm() < 1e-15);
                }
            }
        }
    }
}
