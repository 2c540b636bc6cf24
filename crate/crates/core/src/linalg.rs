// Dense Hermitian helpers shared by the Gram and moment solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CMatrix = DMatrix<Complex64>;
pub(crate) type CVector = DVector<Complex64>;

/// Spectral summary of a Hermitian matrix after Jacobi scaling
/// `D^{-1/2} G D^{-1/2}`, `D = diag(G)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Spectrum {
    pub min_eig: f64,
    /// Condition number of the scaled matrix.
    pub condition: f64,
    /// `det(G) / Π G_ii`, the determinant of the scaled matrix.
    pub hadamard_ratio: f64,
    /// Numerical rank of the scaled matrix.
    pub rank: usize,
}

pub(crate) fn hermitize(g: &mut CMatrix) {
    let n = g.nrows();
    for i in 0..n {
        g[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
    }
}

fn jacobi_scale(g: &CMatrix) -> Option<(CMatrix, Vec<f64>)> {
    let n = g.nrows();
    let d: Vec<f64> = (0..n).map(|i| g[(i, i)].re).collect();
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let scaled = CMatrix::from_fn(n, n, |i, j| g[(i, j)] * (s[i] * s[j]));
    Some((scaled, s))
}

pub(crate) fn spectrum(g: &CMatrix) -> Spectrum {
    let n = g.nrows();
    if n == 0 {
        return Spectrum {
            min_eig: 1.0,
            condition: 1.0,
            hadamard_ratio: 1.0,
            rank: 0,
        };
    }
    let Some((scaled, _)) = jacobi_scale(g) else {
        return Spectrum {
            min_eig: 0.0,
            condition: f64::INFINITY,
            hadamard_ratio: 0.0,
            rank: 0,
        };
    };
    let eig = SymmetricEigen::new(scaled.clone()).eigenvalues;
    let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eig = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let condition = if min_eig > 0.0 { max_eig / min_eig } else { f64::INFINITY };
    let rank = eig.iter().filter(|e| **e > 1e-12 * max_eig).count();
    let hadamard_ratio = scaled.lu().determinant().re.max(0.0);
    Spectrum {
        min_eig,
        condition,
        hadamard_ratio,
        rank,
    }
}

pub(crate) fn determinant(g: &CMatrix) -> Complex64 {
    if g.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    g.clone().lu().determinant()
}

pub(crate) fn determinant_estimate(g: &CMatrix) -> f64 {
    determinant(g).re
}

/// Solves `G x = rhs` for Hermitian positive definite `G`, refusing
/// numerically dependent or ill-conditioned systems.
pub(crate) fn solve_hermitian(
    g: &CMatrix,
    rhs: &CVector,
    max_condition: f64,
    min_hadamard: f64,
) -> Result<(CVector, Spectrum)> {
    let spec = spectrum(g);
    if g.nrows() == 0 {
        return Ok((CVector::zeros(0), spec));
    }
    if !(spec.hadamard_ratio >= min_hadamard) {
        return Err(Error::DependentFamily {
            ratio: spec.hadamard_ratio,
        });
    }
    if !(spec.condition <= max_condition) {
        return Err(Error::IllConditionedGram {
            condition: spec.condition,
            det: determinant_estimate(g),
        });
    }
    let (scaled, s) = jacobi_scale(g).expect("positive diagonal checked by spectrum");
    let srhs = CVector::from_fn(rhs.len(), |i, _| rhs[i] * s[i]);
    let y = match scaled.clone().cholesky() {
        Some(ch) => ch.solve(&srhs),
        None => scaled
            .full_piv_lu()
            .solve(&srhs)
            .ok_or(Error::IllConditionedGram {
                condition: spec.condition,
                det: determinant_estimate(g),
            })?,
    };
    let x = CVector::from_fn(y.len(), |i, _| y[i] * s[i]);
    Ok((x, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_small_hermitian() {
        let g = CMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]);
        let rhs = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let (x, spec) = solve_hermitian(&g, &rhs, 1e12, 1e-14).unwrap();
        assert!((&g * &x - &rhs).norm() < 1e-14);
        assert!(spec.condition >= 1.0 && spec.rank == 2);
        assert!((determinant_estimate(&g) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_dependent() {
        let g = CMatrix::from_element(2, 2, c(1.0, 0.0));
        let rhs = CVector::from_element(2, c(1.0, 0.0));
        assert!(matches!(
            solve_hermitian(&g, &rhs, 1e12, 1e-14),
            Err(Error::DependentFamily { .. })
        ));
        let z = CMatrix::zeros(1, 1);
        assert!(solve_hermitian(&z, &CVector::zeros(1), 1e12, 1e-14).is_err());
    }
}
