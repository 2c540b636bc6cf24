//! Gram matrices, Gram determinants and orthogonal projection onto the
//! complement of a finite span.
//!
//! Projections solve the normal equations `G c̄ = (⟨vᵢ, v⟩)ᵢ` with a Jacobi-
//! scaled Cholesky factorization followed by one re-projection pass. The
//! determinant vector `D(v; v₁, …, vₛ)` is computed independently by cofactor
//! expansion along its vector-valued first column and serves as a
//! cross-check for small families.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::series::SeriesFn;

/// Scaled condition numbers above this are refused.
pub const MAX_CONDITION: f64 = 1e12;
/// Families with `det(G) < DEPENDENCE_RATIO · Π G_ii` are treated as dependent.
pub const DEPENDENCE_RATIO: f64 = 1e-14;
/// Largest family handled by the cofactor-expansion path.
pub const MAX_DETERMINANT_SIZE: usize = 6;

/// Gram matrix of a family, with optional right-hand side `(⟨v, vᵢ⟩)ᵢ`.
#[derive(Clone, Debug)]
pub struct GramSystem {
    /// Entry `(i, j)` is `⟨vᵢ, vⱼ⟩`.
    pub matrix: DMatrix<Complex64>,
    pub rhs: Option<Vec<Complex64>>,
    pub determinant: f64,
    /// Rank of the Jacobi-scaled matrix at relative threshold `1e-12`.
    pub rank: usize,
    /// Condition number of the Jacobi-scaled matrix.
    pub condition: f64,
    /// Smallest eigenvalue of the Jacobi-scaled matrix.
    pub min_eigenvalue: f64,
}

impl GramSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_family(vs: &[SeriesFn]) -> Result<()> {
    if let Some(first) = vs.first() {
        if vs.iter().any(|v| !v.space().same_weight(first.space())) {
            return Err(Error::SpaceMismatch);
        }
    }
    Ok(())
}

fn assemble(vs: &[SeriesFn]) -> Result<CMatrix> {
    let s = vs.len();
    let mut g = CMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let ip = vs[i].inner_product(&vs[j])?;
            g[(i, j)] = ip;
            g[(j, i)] = ip.conj();
        }
    }
    linalg::hermitize(&mut g);
    Ok(g)
}

/// `G(v₁, …, vₛ)` with determinant, rank and conditioning.
pub fn gram_matrix(vs: &[SeriesFn]) -> Result<GramSystem> {
    if vs.is_empty() {
        return Err(Error::InvalidInput("Gram matrix of an empty family".into()));
    }
    check_family(vs)?;
    let g = assemble(vs)?;
    Ok(summarize(g, None))
}

fn summarize(g: CMatrix, rhs: Option<Vec<Complex64>>) -> GramSystem {
    let spec = linalg::spectrum(&g);
    let determinant = linalg::determinant_estimate(&g);
    GramSystem {
        determinant,
        rank: spec.rank,
        condition: spec.condition,
        min_eigenvalue: spec.min_eig,
        matrix: g,
        rhs,
    }
}

/// Result of projecting `v` onto `span(vs)^⊥`.
#[derive(Clone, Debug)]
pub struct Projection {
    /// `u = v - Σ cᵢ vᵢ`.
    pub complement: SeriesFn,
    /// Coefficients `cᵢ` of the projection of `v` onto `span(vs)`.
    pub coefficients: Vec<Complex64>,
    pub gram: GramSystem,
}

/// Orthogonal projection of `v` onto the complement of `span(vs)`.
pub fn project_complement(v: &SeriesFn, vs: &[SeriesFn]) -> Result<SeriesFn> {
    Ok(project_complement_detailed(v, vs)?.complement)
}

pub fn project_complement_detailed(v: &SeriesFn, vs: &[SeriesFn]) -> Result<Projection> {
    check_family(vs)?;
    if let Some(first) = vs.first() {
        if !v.space().same_weight(first.space()) {
            return Err(Error::SpaceMismatch);
        }
    }
    if vs.is_empty() {
        return Ok(Projection {
            complement: v.clone(),
            coefficients: Vec::new(),
            gram: summarize(CMatrix::zeros(0, 0), Some(Vec::new())),
        });
    }
    let g = assemble(vs)?;
    let pairings = |u: &SeriesFn| -> Result<CVector> {
        let entries = vs.iter().map(|vi| vi.inner_product(u)).collect::<Result<Vec<_>>>()?;
        Ok(CVector::from_vec(entries))
    };
    let rhs = pairings(v)?;
    let (x, _) = linalg::solve_hermitian(&g, &rhs, MAX_CONDITION, DEPENDENCE_RATIO)?;
    let mut coefficients: Vec<Complex64> = x.iter().map(|c| c.conj()).collect();
    let mut u = subtract_combination(v, vs, &coefficients)?;

    // One refinement pass: re-project the residual component left in span(vs).
    let r = pairings(&u)?;
    let (dx, _) = linalg::solve_hermitian(&g, &r, MAX_CONDITION, DEPENDENCE_RATIO)?;
    let delta: Vec<Complex64> = dx.iter().map(|c| c.conj()).collect();
    u = subtract_combination(&u, vs, &delta)?;
    for (c, d) in coefficients.iter_mut().zip(&delta) {
        *c += d;
    }

    Ok(Projection {
        complement: u,
        coefficients,
        gram: summarize(g, Some(rhs.iter().map(|c| c.conj()).collect())),
    })
}

fn subtract_combination(v: &SeriesFn, vs: &[SeriesFn], c: &[Complex64]) -> Result<SeriesFn> {
    let mut u = v.clone();
    for (vi, ci) in vs.iter().zip(c) {
        u = u.axpy(-ci, vi)?;
    }
    Ok(u)
}

/// `D(v; v₁, …, vₛ)`: the formal determinant whose first column is
/// `(v, v₁, …, vₛ)` and whose row `r` continues with `⟨w_r, vⱼ⟩`, expanded
/// along the first column.
pub fn shapiro_shields_vector(v: &SeriesFn, vs: &[SeriesFn]) -> Result<SeriesFn> {
    let s = vs.len();
    if s > MAX_DETERMINANT_SIZE {
        return Err(Error::UseProjectionPath {
            size: s,
            max: MAX_DETERMINANT_SIZE,
        });
    }
    check_family(vs)?;
    if s == 0 {
        return Ok(v.clone());
    }
    if !v.space().same_weight(vs[0].space()) {
        return Err(Error::SpaceMismatch);
    }
    let rows: Vec<&SeriesFn> = std::iter::once(v).chain(vs.iter()).collect();
    let mut a = CMatrix::zeros(s + 1, s);
    for (r, w) in rows.iter().enumerate() {
        for (j, vj) in vs.iter().enumerate() {
            a[(r, j)] = w.inner_product(vj)?;
        }
    }
    let mut d = v.space().zero();
    for (r, w) in rows.iter().enumerate() {
        let minor = a.clone().remove_row(r);
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        d = d.axpy(linalg::determinant(&minor) * sign, w)?;
    }
    Ok(d)
}

/// `D(v; vs) / det G(vs)`, the determinant route to the projection. Limited
/// to the cofactor path's family size.
pub fn project_complement_via_determinant(v: &SeriesFn, vs: &[SeriesFn]) -> Result<SeriesFn> {
    let d = shapiro_shields_vector(v, vs)?;
    if vs.is_empty() {
        return Ok(d);
    }
    let g = gram_matrix(vs)?;
    if !(g.determinant > 0.0) {
        return Err(Error::DependentFamily { ratio: 0.0 });
    }
    Ok(d.scale(Complex64::new(1.0 / g.determinant, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_coeffs, KernelSpec};
    use crate::series::Space;
    use crate::weights::WeightSequence;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hardy() -> Space {
        Space::with_degree(WeightSequence::hardy(), 512).unwrap()
    }

    fn ka(s: &Space) -> SeriesFn {
        kernel_coeffs(s, &KernelSpec::new(c(0.5, 0.0), 0).unwrap()).unwrap()
    }

    #[test]
    fn gram_examples() {
        let s = hardy();
        let g = gram_matrix(&[s.basis(0), s.basis(1)]).unwrap();
        assert_eq!(g.matrix, CMatrix::identity(2, 2));
        assert!((g.determinant - 1.0).abs() < 1e-15);
        assert_eq!(g.rank, 2);

        let g = gram_matrix(&[ka(&s)]).unwrap();
        assert!((g.determinant - 4.0 / 3.0).abs() < 1e-14);

        let g = gram_matrix(&[s.one(), s.one()]).unwrap();
        assert!(g.determinant.abs() < 1e-12);
        assert_eq!(g.rank, 1);
        assert!(gram_matrix(&[]).is_err());
    }

    #[test]
    fn projection_examples() {
        let s = hardy();
        let u = project_complement(&s.monomial(1), &[s.one()]).unwrap();
        assert!(u.sub(&s.monomial(1)).unwrap().norm() < 1e-15);

        let u = project_complement(&s.one(), &[ka(&s)]).unwrap();
        let expect = s.one().axpy(c(-0.75, 0.0), &ka(&s)).unwrap();
        assert!(u.sub(&expect).unwrap().norm() < 1e-14);

        let v = s.real_poly(&[1.0, 2.0]).unwrap();
        let u = project_complement(&v, &[]).unwrap();
        assert_eq!(u.coeffs(), v.coeffs());
    }

    #[test]
    fn dependent_family_refused() {
        let s = hardy();
        assert!(matches!(
            project_complement(&s.monomial(1), &[s.one(), s.one()]),
            Err(Error::DependentFamily { .. })
        ));
        let b = Space::with_degree(WeightSequence::bergman(), 64).unwrap();
        assert!(matches!(
            project_complement(&s.one(), &[b.one()]),
            Err(Error::SpaceMismatch)
        ));
    }

    #[test]
    fn shapiro_shields_examples() {
        let s = hardy();
        let v = s.real_poly(&[0.3, -1.0]).unwrap();
        assert_eq!(shapiro_shields_vector(&v, &[]).unwrap().coeffs(), v.coeffs());

        let d = shapiro_shields_vector(&s.one(), &[ka(&s)]).unwrap();
        let expect = s.one().scale(c(4.0 / 3.0, 0.0)).sub(&ka(&s)).unwrap();
        assert!(d.sub(&expect).unwrap().norm() < 1e-14);

        let many: Vec<SeriesFn> = (0..7).map(|k| s.monomial(k)).collect();
        assert!(matches!(
            shapiro_shields_vector(&s.monomial(9), &many),
            Err(Error::UseProjectionPath { size: 7, .. })
        ));
    }

    #[test]
    fn repeated_root_determinant_matches_hand_expansion() {
        // D(1; K_a, K_a^{(1)}) in H² equals ā²/(1-|a|²)⁴ · ((a - z)/(1 - āz))².
        let s = hardy();
        let a = c(0.4, 0.3);
        let k0 = kernel_coeffs(&s, &KernelSpec::new(a, 0).unwrap()).unwrap();
        let k1 = kernel_coeffs(&s, &KernelSpec::new(a, 1).unwrap()).unwrap();
        let d = shapiro_shields_vector(&s.one(), &[k0, k1]).unwrap();
        let r2 = a.norm_sqr();
        for i in 0..10 {
            let t = i as f64 * 0.6;
            let z = c(0.8 * t.cos(), 0.8 * t.sin());
            let bl = (a - z) / (c(1.0, 0.0) - a.conj() * z);
            let expect = a.conj() * a.conj() / (1.0 - r2).powi(4) * bl * bl;
            assert!((d.eval(z).unwrap() - expect).norm() < 1e-12);
        }
    }
}
