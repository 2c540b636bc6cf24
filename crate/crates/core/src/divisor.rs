//! Inner factors through the space `H²ω(|b|²)`.
//!
//! `H²ω(|b|²)` is the completion of the polynomials under `‖p‖ = ‖p b‖`.
//! Restricted to polynomials of degree at most `M`, its Gram matrix is the
//! moment matrix `Aᵢⱼ = ⟨zⁱ b, zʲ b⟩`, and the kernel at the origin `R₀`
//! satisfies `⟨zⁱ, R₀⟩_{|b|²} = δᵢ₀`. The function `u = b R₀ / ‖b R₀‖` is
//! inner, and equals the inner factor of `b` up to a unimodular constant
//! whenever `b` is an inner function times a nonvanishing multiplier.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::{
    classical_blaschke, construct_blaschke_analogue, BlaschkeSpec, DiskGrid, PHASE_REL_TOL,
};
use crate::error::{Error, Result};
use crate::innercheck::check_definition;
use crate::linalg::{self, CVector};
use crate::series::{SeriesFile, SeriesFn, Space};

pub const DEFAULT_M_POLY: usize = 64;
/// Smallest polynomial cap tried when the moment matrix is ill-conditioned.
pub const MIN_M_POLY: usize = 4;
pub const MAX_MOMENT_CONDITION: f64 = 1e12;
/// Radius of the disks around prescribed zeros left out of `B/b` comparisons.
pub const EXCLUSION_RADIUS: f64 = 0.05;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Gram matrix of `1, z, …, z^M` in `H²ω(|b|²)`.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    entries: DMatrix<Complex64>,
    b: SeriesFn,
    m_poly: usize,
}

impl MomentMatrix {
    /// `⟨zⁱ b, zʲ b⟩`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn b(&self) -> &SeriesFn {
        &self.b
    }

    pub fn m_poly(&self) -> usize {
        self.m_poly
    }

    /// The leading `(m + 1) × (m + 1)` block, i.e. the moment matrix at cap `m`.
    pub fn truncate(&self, m: usize) -> MomentMatrix {
        let m = m.min(self.m_poly);
        MomentMatrix {
            entries: self.entries.view((0, 0), (m + 1, m + 1)).into_owned(),
            b: self.b.clone(),
            m_poly: m,
        }
    }
}

/// Assembles `Aᵢⱼ = Σₙ ωₙ b_{n-i} conj(b_{n-j})` for `0 ≤ i, j ≤ m_poly`.
/// The shifted products are exact: `zⁱ b` is never truncated.
pub fn moment_matrix(b: &SeriesFn, m_poly: usize) -> Result<MomentMatrix> {
    if !(b.norm() > 0.0) {
        return Err(Error::ZeroVector("moment matrix of the zero function".into()));
    }
    let a = b.coeffs();
    let n = a.len();
    let omega = b.space().weight().table(n + m_poly);
    let mut entries = DMatrix::<Complex64>::zeros(m_poly + 1, m_poly + 1);
    for i in 0..=m_poly {
        for j in i..=m_poly {
            // n runs over indices where both z^i b and z^j b are nonzero.
            let mut acc = Complex64::new(0.0, 0.0);
            for k in j..(n + i) {
                acc += a[k - i] * a[k - j].conj() * omega[k];
            }
            entries[(i, j)] = acc;
            entries[(j, i)] = acc.conj();
        }
    }
    for i in 0..=m_poly {
        entries[(i, i)].im = 0.0;
    }
    Ok(MomentMatrix {
        entries,
        b: b.clone(),
        m_poly,
    })
}

#[derive(Clone, Debug)]
pub struct KernelAtZero {
    /// Polynomial of degree at most `M`, embedded in the space of `b`.
    pub r0: SeriesFn,
    /// `|⟨zⁱ, R₀⟩_{|b|²} - δᵢ₀|` for `i = 0, …, M`.
    pub residuals: Vec<f64>,
    /// Condition number of the Jacobi-scaled moment matrix.
    pub condition: f64,
}

impl KernelAtZero {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Solves `A x = e₀` and sets `R₀ = Σ conj(xₖ) zᵏ`, so that
/// `⟨zⁱ, R₀⟩_{|b|²} = Σₖ Aᵢₖ xₖ = δᵢ₀`.
pub fn kernel_at_zero(mm: &MomentMatrix) -> Result<KernelAtZero> {
    let size = mm.m_poly + 1;
    if mm.m_poly > mm.b.space().degree() {
        return Err(Error::InvalidInput(
            "polynomial cap exceeds the truncation degree of b".into(),
        ));
    }
    let mut e0 = CVector::zeros(size);
    e0[0] = Complex64::new(1.0, 0.0);
    // The Hadamard ratio of a large well-conditioned moment matrix can be
    // tiny, so only the condition number gates the solve.
    let (mut x, spec) = linalg::solve_hermitian(&mm.entries, &e0, MAX_MOMENT_CONDITION, 0.0)?;
    let r = &e0 - &mm.entries * &x;
    if let Ok((dx, _)) = linalg::solve_hermitian(&mm.entries, &r, f64::INFINITY, 0.0) {
        x += dx;
    }
    let ax = &mm.entries * &x;
    let residuals = (0..size)
        .map(|i| (ax[i] - if i == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).norm())
        .collect();
    let coeffs: Vec<Complex64> = x.iter().map(|c| c.conj()).collect();
    Ok(KernelAtZero {
        r0: mm.b.space().series(&coeffs)?,
        residuals,
        condition: spec.condition,
    })
}

#[derive(Clone, Debug)]
pub struct Recovery {
    /// Unit-norm inner function with canonical phase.
    pub u: SeriesFn,
    pub kernel: KernelAtZero,
    /// Polynomial cap actually used.
    pub m_poly: usize,
    pub m_poly_requested: usize,
    /// `‖b R₀‖` before normalization.
    pub norm_b_r0: f64,
    pub warnings: Vec<String>,
}

/// `u = b R₀ / ‖b R₀‖`. An ill-conditioned moment matrix halves the
/// polynomial cap (down to [`MIN_M_POLY`]) and records a warning.
pub fn inner_from_kernel(b: &SeriesFn, m_poly: usize) -> Result<Recovery> {
    let requested = m_poly;
    let mut m = m_poly.min(b.space().degree());
    let mut warnings = Vec::new();
    if m < requested {
        warnings.push(format!("M_poly reduced from {requested} to the truncation degree {m}"));
    }
    let full = moment_matrix(b, m)?;
    let kernel = loop {
        match kernel_at_zero(&full.truncate(m)) {
            Ok(k) => break k,
            Err(Error::IllConditionedGram { condition, .. }) if m / 2 >= MIN_M_POLY => {
                warnings.push(format!(
                    "moment matrix condition {condition:.3e} at M_poly = {m}; retrying with {}",
                    m / 2
                ));
                m /= 2;
            }
            Err(e) => return Err(e),
        }
    };
    let product = b.mul(&kernel.r0)?;
    let norm_b_r0 = product.norm();
    if !(norm_b_r0 > 0.0) {
        return Err(Error::ZeroVector("b R0 vanished".into()));
    }
    let (u, _) = product
        .scale(Complex64::new(1.0 / norm_b_r0, 0.0))
        .canonical_phase(PHASE_REL_TOL);
    Ok(Recovery {
        u,
        kernel,
        m_poly: m,
        m_poly_requested: requested,
        norm_b_r0,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryResiduals {
    pub max_reproducing_defect: f64,
    pub reproducing_defect: Vec<f64>,
    pub moment_condition: f64,
    pub u_norm_dev: f64,
    pub u_ortho_defect: f64,
    pub norm_b_r0: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub schema_version: u32,
    pub b: SeriesFile,
    #[serde(rename = "R0")]
    pub r0: SeriesFile,
    pub u: SeriesFile,
    pub m_poly: usize,
    pub m_poly_requested: usize,
    pub residuals: RecoveryResiduals,
    pub warnings: Vec<String>,
}

impl Recovery {
    pub fn report(&self, b: &SeriesFn, m_ortho: usize) -> Result<RecoveryReport> {
        let def = check_definition(&self.u, m_ortho)?;
        Ok(RecoveryReport {
            schema_version: REPORT_SCHEMA_VERSION,
            b: b.to_file(),
            r0: self.kernel.r0.to_file(),
            u: self.u.to_file(),
            m_poly: self.m_poly,
            m_poly_requested: self.m_poly_requested,
            residuals: RecoveryResiduals {
                max_reproducing_defect: self.kernel.max_residual(),
                reproducing_defect: self.kernel.residuals.clone(),
                moment_condition: self.kernel.condition,
                u_norm_dev: def.norm_dev,
                u_ortho_defect: def.ortho_defect,
                norm_b_r0: self.norm_b_r0,
            },
            warnings: self.warnings.clone(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct HoComparison {
    /// `max |B/b - c R₀|` over the retained grid points.
    pub proportionality_dev: f64,
    /// Least-squares constant `c`.
    pub constant: Complex64,
    /// Grid points dropped near zeros of `b`.
    pub excluded: usize,
    pub kernel: KernelAtZero,
}

/// Compares `B/b` with the kernel `R₀` of `H²ω(|b|²)`, where `B` is the
/// analogue for `spec` and `b` the classical product with the same zeros.
///
/// The quotient is evaluated pointwise on the grid rather than by dividing
/// power series; points within [`EXCLUSION_RADIUS`] of a zero of `b` are
/// skipped.
pub fn check_ho_analogue(
    space: &Space,
    spec: &BlaschkeSpec,
    m_poly: usize,
    grid: &DiskGrid,
) -> Result<HoComparison> {
    let big_b = construct_blaschke_analogue(space, spec)?.b;
    let b = classical_blaschke(space, spec)?;
    let kernel = kernel_at_zero(&moment_matrix(&b, m_poly.min(space.degree()))?)?;

    let mut grid = grid.clone();
    let mut centers: Vec<Complex64> = spec.zeros.iter().map(|z| z.z).collect();
    if spec.d0 > 0 {
        centers.push(Complex64::new(0.0, 0.0));
    }
    let excluded = grid.exclude_disks(&centers, EXCLUSION_RADIUS);
    if grid.points.is_empty() {
        return Err(Error::InvalidInput("every grid point was excluded".into()));
    }
    let mut q = Vec::with_capacity(grid.points.len());
    let mut r = Vec::with_capacity(grid.points.len());
    for &z in &grid.points {
        q.push(big_b.eval(z)? / b.eval(z)?);
        r.push(kernel.r0.eval(z)?);
    }
    let rr: f64 = r.iter().map(|v| v.norm_sqr()).sum();
    if !(rr > 0.0) {
        return Err(Error::ZeroVector("kernel vanishes on the grid".into()));
    }
    let constant: Complex64 = q.iter().zip(&r).map(|(x, y)| x * y.conj()).sum::<Complex64>() / rr;
    let proportionality_dev = q
        .iter()
        .zip(&r)
        .map(|(x, y)| (x - constant * y).norm())
        .fold(0.0, f64::max);
    Ok(HoComparison {
        proportionality_dev,
        constant,
        excluded,
        kernel,
    })
}
