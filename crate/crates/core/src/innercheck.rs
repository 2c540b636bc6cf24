//! Independent numerical tests of inner-ness.
//!
//! * the definition: `‖f‖ = 1` and `⟨zᵐ f, f⟩ = 0` for `1 ≤ m ≤ M`;
//! * the `φ_k` test: `φ_k(λ) = ‖f (zᵏ + λ)‖² - |λ|²` has no linear drift in `λ`;
//! * the expansive inequality `|p(0)| ≤ ‖p f‖` over sampled polynomials;
//! * the operator identity `M*_f M_f 1 = 1`.
//!
//! Finite `M`, finitely many `k` and finitely many sampled `p` make every
//! test window-verified only.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::blaschke::{build_family, Constraint};
use crate::error::{Error, Result};
use crate::projector::project_complement_detailed;
use crate::series::{SeriesFn, Space};

pub const DEFAULT_M_ORTHO: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_K: usize = 8;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_POLY_DEGREE: usize = 8;
pub const DEFAULT_SEED: u64 = 0;
/// Sample points `t` used to fit the drift of `t ↦ φ_k(t·u)`.
const SLOPE_SAMPLES: [f64; 9] = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefinitionCheck {
    /// `|‖f‖ - 1|`.
    pub norm_dev: f64,
    /// `max_{1 ≤ m ≤ M} |⟨zᵐ f, f⟩|`.
    pub ortho_defect: f64,
}

/// Exact weighted-coefficient sums for the definition of inner-ness.
pub fn check_definition(f: &SeriesFn, max_power: usize) -> Result<DefinitionCheck> {
    let norm = f.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroVector("inner-ness of the zero series".into()));
    }
    let ortho_defect = (1..=max_power)
        .map(|m| f.shifted_self_product(m).norm())
        .fold(0.0, f64::max);
    Ok(DefinitionCheck {
        norm_dev: (norm - 1.0).abs(),
        ortho_defect,
    })
}

/// `φ_k(λ) = ‖zᵏ f‖² + 2 Re(λ̄ ⟨zᵏ f, f⟩)`.
pub fn phi_k(f: &SeriesFn, k: usize, lambda: Complex64) -> f64 {
    let zkf_norm = shifted_norm_sqr(f, k);
    zkf_norm + 2.0 * (lambda.conj() * f.shifted_self_product(k)).re
}

/// `‖f·(zᵏ + λ)‖² - |λ|²`, the unexpanded form of [`phi_k`]. The two agree
/// when `‖f‖ = 1`.
pub fn phi_k_raw(f: &SeriesFn, k: usize, lambda: Complex64) -> f64 {
    let g = f.shift_extended(k).axpy(lambda, f).expect("same space");
    g.norm_sqr() - lambda.norm_sqr()
}

/// `‖zᵏ f‖²` without truncating the shifted series.
fn shifted_norm_sqr(f: &SeriesFn, k: usize) -> f64 {
    f.shift_extended(k).norm_sqr()
}

/// Least-squares slope of `t ↦ φ_k(t·direction)` from the unexpanded form on a
/// symmetric grid of `t`.
pub fn phi_k_slope(f: &SeriesFn, k: usize, direction: Complex64) -> f64 {
    let g0 = f.shift_extended(k);
    let n = SLOPE_SAMPLES.len() as f64;
    let mean_t = SLOPE_SAMPLES.iter().sum::<f64>() / n;
    let ys: Vec<f64> = SLOPE_SAMPLES
        .iter()
        .map(|&t| {
            let lam = direction * t;
            g0.axpy(lam, f).expect("same space").norm_sqr() - lam.norm_sqr()
        })
        .collect();
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&t, y) in SLOPE_SAMPLES.iter().zip(&ys) {
        sxy += (t - mean_t) * (y - mean_y);
        sxx += (t - mean_t) * (t - mean_t);
    }
    sxy / sxx
}

/// Largest drift of `φ_k` along a unit direction: the fitted slope along
/// `λ = t·⟨zᵏ f, f⟩/|⟨zᵏ f, f⟩|` (direction 1 when the pairing vanishes).
pub fn phi_k_drift(f: &SeriesFn, k: usize) -> f64 {
    let c = f.shifted_self_product(k);
    let dir = if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) };
    phi_k_slope(f, k, dir).abs()
}

/// `‖f (zᵏ + λ)‖² / |λ|²`, which tends to `‖f‖²` as `|λ| → ∞`.
pub fn phi_limit_ratio(f: &SeriesFn, k: usize, lambda: Complex64) -> f64 {
    let g = f.shift_extended(k).axpy(lambda, f).expect("same space");
    g.norm_sqr() / lambda.norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansiveCheck {
    pub violations: usize,
    pub trials: usize,
    /// `min (‖p f‖ - |p(0)|)` over all tried `p`.
    pub worst_margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingOptions {
    pub trials: usize,
    pub degree: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            trials: DEFAULT_TRIALS,
            degree: DEFAULT_POLY_DEGREE,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
        }
    }
}

/// Counts violations of `|p(0)| ≤ ‖p f‖ + tol`.
///
/// `trials` random polynomials with standard complex Gaussian coefficients
/// and degrees cycling through `0..=degree` are tried, followed by the probes
/// `p = 1 - t·conj(⟨zᵏ f, f⟩) zᵏ` for `k ≤ degree` and `t` on a grid, which
/// are the directions along which a non-inner `f` fails.
pub fn check_expansive_inequality(f: &SeriesFn, options: SamplingOptions) -> ExpansiveCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut tried = 0;
    let mut record = |p: &[Complex64]| {
        let margin = poly_times_norm(p, f) - p[0].norm();
        worst = worst.min(margin);
        tried += 1;
        if margin < -options.tol {
            violations += 1;
        }
    };
    for i in 0..options.trials {
        let d = i % (options.degree + 1);
        let p: Vec<Complex64> = (0..=d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        record(&p);
    }
    for k in 1..=options.degree.max(1) {
        let c = f.shifted_self_product(k);
        let denom = shifted_norm_sqr(f, k).max(f64::MIN_POSITIVE);
        for step in 1..=8 {
            // 1 - 2t|c|² + t²|c|²‖zᵏf‖² is minimized at t = 1/‖zᵏf‖².
            let t = step as f64 / 4.0 / denom;
            let mut p = vec![Complex64::new(0.0, 0.0); k + 1];
            p[0] = Complex64::new(1.0, 0.0);
            p[k] = -c.conj() * t;
            record(&p);
        }
    }
    ExpansiveCheck {
        violations,
        trials: tried,
        worst_margin: worst,
    }
}

/// `‖p f‖` for a short polynomial `p`, without truncating the product.
fn poly_times_norm(p: &[Complex64], f: &SeriesFn) -> f64 {
    let a = f.coeffs();
    let len = a.len() + p.len() - 1;
    let omega = f.space().weight().table(len);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (i, pi) in p.iter().enumerate() {
        for (o, aj) in out[i..].iter_mut().zip(a) {
            *o += pi * aj;
        }
    }
    out.iter().zip(&omega).map(|(c, w)| c.norm_sqr() * w).sum::<f64>().sqrt()
}

/// `M*_f M_f 1 = Σ_{m ≤ M} ⟨f, zᵐ f⟩ zᵐ / ωₘ`.
pub fn mstar_mf_one(f: &SeriesFn, max_power: usize) -> SeriesFn {
    let space = f.space();
    let top = max_power.min(space.degree());
    let omega = space.omega();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); top + 1];
    for (m, c) in coeffs.iter_mut().enumerate() {
        *c = f.shifted_self_product(m).conj() / omega[m];
    }
    space.series(&coeffs).expect("within truncation")
}

/// `‖M*_f M_f 1 - 1‖`.
pub fn mstar_residual(f: &SeriesFn, max_power: usize) -> f64 {
    let g = mstar_mf_one(f, max_power);
    g.sub(&f.space().one()).expect("same space").norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Inner,
    NotInner,
    Inconclusive,
}

/// Verdicts of the four characterizations taken one at a time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Characterizations {
    pub definition: Verdict,
    pub phi: Verdict,
    pub expansive: Verdict,
    pub mstar: Verdict,
}

impl Characterizations {
    pub fn agree(&self) -> bool {
        self.definition == self.phi && self.phi == self.expansive && self.expansive == self.mstar
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerReport {
    pub norm_dev: f64,
    pub ortho_defect: f64,
    /// Drift of `φ_k` for `k = 1, …, K`.
    pub phi_k_drift: Vec<f64>,
    pub mstar_residual: f64,
    pub expansive_violations: usize,
    pub expansive_trials: usize,
    pub characterizations: Characterizations,
    pub verdict: Verdict,
    pub tol: f64,
    pub m_ortho: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub m_ortho: usize,
    pub max_k: usize,
    pub tol: f64,
    pub sampling: SamplingOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            m_ortho: DEFAULT_M_ORTHO,
            max_k: DEFAULT_MAX_K,
            tol: DEFAULT_TOL,
            sampling: SamplingOptions::default(),
        }
    }
}

fn grade(residual: f64, tol: f64) -> Verdict {
    if residual < tol {
        Verdict::Inner
    } else if residual <= 100.0 * tol {
        Verdict::Inconclusive
    } else {
        Verdict::NotInner
    }
}

/// Runs every characterization and combines them. `Inner` needs every test
/// below `tol`; any residual above `100·tol` or any expansive violation gives
/// `NotInner`; anything in between is `Inconclusive`.
pub fn verify(f: &SeriesFn, options: VerifyOptions) -> Result<InnerReport> {
    let def = check_definition(f, options.m_ortho)?;
    let phi_k_drift: Vec<f64> = (1..=options.max_k).map(|k| phi_k_drift(f, k)).collect();
    let max_drift = phi_k_drift.iter().cloned().fold(0.0, f64::max);
    let mstar_residual = mstar_residual(f, options.m_ortho);
    let sampling = SamplingOptions {
        tol: options.tol,
        ..options.sampling
    };
    let expansive = check_expansive_inequality(f, sampling);
    let tol = options.tol;

    let phi = if def.norm_dev >= tol {
        // φ-boundedness alone also pins ‖f‖ = 1.
        grade(max_drift.max(def.norm_dev), tol)
    } else {
        grade(max_drift, tol)
    };
    let expansive_verdict = if expansive.violations > 0 {
        Verdict::NotInner
    } else {
        grade(def.norm_dev, tol)
    };
    let characterizations = Characterizations {
        definition: grade(def.norm_dev.max(def.ortho_defect), tol),
        phi,
        expansive: expansive_verdict,
        mstar: grade(mstar_residual.max(def.norm_dev), tol),
    };
    let all = [
        characterizations.definition,
        characterizations.phi,
        characterizations.expansive,
        characterizations.mstar,
    ];
    let verdict = if all.iter().all(|v| *v == Verdict::Inner) {
        Verdict::Inner
    } else if all.contains(&Verdict::NotInner) {
        Verdict::NotInner
    } else {
        Verdict::Inconclusive
    };
    Ok(InnerReport {
        norm_dev: def.norm_dev,
        ortho_defect: def.ortho_defect,
        phi_k_drift,
        mstar_residual,
        expansive_violations: expansive.violations,
        expansive_trials: expansive.trials,
        characterizations,
        verdict,
        tol,
        m_ortho: options.m_ortho,
    })
}

#[derive(Clone, Debug)]
pub struct ExtremalSolution {
    /// `‖P_M(z^d)‖`, the optimum of the extremal problem.
    pub value: f64,
    /// `P_M(z^d)/‖P_M(z^d)‖`.
    pub extremal_function: SeriesFn,
    pub gram_condition: f64,
}

/// Norm of the projection of `z^d` onto the complement of the constraint
/// family, together with the normalized extremal function.
pub fn extremal_value(space: &Space, constraints: &[Constraint], d: usize) -> Result<ExtremalSolution> {
    if d > space.degree() {
        return Err(Error::InvalidInput("target degree exceeds the truncation".into()));
    }
    let vs = build_family(space, constraints)?;
    let proj = project_complement_detailed(&space.monomial(d), &vs)?;
    let value = proj.complement.norm();
    Ok(ExtremalSolution {
        value,
        extremal_function: proj.complement.normalize()?,
        gram_condition: proj.gram.condition,
    })
}
