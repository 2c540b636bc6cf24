//! Truncated power series as elements of a weighted Hardy space.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{make_weight, WeightDescriptor, WeightSequence};

pub const DEFAULT_TRUNCATION: usize = 2048;
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;
const MIN_TRUNCATION: usize = 16;
/// Slack allowed on `|z| ≤ 1` so that `e^{iθ}` passes.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Series degree and the declared bound on discarded tail mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationBudget {
    pub n: usize,
    pub tail_tol: f64,
}

impl Default for TruncationBudget {
    fn default() -> Self {
        TruncationBudget {
            n: DEFAULT_TRUNCATION,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

impl TruncationBudget {
    pub fn new(n: usize, tail_tol: f64) -> Result<Self> {
        if n < MIN_TRUNCATION {
            return Err(Error::InvalidInput(format!(
                "truncation degree must be at least {MIN_TRUNCATION}, got {n}"
            )));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidInput("tail tolerance must be positive".into()));
        }
        Ok(TruncationBudget { n, tail_tol })
    }

    pub fn with_degree(n: usize) -> Result<Self> {
        Self::new(n, DEFAULT_TAIL_TOL)
    }
}

struct SpaceInner {
    weight: WeightSequence,
    omega: Vec<f64>,
    budget: TruncationBudget,
}

/// A weighted Hardy space at a fixed truncation. Cheap to clone.
#[derive(Clone)]
pub struct Space(Arc<SpaceInner>);

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Space")
            .field("weight", &self.0.weight)
            .field("budget", &self.0.budget)
            .finish()
    }
}

impl Space {
    pub fn new(weight: WeightSequence, budget: TruncationBudget) -> Self {
        let omega = weight.table(budget.n + 1);
        Space(Arc::new(SpaceInner {
            weight,
            omega,
            budget,
        }))
    }

    pub fn with_degree(weight: WeightSequence, n: usize) -> Result<Self> {
        Ok(Self::new(weight, TruncationBudget::with_degree(n)?))
    }

    pub fn from_descriptor(d: &WeightDescriptor, budget: TruncationBudget) -> Result<Self> {
        Ok(Self::new(make_weight(d)?, budget))
    }

    pub fn weight(&self) -> &WeightSequence {
        &self.0.weight
    }

    pub fn budget(&self) -> TruncationBudget {
        self.0.budget
    }

    /// Truncation degree `N`; series carry `N + 1` coefficients.
    pub fn degree(&self) -> usize {
        self.0.budget.n
    }

    /// `ω₀, …, ω_N`.
    pub fn omega(&self) -> &[f64] {
        &self.0.omega
    }

    /// Same weight, different truncation.
    pub fn with_budget(&self, budget: TruncationBudget) -> Space {
        Space::new(self.0.weight.clone(), budget)
    }

    pub fn same_weight(&self, other: &Space) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.weight == other.0.weight
    }

    pub fn zero(&self) -> SeriesFn {
        SeriesFn {
            coeffs: vec![Complex64::new(0.0, 0.0); self.degree() + 1],
            space: self.clone(),
        }
    }

    pub fn one(&self) -> SeriesFn {
        self.monomial(0)
    }

    /// `zᵈ`.
    ///
    /// # Panics
    /// If `d` exceeds the truncation degree.
    pub fn monomial(&self, d: usize) -> SeriesFn {
        assert!(d <= self.degree(), "monomial degree {d} exceeds truncation");
        let mut f = self.zero();
        f.coeffs[d] = Complex64::new(1.0, 0.0);
        f
    }

    /// Orthonormal basis element `eₙ = zⁿ/√ωₙ`.
    pub fn basis(&self, n: usize) -> SeriesFn {
        let mut f = self.monomial(n);
        f.coeffs[n] /= self.omega()[n].sqrt();
        f
    }

    /// Builds a series from leading coefficients; the rest are zero.
    pub fn series(&self, coeffs: &[Complex64]) -> Result<SeriesFn> {
        if coeffs.len() > self.degree() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} coefficients exceed truncation degree {}",
                coeffs.len(),
                self.degree()
            )));
        }
        let mut f = self.zero();
        f.coeffs[..coeffs.len()].copy_from_slice(coeffs);
        Ok(f)
    }

    /// Polynomial from real coefficients, lowest degree first.
    pub fn real_poly(&self, coeffs: &[f64]) -> Result<SeriesFn> {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.series(&c)
    }
}

/// Element of a weighted Hardy space: coefficients `a₀ … a_N`.
#[derive(Clone, Debug)]
pub struct SeriesFn {
    coeffs: Vec<Complex64>,
    space: Space,
}

impl SeriesFn {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// Index of the highest coefficient with modulus above `tol`.
    pub fn effective_degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm() > tol)
    }

    fn check_space(&self, other: &SeriesFn) -> Result<()> {
        if self.space.same_weight(&other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn omega(&self) -> &[f64] {
        self.space.omega()
    }

    /// `⟨f, g⟩ = Σ ωₙ aₙ b̄ₙ`; the shorter series is zero-padded.
    pub fn inner_product(&self, other: &SeriesFn) -> Result<Complex64> {
        self.check_space(other)?;
        let w = self.omega();
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(w)
            .map(|((a, b), w)| a * b.conj() * *w)
            .sum())
    }

    /// `⟨zᵐ f, f⟩ = Σₙ ωₙ aₙ₋ₘ āₙ`, computed without forming `zᵐ f`.
    pub fn shifted_self_product(&self, m: usize) -> Complex64 {
        let w = self.omega();
        let a = &self.coeffs;
        (m..a.len()).map(|n| a[n - m] * a[n].conj() * w[n]).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.omega())
            .map(|(a, w)| a.norm_sqr() * w)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<SeriesFn> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroVector("cannot normalize a zero series".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Weighted mass of the top quarter of the coefficients, a proxy for the
    /// neglected tail of a geometrically converging series.
    pub fn tail_mass(&self) -> f64 {
        let start = self.coeffs.len() * 3 / 4;
        self.coeffs[start..]
            .iter()
            .zip(&self.omega()[start..])
            .map(|(a, w)| a.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, c: Complex64) -> SeriesFn {
        SeriesFn {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            space: self.space.clone(),
        }
    }

    /// `self + c·other`, in the longer truncation.
    pub fn axpy(&self, c: Complex64, other: &SeriesFn) -> Result<SeriesFn> {
        self.check_space(other)?;
        let (mut out, short, c_long, c_short) = if self.coeffs.len() >= other.coeffs.len() {
            (self.clone(), other, Complex64::new(1.0, 0.0), c)
        } else {
            (other.clone(), self, c, Complex64::new(1.0, 0.0))
        };
        for a in out.coeffs.iter_mut() {
            *a *= c_long;
        }
        for (a, b) in out.coeffs.iter_mut().zip(&short.coeffs) {
            *a += c_short * b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &SeriesFn) -> Result<SeriesFn> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &SeriesFn) -> Result<SeriesFn> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Cauchy product truncated to the larger of the two truncations.
    pub fn mul(&self, other: &SeriesFn) -> Result<SeriesFn> {
        self.check_space(other)?;
        let space = if self.coeffs.len() >= other.coeffs.len() {
            &self.space
        } else {
            &other.space
        };
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        if let (Some(da), Some(db)) = (self.effective_degree(0.0), other.effective_degree(0.0)) {
            for (i, &ai) in self.coeffs[..=da].iter().enumerate() {
                if ai == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let top = db.min(len - 1 - i);
                for (o, b) in out[i..=i + top].iter_mut().zip(&other.coeffs[..=top]) {
                    *o += ai * b;
                }
            }
        }
        Ok(SeriesFn {
            coeffs: out,
            space: space.clone(),
        })
    }

    /// Multiplication by `zᵐ`, dropping coefficients past the truncation.
    pub fn shift(&self, m: usize) -> SeriesFn {
        let len = self.coeffs.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        if m < len {
            coeffs[m..].copy_from_slice(&self.coeffs[..len - m]);
        }
        SeriesFn {
            coeffs,
            space: self.space.clone(),
        }
    }

    /// Multiplication by `zᵐ` into a space `m` degrees larger, so that no
    /// coefficient is lost.
    pub fn shift_extended(&self, m: usize) -> SeriesFn {
        if m == 0 {
            return self.clone();
        }
        let budget = TruncationBudget {
            n: self.space.degree() + m,
            ..self.space.budget()
        };
        let space = self.space.with_budget(budget);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        coeffs.extend_from_slice(&self.coeffs);
        SeriesFn { coeffs, space }
    }

    /// Same function in another truncation of the same weight, padding or
    /// cutting coefficients.
    pub fn retruncate(&self, space: &Space) -> Result<SeriesFn> {
        if !self.space.same_weight(space) {
            return Err(Error::SpaceMismatch);
        }
        let mut f = space.zero();
        let k = f.coeffs.len().min(self.coeffs.len());
        f.coeffs[..k].copy_from_slice(&self.coeffs[..k]);
        Ok(f)
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_deriv(z, 0)
    }

    /// `f^{(ℓ)}(z)` for the truncated series.
    pub fn eval_deriv(&self, z: Complex64, order: usize) -> Result<Complex64> {
        check_closed_disk(z)?;
        Ok(horner_deriv(&self.coeffs, z, order))
    }

    /// Evaluation with a flag telling whether the value is only
    /// truncation-approximate (boundary points).
    pub fn eval_flagged(&self, z: Complex64) -> Result<Evaluation> {
        let value = self.eval(z)?;
        Ok(Evaluation {
            value,
            approximate: z.norm() >= 1.0 - BOUNDARY_SLACK,
        })
    }

    /// `Σ |aₙ| |z|ⁿ`, the scale of rounding errors in [`SeriesFn::eval`].
    pub fn abs_sum(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
    }

    /// Multiplies so that the lowest coefficient above `rel_tol · max|aₙ|`
    /// becomes positive real. Returns the applied unimodular factor.
    pub fn canonical_phase(&self, rel_tol: f64) -> (SeriesFn, Complex64) {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        match self.coeffs.iter().find(|c| c.norm() > rel_tol * max) {
            Some(c) => {
                let mu = c.conj() / c.norm();
                (self.scale(mu), mu)
            }
            None => (self.clone(), Complex64::new(1.0, 0.0)),
        }
    }

    pub fn to_file(&self) -> SeriesFile {
        SeriesFile {
            weight: self.space.weight().descriptor().clone(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

pub(crate) fn check_closed_disk(z: Complex64) -> Result<()> {
    if !(z.norm() <= 1.0 + BOUNDARY_SLACK) {
        return Err(Error::outside(z, "closed unit disk"));
    }
    Ok(())
}

/// Falling factorial `n (n-1) ⋯ (n-ℓ+1)`.
pub(crate) fn falling(n: usize, order: usize) -> f64 {
    if n < order {
        return 0.0;
    }
    (0..order).map(|j| (n - j) as f64).product()
}

fn horner_deriv(coeffs: &[Complex64], z: Complex64, order: usize) -> Complex64 {
    if coeffs.len() <= order {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (order..coeffs.len()).rev() {
        acc = acc * z + coeffs[n] * falling(n, order);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub approximate: bool,
}

/// JSON form `{"weight": descriptor, "coeffs": [[re, im], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub weight: WeightDescriptor,
    pub coeffs: Vec<[f64; 2]>,
}

impl SeriesFile {
    /// Rebuilds the series in a space whose truncation degree is the larger
    /// of `min_degree` and the file's coefficient count minus one.
    pub fn into_series(self, min_degree: usize) -> Result<SeriesFn> {
        if self.coeffs.is_empty() {
            return Err(Error::InvalidInput("series has no coefficients".into()));
        }
        if self.coeffs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("series has non-finite coefficients".into()));
        }
        let n = (self.coeffs.len() - 1).max(min_degree);
        let space = Space::from_descriptor(&self.weight, TruncationBudget::with_degree(n)?)?;
        let c: Vec<Complex64> = self
            .coeffs
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        space.series(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_coeffs, KernelSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hardy() -> Space {
        Space::with_degree(WeightSequence::hardy(), 256).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let s = hardy();
        let ip = s.monomial(2).inner_product(&s.monomial(3)).unwrap();
        assert_eq!(ip, c(0.0, 0.0));
        let d = Space::with_degree(WeightSequence::dirichlet(), 32).unwrap();
        assert_eq!(d.monomial(2).inner_product(&d.monomial(2)).unwrap(), c(3.0, 0.0));
        let k = kernel_coeffs(&s, &KernelSpec::new(c(0.5, 0.0), 0).unwrap()).unwrap();
        assert!((k.norm_sqr() - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_spaces() {
        let h = hardy();
        let b = Space::with_degree(WeightSequence::bergman(), 256).unwrap();
        assert!(matches!(
            h.one().inner_product(&b.one()),
            Err(Error::SpaceMismatch)
        ));
        assert!(matches!(h.one().mul(&b.one()), Err(Error::SpaceMismatch)));
        // same weight, different truncation is fine
        let h2 = Space::with_degree(WeightSequence::hardy(), 64).unwrap();
        assert_eq!(h.monomial(3).inner_product(&h2.monomial(3)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn norms() {
        let s = hardy();
        assert!((s.basis(2).norm() - 1.0).abs() < 1e-15);
        let d = Space::with_degree(WeightSequence::dirichlet(), 32).unwrap();
        assert!((d.monomial(1).norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.real_poly(&[1.0, 1.0]).unwrap().norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.real_poly(&[3.0, 4.0]).unwrap().normalize().unwrap().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(s.zero().normalize(), Err(Error::ZeroVector(_))));
        let b = Space::with_degree(WeightSequence::bergman(), 32).unwrap();
        assert!((b.basis(7).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multiplication() {
        let s = hardy();
        let f = s.real_poly(&[1.0, -2.0, 0.5]).unwrap();
        let one = s.one();
        assert_eq!(f.mul(&one).unwrap().coeffs(), f.coeffs());
        let p = s.real_poly(&[1.0, 1.0]).unwrap().mul(&s.real_poly(&[1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(&p.coeffs()[..4], &[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let k = kernel_coeffs(&s, &KernelSpec::new(c(0.5, 0.0), 0).unwrap()).unwrap();
        let zk = s.monomial(1).mul(&k).unwrap();
        for n in 0..40 {
            assert!((zk.coeff(n + 1) - c(0.5f64.powi(n as i32), 0.0)).norm() < 1e-15);
        }
        assert_eq!(zk.coeffs(), s.monomial(1).mul(&k).unwrap().coeffs());
        assert_eq!(zk.coeffs(), k.shift(1).coeffs());
    }

    #[test]
    fn evaluation() {
        let s = hardy();
        assert_eq!(s.monomial(2).eval(c(0.5, 0.0)).unwrap(), c(0.25, 0.0));
        let k = kernel_coeffs(&s, &KernelSpec::new(c(0.5, 0.0), 0).unwrap()).unwrap();
        assert!((k.eval(c(0.5, 0.0)).unwrap() - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
        assert_eq!(s.monomial(3).eval_deriv(c(1.0, 0.0), 2).unwrap(), c(6.0, 0.0));
        assert!(matches!(
            s.one().eval(c(1.5, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
        let theta: f64 = 0.3;
        let e = s.one().eval_flagged(c(theta.cos(), theta.sin())).unwrap();
        assert!(e.approximate);
        assert!(!s.one().eval_flagged(c(0.2, 0.0)).unwrap().approximate);
    }

    #[test]
    fn shift_identity() {
        // ⟨z eₙ, eₙ₊₁⟩ = √(ωₙ₊₁/ωₙ), and z eₙ ⟂ eₘ otherwise
        for w in [WeightSequence::bergman(), WeightSequence::dirichlet(), WeightSequence::power(3.0)] {
            let s = Space::with_degree(w.clone(), 40).unwrap();
            for n in 0..20 {
                let ze = s.basis(n).shift(1);
                for m in 0..30 {
                    let ip = ze.inner_product(&s.basis(m)).unwrap();
                    let expect = if m == n + 1 { (w.omega(n + 1) / w.omega(n)).sqrt() } else { 0.0 };
                    assert!((ip - c(expect, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn canonical_phase_and_json() {
        let s = hardy();
        let f = s.series(&[c(0.0, 0.0), c(0.0, 2.0), c(1.0, 1.0)]).unwrap();
        let (g, mu) = f.canonical_phase(1e-12);
        assert!((mu.norm() - 1.0).abs() < 1e-15);
        assert!((g.coeff(1) - c(2.0, 0.0)).norm() < 1e-15);

        let file = f.to_file();
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.starts_with(r#"{"weight":{"kind":"hardy"},"coeffs":[[0.0,0.0],[0.0,2.0]"#));
        let back: SeriesFile = serde_json::from_str(&text).unwrap();
        let g = back.into_series(16).unwrap();
        assert_eq!(g.coeffs(), f.coeffs());
    }

    #[test]
    fn budget_validation() {
        assert!(TruncationBudget::new(8, 1e-10).is_err());
        assert!(TruncationBudget::new(64, 0.0).is_err());
        assert_eq!(TruncationBudget::default().n, 2048);
    }
}
