//! Reproducing kernels `K_λ` and derivative kernels `K^{(ℓ)}_λ`.
//!
//! `K^{(ℓ)}_λ` reproduces the `ℓ`-th derivative: `⟨h, K^{(ℓ)}_λ⟩ = h^{(ℓ)}(λ)`.
//! Its coefficient of `zⁿ` is `(n)_ℓ λ̄^{n-ℓ} / ωₙ` with `(n)_ℓ` the falling
//! factorial. All kernels go through the same coefficient path; there are no
//! closed-form special cases on the construction side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{falling, SeriesFn, Space};
use crate::weights::WeightDescriptor;

pub const DEFAULT_MAX_ORDER: usize = 8;

/// A point of the open disk together with a derivative order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    point: Complex64,
    order: usize,
}

impl KernelSpec {
    pub fn new(point: Complex64, order: usize) -> Result<Self> {
        Self::with_max_order(point, order, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(point: Complex64, order: usize, max_order: usize) -> Result<Self> {
        if !(point.norm() < 1.0) {
            return Err(Error::outside(point, "open unit disk"));
        }
        if order > max_order {
            return Err(Error::InvalidInput(format!(
                "derivative order {order} exceeds the cap {max_order}"
            )));
        }
        Ok(KernelSpec { point, order })
    }

    pub fn point(&self) -> Complex64 {
        self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// `K^{(ℓ)}_λ` truncated to the space's degree.
pub fn kernel_coeffs(space: &Space, spec: &KernelSpec) -> Result<SeriesFn> {
    let lam_bar = spec.point.conj();
    let l = spec.order;
    let omega = space.omega();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); space.degree() + 1];
    let mut pow = Complex64::new(1.0, 0.0);
    for n in l..coeffs.len() {
        coeffs[n] = pow * (falling(n, l) / omega[n]);
        pow *= lam_bar;
    }
    space.series(&coeffs)
}

/// Estimate of the norm of the discarded part of `K^{(ℓ)}_λ`:
/// `Σ_{n>N} (n)_ℓ² |λ|^{2(n-ℓ)} / ωₙ`, summed from the table's last ratio.
pub fn kernel_tail_estimate(space: &Space, spec: &KernelSpec) -> f64 {
    let n = space.degree();
    let r = spec.point.norm();
    if r == 0.0 {
        return 0.0;
    }
    let omega = space.omega();
    let l = spec.order as i32;
    let last = falling(n, spec.order).powi(2) * r.powi(2 * (n as i32 - l)) / omega[n];
    let growth = (omega[n - 1] / omega[n]).max(1.0) * ((n + 1) as f64 / n as f64).powi(2 * l);
    let q = growth * r * r;
    if q >= 1.0 {
        return f64::INFINITY;
    }
    (last * q / (1.0 - q)).sqrt()
}

/// `⟨K^{(ℓ₁)}_{λ₁}, K^{(ℓ₂)}_{λ₂}⟩ = Σₙ (n)_{ℓ₁} (n)_{ℓ₂} λ̄₁^{n-ℓ₁} λ₂^{n-ℓ₂} / ωₙ`,
/// by direct summation over the truncation.
pub fn kernel_gram_entry(space: &Space, s1: &KernelSpec, s2: &KernelSpec) -> Complex64 {
    let (l1, l2) = (s1.order, s2.order);
    let start = l1.max(l2);
    let a = s1.point.conj();
    let b = s2.point;
    let omega = space.omega();
    let mut pa = a.powu((start - l1) as u32);
    let mut pb = b.powu((start - l2) as u32);
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, w) in omega.iter().enumerate().skip(start) {
        sum += pa * pb * (falling(n, l1) * falling(n, l2) / w);
        pa *= a;
        pb *= b;
    }
    sum
}

/// `M*_f K^{(ℓ)}_λ = Σ_{j ≤ ℓ} C(ℓ, j) conj(f^{(j)}(λ)) K^{(ℓ-j)}_λ`.
pub fn adjoint_on_kernel(f: &SeriesFn, spec: &KernelSpec) -> Result<SeriesFn> {
    let space = f.space();
    let l = spec.order;
    let mut out = space.zero();
    let mut binom = 1.0;
    for j in 0..=l {
        let fj = f.eval_deriv(spec.point, j)?;
        let k = kernel_coeffs(space, &KernelSpec::with_max_order(spec.point, l - j, l)?)?;
        out = out.axpy(fj.conj() * binom, &k)?;
        binom = binom * (l - j) as f64 / (j + 1) as f64;
    }
    Ok(out)
}

/// Closed form of `K_λ(z)` for the weights whose kernel is `(1 - λ̄z)^{-γ}`;
/// `None` for the rest.
pub fn closed_form_kernel(weight: &WeightDescriptor, lambda: Complex64, z: Complex64) -> Option<Complex64> {
    let gamma = match weight {
        WeightDescriptor::Hardy => 1.0,
        WeightDescriptor::Bergman => 2.0,
        WeightDescriptor::Power { gamma } => *gamma,
        _ => return None,
    };
    Some((Complex64::new(1.0, 0.0) - lambda.conj() * z).powf(-gamma))
}
