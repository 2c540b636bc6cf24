//! Weight sequences `ω = {ωₙ}` and monomial multiplier diagnostics.
//!
//! Every weight is normalized so that `ω₀ = 1`. Builtin kinds have closed
//! forms; explicit and perturbed weights are validated by a ratio check on a
//! tail window, which is a sanity gate and not a proof of the asymptotic
//! condition `ωₙ₊₁/ωₙ → 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default last index of the ratio-check window.
pub const DEFAULT_CHECK_WINDOW: usize = 1024;
/// Default half-width of the admissible ratio band `[1 - ε, 1 + ε]`.
pub const DEFAULT_RATIO_EPS: f64 = 0.5;

/// JSON weight descriptor.
///
/// ```json
/// {"kind":"hardy"}
/// {"kind":"power","gamma":3.0}
/// {"kind":"explicit","omega":[1.0,2.0,3.0]}
/// {"kind":"perturbed","base":{"kind":"dirichlet"},"overrides":{"1":1.4142135623730951}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightDescriptor {
    Hardy,
    Bergman,
    Dirichlet,
    /// Weight whose kernel is `(1 - λ̄z)^(-γ)`.
    Power { gamma: f64 },
    Explicit { omega: Vec<f64> },
    Perturbed {
        base: Box<WeightDescriptor>,
        #[serde(deserialize_with = "index_map")]
        overrides: BTreeMap<usize, f64>,
    },
}

// Internally tagged enums buffer their content, which loses serde_json's
// string-to-integer key coercion; parse the keys by hand.
fn index_map<'de, D>(de: D) -> std::result::Result<BTreeMap<usize, f64>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    use serde::de::Error as _;
    let raw = BTreeMap::<String, f64>::deserialize(de)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.parse::<usize>()
                .map(|n| (n, v))
                .map_err(|_| D::Error::custom(format!("override index {k:?} is not a nonnegative integer")))
        })
        .collect()
}

/// A validated, immutable weight sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    descriptor: WeightDescriptor,
    rescaled_by: Option<f64>,
}

/// Builds and validates a weight sequence with the default ratio window.
pub fn make_weight(descriptor: &WeightDescriptor) -> Result<WeightSequence> {
    make_weight_with(descriptor, DEFAULT_CHECK_WINDOW, DEFAULT_RATIO_EPS)
}

/// Builds a weight sequence, checking `ωₙ₊₁/ωₙ ∈ [1-eps, 1+eps]` on
/// `[check_window/2, check_window]` for explicit and perturbed kinds.
pub fn make_weight_with(
    descriptor: &WeightDescriptor,
    check_window: usize,
    eps: f64,
) -> Result<WeightSequence> {
    let (descriptor, rescaled_by) = normalize_descriptor(descriptor)?;
    let w = WeightSequence {
        descriptor,
        rescaled_by,
    };
    if !w.is_builtin() {
        w.check_ratio_window(check_window, eps)?;
    }
    Ok(w)
}

fn normalize_descriptor(d: &WeightDescriptor) -> Result<(WeightDescriptor, Option<f64>)> {
    match d {
        WeightDescriptor::Hardy | WeightDescriptor::Bergman | WeightDescriptor::Dirichlet => {
            Ok((d.clone(), None))
        }
        WeightDescriptor::Power { gamma } => {
            if !(gamma.is_finite() && *gamma > 0.0) {
                return Err(Error::InvalidWeight(format!(
                    "power kernel exponent must be positive, got {gamma}"
                )));
            }
            Ok((d.clone(), None))
        }
        WeightDescriptor::Explicit { omega } => {
            if omega.is_empty() {
                return Err(Error::InvalidWeight("explicit weight list is empty".into()));
            }
            if let Some((i, v)) = omega
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v > 0.0))
            {
                return Err(Error::InvalidWeight(format!(
                    "omega[{i}] = {v} is not a positive number"
                )));
            }
            let w0 = omega[0];
            if w0 == 1.0 {
                Ok((d.clone(), None))
            } else {
                let omega = omega.iter().map(|v| v / w0).collect();
                Ok((WeightDescriptor::Explicit { omega }, Some(1.0 / w0)))
            }
        }
        WeightDescriptor::Perturbed { base, overrides } => {
            let (base, rescaled) = normalize_descriptor(base)?;
            if rescaled.is_some() {
                return Err(Error::InvalidWeight(
                    "perturbed base must already satisfy omega[0] = 1".into(),
                ));
            }
            for (&n, &v) in overrides {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidWeight(format!(
                        "override omega[{n}] = {v} is not a positive number"
                    )));
                }
                if n == 0 && v != 1.0 {
                    return Err(Error::InvalidWeight(
                        "override of omega[0] must equal 1".into(),
                    ));
                }
            }
            Ok((
                WeightDescriptor::Perturbed {
                    base: Box::new(base),
                    overrides: overrides.clone(),
                },
                None,
            ))
        }
    }
}

impl WeightSequence {
    pub fn hardy() -> Self {
        Self::builtin(WeightDescriptor::Hardy)
    }

    pub fn bergman() -> Self {
        Self::builtin(WeightDescriptor::Bergman)
    }

    pub fn dirichlet() -> Self {
        Self::builtin(WeightDescriptor::Dirichlet)
    }

    /// # Panics
    /// If `gamma` is not a positive finite number.
    pub fn power(gamma: f64) -> Self {
        make_weight(&WeightDescriptor::Power { gamma }).expect("positive gamma")
    }

    fn builtin(descriptor: WeightDescriptor) -> Self {
        WeightSequence {
            descriptor,
            rescaled_by: None,
        }
    }

    pub fn descriptor(&self) -> &WeightDescriptor {
        &self.descriptor
    }

    /// Factor applied to an explicit list to force `ω₀ = 1`, if any.
    pub fn rescaled_by(&self) -> Option<f64> {
        self.rescaled_by
    }

    pub fn is_builtin(&self) -> bool {
        matches!(
            self.descriptor,
            WeightDescriptor::Hardy
                | WeightDescriptor::Bergman
                | WeightDescriptor::Dirichlet
                | WeightDescriptor::Power { .. }
        )
    }

    /// `ωₙ`. Explicit lists are held constant past their last entry.
    pub fn omega(&self, n: usize) -> f64 {
        omega_of(&self.descriptor, n)
    }

    /// `ω₀, …, ω_{len-1}`.
    pub fn table(&self, len: usize) -> Vec<f64> {
        table_of(&self.descriptor, len)
    }

    fn check_ratio_window(&self, check_window: usize, eps: f64) -> Result<()> {
        let hi = match &self.descriptor {
            WeightDescriptor::Explicit { omega } => check_window.min(omega.len().saturating_sub(1)),
            _ => check_window,
        };
        let lo = hi / 2;
        let table = self.table(hi + 1);
        for n in lo..hi {
            let ratio = table[n + 1] / table[n];
            if !(ratio >= 1.0 - eps && ratio <= 1.0 + eps) {
                return Err(Error::WeightConditionViolation { index: n, ratio });
            }
        }
        Ok(())
    }
}

fn omega_of(d: &WeightDescriptor, n: usize) -> f64 {
    match d {
        WeightDescriptor::Hardy => 1.0,
        WeightDescriptor::Bergman => 1.0 / (n as f64 + 1.0),
        WeightDescriptor::Dirichlet => n as f64 + 1.0,
        WeightDescriptor::Power { gamma } => power_table(*gamma, n + 1)[n],
        WeightDescriptor::Explicit { omega } => omega[n.min(omega.len() - 1)],
        WeightDescriptor::Perturbed { base, overrides } => match overrides.get(&n) {
            Some(v) => *v,
            None => omega_of(base, n),
        },
    }
}

fn table_of(d: &WeightDescriptor, len: usize) -> Vec<f64> {
    match d {
        WeightDescriptor::Power { gamma } => power_table(*gamma, len),
        WeightDescriptor::Perturbed { base, overrides } => {
            let mut t = table_of(base, len);
            for (&n, &v) in overrides.range(..len) {
                t[n] = v;
            }
            t
        }
        _ => (0..len).map(|n| omega_of(d, n)).collect(),
    }
}

// ω₀ = 1, ωₙ = ωₙ₋₁ · n / (n + γ - 1): the reciprocal generalized binomial
// coefficient C(n + γ - 1, n).
fn power_table(gamma: f64, len: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(len);
    let mut w = 1.0;
    for n in 0..len {
        if n > 0 {
            w *= n as f64 / (n as f64 + gamma - 1.0);
        }
        t.push(w);
    }
    t
}

/// Window supremum of `√(ω_{n+m}/ωₙ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiplierNorm {
    pub value: f64,
    pub argmax: usize,
    /// The supremum was attained at the window edge, so the analytic value
    /// may be larger.
    pub possibly_truncated: bool,
}

/// `sup_{0 ≤ n ≤ window} √(ω_{n+m}/ωₙ)`, the norm of multiplication by `zᵐ`
/// restricted to the first `window + 1` basis vectors.
pub fn monomial_multiplier_norm(w: &WeightSequence, m: usize, window: usize) -> Result<MultiplierNorm> {
    if m == 0 || window == 0 {
        return Err(Error::InvalidInput(
            "monomial power and window must both be at least 1".into(),
        ));
    }
    let t = w.table(window + m + 1);
    let mut best = MultiplierNorm {
        value: f64::NEG_INFINITY,
        argmax: 0,
        possibly_truncated: false,
    };
    for n in 0..=window {
        let r = (t[n + m] / t[n]).sqrt();
        if r > best.value {
            best.value = r;
            best.argmax = n;
        }
    }
    best.possibly_truncated = best.argmax == window;
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MonomialClass {
    Contractive,
    Expansive,
    Both,
    Neither,
}

/// Window-verified classification of `z^k` as a contractive or expansive
/// multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialClassification {
    pub class: MonomialClass,
    /// First `n` with `ω_{n+k} > ωₙ ωₖ`.
    pub contractive_witness: Option<usize>,
    /// First `n` with `ω_{n+k} < ωₙ ωₖ`.
    pub expansive_witness: Option<usize>,
    pub window: usize,
}

const CLASSIFY_REL_TOL: f64 = 1e-12;

/// `zᵏ` is contractive iff `ω_{n+k} ≤ ωₙωₖ` and expansive iff
/// `ω_{n+k} ≥ ωₙωₖ`, checked for `0 ≤ n ≤ window`.
pub fn classify_monomial_inner(
    w: &WeightSequence,
    k: usize,
    window: usize,
) -> Result<MonomialClassification> {
    if k == 0 {
        return Err(Error::InvalidInput("monomial power must be at least 1".into()));
    }
    let t = w.table(window + k + 1);
    let mut contractive_witness = None;
    let mut expansive_witness = None;
    for n in 0..=window {
        let lhs = t[n + k];
        let rhs = t[n] * t[k];
        let slack = CLASSIFY_REL_TOL * rhs.abs();
        if contractive_witness.is_none() && lhs > rhs + slack {
            contractive_witness = Some(n);
        }
        if expansive_witness.is_none() && lhs < rhs - slack {
            expansive_witness = Some(n);
        }
    }
    let class = match (contractive_witness, expansive_witness) {
        (None, None) => MonomialClass::Both,
        (None, Some(_)) => MonomialClass::Contractive,
        (Some(_), None) => MonomialClass::Expansive,
        (Some(_), Some(_)) => MonomialClass::Neither,
    };
    Ok(MonomialClassification {
        class,
        contractive_witness,
        expansive_witness,
        window,
    })
}
