//! Analogues of finite Blaschke products in a weighted Hardy space.
//!
//! For a zero prescription `(d₀; z₁^{m₁}, …, zₛ^{mₛ})` the analogue is the
//! normalized projection of `z^{d₀}` onto the orthogonal complement of
//!
//! ```text
//! {1, z, …, z^{d₀-1}} ∪ {K^{(ℓ)}_{zⱼ} : 0 ≤ ℓ < mⱼ}
//! ```
//!
//! so it vanishes to order `d₀` at the origin and to order `mⱼ` at `zⱼ`. In
//! the Hardy space it coincides, up to a unimodular constant, with the
//! classical product `z^{d₀} Π ((z - zⱼ)/(1 - z̄ⱼ z))^{mⱼ}`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_coeffs, KernelSpec, DEFAULT_MAX_ORDER};
use crate::projector::project_complement_detailed;
use crate::series::{check_closed_disk, SeriesFn, Space};
use crate::weights::WeightDescriptor;

/// Coefficients below this fraction of the largest one count as zero when
/// fixing the phase.
pub const PHASE_REL_TOL: f64 = 1e-10;
/// Relative size below which the top derivative-kernel component of a zero is
/// reported as vanished.
const DEGREE_FLAG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrescribedZero {
    /// Serialized as `[re, im]`.
    pub z: Complex64,
    #[serde(default = "one")]
    pub mult: usize,
}

fn one() -> usize {
    1
}

/// Zero prescription; JSON `{"d0":1,"zeros":[{"z":[0.5,0.0],"mult":2}]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlaschkeSpec {
    #[serde(default)]
    pub d0: usize,
    #[serde(default)]
    pub zeros: Vec<PrescribedZero>,
}

impl BlaschkeSpec {
    pub fn monomial(d0: usize) -> Self {
        BlaschkeSpec { d0, zeros: vec![] }
    }

    pub fn simple_zeros(d0: usize, zeros: &[Complex64]) -> Self {
        BlaschkeSpec {
            d0,
            zeros: zeros.iter().map(|&z| PrescribedZero { z, mult: 1 }).collect(),
        }
    }

    pub fn total_degree(&self) -> usize {
        self.d0 + self.zeros.iter().map(|z| z.mult).sum::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_degree() == 0 {
            return Err(Error::InvalidInput(
                "spec must prescribe at least one zero (d0 + sum of multiplicities >= 1)".into(),
            ));
        }
        for (i, zj) in self.zeros.iter().enumerate() {
            let r = zj.z.norm();
            if !r.is_finite() || r == 0.0 {
                return Err(Error::InvalidInput(format!(
                    "zeros[{i}].z must be nonzero; use d0 for the origin"
                )));
            }
            if r >= 1.0 {
                return Err(Error::outside(zj.z, "zeros must lie in the open unit disk"));
            }
            if zj.mult == 0 {
                return Err(Error::InvalidInput(format!("zeros[{i}].mult must be at least 1")));
            }
            if zj.mult > DEFAULT_MAX_ORDER + 1 {
                return Err(Error::InvalidInput(format!(
                    "zeros[{i}].mult exceeds the derivative-kernel cap {}",
                    DEFAULT_MAX_ORDER + 1
                )));
            }
            if self.zeros[..i].iter().any(|zk| zk.z == zj.z) {
                return Err(Error::InvalidInput(format!("zeros[{i}].z repeats an earlier zero")));
            }
        }
        Ok(())
    }

    /// The constraint family whose complement contains the analogue.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = (0..self.d0).map(Constraint::Monomial).collect();
        for zj in &self.zeros {
            for l in 0..zj.mult {
                out.push(Constraint::Kernel {
                    point: zj.z,
                    order: l,
                });
            }
        }
        out
    }
}

/// Element of a constraint family: a monomial or a derivative kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    Monomial(usize),
    Kernel { point: Complex64, order: usize },
}

impl Constraint {
    pub fn build(&self, space: &Space) -> Result<SeriesFn> {
        match *self {
            Constraint::Monomial(d) => {
                if d > space.degree() {
                    return Err(Error::InvalidInput(format!(
                        "monomial z^{d} exceeds the truncation degree"
                    )));
                }
                Ok(space.monomial(d))
            }
            Constraint::Kernel { point, order } => {
                kernel_coeffs(space, &KernelSpec::with_max_order(point, order, order.max(DEFAULT_MAX_ORDER))?)
            }
        }
    }
}

pub fn build_family(space: &Space, family: &[Constraint]) -> Result<Vec<SeriesFn>> {
    family.iter().map(|c| c.build(space)).collect()
}

/// One term of the expansion `B = Σ coefficient · element`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisTerm {
    pub element: Constraint,
    pub coefficient: Complex64,
}

#[derive(Clone, Debug)]
pub struct InnerFunctionResult {
    /// Unit-norm analogue with canonical phase.
    pub b: SeriesFn,
    pub spec: BlaschkeSpec,
    /// Condition number of the Jacobi-scaled constraint Gram matrix.
    pub gram_condition: f64,
    /// Fitted unimodular constant against the classical product (Hardy only).
    pub constant_vs_oracle: Option<Complex64>,
    /// `B` as `z^{d₀}` plus constraint elements.
    pub expansion: Vec<BasisTerm>,
    /// Zeros whose top derivative-kernel component vanished numerically, so
    /// that the degree bookkeeping of the expansion is lower than prescribed.
    pub degree_flags: Vec<usize>,
}

/// Normalized projection of `z^{d₀}` onto the complement of the spec's
/// constraint family, with the lowest nonzero coefficient made positive.
pub fn construct_blaschke_analogue(space: &Space, spec: &BlaschkeSpec) -> Result<InnerFunctionResult> {
    spec.validate()?;
    if spec.d0 > space.degree() {
        return Err(Error::InvalidInput("d0 exceeds the truncation degree".into()));
    }
    let family = spec.constraints();
    let vs = build_family(space, &family)?;
    let target = space.monomial(spec.d0);
    let proj = project_complement_detailed(&target, &vs)?;
    let norm = proj.complement.norm();
    if !(norm > 1e-12) {
        return Err(Error::ZeroVector(
            "projection annihilates the target; the prescription is inconsistent".into(),
        ));
    }
    let normalized = proj.complement.scale(Complex64::new(1.0 / norm, 0.0));
    let (b, mu) = normalized.canonical_phase(PHASE_REL_TOL);
    let kappa = mu / norm;

    let mut expansion = vec![BasisTerm {
        element: Constraint::Monomial(spec.d0),
        coefficient: kappa,
    }];
    expansion.extend(family.iter().zip(&proj.coefficients).map(|(e, c)| BasisTerm {
        element: *e,
        coefficient: -kappa * c,
    }));

    let mut degree_flags = Vec::new();
    let mut offset = spec.d0;
    for (j, zj) in spec.zeros.iter().enumerate() {
        let top = offset + zj.mult - 1;
        let contribution = (kappa * proj.coefficients[top]).norm() * vs[top].norm();
        if contribution < DEGREE_FLAG_TOL {
            degree_flags.push(j);
        }
        offset += zj.mult;
    }

    let constant_vs_oracle = if *space.weight().descriptor() == WeightDescriptor::Hardy {
        let oracle = classical_blaschke(space, spec)?;
        Some(compare_to_oracle(&b, &oracle, &DiskGrid::polar(8, 32, 0.95).points)?.fitted_phase)
    } else {
        None
    };

    Ok(InnerFunctionResult {
        b,
        spec: spec.clone(),
        gram_condition: proj.gram.condition,
        constant_vs_oracle,
        expansion,
        degree_flags,
    })
}

/// Series of `(z - a)/(1 - āz)`: `-a`, then `ā^{n-1}(1 - |a|²)`.
fn blaschke_factor(space: &Space, a: Complex64) -> Result<SeriesFn> {
    let n = space.degree();
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[0] = -a;
    let s = 1.0 - a.norm_sqr();
    let mut pow = Complex64::new(1.0, 0.0);
    for coeff in c.iter_mut().skip(1) {
        *coeff = pow * s;
        pow *= a.conj();
    }
    space.series(&c)
}

/// Truncated series of `z^{d₀} Π ((z - zⱼ)/(1 - z̄ⱼ z))^{mⱼ}`.
pub fn classical_blaschke(space: &Space, spec: &BlaschkeSpec) -> Result<SeriesFn> {
    spec.validate()?;
    if spec.d0 > space.degree() {
        return Err(Error::InvalidInput("d0 exceeds the truncation degree".into()));
    }
    let mut b = space.monomial(spec.d0);
    for zj in &spec.zeros {
        let factor = blaschke_factor(space, zj.z)?;
        for _ in 0..zj.mult {
            b = b.mul(&factor)?;
        }
    }
    Ok(b)
}

/// Evaluation grid inside the closed disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskGrid {
    pub points: Vec<Complex64>,
}

impl DiskGrid {
    /// `n_r` radii `r_max·k/n_r` (k = 1..n_r) times `n_theta` angles, plus the
    /// origin.
    pub fn polar(n_r: usize, n_theta: usize, r_max: f64) -> Self {
        let mut points = vec![Complex64::new(0.0, 0.0)];
        for k in 1..=n_r {
            let r = r_max * k as f64 / n_r as f64;
            for t in 0..n_theta {
                let theta = 2.0 * std::f64::consts::PI * (t as f64 + 0.5 * (k % 2) as f64) / n_theta as f64;
                points.push(Complex64::from_polar(r, theta));
            }
        }
        DiskGrid { points }
    }

    /// Drops points within `radius` of any of `centers`; returns the number of
    /// excluded points.
    pub fn exclude_disks(&mut self, centers: &[Complex64], radius: f64) -> usize {
        let before = self.points.len();
        self.points.retain(|p| centers.iter().all(|c| (p - c).norm() >= radius));
        before - self.points.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleComparison {
    pub max_deviation: f64,
    pub fitted_phase: Complex64,
}

/// Fits a unimodular `μ` minimizing `max |B - μ·oracle|` over the grid.
pub fn compare_to_oracle(b: &SeriesFn, oracle: &SeriesFn, grid: &[Complex64]) -> Result<OracleComparison> {
    let bv = grid.iter().map(|&z| b.eval(z)).collect::<Result<Vec<_>>>()?;
    let ov = grid.iter().map(|&z| oracle.eval(z)).collect::<Result<Vec<_>>>()?;
    let deviation = |theta: f64| {
        let mu = Complex64::from_polar(1.0, theta);
        bv.iter()
            .zip(&ov)
            .map(|(x, y)| (x - mu * y).norm())
            .fold(0.0, f64::max)
    };
    let corr: Complex64 = bv.iter().zip(&ov).map(|(x, y)| x * y.conj()).sum();
    let theta0 = if corr.norm() > 0.0 { corr.arg() } else { 0.0 };

    // Coarse scan around the circle, then golden-section refinement.
    let steps = 64;
    let h = 2.0 * std::f64::consts::PI / steps as f64;
    let mut best = (deviation(theta0), theta0);
    for k in 1..steps {
        let t = theta0 + h * k as f64;
        let d = deviation(t);
        if d < best.0 {
            best = (d, t);
        }
    }
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (deviation(x1), deviation(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = deviation(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = deviation(x2);
        }
    }
    let (fm, tm) = if f1 <= f2 { (f1, x1) } else { (f2, x2) };
    if fm < best.0 {
        best = (fm, tm);
    }
    Ok(OracleComparison {
        max_deviation: best.0,
        fitted_phase: Complex64::from_polar(1.0, best.1),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroKind {
    Prescribed,
    Extraneous,
    Spurious,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroEntry {
    pub z: Complex64,
    pub multiplicity: usize,
    /// Multiplicity-one flag.
    pub simple: bool,
    pub kind: ZeroKind,
    /// `|B(z)|` at the reported location.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Scan `|z| ≤ radius`; at most 1.
    pub radius: f64,
    /// Newton seeds per radial line and per quarter turn of the seed grid.
    pub grid_density: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            radius: 0.999,
            grid_density: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZeroScan {
    pub zeros: Vec<ZeroEntry>,
    /// Degree of the trimmed polynomial handed to the companion matrix.
    pub companion_degree: usize,
}

impl ZeroScan {
    pub fn extraneous(&self) -> impl Iterator<Item = &ZeroEntry> {
        self.zeros.iter().filter(|z| z.kind == ZeroKind::Extraneous)
    }

    pub fn prescribed(&self) -> impl Iterator<Item = &ZeroEntry> {
        self.zeros.iter().filter(|z| z.kind == ZeroKind::Prescribed)
    }
}

/// Coefficients below this fraction of the largest are dropped from the top
/// before building the companion matrix.
const TRIM_REL_TOL: f64 = 1e-17;
const MAX_COMPANION_DEGREE: usize = 1200;
/// Low-order coefficients below this fraction of the largest are treated as
/// exact zeros at the origin.
const ORIGIN_REL_TOL: f64 = 1e-12;
const CLUSTER_RADIUS: f64 = 1e-4;
/// Companion eigenvalues of one multiple root stay this close before polishing.
const RAW_CLUSTER_RADIUS: f64 = 2e-2;
const MATCH_RADIUS: f64 = 1e-4;

/// Finds the zeros of the truncated series in `|z| ≤ radius`, classifies them
/// against the prescription and rejects truncation artifacts.
///
/// Candidates come from the eigenvalues of the companion matrix of the
/// trimmed polynomial and from Newton iterations seeded on a polar grid. A
/// candidate is genuine when `|B|` there is below ten times the truncation
/// and rounding bound and, when `refined` (the same function at a larger
/// truncation) is supplied, the refined series passes the same test.
pub fn scan_extraneous_zeros(
    b: &SeriesFn,
    spec: &BlaschkeSpec,
    options: ScanOptions,
    refined: Option<&SeriesFn>,
) -> Result<ZeroScan> {
    if !(options.radius > 0.0 && options.radius <= 1.0) {
        return Err(Error::outside(
            Complex64::new(options.radius, 0.0),
            "scan radius must lie in (0, 1]",
        ));
    }
    let a = b.coeffs();
    let max = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::ZeroVector("cannot scan the zero series".into()));
    }
    let top = a
        .iter()
        .rposition(|c| c.norm() > TRIM_REL_TOL * max)
        .unwrap_or(0)
        .min(MAX_COMPANION_DEGREE);
    let origin_mult = a[..=top].iter().take_while(|c| c.norm() <= ORIGIN_REL_TOL * max).count();

    let mut origin: Vec<(Complex64, usize)> = Vec::new();
    if origin_mult > 0 {
        origin.push((Complex64::new(0.0, 0.0), origin_mult));
    }
    let reduced = &a[origin_mult..=top];
    // Companion eigenvalues split a multiple root into a small ring, and
    // polishing pulls the ring together. Eigenvalues that polish onto the
    // same root from far apart are duplicates, not multiplicity.
    let mut raw_clusters: Vec<RootCluster> = Vec::new();
    for root in companion_roots(reduced) {
        if root.norm() > options.radius + 0.05 {
            continue;
        }
        add_to_clusters(&mut raw_clusters, root, polish(b, root));
    }
    let mut candidates: Vec<(Complex64, usize)> = origin
        .into_iter()
        .chain(raw_clusters.iter().map(|c| (c.polished_sum / c.count as f64, c.count)))
        .collect();
    for seed in seed_grid(options) {
        if let Some(z) = newton(b, seed) {
            if candidates.iter().all(|(c, _)| (c - z).norm() > CLUSTER_RADIUS) {
                candidates.push((z, 1));
            }
        }
    }

    let tail_from = top + 1;
    let mut zeros = Vec::new();
    for (z, m) in candidates {
        if z.norm() > options.radius {
            continue;
        }
        let residual = b.eval(z)?.norm();
        let genuine = passes_residual(b, z, tail_from)?
            && match refined {
                Some(r) => passes_residual(r, z, r.coeffs().len())?,
                None => true,
            };
        zeros.push(ZeroEntry {
            z,
            multiplicity: m,
            simple: m == 1,
            kind: if genuine { ZeroKind::Extraneous } else { ZeroKind::Spurious },
            residual,
        });
    }

    // Match genuine zeros against the prescription.
    let mut budget: Vec<(Complex64, usize)> = spec.zeros.iter().map(|z| (z.z, z.mult)).collect();
    if spec.d0 > 0 {
        budget.push((Complex64::new(0.0, 0.0), spec.d0));
    }
    let mut split = Vec::new();
    for entry in zeros.iter_mut().filter(|e| e.kind == ZeroKind::Extraneous) {
        if let Some(slot) = budget
            .iter_mut()
            .find(|(p, left)| *left > 0 && (*p - entry.z).norm() < MATCH_RADIUS)
        {
            let used = entry.multiplicity.min(slot.1);
            slot.1 -= used;
            if used < entry.multiplicity {
                split.push(ZeroEntry {
                    multiplicity: entry.multiplicity - used,
                    simple: entry.multiplicity - used == 1,
                    ..*entry
                });
                entry.multiplicity = used;
                entry.simple = used == 1;
            }
            entry.kind = ZeroKind::Prescribed;
        }
    }
    zeros.extend(split);
    zeros.sort_by(|x, y| {
        (x.kind as u8, x.z.norm(), x.z.arg())
            .partial_cmp(&(y.kind as u8, y.z.norm(), y.z.arg()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ZeroScan {
        zeros,
        companion_degree: reduced.len().saturating_sub(1),
    })
}

struct RootCluster {
    raw_sum: Complex64,
    polished_sum: Complex64,
    count: usize,
}

fn add_to_clusters(clusters: &mut Vec<RootCluster>, raw: Complex64, polished: Complex64) {
    for c in clusters.iter_mut() {
        let n = c.count as f64;
        if (c.polished_sum / n - polished).norm() < CLUSTER_RADIUS {
            if (c.raw_sum / n - raw).norm() < RAW_CLUSTER_RADIUS {
                c.raw_sum += raw;
                c.polished_sum += polished;
                c.count += 1;
            }
            return;
        }
    }
    clusters.push(RootCluster {
        raw_sum: raw,
        polished_sum: polished,
        count: 1,
    });
}

/// `|B(z)| ≤ 10 · (Σ_{n ≥ tail_from} |aₙ||z|ⁿ + last-term tail + rounding)`.
fn passes_residual(b: &SeriesFn, z: Complex64, tail_from: usize) -> Result<bool> {
    check_closed_disk(z)?;
    let a = b.coeffs();
    let r = z.norm();
    let dropped: f64 = a[tail_from.min(a.len())..]
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * r.powi((tail_from + k) as i32))
        .sum();
    let last = a[a.len() - 1].norm() * r.powi(a.len() as i32 - 1);
    let max = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let rounding = 1e-12 * (b.abs_sum(z) + max);
    Ok(b.eval(z)?.norm() <= 10.0 * (dropped + last + rounding))
}

fn companion_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = coeffs[d];
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -coeffs[i] / lead;
    }
    match Schur::try_new(m, 1e-15, 100 * d.max(10)).and_then(|s| s.eigenvalues()) {
        Some(ev) => ev.iter().copied().collect(),
        None => Vec::new(),
    }
}

/// Newton iteration until the step stops shrinking; returns the best iterate.
fn polish(b: &SeriesFn, start: Complex64) -> Complex64 {
    let mut z = start;
    let mut best = (b.eval(z).map(|v| v.norm()).unwrap_or(f64::INFINITY), z);
    for _ in 0..100 {
        let (Ok(f), Ok(df)) = (b.eval(z), b.eval_deriv(z, 1)) else {
            break;
        };
        if df.norm() == 0.0 {
            break;
        }
        let next = z - f / df;
        if next.norm() > 1.0 {
            break;
        }
        let r = b.eval(next).map(|v| v.norm()).unwrap_or(f64::INFINITY);
        if r < best.0 {
            best = (r, next);
        } else if (next - z).norm() <= 1e-15 * z.norm().max(1e-3) {
            break;
        }
        z = next;
    }
    best.1
}

fn newton(b: &SeriesFn, start: Complex64) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..60 {
        if z.norm() > 1.0 {
            return None;
        }
        let f = b.eval(z).ok()?;
        let df = b.eval_deriv(z, 1).ok()?;
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1e-3) {
            return if z.norm() <= 1.0 { Some(z) } else { None };
        }
    }
    None
}

fn seed_grid(options: ScanOptions) -> Vec<Complex64> {
    let n = options.grid_density;
    if n == 0 {
        return Vec::new();
    }
    let mut seeds = Vec::new();
    for k in 1..=n {
        let r = options.radius * k as f64 / n as f64;
        for t in 0..4 * n {
            let theta = 2.0 * std::f64::consts::PI * t as f64 / (4 * n) as f64;
            seeds.push(Complex64::from_polar(r, theta));
        }
    }
    seeds
}
