//! Batch front end for the `winner` binary.
//!
//! Exit codes: `0` success (or verdict `Inner`), `1` bad input, `2`
//! ill-conditioned or dependent Gram system, `3` verdict `NotInner`, `4`
//! verdict `Inconclusive`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::{
    classical_blaschke, compare_to_oracle, construct_blaschke_analogue, scan_extraneous_zeros,
    BasisTerm, BlaschkeSpec, DiskGrid, OracleComparison, ScanOptions, ZeroKind, ZeroScan,
};
use crate::divisor::{inner_from_kernel, RecoveryReport, DEFAULT_M_POLY};
use crate::error::{Error, Result};
use crate::innercheck::{
    verify, InnerReport, SamplingOptions, Verdict, VerifyOptions, DEFAULT_M_ORTHO,
};
use crate::series::{
    SeriesFile, SeriesFn, Space, TruncationBudget, DEFAULT_TAIL_TOL, DEFAULT_TRUNCATION,
};
use crate::weights::WeightDescriptor;

pub const SCHEMA_VERSION: u32 = 1;
pub const BOUNDARY_RADIUS: f64 = 0.999;
pub const BOUNDARY_SAMPLES: usize = 720;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 1;
pub const EXIT_ILL_CONDITIONED: i32 = 2;
pub const EXIT_NOT_INNER: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "winner", version, about = "Inner functions in weighted Hardy spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the Blaschke-product analogue for a zero prescription.
    Construct {
        /// Zero prescription JSON, e.g. {"d0":0,"zeros":[{"z":[0.5,0.0],"mult":1}]}.
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Run the four inner-function tests on a series file.
    Verify {
        series: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Recover the inner factor of b through the kernel of H²ω(|b|²).
    Recover {
        series: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List the zeros of a series in a disk.
    Scan {
        series: PathBuf,
        /// Prescription used to label zeros as prescribed.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Weight descriptor: a JSON file, inline JSON or one of hardy, bergman, dirichlet.
    #[arg(long)]
    pub weight: Option<String>,
    /// Truncation degree.
    #[arg(long = "N", default_value_t = DEFAULT_TRUNCATION)]
    pub n: usize,
    #[arg(long = "M-ortho", default_value_t = DEFAULT_M_ORTHO)]
    pub m_ortho: usize,
    #[arg(long = "M-poly", default_value_t = DEFAULT_M_POLY)]
    pub m_poly: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.999)]
    pub radius: f64,
    /// Newton seed density of the zero scan.
    #[arg(long, default_value_t = 8)]
    pub grid: usize,
}

impl ScanArgs {
    fn options(&self) -> ScanOptions {
        ScanOptions {
            radius: self.radius,
            grid_density: self.grid,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConstructReport {
    pub schema_version: u32,
    pub weight: WeightDescriptor,
    pub spec: BlaschkeSpec,
    #[serde(rename = "N")]
    pub n: usize,
    pub gram_condition: f64,
    pub inner: InnerReport,
    pub oracle: Option<OracleComparison>,
    pub expansion: Vec<BasisTerm>,
    pub degree_flags: Vec<usize>,
    pub extraneous_zeros: usize,
    pub spurious_zeros: usize,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub weight: WeightDescriptor,
    pub inner: InnerReport,
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = hint(&e) {
                eprintln!("hint: {hint}");
            }
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::IllConditionedGram { .. } | Error::DependentFamily { .. } => EXIT_ILL_CONDITIONED,
        _ => EXIT_BAD_INPUT,
    }
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::IllConditionedGram { .. } | Error::DependentFamily { .. } => Some(
            "separate nearby zeros, lower multiplicities, move zeros away from the boundary or reduce --M-poly",
        ),
        _ => None,
    }
}

pub fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Inner => EXIT_OK,
        Verdict::NotInner => EXIT_NOT_INNER,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Construct { spec, common, scan } => cmd_construct(spec, common, *scan),
        Command::Verify { series, common } => cmd_verify(series, common),
        Command::Recover { series, common } => cmd_recover(series, common),
        Command::Scan {
            series,
            spec,
            common,
            scan,
        } => cmd_scan(series, spec.as_deref(), common, *scan),
    }
}

/// Accepts a path to a JSON file, inline JSON, or a builtin kind name.
pub fn parse_weight(arg: &str) -> Result<WeightDescriptor> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    match trimmed {
        "hardy" => return Ok(WeightDescriptor::Hardy),
        "bergman" => return Ok(WeightDescriptor::Bergman),
        "dirichlet" => return Ok(WeightDescriptor::Dirichlet),
        _ => {}
    }
    let text = fs::read_to_string(trimmed)
        .map_err(|e| Error::InvalidInput(format!("cannot read weight file {trimmed}: {e}")))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{what} {}: {e}", path.display())))
}

fn load_series(path: &Path, common: &CommonArgs) -> Result<SeriesFn> {
    let mut file: SeriesFile = read_json(path, "series file")?;
    if let Some(w) = &common.weight {
        file.weight = parse_weight(w)?;
    }
    file.into_series(common.n)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn out_dir(common: &CommonArgs) -> Result<&Path> {
    fs::create_dir_all(&common.out)?;
    Ok(&common.out)
}

fn verify_options(common: &CommonArgs) -> VerifyOptions {
    VerifyOptions {
        m_ortho: common.m_ortho,
        sampling: SamplingOptions {
            seed: common.seed,
            ..SamplingOptions::default()
        },
        ..VerifyOptions::default()
    }
}

pub fn zeros_csv(scan: &ZeroScan) -> String {
    let mut s = String::from("# winner zeros v1\nre,im,kind\n");
    for z in &scan.zeros {
        let kind = match z.kind {
            ZeroKind::Prescribed => "prescribed",
            ZeroKind::Extraneous => "extraneous",
            ZeroKind::Spurious => "spurious",
        };
        for _ in 0..z.multiplicity {
            let _ = writeln!(s, "{},{},{}", z.z.re, z.z.im, kind);
        }
    }
    s
}

pub fn boundary_csv(b: &SeriesFn, radius: f64, samples: usize) -> Result<String> {
    let mut s = format!("# winner boundary v1 r={radius}\ntheta,modulus\n");
    for k in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let m = b.eval(Complex64::from_polar(radius, theta))?.norm();
        let _ = writeln!(s, "{theta},{m}");
    }
    Ok(s)
}

fn cmd_construct(spec_path: &Path, common: &CommonArgs, scan: ScanArgs) -> Result<i32> {
    let spec: BlaschkeSpec = read_json(spec_path, "spec")?;
    let weight = match &common.weight {
        Some(w) => parse_weight(w)?,
        None => WeightDescriptor::Hardy,
    };
    let budget = TruncationBudget::new(common.n, DEFAULT_TAIL_TOL)?;
    let space = Space::from_descriptor(&weight, budget)?;
    let result = construct_blaschke_analogue(&space, &spec)?;
    let inner = verify(&result.b, verify_options(common))?;

    let oracle = if weight == WeightDescriptor::Hardy {
        let classical = classical_blaschke(&space, &spec)?;
        Some(compare_to_oracle(&result.b, &classical, &DiskGrid::polar(16, 64, 0.95).points)?)
    } else {
        None
    };
    let refined_space = space.with_budget(TruncationBudget::new(2 * common.n, DEFAULT_TAIL_TOL)?);
    let refined = construct_blaschke_analogue(&refined_space, &spec)?;
    let zeros = scan_extraneous_zeros(&result.b, &spec, scan.options(), Some(&refined.b))?;

    let dir = out_dir(common)?;
    let report = ConstructReport {
        schema_version: SCHEMA_VERSION,
        weight,
        spec: spec.clone(),
        n: common.n,
        gram_condition: result.gram_condition,
        oracle,
        expansion: result.expansion.clone(),
        degree_flags: result.degree_flags.clone(),
        extraneous_zeros: zeros.extraneous().map(|z| z.multiplicity).sum(),
        spurious_zeros: zeros
            .zeros
            .iter()
            .filter(|z| z.kind == ZeroKind::Spurious)
            .map(|z| z.multiplicity)
            .sum(),
        inner,
    };
    write_json(dir, "B.json", &result.b.to_file())?;
    write_json(dir, "report.json", &report)?;
    fs::write(dir.join("zeros.csv"), zeros_csv(&zeros))?;
    fs::write(
        dir.join("boundary.csv"),
        boundary_csv(&result.b, BOUNDARY_RADIUS, BOUNDARY_SAMPLES)?,
    )?;
    println!(
        "verdict {:?}, gram condition {:.3e}, {} extraneous zeros",
        report.inner.verdict, report.gram_condition, report.extraneous_zeros
    );
    Ok(verdict_code(report.inner.verdict))
}

fn cmd_verify(path: &Path, common: &CommonArgs) -> Result<i32> {
    let f = load_series(path, common)?;
    let inner = verify(&f, verify_options(common))?;
    let dir = out_dir(common)?;
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        weight: f.space().weight().descriptor().clone(),
        inner,
    };
    write_json(dir, "report.json", &report)?;
    println!(
        "verdict {:?}: norm dev {:.3e}, ortho defect {:.3e}",
        report.inner.verdict, report.inner.norm_dev, report.inner.ortho_defect
    );
    Ok(verdict_code(report.inner.verdict))
}

fn cmd_recover(path: &Path, common: &CommonArgs) -> Result<i32> {
    let b = load_series(path, common)?;
    let rec = inner_from_kernel(&b, common.m_poly)?;
    let report: RecoveryReport = rec.report(&b, common.m_ortho)?;
    let dir = out_dir(common)?;
    write_json(dir, "u.json", &rec.u.to_file())?;
    write_json(dir, "report.json", &report)?;
    for w in &rec.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "M_poly {}, reproducing defect {:.3e}, u ortho defect {:.3e}",
        report.m_poly, report.residuals.max_reproducing_defect, report.residuals.u_ortho_defect
    );
    Ok(EXIT_OK)
}

fn cmd_scan(path: &Path, spec: Option<&Path>, common: &CommonArgs, scan: ScanArgs) -> Result<i32> {
    let b = load_series(path, common)?;
    let spec = match spec {
        Some(p) => read_json(p, "spec")?,
        None => BlaschkeSpec::default(),
    };
    let zeros = scan_extraneous_zeros(&b, &spec, scan.options(), None)?;
    let dir = out_dir(common)?;
    fs::write(dir.join("zeros.csv"), zeros_csv(&zeros))?;
    println!(
        "{} zeros in |z| <= {} (companion degree {})",
        zeros.zeros.iter().map(|z| z.multiplicity).sum::<usize>(),
        scan.radius,
        zeros.companion_degree
    );
    Ok(EXIT_OK)
}
