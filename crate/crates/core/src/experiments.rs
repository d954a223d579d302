//! Experiment drivers behind the `amgpoly` binary.
//!
//! Every driver is a pure function of its inputs and the shipped parameter
//! tables. Wall-clock timings are kept in a separate `metadata` field so the
//! rest of a report is byte-stable across runs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amg::{build_hierarchy, CoarseSolver, CoarseningConfig, CoarseningKind, HierarchyLimits, HierarchySummary};
use crate::error::{Error, Result};
use crate::krylov::{solve, KrylovConfig, KrylovVariant, SolveReport};
use crate::minimax::{self, gamma_cheb4, lambda_of, solve_a_star, table};
use crate::problems::{spectral_synthetic, ProblemSpec, SpectralDistribution};
use crate::smoothers::{L1JacobiData, PolySmootherConfig, SmootherFamily, SmootherPreconditioner};
use crate::sparse::{mtx, CsrMatrix};

pub const OPTIMIZE_KMAX: usize = 30;
pub const BOUNDS_KMAX: usize = 12;
pub const SPECTRUM_MAX_N: usize = 1024;
/// Iteration cap for the smoother-only spectrum runs.
pub const SPECTRUM_ITMAX: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub coarsening: CoarseningConfig,
    pub smoother: SmootherFamily,
    pub degree: usize,
    pub solver: KrylovConfig,
    pub coarse_solver: CoarseSolver,
    pub limits: HierarchyLimits,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::Poisson3d { m: 16 },
            coarsening: CoarseningConfig::matching(),
            smoother: SmootherFamily::OptCheb1,
            degree: 4,
            solver: KrylovConfig::default(),
            coarse_solver: CoarseSolver::default(),
            limits: HierarchyLimits::default(),
            output: None,
            format: OutputFormat::Json,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("bad value '{value}' for key '{key}'"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

/// Accepts a plain number or `pi`, `pi/<d>`, `<c>*pi`.
fn parse_angle(key: &str, value: &str) -> Result<f64> {
    let v = value.replace(' ', "").to_ascii_lowercase();
    let pi = std::f64::consts::PI;
    if v == "pi" {
        return Ok(pi);
    }
    if let Some(d) = v.strip_prefix("pi/") {
        return Ok(pi / parse_num::<f64>(key, d)?);
    }
    if let Some(c) = v.strip_suffix("*pi") {
        return Ok(parse_num::<f64>(key, c)? * pi);
    }
    parse_num(key, &v)
}

impl ExperimentConfig {
    /// Parses flat `key = value` lines. `#` and `;` start comments; section
    /// headers are ignored. Unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got '{line}'") })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Builds a config from `key`/`value` pairs applied over the defaults;
    /// later pairs win.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in pairs {
            raw.insert(k.to_ascii_lowercase(), v.to_string());
        }
        let mut cfg = Self::default();
        let get = |k: &str| raw.get(k).map(String::as_str);

        let kind = get("problem").unwrap_or("poisson3d").to_ascii_lowercase();
        cfg.problem = match kind.as_str() {
            "poisson3d" => ProblemSpec::Poisson3d { m: get("m").map(|v| parse_num("m", v)).transpose()?.unwrap_or(16) },
            "aniso2d" => ProblemSpec::Aniso2d {
                m: get("m").map(|v| parse_num("m", v)).transpose()?.unwrap_or(128),
                epsilon: get("epsilon").map(|v| parse_num("epsilon", v)).transpose()?.unwrap_or(100.0),
                angle: get("angle").map(|v| parse_angle("angle", v)).transpose()?.unwrap_or(std::f64::consts::PI / 6.0),
            },
            "spectral" => ProblemSpec::Spectral {
                n: get("n").map(|v| parse_num("n", v)).transpose()?.unwrap_or(256),
                distribution: match get("distribution").unwrap_or("a") {
                    "a" => SpectralDistribution::Equispaced,
                    "b" => SpectralDistribution::BoundaryAccumulating,
                    "c" => SpectralDistribution::Gapped,
                    other => return Err(bad("distribution", other)),
                },
            },
            other => return Err(bad("problem", other)),
        };

        if let Some(v) = get("coarsening") {
            cfg.coarsening.kind = v.parse::<CoarseningKind>()?;
        }
        if let Some(v) = get("strength_theta") {
            cfg.coarsening.strength_theta = parse_num("strength_theta", v)?;
        }
        if let Some(v) = get("matching_sweeps") {
            cfg.coarsening.matching_sweeps = parse_num("matching_sweeps", v)?;
        }
        if let Some(v) = get("prolongator_smoothing") {
            cfg.coarsening.prolongator_smoothing = parse_num("prolongator_smoothing", v)?;
        }
        if let Some(v) = get("smoother") {
            cfg.smoother = v.parse()?;
        }
        if let Some(v) = get("degree") {
            cfg.degree = parse_num("degree", v)?;
        }
        if let Some(v) = get("solver") {
            cfg.solver.variant = match v.to_ascii_lowercase().as_str() {
                "pcg" => KrylovVariant::Pcg,
                "fcg" => KrylovVariant::Fcg,
                _ => return Err(bad("solver", v)),
            };
        }
        if let Some(v) = get("tol") {
            cfg.solver.tol = parse_num("tol", v)?;
        }
        if let Some(v) = get("itmax") {
            cfg.solver.itmax = parse_num("itmax", v)?;
        }
        if let Some(v) = get("record_history") {
            cfg.solver.record_history = parse_num("record_history", v)?;
        }
        let sweeps = get("coarse_sweeps").map(|v| parse_num("coarse_sweeps", v)).transpose()?;
        cfg.coarse_solver = match get("coarse_solver").map(str::to_ascii_lowercase).as_deref() {
            None | Some("l1jacobi") => CoarseSolver::L1JacobiFixedSweeps { sweeps: sweeps.unwrap_or(30) },
            Some("direct") | Some("dense") => CoarseSolver::DenseDirect,
            Some(other) => return Err(bad("coarse_solver", other)),
        };
        if let Some(v) = get("max_levels") {
            cfg.limits.max_levels = parse_num("max_levels", v)?;
        }
        if let Some(v) = get("min_coarse_size") {
            cfg.limits.min_coarse_size = parse_num("min_coarse_size", v)?;
        }
        if let Some(v) = get("output") {
            cfg.output = Some(PathBuf::from(v));
        }
        if let Some(v) = get("format") {
            cfg.format = match v.to_ascii_lowercase().as_str() {
                "json" => OutputFormat::Json,
                _ => return Err(bad("format", v)),
            };
        }

        const KNOWN: &[&str] = &[
            "problem", "m", "n", "distribution", "epsilon", "angle", "coarsening", "strength_theta",
            "matching_sweeps", "prolongator_smoothing", "smoother", "degree", "solver", "tol", "itmax",
            "record_history", "coarse_solver", "coarse_sweeps", "max_levels", "min_coarse_size", "output", "format",
        ];
        if let Some(k) = raw.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown config key '{k}'")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-parses with `key=value` overrides appended to the file contents.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut full = text.to_string();
        full.push('\n');
        for o in overrides {
            if !o.contains('=') {
                return Err(Error::InvalidParameter(format!("override must be key=value, got '{o}'")));
            }
            full.push_str(o);
            full.push('\n');
        }
        Self::parse(&full)
    }

    pub fn validate(&self) -> Result<()> {
        self.coarsening.validate()?;
        self.solver.validate()?;
        self.smoother_config()?.validate()
    }

    pub fn smoother_config(&self) -> Result<PolySmootherConfig> {
        PolySmootherConfig::new(self.smoother, self.degree)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub config: ExperimentConfig,
    pub rows: usize,
    pub nnz: usize,
    pub report: SolveReport,
    pub hierarchy: HierarchySummary,
    /// Wall-clock only; excluded from any comparison.
    pub metadata: Timings,
}

/// Builds the AMG hierarchy for `a` and runs the configured Krylov method
/// from a zero initial guess.
pub fn solve_system(cfg: &ExperimentConfig, a: &CsrMatrix, b: &[f64]) -> Result<SolveOutput> {
    cfg.validate()?;
    let t0 = Instant::now();
    let h = build_hierarchy(a, &cfg.coarsening, &cfg.smoother_config()?, cfg.limits, cfg.coarse_solver)?;
    let setup = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (_, report) = solve(a, b, &mut &h, &cfg.solver, &vec![0.0; b.len()])?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    Ok(SolveOutput {
        config: cfg.clone(),
        rows: a.nrows(),
        nnz: a.nnz(),
        report,
        hierarchy: h.summary(),
        metadata: Timings { setup_seconds: setup, solve_seconds },
    })
}

pub fn cmd_solve(cfg: &ExperimentConfig) -> Result<SolveOutput> {
    let (a, b) = cfg.problem.build()?;
    solve_system(cfg, &a, &b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub path: PathBuf,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub max_asymmetry: f64,
    pub min_diagonal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportOutput {
    pub matrix: MatrixSummary,
    pub solve: Option<SolveOutput>,
}

/// Reads a Matrix Market file and, when `cfg` is given, solves with `b = 1`.
pub fn cmd_import(path: &Path, cfg: Option<&ExperimentConfig>) -> Result<ImportOutput> {
    let a = mtx::read_file(path)?;
    let matrix = MatrixSummary {
        path: path.to_path_buf(),
        rows: a.nrows(),
        cols: a.ncols(),
        nnz: a.nnz(),
        max_asymmetry: a.max_asymmetry(),
        min_diagonal: a.diagonal().into_iter().fold(f64::INFINITY, f64::min),
    };
    let solve = match cfg {
        Some(cfg) => {
            if a.nrows() != a.ncols() {
                return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
            }
            Some(solve_system(cfg, &a, &vec![1.0; a.nrows()])?)
        }
        None => None,
    };
    Ok(ImportOutput { matrix, solve })
}

/// Parameter table for `k = 1..=kmax` in the export schema.
pub fn cmd_optimize<W: Write>(kmax: usize, w: W) -> Result<()> {
    if kmax > OPTIMIZE_KMAX {
        return Err(Error::InvalidParameter(format!("kmax must be at most {OPTIMIZE_KMAX}, got {kmax}")));
    }
    minimax::export_csv(kmax, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub k: usize,
    pub gamma_cheb4: f64,
    pub lambda_k: f64,
    pub gamma_opt4: Option<f64>,
    /// `lambda_k < gamma_cheb4`
    pub first_kind_better: bool,
}

pub fn bounds_rows(kmax: usize) -> Result<Vec<BoundsRow>> {
    if kmax > BOUNDS_KMAX {
        return Err(Error::InvalidParameter(format!("kmax must be at most {BOUNDS_KMAX}, got {kmax}")));
    }
    (1..=kmax)
        .map(|k| {
            let lambda_k = lambda_of(k, solve_a_star(k)?)?;
            let g4 = gamma_cheb4(k);
            Ok(BoundsRow {
                k,
                gamma_cheb4: g4,
                lambda_k,
                gamma_opt4: table::beta_table(k).map(|t| t.gamma_value),
                first_kind_better: lambda_k < g4,
            })
        })
        .collect()
}

pub const BOUNDS_HEADER: &str = "k,gamma_cheb4,lambda_k,gamma_opt4,first_kind_better";

pub fn cmd_bounds<W: Write>(kmax: usize, mut w: W) -> Result<()> {
    let rows = bounds_rows(kmax)?;
    writeln!(w, "{BOUNDS_HEADER}")?;
    for r in rows {
        let g = r.gamma_opt4.map(|v| format!("{v:.16e}")).unwrap_or_default();
        writeln!(w, "{},{:.16e},{:.16e},{},{}", r.k, r.gamma_cheb4, r.lambda_k, g, r.first_kind_better)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub distribution: SpectralDistribution,
    pub n: usize,
    pub k: usize,
    pub iters_first: usize,
    pub iters_fourth: usize,
    pub converged_first: bool,
    pub converged_fourth: bool,
}

impl SpectrumRow {
    /// Negative when the 1st-kind preconditioner needs fewer iterations.
    pub fn diff(&self) -> i64 {
        self.iters_first as i64 - self.iters_fourth as i64
    }
}

fn smoother_pcg(
    op: &crate::problems::SpectralOperator,
    b: &[f64],
    m: &L1JacobiData,
    family: SmootherFamily,
    k: usize,
    tol: f64,
) -> Result<SolveReport> {
    let cfg = PolySmootherConfig::new(family, k)?;
    let mut pre = SmootherPreconditioner::new(cfg, op, m.clone())?;
    let kc = KrylovConfig { variant: KrylovVariant::Pcg, tol, itmax: SPECTRUM_ITMAX, record_history: false };
    Ok(solve(op, b, &mut pre, &kc, &vec![0.0; b.len()])?.1)
}

/// PCG iteration counts with the optimized 1st- and 4th-kind polynomial
/// ℓ1-Jacobi preconditioners (no coarse levels), for every distribution,
/// size and degree. Rows come back in (distribution, N, k) order regardless
/// of how the work is scheduled.
pub fn spectrum_grid(sizes: &[usize], degrees: &[usize], tol: f64) -> Result<Vec<SpectrumRow>> {
    for &n in sizes {
        if n == 0 || n % 2 == 1 || n > SPECTRUM_MAX_N {
            return Err(Error::InvalidParameter(format!("sizes must be even and at most {SPECTRUM_MAX_N}, got {n}")));
        }
    }
    for &k in degrees {
        if !(1..=table::BETA_KMAX).contains(&k) {
            return Err(Error::InvalidParameter(format!("degrees must be in 1..={}, got {k}", table::BETA_KMAX)));
        }
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let cases: Vec<(SpectralDistribution, usize)> =
        SpectralDistribution::ALL.iter().flat_map(|&d| sizes.iter().map(move |&n| (d, n))).collect();
    let blocks: Vec<Result<Vec<SpectrumRow>>> = cases
        .par_iter()
        .map(|&(dist, n)| {
            let (op, b) = spectral_synthetic(n, dist)?;
            let m = L1JacobiData::from_diag(op.l1_row_sums())?;
            degrees
                .iter()
                .map(|&k| {
                    let first = smoother_pcg(&op, &b, &m, SmootherFamily::OptCheb1, k, tol)?;
                    let fourth = smoother_pcg(&op, &b, &m, SmootherFamily::OptCheb4, k, tol)?;
                    Ok(SpectrumRow {
                        distribution: dist,
                        n,
                        k,
                        iters_first: first.iterations,
                        iters_fourth: fourth.iterations,
                        converged_first: first.converged,
                        converged_fourth: fourth.converged,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for b in blocks {
        rows.extend(b?);
    }
    Ok(rows)
}

pub const SPECTRUM_HEADER: &str = "distribution,n,k,iters_first,iters_fourth,diff,converged_first,converged_fourth";

pub fn write_spectrum_csv<W: Write>(rows: &[SpectrumRow], mut w: W) -> Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.distribution.label(),
            r.n,
            r.k,
            r.iters_first,
            r.iters_fourth,
            r.diff(),
            r.converged_first,
            r.converged_fourth
        )?;
    }
    Ok(())
}

pub fn cmd_spectrum_grid<W: Write>(sizes: &[usize], degrees: &[usize], tol: f64, w: W) -> Result<Vec<SpectrumRow>> {
    let rows = spectrum_grid(sizes, degrees, tol)?;
    write_spectrum_csv(&rows, w)?;
    Ok(rows)
}

/// Regenerates `optimal_params.csv` and `beta_tables.csv` in `dir`.
pub fn write_tables(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut params = Vec::new();
    table::write_params(table::PARAMS_KMAX, &mut params)?;
    std::fs::write(dir.join("optimal_params.csv"), params)?;
    let betas = (1..=table::BETA_KMAX)
        .into_par_iter()
        .map(minimax::optimize_beta)
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    table::write_betas(&betas, &mut out)?;
    std::fs::write(dir.join("beta_tables.csv"), out)?;
    Ok(())
}
