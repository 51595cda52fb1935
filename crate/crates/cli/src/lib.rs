//! Batch front end: reads JSON inputs, runs one pipeline and writes JSON/CSV/SVG artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use surfrev::geometry::{self, SurfaceProfile};
use surfrev::gridfn::GridFunction;
use surfrev::inverse_solver::{self, Anchors, FitMode, FixedParameters, InverseConfig};
use surfrev::riccati::NewtonOptions;
use surfrev::sl_solver::{self, BoundaryCondition, SLProblem};
use surfrev::spectral_data::{self, SpectralData};
use surfrev::plot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Profile JSON → spectral data JSON + CSV + SVG spectrum.
    Forward,
    /// Spectral data JSON → profile JSON + silhouette SVG.
    Inverse,
    /// Profile JSON → curvature ξ JSON.
    CurvatureMap,
    /// Curvature ξ JSON → q JSON.
    CurvatureInvert,
    /// Profile JSON → Schrödinger potential, c0 and mapped boundary condition.
    Transform,
    /// Mixed spectral data JSON → boundary parameter estimate.
    VerifyB,
    /// Arclength radius JSON → (x, f(x)) CSV.
    Embed,
    /// Profile JSON → forward solve, reconstruction and error report.
    Roundtrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcKind {
    Dirichlet,
    Mixed,
    Robin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    Full,
    Symmetric,
}

/// Optional flags; which ones a command accepts is checked by [`CommandSpec::validate`].
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Flags {
    /// Grid intervals (resamples the input profile when it differs).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of modes (forward, inverse fit, identity terms).
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, value_enum)]
    pub bc: Option<BcKind>,
    /// Left Robin parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Right Robin / mixed parameter; for verify-b the value to compare with.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<f64>,
    /// Cross-section eigenvalue E ≥ 0.
    #[arg(long = "E")]
    pub e: Option<f64>,
    /// Cross-section dimension.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Anchor r(1) instead of q0 (inverse).
    #[arg(long)]
    pub r1: Option<f64>,
    /// Number of sine coefficients in the fit.
    #[arg(long)]
    pub basis: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeKind>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Relative Gaussian noise on the data (roundtrip).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Arclength of the radius samples (embed).
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandSpec {
    pub command: Command,
    pub input: PathBuf,
    pub output: PathBuf,
    pub flags: Flags,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed input: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{module}: {source}")]
    Solver { module: &'static str, source: surfrev::Error },
}

impl CliError {
    /// 2 for solver nonconvergence, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver { source, .. } if is_nonconvergence(source) => 2,
            _ => 1,
        }
    }
}

fn is_nonconvergence(e: &surfrev::Error) -> bool {
    matches!(e, surfrev::Error::NoConvergence { .. } | surfrev::Error::SolverStall { .. })
}

fn in_module(module: &'static str) -> impl Fn(surfrev::Error) -> CliError {
    move |source| CliError::Solver { module, source }
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    /// Short human-readable summary for stdout.
    pub summary: String,
    pub exit_code: i32,
}

const FLAG_NAMES: [&str; 17] = [
    "grid", "modes", "bc", "a", "b", "q0", "E", "m", "tol", "r0", "r1", "basis", "mode", "max-iter", "noise", "seed",
    "length",
];

impl Flags {
    fn present(&self) -> Vec<&'static str> {
        let set = [
            self.grid.is_some(),
            self.modes.is_some(),
            self.bc.is_some(),
            self.a.is_some(),
            self.b.is_some(),
            self.q0.is_some(),
            self.e.is_some(),
            self.m.is_some(),
            self.tol.is_some(),
            self.r0.is_some(),
            self.r1.is_some(),
            self.basis.is_some(),
            self.mode.is_some(),
            self.max_iter.is_some(),
            self.noise.is_some(),
            self.seed.is_some(),
            self.length.is_some(),
        ];
        FLAG_NAMES.iter().zip(set).filter(|(_, s)| *s).map(|(n, _)| *n).collect()
    }

    fn boundary_condition(&self) -> Result<BoundaryCondition<f64>, CliError> {
        let bc = match self.bc.unwrap_or(BcKind::Dirichlet) {
            BcKind::Dirichlet => {
                if self.a.is_some() || self.b.is_some() {
                    return Err(CliError::Usage("--a/--b need --bc mixed or --bc robin".into()));
                }
                BoundaryCondition::Dirichlet
            }
            BcKind::Mixed => {
                if self.a.is_some() {
                    return Err(CliError::Usage("--a only applies to --bc robin".into()));
                }
                BoundaryCondition::Mixed { b: self.b.unwrap_or(0.0) }
            }
            BcKind::Robin => BoundaryCondition::Robin { a: self.a.unwrap_or(0.0), b: self.b.unwrap_or(0.0) },
        };
        bc.validate().map_err(in_module("sl_solver"))?;
        Ok(bc)
    }

    fn energy(&self) -> Result<f64, CliError> {
        let e = self.e.unwrap_or(0.0);
        if !(e >= 0.0) || !e.is_finite() {
            return Err(CliError::Usage(format!("--E must be a finite non-negative number, got {e}")));
        }
        Ok(e)
    }

    fn newton(&self) -> NewtonOptions<f64> {
        let d = NewtonOptions::default();
        NewtonOptions { max_iter: self.max_iter.unwrap_or(d.max_iter), tol: self.tol.unwrap_or(d.tol) }
    }

    fn inverse_config(&self) -> InverseConfig<f64> {
        let d = InverseConfig::default();
        InverseConfig {
            n_modes: self.modes.unwrap_or(d.n_modes),
            n_basis: self.basis.unwrap_or(d.n_basis),
            grid_n: self.grid.unwrap_or(d.grid_n),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            tol: self.tol.unwrap_or(d.tol),
            mode: match self.mode {
                Some(ModeKind::Symmetric) => FitMode::Symmetric,
                _ => FitMode::Full,
            },
        }
    }
}

impl CommandSpec {
    fn allowed(&self) -> &'static [&'static str] {
        match self.command {
            Command::Forward => &["grid", "modes", "bc", "a", "b", "E"],
            Command::Transform => &["grid", "bc", "a", "b", "E"],
            Command::Inverse => &["grid", "modes", "q0", "E", "m", "tol", "r0", "r1", "basis", "mode", "max-iter"],
            Command::Roundtrip => {
                &["grid", "modes", "bc", "a", "b", "E", "tol", "basis", "mode", "max-iter", "noise", "seed"]
            }
            Command::CurvatureMap => &["grid"],
            Command::CurvatureInvert => &["tol", "max-iter"],
            Command::VerifyB => &["modes", "b", "q0"],
            Command::Embed => &["length"],
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.input.as_os_str().is_empty() || self.output.as_os_str().is_empty() {
            return Err(CliError::Usage("input and output paths must be nonempty".into()));
        }
        let allowed = self.allowed();
        for name in self.flags.present() {
            if !allowed.contains(&name) {
                return Err(CliError::Usage(format!("--{name} does not apply to this command")));
            }
        }
        let f = &self.flags;
        if f.grid.is_some_and(|n| n < 8) {
            return Err(CliError::Usage("--grid must be at least 8".into()));
        }
        if f.modes == Some(0) {
            return Err(CliError::Usage("--modes must be positive".into()));
        }
        if f.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        if f.noise.is_some_and(|t| !(t >= 0.0)) {
            return Err(CliError::Usage("--noise must be non-negative".into()));
        }
        if f.length.is_some_and(|t| !(t > 0.0)) {
            return Err(CliError::Usage("--length must be positive".into()));
        }
        if self.command == Command::VerifyB && f.b.is_none() {
            return Err(CliError::Usage("verify-b needs the value to compare with (--b)".into()));
        }
        Ok(())
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn write_text(path: &Path, text: &str, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_owned(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    artifacts.push(path.to_owned());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("artifact types serialize");
    write_text(path, &text, artifacts)
}

fn resample(q: &GridFunction<f64>, n: Option<usize>) -> GridFunction<f64> {
    match n {
        Some(n) if n != q.n_intervals() => {
            let mut v: Vec<f64> = (0..=n).map(|k| q.sample(k as f64 / n as f64)).collect();
            v[0] = q.first();
            v[n] = q.last();
            GridFunction::new(v).expect("finite samples")
        }
        _ => q.clone(),
    }
}

fn read_profile(spec: &CommandSpec) -> Result<SurfaceProfile<f64>, CliError> {
    let p: SurfaceProfile<f64> = read_json(&spec.input)?;
    let q = resample(&p.q, spec.flags.grid);
    SurfaceProfile::new(p.m, p.r0, p.q0, q).map_err(in_module("geometry"))
}

/// `ξ` with the constant `𝒦0` split off; input of `curvature-invert`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    pub q0: f64,
    pub xi: GridFunction<f64>,
    #[serde(default)]
    pub k0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureInverse {
    pub q0: f64,
    pub q: GridFunction<f64>,
    pub k0: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformOutput {
    pub p: GridFunction<f64>,
    pub c0: f64,
    pub bc: BoundaryCondition<f64>,
    pub log_rho0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyB {
    pub estimate: f64,
    pub supplied: f64,
    pub difference: f64,
    pub n_terms: usize,
    pub last_term: f64,
}

fn companion(path: &Path, ext: &str) -> PathBuf {
    let same = path.extension().is_some_and(|e| e == ext);
    if same {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        path.with_file_name(format!("{stem}_{ext}.{ext}"))
    } else {
        path.with_extension(ext)
    }
}

fn spectrum_svg(data: &SpectralData<f64>) -> String {
    let computed: Vec<(f64, f64)> = (0..data.len()).map(|k| (data.index(k) as f64, data.mu[k])).collect();
    let baseline: Vec<(f64, f64)> = (0..data.len()).map(|k| (data.index(k) as f64, data.baseline[k] + data.c0)).collect();
    plot::scatter_chart("spectrum", "n", "μ_n", &[("μ_n", &computed), ("μ_n⁰ + c0", &baseline)])
}

/// Executes one command, writing its artifacts.
pub fn run(spec: &CommandSpec) -> Result<Outcome, CliError> {
    spec.validate()?;
    let f = &spec.flags;
    let out = spec.output.as_path();
    let mut artifacts = Vec::new();
    let mut exit_code = 0;
    let summary = match spec.command {
        Command::Forward => {
            let prob = SLProblem::new(read_profile(spec)?, f.energy()?, f.boundary_condition()?)
                .map_err(in_module("sl_solver"))?;
            let data = spectral_data::forward(&prob, f.modes.unwrap_or(20)).map_err(in_module("sl_solver"))?;
            write_json(out, &data, &mut artifacts)?;
            write_text(&companion(out, "csv"), &data.to_csv(), &mut artifacts)?;
            write_text(&companion(out, "svg"), &spectrum_svg(&data), &mut artifacts)?;
            let head: Vec<String> = data.mu.iter().take(3).map(|v| format!("{v:.6}")).collect();
            format!("{} eigenvalues: {}, …", data.len(), head.join(", "))
        }
        Command::Transform => {
            let prob = SLProblem::new(read_profile(spec)?, f.energy()?, f.boundary_condition()?)
                .map_err(in_module("sl_solver"))?;
            let form = sl_solver::to_schrodinger(&prob);
            let t = TransformOutput { p: form.p, c0: form.c0, bc: form.bc, log_rho0: form.log_rho0 };
            write_json(out, &t, &mut artifacts)?;
            format!("c0 = {:?}, bc' = {:?}", t.c0, t.bc)
        }
        Command::Inverse => {
            let data: SpectralData<f64> = read_json(&spec.input)?;
            let cfg = f.inverse_config();
            let m = f.m.unwrap_or(1);
            let q0 = f.q0.unwrap_or(0.0);
            let r0 = f.r0.unwrap_or(1.0);
            if f.r1.is_some() && f.q0.is_some_and(|v| v != 0.0) {
                return Err(CliError::Usage("give either --q0 or --r1 as the second anchor".into()));
            }
            let fixed = FixedParameters { q0, e: f.energy()?, m, r0, bc: data.bc };
            let (q, report) = inverse_solver::reconstruct_q(&data, &fixed, &cfg).map_err(in_module("inverse_solver"))?;
            let anchors = match f.r1 {
                Some(r1) => Anchors::R0R1 { r0, r1 },
                None => Anchors::R0Q0 { r0, q0 },
            };
            let profile = inverse_solver::profile_from_anchors(&q, anchors, m).map_err(in_module("inverse_solver"))?;
            write_json(out, &profile, &mut artifacts)?;
            let surface = geometry::recover_embedding(&profile.radius()).map_err(in_module("geometry"))?;
            write_text(&companion(out, "svg"), &surface.to_svg(), &mut artifacts)?;
            format!("{} iterations, data residual {:e}", report.iterations, report.residual)
        }
        Command::Roundtrip => {
            let profile = read_profile(spec)?;
            let mut cfg = f.inverse_config();
            cfg.grid_n = profile.n_intervals();
            let fixed = FixedParameters {
                q0: profile.q0,
                e: f.energy()?,
                m: profile.m,
                r0: profile.r0,
                bc: f.boundary_condition()?,
            };
            let report =
                inverse_solver::roundtrip_report(&profile.q, &fixed, &cfg, f.noise.unwrap_or(0.0), f.seed.unwrap_or(0))
                    .map_err(in_module("inverse_solver"))?;
            write_json(out, &report, &mut artifacts)?;
            match &report.failure {
                Some(msg) => {
                    exit_code = 2;
                    format!("inverse_solver: {msg}")
                }
                None => format!("H0 error {:e}, W10 error {:e}", report.h0_error, report.w10_error),
            }
        }
        Command::CurvatureMap => {
            let profile = read_profile(spec)?;
            let (xi, k0) = geometry::curvature_map_g(&profile.q, profile.q0);
            write_json(out, &CurvatureData { q0: profile.q0, xi, k0: Some(k0) }, &mut artifacts)?;
            format!("K0 = {k0:?}")
        }
        Command::CurvatureInvert => {
            let c: CurvatureData = read_json(&spec.input)?;
            let (q, rep) = geometry::curvature_invert(&c.xi, c.q0, &f.newton()).map_err(in_module("geometry"))?;
            let (_, k0) = geometry::curvature_map_g(&q, c.q0);
            let res = CurvatureInverse { q0: c.q0, q, k0, iterations: rep.iterations, residual: rep.residual };
            write_json(out, &res, &mut artifacts)?;
            format!("{} iterations, K0 = {k0:?}", res.iterations)
        }
        Command::VerifyB => {
            let data: SpectralData<f64> = read_json(&spec.input)?;
            let n = f.modes.unwrap_or(data.len());
            let (sum, last) = spectral_data::b_from_identity(&data, n).map_err(in_module("spectral_data"))?;
            let supplied = f.b.unwrap_or_default();
            // the partial sums converge to b - q0
            let estimate = sum + f.q0.unwrap_or(0.0);
            let v = VerifyB { estimate, supplied, difference: estimate - supplied, n_terms: n, last_term: last };
            write_json(out, &v, &mut artifacts)?;
            format!("{estimate:?}")
        }
        Command::Embed => {
            let r: GridFunction<f64> = read_json(&spec.input)?;
            let surface = geometry::recover_embedding_on(&r, f.length.unwrap_or(1.0)).map_err(in_module("geometry"))?;
            write_text(out, &surface.to_csv(), &mut artifacts)?;
            format!("x0 = {:?}", surface.x0)
        }
    };
    Ok(Outcome { artifacts, summary, exit_code })
}
