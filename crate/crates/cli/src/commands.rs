//! Subcommands and the stages they run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbslab_core::clt::{
    center, coboundary_test, default_burn_in, empirical_clt, green_kubo_variance, sample_orbit, terms_for_tolerance,
};
use gibbslab_core::config_space::WordSpace;
use gibbslab_core::diagnostics::{bowen_scan, decay_fit, Representative};
use gibbslab_core::transfer::{
    default_probes, normalize, spectral_gap_estimate, DepthKFunction, GapEstimate, NormalizationData,
    TransferOperator, DEFAULT_EIGEN_ITERS, DEFAULT_EIGEN_TOL,
};
use gibbslab_core::transport::solver::{SolverRegistry, TransportSolver};
use gibbslab_core::transport::{
    certify_contraction, dirac_pairs, metric_for, min_diagonal_mass, solve_gibbs, GibbsOptions, GibbsSolution,
    WordMeasure,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{format_f64, write_csv, write_json, Table};
use crate::schema::{load_system, FunctionSpec, LoadedSystem, SCHEMA_VERSION};

/// Steps in the probe decay ratio behind `Λ̂`.
const GAP_STEPS: usize = 6;
/// Variance below this counts as zero for the empirical CLT.
const ZERO_VARIANCE_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "gibbslab", version, about = "Gibbs states on markovian lattice systems")]
pub struct Cli {
    /// Print failures as a JSON envelope on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Raise log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// System file (JSON).
    #[arg(long)]
    pub system: PathBuf,
    /// Word depth of the computed measure.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Fixed-point tolerance in the bounded transport metric.
    #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
    pub tol: f64,
    /// Exact transport solver: network-simplex or lp.
    #[arg(long, default_value = "network-simplex")]
    pub solver: String,
    /// Directory for result files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RepresentativeArg {
    Least,
    Greatest,
}

impl From<RepresentativeArg> for Representative {
    fn from(r: RepresentativeArg) -> Self {
        match r {
            RepresentativeArg::Least => Representative::Least,
            RepresentativeArg::Greatest => Representative::Greatest,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CltArgs {
    /// Observable name from the system file, or a JSON observable file.
    #[arg(long)]
    pub observable: Option<String>,
    /// Block length m.
    #[arg(long, default_value_t = 1000)]
    pub block: usize,
    /// Number of independent blocks.
    #[arg(long, default_value_t = 20000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Symbols discarded before each block; defaults to 5 correlation times.
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DecayArgs {
    /// Observable `ψ` (name or file).
    #[arg(long)]
    pub observable: Option<String>,
    /// Observable `φ` paired with `ψ`; defaults to `ψ`.
    #[arg(long)]
    pub phi_observable: Option<String>,
    #[arg(long, default_value_t = 12)]
    pub max_lag: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the Gibbs state and write gibbs.json.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Output file; defaults to <out-dir>/gibbs.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_certificate: bool,
        /// Cap on Dirac pairs in the contraction scan.
        #[arg(long, default_value_t = 4096)]
        certificate_pairs: usize,
    },
    /// Contraction certificate and diagonal-mass scan; writes certificate.json.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Cap on Dirac pairs; all pairs when omitted.
        #[arg(long)]
        pairs: Option<usize>,
        /// Iterations of the dual operator; defaults to m1.
        #[arg(long)]
        steps: Option<usize>,
        /// Largest prefix length in the diagonal-mass scan.
        #[arg(long, default_value_t = 3)]
        max_k: usize,
    },
    /// Gibbs-Bowen ratio scan; writes bowen.csv and bowen.json.
    Bowen {
        #[command(flatten)]
        common: Common,
        /// Largest cylinder length; defaults to depth - 1.
        #[arg(long)]
        max_m: Option<usize>,
        #[arg(long, value_enum, default_value = "least")]
        representative: RepresentativeArg,
    },
    /// Correlation decay; writes correlations.csv and decay.json.
    Decay {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decay: DecayArgs,
    },
    /// Variance, coboundary test and empirical CLT; writes clt.json and histogram.csv.
    Clt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        clt: CltArgs,
    },
    /// One Gibbs-distributed orbit segment; writes sample.json.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// solve, bowen, decay and clt in sequence.
    All {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        clt: CltArgs,
        #[arg(long)]
        phi_observable: Option<String>,
        #[arg(long, default_value_t = 12)]
        max_lag: usize,
    },
}

/// Everything that identifies a run's inputs; embedded in every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub system_file: String,
    pub system_sha256: String,
    pub depth: usize,
    pub solver: String,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
}

/// Written to `manifest.json`: the manifest plus wall-clock per stage.
#[derive(Debug, Serialize)]
struct RunRecord<'a> {
    manifest: &'a RunManifest,
    stage_seconds: &'a BTreeMap<String, f64>,
    outputs: &'a [String],
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: T,
}

struct Run {
    manifest: RunManifest,
    out_dir: PathBuf,
    stages: BTreeMap<String, f64>,
    outputs: Vec<String>,
}

impl Run {
    fn new(command: &str, common: &Common, loaded: &LoadedSystem) -> Run {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("fixed_point".to_string(), common.tol);
        tolerances.insert("eigen".to_string(), DEFAULT_EIGEN_TOL);
        Run {
            manifest: RunManifest {
                tool: "gibbslab".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                system_file: loaded.path.display().to_string(),
                system_sha256: loaded.sha256.clone(),
                depth: common.depth,
                solver: common.solver.clone(),
                tolerances,
                seed: None,
                parameters: BTreeMap::new(),
            },
            out_dir: common.out_dir.clone(),
            stages: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.manifest.parameters.insert(key.into(), value.into());
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        let start = Instant::now();
        log::info!("stage {name}");
        let out = f()?;
        self.stages.insert(name.into(), start.elapsed().as_secs_f64());
        Ok(out)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn json<T: Serialize>(&mut self, path: &Path, result: T) -> Result<(), CliError> {
        write_json(path, &Document { manifest: &self.manifest, result })?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn csv(&mut self, path: &Path, table: &Table) -> Result<(), CliError> {
        write_csv(path, table, &self.manifest)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn finish(self) -> Result<Vec<String>, CliError> {
        let mut outputs = self.outputs;
        let path = self.out_dir.join("manifest.json");
        let record = RunRecord { manifest: &self.manifest, stage_seconds: &self.stages, outputs: &outputs };
        write_json(&path, &record)?;
        outputs.push(path.display().to_string());
        Ok(outputs)
    }
}

/// Normalized potential and word tables for one run.
struct Model {
    loaded: LoadedSystem,
    space: WordSpace,
    phi_bar: DepthKFunction,
    data: NormalizationData,
    raw_depth: usize,
}

impl Model {
    fn op(&self) -> Result<TransferOperator<'_>, CliError> {
        Ok(TransferOperator::new(&self.space, self.phi_bar.clone())?)
    }
}

fn validate_common(common: &Common) -> Result<(), CliError> {
    let mut problems = Vec::new();
    if !(common.tol.is_finite() && common.tol > 0.0) {
        problems.push(format!("--tol must be positive, got {}", common.tol));
    }
    if common.depth < 2 {
        problems.push(format!("--depth must be at least 2, got {}", common.depth));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(problems))
    }
}

fn solver_for(name: &str) -> Result<std::sync::Arc<dyn TransportSolver>, CliError> {
    let registry = SolverRegistry::with_defaults();
    Ok(registry.get_exact(name)?)
}

fn prepare(common: &Common) -> Result<Model, CliError> {
    validate_common(common)?;
    let loaded = load_system(&common.system)?;
    // room for the normalized potential, one letter deeper than the raw one
    let raw_depth = loaded.function_depth();
    let space = loaded.space(common.depth.max(raw_depth + 1))?;
    let phi = loaded.potential(&space)?;
    let op = TransferOperator::new(&space, phi)?;
    let (phi_bar, data) = normalize(&op, DEFAULT_EIGEN_TOL, DEFAULT_EIGEN_ITERS)?;
    drop(op);
    Ok(Model { loaded, space, phi_bar, data, raw_depth })
}

fn solve(model: &Model, common: &Common, certificate: Option<usize>) -> Result<GibbsSolution, CliError> {
    let op = model.op()?;
    let solver = solver_for(&common.solver)?;
    let mu0 = WordMeasure::uniform(&model.space, common.depth)?;
    let opts = GibbsOptions {
        tol: common.tol,
        skip_certificate: certificate.is_none(),
        certificate_pairs: certificate,
        ..GibbsOptions::default()
    };
    Ok(solve_gibbs(&op, model.data.clone(), &mu0, &opts, solver.as_ref())?)
}

fn word_label(w: &[u32]) -> String {
    w.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableFile {
    version: u32,
    observable: FunctionSpec,
}

/// Observable by system-file name, or from a JSON file when `arg` names one.
fn observable(model: &Model, arg: Option<&str>) -> Result<(String, DepthKFunction), CliError> {
    if let Some(path) = arg.map(Path::new).filter(|p| p.is_file()) {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let file: ObservableFile = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if file.version != SCHEMA_VERSION {
            return Err(CliError::Validation(vec![format!(
                "{}: unsupported version {}",
                path.display(),
                file.version
            )]));
        }
        return Ok((path.display().to_string(), file.observable.materialize(&model.space)?));
    }
    let (name, spec) = model.loaded.observable(arg)?;
    Ok((name.to_string(), spec.materialize(&model.space)?))
}

fn gap_for(model: &Model, solution: &GibbsSolution, psi: &DepthKFunction) -> Result<GapEstimate, CliError> {
    let mut probes = default_probes(&model.space);
    probes.push(psi.clone());
    Ok(spectral_gap_estimate(&model.op()?, &solution.measure, &probes, GAP_STEPS)?)
}

fn write_solution(run: &mut Run, model: &Model, solution: &GibbsSolution, path: &Path) -> Result<(), CliError> {
    let op = model.op()?;
    let words: Vec<String> = model.space.table(solution.measure.depth()).words().map(word_label).collect();
    let result = json!({
        "solution": solution,
        "words": words,
        "normalized_potential": &model.phi_bar,
        "normalization_defect": op.normalization_defect()?,
        "potential_depth": model.raw_depth,
    });
    run.json(path, result)
}

fn bowen_stage(run: &mut Run, model: &Model, solution: &GibbsSolution, max_m: usize, rep: Representative) -> Result<(), CliError> {
    let report = run.stage("bowen", || Ok(bowen_scan(solution, &model.op()?, max_m, rep)?))?;
    let mut table = Table::new(vec!["m", "cylinder", "ratio", "lower", "upper"]);
    for r in &report.ratios {
        let ext = &report.per_depth[r.m - 1];
        table.rows.push(vec![
            r.m.to_string(),
            word_label(&r.word),
            format_f64(r.ratio),
            format_f64(ext.lower),
            format_f64(ext.upper),
        ]);
    }
    run.csv(&run.path("bowen.csv"), &table)?;
    let summary = json!({
        "max_depth": report.max_depth,
        "representative": report.representative,
        "per_depth": report.per_depth,
        "c_lower": report.c_lower,
        "c_upper": report.c_upper,
        "c_empirical": report.c_empirical,
        "c_spread": report.c_spread,
        "i_inf": report.i_inf,
        "mixing_exponent": report.mixing_exponent,
        "lip_phi": report.lip_phi,
        "theory_c": report.theory_c,
        "skipped_cylinders": report.skipped_cylinders,
    });
    run.json(&run.path("bowen.json"), summary)
}

fn decay_stage(run: &mut Run, model: &Model, solution: &GibbsSolution, args: &DecayArgs) -> Result<(), CliError> {
    let (psi_name, psi) = observable(model, args.observable.as_deref())?;
    let (phi_name, phi) = match &args.phi_observable {
        Some(_) => observable(model, args.phi_observable.as_deref())?,
        None => (psi_name.clone(), psi.clone()),
    };
    run.param("decay.psi", psi_name.clone());
    run.param("decay.phi", phi_name.clone());
    run.param("decay.max_lag", args.max_lag);
    let curve = run.stage("decay", || Ok(decay_fit(solution, &model.op()?, &phi, &psi, args.max_lag)?))?;
    let mut table = Table::new(vec!["m", "cor", "bound"]);
    for p in &curve.points {
        table.rows.push(vec![p.m.to_string(), format_f64(p.cor), format_f64(p.bound)]);
    }
    run.csv(&run.path("correlations.csv"), &table)?;
    run.json(&run.path("decay.json"), json!({ "phi": phi_name, "psi": psi_name, "curve": curve }))
}

fn clt_stage(run: &mut Run, model: &Model, solution: &GibbsSolution, args: &CltArgs, tol: f64) -> Result<(), CliError> {
    let (name, psi) = observable(model, args.observable.as_deref())?;
    let op = model.op()?;
    let gap = gap_for(model, solution, &psi)?;
    let burn_in = args.burn_in.unwrap_or_else(|| default_burn_in(gap.rate));
    run.manifest.seed = Some(args.seed);
    run.param("clt.observable", name.clone());
    run.param("clt.block", args.block);
    run.param("clt.samples", args.samples);
    run.param("clt.burn_in", burn_in);

    let (variance, decomposition) = run.stage("variance", || {
        let scale = center(&op, solution, &psi)?.sup_norm().powi(2);
        let terms = terms_for_tolerance(&gap, scale, tol);
        Ok(green_kubo_variance(&op, solution, &psi, &gap, terms, tol)?)
    })?;
    let verdict = run.stage("coboundary", || Ok(coboundary_test(&op, solution, &psi, &gap, tol)?))?;
    let sigma2 = variance.sigma2_green_kubo;
    let report = run.stage("empirical_clt", || {
        Ok(empirical_clt(&op, solution, &psi, sigma2, args.block, args.samples, burn_in, args.seed, ZERO_VARIANCE_TOL)?)
    })?;

    let mut table = Table::new(vec!["lo", "hi", "mass"]);
    let h = &report.histogram;
    for (i, m) in h.masses.iter().enumerate() {
        table.rows.push(vec![format_f64(h.edges[i]), format_f64(h.edges[i + 1]), format_f64(*m)]);
    }
    run.csv(&run.path("histogram.csv"), &table)?;
    let mut variance = variance;
    variance.sigma2_batch = Some(report.sample_variance);
    let result = json!({
        "observable": name,
        "gap": gap,
        "variance": variance,
        "martingale": {
            "series_terms": decomposition.series_terms,
            "tail_bound": decomposition.tail_bound,
            "martingale_residual": decomposition.martingale_residual,
            "identity_residual": decomposition.identity_residual,
            "mean_rho": decomposition.mean_rho,
        },
        "coboundary": verdict,
        "clt": report,
    });
    run.json(&run.path("clt.json"), result)
}

/// Runs one subcommand and returns the paths it wrote.
pub fn run(command: &Command) -> Result<Vec<String>, CliError> {
    match command {
        Command::Solve { common, out, no_certificate, certificate_pairs } => {
            let model = prepare(common)?;
            let mut run = Run::new("solve", common, &model.loaded);
            let pairs = (!no_certificate).then_some(*certificate_pairs);
            run.param("certificate_pairs", pairs);
            let solution = run.stage("solve", || solve(&model, common, pairs))?;
            let path = out.clone().unwrap_or_else(|| run.path("gibbs.json"));
            write_solution(&mut run, &model, &solution, &path)?;
            run.finish()
        }
        Command::Certify { common, pairs, steps, max_k } => {
            let model = prepare(common)?;
            let mut run = Run::new("certify", common, &model.loaded);
            let op = model.op()?;
            let solver = solver_for(&common.solver)?;
            let cfg = metric_for(&op)?;
            let steps = steps.unwrap_or_else(|| cfg.m1());
            let depth = common.depth;
            let all_pairs = dirac_pairs(model.space.table(depth).len(), *pairs);
            run.param("pairs", all_pairs.len());
            run.param("steps", steps);
            run.param("max_k", *max_k);
            let certificate = run.stage("certificate", || {
                Ok(certify_contraction(&op, &cfg, depth, &all_pairs, steps, solver.as_ref())?)
            })?;
            let diagonal = run.stage("diagonal_mass", || {
                let mut rows = Vec::new();
                for k in 1..=(*max_k).min(depth) {
                    for m in k..=k + 2 {
                        let mass = min_diagonal_mass(&op, depth, &all_pairs, m, k, solver.as_ref())?;
                        rows.push(json!({ "k": k, "m": m, "min_mass": mass }));
                    }
                }
                Ok(rows)
            })?;
            let floor = (-certificate.lip_phi).exp();
            let result = json!({ "certificate": certificate, "diagonal_mass": diagonal, "diagonal_floor": floor });
            run.json(&run.path("certificate.json"), result)?;
            run.finish()
        }
        Command::Bowen { common, max_m, representative } => {
            let model = prepare(common)?;
            let mut run = Run::new("bowen", common, &model.loaded);
            let max_m = max_m.unwrap_or(common.depth - 1);
            run.param("max_m", max_m);
            let solution = run.stage("solve", || solve(&model, common, None))?;
            bowen_stage(&mut run, &model, &solution, max_m, (*representative).into())?;
            run.finish()
        }
        Command::Decay { common, decay } => {
            let model = prepare(common)?;
            let mut run = Run::new("decay", common, &model.loaded);
            let solution = run.stage("solve", || solve(&model, common, None))?;
            decay_stage(&mut run, &model, &solution, decay)?;
            run.finish()
        }
        Command::Clt { common, clt } => {
            let model = prepare(common)?;
            let mut run = Run::new("clt", common, &model.loaded);
            let solution = run.stage("solve", || solve(&model, common, None))?;
            clt_stage(&mut run, &model, &solution, clt, common.tol)?;
            run.finish()
        }
        Command::Sample { common, length, burn_in, seed } => {
            let model = prepare(common)?;
            let mut run = Run::new("sample", common, &model.loaded);
            let solution = run.stage("solve", || solve(&model, common, None))?;
            let op = model.op()?;
            let burn_in = match burn_in {
                Some(b) => *b,
                None => {
                    let probes = default_probes(&model.space);
                    default_burn_in(spectral_gap_estimate(&op, &solution.measure, &probes, GAP_STEPS)?.rate)
                }
            };
            run.manifest.seed = Some(*seed);
            run.param("length", *length);
            run.param("burn_in", burn_in);
            let symbols = run.stage("sample", || Ok(sample_orbit(&op, &solution, *length, burn_in, *seed)?))?;
            let points: Vec<f64> = symbols.iter().map(|&a| model.space.grid().points()[a as usize]).collect();
            run.json(&run.path("sample.json"), json!({ "symbols": symbols, "points": points }))?;
            run.finish()
        }
        Command::All { common, clt, phi_observable, max_lag } => {
            let model = prepare(common)?;
            let mut run = Run::new("all", common, &model.loaded);
            let pairs = GibbsOptions::default().certificate_pairs;
            let solution = run.stage("solve", || solve(&model, common, pairs))?;
            let path = run.path("gibbs.json");
            write_solution(&mut run, &model, &solution, &path)?;
            bowen_stage(&mut run, &model, &solution, common.depth - 1, Representative::Least)?;
            let decay = DecayArgs {
                observable: clt.observable.clone(),
                phi_observable: phi_observable.clone(),
                max_lag: *max_lag,
            };
            decay_stage(&mut run, &model, &solution, &decay)?;
            clt_stage(&mut run, &model, &solution, clt, common.tol)?;
            run.finish()
        }
    }
}
