//! The JSON system file: grid, metric, a priori weights, admissibility,
//! potential and observables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gibbslab_core::config_space::{AdmissibilitySystem, ConstraintSet, Interval, SpinGrid, WordSpace};
use gibbslab_core::transfer::DepthKFunction;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative slack on the total of explicit `nu_weights`.
const NU_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub grid: GridSpec,
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_weights: Option<WeightSpec>,
    pub admissibility: AdmissibilitySpec,
    /// Closed intervals `[lo, hi]` whose union is `I`.
    pub constraint: Vec<[f64; 2]>,
    /// Grid points closer than this must share `s(b)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locality_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `n` equally spaced points on `[0, 1]`.
    Uniform(usize),
    Points(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    /// `|x - y|` on the point coordinates.
    #[default]
    Interval,
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Uniform,
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AdmissibilitySpec {
    Expression(Expression),
    /// Row `a`, column `b` holds `A(a, b)`.
    Matrix(Vec<Vec<f64>>),
}

/// Closed-form `A(a, b)` evaluated on point coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expression {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "a*b")]
    Product,
    #[serde(rename = "a+b")]
    Sum,
    #[serde(rename = "a-b")]
    Difference,
    #[serde(rename = "|a-b|")]
    AbsDifference,
}

impl Expression {
    fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            Expression::Zero => 0.0,
            Expression::Product => a * b,
            Expression::Sum => a + b,
            Expression::Difference => a - b,
            Expression::AbsDifference => (a - b).abs(),
        }
    }
}

/// A function on admissible words, used for potentials and observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant(f64),
    /// Indicator of the cylinder of a word of grid indices.
    Indicator(Vec<u32>),
    /// One value per admissible word of `depth`, in table order.
    Values { depth: usize, values: Vec<f64> },
    /// Values keyed by space-separated grid indices; other words get `default`.
    Table {
        depth: usize,
        #[serde(default)]
        default: f64,
        entries: BTreeMap<String, f64>,
    },
}

impl FunctionSpec {
    pub fn depth(&self) -> usize {
        match self {
            FunctionSpec::Constant(_) => 1,
            FunctionSpec::Indicator(w) => w.len(),
            FunctionSpec::Values { depth, .. } | FunctionSpec::Table { depth, .. } => *depth,
        }
    }

    pub fn materialize(&self, space: &WordSpace) -> Result<DepthKFunction, CliError> {
        let f = match self {
            FunctionSpec::Constant(c) => Ok(DepthKFunction::constant(space, *c)),
            FunctionSpec::Indicator(w) => DepthKFunction::indicator(space, w),
            FunctionSpec::Values { depth, values } => DepthKFunction::new(space, *depth, values.clone()),
            FunctionSpec::Table { depth, default, entries } => {
                space.check_depth(*depth)?;
                let table = space.table(*depth);
                let mut values = vec![*default; table.len()];
                let mut problems = Vec::new();
                for (key, &v) in entries {
                    let word: Result<Vec<u32>, _> = key.split_whitespace().map(str::parse::<u32>).collect();
                    match word.ok().and_then(|w| table.index_of(&w)) {
                        Some(i) => values[i] = v,
                        None => problems.push(format!("table entry {key:?} is not an admissible depth-{depth} word")),
                    }
                }
                if !problems.is_empty() {
                    return Err(CliError::Validation(problems));
                }
                DepthKFunction::new(space, *depth, values)
            }
        }?;
        Ok(f)
    }
}

/// A validated system file together with its core objects.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub path: PathBuf,
    pub sha256: String,
    pub file: SystemFile,
    pub grid: SpinGrid,
    pub system: AdmissibilitySystem,
}

impl LoadedSystem {
    /// Word tables up to `depth`.
    pub fn space(&self, depth: usize) -> Result<WordSpace, CliError> {
        Ok(WordSpace::new(self.grid.clone(), self.system.clone(), depth)?)
    }

    /// Largest depth any declared function needs.
    pub fn function_depth(&self) -> usize {
        self.file
            .potential
            .iter()
            .chain(self.file.observables.values())
            .map(FunctionSpec::depth)
            .max()
            .unwrap_or(1)
    }

    pub fn potential(&self, space: &WordSpace) -> Result<DepthKFunction, CliError> {
        match &self.file.potential {
            Some(spec) => spec.materialize(space),
            None => Ok(DepthKFunction::zero(space)),
        }
    }

    /// Observable by name, or the first declared one when `name` is `None`.
    pub fn observable(&self, name: Option<&str>) -> Result<(&str, &FunctionSpec), CliError> {
        let obs = &self.file.observables;
        let found = match name {
            Some(n) => obs.get_key_value(n),
            None => obs.iter().next(),
        };
        found.map(|(k, v)| (k.as_str(), v)).ok_or_else(|| {
            CliError::Validation(vec![match name {
                Some(n) => format!("observable {n:?} is not declared; known: {:?}", obs.keys().collect::<Vec<_>>()),
                None => "the system file declares no observables".into(),
            }])
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Reads, parses and validates a system file.
pub fn load_system(path: &Path) -> Result<LoadedSystem, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: SystemFile = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let (grid, system) = build(&file)?;
    Ok(LoadedSystem { path: path.to_path_buf(), sha256: sha256_hex(&bytes), file, grid, system })
}

fn square(name: &str, m: &[Vec<f64>], n: usize, problems: &mut Vec<String>) -> Option<Vec<f64>> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        problems.push(format!("{name} must be a {n}x{n} matrix"));
        return None;
    }
    Some(m.iter().flatten().copied().collect())
}

/// Checks a parsed file and builds the grid and admissibility system,
/// reporting every violation found rather than the first.
pub fn build(file: &SystemFile) -> Result<(SpinGrid, AdmissibilitySystem), CliError> {
    let mut problems = Vec::new();
    if file.version != SCHEMA_VERSION {
        problems.push(format!("unsupported version {} (expected {SCHEMA_VERSION})", file.version));
    }
    let points: Vec<f64> = match &file.grid {
        GridSpec::Uniform(0) => {
            problems.push("grid.uniform must be positive".into());
            Vec::new()
        }
        GridSpec::Uniform(1) => vec![0.0],
        GridSpec::Uniform(n) => (0..*n).map(|i| i as f64 / (*n - 1) as f64).collect(),
        GridSpec::Points(p) => {
            if p.is_empty() {
                problems.push("grid.points is empty".into());
            }
            if p.iter().any(|x| !x.is_finite()) {
                problems.push("grid.points must be finite".into());
            }
            p.clone()
        }
    };
    let n = points.len();
    let nu = match &file.nu_weights {
        None => {
            log::info!("nu_weights not given; using uniform weights");
            vec![1.0 / n.max(1) as f64; n]
        }
        Some(WeightSpec::Uniform) => vec![1.0 / n.max(1) as f64; n],
        Some(WeightSpec::Values(v)) => {
            if v.len() != n {
                problems.push(format!("nu_weights has {} entries, grid has {n}", v.len()));
            }
            if v.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                problems.push("nu_weights must be nonnegative".into());
            }
            let total: f64 = v.iter().sum();
            if (total - 1.0).abs() > NU_SUM_TOL {
                problems.push(format!("nu_weights sum to {total}, expected 1"));
            }
            v.clone()
        }
    };
    let distance = match &file.metric {
        MetricSpec::Interval => Some(
            points.iter().flat_map(|&x| points.iter().map(move |&y| (x - y).abs())).collect::<Vec<f64>>(),
        ),
        MetricSpec::Matrix(m) => square("metric.matrix", m, n, &mut problems),
    };
    let a_values = match &file.admissibility {
        AdmissibilitySpec::Expression(e) => {
            Some(points.iter().flat_map(|&x| points.iter().map(move |&y| e.eval(x, y))).collect())
        }
        AdmissibilitySpec::Matrix(m) => square("admissibility.matrix", m, n, &mut problems),
    };
    if file.constraint.is_empty() {
        problems.push("constraint is empty (EmptyConstraintSet)".into());
    }
    for (i, [lo, hi]) in file.constraint.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            problems.push(format!("constraint[{i}] = [{lo}, {hi}] is not a closed interval"));
        }
    }
    if let Some(r) = file.locality_radius {
        if !(r.is_finite() && r >= 0.0) {
            problems.push(format!("locality_radius must be nonnegative, got {r}"));
        }
    }
    for (name, spec) in file.potential.iter().map(|p| ("potential", p)).chain(
        file.observables.iter().map(|(k, v)| (k.as_str(), v)),
    ) {
        if spec.depth() == 0 {
            problems.push(format!("{name}: depth must be positive"));
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Validation(problems));
    }

    let grid = SpinGrid::new(points, distance.expect("checked"), nu)?;
    let constraint =
        ConstraintSet::new(file.constraint.iter().map(|&[lo, hi]| Interval::new(lo, hi)).collect())?;
    let a_values = a_values.expect("checked");
    let system = match file.locality_radius {
        Some(r) => AdmissibilitySystem::build_with_locality(&grid, a_values, constraint, r)?,
        None => AdmissibilitySystem::build(&grid, a_values, constraint)?,
    };
    Ok((grid, system))
}
