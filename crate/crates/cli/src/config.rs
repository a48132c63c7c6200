//! Run configuration: which function, which checks, which settings.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use nslab_core::corpus::{corpus_entry, corpus_ids};
use nslab_core::duality::{DropSchedule, InnerConfig};
use nslab_core::subderiv::EstimatorConfig;
use nslab_core::variational::SearchOptions;
use nslab_core::{parse_function, FunctionSpec};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    RadialLower,
    RadialUpper,
    DiniHadamard,
    Clarke,
    ClarkeRockafellar,
    Diagram,
    Duality,
    Treiman,
    ConvexFormula,
    LowerBound,
    Accessibility,
    Density,
    Ekeland,
    Mvi,
    Stability,
    Link,
}

impl CheckName {
    pub const ALL: [CheckName; 16] = [
        CheckName::RadialLower,
        CheckName::RadialUpper,
        CheckName::DiniHadamard,
        CheckName::Clarke,
        CheckName::ClarkeRockafellar,
        CheckName::Diagram,
        CheckName::Duality,
        CheckName::Treiman,
        CheckName::ConvexFormula,
        CheckName::LowerBound,
        CheckName::Accessibility,
        CheckName::Density,
        CheckName::Ekeland,
        CheckName::Mvi,
        CheckName::Stability,
        CheckName::Link,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::RadialLower => "radial_lower",
            CheckName::RadialUpper => "radial_upper",
            CheckName::DiniHadamard => "dini_hadamard",
            CheckName::Clarke => "clarke",
            CheckName::ClarkeRockafellar => "clarke_rockafellar",
            CheckName::Diagram => "diagram",
            CheckName::Duality => "duality",
            CheckName::Treiman => "treiman",
            CheckName::ConvexFormula => "convex_formula",
            CheckName::LowerBound => "lower_bound",
            CheckName::Accessibility => "accessibility",
            CheckName::Density => "density",
            CheckName::Ekeland => "ekeland",
            CheckName::Mvi => "mvi",
            CheckName::Stability => "stability",
            CheckName::Link => "link",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<CheckName> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown check '{}'", s)))
    }
}

/// One requested check. Unset parameters fall back to per-check defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: CheckName,
    /// Base point (`x0` for Ekeland, `x` for the mean value inequality).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// Direction `u`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    /// Drop direction `v` (duality).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    /// Target point `xbar` (mean value inequality).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// Diagram points and directions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<Vec<f64>>>,
    /// Treiman ball radii.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    /// Ekeland `eps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Ekeland `lambda` or the mean value slope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Ekeland grid `[lo, hi]` per axis; defaults to the bounding box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_only: Option<bool>,
    /// Declared outcome. When present the check passes exactly when the
    /// outcome matches (numbers within the run tolerance).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

impl CheckSpec {
    pub fn new(name: CheckName) -> CheckSpec {
        CheckSpec {
            name,
            point: None,
            u: None,
            v: None,
            target: None,
            alpha: None,
            alphas: None,
            points: None,
            directions: None,
            eps_grid: None,
            eps: None,
            lambda: None,
            grid: None,
            resolution: None,
            levels: None,
            refined: None,
            radial_only: None,
            expect: None,
        }
    }

    /// Parses `name[:key=value;key=value...]`. Vectors are comma separated
    /// and lists of vectors are separated by `|`, as in
    /// `diagram:points=0|0.5;directions=1|-1`.
    pub fn parse(text: &str) -> Result<CheckSpec> {
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n, r),
            None => (text, ""),
        };
        let mut spec = CheckSpec::new(name.trim().parse()?);
        for item in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("check parameter '{}' is not key=value", item)))?;
            let value = value.trim();
            match key.trim() {
                "point" => spec.point = Some(vector(value)?),
                "u" => spec.u = Some(vector(value)?),
                "v" => spec.v = Some(vector(value)?),
                "target" => spec.target = Some(vector(value)?),
                "alpha" => spec.alpha = Some(number(value)?),
                "alphas" => spec.alphas = Some(vector(value)?),
                "points" => spec.points = Some(vectors(value)?),
                "directions" => spec.directions = Some(vectors(value)?),
                "eps_grid" => spec.eps_grid = Some(vector(value)?),
                "eps" => spec.eps = Some(number(value)?),
                "lambda" => spec.lambda = Some(number(value)?),
                "grid" => {
                    let v = vector(value)?;
                    if v.len() % 2 != 0 {
                        return Err(CliError::Config("grid needs lo,hi pairs".into()));
                    }
                    spec.grid = Some(v.chunks(2).map(|c| (c[0], c[1])).collect());
                }
                "resolution" => spec.resolution = Some(count(value)?),
                "levels" => spec.levels = Some(count(value)?),
                "refined" => spec.refined = Some(flag(value)?),
                "radial_only" => spec.radial_only = Some(flag(value)?),
                "expect" => spec.expect = Some(value.to_string()),
                other => return Err(CliError::Config(format!("unknown check parameter '{}'", other))),
            }
        }
        Ok(spec)
    }
}

fn number(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Config(format!("'{}' is not a finite number", s)))
}

fn count(s: &str) -> Result<usize> {
    s.parse().map_err(|_| CliError::Config(format!("'{}' is not a count", s)))
}

fn flag(s: &str) -> Result<bool> {
    s.parse().map_err(|_| CliError::Config(format!("'{}' is not true or false", s)))
}

fn vector(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|c| number(c.trim())).collect()
}

fn vectors(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split('|').map(|c| vector(c.trim())).collect()
}

/// Where the function comes from: a corpus id or a DSL file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

/// Settings shared by all checks of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Quasirandom stream selector; replaces every schedule seed when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Tolerance for declared numeric expectations.
    pub tolerance: f64,
    pub estimators: EstimatorConfig,
    pub drop: DropSchedule,
    pub inner: InnerConfig,
    pub search: SearchOptions,
    /// Levels of witness searches.
    pub levels: usize,
    /// Grid points per axis for Ekeland and mean value searches.
    pub resolution: usize,
}

impl Default for Overrides {
    fn default() -> Self {
        Overrides {
            seed: None,
            tolerance: 1e-3,
            estimators: EstimatorConfig::default(),
            drop: DropSchedule::default(),
            inner: InnerConfig::default(),
            search: SearchOptions::default(),
            levels: 5,
            resolution: 2001,
        }
    }
}

impl Overrides {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::Config(format!("tolerance = {} must be positive", self.tolerance)));
        }
        if self.levels < 3 {
            return Err(CliError::Config("witness searches need at least 3 levels".into()));
        }
        if self.resolution < 2 {
            return Err(CliError::Config("grid resolution must be at least 2".into()));
        }
        let wrap = |e: nslab_core::Error| CliError::Config(e.to_string());
        self.estimators.validate().map_err(wrap)?;
        self.drop.validate().map_err(wrap)?;
        self.inner.estimators.validate().map_err(wrap)?;
        self.search.schedule.validate().map_err(wrap)?;
        Ok(())
    }

    /// Applies `seed` to every schedule.
    pub fn apply_seed(&mut self) {
        if let Some(s) = self.seed {
            self.estimators.schedule.seed = s;
            self.drop.seed = s;
            self.inner.estimators.schedule.seed = s;
            self.search.seed = s;
            self.search.schedule.seed = s;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for `report.json` and plot files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Trace quantities to write as `<quantity>.csv`.
    pub plots: Vec<String>,
    /// Record wall-times in the report (the report is then no longer
    /// reproducible byte for byte).
    pub timings: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub function: FunctionSource,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; a relative function file path is taken
    /// relative to the config's directory.
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        if let Some(f) = &cfg.function.file {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.function.file = Some(dir.join(f));
                }
            }
        }
        Ok(cfg)
    }

    /// Loads the function and checks that every check is well formed for it.
    pub fn resolve(&self) -> Result<ResolvedFunction> {
        let func = match (&self.function.corpus, &self.function.file) {
            (Some(id), None) => {
                let e = corpus_entry(id).ok_or_else(|| {
                    CliError::Config(format!("unknown corpus id '{}' (known: {})", id, corpus_ids().join(", ")))
                })?;
                ResolvedFunction {
                    id: Some(e.id.clone()),
                    source: e.source.clone(),
                    spec: e.spec.clone(),
                    cases: e.cases.iter().map(|c| (c.point.clone(), c.direction.clone())).collect(),
                }
            }
            (None, Some(path)) => {
                let source = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let spec = parse_function(&source).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))?;
                ResolvedFunction {
                    id: None,
                    source,
                    spec,
                    cases: Vec::new(),
                }
            }
            _ => return Err(CliError::Config("give exactly one of function.corpus and function.file".into())),
        };
        if self.checks.is_empty() {
            return Err(CliError::Config("no checks requested".into()));
        }
        self.overrides.validate()?;
        for (i, c) in self.checks.iter().enumerate() {
            validate_check(i, c, func.spec.dim)?;
        }
        Ok(func)
    }
}

fn validate_check(i: usize, c: &CheckSpec, dim: usize) -> Result<()> {
    let bad = |what: String| Err(CliError::Config(format!("check {} ({}): {}", i, c.name, what)));
    for (label, v) in [("point", &c.point), ("u", &c.u), ("v", &c.v), ("target", &c.target)] {
        if let Some(v) = v {
            if v.len() != dim {
                return bad(format!("{} has {} coordinates, the function has dim {}", label, v.len(), dim));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad(format!("{} must be finite", label));
            }
        }
    }
    for (label, vs) in [("points", &c.points), ("directions", &c.directions)] {
        if let Some(vs) = vs {
            if vs.is_empty() || vs.iter().any(|v| v.len() != dim) {
                return bad(format!("{} must be a nonempty list of {}-vectors", label, dim));
            }
        }
    }
    if let Some(a) = c.alpha {
        if !(a >= 0.0) {
            return bad("alpha must be nonnegative".into());
        }
    }
    if let Some(a) = &c.alphas {
        if a.is_empty() || a.iter().any(|x| !(*x >= 0.0)) {
            return bad("alphas must be a nonempty list of nonnegative numbers".into());
        }
    }
    if let Some(e) = &c.eps_grid {
        if e.is_empty() || e.iter().any(|x| !(*x > 0.0)) {
            return bad("eps_grid must be positive".into());
        }
    }
    if c.name == CheckName::Mvi && c.lambda.map_or(false, |l| !l.is_finite()) {
        return bad("lambda must be finite".into());
    }
    let lambda = if c.name == CheckName::Mvi { None } else { c.lambda };
    for (label, v) in [("eps", c.eps), ("lambda", lambda)] {
        if let Some(v) = v {
            if !(v > 0.0) {
                return bad(format!("{} must be positive", label));
            }
        }
    }
    if let Some(g) = &c.grid {
        if g.len() != dim || g.iter().any(|(lo, hi)| !(lo < hi)) {
            return bad(format!("grid needs {} intervals with lo < hi", dim));
        }
    }
    if c.resolution.map_or(false, |r| r < 2) {
        return bad("resolution must be at least 2".into());
    }
    if c.levels.map_or(false, |l| l < 3) {
        return bad("levels must be at least 3".into());
    }
    if c.name == CheckName::Mvi && c.target.is_none() {
        return bad("mvi needs a target".into());
    }
    Ok(())
}

/// The function of a run, with its designated cases when it comes from
/// the corpus.
#[derive(Clone, Debug)]
pub struct ResolvedFunction {
    pub id: Option<String>,
    pub source: String,
    pub spec: FunctionSpec,
    pub cases: Vec<(Vec<f64>, Vec<f64>)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_check_strings() {
        let c = CheckSpec::parse("duality:point=0;u=1;v=1;alpha=0").unwrap();
        assert_eq!(c.name, CheckName::Duality);
        assert_eq!(c.point, Some(vec![0.0]));
        assert_eq!(c.alpha, Some(0.0));
        let c = CheckSpec::parse("diagram:points=0|0.5;directions=1,0|0,1").unwrap();
        assert_eq!(c.points, Some(vec![vec![0.0], vec![0.5]]));
        assert_eq!(c.directions, Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
        assert_eq!(CheckSpec::parse("accessibility").unwrap().point, None);
        assert!(CheckSpec::parse("nonsense").is_err());
        assert!(CheckSpec::parse("duality:q=1").is_err());
        assert!(CheckSpec::parse("duality:alpha=x").is_err());
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let cfg = RunConfig::from_toml(
            "[function]\ncorpus = \"neg_abs\"\n\n[[checks]]\nname = \"duality\"\npoint = [0]\nu = [1]\nv = [1]\nalpha = 0\n",
        )
        .unwrap();
        assert_eq!(cfg.checks[0].point, Some(vec![0.0]));
        cfg.resolve().unwrap();
        let again = RunConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);

        let mut bad = cfg.clone();
        bad.checks[0].u = Some(vec![1.0, 0.0]);
        assert!(matches!(bad.resolve(), Err(CliError::Config(_))));
        let mut bad = cfg.clone();
        bad.overrides.estimators.schedule.q = 1.5;
        assert!(matches!(bad.resolve(), Err(CliError::Config(_))));
        let mut bad = cfg.clone();
        bad.function.corpus = Some("missing".into());
        assert!(matches!(bad.resolve(), Err(CliError::Config(_))));
        assert!(RunConfig::from_toml("[function]\ncorpus = \"abs\"\n[[checks]]\nname = \"duality\"\nbogus = 1\n").is_err());
    }
}
