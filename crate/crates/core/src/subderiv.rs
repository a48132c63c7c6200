//! Sampled estimators of the radial, Dini-Hadamard, Clarke and
//! Clarke-Rockafellar subderivatives, the inequality diagram between them,
//! and the radial accessibility test.
//!
//! Every limit `t -> 0` is replaced by a sequence of geometric bands of
//! scales. Each band reduces its samples with `min` or `max` only, and the
//! band tail is then classified as a finite value, `+inf`, `-inf`, or left
//! unresolved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcmodel::FunctionSpec;
use crate::sampling::{axpy, ball_grid, ball_points, geometric, norm};

/// Band values beyond this magnitude (with a monotone tail) classify as infinite.
pub const INF_THRESHOLD: f64 = 1e6;
pub const DIAGRAM_TOL: f64 = 1e-3;
/// Largest gap `liminf f(x+tu) - f(x)` still counted as radially accessible.
pub const ACCESS_TOL: f64 = 1e-3;
/// Smallest scale any schedule may reach.
pub const SCALE_FLOOR: f64 = 1e-10;
/// Cap on special-set points injected into one band.
pub const SPECIAL_CAP: usize = 32;

/// Shrinking-scale grid standing in for `t -> 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitSchedule {
    pub t0: f64,
    pub q: f64,
    pub bands: usize,
    pub samples_per_band: usize,
    /// Quasirandom stream selector for neighbourhood samples.
    pub seed: u64,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        LimitSchedule {
            t0: 0.1,
            q: 0.5,
            bands: 24,
            samples_per_band: 16,
            seed: 0,
        }
    }
}

impl LimitSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("t0 = {} must be positive", self.t0)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParameter(format!("q = {} must lie in (0,1)", self.q)));
        }
        if self.bands < 3 {
            return Err(Error::InvalidParameter("at least 3 bands are required".into()));
        }
        if self.samples_per_band < 8 {
            return Err(Error::InvalidParameter("at least 8 samples per band are required".into()));
        }
        if self.t0 * self.q.powi(self.bands as i32) <= SCALE_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "smallest scale t0*q^K = {:e} is below the floor {:e}",
                self.t0 * self.q.powi(self.bands as i32),
                SCALE_FLOOR
            )));
        }
        Ok(())
    }

    /// Same ratio and density started at `t0`, with as many of the original
    /// bands as the scale floor allows (never fewer than 3).
    pub fn rescaled(&self, t0: f64) -> LimitSchedule {
        let max_k = ((SCALE_FLOOR / t0).ln() / self.q.ln()).floor() as usize;
        LimitSchedule {
            t0,
            bands: self.bands.min(max_k.saturating_sub(1)).max(3),
            ..self.clone()
        }
    }

    /// Same schedule with at most `bands` bands.
    pub fn truncated(&self, bands: usize) -> LimitSchedule {
        LimitSchedule {
            bands: self.bands.min(bands).max(3),
            ..self.clone()
        }
    }

    /// `(t_lo, t_hi)` of band `k`.
    pub fn band(&self, k: usize) -> (f64, f64) {
        let hi = self.t0 * self.q.powi(k as i32);
        (hi * self.q, hi)
    }

    pub fn band_ts(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.band(k);
        geometric(hi, lo, self.samples_per_band)
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.bands).map(|k| self.band(k).1).collect()
    }
}

/// Acceptance width `max(abs, rel*|v|)` for a finite band tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const SUBDERIV: Tolerance = Tolerance { abs: 1e-6, rel: 1e-3 };

    pub fn at(&self, v: f64) -> f64 {
        self.abs.max(self.rel * v.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// `None` when the tail neither settles nor diverges.
    pub value: Option<ExtReal>,
    pub monotone: bool,
}

/// Bound on the change still to come when the increments `d` keep one sign
/// and shrink by a factor of at most 3/4.
fn geometric_remainder(d: &[f64]) -> Option<f64> {
    let r = d
        .windows(2)
        .map(|w| if w[0] != 0.0 && w[1] / w[0] > 0.0 { w[1] / w[0] } else { f64::INFINITY })
        .fold(0.0, f64::max);
    (r <= 0.75).then(|| d[d.len() - 1].abs() * r / (1.0 - r))
}

/// Classifies the tail of a band sequence; `None` entries are empty bands.
///
/// * finite `v` when the last three values are pairwise within `tol.at(v)`,
///   or when the last four converge geometrically and the bound on the
///   remaining change is within `tol.at(v)`;
/// * `+inf` when the last value exceeds [`INF_THRESHOLD`] and the last three
///   are nondecreasing, or when the last four are finite, strictly
///   increasing, with nondecreasing increments (sustained growth such as
///   `t^(-1/2)`, which cannot reach the threshold above the scale floor);
/// * `-inf` symmetrically.
pub fn classify(values: &[Option<ExtReal>], tol: Tolerance) -> Result<Classification> {
    let tail: Vec<ExtReal> = values.iter().flatten().copied().collect();
    if tail.is_empty() {
        return Err(Error::NoSamples("every band was empty".into()));
    }
    if tail.len() < 3 {
        return Ok(Classification { value: None, monotone: false });
    }
    let n = tail.len();
    let last3 = &tail[n - 3..];
    let nondecreasing = last3.windows(2).all(|w| w[0] <= w[1]);
    let nonincreasing = last3.windows(2).all(|w| w[0] >= w[1]);
    let monotone = nondecreasing || nonincreasing;
    let last = tail[n - 1];

    if last > ExtReal::Finite(INF_THRESHOLD) && nondecreasing {
        return Ok(Classification { value: Some(ExtReal::PosInf), monotone });
    }
    if last < ExtReal::Finite(-INF_THRESHOLD) && nonincreasing {
        return Ok(Classification { value: Some(ExtReal::NegInf), monotone });
    }
    if let Some(v) = last.finite() {
        let fin: Option<Vec<f64>> = last3.iter().map(|e| e.finite()).collect();
        if let Some(fin) = fin {
            let w = tol.at(v);
            let spread = fin.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - fin.iter().cloned().fold(f64::INFINITY, f64::min);
            if spread < w {
                return Ok(Classification { value: Some(ExtReal::Finite(v)), monotone });
            }
        }
        if n >= 4 {
            let fin4: Option<Vec<f64>> = tail[n - 4..].iter().map(|e| e.finite()).collect();
            if let Some(f4) = fin4 {
                let d: Vec<f64> = f4.windows(2).map(|w| w[1] - w[0]).collect();
                if let Some(rest) = geometric_remainder(&d) {
                    if rest < tol.at(v) {
                        return Ok(Classification { value: Some(ExtReal::Finite(v)), monotone });
                    }
                }
                let growing = |d: &[f64]| {
                    d.iter().all(|&x| x > 0.0)
                        && d.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-6))
                        && d[2] > tol.at(v)
                };
                if growing(&d) {
                    return Ok(Classification { value: Some(ExtReal::PosInf), monotone });
                }
                let neg: Vec<f64> = d.iter().map(|x| -x).collect();
                if growing(&neg) {
                    return Ok(Classification { value: Some(ExtReal::NegInf), monotone });
                }
            }
        }
    }
    Ok(Classification { value: None, monotone })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    RadialLower,
    RadialUpper,
    DiniHadamard,
    Clarke,
    ClarkeRockafellar,
}

impl Kind {
    pub const ALL: [Kind; 5] = [
        Kind::DiniHadamard,
        Kind::RadialLower,
        Kind::RadialUpper,
        Kind::ClarkeRockafellar,
        Kind::Clarke,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Kind::RadialLower => "radial_lower",
            Kind::RadialUpper => "radial_upper",
            Kind::DiniHadamard => "dini_hadamard",
            Kind::Clarke => "clarke",
            Kind::ClarkeRockafellar => "clarke_rockafellar",
        }
    }

    pub fn from_name(name: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubderivEstimate {
    pub kind: Kind,
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    /// Upper scale `t_hi` of each band.
    pub scales: Vec<f64>,
    pub band_values: Vec<Option<ExtReal>>,
    pub value: Option<ExtReal>,
    pub monotone: bool,
    /// Clarke-Rockafellar only: `(delta, classified value)` per outer level.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outer: Vec<(f64, Option<ExtReal>)>,
}

impl SubderivEstimate {
    /// The classified value, or an error naming the estimate when the tail
    /// did not settle.
    pub fn resolved(&self) -> Result<ExtReal> {
        self.value.ok_or_else(|| {
            Error::NoSamples(format!(
                "{} at {:?} along {:?} did not classify",
                self.kind.name(),
                self.point,
                self.direction
            ))
        })
    }
}

/// Sample counts for the perturbed estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub schedule: LimitSchedule,
    pub nbhd_samples: usize,
    pub dir_ball_samples: usize,
    /// Outer grid `{delta0 * delta_ratio^j}` of the Clarke-Rockafellar estimator.
    pub delta0: f64,
    pub delta_ratio: f64,
    pub delta_levels: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            schedule: LimitSchedule::default(),
            nbhd_samples: 16,
            dir_ball_samples: 8,
            delta0: 0.1,
            delta_ratio: 0.1,
            delta_levels: 5,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.nbhd_samples < 4 || self.dir_ball_samples < 2 {
            return Err(Error::InvalidParameter("sample counts too small".into()));
        }
        if !(self.delta0 > 0.0 && self.delta_ratio > 0.0 && self.delta_ratio < 1.0 && self.delta_levels >= 1) {
            return Err(Error::InvalidParameter("delta grid must be positive and shrinking".into()));
        }
        Ok(())
    }

    pub fn deltas(&self) -> Vec<f64> {
        (0..self.delta_levels)
            .map(|j| self.delta0 * self.delta_ratio.powi(j as i32))
            .collect()
    }

    pub fn with_schedule(&self, schedule: LimitSchedule) -> EstimatorConfig {
        EstimatorConfig { schedule, ..self.clone() }
    }

    /// Uses `schedule` and shrinks the δ grid by the same factor as its
    /// starting scale.
    pub fn rescaled(&self, schedule: LimitSchedule) -> EstimatorConfig {
        let delta0 = self.delta0 * (schedule.t0 / self.schedule.t0).min(1.0);
        EstimatorConfig {
            schedule,
            delta0,
            ..self.clone()
        }
    }

    pub fn estimate(&self, kind: Kind, f: &FunctionSpec, x: &[f64], u: &[f64]) -> Result<SubderivEstimate> {
        let s = &self.schedule;
        match kind {
            Kind::RadialLower => radial_lower(f, x, u, s),
            Kind::RadialUpper => radial_upper(f, x, u, s),
            Kind::DiniHadamard => dini_hadamard(f, x, u, s, self.dir_ball_samples),
            Kind::Clarke => clarke(f, x, u, s, self.nbhd_samples),
            Kind::ClarkeRockafellar => clarke_rockafellar(f, x, u, self),
        }
    }
}

/// `f(x)` for `x` in `dom f`, otherwise a precondition error.
pub fn base_value(f: &FunctionSpec, x: &[f64]) -> Result<f64> {
    if x.len() != f.dim {
        return Err(Error::Domain(format!("point {:?} has wrong dimension", x)));
    }
    match f.evaluate(x)? {
        ExtReal::Finite(v) => Ok(v),
        other => Err(Error::Precondition(format!("point {:?} is not in dom f (f = {})", x, other))),
    }
}

/// Difference quotient `(f(b + t d) - fb) / t`; `None` if the point is inadmissible.
fn quotient(f: &FunctionSpec, b: &[f64], fb: f64, d: &[f64], t: f64) -> Option<ExtReal> {
    f.try_eval(&axpy(b, t, d)).map(|v| v.quotient(fb, t))
}

/// Band scales plus the special-set hits of the ray `b + t d` inside the band.
fn ray_ts(f: &FunctionSpec, sched: &LimitSchedule, k: usize, b: &[f64], d: &[f64]) -> Vec<f64> {
    let mut ts = sched.band_ts(k);
    let (lo, hi) = sched.band(k);
    ts.extend(f.special_ray_hits(b, d, lo, hi, SPECIAL_CAP));
    ts
}

fn reduce(vals: impl Iterator<Item = ExtReal>, take_max: bool) -> Option<ExtReal> {
    vals.reduce(|a, b| if take_max { a.max(b) } else { a.min(b) })
}

fn finish(
    kind: Kind,
    x: &[f64],
    u: &[f64],
    sched: &LimitSchedule,
    band_values: Vec<Option<ExtReal>>,
) -> Result<SubderivEstimate> {
    let c = classify(&band_values, Tolerance::SUBDERIV)?;
    Ok(SubderivEstimate {
        kind,
        point: x.to_vec(),
        direction: u.to_vec(),
        scales: sched.scales(),
        band_values,
        value: c.value,
        monotone: c.monotone,
        outer: Vec::new(),
    })
}

fn zero_direction(kind: Kind, x: &[f64], u: &[f64], sched: &LimitSchedule) -> SubderivEstimate {
    SubderivEstimate {
        kind,
        point: x.to_vec(),
        direction: u.to_vec(),
        scales: sched.scales(),
        band_values: vec![Some(ExtReal::ZERO); sched.bands],
        value: Some(ExtReal::ZERO),
        monotone: true,
        outer: Vec::new(),
    }
}

fn radial(f: &FunctionSpec, x: &[f64], u: &[f64], sched: &LimitSchedule, upper: bool) -> Result<SubderivEstimate> {
    sched.validate()?;
    let fx = base_value(f, x)?;
    let kind = if upper { Kind::RadialUpper } else { Kind::RadialLower };
    if norm(u) == 0.0 {
        return Ok(zero_direction(kind, x, u, sched));
    }
    let bands = (0..sched.bands)
        .map(|k| {
            let ts = ray_ts(f, sched, k, x, u);
            reduce(ts.iter().filter_map(|&t| quotient(f, x, fx, u, t)), upper)
        })
        .collect();
    finish(kind, x, u, sched, bands)
}

/// Lower radial subderivative: `liminf_{t->0+} (f(x+tu) - f(x)) / t`.
pub fn radial_lower(f: &FunctionSpec, x: &[f64], u: &[f64], sched: &LimitSchedule) -> Result<SubderivEstimate> {
    radial(f, x, u, sched, false)
}

/// Upper radial subderivative: the `limsup` of the same quotient.
pub fn radial_upper(f: &FunctionSpec, x: &[f64], u: &[f64], sched: &LimitSchedule) -> Result<SubderivEstimate> {
    radial(f, x, u, sched, true)
}

/// Radius of the direction ball in band `k`; shrinks slower than `t` so
/// that `t * radius` stays large relative to `t^2`.
fn dir_radius(t_hi: f64) -> f64 {
    t_hi.powf(0.75)
}

/// Dini-Hadamard subderivative: `liminf` over `t -> 0+` and `u' -> u`.
pub fn dini_hadamard(
    f: &FunctionSpec,
    x: &[f64],
    u: &[f64],
    sched: &LimitSchedule,
    dir_ball_samples: usize,
) -> Result<SubderivEstimate> {
    sched.validate()?;
    let fx = base_value(f, x)?;
    let bands = (0..sched.bands)
        .map(|k| {
            let (_, hi) = sched.band(k);
            ball_grid(u, dir_radius(hi), dir_ball_samples)
                .iter()
                .filter_map(|d| {
                    let ts = ray_ts(f, sched, k, x, d);
                    reduce(ts.iter().filter_map(|&t| quotient(f, x, fx, d, t)), false)
                })
                .reduce(ExtReal::min)
        })
        .collect();
    finish(Kind::DiniHadamard, x, u, sched, bands)
}

/// Base points for the strict estimators in band `k`: neighbourhood samples
/// and special points within `rho` whose values lie within `eta` of `f(x)`.
/// `x` itself is always included.
fn attentive_bases(
    f: &FunctionSpec,
    x: &[f64],
    fx: f64,
    rho: f64,
    eta: f64,
    n: usize,
    seed: u64,
) -> Vec<(Vec<f64>, f64)> {
    let mut pts = ball_points(x, rho, n, seed);
    if f.dim == 1 {
        pts.extend(f.special_points(x[0] - rho, x[0] + rho, SPECIAL_CAP));
    }
    pts.into_iter()
        .filter_map(|b| {
            let fb = f.dom_value(&b)?;
            ((fb - fx).abs() <= eta).then_some((b, fb))
        })
        .collect()
}

/// Clarke subderivative: `limsup` of `(f(b+tu) - f(b)) / t` over
/// `t -> 0+` and `(b, f(b)) -> (x, f(x))`.
pub fn clarke(
    f: &FunctionSpec,
    x: &[f64],
    u: &[f64],
    sched: &LimitSchedule,
    nbhd_samples: usize,
) -> Result<SubderivEstimate> {
    sched.validate()?;
    let fx = base_value(f, x)?;
    if norm(u) == 0.0 {
        return Ok(zero_direction(Kind::Clarke, x, u, sched));
    }
    let bands = (0..sched.bands)
        .map(|k| {
            let (_, hi) = sched.band(k);
            attentive_bases(f, x, fx, hi, hi, nbhd_samples, sched.seed)
                .iter()
                .filter_map(|(b, fb)| {
                    let ts = ray_ts(f, sched, k, b, u);
                    reduce(ts.iter().filter_map(|&t| quotient(f, b, *fb, u, t)), true)
                })
                .reduce(ExtReal::max)
        })
        .collect();
    finish(Kind::Clarke, x, u, sched, bands)
}

/// Directions `u'` of `B(u, delta)` probed at scale `t` from base `b`: the
/// ball grid plus, in 1D, the directions that land on special points.
fn probe_dirs(f: &FunctionSpec, b: &[f64], u: &[f64], delta: f64, t: f64, n: usize) -> Vec<Vec<f64>> {
    let mut dirs = ball_grid(u, delta, n);
    if f.dim == 1 {
        let (a, c) = (b[0] + t * (u[0] - delta), b[0] + t * (u[0] + delta));
        for s in f.special_points(a.min(c), a.max(c), 8) {
            dirs.push(vec![(s[0] - b[0]) / t]);
        }
    }
    dirs
}

/// Clarke-Rockafellar subderivative:
/// `sup_delta limsup_{t, (b,f(b))} inf_{u' in B(u,delta)} (f(b+tu') - f(b)) / t`.
pub fn clarke_rockafellar(f: &FunctionSpec, x: &[f64], u: &[f64], cfg: &EstimatorConfig) -> Result<SubderivEstimate> {
    cfg.validate()?;
    let sched = &cfg.schedule;
    let fx = base_value(f, x)?;
    let mut outer = Vec::new();
    let mut best: Option<(ExtReal, Vec<Option<ExtReal>>, bool)> = None;
    let mut last_bands = Vec::new();
    for delta in cfg.deltas() {
        let bands: Vec<Option<ExtReal>> = (0..sched.bands)
            .map(|k| {
                let (_, hi) = sched.band(k);
                let ts = sched.band_ts(k);
                attentive_bases(f, x, fx, hi, hi, cfg.nbhd_samples, sched.seed)
                    .iter()
                    .flat_map(|(b, fb)| {
                        ts.iter().filter_map(move |&t| {
                            probe_dirs(f, b, u, delta, t, cfg.dir_ball_samples)
                                .iter()
                                .filter_map(|d| quotient(f, b, *fb, d, t))
                                .reduce(ExtReal::min)
                        })
                    })
                    .reduce(ExtReal::max)
            })
            .collect();
        let c = classify(&bands, Tolerance::SUBDERIV)?;
        outer.push((delta, c.value));
        if let Some(v) = c.value {
            if best.as_ref().map_or(true, |(b, _, _)| v > *b) {
                best = Some((v, bands.clone(), c.monotone));
            }
        }
        last_bands = bands;
    }
    let (value, band_values, monotone) = match best {
        Some((v, b, m)) => (Some(v), b, m),
        None => (None, last_bands, false),
    };
    Ok(SubderivEstimate {
        kind: Kind::ClarkeRockafellar,
        point: x.to_vec(),
        direction: u.to_vec(),
        scales: sched.scales(),
        band_values,
        value,
        monotone,
        outer,
    })
}

/// The five estimates at one `(x, u)`, in the order of [`Kind::ALL`].
pub fn all_five(f: &FunctionSpec, x: &[f64], u: &[f64], cfg: &EstimatorConfig) -> Result<Vec<SubderivEstimate>> {
    Kind::ALL.iter().map(|k| cfg.estimate(*k, f, x, u)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramCase {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub dini_hadamard: Option<ExtReal>,
    pub radial_lower: Option<ExtReal>,
    pub radial_upper: Option<ExtReal>,
    pub clarke_rockafellar: Option<ExtReal>,
    pub clarke: Option<ExtReal>,
    pub violations: Vec<String>,
    /// Comparisons skipped because one side did not classify.
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramReport {
    pub cases: Vec<DiagramCase>,
}

impl DiagramReport {
    pub fn violation_count(&self) -> usize {
        self.cases.iter().map(|c| c.violations.len()).sum()
    }
}

/// Checks `f^d <= f^r <= f^r+ <= f^0` and `f^d <= f^up <= f^0` at every
/// `(point, direction)` pair within [`DIAGRAM_TOL`].
pub fn check_diagram(
    f: &FunctionSpec,
    points: &[Vec<f64>],
    dirs: &[Vec<f64>],
    cfg: &EstimatorConfig,
) -> Result<DiagramReport> {
    let mut cases = Vec::new();
    for x in points {
        for u in dirs {
            let est = all_five(f, x, u, cfg)?;
            let v: Vec<Option<ExtReal>> = est.iter().map(|e| e.value).collect();
            let (fd, fr, frp, fup, f0) = (v[0], v[1], v[2], v[3], v[4]);
            let mut violations = Vec::new();
            let mut skipped = Vec::new();
            for (lo, hi, label) in [
                (fd, fr, "f^d <= f^r"),
                (fr, frp, "f^r <= f^r+"),
                (frp, f0, "f^r+ <= f^0"),
                (fd, fup, "f^d <= f^up"),
                (fup, f0, "f^up <= f^0"),
            ] {
                match (lo, hi) {
                    (Some(a), Some(b)) => {
                        if !a.le_within(b, DIAGRAM_TOL) {
                            violations.push(format!("{}: {} > {}", label, a, b));
                        }
                    }
                    _ => skipped.push(label.to_string()),
                }
            }
            cases.push(DiagramCase {
                point: x.clone(),
                direction: u.clone(),
                dini_hadamard: fd,
                radial_lower: fr,
                radial_upper: frp,
                clarke_rockafellar: fup,
                clarke: f0,
                violations,
                skipped,
            });
        }
    }
    Ok(DiagramReport { cases })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessReport {
    pub accessible: bool,
    pub gap: ExtReal,
    pub band_values: Vec<Option<ExtReal>>,
    /// Whether the band tail of `f(x+tu)` classified (otherwise the last
    /// band minimum stands in for the liminf).
    pub classified: bool,
}

/// Radial accessibility: `f(x) = liminf_{t->0+} f(x + tu)`.
pub fn radial_access_check(f: &FunctionSpec, x: &[f64], u: &[f64], sched: &LimitSchedule) -> Result<AccessReport> {
    sched.validate()?;
    let fx = base_value(f, x)?;
    if norm(u) == 0.0 {
        return Ok(AccessReport {
            accessible: true,
            gap: ExtReal::ZERO,
            band_values: vec![Some(ExtReal::Finite(fx)); sched.bands],
            classified: true,
        });
    }
    let band_values: Vec<Option<ExtReal>> = (0..sched.bands)
        .map(|k| {
            let ts = ray_ts(f, sched, k, x, u);
            reduce(ts.iter().filter_map(|&t| f.try_eval(&axpy(x, t, u))), false)
        })
        .collect();
    let c = classify(&band_values, Tolerance::SUBDERIV)?;
    let liminf = match c.value {
        Some(v) => v,
        None => band_values.iter().flatten().last().copied().unwrap_or(ExtReal::PosInf),
    };
    let gap = liminf.checked_sub(ExtReal::Finite(fx))?;
    Ok(AccessReport {
        accessible: gap.le_within(ExtReal::ZERO, ACCESS_TOL),
        gap,
        band_values,
        classified: c.value.is_some(),
    })
}
