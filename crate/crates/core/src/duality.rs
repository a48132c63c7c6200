//! Directional limits over drops and the checks built on them: the
//! subderivative-subdifferential duality formula, the Treiman inequality,
//! the convex radial formula, and the lower bound for the upper radial
//! subderivative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcmodel::FunctionSpec;
use crate::sampling::{axpy, ball_grid, ball_points, dist, dot, geometric, norm, sub};
use crate::subderiv::{
    base_value, clarke_rockafellar, classify, dini_hadamard, radial_access_check, radial_lower, radial_upper,
    EstimatorConfig, LimitSchedule, Tolerance, INF_THRESHOLD, SPECIAL_CAP,
};
use crate::subdiff::{special_jump, subgradients_at, support_function, FD_STEP};

pub const DUAL_TOL: f64 = 5e-3;
/// Tail tolerance for limits over drop levels.
pub const LEVEL_TOL: Tolerance = Tolerance { abs: DUAL_TOL, rel: 1e-3 };

/// Classifies drop-level values. Levels differ in which points they
/// sample, so a tail that stays beyond [`INF_THRESHOLD`] counts as infinite
/// even when it is not monotone.
pub fn classify_levels(levels: &[Option<ExtReal>]) -> Result<Option<ExtReal>> {
    let tail: Vec<ExtReal> = levels.iter().flatten().copied().collect();
    if tail.len() >= 3 {
        let last3 = &tail[tail.len() - 3..];
        if last3.iter().all(|v| *v > ExtReal::Finite(INF_THRESHOLD)) {
            return Ok(Some(ExtReal::PosInf));
        }
        if last3.iter().all(|v| *v < ExtReal::Finite(-INF_THRESHOLD)) {
            return Ok(Some(ExtReal::NegInf));
        }
    }
    Ok(classify(levels, LEVEL_TOL)?.value)
}

/// `{0} ∪ {2^k : k = -6..6}`
pub fn default_alpha_grid() -> Vec<f64> {
    std::iter::once(0.0).chain((-6..=6).map(|k| 2f64.powi(k))).collect()
}

/// Shrinking drops `D(x, v, eps_j)`, `eps_j = eps0 * q^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DropSchedule {
    pub eps0: f64,
    pub q: f64,
    pub levels: usize,
    pub t_samples: usize,
    pub dir_samples: usize,
    pub seed: u64,
}

impl Default for DropSchedule {
    fn default() -> Self {
        DropSchedule {
            eps0: 0.01,
            q: 0.5,
            levels: 5,
            t_samples: 8,
            dir_samples: 8,
            seed: 0,
        }
    }
}

impl DropSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParameter("drop schedule needs eps0 > 0 and q in (0,1)".into()));
        }
        if self.levels < 3 || self.t_samples < 8 || self.dir_samples < 8 {
            return Err(Error::InvalidParameter(
                "drop schedule needs at least 3 levels and 8 samples per axis".into(),
            ));
        }
        Ok(())
    }

    pub fn eps(&self) -> Vec<f64> {
        (0..self.levels).map(|j| self.eps0 * self.q.powi(j as i32)).collect()
    }

    /// Drops at `x` along `v` must fit inside the bounding box.
    pub fn check_fits(&self, f: &FunctionSpec, x: &[f64], v: &[f64]) -> Result<()> {
        let r = if norm(v) == 0.0 {
            self.eps0 * self.eps0
        } else {
            self.eps0 * (norm(v) + self.eps0)
        };
        let fits = x
            .iter()
            .zip(&f.bbox)
            .all(|(c, (lo, hi))| c - r >= *lo && c + r <= *hi);
        if fits {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "drops of size {} around {:?} leave the bounding box",
                self.eps0, x
            )))
        }
    }
}

/// Membership in the open drop `x0 + {t v' : 0 < t < eps, |v' - v| < eps}`;
/// for `v = 0` this is the open ball of radius `eps^2`.
pub fn drop_contains(x0: &[f64], v: &[f64], eps: f64, x: &[f64]) -> bool {
    let d = sub(x, x0);
    let nd = norm(&d);
    if nd == 0.0 {
        return norm(v) < eps;
    }
    if norm(v) == 0.0 {
        return nd < eps * eps;
    }
    // minimise |s d - v| over s = 1/t > 1/eps
    let s = (dot(&d, v) / (nd * nd)).max(1.0 / eps * (1.0 + 1e-12));
    let w: Vec<f64> = d.iter().zip(v).map(|(di, vi)| s * di - vi).collect();
    norm(&w) < eps
}

/// Deterministic sample of `D(x0, v, eps)`; `x0` belongs to it when `|v| < eps`.
pub fn drop_samples(f: &FunctionSpec, x0: &[f64], v: &[f64], eps: f64, drop: &DropSchedule) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = if norm(v) == 0.0 {
        ball_points(x0, 0.95 * eps * eps, drop.t_samples * drop.dir_samples, drop.seed)
    } else {
        let ts = geometric(0.95 * eps, 0.95 * eps * 2f64.powi(-7), drop.t_samples);
        let dirs = ball_grid(v, 0.9 * eps, drop.dir_samples);
        ts.iter()
            .flat_map(|&t| dirs.iter().map(move |d| axpy(x0, t, d)))
            .collect()
    };
    if f.dim == 1 {
        let r = if norm(v) == 0.0 { eps * eps } else { eps * (norm(v) + eps) };
        pts.extend(f.special_points(x0[0] - r, x0[0] + r, SPECIAL_CAP));
    }
    pts.push(x0.to_vec());
    pts.retain(|p| drop_contains(x0, v, eps, p) && f.in_box(p));
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimsupTrace {
    /// `(eps_j, max over the sampled drop)`; `None` when no sample counted.
    pub levels: Vec<(f64, Option<ExtReal>)>,
    pub value: Option<ExtReal>,
    /// Samples outside `dom f`.
    pub skipped: usize,
    /// Samples whose inner limit did not classify. When nonzero the level
    /// maxima are only lower bounds.
    #[serde(default)]
    pub unresolved: usize,
}

impl LimsupTrace {
    /// Classified value, or the last nonempty level when the tail did not settle.
    pub fn value_or_last(&self) -> Option<ExtReal> {
        self.value.or_else(|| self.levels.iter().rev().find_map(|(_, v)| *v))
    }
}

/// What a sample point contributes to a limsup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sample {
    Value(ExtReal),
    /// The point is outside `dom f` and does not count.
    Outside,
    /// The inner limit at the point did not classify.
    Unresolved,
}

impl From<Option<ExtReal>> for Sample {
    fn from(v: Option<ExtReal>) -> Sample {
        v.map_or(Sample::Unresolved, Sample::Value)
    }
}

/// Level maxima of sampled values, with the counts of points that did not
/// contribute.
fn level_max(vals: Vec<Result<Sample>>, skipped: &mut usize, unresolved: &mut usize) -> Result<Option<ExtReal>> {
    let mut best: Option<ExtReal> = None;
    for v in vals {
        match v? {
            Sample::Value(v) => best = Some(best.map_or(v, |b| b.max(v))),
            Sample::Outside => *skipped += 1,
            Sample::Unresolved => *unresolved += 1,
        }
    }
    Ok(best)
}

/// `limsup_{x ->_v x0} g(x)`; the second argument of `g` is the drop size
/// of the current level.
pub fn directional_limsup<G>(g: G, f: &FunctionSpec, x0: &[f64], v: &[f64], drop: &DropSchedule) -> Result<LimsupTrace>
where
    G: Fn(&[f64], f64) -> Result<Sample> + Sync,
{
    drop.validate()?;
    let mut levels = Vec::new();
    let (mut skipped, mut unresolved) = (0, 0);
    for eps in drop.eps() {
        let pts = drop_samples(f, x0, v, eps, drop);
        let vals: Vec<Result<Sample>> = pts.par_iter().map(|x| g(x, eps)).collect();
        levels.push((eps, level_max(vals, &mut skipped, &mut unresolved)?));
    }
    let band: Vec<Option<ExtReal>> = levels.iter().map(|(_, v)| *v).collect();
    let value = classify_levels(&band)
        .map_err(|_| Error::NoSamples(format!("every drop level at {:?} along {:?} was empty", x0, v)))?;
    Ok(LimsupTrace {
        levels,
        value,
        skipped,
        unresolved,
    })
}

/// Settings for limits taken at sample points of a drop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerConfig {
    pub estimators: EstimatorConfig,
    /// Inner scales start at `min(eps/4, |x - x0| * frac)`, or `eps/4` at `x0`.
    pub distance_fraction: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            estimators: EstimatorConfig {
                schedule: LimitSchedule {
                    bands: 12,
                    samples_per_band: 8,
                    ..LimitSchedule::default()
                },
                nbhd_samples: 8,
                dir_ball_samples: 8,
                delta_levels: 3,
                ..EstimatorConfig::default()
            },
            distance_fraction: 0.25,
        }
    }
}

impl InnerConfig {
    /// Estimator settings at `x` for a drop of size `eps` around `x0`;
    /// `None` when `x` is too close to `x0` for three bands above the floor.
    /// At a special point the scales also stay below a quarter of the gap
    /// to its neighbours; elsewhere they stay within the largest axis
    /// cross around `x` that lies in dom f.
    pub fn at(&self, f: &FunctionSpec, x0: &[f64], x: &[f64], eps: f64) -> Option<EstimatorConfig> {
        let d = dist(x, x0);
        let mut t0 = if d == 0.0 { eps / 4.0 } else { (eps / 4.0).min(d * self.distance_fraction) };
        if let Some(set) = f.special_containing(x) {
            t0 = t0.min(0.25 * set.spacing_at(x[0]));
        } else {
            t0 = dom_radius(f, x, t0);
        }
        let s = self.estimators.schedule.rescaled(t0);
        s.validate().ok()?;
        Some(self.estimators.rescaled(s))
    }

    pub fn fd_step(x0: &[f64], x: &[f64]) -> f64 {
        match dist(x, x0) {
            d if d == 0.0 => FD_STEP,
            d => FD_STEP.min(d / 1000.0),
        }
    }
}

/// Halves `r` until `x ± r e_i` all lie in dom f. Points on the edge of the
/// domain keep `r`.
fn dom_radius(f: &FunctionSpec, x: &[f64], r: f64) -> f64 {
    let inside = |r: f64| {
        (0..x.len()).all(|i| {
            [-r, r].iter().all(|&s| {
                let mut y = x.to_vec();
                y[i] += s;
                matches!(f.evaluate(&y), Ok(v) if v.is_finite())
            })
        })
    };
    (0..20).map(|k| r * 0.5f64.powi(k)).find(|&s| inside(s)).unwrap_or(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Disagree,
    /// At least one side did not classify.
    Unresolved,
}

pub fn compare(a: Option<ExtReal>, b: Option<ExtReal>, tol: f64) -> Verdict {
    match (a, b) {
        (Some(a), Some(b)) if a.close_to(b, tol) => Verdict::Agree,
        (Some(_), Some(_)) => Verdict::Disagree,
        _ => Verdict::Unresolved,
    }
}

/// [`compare`] for two limsups. A disagreement counts only when the smaller
/// side saw every inner limit; otherwise its maxima are lower bounds and the
/// comparison is unresolved.
pub fn compare_traces(a: &LimsupTrace, b: &LimsupTrace, tol: f64) -> Verdict {
    match compare(a.value, b.value, tol) {
        Verdict::Disagree => {
            let lower = if a.value < b.value { a } else { b };
            if lower.unresolved > 0 {
                Verdict::Unresolved
            } else {
                Verdict::Disagree
            }
        }
        v => v,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// radial subderivative `f^r`
    LhsFr,
    /// lower bracket `f^d`
    LhsFprimeLow,
    /// upper bracket `f^up`
    LhsFprimeHigh,
    /// support function of the sampled subdifferential
    RhsFdel,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::LhsFr,
        Quantity::LhsFprimeLow,
        Quantity::LhsFprimeHigh,
        Quantity::RhsFdel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::LhsFr => "lhs_fr",
            Quantity::LhsFprimeLow => "lhs_fprime_low",
            Quantity::LhsFprimeHigh => "lhs_fprime_high",
            Quantity::RhsFdel => "rhs_fdel",
        }
    }
}

/// `w = u + alpha (x0 - x)`
fn shifted_direction(u: &[f64], alpha: f64, x0: &[f64], x: &[f64]) -> Vec<f64> {
    u.iter().zip(x0.iter().zip(x)).map(|(ui, (a, b))| ui + alpha * (a - b)).collect()
}

/// The inner quantity at a drop point `x`.
pub fn inner_value(
    q: Quantity,
    f: &FunctionSpec,
    x0: &[f64],
    u: &[f64],
    alpha: f64,
    inner: &InnerConfig,
    x: &[f64],
    eps: f64,
) -> Result<Sample> {
    if f.dom_value(x).is_none() {
        return Ok(Sample::Outside);
    }
    let w = shifted_direction(u, alpha, x0, x);
    if q == Quantity::RhsFdel {
        if let s @ Sample::Value(_) = special_jump_value(f, x, &w) {
            return Ok(s);
        }
        return Ok(match subgradients_at(f, x, InnerConfig::fd_step(x0, x)) {
            Some((_, cs)) => Sample::Value(support_function(&cs, &w)),
            None => Sample::Unresolved,
        });
    }
    let cfg = match inner.at(f, x0, x, eps) {
        Some(c) => c,
        None => return Ok(special_jump_value(f, x, &w)),
    };
    let est = match q {
        Quantity::LhsFr => radial_lower(f, x, &w, &cfg.schedule)?,
        Quantity::LhsFprimeLow => dini_hadamard(f, x, &w, &cfg.schedule, cfg.dir_ball_samples)?,
        Quantity::LhsFprimeHigh => clarke_rockafellar(f, x, &w, &cfg)?,
        Quantity::RhsFdel => unreachable!(),
    };
    Ok(est.value.into())
}

/// Values at a special point from its jump: if every nearby value exceeds
/// `f(x)` by more than [`DUAL_TOL`], the difference quotients along `w != 0`
/// blow up and every covector is a regular subgradient, so each quantity is
/// `+inf`. Anything else is unresolved.
fn special_jump_value(f: &FunctionSpec, x: &[f64], w: &[f64]) -> Sample {
    match special_jump(f, x) {
        Some(j) if j > ExtReal::Finite(DUAL_TOL) && norm(w) > 0.0 => Sample::Value(ExtReal::PosInf),
        _ => Sample::Unresolved,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityTrace {
    pub quantity: Quantity,
    pub trace: LimsupTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub point: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub alpha: f64,
    pub quantities: Vec<QuantityTrace>,
    /// Each quantity compared with `lhs_fr`.
    pub verdicts: Vec<(Quantity, Verdict)>,
    pub verdict: Verdict,
}

impl DualityReport {
    pub fn value(&self, q: Quantity) -> Option<ExtReal> {
        self.quantities.iter().find(|t| t.quantity == q).and_then(|t| t.trace.value)
    }
}

/// Combined verdict: any disagreement wins, then any unresolved comparison.
pub fn overall(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let v: Vec<Verdict> = verdicts.into_iter().collect();
    if v.contains(&Verdict::Disagree) {
        Verdict::Disagree
    } else if v.contains(&Verdict::Unresolved) {
        Verdict::Unresolved
    } else {
        Verdict::Agree
    }
}

/// Evaluates the four directional limsups of the duality formula at `x0`.
pub fn duality_check(
    f: &FunctionSpec,
    x0: &[f64],
    u: &[f64],
    v: &[f64],
    alpha: f64,
    drop: &DropSchedule,
    inner: &InnerConfig,
) -> Result<DualityReport> {
    base_value(f, x0)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {} must be nonnegative", alpha)));
    }
    if u.len() != f.dim || v.len() != f.dim {
        return Err(Error::Domain("direction has wrong dimension".into()));
    }
    drop.check_fits(f, x0, v)?;
    let quantities = Quantity::ALL
        .iter()
        .map(|&q| {
            let trace = directional_limsup(
                |x, eps| inner_value(q, f, x0, u, alpha, inner, x, eps),
                f,
                x0,
                v,
                drop,
            )?;
            Ok(QuantityTrace { quantity: q, trace })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = &quantities[0].trace;
    let verdicts: Vec<(Quantity, Verdict)> = quantities[1..]
        .iter()
        .map(|t| (t.quantity, compare_traces(base, &t.trace, DUAL_TOL)))
        .collect();
    let verdict = overall(verdicts.iter().map(|(_, v)| *v));
    Ok(DualityReport {
        point: x0.to_vec(),
        u: u.to_vec(),
        v: v.to_vec(),
        alpha,
        quantities,
        verdicts,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreimanReport {
    pub lhs: Option<ExtReal>,
    pub rhs: Option<ExtReal>,
    /// `None` when either side did not classify.
    pub holds: Option<bool>,
    /// `(eps, classified limsup over shrinking balls)`.
    pub per_eps: Vec<(f64, LimsupTrace)>,
}

/// `f^up(x0; u) <= sup_eps limsup_{x -> x0} inf_{u' in B(u, eps)} f^d(x; u')`.
pub fn treiman_check(
    f: &FunctionSpec,
    x0: &[f64],
    u: &[f64],
    cfg: &EstimatorConfig,
    eps_grid: &[f64],
    balls: &DropSchedule,
    inner: &InnerConfig,
) -> Result<TreimanReport> {
    base_value(f, x0)?;
    balls.validate()?;
    let lhs = clarke_rockafellar(f, x0, u, cfg)?.value;
    let mut per_eps = Vec::new();
    for &e in eps_grid {
        let mut levels = Vec::new();
        let (mut skipped, mut unresolved) = (0, 0);
        for rho in balls.eps() {
            let mut pts = ball_points(x0, rho, balls.t_samples * balls.dir_samples / 4, balls.seed);
            if f.dim == 1 {
                pts.extend(f.special_points(x0[0] - rho, x0[0] + rho, SPECIAL_CAP));
            }
            let vals: Vec<Result<Sample>> = pts
                .par_iter()
                .map(|x| {
                    if f.dom_value(x).is_none() {
                        return Ok(Sample::Outside);
                    }
                    let c = if dist(x, x0) == 0.0 {
                        cfg.clone()
                    } else {
                        match inner.at(f, x0, x, 4.0 * rho) {
                            Some(c) => c,
                            None => return Ok(special_jump_value(f, x, u)),
                        }
                    };
                    let mut best: Option<ExtReal> = None;
                    for d in ball_grid(u, e, cfg.dir_ball_samples) {
                        match dini_hadamard(f, x, &d, &c.schedule, c.dir_ball_samples)?.value {
                            Some(v) => best = Some(best.map_or(v, |b| b.min(v))),
                            None => return Ok(Sample::Unresolved),
                        }
                    }
                    Ok(best.into())
                })
                .collect();
            levels.push((rho, level_max(vals, &mut skipped, &mut unresolved)?));
        }
        let band: Vec<Option<ExtReal>> = levels.iter().map(|(_, v)| *v).collect();
        let value = classify_levels(&band)?;
        per_eps.push((
            e,
            LimsupTrace {
                levels,
                value,
                skipped,
                unresolved,
            },
        ));
    }
    let best = per_eps.iter().filter(|(_, t)| t.value.is_some()).max_by(|a, b| a.1.value.cmp(&b.1.value));
    let rhs = best.and_then(|(_, t)| t.value);
    let complete = per_eps.iter().all(|(_, t)| t.unresolved == 0);
    let holds = match (lhs, rhs) {
        (Some(l), Some(r)) if l.le_within(r, DUAL_TOL) => Some(true),
        (Some(_), Some(_)) if complete => Some(false),
        _ => None,
    };
    Ok(TreimanReport { lhs, rhs, holds, per_eps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaTrace {
    pub alpha: f64,
    pub trace: LimsupTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaReport {
    pub lhs: Option<ExtReal>,
    /// Minimum over the alpha grid (unsettled alphas contribute their last level).
    pub rhs: Option<ExtReal>,
    pub per_alpha: Vec<AlphaTrace>,
    pub holds: Option<bool>,
    /// Per-alpha values are nonincreasing in alpha within the tolerance.
    pub nonincreasing: bool,
}

fn min_over_alpha(per_alpha: &[AlphaTrace]) -> Option<ExtReal> {
    per_alpha.iter().filter_map(|a| a.trace.value_or_last()).min()
}

fn nonincreasing(per_alpha: &[AlphaTrace]) -> bool {
    let vals: Vec<ExtReal> = per_alpha.iter().filter_map(|a| a.trace.value_or_last()).collect();
    vals.windows(2).all(|w| w[1].le_within(w[0], DUAL_TOL))
}

/// For convex `f`: `f^r(x0; u) = inf_alpha limsup_{x -> x0} f^r(x; u + alpha (x0 - x))`.
pub fn convex_radial_formula(
    f: &FunctionSpec,
    x0: &[f64],
    u: &[f64],
    alpha_grid: &[f64],
    drop: &DropSchedule,
    sched: &LimitSchedule,
    inner: &InnerConfig,
) -> Result<FormulaReport> {
    if !f.convex {
        return Err(Error::Precondition("the convex radial formula needs a function flagged convex".into()));
    }
    base_value(f, x0)?;
    let zero = vec![0.0; f.dim];
    drop.check_fits(f, x0, &zero)?;
    let lhs = radial_lower(f, x0, u, sched)?.value;
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_by(f64::total_cmp);
    let per_alpha = alphas
        .iter()
        .map(|&alpha| {
            let trace = directional_limsup(
                |x, eps| inner_value(Quantity::LhsFr, f, x0, u, alpha, inner, x, eps),
                f,
                x0,
                &zero,
                drop,
            )?;
            Ok(AlphaTrace { alpha, trace })
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs = min_over_alpha(&per_alpha);
    let holds = match (lhs, rhs) {
        (Some(l), Some(r)) => Some(l.close_to(r, DUAL_TOL)),
        _ => None,
    };
    Ok(FormulaReport {
        lhs,
        rhs,
        nonincreasing: nonincreasing(&per_alpha),
        per_alpha,
        holds,
    })
}

/// Under radial accessibility: `f^r+(x0; u) <= inf_alpha limsup_{x ->_u x0} f^del(x; u + alpha (x0 - x))`.
pub fn lower_bound_check(
    f: &FunctionSpec,
    x0: &[f64],
    u: &[f64],
    alpha_grid: &[f64],
    drop: &DropSchedule,
    sched: &LimitSchedule,
    inner: &InnerConfig,
) -> Result<FormulaReport> {
    base_value(f, x0)?;
    let access = radial_access_check(f, x0, u, sched)?;
    if !access.accessible {
        return Err(Error::Precondition(format!(
            "f is not radially accessible at {:?} from {:?} (gap {})",
            x0, u, access.gap
        )));
    }
    drop.check_fits(f, x0, u)?;
    let lhs = radial_upper(f, x0, u, sched)?.value;
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_by(f64::total_cmp);
    let per_alpha = alphas
        .iter()
        .map(|&alpha| {
            let trace = directional_limsup(
                |x, eps| inner_value(Quantity::RhsFdel, f, x0, u, alpha, inner, x, eps),
                f,
                x0,
                u,
                drop,
            )?;
            Ok(AlphaTrace { alpha, trace })
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs = min_over_alpha(&per_alpha);
    let holds = match (lhs, rhs) {
        (Some(l), Some(r)) => Some(l.le_within(r, DUAL_TOL)),
        _ => None,
    };
    Ok(FormulaReport {
        lhs,
        rhs,
        nonincreasing: nonincreasing(&per_alpha),
        per_alpha,
        holds,
    })
}
