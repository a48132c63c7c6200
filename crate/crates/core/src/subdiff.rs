//! Sampled subdifferentials: Moreau-Rockafellar membership, subgradient
//! clouds from finite differences and local certification, support
//! functions, and half-space outer approximations of the Clarke
//! subdifferential.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcmodel::ast::SPECIAL_REL_TOL;
use crate::funcmodel::{box_grid, FunctionSpec};
use crate::sampling::{ball_points, dist, dot, sub};
use crate::subderiv::{base_value, clarke_rockafellar, EstimatorConfig, SPECIAL_CAP};

pub const FD_TOL: f64 = 1e-4;
pub const FD_STEP: f64 = 1e-5;
/// Step reductions tried by [`fd_gradient`].
pub const FD_RETRIES: i32 = 10;
/// Largest relative disagreement between forward and backward differences
/// still treated as smooth.
pub const KINK_TOL: f64 = 1e-2;
/// Half-width of the covector certification grid.
pub const COVECTOR_BOUND: f64 = 10.0;
pub const COVECTOR_STEP: f64 = 0.25;
const DEDUP_TOL: f64 = 1e-12;

/// Slack of the affine-minorant test at a base value `fx`.
pub fn member_tol(fx: f64) -> f64 {
    1e-9 * (1.0 + fx.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FiniteDifferenceGradient,
    MembershipCertified,
    AnalyticCorpus,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::FiniteDifferenceGradient => "finite_difference_gradient",
            Provenance::MembershipCertified => "membership_certified",
            Provenance::AnalyticCorpus => "analytic_corpus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgradientPair {
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SubgradientCloud {
    /// Grouped by base point, in sampling order.
    pub pairs: Vec<SubgradientPair>,
    pub generating_radius: f64,
}

impl SubgradientCloud {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Covectors attached to base points within `1e-12` of `x`.
    pub fn at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.pairs
            .iter()
            .filter(|p| dist(&p.x, x) <= DEDUP_TOL)
            .map(|p| p.xstar.clone())
            .collect()
    }

    /// Distinct base points in order of first appearance.
    pub fn base_points(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for p in &self.pairs {
            if !out.iter().any(|q| dist(q, &p.x) <= DEDUP_TOL) {
                out.push(p.x.clone());
            }
        }
        out
    }

    fn push_dedup(&mut self, pair: SubgradientPair) {
        let dup = self
            .pairs
            .iter()
            .any(|p| dist(&p.x, &pair.x) <= DEDUP_TOL && dist(&p.xstar, &pair.xstar) <= DEDUP_TOL);
        if !dup {
            self.pairs.push(pair);
        }
    }

    /// CSV with columns `x1..xn, xstar1..xstarn, provenance`.
    pub fn to_csv(&self, dim: usize) -> String {
        let mut head: Vec<String> = (1..=dim).map(|i| format!("x{}", i)).collect();
        head.extend((1..=dim).map(|i| format!("xstar{}", i)));
        head.push("provenance".into());
        let mut s = head.join(",");
        s.push('\n');
        for p in &self.pairs {
            let row: Vec<String> = p
                .x
                .iter()
                .chain(&p.xstar)
                .map(|v| format!("{:?}", v))
                .chain(std::iter::once(p.provenance.name().to_string()))
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// `sup <x*, u>` over the covectors; `-inf` for an empty list.
pub fn support_function(covectors: &[Vec<f64>], u: &[f64]) -> ExtReal {
    covectors
        .iter()
        .map(|c| ExtReal::Finite(dot(c, u)))
        .max()
        .unwrap_or(ExtReal::NegInf)
}

/// Test points for membership at `x`: a uniform box grid, points
/// approaching `x` geometrically along each axis, and special points.
pub fn membership_grid(f: &FunctionSpec, x: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let mut pts = box_grid(&f.bbox, per_axis);
    for i in 0..f.dim {
        for s in [-1.0, 1.0] {
            for j in 0..48 {
                let mut y = x.to_vec();
                y[i] += s * 2f64.powi(-j);
                if f.in_box(&y) && y[i] != x[i] {
                    pts.push(y);
                }
            }
        }
    }
    if f.dim == 1 {
        let (lo, hi) = f.bbox[0];
        pts.extend(f.special_points(lo, hi, 256));
    }
    pts
}

/// `x* in d_MR f(x)`: `<x*, y - x> + f(x) <= f(y) + MEMBER_TOL` on every
/// admissible test point `y` (and on all special points of `f`).
pub fn mr_membership(f: &FunctionSpec, x: &[f64], xstar: &[f64], test_points: &[Vec<f64>]) -> Result<bool> {
    if test_points.is_empty() {
        return Err(Error::InvalidParameter("membership test grid is empty".into()));
    }
    let fx = base_value(f, x)?;
    let tol = member_tol(fx);
    let mut specials = Vec::new();
    if f.dim == 1 {
        let (lo, hi) = f.bbox[0];
        specials = f.special_points(lo, hi, 256);
    }
    Ok(test_points.iter().chain(&specials).all(|y| match f.try_eval(y) {
        Some(ExtReal::Finite(fy)) => dot(xstar, &sub(y, x)) + fx <= fy + tol,
        _ => true,
    }))
}

/// The covector grid `[-G, G]^n` at the given step.
pub fn covector_grid(dim: usize, bound: f64, step: f64) -> Vec<Vec<f64>> {
    let k = (bound / step).round() as i64;
    let axis: Vec<f64> = (-k..=k).map(|i| i as f64 * step).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(*a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Grid covectors (plus the finite-difference gradient, when `f` is smooth
/// at `x`) that pass [`mr_membership`] on `test_points`.
pub fn certified_covectors(f: &FunctionSpec, x: &[f64], test_points: &[Vec<f64>], step: f64) -> Result<Vec<Vec<f64>>> {
    base_value(f, x)?;
    let mut cands = covector_grid(f.dim, COVECTOR_BOUND, step);
    if let Some(g) = fd_gradient(f, x, FD_STEP) {
        cands.push(g);
    }
    let checks: Vec<Result<bool>> = cands.par_iter().map(|c| mr_membership(f, x, c, test_points)).collect();
    let mut out = Vec::new();
    for (c, ok) in cands.into_iter().zip(checks) {
        if ok? {
            out.push(c);
        }
    }
    Ok(out)
}

/// Central-difference gradient at `x` when `f` looks smooth there: every
/// stencil point is in `dom f`, the differences at `h` and `h/2` agree
/// within `FD_TOL`, and forward and backward differences agree within
/// `KINK_TOL` (both relative to `1 + |g|`). Steps down to
/// `h * 4^-FD_RETRIES` are tried when `x` sits close to a kink or to the
/// boundary of `dom f`.
pub fn fd_gradient(f: &FunctionSpec, x: &[f64], h: f64) -> Option<Vec<f64>> {
    (0..=FD_RETRIES).find_map(|k| fd_gradient_step(f, x, h * 0.25f64.powi(k)))
}

fn fd_gradient_step(f: &FunctionSpec, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let fx = f.dom_value(x)?;
    let mut g = Vec::with_capacity(f.dim);
    for i in 0..f.dim {
        let at = |s: f64| {
            let mut y = x.to_vec();
            y[i] += s;
            f.dom_value(&y)
        };
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(h / 2.0)?, at(-h / 2.0)?);
        let c1 = (p1 - m1) / (2.0 * h);
        let c2 = (p2 - m2) / h;
        let scale = 1.0 + c1.abs();
        if (c1 - c2).abs() > FD_TOL * scale {
            return None;
        }
        let (fwd, bwd) = ((p1 - fx) / h, (fx - m1) / h);
        if (fwd - bwd).abs() > KINK_TOL * scale {
            return None;
        }
        g.push(c2);
    }
    g.iter().all(|v| v.is_finite()).then_some(g)
}

/// Covectors certified at a special point `x` that is a strict local
/// minimizer on a stencil inside a quarter of the gap to the nearest
/// other special point. Candidates are `0`, the covector grid, and
/// `±S 2^-k` down to the grid bound, with `S = jump / (2 r)` (or
/// `max(G, 1/r)` when every neighbour is outside `dom f`); each must
/// satisfy the local Frechet inequality on the stencil.
/// Offsets within a quarter of the gap to the neighbouring special points
/// and the values there, with that quarter gap. `None` unless `x` is a
/// special point in `dom f`.
fn special_stencil(f: &FunctionSpec, x: &[f64]) -> Option<(f64, f64, Vec<(f64, ExtReal)>)> {
    let set = f.special_containing(x)?;
    let fx = f.dom_value(x)?;
    let r = 0.25 * set.spacing_at(x[0]);
    let stencil: Vec<(f64, ExtReal)> = [-1.0, 1.0]
        .iter()
        .flat_map(|s| (0..24).map(move |j| s * r * 2f64.powi(-j)))
        .filter(|d| d.abs() > 4.0 * SPECIAL_REL_TOL * x[0].abs())
        .filter_map(|d| f.try_eval(&[x[0] + d]).map(|v| (d, v)))
        .collect();
    (!stencil.is_empty()).then_some((fx, r, stencil))
}

/// `min f(x + d) - f(x)` over the stencil around a special point `x`.
pub fn special_jump(f: &FunctionSpec, x: &[f64]) -> Option<ExtReal> {
    let (fx, _, stencil) = special_stencil(f, x)?;
    let m = stencil.iter().map(|(_, v)| *v).min()?;
    m.checked_sub(ExtReal::Finite(fx)).ok()
}

fn special_covectors(f: &FunctionSpec, x: &[f64]) -> Option<Vec<Vec<f64>>> {
    let (fx, r, stencil) = special_stencil(f, x)?;
    if !stencil.iter().all(|(_, v)| *v > ExtReal::Finite(fx)) {
        return None;
    }
    let jump = stencil.iter().map(|(_, v)| *v).min()?;
    let s = match jump.finite() {
        Some(j) => (j - fx) / (2.0 * r),
        None => COVECTOR_BOUND.max(1.0 / r),
    };
    let tol = member_tol(fx);
    let mut cands = vec![vec![0.0]];
    cands.extend(covector_grid(1, COVECTOR_BOUND, COVECTOR_STEP));
    let mut m = s;
    while m > COVECTOR_BOUND {
        cands.push(vec![m]);
        cands.push(vec![-m]);
        m /= 2.0;
    }
    let ok: Vec<Vec<f64>> = cands
        .into_iter()
        .filter(|c| {
            stencil.iter().all(|(d, v)| match v.finite() {
                Some(fy) => c[0] * d <= fy - fx + tol,
                None => true,
            })
        })
        .collect();
    Some(ok)
}

/// Subgradients at one point, or `None` when the point is skipped.
pub fn subgradients_at(f: &FunctionSpec, x: &[f64], fd_step: f64) -> Option<(Provenance, Vec<Vec<f64>>)> {
    f.dom_value(x)?;
    if let Some(cs) = special_covectors(f, x) {
        return Some((Provenance::MembershipCertified, cs));
    }
    if f.special_containing(x).is_some() {
        return None;
    }
    fd_gradient(f, x, fd_step).map(|g| (Provenance::FiniteDifferenceGradient, vec![g]))
}

/// Sampled subdifferential over `B(center, radius) ∩ dom f`: quasirandom
/// points plus the special points in the ball.
pub fn sample_subgradients(
    f: &FunctionSpec,
    center: &[f64],
    radius: f64,
    count: usize,
    fd_step: f64,
) -> Result<SubgradientCloud> {
    sample_subgradients_seeded(f, center, radius, count, fd_step, 0)
}

pub fn sample_subgradients_seeded(
    f: &FunctionSpec,
    center: &[f64],
    radius: f64,
    count: usize,
    fd_step: f64,
    seed: u64,
) -> Result<SubgradientCloud> {
    base_value(f, center)?;
    if !(radius >= 0.0 && fd_step > 0.0) {
        return Err(Error::InvalidParameter("radius and fd_step must be positive".into()));
    }
    let mut pts = ball_points(center, radius, count, seed);
    if f.dim == 1 {
        pts.extend(f.special_points(center[0] - radius, center[0] + radius, SPECIAL_CAP));
    }
    let found: Vec<Option<(Provenance, Vec<Vec<f64>>)>> =
        pts.par_iter().map(|x| subgradients_at(f, x, fd_step)).collect();
    let mut cloud = SubgradientCloud {
        pairs: Vec::new(),
        generating_radius: radius,
    };
    for (x, hit) in pts.iter().zip(found) {
        if let Some((provenance, cs)) = hit {
            for xstar in cs {
                cloud.push_dedup(SubgradientPair {
                    x: x.clone(),
                    xstar,
                    provenance,
                });
            }
        }
    }
    Ok(cloud)
}

/// Intersection of half-spaces `{x*: <x*, u> <= f^up(x; u)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClarkePolytope {
    pub point: Vec<f64>,
    /// `(u, f^up(x; u))`; `None` bounds did not classify and are ignored.
    pub halfspaces: Vec<(Vec<f64>, Option<ExtReal>)>,
}

impl ClarkePolytope {
    pub fn contains(&self, xstar: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|(u, b)| match b {
            Some(b) => ExtReal::Finite(dot(xstar, u)).le_within(*b, tol),
            None => true,
        })
    }

    /// `[lo, hi]` in 1D from the bounds along `+1` and `-1`.
    pub fn interval(&self) -> Option<(ExtReal, ExtReal)> {
        if self.point.len() != 1 {
            return None;
        }
        let mut lo = ExtReal::NegInf;
        let mut hi = ExtReal::PosInf;
        for (u, b) in &self.halfspaces {
            if let Some(b) = b {
                if u[0] > 0.0 {
                    hi = hi.min(b.scale(1.0 / u[0]));
                } else if u[0] < 0.0 {
                    lo = lo.max(-b.scale(1.0 / -u[0]));
                }
            }
        }
        Some((lo, hi))
    }
}

pub fn clarke_polytope(f: &FunctionSpec, x: &[f64], dirs: &[Vec<f64>], cfg: &EstimatorConfig) -> Result<ClarkePolytope> {
    base_value(f, x)?;
    let halfspaces = dirs
        .iter()
        .map(|u| Ok((u.clone(), clarke_rockafellar(f, x, u, cfg)?.value)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClarkePolytope {
        point: x.to_vec(),
        halfspaces,
    })
}
