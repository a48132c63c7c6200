use serde::{Deserialize, Serialize};

use super::MVI_TOL;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcmodel::FunctionSpec;
use crate::sampling::sub;
use crate::subderiv::{base_value, radial_lower, LimitSchedule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MviResult {
    pub t0: f64,
    pub x0: Vec<f64>,
    pub f_x0: f64,
    /// `f^r(x0; xbar - x)`
    pub radial: ExtReal,
}

/// First grid point `x0 = x + t0 (xbar - x)`, `t0 in [0, 1)`, with
/// `f(x0) <= f(x) + t0 lambda` and `f^r(x0; xbar - x) >= lambda`, both
/// within [`MVI_TOL`]. Special points on the segment are scanned too, and
/// where the value condition stops holding between two scanned points the
/// boundary is located by bisection and tried as well.
pub fn mean_value_point(
    f: &FunctionSpec,
    x: &[f64],
    xbar: &[f64],
    lambda: f64,
    resolution: usize,
    sched: &LimitSchedule,
) -> Result<MviResult> {
    let fx = base_value(f, x)?;
    let fbar = f.evaluate(xbar)?;
    if !ExtReal::Finite(lambda + fx).le_within(fbar, MVI_TOL) {
        return Err(Error::Precondition(format!(
            "lambda = {} exceeds f(xbar) - f(x) = {}",
            lambda,
            fbar.checked_sub(ExtReal::Finite(fx))?
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter("segment resolution must be at least 2".into()));
    }
    let d = sub(xbar, x);
    let mut ts: Vec<f64> = (0..resolution).map(|i| i as f64 / resolution as f64).collect();
    if f.dim == 1 && d[0] != 0.0 {
        ts.extend(f.special_ray_hits(x, &d, 0.0, 1.0, 256).into_iter().filter(|t| *t < 1.0));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let point = |t: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, b)| a + t * b).collect() };
    let admissible = |t: f64| -> Option<(Vec<f64>, f64)> {
        let x0 = point(t);
        let f0 = f.dom_value(&x0)?;
        (f0 <= fx + t * lambda + MVI_TOL).then_some((x0, f0))
    };
    let mut best: Option<(f64, f64, ExtReal)> = None;
    let mut try_point = |t: f64, x0: Vec<f64>, f0: f64| -> Result<Option<MviResult>> {
        let r = match radial_lower(f, &x0, &d, sched)?.value {
            Some(r) => r,
            None => return Ok(None),
        };
        if ExtReal::Finite(lambda - MVI_TOL) <= r {
            return Ok(Some(MviResult { t0: t, x0, f_x0: f0, radial: r }));
        }
        if best.map_or(true, |b| r > b.2) {
            best = Some((t, f0, r));
        }
        Ok(None)
    };
    let mut last_admissible: Option<f64> = None;
    for t in ts {
        match admissible(t) {
            Some((x0, f0)) => {
                last_admissible = Some(t);
                if let Some(r) = try_point(t, x0, f0)? {
                    return Ok(r);
                }
            }
            None => {
                if let Some(lo) = last_admissible.take() {
                    let (mut lo, mut hi) = (lo, t);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if admissible(mid).is_some() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    if let Some((x0, f0)) = admissible(lo) {
                        if let Some(r) = try_point(lo, x0, f0)? {
                            return Ok(r);
                        }
                    }
                }
            }
        }
    }
    Err(Error::SearchFailure {
        message: format!("no segment grid point satisfies both inequalities for lambda = {}", lambda),
        best: match best {
            Some((t, f0, r)) => format!("t0 = {}, f(x0) = {}, f^r = {}", t, f0, r),
            None => "none".into(),
        },
    })
}
