use serde::{Deserialize, Serialize};

use crate::duality::{classify_levels, DUAL_TOL};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcmodel::FunctionSpec;
use crate::sampling::{axpy, norm};
use crate::subderiv::{base_value, radial_access_check, radial_lower, radial_upper, LimitSchedule, ACCESS_TOL};

/// Number of halvings of the `mu`-grid below `t0`.
const MU_LEVELS: i32 = 10;
/// Witnesses at the small end of the grid used for the limit.
const TAIL: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityWitness {
    pub mu: f64,
    pub value: f64,
    /// `f^r(xbar + mu u; u)`
    pub radial: Option<ExtReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `f^r+(xbar; u)`
    pub lhs: Option<ExtReal>,
    /// Witnesses `mu` with `|f(xbar + mu u) - f(xbar)| <= ACCESS_TOL`, decreasing.
    pub witnesses: Vec<StabilityWitness>,
    /// Limit of `f^r(xbar + mu u; u)` over the witness tail.
    pub rhs: Option<ExtReal>,
    pub holds: Option<bool>,
}

/// Searches `mu = t0 q^j` (and the special points on the ray) for values
/// of `f(xbar + mu u)` close to `f(xbar)` and compares the radial
/// subderivatives there with `f^r+(xbar; u)`.
pub fn radial_stability_check(
    f: &FunctionSpec,
    xbar: &[f64],
    u: &[f64],
    sched: &LimitSchedule,
) -> Result<StabilityReport> {
    let fbar = base_value(f, xbar)?;
    let access = radial_access_check(f, xbar, u, sched)?;
    if !access.accessible {
        return Err(Error::Precondition(format!(
            "f is not radially accessible at {:?} from {:?} (gap {})",
            xbar, u, access.gap
        )));
    }
    if norm(u) == 0.0 {
        return Err(Error::InvalidParameter("radial stability needs a nonzero direction".into()));
    }
    let lhs = radial_upper(f, xbar, u, sched)?.value;
    let lo = sched.t0 * sched.q.powi(MU_LEVELS);
    let mut mus: Vec<f64> = (0..=MU_LEVELS).map(|j| sched.t0 * sched.q.powi(j)).collect();
    mus.extend(f.special_ray_hits(xbar, u, lo, sched.t0, 4 * MU_LEVELS as usize));
    mus.sort_by(|a, b| b.total_cmp(a));
    mus.dedup();

    let mut witnesses = Vec::new();
    for mu in mus {
        let y = axpy(xbar, mu, u);
        let fy = match f.dom_value(&y) {
            Some(v) => v,
            None => continue,
        };
        if (fy - fbar).abs() > ACCESS_TOL {
            continue;
        }
        let inner = sched.rescaled(mu / 4.0);
        let radial = if inner.validate().is_ok() {
            radial_lower(f, &y, u, &inner)?.value
        } else {
            None
        };
        witnesses.push(StabilityWitness { mu, value: fy, radial });
    }
    if witnesses.is_empty() {
        return Err(Error::SearchFailure {
            message: format!("no mu on the grid brings f(xbar + mu u) within {} of f(xbar)", ACCESS_TOL),
            best: "none".into(),
        });
    }
    let tail: Vec<Option<ExtReal>> = witnesses.iter().rev().take(TAIL).rev().map(|w| w.radial).collect();
    let rhs = match classify_levels(&tail) {
        Ok(Some(v)) => Some(v),
        _ => tail.iter().flatten().copied().max(),
    };
    let holds = match (lhs, rhs) {
        (Some(l), Some(r)) => Some(l.le_within(r, DUAL_TOL)),
        _ => None,
    };
    Ok(StabilityReport {
        lhs,
        witnesses,
        rhs,
        holds,
    })
}
