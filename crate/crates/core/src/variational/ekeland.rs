use serde::{Deserialize, Serialize};

use super::GridDomain;
use crate::error::{Error, Result};
use crate::funcmodel::FunctionSpec;
use crate::sampling::dist;
use crate::subderiv::base_value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EkelandVerification {
    pub within_lambda: bool,
    pub not_worse: bool,
    /// `f(y) + (eps/lambda) |y - x_lambda| >= f(x_lambda)` for every grid `y`.
    pub perturbed_minimal: bool,
}

impl EkelandVerification {
    pub fn all(&self) -> bool {
        self.within_lambda && self.not_worse && self.perturbed_minimal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EkelandResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub steps: usize,
    pub verification: EkelandVerification,
}

/// Grid values of `f` on `S ∪ {x0}`, `None` outside `dom f`.
fn grid_values(f: &FunctionSpec, s: &GridDomain, x0: &[f64]) -> Result<Vec<(Vec<f64>, Option<f64>)>> {
    let mut pts = s.points(f)?;
    if !pts.iter().any(|p| dist(p, x0) == 0.0) {
        pts.push(x0.to_vec());
    }
    Ok(pts
        .into_iter()
        .map(|p| {
            let v = f.dom_value(&p);
            (p, v)
        })
        .collect())
}

/// Ekeland point on the grid: starting from `x0`, repeatedly move to the
/// grid point of least value among those that strictly improve the
/// perturbed function `f(y) + (eps/lambda) |y - x_k|`. The grid is finite,
/// so the walk stops, and at the stopping point no grid point improves.
pub fn ekeland(f: &FunctionSpec, s: &GridDomain, x0: &[f64], eps: f64, lambda: f64) -> Result<EkelandResult> {
    if !(eps > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidParameter("eps and lambda must be positive".into()));
    }
    let f0 = base_value(f, x0)?;
    let grid = grid_values(f, s, x0)?;
    let fmin = grid.iter().filter_map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    // rounding slack only; the hypothesis is f(x0) <= min f + eps
    if f0 > fmin + eps + 1e-12 * (1.0 + f0.abs()) {
        return Err(Error::Precondition(format!(
            "f({:?}) = {} exceeds the grid minimum {} by more than eps = {}",
            x0, f0, fmin, eps
        )));
    }
    let c = eps / lambda;
    let mut k = grid.iter().position(|(p, _)| dist(p, x0) == 0.0).unwrap_or(grid.len() - 1);
    let mut steps = 0;
    loop {
        let (xk, fk) = (&grid[k].0, grid[k].1.unwrap_or(f0));
        let next = grid
            .iter()
            .enumerate()
            .filter_map(|(i, (y, v))| v.map(|fy| (i, y, fy)))
            .filter(|(i, y, fy)| *i != k && fy + c * dist(y, xk) < fk)
            .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
        match next {
            Some((i, _, _)) => {
                k = i;
                steps += 1;
            }
            None => break,
        }
    }
    let point = grid[k].0.clone();
    let value = grid[k].1.unwrap_or(f0);
    let verification = verify_ekeland(f, s, x0, eps, lambda, &point)?;
    Ok(EkelandResult {
        point,
        value,
        steps,
        verification,
    })
}

/// Exhaustive grid scan of the three Ekeland conclusions at `x`.
pub fn verify_ekeland(
    f: &FunctionSpec,
    s: &GridDomain,
    x0: &[f64],
    eps: f64,
    lambda: f64,
    x: &[f64],
) -> Result<EkelandVerification> {
    let f0 = base_value(f, x0)?;
    let fx = base_value(f, x)?;
    let c = eps / lambda;
    let grid = grid_values(f, s, x0)?;
    Ok(EkelandVerification {
        within_lambda: dist(x, x0) <= lambda,
        not_worse: fx <= f0,
        perturbed_minimal: grid
            .iter()
            .all(|(y, v)| v.map_or(true, |fy| fy + c * dist(y, x) >= fx)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::parse_function;

    #[test]
    fn square_from_point_one() {
        let sq = parse_function("dim 1; piece true : x^2").unwrap();
        let s = GridDomain::interval(-1.0, 1.0, 2001);
        let r = ekeland(&sq, &s, &[0.1], 0.01, 0.5).unwrap();
        assert!(r.verification.all(), "{:?}", r);
        assert!(r.point[0].abs() <= 0.1);
    }

    #[test]
    fn minimizer_stays_put() {
        let abs = parse_function("dim 1; piece true : abs(x)").unwrap();
        let s = GridDomain::interval(-1.0, 1.0, 201);
        let r = ekeland(&abs, &s, &[0.0], 1e-9, 0.1).unwrap();
        assert_eq!(r.point, vec![0.0]);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn abs_example_and_precondition() {
        let abs = parse_function("dim 1; piece true : abs(x)").unwrap();
        let s = GridDomain::interval(-1.0, 1.0, 2001);
        let r = ekeland(&abs, &s, &[0.05], 0.05, 0.25).unwrap();
        assert!(r.verification.all());
        assert!(r.point[0].abs() <= 0.05);
        assert!(matches!(ekeland(&abs, &s, &[0.5], 0.05, 0.25), Err(Error::Precondition(_))));
    }
}
