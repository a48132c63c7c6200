use serde::{Deserialize, Serialize};

use crate::duality::{classify_levels, DUAL_TOL};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcmodel::FunctionSpec;
use crate::sampling::{axpy, ball_grid, ball_points, dist, dot, norm, sub};
use crate::subderiv::{base_value, radial_access_check, radial_lower, radial_upper, LimitSchedule, SPECIAL_CAP};
use crate::subdiff::{subgradients_at, FD_STEP};

/// Candidates at level `n` have `t >= eps_n * 2^-(5n + 7)`; the window
/// widens with `n` so that later levels keep room below earlier picks.
fn window(n: usize, eps: f64) -> f64 {
    eps * 0.5f64.powi(5 * n as i32 + 7)
}

/// How the points of a sequence approach the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    /// `x_n` in the drop `D(xbar, u, 1/n)`; for `u = 0` the ball of radius `1/n^2`.
    Drop,
    /// `x_n` in the ball `B(xbar, 1/n)`, no direction constraint.
    Ball,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub n: usize,
    pub x: Vec<f64>,
    pub xstar: Option<Vec<f64>>,
    pub fx: f64,
    pub t: f64,
    /// `x = xbar + t v`
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum SearchStatus {
    Complete,
    Failed { level: usize, reason: String, candidates_tried: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSequence {
    pub target: Vec<f64>,
    pub u: Vec<f64>,
    pub approach: Approach,
    /// Only points on the ray `xbar + t u` were searched.
    pub radial_only: bool,
    pub entries: Vec<WitnessEntry>,
    pub status: SearchStatus,
}

impl WitnessSequence {
    pub fn complete(&self) -> bool {
        self.status == SearchStatus::Complete
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub radial_only: bool,
    /// Refuse to search when `f` is not radially accessible at the target.
    pub require_access: bool,
    pub t_samples: usize,
    pub dir_samples: usize,
    pub seed: u64,
    pub schedule: LimitSchedule,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            radial_only: false,
            require_access: true,
            t_samples: 12,
            dir_samples: 16,
            seed: 0,
            schedule: LimitSchedule::default(),
        }
    }
}

struct Candidate {
    x: Vec<f64>,
    t: f64,
    v: Vec<f64>,
}

fn candidate(xbar: &[f64], x: Vec<f64>, t: f64) -> Candidate {
    let v = sub(&x, xbar).iter().map(|d| d / t).collect();
    Candidate { x, t, v }
}

/// Level-`n` candidates, special points first, then by decreasing `t`.
fn candidates(f: &FunctionSpec, xbar: &[f64], u: &[f64], approach: &Approach, n: usize, opts: &SearchOptions) -> Vec<Candidate> {
    let eps = 1.0 / n as f64;
    let nu = norm(u);
    let mut specials: Vec<Candidate> = Vec::new();
    let mut others: Vec<Candidate> = Vec::new();
    // t of a point, given how it approaches the target
    let t_of = |x: &[f64]| -> f64 {
        let d = sub(x, xbar);
        match approach {
            Approach::Drop if nu > 0.0 => dot(&d, u) / (nu * nu),
            Approach::Drop => norm(&d).sqrt(),
            Approach::Ball => norm(&d),
        }
    };
    let inside = |x: &[f64]| -> bool {
        let d = sub(x, xbar);
        match approach {
            Approach::Drop if nu > 0.0 => {
                let t = dot(&d, u) / (nu * nu);
                t > 0.0 && t < eps && norm(&sub(&d.iter().map(|di| di / t).collect::<Vec<_>>(), u)) < eps
            }
            Approach::Drop => norm(&d) > 0.0 && norm(&d) < eps * eps,
            Approach::Ball => norm(&d) > 0.0 && norm(&d) < eps,
        }
    };
    if f.dim == 1 {
        let r = match approach {
            Approach::Drop if nu > 0.0 => eps * (nu + eps),
            Approach::Drop => eps * eps,
            Approach::Ball => eps,
        };
        for p in f.special_points(xbar[0] - r, xbar[0] + r, SPECIAL_CAP) {
            if inside(&p) {
                let t = t_of(&p);
                specials.push(candidate(xbar, p, t));
            }
        }
    }
    match approach {
        Approach::Drop if nu > 0.0 => {
            let dirs = if opts.radial_only {
                vec![u.to_vec()]
            } else {
                ball_grid(u, 0.9 * eps, opts.dir_samples)
            };
            for i in 0..opts.t_samples {
                let t = eps * 0.5f64.powi(i as i32 + 1);
                for d in &dirs {
                    others.push(Candidate { x: axpy(xbar, t, d), t, v: d.clone() });
                }
            }
        }
        _ => {
            let radius = match approach {
                Approach::Drop => 0.5 * eps * eps,
                Approach::Ball => 0.5 * eps,
            };
            for p in ball_points(xbar, radius, opts.t_samples * opts.dir_samples, opts.seed) {
                if inside(&p) {
                    let t = t_of(&p);
                    others.push(candidate(xbar, p, t));
                }
            }
        }
    }
    specials.sort_by(|a, b| b.t.total_cmp(&a.t));
    others.sort_by(|a, b| b.t.total_cmp(&a.t));
    specials
        .into_iter()
        .chain(others)
        .filter(|c| c.t >= window(n, eps) && f.in_box(&c.x))
        .collect()
}

/// An admissible pair at level `n`: `|f(x) - f(xbar)| <= 1/n` and
/// `<x*, x - xbar> <= 1/n`. Returns the covectors that qualify.
fn admissible(f: &FunctionSpec, xbar: &[f64], fbar: f64, c: &Candidate, n: usize) -> Option<(f64, Vec<Vec<f64>>)> {
    let tol = 1.0 / n as f64;
    let fx = f.dom_value(&c.x)?;
    if (fx - fbar).abs() > tol {
        return None;
    }
    let h = FD_STEP.min(dist(&c.x, xbar) / 1000.0);
    let (_, cs) = subgradients_at(f, &c.x, h)?;
    let d = sub(&c.x, xbar);
    let ok: Vec<Vec<f64>> = cs.into_iter().filter(|s| dot(s, &d) <= tol).collect();
    (!ok.is_empty()).then_some((fx, ok))
}

fn check_access(f: &FunctionSpec, xbar: &[f64], u: &[f64], opts: &SearchOptions) -> Result<f64> {
    let fbar = base_value(f, xbar)?;
    if opts.require_access {
        let a = radial_access_check(f, xbar, u, &opts.schedule)?;
        if !a.accessible {
            return Err(Error::Precondition(format!(
                "f is not radially accessible at {:?} from {:?} (gap {})",
                xbar, u, a.gap
            )));
        }
    }
    Ok(fbar)
}

/// Generic level-by-level search; `score` ranks admissible covectors and
/// `None` means the first admissible pair wins.
fn search(
    f: &FunctionSpec,
    xbar: &[f64],
    u: &[f64],
    levels: usize,
    approach: Approach,
    opts: &SearchOptions,
    fbar: f64,
    score: Option<&dyn Fn(&[f64], &[f64]) -> f64>,
) -> WitnessSequence {
    let mut entries: Vec<WitnessEntry> = Vec::new();
    let mut status = SearchStatus::Complete;
    for n in 1..=levels {
        let t_prev = entries.last().map_or(f64::INFINITY, |e| e.t);
        let mut tried = 0;
        let mut best: Option<(f64, WitnessEntry)> = None;
        for c in candidates(f, xbar, u, &approach, n, opts) {
            // strictly smaller, and not the previous point again up to rounding
            if c.t >= t_prev * (1.0 - 1e-9) {
                continue;
            }
            tried += 1;
            if let Some((fx, cs)) = admissible(f, xbar, fbar, &c, n) {
                for s in cs {
                    let sc = score.map_or(0.0, |g| g(&c.x, &s));
                    if best.as_ref().map_or(true, |(b, _)| sc > *b + 1e-9 * (1.0 + b.abs())) {
                        best = Some((
                            sc,
                            WitnessEntry {
                                n,
                                x: c.x.clone(),
                                xstar: Some(s),
                                fx,
                                t: c.t,
                                v: c.v.clone(),
                            },
                        ));
                    }
                }
                if score.is_none() {
                    break;
                }
            }
        }
        match best {
            Some((_, e)) => entries.push(e),
            None => {
                status = SearchStatus::Failed {
                    level: n,
                    reason: format!("no admissible subgradient pair among {} candidates", tried),
                    candidates_tried: tried,
                };
                break;
            }
        }
    }
    WitnessSequence {
        target: xbar.to_vec(),
        u: u.to_vec(),
        approach,
        radial_only: opts.radial_only,
        entries,
        status,
    }
}

/// Pairs `(x_n, x*_n)` with `x_n` in `D(xbar, u, 1/n)`, `|f(x_n) - f(xbar)| <= 1/n`
/// and `<x*_n, x_n - xbar> <= 1/n`. A level without such a pair ends the
/// search with a failure status and the partial sequence.
pub fn directional_density_search(
    f: &FunctionSpec,
    xbar: &[f64],
    u: &[f64],
    levels: usize,
    opts: &SearchOptions,
) -> Result<WitnessSequence> {
    let fbar = check_access(f, xbar, u, opts)?;
    Ok(search(f, xbar, u, levels, Approach::Drop, opts, fbar, None))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub refined: bool,
    pub sequence: WitnessSequence,
    /// `f^r(xbar; u)` (plain) or `f^r+(xbar; u)` (refined).
    pub lhs: Option<ExtReal>,
    /// `(alpha, liminf_n <x*_n, u + alpha (xbar - x_n)>)`; plain mode uses alpha = 0.
    pub per_alpha: Vec<(f64, Option<ExtReal>)>,
    pub holds: Option<bool>,
}

fn bracket(xbar: &[f64], u: &[f64], alpha: f64, x: &[f64], s: &[f64]) -> f64 {
    let w: Vec<f64> = u.iter().zip(xbar.iter().zip(x)).map(|(ui, (a, b))| ui + alpha * (a - b)).collect();
    dot(s, &w)
}

/// Plain mode: pairs with `x_n -> xbar` and `liminf <x*_n, u> >= f^r(xbar; u)`.
/// Refined mode: `x_n ->_u xbar` and, for every alpha,
/// `liminf <x*_n, u + alpha (xbar - x_n)> >= f^r+(xbar; u)`.
/// At each level the admissible pair with the largest (worst-case over
/// alpha) bracket is kept.
pub fn subgradient_link_search(
    f: &FunctionSpec,
    xbar: &[f64],
    u: &[f64],
    alpha_grid: &[f64],
    levels: usize,
    refined: bool,
    opts: &SearchOptions,
) -> Result<LinkReport> {
    let (fbar, approach, alphas, lhs) = if refined {
        let fbar = check_access(f, xbar, u, opts)?;
        let lhs = radial_upper(f, xbar, u, &opts.schedule)?.value;
        (fbar, Approach::Drop, alpha_grid.to_vec(), lhs)
    } else {
        let fbar = base_value(f, xbar)?;
        let lhs = radial_lower(f, xbar, u, &opts.schedule)?.value;
        (fbar, Approach::Ball, vec![0.0], lhs)
    };
    if alphas.is_empty() || alphas.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::InvalidParameter("alpha grid must be nonempty and nonnegative".into()));
    }
    let score = |x: &[f64], s: &[f64]| {
        alphas
            .iter()
            .map(|&a| bracket(xbar, u, a, x, s))
            .fold(f64::INFINITY, f64::min)
    };
    let sequence = search(f, xbar, u, levels, approach, opts, fbar, Some(&score));
    let per_alpha: Vec<(f64, Option<ExtReal>)> = alphas
        .iter()
        .map(|&a| {
            let vals: Vec<Option<ExtReal>> = sequence
                .entries
                .iter()
                .map(|e| e.xstar.as_ref().map(|s| ExtReal::Finite(bracket(xbar, u, a, &e.x, s))))
                .collect();
            let lim = match classify_levels(&vals) {
                Ok(Some(v)) => Some(v),
                _ => vals.iter().rev().take(3).flatten().copied().min(),
            };
            (a, lim)
        })
        .collect();
    let holds = match lhs {
        Some(l) if sequence.complete() => per_alpha
            .iter()
            .map(|(_, v)| v.map(|v| l.le_within(v, DUAL_TOL)))
            .collect::<Option<Vec<bool>>>()
            .map(|v| v.iter().all(|b| *b)),
        _ => None,
    };
    Ok(LinkReport {
        refined,
        sequence,
        lhs,
        per_alpha,
        holds,
    })
}
