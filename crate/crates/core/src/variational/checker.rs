//! Re-verification of witness sequences. Deliberately self-contained: it
//! uses only function evaluation, so a bug in the searchers, samplers or
//! estimators cannot also hide here.

use serde::{Deserialize, Serialize};

use super::witness::{Approach, WitnessSequence};
use crate::extreal::ExtReal;
use crate::funcmodel::FunctionSpec;

/// Slack for the link inequalities.
const LINK_TOL: f64 = 5e-3;
/// Bracket values beyond this count as unbounded.
const UNBOUNDED: f64 = 1e6;
/// Relative slack of the local subgradient inequality.
const LOCAL_TOL: f64 = 1e-3;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub problems: Vec<String>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn length(a: &[f64]) -> f64 {
    inner(a, a).sqrt()
}

fn finite_value(f: &FunctionSpec, x: &[f64]) -> Option<f64> {
    match f.evaluate(x) {
        Ok(ExtReal::Finite(v)) => Some(v),
        _ => None,
    }
}

/// Checks the sequence invariant and the conditions of every entry:
/// `t_n` strictly decreasing, `x_n = xbar + t_n v_n`, membership of the
/// approach region, `|f(x_n) - f(xbar)| <= 1/n`, `<x*_n, x_n - xbar> <= 1/n`,
/// and the subgradient inequality of `x*_n` at `x_n` along each axis at a
/// step small enough for the size of `x*_n`.
pub fn check_sequence(f: &FunctionSpec, seq: &WitnessSequence) -> CheckReport {
    let mut problems = Vec::new();
    let xbar = &seq.target;
    let fbar = match finite_value(f, xbar) {
        Some(v) => v,
        None => {
            return CheckReport {
                problems: vec!["target is not in dom f".into()],
            }
        }
    };
    let mut last_t = f64::INFINITY;
    for e in &seq.entries {
        let n = e.n as f64;
        let eps = 1.0 / n;
        let tag = format!("entry {}", e.n);
        if !(e.t < last_t) {
            problems.push(format!("{}: t = {} does not decrease", tag, e.t));
        }
        last_t = e.t;
        let d: Vec<f64> = e.x.iter().zip(xbar).map(|(a, b)| a - b).collect();
        for i in 0..d.len() {
            if (xbar[i] + e.t * e.v[i] - e.x[i]).abs() > 1e-9 * (1.0 + e.x[i].abs()) {
                problems.push(format!("{}: x != xbar + t v", tag));
                break;
            }
        }
        let inside = match seq.approach {
            Approach::Drop if length(&seq.u) > 0.0 => {
                let gap: Vec<f64> = e.v.iter().zip(&seq.u).map(|(a, b)| a - b).collect();
                e.t > 0.0 && e.t < eps && length(&gap) < eps
            }
            Approach::Drop => length(&d) > 0.0 && length(&d) < eps * eps,
            Approach::Ball => length(&d) > 0.0 && length(&d) < eps,
        };
        if !inside {
            problems.push(format!("{}: x outside the level-{} approach region", tag, e.n));
        }
        let fx = match finite_value(f, &e.x) {
            Some(v) => v,
            None => {
                problems.push(format!("{}: x not in dom f", tag));
                continue;
            }
        };
        if (fx - fbar).abs() > eps {
            problems.push(format!("{}: |f(x) - f(xbar)| = {} > 1/n", tag, (fx - fbar).abs()));
        }
        let s = match &e.xstar {
            Some(s) => s,
            None => {
                problems.push(format!("{}: no covector", tag));
                continue;
            }
        };
        if inner(s, &d) > eps {
            problems.push(format!("{}: <x*, x - xbar> = {} > 1/n", tag, inner(s, &d)));
        }
        let h = 1e-7f64.min(0.1 / (1.0 + length(s))).min(length(&d) * 1e-3);
        for i in 0..e.x.len() {
            for sign in [-1.0, 1.0] {
                let mut y = e.x.clone();
                y[i] += sign * h;
                let fy = match f.evaluate(&y) {
                    Ok(ExtReal::Finite(v)) => v,
                    _ => continue,
                };
                if fy - fx - sign * h * s[i] < -LOCAL_TOL * h * (1.0 + s[i].abs()) {
                    problems.push(format!("{}: x* fails the local subgradient inequality along axis {}", tag, i + 1));
                }
            }
        }
    }
    CheckReport { problems }
}

/// Checks `lhs <= liminf_n <x*_n, u + alpha (xbar - x_n)>` for each alpha,
/// reading the liminf off the last three entries (all beyond 1e6 counts as
/// `+inf`).
pub fn check_link(seq: &WitnessSequence, lhs: ExtReal, alphas: &[f64]) -> CheckReport {
    let mut problems = Vec::new();
    let tail: Vec<_> = seq.entries.iter().rev().take(3).collect();
    if tail.is_empty() {
        problems.push("empty sequence".into());
    }
    for &a in alphas {
        let vals: Vec<f64> = tail
            .iter()
            .filter_map(|e| {
                let s = e.xstar.as_ref()?;
                let w: Vec<f64> = (0..s.len()).map(|i| seq.u[i] + a * (seq.target[i] - e.x[i])).collect();
                Some(inner(s, &w))
            })
            .collect();
        if vals.len() < tail.len() {
            problems.push(format!("alpha {}: entries without covectors", a));
            continue;
        }
        let lim = if !vals.is_empty() && vals.iter().all(|v| *v > UNBOUNDED) {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(vals.iter().cloned().fold(f64::INFINITY, f64::min))
        };
        if !lhs.le_within(lim, LINK_TOL) {
            problems.push(format!("alpha {}: {} > {}", a, lhs, lim));
        }
    }
    CheckReport { problems }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::parse_function;
    use crate::variational::witness::{SearchStatus, WitnessEntry};

    fn entry(n: usize, x: f64, g: f64) -> WitnessEntry {
        WitnessEntry {
            n,
            x: vec![x],
            xstar: Some(vec![g]),
            fx: x.abs(),
            t: x,
            v: vec![1.0],
        }
    }

    fn seq(entries: Vec<WitnessEntry>) -> WitnessSequence {
        WitnessSequence {
            target: vec![0.0],
            u: vec![1.0],
            approach: Approach::Drop,
            radial_only: false,
            entries,
            status: SearchStatus::Complete,
        }
    }

    #[test]
    fn accepts_valid_and_rejects_broken_sequences() {
        let abs = parse_function("dim 1; piece true : abs(x)").unwrap();
        let good = seq((1..=4).map(|n| entry(n, 0.5 / n as f64, 1.0)).collect());
        assert!(check_sequence(&abs, &good).ok());
        assert!(check_link(&good, ExtReal::Finite(1.0), &[0.0]).ok());
        assert!(!check_link(&good, ExtReal::Finite(1.5), &[0.0]).ok());

        // wrong covector
        let bad = seq(vec![entry(1, 0.5, 3.0)]);
        assert!(!check_sequence(&abs, &bad).ok());
        // t does not decrease
        let bad = seq(vec![entry(1, 0.4, 1.0), entry(2, 0.4, 1.0)]);
        assert!(!check_sequence(&abs, &bad).ok());
    }
}
