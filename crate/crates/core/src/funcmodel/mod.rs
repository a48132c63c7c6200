//! Piecewise lower semicontinuous functions `R^n -> ]-inf, +inf]`, `n <= 3`.

pub mod ast;
mod parser;

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use ast::{Expr, Pred, Printer, SpecialSet};

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub region: Pred,
    pub formula: Expr,
}

/// A function given by an ordered list of `(region, formula)` pieces.
/// The first piece whose region contains the point decides the value; a
/// point matched by no piece has value `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSpec {
    pub dim: usize,
    pub pieces: Vec<Piece>,
    pub bbox: Vec<(f64, f64)>,
    pub convex: bool,
    pub lipschitz: Option<f64>,
}

pub fn parse_function(src: &str) -> Result<FunctionSpec> {
    parser::parse(src)
}

impl FunctionSpec {
    pub fn in_box(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x
                .iter()
                .zip(&self.bbox)
                .all(|(v, (lo, hi))| v.is_finite() && *lo <= *v && *v <= *hi)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<ExtReal> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!(
                "point has {} coordinates, function is {}-dimensional",
                x.len(),
                self.dim
            )));
        }
        if !self.in_box(x) {
            return Err(Error::Domain(format!("point {:?} outside bounding box", x)));
        }
        for (i, piece) in self.pieces.iter().enumerate() {
            if piece.region.eval(x) {
                let v = piece.formula.eval(x);
                return if v.is_nan() {
                    Err(Error::Specification {
                        piece: i + 1,
                        message: format!("formula is undefined at {:?}", x),
                    })
                } else if v == f64::NEG_INFINITY {
                    Err(Error::Specification {
                        piece: i + 1,
                        message: format!("formula is -inf at {:?}", x),
                    })
                } else {
                    Ok(ExtReal::from_f64(v))
                };
            }
        }
        Ok(ExtReal::PosInf)
    }

    /// Value at `x`, or `None` when `x` is outside the box or a formula is
    /// undefined there. Samplers use this to skip inadmissible points.
    pub fn try_eval(&self, x: &[f64]) -> Option<ExtReal> {
        self.evaluate(x).ok()
    }

    /// Finite value at `x`, if `x` is an admissible point of `dom f`.
    pub fn dom_value(&self, x: &[f64]) -> Option<f64> {
        self.try_eval(x).and_then(ExtReal::finite)
    }

    pub fn special_sets(&self) -> Vec<SpecialSet> {
        let mut out = Vec::new();
        for p in &self.pieces {
            p.region.collect_special(&mut out);
        }
        out
    }

    /// Special-set points (as full coordinate vectors) whose first
    /// coordinate lies in `[lo, hi]` and which are inside the box.
    pub fn special_points(&self, lo: f64, hi: f64, cap: usize) -> Vec<Vec<f64>> {
        if self.dim != 1 {
            return Vec::new();
        }
        let (blo, bhi) = self.bbox[0];
        let mut pts: Vec<f64> = self
            .special_sets()
            .iter()
            .flat_map(|s| s.points_in(lo.max(blo), hi.min(bhi), cap))
            .collect();
        pts.sort_by(|a, b| b.total_cmp(a));
        pts.dedup();
        pts.into_iter().map(|p| vec![p]).collect()
    }

    /// Parameters `t` in `[t_lo, t_hi]` at which the ray `base + t*dir`
    /// meets a special point. One-dimensional functions only.
    pub fn special_ray_hits(&self, base: &[f64], dir: &[f64], t_lo: f64, t_hi: f64, cap: usize) -> Vec<f64> {
        if self.dim != 1 || dir[0] == 0.0 || self.special_sets().is_empty() {
            return Vec::new();
        }
        let (a, b) = (base[0] + t_lo * dir[0], base[0] + t_hi * dir[0]);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.special_points(lo, hi, cap)
            .into_iter()
            .map(|p| (p[0] - base[0]) / dir[0])
            .filter(|t| *t >= t_lo && *t <= t_hi && *t > 0.0)
            .collect()
    }

    /// The special set that `x` belongs to, if any (1D only).
    pub fn special_containing(&self, x: &[f64]) -> Option<SpecialSet> {
        if self.dim != 1 {
            return None;
        }
        self.special_sets().into_iter().find(|s| s.contains(x[0]))
    }

    /// Canonical DSL text; parsing it yields an identical spec.
    pub fn pretty_print(&self) -> String {
        let pr = Printer { dim: self.dim };
        let mut s = format!("dim {};\n", self.dim);
        let b: Vec<String> = self
            .bbox
            .iter()
            .map(|(lo, hi)| format!("{:?} {:?}", lo, hi))
            .collect();
        s.push_str(&format!("box {};\n", b.join(" ")));
        if self.convex {
            s.push_str("convex;\n");
        }
        if let Some(l) = self.lipschitz {
            s.push_str(&format!("lipschitz {:?};\n", l));
        }
        for p in &self.pieces {
            s.push_str(&format!("piece {} : {};\n", pr.pred(&p.region), pr.expr(&p.formula)));
        }
        s
    }

    /// Grid points whose value drops persistently in the limit along some
    /// axis, i.e. where sampled `liminf f(y)` falls below `f(x) - tol`.
    pub fn lsc_spot_check(&self, grid: &[Vec<f64>], step: f64, tol: f64) -> Vec<Vec<f64>> {
        const DEPTH: i32 = 40;
        const INNER: i32 = 5;
        let mut violations = Vec::new();
        for x in grid {
            let fx = match self.try_eval(x) {
                Some(v) => v,
                None => continue,
            };
            let threshold = fx.checked_add(ExtReal::Finite(-tol)).unwrap_or(fx);
            let mut bad = false;
            'axes: for axis in 0..self.dim {
                for sign in [-1.0, 1.0] {
                    // the innermost samples decide; an isolated dip at a
                    // coarser distance is not a failure of lsc
                    let inner_max = ((DEPTH - INNER + 1)..=DEPTH)
                        .filter_map(|j| {
                            let mut y = x.clone();
                            y[axis] += sign * step * 2f64.powi(-j);
                            if y[axis] == x[axis] {
                                None
                            } else {
                                self.try_eval(&y)
                            }
                        })
                        .max();
                    if let Some(m) = inner_max {
                        if m < threshold {
                            bad = true;
                            break 'axes;
                        }
                    }
                }
            }
            if bad {
                violations.push(x.clone());
            }
        }
        violations
    }
}

/// Uniform grid over the bounding box (per-axis `n` points, endpoints included).
pub fn box_grid(bbox: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = bbox
        .iter()
        .map(|(lo, hi)| {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64)
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}
