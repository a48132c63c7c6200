//! Grid searches: Ekeland points, mean value points, radial stability, and
//! subgradient witness sequences with an independent checker.

pub mod checker;
mod ekeland;
mod mvi;
mod stability;
mod witness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::FunctionSpec;

pub use ekeland::{ekeland, verify_ekeland, EkelandResult, EkelandVerification};
pub use mvi::{mean_value_point, MviResult};
pub use stability::{radial_stability_check, StabilityReport, StabilityWitness};
pub use witness::{
    directional_density_search, subgradient_link_search, Approach, LinkReport, SearchOptions, SearchStatus, WitnessEntry,
    WitnessSequence,
};

pub const MVI_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridShape {
    Box(Vec<(f64, f64)>),
    Segment { a: Vec<f64>, b: Vec<f64> },
}

/// Finite stand-in for a closed set: a uniform grid of a box or a segment,
/// plus the special points of the function that fall inside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub shape: GridShape,
    /// Points per axis (box) or along the segment, endpoints included.
    pub resolution: usize,
}

impl GridDomain {
    pub fn interval(lo: f64, hi: f64, resolution: usize) -> GridDomain {
        GridDomain {
            shape: GridShape::Box(vec![(lo, hi)]),
            resolution,
        }
    }

    pub fn points(&self, f: &FunctionSpec) -> Result<Vec<Vec<f64>>> {
        if self.resolution < 2 {
            return Err(Error::InvalidParameter("grid resolution must be at least 2".into()));
        }
        let n = self.resolution;
        let mut pts: Vec<Vec<f64>> = match &self.shape {
            GridShape::Box(b) => {
                if b.len() != f.dim {
                    return Err(Error::DimensionMismatch {
                        declared: f.dim,
                        found: format!("grid box has {} axes", b.len()),
                    });
                }
                crate::funcmodel::box_grid(b, n)
            }
            GridShape::Segment { a, b } => {
                if a.len() != f.dim || b.len() != f.dim {
                    return Err(Error::DimensionMismatch {
                        declared: f.dim,
                        found: "segment endpoints of another dimension".into(),
                    });
                }
                (0..n)
                    .map(|i| {
                        let s = i as f64 / (n - 1) as f64;
                        a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
                    })
                    .collect()
            }
        };
        if f.dim == 1 {
            let (lo, hi) = match &self.shape {
                GridShape::Box(b) => b[0],
                GridShape::Segment { a, b } => (a[0].min(b[0]), a[0].max(b[0])),
            };
            pts.extend(f.special_points(lo, hi, 4 * n));
        }
        pts.retain(|p| f.in_box(p));
        Ok(pts)
    }
}
