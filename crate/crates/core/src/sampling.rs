//! Deterministic sample sets: geometric scale grids, direction balls and
//! low-discrepancy neighbourhood points.

use std::f64::consts::PI;

const PRIMES: [u64; 3] = [2, 3, 5];

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton point `index` in `[0,1)^dim`. `seed` shifts the index window, so
/// distinct seeds give distinct (still deterministic) streams.
pub fn halton(index: u64, dim: usize, seed: u64) -> Vec<f64> {
    let i = index + 1 + seed.wrapping_mul(7919);
    (0..dim).map(|d| radical_inverse(i, PRIMES[d])).collect()
}

/// `n` values from `hi` down to `lo`, geometrically spaced, both included.
pub fn geometric(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![hi];
    }
    let r = (lo / hi).ln();
    (0..n)
        .map(|i| {
            if i == n - 1 {
                lo
            } else {
                hi * (r * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Unit vectors on the sphere in `dim` dimensions: `{±1}` in 1D, `n` equal
/// angles in 2D, a Fibonacci lattice of `n` points in 3D.
pub fn sphere_directions(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n.max(4))
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n.max(4) as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let n = n.max(6);
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
    }
}

/// Deterministic grid of the closed ball `B(center, radius)`: the center,
/// then rings at `radius` and `radius/2`. In 1D the rings are evenly spaced
/// points on both sides (`n` per side).
pub fn ball_grid(center: &[f64], radius: f64, n: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = vec![center.to_vec()];
    if radius <= 0.0 {
        return out;
    }
    if dim == 1 {
        let per_side = (n / 2).max(1);
        for k in 1..=per_side {
            let r = radius * k as f64 / per_side as f64;
            out.push(vec![center[0] - r]);
            out.push(vec![center[0] + r]);
        }
        return out;
    }
    for r in [radius, radius / 2.0] {
        for d in sphere_directions(dim, n) {
            out.push(center.iter().zip(&d).map(|(c, di)| c + r * di).collect());
        }
    }
    out
}

/// Low-discrepancy points in the ball `B(center, radius)`, always starting
/// with the center and the axis extremes `center ± radius e_i`.
pub fn ball_points(center: &[f64], radius: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = vec![center.to_vec()];
    if radius <= 0.0 {
        return out;
    }
    for i in 0..dim {
        for s in [-1.0, 1.0] {
            let mut p = center.to_vec();
            p[i] += s * radius;
            out.push(p);
        }
    }
    let target = n.max(out.len() + 1);
    let mut idx = 0u64;
    while out.len() < target && idx < 64 * n as u64 + 64 {
        let h = halton(idx, dim, seed);
        idx += 1;
        let v: Vec<f64> = h.iter().map(|u| 2.0 * u - 1.0).collect();
        if norm(&v) <= 1.0 {
            out.push(center.iter().zip(&v).map(|(c, vi)| c + radius * vi).collect());
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `a + s*b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
