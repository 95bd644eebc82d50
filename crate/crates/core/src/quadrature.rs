//! Adaptive Gauss-Legendre quadrature on dyadic subdivisions.
//!
//! Each interval is integrated with a 16-node rule and compared against the
//! sum over its two halves. The local tolerance is the global one scaled by
//! the interval's share of the total length, so accepted pieces add up to
//! the requested absolute error.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GL_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Requested absolute error on the whole integral.
    pub abs_tol: f64,
    /// Maximum dyadic refinement depth of any piece.
    pub max_depth: u32,
    /// Cap on integrand evaluations for one call.
    pub max_evals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 48,
            max_evals: 2_000_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evals: usize,
}

/// Nodes and weights of the `GL_NODES`-point rule on [-1, 1], found by
/// Newton iteration on the Legendre polynomial.
pub fn gauss_legendre_rule() -> &'static ([f64; GL_NODES], [f64; GL_NODES]) {
    static RULE: OnceLock<([f64; GL_NODES], [f64; GL_NODES])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_NODES;
        let mut nodes = [0.0; GL_NODES];
        let mut weights = [0.0; GL_NODES];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Fixed 16-node rule on `[lo, hi]`.
pub fn gauss_legendre(f: &mut impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_rule();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive integral of `f` over the finite interval `[lo, hi]`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if lo == hi {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            evals: 0,
        });
    }
    let total_len = (hi - lo).abs();
    let mut evals = GL_NODES;
    let whole = gauss_legendre(&mut f, lo, hi);
    // (lo, hi, estimate on this piece, depth)
    let mut stack = vec![(lo, hi, whole, 0u32)];
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    while let Some((a, b, coarse, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = gauss_legendre(&mut f, a, m);
        let right = gauss_legendre(&mut f, m, b);
        evals += 2 * GL_NODES;
        let fine = left + right;
        let err = (fine - coarse).abs();
        let allowed = cfg.abs_tol * ((b - a).abs() / total_len);
        if !fine.is_finite() {
            return Err(Error::QuadratureBudget {
                lo: a,
                hi: b,
                evals,
                error: f64::INFINITY,
            });
        }
        if err <= allowed || (b - a).abs() <= f64::EPSILON * m.abs().max(1.0) {
            value += fine;
            error_estimate += err;
            continue;
        }
        if depth >= cfg.max_depth || evals >= cfg.max_evals {
            return Err(Error::QuadratureBudget {
                lo: a,
                hi: b,
                evals,
                error: err,
            });
        }
        stack.push((m, b, right, depth + 1));
        stack.push((a, m, left, depth + 1));
    }
    Ok(Integral {
        value,
        error_estimate,
        evals,
    })
}
