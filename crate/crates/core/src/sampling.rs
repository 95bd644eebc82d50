//! Seeded sample generation.
//!
//! All randomness goes through ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, so a seed reproduces the same sample on every platform.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::function_space::PiecewiseFunction;
use crate::kernels::Point;

pub const DEFAULT_SAMPLE_SIZE: usize = 32;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Elements under test plus the provenance that goes into reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub elements: Vec<T>,
    pub seed: Option<u64>,
    pub domain: String,
}

impl<T> Sample<T> {
    pub fn new(elements: Vec<T>, seed: Option<u64>, domain: impl Into<String>) -> Self {
        Self {
            elements,
            seed,
            domain: domain.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coord(rng: &mut ChaCha8Rng, half_width: f64, complex: bool) -> Complex64 {
    let re = rng.gen_range(-half_width..=half_width);
    let im = if complex {
        rng.gen_range(-half_width..=half_width)
    } else {
        0.0
    };
    Complex64::new(re, im)
}

/// `n` points with coordinates uniform in `[-half_width, half_width]`
/// (real and imaginary parts independently when `complex`).
pub fn random_points(
    rng: &mut ChaCha8Rng,
    n: usize,
    dim: usize,
    complex: bool,
    half_width: f64,
) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let coords = (0..dim).map(|_| coord(rng, half_width, complex)).collect();
            Point::new(coords).expect("finite coordinates")
        })
        .collect()
}

pub fn sample_points(
    seed: u64,
    n: usize,
    dim: usize,
    complex: bool,
    half_width: f64,
) -> Sample<Point> {
    let mut r = rng(seed);
    let kind = if complex { "C" } else { "R" };
    Sample::new(
        random_points(&mut r, n, dim, complex, half_width),
        Some(seed),
        format!("{kind}^{dim}, coordinates in [-{half_width}, {half_width}]"),
    )
}

/// Points on the sphere of the given radius: uniform cube draws, normalized.
pub fn random_sphere_points(
    rng: &mut ChaCha8Rng,
    n: usize,
    dim: usize,
    complex: bool,
    radius: f64,
) -> Vec<Point> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = random_points(rng, 1, dim, complex, 1.0).pop().unwrap();
        let norm = p.norm();
        if norm < 1e-3 {
            continue;
        }
        out.push(p.scaled(radius / norm));
    }
    out
}

/// Continuous piecewise-linear function with 3 to 8 nodes in `[-3, 3]`,
/// zero at both ends, interior node values uniform in `[-2, 2]`.
pub fn random_linear_function(rng: &mut ChaCha8Rng, complex: bool) -> PiecewiseFunction {
    let nodes = rng.gen_range(3..=8);
    let mut bp: Vec<f64> = (0..nodes).map(|_| rng.gen_range(-3.0..3.0)).collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    while bp.len() < 3 {
        let last = *bp.last().unwrap();
        bp.push(last + rng.gen_range(0.1..1.0));
    }
    let mut values: Vec<Complex64> = (0..bp.len()).map(|_| coord(rng, 2.0, complex)).collect();
    values[0] = Complex64::new(0.0, 0.0);
    *values.last_mut().unwrap() = Complex64::new(0.0, 0.0);
    PiecewiseFunction::linear(bp, values).expect("valid construction")
}

pub fn random_linear_functions(seed: u64, n: usize, complex: bool) -> Sample<PiecewiseFunction> {
    let mut r = rng(seed);
    Sample::new(
        (0..n)
            .map(|_| random_linear_function(&mut r, complex))
            .collect(),
        Some(seed),
        "continuous piecewise-linear functions on [-3, 3]",
    )
}

/// Tent ("ramp") functions: 0 at `c - w`, height `h` at `c`, 0 at `c + w`.
pub fn ramp_functions(seed: u64, n: usize) -> Sample<PiecewiseFunction> {
    let mut r = rng(seed);
    let fs = (0..n)
        .map(|_| {
            let c = r.gen_range(-2.0..2.0);
            let w = r.gen_range(0.25..1.5);
            let h = r.gen_range(-2.0..2.0);
            PiecewiseFunction::linear_real(vec![c - w, c, c + w], &[0.0, h, 0.0]).expect("tent")
        })
        .collect();
    Sample::new(fs, Some(seed), "tent functions centred in [-2, 2]")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_reproduce() {
        assert_eq!(
            sample_points(9, 5, 3, true, 2.0),
            sample_points(9, 5, 3, true, 2.0)
        );
        assert_ne!(
            sample_points(9, 5, 3, true, 2.0),
            sample_points(10, 5, 3, true, 2.0)
        );
        assert_eq!(
            random_linear_functions(4, 6, false),
            random_linear_functions(4, 6, false)
        );
    }

    #[test]
    fn sphere_points_have_exact_radius() {
        let mut r = rng(1);
        for p in random_sphere_points(&mut r, 20, 3, true, 0.25) {
            assert!((p.norm() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn random_functions_are_continuous() {
        let mut r = rng(2);
        for _ in 0..50 {
            let f = random_linear_function(&mut r, true);
            assert!(f.is_continuous());
            let (lo, hi) = f.support();
            assert_eq!(f.eval(lo).norm(), 0.0);
            assert_eq!(f.eval(hi).norm(), 0.0);
        }
    }
}
