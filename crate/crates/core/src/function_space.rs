//! Piecewise functions on the real line, the sup metric, and the weighted
//! `L^b` metric `d(f,g) = int |f(t) - g(t)|^b w(t) dt` with its exponential
//! similarity `e^{-d}`.
//!
//! Two kinds share one type. Piecewise-constant functions are what the
//! counterexample needs (indicator combinations); piecewise-linear functions
//! are continuous and vanish at both ends, which is what the weighted metric
//! requires. Both are zero outside their breakpoint range.
//!
//! On every interval of the merged breakpoint partition the difference of
//! two functions is affine, so its modulus is convex there. That gives the
//! sup metric exactly from segment end limits and lets the `L^b` integrand
//! be split at the minimum of `|f - g|` so no piece has an interior kink.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::SymMatrix;
use crate::quadrature::{integrate, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Constant,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionJson", into = "FunctionJson")]
pub struct PiecewiseFunction {
    kind: FunctionKind,
    breakpoints: Vec<f64>,
    values: Vec<Complex64>,
}

impl PiecewiseFunction {
    /// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`; zero outside
    /// `[breakpoints[0], breakpoints[last]]`.
    pub fn constant(breakpoints: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidFunction(format!(
                "constant kind needs {} segment values, got {}",
                breakpoints.len() - 1,
                values.len()
            )));
        }
        check_values(&values)?;
        Ok(Self {
            kind: FunctionKind::Constant,
            breakpoints,
            values,
        })
    }

    /// Node values with linear interpolation. The first and last node must
    /// be zero so the function is continuous on the whole line.
    pub fn linear(breakpoints: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if values.len() != breakpoints.len() {
            return Err(Error::InvalidFunction(format!(
                "linear kind needs {} node values, got {}",
                breakpoints.len(),
                values.len()
            )));
        }
        check_values(&values)?;
        let zero = Complex64::new(0.0, 0.0);
        if values[0] != zero || *values.last().unwrap() != zero {
            return Err(Error::InvalidFunction(
                "linear kind must start and end at 0 to stay continuous".into(),
            ));
        }
        Ok(Self {
            kind: FunctionKind::Linear,
            breakpoints,
            values,
        })
    }

    pub fn linear_real(breakpoints: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::linear(
            breakpoints,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Piecewise-constant function equal to `value` on each `[lo, hi]` and 0
    /// elsewhere. Intervals must be disjoint.
    pub fn from_intervals(intervals: &[(f64, f64, f64)]) -> Result<Self> {
        let mut sorted = intervals.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for &(lo, hi, v) in &sorted {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidFunction(format!(
                    "empty interval [{lo}, {hi}]"
                )));
            }
            match breakpoints.last() {
                Some(&last) if lo < last => {
                    return Err(Error::InvalidFunction("intervals overlap".into()))
                }
                Some(&last) if lo == last => {}
                Some(_) => {
                    values.push(Complex64::new(0.0, 0.0));
                    breakpoints.push(lo);
                }
                None => breakpoints.push(lo),
            }
            values.push(Complex64::new(v, 0.0));
            breakpoints.push(hi);
        }
        Self::constant(breakpoints, values)
    }

    /// The zero function (linear kind on `[0, 1]`).
    pub fn zero() -> Self {
        Self {
            kind: FunctionKind::Linear,
            breakpoints: vec![0.0, 1.0],
            values: vec![Complex64::new(0.0, 0.0); 2],
        }
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_continuous(&self) -> bool {
        self.kind == FunctionKind::Linear
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// `max |f(s)|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Point value. Constant segments are closed on the left; the last
    /// breakpoint belongs to the last segment.
    pub fn eval(&self, s: f64) -> Complex64 {
        let (lo, hi) = self.support();
        if s < lo || s > hi || s.is_nan() {
            return Complex64::new(0.0, 0.0);
        }
        let bp = &self.breakpoints;
        // index of the segment [bp[i], bp[i+1]] containing s
        let i = match bp.partition_point(|&b| b <= s) {
            0 => 0,
            k if k >= bp.len() => bp.len() - 2,
            k => k - 1,
        };
        match self.kind {
            FunctionKind::Constant => self.values[i],
            FunctionKind::Linear => {
                let (l, r) = (bp[i], bp[i + 1]);
                let w = (s - l) / (r - l);
                self.values[i] * (1.0 - w) + self.values[i + 1] * w
            }
        }
    }

    /// Limits of the function at the two ends of `[l, r]`, taken from inside.
    /// `[l, r]` must not straddle one of this function's breakpoints.
    fn inner_limits(&self, l: f64, r: f64) -> (Complex64, Complex64) {
        match self.kind {
            FunctionKind::Constant => {
                let v = self.eval(0.5 * (l + r));
                (v, v)
            }
            FunctionKind::Linear => (self.eval(l), self.eval(r)),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            kind: self.kind,
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * t).collect(),
        }
    }
}

fn check_breakpoints(bp: &[f64]) -> Result<()> {
    if bp.len() < 2 {
        return Err(Error::InvalidFunction(
            "need at least two breakpoints".into(),
        ));
    }
    if bp.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidFunction("breakpoints must be finite".into()));
    }
    if bp.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidFunction(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_values(values: &[Complex64]) -> Result<()> {
    if values
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::InvalidFunction("values must be finite".into()));
    }
    Ok(())
}

fn merged_partition(fs: &[&PiecewiseFunction], extra: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = fs
        .iter()
        .flat_map(|f| f.breakpoints.iter().copied())
        .collect();
    let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    pts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `(l, r, h(l+), h(r-))` for `h = f - g` on each merged segment.
fn difference_segments(
    f: &PiecewiseFunction,
    g: &PiecewiseFunction,
    extra: &[f64],
) -> Vec<(f64, f64, Complex64, Complex64)> {
    merged_partition(&[f, g], extra)
        .windows(2)
        .map(|w| {
            let (fl, fr) = f.inner_limits(w[0], w[1]);
            let (gl, gr) = g.inner_limits(w[0], w[1]);
            (w[0], w[1], fl - gl, fr - gr)
        })
        .collect()
}

/// `sup_s |f(s) - g(s)|`, exact on the merged partition.
pub fn sup_metric(f: &PiecewiseFunction, g: &PiecewiseFunction) -> f64 {
    difference_segments(f, g, &[])
        .into_iter()
        .map(|(_, _, hl, hr)| hl.norm().max(hr.norm()))
        .fold(0.0, f64::max)
}

/// Pairwise sup-metric matrix.
pub fn sup_distance_matrix(fs: &[PiecewiseFunction]) -> Result<SymMatrix> {
    SymMatrix::from_upper_fn(fs.len(), |i, j| sup_metric(&fs[i], &fs[j]))
}

/// Whether `u = lambda * v` for some real `lambda`, compared on the merged
/// partition of both functions.
pub fn is_scalar_multiple(u: &PiecewiseFunction, v: &PiecewiseFunction) -> bool {
    let samples: Vec<(Complex64, Complex64)> = merged_partition(&[u, v], &[])
        .windows(2)
        .flat_map(|w| {
            let (ul, ur) = u.inner_limits(w[0], w[1]);
            let (vl, vr) = v.inner_limits(w[0], w[1]);
            [(ul, vl), (ur, vr)]
        })
        .collect();
    let scale = samples
        .iter()
        .map(|(a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max);
    let Some(&(ua, va)) = samples
        .iter()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
    else {
        return true;
    };
    if va.norm() == 0.0 {
        return samples.iter().all(|(a, _)| a.norm() == 0.0);
    }
    let lambda = ua / va;
    if lambda.im.abs() > 1e-12 * lambda.norm().max(1.0) {
        return false;
    }
    samples
        .iter()
        .all(|(a, b)| (a - b * lambda.re).norm() <= 1e-12 * scale.max(1.0))
}

/// Pointwise difference of two piecewise-constant functions.
pub fn constant_difference(
    f: &PiecewiseFunction,
    g: &PiecewiseFunction,
) -> Result<PiecewiseFunction> {
    if f.kind != FunctionKind::Constant || g.kind != FunctionKind::Constant {
        return Err(Error::InvalidFunction(
            "difference is only built for the constant kind".into(),
        ));
    }
    let segs = difference_segments(f, g, &[]);
    let mut breakpoints = vec![segs[0].0];
    let mut values = Vec::with_capacity(segs.len());
    for (_, r, h, _) in segs {
        breakpoints.push(r);
        values.push(h);
    }
    PiecewiseFunction::constant(breakpoints, values)
}

/// The five indicator combinations of the counterexample, `x1 .. x5`.
///
/// `x5` is `-1` on `[0, 1]`: with that choice the pairwise sup distances are
/// exactly the 0/1/2 pattern of the counterexample's distance matrix.
pub fn paper_functions() -> [PiecewiseFunction; 5] {
    let f = |iv: &[(f64, f64, f64)]| PiecewiseFunction::from_intervals(iv).expect("fixture");
    [
        f(&[(0.0, 1.0, 1.0)]),
        f(&[(2.0, 3.0, 1.0), (6.0, 7.0, -1.0)]),
        f(&[(2.0, 3.0, -1.0), (4.0, 5.0, 1.0)]),
        f(&[(4.0, 5.0, -1.0), (6.0, 7.0, 1.0)]),
        f(&[(0.0, 1.0, -1.0)]),
    ]
}

/// Nonnegative weight on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `e^{-(t/scale)^2}`.
    Gaussian {
        #[serde(default = "one")]
        scale: f64,
    },
    /// 1 on `[lo, hi]`, 0 elsewhere.
    Indicator { lo: f64, hi: f64 },
    /// Linear interpolation of nonnegative node values; 0 outside.
    Table {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Gaussian { scale: 1.0 }
    }
}

impl Weight {
    pub fn validate(&self) -> Result<()> {
        match self {
            Weight::Gaussian { scale } => {
                if *scale > 0.0 && scale.is_finite() {
                    Ok(())
                } else {
                    Err(param("scale", *scale, "gaussian scale must be positive"))
                }
            }
            Weight::Indicator { lo, hi } => {
                if lo < hi && lo.is_finite() && hi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidFunction(format!(
                        "indicator interval [{lo}, {hi}] is empty"
                    )))
                }
            }
            Weight::Table {
                breakpoints,
                values,
            } => {
                check_breakpoints(breakpoints)?;
                if values.len() != breakpoints.len() {
                    return Err(Error::InvalidFunction(
                        "weight table length mismatch".into(),
                    ));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::InvalidFunction(
                        "weight values must be nonnegative".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Weight::Gaussian { scale } => (-(t / scale).powi(2)).exp(),
            Weight::Indicator { lo, hi } => {
                if (*lo..=*hi).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            Weight::Table {
                breakpoints,
                values,
            } => {
                let (lo, hi) = (breakpoints[0], *breakpoints.last().unwrap());
                if t < lo || t > hi {
                    return 0.0;
                }
                let k = breakpoints
                    .partition_point(|&b| b <= t)
                    .clamp(1, breakpoints.len() - 1);
                let (l, r) = (breakpoints[k - 1], breakpoints[k]);
                let w = (t - l) / (r - l);
                values[k - 1] * (1.0 - w) + values[k] * w
            }
        }
    }

    /// Points where the weight is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Weight::Gaussian { .. } => Vec::new(),
            Weight::Indicator { lo, hi } => vec![*lo, *hi],
            Weight::Table { breakpoints, .. } => breakpoints.clone(),
        }
    }

    /// Constant value on `(l, r)`, if the weight is constant there.
    fn constant_on(&self, l: f64, r: f64) -> Option<f64> {
        match self {
            Weight::Gaussian { .. } => None,
            Weight::Indicator { lo, hi } => {
                if l >= *lo && r <= *hi {
                    Some(1.0)
                } else if r <= *lo || l >= *hi {
                    Some(0.0)
                } else {
                    None
                }
            }
            Weight::Table { breakpoints, .. } => {
                let (lo, hi) = (breakpoints[0], *breakpoints.last().unwrap());
                if r <= lo || l >= hi {
                    return Some(0.0);
                }
                let (a, b) = (self.eval(l), self.eval(r));
                (a == b && self.eval(0.5 * (l + r)) == a).then_some(a)
            }
        }
    }

    /// Continuous, positive away from a null set.
    pub fn is_continuous_positive(&self) -> bool {
        matches!(self, Weight::Gaussian { .. })
    }
}

/// Weighted `L^b` metric on piecewise functions.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLb {
    pub b: f64,
    pub weight: Weight,
    pub quad: QuadratureConfig,
    /// Accept piecewise-constant functions (outside the continuous setting).
    pub allow_discontinuous: bool,
    /// Use closed forms where `|f-g|` is affine and the weight is constant.
    pub closed_form: bool,
}

impl WeightedLb {
    pub fn new(b: f64, weight: Weight) -> Result<Self> {
        Self::with_quadrature(b, weight, QuadratureConfig::default())
    }

    pub fn with_quadrature(b: f64, weight: Weight, quad: QuadratureConfig) -> Result<Self> {
        if !(b > 0.0 && b <= 1.0) {
            return Err(param("b", b, "must lie in (0, 1]"));
        }
        weight.validate()?;
        Ok(Self {
            b,
            weight,
            quad,
            allow_discontinuous: false,
            closed_form: true,
        })
    }

    /// `int |f(t) - g(t)|^b w(t) dt`.
    pub fn distance(&self, f: &PiecewiseFunction, g: &PiecewiseFunction) -> Result<f64> {
        if !self.allow_discontinuous && !(f.is_continuous() && g.is_continuous()) {
            return Err(Error::InvalidFunction(
                "weighted L^b metric takes continuous (linear kind) functions; \
                 set allow_discontinuous to override"
                    .into(),
            ));
        }
        if f == g {
            return Ok(0.0);
        }
        let segments = difference_segments(f, g, &self.weight.breakpoints());
        let (lo, hi) = (segments[0].0, segments.last().unwrap().1);
        let total = hi - lo;
        let mut sum = 0.0;
        for (l, r, hl, hr) in segments {
            let tol = self.quad.abs_tol * (r - l) / total;
            sum += self.segment_integral(l, r, hl, hr, tol)?;
        }
        Ok(sum)
    }

    /// `e^{-d(f,g)}`.
    pub fn similarity(&self, f: &PiecewiseFunction, g: &PiecewiseFunction) -> Result<f64> {
        Ok((-self.distance(f, g)?).exp())
    }

    pub fn distance_matrix(&self, fs: &[PiecewiseFunction]) -> Result<SymMatrix> {
        SymMatrix::try_from_upper_fn(fs.len(), |i, j| self.distance(&fs[i], &fs[j]))
    }

    fn segment_integral(
        &self,
        l: f64,
        r: f64,
        hl: Complex64,
        hr: Complex64,
        tol: f64,
    ) -> Result<f64> {
        let slope = hr - hl;
        let scale = hl.norm().max(hr.norm());
        if scale == 0.0 {
            return Ok(0.0);
        }
        // minimiser of |hl + tau * slope| over tau in (0, 1)
        let tau = -(slope.conj() * hl).re / slope.norm_sqr();
        if slope.norm_sqr() > 0.0 && tau > 0.0 && tau < 1.0 {
            let m = l + tau * (r - l);
            let mut hm = hl + slope * tau;
            if hm.norm() <= 1e-14 * scale {
                hm = Complex64::new(0.0, 0.0);
            }
            let w = tau;
            return Ok(
                self.piece(l, m, hl, hm, tol * w)? + self.piece(m, r, hm, hr, tol * (1.0 - w))?
            );
        }
        self.piece(l, r, hl, hr, tol)
    }

    /// Integral over a piece on which `|h|` is monotone.
    fn piece(&self, l: f64, r: f64, hl: Complex64, hr: Complex64, tol: f64) -> Result<f64> {
        let b = self.b;
        let len = r - l;
        if len <= 0.0 {
            return Ok(0.0);
        }
        let (al, ar) = (hl.norm(), hr.norm());
        if al == 0.0 && ar == 0.0 {
            return Ok(0.0);
        }
        let real = hl.im == 0.0 && hr.im == 0.0;
        if self.closed_form && real {
            if let Some(w) = self.weight.constant_on(l, r) {
                return Ok(w * len * mean_power(al, ar, b));
            }
        }
        let cfg = QuadratureConfig {
            abs_tol: tol.max(f64::MIN_POSITIVE),
            ..self.quad
        };
        if al == 0.0 || ar == 0.0 {
            // |h(anchor + x)| = c x; x = len * u^m with m = 1/(1+b) makes the
            // integrand c^b len^{1+b} m w(anchor + x)
            let (anchor, dir, c) = if al == 0.0 {
                (l, 1.0, ar / len)
            } else {
                (r, -1.0, al / len)
            };
            let m = 1.0 / (1.0 + b);
            let factor = c.powf(b) * len.powf(1.0 + b) * m;
            let weight = &self.weight;
            let integral = integrate(
                |u| weight.eval(anchor + dir * len * u.powf(m)),
                0.0,
                1.0,
                &QuadratureConfig {
                    abs_tol: cfg.abs_tol / factor.max(1e-300),
                    ..cfg
                },
            )?;
            return Ok(factor * integral.value);
        }
        let slope = (hr - hl) / len;
        let weight = &self.weight;
        let integral = integrate(
            |s| (hl + slope * (s - l)).norm().powf(b) * weight.eval(s),
            l,
            r,
            &cfg,
        )?;
        Ok(integral.value)
    }
}

/// Mean of `x^b` over a linear ramp from `p` to `q`.
fn mean_power(p: f64, q: f64, b: f64) -> f64 {
    let hi = p.max(q);
    if (q - p).abs() <= 1e-8 * hi {
        return (0.5 * (p + q)).powf(b);
    }
    (q.powf(b + 1.0) - p.powf(b + 1.0)) / ((b + 1.0) * (q - p))
}

pub fn weighted_lb_metric(
    f: &PiecewiseFunction,
    g: &PiecewiseFunction,
    b: f64,
    w: &Weight,
    quad: &QuadratureConfig,
) -> Result<f64> {
    WeightedLb::with_quadrature(b, w.clone(), *quad)?.distance(f, g)
}

pub fn exp_similarity_fn(
    f: &PiecewiseFunction,
    g: &PiecewiseFunction,
    b: f64,
    w: &Weight,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok((-weighted_lb_metric(f, g, b, w, quad)?).exp())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FunctionJson {
    kind: FunctionKind,
    breakpoints: Vec<f64>,
    values: Vec<ComplexJson>,
}

impl TryFrom<FunctionJson> for PiecewiseFunction {
    type Error = Error;

    fn try_from(j: FunctionJson) -> Result<Self> {
        let values = j
            .values
            .into_iter()
            .map(|v| match v {
                ComplexJson::Real(x) => Complex64::new(x, 0.0),
                ComplexJson::Pair([re, im]) => Complex64::new(re, im),
            })
            .collect();
        match j.kind {
            FunctionKind::Constant => PiecewiseFunction::constant(j.breakpoints, values),
            FunctionKind::Linear => PiecewiseFunction::linear(j.breakpoints, values),
        }
    }
}

impl From<PiecewiseFunction> for FunctionJson {
    fn from(f: PiecewiseFunction) -> Self {
        let values = f
            .values
            .iter()
            .map(|z| {
                if z.im == 0.0 {
                    ComplexJson::Real(z.re)
                } else {
                    ComplexJson::Pair([z.re, z.im])
                }
            })
            .collect();
        FunctionJson {
            kind: f.kind,
            breakpoints: f.breakpoints,
            values,
        }
    }
}
