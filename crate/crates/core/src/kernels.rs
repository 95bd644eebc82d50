//! Kernels and metrics on points of C^n.
//!
//! [`KernelSpec`] and [`MetricSpec`] are closed descriptor trees. They
//! evaluate lazily on pairs of [`Point`]s and serialize to a small JSON shape
//! `{"kind": ..., "params": {...}, "children": [...]}`.
//!
//! The fBm kernel `||x||^{2a} + ||y||^{2a} - ||x-y||^{2a}` has induced metric
//! `sqrt(2) * ||x-y||^a`. The `halved` flag multiplies the kernel by 1/2 (the
//! usual fBm covariance normalization), which brings the induced metric down
//! to `||x-y||^a`. Both variants are kept.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{param, Error, Result};
use crate::linalg::SymMatrix;
use crate::quadrature::{integrate, QuadratureConfig};

/// Radicands of the induced metric above this (negative) value are clamped to 0.
pub const RADICAND_SLACK: f64 = 1e-12;

/// Points must lie within this distance of the sphere for [`sphere_similarity`].
pub const SPHERE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Parse(
                "point must have at least one coordinate".into(),
            ));
        }
        if coords
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Parse("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    pub fn real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn distance(&self, other: &Point) -> Result<f64> {
        check_dims(self, other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn scaled(&self, factor: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|z| z * factor).collect(),
        }
    }
}

fn check_dims(x: &Point, y: &Point) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(())
}

fn check_open_unit(name: &'static str, a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(param(name, a, "must lie in (0, 1)"))
    }
}

fn check_positive(name: &'static str, t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(param(name, t, "must be positive and finite"))
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(param("d", d, "must be a finite nonnegative distance"))
    }
}

/// `||x||^{2a} + ||y||^{2a} - ||x-y||^{2a}`, times 1/2 when `halved`.
pub fn fbm_kernel(x: &Point, y: &Point, a: f64, halved: bool) -> Result<f64> {
    check_open_unit("a", a)?;
    let e = 2.0 * a;
    let v = x.norm().powf(e) + y.norm().powf(e) - x.distance(y)?.powf(e);
    Ok(if halved { 0.5 * v } else { v })
}

/// `sqrt(k(x,x) + k(y,y) - 2 Re k(x,y))`.
pub fn induced_metric(k: &KernelSpec, x: &Point, y: &Point) -> Result<f64> {
    let radicand = k.eval(x, x)? + k.eval(y, y)? - 2.0 * k.eval(x, y)?;
    if radicand < -RADICAND_SLACK {
        return Err(Error::NegativeRadicand { radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `e^{-t d}`.
pub fn exp_similarity(d: f64, t: f64) -> Result<f64> {
    check_distance(d)?;
    check_positive("t", t)?;
    Ok((-t * d).exp())
}

/// `1 / (1 + t d)`.
pub fn cauchy_similarity(d: f64, t: f64) -> Result<f64> {
    check_distance(d)?;
    check_positive("t", t)?;
    Ok(1.0 / (1.0 + t * d))
}

/// `|1/(1+td) - int_0^inf e^{-utd} e^{-u} du|` with the integral computed by
/// quadrature on `[0, U]`, `e^{-U} = abs_tol / 2`.
pub fn laplace_identity_check(d: f64, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    let closed = cauchy_similarity(d, t)?;
    let upper = (2.0 / quad.abs_tol).ln();
    let rate = 1.0 + t * d;
    let cfg = QuadratureConfig {
        abs_tol: 0.5 * quad.abs_tol,
        ..*quad
    };
    let integral = integrate(|u| (-u * rate).exp(), 0.0, upper, &cfg)?;
    Ok((closed - integral.value).abs())
}

/// `z^a` through `a / Gamma(1-a) * int_0^inf (1 - e^{-tz}) t^{-a-1} dt`.
///
/// On `[0, 1]` the substitution `u = t^{1-a}` turns the integrand into
/// `(1 - e^{-tz}) / t / (1-a)`, which is smooth. On `[1, inf)` the
/// substitution `v = t^{-a}` gives `(1/a) int_0^1 (1 - e^{-z v^{-1/a}}) dv`,
/// a bounded integrand on a finite interval, so no truncation is needed.
pub fn subordination_power(z: f64, a: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_open_unit("a", a)?;
    if !(z >= 0.0 && z.is_finite()) {
        return Err(param("z", z, "must be positive and finite"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let split = 1.0;
    let cfg = QuadratureConfig {
        abs_tol: 0.25 * quad.abs_tol,
        ..*quad
    };
    let p = 1.0 / (1.0 - a);
    let head = integrate(
        |u| {
            let t = u.powf(p);
            let g = if t == 0.0 { z } else { -(-t * z).exp_m1() / t };
            g / (1.0 - a)
        },
        0.0,
        split,
        &cfg,
    )
    .map_err(|e| Error::Subordination {
        split,
        source: Box::new(e),
    })?;
    let tail = integrate(
        |v| {
            if v == 0.0 {
                1.0
            } else {
                -(-z * v.powf(-1.0 / a)).exp_m1()
            }
        },
        0.0,
        1.0,
        &cfg,
    )
    .map_err(|e| Error::Subordination {
        split,
        source: Box::new(e),
    })?;
    let scale = a / libm::tgamma(1.0 - a);
    Ok(scale * (head.value + tail.value / a))
}

/// Normalized Euclidean metric `D` and its similarity `S`.
///
/// `D = ||x-y|| / (||x|| + ||y||)` off the diagonal and 0 on it. `S = 1 - D`
/// except at `x = y = 0`, where `S = 0`.
pub fn normalized_euclidean(x: &Point, y: &Point) -> Result<(f64, f64)> {
    check_dims(x, y)?;
    if x == y {
        let s = if x.is_origin() { 0.0 } else { 1.0 };
        return Ok((0.0, s));
    }
    let d = x.distance(y)? / (x.norm() + y.norm());
    Ok((d, 1.0 - d))
}

/// `d / (1 + d)`.
pub fn bounded_transform(d: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(d / (1.0 + d))
}

/// `d^a` for `a` in (0, 1].
pub fn power_transform(d: f64, a: f64) -> Result<f64> {
    check_distance(d)?;
    if !(a > 0.0 && a <= 1.0) {
        return Err(param("a", a, "must lie in (0, 1]"));
    }
    Ok(if a == 1.0 { d } else { d.powf(a) })
}

/// Radius on which `||x||^a = 1/2`.
pub fn sphere_radius(a: f64) -> f64 {
    0.5f64.powf(1.0 / a)
}

/// `1 - ||x-y||^a` for points on the sphere of radius `(1/2)^{1/a}`, i.e.
/// the fBm kernel with exponent `a` restricted to that sphere.
pub fn sphere_similarity(x: &Point, y: &Point, a: f64) -> Result<f64> {
    check_open_unit("a", a)?;
    let expected = sphere_radius(a);
    for p in [x, y] {
        let radius = p.norm();
        if (radius - expected).abs() > SPHERE_TOL {
            return Err(Error::OffSphere { radius, expected });
        }
    }
    Ok(1.0 - x.distance(y)?.powf(a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub enum MetricSpec {
    Euclidean,
    /// `||x-y||^2`. Not a metric; used for negative-type checks.
    SquaredEuclidean,
    Power {
        a: f64,
        base: Box<MetricSpec>,
    },
    Bounded {
        base: Box<MetricSpec>,
    },
    /// `1 - e^{-d}`.
    ExpComplement {
        base: Box<MetricSpec>,
    },
    NormalizedEuclidean,
}

impl MetricSpec {
    pub fn power(base: MetricSpec, a: f64) -> Result<Self> {
        let m = MetricSpec::Power {
            a,
            base: Box::new(base),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn bounded(base: MetricSpec) -> Self {
        MetricSpec::Bounded {
            base: Box::new(base),
        }
    }

    pub fn exp_complement(base: MetricSpec) -> Self {
        MetricSpec::ExpComplement {
            base: Box::new(base),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricSpec::Power { a, base } => {
                if !(*a > 0.0 && *a <= 1.0) {
                    return Err(param("a", *a, "power exponent must lie in (0, 1]"));
                }
                base.validate()
            }
            MetricSpec::Bounded { base } | MetricSpec::ExpComplement { base } => base.validate(),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        match self {
            MetricSpec::Euclidean => x.distance(y),
            MetricSpec::SquaredEuclidean => x.distance(y).map(|d| d * d),
            MetricSpec::Power { a, base } => power_transform(base.eval(x, y)?, *a),
            MetricSpec::Bounded { base } => bounded_transform(base.eval(x, y)?),
            MetricSpec::ExpComplement { base } => {
                let d = base.eval(x, y)?;
                check_distance(d)?;
                Ok(-(-d).exp_m1())
            }
            MetricSpec::NormalizedEuclidean => normalized_euclidean(x, y).map(|(d, _)| d),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::Euclidean => write!(f, "euclidean"),
            MetricSpec::SquaredEuclidean => write!(f, "squared_euclidean"),
            MetricSpec::Power { a, base } => write!(f, "power({base}, a={a})"),
            MetricSpec::Bounded { base } => write!(f, "bounded({base})"),
            MetricSpec::ExpComplement { base } => write!(f, "exp_complement({base})"),
            MetricSpec::NormalizedEuclidean => write!(f, "normalized_euclidean"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub enum KernelSpec {
    Fbm {
        a: f64,
        halved: bool,
    },
    /// `e^{-t d(x,y)}`.
    ExpOfMetric {
        metric: Box<MetricSpec>,
        t: f64,
    },
    /// `1 / (1 + t d(x,y))`.
    CauchyOfMetric {
        metric: Box<MetricSpec>,
        t: f64,
    },
    NormalizedEuclideanSimilarity,
    SphereSimilarity {
        a: f64,
    },
    Constant {
        value: f64,
    },
    Sum(Vec<KernelSpec>),
    Product(Vec<KernelSpec>),
    Scale {
        factor: f64,
        child: Box<KernelSpec>,
    },
    Exp(Box<KernelSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CombineOp {
    Sum,
    Product,
    Scale(f64),
    Exp,
}

/// Builds a composite kernel. `Scale` and `Exp` take exactly one child.
pub fn combine(op: CombineOp, children: Vec<KernelSpec>) -> Result<KernelSpec> {
    let single = |mut children: Vec<KernelSpec>| -> Result<KernelSpec> {
        if children.len() != 1 {
            return Err(Error::InvalidSpec(format!(
                "expected exactly one child, got {}",
                children.len()
            )));
        }
        Ok(children.pop().unwrap())
    };
    let spec = match op {
        CombineOp::Sum | CombineOp::Product if children.is_empty() => {
            return Err(Error::InvalidSpec(
                "sum/product needs at least one child".into(),
            ))
        }
        CombineOp::Sum => KernelSpec::Sum(children),
        CombineOp::Product => KernelSpec::Product(children),
        CombineOp::Scale(factor) => KernelSpec::Scale {
            factor,
            child: Box::new(single(children)?),
        },
        CombineOp::Exp => KernelSpec::Exp(Box::new(single(children)?)),
    };
    spec.validate()?;
    Ok(spec)
}

impl KernelSpec {
    pub fn fbm(a: f64, halved: bool) -> Result<Self> {
        check_open_unit("a", a)?;
        Ok(KernelSpec::Fbm { a, halved })
    }

    pub fn exp_of(metric: MetricSpec, t: f64) -> Result<Self> {
        let k = KernelSpec::ExpOfMetric {
            metric: Box::new(metric),
            t,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn cauchy_of(metric: MetricSpec, t: f64) -> Result<Self> {
        let k = KernelSpec::CauchyOfMetric {
            metric: Box::new(metric),
            t,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn sphere(a: f64) -> Result<Self> {
        check_open_unit("a", a)?;
        Ok(KernelSpec::SphereSimilarity { a })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Fbm { a, .. } | KernelSpec::SphereSimilarity { a } => {
                check_open_unit("a", *a)
            }
            KernelSpec::ExpOfMetric { metric, t } | KernelSpec::CauchyOfMetric { metric, t } => {
                check_positive("t", *t)?;
                metric.validate()
            }
            KernelSpec::NormalizedEuclideanSimilarity => Ok(()),
            KernelSpec::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(param("value", *value, "must be finite"))
                }
            }
            KernelSpec::Sum(children) | KernelSpec::Product(children) => {
                if children.is_empty() {
                    return Err(Error::InvalidSpec(
                        "sum/product needs at least one child".into(),
                    ));
                }
                children.iter().try_for_each(KernelSpec::validate)
            }
            KernelSpec::Scale { factor, child } => {
                check_positive("factor", *factor)?;
                child.validate()
            }
            KernelSpec::Exp(child) => child.validate(),
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        match self {
            KernelSpec::Fbm { a, halved } => fbm_kernel(x, y, *a, *halved),
            KernelSpec::ExpOfMetric { metric, t } => exp_similarity(metric.eval(x, y)?, *t),
            KernelSpec::CauchyOfMetric { metric, t } => cauchy_similarity(metric.eval(x, y)?, *t),
            KernelSpec::NormalizedEuclideanSimilarity => normalized_euclidean(x, y).map(|(_, s)| s),
            KernelSpec::SphereSimilarity { a } => sphere_similarity(x, y, *a),
            KernelSpec::Constant { value } => {
                check_dims(x, y)?;
                Ok(*value)
            }
            KernelSpec::Sum(children) => children
                .iter()
                .try_fold(0.0, |acc, k| Ok(acc + k.eval(x, y)?)),
            KernelSpec::Product(children) => children
                .iter()
                .try_fold(1.0, |acc, k| Ok(acc * k.eval(x, y)?)),
            KernelSpec::Scale { factor, child } => Ok(factor * child.eval(x, y)?),
            KernelSpec::Exp(child) => Ok(child.eval(x, y)?.exp()),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, ks: &[KernelSpec]| {
            write!(f, "{name}(")?;
            for (i, k) in ks.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{k}")?;
            }
            write!(f, ")")
        };
        match self {
            KernelSpec::Fbm { a, halved: true } => write!(f, "fbm(a={a}, halved)"),
            KernelSpec::Fbm { a, halved: false } => write!(f, "fbm(a={a})"),
            KernelSpec::ExpOfMetric { metric, t } => write!(f, "exp(-{t}*{metric})"),
            KernelSpec::CauchyOfMetric { metric, t } => write!(f, "1/(1+{t}*{metric})"),
            KernelSpec::NormalizedEuclideanSimilarity => {
                write!(f, "normalized_euclidean_similarity")
            }
            KernelSpec::SphereSimilarity { a } => write!(f, "sphere_similarity(a={a})"),
            KernelSpec::Constant { value } => write!(f, "constant({value})"),
            KernelSpec::Sum(ks) => list(f, "sum", ks),
            KernelSpec::Product(ks) => list(f, "product", ks),
            KernelSpec::Scale { factor, child } => write!(f, "{factor}*{child}"),
            KernelSpec::Exp(child) => write!(f, "exp({child})"),
        }
    }
}

/// Gram matrix `G[i][j] = k(p_i, p_j)`, upper triangle evaluated and mirrored.
pub fn gram(points: &[Point], k: &KernelSpec) -> Result<SymMatrix> {
    SymMatrix::try_from_upper_fn(points.len(), |i, j| k.eval(&points[i], &points[j]))
}

/// Pairwise metric matrix on points.
pub fn distance_matrix(points: &[Point], d: &MetricSpec) -> Result<SymMatrix> {
    SymMatrix::try_from_upper_fn(points.len(), |i, j| d.eval(&points[i], &points[j]))
}

/// Wire shape shared by kernel and metric specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<SpecJson>,
}

impl SpecJson {
    fn leaf(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            params: BTreeMap::new(),
            children: Vec::new(),
        }
    }

    fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    fn with_children(mut self, children: Vec<SpecJson>) -> Self {
        self.children = children;
        self
    }

    fn number(&self, key: &str) -> Result<f64> {
        self.params.get(key).and_then(Value::as_f64).ok_or_else(|| {
            Error::InvalidSpec(format!("{}: missing numeric param {key:?}", self.kind))
        })
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(_) => self.number(key),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.params.get(key) {
            None => Ok(false),
            Some(v) => v.as_bool().ok_or_else(|| {
                Error::InvalidSpec(format!("{}: param {key:?} must be a boolean", self.kind))
            }),
        }
    }

    fn only_child(&self) -> Result<&SpecJson> {
        match self.children.as_slice() {
            [c] => Ok(c),
            other => Err(Error::InvalidSpec(format!(
                "{}: expected exactly one child, got {}",
                self.kind,
                other.len()
            ))),
        }
    }
}

impl TryFrom<SpecJson> for MetricSpec {
    type Error = Error;

    fn try_from(s: SpecJson) -> Result<Self> {
        let m = match s.kind.as_str() {
            "euclidean" => MetricSpec::Euclidean,
            "squared_euclidean" => MetricSpec::SquaredEuclidean,
            "normalized_euclidean" => MetricSpec::NormalizedEuclidean,
            "power" => MetricSpec::Power {
                a: s.number("a")?,
                base: Box::new(base_metric(&s)?),
            },
            "bounded" => MetricSpec::Bounded {
                base: Box::new(base_metric(&s)?),
            },
            "exp_complement" => MetricSpec::ExpComplement {
                base: Box::new(base_metric(&s)?),
            },
            other => return Err(Error::InvalidSpec(format!("unknown metric kind {other:?}"))),
        };
        m.validate()?;
        Ok(m)
    }
}

/// Transforms default to a Euclidean base when no child is given.
fn base_metric(s: &SpecJson) -> Result<MetricSpec> {
    if s.children.is_empty() {
        Ok(MetricSpec::Euclidean)
    } else {
        MetricSpec::try_from(s.only_child()?.clone())
    }
}

impl From<MetricSpec> for SpecJson {
    fn from(m: MetricSpec) -> Self {
        match m {
            MetricSpec::Euclidean => SpecJson::leaf("euclidean"),
            MetricSpec::SquaredEuclidean => SpecJson::leaf("squared_euclidean"),
            MetricSpec::NormalizedEuclidean => SpecJson::leaf("normalized_euclidean"),
            MetricSpec::Power { a, base } => SpecJson::leaf("power")
                .with_param("a", a)
                .with_children(vec![(*base).into()]),
            MetricSpec::Bounded { base } => {
                SpecJson::leaf("bounded").with_children(vec![(*base).into()])
            }
            MetricSpec::ExpComplement { base } => {
                SpecJson::leaf("exp_complement").with_children(vec![(*base).into()])
            }
        }
    }
}

impl TryFrom<SpecJson> for KernelSpec {
    type Error = Error;

    fn try_from(s: SpecJson) -> Result<Self> {
        let kernel_children = |s: &SpecJson| -> Result<Vec<KernelSpec>> {
            s.children
                .iter()
                .cloned()
                .map(KernelSpec::try_from)
                .collect()
        };
        let k = match s.kind.as_str() {
            "fbm" => KernelSpec::Fbm {
                a: s.number("a")?,
                halved: s.flag("halved")?,
            },
            "exp_of_metric" => KernelSpec::ExpOfMetric {
                metric: Box::new(base_metric(&s)?),
                t: s.number_or("t", 1.0)?,
            },
            "cauchy_of_metric" => KernelSpec::CauchyOfMetric {
                metric: Box::new(base_metric(&s)?),
                t: s.number_or("t", 1.0)?,
            },
            "normalized_euclidean_similarity" => KernelSpec::NormalizedEuclideanSimilarity,
            "sphere_similarity" => KernelSpec::SphereSimilarity { a: s.number("a")? },
            "constant" => KernelSpec::Constant {
                value: s.number("value")?,
            },
            "sum" => KernelSpec::Sum(kernel_children(&s)?),
            "product" => KernelSpec::Product(kernel_children(&s)?),
            "scale" => KernelSpec::Scale {
                factor: s.number("factor")?,
                child: Box::new(KernelSpec::try_from(s.only_child()?.clone())?),
            },
            "exp" => KernelSpec::Exp(Box::new(KernelSpec::try_from(s.only_child()?.clone())?)),
            other => return Err(Error::InvalidSpec(format!("unknown kernel kind {other:?}"))),
        };
        k.validate()?;
        Ok(k)
    }
}

impl From<KernelSpec> for SpecJson {
    fn from(k: KernelSpec) -> Self {
        let kids = |ks: Vec<KernelSpec>| ks.into_iter().map(SpecJson::from).collect();
        match k {
            KernelSpec::Fbm { a, halved } => SpecJson::leaf("fbm")
                .with_param("a", a)
                .with_param("halved", halved),
            KernelSpec::ExpOfMetric { metric, t } => SpecJson::leaf("exp_of_metric")
                .with_param("t", t)
                .with_children(vec![(*metric).into()]),
            KernelSpec::CauchyOfMetric { metric, t } => SpecJson::leaf("cauchy_of_metric")
                .with_param("t", t)
                .with_children(vec![(*metric).into()]),
            KernelSpec::NormalizedEuclideanSimilarity => {
                SpecJson::leaf("normalized_euclidean_similarity")
            }
            KernelSpec::SphereSimilarity { a } => {
                SpecJson::leaf("sphere_similarity").with_param("a", a)
            }
            KernelSpec::Constant { value } => SpecJson::leaf("constant").with_param("value", value),
            KernelSpec::Sum(ks) => SpecJson::leaf("sum").with_children(kids(ks)),
            KernelSpec::Product(ks) => SpecJson::leaf("product").with_children(kids(ks)),
            KernelSpec::Scale { factor, child } => SpecJson::leaf("scale")
                .with_param("factor", factor)
                .with_children(vec![(*child).into()]),
            KernelSpec::Exp(child) => SpecJson::leaf("exp").with_children(vec![(*child).into()]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, SQRT_2};

    fn p(xs: &[f64]) -> Point {
        Point::real(xs).unwrap()
    }

    #[test]
    fn fbm_examples() {
        assert_eq!(fbm_kernel(&p(&[0.0]), &p(&[0.0]), 0.3, false).unwrap(), 0.0);
        let v = fbm_kernel(&p(&[1.0]), &p(&[-1.0]), 0.25, false).unwrap();
        assert!((v - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.585786).abs() < 1e-6);
        for a in [0.1, 0.5, 0.9] {
            assert_eq!(fbm_kernel(&p(&[1.0]), &p(&[0.0]), a, false).unwrap(), 0.0);
        }
        assert!(fbm_kernel(&p(&[1.0]), &p(&[0.0, 1.0]), 0.5, false).is_err());
        assert!(fbm_kernel(&p(&[1.0]), &p(&[0.0]), 1.0, false).is_err());
    }

    #[test]
    fn induced_metric_examples() {
        let unhalved = KernelSpec::fbm(0.5, false).unwrap();
        let halved = KernelSpec::fbm(0.5, true).unwrap();
        let x = p(&[1.0]);
        let y = p(&[0.0]);
        assert_eq!(induced_metric(&unhalved, &x, &x).unwrap(), 0.0);
        assert!((induced_metric(&unhalved, &x, &y).unwrap() - SQRT_2).abs() < 1e-15);
        assert!((induced_metric(&halved, &x, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn induced_metric_rejects_non_pd_kernel() {
        // -fbm has radicand -2|x-y|^{2a}
        let k = KernelSpec::Fbm {
            a: 0.5,
            halved: false,
        };
        let neg = KernelSpec::Product(vec![k, KernelSpec::Constant { value: -1.0 }]);
        let err = induced_metric(&neg, &p(&[1.0]), &p(&[0.0])).unwrap_err();
        assert!(matches!(err, Error::NegativeRadicand { .. }));
    }

    #[test]
    fn similarity_transforms() {
        assert_eq!(exp_similarity(0.0, 3.0).unwrap(), 1.0);
        assert!((exp_similarity(1.0, 1.0).unwrap() - 1.0 / E).abs() < 1e-16);
        assert!((exp_similarity(2.0, 0.5).unwrap() - 1.0 / E).abs() < 1e-16);
        assert!(exp_similarity(-1.0, 1.0).is_err());
        assert_eq!(cauchy_similarity(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(cauchy_similarity(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(cauchy_similarity(3.0, 1.0).unwrap(), 0.25);
        assert!(cauchy_similarity(1.0, 0.0).is_err());
    }

    #[test]
    fn metric_transforms() {
        assert_eq!(bounded_transform(0.0).unwrap(), 0.0);
        assert_eq!(bounded_transform(1.0).unwrap(), 0.5);
        assert_eq!(bounded_transform(3.0).unwrap(), 0.75);
        assert_eq!(power_transform(4.0, 0.5).unwrap(), 2.0);
        assert_eq!(power_transform(0.0, 0.5).unwrap(), 0.0);
        assert!((power_transform(8.0, 1.0 / 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(power_transform(8.0, 1.0).unwrap(), 8.0);
        assert!(power_transform(8.0, 1.5).is_err());
    }

    #[test]
    fn laplace_identity_examples() {
        let q = QuadratureConfig::default();
        for (d, t) in [(0.0, 1.0), (1.0, 1.0), (4.0, 2.0)] {
            assert!(laplace_identity_check(d, t, &q).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn subordination_examples() {
        let q = QuadratureConfig::default();
        assert!((subordination_power(1.0, 0.5, &q).unwrap() - 1.0).abs() < 1e-6);
        assert!((subordination_power(4.0, 0.5, &q).unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(subordination_power(0.0, 0.5, &q).unwrap(), 0.0);
        let tiny = subordination_power(1e-12, 0.5, &q).unwrap();
        assert!(tiny.abs() < 1e-5);
        assert!(subordination_power(1.0, 1.0, &q).is_err());
    }

    #[test]
    fn subordination_reports_split_on_failure() {
        let q = QuadratureConfig {
            abs_tol: 1e-300,
            max_depth: 2,
            max_evals: 1000,
        };
        match subordination_power(2.0, 0.5, &q) {
            Err(Error::Subordination { split, .. }) => assert_eq!(split, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn normalized_euclidean_examples() {
        let x = p(&[1.0, 2.0]);
        assert_eq!(normalized_euclidean(&x, &x).unwrap(), (0.0, 1.0));
        let (d, s) = normalized_euclidean(&p(&[1.0, 0.0]), &p(&[0.0, 1.0])).unwrap();
        assert!((d - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((s - (1.0 - SQRT_2 / 2.0)).abs() < 1e-15);
        assert_eq!(d + s, 1.0);
        let z = p(&[0.0, 0.0]);
        assert_eq!(normalized_euclidean(&z, &z).unwrap(), (0.0, 0.0));
        let (d, s) = normalized_euclidean(&z, &x).unwrap();
        assert_eq!((d, s), (1.0, 0.0));
    }

    #[test]
    fn sphere_examples() {
        let a = 0.5;
        let r = sphere_radius(a);
        assert_eq!(r, 0.25);
        let x = p(&[r, 0.0]);
        let y = p(&[-r, 0.0]);
        assert_eq!(sphere_similarity(&x, &x, a).unwrap(), 1.0);
        let v = sphere_similarity(&x, &y, a).unwrap();
        assert!((v - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.292893).abs() < 1e-6);
        assert!(sphere_similarity(&x, &y, 1.0).is_err());
        match sphere_similarity(&p(&[1.0, 0.0]), &y, a) {
            Err(Error::OffSphere { radius, expected }) => {
                assert_eq!(radius, 1.0);
                assert_eq!(expected, 0.25);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sphere_similarity_is_halved_fbm_on_sphere() {
        let a = 0.6;
        let r = sphere_radius(a);
        let x = p(&[r * 0.6, r * 0.8]);
        let y = p(&[-r, 0.0]);
        let fbm = fbm_kernel(&x, &y, a / 2.0, false).unwrap();
        assert!((sphere_similarity(&x, &y, a).unwrap() - fbm).abs() < 1e-12);
    }

    #[test]
    fn combinators() {
        let k = KernelSpec::fbm(0.4, false).unwrap();
        let zero = KernelSpec::Constant { value: 0.0 };
        let x = p(&[0.3, -1.2]);
        let y = p(&[1.1, 0.4]);
        let base = k.eval(&x, &y).unwrap();
        let scaled = combine(CombineOp::Scale(1.0), vec![k.clone()]).unwrap();
        assert_eq!(scaled.eval(&x, &y).unwrap(), base);
        let sum = combine(CombineOp::Sum, vec![k.clone(), zero.clone()]).unwrap();
        assert_eq!(sum.eval(&x, &y).unwrap(), base);
        let e = combine(CombineOp::Exp, vec![zero]).unwrap();
        assert_eq!(e.eval(&x, &y).unwrap(), 1.0);
        assert!(combine(CombineOp::Exp, vec![]).is_err());
        assert!(combine(CombineOp::Scale(0.0), vec![k]).is_err());
    }

    #[test]
    fn gram_examples() {
        let k = KernelSpec::fbm(0.25, false).unwrap();
        let single = gram(&[p(&[3.0])], &k).unwrap();
        assert_eq!(single.n(), 1);
        assert!((single.get(0, 0) - 2.0 * 3f64.sqrt()).abs() < 1e-15);

        let twin = gram(&[p(&[0.5]), p(&[0.5])], &k).unwrap();
        let v = twin.get(0, 0);
        assert!(twin.to_rows().iter().flatten().all(|&e| e == v));

        // eigen-oracle: 0.93606252, 1.64603036, 4.24633425
        let g = gram(&[p(&[1.0]), p(&[-1.0]), p(&[2.0])], &k).unwrap();
        let s = crate::linalg::eigvalsh(&g).unwrap();
        for (got, want) in s
            .eigenvalues
            .iter()
            .zip([0.93606252, 1.64603036, 4.24633425])
        {
            assert!((got - want).abs() < 1e-7);
        }
    }

    #[test]
    fn spec_json_shape() {
        let k = KernelSpec::exp_of(MetricSpec::bounded(MetricSpec::Euclidean), 2.0).unwrap();
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"exp_of_metric","params":{"t":2.0},"children":[{"kind":"bounded","children":[{"kind":"euclidean"}]}]}"#
        );
        let back: KernelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k);
        let bad: std::result::Result<KernelSpec, _> =
            serde_json::from_str(r#"{"kind":"fbm","params":{"a":1.5}}"#);
        assert!(bad.is_err());
        let unknown: std::result::Result<MetricSpec, _> =
            serde_json::from_str(r#"{"kind":"manhattan"}"#);
        assert!(unknown.is_err());
    }

    #[test]
    fn complex_points() {
        let x = Point::new(vec![Complex64::new(1.0, 1.0)]).unwrap();
        let y = Point::new(vec![Complex64::new(0.0, 0.0)]).unwrap();
        assert!((x.norm() - SQRT_2).abs() < 1e-15);
        assert!((x.distance(&y).unwrap() - SQRT_2).abs() < 1e-15);
        assert!(Point::new(vec![Complex64::new(f64::NAN, 0.0)]).is_err());
        assert!(Point::new(vec![]).is_err());
    }
}
