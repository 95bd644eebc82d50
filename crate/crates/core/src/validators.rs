//! Finite-sample checkers for metric, normalized-metric and similarity-metric
//! axioms, and for positive / conditionally negative definiteness.
//!
//! Every check evaluates the pairwise function on all ordered pairs of the
//! sample once, then runs each axiom over all pairs or triples in a fixed
//! index order. A comparison `lhs <= rhs` has margin `rhs - lhs` and fails
//! when the margin drops below `-tol * max(1, |values compared|)`. Strict
//! axioms (distinct elements must be told apart) fail when the margin is
//! `<= 0` and use no slack.
//!
//! Biconditional axioms can only be refuted by a finite sample in their
//! "only if" direction; those verdicts are reported as `consistent_with`
//! rather than `pass`.

// index loops mirror the axiom statements
#![allow(clippy::needless_range_loop)]

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::sampling::Sample;

/// Default absolute slack for axiom comparisons.
pub const AXIOM_TOL: f64 = 1e-12;

pub mod axiom {
    pub const SYMMETRY: &str = "symmetry";
    pub const IDENTITY: &str = "identity";
    pub const NONNEGATIVITY: &str = "nonnegativity";
    pub const POSITIVITY: &str = "positivity";
    pub const TRIANGLE: &str = "triangle";
    pub const RANGE: &str = "range";
    pub const SELF_NONNEGATIVE: &str = "self_nonnegative";
    pub const SELF_DOMINANCE: &str = "self_dominance";
    pub const SIMILARITY_TRIANGLE: &str = "similarity_triangle";
    pub const INDISCERNIBLES_IF: &str = "indiscernibles_if";
    pub const INDISCERNIBLES_ONLY_IF: &str = "indiscernibles_only_if";
    pub const SELF_SIMILARITY_ONE: &str = "self_similarity_one";
    pub const NORMALIZED_TRIANGLE: &str = "normalized_triangle";
    pub const ONE_ONLY_IF_EQUAL: &str = "one_only_if_equal";
    pub const POSITIVE_SEMIDEFINITE: &str = "positive_semidefinite";
    pub const CONDITIONALLY_NEGATIVE_DEFINITE: &str = "conditionally_negative_definite";
    pub const ONE_POSITIVE_EIGENVALUE: &str = "one_positive_eigenvalue";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// No counterexample in the sample; the direction cannot be verified by sampling.
    ConsistentWith,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Sample indices the violated comparison was evaluated on.
    pub indices: Vec<usize>,
    /// Pairwise values that entered the comparison.
    pub values: Vec<f64>,
    /// Coefficient vector for spectral axioms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
    /// Slack the margin was compared against.
    pub slack: f64,
    pub strict: bool,
}

impl Witness {
    pub fn is_violated_by(&self, margin: f64) -> bool {
        if self.strict {
            margin <= 0.0
        } else {
            margin < -self.slack
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomVerdict {
    pub name: String,
    pub verdict: Verdict,
    /// Worst margin seen; the witness's margin when failing.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectral {
    pub min_eig: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub seed: Option<u64>,
    pub n: usize,
    pub domain: String,
    pub tol: f64,
    pub axioms: Vec<AxiomVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<Spectral>,
    /// Informational; does not enter [`ValidationReport::passed`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

impl ValidationReport {
    fn new<T>(subject: &str, sample: &Sample<T>, tol: f64) -> Self {
        Self {
            subject: subject.to_string(),
            seed: sample.seed,
            n: sample.len(),
            domain: sample.domain.clone(),
            tol,
            axioms: Vec::new(),
            spectral: None,
            cross_check: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.verdict != Verdict::Fail)
    }

    pub fn axiom(&self, name: &str) -> Option<&AxiomVerdict> {
        self.axioms.iter().find(|a| a.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomVerdict> {
        self.axioms.iter().filter(|a| a.verdict == Verdict::Fail)
    }
}

/// Running worst case for one axiom.
struct Tracker {
    name: &'static str,
    tol: f64,
    strict: bool,
    sampled_only: bool,
    worst_margin: Option<f64>,
    // (margin + slack, margin, witness) of the worst failure so far
    worst_failure: Option<(f64, f64, Witness)>,
}

impl Tracker {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            strict: false,
            sampled_only: false,
            worst_margin: None,
            worst_failure: None,
        }
    }

    fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    fn sampled_only(mut self) -> Self {
        self.sampled_only = true;
        self
    }

    fn record(&mut self, margin: f64, scale: f64, indices: &[usize], values: &[f64]) {
        // normalizes -0.0
        let margin = margin + 0.0;
        let slack = if self.strict {
            0.0
        } else {
            self.tol * scale.abs().max(1.0)
        };
        self.worst_margin = Some(self.worst_margin.map_or(margin, |m| m.min(margin)));
        let violated = if self.strict {
            margin <= 0.0
        } else {
            margin < -slack
        };
        if violated {
            let excess = margin + slack;
            if self
                .worst_failure
                .as_ref()
                .is_none_or(|(e, _, _)| excess < *e)
            {
                let witness = Witness {
                    indices: indices.to_vec(),
                    values: values.to_vec(),
                    vector: None,
                    slack,
                    strict: self.strict,
                };
                self.worst_failure = Some((excess, margin, witness));
            }
        }
    }

    fn finish(self) -> AxiomVerdict {
        match self.worst_failure {
            Some((_, margin, witness)) => AxiomVerdict {
                name: self.name.into(),
                verdict: Verdict::Fail,
                margin,
                witness: Some(witness),
            },
            None => AxiomVerdict {
                name: self.name.into(),
                verdict: if self.sampled_only {
                    Verdict::ConsistentWith
                } else {
                    Verdict::Pass
                },
                margin: self.worst_margin.unwrap_or(0.0),
                witness: None,
            },
        }
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// All ordered-pair values `t[i][j] = f(x_i, x_j)`.
fn table<T>(sample: &Sample<T>, f: &impl Fn(&T, &T) -> Result<f64>) -> Result<Vec<Vec<f64>>> {
    if sample.is_empty() {
        return Err(Error::Parse("sample is empty".into()));
    }
    let xs = &sample.elements;
    let t: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| xs.iter().map(|y| f(x, y)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    if let Some((i, j)) = t
        .iter()
        .enumerate()
        .find_map(|(i, row)| row.iter().position(|v| !v.is_finite()).map(|j| (i, j)))
    {
        return Err(Error::NonFinite { row: i, col: j });
    }
    Ok(t)
}

fn equal_pairs<T: PartialEq>(sample: &Sample<T>) -> Vec<(usize, usize)> {
    let xs = &sample.elements;
    let mut out = Vec::new();
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            if xs[i] == xs[j] {
                out.push((i, j));
            }
        }
    }
    out
}

fn symmetry(t: &[Vec<f64>], tol: f64) -> AxiomVerdict {
    let mut tr = Tracker::new(axiom::SYMMETRY, tol);
    let n = t.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (t[i][j], t[j][i]);
            tr.record(-(a - b).abs(), max_abs(&[a, b]), &[i, j], &[a, b]);
        }
    }
    tr.finish()
}

fn metric_axioms<T: PartialEq>(sample: &Sample<T>, t: &[Vec<f64>], tol: f64) -> Vec<AxiomVerdict> {
    let n = t.len();
    let equal = equal_pairs(sample);

    let mut identity = Tracker::new(axiom::IDENTITY, tol);
    for i in 0..n {
        identity.record(-t[i][i].abs(), 0.0, &[i, i], &[t[i][i]]);
    }
    for &(i, j) in &equal {
        identity.record(-t[i][j].abs(), 0.0, &[i, j], &[t[i][j]]);
    }

    let mut nonneg = Tracker::new(axiom::NONNEGATIVITY, tol);
    let mut positivity = Tracker::new(axiom::POSITIVITY, tol).strict();
    for i in 0..n {
        for j in 0..n {
            nonneg.record(t[i][j], 0.0, &[i, j], &[t[i][j]]);
            if i != j && !equal.contains(&(i.min(j), i.max(j))) {
                positivity.record(t[i][j], 0.0, &[i, j], &[t[i][j]]);
            }
        }
    }

    // d(x,y) <= d(x,z) + d(y,z)
    let mut triangle = Tracker::new(axiom::TRIANGLE, tol);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let vals = [t[i][j], t[i][k], t[j][k]];
                triangle.record(
                    vals[1] + vals[2] - vals[0],
                    max_abs(&vals),
                    &[i, j, k],
                    &vals,
                );
            }
        }
    }

    vec![
        symmetry(t, tol),
        identity.finish(),
        nonneg.finish(),
        positivity.finish(),
        triangle.finish(),
    ]
}

fn range_axiom(t: &[Vec<f64>], tol: f64) -> AxiomVerdict {
    let mut tr = Tracker::new(axiom::RANGE, tol);
    for (i, row) in t.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            tr.record(v.min(1.0 - v), 1.0, &[i, j], &[v]);
        }
    }
    tr.finish()
}

/// Metric axioms: symmetry, `d(x,x) = 0`, nonnegativity, `d(x,y) > 0` for
/// distinct sampled elements, and the triangle inequality over all triples.
pub fn check_metric<T: PartialEq>(
    sample: &Sample<T>,
    subject: &str,
    d: impl Fn(&T, &T) -> Result<f64>,
    tol: f64,
) -> Result<ValidationReport> {
    let t = table(sample, &d)?;
    let mut report = ValidationReport::new(subject, sample, tol);
    report.axioms = metric_axioms(sample, &t, tol);
    Ok(report)
}

/// Metric axioms plus values in `[0, 1]`.
pub fn check_normalized<T: PartialEq>(
    sample: &Sample<T>,
    subject: &str,
    d: impl Fn(&T, &T) -> Result<f64>,
    tol: f64,
) -> Result<ValidationReport> {
    let t = table(sample, &d)?;
    let mut report = ValidationReport::new(subject, sample, tol);
    report.axioms = metric_axioms(sample, &t, tol);
    report.axioms.push(range_axiom(&t, tol));
    Ok(report)
}

/// The five similarity-metric conditions:
/// symmetry, `s(x,x) >= 0`, `s(x,x) >= s(x,y)`,
/// `s(x,y) + s(y,z) <= s(x,z) + s(y,y)`, and
/// `s(x,x) = s(y,y) = s(x,y)` iff `x = y`.
pub fn check_similarity_chen<T: PartialEq>(
    sample: &Sample<T>,
    subject: &str,
    s: impl Fn(&T, &T) -> Result<f64>,
    tol: f64,
) -> Result<ValidationReport> {
    let t = table(sample, &s)?;
    let n = t.len();
    let equal = equal_pairs(sample);
    let mut report = ValidationReport::new(subject, sample, tol);
    report.axioms.push(symmetry(&t, tol));

    let mut self_nonneg = Tracker::new(axiom::SELF_NONNEGATIVE, tol);
    for i in 0..n {
        self_nonneg.record(t[i][i], 0.0, &[i], &[t[i][i]]);
    }
    report.axioms.push(self_nonneg.finish());

    let mut dominance = Tracker::new(axiom::SELF_DOMINANCE, tol);
    for i in 0..n {
        for j in 0..n {
            let vals = [t[i][i], t[i][j]];
            dominance.record(vals[0] - vals[1], max_abs(&vals), &[i, j], &vals);
        }
    }
    report.axioms.push(dominance.finish());

    let mut triangle = Tracker::new(axiom::SIMILARITY_TRIANGLE, tol);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // x = i, y = j, z = k
                let vals = [t[i][j], t[j][k], t[i][k], t[j][j]];
                triangle.record(
                    vals[2] + vals[3] - vals[0] - vals[1],
                    max_abs(&vals),
                    &[i, j, k],
                    &vals,
                );
            }
        }
    }
    report.axioms.push(triangle.finish());

    let mut if_dir = Tracker::new(axiom::INDISCERNIBLES_IF, tol);
    for &(i, j) in &equal {
        let vals = [t[i][i], t[j][j], t[i][j]];
        let spread = (vals[0] - vals[2]).abs().max((vals[1] - vals[2]).abs());
        if_dir.record(-spread, max_abs(&vals), &[i, j], &vals);
    }
    report.axioms.push(if_dir.finish());

    let mut only_if = Tracker::new(axiom::INDISCERNIBLES_ONLY_IF, tol)
        .strict()
        .sampled_only();
    for i in 0..n {
        for j in (i + 1)..n {
            if equal.contains(&(i, j)) {
                continue;
            }
            let vals = [t[i][i], t[j][j], t[i][j]];
            let spread = (vals[0] - vals[2]).abs().max((vals[1] - vals[2]).abs());
            only_if.record(spread, 0.0, &[i, j], &vals);
        }
    }
    report.axioms.push(only_if.finish());
    Ok(report)
}

/// Normalized similarity conditions: values in `[0, 1]`, symmetry,
/// `s(x,x) = 1`, `s(x,z) + s(z,y) <= s(x,y) + 1`, and `s(x,y) = 1` iff
/// `x = y`. Also runs [`check_normalized`] on `1 - s` and records it as a
/// cross-check.
pub fn check_similarity_normalized<T: PartialEq>(
    sample: &Sample<T>,
    subject: &str,
    s: impl Fn(&T, &T) -> Result<f64>,
    tol: f64,
) -> Result<ValidationReport> {
    let t = table(sample, &s)?;
    let n = t.len();
    let equal = equal_pairs(sample);
    let mut report = ValidationReport::new(subject, sample, tol);
    report.axioms.push(range_axiom(&t, tol));
    report.axioms.push(symmetry(&t, tol));

    let mut self_one = Tracker::new(axiom::SELF_SIMILARITY_ONE, tol);
    for i in 0..n {
        self_one.record(-(t[i][i] - 1.0).abs(), 1.0, &[i, i], &[t[i][i]]);
    }
    for &(i, j) in &equal {
        self_one.record(-(t[i][j] - 1.0).abs(), 1.0, &[i, j], &[t[i][j]]);
    }
    report.axioms.push(self_one.finish());

    let mut triangle = Tracker::new(axiom::NORMALIZED_TRIANGLE, tol);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // x = i, y = j, z = k
                let vals = [t[i][k], t[k][j], t[i][j]];
                triangle.record(
                    vals[2] + 1.0 - vals[0] - vals[1],
                    max_abs(&vals),
                    &[i, j, k],
                    &vals,
                );
            }
        }
    }
    report.axioms.push(triangle.finish());

    let mut only_if = Tracker::new(axiom::ONE_ONLY_IF_EQUAL, tol)
        .strict()
        .sampled_only();
    for i in 0..n {
        for j in 0..n {
            if i != j && !equal.contains(&(i.min(j), i.max(j))) {
                only_if.record(1.0 - t[i][j], 0.0, &[i, j], &[t[i][j]]);
            }
        }
    }
    report.axioms.push(only_if.finish());

    let complement = check_normalized(sample, subject, |x, y| Ok(1.0 - s(x, y)?), tol)?;
    report.cross_check = Some(CrossCheck {
        name: "complement_is_normalized_metric".into(),
        passed: complement.passed(),
    });
    Ok(report)
}

fn symmetrized(t: &[Vec<f64>]) -> Result<SymMatrix> {
    SymMatrix::from_upper_fn(t.len(), |i, j| {
        if i == j {
            t[i][i]
        } else {
            0.5 * (t[i][j] + t[j][i])
        }
    })
}

/// Gram matrix of the kernel on the sample and its PSD verdict at `tol`.
pub fn check_pd<T>(
    sample: &Sample<T>,
    subject: &str,
    k: impl Fn(&T, &T) -> Result<f64>,
    tol: f64,
) -> Result<ValidationReport> {
    let t = table(sample, &k)?;
    let n = t.len();
    let mut report = ValidationReport::new(subject, sample, tol);
    report.axioms.push(symmetry(&t, AXIOM_TOL));
    let gram = symmetrized(&t)?;
    let verdict = linalg::is_psd(&gram, tol)?;
    let witness = (!verdict.psd).then(|| Witness {
        indices: (0..n).collect(),
        values: vec![verdict.min_eigenvalue],
        vector: Some(verdict.min_eigenvector.clone()),
        slack: verdict.threshold,
        strict: false,
    });
    report.axioms.push(AxiomVerdict {
        name: axiom::POSITIVE_SEMIDEFINITE.into(),
        verdict: if verdict.psd {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        margin: verdict.min_eigenvalue,
        witness,
    });
    report.spectral = Some(Spectral {
        min_eig: verdict.min_eigenvalue,
        pos_count: None,
    });
    Ok(report)
}

/// Distance matrix of the sample: conditional negative definiteness (exact
/// test on the sum-zero subspace) and the one-positive-eigenvalue necessary
/// condition.
pub fn check_cnd<T>(
    sample: &Sample<T>,
    subject: &str,
    d: impl Fn(&T, &T) -> Result<f64>,
    tol: f64,
) -> Result<ValidationReport> {
    let t = table(sample, &d)?;
    let n = t.len();
    let mut report = ValidationReport::new(subject, sample, tol);
    report.axioms.push(symmetry(&t, AXIOM_TOL));
    let m = symmetrized(&t)?;

    let cnd = linalg::is_cnd(&m, tol)?;
    let witness = cnd.witness.as_ref().map(|c| Witness {
        indices: (0..n).collect(),
        values: vec![cnd.max_form],
        vector: Some(c.clone()),
        slack: cnd.threshold,
        strict: false,
    });
    report.axioms.push(AxiomVerdict {
        name: axiom::CONDITIONALLY_NEGATIVE_DEFINITE.into(),
        verdict: if cnd.cnd {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        margin: -cnd.max_form,
        witness,
    });

    let necessary = linalg::negative_type_necessary(&m, tol)?;
    // the condition is stated for nonzero distance matrices; the zero matrix passes vacuously
    let vacuous = m.is_zero();
    let ok = necessary.passes || vacuous;
    report.axioms.push(AxiomVerdict {
        name: axiom::ONE_POSITIVE_EIGENVALUE.into(),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        margin: if ok {
            0.0
        } else {
            -(necessary.positive_count.abs_diff(1) as f64)
        },
        witness: (!ok).then(|| Witness {
            indices: (0..n).collect(),
            values: necessary.eigenvalues.clone(),
            vector: None,
            slack: necessary.threshold,
            strict: false,
        }),
    });
    report.spectral = Some(Spectral {
        min_eig: necessary.eigenvalues[0],
        pos_count: Some(necessary.positive_count),
    });
    Ok(report)
}

/// Recomputes the margin of a failing verdict from its witness, evaluating
/// the pairwise function afresh through `f(i, j)` on sample indices.
/// Returns `None` when there is no witness.
pub fn recheck(
    verdict: &AxiomVerdict,
    f: impl Fn(usize, usize) -> Result<f64>,
) -> Result<Option<f64>> {
    let Some(w) = &verdict.witness else {
        return Ok(None);
    };
    let idx = &w.indices;
    let margin = match verdict.name.as_str() {
        axiom::SYMMETRY => -(f(idx[0], idx[1])? - f(idx[1], idx[0])?).abs(),
        axiom::IDENTITY => -f(idx[0], idx[1])?.abs(),
        axiom::NONNEGATIVITY | axiom::POSITIVITY => f(idx[0], idx[1])?,
        axiom::TRIANGLE => {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            f(i, k)? + f(j, k)? - f(i, j)?
        }
        axiom::RANGE => {
            let v = f(idx[0], idx[1])?;
            v.min(1.0 - v)
        }
        axiom::SELF_NONNEGATIVE => f(idx[0], idx[0])?,
        axiom::SELF_DOMINANCE => f(idx[0], idx[0])? - f(idx[0], idx[1])?,
        axiom::SIMILARITY_TRIANGLE => {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            f(i, k)? + f(j, j)? - f(i, j)? - f(j, k)?
        }
        axiom::INDISCERNIBLES_IF | axiom::INDISCERNIBLES_ONLY_IF => {
            let (i, j) = (idx[0], idx[1]);
            let (sii, sjj, sij) = (f(i, i)?, f(j, j)?, f(i, j)?);
            let spread = (sii - sij).abs().max((sjj - sij).abs());
            if verdict.name == axiom::INDISCERNIBLES_IF {
                -spread
            } else {
                spread
            }
        }
        axiom::SELF_SIMILARITY_ONE => -(f(idx[0], idx[1])? - 1.0).abs(),
        axiom::NORMALIZED_TRIANGLE => {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            f(i, j)? + 1.0 - f(i, k)? - f(k, j)?
        }
        axiom::ONE_ONLY_IF_EQUAL => 1.0 - f(idx[0], idx[1])?,
        axiom::POSITIVE_SEMIDEFINITE | axiom::CONDITIONALLY_NEGATIVE_DEFINITE => {
            let c = w
                .vector
                .as_ref()
                .ok_or_else(|| Error::Parse("spectral witness lacks a vector".into()))?;
            let mut form = 0.0;
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    let v = if i == j {
                        f(i, i)?
                    } else {
                        0.5 * (f(i, j)? + f(j, i)?)
                    };
                    form += c[a] * v * c[b];
                }
            }
            if verdict.name == axiom::POSITIVE_SEMIDEFINITE {
                form
            } else {
                -form
            }
        }
        axiom::ONE_POSITIVE_EIGENVALUE => {
            let n = idx.len();
            let m = SymMatrix::try_from_upper_fn(n, |a, b| f(idx[a], idx[b]))?;
            let check = linalg::negative_type_necessary(&m, verdict_tol(w))?;
            if check.passes || m.is_zero() {
                0.0
            } else {
                -(check.positive_count.abs_diff(1) as f64)
            }
        }
        other => return Err(Error::Parse(format!("unknown axiom {other:?}"))),
    };
    Ok(Some(margin))
}

// relative tol recovered from the stored absolute threshold
fn verdict_tol(w: &Witness) -> f64 {
    let radius = w.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    w.slack / radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{paper_functions, sup_metric};
    use crate::kernels::{
        bounded_transform, normalized_euclidean, sphere_radius, KernelSpec, MetricSpec, Point,
    };
    use crate::linalg::DEFAULT_TOL;
    use crate::sampling::{random_sphere_points, rng, sample_points};

    fn euclid(x: &Point, y: &Point) -> Result<f64> {
        x.distance(y)
    }

    fn assert_witnesses_recheck<T>(
        report: &ValidationReport,
        sample: &Sample<T>,
        f: impl Fn(&T, &T) -> Result<f64>,
    ) {
        for v in report.failures() {
            let w = v.witness.as_ref().expect("failing verdict has a witness");
            let m = recheck(v, |i, j| f(&sample.elements[i], &sample.elements[j]))
                .unwrap()
                .unwrap();
            assert!(w.is_violated_by(m), "{}: margin {m}", v.name);
            assert!(m <= v.margin + 1e-12, "{}: {m} vs {}", v.name, v.margin);
        }
    }

    #[test]
    fn euclidean_is_a_metric() {
        let s = sample_points(11, 10, 3, false, 2.0);
        let r = check_metric(&s, "euclidean", euclid, AXIOM_TOL).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.seed, Some(11));
        assert_eq!(r.n, 10);
    }

    #[test]
    fn bounded_euclidean_is_normalized() {
        let s = sample_points(12, 10, 2, true, 2.0);
        let d = |x: &Point, y: &Point| bounded_transform(x.distance(y)?);
        assert!(check_metric(&s, "bounded", d, AXIOM_TOL).unwrap().passed());
        assert!(check_normalized(&s, "bounded", d, AXIOM_TOL)
            .unwrap()
            .passed());
    }

    #[test]
    fn asymmetric_function_fails_with_witness() {
        let s = Sample::new(
            [0.0, 1.5, -2.0, 3.0]
                .iter()
                .map(|&x| Point::real(&[x]).unwrap())
                .collect(),
            None,
            "reals",
        );
        let d = |x: &Point, y: &Point| Ok(x.coords()[0].re - y.coords()[0].re);
        let r = check_metric(&s, "x - y", d, AXIOM_TOL).unwrap();
        assert!(!r.passed());
        assert_eq!(r.axiom(axiom::SYMMETRY).unwrap().verdict, Verdict::Fail);
        assert_witnesses_recheck(&r, &s, d);
    }

    #[test]
    fn normalized_examples() {
        let s = sample_points(13, 12, 2, false, 2.0);
        let d = |x: &Point, y: &Point| MetricSpec::exp_complement(MetricSpec::Euclidean).eval(x, y);
        assert!(check_normalized(&s, "1-e^-d", d, AXIOM_TOL)
            .unwrap()
            .passed());

        let far = Sample::new(
            vec![Point::real(&[0.0]).unwrap(), Point::real(&[10.0]).unwrap()],
            None,
            "far",
        );
        let r = check_normalized(&far, "euclidean", euclid, AXIOM_TOL).unwrap();
        assert_eq!(r.axiom(axiom::RANGE).unwrap().verdict, Verdict::Fail);
        assert!(r.axiom(axiom::TRIANGLE).unwrap().verdict == Verdict::Pass);
        assert_witnesses_recheck(&r, &far, euclid);

        let single = Sample::new(vec![Point::real(&[1.0]).unwrap()], None, "one");
        assert!(check_normalized(&single, "zero", |_, _| Ok(0.0), AXIOM_TOL)
            .unwrap()
            .passed());
    }

    #[test]
    fn chen_examples() {
        let s = sample_points(14, 10, 2, false, 2.0);
        let sim = |x: &Point, y: &Point| normalized_euclidean(x, y).map(|(d, _)| 1.0 - d);
        assert!(check_similarity_chen(&s, "1 - D", sim, AXIOM_TOL)
            .unwrap()
            .passed());
        let exp = |x: &Point, y: &Point| Ok((-x.distance(y)?).exp());
        let r = check_similarity_chen(&s, "e^-d", exp, AXIOM_TOL).unwrap();
        assert!(r.passed());
        assert_eq!(
            r.axiom(axiom::INDISCERNIBLES_ONLY_IF).unwrap().verdict,
            Verdict::ConsistentWith
        );

        let neg = |_: &Point, _: &Point| Ok(-1.0);
        let r = check_similarity_chen(&s, "-1", neg, AXIOM_TOL).unwrap();
        assert_eq!(
            r.axiom(axiom::SELF_NONNEGATIVE).unwrap().verdict,
            Verdict::Fail
        );
        assert_witnesses_recheck(&r, &s, neg);
    }

    #[test]
    fn normalized_similarity_examples() {
        let s = sample_points(15, 10, 3, true, 2.0);
        let exp = |x: &Point, y: &Point| Ok((-x.distance(y)?).exp());
        let r = check_similarity_normalized(&s, "e^-d", exp, AXIOM_TOL).unwrap();
        assert!(r.passed());
        assert!(r.cross_check.as_ref().unwrap().passed);

        let a = 0.5;
        let sphere = Sample::new(
            random_sphere_points(&mut rng(3), 10, 2, false, sphere_radius(a)),
            Some(3),
            "sphere",
        );
        let s1 = |x: &Point, y: &Point| Ok(1.0 - x.distance(y)?.powf(a));
        assert!(
            check_similarity_normalized(&sphere, "1-|x-y|^a", s1, AXIOM_TOL)
                .unwrap()
                .passed()
        );

        let two = |x: &Point, y: &Point| Ok(2.0 - x.distance(y)?);
        let r = check_similarity_normalized(&s, "2-d", two, AXIOM_TOL).unwrap();
        assert_eq!(r.axiom(axiom::RANGE).unwrap().verdict, Verdict::Fail);
        assert_witnesses_recheck(&r, &s, two);
    }

    #[test]
    fn pd_examples() {
        let s = sample_points(16, 8, 2, true, 2.0);
        let k = KernelSpec::fbm(0.5, false).unwrap();
        let r = check_pd(&s, "fbm", |x, y| k.eval(x, y), DEFAULT_TOL).unwrap();
        assert!(r.passed());
        let r = check_pd(&s, "1", |_, _| Ok(1.0), DEFAULT_TOL).unwrap();
        assert!(r.passed());

        // e^{-sup} is PSD on x1..x5 itself; the failure shows on the scaled family 0.2 x_j
        let xs = Sample::new(paper_functions().to_vec(), None, "x1..x5");
        let sim = |f: &_, g: &_| Ok((-sup_metric(f, g)).exp());
        assert!(check_pd(&xs, "e^-sup", sim, DEFAULT_TOL).unwrap().passed());
        let scaled = Sample::new(
            paper_functions().iter().map(|f| f.scaled(0.2)).collect(),
            None,
            "0.2 x_j",
        );
        let r = check_pd(&scaled, "e^-sup", sim, DEFAULT_TOL).unwrap();
        assert!(!r.passed());
        assert!(r.spectral.as_ref().unwrap().min_eig < -0.02);
        assert_witnesses_recheck(&r, &scaled, sim);
    }

    #[test]
    fn cnd_examples() {
        let xs = Sample::new(paper_functions().to_vec(), None, "x1..x5");
        let r = check_cnd(&xs, "sup", |f, g| Ok(sup_metric(f, g)), DEFAULT_TOL).unwrap();
        assert!(!r.passed());
        assert_eq!(r.spectral.as_ref().unwrap().pos_count, Some(2));
        assert_witnesses_recheck(&r, &xs, |f, g| Ok(sup_metric(f, g)));

        let s = sample_points(17, 12, 3, false, 2.0);
        let sq = |x: &Point, y: &Point| MetricSpec::SquaredEuclidean.eval(x, y);
        assert!(check_cnd(&s, "squared euclidean", sq, DEFAULT_TOL)
            .unwrap()
            .passed());
        let p08 = |x: &Point, y: &Point| Ok(x.distance(y)?.powf(0.8));
        assert!(check_cnd(&s, "|x-y|^0.8", p08, DEFAULT_TOL)
            .unwrap()
            .passed());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = check_metric(
            &sample_points(5, 8, 2, true, 2.0),
            "euclidean",
            euclid,
            AXIOM_TOL,
        )
        .unwrap();
        let b = check_metric(
            &sample_points(5, 8, 2, true, 2.0),
            "euclidean",
            euclid,
            AXIOM_TOL,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn duplicate_elements_are_handled() {
        let p = Point::real(&[1.0, 1.0]).unwrap();
        let s = Sample::new(
            vec![p.clone(), p.clone(), Point::real(&[0.0, 2.0]).unwrap()],
            None,
            "dups",
        );
        assert!(check_metric(&s, "euclidean", euclid, AXIOM_TOL)
            .unwrap()
            .passed());
        // a pseudo-metric that ignores the second coordinate fails positivity on distinct points
        let q = Sample::new(
            vec![
                Point::real(&[1.0, 0.0]).unwrap(),
                Point::real(&[1.0, 5.0]).unwrap(),
            ],
            None,
            "q",
        );
        let pseudo = |x: &Point, y: &Point| Ok((x.coords()[0] - y.coords()[0]).norm());
        let r = check_metric(&q, "pseudo", pseudo, AXIOM_TOL).unwrap();
        assert_eq!(r.axiom(axiom::POSITIVITY).unwrap().verdict, Verdict::Fail);
        assert_witnesses_recheck(&r, &q, pseudo);
    }

    #[test]
    fn empty_sample_is_an_error() {
        let s: Sample<Point> = Sample::new(vec![], None, "none");
        assert!(check_metric(&s, "e", euclid, AXIOM_TOL).is_err());
    }
}
