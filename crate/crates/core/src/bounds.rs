//! Support uncertainty bounds for `||x||_0 * ||X||_0`.
//!
//! All bounds are functions of the sorted entry magnitudes `s(1) >= s(2) >= ...`
//! of the transformation matrix. For a candidate support product `p` the
//! squared variant averages `s(i)^2` over the `p` largest entries and the
//! linear variant squares the average of `s(i)`; in both cases the candidate
//! bound is the reciprocal, written `qn(p)` here. `qn` is nondecreasing in `p`,
//! so the smallest `p` with `p >= qn(p)` is well defined. [`direct_search_bound`]
//! scans for it and [`improved_bound`] reaches it by iterating
//! `Q <- qn(ceil(Q))` from the classical bound.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{orthonormality_error, SpectralBasis};

/// Slack used by the ceiling and by the stop test, so that analytically
/// integral bounds do not round up on floating-point noise.
pub const CEIL_GUARD: f64 = 1e-9;
/// Largest orthonormality error a basis may have before bounds are refused.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
/// Number of sorted magnitudes reproduced in reports.
pub const S_PREFIX_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("basis is not orthonormal (error {0:e})")]
    NotOrthonormal(f64),
    #[error("no magnitudes given")]
    Empty,
    #[error("magnitude {0} is negative or not finite")]
    InvalidMagnitude(f64),
    #[error("prefix length {p} outside 1..={len}")]
    PrefixOutOfRange { p: usize, len: usize },
    #[error("empty {0} index set")]
    EmptySet(&'static str),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("no fixed point within the first {0} sorted magnitudes")]
    NoFixedPoint(usize),
    #[error("fixed-point iteration exceeded {0} steps")]
    IterationLimit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Reciprocal of the average of `s(i)^2`.
    Squared,
    /// Reciprocal of the squared average of `s(i)`. Valid under the equal-modulus
    /// (Schwarz equality) assumption on the signal and its transform.
    Linear,
}

impl Variant {
    pub const BOTH: [Variant; 2] = [Variant::Squared, Variant::Linear];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Squared => "squared",
            Variant::Linear => "linear",
        }
    }
}

/// Magnitudes `|u_k(n)|` in nonincreasing order with running sums.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedMagnitudes {
    s: Vec<f64>,
    prefix_sq: Vec<f64>,
    prefix_lin: Vec<f64>,
}

impl SortedMagnitudes {
    /// All `n^2` magnitudes of an orthonormal basis. Ties keep `(n, k)` order.
    pub fn from_basis(basis: &SpectralBasis) -> Result<Self, BoundError> {
        let err = orthonormality_error(basis);
        if err.is_nan() || err >= ORTHONORMALITY_TOL {
            return Err(BoundError::NotOrthonormal(err));
        }
        let n = basis.n();
        let mut values = Vec::with_capacity(n * n);
        for v in 0..n {
            for k in 0..n {
                values.push(basis.magnitude(v, k));
            }
        }
        Self::from_values(values)
    }

    /// Arbitrary magnitudes, e.g. a reported prefix of a larger basis.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self, BoundError> {
        if values.is_empty() {
            return Err(BoundError::Empty);
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(BoundError::InvalidMagnitude(bad));
        }
        // Stable sort keeps the lexicographic order of equal entries.
        values.sort_by(|a, b| b.total_cmp(a));
        let mut prefix_sq = Vec::with_capacity(values.len());
        let mut prefix_lin = Vec::with_capacity(values.len());
        let (mut sq, mut lin) = (0.0, 0.0);
        for &v in &values {
            sq += v * v;
            lin += v;
            prefix_sq.push(sq);
            prefix_lin.push(lin);
        }
        Ok(Self {
            s: values,
            prefix_sq,
            prefix_lin,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `sum_{i <= p} s(i)^2`.
    pub fn prefix_sq(&self, p: usize) -> f64 {
        if p == 0 {
            0.0
        } else {
            self.prefix_sq[p - 1]
        }
    }

    /// `sum_{i <= p} s(i)`.
    pub fn prefix_lin(&self, p: usize) -> f64 {
        if p == 0 {
            0.0
        } else {
            self.prefix_lin[p - 1]
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.prefix_sq(self.len())
    }

    /// `1 / max |u_k(n)|^2`.
    pub fn classical_bound(&self) -> f64 {
        1.0 / (self.s[0] * self.s[0])
    }

    /// Candidate bound built from the `p` largest magnitudes.
    pub fn qn(&self, p: usize, variant: Variant) -> Result<f64, BoundError> {
        if p == 0 || p > self.len() {
            return Err(BoundError::PrefixOutOfRange { p, len: self.len() });
        }
        let pf = p as f64;
        Ok(match variant {
            Variant::Squared => pf / self.prefix_sq(p),
            Variant::Linear => {
                let avg = self.prefix_lin(p) / pf;
                1.0 / (avg * avg)
            }
        })
    }

    /// Smallest `p` with `p >= qn(p)`, found by scanning `p = 1, 2, ...`.
    pub fn direct_search(&self, variant: Variant) -> Result<(usize, f64), BoundError> {
        for p in 1..=self.len() {
            let q = self.qn(p, variant)?;
            if p as f64 >= q - CEIL_GUARD {
                return Ok((p, q));
            }
        }
        Err(BoundError::NoFixedPoint(self.len()))
    }

    /// The iterative algorithm started from the classical bound.
    pub fn iterate(&self, variant: Variant) -> Result<FixedPoint, BoundError> {
        fixed_point_iteration(self.classical_bound(), self.len(), |p| self.qn(p, variant))
    }

    /// Sum bound `||x||_0 + ||X||_0 >= 2 / avg(s(1..P))` with `P` the linear fixed point.
    pub fn sum_bound(&self) -> Result<f64, BoundError> {
        let (p, _) = self.direct_search(Variant::Linear)?;
        Ok(2.0 * p as f64 / self.prefix_lin(p))
    }

    /// Full report for a basis of dimension `n`.
    pub fn report(&self, n: usize, variant: Variant) -> Result<BoundReport, BoundError> {
        let fp = self.iterate(variant)?;
        Ok(BoundReport {
            n,
            variant,
            classical_q: self.classical_bound(),
            improved_q: fp.bound,
            sum_bound: self.sum_bound()?,
            iterations: fp.iterations,
            s_prefix: self.s.iter().take(S_PREFIX_LEN).copied().collect(),
            terminated: fp.terminated,
            clamped: fp.clamped,
        })
    }
}

/// `ceil(q - CEIL_GUARD)`, never below 1.
pub fn guarded_ceil(q: f64) -> usize {
    (q - CEIL_GUARD).ceil().max(1.0) as usize
}

/// Stop test of the iteration: the candidate product already satisfies its own bound.
pub fn should_stop(ceil_q: usize, q_n: f64) -> bool {
    ceil_q as f64 >= q_n - CEIL_GUARD
}

/// One recalculation step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStep {
    pub ceil_q: usize,
    pub q_n: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    pub bound: f64,
    pub ceil_q: usize,
    pub iterations: Vec<IterationStep>,
    pub terminated: bool,
    pub clamped: bool,
}

/// Runs `Q <- qn(ceil(Q))` from `start_q` until `ceil(Q) >= qn(ceil(Q))`.
///
/// `qn` is any candidate-bound oracle; `limit` is the largest admissible
/// product. A `ceil(Q)` beyond `limit` is clamped to it; if the clamped
/// candidate still fails the stop test the result is returned with
/// `terminated == false`.
pub fn fixed_point_iteration(
    start_q: f64,
    limit: usize,
    mut qn: impl FnMut(usize) -> Result<f64, BoundError>,
) -> Result<FixedPoint, BoundError> {
    let mut q = start_q;
    let mut iterations = Vec::new();
    let mut clamped = false;
    loop {
        if iterations.len() > limit {
            return Err(BoundError::IterationLimit(limit));
        }
        let mut ceil_q = guarded_ceil(q);
        if ceil_q > limit {
            ceil_q = limit;
            clamped = true;
        }
        let q_n = qn(ceil_q)?;
        iterations.push(IterationStep { ceil_q, q_n });
        if should_stop(ceil_q, q_n) || ceil_q == limit {
            return Ok(FixedPoint {
                bound: q_n,
                ceil_q,
                iterations,
                terminated: should_stop(ceil_q, q_n),
                clamped,
            });
        }
        q = q_n;
    }
}

/// Result of the classical and improved bound computations for one basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub variant: Variant,
    pub classical_q: f64,
    pub improved_q: f64,
    pub sum_bound: f64,
    pub iterations: Vec<IterationStep>,
    pub s_prefix: Vec<f64>,
    pub terminated: bool,
    pub clamped: bool,
}

#[derive(Serialize)]
struct BoundReportJson<'a> {
    n: usize,
    variant: Variant,
    classical_q: f64,
    improved_q: f64,
    sum_bound: f64,
    iterations: &'a [IterationStep],
    s_prefix: &'a [f64],
}

impl BoundReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(BoundReportJson {
            n: self.n,
            variant: self.variant,
            classical_q: self.classical_q,
            improved_q: self.improved_q,
            sum_bound: self.sum_bound,
            iterations: &self.iterations,
            s_prefix: &self.s_prefix,
        })
        .expect("report serializes")
    }

    /// `{n, variant, classical_q, improved_q, sum_bound, iterations, s_prefix}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes")
    }
}

pub fn sorted_magnitudes(basis: &SpectralBasis) -> Result<SortedMagnitudes, BoundError> {
    SortedMagnitudes::from_basis(basis)
}

pub fn classical_bound(basis: &SpectralBasis) -> Result<f64, BoundError> {
    Ok(sorted_magnitudes(basis)?.classical_bound())
}

pub fn qn(s: &SortedMagnitudes, p: usize, variant: Variant) -> Result<f64, BoundError> {
    s.qn(p, variant)
}

pub fn direct_search_bound(
    s: &SortedMagnitudes,
    variant: Variant,
) -> Result<(usize, f64), BoundError> {
    s.direct_search(variant)
}

pub fn improved_bound(basis: &SpectralBasis, variant: Variant) -> Result<BoundReport, BoundError> {
    sorted_magnitudes(basis)?.report(basis.n(), variant)
}

pub fn sum_bound(basis: &SpectralBasis) -> Result<f64, BoundError> {
    sorted_magnitudes(basis)?.sum_bound()
}

/// `|M||K| / sum_{n in M, k in K} |u_k(n)|^2` for given support sets.
pub fn signal_dependent_bound(
    basis: &SpectralBasis,
    m_set: &BTreeSet<usize>,
    k_set: &BTreeSet<usize>,
) -> Result<f64, BoundError> {
    if m_set.is_empty() {
        return Err(BoundError::EmptySet("vertex"));
    }
    if k_set.is_empty() {
        return Err(BoundError::EmptySet("spectral"));
    }
    let n = basis.n();
    if let Some(&index) = m_set.iter().chain(k_set).find(|&&i| i >= n) {
        return Err(BoundError::IndexOutOfRange { index, n });
    }
    let mut energy = 0.0;
    for &v in m_set {
        for &k in k_set {
            let m = basis.magnitude(v, k);
            energy += m * m;
        }
    }
    Ok((m_set.len() * k_set.len()) as f64 / energy)
}
