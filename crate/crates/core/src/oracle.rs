//! Brute-force checks of the support bounds.
//!
//! A pair of supports `(M, K)` is feasible when some nonzero spectrum supported
//! in `K` synthesizes a signal that vanishes outside `M`, i.e. when the
//! submatrix of `U` with rows outside `M` and columns in `K` is rank deficient.
//! The smallest feasible `|M| |K|` is the true minimum of `||x||_0 ||X||_0`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{
    guarded_ceil, signal_dependent_bound, BoundError, SortedMagnitudes, Variant, CEIL_GUARD,
};
use crate::spectral::{gft, igft, GraphSignal, SpectralBasis, SpectralError, Spectrum};

/// Pivot tolerance of the rank test, relative to the largest pivot.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Looser tolerance used to flag decisions that depend on the tolerance.
pub const MARGINAL_RANK_TOL: f64 = 1e-7;
/// Entries below this fraction of the largest magnitude count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;
/// Largest dimension accepted by [`support_feasible`].
pub const MAX_FEASIBILITY_N: usize = 12;
/// Largest dimension accepted by [`min_feasible_product`].
pub const MAX_EXHAUSTIVE_N: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension {n} exceeds the limit {limit} for exhaustive checks")]
    TooLarge { n: usize, limit: usize },
    #[error("rank tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("empty {0} support set")]
    EmptySet(&'static str),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("number of trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Vertex support `M` and spectral support `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportPair {
    m_set: BTreeSet<usize>,
    k_set: BTreeSet<usize>,
}

impl SupportPair {
    pub fn new(
        m_set: BTreeSet<usize>,
        k_set: BTreeSet<usize>,
        n: usize,
    ) -> Result<Self, OracleError> {
        if m_set.is_empty() {
            return Err(OracleError::EmptySet("vertex"));
        }
        if k_set.is_empty() {
            return Err(OracleError::EmptySet("spectral"));
        }
        if let Some(&index) = m_set.iter().chain(&k_set).find(|&&i| i >= n) {
            return Err(OracleError::IndexOutOfRange { index, n });
        }
        Ok(Self { m_set, k_set })
    }

    pub fn m_set(&self) -> &BTreeSet<usize> {
        &self.m_set
    }

    pub fn k_set(&self) -> &BTreeSet<usize> {
        &self.k_set
    }

    pub fn product(&self) -> usize {
        self.m_set.len() * self.k_set.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    /// The answer flips between the requested tolerance and [`MARGINAL_RANK_TOL`].
    pub marginal: bool,
}

/// Numerical rank by Gaussian elimination with complete pivoting.
///
/// A pivot counts as zero once it falls below `tol` times the first (largest) pivot.
pub fn rank(mut rows: Vec<Vec<Complex64>>, tol: f64) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut first_pivot = None;
    let mut r = 0;
    while r < nrows.min(ncols) {
        let (mut pr, mut pc, mut best) = (r, r, 0.0f64);
        for (i, row) in rows.iter().enumerate().skip(r) {
            for (j, z) in row.iter().enumerate().skip(r) {
                if z.norm() > best {
                    (pr, pc, best) = (i, j, z.norm());
                }
            }
        }
        let reference = *first_pivot.get_or_insert(best);
        if best == 0.0 || best <= tol * reference {
            break;
        }
        rows.swap(r, pr);
        for row in rows.iter_mut() {
            row.swap(r, pc);
        }
        let pivot = rows[r][r];
        let (head, tail) = rows.split_at_mut(r + 1);
        let prow = &head[r];
        for row in tail.iter_mut() {
            let factor = row[r] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (x, p) in row.iter_mut().zip(prow).skip(r) {
                *x -= factor * p;
            }
        }
        r += 1;
    }
    r
}

fn infeasibility_matrix(basis: &SpectralBasis, pair: &SupportPair) -> Vec<Vec<Complex64>> {
    (0..basis.n())
        .filter(|v| !pair.m_set.contains(v))
        .map(|v| pair.k_set.iter().map(|&k| basis.entry(v, k)).collect())
        .collect()
}

fn check_size(n: usize, limit: usize) -> Result<(), OracleError> {
    if n > limit {
        Err(OracleError::TooLarge { n, limit })
    } else {
        Ok(())
    }
}

/// Whether a nonzero signal with `supp(x) ⊆ M` and `supp(X) ⊆ K` exists.
pub fn support_feasible(
    basis: &SpectralBasis,
    pair: &SupportPair,
    tol: f64,
) -> Result<Feasibility, OracleError> {
    check_size(basis.n(), MAX_FEASIBILITY_N)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(OracleError::InvalidTolerance(tol));
    }
    if let Some(&index) = pair.m_set.iter().chain(&pair.k_set).find(|&&i| i >= basis.n()) {
        return Err(OracleError::IndexOutOfRange { index, n: basis.n() });
    }
    let rows = infeasibility_matrix(basis, pair);
    let k = pair.k_set.len();
    let feasible = rank(rows.clone(), tol) < k;
    let loose = rank(rows, MARGINAL_RANK_TOL) < k;
    Ok(Feasibility {
        feasible,
        marginal: feasible != loose,
    })
}

/// Lexicographic `k`-subsets of `0..n`.
fn combinations(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    fn walk(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<usize>>) {
        if cur.len() == k {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            walk(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinFeasible {
    pub product: usize,
    pub witness: SupportPair,
    /// Marginal feasibility decisions met during the enumeration.
    pub marginal_count: usize,
}

/// Smallest feasible `|M| |K|`, by enumeration in increasing product order.
pub fn min_feasible_product(basis: &SpectralBasis, tol: f64) -> Result<MinFeasible, OracleError> {
    let n = basis.n();
    check_size(n, MAX_EXHAUSTIVE_N)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(OracleError::InvalidTolerance(tol));
    }
    let subsets: Vec<Vec<BTreeSet<usize>>> = (0..=n).map(|k| combinations(n, k)).collect();
    let mut marginal_count = 0;
    for product in 1..=n * n {
        for m_size in (1..=n).filter(|m| product % m == 0) {
            let k_size = product / m_size;
            if k_size > n {
                continue;
            }
            for m_set in &subsets[m_size] {
                for k_set in &subsets[k_size] {
                    let pair = SupportPair {
                        m_set: m_set.clone(),
                        k_set: k_set.clone(),
                    };
                    let f = support_feasible(basis, &pair, tol)?;
                    marginal_count += usize::from(f.marginal);
                    if f.feasible {
                        return Ok(MinFeasible {
                            product,
                            witness: pair,
                            marginal_count,
                        });
                    }
                }
            }
        }
    }
    unreachable!("M = all vertices with a single spectral index is always feasible")
}

/// Supports of `x` and `X`, counting entries above `threshold * max` magnitude.
pub fn supports(
    x: &GraphSignal,
    spectrum: &Spectrum,
    threshold: f64,
) -> (BTreeSet<usize>, BTreeSet<usize>) {
    fn support(values: &[Complex64], threshold: f64) -> BTreeSet<usize> {
        let max = values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        values
            .iter()
            .enumerate()
            .filter(|(_, z)| max > 0.0 && z.norm() > threshold * max)
            .map(|(i, _)| i)
            .collect()
    }
    (support(&x.0, threshold), support(&spectrum.0, threshold))
}

/// Outcome of [`random_signal_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomCheckReport {
    pub trials: usize,
    pub seed: u64,
    pub bound_squared: f64,
    pub bound_linear: f64,
    pub min_product: usize,
    pub violations_squared: usize,
    pub violations_linear: usize,
    pub violations_signal_dependent: usize,
}

impl RandomCheckReport {
    pub fn violations(&self) -> usize {
        self.violations_squared + self.violations_linear + self.violations_signal_dependent
    }
}

fn random_coefficient(rng: &mut ChaCha8Rng, complex: bool) -> Complex64 {
    let magnitude = rng.gen_range(0.5..1.5);
    if complex {
        Complex64::from_polar(magnitude, rng.gen_range(0.0..std::f64::consts::TAU))
    } else if rng.gen_bool(0.5) {
        Complex64::new(magnitude, 0.0)
    } else {
        Complex64::new(-magnitude, 0.0)
    }
}

/// Draws random sparse signals and checks that no support product falls below
/// the computed bounds.
///
/// Even trials are sparse in the spectral domain, odd trials in the vertex
/// domain. Trial `t` uses stream `t` of a ChaCha generator keyed by `seed`, so
/// results do not depend on evaluation order.
pub fn random_signal_check(
    basis: &SpectralBasis,
    trials: usize,
    seed: u64,
) -> Result<RandomCheckReport, OracleError> {
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    let n = basis.n();
    let sorted = SortedMagnitudes::from_basis(basis)?;
    let bound_squared = sorted.iterate(Variant::Squared)?.bound;
    let bound_linear = sorted.iterate(Variant::Linear)?.bound;
    let complex = !basis.is_real();
    let max_size = (n / 2).max(1);

    let mut report = RandomCheckReport {
        trials,
        seed,
        bound_squared,
        bound_linear,
        min_product: usize::MAX,
        violations_squared: 0,
        violations_linear: 0,
        violations_signal_dependent: 0,
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let size = rng.gen_range(1..=max_size);
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for i in sample(&mut rng, n, size) {
            values[i] = random_coefficient(&mut rng, complex);
        }
        let (x, spectrum) = if trial % 2 == 0 {
            let spectrum = Spectrum(values);
            (igft(basis, &spectrum)?, spectrum)
        } else {
            let x = GraphSignal(values);
            let spectrum = gft(basis, &x)?;
            (x, spectrum)
        };
        let (m_set, k_set) = supports(&x, &spectrum, SUPPORT_THRESHOLD);
        let product = m_set.len() * k_set.len();
        report.min_product = report.min_product.min(product);
        let p = product as f64;
        if p < bound_squared - CEIL_GUARD {
            report.violations_squared += 1;
        }
        if p < bound_linear - CEIL_GUARD {
            report.violations_linear += 1;
        }
        if p < signal_dependent_bound(basis, &m_set, &k_set)? - CEIL_GUARD {
            report.violations_signal_dependent += 1;
        }
    }
    Ok(report)
}

/// Oracle summary written by the command-line tool.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub min_feasible_product: usize,
    pub bound_squared: f64,
    pub bound_linear: f64,
    pub violations: usize,
    pub marginal_count: usize,
    pub seed: u64,
}

/// Exhaustive comparison of the true minimum against both iterative bounds.
pub fn exhaustive_report(basis: &SpectralBasis, tol: f64, seed: u64) -> Result<OracleReport, OracleError> {
    let min = min_feasible_product(basis, tol)?;
    let sorted = SortedMagnitudes::from_basis(basis)?;
    let bound_squared = sorted.iterate(Variant::Squared)?.bound;
    let bound_linear = sorted.iterate(Variant::Linear)?.bound;
    let violations = [bound_squared, bound_linear]
        .iter()
        .filter(|&&b| min.product < guarded_ceil(b))
        .count();
    Ok(OracleReport {
        n: basis.n(),
        min_feasible_product: min.product,
        bound_squared,
        bound_linear,
        violations,
        marginal_count: min.marginal_count,
        seed,
    })
}

/// Randomized summary in the same layout; `min_feasible_product` holds the
/// smallest product observed.
pub fn randomized_report(basis: &SpectralBasis, trials: usize, seed: u64) -> Result<OracleReport, OracleError> {
    let r = random_signal_check(basis, trials, seed)?;
    Ok(OracleReport {
        n: basis.n(),
        min_feasible_product: r.min_product,
        bound_squared: r.bound_squared,
        bound_linear: r.bound_linear,
        violations: r.violations(),
        marginal_count: 0,
        seed,
    })
}
