//! Orthonormal spectral bases, the graph Fourier transform and the DFT special case.
//!
//! Laplacian bases come from [`eig_sym`], a cyclic Jacobi solver. Rotations are
//! scheduled in round-robin rounds of disjoint index pairs; within a round the
//! rotations commute, so each round is applied as one row pass followed by one
//! column pass over the matrix. The schedule is fixed, which makes the output
//! bit-for-bit reproducible.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::{DenseMatrix, Matrix};

/// Default relative off-diagonal tolerance for [`eig_sym`].
pub const DEFAULT_EIG_TOL: f64 = 1e-12;
/// Sweep budget for [`eig_sym`].
pub const MAX_SWEEPS: usize = 50;
/// Allowed asymmetry of an [`eig_sym`] input, relative to its Frobenius norm.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Transformation matrix entries `u_k(n)`; column `k` is basis vector `k`.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisMatrix {
    Real(DenseMatrix),
    Complex(Matrix<Complex64>),
}

/// An orthonormal basis together with its eigenvalues (or index placeholders).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBasis {
    n: usize,
    u: BasisMatrix,
    lambda: Vec<f64>,
}

impl SpectralBasis {
    /// Wraps a real square matrix whose columns are the basis vectors.
    pub fn from_real(u: DenseMatrix, lambda: Vec<f64>) -> Result<Self, SpectralError> {
        Self::checked(u.rows(), u.cols(), u.all_finite(), BasisMatrix::Real(u), lambda)
    }

    /// Wraps a complex square matrix whose columns are the basis vectors.
    pub fn from_complex(u: Matrix<Complex64>, lambda: Vec<f64>) -> Result<Self, SpectralError> {
        let finite = u.as_slice().iter().all(|z| z.is_finite());
        Self::checked(u.rows(), u.cols(), finite, BasisMatrix::Complex(u), lambda)
    }

    fn checked(
        rows: usize,
        cols: usize,
        finite: bool,
        u: BasisMatrix,
        lambda: Vec<f64>,
    ) -> Result<Self, SpectralError> {
        if rows == 0 {
            return Err(SpectralError::Empty);
        }
        if rows != cols {
            return Err(SpectralError::NotSquare(rows, cols));
        }
        if !finite {
            return Err(SpectralError::NonFinite);
        }
        if lambda.len() != rows {
            return Err(SpectralError::DimensionMismatch {
                expected: rows,
                found: lambda.len(),
            });
        }
        Ok(Self { n: rows, u, lambda })
    }

    /// The identity basis, `U = I`.
    pub fn identity(n: usize) -> Result<Self, SpectralError> {
        Self::from_real(DenseMatrix::identity(n), (0..n).map(|k| k as f64).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &BasisMatrix {
        &self.u
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn is_real(&self) -> bool {
        matches!(self.u, BasisMatrix::Real(_))
    }

    /// `u_k(vertex)`.
    pub fn entry(&self, vertex: usize, k: usize) -> Complex64 {
        match &self.u {
            BasisMatrix::Real(m) => Complex64::new(m[(vertex, k)], 0.0),
            BasisMatrix::Complex(m) => m[(vertex, k)],
        }
    }

    /// `|u_k(vertex)|`.
    pub fn magnitude(&self, vertex: usize, k: usize) -> f64 {
        match &self.u {
            BasisMatrix::Real(m) => m[(vertex, k)].abs(),
            BasisMatrix::Complex(m) => m[(vertex, k)].norm(),
        }
    }

    /// Basis vector `k` as a signal.
    pub fn column(&self, k: usize) -> GraphSignal {
        GraphSignal((0..self.n).map(|v| self.entry(v, k)).collect())
    }

    /// One basis vector per CSV column, preceded by a header row of eigenvalues.
    /// Numbers carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.lambda.iter().map(|&l| fmt_f64(l)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for v in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|k| match &self.u {
                    BasisMatrix::Real(m) => fmt_f64(m[(v, k)]),
                    BasisMatrix::Complex(m) => fmt_complex(m[(v, k)]),
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Scientific notation with 17 significant digits; negative zero prints as zero.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// `re+imi` with 17 significant digits per part.
pub fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{}{}{}i", fmt_f64(z.re), sign, fmt_f64(z.im))
}

/// Vertex-domain signal `x(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSignal(pub Vec<Complex64>);

/// Spectral-domain coefficients `X(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum(pub Vec<Complex64>);

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn energy(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm_sqr()).sum()
}

impl GraphSignal {
    pub fn from_real(values: &[f64]) -> Self {
        Self(to_complex(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn energy(&self) -> f64 {
        energy(&self.0)
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

impl Spectrum {
    pub fn from_real(values: &[f64]) -> Self {
        Self(to_complex(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn energy(&self) -> f64 {
        energy(&self.0)
    }
}

/// Forward transform `X = U^H x`.
pub fn gft(basis: &SpectralBasis, x: &GraphSignal) -> Result<Spectrum, SpectralError> {
    let n = basis.n();
    if x.len() != n {
        return Err(SpectralError::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    match &basis.u {
        BasisMatrix::Real(m) => {
            for (v, xv) in x.0.iter().enumerate() {
                for (acc, &u) in out.iter_mut().zip(m.row(v)) {
                    *acc += xv * u;
                }
            }
        }
        BasisMatrix::Complex(m) => {
            for (v, xv) in x.0.iter().enumerate() {
                for (acc, u) in out.iter_mut().zip(m.row(v)) {
                    *acc += u.conj() * xv;
                }
            }
        }
    }
    Ok(Spectrum(out))
}

/// Inverse transform `x = U X`.
pub fn igft(basis: &SpectralBasis, spectrum: &Spectrum) -> Result<GraphSignal, SpectralError> {
    let n = basis.n();
    if spectrum.len() != n {
        return Err(SpectralError::DimensionMismatch {
            expected: n,
            found: spectrum.len(),
        });
    }
    let out = (0..n)
        .map(|v| match &basis.u {
            BasisMatrix::Real(m) => m.row(v).iter().zip(&spectrum.0).map(|(&u, c)| c * u).sum(),
            BasisMatrix::Complex(m) => m.row(v).iter().zip(&spectrum.0).map(|(u, c)| u * c).sum(),
        })
        .collect();
    Ok(GraphSignal(out))
}

/// Largest entry magnitude of `U^H U - I`.
pub fn orthonormality_error(basis: &SpectralBasis) -> f64 {
    let n = basis.n();
    let mut worst = 0.0f64;
    match &basis.u {
        BasisMatrix::Real(m) => {
            let t = m.transpose();
            for a in 0..n {
                for b in a..n {
                    let dot: f64 = t.row(a).iter().zip(t.row(b)).map(|(x, y)| x * y).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((dot - target).abs());
                }
            }
        }
        BasisMatrix::Complex(m) => {
            let t = m.transpose();
            for a in 0..n {
                for b in a..n {
                    let dot: Complex64 = t.row(a).iter().zip(t.row(b)).map(|(x, y)| x.conj() * y).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((dot - target).norm());
                }
            }
        }
    }
    worst
}

/// Unitary DFT basis `u_k(n) = exp(j 2 pi n k / N) / sqrt(N)`.
///
/// The eigenvalue slots hold the frequency index `k`.
pub fn dft_basis(n: usize) -> Result<SpectralBasis, SpectralError> {
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    let scale = 1.0 / (n as f64).sqrt();
    let u = Matrix::from_fn(n, n, |v, k| {
        // Reduce n*k mod N first to keep the angle small and exact.
        let phase = 2.0 * PI * ((v * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    });
    SpectralBasis::from_complex(u, (0..n).map(|k| k as f64).collect())
}

/// Round-robin schedule: every unordered pair appears exactly once per sweep,
/// and the pairs inside one round are disjoint.
fn round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n < 2 {
        return Vec::new();
    }
    let m = n + n % 2;
    let mut ring: Vec<usize> = (0..m).collect();
    let mut rounds = Vec::with_capacity(m - 1);
    for _ in 0..(m - 1) {
        let pairs = (0..m / 2)
            .map(|i| (ring[i], ring[m - 1 - i]))
            .filter(|&(a, b)| a < n && b < n)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        rounds.push(pairs);
        ring[1..].rotate_right(1);
    }
    rounds
}

fn max_off_diagonal(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for (c, v) in a.row(r).iter().enumerate() {
            if c != r {
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    t: f64,
    apq: f64,
    app: f64,
    aqq: f64,
}

fn rotate_rows(m: &mut DenseMatrix, rot: &Rotation) {
    let (rp, rq) = m.two_rows_mut(rot.p, rot.q);
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = rot.c * a - rot.s * b;
        *y = rot.s * a + rot.c * b;
    }
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Stops once every off-diagonal magnitude is below `tol * ||m||_F`. Eigenpairs
/// are sorted by ascending eigenvalue (stable on ties) and every eigenvector is
/// signed so that its largest-magnitude entry is positive, the lowest index
/// winning ties.
pub fn eig_sym(m: &DenseMatrix, tol: f64) -> Result<SpectralBasis, SpectralError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(SpectralError::InvalidTolerance(tol));
    }
    let n = m.rows();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    if !m.is_square() {
        return Err(SpectralError::NotSquare(m.rows(), m.cols()));
    }
    if !m.all_finite() {
        return Err(SpectralError::NonFinite);
    }
    let norm = m.frobenius_norm();
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOL * norm {
        return Err(SpectralError::NotSymmetric(asym));
    }

    let mut a = DenseMatrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)] + m[(c, r)]));
    // Rows of `vt` are the eigenvectors, so column updates of V become row updates.
    let mut vt = DenseMatrix::identity(n);
    let threshold = tol * norm;
    let rounds = round_robin(n);
    let mut rotations = Vec::with_capacity(n / 2);

    let mut sweep = 0;
    loop {
        let off = max_off_diagonal(&a);
        if off < threshold || off == 0.0 {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(SpectralError::NoConvergence { sweeps: sweep, off });
        }
        for round in &rounds {
            rotations.clear();
            for &(p, q) in round {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                rotations.push(Rotation {
                    p,
                    q,
                    c,
                    s: t * c,
                    t,
                    apq,
                    app,
                    aqq,
                });
            }
            if rotations.is_empty() {
                continue;
            }
            for rot in &rotations {
                rotate_rows(&mut a, rot);
                rotate_rows(&mut vt, rot);
            }
            for r in 0..n {
                let row = a.row_mut(r);
                for rot in &rotations {
                    let (x, y) = (row[rot.p], row[rot.q]);
                    row[rot.p] = rot.c * x - rot.s * y;
                    row[rot.q] = rot.s * x + rot.c * y;
                }
            }
            // The rotated 2x2 blocks are known in closed form; the other
            // rotations of the round never touch them.
            for rot in &rotations {
                let (p, q) = (rot.p, rot.q);
                a[(p, p)] = rot.app - rot.t * rot.apq;
                a[(q, q)] = rot.aqq + rot.t * rot.apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
        sweep += 1;
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let mut u = DenseMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let vec = vt.row(src);
        let mut lead = 0;
        for (i, v) in vec.iter().enumerate() {
            if v.abs() > vec[lead].abs() {
                lead = i;
            }
        }
        let sign = if vec[lead] < 0.0 { -1.0 } else { 1.0 };
        for (i, v) in vec.iter().enumerate() {
            u[(i, k)] = sign * v;
        }
    }
    let lambda = order.iter().map(|&i| diag[i]).collect();
    SpectralBasis::from_real(u, lambda)
}
