//! Graph Rihaczek vertex-frequency energy distribution.
//!
//! Graph convention: `E(n,k) = x(n) X(k) u_k(n)`, computed literally.
//! Classical convention: `E(n,k) = x(n) X*(k) u*_k(n)`.
//! The two coincide for real bases and real signals. The input signal is
//! normalized to unit energy first and the original norm is kept as `scale`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::spectral::{fmt_complex, fmt_f64, gft, GraphSignal, SpectralBasis, SpectralError, Spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RihaczekError {
    #[error("zero-energy signal")]
    ZeroSignal,
    #[error("signal has non-finite entries")]
    NonFinite,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Graph,
    Classical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyDistribution {
    convention: Convention,
    entries: Matrix<Complex64>,
    signal: GraphSignal,
    spectrum: Spectrum,
    scale: f64,
    max_magnitude: f64,
    real: bool,
}

pub fn rihaczek(
    basis: &SpectralBasis,
    x: &GraphSignal,
    convention: Convention,
) -> Result<EnergyDistribution, RihaczekError> {
    if x.0.iter().any(|z| !z.is_finite()) {
        return Err(RihaczekError::NonFinite);
    }
    let scale = x.energy().sqrt();
    if scale == 0.0 {
        // Dimension errors take precedence over the zero check.
        gft(basis, x)?;
        return Err(RihaczekError::ZeroSignal);
    }
    let signal = GraphSignal(x.0.iter().map(|z| z / scale).collect());
    let spectrum = gft(basis, &signal)?;
    let n = basis.n();
    let entries = Matrix::from_fn(n, n, |v, k| {
        let u = basis.entry(v, k);
        match convention {
            Convention::Graph => signal.0[v] * spectrum.0[k] * u,
            Convention::Classical => signal.0[v] * spectrum.0[k].conj() * u.conj(),
        }
    });
    let mut max_magnitude = 0.0f64;
    for v in 0..n {
        for k in 0..n {
            max_magnitude = max_magnitude.max(basis.magnitude(v, k));
        }
    }
    Ok(EnergyDistribution {
        convention,
        entries,
        real: basis.is_real() && x.is_real(),
        signal,
        spectrum,
        scale,
        max_magnitude,
    })
}

impl EnergyDistribution {
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn entries(&self) -> &Matrix<Complex64> {
        &self.entries
    }

    /// `E(vertex, k)`.
    pub fn get(&self, vertex: usize, k: usize) -> Complex64 {
        self.entries[(vertex, k)]
    }

    /// The unit-energy signal the distribution was built from.
    pub fn signal(&self) -> &GraphSignal {
        &self.signal
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Norm of the input signal; multiply entries by `scale^2` to un-normalize.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True when the basis and signal are both real, so every entry is real.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `sum_n sum_k E(n,k)`.
    pub fn total(&self) -> Complex64 {
        self.entries.as_slice().iter().sum()
    }

    /// `sum_k E(n,k)` for every vertex.
    pub fn vertex_marginal(&self) -> GraphSignal {
        GraphSignal(
            (0..self.n())
                .map(|v| self.entries.row(v).iter().sum())
                .collect(),
        )
    }

    /// `sum_n E(n,k)` for every spectral index.
    pub fn spectral_marginal(&self) -> Spectrum {
        let n = self.n();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for v in 0..n {
            for (acc, e) in out.iter_mut().zip(self.entries.row(v)) {
                *acc += e;
            }
        }
        Spectrum(out)
    }

    /// Largest deviations of the vertex and spectral marginals from `|x(n)|^2` and `|X(k)|^2`.
    pub fn marginal_residuals(&self) -> (f64, f64) {
        let worst = |marginal: &[Complex64], values: &[Complex64]| {
            marginal
                .iter()
                .zip(values)
                .map(|(m, z)| (m - z.norm_sqr()).norm())
                .fold(0.0f64, f64::max)
        };
        (
            worst(&self.vertex_marginal().0, &self.signal.0),
            worst(&self.spectral_marginal().0, &self.spectrum.0),
        )
    }

    /// `sum_n sum_k |E(n,k)|`.
    pub fn l1_norm(&self) -> f64 {
        self.entries.as_slice().iter().map(|z| z.norm()).sum()
    }

    /// `max |u_k(n)| * ||x||_1 * ||X||_1`, the upper end of the l1 sandwich.
    pub fn l1_upper_bound(&self) -> f64 {
        let l1 = |values: &[Complex64]| values.iter().map(|z| z.norm()).sum::<f64>();
        self.max_magnitude * l1(&self.signal.0) * l1(&self.spectrum.0)
    }

    fn format_entry(&self, z: Complex64) -> String {
        if self.real {
            fmt_f64(z.re)
        } else {
            fmt_complex(z)
        }
    }

    /// Rows are vertices, columns spectral indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for v in 0..self.n() {
            let row: Vec<String> = self.entries.row(v).iter().map(|&z| self.format_entry(z)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// `{n, convention, entries}`; complex entries are `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let entries: Vec<serde_json::Value> = (0..self.n())
            .map(|v| {
                self.entries
                    .row(v)
                    .iter()
                    .map(|z| {
                        if self.real {
                            serde_json::json!(z.re)
                        } else {
                            serde_json::json!([z.re, z.im])
                        }
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({
            "n": self.n(),
            "convention": self.convention,
            "entries": entries,
        });
        serde_json::to_string(&doc).expect("distribution serializes")
    }
}
