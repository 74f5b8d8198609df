//! Graph Fourier spectra, the graph Rihaczek distribution and support
//! uncertainty bounds for graph signals.
//!
//! The pipeline is `graph` (edge lists, Laplacian) → `spectral` (Jacobi
//! eigenbasis, GFT) → `bounds` (classical and improved support bounds), with
//! `rihaczek` for the vertex-frequency energy distribution and `oracle` for
//! brute-force verification on small graphs.

pub mod bounds;
pub mod cli;
pub mod graph;
pub mod matrix;
pub mod oracle;
pub mod rihaczek;
pub mod spectral;

pub use bounds::{BoundReport, SortedMagnitudes, Variant};
pub use graph::{Edge, Graph};
pub use matrix::{DenseMatrix, Matrix};
pub use rihaczek::{Convention, EnergyDistribution};
pub use spectral::{GraphSignal, SpectralBasis, Spectrum};
