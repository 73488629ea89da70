//! Convolution-filter quantum autoencoder.
//!
//! Images are denoised by encoding pixels as Ising spins, learning the
//! pairwise couplings that make the clean image a ground state, and then
//! searching for the ground state of the noisy-image Hamiltonian with a
//! Trotterized adiabatic circuit on a dense statevector simulator.
//!
//! The crate is organized bottom-up:
//!
//! * [`qsim`]: statevector simulator for the handful of gates the annealer needs.
//! * [`adiabatic`]: Ising problems, the annealing circuit and a brute-force oracle.
//! * [`autoencoder`]: whole-image training (coupling updates) and denoising.
//! * [`convfilter`]: the 3×3 sliding filter that keeps every solve at 9 qubits.
//! * [`dimred`]: coupling-based 2-D features, a PCA baseline and a centroid classifier.
//! * [`pipeline`]: file formats, experiment drivers and the runtime benchmark.

pub mod adiabatic;
pub mod autoencoder;
pub mod convfilter;
pub mod dimred;
mod error;
pub mod pipeline;
pub mod qsim;
pub(crate) mod seeds;

pub use error::{Error, Result};
