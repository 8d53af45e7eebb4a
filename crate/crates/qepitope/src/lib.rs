//! Quantum machine-learning toolkit for B-cell epitope classification.
//!
//! Two classifiers run on a dense statevector simulator: a quantum-kernel
//! SVM (fidelity kernel plus a pairwise dual solver) and a variational
//! quantum classifier (feature map, trainable ansatz, parameter-shift
//! gradients). A peptide pipeline turns labeled sequences into angle
//! features, and an evaluation layer reports ACC, AUC, and MCC.

pub mod circuits;
pub mod cli;
pub mod datagen;
pub mod dualsvm;
pub mod encode;
pub mod error;
pub mod metrics;
pub mod mode;
mod persist;
pub mod qkernel;
pub mod report;
pub mod seeds;
pub mod statevector;
pub mod vqc;

pub use error::{Error, Result};
pub use mode::ShotMode;
