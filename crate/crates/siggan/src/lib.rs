//! Conditional-GAN augmentation for 1D machining vibration signals.
//!
//! The crate bundles a small from-scratch neural-network engine (dense,
//! conv1d and transposed-conv1d layers with exact hand-derived gradients),
//! spectral machinery (radix-2 FFT, STFT, Morlet wavelet coherence), five
//! conditional-GAN variants trained with a strict two-phase schedule, a
//! synthetic vibration dataset with a known label-amplitude coupling, and a
//! downstream augmentation benchmark (ridge, MLP and 1D-CNN regressors over
//! a surface-roughness target).
//!
//! Entry points:
//! * [`data::synth_dataset`] builds the synthetic corpus.
//! * [`gan::train`] trains any of the five variants.
//! * [`spectral::wavelet_coherence`] scores generated-vs-real similarity.
//! * [`bench::run_sweep`] measures prediction error across augmentation scales.
//! * [`cli`] exposes the same flows as subcommands for the `siggan` binary.

// the numeric kernels keep explicit index loops so the code lines up with
// the derivations they implement
#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod gan;
pub mod nn;
pub mod spectral;

pub use error::{Error, Result};
