//! Computational ultrametric geometry on finite spaces.
//!
//! The crate works with finite metric spaces given by distance matrices and
//! with finite-depth symbolic Cantor sets, where a depth-`n` word stands for
//! the cylinder of all its infinite extensions. Cantor distances are kept as
//! exact integer exponents of a rational parameter `λ`, so strong triangle
//! checks and Möbius checks on Cantor sets run with zero tolerance.
//!
//! Modules:
//!
//! * [`space`]: validated finite metric spaces, one-point extensions and
//!   cross ratios (with the deletion rule for the point at infinity).
//! * [`cantor`]: words, common prefix length, `ρ_λ` and the flattened
//!   metric `σ_λ`, plus exact exponent matrices.
//! * [`deform`]: inversion at a base point, the chordal one-point extension
//!   and sphericalization, with a counterexample search for the latter.
//! * [`props`]: ultrametricity, doubling, uniform perfectness and the
//!   uniform disconnectedness modulus.
//! * [`ultrametrize`]: subdominant ultrametric and dendrograms.
//! * [`distort`]: bilipschitz, weak quasisymmetry and weak quasimöbius
//!   constants of point maps, and Möbius checks.
//! * [`embed`]: Cantor embeddings of ultrametric spaces and the
//!   uniformization pipeline.
//! * [`random`]: seeded generators for the spaces used in experiments.
//!
//! Everything is `no_std` with `alloc`; IO and the CLI live in the `umt` crate.

#![no_std]

extern crate alloc;

pub mod cantor;
pub mod deform;
pub mod distort;
pub mod embed;
pub mod props;
pub mod random;
pub mod rational;
pub mod space;
pub mod ultrametrize;

pub use cantor::{CantorMetric, CantorSpace, ExactDistance, ExponentMatrix, PrefixLength, Word};
pub use rational::Rational;
pub use space::{CrossRatio, Distances, ExtendedSpace, FiniteMetricSpace, MetricError, QuasiMetricSpace};
