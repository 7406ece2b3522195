//! Logarithmic Cauchy quotients `L_{f,k}`, the logarithmic Cauchy quotient
//! mean 𝓛ₖ with its extension and conjugates, solutions of the reflexivity
//! equation `f(x) = (x/k)·f(xᵏ)`, and numerical checks of their properties.
//!
//! Everything is generic over the scalar through [`Real`]; the `*64` and
//! `*32` aliases below fix it.

// `!(a < b)` is used on purpose so that NaN lands on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod funceq;
pub mod means;
pub mod probe;
pub mod quotient;
pub mod rng;
pub mod scalar;

pub use analysis::{
    concavity_probe, contraction_factor, h_transform, jensen_residual, krull_residual, phi_probe,
    psi_contraction_check, BoundednessProbe, ConcavityReport, Curvature, PsiReport, TransformedGenerator,
};
pub use domain::{Domain, MeanPoint, MeanReport, Side};
pub use dynamics::{
    estimate_invariant_mean, invariance_residual, iterate_pair, InvariantEstimate, IterationOptions, IterationTrace,
    TraceStep,
};
pub use error::{Error, Result};
pub use funceq::{
    continuity_defect, locate_tile, reflexivity_residual, relative_reflexivity_residual, tile_index, RealFunction,
    Table, TileLocation, TileRange, TiledExtension,
};
pub use means::{
    arithmetic_mean, complementary_mean, extended_mean, geometric_mean, harmonic_mean, involutory_conjugate,
    log_cauchy_conjugate, log_cauchy_mean, Mean, MeanKind,
};
pub use probe::{probe_mean_properties, PropertyReport, TupleSampler};
pub use quotient::{
    canonical_generator, proportionality_constant, quotient_equal, quotient_eval, EqualityReport, Generator,
    GeneratorSpec, QuotientSpec, Sign,
};
pub use rng::SampleStream;
pub use scalar::{Real, Tolerances};

pub type Generator64 = Generator<f64>;
pub type Generator32 = Generator<f32>;
pub type MeanPoint64 = MeanPoint<f64>;
pub type MeanPoint32 = MeanPoint<f32>;
pub type QuotientSpec64 = QuotientSpec<f64>;
pub type QuotientSpec32 = QuotientSpec<f32>;
pub type TiledExtension64 = TiledExtension<f64>;
pub type TiledExtension32 = TiledExtension<f32>;
pub type Table64 = Table<f64>;
pub type Table32 = Table<f32>;
pub type IterationTrace64 = IterationTrace<f64>;
pub type IterationTrace32 = IterationTrace<f32>;
