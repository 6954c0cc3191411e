//! Ginibre spectra, the spiral lattice, determinantal counting statistics
//! and certified Wasserstein distances to the uniform law on the unit disc.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the scalar for common use.

// `!(x >= a)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dpp;
pub mod eigen;
pub mod error;
pub mod ginibre;
pub mod io;
pub mod measures;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod spiral;
pub mod stats;
pub mod transport;

pub use dpp::{
    bernoulli_profile, expected_count, expected_count_outside, kernel, tv_mean_vs_uniform,
    tv_mean_vs_uniform_closed, var_quadrature, var_split, BernoulliProfile, CountMethod,
    CountingStats, OutsideEstimate, TvEstimate, VarianceEstimate,
};
pub use error::{Error, Result};
pub use ginibre::{
    sample_disc_count, sample_ginibre, sample_radii_oracle, sample_spectrum, spectrum, stream,
    DiscCountSampler, GinibreMatrix, Purpose, RadialSample,
};
pub use measures::{ComplexPoint, DiscreteMeasure, Region, Spectrum};
pub use scalar::Real;
pub use spiral::{
    build_reference_measure, choose_m, lattice_index, m_for, predicted_location,
    quantization_error_bound, sort_spectrum_spiral, spiral_compare, spiral_coupling_cost,
    LatticeIndex, MPolicy, PredictedMeasure,
};
pub use transport::{
    quantization_lower_bound, w1_duality_check, wasserstein, wasserstein_assignment,
    wasserstein_auction, wasserstein_exact, wasserstein_flow, wasserstein_measure_to_uniform,
    wasserstein_to_uniform, DistanceCertificate, Method, SolverMode, TransportPlan,
};

pub type Point = ComplexPoint<f64>;
pub type Measure = DiscreteMeasure<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type Region64 = Region<f64>;
pub type Reference = PredictedMeasure<f64>;
pub type Certificate = DistanceCertificate<f64>;
pub type Plan = TransportPlan<f64>;
pub type Ginibre = GinibreMatrix<f64>;

pub type Point32 = ComplexPoint<f32>;
pub type Measure32 = DiscreteMeasure<f32>;
pub type Spectrum32 = Spectrum<f32>;
pub type Region32 = Region<f32>;
pub type Reference32 = PredictedMeasure<f32>;
pub type Certificate32 = DistanceCertificate<f32>;
pub type Ginibre32 = GinibreMatrix<f32>;
