//! Zero sets of finite exponential sums and the pure point spectra of their
//! counting measures.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod almost_periodic;

pub mod config;
pub mod diffraction;
pub mod error;
pub mod io;
pub mod measure;
pub mod poisson;
pub mod probes;
pub mod quadrature;
pub mod reconstruction;
pub mod wiener;
pub mod zeros;

pub use almost_periodic::{
    almost_periods, ap_displacement, bohr_mean, fourier_coefficient, AlmostPeriods, BohrMean, Displacement,
    SampledFunction,
};
pub use config::ToleranceConfig;
pub use diffraction::{
    check_int_condition, diffraction_spectrum, growth_profile, height_independence_report, select_height,
    GrowthProfile, GrowthSample, HeightIndependence, IntCondition, Spectrum,
};
pub use error::{Error, Result};
pub use measure::{comb_measure, density, Atom, AtomicMeasure, Convolution, DensityEstimate, Kernel, Triangle};
pub use poisson::{
    default_gaussian_family, gaussian_family, verify_family, verify_poisson, PoissonCheck, TestFunction,
};
pub use probes::{
    probe_corollary1, probe_lattice_structure, probe_perturbation, probe_uniqueness, LatticeFit, LatticeOptions,
    LatticeProbe, ProbeReport,
};
pub use reconstruction::{
    canonical_product_eval, log_derivative_from_spectrum, log_derivative_partial_fractions, reconstruct_series,
    round_trip_report, Partial, ReconstructOptions, Reconstruction, RoundTripOptions, RoundTripReport,
};
pub use wiener::{ExponentialSum, Side, Term};
pub use zeros::{argument_principle_count, find_real_zeros, min_gap, Rectangle, SignedZeros, ZeroSet};
