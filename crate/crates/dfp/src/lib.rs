//! Estimate the Fisher information an imperfectly known detector can deliver
//! straight from its data-fitting patterns (measured responses to fiducial
//! states), optimize probe states against it, compare with a detector-
//! tomography baseline, and run the analytic kernel pipeline for weak-field
//! homodyne detection of continuous-variable states.
//!
//! Modules:
//! - [`qubit`]: Bloch-sphere states, Pauli fiducials, the two-phase channel,
//!   quasi-probability decompositions, pure-state quantum Fisher information.
//! - [`fisher`]: classical Fisher information from probabilities and from
//!   data-fitting patterns, effective information, the two-parameter bound.
//! - [`search`]: positivity-filtered probe optimization (grid + simplex).
//! - [`tomo`]: synthetic patterns, least-squares POVM reconstruction, and the
//!   Born-rule information predictor.
//! - [`wfh`]: weak-field homodyne patterns, kernels, and phase-information
//!   scans for coherent and squeezed probes.
//!
//! Scans and searches parallelize over grid points with rayon when the
//! default `parallel` feature is enabled; disabling it swaps in sequential
//! loops with identical results.

mod exec;

pub mod fisher;
pub mod mat2;
pub mod qubit;
pub mod search;
pub mod tomo;
pub mod wfh;

pub use fisher::{
    effective_fisher, fisher_from_dfp, fisher_from_probabilities, massar_ratio, positivity_filter,
    predict_probabilities, DfpTable, FisherError, FisherMatrix, ParamSet, ProbabilityVector,
};
pub use qubit::{
    bloch_evolution, coefficient_derivatives, decompose, density_of, evolve, qfi_matrix,
    ChannelOrder, ChannelParams, Coefficients, DensityMatrix2, Fiducial, PureQubit, QubitError,
    FIDUCIALS,
};
pub use search::{
    optimize_single, optimize_two_parameter, ProbeParam, Scalarization, SearchConfig, SearchError,
    SearchReport, TwoParamReport,
};
pub use tomo::{
    born_table, fisher_from_povm, povm_projective, povm_waveplate, povm_zx, random_povm,
    reconstruct_povm, Povm, Reconstruction, TomoError,
};
pub use wfh::{
    coherent_alpha_scan, dfp_probability, kernel_terms, mean_photon, outcome_fisher,
    probability_wigner, split_energy, squeeze_tradeoff_scan, wigner_dsv, zeta, GaussianWigner,
    KernelTerm, ProbeField, WfhDetector, WfhError, WfhKernel, WfhOutcome,
};
