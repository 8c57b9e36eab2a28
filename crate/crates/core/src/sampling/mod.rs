//! Seeded generation of secrets, errors and sample sets.

pub mod gaussian;
pub mod lattice;
pub mod rng;
pub mod samples;

pub use gaussian::{sample_coeff_gaussian, sample_uniform_poly, CoeffSampler, GaussianSpec, Truncation};
pub use lattice::{error_norm_stats, sample_lattice_gaussian, Discretization, LatticeDraw, NormStats};
pub use rng::derive_stream;
pub use samples::{
    gen_polylwe_samples, gen_ringlwe_samples, gen_uniform_polylwe_samples, gen_uniform_ringlwe_samples, load_samples, random_secret, save_samples,
    LweSampleSet, PolySample, RingSample, SampleVariant, Samples,
};
