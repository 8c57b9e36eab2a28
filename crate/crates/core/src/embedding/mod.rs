//! Canonical embedding of Z[x]/f, spectral metrics and the transport map to F_q.

pub mod bigfloat;
pub mod data;
pub mod roots;
pub mod spectral;
pub mod transport;

pub use bigfloat::{BigComplex, FloatMatrix};
pub use data::{build_embedding, EmbeddingData, DEFAULT_PRECISION_BITS};
pub use roots::{complex_roots, OrderedRoots, RowKind};
pub use spectral::{family_rho_prime, spectral_stats, tau, SpectralReport};
pub use transport::{lattice_coordinates, transport_to_residue};
