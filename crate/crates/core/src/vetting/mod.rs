//! Weak-parameter discovery and checks.

pub mod construct;
pub mod family;
pub mod findq;
pub mod vet;

pub use construct::{construct_with_root, search_trinomials, Constructed, RootTarget, TrinomialHit};
pub use family::{
    check_family_conditions, cyclotomic_immunity_check, fermat_check, fermat_family_checks, CyclotomicReport,
    FamilyReport, FermatCheck, FERMAT_FAMILY,
};
pub use findq::{findq, FindqResult};
pub use vet::{vet_parameters, Variant, VetOptions, VetVerdict, VulnerabilityReport};
