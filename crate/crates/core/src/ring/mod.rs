//! Exact integer and modular polynomial arithmetic.

pub mod cyclotomic;
pub mod discriminant;
pub mod factor;
pub mod field;
pub mod irreducible;
pub mod modulus;
pub mod poly;
pub mod prime;
pub mod roots;

pub use cyclotomic::{cyclotomic_poly, euler_phi};
pub use factor::{factor, Factorization, TriState};
pub use irreducible::{is_probably_irreducible, IrreducibilityVerdict};
pub use modulus::{PrimalityCertainty, PrimeModulus};
pub use poly::IntPolynomial;
pub use roots::{find_roots_mod, multiplicative_order, poly_eval_mod, splits_completely, RootInfo, SplitVerdict};
