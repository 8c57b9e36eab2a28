pub mod attack;
pub mod budget;
pub mod embedding;
pub mod error;
pub mod ring;
pub mod runner;
pub mod sampling;
pub mod serde_dec;
pub mod vetting;

pub use budget::Budgets;
pub use error::{Error, Result};
pub use ring::{IntPolynomial, PrimeModulus, RootInfo};
pub use rug::Integer;
