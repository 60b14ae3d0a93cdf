//! Resonator constructions, quadratic forms and the analytic machinery for
//! exhibiting large values of the zeta function and of Dirichlet partial sums.

pub mod analytic;
pub mod bounds;
pub mod construct;
pub mod error;
pub mod math;
pub mod oracle;
pub mod primes;
pub mod quadform;
pub mod rng;
pub mod sum;
pub mod verify;

pub use construct::{ConstructionParams, Element, FactoredInt, ResonatorSet, SetKind};
pub use error::{Error, ErrorClass, Result};
pub use primes::{sieve_primes, PrimeTable};
