//! Conjugate-function operators induced by orders on `Z^inf*`, martingale
//! transforms on the infinite torus, and the truncated Hilbert transform
//! with its transferred multiplier.
//!
//! The crate works at desk scale: tori of small dimension, coefficient
//! spaces `C^d` with `l_q` norms, and trigonometric polynomials with a few
//! hundred terms. Exact identities are checked in integer or coefficient
//! arithmetic; norm constants are estimated from below.

pub mod conjugation;
pub mod error;
pub mod estimator;
pub mod hilbert;
pub mod index;
pub mod martingales;
pub mod orders;
pub mod quadrature;
pub mod rng;
pub mod space;
pub mod torus;

pub use error::{Error, Result};
pub use index::{Index, TorusPoint};
pub use orders::{Order, SignSequence};
pub use space::{NormedSpaceSpec, VectorValue};
pub use torus::{QuadratureSpec, TrigPolynomial};
