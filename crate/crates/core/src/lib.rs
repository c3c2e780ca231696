//! Structured deformations and the numerical relaxation of interfacial
//! energies.
//!
//! The crate represents SBV competitors as piecewise-affine fields with
//! planar jump sets ([`fields`]), evaluates bulk and surface energies on them
//! ([`energy`]), builds staircase and jump competitors for the relaxation
//! cell formulas and minimizes over them ([`cell`], [`optdesign`]), and
//! evaluates the relaxed energies of structured deformations ([`relaxed`]).
//!
//! ```
//! use sdrelax::{exact, tensor::Mat};
//!
//! let a = Mat::new(&[[2.0, 1.0], [0.0, 1.5]]);
//! let b = Mat::identity(2);
//! assert!((exact::relaxed_bulk_abs(&a, &b).unwrap() - 1.5).abs() < 1e-15);
//! ```

pub mod cell;
pub mod cli;
pub mod energy;
pub mod error;
pub mod exact;
pub mod fields;
pub mod frame;
pub mod geometry;
pub mod optdesign;
pub mod optim;
pub mod quadrature;
pub mod relaxed;
pub mod tensor;

pub use error::{Error, Result};
pub use frame::Frame;
pub use tensor::{Mat, Vector};
