//! Workbench for the irregular QC-LDPC McEliece cryptosystem.
//!
//! The crate covers the full pipeline: exact circulant/quasi-cyclic algebra
//! over GF(2), generation of irregular QC-LDPC private codes and the sparse
//! transformation machinery, bit-flipping and sum-product decoding, the
//! decision-threshold recursion that predicts bit-flipping waterfall
//! thresholds, information-set-decoding work-factor estimates for the two
//! relevant attacks, and the parameter-design procedure that ties them
//! together. A binary front end lives in the companion `qcmce-cli` crate.

pub mod analysis;
pub mod bits;
pub mod circulant;
pub mod construction;
pub mod cryptosystem;
pub mod decoder;
mod dense;
pub mod error;
pub mod keyfile;
pub mod paramfile;
pub mod profile;
pub mod qc;
pub mod sim;

pub use bits::BitVec;
pub use circulant::Circulant;
pub use error::{Error, Result};
pub use qc::QcMatrix;
