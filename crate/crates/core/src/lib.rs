//! LLR-domain successive-cancellation (SC) and SC-list (SCL) decoding of
//! ABS+ polar codes.
//!
//! ABS+ codes insert swap and add transforms on adjacent bits between the
//! polarization layers of an Arikan polar code. The decoders here work on
//! double-bit-input (DBI) virtual channels represented by log-likelihood
//! ratio triples and use only additions and comparisons.
//!
//! The crate is organized as:
//!
//! * [`codespec`]: code description, validation, file format and recursion
//!   tree classification.
//! * [`llr`]: the min-sum kernels and operation counting.
//! * [`encoder`]: layered and dense-matrix encoding.
//! * [`sc`] / [`scl`]: the ABS+ decoders.
//! * [`arikan`]: an independent classical SC/SCL decoder used as baseline.
//! * [`oracle`]: brute-force max-probability machinery used to verify the
//!   decoders.
//! * [`verify`]: oracle self-checks of a code.
//! * [`channel`], [`construction`], [`harness`]: simulation support.
//!
//! Decoders are generic over the LLR scalar ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases below pick the common instantiations.

pub mod arikan;
pub mod channel;
pub mod codespec;
pub mod construction;
pub mod crc;
pub mod encoder;
mod error;
pub mod harness;
pub mod llr;
pub mod oracle;
pub mod sc;
mod scalar;
pub mod scl;
pub mod verify;

pub use codespec::{CodeSpec, NodeId, SpecDraft, Transform};
pub use error::{Error, Result};
pub use llr::{LlrTriple, MidQuad, OpCounter};
pub use sc::{DecoderOptions, ScDecoder, ScOutput};
pub use scalar::Scalar;
pub use scl::{Candidate, ListConfig, SclDecoder, SclOutput};

/// Single-precision SC decoder.
pub type ScDecoderF32<'a> = ScDecoder<'a, f32>;
/// Double-precision SC decoder.
pub type ScDecoderF64<'a> = ScDecoder<'a, f64>;
/// Single-precision SCL decoder.
pub type SclDecoderF32<'a> = SclDecoder<'a, f32>;
/// Double-precision SCL decoder.
pub type SclDecoderF64<'a> = SclDecoder<'a, f64>;
