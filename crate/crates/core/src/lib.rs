//! Exact computer-algebra kernel for the q-shuffle algebra on two letters:
//! spectral-parameter R-matrices, their constant diagonal companions, and
//! boundary K-matrices of arbitrary spin, together with a verifier that
//! checks the reflection-type, Yang-Baxter, fusion, unitarity and gauge
//! identities relating them by truncated exact arithmetic.
//!
//! The coefficient field is Q(v), v = q^(1/2), extended by square roots of
//! q-integers ([`scalar`]); matrix entries live in a free algebra on x, y
//! with Green's q-shuffle product ([`word`]) graded so that word length
//! equals spectral degree, which is what makes finite truncation exact
//! ([`series`]). Every identity check reports a structured pass/fail with
//! a minimal failing witness ([`verify`]).

pub mod matrices;
pub mod scalar;
pub mod series;
pub mod tensor;
pub mod verify;
pub mod word;

pub use scalar::{Coeff, RatFun, Scalar};
pub use tensor::Mat;
