//! Scalar abstraction for the numeric core.
//!
//! All score and share arithmetic is generic over [`Real`], so the same
//! pipeline runs in `f32` or `f64`. The crate root exports `f64` aliases
//! for the common case.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable for shares, retention and scores.
pub trait Real:
    Float
    + FromPrimitive
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Tolerance for "this collection of probabilities sums to one" checks.
    fn sum_one_tolerance() -> Self;

    /// Lossless-enough conversion from an `f64` literal or config value.
    fn from_config(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 converts to any Real scalar")
    }

    /// Converts a whole number of seconds.
    fn from_secs(secs: u64) -> Self {
        Self::from_u64(secs).expect("u64 seconds convert to any Real scalar")
    }

    /// Converts a collection size.
    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("usize counts convert to any Real scalar")
    }
}

impl Real for f64 {
    fn sum_one_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    // f32 carries ~7 significant digits; 1e-9 would reject every valid sum.
    fn sum_one_tolerance() -> Self {
        1e-4
    }
}
