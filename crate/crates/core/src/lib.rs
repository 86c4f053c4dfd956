//! Time-frequency hopping patterns for device-to-device discovery.
//!
//! Discovery resources hop across an `m × n` grid (channels × subframes)
//! from one discovery frame to the next. The families here are frame-number
//! independent bijections that also carry a *hopping invariant*: a residue
//! that stays fixed along each resource's trajectory and so can encode a
//! service type in the resource location itself.
//!
//! - [`grid`]: grid types and modular helpers.
//! - [`pattern`]: the QC baseline and the A1, A2, B1, B2 families.
//! - [`verify`]: exhaustive property checks and the family feature table.
//! - [`sim`]: half-duplex discovery simulation with invariant filtering.
//! - [`io`]: scenario files and report serialization.

pub mod grid;
pub mod io;
pub mod pattern;
pub mod sim;
pub mod verify;

pub use grid::{gcd, mod_inverse, mod_reduce, ArithError, GridShape, InvariantValue, Resource};
pub use pattern::{make_pattern, Family, FamilyParams, Pattern, PatternError, PatternSpec, TrajectoryPoint};
