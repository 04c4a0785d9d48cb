//! Computational toolkit for homothetic self-similar sets.
//!
//! The crate builds attractors of iterated function systems made of pure
//! scalings plus translations (`f_i(x) = λ_i x + t_i`), works with their
//! symbolic cylinder structure, applies linear, radial and smooth non-linear
//! maps to finite samples of the attractor, certifies separation geometry,
//! and estimates fractal dimensions by box counting.
//!
//! Everything here is pure computation over `alloc` collections. File
//! formats, configuration and the command line live in the `fraclab` crate.
//!
//! Symbols of a word are zero-based indices into the map list of an [`Ifs`].
//! Points are stored as `[f64; 3]` with unused trailing coordinates set to
//! zero, so one representation serves ambient dimensions 1, 2 and 3.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cloud;
pub mod cover;
pub mod dimension;
pub mod error;
pub mod geometry;
pub mod ifs;
pub mod maps;
pub mod math;
pub mod ssc;
pub mod subsystem;

mod par;

pub use cloud::WeightedCloud;
pub use cover::{cylinder_cover, sample_cloud, Cell, CylinderCover, DEFAULT_MAX_CELLS};
pub use error::{FracError, Result};
pub use ifs::{Ball, Ifs, Similitude, Word};
pub use maps::{Direction, SmoothMap};
pub use math::Point;
pub use ssc::{check_ssc, SscCertificate};
