//! Zipper codes with BCH components: the general virtual/real framework,
//! staircase codes as an instance, and windowed iterative hard-decision
//! decoding.

pub mod bch;
pub mod code;
pub mod gf;
pub mod ihdd;
pub mod staircase;

pub use bch::{BchCode, BchError, DecodeFailure};
pub use code::{ZipperError, ZipperMap, ZipperSpec};
pub use gf::GaloisField;
pub use ihdd::{ihdd_window_decode, simulate_bsc_frame, FrameErrors, IhddConfig, IhddOutcome, IhddWindowReport};
pub use staircase::{staircase_rate, StaircaseCode};
