//! Spatially coupled turbo-like codes: component trellises, BCJR, and the
//! GSC-PCC, SC-SCC and HSC-BCC families with sliding-window decoding.

pub mod bcjr;
pub mod conv;
pub mod families;
pub mod graph;
pub mod interleaver;

pub use bcjr::{bcjr, bcjr_decode};
pub use conv::{ConvCode, ConvError};
pub use families::{
    gscpcc, gscpcc_rate, hscbcc, hscbcc_rate, scscc, scscc_rate, GscPccConfig, HscBccConfig,
    RepetitionSpec, ScSccConfig,
};
pub use graph::{window_decode, TurboGraph, TurboOutcome};
pub use interleaver::Interleaver;
