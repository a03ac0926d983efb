//! Spatially coupled error-correcting codes: protograph SC-LDPC codes,
//! spatially coupled turbo-like codes and staircase/zipper codes, with
//! density evolution, sliding-window decoders and finite-length
//! instrumentation.

pub mod chain;
pub mod channels;
pub mod de;
pub mod ldpc;
pub mod protograph;
pub mod scaling;
pub mod sparse;
pub mod turbo;
pub mod zipper;
