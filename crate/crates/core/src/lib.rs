//! Building blocks of a block-based predictive-transform video codec:
//! prediction, transforms, quantization, entropy coding, loop filters,
//! super-resolution and film grain, plus a small intra-only codec that
//! wires them together.

pub mod codec;
pub mod entropy;
pub mod error;
pub mod frame;
pub mod grain;
pub mod inter;
pub mod intra;
pub mod loopfilter;
pub mod mvref;
pub mod txfm;
pub mod warp;

pub use error::{Error, Result};
