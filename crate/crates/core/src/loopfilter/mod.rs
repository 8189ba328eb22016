//! In-loop filters applied to a reconstructed frame, in this order:
//! deblocking, directional deringing, horizontal super-resolution and
//! loop restoration.

pub mod cdef;
pub mod deblock;
pub mod restoration;
pub mod sgr;
pub mod superres;
pub mod wiener;

/// Post-reconstruction stages in their required order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Stage {
    Deblock,
    Cdef,
    Superres,
    Restoration,
}

/// True when `stages` never runs a stage before one that must precede it.
pub fn is_ordered(stages: &[Stage]) -> bool {
    stages.windows(2).all(|w| w[0] < w[1])
}
