//! Transform block layouts inside a coding block.

use crate::frame::BlockSize;

/// Transform dimensions in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TxSize {
    pub w: usize,
    pub h: usize,
}

impl TxSize {
    pub fn new(w: usize, h: usize) -> Self {
        TxSize { w, h }
    }

    /// One recursive split step: squares quarter, rectangles halve their
    /// longer side. `None` once a side would drop below 4.
    pub fn split(self) -> Option<(TxSize, usize)> {
        let (w, h) = (self.w, self.h);
        if w == h {
            (w > 4).then(|| (TxSize::new(w / 2, h / 2), 4))
        } else if w > h {
            Some((TxSize::new(w / 2, h), 2))
        } else {
            Some((TxSize::new(w, h / 2), 2))
        }
    }

    pub fn area(self) -> usize {
        self.w * self.h
    }
}

/// Largest transform that fits a coding block: each side capped at 64.
pub fn initial_tx(block: BlockSize) -> TxSize {
    TxSize::new(block.w.min(64), block.h.min(64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredKind {
    Inter,
    Intra,
}

/// Recursive split decision for one initial-size unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxTree {
    Leaf,
    Split(Vec<TxTree>),
}

impl TxTree {
    pub fn depth(&self) -> usize {
        match self {
            TxTree::Leaf => 0,
            TxTree::Split(c) => 1 + c.iter().map(TxTree::depth).max().unwrap_or(0),
        }
    }

    /// Transform blocks as `(x, y, size)` relative to the unit origin.
    pub fn leaves(&self, size: TxSize) -> Vec<(usize, usize, TxSize)> {
        let mut out = Vec::new();
        self.collect(0, 0, size, &mut out);
        out
    }

    fn collect(&self, x: usize, y: usize, size: TxSize, out: &mut Vec<(usize, usize, TxSize)>) {
        match self {
            TxTree::Leaf => out.push((x, y, size)),
            TxTree::Split(children) => {
                let (sub, _) = size.split().expect("split of a minimum-size transform");
                let per_row = size.w / sub.w;
                for (i, c) in children.iter().enumerate() {
                    c.collect(x + (i % per_row) * sub.w, y + (i / per_row) * sub.h, sub, out);
                }
            }
        }
    }
}

/// All trees of depth at most `depth` below a unit of size `size`.
pub fn enumerate_trees(size: TxSize, depth: usize) -> Vec<TxTree> {
    let mut out = vec![TxTree::Leaf];
    if depth == 0 {
        return out;
    }
    let Some((sub, n)) = size.split() else { return out };
    let child = enumerate_trees(sub, depth - 1);
    let mut combos: Vec<Vec<TxTree>> = vec![Vec::new()];
    for _ in 0..n {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                child.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect();
    }
    out.extend(combos.into_iter().map(TxTree::Split));
    out
}

/// Maximum recursion depth of the transform partition.
pub const MAX_TX_DEPTH: usize = 2;

/// Allowed transform layouts for a coding block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxOptions {
    /// Each initial-size unit independently picks any tree of depth <= 2.
    Inter { initial: TxSize, units_x: usize, units_y: usize },
    /// One size for the whole block.
    Uniform(Vec<TxSize>),
}

/// Transform partition options; chroma always takes the largest size.
pub fn tx_partition_options(block: BlockSize, kind: PredKind, chroma: bool) -> TxOptions {
    let initial = initial_tx(block);
    if chroma {
        return TxOptions::Uniform(vec![initial]);
    }
    match kind {
        PredKind::Inter => TxOptions::Inter { initial, units_x: block.w / initial.w, units_y: block.h / initial.h },
        PredKind::Intra => {
            let mut sizes = vec![initial];
            let mut s = initial;
            for _ in 0..MAX_TX_DEPTH {
                match s.split() {
                    Some((sub, _)) => {
                        sizes.push(sub);
                        s = sub;
                    }
                    None => break,
                }
            }
            TxOptions::Uniform(sizes)
        }
    }
}

/// Tiles a `w`×`h` area with transforms of one size, in raster order.
pub fn uniform_layout(w: usize, h: usize, tx: TxSize) -> Vec<(usize, usize, TxSize)> {
    let mut v = Vec::new();
    for y in (0..h).step_by(tx.h) {
        for x in (0..w).step_by(tx.w) {
            v.push((x, y, tx));
        }
    }
    v
}
