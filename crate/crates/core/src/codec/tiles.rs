//! Tile geometry in superblock units.

use crate::error::{invalid, Result};

/// Most tiles a frame may hold.
pub const MAX_TILES: usize = 512;
/// Widest tile in luma samples.
pub const MAX_TILE_WIDTH: usize = 4096;

/// How the caller asks for tiles.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TileSpec {
    /// Near-equal division into this many columns and rows.
    Uniform { cols: usize, rows: usize },
    /// Explicit column widths and row heights in superblocks.
    Explicit { widths: Vec<usize>, heights: Vec<usize> },
}

impl Default for TileSpec {
    fn default() -> Self {
        TileSpec::Uniform { cols: 1, rows: 1 }
    }
}

/// Resolved tile boundaries. `col_starts` and `row_starts` hold one more
/// entry than there are columns or rows, ending at the frame extent in
/// superblocks.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TileLayout {
    pub sb_size: usize,
    pub col_starts: Vec<usize>,
    pub row_starts: Vec<usize>,
}

fn starts_from(sizes: &[usize], total: usize, what: &str) -> Result<Vec<usize>> {
    if sizes.is_empty() || sizes.contains(&0) {
        return invalid(format!("tile {what} must be positive"));
    }
    let mut v = vec![0];
    for &s in sizes {
        v.push(v.last().unwrap() + s);
    }
    if *v.last().unwrap() != total {
        return invalid(format!("tile {what} sum to {} superblocks, frame has {total}", v.last().unwrap()));
    }
    Ok(v)
}

fn uniform_starts(count: usize, total: usize, what: &str) -> Result<Vec<usize>> {
    if count == 0 || count > total {
        return invalid(format!("{count} tile {what} for {total} superblocks"));
    }
    Ok((0..=count).map(|i| i * total / count).collect())
}

impl TileLayout {
    pub fn new(spec: &TileSpec, width: usize, height: usize, sb_size: usize) -> Result<Self> {
        if sb_size != 64 && sb_size != 128 {
            return invalid(format!("superblock size {sb_size}"));
        }
        let (sb_cols, sb_rows) = (width.div_ceil(sb_size), height.div_ceil(sb_size));
        let (col_starts, row_starts) = match spec {
            TileSpec::Uniform { cols, rows } => (uniform_starts(*cols, sb_cols, "columns")?, uniform_starts(*rows, sb_rows, "rows")?),
            TileSpec::Explicit { widths, heights } => (starts_from(widths, sb_cols, "widths")?, starts_from(heights, sb_rows, "heights")?),
        };
        let layout = TileLayout { sb_size, col_starts, row_starts };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let monotone = |v: &[usize]| v.len() >= 2 && v[0] == 0 && v.windows(2).all(|w| w[0] < w[1]);
        if !monotone(&self.col_starts) || !monotone(&self.row_starts) {
            return invalid("tile boundaries must increase from zero");
        }
        if self.count() > MAX_TILES {
            return invalid(format!("{} tiles exceeds {MAX_TILES}", self.count()));
        }
        if self.col_starts.windows(2).any(|w| (w[1] - w[0]) * self.sb_size > MAX_TILE_WIDTH) {
            return invalid(format!("tile wider than {MAX_TILE_WIDTH} samples"));
        }
        Ok(())
    }

    pub fn cols(&self) -> usize {
        self.col_starts.len() - 1
    }

    pub fn rows(&self) -> usize {
        self.row_starts.len() - 1
    }

    pub fn count(&self) -> usize {
        self.cols() * self.rows()
    }

    /// Luma rectangle `(x0, y0, x1, y1)` of tile `index` in raster order,
    /// clipped to `width`×`height`.
    pub fn rect(&self, index: usize, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let (c, r) = (index % self.cols(), index / self.cols());
        let s = self.sb_size;
        (
            (self.col_starts[c] * s).min(width),
            (self.row_starts[r] * s).min(height),
            (self.col_starts[c + 1] * s).min(width),
            (self.row_starts[r + 1] * s).min(height),
        )
    }
}
