//! Tiling of the search extent into groups of contiguous locations.

use core::ops::Range;

use crate::error::{Error, Result};
use crate::image::Location;

/// One `h x w` tile of search locations (possibly clipped at the extent
/// border) and its designated center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub index: usize,
    pub center: Location,
    pub rows: Range<usize>,
    pub cols: Range<usize>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, loc: Location) -> bool {
        self.rows.contains(&loc.row) && self.cols.contains(&loc.col)
    }

    /// Every location of the tile except the center, row-major.
    pub fn members(&self) -> impl Iterator<Item = Location> + '_ {
        let center = self.center;
        self.rows
            .clone()
            .flat_map(move |r| self.cols.clone().map(move |c| Location::new(r, c)))
            .filter(move |&loc| loc != center)
    }
}

/// Groups of `h x w` search locations tiling a `rows x cols` extent from the
/// top-left. Border tiles may be partial; their center is the central cell of
/// the clipped tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupGrid {
    h: usize,
    w: usize,
    rows: usize,
    cols: usize,
    tiles_down: usize,
    tiles_across: usize,
}

impl GroupGrid {
    pub fn new(extent_rows: usize, extent_cols: usize, h: usize, w: usize) -> Result<Self> {
        if h == 0 || w == 0 || h % 2 == 0 || w % 2 == 0 {
            return Err(Error::InvalidGroupSize { h, w });
        }
        if extent_rows == 0 || extent_cols == 0 {
            return Err(Error::InvalidParameter("empty search extent"));
        }
        Ok(Self {
            h,
            w,
            rows: extent_rows,
            cols: extent_cols,
            tiles_down: extent_rows.div_ceil(h),
            tiles_across: extent_cols.div_ceil(w),
        })
    }

    /// Grid for a `p x q` image and an `m x n` template.
    pub fn for_image(p: usize, q: usize, m: usize, n: usize, h: usize, w: usize) -> Result<Self> {
        if m == 0 || n == 0 || m > p || n > q {
            return Err(Error::WindowTooLarge { m, n, height: p, width: q });
        }
        Self::new(p - m + 1, q - n + 1, h, w)
    }

    pub fn group_height(&self) -> usize {
        self.h
    }

    pub fn group_width(&self) -> usize {
        self.w
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn extent_size(&self) -> usize {
        self.rows * self.cols
    }

    pub fn group_count(&self) -> usize {
        self.tiles_down * self.tiles_across
    }

    pub fn group(&self, index: usize) -> Group {
        let (gi, gj) = (index / self.tiles_across, index % self.tiles_across);
        let rows = gi * self.h..((gi + 1) * self.h).min(self.rows);
        let cols = gj * self.w..((gj + 1) * self.w).min(self.cols);
        let center = Location::new(rows.start + (rows.len() - 1) / 2, cols.start + (cols.len() - 1) / 2);
        Group { index, center, rows, cols }
    }

    /// Groups in row-major order of their tiles.
    pub fn groups(&self) -> impl Iterator<Item = Group> + '_ {
        (0..self.group_count()).map(move |i| self.group(i))
    }

    pub fn group_of(&self, loc: Location) -> Group {
        self.group((loc.row / self.h) * self.tiles_across + loc.col / self.w)
    }

    pub fn center_of(&self, loc: Location) -> Location {
        self.group_of(loc).center
    }

    pub fn is_center(&self, loc: Location) -> bool {
        self.center_of(loc) == loc
    }
}
