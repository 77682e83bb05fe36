//! Digital sets: finite unions of closed base-`b` grid cells.
//!
//! A [`DigitalSet`] at depth `m` is the union of cells
//! `[j_1/b^m, (j_1+1)/b^m] x ... x [j_n/b^m, (j_n+1)/b^m]`. Cells are closed,
//! so face-adjacent cells intersect.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, BoxUnion, Point};
use crate::scalar::Scalar;

pub type CellIndex = Vec<u64>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitalSet {
    n: usize,
    b: u64,
    m: u32,
    cells: BTreeSet<CellIndex>,
}

#[derive(Deserialize)]
struct RawDigitalSet {
    n: usize,
    b: u64,
    m: u32,
    cells: Vec<CellIndex>,
}

impl<'de> Deserialize<'de> for DigitalSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawDigitalSet::deserialize(deserializer)?;
        DigitalSet::new(raw.n, raw.b, raw.m, raw.cells).map_err(serde::de::Error::custom)
    }
}

/// Number of cells per axis, `b^m`, if it fits in a `u64`.
pub fn grid_size(b: u64, m: u32) -> Option<u64> {
    b.checked_pow(m)
}

impl DigitalSet {
    pub fn new(n: usize, b: u64, m: u32, cells: impl IntoIterator<Item = CellIndex>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if b < 2 {
            return Err(Error::invalid("grid base must be at least 2"));
        }
        let size = grid_size(b, m).ok_or_else(|| Error::invalid(format!("grid {b}^{m} too fine")))?;
        let mut set = BTreeSet::new();
        for c in cells {
            if c.len() != n {
                return Err(Error::invalid(format!("cell {c:?} has {} indices, expected {n}", c.len())));
            }
            if c.iter().any(|&j| j >= size) {
                return Err(Error::invalid(format!("cell {c:?} out of range 0..{size}")));
            }
            if !set.insert(c.clone()) {
                return Err(Error::invalid(format!("duplicate cell {c:?}")));
            }
        }
        if set.is_empty() {
            return Err(Error::invalid("digital set must be nonempty"));
        }
        Ok(DigitalSet { n, b, m, cells: set })
    }

    /// Every cell of the grid.
    pub fn full(n: usize, b: u64, m: u32) -> Result<Self> {
        let size = grid_size(b, m).ok_or_else(|| Error::invalid("grid too fine"))?;
        let total = size
            .checked_pow(n as u32)
            .filter(|&t| t <= 1 << 24)
            .ok_or_else(|| Error::invalid("full grid too large to enumerate"))?;
        let cells = (0..total).map(|mut k| {
            let mut c = vec![0; n];
            for i in (0..n).rev() {
                c[i] = k % size;
                k /= size;
            }
            c
        });
        DigitalSet::new(n, b, m, cells)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> u64 {
        self.b
    }

    pub fn depth(&self) -> u32 {
        self.m
    }

    pub fn cells(&self) -> &BTreeSet<CellIndex> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_side(&self) -> Scalar {
        Scalar::int(self.b).pow(-(self.m as i32))
    }

    pub fn cell_box(&self, cell: &[u64]) -> Aabb {
        let w = self.cell_side();
        let lo: Vec<Scalar> = cell.iter().map(|&j| Scalar::int(j) * &w).collect();
        Aabb::cube_at(&lo, &w)
    }

    pub fn cell_center(&self, cell: &[u64]) -> Point {
        let den = Scalar::int(2) * Scalar::int(self.b).powu(self.m as u64);
        let coords = cell
            .iter()
            .map(|&j| Scalar::int(2 * j as u128 + 1) / &den)
            .collect();
        Point::new(coords).expect("cell centers lie in the unit cube")
    }

    /// Subset check on cell sets of a common grid.
    pub fn is_subset_of(&self, other: &DigitalSet) -> bool {
        self.n == other.n && self.b == other.b && self.m == other.m && self.cells.is_subset(&other.cells)
    }

    /// The same set expressed with cells at a finer depth.
    pub fn refine(&self, depth: u32) -> Result<DigitalSet> {
        if depth < self.m {
            return Err(Error::invalid(format!("cannot refine depth {} to {depth}", self.m)));
        }
        let k = grid_size(self.b, depth - self.m).ok_or_else(|| Error::invalid("refinement too deep"))?;
        grid_size(self.b, depth).ok_or_else(|| Error::invalid("refinement too deep"))?;
        let per = k
            .checked_pow(self.n as u32)
            .ok_or_else(|| Error::invalid("refinement too large"))?;
        if (self.cells.len() as u64).saturating_mul(per) > 1 << 24 {
            return Err(Error::invalid("refinement too large to enumerate"));
        }
        let mut out = BTreeSet::new();
        for c in &self.cells {
            for mut t in 0..per {
                let mut sub = vec![0; self.n];
                for i in (0..self.n).rev() {
                    sub[i] = c[i] * k + t % k;
                    t /= k;
                }
                out.insert(sub);
            }
        }
        Ok(DigitalSet {
            n: self.n,
            b: self.b,
            m: depth,
            cells: out,
        })
    }

    /// Morton key: base-`b` digits of all axes interleaved, most significant first.
    pub fn morton_key(&self, cell: &[u64]) -> Vec<u64> {
        let mut key = Vec::with_capacity(self.m as usize * self.n);
        for level in (0..self.m).rev() {
            let div = self.b.pow(level);
            for &j in cell {
                key.push(j / div % self.b);
            }
        }
        key
    }

    /// Cells sorted by Morton key (ties broken lexicographically).
    pub fn morton_order(&self) -> Vec<CellIndex> {
        let mut v: Vec<(Vec<u64>, CellIndex)> =
            self.cells.iter().map(|c| (self.morton_key(c), c.clone())).collect();
        v.sort();
        v.into_iter().map(|(_, c)| c).collect()
    }

    /// One-dimensional measure of the projection onto `axis`.
    pub fn projection_length(&self, axis: usize) -> Scalar {
        let idx: BTreeSet<u64> = self.cells.iter().map(|c| c[axis]).collect();
        Scalar::int(idx.len() as u64) * self.cell_side()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("digital sets serialize")
    }
}

impl BoxUnion for DigitalSet {
    fn dim(&self) -> usize {
        self.n
    }
    fn boxes(&self) -> Vec<Aabb> {
        self.cells.iter().map(|c| self.cell_box(c)).collect()
    }
}
