//! Finite boxes of Z^d.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest vertex count a box may have; pair indices `i * n + j` must fit in
/// a `u64`.
pub const MAX_VERTICES: usize = 1 << 31;

/// An axis-aligned box `low + [0, side-1]^d`.
///
/// Corner boxes are written `B_m(x) = x + [0, m-1]^d`; centered boxes
/// `Lambda_n(x) = x + [-n, n]^d` remember their center and radius. Vertices
/// are indexed in lexicographic order of their coordinates, first coordinate
/// most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    low: Vec<i64>,
    side: usize,
    centered: bool,
    len: usize,
}

impl BoxSpec {
    /// `origin + [0, side-1]^d`.
    pub fn corner(origin: Vec<i64>, side: usize) -> Result<Self> {
        Self::build(origin, side, false)
    }

    /// `center + [-radius, radius]^d`.
    pub fn centered(center: Vec<i64>, radius: usize) -> Result<Self> {
        let low = center.iter().map(|&c| c - radius as i64).collect();
        Self::build(low, 2 * radius + 1, true)
    }

    /// Corner box anchored at the origin of Z^d.
    pub fn at_origin(d: usize, side: usize) -> Result<Self> {
        Self::corner(vec![0; d], side)
    }

    fn build(low: Vec<i64>, side: usize, centered: bool) -> Result<Self> {
        if low.is_empty() {
            return Err(invalid("box dimension must be at least 1"));
        }
        if side == 0 {
            return Err(invalid("box side must be positive"));
        }
        let len = side
            .checked_pow(low.len() as u32)
            .filter(|&n| n <= MAX_VERTICES)
            .ok_or_else(|| Error::Budget(format!("box {side}^{} has too many vertices", low.len())))?;
        Ok(BoxSpec { low, side, centered, len })
    }

    pub fn d(&self) -> usize {
        self.low.len()
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn low(&self) -> &[i64] {
        &self.low
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Center of a centered box.
    pub fn center(&self) -> Option<Vec<i64>> {
        let r = self.radius()? as i64;
        Some(self.low.iter().map(|&l| l + r).collect())
    }

    pub fn radius(&self) -> Option<usize> {
        self.centered.then_some(self.side / 2)
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of unordered vertex pairs.
    pub fn pair_count(&self) -> u64 {
        let n = self.len as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Coordinates of vertex `index`.
    pub fn coord(&self, index: usize) -> Vec<i64> {
        let mut out = vec![0; self.d()];
        self.write_coord(index, &mut out);
        out
    }

    pub(crate) fn write_coord(&self, mut index: usize, out: &mut [i64]) {
        for k in (0..self.d()).rev() {
            out[k] = self.low[k] + (index % self.side) as i64;
            index /= self.side;
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d()
            && x
                .iter()
                .zip(&self.low)
                .all(|(&c, &l)| c >= l && c < l + self.side as i64)
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some(
            x.iter()
                .zip(&self.low)
                .fold(0usize, |acc, (&c, &l)| acc * self.side + (c - l) as usize),
        )
    }

    pub fn require_index(&self, x: &[i64]) -> Result<usize> {
        self.index_of(x).ok_or_else(|| Error::OutOfBox(x.to_vec()))
    }

    /// True when `other` is entirely inside `self`.
    pub fn contains_box(&self, other: &BoxSpec) -> bool {
        other.d() == self.d()
            && other.low.iter().zip(&self.low).all(|(&o, &s)| {
                o >= s && o + other.side as i64 <= s + self.side as i64
            })
    }

    /// True when vertex `index` has a coordinate on a face of the box.
    pub fn on_boundary(&self, index: usize) -> bool {
        let mut rest = index;
        for _ in 0..self.d() {
            let c = rest % self.side;
            if c == 0 || c + 1 == self.side {
                return true;
            }
            rest /= self.side;
        }
        false
    }

    /// Squared Euclidean distance between two vertices.
    pub fn dist2(&self, i: usize, j: usize) -> u64 {
        let (mut a, mut b) = (i, j);
        let mut s = 0u64;
        for _ in 0..self.d() {
            let da = (a % self.side) as i64 - (b % self.side) as i64;
            s += (da * da) as u64;
            a /= self.side;
            b /= self.side;
        }
        s
    }

    /// Squared length of the box diagonal.
    pub fn diameter2(&self) -> u64 {
        let s = (self.side - 1) as u64;
        self.d() as u64 * s * s
    }

    /// Vertex coordinates in index order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len).map(move |i| self.coord(i))
    }
}

/// Squared Euclidean norm of an integer vector.
pub fn norm2(x: &[i64]) -> u64 {
    x.iter().map(|&c| (c * c) as u64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_order() {
        let b = BoxSpec::corner(vec![2, -1], 3).unwrap();
        assert_eq!(b.len(), 9);
        let coords: Vec<_> = b.iter().collect();
        assert_eq!(coords[0], vec![2, -1]);
        assert_eq!(coords[1], vec![2, 0]);
        assert_eq!(coords[3], vec![3, -1]);
        for (i, c) in coords.iter().enumerate() {
            assert_eq!(b.index_of(c), Some(i));
        }
        let mut sorted = coords.clone();
        sorted.sort();
        assert_eq!(sorted, coords);
    }

    #[test]
    fn centered_boxes() {
        let l = BoxSpec::centered(vec![0, 0, 0], 2).unwrap();
        assert_eq!(l.len(), 125);
        assert_eq!(l.center(), Some(vec![0, 0, 0]));
        assert_eq!(l.radius(), Some(2));
        assert!(l.contains(&[-2, 2, 0]));
        assert!(!l.contains(&[-3, 0, 0]));
        let origin = l.index_of(&[0, 0, 0]).unwrap();
        assert!(!l.on_boundary(origin));
        assert!(l.on_boundary(l.index_of(&[2, 0, 1]).unwrap()));
    }

    #[test]
    fn distances() {
        let b = BoxSpec::at_origin(2, 5).unwrap();
        let i = b.index_of(&[0, 0]).unwrap();
        let j = b.index_of(&[3, 4]).unwrap();
        assert_eq!(b.dist2(i, j), 25);
        assert_eq!(b.diameter2(), 32);
        assert_eq!(b.pair_count(), 25 * 24 / 2);
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(BoxSpec::corner(vec![], 3).is_err());
        assert!(BoxSpec::corner(vec![0], 0).is_err());
        assert!(BoxSpec::corner(vec![0; 4], 1 << 10).is_err());
    }

    #[test]
    fn box_containment() {
        let big = BoxSpec::centered(vec![0], 10).unwrap();
        let small = BoxSpec::centered(vec![3], 7).unwrap();
        assert!(!big.contains_box(&BoxSpec::centered(vec![3], 8).unwrap()));
        assert!(big.contains_box(&BoxSpec::centered(vec![3], 6).unwrap()));
        assert!(!small.contains_box(&big));
    }
}
