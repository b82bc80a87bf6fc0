//! Fixed-width bitsets over dense vertex ids.
//!
//! Belief states are sets of subdivided-graph vertices; the solver and the
//! adversarial search spend almost all their time intersecting and scanning
//! these, so they are plain `u64` blocks rather than a general set type.

/// A set of vertex ids below a fixed universe size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    nbits: u32,
    blocks: Vec<u64>,
}

impl VertexSet {
    pub fn empty(nbits: u32) -> VertexSet {
        VertexSet {
            nbits,
            blocks: vec![0; Self::nblocks(nbits)],
        }
    }

    pub fn full(nbits: u32) -> VertexSet {
        let mut s = VertexSet::empty(nbits);
        for (i, b) in s.blocks.iter_mut().enumerate() {
            let lo = (i as u32) * 64;
            if lo + 64 <= nbits {
                *b = u64::MAX;
            } else if lo < nbits {
                *b = (1u64 << (nbits - lo)) - 1;
            }
        }
        s
    }

    fn nblocks(nbits: u32) -> usize {
        ((nbits as usize) + 63) / 64
    }

    pub fn universe(&self) -> u32 {
        self.nbits
    }

    #[inline]
    pub fn insert(&mut self, v: u32) {
        debug_assert!(v < self.nbits);
        self.blocks[(v / 64) as usize] |= 1u64 << (v % 64);
    }

    #[inline]
    pub fn remove(&mut self, v: u32) {
        debug_assert!(v < self.nbits);
        self.blocks[(v / 64) as usize] &= !(1u64 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        debug_assert!(v < self.nbits);
        self.blocks[(v / 64) as usize] & (1u64 << (v % 64)) != 0
    }

    pub fn len(&self) -> u32 {
        self.blocks.iter().map(|b| b.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn is_singleton(&self) -> bool {
        self.len() == 1
    }

    /// The single member, if this is a singleton.
    pub fn sole(&self) -> Option<u32> {
        if self.is_singleton() {
            self.iter().next()
        } else {
            None
        }
    }

    pub fn first(&self) -> Option<u32> {
        self.iter().next()
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        debug_assert_eq!(self.nbits, other.nbits);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> SetIter<'_> {
        SetIter {
            set: self,
            block: 0,
            bits: self.blocks.first().copied().unwrap_or(0),
        }
    }

    /// Members as a sorted vector.
    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    /// Appends a canonical byte encoding (used for memo keys).
    pub fn write_key(&self, out: &mut Vec<u8>) {
        for b in &self.blocks {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }

    pub fn from_iter_n(nbits: u32, it: impl IntoIterator<Item = u32>) -> VertexSet {
        let mut s = VertexSet::empty(nbits);
        for v in it {
            s.insert(v);
        }
        s
    }
}

pub struct SetIter<'a> {
    set: &'a VertexSet,
    block: usize,
    bits: u64,
}

impl Iterator for SetIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        loop {
            if self.bits != 0 {
                let tz = self.bits.trailing_zeros();
                self.bits &= self.bits - 1;
                return Some((self.block as u32) * 64 + tz);
            }
            self.block += 1;
            if self.block >= self.set.blocks.len() {
                return None;
            }
            self.bits = self.set.blocks[self.block];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut s = VertexSet::empty(130);
        assert!(s.is_empty());
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_vec(), vec![0, 64, 129]);
        assert!(s.contains(64) && !s.contains(63));
        s.remove(64);
        assert_eq!(s.to_vec(), vec![0, 129]);
    }

    #[test]
    fn full_and_subset() {
        let f = VertexSet::full(70);
        assert_eq!(f.len(), 70);
        let s = VertexSet::from_iter_n(70, [1, 2, 69]);
        assert!(s.is_subset_of(&f));
        assert!(!f.is_subset_of(&s));
    }

    #[test]
    fn singleton() {
        let s = VertexSet::from_iter_n(10, [7]);
        assert!(s.is_singleton());
        assert_eq!(s.sole(), Some(7));
    }
}
