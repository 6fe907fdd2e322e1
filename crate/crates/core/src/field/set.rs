use std::fmt;

use fixedbitset::FixedBitSet;

use super::PrimeField;
use crate::error::{Error, Result};

/// A subset of `F_p`, stored as a dense bit vector of length `p`.
#[derive(Clone, PartialEq, Eq)]
pub struct FpSet {
    field: PrimeField,
    bits: FixedBitSet,
}

impl fmt::Debug for FpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FpSet(p={}, ", self.field.p())?;
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, ")")
    }
}

impl FpSet {
    pub fn empty(field: &PrimeField) -> Self {
        FpSet {
            field: field.clone(),
            bits: FixedBitSet::with_capacity(field.p() as usize),
        }
    }

    pub fn full(field: &PrimeField) -> Self {
        let mut set = Self::empty(field);
        set.bits.insert_range(..);
        set
    }

    /// Builds a set from arbitrary integers, reducing each modulo `p`.
    pub fn from_elements<I: IntoIterator<Item = u64>>(field: &PrimeField, elems: I) -> Self {
        let mut set = Self::empty(field);
        for x in elems {
            set.insert(x);
        }
        set
    }

    pub fn singleton(field: &PrimeField, x: u64) -> Self {
        Self::from_elements(field, [x])
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn insert(&mut self, x: u64) {
        self.bits.insert(self.field.reduce(x) as usize);
    }

    pub fn contains(&self, x: u64) -> bool {
        self.bits.contains(self.field.reduce(x) as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.ones().map(|i| i as u64)
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &FpSet) -> bool {
        self.field == other.field && self.bits.is_subset(&other.bits)
    }

    pub fn ensure_same_field(&self, other: &FpSet) -> Result<()> {
        self.field.ensure_same(&other.field)
    }

    /// Every element of the set mapped through `f`, as a new set.
    pub fn map(&self, mut f: impl FnMut(u64) -> u64) -> FpSet {
        FpSet::from_elements(&self.field, self.iter().map(&mut f))
    }
}

/// The residues `start, start+1, ..., start+length-1` taken modulo `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FpInterval {
    pub start: u64,
    pub length: u64,
}

impl FpInterval {
    pub fn new(field: &PrimeField, start: u64, length: u64) -> Result<Self> {
        if length > field.p() {
            return Err(Error::IntervalTooLong {
                length,
                limit: format!("p = {}", field.p()),
            });
        }
        Ok(FpInterval {
            start: field.reduce(start),
            length,
        })
    }

    pub fn contains(&self, field: &PrimeField, x: u64) -> bool {
        field.sub(x, self.start) < self.length
    }

    pub fn to_set(&self, field: &PrimeField) -> FpSet {
        FpSet::from_elements(field, (0..self.length).map(|i| field.add(self.start, i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_materialization() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(FpInterval::new(&f, 3, 7).unwrap().to_set(&f), FpSet::full(&f));
        assert!(FpInterval::new(&f, 3, 0).unwrap().to_set(&f).is_empty());
        let wrap = FpInterval::new(&f, 5, 4).unwrap();
        assert_eq!(wrap.to_set(&f).to_vec(), vec![0, 1, 5, 6]);
        for x in 0..7 {
            assert_eq!(wrap.contains(&f, x), wrap.to_set(&f).contains(x));
        }
        assert!(FpInterval::new(&f, 0, 8).is_err());
    }

    #[test]
    fn cardinality_is_popcount() {
        let f = PrimeField::new(11).unwrap();
        let s = FpSet::from_elements(&f, [1, 12, 3, 3, 22]);
        assert_eq!(s.to_vec(), vec![0, 1, 3]);
        assert_eq!(s.len(), 3);
        assert!(s.is_subset(&FpSet::full(&f)));
        assert_eq!(FpSet::full(&f).len(), 11);
    }
}
