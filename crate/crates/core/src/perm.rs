//! Permutations in one-line notation and their bond statistics.
//!
//! Positions are 1-based throughout. A *regular bond* sits at position `i`
//! (`1 <= i < n`) when `|p[i] - p[i+1]| = 1`; an *edge bond* sits at position
//! `n` when `|p[n] - p[1]| = 1`. Cyclic bonds are the union of both kinds.
//!
//! Two small-order conventions apply: for `n = 1` there are no bonds at all,
//! and for `n = 2` both cyclic positions are counted, so every element of
//! `S_2` carries two cyclic bonds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("a permutation needs at least one entry")]
    Empty,
    #[error("value {0} appears more than once")]
    Duplicate(u32),
    #[error("value {value} is outside 1..={n}")]
    OutOfRange { value: u32, n: usize },
    #[error("position {position} is outside 1..={max}")]
    BadPosition { position: usize, max: usize },
    #[error("rotation {shift} is outside 0..{n}")]
    BadRotation { shift: usize, n: usize },
    #[error("cannot delete from a permutation of order 1")]
    DeleteFromSingleton,
    #[error("could not parse permutation: {0}")]
    Parse(String),
}

/// A permutation of `1..=n` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    values: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondKind {
    Regular,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondRecord {
    pub position: usize,
    pub kind: BondKind,
}

#[inline]
pub(crate) fn adjacent(a: u32, b: u32) -> bool {
    a.abs_diff(b) == 1
}

/// Regular bond count of a raw one-line slice.
pub(crate) fn bonds_of(values: &[u32]) -> usize {
    values.windows(2).filter(|w| adjacent(w[0], w[1])).count()
}

/// Cyclic bond count of a raw one-line slice.
pub(crate) fn cyclic_bonds_of(values: &[u32]) -> usize {
    match values.len() {
        0 | 1 => 0,
        n => bonds_of(values) + usize::from(adjacent(values[n - 1], values[0])),
    }
}

impl Permutation {
    /// Validates `values` as a rearrangement of `1..=n`.
    pub fn new(values: Vec<u32>) -> Result<Self, PermError> {
        let n = values.len();
        if n == 0 {
            return Err(PermError::Empty);
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v as usize > n {
                return Err(PermError::OutOfRange { value: v, n });
            }
            if std::mem::replace(&mut seen[v as usize], true) {
                return Err(PermError::Duplicate(v));
            }
        }
        Ok(Permutation { values })
    }

    pub(crate) fn from_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation { values }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "identity of order 0");
        Permutation { values: (1..=n as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u32> {
        self.values
    }

    /// Value at a 1-based position.
    pub fn at(&self, position: usize) -> u32 {
        self.values[position - 1]
    }

    pub fn first(&self) -> u32 {
        self.values[0]
    }

    pub fn last(&self) -> u32 {
        self.values[self.values.len() - 1]
    }

    /// 1-based position of `value`.
    pub fn position_of(&self, value: u32) -> Option<usize> {
        self.values.iter().position(|&v| v == value).map(|i| i + 1)
    }

    /// Number of regular bonds.
    pub fn bnd(&self) -> usize {
        bonds_of(&self.values)
    }

    /// Number of cyclic bonds (regular plus edge).
    pub fn cbnd(&self) -> usize {
        cyclic_bonds_of(&self.values)
    }

    /// All bonds in position order. For `n = 2` both the regular record and
    /// the edge record are emitted; for `n = 1` the list is empty.
    pub fn list_bonds(&self) -> Vec<BondRecord> {
        let n = self.len();
        if n < 2 {
            return Vec::new();
        }
        let mut out: Vec<BondRecord> = self
            .values
            .windows(2)
            .enumerate()
            .filter(|(_, w)| adjacent(w[0], w[1]))
            .map(|(i, _)| BondRecord { position: i + 1, kind: BondKind::Regular })
            .collect();
        if adjacent(self.last(), self.first()) {
            out.push(BondRecord { position: n, kind: BondKind::Edge });
        }
        out
    }

    pub fn is_king(&self) -> bool {
        self.bnd() == 0
    }

    pub fn is_cyl_king(&self) -> bool {
        self.cbnd() == 0
    }

    /// True when the wrap pair `(p[n], p[1])` is a bond.
    pub fn has_edge_bond(&self) -> bool {
        self.len() >= 2 && adjacent(self.last(), self.first())
    }

    /// Left cyclic shift of the one-line notation by `shift` places.
    pub fn rotate(&self, shift: usize) -> Result<Permutation, PermError> {
        let n = self.len();
        if shift >= n {
            return Err(PermError::BadRotation { shift, n });
        }
        let mut values = self.values.clone();
        values.rotate_left(shift);
        Ok(Permutation { values })
    }

    /// Removes the entry at `position` and closes the gap in the value set.
    pub fn delete_standardize(&self, position: usize) -> Result<Permutation, PermError> {
        let n = self.len();
        if n == 1 {
            return Err(PermError::DeleteFromSingleton);
        }
        if position == 0 || position > n {
            return Err(PermError::BadPosition { position, max: n });
        }
        let removed = self.values[position - 1];
        let values = self
            .values
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != position - 1)
            .map(|(_, &v)| if v > removed { v - 1 } else { v })
            .collect();
        Ok(Permutation { values })
    }

    /// Removes `value` wherever it sits.
    pub fn delete_value(&self, value: u32) -> Result<Permutation, PermError> {
        let position = self
            .position_of(value)
            .ok_or(PermError::OutOfRange { value, n: self.len() })?;
        self.delete_standardize(position)
    }

    /// Shifts every value `>= value` up by one, then places `value` at
    /// `position` (1-based, up to `n + 1`).
    pub fn insert_value(&self, position: usize, value: u32) -> Result<Permutation, PermError> {
        let n = self.len();
        if position == 0 || position > n + 1 {
            return Err(PermError::BadPosition { position, max: n + 1 });
        }
        if value == 0 || value as usize > n + 1 {
            return Err(PermError::OutOfRange { value, n: n + 1 });
        }
        let mut values: Vec<u32> =
            self.values.iter().map(|&v| if v >= value { v + 1 } else { v }).collect();
        values.insert(position - 1, value);
        Ok(Permutation { values })
    }

    /// Inverse permutation.
    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { values: inv }
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = PermError;
    fn try_from(values: Vec<u32>) -> Result<Self, PermError> {
        Permutation::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.values
    }
}

/// Compact form `[3142]` when every value is a single digit, otherwise
/// `[3,1,4,2,...]`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.len() < 10 { "" } else { "," };
        f.write_str("[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `3142`, `[3142]`, or comma/space separated values.
impl FromStr for Permutation {
    type Err = PermError;

    fn from_str(s: &str) -> Result<Self, PermError> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        let values: Vec<u32> = if body.contains(',') || body.contains(char::is_whitespace) {
            body.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| PermError::Parse(s.to_string())))
                .collect::<Result<_, _>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(10).ok_or_else(|| PermError::Parse(s.to_string())))
                .collect::<Result<_, _>>()?
        };
        Permutation::new(values)
    }
}

/// Shorthand for tests and examples: `perm("3142")`. Panics on bad input.
pub fn perm(s: &str) -> Permutation {
    s.parse().unwrap_or_else(|e| panic!("bad permutation literal {s:?}: {e}"))
}

/// All permutations of `1..=n` in lexicographic order.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    let mut current: Option<Vec<u32>> = (n >= 1).then(|| (1..=n as u32).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        current = next_permutation(&mut next).then_some(next);
        Some(Permutation { values: out })
    })
}

/// Advances `v` to its lexicographic successor; false when `v` was the last.
pub(crate) fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn construction() {
        assert_eq!(Permutation::new(vec![3, 1, 4, 2]).unwrap(), perm("3142"));
        assert_eq!(Permutation::new(vec![1]).unwrap().values(), &[1]);
        assert_eq!(Permutation::new(vec![1, 1]), Err(PermError::Duplicate(1)));
        assert_eq!(Permutation::new(vec![]), Err(PermError::Empty));
        assert_eq!(Permutation::new(vec![1, 3]), Err(PermError::OutOfRange { value: 3, n: 2 }));
        assert_eq!(Permutation::new(vec![0]), Err(PermError::OutOfRange { value: 0, n: 1 }));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("[41325]".parse::<Permutation>().unwrap().values(), &[4, 1, 3, 2, 5]);
        assert_eq!("1, 2".parse::<Permutation>().unwrap(), perm("12"));
        let big: Permutation = "10,1,2,3,4,5,6,7,8,9".parse().unwrap();
        assert_eq!(big.to_string(), "[10,1,2,3,4,5,6,7,8,9]");
        assert_eq!(perm("2413").to_string(), "[2413]");
        assert!("12a".parse::<Permutation>().is_err());
    }

    #[test]
    fn bond_counts() {
        assert_eq!(perm("41325").bnd(), 1);
        assert_eq!(perm("41325").cbnd(), 2);
        assert_eq!(Permutation::identity(7).bnd(), 6);
        assert_eq!(perm("2413").bnd(), 0);
        assert_eq!(perm("12").cbnd(), 2);
        assert_eq!(perm("21").cbnd(), 2);
        assert_eq!(perm("31425").cbnd(), 0);
        assert_eq!(perm("1").cbnd(), 0);
        assert_eq!(perm("1").bnd(), 0);
    }

    #[test]
    fn bond_lists() {
        use BondKind::*;
        assert_eq!(
            perm("41325").list_bonds(),
            vec![BondRecord { position: 3, kind: Regular }, BondRecord { position: 5, kind: Edge }]
        );
        assert!(perm("31425").list_bonds().is_empty());
        assert_eq!(
            perm("21").list_bonds(),
            vec![BondRecord { position: 1, kind: Regular }, BondRecord { position: 2, kind: Edge }]
        );
        assert!(perm("1").list_bonds().is_empty());
    }

    #[test]
    fn king_predicates() {
        assert!(perm("3142").is_king());
        assert!(!perm("3142").is_cyl_king());
        assert!(perm("31425").is_cyl_king());
        assert!(perm("1").is_king() && perm("1").is_cyl_king());
    }

    #[test]
    fn rotation() {
        let p = perm("2134");
        assert_eq!(p.rotate(1).unwrap(), perm("1342"));
        assert_eq!(p.rotate(2).unwrap(), perm("3421"));
        assert_eq!(p.rotate(3).unwrap(), perm("4213"));
        assert_eq!(p.rotate(0).unwrap(), p);
        assert_eq!(p.rotate(4), Err(PermError::BadRotation { shift: 4, n: 4 }));
    }

    #[test]
    fn delete_and_insert() {
        let step = perm("426153").delete_standardize(6).unwrap();
        assert_eq!(step, perm("32514"));
        assert_eq!(step.delete_standardize(1).unwrap(), perm("2413"));

        let p = perm("5137246");
        let pos = p.position_of(6).unwrap();
        assert_eq!(p.delete_standardize(pos).unwrap(), perm("513624"));
        assert_eq!(perm("12").delete_standardize(2).unwrap(), perm("1"));

        assert_eq!(perm("1").delete_standardize(1), Err(PermError::DeleteFromSingleton));
        assert_eq!(perm("12").delete_standardize(3), Err(PermError::BadPosition { position: 3, max: 2 }));

        assert_eq!(perm("2413").insert_value(1, 3).unwrap(), perm("32514"));
        assert_eq!(perm("32514").insert_value(6, 3).unwrap(), perm("426153"));
        assert_eq!(perm("53142").insert_value(1, 3).unwrap(), perm("364152"));
        assert!(perm("12").insert_value(4, 1).is_err());
        assert!(perm("12").insert_value(1, 4).is_err());
    }

    #[test]
    fn lexicographic_enumeration() {
        let all: Vec<_> = all_permutations(3).map(|p| p.to_string()).collect();
        assert_eq!(all, ["[123]", "[132]", "[213]", "[231]", "[312]", "[321]"]);
        assert_eq!(all_permutations(6).count(), 720);
        assert_eq!(all_permutations(1).count(), 1);
    }

    #[test]
    fn rotation_preserves_cyclic_bonds() {
        for n in 2..=8 {
            for p in all_permutations(n) {
                let c = p.cbnd();
                for i in 0..n {
                    assert_eq!(p.rotate(i).unwrap().cbnd(), c, "{p} rotated by {i}");
                }
            }
        }
    }

    #[test]
    fn exhaustive_small_order_properties() {
        for n in 1..=8 {
            for p in all_permutations(n) {
                let (b, c) = (p.bnd(), p.cbnd());
                if n >= 3 {
                    assert!(b <= c && c <= b + 1, "{p}");
                }
                if p.is_cyl_king() {
                    assert!(p.is_king(), "{p}");
                }
                if n >= 2 {
                    assert_eq!(p.list_bonds().len(), c, "{p}");
                }
            }
        }
    }

    #[test]
    fn delete_insert_roundtrip_exhaustive() {
        for n in 1..=6 {
            for p in all_permutations(n) {
                if n == 1 {
                    continue;
                }
                for pos in 1..=n {
                    let v = p.at(pos);
                    let q = p.delete_standardize(pos).unwrap();
                    assert_eq!(q.insert_value(pos, v).unwrap(), p);
                }
            }
        }
    }

    fn arb_perm(max_n: usize) -> impl Strategy<Value = Permutation> {
        (2..=max_n)
            .prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn delete_insert_roundtrip(p in arb_perm(12), pos_seed in any::<usize>()) {
            let pos = pos_seed % p.len() + 1;
            let v = p.at(pos);
            let q = p.delete_standardize(pos).unwrap();
            prop_assert_eq!(q.insert_value(pos, v).unwrap(), p);
        }

        #[test]
        fn serde_roundtrip(p in arb_perm(12)) {
            let json = serde_json::to_string(&p).unwrap();
            prop_assert_eq!(serde_json::from_str::<Permutation>(&json).unwrap(), p);
        }
    }
}
