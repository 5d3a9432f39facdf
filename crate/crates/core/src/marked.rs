//! Marked permutations: a permutation together with a chosen subset of its
//! cyclic bonds.
//!
//! Chosen bonds glue entries into *runs* (maximal chains along the cycle);
//! every other entry is a trivial run of length 1. A run is a block of
//! consecutive values read in increasing or decreasing order, so a marked
//! permutation is determined by
//!
//! * `lambda`: the run lengths and directions, listed by increasing value
//!   (block `b_j` holds the `j`-th lowest interval of values),
//! * `sigma`: which block sits at each location, with locations counted from
//!   the first run that does not wrap,
//! * `r`: how many entries of the last run wrap around to the front.
//!
//! Notation: `[2/45/6/1/987/3]` lists entries in position order. A `/`
//! between two entries means that position is not chosen; a trailing `/`
//! means the edge bond (last entry to first) exists but is not chosen. For
//! orders of 10 and above, entries inside a run are separated by commas.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{Oracle, OracleError};
use crate::poly::IntPoly;
use crate::perm::{adjacent, all_permutations, PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkedError {
    #[error("position {0} is not a cyclic bond")]
    NotABond(usize),
    #[error("every cyclic position is chosen; runs would close into a cycle")]
    FullCycle,
    #[error("composition parts sum to {sum}, expected {n}")]
    BadComposition { sum: usize, n: usize },
    #[error("part {index} has length {length} but direction {direction:?}")]
    BadDirection { index: usize, length: usize, direction: Direction },
    #[error("block placement {0:?} is not a permutation of the blocks")]
    BadPlacement(Vec<usize>),
    #[error("wrap offset {r} must be below the last run's length {length}")]
    BadWrap { r: usize, length: usize },
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("could not parse marked permutation {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    None,
    Up,
    Down,
}

/// One part of a directed composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Part {
    pub length: usize,
    pub direction: Direction,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::None => write!(f, "{}", self.length),
            Direction::Up => write!(f, "{}↑", self.length),
            Direction::Down => write!(f, "{}↓", self.length),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedPermutation {
    base: Permutation,
    chosen: BTreeSet<usize>,
}

/// A run: its values in cyclic reading order and the position of its first
/// entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub values: Vec<u32>,
}

impl Run {
    pub fn direction(&self) -> Direction {
        match self.values.as_slice() {
            [_] => Direction::None,
            [a, b, ..] if a < b => Direction::Up,
            _ => Direction::Down,
        }
    }

    fn min(&self) -> u32 {
        *self.values.iter().min().expect("runs are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedDecomposition {
    pub lambda: Vec<Part>,
    /// `sigma[loc]` is the 1-based block index at location `loc + 1`.
    pub sigma: Vec<usize>,
    pub r: usize,
}

impl fmt::Display for MarkedDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lambda.iter().map(Part::to_string).collect();
        let sigma: Vec<String> = self.sigma.iter().map(usize::to_string).collect();
        let sep = if self.sigma.len() >= 10 { "," } else { "" };
        write!(f, "λ=({}), σ=[{}], r={}", parts.join(","), sigma.join(sep), self.r)
    }
}

impl MarkedPermutation {
    pub fn new(base: Permutation, chosen: impl IntoIterator<Item = usize>) -> Result<Self, MarkedError> {
        let chosen: BTreeSet<usize> = chosen.into_iter().collect();
        let bonds: BTreeSet<usize> = base.list_bonds().iter().map(|b| b.position).collect();
        if let Some(&bad) = chosen.iter().find(|p| !bonds.contains(p)) {
            return Err(MarkedError::NotABond(bad));
        }
        if base.len() >= 2 && chosen.len() == base.len() {
            return Err(MarkedError::FullCycle);
        }
        Ok(MarkedPermutation { base, chosen })
    }

    pub fn unmarked(base: Permutation) -> Self {
        MarkedPermutation { base, chosen: BTreeSet::new() }
    }

    pub fn base(&self) -> &Permutation {
        &self.base
    }

    pub fn chosen(&self) -> &BTreeSet<usize> {
        &self.chosen
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    /// Runs in location order: the first starts right after the wrapped
    /// prefix, the last is the run containing position `n`.
    pub fn runs(&self) -> Vec<Run> {
        let n = self.n();
        let chosen_at = |pos: usize| self.chosen.contains(&pos);
        // Entry j starts a run when the bond leading into it is not chosen.
        let starts = (1..=n).filter(|&j| !chosen_at(if j == 1 { n } else { j - 1 }));
        starts
            .map(|start| {
                let mut values = vec![self.base.at(start)];
                let mut pos = start;
                while chosen_at(pos) {
                    pos = pos % n + 1;
                    values.push(self.base.at(pos));
                }
                Run { start, values }
            })
            .collect()
    }

    pub fn encode(&self) -> MarkedDecomposition {
        let n = self.n();
        let runs = self.runs();
        let mut by_value: Vec<usize> = (0..runs.len()).collect();
        by_value.sort_by_key(|&i| runs[i].min());
        let mut block_of = vec![0; runs.len()];
        for (block, &loc) in by_value.iter().enumerate() {
            block_of[loc] = block + 1;
        }
        let lambda = by_value
            .iter()
            .map(|&loc| Part { length: runs[loc].values.len(), direction: runs[loc].direction() })
            .collect();
        let last = runs.last().expect("at least one run");
        let r = (last.start + last.values.len() - 1).saturating_sub(n);
        MarkedDecomposition { lambda, sigma: block_of, r }
    }

    pub fn decode(d: &MarkedDecomposition, n: usize) -> Result<Self, MarkedError> {
        let sum: usize = d.lambda.iter().map(|p| p.length).sum();
        if sum != n || n == 0 {
            return Err(MarkedError::BadComposition { sum, n });
        }
        for (index, part) in d.lambda.iter().enumerate() {
            if part.length == 0 || (part.length == 1) != (part.direction == Direction::None) {
                return Err(MarkedError::BadDirection { index, length: part.length, direction: part.direction });
            }
        }
        let m = d.lambda.len();
        let mut seen = vec![false; m + 1];
        let valid = d.sigma.len() == m
            && d.sigma.iter().all(|&b| (1..=m).contains(&b) && !std::mem::replace(&mut seen[b], true));
        if !valid {
            return Err(MarkedError::BadPlacement(d.sigma.clone()));
        }
        let last_len = d.lambda[d.sigma[m - 1] - 1].length;
        if d.r >= last_len {
            return Err(MarkedError::BadWrap { r: d.r, length: last_len });
        }

        let mut lows = Vec::with_capacity(m);
        let mut next = 1u32;
        for part in &d.lambda {
            lows.push(next);
            next += part.length as u32;
        }
        let mut layout = Vec::with_capacity(n);
        let mut internal = Vec::new();
        for &block in &d.sigma {
            let part = d.lambda[block - 1];
            let lo = lows[block - 1];
            let hi = lo + part.length as u32 - 1;
            let start = layout.len();
            match part.direction {
                Direction::Down => layout.extend((lo..=hi).rev()),
                _ => layout.extend(lo..=hi),
            }
            internal.extend(start..layout.len() - 1);
        }
        layout.rotate_right(d.r);
        let chosen = internal.into_iter().map(|i| (i + d.r) % n + 1);
        MarkedPermutation::new(Permutation::new(layout)?, chosen)
    }

    /// Every marking of `base`: all subsets of its cyclic bond positions
    /// except the one choosing every position.
    pub fn all_markings(base: &Permutation) -> Vec<MarkedPermutation> {
        let bonds: Vec<usize> = base.list_bonds().iter().map(|b| b.position).collect();
        (0u64..1 << bonds.len())
            .filter_map(|mask| {
                let chosen = bonds.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p);
                MarkedPermutation::new(base.clone(), chosen).ok()
            })
            .collect()
    }
}

impl fmt::Display for MarkedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n();
        let glue = if n >= 10 { "," } else { "" };
        f.write_str("[")?;
        for i in 1..=n {
            write!(f, "{}", self.base.at(i))?;
            if i < n {
                f.write_str(if self.chosen.contains(&i) { glue } else { "/" })?;
            }
        }
        if n >= 2 && adjacent(self.base.last(), self.base.first()) && !self.chosen.contains(&n) {
            f.write_str("/")?;
        }
        f.write_str("]")
    }
}

impl FromStr for MarkedPermutation {
    type Err = MarkedError;

    fn from_str(s: &str) -> Result<Self, MarkedError> {
        let err = || MarkedError::Parse(s.to_string());
        let body = s.trim().strip_prefix('[').and_then(|b| b.strip_suffix(']')).ok_or_else(err)?;
        let (body, trailing) = match body.strip_suffix('/') {
            Some(b) => (b, true),
            None => (body, false),
        };
        let comma_mode = body.contains(',');
        let mut values = Vec::new();
        let mut cut_after = BTreeSet::new();
        for (gi, group) in body.split('/').enumerate() {
            if gi > 0 {
                cut_after.insert(values.len());
            }
            let items: Vec<u32> = if comma_mode {
                group.split(',').map(|t| t.trim().parse().map_err(|_| err())).collect::<Result<_, _>>()?
            } else {
                group.chars().map(|c| c.to_digit(10).ok_or_else(err)).collect::<Result<_, _>>()?
            };
            if items.is_empty() {
                return Err(err());
            }
            values.extend(items);
        }
        let base = Permutation::new(values)?;
        let n = base.len();
        let mut chosen: Vec<usize> = (1..n).filter(|i| !cut_after.contains(i)).collect();
        if n >= 2 && !trailing && adjacent(base.last(), base.first()) {
            chosen.push(n);
        }
        MarkedPermutation::new(base, chosen)
    }
}

/// `counts[k]` = number of (permutation, marking) pairs of order `n` with
/// exactly `k` chosen bonds, counting every subset of cyclic bond positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedTable {
    pub n: usize,
    #[serde(with = "crate::serde_dec::vec")]
    pub counts: Vec<BigUint>,
}

impl MarkedTable {
    /// `sum_k f_k u^k`
    pub fn to_poly(&self) -> IntPoly {
        IntPoly::from_coeffs(self.counts.iter().map(|c| BigInt::from(c.clone())).collect())
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

fn trimmed(mut counts: Vec<BigUint>) -> Vec<BigUint> {
    while counts.last().is_some_and(Zero::is_zero) {
        counts.pop();
    }
    counts
}

/// Direct count over every permutation and every subset of its bonds.
pub fn marked_table(oracle: &Oracle, n: usize) -> Result<MarkedTable, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroOrder);
    }
    oracle.caps().check_brute_force(n)?;
    let mut counts = vec![0u64; n + 1];
    for p in all_permutations(n) {
        let bonds = p.list_bonds().len();
        for mask in 0u32..1 << bonds {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    Ok(MarkedTable { n, counts: trimmed(counts.into_iter().map(BigUint::from).collect()) })
}

/// `f_k = sum_j C(j, k) a_j`
pub fn binomial_transform(a: &[BigUint]) -> Vec<BigUint> {
    let out = (0..a.len())
        .map(|k| (k..a.len()).map(|j| binomial(j, k) * &a[j]).sum())
        .collect();
    trimmed(out)
}

/// `a_k = sum_j (-1)^(j-k) C(j, k) f_j`; fails if any result is negative.
pub fn inverse_binomial_transform(f: &[BigUint]) -> Option<Vec<BigUint>> {
    let out: Option<Vec<BigUint>> = (0..f.len())
        .map(|k| {
            let total: BigInt = (k..f.len())
                .map(|j| {
                    let term = BigInt::from(binomial(j, k) * &f[j]);
                    if (j - k) % 2 == 0 { term } else { -term }
                })
                .sum();
            total.to_biguint()
        })
        .collect();
    out.map(trimmed)
}

/// The marked table via the binomial transform of the cyclic bond
/// distribution.
pub fn marked_table_from_distribution(oracle: &Oracle, n: usize) -> Result<MarkedTable, OracleError> {
    let dist = oracle.dist_cbnd(n)?;
    Ok(MarkedTable { n, counts: binomial_transform(&dist.counts) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::perm;

    fn marked(s: &str) -> MarkedPermutation {
        s.parse().unwrap()
    }

    fn run_strings(mp: &MarkedPermutation) -> Vec<String> {
        mp.runs()
            .iter()
            .map(|r| r.values.iter().map(u32::to_string).collect::<String>())
            .collect()
    }

    fn parts(spec: &[(usize, Direction)]) -> Vec<Part> {
        spec.iter().map(|&(length, direction)| Part { length, direction }).collect()
    }

    #[test]
    fn notation_roundtrip_and_meaning() {
        for s in ["[2/45/6/1/987/3]", "[45/6/1/987/32]", "[8/3/12/4567/]", "[8/3/12/4567]", "[1]", "[1/2/]"] {
            assert_eq!(marked(s).to_string(), s);
        }
        let mp = marked("[2/45/6/1/987/3]");
        assert_eq!(mp.base(), &perm("245619873"));
        assert_eq!(mp.chosen().iter().copied().collect::<Vec<_>>(), [2, 6, 7, 9]);
        assert!(matches!("[2/45/6/1/97/8/3]".parse::<MarkedPermutation>(), Err(MarkedError::NotABond(6))));
        assert!("2/1".parse::<MarkedPermutation>().is_err());
    }

    #[test]
    fn runs_follow_chosen_bonds() {
        assert_eq!(run_strings(&marked("[8/3/12/4567/]")), ["8", "3", "12", "4567"]);
        // Without the trailing slash the edge bond (7, 8) is chosen.
        assert_eq!(run_strings(&marked("[8/3/12/4567]")), ["3", "12", "45678"]);
        let four = MarkedPermutation::new(perm("83124567"), [3, 5, 6, 7]).unwrap();
        assert_eq!(four, marked("[8/3/12/4567/]"));
        assert_eq!(run_strings(&marked("[8/3/1/2/4567/]")), ["8", "3", "1", "2", "4567"]);
        assert_eq!(run_strings(&MarkedPermutation::unmarked(perm("31425"))), ["3", "1", "4", "2", "5"]);

        let mut blocks = run_strings(&marked("[2/45/6/1/987/3]"));
        assert_eq!(blocks, ["45", "6", "1", "987", "32"]);
        blocks.sort_by_key(|b| b.chars().map(|c| c.to_digit(10).unwrap()).min());
        assert_eq!(blocks, ["1", "32", "45", "6", "987"]);
    }

    #[test]
    fn worked_example_decomposition() {
        use Direction::*;
        let lambda = parts(&[(1, None), (2, Down), (2, Up), (1, None), (3, Down)]);
        let d = marked("[2/45/6/1/987/3]").encode();
        assert_eq!(d, MarkedDecomposition { lambda: lambda.clone(), sigma: vec![3, 4, 1, 5, 2], r: 1 });
        assert_eq!(d.to_string(), "λ=(1,2↓,2↑,1,3↓), σ=[34152], r=1");
        let d0 = marked("[45/6/1/987/32]").encode();
        assert_eq!(d0, MarkedDecomposition { lambda, sigma: vec![3, 4, 1, 5, 2], r: 0 });
        assert_eq!(MarkedPermutation::decode(&d, 9).unwrap(), marked("[2/45/6/1/987/3]"));

        let single = MarkedPermutation::unmarked(perm("1")).encode();
        assert_eq!(single, MarkedDecomposition { lambda: parts(&[(1, None)]), sigma: vec![1], r: 0 });
    }

    #[test]
    fn decode_rejects_inconsistent_data() {
        use Direction::*;
        let ok = MarkedDecomposition { lambda: parts(&[(2, Up), (1, None)]), sigma: vec![2, 1], r: 1 };
        assert_eq!(MarkedPermutation::decode(&ok, 3).unwrap().to_string(), "[2/3/1]");
        let cases = [
            (MarkedDecomposition { r: 0, ..ok.clone() }, 4, "sum"),
            (MarkedDecomposition { lambda: parts(&[(2, None), (1, None)]), ..ok.clone() }, 3, "direction"),
            (MarkedDecomposition { lambda: parts(&[(2, Up), (1, Up)]), ..ok.clone() }, 3, "direction"),
            (MarkedDecomposition { sigma: vec![1, 1], ..ok.clone() }, 3, "placement"),
            (MarkedDecomposition { sigma: vec![1], ..ok.clone() }, 3, "placement"),
            (MarkedDecomposition { sigma: vec![1, 2], r: 1, ..ok.clone() }, 3, "wrap"),
        ];
        for (d, n, what) in cases {
            assert!(MarkedPermutation::decode(&d, n).is_err(), "{what}: {d}");
        }
    }

    #[test]
    fn full_cycle_marking_is_rejected() {
        assert_eq!(MarkedPermutation::new(perm("12"), [1, 2]), Err(MarkedError::FullCycle));
        assert_eq!(MarkedPermutation::all_markings(&perm("12")).len(), 3);
    }

    #[test]
    fn roundtrip_exhaustive_small_orders() {
        for n in 1..=6 {
            for p in all_permutations(n) {
                for mp in MarkedPermutation::all_markings(&p) {
                    let d = mp.encode();
                    assert_eq!(MarkedPermutation::decode(&d, n).unwrap(), mp, "{mp} -> {d}");
                    assert_eq!(mp.to_string().parse::<MarkedPermutation>().unwrap(), mp);
                }
            }
        }
    }

    #[test]
    fn roundtrip_random_markings() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x6b696e67);
        for _ in 0..3000 {
            let n = rng.gen_range(7..=10);
            let mut v: Vec<u32> = (1..=n).collect();
            // Bias towards many bonds so long and wrapping runs show up.
            if rng.gen_bool(0.5) {
                v.rotate_left(rng.gen_range(0..n as usize));
                let cut = rng.gen_range(0..n as usize);
                v[cut..].reverse();
            } else {
                v.shuffle(&mut rng);
            }
            let p = Permutation::new(v).unwrap();
            let bonds: Vec<usize> = p.list_bonds().iter().map(|b| b.position).collect();
            let chosen: Vec<usize> = bonds.into_iter().filter(|_| rng.gen_bool(0.7)).collect();
            let Ok(mp) = MarkedPermutation::new(p, chosen) else { continue };
            let d = mp.encode();
            assert_eq!(MarkedPermutation::decode(&d, n as usize).unwrap(), mp);
        }
    }

    #[test]
    fn marked_tables_two_ways() {
        let o = Oracle::default();
        let small = |n| marked_table(&o, n).unwrap().counts;
        let big = |v: &[u32]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert_eq!(small(3), big(&[6, 12, 6]));
        assert_eq!(small(1), big(&[1]));
        assert_eq!(small(4), big(&[24, 48, 32, 8]));
        for n in 1..=8 {
            let direct = marked_table(&o, n).unwrap();
            assert_eq!(direct, marked_table_from_distribution(&o, n).unwrap(), "n={n}");
            let back = inverse_binomial_transform(&direct.counts).unwrap();
            assert_eq!(back, o.dist_cbnd(n).unwrap().counts, "n={n}");
        }
    }

    #[test]
    fn series_f_counts_markings() {
        let o = Oracle::default();
        let f = crate::series::series_f(8);
        for n in (1..=8).filter(|&n| n != 2) {
            assert_eq!(f.coeff(n), &marked_table(&o, n).unwrap().to_poly(), "n={n}");
        }
        // Order 2: the series sees one markable bond per permutation, the
        // direct count sees two.
        assert_eq!(f.coeff(2), &IntPoly::from_i64s(&[2, 2]));
        assert_eq!(marked_table(&o, 2).unwrap().to_poly(), IntPoly::from_i64s(&[2, 4, 2]));
    }
}
