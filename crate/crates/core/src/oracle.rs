//! Ground-truth enumeration.
//!
//! Two engines live here and are deliberately kept apart:
//!
//! * a literal filter over all `n!` permutations, producing full bond and
//!   cyclic-bond distributions ([`Oracle::dist_bnd`], [`Oracle::dist_cbnd`]);
//! * a pruned depth-first counter that places values left to right and
//!   rejects a value as soon as it would create a forbidden bond
//!   ([`Oracle::count_kings`], [`Oracle::count_cyl_kings`]).
//!
//! The first is slow and obviously correct; the second reaches further and is
//! checked against the first wherever both apply.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{adjacent, bonds_of, cyclic_bonds_of, next_permutation, Permutation};
use crate::poly::IntPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("order {n} exceeds the {engine} cap of {cap}")]
    CapExceeded { engine: &'static str, n: usize, cap: usize },
    #[error("order must be at least 1")]
    ZeroOrder,
}

/// Size limits for the enumeration engines and series truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub brute_force: usize,
    pub backtracking: usize,
    pub series_order: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { brute_force: 10, backtracking: 13, series_order: 12 }
    }
}

impl Caps {
    pub fn check_brute_force(&self, n: usize) -> Result<(), OracleError> {
        if n > self.brute_force {
            return Err(OracleError::CapExceeded { engine: "brute-force", n, cap: self.brute_force });
        }
        Ok(())
    }

    pub fn check_backtracking(&self, n: usize) -> Result<(), OracleError> {
        // The counter packs the used set into a u32 and its totals into u64.
        let cap = self.backtracking.min(20);
        if n > cap {
            return Err(OracleError::CapExceeded { engine: "backtracking", n, cap });
        }
        Ok(())
    }

    pub fn check_series(&self, order: usize) -> Result<(), OracleError> {
        if order > self.series_order {
            return Err(OracleError::CapExceeded { engine: "series", n: order, cap: self.series_order });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Bonds,
    CyclicBonds,
}

impl Statistic {
    pub fn of(self, values: &[u32]) -> usize {
        match self {
            Statistic::Bonds => bonds_of(values),
            Statistic::CyclicBonds => cyclic_bonds_of(values),
        }
    }
}

/// `counts[k]` = number of permutations of order `n` whose statistic equals
/// `k`. Trailing zero counts are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistTable {
    pub n: usize,
    #[serde(with = "crate::serde_dec::vec")]
    pub counts: Vec<BigUint>,
}

impl DistTable {
    fn from_u64(n: usize, raw: &[u64]) -> Self {
        let mut counts: Vec<BigUint> = raw.iter().map(|&c| BigUint::from(c)).collect();
        while counts.last().is_some_and(Zero::is_zero) {
            counts.pop();
        }
        DistTable { n, counts }
    }

    pub fn count(&self, k: usize) -> BigUint {
        self.counts.get(k).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Generating polynomial `sum_k counts[k] * t^k`.
    pub fn to_poly(&self) -> IntPoly {
        IntPoly::from_coeffs(self.counts.iter().map(|c| BigInt::from(c.clone())).collect())
    }
}

/// Headline counts for one order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub n: usize,
    #[serde(with = "crate::serde_dec")]
    pub kings: BigUint,
    #[serde(with = "crate::serde_dec")]
    pub cyl_kings: BigUint,
    #[serde(with = "crate::serde_dec")]
    pub a_n: BigUint,
    #[serde(with = "crate::serde_dec")]
    pub cb1: BigUint,
}

impl CountRow {
    fn new(n: usize, kings: BigUint, cyl_kings: BigUint, cb1: BigUint) -> Self {
        assert!(cyl_kings <= kings, "more cylindrical kings than kings at n = {n}");
        let a_n = &kings - &cyl_kings;
        CountRow { n, kings, cyl_kings, a_n, cb1 }
    }
}

#[derive(Debug)]
struct BruteDists {
    bonds: DistTable,
    cyclic: DistTable,
}

/// Entry point to both enumeration engines. Brute-force distributions and
/// backtracking counts are memoized per order.
#[derive(Debug, Default)]
pub struct Oracle {
    caps: Caps,
    cache: Mutex<HashMap<usize, Arc<BruteDists>>>,
    counts: Mutex<HashMap<(usize, Mode), u64>>,
}

impl Oracle {
    pub fn new(caps: Caps) -> Self {
        Oracle { caps, ..Oracle::default() }
    }

    fn backtracked(&self, n: usize, mode: Mode) -> Result<BigUint, OracleError> {
        self.caps.check_backtracking(n)?;
        if let Some(&hit) = self.counts.lock().unwrap().get(&(n, mode)) {
            return Ok(hit.into());
        }
        let count = backtrack_count(n, mode);
        self.counts.lock().unwrap().insert((n, mode), count);
        Ok(count.into())
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    fn brute(&self, n: usize) -> Result<Arc<BruteDists>, OracleError> {
        if n == 0 {
            return Err(OracleError::ZeroOrder);
        }
        self.caps.check_brute_force(n)?;
        if let Some(hit) = self.cache.lock().unwrap().get(&n) {
            return Ok(hit.clone());
        }
        let [bonds, cyclic] = brute_force_hist(n, &[Statistic::Bonds, Statistic::CyclicBonds], |_| true)
            .try_into()
            .expect("two statistics requested");
        let dists = Arc::new(BruteDists { bonds, cyclic });
        self.cache.lock().unwrap().insert(n, dists.clone());
        Ok(dists)
    }

    /// Distribution of regular bonds over `S_n`.
    pub fn dist_bnd(&self, n: usize) -> Result<DistTable, OracleError> {
        Ok(self.brute(n)?.bonds.clone())
    }

    /// Distribution of cyclic bonds over `S_n`.
    pub fn dist_cbnd(&self, n: usize) -> Result<DistTable, OracleError> {
        Ok(self.brute(n)?.cyclic.clone())
    }

    /// Distribution of `stat` over the permutations of `S_n` accepted by
    /// `filter`. Not memoized.
    pub fn dist_filtered<F>(&self, n: usize, stat: Statistic, filter: F) -> Result<DistTable, OracleError>
    where
        F: Fn(&[u32]) -> bool + Sync,
    {
        if n == 0 {
            return Err(OracleError::ZeroOrder);
        }
        self.caps.check_brute_force(n)?;
        Ok(brute_force_hist(n, &[stat], filter).pop().unwrap())
    }

    /// `B_n(t)` with `B_0 = 1`.
    pub fn bond_poly(&self, n: usize) -> Result<IntPoly, OracleError> {
        if n == 0 {
            return Ok(IntPoly::one());
        }
        Ok(self.brute(n)?.bonds.to_poly())
    }

    /// `CB_n(t)` with `CB_0 = 1`.
    pub fn cyclic_bond_poly(&self, n: usize) -> Result<IntPoly, OracleError> {
        if n == 0 {
            return Ok(IntPoly::one());
        }
        Ok(self.brute(n)?.cyclic.to_poly())
    }

    /// Number of permutations of `S_n` with exactly one cyclic bond, by brute force.
    pub fn cb1(&self, n: usize) -> Result<BigUint, OracleError> {
        if n == 0 {
            return Ok(BigUint::zero());
        }
        Ok(self.brute(n)?.cyclic.count(1))
    }

    /// `|K_n|` by pruned backtracking; `|K_0| = 1`.
    pub fn count_kings(&self, n: usize) -> Result<BigUint, OracleError> {
        self.backtracked(n, Mode::Kings)
    }

    /// `|CK_n|` by pruned backtracking; `|CK_0| = 1`.
    pub fn count_cyl_kings(&self, n: usize) -> Result<BigUint, OracleError> {
        self.backtracked(n, Mode::CylKings)
    }

    /// `|CB_{1,n}|` by pruned backtracking (one cyclic bond allowed).
    pub fn count_single_cyclic_bond(&self, n: usize) -> Result<BigUint, OracleError> {
        self.backtracked(n, Mode::SingleCyclicBond)
    }

    /// Kings of order `n` in lexicographic order.
    pub fn enumerate_kings(&self, n: usize) -> Result<KingIter, OracleError> {
        if n == 0 {
            return Err(OracleError::ZeroOrder);
        }
        self.caps.check_backtracking(n)?;
        Ok(KingIter::new(n))
    }

    /// Kings whose wrap pair is an edge bond, `A_n = K_n \ CK_n`.
    pub fn enumerate_a(&self, n: usize) -> Result<impl Iterator<Item = Permutation>, OracleError> {
        Ok(self.enumerate_kings(n)?.filter(Permutation::has_edge_bond))
    }

    /// Cylindrical kings of order `n` in lexicographic order.
    pub fn enumerate_cyl_kings(&self, n: usize) -> Result<impl Iterator<Item = Permutation>, OracleError> {
        Ok(self.enumerate_kings(n)?.filter(|p| !p.has_edge_bond()))
    }

    /// One row per order `1..=max_n`, all from the backtracking engine.
    pub fn count_table(&self, max_n: usize) -> Result<Vec<CountRow>, OracleError> {
        self.caps.check_backtracking(max_n)?;
        (1..=max_n)
            .map(|n| {
                Ok(CountRow::new(
                    n,
                    self.count_kings(n)?,
                    self.count_cyl_kings(n)?,
                    self.count_single_cyclic_bond(n)?,
                ))
            })
            .collect()
    }

    /// The same row computed from the brute-force distributions.
    pub fn count_row_brute(&self, n: usize) -> Result<CountRow, OracleError> {
        let d = self.brute(n)?;
        Ok(CountRow::new(n, d.bonds.count(0), d.cyclic.count(0), d.cyclic.count(1)))
    }

    /// Brute-force rows where that engine reaches, backtracking beyond.
    pub fn reference_row(&self, n: usize) -> Result<CountRow, OracleError> {
        if n <= self.caps.brute_force {
            self.count_row_brute(n)
        } else {
            self.caps.check_backtracking(n)?;
            Ok(CountRow::new(
                n,
                self.count_kings(n)?,
                self.count_cyl_kings(n)?,
                self.count_single_cyclic_bond(n)?,
            ))
        }
    }
}

/// Histograms of each statistic over all accepted permutations of `S_n`.
/// Work is split on the first entry; partial histograms are summed.
fn brute_force_hist<F>(n: usize, stats: &[Statistic], filter: F) -> Vec<DistTable>
where
    F: Fn(&[u32]) -> bool + Sync,
{
    let width = n + 1;
    let partials: Vec<Vec<u64>> = (1..=n as u32)
        .into_par_iter()
        .map(|first| {
            let mut hist = vec![0u64; stats.len() * width];
            let mut buf: Vec<u32> = std::iter::once(first)
                .chain((1..=n as u32).filter(|&v| v != first))
                .collect();
            loop {
                if filter(&buf) {
                    for (s, stat) in stats.iter().enumerate() {
                        hist[s * width + stat.of(&buf)] += 1;
                    }
                }
                if !next_permutation(&mut buf[1..]) {
                    break;
                }
            }
            hist
        })
        .collect();
    let mut total = vec![0u64; stats.len() * width];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.chunks(width).map(|row| DistTable::from_u64(n, row)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Mode {
    Kings,
    CylKings,
    SingleCyclicBond,
}

struct Search {
    n: u32,
    full: u32,
    cyclic: bool,
}

impl Search {
    /// Counts completions of a prefix. `budget` is how many more bonds the
    /// completed permutation must contain; the result requires it to hit 0
    /// exactly.
    fn extend(&self, used: u32, first: u32, last: u32, placed: u32, budget: u32) -> u64 {
        let free = self.full & !used;
        if placed == self.n {
            let wrap = u32::from(self.cyclic && self.n >= 2 && adjacent(first, last));
            return u64::from(budget == wrap);
        }
        let near = neighbours(last) & self.full;
        let mut total = 0;
        let mut far = free & !near;
        while far != 0 {
            let v = far.trailing_zeros();
            far &= far - 1;
            total += self.extend(used | 1 << v, first, v, placed + 1, budget);
        }
        if budget > 0 {
            let mut close = free & near;
            while close != 0 {
                let v = close.trailing_zeros();
                close &= close - 1;
                total += self.extend(used | 1 << v, first, v, placed + 1, budget - 1);
            }
        }
        total
    }
}

#[inline]
fn neighbours(v: u32) -> u32 {
    (1u32 << (v + 1)) | if v > 0 { 1 << (v - 1) } else { 0 }
}

fn backtrack_count(n: usize, mode: Mode) -> u64 {
    if n == 0 {
        // Empty permutation: one king, one cylindrical king, no bonds.
        return u64::from(mode != Mode::SingleCyclicBond);
    }
    let search = Search {
        n: n as u32,
        full: (1u32 << n) - 1,
        cyclic: mode != Mode::Kings,
    };
    let budget = u32::from(mode == Mode::SingleCyclicBond);
    (0..n as u32)
        .into_par_iter()
        .map(|first| search.extend(1 << first, first, first, 1, budget))
        .sum()
}

/// Lexicographic depth-first stream of the kings of one order.
#[derive(Debug, Clone)]
pub struct KingIter {
    n: u32,
    prefix: Vec<u32>,
    used: u64,
    next_try: Vec<u32>,
    done: bool,
}

impl KingIter {
    fn new(n: usize) -> Self {
        KingIter { n: n as u32, prefix: Vec::with_capacity(n), used: 0, next_try: vec![1], done: false }
    }

    fn pop(&mut self) {
        let v = self.prefix.pop().expect("pop on empty prefix");
        self.used &= !(1 << v);
        self.next_try.pop();
    }
}

impl Iterator for KingIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        while !self.done {
            let depth = self.prefix.len();
            if depth == self.n as usize {
                let out = Permutation::from_unchecked(self.prefix.clone());
                self.pop();
                return Some(out);
            }
            let prev = self.prefix.last().copied();
            let mut v = self.next_try[depth];
            while v <= self.n && (self.used >> v & 1 == 1 || prev.is_some_and(|p| adjacent(p, v))) {
                v += 1;
            }
            if v > self.n {
                if depth == 0 {
                    self.done = true;
                } else {
                    self.pop();
                }
                continue;
            }
            self.next_try[depth] = v + 1;
            self.prefix.push(v);
            self.used |= 1 << v;
            self.next_try.push(1);
        }
        None
    }
}
