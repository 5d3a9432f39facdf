//! The split of `A_n` (kings with an edge bond) into four classes and the
//! maps that send them onto `A_{n-2}`, `A_{n-1}` (twice) and, two to one,
//! onto `CK_{n-1}`. Together they give `|A_n| = 2|K_{n-1}| + |A_{n-2}|`.
//!
//! Write `k` for the smaller end value, so the ends are `k` and `k+1`. Let
//! `x` be the inner neighbour of the `k+1` end and `y` the inner neighbour
//! of the `k` end. Then
//!
//! * `B0`: `x = k-1` and `y = k+2`
//! * `B1`: `x = k-1` only
//! * `B2`: `y = k+2` only
//! * `B3`: neither.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{Oracle, OracleError};
use crate::perm::{adjacent, PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BijectionError {
    #[error("{0} is not a king with an edge bond")]
    NotInA(Permutation),
    #[error("{perm} is in {actual}, expected {expected}")]
    WrongClass { perm: Permutation, expected: AClass, actual: AClass },
    #[error("{0} is not a cylindrical king")]
    NotCylKing(Permutation),
    #[error("order {0} is too small")]
    TooSmall(usize),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AClass {
    B0,
    B1,
    B2,
    B3,
}

impl fmt::Display for AClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Last,
}

fn in_a(p: &Permutation) -> bool {
    p.is_king() && p.has_edge_bond()
}

fn require_a(p: &Permutation) -> Result<(), BijectionError> {
    if p.len() < 4 {
        return Err(BijectionError::TooSmall(p.len()));
    }
    if !in_a(p) {
        return Err(BijectionError::NotInA(p.clone()));
    }
    Ok(())
}

pub fn classify_a(p: &Permutation) -> Result<AClass, BijectionError> {
    require_a(p)?;
    let n = p.len();
    let (first, last) = (p.first(), p.last());
    let k = first.min(last);
    // Inner neighbours of the k end and the k+1 end.
    let (y, x) = if first == k { (p.at(2), p.at(n - 1)) } else { (p.at(n - 1), p.at(2)) };
    let low = k >= 2 && x == k - 1;
    let high = y == k + 2;
    Ok(match (low, high) {
        (true, true) => AClass::B0,
        (true, false) => AClass::B1,
        (false, true) => AClass::B2,
        (false, false) => AClass::B3,
    })
}

fn require_class(p: &Permutation, expected: AClass) -> Result<(), BijectionError> {
    let actual = classify_a(p)?;
    if actual != expected {
        return Err(BijectionError::WrongClass { perm: p.clone(), expected, actual });
    }
    Ok(())
}

/// Removes both ends.
pub fn f0(p: &Permutation) -> Result<Permutation, BijectionError> {
    require_class(p, AClass::B0)?;
    Ok(p.delete_standardize(p.len())?.delete_standardize(1)?)
}

/// Puts `a` back beside the `a` end and `a+1` at the far end, where `a` is
/// the larger end of `q`.
pub fn f0_inv(q: &Permutation) -> Result<Permutation, BijectionError> {
    require_a(q)?;
    let a = q.first().max(q.last());
    let n = q.len();
    let p = if q.last() == a {
        q.insert_value(n + 1, a)?.insert_value(1, a + 1)?
    } else {
        q.insert_value(1, a)?.insert_value(n + 2, a + 1)?
    };
    Ok(p)
}

/// Removes the larger end.
pub fn f1(p: &Permutation) -> Result<Permutation, BijectionError> {
    require_class(p, AClass::B1)?;
    Ok(p.delete_value(p.first().max(p.last()))?)
}

/// Adds `a+1` next to `a-1`, where `a` is the larger end of `q`.
pub fn f1_inv(q: &Permutation) -> Result<Permutation, BijectionError> {
    require_a(q)?;
    let a = q.first().max(q.last());
    let position = if q.first() == a { q.len() + 1 } else { 1 };
    Ok(q.insert_value(position, a + 1)?)
}

/// Removes the smaller end.
pub fn f2(p: &Permutation) -> Result<Permutation, BijectionError> {
    require_class(p, AClass::B2)?;
    Ok(p.delete_value(p.first().min(p.last()))?)
}

/// Adds `a-1` next to `a`, where `a` is the larger end of `q`.
pub fn f2_inv(q: &Permutation) -> Result<Permutation, BijectionError> {
    require_a(q)?;
    let a = q.first().max(q.last());
    let position = if q.first() == a { 1 } else { q.len() + 1 };
    Ok(q.insert_value(position, a - 1)?)
}

/// Removes the larger end.
pub fn f3(p: &Permutation) -> Result<Permutation, BijectionError> {
    require_class(p, AClass::B3)?;
    Ok(p.delete_value(p.first().max(p.last()))?)
}

/// For `q = [a..b]`: `a+1` added after `b`, then `b+1` added before `a`.
pub fn f3_preimages(q: &Permutation) -> Result<(Permutation, Permutation), BijectionError> {
    if q.len() < 3 {
        return Err(BijectionError::TooSmall(q.len()));
    }
    if !q.is_cyl_king() {
        return Err(BijectionError::NotCylKing(q.clone()));
    }
    let (a, b) = (q.first(), q.last());
    Ok((q.insert_value(q.len() + 1, a + 1)?, q.insert_value(1, b + 1)?))
}

/// Whether removing the given end would join its two cyclic neighbours into
/// a bond.
pub fn is_edge_separator(p: &Permutation, side: Side) -> bool {
    let n = p.len();
    if n < 3 {
        return false;
    }
    match side {
        Side::Last => adjacent(p.at(1), p.at(n - 1)),
        Side::First => adjacent(p.at(n), p.at(2)),
    }
}

/// Exhaustive check of the class split and the four maps at one order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionAudit {
    pub n: usize,
    pub a_n: usize,
    pub classes: [usize; 4],
    pub a_n_minus_2: usize,
    pub a_n_minus_1: usize,
    pub ck_n_minus_1: usize,
    pub k_n_minus_1: usize,
    pub partition: bool,
    pub f0_bijective: bool,
    pub f1_bijective: bool,
    pub f2_bijective: bool,
    pub f3_two_to_one: bool,
    pub identity: bool,
}

impl BijectionAudit {
    pub fn pass(&self) -> bool {
        self.partition && self.f0_bijective && self.f1_bijective && self.f2_bijective && self.f3_two_to_one && self.identity
    }
}

fn bijective(
    domain: &[Permutation],
    target: &BTreeSet<Permutation>,
    f: fn(&Permutation) -> Result<Permutation, BijectionError>,
    f_inv: fn(&Permutation) -> Result<Permutation, BijectionError>,
) -> bool {
    let forward_ok = domain.iter().all(|p| {
        f(p).is_ok_and(|q| target.contains(&q) && f_inv(&q).as_ref() == Ok(p))
    });
    let backward_ok = target.iter().all(|q| f_inv(q).is_ok_and(|p| f(&p).as_ref() == Ok(q)));
    forward_ok && backward_ok && domain.len() == target.len()
}

pub fn audit(oracle: &Oracle, n: usize) -> Result<BijectionAudit, BijectionError> {
    if n < 5 {
        return Err(BijectionError::TooSmall(n));
    }
    let a: Vec<Permutation> = oracle.enumerate_a(n)?.collect();
    let a1: BTreeSet<Permutation> = oracle.enumerate_a(n - 1)?.collect();
    let a2: BTreeSet<Permutation> = oracle.enumerate_a(n - 2)?.collect();
    let ck1: BTreeSet<Permutation> = oracle.enumerate_cyl_kings(n - 1)?.collect();

    let mut by_class: [Vec<Permutation>; 4] = Default::default();
    let mut partition = true;
    for p in &a {
        match classify_a(p) {
            Ok(c) => by_class[c as usize].push(p.clone()),
            Err(_) => partition = false,
        }
    }
    let classes = by_class.clone().map(|v| v.len());
    partition &= classes.iter().sum::<usize>() == a.len();

    let [b0, b1, b2, b3] = &by_class;
    let f0_bijective = bijective(b0, &a2, f0, f0_inv);
    let f1_bijective = bijective(b1, &a1, f1, f1_inv);
    let f2_bijective = bijective(b2, &a1, f2, f2_inv);

    let b3_set: BTreeSet<&Permutation> = b3.iter().collect();
    let images_ok = b3.iter().all(|p| f3(p).is_ok_and(|q| ck1.contains(&q)));
    let preimages_ok = ck1.iter().all(|q| match f3_preimages(q) {
        Ok((x, y)) => {
            x != y
                && [&x, &y].iter().all(|p| b3_set.contains(p) && f3(p).as_ref() == Ok(q))
        }
        Err(_) => false,
    });
    let f3_two_to_one = images_ok && preimages_ok && b3.len() == 2 * ck1.len();

    let k_n_minus_1 = a1.len() + ck1.len();
    let identity = a.len() == a2.len() + 2 * a1.len() + 2 * ck1.len() && a.len() == 2 * k_n_minus_1 + a2.len();

    Ok(BijectionAudit {
        n,
        a_n: a.len(),
        classes,
        a_n_minus_2: a2.len(),
        a_n_minus_1: a1.len(),
        ck_n_minus_1: ck1.len(),
        k_n_minus_1,
        partition,
        f0_bijective,
        f1_bijective,
        f2_bijective,
        f3_two_to_one,
        identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::perm;

    #[test]
    fn worked_examples() {
        assert_eq!(classify_a(&perm("426153")), Ok(AClass::B0));
        assert_eq!(f0(&perm("426153")), Ok(perm("2413")));
        assert_eq!(f0_inv(&perm("2413")), Ok(perm("426153")));

        assert_eq!(classify_a(&perm("5137246")), Ok(AClass::B1));
        assert_eq!(f1(&perm("5137246")), Ok(perm("513624")));
        assert_eq!(f1_inv(&perm("513624")), Ok(perm("5137246")));

        assert_eq!(classify_a(&perm("5724136")), Ok(AClass::B2));
        assert_eq!(f2(&perm("5724136")), Ok(perm("624135")));
        assert_eq!(f2_inv(&perm("624135")), Ok(perm("5724136")));

        assert_eq!(classify_a(&perm("364152")), Ok(AClass::B3));
        assert_eq!(classify_a(&perm("531426")), Ok(AClass::B3));
        assert_eq!(f3(&perm("364152")), Ok(perm("53142")));
        assert_eq!(f3(&perm("531426")), Ok(perm("53142")));
        assert_eq!(f3_preimages(&perm("53142")), Ok((perm("531426"), perm("364152"))));
    }

    #[test]
    fn b0_at_order_six_matches_a4() {
        let o = Oracle::default();
        let b0: Vec<_> = o.enumerate_a(6).unwrap().filter(|p| classify_a(p) == Ok(AClass::B0)).collect();
        assert_eq!(b0.len(), 2);
        assert_eq!(o.enumerate_a(4).unwrap().count(), 2);
    }

    #[test]
    fn wrong_inputs_are_rejected() {
        assert_eq!(classify_a(&perm("31425")), Err(BijectionError::NotInA(perm("31425"))));
        assert_eq!(classify_a(&perm("213")), Err(BijectionError::TooSmall(3)));
        assert!(matches!(f0(&perm("364152")), Err(BijectionError::WrongClass { actual: AClass::B3, .. })));
        assert!(matches!(f3_preimages(&perm("2413")), Err(BijectionError::NotCylKing(_))));
        assert!(matches!(f1_inv(&perm("31425")), Err(BijectionError::NotInA(_))));
    }

    #[test]
    fn boundary_ends() {
        // k = 1 has no k-1 and k = n-1 has no k+2, so those tests just fail.
        assert_eq!(classify_a(&perm("1357462")), Ok(AClass::B2));
        assert_eq!(classify_a(&perm("1463572")), Ok(AClass::B3));
        assert_eq!(classify_a(&perm("6241357")), Ok(AClass::B1));
        assert_eq!(classify_a(&perm("6135247")), Ok(AClass::B3));
        assert_eq!(f2(&perm("1357462")), Ok(perm("246351")));
        assert_eq!(f2_inv(&perm("246351")), Ok(perm("1357462")));
        assert_eq!(f1(&perm("6241357")), Ok(perm("624135")));
        assert_eq!(f1_inv(&perm("624135")), Ok(perm("6241357")));
    }

    #[test]
    fn edge_separators() {
        assert!(is_edge_separator(&perm("426153"), Side::Last));
        assert!(is_edge_separator(&perm("13524"), Side::Last));
        assert!(is_edge_separator(&perm("2413"), Side::First));
        assert!(!is_edge_separator(&perm("24153"), Side::Last));
        assert!(!is_edge_separator(&perm("21"), Side::First));
    }

    #[test]
    fn audits_pass() {
        let o = Oracle::default();
        for n in 5..=8 {
            let a = audit(&o, n).unwrap();
            assert!(a.pass(), "{a:?}");
            assert_eq!(a.classes[3], 2 * a.ck_n_minus_1);
        }
    }
}
