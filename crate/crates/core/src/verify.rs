//! Runs one family of identities over a range of orders and collects every
//! mismatch.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bijections;
use crate::marked::{self, MarkedPermutation};
use crate::oracle::{CountRow, Oracle, OracleError};
use crate::perm::all_permutations;
use crate::poly::IntPoly;
use crate::recurrences::{self, RecurrenceError};
use crate::series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subject {
    #[serde(rename = "cbond1")]
    Cbond1,
    #[serde(rename = "cbond2")]
    Cbond2,
    #[serde(rename = "cbond3")]
    Cbond3,
    #[serde(rename = "corollary1")]
    Corollary1,
    #[serde(rename = "corollary2")]
    Corollary2,
    #[serde(rename = "corollary3")]
    Corollary3,
    #[serde(rename = "recursion")]
    Recursion,
    #[serde(rename = "eq-kn")]
    EqKn,
    #[serde(rename = "series-H")]
    SeriesH,
    #[serde(rename = "series-CK")]
    SeriesCk,
    #[serde(rename = "bijections")]
    Bijections,
    #[serde(rename = "marked")]
    Marked,
}

impl Subject {
    pub const ALL: [Subject; 12] = [
        Subject::Cbond1,
        Subject::Cbond2,
        Subject::Cbond3,
        Subject::Corollary1,
        Subject::Corollary2,
        Subject::Corollary3,
        Subject::Recursion,
        Subject::EqKn,
        Subject::SeriesH,
        Subject::SeriesCk,
        Subject::Bijections,
        Subject::Marked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subject::Cbond1 => "cbond1",
            Subject::Cbond2 => "cbond2",
            Subject::Cbond3 => "cbond3",
            Subject::Corollary1 => "corollary1",
            Subject::Corollary2 => "corollary2",
            Subject::Corollary3 => "corollary3",
            Subject::Recursion => "recursion",
            Subject::EqKn => "eq-kn",
            Subject::SeriesH => "series-H",
            Subject::SeriesCk => "series-CK",
            Subject::Bijections => "bijections",
            Subject::Marked => "marked",
        }
    }

    /// Smallest order the identity is stated for.
    pub fn min_n(self) -> usize {
        match self {
            Subject::Cbond1 | Subject::Cbond3 | Subject::Corollary1 | Subject::Corollary3 => 3,
            Subject::Recursion | Subject::EqKn | Subject::Bijections => 5,
            _ => 1,
        }
    }

    /// Largest order the default caps allow.
    pub fn default_max_n(self) -> usize {
        match self {
            Subject::Cbond1 | Subject::Cbond2 | Subject::Cbond3 => 10,
            Subject::Corollary2 | Subject::Corollary3 => 10,
            Subject::Corollary1 | Subject::Recursion | Subject::EqKn | Subject::SeriesCk => 12,
            Subject::SeriesH | Subject::Bijections => 9,
            Subject::Marked => 8,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown subject {0:?}")]
pub struct UnknownSubject(pub String);

impl FromStr for Subject {
    type Err = UnknownSubject;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subject::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownSubject(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub n: usize,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRange {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub subject: String,
    pub range: OrderRange,
    pub status: Status,
    pub failures: Vec<Failure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>, from: usize, to: usize, failures: Vec<Failure>, notes: Vec<String>) -> Self {
        let status = if failures.is_empty() { Status::Pass } else { Status::Fail };
        VerificationReport { subject: subject.into(), range: OrderRange { from, to }, status, failures, notes }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{subject} needs max-n of at least {min}, got {max_n}")]
    RangeTooSmall { subject: Subject, min: usize, max_n: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

struct Collector {
    failures: Vec<Failure>,
    notes: Vec<String>,
}

impl Collector {
    fn new() -> Self {
        Collector { failures: Vec::new(), notes: Vec::new() }
    }

    fn check<T: PartialEq + fmt::Display>(&mut self, n: usize, expected: &T, actual: &T) {
        if expected != actual {
            self.fail(n, expected, actual);
        }
    }

    fn fail(&mut self, n: usize, expected: impl fmt::Display, actual: impl fmt::Display) {
        self.failures.push(Failure { n, expected: expected.to_string(), actual: actual.to_string() });
    }

    /// Compares a computed result that may have failed outright.
    fn check_result<T: PartialEq + fmt::Display>(&mut self, n: usize, expected: &T, actual: Result<T, RecurrenceError>) {
        match actual {
            Ok(v) => self.check(n, expected, &v),
            Err(e) => self.fail(n, expected, format!("error: {e}")),
        }
    }
}

fn oracle_err(e: RecurrenceError) -> VerifyError {
    match e {
        RecurrenceError::Oracle(o) => VerifyError::Oracle(o),
        other => unreachable!("only oracle errors escape: {other}"),
    }
}

fn polys(max: usize, f: impl Fn(usize) -> Result<IntPoly, OracleError>) -> Result<Vec<IntPoly>, OracleError> {
    (0..=max).map(f).collect()
}

/// `|X_0..|X_max|` with `|X_0| = 1` and the rest from `column`.
fn counts(rows: &[CountRow], zero: i64, column: impl Fn(&CountRow) -> &num_bigint::BigUint) -> Vec<BigInt> {
    std::iter::once(BigInt::from(zero))
        .chain(rows.iter().map(|r| BigInt::from(column(r).clone())))
        .collect()
}

/// Checks `subject` for every applicable order up to `max_n`.
pub fn run(subject: Subject, max_n: usize, oracle: &Oracle) -> Result<VerificationReport, VerifyError> {
    let from = subject.min_n();
    if max_n < from {
        return Err(VerifyError::RangeTooSmall { subject, min: from, max_n });
    }
    let mut c = Collector::new();
    match subject {
        Subject::Cbond1 => {
            oracle.caps().check_brute_force(max_n)?;
            let bs = polys(max_n - 1, |k| oracle.bond_poly(k))?;
            for m in from..=max_n {
                let expected = oracle.cyclic_bond_poly(m)?;
                c.check_result(m, &expected, recurrences::cb_from_b(&bs[..m]));
            }
        }
        Subject::Cbond2 => {
            oracle.caps().check_brute_force(max_n)?;
            for n in from..=max_n {
                let expected = oracle.bond_poly(n)?;
                c.check_result(n, &expected, recurrences::b_from_cb(n, &oracle.cyclic_bond_poly(n)?));
            }
        }
        Subject::Cbond3 => {
            oracle.caps().check_brute_force(max_n)?;
            let cbs = polys(max_n, |k| oracle.cyclic_bond_poly(k))?;
            let bs = polys(max_n - 1, |k| oracle.bond_poly(k))?;
            for m in from..=max_n {
                let actual = recurrences::cb_self_recursion(&cbs[..m]);
                c.check_result(m, &cbs[m], actual.clone());
                if let (Ok(a), Ok(b)) = (actual, recurrences::cb_from_b(&bs[..m])) {
                    c.check(m, &b, &a);
                }
            }
        }
        Subject::Corollary1 => {
            let rows = oracle.count_table(max_n)?;
            let kings = counts(&rows, 1, |r| &r.kings);
            let ck = counts(&rows, 1, |r| &r.cyl_kings);
            for m in from..=max_n {
                c.check_result(m, &ck[m], recurrences::ck_from_k(&kings[..m]));
            }
        }
        Subject::Corollary2 => {
            let rows = oracle.count_table(max_n)?;
            for r in &rows {
                let (k, ck, cb1) = (BigInt::from(r.kings.clone()), BigInt::from(r.cyl_kings.clone()), BigInt::from(r.cb1.clone()));
                c.check_result(r.n, &k, recurrences::k_from_ck_cb1(r.n, &ck, &cb1));
            }
        }
        Subject::Corollary3 => {
            let rows = oracle.count_table(max_n)?;
            let ck = counts(&rows, 1, |r| &r.cyl_kings);
            let cb1 = counts(&rows, 0, |r| &r.cb1);
            for m in from..=max_n {
                c.check_result(m, &ck[m], recurrences::ck_self_recursion(&ck[..m], &cb1[..m]));
            }
        }
        Subject::Recursion => {
            let rows = oracle.count_table(max_n)?;
            let kings = counts(&rows, 1, |r| &r.kings);
            let a = counts(&rows, 0, |r| &r.a_n);
            let table = recurrences::a_recursion_table(&kings, &a[3], &a[4]).map_err(oracle_err)?;
            for row in table.iter().filter(|r| r.n >= from) {
                c.check(row.n, &a[row.n], &row.a_n);
                c.check(row.n, &BigInt::from(rows[row.n - 1].cyl_kings.clone()), &row.implied_ck);
            }
        }
        Subject::EqKn => {
            let rows = recurrences::ratio_table(oracle, max_n).map_err(oracle_err)?;
            for r in rows.iter().filter(|r| r.n >= from) {
                if !r.identity_holds() {
                    let rhs = r.decomposition.as_ref().map(BigRational::to_string).unwrap_or_default();
                    c.fail(r.n, &r.ratio, rhs);
                }
            }
            for w in rows.windows(2).filter(|w| w[1].n >= 7) {
                if w[1].ratio <= w[0].ratio {
                    c.fail(w[1].n, format!("ratio above {}", w[0].decimal), &w[1].decimal);
                }
            }
            if let Some(last) = rows.last() {
                c.notes.push(format!("ratio({}) = {} = {}", last.n, last.ratio, last.decimal));
            }
        }
        Subject::SeriesH => {
            oracle.caps().check_series(max_n)?;
            oracle.caps().check_brute_force(max_n)?;
            let h = series::series_h(max_n);
            let h2 = series::series_h_closed_form(max_n);
            for n in from..=max_n {
                c.check(n, h.coeff(n), h2.coeff(n));
                if n == 2 {
                    let two_u = IntPoly::monomial(2, 1);
                    c.check(n, &two_u, h.coeff(n));
                    c.notes.push(format!(
                        "n = 2: series gives {} while the cyclic bond polynomial is {}",
                        h.coeff(2).render("u"),
                        oracle.cyclic_bond_poly(2)?.render("u")
                    ));
                } else {
                    c.check(n, &oracle.cyclic_bond_poly(n)?, h.coeff(n));
                }
            }
        }
        Subject::SeriesCk => {
            oracle.caps().check_series(max_n)?;
            let rows = oracle.count_table(max_n)?;
            let ck = counts(&rows, 0, |r| &r.cyl_kings);
            let derived = series::series_ck(max_n);
            let printed1 = series::series_ck_printed(max_n, 1);
            let printed2 = series::series_ck_printed(max_n, 2);
            for n in from..=max_n {
                c.check(n, &ck[n], &derived[n]);
                c.check(n, &ck[n], &printed1[n]);
            }
            let first_bad = (from..=max_n).find(|&n| printed2[n] != ck[n]);
            match first_bad {
                Some(n) => c.notes.push(format!(
                    "squared (1-2z-z^2) form first differs at z^{n}: {} instead of {}",
                    printed2[n], ck[n]
                )),
                None => c.notes.push("squared (1-2z-z^2) form agrees on this range".to_string()),
            }
        }
        Subject::Bijections => {
            for n in from..=max_n {
                match bijections::audit(oracle, n) {
                    Ok(a) if a.pass() => {}
                    Ok(a) => c.fail(n, "all checks pass", format!("{a:?}")),
                    Err(bijections::BijectionError::Oracle(e)) => return Err(e.into()),
                    Err(e) => c.fail(n, "audit", e),
                }
            }
        }
        Subject::Marked => {
            oracle.caps().check_brute_force(max_n)?;
            oracle.caps().check_series(max_n)?;
            for n in from..=max_n.min(6) {
                for p in all_permutations(n) {
                    for mp in MarkedPermutation::all_markings(&p) {
                        let d = mp.encode();
                        match MarkedPermutation::decode(&d, n) {
                            Ok(back) if back == mp => {}
                            Ok(back) => c.fail(n, &mp, back),
                            Err(e) => c.fail(n, &mp, e),
                        }
                    }
                }
            }
            let f = series::series_f(max_n);
            for n in from..=max_n {
                let direct = marked::marked_table(oracle, n)?;
                let via = marked::marked_table_from_distribution(oracle, n)?;
                c.check(n, &direct.to_poly(), &via.to_poly());
                if n != 2 {
                    c.check(n, &direct.to_poly(), f.coeff(n));
                }
            }
        }
    }
    Ok(VerificationReport::new(subject.name(), from, max_n, c.failures, c.notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subject_names_roundtrip() {
        for s in Subject::ALL {
            assert_eq!(s.name().parse::<Subject>(), Ok(s));
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        assert!("cbond4".parse::<Subject>().is_err());
    }

    #[test]
    fn small_runs_pass() {
        let o = Oracle::default();
        for s in Subject::ALL {
            let max_n = s.min_n().max(7);
            let report = run(s, max_n, &o).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn range_and_cap_errors() {
        let o = Oracle::default();
        assert!(matches!(run(Subject::Recursion, 4, &o), Err(VerifyError::RangeTooSmall { .. })));
        assert!(matches!(run(Subject::Cbond1, 11, &o), Err(VerifyError::Oracle(OracleError::CapExceeded { .. }))));
        assert!(matches!(run(Subject::SeriesCk, 13, &o), Err(VerifyError::Oracle(OracleError::CapExceeded { .. }))));
    }

    #[test]
    fn report_json_roundtrip() {
        let r = VerificationReport::new(
            "cbond1",
            3,
            5,
            vec![Failure { n: 4, expected: "6*t^2".into(), actual: "0".into() }],
            vec!["note".into()],
        );
        assert_eq!(r.status, Status::Fail);
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
