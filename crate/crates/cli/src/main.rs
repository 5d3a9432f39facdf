use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kingperm::bijections::{self, BijectionAudit, BijectionError};
use kingperm::recurrences::ratio_rows;
use kingperm::series;
use kingperm::verify::{self, Failure, Subject, VerificationReport, VerifyError};
use kingperm::{Caps, CountRow, Oracle, OracleError};
use serde::{Deserialize, Serialize};

mod oeis;

use oeis::{OeisSequence, SequenceId};

#[derive(Parser, Debug)]
#[command(name = "kingperm", version, about = "King and cylindrical king permutations: counts, identities, series")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest order to compute (each command has its own default).
    #[arg(long, global = true)]
    max_n: Option<usize>,
    /// Never touch the network; use the embedded reference sequences.
    #[arg(long, global = true)]
    offline: bool,
    /// Where fetched b-files are kept.
    #[arg(long, global = true, env = "KINGPERM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Worker threads for the enumeration engines.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Raise or lower the brute-force order cap (default 10).
    #[arg(long, global = true)]
    brute_force_cap: Option<usize>,
    /// Raise or lower the backtracking order cap (default 13).
    #[arg(long, global = true)]
    backtracking_cap: Option<usize>,
    /// Raise or lower the series order cap (default 12).
    #[arg(long, global = true)]
    series_cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Counts per order: kings, cylindrical kings, A_n, single cyclic bond, ratio.
    Table,
    /// Check one identity over a range of orders.
    Verify {
        /// cbond1, cbond2, cbond3, corollary1, corollary2, corollary3,
        /// recursion, eq-kn, series-H, series-CK, bijections or marked
        subject: String,
    },
    /// Dump series coefficients.
    Series {
        #[arg(value_enum)]
        which: Which,
        #[arg(long, default_value_t = 9)]
        order: usize,
    },
    /// Class sizes and map checks for the split of A_n.
    Bijections,
    /// Compare engine counts with an OEIS sequence.
    Oeis {
        #[arg(value_enum)]
        id: SequenceId,
    },
    /// Write every table, series, audit and report into a directory.
    Export {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
enum Which {
    #[value(name = "F")]
    F,
    #[value(name = "H")]
    H,
    #[value(name = "CK")]
    CK,
}

/// Something to print: its JSON form and its CSV rows.
trait Render: Serialize {
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
    /// Whether every check inside passed.
    fn passed(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct TableRow {
    n: usize,
    kings: String,
    cyl_kings: String,
    a_n: String,
    cb1: String,
    /// Exact `|CK_n| / |K_n|`, absent when there are no kings.
    ratio: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Table {
    rows: Vec<TableRow>,
}

impl Render for Table {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["n", "kings", "cyl_kings", "a_n", "cb1", "ratio"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.kings.clone(),
                    r.cyl_kings.clone(),
                    r.a_n.clone(),
                    r.cb1.clone(),
                    r.ratio.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }
}

impl Render for VerificationReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["subject", "from", "to", "status", "n", "expected", "actual"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let head = [self.subject.clone(), self.range.from.to_string(), self.range.to.to_string()];
        let status = if self.passed() { "pass" } else { "fail" }.to_string();
        if self.failures.is_empty() {
            let mut row = head.to_vec();
            row.extend([status, String::new(), String::new(), String::new()]);
            return vec![row];
        }
        self.failures
            .iter()
            .map(|f| {
                let mut row = head.to_vec();
                row.extend([status.clone(), f.n.to_string(), f.expected.clone(), f.actual.clone()]);
                row
            })
            .collect()
    }

    fn passed(&self) -> bool {
        VerificationReport::passed(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CkComparison {
    exponent_1: Vec<String>,
    exponent_2: Vec<String>,
    exponent_1_matches: bool,
    exponent_2_first_mismatch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SeriesDump {
    which: Which,
    order: usize,
    /// Coefficients of `z^1..z^order`; polynomials are in `u`.
    coefficients: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    printed_comparison: Option<CkComparison>,
}

impl Render for SeriesDump {
    fn csv_header(&self) -> Vec<&'static str> {
        match self.printed_comparison {
            Some(_) => vec!["n", "coefficient", "printed_exponent_1", "printed_exponent_2"],
            None => vec!["n", "coefficient"],
        }
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut row = vec![(i + 1).to_string(), c.clone()];
                if let Some(cmp) = &self.printed_comparison {
                    row.extend([cmp.exponent_1[i].clone(), cmp.exponent_2[i].clone()]);
                }
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BijectionReport {
    audits: Vec<BijectionAudit>,
    pass: bool,
}

impl Render for BijectionReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "n", "a_n", "b0", "b1", "b2", "b3", "a_n_minus_2", "a_n_minus_1", "ck_n_minus_1", "k_n_minus_1",
            "partition", "f0_bijective", "f1_bijective", "f2_bijective", "f3_two_to_one", "identity", "pass",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.audits
            .iter()
            .map(|a| {
                let mut row = vec![a.n.to_string(), a.a_n.to_string()];
                row.extend(a.classes.iter().map(usize::to_string));
                row.extend([a.a_n_minus_2, a.a_n_minus_1, a.ck_n_minus_1, a.k_n_minus_1].map(|x| x.to_string()));
                row.extend(
                    [a.partition, a.f0_bijective, a.f1_bijective, a.f2_bijective, a.f3_two_to_one, a.identity, a.pass()]
                        .map(|b| b.to_string()),
                );
                row
            })
            .collect()
    }

    fn passed(&self) -> bool {
        self.pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct OeisReport {
    sequence: OeisSequence,
    report: VerificationReport,
}

impl Render for OeisReport {
    fn csv_header(&self) -> Vec<&'static str> {
        self.report.csv_header()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.report.csv_rows()
    }

    fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// Usage, cap and configuration problems; all of them exit with code 2.
fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::anyhow!(msg.into())
}

fn from_oracle(e: OracleError) -> anyhow::Error {
    usage(e.to_string())
}

fn from_verify(e: VerifyError) -> anyhow::Error {
    usage(e.to_string())
}

fn render_string<T: Render>(format: Format, value: &T) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(value.csv_header())?;
            for row in value.csv_rows() {
                w.write_record(row)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

fn emit<T: Render>(format: Format, value: &T) -> Result<bool> {
    let text = render_string(format, value)?;
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(value.passed())
}

fn default_cache_dir() -> PathBuf {
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")));
    match base {
        Some(b) => b.join("kingperm"),
        None => PathBuf::from(".kingperm-cache"),
    }
}

fn caps_from(cli: &Cli) -> Caps {
    let mut caps = Caps::default();
    let defaults = caps;
    let overrides = [
        ("brute-force", cli.brute_force_cap, &mut caps.brute_force, defaults.brute_force),
        ("backtracking", cli.backtracking_cap, &mut caps.backtracking, defaults.backtracking),
        ("series", cli.series_cap, &mut caps.series_order, defaults.series_order),
    ];
    for (name, value, slot, default) in overrides {
        if let Some(v) = value {
            eprintln!("warning: {name} cap set to {v} (default {default}); large orders may take very long");
            *slot = v;
        }
    }
    caps
}

fn table(oracle: &Oracle, max_n: usize) -> Result<Table> {
    if max_n == 0 {
        return Err(usage("--max-n must be at least 1"));
    }
    oracle.caps().check_backtracking(max_n).map_err(from_oracle)?;
    let rows: Vec<CountRow> = (1..=max_n).map(|n| oracle.reference_row(n)).collect::<Result<_, _>>().map_err(from_oracle)?;
    let ratios = ratio_rows(&rows);
    let rows = rows
        .iter()
        .map(|r| TableRow {
            n: r.n,
            kings: r.kings.to_string(),
            cyl_kings: r.cyl_kings.to_string(),
            a_n: r.a_n.to_string(),
            cb1: r.cb1.to_string(),
            ratio: ratios.iter().find(|x| x.n == r.n).map(|x| x.ratio.to_string()),
        })
        .collect();
    Ok(Table { rows })
}

fn series_dump(oracle: &Oracle, which: Which, order: usize) -> Result<SeriesDump> {
    if order == 0 {
        return Err(usage("--order must be at least 1"));
    }
    oracle.caps().check_series(order).map_err(from_oracle)?;
    let polys = |s: series::UPolySeries| s.coeffs()[1..].iter().map(|p| p.render("u")).collect();
    let ints = |v: Vec<num_bigint::BigInt>| -> Vec<String> { v[1..].iter().map(ToString::to_string).collect() };
    Ok(match which {
        Which::F => SeriesDump { which, order, coefficients: polys(series::series_f(order)), printed_comparison: None },
        Which::H => SeriesDump { which, order, coefficients: polys(series::series_h(order)), printed_comparison: None },
        Which::CK => {
            let derived = ints(series::series_ck(order));
            let exponent_1 = ints(series::series_ck_printed(order, 1));
            let exponent_2 = ints(series::series_ck_printed(order, 2));
            let exponent_2_first_mismatch = (0..order).find(|&i| exponent_2[i] != derived[i]).map(|i| i + 1);
            let cmp = CkComparison {
                exponent_1_matches: exponent_1 == derived,
                exponent_1,
                exponent_2,
                exponent_2_first_mismatch,
            };
            SeriesDump { which, order, coefficients: derived, printed_comparison: Some(cmp) }
        }
    })
}

fn bijection_report(oracle: &Oracle, max_n: usize) -> Result<BijectionReport> {
    if max_n < 5 {
        return Err(usage("bijections needs --max-n of at least 5"));
    }
    let audits: Vec<BijectionAudit> = (5..=max_n)
        .map(|n| {
            bijections::audit(oracle, n).map_err(|e| match e {
                BijectionError::Oracle(o) => from_oracle(o),
                other => anyhow::Error::new(other),
            })
        })
        .collect::<Result<_>>()?;
    let pass = audits.iter().all(BijectionAudit::pass);
    Ok(BijectionReport { audits, pass })
}

fn oeis_report(oracle: &Oracle, id: SequenceId, max_n: usize, offline: bool, cache_dir: &Path) -> Result<OeisReport> {
    if max_n == 0 {
        return Err(usage("--max-n must be at least 1"));
    }
    oracle.caps().check_backtracking(max_n).map_err(from_oracle)?;
    let mut sequence = oeis::load(id, offline, cache_dir);
    let mut failures = Vec::new();
    for n in 1..=max_n {
        let row = oracle.reference_row(n).map_err(from_oracle)?;
        let engine = match id {
            SequenceId::A002464 => row.kings,
            SequenceId::A002493 => row.cyl_kings,
        };
        match sequence.term(n) {
            Some(v) if *v == engine => {}
            Some(v) => failures.push(Failure { n, expected: v.to_string(), actual: engine.to_string() }),
            None => failures.push(Failure { n, expected: "term missing from sequence".into(), actual: engine.to_string() }),
        }
    }
    sequence.terms.retain(|t| (1..=max_n).contains(&t.n));
    let report = VerificationReport::new(id.name(), 1, max_n, failures, Vec::new());
    Ok(OeisReport { sequence, report })
}

fn write_file<T: Render>(dir: &Path, name: &str, format: Format, value: &T) -> Result<bool> {
    let path = dir.join(format!("{name}.{}", format.extension()));
    fs::write(&path, render_string(format, value)?).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(value.passed())
}

fn export(cli: &Cli, oracle: &Oracle, out: &Path, cache_dir: &Path) -> Result<bool> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let f = cli.format;
    let limit = |default: usize| cli.max_n.map_or(default, |m| m.min(default));
    let mut ok = true;
    ok &= write_file(out, "table", f, &table(oracle, limit(9))?)?;
    for which in [Which::F, Which::H, Which::CK] {
        let name = format!("series-{}", which.to_possible_value().expect("named").get_name());
        ok &= write_file(out, &name, f, &series_dump(oracle, which, limit(oracle.caps().series_order))?)?;
    }
    ok &= write_file(out, "bijections", f, &bijection_report(oracle, limit(9).max(5))?)?;
    for subject in Subject::ALL {
        let max_n = limit(subject.default_max_n()).max(subject.min_n());
        let report = verify::run(subject, max_n, oracle).map_err(from_verify)?;
        ok &= write_file(out, &format!("verify-{subject}"), f, &report)?;
    }
    for id in [SequenceId::A002464, SequenceId::A002493] {
        ok &= write_file(out, &format!("oeis-{}", id.name()), f, &oeis_report(oracle, id, limit(12), cli.offline, cache_dir)?)?;
    }
    Ok(ok)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring threads")?;
    }
    let oracle = Oracle::new(caps_from(cli));
    let cache_dir = cli.cache_dir.clone().unwrap_or_else(default_cache_dir);
    match &cli.command {
        Command::Table => emit(cli.format, &table(&oracle, cli.max_n.unwrap_or(9))?),
        Command::Verify { subject } => {
            let subject: Subject = subject.parse().map_err(|e: verify::UnknownSubject| usage(e.to_string()))?;
            let max_n = cli.max_n.unwrap_or(subject.default_max_n());
            emit(cli.format, &verify::run(subject, max_n, &oracle).map_err(from_verify)?)
        }
        Command::Series { which, order } => emit(cli.format, &series_dump(&oracle, *which, *order)?),
        Command::Bijections => emit(cli.format, &bijection_report(&oracle, cli.max_n.unwrap_or(9))?),
        Command::Oeis { id } => {
            emit(cli.format, &oeis_report(&oracle, *id, cli.max_n.unwrap_or(12), cli.offline, &cache_dir)?)
        }
        Command::Export { out } => export(cli, &oracle, out, &cache_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
