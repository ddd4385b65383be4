//! Result tables, summaries and relative gains.
//!
//! Result CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `scheme` | e.g. `CRS-FE`, `RSMA-ES` |
//! | `algorithm` | `ao` or `fast` |
//! | `mode` | slot structure used by the scheme |
//! | `sweep` | `N` or `SNR` |
//! | `value` | sweep value |
//! | `seed` | channel seed |
//! | `objective` | max-min rate, bits/s/Hz (empty on failure) |
//! | `wall_time` | seconds |
//! | `iterations` | outer AO iterations, or reduced SCA steps |
//! | `converged`, `solver_failed` | run flags |
//! | `power_slack`, `star_violation`, `binary_violation`, `time_violation`, `commonrate_slack` | feasibility residuals |
//! | `status` | `ok`, or `failed: <reason>` |

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::io_err;
use crate::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub algorithm: String,
    pub mode: String,
    pub sweep: String,
    pub value: f64,
    pub seed: u64,
    pub objective: Option<f64>,
    pub wall_time: f64,
    pub iterations: usize,
    pub converged: bool,
    pub solver_failed: bool,
    pub power_slack: f64,
    pub star_violation: f64,
    pub binary_violation: f64,
    pub time_violation: f64,
    pub commonrate_slack: f64,
    pub status: String,
}

/// Identity of a cell: one row per key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub scheme: String,
    pub algorithm: String,
    /// Sweep value as raw bits, so keys are exact and hashable.
    pub value_bits: u64,
    pub seed: u64,
}

impl ResultRow {
    pub fn key(&self) -> CellKey {
        CellKey {
            scheme: self.scheme.clone(),
            algorithm: self.algorithm.clone(),
            value_bits: self.value.to_bits(),
            seed: self.seed,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok" && self.objective.is_some()
    }

    /// Same row apart from the wall time.
    pub fn same_outcome(&self, other: &ResultRow) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        a == *other
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut rdr = csv::Reader::from_reader(file);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(Self { rows })
    }

    /// Rows of a possibly truncated file: a partial last line (interrupted
    /// write) is dropped instead of failing.
    pub fn read_partial(path: &Path) -> Result<Self> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(e) => return Err(io_err(path)(e)),
        };
        let mut rdr = csv::Reader::from_reader(file);
        let mut rows = Vec::new();
        for r in rdr.deserialize::<ResultRow>() {
            match r {
                Ok(row) => rows.push(row),
                Err(_) => break,
            }
        }
        Ok(Self { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = csv::Writer::from_writer(file);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(io_err(path))?;
        Ok(())
    }

    /// Equal up to wall times and row order.
    pub fn same_outcomes(&self, other: &ResultTable) -> bool {
        let mut a = self.rows.clone();
        let mut b = other.rows.clone();
        if a.len() != b.len() {
            return false;
        }
        a.sort_by(|x, y| x.key().cmp(&y.key()));
        b.sort_by(|x, y| x.key().cmp(&y.key()));
        a.iter().zip(&b).all(|(x, y)| x.same_outcome(y))
    }

    fn groups(&self) -> BTreeMap<(String, String, u64), Vec<&ResultRow>> {
        let mut g: BTreeMap<(String, String, u64), Vec<&ResultRow>> = BTreeMap::new();
        for r in &self.rows {
            g.entry((r.scheme.clone(), r.algorithm.clone(), r.value.to_bits())).or_default().push(r);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub algorithm: String,
    pub sweep: String,
    pub value: f64,
    pub runs: usize,
    pub failures: usize,
    pub mean: f64,
    pub std: f64,
    pub mean_wall_time: f64,
    pub mean_iterations: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Mean, sample standard deviation and mean cost per (scheme, algorithm,
/// sweep value). Failed rows are counted but excluded from the statistics.
pub fn summarize(table: &ResultTable) -> Result<Vec<SummaryRow>> {
    if table.rows.is_empty() {
        return Err(SimError::Empty("cannot summarize an empty table".into()));
    }
    let mut out = Vec::new();
    for ((scheme, algorithm, bits), rows) in table.groups() {
        let ok: Vec<&&ResultRow> = rows.iter().filter(|r| r.is_ok()).collect();
        let obj: Vec<f64> = ok.iter().filter_map(|r| r.objective).collect();
        let wall: Vec<f64> = ok.iter().map(|r| r.wall_time).collect();
        let it: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
        let (m, s, w, i) = if obj.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            (mean(&obj), std_dev(&obj), mean(&wall), mean(&it))
        };
        out.push(SummaryRow {
            scheme,
            algorithm,
            sweep: rows[0].sweep.clone(),
            value: f64::from_bits(bits),
            runs: rows.len(),
            failures: rows.len() - ok.len(),
            mean: m,
            std: s,
            mean_wall_time: w,
            mean_iterations: i,
        });
    }
    Ok(out)
}

/// Relative gain of one scheme over another at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub scheme: String,
    pub reference: String,
    pub algorithm: String,
    pub value: f64,
    pub pairs: usize,
    /// `mean(scheme) / mean(reference) - 1`, in percent.
    pub gain_pct: f64,
    /// 95% percentile-bootstrap interval over paired seeds, in percent.
    pub ci_low_pct: f64,
    pub ci_high_pct: f64,
}

const BOOTSTRAP_RESAMPLES: usize = 2000;
const BOOTSTRAP_SEED: u64 = 0x5eed;

fn ratio_gain(a: &[f64], b: &[f64]) -> f64 {
    100.0 * (mean(a) / mean(b) - 1.0)
}

/// Percentile bootstrap over paired samples; deterministic.
pub fn bootstrap_gain_ci(a: &[f64], b: &[f64], resamples: usize) -> (f64, f64) {
    let n = a.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let ra: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
            let rb: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
            ratio_gain(&ra, &rb)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let at = |q: f64| stats[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (at(0.025), at(0.975))
}

fn paired(a: &[&ResultRow], b: &[&ResultRow]) -> (Vec<f64>, Vec<f64>) {
    let bmap: BTreeMap<u64, f64> = b.iter().filter(|r| r.is_ok()).filter_map(|r| Some((r.seed, r.objective?))).collect();
    a.iter()
        .filter(|r| r.is_ok())
        .filter_map(|r| Some((r.objective?, *bmap.get(&r.seed)?)))
        .unzip()
}

/// Gains of every scheme over `reference` within one table, per algorithm
/// and sweep value, on seeds where both runs succeeded.
pub fn gains_over(table: &ResultTable, reference: &str) -> Result<Vec<GainRow>> {
    if table.rows.is_empty() {
        return Err(SimError::Empty("cannot compute gains of an empty table".into()));
    }
    let groups = table.groups();
    let mut out = Vec::new();
    for ((scheme, algorithm, bits), rows) in &groups {
        if scheme == reference {
            continue;
        }
        let Some(base) = groups.get(&(reference.to_string(), algorithm.clone(), *bits)) else {
            continue;
        };
        out.push(gain_row(scheme, reference, algorithm, f64::from_bits(*bits), rows, base));
    }
    if out.is_empty() {
        return Err(SimError::Empty(format!("no rows pair with reference scheme `{reference}`")));
    }
    Ok(out)
}

fn gain_row(scheme: &str, reference: &str, algorithm: &str, value: f64, a: &[&ResultRow], b: &[&ResultRow]) -> GainRow {
    let (xa, xb) = paired(a, b);
    let (lo, hi) = bootstrap_gain_ci(&xa, &xb, BOOTSTRAP_RESAMPLES);
    GainRow {
        scheme: scheme.into(),
        reference: reference.into(),
        algorithm: algorithm.into(),
        value,
        pairs: xa.len(),
        gain_pct: if xa.is_empty() { f64::NAN } else { ratio_gain(&xa, &xb) },
        ci_low_pct: lo,
        ci_high_pct: hi,
    }
}

/// Gains of table `a` over table `b` for every (scheme, algorithm, value)
/// present in both, paired by seed.
pub fn compare_tables(a: &ResultTable, b: &ResultTable) -> Result<Vec<GainRow>> {
    if a.rows.is_empty() || b.rows.is_empty() {
        return Err(SimError::Empty("cannot compare an empty table".into()));
    }
    let gb = b.groups();
    let mut out = Vec::new();
    for ((scheme, algorithm, bits), rows) in a.groups() {
        if let Some(base) = gb.get(&(scheme.clone(), algorithm.clone(), bits)) {
            out.push(gain_row(&scheme, &scheme, &algorithm, f64::from_bits(bits), &rows, base));
        }
    }
    if out.is_empty() {
        return Err(SimError::Empty("the tables share no cells".into()));
    }
    Ok(out)
}

/// One figure-style table per algorithm: rows are sweep values, columns are
/// scheme means, as `value,<scheme>,<scheme>_std,...`.
pub fn figure_tables(summary: &[SummaryRow]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let algorithms: BTreeSet<&str> = summary.iter().map(|s| s.algorithm.as_str()).collect();
    for alg in algorithms {
        let rows: Vec<&SummaryRow> = summary.iter().filter(|s| s.algorithm == alg).collect();
        let schemes: BTreeSet<&str> = rows.iter().map(|s| s.scheme.as_str()).collect();
        let mut values: Vec<f64> = rows.iter().map(|s| s.value).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let sweep = rows.first().map_or("value", |s| s.sweep.as_str());
        let mut text = sweep.to_string();
        for s in &schemes {
            text.push_str(&format!(",{s},{s}_std"));
        }
        text.push('\n');
        for v in values {
            text.push_str(&format!("{v}"));
            for s in &schemes {
                match rows.iter().find(|r| r.scheme == *s && r.value == v) {
                    Some(r) => text.push_str(&format!(",{},{}", r.mean, r.std)),
                    None => text.push_str(",,"),
                }
            }
            text.push('\n');
        }
        out.insert(format!("figure_{}_{alg}.csv", sweep.to_ascii_lowercase()), text);
    }
    out
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
