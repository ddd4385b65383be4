//! Plain-text exchange formats.
//!
//! All formats are whitespace-separated tokens; `#` starts a comment that
//! runs to the end of the line, and line breaks carry no meaning.
//!
//! **Scenario** (system configuration plus one channel realization):
//!
//! ```text
//! starcrs-scenario 1
//! mode FE
//! antennas 4  users 4  elements 16
//! bs_power 0.24  noise_power 1e-12  self_interference 1e-11
//! reflect 2 0 2          # count, then user indices
//! transmit 2 1 3
//! relays 1 0
//! relay_power 1 0.12
//! matrix E 16 4          # name, rows, cols, then rows*cols entries row-major
//! ...
//! matrix G 4 4           # column k is g_k (BS to user k)
//! matrix H 16 4          # column k is h_k (surface to user k)
//! matrix HUU 4 4         # entry (m, n) is the link from user m to user n
//! matrix I 4 1           # self-interference realization per user
//! end
//! ```
//!
//! Complex entries are single tokens `re±imi`, e.g. `1.5e-3-2e-4i`. Real
//! numbers are written in shortest round-trip form, so export then import
//! reproduces the realization bit for bit.
//!
//! **Conic program** (debugging and cross-solver checks): maximize
//! `cᵀx + c0` subject to affine rows `a_iᵀx + b_i` grouped by a cone table.
//!
//! ```text
//! conic-program 1
//! vars 12  rows 9
//! cones 3
//! zero 2                 # rows 0..2: expression = 0
//! nonneg 3               # next rows: expression >= 0
//! soc 4                  # ‖rows 1..4‖ <= row 0
//! rsoc 3                 # ‖rows 2..‖² <= 2·row0·row1, row0, row1 >= 0
//! nonneg-vars 2  0 5     # count, then variable indices
//! objective 0.5 1        # constant c0, nnz, then `col value` pairs
//! 3 1.0
//! constants 1            # nnz, then `row value` pairs (b)
//! 4 -0.5
//! triplets 7             # nnz, then `row col value` (A)
//! ...
//! ```
//!
//! Equality rows come first, then `≥ 0` rows, then second-order blocks and
//! rotated blocks, in program order.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use starcrs_core::channel::ChannelSet;
use starcrs_core::conic::{ConicProgram, LinExpr, RsocBlock, SocBlock};
use starcrs_core::linalg::{CMat, CVec, Complex64};
use starcrs_core::model::{DesignPoint, Mode, SystemConfig};
use starcrs_core::record::RunRecord;

use crate::{Result, SimError};

const SCENARIO_MAGIC: &str = "starcrs-scenario";
const PROGRAM_MAGIC: &str = "conic-program";
const VERSION: &str = "1";

pub fn format_complex(z: Complex64) -> String {
    let mut s = format!("{:e}", z.re);
    if z.im.is_sign_negative() {
        let _ = write!(s, "{:e}i", z.im);
    } else {
        let _ = write!(s, "+{:e}i", z.im);
    }
    s
}

pub fn parse_complex(tok: &str) -> Option<Complex64> {
    let body = tok.strip_suffix('i')?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re = body[..split].parse().ok()?;
    let im = body[split..].trim_start_matches('+').parse().ok()?;
    Some(Complex64::new(re, im))
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| {
                let line = line.split('#').next().unwrap_or("");
                line.split_whitespace().map(move |t| (i + 1, t))
            })
            .collect();
        Self { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).or(self.items.last()).map_or(0, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(SimError::Parse { line: self.line(), msg: msg.into() })
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.items.get(self.pos) {
            Some(&(_, t)) => {
                self.pos += 1;
                Ok(t)
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        let t = self.next()?;
        if t != word {
            self.pos -= 1;
            return self.err(format!("expected `{word}`, found `{t}`"));
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let t = self.next()?;
        t.parse().or_else(|_| {
            self.pos -= 1;
            self.err(format!("invalid {what} `{t}`"))
        })
    }

    fn complex(&mut self) -> Result<Complex64> {
        let t = self.next()?;
        parse_complex(t).map_or_else(
            || {
                self.pos -= 1;
                self.err(format!("invalid complex entry `{t}`"))
            },
            Ok,
        )
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        self.expect(key)?;
        self.parse(key)
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        self.expect(key)?;
        let n: usize = self.parse("count")?;
        (0..n).map(|_| self.parse(key)).collect()
    }

    fn matrix(&mut self, name: &str) -> Result<CMat> {
        self.expect("matrix")?;
        self.expect(name)?;
        let rows: usize = self.parse("row count")?;
        let cols: usize = self.parse("column count")?;
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.complex()?;
            }
        }
        Ok(m)
    }
}

fn write_matrix(out: &mut String, name: &str, m: &CMat, note: &str) {
    let _ = write!(out, "matrix {name} {} {}", m.nrows(), m.ncols());
    if !note.is_empty() {
        let _ = write!(out, "  # {note}");
    }
    out.push('\n');
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

fn write_list<T: std::fmt::Display>(out: &mut String, key: &str, items: &[T]) {
    let _ = write!(out, "{key} {}", items.len());
    for it in items {
        let _ = write!(out, " {it}");
    }
    out.push('\n');
}

/// Serializes a configuration and one channel realization.
pub fn write_scenario(config: &SystemConfig, channels: &ChannelSet) -> String {
    let mut out = format!("{SCENARIO_MAGIC} {VERSION}\n");
    let _ = writeln!(out, "mode {}", config.mode.name());
    let _ = writeln!(out, "antennas {}  users {}  elements {}", config.antennas, config.users, config.elements);
    let _ = writeln!(
        out,
        "bs_power {:e}  noise_power {:e}  self_interference {:e}",
        config.bs_power, config.noise_power, config.self_interference
    );
    write_list(&mut out, "reflect", &config.reflect_users);
    write_list(&mut out, "transmit", &config.transmit_users);
    write_list(&mut out, "relays", &config.relay_users);
    let powers: Vec<String> = config.relay_power.iter().map(|p| format!("{p:e}")).collect();
    write_list(&mut out, "relay_power", &powers);
    write_matrix(&mut out, "E", &channels.e, "BS to surface");
    let l = config.antennas;
    let by_cols = |vs: &[CVec], rows: usize| CMat::from_fn(rows, vs.len(), |i, j| vs[j][i]);
    write_matrix(&mut out, "G", &by_cols(&channels.g, l), "column k: BS to user k");
    write_matrix(&mut out, "H", &by_cols(&channels.h, config.elements), "column k: surface to user k");
    write_matrix(&mut out, "HUU", &channels.huu, "(m, n): user m to user n");
    let si = CMat::from_fn(channels.self_interference.len(), 1, |i, _| channels.self_interference[i]);
    write_matrix(&mut out, "I", &si, "self-interference");
    out.push_str("end\n");
    out
}

/// Parses [`write_scenario`] output and checks every dimension.
pub fn read_scenario(text: &str) -> Result<(SystemConfig, ChannelSet)> {
    let mut t = Tokens::new(text);
    t.expect(SCENARIO_MAGIC)?;
    t.expect(VERSION)?;
    let mode: Mode = t.keyed("mode")?;
    let antennas: usize = t.keyed("antennas")?;
    let users: usize = t.keyed("users")?;
    let elements: usize = t.keyed("elements")?;
    let bs_power: f64 = t.keyed("bs_power")?;
    let noise_power: f64 = t.keyed("noise_power")?;
    let self_interference: f64 = t.keyed("self_interference")?;
    let reflect_users: Vec<usize> = t.list("reflect")?;
    let transmit_users: Vec<usize> = t.list("transmit")?;
    let relay_users: Vec<usize> = t.list("relays")?;
    let relay_power: Vec<f64> = t.list("relay_power")?;
    let dest_users = (0..users).filter(|u| !relay_users.contains(u)).collect();
    let config = SystemConfig {
        antennas,
        users,
        elements,
        reflect_users,
        transmit_users,
        relay_users,
        dest_users,
        bs_power,
        relay_power,
        noise_power,
        self_interference,
        mode,
    };
    config.validate()?;
    let e = t.matrix("E")?;
    let g = t.matrix("G")?;
    let h = t.matrix("H")?;
    let huu = t.matrix("HUU")?;
    let si = t.matrix("I")?;
    t.expect("end")?;
    if let Some(extra) = t.peek() {
        return t.err(format!("trailing token `{extra}`"));
    }
    let cols = |m: &CMat| (0..m.ncols()).map(|j| m.column(j).into_owned()).collect::<Vec<CVec>>();
    let channels = ChannelSet {
        e: if elements == 0 { CMat::zeros(0, antennas) } else { e },
        g: cols(&g),
        h: if elements == 0 { vec![CVec::zeros(0); users] } else { cols(&h) },
        huu,
        self_interference: si.column(0).into_owned(),
    };
    channels.check_dimensions(&config)?;
    Ok((config, channels))
}

fn write_f64(out: &mut String, v: f64) {
    let _ = write!(out, "{v:?}");
}

/// Serializes a conic program (see the module docs for the layout).
pub fn write_program(p: &ConicProgram) -> String {
    let mut rows: Vec<&LinExpr> = Vec::new();
    let mut cones: Vec<(&str, usize)> = Vec::new();
    if !p.eq_constraints.is_empty() {
        cones.push(("zero", p.eq_constraints.len()));
        rows.extend(&p.eq_constraints);
    }
    if !p.ineq_constraints.is_empty() {
        cones.push(("nonneg", p.ineq_constraints.len()));
        rows.extend(&p.ineq_constraints);
    }
    for b in &p.soc_blocks {
        cones.push(("soc", b.u.len() + 1));
        rows.push(&b.t);
        rows.extend(&b.u);
    }
    for b in &p.rsoc_blocks {
        cones.push(("rsoc", b.u.len() + 2));
        rows.push(&b.s);
        rows.push(&b.t);
        rows.extend(&b.u);
    }
    let mut out = format!("{PROGRAM_MAGIC} {VERSION}\nvars {}  rows {}\ncones {}\n", p.n_vars, rows.len(), cones.len());
    for (kind, size) in &cones {
        let _ = writeln!(out, "{kind} {size}");
    }
    write_list(&mut out, "nonneg-vars", &p.nonneg_vars);
    let obj: Vec<(usize, f64)> = p.objective.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect();
    out.push_str("objective ");
    write_f64(&mut out, p.objective_constant);
    let _ = writeln!(out, " {}", obj.len());
    for (j, c) in obj {
        let _ = write!(out, "{j} ");
        write_f64(&mut out, c);
        out.push('\n');
    }
    let consts: Vec<(usize, f64)> =
        rows.iter().enumerate().filter(|(_, r)| r.constant != 0.0).map(|(i, r)| (i, r.constant)).collect();
    let _ = writeln!(out, "constants {}", consts.len());
    for (i, b) in consts {
        let _ = write!(out, "{i} ");
        write_f64(&mut out, b);
        out.push('\n');
    }
    let nnz: usize = rows.iter().map(|r| r.terms.len()).sum();
    let _ = writeln!(out, "triplets {nnz}");
    for (i, r) in rows.iter().enumerate() {
        for &(j, a) in &r.terms {
            let _ = write!(out, "{i} {j} ");
            write_f64(&mut out, a);
            out.push('\n');
        }
    }
    out
}

/// Parses [`write_program`] output.
pub fn read_program(text: &str) -> Result<ConicProgram> {
    let mut t = Tokens::new(text);
    t.expect(PROGRAM_MAGIC)?;
    t.expect(VERSION)?;
    let n_vars: usize = t.keyed("vars")?;
    let n_rows: usize = t.keyed("rows")?;
    let n_cones: usize = t.keyed("cones")?;
    let mut cones = Vec::with_capacity(n_cones);
    for _ in 0..n_cones {
        let kind = t.next()?;
        if !matches!(kind, "zero" | "nonneg" | "soc" | "rsoc") {
            t.pos -= 1;
            return t.err(format!("unknown cone `{kind}`"));
        }
        let size: usize = t.parse("cone size")?;
        if (kind == "soc" && size < 1) || (kind == "rsoc" && size < 2) {
            return t.err(format!("{kind} cone of size {size}"));
        }
        cones.push((kind, size));
    }
    if cones.iter().map(|c| c.1).sum::<usize>() != n_rows {
        return t.err("cone sizes do not add up to the row count");
    }
    let nonneg_vars: Vec<usize> = t.list("nonneg-vars")?;
    t.expect("objective")?;
    let objective_constant: f64 = t.parse("objective constant")?;
    let nnz: usize = t.parse("count")?;
    let mut objective = vec![0.0; n_vars];
    for _ in 0..nnz {
        let j: usize = t.parse("column")?;
        let c: f64 = t.parse("coefficient")?;
        if j >= n_vars {
            return t.err(format!("column {j} out of range"));
        }
        objective[j] = c;
    }
    let mut rows = vec![LinExpr::zero(); n_rows];
    let nc: usize = t.keyed("constants")?;
    for _ in 0..nc {
        let i: usize = t.parse("row")?;
        let b: f64 = t.parse("constant")?;
        if i >= n_rows {
            return t.err(format!("row {i} out of range"));
        }
        rows[i].constant = b;
    }
    let nt: usize = t.keyed("triplets")?;
    for _ in 0..nt {
        let i: usize = t.parse("row")?;
        let j: usize = t.parse("column")?;
        let a: f64 = t.parse("coefficient")?;
        if i >= n_rows || j >= n_vars {
            return t.err(format!("entry ({i}, {j}) out of range"));
        }
        rows[i].terms.push((j, a));
    }
    if let Some(extra) = t.peek() {
        return t.err(format!("trailing token `{extra}`"));
    }
    let mut p = ConicProgram { n_vars, objective, objective_constant, nonneg_vars, ..ConicProgram::default() };
    let mut it = rows.into_iter();
    for (kind, size) in cones {
        let block: Vec<LinExpr> = it.by_ref().take(size).collect();
        match kind {
            "zero" => p.eq_constraints.extend(block),
            "nonneg" => p.ineq_constraints.extend(block),
            "soc" => {
                let mut b = block.into_iter();
                let t0 = b.next().unwrap_or_else(LinExpr::zero);
                p.soc_blocks.push(SocBlock { t: t0, u: b.collect() });
            }
            _ => {
                let mut b = block.into_iter();
                let s = b.next().unwrap_or_else(LinExpr::zero);
                let t1 = b.next().unwrap_or_else(LinExpr::zero);
                p.rsoc_blocks.push(RsocBlock { s, t: t1, u: b.collect() });
            }
        }
    }
    p.check()?;
    Ok(p)
}

/// JSON form of a [`RunRecord`], one object per line in record files.
///
/// Complex matrices are stored as `[[re, im], ...]` in row-major order
/// with explicit dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDoc {
    pub algorithm: String,
    pub scheme: String,
    pub mode: String,
    pub seed: u64,
    pub objective: f64,
    pub iterations: usize,
    pub wall_time: Option<f64>,
    pub penalty: f64,
    pub converged: bool,
    pub solver_failed: bool,
    pub outer_trace: Vec<f64>,
    pub passive_traces: Vec<Vec<f64>>,
    pub active_traces: Vec<Vec<f64>>,
    pub rates: RatesDoc,
    pub violations: ViolationsDoc,
    pub point: PointDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesDoc {
    pub common: Vec<f64>,
    pub private: Vec<f64>,
    pub common_cap: f64,
    pub total: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationsDoc {
    pub power_slack: f64,
    pub star: f64,
    pub binary: f64,
    pub time: f64,
    pub commonrate_slack: f64,
    pub split: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDoc {
    pub precoders_shape: [usize; 2],
    pub precoders: Vec<[f64; 2]>,
    pub psi_r: Vec<[f64; 2]>,
    pub psi_t: Vec<[f64; 2]>,
    pub common_split: Vec<f64>,
    pub lambda: f64,
    pub lambda_r: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
}

fn pairs<'a>(it: impl Iterator<Item = &'a Complex64>) -> Vec<[f64; 2]> {
    it.map(|z| [z.re, z.im]).collect()
}

impl From<&DesignPoint> for PointDoc {
    fn from(p: &DesignPoint) -> Self {
        let m = &p.precoders;
        let row_major: Vec<Complex64> = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
        Self {
            precoders_shape: [m.nrows(), m.ncols()],
            precoders: pairs(row_major.iter()),
            psi_r: pairs(p.psi_r.iter()),
            psi_t: pairs(p.psi_t.iter()),
            common_split: p.common_split.clone(),
            lambda: p.lambda,
            lambda_r: p.lambda_r,
            lambda_1: p.lambda_1,
            lambda_2: p.lambda_2,
        }
    }
}

impl PointDoc {
    pub fn to_point(&self) -> Result<DesignPoint> {
        let [r, c] = self.precoders_shape;
        if self.precoders.len() != r * c {
            return Err(SimError::Parse { line: 0, msg: "precoder entries do not match the shape".into() });
        }
        let z = |v: &[f64; 2]| Complex64::new(v[0], v[1]);
        Ok(DesignPoint {
            precoders: CMat::from_fn(r, c, |i, j| z(&self.precoders[i * c + j])),
            common_split: self.common_split.clone(),
            psi_r: CVec::from_iterator(self.psi_r.len(), self.psi_r.iter().map(z)),
            psi_t: CVec::from_iterator(self.psi_t.len(), self.psi_t.iter().map(z)),
            lambda: self.lambda,
            lambda_r: self.lambda_r,
            lambda_1: self.lambda_1,
            lambda_2: self.lambda_2,
        })
    }
}

impl From<&RunRecord> for RecordDoc {
    fn from(r: &RunRecord) -> Self {
        let f = &r.feasibility;
        Self {
            algorithm: r.algorithm.name().into(),
            scheme: r.scheme.clone(),
            mode: r.mode.name().into(),
            seed: r.seed,
            objective: r.objective,
            iterations: r.iterations,
            wall_time: r.wall_time,
            penalty: r.penalty,
            converged: r.flags.converged,
            solver_failed: r.flags.solver_failed,
            outer_trace: r.outer_trace.clone(),
            passive_traces: r.passive_traces.clone(),
            active_traces: r.active_traces.clone(),
            rates: RatesDoc {
                common: r.rates.common.clone(),
                private: r.rates.private.clone(),
                common_cap: r.rates.common_cap,
                total: r.rates.total.clone(),
            },
            violations: ViolationsDoc {
                power_slack: f.power_slack,
                star: f.star_violation,
                binary: f.binary_violation,
                time: f.time_violation,
                commonrate_slack: f.commonrate_slack,
                split: f.split_violation,
                feasible: f.feasible,
            },
            point: PointDoc::from(&r.point),
        }
    }
}

pub fn record_to_json(r: &RunRecord) -> String {
    serde_json::to_string(&RecordDoc::from(r)).expect("records always serialize")
}

pub fn record_from_json(line: &str) -> Result<RecordDoc> {
    Ok(serde_json::from_str(line)?)
}
