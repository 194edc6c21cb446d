//! Subcommand bodies. Each writes its files into an [`OutputDir`].

use std::fmt::Write as _;

use serde::Serialize;

use super::config::{Resolved, RunConfig, Theorem};
use super::io::{parse_points, OutputDir};
use super::verify::{run_suite, VerifyReport};
use super::CliError;
use crate::analysis::{grand_norm_report, hausdorff_upper_sum, CoverReport, NormReport};
use crate::cantor::SequencePack;
use crate::gauge::{diameter_constant, eval_h};
use crate::mapping::PonomarevMap;

/// Tolerance on `|a_k^n τ(2^{-k} a_k) - 1|` for root sequences.
pub const ROOT_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceRow {
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub rt: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Gluing residual in ulps (zero at `k = 0`).
    pub gluing_ulps: f64,
    /// Quantity tested by the theorem check.
    pub check_value: f64,
    pub check_bound: f64,
    pub check: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceReport {
    pub theorem: Theorem,
    pub dimension: usize,
    pub depth: usize,
    pub rows: Vec<SequenceRow>,
}

/// Per-level table with the theorem check:
/// thm1 tests `|a_k^n τ(2^{-k} a_k) - 1| ≤ 1e-10`, thm2 tests
/// `h(c_n 2^{-k} a_k) ≤ safety · 2^{-2nk}` with `a_k ≤ a_{k-1}/2`, and custom
/// sequences test `a_k ≤ a_{k-1}`, `b_k ≤ b_{k-1}`.
pub fn sequence_table(cfg: &RunConfig, res: &Resolved) -> Result<Vec<SequenceRow>, CliError> {
    let p = &res.pack;
    let n = p.dimension();
    let residuals = p.gluing_residuals();
    let mut rows = Vec::with_capacity(p.depth() + 1);
    for k in 0..=p.depth() {
        let (a, b) = (p.a()[k], p.b()[k]);
        let (value, bound, ok) = if k == 0 {
            (a.max(b), 1.0, a == 1.0 && b == 1.0)
        } else {
            match cfg.theorem {
                Theorem::Thm1 => {
                    let tau = res.gauge.tau().expect("thm1 gauge has tau");
                    let v = (a.powi(n as i32) * tau.eval(2f64.powi(-(k as i32)) * a) - 1.0).abs();
                    (v, ROOT_IDENTITY_TOL, v <= ROOT_IDENTITY_TOL)
                }
                Theorem::Thm2 => {
                    let arg = diameter_constant(n) * p.r()[k];
                    let v = eval_h(&res.gauge, arg).map_err(|e| CliError::Numeric(e.to_string()))?;
                    let bound = cfg.safety * 2f64.powi(-2 * (n * k) as i32);
                    (v, bound, v <= bound && a <= 0.5 * p.a()[k - 1])
                }
                Theorem::Custom => (a, p.a()[k - 1], a <= p.a()[k - 1] && b <= p.b()[k - 1]),
            }
        };
        let gluing = if k == 0 { 0.0 } else { residuals[k - 1].max() };
        rows.push(SequenceRow {
            k,
            a,
            b,
            r: p.r()[k],
            rt: p.rt()[k],
            alpha: p.alpha()[k],
            beta: p.beta()[k],
            gluing_ulps: gluing,
            check_value: value,
            check_bound: bound,
            check: ok,
        });
    }
    Ok(rows)
}

pub fn cmd_sequence(cfg: &RunConfig, res: &Resolved, out: &mut OutputDir) -> Result<(), CliError> {
    let rows = sequence_table(cfg, res)?;
    let mut csv = String::from("k,a,b,r,rt,alpha,beta,gluing_ulps,check_value,check_bound,check\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{}",
            r.k, r.a, r.b, r.r, r.rt, r.alpha, r.beta, r.gluing_ulps, r.check_value, r.check_bound, r.check
        )
        .unwrap();
    }
    out.csv("sequence.csv", &csv)?;
    out.json(
        "sequence.json",
        &SequenceReport {
            theorem: cfg.theorem,
            dimension: res.pack.dimension(),
            depth: res.pack.depth(),
            rows,
        },
    )
}

fn build_map(res: &Resolved) -> Result<PonomarevMap, CliError> {
    PonomarevMap::build_with(res.pack.clone(), res.provenance.clone()).map_err(|e| CliError::Numeric(e.to_string()))
}

/// Evaluates `f`, `f^{-1}(f(x))` at each point. Rows that fail keep their
/// message in the `error` column; the run continues.
pub fn cmd_eval(res: &Resolved, points: &str, out: &mut OutputDir) -> Result<usize, CliError> {
    let map = build_map(res)?;
    let n = map.dimension();
    let mut csv = String::from("line");
    for prefix in ["x", "y", "xr"] {
        for i in 1..=n {
            write!(csv, ",{prefix}{i}").unwrap();
        }
    }
    csv.push_str(",roundtrip_error,depth,region,error\n");
    let blanks = ",".repeat(3 * n + 3);
    let mut failures = 0;
    for (line, row) in parse_points(points, n) {
        let result = row.and_then(|x| {
            let e = map.eval_traced(&x).map_err(|e| e.to_string())?;
            let back = map.eval_inverse(&e.value).map_err(|e| e.to_string())?;
            Ok((x, e, back))
        });
        match result {
            Ok((x, e, back)) => {
                write!(csv, "{line}").unwrap();
                for v in x.iter().chain(&e.value).chain(&back) {
                    write!(csv, ",{v:e}").unwrap();
                }
                let err = back.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                writeln!(csv, ",{err:e},{},{},", e.depth(), e.region.as_str()).unwrap();
            }
            Err(msg) => {
                failures += 1;
                writeln!(csv, "{line}{blanks},\"{}\"", msg.replace('"', "'")).unwrap();
            }
        }
    }
    out.csv("eval.csv", &csv)?;
    Ok(failures)
}

pub fn cmd_norms(cfg: &RunConfig, res: &Resolved, out: &mut OutputDir) -> Result<NormReport, CliError> {
    let map = build_map(res)?;
    let grid = cfg.grid()?;
    let report = grand_norm_report(&map, &grid).map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut csv = String::from("eps,value,bound\n");
    for ((e, v), b) in report.eps.iter().zip(&report.values).zip(&report.bounds) {
        writeln!(csv, "{e:e},{v:e},{b:e}").unwrap();
    }
    out.json("norms.json", &report)?;
    out.csv("norms.csv", &csv)?;
    Ok(report)
}

pub fn cmd_hausdorff(res: &Resolved, out: &mut OutputDir) -> Result<Vec<CoverReport>, CliError> {
    let pack: &SequencePack = &res.pack;
    let reports = (0..=pack.depth())
        .map(|k| hausdorff_upper_sum(&res.gauge, pack, k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut csv = String::from("depth,count,per_cube,total,ratio_to_one\n");
    for r in &reports {
        writeln!(csv, "{},{:e},{:e},{:e},{:e}", r.depth, r.count, r.per_cube, r.total, r.ratio_to_one).unwrap();
    }
    out.json("hausdorff.json", &reports)?;
    out.csv("hausdorff.csv", &csv)?;
    Ok(reports)
}

pub fn cmd_verify(cfg: &RunConfig, res: &Resolved, out: &mut OutputDir) -> Result<VerifyReport, CliError> {
    let report = run_suite(cfg, res);
    out.json("verify.json", &report)?;
    Ok(report)
}
