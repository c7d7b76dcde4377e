//! Running a configured experiment and writing its results.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::sim::{
    aggregate, dmin_bound_curve, run_replicated, DminBound, Environment, ShadowStats,
};

pub const CSV_HEADER: [&str; 6] = [
    "policy",
    "n",
    "regret_mean",
    "regret_stderr",
    "pct_best_mean",
    "dmin_bound",
];

/// One output line: a policy at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub policy: String,
    pub n: u64,
    pub regret_mean: f64,
    pub regret_stderr: f64,
    /// Mean percentage (0 to 100) of rounds spent on an optimal arm.
    pub pct_best_mean: f64,
    pub dmin_bound: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: usize,
    pub shadow_check: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            shadow_check: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub bound: DminBound,
    /// Shadow-check statistics per MED policy label, when requested.
    pub shadow: Vec<(String, ShadowStats)>,
}

impl ExperimentResult {
    /// [`emit_summary`] plus notes on the bound and the shadow check.
    pub fn summary(&self) -> String {
        let mut out = emit_summary(&self.rows);
        let _ = writeln!(
            out,
            "Dmin bound coefficient: {:.6} (bound = c ln n)",
            self.bound.coefficient
        );
        if self.bound.approximated {
            let _ = writeln!(
                out,
                "note: beta arms are not finite-support; their D_min in the bound uses a quantile discretisation"
            );
        }
        for (label, s) in &self.shadow {
            let _ = writeln!(
                out,
                "shadow check {label}: {}/{} (round, arm) pairs within {} ({:.4}%), max |error| {:.3e}",
                s.within,
                s.pairs,
                crate::sim::SHADOW_TOLERANCE,
                100.0 * s.fraction_within(),
                s.max_abs_error
            );
        }
        out
    }
}

/// Runs every policy for `config.runs` episodes with seeds
/// `(config.seed, run, policy_index)` and aggregates per checkpoint.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentResult> {
    let env = Environment::new(config.arms.clone())?;
    let bound = dmin_bound_curve(&env, config.beta_atoms)?;
    let checkpoints = config.checkpoints.resolve(config.horizon);
    let mut rows = Vec::new();
    let mut shadow = Vec::new();
    for (index, policy) in config.policies.iter().enumerate() {
        let runs = run_replicated(
            &env,
            &policy.config,
            index as u64,
            config.seed,
            config.runs,
            config.horizon,
            &checkpoints,
            options.shadow_check,
            options.workers,
        )
        .map_err(|e| Error::Input(format!("{}: {e}", policy.label)))?;
        if options.shadow_check && policy.config.kind().starts_with("med") {
            let mut total = ShadowStats::default();
            for r in &runs {
                if let Some(s) = &r.shadow {
                    total.merge(s);
                }
            }
            shadow.push((policy.label.clone(), total));
        }
        let curve = aggregate(&runs, &bound)?;
        for (i, &n) in curve.checkpoints.iter().enumerate() {
            rows.push(ResultRow {
                policy: policy.label.clone(),
                n,
                regret_mean: curve.regret_mean[i],
                regret_stderr: curve.regret_stderr[i],
                pct_best_mean: 100.0 * curve.best_fraction_mean[i],
                dmin_bound: curve.dmin_bound[i],
            });
        }
    }
    rows.sort_by(|a, b| a.policy.cmp(&b.policy).then(a.n.cmp(&b.n)));
    Ok(ExperimentResult {
        rows,
        bound,
        shadow,
    })
}

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.policy.clone(),
            r.n.to_string(),
            format_real(r.regret_mean),
            format_real(r.regret_stderr),
            format_real(r.pct_best_mean),
            format_real(r.dmin_bound),
        ])?;
    }
    w.flush()
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(rows, &mut buf)?;
    buf.flush()
}

pub fn read_csv(path: &Path) -> anyhow::Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    anyhow::ensure!(header == CSV_HEADER, "unexpected header {header:?}");
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ResultRow {
                policy: rec[0].to_string(),
                n: rec[1].parse()?,
                regret_mean: rec[2].parse()?,
                regret_stderr: rec[3].parse()?,
                pct_best_mean: rec[4].parse()?,
                dmin_bound: rec[5].parse()?,
            })
        })
        .collect()
}

/// Final-checkpoint regret and `regret / ln n` for each policy.
pub fn emit_summary(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let mut finals: Vec<&ResultRow> = Vec::new();
    for r in rows {
        match finals.iter_mut().find(|f| f.policy == r.policy) {
            Some(f) if f.n < r.n => *f = r,
            Some(_) => {}
            None => finals.push(r),
        }
    }
    let _ = writeln!(
        out,
        "{:<16} {:>9} {:>14} {:>12} {:>12} {:>10} {:>12}",
        "policy", "n", "regret", "stderr", "regret/ln n", "% best", "Dmin bound"
    );
    for r in finals {
        let ratio = if r.n > 1 {
            r.regret_mean / (r.n as f64).ln()
        } else {
            f64::NAN
        };
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>14.4} {:>12.4} {:>12.4} {:>10.2} {:>12.4}",
            r.policy, r.n, r.regret_mean, r.regret_stderr, ratio, r.pct_best_mean, r.dmin_bound
        );
    }
    out
}
