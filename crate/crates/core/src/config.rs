//! Experiment configuration files.
//!
//! Configs are TOML:
//!
//! ```toml
//! seed = 42
//! horizon = 10000
//! runs = 100
//! bounds = [0.0, 1.0]
//! checkpoints = "log"        # or an explicit list such as [100, 1000, 10000]
//!
//! [[arms]]
//! kind = "bernoulli"
//! p = 0.55
//!
//! [[arms]]
//! kind = "discrete"
//! points = [0.2, 0.6]
//! probs = [0.5, 0.5]
//!
//! [[policies]]
//! policy = "med"
//! r = 2
//! d = 0.01
//! ```
//!
//! Validation errors name the offending key path, e.g. `arms[1].p`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dist::{ArmKind, ArmModel, Bounds, FiniteDistribution};
use crate::error::{Error, Result};
use crate::policy::{AnchorRule, PolicyConfig};
use crate::sim::{log_checkpoints, DEFAULT_BETA_ATOMS};

/// Slack allowed on the total of `probs` in a discrete arm before it is normalised.
pub const PROBS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointSpec {
    /// `{10, 20, 50, 100, ...}` up to the horizon.
    Log,
    List(Vec<u64>),
}

impl CheckpointSpec {
    pub fn resolve(&self, horizon: u64) -> Vec<u64> {
        match self {
            CheckpointSpec::Log => log_checkpoints(horizon),
            CheckpointSpec::List(v) => v.clone(),
        }
    }
}

/// A policy entry with the label used in output rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedPolicy {
    pub label: String,
    pub config: PolicyConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub bounds: Bounds,
    pub arms: Vec<ArmModel>,
    pub policies: Vec<NamedPolicy>,
    pub horizon: u64,
    pub runs: u64,
    pub seed: u64,
    pub checkpoints: CheckpointSpec,
    pub output: Option<PathBuf>,
    /// Quantile atoms per beta arm when evaluating the bound curve.
    pub beta_atoms: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    bounds: Option<Vec<f64>>,
    arms: Option<Vec<RawArm>>,
    policies: Option<Vec<RawPolicy>>,
    horizon: Option<i64>,
    runs: Option<i64>,
    seed: Option<u64>,
    checkpoints: Option<RawCheckpoints>,
    output: Option<PathBuf>,
    beta_atoms: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawCheckpoints {
    Named(String),
    List(Vec<i64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArm {
    kind: Option<String>,
    p: Option<f64>,
    points: Option<Vec<f64>>,
    probs: Option<Vec<f64>>,
    alpha: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    policy: Option<String>,
    label: Option<String>,
    r: Option<i64>,
    d: Option<f64>,
    alpha: Option<f64>,
    anchor: Option<String>,
}

fn required<T>(v: Option<T>, path: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(path, "missing key"))
}

fn positive(v: i64, path: &str) -> Result<u64> {
    if v >= 1 {
        Ok(v as u64)
    } else {
        Err(Error::config(path, format!("must be >= 1, got {v}")))
    }
}

fn reject_extra(path: &str, kind: &str, present: &[(&str, bool)]) -> Result<()> {
    match present.iter().find(|(_, set)| *set) {
        Some((key, _)) => Err(Error::config(
            format!("{path}.{key}"),
            format!("not a parameter of `{kind}`"),
        )),
        None => Ok(()),
    }
}

fn parse_arm(raw: RawArm, bounds: Bounds, path: &str) -> Result<ArmModel> {
    let kind = required(raw.kind, &format!("{path}.kind"))?;
    let in_domain = |e: Error, key: &str| match e {
        Error::Domain(m) | Error::InvalidDistribution(m) => {
            Error::config(format!("{path}.{key}"), m)
        }
        other => other,
    };
    let kind = match kind.as_str() {
        "bernoulli" => {
            reject_extra(
                path,
                "bernoulli",
                &[
                    ("points", raw.points.is_some()),
                    ("probs", raw.probs.is_some()),
                    ("alpha", raw.alpha.is_some()),
                    ("beta", raw.beta.is_some()),
                ],
            )?;
            let p = required(raw.p, &format!("{path}.p"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(
                    format!("{path}.p"),
                    format!("must be in [0, 1], got {p}"),
                ));
            }
            ArmKind::Bernoulli { p }
        }
        "discrete" => {
            reject_extra(
                path,
                "discrete",
                &[
                    ("p", raw.p.is_some()),
                    ("alpha", raw.alpha.is_some()),
                    ("beta", raw.beta.is_some()),
                ],
            )?;
            let points = required(raw.points, &format!("{path}.points"))?;
            let probs = required(raw.probs, &format!("{path}.probs"))?;
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROBS_TOLERANCE {
                return Err(Error::config(
                    format!("{path}.probs"),
                    format!("must sum to 1, got {total}"),
                ));
            }
            if let Some(x) = points.iter().find(|x| !bounds.contains(**x)) {
                return Err(Error::config(
                    format!("{path}.points"),
                    format!("{x} lies outside bounds [{}, {}]", bounds.lo, bounds.hi),
                ));
            }
            ArmKind::Discrete(
                FiniteDistribution::from_weights(points, probs)
                    .map_err(|e| in_domain(e, "probs"))?,
            )
        }
        "beta" => {
            reject_extra(
                path,
                "beta",
                &[
                    ("p", raw.p.is_some()),
                    ("points", raw.points.is_some()),
                    ("probs", raw.probs.is_some()),
                ],
            )?;
            let alpha = required(raw.alpha, &format!("{path}.alpha"))?;
            let beta = required(raw.beta, &format!("{path}.beta"))?;
            for (key, v) in [("alpha", alpha), ("beta", beta)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config(
                        format!("{path}.{key}"),
                        format!("must be > 0, got {v}"),
                    ));
                }
            }
            ArmKind::Beta { alpha, beta }
        }
        other => {
            return Err(Error::config(
                format!("{path}.kind"),
                format!("unknown arm kind `{other}` (expected bernoulli, discrete or beta)"),
            ))
        }
    };
    ArmModel::new(kind, bounds).map_err(|e| in_domain(e, "kind"))
}

fn parse_policy(raw: RawPolicy, path: &str) -> Result<NamedPolicy> {
    let kind = required(raw.policy, &format!("{path}.policy"))?;
    let budget = |default: u32| -> Result<u32> {
        match raw.r {
            None => Ok(default),
            Some(r) if (1..=u32::MAX as i64).contains(&r) => Ok(r as u32),
            Some(r) => Err(Error::config(
                format!("{path}.r"),
                format!("must be >= 1, got {r}"),
            )),
        }
    };
    let config = match kind.as_str() {
        "med" => {
            reject_extra(path, "med", &[("alpha", raw.alpha.is_some())])?;
            let d = raw.d.unwrap_or(0.01);
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::config(format!("{path}.d"), format!("must be >= 0, got {d}")));
            }
            let anchor = match raw.anchor.as_deref() {
                None | Some("best-mean") => AnchorRule::BestMean,
                Some("own-mean") => AnchorRule::OwnMean,
                Some("last-solve") => AnchorRule::LastSolve,
                Some(other) => {
                    return Err(Error::config(
                        format!("{path}.anchor"),
                        format!("unknown anchor rule `{other}` (expected best-mean, own-mean or last-solve)"),
                    ))
                }
            };
            PolicyConfig::Med {
                r: budget(2)?,
                d,
                anchor,
            }
        }
        "med-ideal" => {
            reject_extra(
                path,
                "med-ideal",
                &[
                    ("d", raw.d.is_some()),
                    ("alpha", raw.alpha.is_some()),
                    ("anchor", raw.anchor.is_some()),
                ],
            )?;
            PolicyConfig::MedIdeal {
                r: budget(crate::dmin::EXACT_BUDGET)?,
            }
        }
        "ucb2" => {
            reject_extra(
                path,
                "ucb2",
                &[
                    ("r", raw.r.is_some()),
                    ("d", raw.d.is_some()),
                    ("anchor", raw.anchor.is_some()),
                ],
            )?;
            let alpha = raw.alpha.unwrap_or(0.001);
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::config(
                    format!("{path}.alpha"),
                    format!("must be in (0, 1), got {alpha}"),
                ));
            }
            PolicyConfig::Ucb2 { alpha }
        }
        "ucb1" | "ucb-tuned" | "uniform-random" => {
            reject_extra(
                path,
                &kind,
                &[
                    ("r", raw.r.is_some()),
                    ("d", raw.d.is_some()),
                    ("alpha", raw.alpha.is_some()),
                    ("anchor", raw.anchor.is_some()),
                ],
            )?;
            match kind.as_str() {
                "ucb1" => PolicyConfig::Ucb1,
                "ucb-tuned" => PolicyConfig::UcbTuned,
                _ => PolicyConfig::UniformRandom,
            }
        }
        other => {
            return Err(Error::config(
                format!("{path}.policy"),
                format!(
                    "unknown policy `{other}` (expected med, med-ideal, ucb1, ucb-tuned, ucb2 or uniform-random)"
                ),
            ))
        }
    };
    let label = raw.label.unwrap_or_else(|| config.kind().to_string());
    if label.is_empty() {
        return Err(Error::config(format!("{path}.label"), "must not be empty"));
    }
    Ok(NamedPolicy { label, config })
}

/// Parses and validates config text. `origin` names the source in TOML syntax errors.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text)
        .map_err(|e| Error::config(origin, e.to_string().trim_end().replace('\n', " ")))?;

    let bounds = match raw.bounds {
        None => Bounds::unit(),
        Some(v) if v.len() == 2 => Bounds::new(v[0], v[1]).map_err(|_| {
            Error::config("bounds", format!("need a < b, got [{}, {}]", v[0], v[1]))
        })?,
        Some(v) => {
            return Err(Error::config(
                "bounds",
                format!("expected [a, b], got {} values", v.len()),
            ))
        }
    };

    let raw_arms = required(raw.arms, "arms")?;
    let arms = raw_arms
        .into_iter()
        .enumerate()
        .map(|(i, a)| parse_arm(a, bounds, &format!("arms[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if arms.len() < 2 {
        return Err(Error::config(
            "arms",
            format!("need at least 2 arms, got {}", arms.len()),
        ));
    }

    let raw_policies = required(raw.policies, "policies")?;
    let policies = raw_policies
        .into_iter()
        .enumerate()
        .map(|(i, p)| parse_policy(p, &format!("policies[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if policies.is_empty() {
        return Err(Error::config("policies", "need at least one policy"));
    }
    let mut seen = BTreeSet::new();
    for (i, p) in policies.iter().enumerate() {
        if !seen.insert(p.label.as_str()) {
            return Err(Error::config(
                format!("policies[{i}].label"),
                format!("duplicate label `{}`; set a distinct `label`", p.label),
            ));
        }
    }

    let horizon = positive(required(raw.horizon, "horizon")?, "horizon")?;
    if horizon < arms.len() as u64 {
        return Err(Error::config(
            "horizon",
            format!("must be >= number of arms ({}), got {horizon}", arms.len()),
        ));
    }
    let runs = positive(required(raw.runs, "runs")?, "runs")?;

    let checkpoints = match raw.checkpoints {
        None => CheckpointSpec::Log,
        Some(RawCheckpoints::Named(s)) if s == "log" => CheckpointSpec::Log,
        Some(RawCheckpoints::Named(s)) => {
            return Err(Error::config(
                "checkpoints",
                format!("expected \"log\" or a list of rounds, got \"{s}\""),
            ))
        }
        Some(RawCheckpoints::List(v)) => {
            if v.is_empty() {
                return Err(Error::config("checkpoints", "list must not be empty"));
            }
            if let Some(c) = v.iter().find(|&&c| c < 1 || c as u64 > horizon) {
                return Err(Error::config(
                    "checkpoints",
                    format!("{c} is outside [1, horizon = {horizon}]"),
                ));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config("checkpoints", "must be strictly increasing"));
            }
            CheckpointSpec::List(v.into_iter().map(|c| c as u64).collect())
        }
    };

    let beta_atoms = match raw.beta_atoms {
        None => DEFAULT_BETA_ATOMS,
        Some(v) => positive(v, "beta_atoms")? as usize,
    };

    Ok(ExperimentConfig {
        name: raw.name,
        bounds,
        arms,
        policies,
        horizon,
        runs,
        seed: raw.seed.unwrap_or(0),
        checkpoints,
        output: raw.output,
        beta_atoms,
    })
}

pub fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    Ok(parse_config(&text, &path.display().to_string())?)
}
