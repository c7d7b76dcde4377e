//! Bundled experiment configs for the six reference distributions.

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{Error, Result};
use crate::sim::Environment;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "dist1",
        summary: "2 Bernoulli arms, means 0.55 / 0.45",
        text: include_str!("../presets/dist1.toml"),
    },
    Preset {
        name: "dist2",
        summary: "2 two-point arms, means 0.6 / 0.4",
        text: include_str!("../presets/dist2.toml"),
    },
    Preset {
        name: "dist3",
        summary: "2 arms on {0, 0.1, ..., 1}, means 0.56 / 0.5",
        text: include_str!("../presets/dist3.toml"),
    },
    Preset {
        name: "dist4",
        summary: "2 confusing arms, means 0.01 / 0.0085",
        text: include_str!("../presets/dist4.toml"),
    },
    Preset {
        name: "dist5",
        summary: "5 arms on {0, 0.1, ..., 1}, means 0.56 / 0.5 x 4",
        text: include_str!("../presets/dist5.toml"),
    },
    Preset {
        name: "dist6",
        summary: "5 beta arms, means 0.9 / 0.7 / 0.5 / 0.3 / 0.1",
        text: include_str!("../presets/dist6.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn config(name: &str) -> Result<ExperimentConfig> {
    let preset = find(name).ok_or_else(|| Error::Input(format!("no preset named `{name}`")))?;
    parse_config(preset.text, &format!("preset:{name}"))
}

/// Environment of reference distribution `i` (1 to 6).
pub fn table1(i: usize) -> Result<Environment> {
    let c = config(&format!("dist{i}"))?;
    Environment::new(c.arms)
}
