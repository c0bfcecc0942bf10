//! Line-based `key = value` tracker configuration files.
//!
//! Values start from the built-in defaults; file entries override them and
//! command-line flags override the file. Unknown keys are rejected with the
//! list of valid keys.

use pftrack_core::{Error, Result};
use pftrack_core::tracker::TrackerConfig;

pub const CONFIG_KEYS: &[&str] = &[
    "alpha",
    "fg_threshold",
    "min_area",
    "particles",
    "arma_a",
    "arma_b",
    "arma_c",
    "sigma_x",
    "sigma_y",
    "sigma_scale",
    "noise_increment",
    "likelihood_threshold",
    "gate_factor",
    "max_occluded_frames",
    "n_h",
    "n_s",
    "n_v",
    "sat_threshold",
    "val_threshold",
    "seed",
];

/// Parses config text over the defaults. `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<TrackerConfig> {
    let mut config = TrackerConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            key: "line".to_string(),
            reason: format!("line {line_no}: expected \"key = value\", got {line:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut config, key, value).map_err(|reason| Error::Config {
            key: key.to_string(),
            reason: format!("line {line_no}: {reason}"),
        })?;
    }
    config.validate()?;
    Ok(config)
}

fn apply_key(config: &mut TrackerConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    fn num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
        value.parse::<T>().map_err(|_| format!("could not parse {value:?}"))
    }
    match key {
        "alpha" => config.alpha = num(value)?,
        "fg_threshold" => config.fg_threshold = num(value)?,
        "min_area" => config.min_area = num(value)?,
        "particles" => config.particles = num(value)?,
        "arma_a" => config.arma_a = num(value)?,
        "arma_b" => config.arma_b = num(value)?,
        "arma_c" => config.arma_c = num(value)?,
        "sigma_x" => config.sigma_x = num(value)?,
        "sigma_y" => config.sigma_y = num(value)?,
        "sigma_scale" => config.sigma_scale = num(value)?,
        "noise_increment" => config.noise_increment = num(value)?,
        "likelihood_threshold" => config.likelihood_threshold = num(value)?,
        "gate_factor" => config.gate_factor = num(value)?,
        "max_occluded_frames" => config.max_occluded_frames = num(value)?,
        "n_h" => config.n_h = num(value)?,
        "n_s" => config.n_s = num(value)?,
        "n_v" => config.n_v = num(value)?,
        "sat_threshold" => config.sat_threshold = num(value)?,
        "val_threshold" => config.val_threshold = num(value)?,
        "seed" => config.seed = num(value)?,
        other => {
            return Err(format!("unknown key {other:?} (valid keys: {})", CONFIG_KEYS.join(", ")))
        }
    }
    Ok(())
}

/// Key/value snapshot of a config, for manifests.
pub fn snapshot(config: &TrackerConfig) -> Vec<(String, String)> {
    vec![
        ("alpha".into(), config.alpha.to_string()),
        ("fg_threshold".into(), config.fg_threshold.to_string()),
        ("min_area".into(), config.min_area.to_string()),
        ("particles".into(), config.particles.to_string()),
        ("arma_a".into(), config.arma_a.to_string()),
        ("arma_b".into(), config.arma_b.to_string()),
        ("arma_c".into(), config.arma_c.to_string()),
        ("sigma_x".into(), config.sigma_x.to_string()),
        ("sigma_y".into(), config.sigma_y.to_string()),
        ("sigma_scale".into(), config.sigma_scale.to_string()),
        ("noise_increment".into(), config.noise_increment.to_string()),
        ("likelihood_threshold".into(), config.likelihood_threshold.to_string()),
        ("gate_factor".into(), config.gate_factor.to_string()),
        ("max_occluded_frames".into(), config.max_occluded_frames.to_string()),
        ("n_h".into(), config.n_h.to_string()),
        ("n_s".into(), config.n_s.to_string()),
        ("n_v".into(), config.n_v.to_string()),
        ("sat_threshold".into(), config.sat_threshold.to_string()),
        ("val_threshold".into(), config.val_threshold.to_string()),
        ("seed".into(), config.seed.to_string()),
    ]
}
