//! Key-value solver config files: one `key = value` per line, `#` comments.
//!
//! Unset keys keep their defaults; `alpha` and `max_iters` stay unresolved
//! until the upsampling factor is known. Unknown keys are rejected so typos
//! surface instead of silently falling back to a default.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::SolverConfig;

fn parse_err(path: &Path, line_no: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        msg: format!("line {line_no}: {}", msg.into()),
    }
}

/// Load a config file, applying defaults for unset keys and validating the
/// result.
pub fn load_config(path: &Path) -> Result<SolverConfig> {
    let text = fs::read_to_string(path)?;
    let mut cfg = SolverConfig::default();
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(parse_err(path, line_no, format!("duplicate key `{key}`")));
        }
        seen.push(key.to_string());

        let f = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| parse_err(path, line_no, format!("bad number `{v}` for `{key}`")))
        };
        match key {
            "alpha" => cfg.alpha = Some(f(value)?),
            "beta" => cfg.beta = f(value)?,
            "sigma_s" => cfg.sigma_s = f(value)?,
            "sigma_c" => cfg.sigma_c = f(value)?,
            "patch_radius" => {
                cfg.patch_radius = value.parse().map_err(|_| {
                    parse_err(path, line_no, format!("bad integer `{value}` for `patch_radius`"))
                })?
            }
            "lambda_init" => cfg.lambda_init = f(value)?,
            "tau" => cfg.tau = f(value)?,
            "lambda_min" => cfg.lambda_min = f(value)?,
            "lambda_max" => cfg.lambda_max = f(value)?,
            "max_iters" => {
                cfg.max_iters = Some(value.parse().map_err(|_| {
                    parse_err(path, line_no, format!("bad integer `{value}` for `max_iters`"))
                })?)
            }
            "tol" => cfg.tol = f(value)?,
            "adaptive_bandwidth" => {
                cfg.adaptive_bandwidth = value.parse().map_err(|_| {
                    parse_err(
                        path,
                        line_no,
                        format!("bad boolean `{value}` for `adaptive_bandwidth`"),
                    )
                })?
            }
            _ => return Err(parse_err(path, line_no, format!("unknown key `{key}`"))),
        }
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Save a config file that [`load_config`] reads back to an equal value.
/// Unresolved `alpha`/`max_iters` are written as comments.
pub fn save_config(cfg: &SolverConfig, path: &Path) -> Result<()> {
    let mut text = String::new();
    match cfg.alpha {
        Some(a) => text.push_str(&format!("alpha = {a}\n")),
        None => text.push_str("# alpha = (per-factor schedule)\n"),
    }
    text.push_str(&format!("beta = {}\n", cfg.beta));
    text.push_str(&format!("sigma_s = {}\n", cfg.sigma_s));
    text.push_str(&format!("sigma_c = {}\n", cfg.sigma_c));
    text.push_str(&format!("patch_radius = {}\n", cfg.patch_radius));
    text.push_str(&format!("lambda_init = {}\n", cfg.lambda_init));
    text.push_str(&format!("tau = {}\n", cfg.tau));
    text.push_str(&format!("lambda_min = {}\n", cfg.lambda_min));
    text.push_str(&format!("lambda_max = {}\n", cfg.lambda_max));
    match cfg.max_iters {
        Some(m) => text.push_str(&format!("max_iters = {m}\n")),
        None => text.push_str("# max_iters = (per-factor schedule)\n"),
    }
    text.push_str(&format!("tol = {}\n", cfg.tol));
    text.push_str(&format!("adaptive_bandwidth = {}\n", cfg.adaptive_bandwidth));
    fs::write(path, text)?;
    Ok(())
}
