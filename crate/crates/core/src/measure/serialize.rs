//! Plain-text measure files.
//!
//! A measure is a block of `key = value` lines. The `variant` key selects the
//! representation; the remaining keys carry its parameters. Arrays are
//! comma-separated decimals printed with 17 significant digits, so files
//! round-trip bit-exactly. Lines starting with `#` and blank lines are
//! ignored. Unknown or missing keys are rejected.
//!
//! ```text
//! variant = atomic
//! points = -1.0000000000000000e0,1.0000000000000000e0
//! masses = 5.0000000000000000e-1,5.0000000000000000e-1
//! ```

use super::{Measure, MeasureError};
use crate::textio::{fmt17, fmt17_list};
use std::collections::BTreeMap;

impl Measure {
    /// Serializes to the plain-text key-value block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Measure::Atomic { points, masses } => {
                out.push_str("variant = atomic\n");
                out.push_str(&format!("points = {}\n", fmt17_list(points)));
                out.push_str(&format!("masses = {}\n", fmt17_list(masses)));
            }
            Measure::GridDensity(g) => {
                out.push_str("variant = grid_density\n");
                out.push_str(&format!("grid = {}\n", fmt17_list(g.grid())));
                out.push_str(&format!("density = {}\n", fmt17_list(g.density())));
            }
            Measure::Empirical { samples } => {
                out.push_str("variant = empirical\n");
                out.push_str(&format!("samples = {}\n", fmt17_list(samples)));
            }
            Measure::Semicircle { variance } => {
                out.push_str("variant = semicircle\n");
                out.push_str(&format!("variance = {}\n", fmt17(*variance)));
            }
            Measure::FreePoisson { rate, jump } => {
                out.push_str("variant = free_poisson\n");
                out.push_str(&format!("rate = {}\n", fmt17(*rate)));
                out.push_str(&format!("jump = {}\n", fmt17(*jump)));
            }
        }
        out
    }

    /// Parses the plain-text key-value block produced by [`Measure::to_text`].
    pub fn from_text(text: &str) -> Result<Self, MeasureError> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(MeasureError::Parse(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                )));
            };
            let key = k.trim().to_string();
            if kv.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(MeasureError::Parse(format!("duplicate key {key:?}")));
            }
        }
        let mut take = |key: &str| -> Result<String, MeasureError> {
            kv.remove(key)
                .ok_or_else(|| MeasureError::Parse(format!("missing key {key:?}")))
        };
        let variant = take("variant")?;
        let parse_scalar = |s: &str| -> Result<f64, MeasureError> {
            s.parse::<f64>()
                .map_err(|e| MeasureError::Parse(format!("bad number {s:?}: {e}")))
        };
        let parse_list = |s: &str| -> Result<Vec<f64>, MeasureError> {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| MeasureError::Parse(format!("bad number {t:?}: {e}")))
                })
                .collect()
        };
        let measure = match variant.as_str() {
            "atomic" => {
                let points = parse_list(&take("points")?)?;
                let masses = parse_list(&take("masses")?)?;
                Measure::atomic(points, masses)?
            }
            "grid_density" => {
                let grid = parse_list(&take("grid")?)?;
                let density = parse_list(&take("density")?)?;
                Measure::grid_density(grid, density)?
            }
            "empirical" => Measure::empirical(parse_list(&take("samples")?)?)?,
            "semicircle" => Measure::semicircle(parse_scalar(&take("variance")?)?)?,
            "free_poisson" => {
                let rate = parse_scalar(&take("rate")?)?;
                let jump = parse_scalar(&take("jump")?)?;
                Measure::free_poisson(rate, jump)?
            }
            other => {
                return Err(MeasureError::Parse(format!("unknown variant {other:?}")));
            }
        };
        if let Some(extra) = kv.keys().next() {
            return Err(MeasureError::Parse(format!(
                "unknown key {extra:?} for variant {variant:?}"
            )));
        }
        Ok(measure)
    }
}
