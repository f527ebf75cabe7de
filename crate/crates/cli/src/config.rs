//! Scenario files and command-line overrides.
//!
//! Grammar: UTF-8 text, one `key = value` per line, `#` starts a comment,
//! and every `[scenario]` header opens a new scenario. Keys before the first
//! header are an error. A scenario may start from a preset with
//! `preset = fig3`; later keys override it.
//!
//! ```text
//! [scenario]
//! name = small_sparse
//! preset = fig8
//! M = 64
//! snr = -10:10:5
//! schemes = capacity, rf_ltap+zf
//! ```

use hybeam::channel::{ChannelModel, SparseChannelConfig};
use hybeam::experiments::{Scenario, Scheme};

use crate::CliError;

/// Parse an SNR axis: `a:b:step` (inclusive), a comma list, or one value.
pub fn parse_snr(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Config(format!("invalid SNR grid {text:?}: {why}"));
    let t = text.trim();
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number")))
            .collect::<Result<Vec<_>, _>>()?;
        let (a, b, step) = (nums[0], nums[1], nums[2]);
        if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
            return Err(bad("need finite start <= stop and step > 0"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        if n > 10_000 {
            return Err(bad("too many points"));
        }
        // integer multiples keep the grid free of accumulated rounding
        Ok((0..=n).map(|i| a + i as f64 * step).collect())
    } else {
        let v = parse_list::<f64>(t).map_err(|_| bad("not a number"))?;
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(bad("need at least one finite value"));
        }
        Ok(v)
    }
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, T::Err> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

pub fn parse_schemes(text: &str) -> Result<Vec<Scheme>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Scheme>().map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

/// Command-line overrides applied on top of a preset or file scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub antennas: Option<usize>,
    pub users: Option<usize>,
    pub taps: Option<usize>,
    pub subcarriers: Option<usize>,
    pub realizations: Option<usize>,
    pub snr_db: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// Apply overrides and re-check every scenario invariant.
    pub fn apply(&self, mut s: Scenario) -> Result<Scenario, CliError> {
        if let Some(m) = self.antennas {
            s.dims.antennas = m;
        }
        if let Some(u) = self.users {
            s.dims.users = u;
        }
        if let Some(l) = self.taps {
            set_taps(&mut s, l);
        }
        if let Some(k) = self.subcarriers {
            s.dims.subcarriers = k;
        }
        if let Some(r) = self.realizations {
            s.realizations = r;
        }
        if let Some(snr) = &self.snr_db {
            s.snr_db = snr.clone();
        }
        if let Some(seed) = self.seed {
            s.master_seed = seed;
        }
        s.validate()
            .map_err(|e| CliError::Config(format!("scenario {}: {e}", s.name)))?;
        Ok(s)
    }
}

// the sparse model draws one cluster per tap
fn set_taps(s: &mut Scenario, l: usize) {
    s.dims.taps = l;
    if let ChannelModel::Sparse(cfg) = &mut s.model {
        cfg.clusters = l;
    }
}

/// Parse a scenario file into its scenarios, in file order.
pub fn parse_config(text: &str) -> Result<Vec<Scenario>, CliError> {
    let mut out: Vec<Scenario> = Vec::new();
    let mut current: Option<Scenario> = None;
    let mut sparse_mpcs: Option<usize> = None;
    let mut named = false;

    let finish = |s: Option<Scenario>, out: &mut Vec<Scenario>| {
        if let Some(s) = s {
            out.push(s);
        }
    };

    for (n, raw) in text.lines().enumerate() {
        let lineno = n + 1;
        let err = |msg: String| CliError::Config(format!("line {lineno}: {msg}"));
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[scenario]" {
                return Err(err(format!("unknown section {line}")));
            }
            finish(current.take(), &mut out);
            let mut s = Scenario::rich(&format!("scenario{}", out.len() + 1), vec![]);
            s.snr_db = hybeam::experiments::default_snr_grid();
            current = Some(s);
            sparse_mpcs = None;
            named = false;
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected key = value, got {line:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        let s = current
            .as_mut()
            .ok_or_else(|| err("key outside a [scenario] section".into()))?;
        let uint = |v: &str| v.parse::<usize>().map_err(|_| err(format!("{key}: expected a non-negative integer")));
        let float = |v: &str| v.parse::<f64>().map_err(|_| err(format!("{key}: expected a number")));
        match key {
            "name" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(err("name must be non-empty and contain no path separators".into()));
                }
                s.name = value.to_string();
                named = true;
            }
            "preset" => {
                let name = s.name.clone();
                *s = Scenario::preset(value).ok_or_else(|| {
                    err(format!(
                        "unknown preset {value:?}; available: {}",
                        hybeam::experiments::PRESET_NAMES.join(", ")
                    ))
                })?;
                if named {
                    s.name = name;
                }
            }
            "M" | "antennas" => s.dims.antennas = uint(value)?,
            "U" | "users" => s.dims.users = uint(value)?,
            "L" | "taps" => set_taps(s, uint(value)?),
            "K" | "subcarriers" => s.dims.subcarriers = uint(value)?,
            "realizations" => s.realizations = uint(value)?,
            "seed" => s.master_seed = value.parse().map_err(|_| err("seed: expected an unsigned integer".into()))?,
            "snr" => s.snr_db = parse_snr(value).map_err(|e| err(e.to_string()))?,
            "schemes" => s.schemes = parse_schemes(value).map_err(|e| err(e.to_string()))?,
            "antenna_grid" => {
                s.antenna_grid = parse_list(value).map_err(|_| err("antenna_grid: expected integers".into()))?
            }
            "model" => match value {
                "rich" => s.model = ChannelModel::Rich,
                "sparse" => {
                    let mpcs = sparse_mpcs.unwrap_or(5);
                    s.model = ChannelModel::Sparse(SparseChannelConfig::new(s.dims.taps, mpcs));
                }
                _ => return Err(err(format!("model must be rich or sparse, got {value:?}"))),
            },
            "mpcs_per_cluster" | "angular_spread_deg" | "spacing_ratio" => {
                let ChannelModel::Sparse(cfg) = &mut s.model else {
                    return Err(err(format!("{key} needs model = sparse first")));
                };
                match key {
                    "mpcs_per_cluster" => {
                        cfg.mpcs_per_cluster = uint(value)?;
                        sparse_mpcs = Some(cfg.mpcs_per_cluster);
                    }
                    "angular_spread_deg" => cfg.angular_spread_deg = float(value)?,
                    _ => cfg.spacing_ratio = float(value)?,
                }
            }
            "envelope_low" => s.envelope.0 = float(value)?,
            "envelope_high" => s.envelope.1 = float(value)?,
            "tol_prop1" => s.tolerances.prop1 = float(value)?,
            "tol_prop2" => s.tolerances.prop2 = float(value)?,
            "tol_prop4" => s.tolerances.prop4 = float(value)?,
            _ => return Err(err(format!("unknown key {key:?}"))),
        }
    }
    finish(current, &mut out);
    if out.is_empty() {
        return Err(CliError::Config("config contains no [scenario] section".into()));
    }
    let mut names: Vec<&str> = out.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!("duplicate scenario name {:?}", w[0])));
    }
    for s in &out {
        s.validate()
            .map_err(|e| CliError::Config(format!("scenario {}: {e}", s.name)))?;
    }
    Ok(out)
}
