//! Seeded Monte-Carlo harness and the figure presets.
//!
//! A [`Scenario`] fixes dimensions, channel model, SNR grid, schemes and a
//! master seed. Realization `r` draws its channel from
//! `stream_seed(master, "channel", r)`, so every row is a pure function of
//! the scenario.

mod harness;
mod rms;
mod validate;

use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelModel, SparseChannelConfig, SystemDims};
use crate::{Error, Result};

pub use harness::{draw_channel, realization_seed, run_scenario, run_scenario_with, ScenarioRun};
pub use rms::{quantile, rms_samples, rms_samples_with, rms_study, rms_study_with, RmsSamples, CDF_PROBABILITIES, RMS_SERIES};
pub use validate::{
    validate_propositions, validate_propositions_with, CheckKind, ValidationCheck, ValidationReport, DEFAULT_RMS_GRID,
    RATIO_BAND,
};

/// Seed label of the per-realization channel streams.
pub const CHANNEL_STREAM: &str = "channel";

/// Beamforming scheme evaluated by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Capacity of the raw channel.
    Capacity,
    /// Fully-digital time-domain matched filter.
    Mf,
    /// Fully-digital per-subcarrier zero-forcing.
    Zf,
    Rf1Tap,
    RfLTap,
    Rf1TapZf,
    RfLTapZf,
    Heuristic1Tap,
    Heuristic1TapZf,
    /// `2L` phase networks reproducing the matched filter, then ZF.
    Bank2LZf,
}

impl Scheme {
    pub const ALL: [Scheme; 10] = [
        Scheme::Capacity,
        Scheme::Mf,
        Scheme::Zf,
        Scheme::Rf1Tap,
        Scheme::RfLTap,
        Scheme::Rf1TapZf,
        Scheme::RfLTapZf,
        Scheme::Heuristic1Tap,
        Scheme::Heuristic1TapZf,
        Scheme::Bank2LZf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Capacity => "capacity",
            Scheme::Mf => "mf",
            Scheme::Zf => "zf",
            Scheme::Rf1Tap => "rf_1tap",
            Scheme::RfLTap => "rf_ltap",
            Scheme::Rf1TapZf => "rf_1tap+zf",
            Scheme::RfLTapZf => "rf_ltap+zf",
            Scheme::Heuristic1Tap => "heuristic_1tap",
            Scheme::Heuristic1TapZf => "heuristic_1tap+zf",
            Scheme::Bank2LZf => "bank_2L+zf",
        }
    }

    /// Metrics reported for this scheme at every SNR point.
    pub fn metrics(&self) -> &'static [Metric] {
        use Metric::*;
        const RF_ONLY: &[Metric] = &[
            Rate,
            SinrComponent(SinrPart::Signal),
            SinrComponent(SinrPart::Isi),
            SinrComponent(SinrPart::Mui),
            SinrComponent(SinrPart::Noise),
        ];
        match self {
            Scheme::Capacity => &[Capacity],
            Scheme::Zf => &[Rate],
            Scheme::Mf => &[Rate, Capacity],
            Scheme::Rf1Tap | Scheme::RfLTap | Scheme::Heuristic1Tap => RF_ONLY,
            Scheme::Rf1TapZf | Scheme::RfLTapZf | Scheme::Heuristic1TapZf | Scheme::Bank2LZf => {
                &[Rate, Capacity]
            }
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Scheme::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| {
                let names: Vec<&str> = Scheme::ALL.iter().map(Scheme::name).collect();
                Error::InvalidParameter(format!("unknown scheme {t:?}; available: {}", names.join(", ")))
            })
    }
}

/// Component of the delay-0 SINR decomposition, averaged over users.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SinrPart {
    Signal,
    Isi,
    Mui,
    Noise,
}

impl SinrPart {
    fn name(&self) -> &'static str {
        match self {
            SinrPart::Signal => "signal",
            SinrPart::Isi => "isi",
            SinrPart::Mui => "mui",
            SinrPart::Noise => "noise",
        }
    }
}

/// Quantity carried by a [`ResultRow`].
///
/// Text form: `rate`, `capacity`, `rms_mean[M=100]`,
/// `rms_cdf_point[M=100;p=0.5]`, `sinr_component[isi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Rate,
    Capacity,
    RmsMean { antennas: usize },
    RmsCdfPoint { antennas: usize, prob: f64 },
    SinrComponent(SinrPart),
}

impl Metric {
    pub const BASE_NAMES: [&'static str; 5] = ["rate", "capacity", "rms_mean", "rms_cdf_point", "sinr_component"];

    pub fn base_name(&self) -> &'static str {
        match self {
            Metric::Rate => "rate",
            Metric::Capacity => "capacity",
            Metric::RmsMean { .. } => "rms_mean",
            Metric::RmsCdfPoint { .. } => "rms_cdf_point",
            Metric::SinrComponent(_) => "sinr_component",
        }
    }

    /// Antenna count carried by RMS metrics.
    pub fn antennas(&self) -> Option<usize> {
        match self {
            Metric::RmsMean { antennas } | Metric::RmsCdfPoint { antennas, .. } => Some(*antennas),
            _ => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Rate | Metric::Capacity => f.write_str(self.base_name()),
            Metric::RmsMean { antennas } => write!(f, "rms_mean[M={antennas}]"),
            Metric::RmsCdfPoint { antennas, prob } => write!(f, "rms_cdf_point[M={antennas};p={prob}]"),
            Metric::SinrComponent(part) => write!(f, "sinr_component[{}]", part.name()),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown metric {s:?}"));
        let (base, args) = match s.split_once('[') {
            Some((b, rest)) => (b, Some(rest.strip_suffix(']').ok_or_else(bad)?)),
            None => (s, None),
        };
        let field = |args: &str, key: &str| -> Result<String> {
            args.split(';')
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(bad)
        };
        match (base, args) {
            ("rate", None) => Ok(Metric::Rate),
            ("capacity", None) => Ok(Metric::Capacity),
            ("rms_mean", Some(a)) => Ok(Metric::RmsMean {
                antennas: field(a, "M")?.parse().map_err(|_| bad())?,
            }),
            ("rms_cdf_point", Some(a)) => Ok(Metric::RmsCdfPoint {
                antennas: field(a, "M")?.parse().map_err(|_| bad())?,
                prob: field(a, "p")?.parse().map_err(|_| bad())?,
            }),
            ("sinr_component", Some(a)) => {
                let part = match a {
                    "signal" => SinrPart::Signal,
                    "isi" => SinrPart::Isi,
                    "mui" => SinrPart::Mui,
                    "noise" => SinrPart::Noise,
                    _ => return Err(bad()),
                };
                Ok(Metric::SinrComponent(part))
            }
            _ => Err(bad()),
        }
    }
}

/// One aggregated `(scenario, scheme, SNR, metric)` value.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub scheme: String,
    /// `None` for SNR-independent metrics (delay spreads).
    pub snr_db: Option<f64>,
    pub metric: Metric,
    pub value: f64,
    pub stderr: f64,
    pub realizations: usize,
    pub seed: u64,
}

/// Relative tolerances used by [`validate_propositions`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub prop1: f64,
    pub prop2: f64,
    pub prop4: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            prop1: 0.05,
            prop2: 0.05,
            prop4: 0.05,
        }
    }
}

/// Full description of one Monte-Carlo experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dims: SystemDims,
    pub model: ChannelModel,
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub schemes: Vec<Scheme>,
    pub master_seed: u64,
    /// Array sizes of the delay-spread study; empty skips it.
    pub antenna_grid: Vec<usize>,
    /// `(c_low, c_high)` of the `c/√M` delay-spread envelopes.
    pub envelope: (f64, f64),
    pub tolerances: Tolerances,
}

/// Default SNR axis of the rate figures, in dB.
pub fn default_snr_grid() -> Vec<f64> {
    (-2..=6).map(|i| i as f64 * 5.0).collect()
}

/// Realizations per preset at desk scale.
pub const DESK_REALIZATIONS: usize = 200;

pub const PRESET_NAMES: [&str; 7] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

impl Scenario {
    /// Rich channel at `M=100, U=4, L=4, K=128` with the given schemes.
    pub fn rich(name: &str, schemes: Vec<Scheme>) -> Self {
        Self {
            name: name.to_string(),
            dims: SystemDims {
                antennas: 100,
                users: 4,
                taps: 4,
                subcarriers: 128,
            },
            model: ChannelModel::Rich,
            snr_db: default_snr_grid(),
            realizations: DESK_REALIZATIONS,
            schemes,
            master_seed: 1,
            antenna_grid: Vec::new(),
            envelope: (1.0, 3.0),
            tolerances: Tolerances::default(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        use Scheme::*;
        let s = match name {
            "fig2" => Self::rich("fig2", vec![Capacity, Mf, Zf]),
            "fig3" => Self::rich("fig3", vec![Mf, RfLTap, Rf1Tap]),
            "fig4" => Self::rich("fig4", vec![Capacity, Zf, RfLTapZf, Rf1TapZf, Bank2LZf]),
            "fig5" => {
                let mut s = Self::rich("fig5", Vec::new());
                s.snr_db = vec![10.0];
                s.antenna_grid = vec![20, 25, 50, 100, 200, 400, 500];
                s
            }
            "fig6" => Self::rich("fig6", vec![Capacity, Rf1TapZf, Heuristic1TapZf, Rf1Tap, Heuristic1Tap]),
            "fig7" => {
                let mut s = Self::rich("fig7", vec![Capacity, Zf, Rf1Tap, Rf1TapZf]);
                s.dims.taps = 1;
                s
            }
            "fig8" => {
                let mut s = Self::rich("fig8", vec![Capacity, Zf, RfLTapZf, Rf1TapZf]);
                s.model = ChannelModel::Sparse(SparseChannelConfig::new(4, 5));
                s
            }
            _ => return None,
        };
        Some(s)
    }

    pub fn presets() -> Vec<Self> {
        PRESET_NAMES.iter().filter_map(|n| Self::preset(n)).collect()
    }

    /// One-line description used by the CLI listing.
    pub fn summary(&self) -> String {
        let schemes: Vec<&str> = self.schemes.iter().map(Scheme::name).collect();
        let mut line = format!(
            "{:<6} {} model={} realizations={} schemes=[{}]",
            self.name,
            self.dims,
            self.model.name(),
            self.realizations,
            schemes.join(",")
        );
        if !self.antenna_grid.is_empty() {
            let grid: Vec<String> = self.antenna_grid.iter().map(|m| m.to_string()).collect();
            line.push_str(&format!(" M_grid=[{}]", grid.join(",")));
        }
        line
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        if self.realizations == 0 {
            return Err(Error::InvalidParameter("need at least one realization".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("SNR grid must be non-empty and finite".into()));
        }
        if self.schemes.is_empty() && self.antenna_grid.is_empty() {
            return Err(Error::InvalidParameter("scenario has no schemes and no delay-spread grid".into()));
        }
        if let Some(&m) = self.antenna_grid.iter().find(|&&m| m < self.dims.users) {
            return Err(Error::InvalidParameter(format!(
                "delay-spread grid entry M={m} is below U={}",
                self.dims.users
            )));
        }
        if let ChannelModel::Sparse(cfg) = &self.model {
            cfg.validate()?;
            if cfg.clusters != self.dims.taps {
                return Err(Error::Incompatible(format!(
                    "sparse model has {} clusters but L={}",
                    cfg.clusters, self.dims.taps
                )));
            }
        }
        Ok(())
    }

    /// Copy with a different array size (sparse cluster count tracks `L`).
    pub fn with_antennas(&self, antennas: usize) -> Self {
        let mut s = self.clone();
        s.dims.antennas = antennas;
        s
    }
}

/// Mean and standard error (`sample std / √N`) in index order.
pub(crate) fn mean_stderr(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        let err = "nope".parse::<Scheme>().unwrap_err().to_string();
        assert!(err.contains("rf_ltap+zf"));
    }

    #[test]
    fn metric_text_round_trip() {
        for m in [
            Metric::Rate,
            Metric::Capacity,
            Metric::RmsMean { antennas: 100 },
            Metric::RmsCdfPoint { antennas: 20, prob: 0.25 },
            Metric::SinrComponent(SinrPart::Mui),
        ] {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        assert!("rms_mean".parse::<Metric>().is_err());
        assert!("rate[x]".parse::<Metric>().is_err());
        assert!("sinr_component[foo]".parse::<Metric>().is_err());
    }

    #[test]
    fn presets_are_valid() {
        let all = Scenario::presets();
        assert_eq!(all.len(), 7);
        for s in &all {
            s.validate().unwrap();
            assert!(s.summary().contains("M="));
        }
        assert_eq!(Scenario::preset("fig7").unwrap().dims.taps, 1);
        assert!(Scenario::preset("fig9").is_none());
    }

    #[test]
    fn scenario_validation() {
        let mut s = Scenario::rich("x", vec![Scheme::Capacity]);
        s.realizations = 0;
        assert!(s.validate().is_err());
        let mut s = Scenario::rich("x", vec![Scheme::Capacity]);
        s.snr_db.clear();
        assert!(s.validate().is_err());
        let mut s = Scenario::rich("x", vec![Scheme::Capacity]);
        s.model = ChannelModel::Sparse(SparseChannelConfig::new(3, 5));
        assert!(matches!(s.validate(), Err(Error::Incompatible(_))));
    }

    #[test]
    fn stderr_estimates() {
        let (m, e) = mean_stderr([2.0].into_iter());
        assert_eq!((m, e), (2.0, 0.0));
        let (m, e) = mean_stderr([1.0, 2.0, 3.0, 4.0].into_iter());
        assert!((m - 2.5).abs() < 1e-15);
        assert!((e - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
