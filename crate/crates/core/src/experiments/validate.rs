use std::fmt;

use super::harness::run_scenario_with;
use super::rms::rms_samples_with;
use super::{mean_stderr, Metric, Scenario, Scheme};
use crate::channel::{exponential_pdp, ChannelModel};
use crate::closed_forms::{prop3_envelopes, AsymptoticPrediction, RfModel};
use crate::exec::Execution;
use crate::metrics::LinkBudget;
use crate::{Error, Result};

/// Array sizes of the delay-spread check when the scenario has no grid.
pub const DEFAULT_RMS_GRID: [usize; 3] = [25, 100, 400];

/// Accepted band for `τ̄(4M)/τ̄(M)`.
pub const RATIO_BAND: (f64, f64) = (0.40, 0.62);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CheckKind {
    /// `|simulated - predicted| / predicted ≤ tolerance`.
    Relative { tolerance: f64 },
    /// `low ≤ simulated ≤ high`.
    Envelope { low: f64, high: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationCheck {
    pub proposition: &'static str,
    pub label: String,
    pub kind: CheckKind,
    pub simulated: f64,
    /// Closed-form value; envelope checks use the band midpoint.
    pub predicted: f64,
    pub passed: bool,
}

impl ValidationCheck {
    fn relative(proposition: &'static str, label: String, simulated: f64, predicted: f64, tolerance: f64) -> Self {
        let err = relative_error(simulated, predicted);
        Self {
            proposition,
            label,
            kind: CheckKind::Relative { tolerance },
            simulated,
            predicted,
            passed: err <= tolerance,
        }
    }

    fn envelope(proposition: &'static str, label: String, simulated: f64, low: f64, high: f64) -> Self {
        Self {
            proposition,
            label,
            kind: CheckKind::Envelope { low, high },
            simulated,
            predicted: 0.5 * (low + high),
            passed: simulated >= low && simulated <= high,
        }
    }

    pub fn relative_error(&self) -> f64 {
        relative_error(self.simulated, self.predicted)
    }
}

fn relative_error(simulated: f64, predicted: f64) -> f64 {
    (simulated - predicted).abs() / predicted.abs()
}

impl fmt::Display for ValidationCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        match self.kind {
            CheckKind::Relative { tolerance } => write!(
                f,
                "{status} {:<6} {:<34} sim={:.6} pred={:.6} rel_err={:.4} tol={tolerance}",
                self.proposition,
                self.label,
                self.simulated,
                self.predicted,
                self.relative_error()
            ),
            CheckKind::Envelope { low, high } => write!(
                f,
                "{status} {:<6} {:<34} sim={:.6} band=[{low:.6}, {high:.6}]",
                self.proposition, self.label, self.simulated
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub scenario: String,
    pub realizations_used: usize,
    pub failed_realizations: usize,
    /// Largest `‖B(k)H(k) - I‖_F` over the ZF stages of the Monte-Carlo run.
    pub max_zf_residual: f64,
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn for_proposition<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ValidationCheck> + 'a {
        self.checks.iter().filter(move |c| c.proposition == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "validation of {} ({} realizations, {} dropped, max ZF residual {:.2e})",
            self.scenario, self.realizations_used, self.failed_realizations, self.max_zf_residual
        )?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let ok = self.checks.iter().filter(|c| c.passed).count();
        write!(f, "{ok}/{} checks passed", self.checks.len())
    }
}

pub fn validate_propositions(s: &Scenario) -> Result<ValidationReport> {
    validate_propositions_with(s, Execution::default())
}

/// Monte-Carlo estimates against the large-array closed forms.
///
/// Uses the scenario's dimensions, SNR grid and realizations. The
/// delay-spread checks run over `antenna_grid` (or [`DEFAULT_RMS_GRID`])
/// for the L-tap, MF and 1-tap combiners.
pub fn validate_propositions_with(s: &Scenario, exec: Execution) -> Result<ValidationReport> {
    if s.model != ChannelModel::Rich {
        return Err(Error::Incompatible(
            "closed forms assume the rich-scattering channel".into(),
        ));
    }
    let mut mc = s.clone();
    mc.schemes = vec![Scheme::RfLTap, Scheme::Rf1Tap, Scheme::RfLTapZf, Scheme::Rf1TapZf];
    let run = run_scenario_with(&mc, exec)?;
    if run.realizations_used == 0 {
        return Err(run.first_failure.map(|(_, e)| e).unwrap_or(Error::SingularChannel));
    }
    let find = |scheme: Scheme, metric: Metric, snr: f64| {
        run.rows
            .iter()
            .find(|r| r.scheme == scheme.name() && r.metric == metric && r.snr_db == Some(snr))
            .map(|r| r.value)
            .expect("row present for every scheme, metric and SNR")
    };

    let pdp = exponential_pdp(s.dims.taps, s.dims.users);
    let m = s.dims.antennas;
    let mut checks = Vec::new();
    let tol = s.tolerances;
    for &snr in &s.snr_db {
        let lb = LinkBudget::from_snr_db(snr)?;
        let lt = AsymptoticPrediction::new(&lb, m, &pdp, RfModel::LTap);
        let ot = AsymptoticPrediction::new(&lb, m, &pdp, RfModel::OneTap);
        checks.push(ValidationCheck::relative(
            "prop1",
            format!("L-tap sum rate @ {snr} dB"),
            find(Scheme::RfLTap, Metric::Rate, snr),
            lt.sum_rate,
            tol.prop1,
        ));
        checks.push(ValidationCheck::relative(
            "prop2",
            format!("1-tap sum rate @ {snr} dB"),
            find(Scheme::Rf1Tap, Metric::Rate, snr),
            ot.sum_rate,
            tol.prop2,
        ));
        checks.push(ValidationCheck::relative(
            "prop4",
            format!("L-tap capacity @ {snr} dB"),
            find(Scheme::RfLTapZf, Metric::Capacity, snr),
            lt.capacity,
            tol.prop4,
        ));
        checks.push(ValidationCheck::relative(
            "prop4",
            format!("1-tap capacity @ {snr} dB"),
            find(Scheme::Rf1TapZf, Metric::Capacity, snr),
            ot.capacity,
            tol.prop4,
        ));
    }

    let grid: Vec<usize> = if s.antenna_grid.is_empty() {
        DEFAULT_RMS_GRID.to_vec()
    } else {
        s.antenna_grid.clone()
    };
    let envelopes = prop3_envelopes(&grid, s.envelope.0, s.envelope.1);
    let series = [("rf_ltap", "L-tap"), ("mf", "MF"), ("rf_1tap", "1-tap")];
    // means[size][series]
    let mut means = Vec::with_capacity(grid.len());
    for (&mg, &(low, high)) in grid.iter().zip(&envelopes) {
        let samples = rms_samples_with(s, mg, exec)?;
        let mut row = Vec::with_capacity(series.len());
        for (name, label) in series {
            let per_draw = samples.realization_means(name).expect("known series");
            let (mean, _) = mean_stderr(per_draw.iter().copied());
            row.push(mean);
            checks.push(ValidationCheck::envelope(
                "prop3",
                format!("{label} mean RMS spread @ M={mg}"),
                mean,
                low,
                high,
            ));
        }
        means.push(row);
    }
    for (i, &mi) in grid.iter().enumerate() {
        for (j, &mj) in grid.iter().enumerate() {
            if mj != 4 * mi {
                continue;
            }
            for (k, (_, label)) in series.iter().enumerate() {
                checks.push(ValidationCheck::envelope(
                    "prop3",
                    format!("{label} spread ratio M={mj}/M={mi}"),
                    means[j][k] / means[i][k],
                    RATIO_BAND.0,
                    RATIO_BAND.1,
                ));
            }
        }
    }

    Ok(ValidationReport {
        scenario: s.name.clone(),
        realizations_used: run.realizations_used,
        failed_realizations: run.failed_realizations,
        max_zf_residual: run.max_zf_residual,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SparseChannelConfig;

    #[test]
    fn relative_check_status() {
        let c = ValidationCheck::relative("prop1", "x".into(), 1.04, 1.0, 0.05);
        assert!(c.passed);
        assert!(c.to_string().starts_with("PASS"));
        let c = ValidationCheck::relative("prop1", "x".into(), 1.06, 1.0, 0.05);
        assert!(!c.passed && c.to_string().starts_with("FAIL"));
        let c = ValidationCheck::envelope("prop3", "y".into(), 0.5, 0.1, 0.3);
        assert!(!c.passed);
    }

    #[test]
    fn sparse_model_rejected() {
        let mut s = Scenario::rich("v", vec![]);
        s.model = ChannelModel::Sparse(SparseChannelConfig::new(4, 5));
        assert!(matches!(validate_propositions(&s), Err(Error::Incompatible(_))));
    }

    #[test]
    fn small_report_structure() {
        let mut s = Scenario::rich("v", vec![]);
        s.dims.antennas = 16;
        s.dims.subcarriers = 16;
        s.realizations = 3;
        s.snr_db = vec![0.0];
        s.antenna_grid = vec![8, 32];
        let r = validate_propositions(&s).unwrap();
        assert_eq!(r.for_proposition("prop1").count(), 1);
        assert_eq!(r.for_proposition("prop4").count(), 2);
        // two sizes x three series, plus one 4x ratio per series
        assert_eq!(r.for_proposition("prop3").count(), 9);
        assert!(r.to_string().contains("checks passed"));
    }
}
