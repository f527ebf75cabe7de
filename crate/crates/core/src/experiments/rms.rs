use super::harness::draw_channel;
use super::{mean_stderr, Metric, ResultRow, Scenario};
use crate::beamforming::{effective_channel, mf_combiner, rf_1tap, rf_ltap};
use crate::exec::Execution;
use crate::metrics::{delay_spread_report, pdp_of_effective, siso_rms_delay_spread};
use crate::{Error, Result};

/// Probabilities at which the empirical delay-spread CDF is reported.
pub const CDF_PROBABILITIES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Labels of the delay-spread series, in output order.
pub const RMS_SERIES: [&str; 4] = ["mf", "rf_1tap", "rf_ltap", "siso"];

/// Per-realization RMS delay spreads at one array size.
///
/// `mf`, `rf_1tap` and `rf_ltap` hold `[realization][user]`; `siso` holds
/// the per-realization mean over (user, antenna) pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct RmsSamples {
    pub antennas: usize,
    pub mf: Vec<Vec<f64>>,
    pub rf_1tap: Vec<Vec<f64>>,
    pub rf_ltap: Vec<Vec<f64>>,
    pub siso: Vec<f64>,
}

impl RmsSamples {
    /// Per-realization user means of the named series.
    pub fn realization_means(&self, series: &str) -> Option<Vec<f64>> {
        let mean = |v: &Vec<Vec<f64>>| v.iter().map(|u| u.iter().sum::<f64>() / u.len() as f64).collect();
        match series {
            "mf" => Some(mean(&self.mf)),
            "rf_1tap" => Some(mean(&self.rf_1tap)),
            "rf_ltap" => Some(mean(&self.rf_ltap)),
            "siso" => Some(self.siso.clone()),
            _ => None,
        }
    }

    /// Pooled samples of the CDF (every user of every realization).
    pub fn pooled(&self, series: &str) -> Option<Vec<f64>> {
        let flat = |v: &Vec<Vec<f64>>| v.iter().flatten().copied().collect();
        match series {
            "mf" => Some(flat(&self.mf)),
            "rf_1tap" => Some(flat(&self.rf_1tap)),
            "rf_ltap" => Some(flat(&self.rf_ltap)),
            "siso" => Some(self.siso.clone()),
            _ => None,
        }
    }

    /// Mean over realizations of one user's spread.
    pub fn user_mean(&self, series: &str, user: usize) -> Option<f64> {
        let v = match series {
            "mf" => &self.mf,
            "rf_1tap" => &self.rf_1tap,
            "rf_ltap" => &self.rf_ltap,
            _ => return None,
        };
        let n = v.len() as f64;
        Some(v.iter().map(|u| u[user]).sum::<f64>() / n)
    }
}

struct Draw {
    mf: Vec<f64>,
    one: Vec<f64>,
    ltap: Vec<f64>,
    siso: f64,
}

fn spreads(s: &Scenario, r: usize) -> Result<Draw> {
    let ch = draw_channel(s, r)?;
    let k = s.dims.subcarriers;
    let per_user = |w| -> Result<Vec<f64>> {
        let eff = effective_channel(&w, &ch, k)?;
        Ok(delay_spread_report(&pdp_of_effective(&eff))?.users.iter().map(|d| d.rms).collect())
    };
    Ok(Draw {
        mf: per_user(mf_combiner(&ch)?)?,
        one: per_user(rf_1tap(&ch, 0)?)?,
        ltap: per_user(rf_ltap(&ch)?)?,
        siso: siso_rms_delay_spread(&ch)?,
    })
}

/// RMS delay spreads of every realization at `antennas` elements.
pub fn rms_samples(s: &Scenario, antennas: usize) -> Result<RmsSamples> {
    rms_samples_with(s, antennas, Execution::default())
}

pub fn rms_samples_with(s: &Scenario, antennas: usize, exec: Execution) -> Result<RmsSamples> {
    let sm = s.with_antennas(antennas);
    sm.dims.validate()?;
    if sm.realizations == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let draws = exec.map(sm.realizations, |r| spreads(&sm, r)).into_iter().collect::<Result<Vec<_>>>()?;
    let mut out = RmsSamples {
        antennas,
        mf: Vec::with_capacity(draws.len()),
        rf_1tap: Vec::with_capacity(draws.len()),
        rf_ltap: Vec::with_capacity(draws.len()),
        siso: Vec::with_capacity(draws.len()),
    };
    for d in draws {
        out.mf.push(d.mf);
        out.rf_1tap.push(d.one);
        out.rf_ltap.push(d.ltap);
        out.siso.push(d.siso);
    }
    Ok(out)
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(samples: &[f64], p: f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn rms_study(antenna_grid: &[usize], s: &Scenario) -> Result<Vec<ResultRow>> {
    rms_study_with(antenna_grid, s, Execution::default())
}

/// Mean RMS delay spread per array size and series, then CDF quantiles.
///
/// Rows carry no SNR; `stderr` of the mean is taken over per-realization
/// user means, quantile rows report `stderr = 0`.
pub fn rms_study_with(antenna_grid: &[usize], s: &Scenario, exec: Execution) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let row = |series: &str, metric, value, stderr| ResultRow {
        scenario: s.name.clone(),
        scheme: series.to_string(),
        snr_db: None,
        metric,
        value,
        stderr,
        realizations: s.realizations,
        seed: s.master_seed,
    };
    for &m in antenna_grid {
        let samples = rms_samples_with(s, m, exec)?;
        for series in RMS_SERIES {
            let means = samples.realization_means(series).expect("known series");
            let (value, stderr) = mean_stderr(means.iter().copied());
            rows.push(row(series, Metric::RmsMean { antennas: m }, value, stderr));
        }
        for series in RMS_SERIES {
            let pooled = samples.pooled(series).expect("known series");
            for p in CDF_PROBABILITIES {
                rows.push(row(
                    series,
                    Metric::RmsCdfPoint { antennas: m, prob: p },
                    quantile(&pooled, p),
                    0.0,
                ));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Scheme;

    #[test]
    fn quantile_interpolates() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.5) - 2.5).abs() < 1e-15);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn study_row_layout() {
        let mut s = Scenario::rich("r", vec![Scheme::Capacity]);
        s.realizations = 3;
        s.dims.subcarriers = 16;
        let rows = rms_study(&[8, 16], &s).unwrap();
        assert_eq!(rows.len(), 2 * 4 * (1 + 9));
        assert!(rows.iter().all(|r| r.snr_db.is_none() && r.value >= 0.0));
        assert_eq!(rows[0].metric, Metric::RmsMean { antennas: 8 });
        let got: Vec<&str> = rows[..4].iter().map(|r| r.scheme.as_str()).collect();
        assert_eq!(got, RMS_SERIES);
    }

    #[test]
    fn flat_channel_has_zero_spread_for_l_tap() {
        let mut s = Scenario::rich("r", vec![Scheme::Capacity]);
        s.dims.taps = 1;
        s.dims.subcarriers = 4;
        s.realizations = 2;
        let smp = rms_samples(&s, 12).unwrap();
        assert!(smp.siso.iter().all(|&x| x == 0.0));
        assert!(smp.rf_ltap.iter().flatten().all(|&x| x.abs() < 1e-12));
    }
}
