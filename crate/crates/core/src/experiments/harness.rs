use super::{mean_stderr, Metric, ResultRow, Scenario, Scheme, SinrPart, CHANNEL_STREAM};
use crate::beamforming::{
    decompose_to_phase_banks, effective_channel, mf_combiner, rf_1tap, rf_1tap_sum_heuristic, rf_ltap, zf_baseband,
    zf_per_subcarrier, CombinerIR, EffectiveChannel,
};
use crate::channel::{channel_spectrum, draw, exponential_pdp, ChannelRealization};
use crate::exec::Execution;
use crate::metrics::{
    capacity_curve, pdp_of_effective, sinr_from_pdp, sum_rate_from_sinr, LinkBudget, StreamPowers,
};
use crate::numerics::{ComplexMatrix, SpectrumGrid};
use crate::rng::stream_seed;
use crate::{Error, Result};

/// Aggregated rows plus bookkeeping about dropped realizations.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRun {
    pub rows: Vec<ResultRow>,
    pub realizations_used: usize,
    pub failed_realizations: usize,
    /// First failure, in realization order.
    pub first_failure: Option<(usize, Error)>,
    /// Largest `‖B(k)H(k) - I‖_F` over every ZF stage evaluated.
    pub max_zf_residual: f64,
}

impl ScenarioRun {
    pub fn failure_fraction(&self) -> f64 {
        let total = self.realizations_used + self.failed_realizations;
        if total == 0 {
            0.0
        } else {
            self.failed_realizations as f64 / total as f64
        }
    }
}

/// Seed of the channel drawn for realization `index`.
pub fn realization_seed(master: u64, index: usize) -> u64 {
    stream_seed(master, CHANNEL_STREAM, index as u64)
}

/// Channel of realization `index`, exactly as the harness draws it.
pub fn draw_channel(s: &Scenario, index: usize) -> Result<ChannelRealization> {
    let pdp = exponential_pdp(s.dims.taps, s.dims.users);
    draw(&s.model, s.dims, &pdp, realization_seed(s.master_seed, index))
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioRun> {
    run_scenario_with(s, Execution::default())
}

// (scheme, metric) pairs in output order; each owns one slot per SNR point
fn layout(s: &Scenario) -> Vec<(Scheme, Metric)> {
    s.schemes
        .iter()
        .flat_map(|&sc| sc.metrics().iter().map(move |&m| (sc, m)))
        .collect()
}

struct Sample {
    values: Vec<f64>,
    zf_residual: f64,
}

pub fn run_scenario_with(s: &Scenario, exec: Execution) -> Result<ScenarioRun> {
    s.validate()?;
    let budgets = s
        .snr_db
        .iter()
        .map(|&db| LinkBudget::from_snr_db(db))
        .collect::<Result<Vec<_>>>()?;
    let slots = layout(s);

    let samples = exec.map(s.realizations, |r| evaluate(s, r, &budgets));

    let mut kept = Vec::with_capacity(samples.len());
    let mut failed = 0;
    let mut first_failure = None;
    let mut max_zf_residual = 0.0_f64;
    for (r, sample) in samples.into_iter().enumerate() {
        match sample {
            Ok(x) => {
                max_zf_residual = max_zf_residual.max(x.zf_residual);
                kept.push(x.values);
            }
            Err(e) => {
                failed += 1;
                first_failure.get_or_insert((r, e));
            }
        }
    }

    let mut rows = Vec::new();
    if !kept.is_empty() {
        let n_snr = budgets.len();
        for (slot, &(scheme, metric)) in slots.iter().enumerate() {
            for (j, &snr) in s.snr_db.iter().enumerate() {
                let idx = slot * n_snr + j;
                let (value, stderr) = mean_stderr(kept.iter().map(|v| v[idx]));
                rows.push(ResultRow {
                    scenario: s.name.clone(),
                    scheme: scheme.name().to_string(),
                    snr_db: Some(snr),
                    metric,
                    value,
                    stderr,
                    realizations: kept.len(),
                    seed: s.master_seed,
                });
            }
        }
    }

    Ok(ScenarioRun {
        rows,
        realizations_used: kept.len(),
        failed_realizations: failed,
        first_failure,
        max_zf_residual,
    })
}

fn evaluate(s: &Scenario, r: usize, budgets: &[LinkBudget]) -> Result<Sample> {
    let ch = draw_channel(s, r)?;
    let k = s.dims.subcarriers;
    let mut raw: Option<SpectrumGrid> = None;
    let mut values = Vec::new();
    let mut zf_residual = 0.0_f64;

    for &scheme in &s.schemes {
        let mut per_metric: Vec<Vec<f64>> = Vec::new();
        match scheme {
            Scheme::Capacity => {
                let spec = raw_spectrum(&mut raw, &ch, k)?;
                per_metric.push(capacity_curve(spec, budgets)?);
            }
            Scheme::Zf => {
                let spec = raw_spectrum(&mut raw, &ch, k)?;
                let bb = zf_per_subcarrier(spec)?;
                let gain = bb.product(spec)?;
                zf_residual = zf_residual.max(identity_residual(&gain));
                let noise = SpectrumGrid::new(bb.iter().map(ComplexMatrix::outer_gram).collect())?;
                let powers = StreamPowers::from_grids(&gain, &noise)?;
                per_metric.push(budgets.iter().map(|lb| powers.sum_rate(lb)).collect());
            }
            Scheme::Mf => {
                let w = mf_combiner(&ch)?;
                let eff = effective_channel(&w, &ch, k)?;
                per_metric.push(pdp_rates(&w, &eff, budgets)?.0);
                per_metric.push(capacity_curve(&eff.spectrum, budgets)?);
            }
            Scheme::Rf1Tap | Scheme::RfLTap | Scheme::Heuristic1Tap => {
                let w = rf_combiner(scheme, &ch)?;
                let eff = effective_channel(&w, &ch, k)?;
                let (rates, parts) = pdp_rates(&w, &eff, budgets)?;
                per_metric.push(rates);
                per_metric.extend(parts);
            }
            Scheme::Rf1TapZf | Scheme::RfLTapZf | Scheme::Heuristic1TapZf | Scheme::Bank2LZf => {
                let w = rf_combiner(scheme, &ch)?;
                let eff = effective_channel(&w, &ch, k)?;
                let bb = zf_baseband(&eff)?;
                let gain = bb.product(&eff.spectrum)?;
                zf_residual = zf_residual.max(identity_residual(&gain));
                let noise = colored_noise(&bb, &eff);
                let powers = StreamPowers::from_grids(&gain, &SpectrumGrid::new(noise)?)?;
                per_metric.push(budgets.iter().map(|lb| powers.sum_rate(lb)).collect());
                per_metric.push(capacity_curve(&eff.spectrum, budgets)?);
            }
        }
        debug_assert_eq!(per_metric.len(), scheme.metrics().len());
        for m in per_metric {
            values.extend(m);
        }
    }

    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite metric in realization {r}")));
    }
    Ok(Sample { values, zf_residual })
}

fn raw_spectrum<'a>(cache: &'a mut Option<SpectrumGrid>, ch: &ChannelRealization, k: usize) -> Result<&'a SpectrumGrid> {
    if cache.is_none() {
        *cache = Some(channel_spectrum(ch, k)?);
    }
    Ok(cache.as_ref().expect("filled above"))
}

fn rf_combiner(scheme: Scheme, ch: &ChannelRealization) -> Result<CombinerIR> {
    match scheme {
        Scheme::Rf1Tap | Scheme::Rf1TapZf => rf_1tap(ch, 0),
        Scheme::RfLTap | Scheme::RfLTapZf => rf_ltap(ch),
        Scheme::Heuristic1Tap | Scheme::Heuristic1TapZf => rf_1tap_sum_heuristic(ch),
        Scheme::Bank2LZf => decompose_to_phase_banks(&mf_combiner(ch)?)?.to_combiner(),
        other => Err(Error::Incompatible(format!("{other} has no RF stage"))),
    }
}

// B(k) C(k) B(k)ᴴ
fn colored_noise(bb: &SpectrumGrid, eff: &EffectiveChannel) -> Vec<ComplexMatrix> {
    bb.iter()
        .zip(eff.noise_cov_spectrum.iter())
        .map(|(b, c)| &(b * c) * &b.adjoint())
        .collect()
}

fn identity_residual(gain: &SpectrumGrid) -> f64 {
    let id = ComplexMatrix::identity(gain.shape().0);
    gain.iter().map(|g| (g - &id).frobenius_norm()).fold(0.0, f64::max)
}

// Sum rate from the delay-0 SINR plus the user-averaged SINR components.
fn pdp_rates(w: &CombinerIR, eff: &EffectiveChannel, budgets: &[LinkBudget]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let pdp = pdp_of_effective(eff);
    let gain = w.noise_gain();
    let users = gain.len() as f64;
    let mut rates = Vec::with_capacity(budgets.len());
    let mut parts: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(budgets.len())).collect();
    for lb in budgets {
        let noise: Vec<f64> = gain.iter().map(|g| g * lb.noise_variance()).collect();
        let b = sinr_from_pdp(&pdp, &noise, lb)?;
        rates.push(sum_rate_from_sinr(&b));
        for (i, part) in [SinrPart::Signal, SinrPart::Isi, SinrPart::Mui, SinrPart::Noise].iter().enumerate() {
            let total: f64 = b
                .users
                .iter()
                .map(|u| match part {
                    SinrPart::Signal => u.signal,
                    SinrPart::Isi => u.isi,
                    SinrPart::Mui => u.mui,
                    SinrPart::Noise => u.noise,
                })
                .sum();
            parts[i].push(total / users);
        }
    }
    Ok((rates, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::capacity;

    fn small(schemes: Vec<Scheme>) -> Scenario {
        let mut s = Scenario::rich("t", schemes);
        s.dims.antennas = 16;
        s.dims.users = 2;
        s.dims.taps = 3;
        s.dims.subcarriers = 8;
        s.realizations = 4;
        s.snr_db = vec![0.0, 10.0];
        s
    }

    #[test]
    fn single_realization_capacity_matches_metric() {
        let mut s = small(vec![Scheme::Capacity]);
        s.realizations = 1;
        let run = run_scenario(&s).unwrap();
        assert_eq!(run.rows.len(), 2);
        let ch = draw_channel(&s, 0).unwrap();
        let spec = channel_spectrum(&ch, 8).unwrap();
        for row in &run.rows {
            let lb = LinkBudget::from_snr_db(row.snr_db.unwrap()).unwrap();
            assert_eq!(row.value, capacity(&spec, &lb).unwrap());
            assert_eq!(row.stderr, 0.0);
            assert_eq!(row.realizations, 1);
        }
    }

    #[test]
    fn rows_follow_scheme_metric_snr_order() {
        let s = small(vec![Scheme::RfLTap, Scheme::Zf]);
        let run = run_scenario_with(&s, Execution::Sequential).unwrap();
        assert_eq!(run.rows.len(), (5 + 1) * 2);
        assert_eq!(run.rows[0].scheme, "rf_ltap");
        assert_eq!(run.rows[0].metric, Metric::Rate);
        assert_eq!(run.rows[2].metric, Metric::SinrComponent(SinrPart::Signal));
        assert_eq!(run.rows.last().unwrap().scheme, "zf");
        assert!(run.rows.iter().all(|r| r.stderr >= 0.0));
        assert!(run.max_zf_residual < 1e-9);
    }

    #[test]
    fn noise_component_matches_noise_gain() {
        let s = small(vec![Scheme::RfLTap, Scheme::Rf1Tap]);
        let run = run_scenario(&s).unwrap();
        let noise: Vec<&ResultRow> = run
            .rows
            .iter()
            .filter(|r| r.metric == Metric::SinrComponent(SinrPart::Noise) && r.snr_db == Some(0.0))
            .collect();
        assert!((noise[0].value - 3.0).abs() < 1e-12);
        assert!((noise[1].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequential_equals_parallel() {
        let s = small(vec![Scheme::Capacity, Scheme::Mf, Scheme::Rf1TapZf, Scheme::Bank2LZf]);
        let a = run_scenario_with(&s, Execution::Sequential).unwrap();
        let b = run_scenario_with(&s, Execution::with_threads(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rf_stage_required() {
        let ch = draw_channel(&small(vec![Scheme::Zf]), 0).unwrap();
        assert!(matches!(rf_combiner(Scheme::Zf, &ch), Err(Error::Incompatible(_))));
    }
}
