//! Capacity, achievable rates, PDP based SINR and RMS delay spread.
//!
//! Rates are in bits/s/Hz. Noise statistics of an effective channel are the
//! exact per-subcarrier covariance `W̃W̃ᴴ`, never an assumed white process.

use crate::beamforming::EffectiveChannel;
use crate::channel::ChannelRealization;
use crate::numerics::{logdet_psd, pinv_tall, ComplexMatrix, SpectrumGrid};
use crate::{Error, Result};

/// Transmit power per user and receiver noise variance, both linear.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    transmit_power: f64,
    noise_variance: f64,
}

impl LinkBudget {
    pub fn new(transmit_power: f64, noise_variance: f64) -> Result<Self> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(transmit_power) || !ok(noise_variance) {
            return Err(Error::InvalidParameter(format!(
                "link budget needs positive finite powers, got P_t={transmit_power} σ²={noise_variance}"
            )));
        }
        Ok(Self {
            transmit_power,
            noise_variance,
        })
    }

    /// Unit transmit power with `P_t/σ²` set from decibels.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(1.0, 10f64.powf(-snr_db / 10.0))
    }

    #[inline]
    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    #[inline]
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.transmit_power / self.noise_variance
    }
}

fn plus_scaled_identity(m: &ComplexMatrix, rho: f64) -> ComplexMatrix {
    let n = m.rows();
    ComplexMatrix::from_fn(n, n, |r, c| {
        let v = m.get(r, c) * rho;
        if r == c {
            v + 1.0
        } else {
            v
        }
    })
}

/// `(1/K) Σ_k log2 det(I + ρ H̃ᴴ(k) H̃(k))`.
pub fn capacity(spectrum: &SpectrumGrid, lb: &LinkBudget) -> Result<f64> {
    Ok(capacity_curve(spectrum, std::slice::from_ref(lb))?[0])
}

/// Capacity at several link budgets, reusing the per-subcarrier Gram matrices.
pub fn capacity_curve(spectrum: &SpectrumGrid, budgets: &[LinkBudget]) -> Result<Vec<f64>> {
    let grams: Vec<ComplexMatrix> = spectrum.iter().map(ComplexMatrix::gram).collect();
    let k = grams.len() as f64;
    budgets
        .iter()
        .map(|lb| {
            let mut total = 0.0;
            for g in &grams {
                total += logdet_psd(&plus_scaled_identity(g, lb.rho()))?;
            }
            Ok(total / k)
        })
        .collect()
}

/// Composite gain `G(k) = B(k) H̃ₑ(k)` and noise covariance `Σ(k) = B(k) W̃W̃ᴴ B(k)ᴴ`.
fn composite(eff: &EffectiveChannel, bb: Option<&SpectrumGrid>) -> Result<(SpectrumGrid, SpectrumGrid)> {
    match bb {
        None => Ok((eff.spectrum.clone(), eff.noise_cov_spectrum.clone())),
        Some(b) => {
            if b.num_subcarriers() != eff.num_subcarriers() {
                return Err(Error::DimensionMismatch(format!(
                    "baseband has {} subcarriers, effective channel {}",
                    b.num_subcarriers(),
                    eff.num_subcarriers()
                )));
            }
            let gain = b.product(&eff.spectrum)?;
            let noise = b
                .iter()
                .zip(eff.noise_cov_spectrum.iter())
                .map(|(bk, ck)| &(bk * ck) * &bk.adjoint())
                .collect();
            Ok((gain, SpectrumGrid::new(noise)?))
        }
    }
}

/// `(1/K) Σ_k log2 det(I + ρ Σ(k)⁻¹ G(k) G(k)ᴴ)`, the hybrid-rate objective.
///
/// Evaluated as `log2 det(Σ + ρGGᴴ) - log2 det Σ`. Any invertible baseband
/// stage cancels out of this expression, so with `bb = None` the value is
/// the same joint-decoding bound.
pub fn achievable_rate_hybrid(
    eff: &EffectiveChannel,
    bb: Option<&SpectrumGrid>,
    lb: &LinkBudget,
) -> Result<f64> {
    let (gain, noise) = composite(eff, bb)?;
    let rho = lb.rho();
    let mut total = 0.0;
    for (index, (g, sigma)) in gain.iter().zip(noise.iter()).enumerate() {
        let noise_ld = logdet_psd(sigma).map_err(|_| Error::SingularNoise { index })?;
        if !noise_ld.is_finite() {
            return Err(Error::SingularNoise { index });
        }
        let mut total_cov = g.outer_gram().scale(rho);
        total_cov.add_scaled(sigma, num_complex::Complex64::new(1.0, 0.0));
        total += logdet_psd(&total_cov)? - noise_ld;
    }
    Ok(total / gain.num_subcarriers() as f64)
}

/// Per-stream signal, interference and noise powers on every subcarrier,
/// for a receiver that decodes each output independently.
#[derive(Clone, Debug)]
pub struct StreamPowers {
    users: usize,
    // [k][u] -> (signal, interference, noise)
    terms: Vec<(f64, f64, f64)>,
}

impl StreamPowers {
    /// From composite gains `G(k)` (`U x U`) and output noise covariances.
    pub fn from_grids(gain: &SpectrumGrid, noise: &SpectrumGrid) -> Result<Self> {
        if gain.num_subcarriers() != noise.num_subcarriers() || gain.shape().0 != noise.shape().0 {
            return Err(Error::DimensionMismatch("gain and noise grids differ".into()));
        }
        let (users, cols) = gain.shape();
        let mut terms = Vec::with_capacity(gain.num_subcarriers() * users);
        for (index, (g, sigma)) in gain.iter().zip(noise.iter()).enumerate() {
            for u in 0..users {
                let signal = if u < cols { g.get(u, u).norm_sqr() } else { 0.0 };
                let interference: f64 = (0..cols).filter(|&v| v != u).map(|v| g.get(u, v).norm_sqr()).sum();
                let n = sigma.get(u, u).re;
                if !(n.is_finite() && n > 0.0) {
                    return Err(Error::SingularNoise { index });
                }
                terms.push((signal, interference, n));
            }
        }
        Ok(Self { users, terms })
    }

    /// Effective channel followed by an optional baseband stage.
    pub fn new(eff: &EffectiveChannel, bb: Option<&SpectrumGrid>) -> Result<Self> {
        let (gain, noise) = composite(eff, bb)?;
        Self::from_grids(&gain, &noise)
    }

    /// `(1/K) Σ_k Σ_u log2(1 + ρ s/(ρ i + n))`.
    pub fn sum_rate(&self, lb: &LinkBudget) -> f64 {
        let rho = lb.rho();
        let total: f64 = self
            .terms
            .iter()
            .map(|&(s, i, n)| (rho * s / (rho * i + n)).ln_1p())
            .sum();
        total / std::f64::consts::LN_2 / (self.terms.len() / self.users) as f64
    }
}

/// Sum rate of per-stream decoding after an optional baseband stage.
pub fn linear_sum_rate(eff: &EffectiveChannel, bb: Option<&SpectrumGrid>, lb: &LinkBudget) -> Result<f64> {
    Ok(StreamPowers::new(eff, bb)?.sum_rate(lb))
}

/// Stream powers of fully-digital ZF `B(k) = H̃(k)⁺` applied to the raw channel.
pub fn digital_zf_powers(spectrum: &SpectrumGrid) -> Result<StreamPowers> {
    let mut gains = Vec::with_capacity(spectrum.num_subcarriers());
    let mut noise = Vec::with_capacity(spectrum.num_subcarriers());
    for (index, h) in spectrum.iter().enumerate() {
        let b = pinv_tall(h).map_err(|e| match e {
            Error::SingularChannel => Error::SingularSubcarrier { index },
            other => other,
        })?;
        gains.push(&b * h);
        noise.push(b.outer_gram());
    }
    StreamPowers::from_grids(&SpectrumGrid::new(gains)?, &SpectrumGrid::new(noise)?)
}

/// `|H_e(n)_{uu'}|²` on every delay of an effective channel.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectivePdp {
    pub offset: i64,
    pub users: usize,
    // [delay][u][u']
    powers: Vec<f64>,
}

impl EffectivePdp {
    pub fn from_powers(offset: i64, users: usize, powers: Vec<f64>) -> Result<Self> {
        if users == 0 || powers.is_empty() || !powers.len().is_multiple_of(users * users) {
            return Err(Error::InvalidShape(format!(
                "{} PDP entries for {users} users",
                powers.len()
            )));
        }
        Ok(Self { offset, users, powers })
    }

    pub fn num_delays(&self) -> usize {
        self.powers.len() / (self.users * self.users)
    }

    pub fn delays(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.num_delays() as i64).map(move |i| self.offset + i)
    }

    /// Power from user `from` into output `to` at delay index `i`.
    #[inline]
    pub fn get(&self, to: usize, from: usize, i: usize) -> f64 {
        self.powers[(i * self.users + to) * self.users + from]
    }

    /// Power at delay `n`, zero outside the support.
    pub fn at_delay(&self, to: usize, from: usize, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 || i as usize >= self.num_delays() {
            0.0
        } else {
            self.get(to, from, i as usize)
        }
    }

    /// Own-user profile over delays.
    pub fn user_profile(&self, u: usize) -> Vec<f64> {
        (0..self.num_delays()).map(|i| self.get(u, u, i)).collect()
    }
}

pub fn pdp_of_effective(eff: &EffectiveChannel) -> EffectivePdp {
    let users = eff.users();
    let cols = eff.taps.shape().1;
    let mut powers = Vec::with_capacity(eff.taps.span() * users * users);
    for tap in eff.taps.taps() {
        for u in 0..users {
            for v in 0..users {
                powers.push(if v < cols { tap.get(u, v).norm_sqr() } else { 0.0 });
            }
        }
    }
    EffectivePdp {
        offset: eff.taps.offset(),
        users,
        powers,
    }
}

/// Signal, interference and noise powers of one user at delay 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserSinr {
    pub signal: f64,
    pub isi: f64,
    pub mui: f64,
    pub noise: f64,
    pub sinr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinrBreakdown {
    pub users: Vec<UserSinr>,
}

/// SINR of each user taking delay 0 as the desired sample.
///
/// `noise_power_per_user` is the output noise power, e.g. `L σ²` behind the
/// L-tap RF combiner.
pub fn sinr_from_pdp(pdp: &EffectivePdp, noise_power_per_user: &[f64], lb: &LinkBudget) -> Result<SinrBreakdown> {
    if noise_power_per_user.len() != pdp.users {
        return Err(Error::DimensionMismatch(format!(
            "{} noise powers for {} users",
            noise_power_per_user.len(),
            pdp.users
        )));
    }
    let pt = lb.transmit_power();
    let users = (0..pdp.users)
        .map(|u| {
            let noise = noise_power_per_user[u];
            if !(noise.is_finite() && noise > 0.0) {
                return Err(Error::InvalidParameter(format!("noise power {noise} for user {u}")));
            }
            let mut signal = 0.0;
            let mut isi = 0.0;
            let mut mui = 0.0;
            for (i, n) in pdp.delays().enumerate() {
                for v in 0..pdp.users {
                    let p = pdp.get(u, v, i);
                    if v != u {
                        mui += p;
                    } else if n == 0 {
                        signal += p;
                    } else {
                        isi += p;
                    }
                }
            }
            let (signal, isi, mui) = (pt * signal, pt * isi, pt * mui);
            Ok(UserSinr {
                signal,
                isi,
                mui,
                noise,
                sinr: signal / (noise + isi + mui),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SinrBreakdown { users })
}

/// `Σ_u log2(1 + γ_u)`.
pub fn sum_rate_from_sinr(b: &SinrBreakdown) -> f64 {
    b.users.iter().map(|u| u.sinr.max(0.0).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// Mean delay and RMS delay spread, both in tap units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelaySpread {
    pub mean: f64,
    pub rms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelaySpreadReport {
    pub users: Vec<DelaySpread>,
}

impl DelaySpreadReport {
    pub fn mean_rms(&self) -> f64 {
        self.users.iter().map(|d| d.rms).sum::<f64>() / self.users.len() as f64
    }
}

/// RMS delay spread of `powers[i]` at delays `offset + i`.
pub fn rms_delay_spread(offset: i64, powers: &[f64]) -> Result<DelaySpread> {
    let total: f64 = powers.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::AllZero("power-delay profile"));
    }
    let local: f64 = powers.iter().enumerate().map(|(i, p)| p * i as f64).sum::<f64>() / total;
    let radicand = powers
        .iter()
        .enumerate()
        .map(|(i, p)| p * (i as f64 - local).powi(2))
        .sum::<f64>()
        / total;
    let mean = offset as f64 + local;
    if radicand < -1e-12 {
        return Err(Error::InvalidParameter(format!("negative delay variance {radicand:e}")));
    }
    Ok(DelaySpread {
        mean,
        rms: radicand.max(0.0).sqrt(),
    })
}

pub fn delay_spread_report(pdp: &EffectivePdp) -> Result<DelaySpreadReport> {
    let users = (0..pdp.users)
        .map(|u| rms_delay_spread(pdp.offset, &pdp.user_profile(u)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DelaySpreadReport { users })
}

/// RMS delay spread of each antenna-to-user SISO link, averaged over all pairs.
pub fn siso_rms_delay_spread(ch: &ChannelRealization) -> Result<f64> {
    let (m, users) = (ch.dims.antennas, ch.dims.users);
    let mut total = 0.0;
    let mut profile = vec![0.0; ch.dims.taps];
    for u in 0..users {
        for a in 0..m {
            for (l, p) in profile.iter_mut().enumerate() {
                *p = ch.tap(l).get(a, u).norm_sqr();
            }
            total += rms_delay_spread(0, &profile)?.rms;
        }
    }
    Ok(total / (m * users) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::TapSequence;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn link_budget() {
        let lb = LinkBudget::from_snr_db(10.0).unwrap();
        assert!((lb.rho() - 10.0).abs() < 1e-12);
        assert!(LinkBudget::new(0.0, 1.0).is_err());
        assert!(LinkBudget::new(1.0, -1.0).is_err());
        assert!(LinkBudget::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn identity_spectrum_capacity() {
        let grid = SpectrumGrid::new(vec![ComplexMatrix::identity(3); 4]).unwrap();
        let lb = LinkBudget::new(2.0, 0.5).unwrap();
        assert!((capacity(&grid, &lb).unwrap() - 3.0 * 5f64.log2()).abs() < 1e-12);
        let tiny = LinkBudget::new(1e-300, 1.0).unwrap();
        assert!(capacity(&grid, &tiny).unwrap() < 1e-250);
    }

    #[test]
    fn sum_rate_values() {
        let mk = |g: &[f64]| SinrBreakdown {
            users: g
                .iter()
                .map(|&sinr| UserSinr {
                    signal: 0.0,
                    isi: 0.0,
                    mui: 0.0,
                    noise: 1.0,
                    sinr,
                })
                .collect(),
        };
        assert_eq!(sum_rate_from_sinr(&mk(&[0.0, 0.0])), 0.0);
        assert!((sum_rate_from_sinr(&mk(&[1.0])) - 1.0).abs() < 1e-15);
        assert!((sum_rate_from_sinr(&mk(&[3.0; 4])) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn rms_cases() {
        assert_eq!(rms_delay_spread(0, &[5.0]).unwrap().rms, 0.0);
        let two = rms_delay_spread(0, &[1.0, 1.0]).unwrap();
        assert!((two.rms - 0.5).abs() < 1e-15);
        let skew = rms_delay_spread(0, &[4.0, 1.0]).unwrap();
        assert!((skew.mean - 0.2).abs() < 1e-15);
        assert!((skew.rms - 0.4).abs() < 1e-15);
        assert!(rms_delay_spread(0, &[0.0, 0.0]).is_err());
        // offsets shift the mean only
        let shifted = rms_delay_spread(-3, &[4.0, 1.0]).unwrap();
        assert!((shifted.mean + 2.8).abs() < 1e-15);
        assert!((shifted.rms - 0.4).abs() < 1e-12);
    }

    #[test]
    fn single_tap_single_user_pdp() {
        let taps = TapSequence::single(ComplexMatrix::from_diagonal(&[c(2.0, 0.0)]));
        let grid = SpectrumGrid::new(vec![ComplexMatrix::from_diagonal(&[c(2.0, 0.0)])]).unwrap();
        let eff = EffectiveChannel {
            taps,
            spectrum: grid.clone(),
            noise_cov_spectrum: SpectrumGrid::new(vec![ComplexMatrix::identity(1)]).unwrap(),
        };
        let pdp = pdp_of_effective(&eff);
        assert_eq!(pdp.get(0, 0, 0), 4.0);
        assert_eq!(pdp.at_delay(0, 0, 1), 0.0);

        let lb = LinkBudget::new(3.0, 0.5).unwrap();
        let unit = EffectivePdp::from_powers(0, 1, vec![1.0]).unwrap();
        let b = sinr_from_pdp(&unit, &[0.5], &lb).unwrap();
        assert!((b.users[0].sinr - 6.0).abs() < 1e-15);
        assert!(sinr_from_pdp(&unit, &[0.0], &lb).is_err());
        assert!(sinr_from_pdp(&unit, &[1.0, 1.0], &lb).is_err());
    }

    #[test]
    fn sinr_components_split_by_delay_and_user() {
        // two users, delays -1, 0, 1
        #[rustfmt::skip]
        let powers = vec![
            0.5, 0.1, 0.2, 0.3,
            9.0, 1.0, 2.0, 8.0,
            0.25, 0.4, 0.6, 0.7,
        ];
        let pdp = EffectivePdp::from_powers(-1, 2, powers).unwrap();
        let lb = LinkBudget::new(2.0, 1.0).unwrap();
        let b = sinr_from_pdp(&pdp, &[1.0, 3.0], &lb).unwrap();
        let u0 = b.users[0];
        assert!((u0.signal - 18.0).abs() < 1e-12);
        assert!((u0.isi - 1.5).abs() < 1e-12);
        assert!((u0.mui - 3.0).abs() < 1e-12);
        assert!((u0.sinr - 18.0 / 5.5).abs() < 1e-12);
        let u1 = b.users[1];
        assert!((u1.signal - 16.0).abs() < 1e-12);
        assert!((u1.mui - 5.6).abs() < 1e-12);
        assert!((u1.noise - 3.0).abs() < 1e-12);
    }
}
