//! Combiner construction and effective channels.
//!
//! Combiners are `U x M` impulse responses on delays `-L+1..=0`. The RF
//! variants keep every weight at modulus `1/√M` and only choose phases: the
//! L-tap design copies the phases of the time-reversed matched filter, the
//! 1-tap design copies the phases of a single channel tap.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::numerics::{
    circular_convolve, dft_of_taps, pinv_tall, ComplexMatrix, SpectrumGrid, TapSequence,
};
use crate::{Error, Result};

/// Tolerance on the `1/√M` modulus of phase-shifter weights.
pub const MODULUS_TOL: f64 = 1e-12;

/// Combiner impulse response.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinerIR {
    pub taps: TapSequence,
    pub constant_modulus: bool,
    /// `1/√M` for phase-shifter combiners.
    pub modulus: Option<f64>,
}

impl CombinerIR {
    /// Wrap phase-only taps, checking every weight sits on the `1/√M` circle.
    pub fn constant_modulus(taps: TapSequence) -> Result<Self> {
        let m = taps.shape().1;
        let modulus = 1.0 / (m as f64).sqrt();
        let worst = taps
            .taps()
            .iter()
            .flat_map(|t| t.as_slice())
            .map(|z| (z.norm() - modulus).abs())
            .fold(0.0, f64::max);
        if worst > MODULUS_TOL {
            return Err(Error::InvalidParameter(format!(
                "weight modulus off by {worst:e}"
            )));
        }
        Ok(Self {
            taps,
            constant_modulus: true,
            modulus: Some(modulus),
        })
    }

    pub fn unconstrained(taps: TapSequence) -> Self {
        Self {
            taps,
            constant_modulus: false,
            modulus: None,
        }
    }

    pub fn users(&self) -> usize {
        self.taps.shape().0
    }

    pub fn antennas(&self) -> usize {
        self.taps.shape().1
    }

    /// Per-user noise gain `Σ_n ‖row_u(W_n)‖²`.
    ///
    /// Equals `L` for the L-tap RF combiner and 1 for the 1-tap one.
    pub fn noise_gain(&self) -> Vec<f64> {
        (0..self.users())
            .map(|u| {
                self.taps
                    .taps()
                    .iter()
                    .map(|t| t.row(u).iter().map(|z| z.norm_sqr()).sum::<f64>())
                    .sum()
            })
            .collect()
    }
}

#[inline]
fn phase(z: Complex64) -> f64 {
    // zero has no phase; pick 0 so runs stay reproducible
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg()
    }
}

/// `U x M` tap with entries `(1/√M) exp(-j∠h_{mu})`.
fn phase_conjugate(h: &ComplexMatrix) -> ComplexMatrix {
    let (m, u) = h.shape();
    let amp = 1.0 / (m as f64).sqrt();
    ComplexMatrix::from_fn(u, m, |r, c| Complex64::from_polar(amp, -phase(h.get(c, r))))
}

fn reversed_taps(ch: &ChannelRealization, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<TapSequence> {
    let l = ch.dims.taps;
    // position i holds delay -(L-1)+i, built from channel tap L-1-i
    let taps = (0..l).rev().map(|i| f(ch.tap(i))).collect();
    TapSequence::new(-(l as i64 - 1), taps)
}

/// Fully-digital time-domain matched filter `W(n) = Hᴴ(-n)/√M`.
pub fn mf_combiner(ch: &ChannelRealization) -> Result<CombinerIR> {
    let scale = 1.0 / (ch.dims.antennas as f64).sqrt();
    Ok(CombinerIR::unconstrained(reversed_taps(ch, |h| {
        h.adjoint().scale(scale)
    })?))
}

/// L-tap RF combiner: the constant-modulus tap closest to each matched-filter tap.
pub fn rf_ltap(ch: &ChannelRealization) -> Result<CombinerIR> {
    CombinerIR::constant_modulus(reversed_taps(ch, phase_conjugate)?)
}

/// 1-tap RF combiner built from channel tap `tap_index` (tap 0 by default).
pub fn rf_1tap(ch: &ChannelRealization, tap_index: usize) -> Result<CombinerIR> {
    if tap_index >= ch.dims.taps {
        return Err(Error::InvalidParameter(format!(
            "tap index {tap_index} with L={}",
            ch.dims.taps
        )));
    }
    CombinerIR::constant_modulus(TapSequence::single(phase_conjugate(ch.tap(tap_index))))
}

/// 1-tap variant where each user's row follows that user's strongest tap.
pub fn rf_1tap_strongest(ch: &ChannelRealization) -> Result<CombinerIR> {
    let (m, users) = (ch.dims.antennas, ch.dims.users);
    let mut mixed = ComplexMatrix::zeros(m, users);
    for u in 0..users {
        let energy = |l: usize| (0..m).map(|r| ch.tap(l).get(r, u).norm_sqr()).sum::<f64>();
        let best = (0..ch.dims.taps)
            .max_by(|&a, &b| energy(a).total_cmp(&energy(b)).then(b.cmp(&a)))
            .unwrap_or(0);
        for r in 0..m {
            mixed.set(r, u, ch.tap(best).get(r, u));
        }
    }
    CombinerIR::constant_modulus(TapSequence::single(phase_conjugate(&mixed)))
}

/// 1-tap heuristic taking phases from the sum of all channel taps.
pub fn rf_1tap_sum_heuristic(ch: &ChannelRealization) -> Result<CombinerIR> {
    let mut sum = ComplexMatrix::zeros(ch.dims.antennas, ch.dims.users);
    for tap in ch.taps.taps() {
        sum.add_scaled(tap, Complex64::new(1.0, 0.0));
    }
    CombinerIR::constant_modulus(TapSequence::single(phase_conjugate(&sum)))
}

/// Two phase-shifter networks that together reproduce one combiner tap.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePair {
    pub delay: i64,
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
}

/// `2L` constant-modulus networks whose sum is a positive multiple of a target combiner.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseNetworkBank {
    pub gamma: f64,
    pub pairs: Vec<PhasePair>,
    antennas: usize,
}

impl PhaseNetworkBank {
    /// Positive factor `c` with `bank response = c · target`, namely `2/(√M γ)`.
    pub fn scale(&self) -> f64 {
        2.0 / ((self.antennas as f64).sqrt() * self.gamma)
    }

    /// Each network as its own single-delay constant-modulus combiner.
    pub fn networks(&self) -> Result<Vec<CombinerIR>> {
        let mut out = Vec::with_capacity(2 * self.pairs.len());
        for p in &self.pairs {
            for m in [&p.plus, &p.minus] {
                out.push(CombinerIR::constant_modulus(TapSequence::new(p.delay, vec![m.clone()])?)?);
            }
        }
        Ok(out)
    }

    /// End-to-end response of the bank with each pair summed.
    pub fn to_combiner(&self) -> Result<CombinerIR> {
        let taps = self.pairs.iter().map(|p| &p.plus + &p.minus).collect();
        Ok(CombinerIR::unconstrained(TapSequence::new(self.pairs[0].delay, taps)?))
    }
}

/// Split each entry `a` of `mf/γ` into `½e^{j(∠a + acos|a|)} + ½e^{j(∠a - acos|a|)}`.
pub fn decompose_to_phase_banks(mf: &CombinerIR) -> Result<PhaseNetworkBank> {
    let gamma = mf
        .taps
        .taps()
        .iter()
        .map(ComplexMatrix::max_abs)
        .fold(0.0, f64::max);
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::AllZero("matched filter"));
    }
    let antennas = mf.antennas();
    let amp = 1.0 / (antennas as f64).sqrt();
    let pairs = mf
        .taps
        .iter()
        .map(|(delay, tap)| {
            let mut plus = ComplexMatrix::zeros(tap.rows(), tap.cols());
            let mut minus = plus.clone();
            for r in 0..tap.rows() {
                for c in 0..tap.cols() {
                    let a = tap.get(r, c) / gamma;
                    let theta = phase(a);
                    let spread = a.norm().clamp(0.0, 1.0).acos();
                    plus.set(r, c, Complex64::from_polar(amp, theta + spread));
                    minus.set(r, c, Complex64::from_polar(amp, theta - spread));
                }
            }
            PhasePair { delay, plus, minus }
        })
        .collect();
    Ok(PhaseNetworkBank {
        gamma,
        pairs,
        antennas,
    })
}

/// Combiner applied to a channel: `U x U` taps and per-subcarrier noise covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveChannel {
    pub taps: TapSequence,
    pub spectrum: SpectrumGrid,
    /// `W̃(k) W̃ᴴ(k)`.
    pub noise_cov_spectrum: SpectrumGrid,
}

impl EffectiveChannel {
    pub fn users(&self) -> usize {
        self.taps.shape().0
    }

    pub fn num_subcarriers(&self) -> usize {
        self.spectrum.num_subcarriers()
    }
}

pub fn effective_channel(w: &CombinerIR, ch: &ChannelRealization, k: usize) -> Result<EffectiveChannel> {
    if w.antennas() != ch.dims.antennas {
        return Err(Error::DimensionMismatch(format!(
            "combiner has {} antennas, channel has {}",
            w.antennas(),
            ch.dims.antennas
        )));
    }
    let taps = circular_convolve(&w.taps, &ch.taps, k)?;
    let spectrum = dft_of_taps(&taps, k)?;
    // W̃(k)W̃ᴴ(k) is the transform of the autocorrelation Σ_n W(n+d)Wᴴ(n),
    // which costs U x U per tap pair instead of U x M per subcarrier
    let mirrored = TapSequence::new(
        -w.taps.last_delay(),
        w.taps.taps().iter().rev().map(ComplexMatrix::adjoint).collect(),
    )?;
    let autocorr = circular_convolve(&w.taps, &mirrored, k)?;
    let noise = dft_of_taps(&autocorr, k)?
        .iter()
        .map(|c| {
            let mut h = c.adjoint();
            h.add_scaled(c, Complex64::new(1.0, 0.0));
            h.scale(0.5)
        })
        .collect();
    Ok(EffectiveChannel {
        taps,
        spectrum,
        noise_cov_spectrum: SpectrumGrid::new(noise)?,
    })
}

/// Per-subcarrier zero-forcing `(H̃ₑᴴH̃ₑ)⁻¹H̃ₑᴴ` on the effective spectrum.
pub fn zf_baseband(eff: &EffectiveChannel) -> Result<SpectrumGrid> {
    zf_per_subcarrier(&eff.spectrum)
}

/// Left pseudo-inverse at every subcarrier; a singular bin is reported by index.
pub fn zf_per_subcarrier(spectrum: &SpectrumGrid) -> Result<SpectrumGrid> {
    let mats = spectrum
        .iter()
        .enumerate()
        .map(|(index, h)| {
            pinv_tall(h).map_err(|e| match e {
                Error::SingularChannel => Error::SingularSubcarrier { index },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SpectrumGrid::new(mats)
}

/// Largest `‖W_l W_{l'}ᴴ - I δ(l-l')‖_F / √U` over tap pairs.
pub fn rf_orthogonality_defect(w: &CombinerIR) -> Result<f64> {
    if !w.constant_modulus {
        return Err(Error::InvalidParameter(
            "orthogonality defect is defined for phase-shifter combiners".into(),
        ));
    }
    let users = w.users();
    let id = ComplexMatrix::identity(users);
    let taps = w.taps.taps();
    let mut worst = 0.0_f64;
    for (i, a) in taps.iter().enumerate() {
        for (j, b) in taps.iter().enumerate().skip(i) {
            let mut g = a * &b.adjoint();
            if i == j {
                g = &g - &id;
            }
            worst = worst.max(g.frobenius_norm() / (users as f64).sqrt());
        }
    }
    Ok(worst)
}
