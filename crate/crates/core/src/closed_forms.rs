//! Large-array predictions for the 1-tap and L-tap RF combiners on the
//! rich-scattering channel.
//!
//! All of them rest on `E|CN(0,1)| = √π/2`: the coherent gain of an
//! equal-gain combiner over `M` antennas grows as `πM/4` while interference
//! terms stay `O(1)`.

use std::f64::consts::PI;

use crate::channel::PowerDelayProfile;
use crate::metrics::LinkBudget;

/// RF combiner structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RfModel {
    OneTap,
    LTap,
}

impl RfModel {
    pub fn name(&self) -> &'static str {
        match self {
            RfModel::OneTap => "1-tap",
            RfModel::LTap => "L-tap",
        }
    }
}

fn coherent_sum(pdp_column: &[f64]) -> f64 {
    pdp_column.iter().map(|d| d.sqrt()).sum::<f64>().powi(2)
}

fn debug_check_column(pdp_column: &[f64]) {
    debug_assert!(
        (pdp_column.iter().sum::<f64>() - 1.0).abs() < 1e-9,
        "profile column must sum to 1"
    );
}

/// L-tap SINR `πP_tM|Σ_l √d_l|²/4 / (Lσ² + P_t(UL-1))`.
pub fn prop1_sinr(lb: &LinkBudget, antennas: usize, users: usize, taps: usize, pdp_column: &[f64]) -> f64 {
    debug_check_column(pdp_column);
    let pt = lb.transmit_power();
    let signal = PI * pt * antennas as f64 / 4.0 * coherent_sum(pdp_column);
    let ul = (users * taps) as f64;
    signal / (taps as f64 * lb.noise_variance() + pt * (ul - 1.0))
}

/// 1-tap SINR `πP_tM d_0/4 / (σ² + P_t Σ_{l≥1} d_l + P_t(U-1))`.
pub fn prop2_sinr(lb: &LinkBudget, antennas: usize, users: usize, pdp_column: &[f64]) -> f64 {
    debug_check_column(pdp_column);
    let pt = lb.transmit_power();
    let d0 = pdp_column[0];
    let tail: f64 = pdp_column[1..].iter().sum();
    let denom = lb.noise_variance() + pt * tail + pt * (users as f64 - 1.0);
    d0 * PI * pt * antennas as f64 / 4.0 / denom
}

/// Noise-free limit of [`prop1_sinr`].
pub fn prop1_ceiling(antennas: usize, users: usize, taps: usize, pdp_column: &[f64]) -> f64 {
    let ul = (users * taps) as f64;
    PI * antennas as f64 * coherent_sum(pdp_column) / (4.0 * (ul - 1.0))
}

/// Noise-free limit of [`prop2_sinr`].
pub fn prop2_ceiling(antennas: usize, users: usize, pdp_column: &[f64]) -> f64 {
    let tail: f64 = pdp_column[1..].iter().sum();
    PI * antennas as f64 * pdp_column[0] / (4.0 * (tail + users as f64 - 1.0))
}

/// Effective-channel capacity in the flat large-array limit.
///
/// L-tap: `Σ_u log2(1 + (ρπM/4)(Σ_l √d_{lu})²)`; 1-tap: `Σ_u log2(1 + (ρπM/4) d_{0u})`.
pub fn prop4_capacity(lb: &LinkBudget, antennas: usize, pdp: &PowerDelayProfile, model: RfModel) -> f64 {
    let g = lb.rho() * PI * antennas as f64 / 4.0;
    (0..pdp.users())
        .map(|u| {
            let col = pdp.column(u);
            let gain = match model {
                RfModel::LTap => coherent_sum(&col),
                RfModel::OneTap => col[0],
            };
            (g * gain).ln_1p()
        })
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Delay-spread envelopes `(c_low/√M, c_high/√M)` for each array size.
pub fn prop3_envelopes(antenna_grid: &[usize], c_low: f64, c_high: f64) -> Vec<(f64, f64)> {
    antenna_grid
        .iter()
        .map(|&m| {
            let s = (m as f64).sqrt();
            (c_low / s, c_high / s)
        })
        .collect()
}

/// Per-user SINR, resulting sum rate and effective-channel capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticPrediction {
    pub model: RfModel,
    pub sinr: Vec<f64>,
    pub sum_rate: f64,
    pub capacity: f64,
}

impl AsymptoticPrediction {
    pub fn new(lb: &LinkBudget, antennas: usize, pdp: &PowerDelayProfile, model: RfModel) -> Self {
        let users = pdp.users();
        let sinr: Vec<f64> = (0..users)
            .map(|u| {
                let col = pdp.column(u);
                match model {
                    RfModel::LTap => prop1_sinr(lb, antennas, users, pdp.taps(), &col),
                    RfModel::OneTap => prop2_sinr(lb, antennas, users, &col),
                }
            })
            .collect();
        let sum_rate = sinr.iter().map(|g| g.ln_1p()).sum::<f64>() / std::f64::consts::LN_2;
        Self {
            model,
            sum_rate,
            capacity: prop4_capacity(lb, antennas, pdp, model),
            sinr,
        }
    }

    /// Sum rate in the noise-free limit.
    pub fn ceiling(antennas: usize, pdp: &PowerDelayProfile, model: RfModel) -> f64 {
        let users = pdp.users();
        (0..users)
            .map(|u| {
                let col = pdp.column(u);
                match model {
                    RfModel::LTap => prop1_ceiling(antennas, users, pdp.taps(), &col),
                    RfModel::OneTap => prop2_ceiling(antennas, users, &col),
                }
                .ln_1p()
            })
            .sum::<f64>()
            / std::f64::consts::LN_2
    }
}
