mod common;

use common::{from_na, max_diff, to_na};
use hybeam::beamforming::{effective_channel, mf_combiner, rf_1tap, rf_ltap, zf_baseband, CombinerIR};
use hybeam::channel::{channel_spectrum, draw_rich, exponential_pdp, ChannelRealization, SystemDims};
use hybeam::metrics::{
    achievable_rate_hybrid, capacity, capacity_curve, digital_zf_powers, linear_sum_rate, pdp_of_effective,
    rms_delay_spread, sinr_from_pdp, LinkBudget,
};
use hybeam::numerics::{dft_of_taps, SpectrumGrid};
use hybeam::rng::stream_seed;
use hybeam::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;

fn channel(m: usize, u: usize, l: usize, k: usize, seed: u64) -> ChannelRealization {
    let dims = SystemDims::new(m, u, l, k).unwrap();
    draw_rich(dims, &exponential_pdp(l, u), seed).unwrap()
}

/// `(1/K) Σ_k log2 det(I + ρ Σ⁻¹ G Gᴴ)` evaluated literally with LU.
fn hybrid_rate_oracle(gain: &SpectrumGrid, noise: &SpectrumGrid, rho: f64) -> f64 {
    let mut total = 0.0;
    for (g, s) in gain.iter().zip(noise.iter()) {
        let g = to_na(g);
        let s_inv = to_na(s).try_inverse().unwrap();
        let n = g.nrows();
        let m = DMatrix::<Complex64>::identity(n, n) + (s_inv * &g * g.adjoint()).scale(rho);
        total += m.determinant().re.log2();
    }
    total / gain.num_subcarriers() as f64
}

#[test]
fn capacity_matches_eigenvalue_oracle() {
    let k = 8;
    for r in 0..10 {
        let ch = channel(6, 3, 2, k, stream_seed(1, "cap", r));
        let spec = channel_spectrum(&ch, k).unwrap();
        for snr in [-10.0, 0.0, 20.0] {
            let lb = LinkBudget::from_snr_db(snr).unwrap();
            let oracle: f64 = spec
                .iter()
                .map(|h| {
                    let g = to_na(h).adjoint() * to_na(h);
                    g.symmetric_eigenvalues().iter().map(|l| (1.0 + lb.rho() * l).log2()).sum::<f64>()
                })
                .sum::<f64>()
                / k as f64;
            let ours = capacity(&spec, &lb).unwrap();
            assert!((ours - oracle).abs() < 1e-10 * (1.0 + oracle), "{ours} vs {oracle}");
        }
    }
}

#[test]
fn hybrid_rate_matches_literal_formula() {
    let k = 16;
    let lb = LinkBudget::from_snr_db(5.0).unwrap();
    for r in 0..8 {
        let ch = channel(12, 3, 3, k, stream_seed(2, "eq2", r));
        for w in [rf_ltap(&ch).unwrap(), rf_1tap(&ch, 0).unwrap(), mf_combiner(&ch).unwrap()] {
            let eff = effective_channel(&w, &ch, k).unwrap();
            let bb = zf_baseband(&eff).unwrap();
            let gain = bb.product(&eff.spectrum).unwrap();
            let noise: Vec<_> = bb
                .iter()
                .zip(eff.noise_cov_spectrum.iter())
                .map(|(b, c)| &(b * c) * &b.adjoint())
                .collect();
            let oracle = hybrid_rate_oracle(&gain, &SpectrumGrid::new(noise).unwrap(), lb.rho());
            let with_bb = achievable_rate_hybrid(&eff, Some(&bb), &lb).unwrap();
            let without = achievable_rate_hybrid(&eff, None, &lb).unwrap();
            assert!((with_bb - oracle).abs() < 1e-9 * oracle);
            // an invertible baseband stage does not change the joint bound
            assert!((with_bb - without).abs() < 1e-9 * oracle);
        }
    }
}

#[test]
fn rates_respect_the_data_processing_order() {
    let k = 16;
    for r in 0..10 {
        let ch = channel(16, 4, 4, k, stream_seed(3, "dpi", r));
        let spec = channel_spectrum(&ch, k).unwrap();
        for snr in [-10.0, 10.0, 30.0] {
            let lb = LinkBudget::from_snr_db(snr).unwrap();
            let c = capacity(&spec, &lb).unwrap();
            let zf = digital_zf_powers(&spec).unwrap().sum_rate(&lb);
            assert!(zf <= c * (1.0 + 1e-12));
            for w in [rf_ltap(&ch).unwrap(), rf_1tap(&ch, 0).unwrap()] {
                let eff = effective_channel(&w, &ch, k).unwrap();
                let bound = achievable_rate_hybrid(&eff, None, &lb).unwrap();
                let bb = zf_baseband(&eff).unwrap();
                let linear = linear_sum_rate(&eff, Some(&bb), &lb).unwrap();
                assert!(bound <= c * (1.0 + 1e-12), "{bound} > {c}");
                assert!(linear <= bound * (1.0 + 1e-12));
            }
        }
    }
}

fn instance() -> impl Strategy<Value = (usize, usize, usize, usize, u64, f64, u8)> {
    (1usize..5, 1usize..5)
        .prop_flat_map(|(u, l)| (u..17, Just(u), Just(l), (2 * l - 1)..(2 * l + 8), any::<u64>(), -10.0f64..30.0, 0u8..3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn time_and_frequency_capacities_agree((m, u, l, k, seed, snr, which) in instance()) {
        let ch = channel(m, u, l, k, seed);
        let w: CombinerIR = match which {
            0 => rf_ltap(&ch).unwrap(),
            1 => rf_1tap(&ch, 0).unwrap(),
            _ => mf_combiner(&ch).unwrap(),
        };
        let lb = LinkBudget::from_snr_db(snr).unwrap();
        let eff = effective_channel(&w, &ch, k).unwrap();
        let from_taps = capacity(&eff.spectrum, &lb).unwrap();
        let product = dft_of_taps(&w.taps, k).unwrap().product(&channel_spectrum(&ch, k).unwrap()).unwrap();
        let from_product = capacity(&product, &lb).unwrap();
        prop_assert!((from_taps - from_product).abs() < 1e-10 * (1.0 + from_product));
        for (a, b) in eff.spectrum.iter().zip(product.iter()) {
            prop_assert!(max_diff(a, b) < 1e-10);
        }
    }

    #[test]
    fn capacity_grows_with_snr((m, u, l, k, seed, snr, _) in instance()) {
        let ch = channel(m, u, l, k, seed);
        let spec = channel_spectrum(&ch, k).unwrap();
        let budgets: Vec<LinkBudget> = [snr, snr + 1.0, snr + 5.0]
            .iter()
            .map(|&s| LinkBudget::from_snr_db(s).unwrap())
            .collect();
        let c = capacity_curve(&spec, &budgets).unwrap();
        prop_assert!(c[0] >= 0.0 && c[0] <= c[1] && c[1] <= c[2]);
    }

    #[test]
    fn rms_spread_is_scale_and_shift_invariant(
        p in prop::collection::vec(0.0f64..1.0, 1..8), scale in 1e-3f64..1e3, shift in -20i64..20
    ) {
        prop_assume!(p.iter().sum::<f64>() > 1e-6);
        let base = rms_delay_spread(0, &p).unwrap();
        let scaled: Vec<f64> = p.iter().map(|x| x * scale).collect();
        let moved = rms_delay_spread(shift, &scaled).unwrap();
        prop_assert!((moved.rms - base.rms).abs() < 1e-9 * (1.0 + base.rms));
        prop_assert!((moved.mean - base.mean - shift as f64).abs() < 1e-9 * (1.0 + base.mean.abs() + shift.abs() as f64));
    }
}

#[test]
fn nalgebra_round_trip_helper() {
    let ch = channel(4, 2, 1, 2, 1);
    assert_eq!(from_na(&to_na(ch.tap(0))), *ch.tap(0));
}

struct Terms {
    signal: Vec<f64>,
    isi: Vec<f64>,
    mui: Vec<f64>,
}

fn mean_terms(m: usize, runs: usize, one_tap: bool) -> Terms {
    let (u, l, k) = (4, 4, 8);
    let lb = LinkBudget::new(1.0, 1.0).unwrap();
    let mut t = Terms {
        signal: vec![0.0; u],
        isi: vec![0.0; u],
        mui: vec![0.0; u],
    };
    for r in 0..runs {
        let ch = channel(m, u, l, k, stream_seed(12, "pdp-mc", r as u64));
        let w = if one_tap { rf_1tap(&ch, 0).unwrap() } else { rf_ltap(&ch).unwrap() };
        let eff = effective_channel(&w, &ch, k).unwrap();
        let b = sinr_from_pdp(&pdp_of_effective(&eff), &w.noise_gain(), &lb).unwrap();
        for (i, s) in b.users.iter().enumerate() {
            t.signal[i] += s.signal / runs as f64;
            t.isi[i] += s.isi / runs as f64;
            t.mui[i] += s.mui / runs as f64;
        }
    }
    t
}

#[test]
fn l_tap_pdp_terms_match_expectations() {
    // E S = (πM/4)(Σ√d)² + (1 - π/4) and E(ISI + MUI) = UL - 1 exactly
    let m = 50;
    let pdp = exponential_pdp(4, 4);
    let t = mean_terms(m, 400, false);
    for u in 0..4 {
        let coh: f64 = pdp.column(u).iter().map(|d| d.sqrt()).sum::<f64>().powi(2);
        let es = PI * m as f64 / 4.0 * coh + (1.0 - PI / 4.0);
        assert!((t.signal[u] / es - 1.0).abs() < 0.03, "user {u}: {} vs {es}", t.signal[u]);
        let interference = t.isi[u] + t.mui[u];
        assert!((interference / 15.0 - 1.0).abs() < 0.03, "user {u}: {interference}");
    }
}

#[test]
fn one_tap_pdp_terms_match_expectations() {
    // E S = (πM/4 + 1 - π/4) d_0, E ISI = Σ_{l≥1} d_l, E MUI = U - 1
    let m = 50;
    let pdp = exponential_pdp(4, 4);
    let t = mean_terms(m, 400, true);
    for u in 0..4 {
        let col = pdp.column(u);
        let es = (PI * m as f64 / 4.0 + 1.0 - PI / 4.0) * col[0];
        let eisi: f64 = col[1..].iter().sum();
        assert!((t.signal[u] / es - 1.0).abs() < 0.03, "user {u}");
        assert!((t.isi[u] / eisi - 1.0).abs() < 0.05, "user {u}: {} vs {eisi}", t.isi[u]);
        assert!((t.mui[u] / 3.0 - 1.0).abs() < 0.03, "user {u}: {}", t.mui[u]);
    }
}
