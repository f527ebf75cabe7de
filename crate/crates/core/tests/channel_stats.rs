use hybeam::channel::{draw_rich, draw_sparse, exponential_pdp, PowerDelayProfile, SparseChannelConfig, SystemDims};
use hybeam::rng::stream_seed;

fn dims(m: usize, u: usize, l: usize) -> SystemDims {
    SystemDims::new(m, u, l, 2 * l).unwrap()
}

#[test]
fn rich_entry_magnitude_is_rayleigh() {
    // E|CN(0,1)| = √π/2
    let d = dims(200, 4, 1);
    let pdp = PowerDelayProfile::uniform(1, 4);
    let mut total = 0.0;
    let mut n = 0usize;
    for r in 0..50 {
        let ch = draw_rich(d, &pdp, stream_seed(3, "rayleigh", r)).unwrap();
        for z in ch.tap(0).as_slice() {
            total += z.norm();
            n += 1;
        }
    }
    let mean = total / n as f64;
    let expect = std::f64::consts::PI.sqrt() / 2.0;
    assert!((mean / expect - 1.0).abs() < 0.01, "{mean} vs {expect}");
}

#[test]
fn rich_tap_power_follows_profile() {
    let (m, u, l) = (64, 4, 4);
    let pdp = exponential_pdp(l, u);
    let mut power = vec![0.0; l * u];
    let runs = 2000;
    for r in 0..runs {
        let ch = draw_rich(dims(m, u, l), &pdp, stream_seed(5, "pdp", r)).unwrap();
        for tap in 0..l {
            for user in 0..u {
                let p: f64 = (0..m).map(|a| ch.tap(tap).get(a, user).norm_sqr()).sum();
                power[tap * u + user] += p / (m * runs as usize) as f64;
            }
        }
    }
    for tap in 0..l {
        for user in 0..u {
            let d = pdp.gain(tap, user);
            let got = power[tap * u + user];
            assert!((got / d - 1.0).abs() < 0.02, "tap {tap} user {user}: {got} vs {d}");
        }
    }
    // each user's total power is normalized to one per antenna
    for user in 0..u {
        let total: f64 = (0..l).map(|tap| power[tap * u + user]).sum();
        assert!((total - 1.0).abs() < 0.02);
    }
}

#[test]
fn sparse_column_power() {
    let (m, u, l) = (32, 2, 4);
    let pdp = exponential_pdp(l, u);
    let cfg = SparseChannelConfig::new(l, 5);
    let runs = 2000;
    let mut power = vec![0.0; l * u];
    for r in 0..runs {
        let ch = draw_sparse(dims(m, u, l), &pdp, &cfg, stream_seed(8, "sparse", r)).unwrap();
        for tap in 0..l {
            for user in 0..u {
                let p: f64 = (0..m).map(|a| ch.tap(tap).get(a, user).norm_sqr()).sum();
                power[tap * u + user] += p / runs as f64;
            }
        }
    }
    for tap in 0..l {
        for user in 0..u {
            let expect = m as f64 * pdp.gain(tap, user) / l as f64;
            let got = power[tap * u + user];
            assert!((got / expect - 1.0).abs() < 0.03, "tap {tap} user {user}: {got} vs {expect}");
        }
    }
}

#[test]
fn streams_of_different_seeds_are_uncorrelated() {
    let d = dims(256, 4, 2);
    let pdp = PowerDelayProfile::uniform(2, 4);
    let a = draw_rich(d, &pdp, stream_seed(1, "channel", 0)).unwrap();
    let b = draw_rich(d, &pdp, stream_seed(1, "channel", 1)).unwrap();
    let (mut cross, mut ea, mut eb) = (hybeam::Complex64::new(0.0, 0.0), 0.0, 0.0);
    for l in 0..2 {
        for (x, y) in a.tap(l).as_slice().iter().zip(b.tap(l).as_slice()) {
            cross += x * y.conj();
            ea += x.norm_sqr();
            eb += y.norm_sqr();
        }
    }
    let rho = cross.norm() / (ea * eb).sqrt();
    assert!(rho < 0.05, "{rho}");
}

#[test]
fn sparse_channel_is_low_rank_per_cluster() {
    // one path per cluster gives a steering vector in every column
    let (m, u, l) = (16, 3, 2);
    let pdp = PowerDelayProfile::uniform(l, u);
    let ch = draw_sparse(dims(m, u, l), &pdp, &SparseChannelConfig::new(l, 1), 11).unwrap();
    for tap in 0..l {
        for user in 0..u {
            let col: Vec<_> = (0..m).map(|a| ch.tap(tap).get(a, user)).collect();
            let mag = col[0].norm();
            assert!(col.iter().all(|z| (z.norm() - mag).abs() < 1e-12));
        }
    }
}
