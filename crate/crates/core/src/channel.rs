//! Frequency-selective uplink channels.
//!
//! Tap `l` of a realization is an `M x U` matrix. Two models are provided:
//! rich scattering (`H_l = G_l · D_l^{1/2}`, `G_l` i.i.d. `CN(0, 1)`) and a
//! clustered geometric model on a uniform linear array where each tap is one
//! cluster of `N_sc` Laplacian-spread paths.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use num_complex::Complex64;

use crate::numerics::{dft_of_taps, ComplexMatrix, SpectrumGrid, TapSequence};
use crate::rng::StreamRng;
use crate::{Error, Result};

/// Antenna, user, tap and subcarrier counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SystemDims {
    pub antennas: usize,
    pub users: usize,
    pub taps: usize,
    pub subcarriers: usize,
}

impl SystemDims {
    pub fn new(antennas: usize, users: usize, taps: usize, subcarriers: usize) -> Result<Self> {
        let dims = Self {
            antennas,
            users,
            taps,
            subcarriers,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.antennas < self.users {
            return Err(Error::InvalidParameter(format!(
                "need M >= U >= 1, got M={} U={}",
                self.antennas, self.users
            )));
        }
        if self.taps == 0 {
            return Err(Error::InvalidParameter("need L >= 1".into()));
        }
        if self.subcarriers < 2 * self.taps - 1 {
            return Err(Error::InvalidParameter(format!(
                "need K >= 2L-1 = {}, got K={}",
                2 * self.taps - 1,
                self.subcarriers
            )));
        }
        Ok(())
    }
}

/// Slow-fading tap gains `d_{lu}`, one normalised column per user.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDelayProfile {
    taps: usize,
    users: usize,
    // row-major taps x users
    gains: Vec<f64>,
}

impl PowerDelayProfile {
    pub fn new(taps: usize, users: usize, gains: Vec<f64>) -> Result<Self> {
        if taps == 0 || users == 0 || gains.len() != taps * users {
            return Err(Error::InvalidShape(format!(
                "{} gains for a {taps}x{users} profile",
                gains.len()
            )));
        }
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidParameter("profile gains must be finite and >= 0".into()));
        }
        let pdp = Self { taps, users, gains };
        for u in 0..users {
            let s: f64 = pdp.column(u).iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "profile column {u} sums to {s}, expected 1"
                )));
            }
        }
        Ok(pdp)
    }

    /// Equal power on every tap for every user.
    pub fn uniform(taps: usize, users: usize) -> Self {
        Self {
            taps,
            users,
            gains: vec![1.0 / taps as f64; taps * users],
        }
    }

    #[inline]
    pub fn taps(&self) -> usize {
        self.taps
    }

    #[inline]
    pub fn users(&self) -> usize {
        self.users
    }

    #[inline]
    pub fn gain(&self, tap: usize, user: usize) -> f64 {
        self.gains[tap * self.users + user]
    }

    pub fn column(&self, user: usize) -> Vec<f64> {
        (0..self.taps).map(|l| self.gain(l, user)).collect()
    }
}

/// Exponential decay `d_{lu} ∝ exp(-ψ_u l)` with `ψ_u = (u-1)/5` (1-based `u`).
pub fn exponential_pdp(taps: usize, users: usize) -> PowerDelayProfile {
    let mut gains = vec![0.0; taps * users];
    for u in 0..users {
        let psi = u as f64 / 5.0;
        let raw: Vec<f64> = (0..taps).map(|l| (-psi * l as f64).exp()).collect();
        let total: f64 = raw.iter().sum();
        for (l, r) in raw.iter().enumerate() {
            gains[l * users + u] = r / total;
        }
    }
    PowerDelayProfile { taps, users, gains }
}

/// Parameters of the clustered geometric model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseChannelConfig {
    pub clusters: usize,
    pub mpcs_per_cluster: usize,
    /// Laplacian standard deviation of path angles around the cluster centre.
    pub angular_spread_deg: f64,
    /// Antenna spacing over wavelength `d/λ`.
    pub spacing_ratio: f64,
}

impl SparseChannelConfig {
    pub fn new(clusters: usize, mpcs_per_cluster: usize) -> Self {
        Self {
            clusters,
            mpcs_per_cluster,
            angular_spread_deg: 10.0,
            spacing_ratio: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mpcs_per_cluster == 0 {
            return Err(Error::InvalidParameter("need at least one path per cluster".into()));
        }
        if !(self.angular_spread_deg > 0.0 && self.angular_spread_deg.is_finite()) {
            return Err(Error::InvalidParameter("angular spread must be positive".into()));
        }
        if !self.spacing_ratio.is_finite() {
            return Err(Error::InvalidParameter("antenna spacing must be finite".into()));
        }
        Ok(())
    }
}

/// Which propagation model to draw from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelModel {
    Rich,
    Sparse(SparseChannelConfig),
}

impl ChannelModel {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Rich => "rich",
            ChannelModel::Sparse(_) => "sparse",
        }
    }
}

/// One channel draw: `L` taps of shape `M x U` at delays `0..L-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub dims: SystemDims,
    pub taps: TapSequence,
    pub pdp: PowerDelayProfile,
}

impl ChannelRealization {
    pub fn new(dims: SystemDims, taps: TapSequence, pdp: PowerDelayProfile) -> Result<Self> {
        if taps.offset() != 0 || taps.span() != dims.taps {
            return Err(Error::InvalidShape(format!(
                "channel needs {} taps from delay 0, got {} from {}",
                dims.taps,
                taps.span(),
                taps.offset()
            )));
        }
        if taps.shape() != (dims.antennas, dims.users) {
            return Err(Error::InvalidShape(format!(
                "channel taps are {:?}, expected {}x{}",
                taps.shape(),
                dims.antennas,
                dims.users
            )));
        }
        check_pdp(&dims, &pdp)?;
        Ok(Self { dims, taps, pdp })
    }

    #[inline]
    pub fn tap(&self, l: usize) -> &ComplexMatrix {
        &self.taps.taps()[l]
    }

    /// Dump as text: one `key=value` header line then `l m u re im` rows.
    pub fn write_dump<W: Write>(&self, mut out: W, seed: u64, model: &str) -> io::Result<()> {
        writeln!(
            out,
            "M={} U={} L={} seed={} model={}",
            self.dims.antennas, self.dims.users, self.dims.taps, seed, model
        )?;
        for (l, tap) in self.taps.taps().iter().enumerate() {
            for m in 0..tap.rows() {
                for u in 0..tap.cols() {
                    let z = tap.get(m, u);
                    writeln!(out, "{l} {m} {u} {:.16e} {:.16e}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

fn check_pdp(dims: &SystemDims, pdp: &PowerDelayProfile) -> Result<()> {
    if pdp.taps() != dims.taps || pdp.users() != dims.users {
        return Err(Error::DimensionMismatch(format!(
            "profile is {}x{}, dims need {}x{}",
            pdp.taps(),
            pdp.users(),
            dims.taps,
            dims.users
        )));
    }
    Ok(())
}

/// Header and taps recovered from a channel dump.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelDump {
    pub antennas: usize,
    pub users: usize,
    pub taps: Vec<ComplexMatrix>,
    pub seed: u64,
    pub model: String,
}

impl ChannelDump {
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("channel dump: {msg}"));
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty file".into()))?
            .map_err(|e| bad(e.to_string()))?;
        let mut fields = std::collections::HashMap::new();
        for kv in header.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad header field {kv}")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        fn take<T: FromStr>(
            f: &std::collections::HashMap<String, String>,
            key: &str,
        ) -> std::result::Result<T, String> {
            f.get(key)
                .ok_or_else(|| format!("missing {key}"))?
                .parse()
                .map_err(|_| format!("bad {key}"))
        }
        let antennas: usize = take(&fields, "M").map_err(bad)?;
        let users: usize = take(&fields, "U").map_err(bad)?;
        let l: usize = take(&fields, "L").map_err(bad)?;
        let seed: u64 = take(&fields, "seed").map_err(bad)?;
        let model: String = take(&fields, "model").map_err(bad)?;
        let mut taps = vec![ComplexMatrix::zeros(antennas, users); l];
        let mut count = 0usize;
        for line in lines {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(bad(format!("bad row {line:?}")));
            }
            let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad index {s}")));
            let val = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad value {s}")));
            let (li, mi, ui) = (idx(parts[0])?, idx(parts[1])?, idx(parts[2])?);
            if li >= l || mi >= antennas || ui >= users {
                return Err(bad(format!("row out of range {line:?}")));
            }
            taps[li].set(mi, ui, Complex64::new(val(parts[3])?, val(parts[4])?));
            count += 1;
        }
        if count != l * antennas * users {
            return Err(bad(format!("expected {} rows, got {count}", l * antennas * users)));
        }
        Ok(Self {
            antennas,
            users,
            taps,
            seed,
            model,
        })
    }
}

/// Rich-scattering draw: entries of tap `l`, column `u` are `CN(0, d_{lu})`.
pub fn draw_rich(dims: SystemDims, pdp: &PowerDelayProfile, seed: u64) -> Result<ChannelRealization> {
    dims.validate()?;
    check_pdp(&dims, pdp)?;
    let mut rng = StreamRng::new(seed);
    let taps = (0..dims.taps)
        .map(|l| {
            let amp: Vec<f64> = (0..dims.users).map(|u| pdp.gain(l, u).sqrt()).collect();
            ComplexMatrix::from_fn(dims.antennas, dims.users, |_, u| rng.complex_normal() * amp[u])
        })
        .collect();
    ChannelRealization::new(dims, TapSequence::new(0, taps)?, pdp.clone())
}

/// Unit-norm ULA response `(1/√M) exp(j 2π (d/λ) m cos φ)`, `m = 0..M-1`.
pub fn steering_vector(antennas: usize, phi: f64, spacing_ratio: f64) -> ComplexMatrix {
    let amp = 1.0 / (antennas as f64).sqrt();
    let step = 2.0 * PI * spacing_ratio * phi.cos();
    ComplexMatrix::from_fn(antennas, 1, |m, _| Complex64::from_polar(amp, step * m as f64))
}

/// Clustered geometric draw.
///
/// Column `u` of tap `l` is `√(M/(L N_sc)) Σ_i β_{liu} a(φ_{liu})` with
/// `β ~ CN(0, d_{lu})`, a uniform cluster centre on `[0, 2π)` and path
/// offsets Laplacian with standard deviation `angular_spread_deg`.
pub fn draw_sparse(
    dims: SystemDims,
    pdp: &PowerDelayProfile,
    cfg: &SparseChannelConfig,
    seed: u64,
) -> Result<ChannelRealization> {
    dims.validate()?;
    check_pdp(&dims, pdp)?;
    cfg.validate()?;
    if cfg.clusters != dims.taps {
        return Err(Error::InvalidParameter(format!(
            "sparse model needs one cluster per tap: {} clusters, L={}",
            cfg.clusters, dims.taps
        )));
    }
    let mut rng = StreamRng::new(seed);
    let m = dims.antennas;
    let scale = (m as f64 / (dims.taps * cfg.mpcs_per_cluster) as f64).sqrt();
    let laplace_scale = cfg.angular_spread_deg.to_radians() / 2f64.sqrt();
    let mut taps = vec![ComplexMatrix::zeros(m, dims.users); dims.taps];
    for (l, tap) in taps.iter_mut().enumerate() {
        for u in 0..dims.users {
            let centre = 2.0 * PI * rng.uniform();
            let amp = pdp.gain(l, u).sqrt();
            for _ in 0..cfg.mpcs_per_cluster {
                let phi = centre + rng.laplacian(laplace_scale);
                let beta = rng.complex_normal() * amp * scale;
                let a = steering_vector(m, phi, cfg.spacing_ratio);
                for row in 0..m {
                    let v = tap.get(row, u) + beta * a.get(row, 0);
                    tap.set(row, u, v);
                }
            }
        }
    }
    ChannelRealization::new(dims, TapSequence::new(0, taps)?, pdp.clone())
}

/// Draw from either model.
pub fn draw(
    model: &ChannelModel,
    dims: SystemDims,
    pdp: &PowerDelayProfile,
    seed: u64,
) -> Result<ChannelRealization> {
    match model {
        ChannelModel::Rich => draw_rich(dims, pdp, seed),
        ChannelModel::Sparse(cfg) => draw_sparse(dims, pdp, cfg, seed),
    }
}

/// Frequency response `H̃(k)` of the channel on `K` subcarriers.
pub fn channel_spectrum(ch: &ChannelRealization, k: usize) -> Result<SpectrumGrid> {
    dft_of_taps(&ch.taps, k)
}

impl fmt::Display for SystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M={} U={} L={} K={}",
            self.antennas, self.users, self.taps, self.subcarriers
        )
    }
}
