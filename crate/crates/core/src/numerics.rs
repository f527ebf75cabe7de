//! Dense complex linear algebra and tap-sequence transforms.
//!
//! Matrices are small (at most `M x U` with `M` a few thousand), so
//! everything here is a straightforward row-major implementation. Spectra
//! are evaluated directly from the tap sum rather than through an FFT so
//! negative tap offsets need no special handling.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Relative tolerance for Hermitian symmetry and PSD checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative singular-value threshold for [`pinv_tall`].
pub const SINGULAR_TOL: f64 = 1e-10;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: Complex64) {
        assert_eq!(self.shape(), other.shape(), "add_scaled shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// `selfᴴ · self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ci = row[i].conj();
                for (j, x) in row.iter().enumerate().skip(i) {
                    g.data[i * n + j] += ci * x;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i].conj();
            }
        }
        g
    }

    /// `self · selfᴴ`.
    pub fn outer_gram(&self) -> Self {
        let n = self.rows;
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            let ri = self.row(i);
            for j in i..n {
                let rj = self.row(j);
                let s: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                g.data[i * n + j] = s;
                if i != j {
                    g.data[j * n + i] = s.conj();
                }
            }
        }
        g
    }

    /// Magnitude of the largest Hermitian asymmetry `|m_ij - conj(m_ji)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Matrix-valued impulse response: tap `i` sits at delay `offset + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TapSequence {
    offset: i64,
    taps: Vec<ComplexMatrix>,
}

impl TapSequence {
    pub fn new(offset: i64, taps: Vec<ComplexMatrix>) -> Result<Self> {
        let first = taps
            .first()
            .ok_or_else(|| Error::InvalidShape("tap sequence needs at least one tap".into()))?;
        let shape = first.shape();
        if let Some(bad) = taps.iter().find(|t| t.shape() != shape) {
            return Err(Error::InvalidShape(format!(
                "tap of shape {:?} in a sequence of {:?} taps",
                bad.shape(),
                shape
            )));
        }
        Ok(Self { offset, taps })
    }

    pub fn single(tap: ComplexMatrix) -> Self {
        Self {
            offset: 0,
            taps: vec![tap],
        }
    }

    #[inline]
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Delay of the last tap.
    #[inline]
    pub fn last_delay(&self) -> i64 {
        self.offset + self.taps.len() as i64 - 1
    }

    #[inline]
    pub fn span(&self) -> usize {
        self.taps.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.taps[0].shape()
    }

    pub fn taps(&self) -> &[ComplexMatrix] {
        &self.taps
    }

    pub fn into_taps(self) -> Vec<ComplexMatrix> {
        self.taps
    }

    pub fn delays(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.taps.len() as i64).map(move |i| self.offset + i)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &ComplexMatrix)> {
        self.delays().zip(self.taps.iter())
    }

    /// Tap at delay `n`, if inside the support.
    pub fn at(&self, n: i64) -> Option<&ComplexMatrix> {
        let i = n - self.offset;
        if i < 0 {
            None
        } else {
            self.taps.get(i as usize)
        }
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.frobenius_norm().powi(2)).sum()
    }
}

/// Per-subcarrier matrices `k = 0..K-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumGrid {
    mats: Vec<ComplexMatrix>,
}

impl SpectrumGrid {
    pub fn new(mats: Vec<ComplexMatrix>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::InvalidShape("spectrum needs at least one subcarrier".into()))?;
        let shape = first.shape();
        if mats.iter().any(|m| m.shape() != shape) {
            return Err(Error::InvalidShape("subcarrier matrices differ in shape".into()));
        }
        Ok(Self { mats })
    }

    #[inline]
    pub fn num_subcarriers(&self) -> usize {
        self.mats.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mats[0].shape()
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    pub fn at(&self, k: usize) -> &ComplexMatrix {
        &self.mats[k]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexMatrix> {
        self.mats.iter()
    }

    /// Entrywise (per subcarrier) matrix product `self(k) · rhs(k)`.
    pub fn product(&self, rhs: &SpectrumGrid) -> Result<SpectrumGrid> {
        if self.num_subcarriers() != rhs.num_subcarriers() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} subcarriers",
                self.num_subcarriers(),
                rhs.num_subcarriers()
            )));
        }
        if self.shape().1 != rhs.shape().0 {
            return Err(Error::DimensionMismatch(format!(
                "spectrum product {:?} * {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(SpectrumGrid {
            mats: self.mats.iter().zip(&rhs.mats).map(|(a, b)| a * b).collect(),
        })
    }
}

/// `K` roots of unity `exp(-j 2π q / K)`, `q = 0..K-1`.
fn twiddles(k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|q| Complex64::from_polar(1.0, -2.0 * PI * q as f64 / k as f64))
        .collect()
}

/// Frequency response `X(k) = Σ_n x(n) exp(-j2πnk/K)` on `K` subcarriers.
pub fn dft_of_taps(seq: &TapSequence, k: usize) -> Result<SpectrumGrid> {
    if k == 0 || k < seq.span() {
        return Err(Error::SpectralAliasing {
            span: seq.span(),
            subcarriers: k,
        });
    }
    let roots = twiddles(k);
    let (rows, cols) = seq.shape();
    let kk = k as i64;
    let mats = (0..kk)
        .map(|bin| {
            let mut acc = ComplexMatrix::zeros(rows, cols);
            for (n, tap) in seq.iter() {
                // exact phase index keeps the tap sum free of large-argument rounding
                let q = (n * bin).rem_euclid(kk) as usize;
                acc.add_scaled(tap, roots[q]);
            }
            acc
        })
        .collect();
    Ok(SpectrumGrid { mats })
}

/// Convolution `c(n) = Σ_l a(n-l) · b(l)` with offsets tracked.
///
/// The result spans `span(a) + span(b) - 1` delays, which must fit in `K`
/// subcarriers so the linear and circular convolutions agree.
pub fn circular_convolve(a: &TapSequence, b: &TapSequence, k: usize) -> Result<TapSequence> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    if ac != br {
        return Err(Error::DimensionMismatch(format!(
            "convolution of {ar}x{ac} taps with {br}x{bc} taps"
        )));
    }
    let span = a.span() + b.span() - 1;
    if k < span {
        return Err(Error::SpectralAliasing {
            span,
            subcarriers: k,
        });
    }
    let mut taps = vec![ComplexMatrix::zeros(ar, bc); span];
    for (i, ta) in a.taps().iter().enumerate() {
        for (j, tb) in b.taps().iter().enumerate() {
            let prod = ta * tb;
            taps[i + j].add_scaled(&prod, Complex64::new(1.0, 0.0));
        }
    }
    TapSequence::new(a.offset() + b.offset(), taps)
}

/// Cholesky factor `L` with `m = L Lᴴ` of a Hermitian positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    lower: Vec<Complex64>,
}

/// Outcome of factorising a Hermitian matrix that may only be semidefinite.
enum Factor {
    Definite(Cholesky),
    Singular,
}

impl Cholesky {
    /// Factorise a Hermitian PD matrix; non-positive pivots are an error.
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let scale = m.frobenius_norm();
        match factor(m, scale * HERMITIAN_TOL, scale * HERMITIAN_TOL)? {
            Factor::Definite(c) => Ok(c),
            Factor::Singular => Err(Error::SingularChannel),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> Complex64 {
        self.lower[i * self.n + j]
    }

    /// Natural log of the determinant.
    pub fn ln_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l(i, i).re.ln()).sum::<f64>()
    }

    /// Solve `m · X = rhs`.
    pub fn solve(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(rhs.rows(), self.n, "Cholesky solve shape mismatch");
        let n = self.n;
        let mut x = rhs.clone();
        for c in 0..rhs.cols() {
            // forward: L y = b
            for i in 0..n {
                let mut s = x.get(i, c);
                for j in 0..i {
                    s -= self.l(i, j) * x.get(j, c);
                }
                x.set(i, c, s / self.l(i, i).re);
            }
            // back: Lᴴ x = y
            for i in (0..n).rev() {
                let mut s = x.get(i, c);
                for j in i + 1..n {
                    s -= self.l(j, i).conj() * x.get(j, c);
                }
                x.set(i, c, s / self.l(i, i).re);
            }
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let mut inv = self.solve(&ComplexMatrix::identity(self.n));
        // restore exact Hermitian symmetry lost to rounding
        for i in 0..self.n {
            let d = inv.get(i, i);
            inv.set(i, i, Complex64::new(d.re, 0.0));
            for j in 0..i {
                let v = (inv.get(i, j) + inv.get(j, i).conj()) * 0.5;
                inv.set(i, j, v);
                inv.set(j, i, v.conj());
            }
        }
        inv
    }
}

/// Symmetrise and factorise. Pivots below `-neg_tol` mean indefinite, pivots
/// in `[-neg_tol, zero_tol]` mean singular.
fn factor(m: &ComplexMatrix, neg_tol: f64, zero_tol: f64) -> Result<Factor> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    let scale = m.frobenius_norm();
    let tolerance = HERMITIAN_TOL * scale;
    let asymmetry = m.hermitian_asymmetry();
    if asymmetry > tolerance {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance,
        });
    }
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            a[i * n + j] = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
        }
    }
    let mut lower = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for p in 0..j {
            d -= lower[j * n + p].norm_sqr();
        }
        if d < -neg_tol {
            return Err(Error::Indefinite { pivot: d });
        }
        if d <= zero_tol {
            return Ok(Factor::Singular);
        }
        let ljj = d.sqrt();
        lower[j * n + j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= lower[i * n + p] * lower[j * n + p].conj();
            }
            lower[i * n + j] = s / ljj;
        }
    }
    Ok(Factor::Definite(Cholesky { n, lower }))
}

/// `log2 det(m)` of a Hermitian positive semidefinite matrix.
///
/// Small asymmetry (below `1e-10 ‖m‖`) is removed by symmetrising. A
/// singular PSD input yields `-inf`.
pub fn logdet_psd(m: &ComplexMatrix) -> Result<f64> {
    let tol = HERMITIAN_TOL * m.frobenius_norm();
    match factor(m, tol, 0.0)? {
        Factor::Definite(c) => Ok(c.ln_det() / std::f64::consts::LN_2),
        Factor::Singular => Ok(f64::NEG_INFINITY),
    }
}

/// Left pseudo-inverse `(mᴴm)⁻¹mᴴ` of a tall full-column-rank matrix.
pub fn pinv_tall(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows() < m.cols() {
        return Err(Error::InvalidShape(format!(
            "pseudo-inverse needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let gram = m.gram();
    let largest = (0..gram.rows()).map(|i| gram.get(i, i).re).fold(0.0, f64::max);
    if largest <= 0.0 || !largest.is_finite() {
        return Err(Error::SingularChannel);
    }
    // pivots of the Gram factor track squared singular values
    let zero_tol = largest * SINGULAR_TOL * SINGULAR_TOL;
    match factor(&gram, zero_tol, zero_tol) {
        Ok(Factor::Definite(c)) => Ok(c.solve(&m.adjoint())),
        Ok(Factor::Singular) | Err(Error::Indefinite { .. }) => Err(Error::SingularChannel),
        Err(e) => Err(e),
    }
}
