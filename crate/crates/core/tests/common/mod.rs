#![allow(dead_code)]

use hybeam::numerics::{ComplexMatrix, TapSequence};
use hybeam::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

pub fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m.get(r, c))
}

pub fn from_na(m: &DMatrix<Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        let data = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        ComplexMatrix::from_vec(rows, cols, data).unwrap()
    })
}

pub fn taps(rows: usize, cols: usize, span: usize, offset: i64) -> impl Strategy<Value = TapSequence> {
    prop::collection::vec(matrix(rows, cols), span).prop_map(move |t| TapSequence::new(offset, t).unwrap())
}

/// Textbook DFT `Σ_n W(n) exp(-j2πnk/K)` with float phase arguments.
pub fn naive_dft(seq: &TapSequence, k: usize) -> Vec<ComplexMatrix> {
    let (rows, cols) = seq.shape();
    (0..k)
        .map(|bin| {
            let mut acc = ComplexMatrix::zeros(rows, cols);
            for (n, tap) in seq.iter() {
                let angle = -2.0 * std::f64::consts::PI * (n as f64) * (bin as f64) / k as f64;
                acc.add_scaled(tap, Complex64::new(angle.cos(), angle.sin()));
            }
            acc
        })
        .collect()
}
