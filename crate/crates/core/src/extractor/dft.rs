//! Prime-length discrete Fourier transforms of value histograms.
//!
//! Convention: `S_r = sum_w c(w) e(r w / p)` with `e(t) = exp(2 pi i t)`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::field::PrimeField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub s: Vec<Complex64>,
    /// `(r, |S_r|)` maximizing `|S_r|` over `r != 0`, smallest `r` on ties.
    pub max_nontrivial: Option<(u64, f64)>,
}

impl SpectrumResult {
    fn from_sums(s: Vec<Complex64>) -> Self {
        let mut best: Option<(u64, f64)> = None;
        for (r, v) in s.iter().enumerate().skip(1) {
            let m = v.norm();
            if best.map_or(true, |(_, b)| m > b) {
                best = Some((r as u64, m));
            }
        }
        SpectrumResult {
            s,
            max_nontrivial: best,
        }
    }
}

/// `e(j / p)` for `j = 0..p`.
fn phase_table(p: u64) -> Vec<Complex64> {
    (0..p)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / p as f64))
        .collect()
}

/// Direct `O(p^2)` evaluation; this defines correctness for the fast path.
pub fn exp_sums_naive(hist: &[u64], field: &PrimeField) -> SpectrumResult {
    let p = field.p();
    assert_eq!(hist.len() as u64, p, "histogram length must be p");
    let table = phase_table(p);
    let support: Vec<(u64, f64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| (w as u64, c as f64))
        .collect();
    let s = (0..p)
        .into_par_iter()
        .map(|r| {
            support
                .iter()
                .map(|&(w, c)| table[(r as u128 * w as u128 % p as u128) as usize] * c)
                .sum()
        })
        .collect();
    SpectrumResult::from_sums(s)
}

/// `O(p log p)` evaluation by Rader's re-indexing: with a generator `g`,
/// `S_{g^a} = c(0) + sum_b c(g^-b) e(g^(a-b) / p)` is a cyclic convolution
/// of length `p - 1`, done with FFTs.
pub fn exp_sums_fast(hist: &[u64], field: &PrimeField) -> SpectrumResult {
    let p = field.p();
    assert_eq!(hist.len() as u64, p, "histogram length must be p");
    let n = (p - 1) as usize;
    let g = field.generator();
    let g_inv = field.inv(g).expect("generator is nonzero");

    let mut u = vec![Complex64::default(); n];
    let mut v = vec![Complex64::default(); n];
    let (mut down, mut up) = (1u64, 1u64);
    for b in 0..n {
        u[b] = Complex64::new(hist[down as usize] as f64, 0.0);
        v[b] = Complex64::from_polar(1.0, std::f64::consts::TAU * up as f64 / p as f64);
        down = field.mul(down, g_inv);
        up = field.mul(up, g);
    }

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fwd.process(&mut u);
    fwd.process(&mut v);
    let mut conv: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
    inv.process(&mut conv);

    let c0 = hist[0] as f64;
    let mut s = vec![Complex64::default(); p as usize];
    s[0] = Complex64::new(hist.iter().map(|&c| c as f64).sum(), 0.0);
    let mut r = 1u64;
    for value in conv {
        s[r as usize] = value / n as f64 + c0;
        r = field.mul(r, g);
    }
    SpectrumResult::from_sums(s)
}

/// Largest `|x - y| / max(|x|, |y|, floor)` over matching entries.
pub fn max_relative_error(x: &[Complex64], y: &[Complex64], floor: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(floor))
        .fold(0.0, f64::max)
}
