//! Ladder operators acting on one electronic block in triangular layout.

use num_complex::Complex64;

use crate::model::{block_size, triangle_index};

/// One of the two vibrational modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

fn idx(cutoff: usize, m: usize, n: usize) -> usize {
    triangle_index(cutoff, m, n).expect("index inside triangle")
}

fn zeros(cutoff: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); block_size(cutoff)]
}

/// Apply the annihilation operator of `mode`; the result keeps the same cutoff.
pub fn lower(amps: &[Complex64], cutoff: usize, mode: Mode) -> Vec<Complex64> {
    let mut out = zeros(cutoff);
    for n in 0..=cutoff {
        for m in 0..=(cutoff - n) {
            let (sm, sn, q) = match mode {
                Mode::A => (m + 1, n, m + 1),
                Mode::B => (m, n + 1, n + 1),
            };
            if sm + sn <= cutoff {
                out[idx(cutoff, m, n)] = amps[idx(cutoff, sm, sn)] * (q as f64).sqrt();
            }
        }
    }
    out
}

/// Apply the creation operator of `mode`; the result lives on a block of cutoff + 1,
/// so nothing is lost to truncation.
pub fn raise(amps: &[Complex64], cutoff: usize, mode: Mode) -> Vec<Complex64> {
    let mut out = zeros(cutoff + 1);
    for n in 0..=cutoff {
        for m in 0..=(cutoff - n) {
            let (tm, tn, q) = match mode {
                Mode::A => (m + 1, n, m + 1),
                Mode::B => (m, n + 1, n + 1),
            };
            out[idx(cutoff + 1, tm, tn)] = amps[idx(cutoff, m, n)] * (q as f64).sqrt();
        }
    }
    out
}

/// Copy a block into the layout of a larger cutoff.
pub fn embed(amps: &[Complex64], cutoff: usize, new_cutoff: usize) -> Vec<Complex64> {
    assert!(new_cutoff >= cutoff);
    let mut out = zeros(new_cutoff);
    for n in 0..=cutoff {
        for m in 0..=(cutoff - n) {
            out[idx(new_cutoff, m, n)] = amps[idx(cutoff, m, n)];
        }
    }
    out
}

/// Restrict a block to a smaller cutoff, returning the discarded norm².
pub fn truncate(amps: &[Complex64], cutoff: usize, new_cutoff: usize) -> (Vec<Complex64>, f64) {
    assert!(new_cutoff <= cutoff);
    let mut out = zeros(new_cutoff);
    let mut lost = 0.0;
    for n in 0..=cutoff {
        for m in 0..=(cutoff - n) {
            let v = amps[idx(cutoff, m, n)];
            match triangle_index(new_cutoff, m, n) {
                Some(i) => out[i] = v,
                None => lost += v.norm_sqr(),
            }
        }
    }
    (out, lost)
}

/// Unnormalized `⟨ψ|a|ψ⟩` over the block.
pub fn expect_lower(amps: &[Complex64], cutoff: usize, mode: Mode) -> Complex64 {
    let lowered = lower(amps, cutoff, mode);
    amps.iter().zip(&lowered).map(|(a, b)| a.conj() * b).sum()
}

/// Unnormalized `⟨ψ|a†a|ψ⟩` over the block.
pub fn expect_number(amps: &[Complex64], cutoff: usize, mode: Mode) -> f64 {
    let mut acc = 0.0;
    for n in 0..=cutoff {
        for m in 0..=(cutoff - n) {
            let q = match mode {
                Mode::A => m,
                Mode::B => n,
            };
            acc += q as f64 * amps[idx(cutoff, m, n)].norm_sqr();
        }
    }
    acc
}
