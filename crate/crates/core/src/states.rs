//! Initial nuclear wavepackets: coherent states, rotated-mode coherent states and
//! rotated-mode Fock states on any electronic surface.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::franck_condon::MAX_QUANTA;
use crate::ladder::{self, Mode};
use crate::model::{block_size, DimerParams, Electronic, StateVector, VibronicBasis};

/// Largest norm loss to truncation tolerated by [`coherent_state`].
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Reference point of coherent amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Relative to the minimum of the surface the state lives on.
    Surface,
    /// Relative to the ground-state potential minimum at the origin.
    Ground,
}

/// Two-mode coherent state `|α⟩_a |β⟩_b` on electronic surface `state`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSpec {
    pub state: Electronic,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub frame: Frame,
}

impl CoherentSpec {
    pub fn surface(state: Electronic, alpha: Complex64, beta: Complex64) -> Self {
        CoherentSpec { state, alpha, beta, frame: Frame::Surface }
    }

    pub fn ground(state: Electronic, alpha: Complex64, beta: Complex64) -> Self {
        CoherentSpec { state, alpha, beta, frame: Frame::Ground }
    }

    /// The ground vibrational state of surface 0 placed vertically on `state`.
    pub fn franck_condon(state: Electronic) -> Self {
        Self::ground(state, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Same state with amplitudes expressed in `frame`.
    pub fn in_frame(&self, frame: Frame, params: &DimerParams) -> Self {
        if frame == self.frame {
            return *self;
        }
        let (da, db) = params.amplitude_center(self.state);
        let sign = match frame {
            Frame::Ground => 1.0,
            Frame::Surface => -1.0,
        };
        CoherentSpec {
            state: self.state,
            alpha: self.alpha + sign * da,
            beta: self.beta + sign * db,
            frame,
        }
    }
}

/// Coherent amplitudes `e^{−|α|²/2} α^k/√k!` for `k = 0..=max`.
fn coherent_series(alpha: Complex64, max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut v = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 0..=max {
        out.push(v);
        v = v * alpha / ((k + 1) as f64).sqrt();
    }
    out
}

/// Smallest cutoff for which a coherent state with `|α|² + |β|² = mean` loses at
/// most `tol` of its norm. The total quanta are Poisson distributed.
pub fn required_cutoff(mean: f64, tol: f64) -> usize {
    let mut term = (-mean).exp();
    let mut cdf = term;
    let mut k = 0;
    while 1.0 - cdf > tol && k < MAX_QUANTA {
        k += 1;
        term *= mean / k as f64;
        cdf += term;
    }
    k
}

/// Coherent block amplitudes at `cutoff` and the norm lost to truncation.
pub fn coherent_block(alpha: Complex64, beta: Complex64, cutoff: usize) -> (Vec<Complex64>, f64) {
    let sa = coherent_series(alpha, cutoff);
    let sb = coherent_series(beta, cutoff);
    let mut out = Vec::with_capacity(block_size(cutoff));
    for n in 0..=cutoff {
        for m in 0..=(cutoff - n) {
            out.push(sa[m] * sb[n]);
        }
    }
    let kept: f64 = out.iter().map(|c| c.norm_sqr()).sum();
    (out, (1.0 - kept).max(0.0))
}

/// Normalized coherent state, rejected when truncation drops more than
/// [`TRUNCATION_TOLERANCE`] of the norm.
pub fn coherent_state(spec: &CoherentSpec, basis: &Arc<VibronicBasis>, params: &DimerParams) -> Result<StateVector> {
    coherent_state_with_tolerance(spec, basis, params, TRUNCATION_TOLERANCE)
}

/// As [`coherent_state`] with a caller-chosen loss tolerance. The kept part is
/// renormalized.
pub fn coherent_state_with_tolerance(
    spec: &CoherentSpec,
    basis: &Arc<VibronicBasis>,
    params: &DimerParams,
    tol: f64,
) -> Result<StateVector> {
    let range = basis.require_block(spec.state)?;
    let local = spec.in_frame(Frame::Surface, params);
    let cutoff = basis.cutoff();
    let (block, loss) = coherent_block(local.alpha, local.beta, cutoff);
    if loss > tol {
        let mean = local.alpha.norm_sqr() + local.beta.norm_sqr();
        return Err(Error::Truncation { loss, cutoff, required: required_cutoff(mean, tol) });
    }
    let mut psi = StateVector::zeros(basis);
    psi.amplitudes_mut()[range].copy_from_slice(&block);
    psi.normalized()
}

/// Direction of a rotated-mode excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ModeA,
    ModeB,
    /// Along `q_∥ = (q_a + q_b)/√2`.
    Parallel,
    /// Along `q_⊥ = (−q_a + q_b)/√2`.
    Perpendicular,
    /// Equal-amplitude quadrature motion of both modes.
    Circular,
}

/// Coherent excitation of total amplitude `gamma` (so `gamma²` quanta) with phase
/// `phase`, relative to the host surface minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotatedSpec {
    pub direction: Direction,
    pub gamma: f64,
    pub phase: f64,
}

impl RotatedSpec {
    /// Surface-frame amplitudes `(α, β)`.
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        let z = Complex64::from_polar(self.gamma, self.phase);
        let zero = Complex64::new(0.0, 0.0);
        match self.direction {
            Direction::ModeA => (z, zero),
            Direction::ModeB => (zero, z),
            Direction::Parallel => (z * FRAC_1_SQRT_2, z * FRAC_1_SQRT_2),
            Direction::Perpendicular => (-z * FRAC_1_SQRT_2, z * FRAC_1_SQRT_2),
            Direction::Circular => (z * FRAC_1_SQRT_2, Complex64::i() * z * FRAC_1_SQRT_2),
        }
    }

    pub fn coherent_spec(&self, state: Electronic) -> CoherentSpec {
        let (alpha, beta) = self.amplitudes();
        CoherentSpec::surface(state, alpha, beta)
    }
}

pub fn rotated_coherent(
    spec: &RotatedSpec,
    state: Electronic,
    basis: &Arc<VibronicBasis>,
    params: &DimerParams,
) -> Result<StateVector> {
    coherent_state(&spec.coherent_spec(state), basis, params)
}

/// `(a†_∥)^P (a†_⊥)^Q |j,0,0⟩`, normalized, with `a†_∥ = (a†_a + a†_b)/√2` and
/// `a†_⊥ = (−a†_a + a†_b)/√2`.
pub fn fock_rotated(p: usize, q: usize, state: Electronic, basis: &Arc<VibronicBasis>) -> Result<StateVector> {
    let range = basis.require_block(state)?;
    if p + q > basis.cutoff() {
        return Err(Error::CutoffOverflow { cutoff: basis.cutoff() });
    }
    let mut block = vec![Complex64::new(1.0, 0.0)];
    let mut cutoff = 0;
    let step = |block: &[Complex64], cutoff: usize, sign_a: f64| -> Vec<Complex64> {
        let ua = ladder::raise(block, cutoff, Mode::A);
        let ub = ladder::raise(block, cutoff, Mode::B);
        ua.iter().zip(&ub).map(|(a, b)| (a * sign_a + b) * FRAC_1_SQRT_2).collect()
    };
    for _ in 0..p {
        block = step(&block, cutoff, 1.0);
        cutoff += 1;
    }
    for _ in 0..q {
        block = step(&block, cutoff, -1.0);
        cutoff += 1;
    }
    let block = ladder::embed(&block, cutoff, basis.cutoff());
    let mut psi = StateVector::zeros(basis);
    psi.amplitudes_mut()[range].copy_from_slice(&block);
    psi.normalized()
}

/// Amplitudes as `j,M,N,re,im` lines in basis order.
pub fn write_state_csv<W: Write>(psi: &StateVector, mut out: W) -> io::Result<()> {
    writeln!(out, "j,M,N,re,im")?;
    for (e, a) in psi.basis().entries().iter().zip(psi.amplitudes()) {
        writeln!(out, "{},{},{},{:.16e},{:.16e}", e.state.label(), e.m, e.n, a.re, a.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_is_number_state() {
        let basis = VibronicBasis::full(5);
        let p = DimerParams::default();
        let psi = coherent_state(&CoherentSpec::surface(Electronic::Acceptor, c(0.0, 0.0), c(0.0, 0.0)), &basis, &p)
            .unwrap();
        let expect = StateVector::basis_state(&basis, Electronic::Acceptor, 0, 0).unwrap();
        assert_eq!(psi, expect);
    }

    #[test]
    fn franck_condon_state_sits_minus_delta_from_donor() {
        let p = DimerParams::default();
        let spec = CoherentSpec::franck_condon(Electronic::Donor).in_frame(Frame::Surface, &p);
        assert!((spec.alpha - c(-p.delta(), 0.0)).norm() < 1e-15);
        assert_eq!(spec.beta, c(0.0, 0.0));
        let back = spec.in_frame(Frame::Ground, &p);
        assert!((back.alpha).norm() < 1e-15);
    }

    #[test]
    fn truncation_is_reported_with_hint() {
        let p = DimerParams::default();
        let basis = VibronicBasis::one_exciton(6);
        let err = coherent_state(&CoherentSpec::franck_condon(Electronic::Donor), &basis, &p).unwrap_err();
        match err {
            Error::Truncation { required, cutoff, .. } => {
                assert_eq!(cutoff, 6);
                let fine = VibronicBasis::one_exciton(required);
                assert!(coherent_state(&CoherentSpec::franck_condon(Electronic::Donor), &fine, &p).is_ok());
                let short = VibronicBasis::one_exciton(required - 1);
                assert!(coherent_state(&CoherentSpec::franck_condon(Electronic::Donor), &short, &p).is_err());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rotated_amplitudes() {
        let g = 1.5;
        let s = g * FRAC_1_SQRT_2;
        let cases = [
            (Direction::Parallel, c(s, 0.0), c(s, 0.0)),
            (Direction::Perpendicular, c(-s, 0.0), c(s, 0.0)),
            (Direction::Circular, c(s, 0.0), c(0.0, s)),
            (Direction::ModeA, c(g, 0.0), c(0.0, 0.0)),
        ];
        for (direction, a, b) in cases {
            let (x, y) = RotatedSpec { direction, gamma: g, phase: 0.0 }.amplitudes();
            assert!((x - a).norm() < 1e-15 && (y - b).norm() < 1e-15, "{direction:?}");
        }
    }

    #[test]
    fn fock_examples() {
        let basis = VibronicBasis::one_exciton(4);
        let psi = fock_rotated(1, 0, Electronic::Donor, &basis).unwrap();
        let i10 = basis.index_of(Electronic::Donor, 1, 0).unwrap();
        let i01 = basis.index_of(Electronic::Donor, 0, 1).unwrap();
        assert!((psi.amplitudes()[i10].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((psi.amplitudes()[i01].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let vac = fock_rotated(0, 0, Electronic::Donor, &basis).unwrap();
        assert_eq!(vac, StateVector::basis_state(&basis, Electronic::Donor, 0, 0).unwrap());
        assert!(matches!(fock_rotated(3, 2, Electronic::Donor, &basis), Err(Error::CutoffOverflow { .. })));
    }
}
