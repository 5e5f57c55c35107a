//! Physical parameters, the truncated vibronic product basis and state vectors.
//!
//! Units follow the usual convention of the model: ħ = 1, energies in units of
//! the vibrational quantum ω, times in units of 1/ω. Every electronic block of
//! the basis is spanned by number states of the two oscillators centred on the
//! minimum of *that* block's potential surface, truncated by `M + N <= cutoff`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Electronic configuration of the dimer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Electronic {
    /// Both monomers in the ground state, `|0>`.
    Ground,
    /// Donor excited, `|1>`.
    Donor,
    /// Acceptor excited, `|1'>`.
    Acceptor,
    /// Both excited, `|2>`.
    Doubly,
}

impl Electronic {
    pub const ALL: [Electronic; 4] =
        [Electronic::Ground, Electronic::Donor, Electronic::Acceptor, Electronic::Doubly];

    pub fn exciton_number(self) -> u8 {
        match self {
            Electronic::Ground => 0,
            Electronic::Donor | Electronic::Acceptor => 1,
            Electronic::Doubly => 2,
        }
    }

    /// Which modes are displaced by `d` at this surface's minimum, as (a, b).
    pub fn displaced(self) -> (bool, bool) {
        match self {
            Electronic::Ground => (false, false),
            Electronic::Donor => (true, false),
            Electronic::Acceptor => (false, true),
            Electronic::Doubly => (true, true),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Electronic::Ground => "0",
            Electronic::Donor => "1",
            Electronic::Acceptor => "1'",
            Electronic::Doubly => "2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "0" | "ground" => Some(Electronic::Ground),
            "1" | "donor" => Some(Electronic::Donor),
            "1'" | "1p" | "acceptor" => Some(Electronic::Acceptor),
            "2" | "doubly" => Some(Electronic::Doubly),
            _ => None,
        }
    }
}

impl fmt::Display for Electronic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// All physical constants of the dimer model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimerParams {
    /// Donor one-exciton energy ε₁.
    pub epsilon_1: f64,
    /// Acceptor one-exciton energy ε₁′.
    pub epsilon_1p: f64,
    /// Doubly excited energy ε₂; `None` means ε₁ + ε₁′.
    pub epsilon_2: Option<f64>,
    pub omega: f64,
    pub mass: f64,
    /// Equilibrium displacement of an excited monomer's mode.
    pub d: f64,
    /// Dipole-dipole coupling J.
    pub coupling: f64,
    /// Locking frequency of the A/B pulse pair; `None` means ε₁ + Λ.
    pub omega_lock_p: Option<f64>,
    /// Locking frequency of the C/D pulse pair; `None` means ε₁ + Λ.
    pub omega_lock_d: Option<f64>,
}

/// Franck-Condon energy used by the default parameter set (2 E_FC = 7.39 ω).
pub const DEFAULT_FC_ENERGY: f64 = 3.695;

impl Default for DimerParams {
    fn default() -> Self {
        DimerParams {
            epsilon_1: 0.0,
            epsilon_1p: 0.0,
            epsilon_2: None,
            omega: 1.0,
            mass: 1.0,
            d: (2.0 * DEFAULT_FC_ENERGY).sqrt(),
            coupling: 0.1,
            omega_lock_p: None,
            omega_lock_d: None,
        }
    }
}

impl DimerParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("epsilon_1", self.epsilon_1),
            ("epsilon_1p", self.epsilon_1p),
            ("omega", self.omega),
            ("mass", self.mass),
            ("d", self.d),
            ("coupling", self.coupling),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        for (name, v) in [
            ("epsilon_2", self.epsilon_2),
            ("omega_lock_p", self.omega_lock_p),
            ("omega_lock_d", self.omega_lock_d),
        ] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(invalid(name, "must be finite"));
                }
            }
        }
        if self.omega <= 0.0 {
            return Err(invalid("omega", "must be positive"));
        }
        if self.mass <= 0.0 {
            return Err(invalid("mass", "must be positive"));
        }
        if self.d < 0.0 {
            return Err(invalid("d", "must be non-negative"));
        }
        Ok(())
    }

    /// Site-energy difference ε₁ − ε₁′.
    pub fn detuning(&self) -> f64 {
        self.epsilon_1 - self.epsilon_1p
    }

    /// Copy with ε₁′ moved so that ε₁ − ε₁′ equals `de` (ε₁ is kept).
    pub fn with_detuning(&self, de: f64) -> Self {
        DimerParams { epsilon_1p: self.epsilon_1 - de, ..self.clone() }
    }

    pub fn with_coupling(&self, j: f64) -> Self {
        DimerParams { coupling: j, ..self.clone() }
    }

    pub fn epsilon_2(&self) -> f64 {
        self.epsilon_2.unwrap_or(self.epsilon_1 + self.epsilon_1p)
    }

    /// Electronic offset ε_j of a surface.
    pub fn site_energy(&self, j: Electronic) -> f64 {
        match j {
            Electronic::Ground => 0.0,
            Electronic::Donor => self.epsilon_1,
            Electronic::Acceptor => self.epsilon_1p,
            Electronic::Doubly => self.epsilon_2(),
        }
    }

    /// Reorganization (Franck-Condon) energy Λ = m ω² d² / 2.
    pub fn reorganization_energy(&self) -> f64 {
        0.5 * self.mass * self.omega * self.omega * self.d * self.d
    }

    /// Dimensionless displacement δ = sqrt(m ω / 2) d.
    pub fn delta(&self) -> f64 {
        (0.5 * self.mass * self.omega).sqrt() * self.d
    }

    pub fn tau_vib(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Length scale converting a coherent amplitude to a mean position,
    /// `q = sqrt(2 / m ω) Re α`.
    pub fn amplitude_to_position(&self) -> f64 {
        (2.0 / (self.mass * self.omega)).sqrt()
    }

    /// Momentum scale, `p = sqrt(2 m ω) Im α`.
    pub fn amplitude_to_momentum(&self) -> f64 {
        (2.0 * self.mass * self.omega).sqrt()
    }

    /// Minimum of surface `j` in coordinate space.
    pub fn surface_center(&self, j: Electronic) -> (f64, f64) {
        let (a, b) = j.displaced();
        (if a { self.d } else { 0.0 }, if b { self.d } else { 0.0 })
    }

    /// Minimum of surface `j` in ground-frame amplitude space, (δ or 0, δ or 0).
    pub fn amplitude_center(&self, j: Electronic) -> (f64, f64) {
        let (a, b) = j.displaced();
        let delta = self.delta();
        (if a { delta } else { 0.0 }, if b { delta } else { 0.0 })
    }

    pub fn lock_p(&self) -> f64 {
        self.omega_lock_p.unwrap_or(self.epsilon_1 + self.reorganization_energy())
    }

    pub fn lock_d(&self) -> f64 {
        self.omega_lock_d.unwrap_or(self.epsilon_1 + self.reorganization_energy())
    }
}

/// One product state `|j, M, N>`: `m` quanta in mode a, `n` in mode b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisEntry {
    pub state: Electronic,
    pub m: usize,
    pub n: usize,
}

/// Truncated product basis with `M + N <= cutoff` in every electronic block.
///
/// Within a block, entries are ordered by the rectangular superindex
/// `N * (cutoff + 1) + M`, i.e. `N` outer and `M` inner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VibronicBasis {
    states: Vec<Electronic>,
    cutoff: usize,
    entries: Vec<BasisEntry>,
}

impl VibronicBasis {
    pub fn new(states: &[Electronic], cutoff: usize) -> Result<Arc<Self>> {
        let mut states = states.to_vec();
        states.sort();
        states.dedup();
        if states.is_empty() {
            return Err(invalid("states", "basis needs at least one electronic state"));
        }
        let mut entries = Vec::with_capacity(states.len() * block_size(cutoff));
        for &state in &states {
            for n in 0..=cutoff {
                for m in 0..=(cutoff - n) {
                    entries.push(BasisEntry { state, m, n });
                }
            }
        }
        Ok(Arc::new(VibronicBasis { states, cutoff, entries }))
    }

    /// The one-exciton basis {1, 1'}.
    pub fn one_exciton(cutoff: usize) -> Arc<Self> {
        Self::new(&[Electronic::Donor, Electronic::Acceptor], cutoff).expect("non-empty")
    }

    /// All four electronic blocks.
    pub fn full(cutoff: usize) -> Arc<Self> {
        Self::new(&Electronic::ALL, cutoff).expect("non-empty")
    }

    pub fn states(&self) -> &[Electronic] {
        &self.states
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn block_size(&self) -> usize {
        block_size(self.cutoff)
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn contains(&self, j: Electronic) -> bool {
        self.states.contains(&j)
    }

    /// Index range of block `j`.
    pub fn block(&self, j: Electronic) -> Option<Range<usize>> {
        let pos = self.states.iter().position(|&s| s == j)?;
        let size = self.block_size();
        Some(pos * size..(pos + 1) * size)
    }

    pub fn require_block(&self, j: Electronic) -> Result<Range<usize>> {
        self.block(j).ok_or(Error::MissingBlock(j))
    }

    /// Position of `(m, n)` inside any block.
    pub fn local_index(&self, m: usize, n: usize) -> Option<usize> {
        triangle_index(self.cutoff, m, n)
    }

    pub fn index_of(&self, j: Electronic, m: usize, n: usize) -> Option<usize> {
        let block = self.block(j)?;
        Some(block.start + self.local_index(m, n)?)
    }
}

/// Number of `(M, N)` pairs with `M + N <= cutoff`.
pub fn block_size(cutoff: usize) -> usize {
    (cutoff + 1) * (cutoff + 2) / 2
}

fn triangular_offset(cutoff: usize, n: usize) -> usize {
    n * (cutoff + 1) - n * n.saturating_sub(1) / 2
}

/// Position of `(m, n)` within a block of the given cutoff, without a basis object.
pub fn triangle_index(cutoff: usize, m: usize, n: usize) -> Option<usize> {
    (m + n <= cutoff).then(|| triangular_offset(cutoff, n) + m)
}

/// Rectangular superindex `k = j N_max² + N N_max + M` over the one-exciton
/// pair (`j = 0` donor, `j = 1` acceptor).
pub fn superindex(j: usize, m: usize, n: usize, n_max: usize) -> Result<usize> {
    if j > 1 {
        return Err(Error::IndexOutOfRange(format!("electronic index {j} not in {{0, 1}}")));
    }
    if m >= n_max || n >= n_max {
        return Err(Error::IndexOutOfRange(format!("quanta ({m}, {n}) not below N_max = {n_max}")));
    }
    Ok(j * n_max * n_max + n * n_max + m)
}

/// Inverse of [`superindex`], returning `(j, M, N)`.
pub fn superindex_inverse(k: usize, n_max: usize) -> Result<(usize, usize, usize)> {
    if n_max == 0 || k >= 2 * n_max * n_max {
        return Err(Error::IndexOutOfRange(format!("superindex {k} out of range for N_max = {n_max}")));
    }
    let j = k / (n_max * n_max);
    let rest = k % (n_max * n_max);
    Ok((j, rest % n_max, rest / n_max))
}

/// Complex amplitudes over a [`VibronicBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Arc<VibronicBasis>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(basis: &Arc<VibronicBasis>) -> Self {
        StateVector { basis: Arc::clone(basis), amplitudes: vec![Complex64::new(0.0, 0.0); basis.len()] }
    }

    pub fn from_amplitudes(basis: &Arc<VibronicBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::BasisMismatch);
        }
        Ok(StateVector { basis: Arc::clone(basis), amplitudes })
    }

    /// The product state `|j, m, n>`.
    pub fn basis_state(basis: &Arc<VibronicBasis>, j: Electronic, m: usize, n: usize) -> Result<Self> {
        basis.require_block(j)?;
        let idx = basis.index_of(j, m, n).ok_or(Error::CutoffOverflow { cutoff: basis.cutoff() })?;
        let mut psi = Self::zeros(basis);
        psi.amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(psi)
    }

    pub fn basis(&self) -> &Arc<VibronicBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitudes of block `j`, or `None` when the block is not in the basis.
    pub fn block(&self, j: Electronic) -> Option<&[Complex64]> {
        self.basis.block(j).map(|r| &self.amplitudes[r])
    }

    pub fn block_mut(&mut self, j: Electronic) -> Option<&mut [Complex64]> {
        let r = self.basis.block(j)?;
        Some(&mut self.amplitudes[r])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn compatible(&self, other: &StateVector) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    pub fn check_compatible(&self, other: &StateVector) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_compatible(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for c in &mut self.amplitudes {
            *c *= factor;
        }
        self
    }

    pub fn add_assign(&mut self, other: &StateVector) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += b;
        }
        Ok(())
    }

    /// Copy keeping only block `j` (all other amplitudes zeroed).
    pub fn project(&self, j: Electronic) -> Self {
        let mut out = Self::zeros(&self.basis);
        if let Some(r) = self.basis.block(j) {
            out.amplitudes[r.clone()].copy_from_slice(&self.amplitudes[r]);
        }
        out
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(invalid("state", "cannot normalize a zero or non-finite vector"));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_exciton_cutoff_one_has_six_entries() {
        let basis = VibronicBasis::one_exciton(1);
        assert_eq!(basis.len(), 6);
        let donor: Vec<(usize, usize)> = basis.entries()[..3].iter().map(|e| (e.m, e.n)).collect();
        assert_eq!(donor, vec![(0, 0), (1, 0), (0, 1)]);
        assert!(basis.entries()[..3].iter().all(|e| e.state == Electronic::Donor));
        assert!(basis.entries()[3..].iter().all(|e| e.state == Electronic::Acceptor));
    }

    #[test]
    fn paper_cutoff_sizes() {
        assert_eq!(VibronicBasis::one_exciton(17).len(), 342);
        assert_eq!(VibronicBasis::full(0).len(), 4);
        assert_eq!(VibronicBasis::full(20).len(), 4 * 231);
    }

    #[test]
    fn index_round_trip_and_size_formula() {
        for cutoff in 0..=25 {
            let basis = VibronicBasis::full(cutoff);
            assert_eq!(basis.len(), 4 * (cutoff + 1) * (cutoff + 2) / 2);
            for (i, e) in basis.entries().iter().enumerate() {
                assert!(e.m + e.n <= cutoff);
                assert_eq!(basis.index_of(e.state, e.m, e.n), Some(i));
            }
            assert_eq!(basis.local_index(cutoff + 1, 0), None);
        }
    }

    #[test]
    fn block_order_follows_superindex() {
        let basis = VibronicBasis::one_exciton(4);
        let keys: Vec<usize> = basis.entries()[..basis.block_size()]
            .iter()
            .map(|e| superindex(0, e.m, e.n, 5).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn superindex_examples() {
        assert_eq!(superindex(0, 0, 0, 20).unwrap(), 0);
        assert_eq!(superindex(1, 0, 0, 20).unwrap(), 400);
        assert_eq!(superindex(0, 3, 2, 20).unwrap(), 43);
        assert!(superindex(2, 0, 0, 20).is_err());
        assert!(superindex(0, 20, 0, 20).is_err());
        assert!(superindex(0, 0, 20, 20).is_err());
        for k in 0..800 {
            let (j, m, n) = superindex_inverse(k, 20).unwrap();
            assert_eq!(superindex(j, m, n, 20).unwrap(), k);
        }
        assert!(superindex_inverse(800, 20).is_err());
    }

    #[test]
    fn derived_energies() {
        let p = DimerParams::default();
        let lambda = p.reorganization_energy();
        assert!((lambda - DEFAULT_FC_ENERGY).abs() < 1e-12);
        assert_eq!(lambda, 0.5 * p.mass * p.omega * p.omega * p.d * p.d);
        assert!((p.delta().powi(2) * p.omega - lambda).abs() < 1e-12);
        assert!((p.delta() - 1.9222).abs() < 1e-4);
        assert_eq!(p.epsilon_2(), p.epsilon_1 + p.epsilon_1p);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = DimerParams::default();
        p.omega = 0.0;
        assert!(p.validate().is_err());
        let mut p = DimerParams::default();
        p.d = -1.0;
        assert!(p.validate().is_err());
        let mut p = DimerParams::default();
        p.mass = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn inner_product_is_conjugate_linear() {
        let basis = VibronicBasis::one_exciton(2);
        let a = StateVector::basis_state(&basis, Electronic::Donor, 1, 0).unwrap();
        let b = a.clone().scaled(Complex64::new(0.0, 2.0));
        assert_eq!(a.inner(&b).unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(b.inner(&a).unwrap(), Complex64::new(0.0, -2.0));
        let other = StateVector::zeros(&VibronicBasis::one_exciton(3));
        assert_eq!(a.inner(&other), Err(Error::BasisMismatch));
    }
}
