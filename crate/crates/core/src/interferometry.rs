//! Four-pulse phase-locked wavepacket interferometry.
//!
//! Pulses `A_y`, `B_x`, `C_x`, `D_x` arrive at `0`, `t_p`, `t_p + t_w` and
//! `t_p + t_w + t_d`. The detected pathway pairs the target wavepacket
//! `Π₁′ U(t_w) B U(t_p) |0⟩` with the reference wavepacket
//! `Π₁′ C† U(−t_d) D† U(t_p + t_w + t_d) A |0⟩` (`C`, `D` moved to the bra side).
//! Their overlap times the locking factor `e^{−iΩ_p t_p + iΩ_d t_d}`, divided by
//! `θ⁴`, is the reported signal.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::model::{DimerParams, Electronic, StateVector, VibronicBasis};
use crate::observables::{mean_momentum, mean_position, overlap, population, transfer_instant, Trajectory};
use crate::pulses::{PerturbativeOrder, Polarization, PulseLabel, PulseOperator, PulseSpec};
use crate::spectral::{diagonalize, EigenSystem};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the donor-to-acceptor transfer during `t_w` is treated on the target side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMode {
    /// Full propagation under `H`.
    #[default]
    Exact,
    /// Only the term linear in `J` of the propagator.
    FirstOrder,
}

/// Delays (in units of 1/ω), locking phases and pulse area of one four-pulse shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub t_p: f64,
    pub t_w: f64,
    pub t_d: f64,
    /// `Φ_B − Φ_A` beyond the locked carrier phase.
    pub phi_p: f64,
    /// `Φ_D − Φ_C` beyond the locked carrier phase.
    pub phi_d: f64,
    /// Pulse area θ shared by all four pulses.
    pub strength: f64,
    pub transfer: TransferMode,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { t_p: 0.0, t_w: PI, t_d: 0.0, phi_p: 0.0, phi_d: 0.0, strength: 1.0, transfer: TransferMode::Exact }
    }
}

impl Schedule {
    /// Delays given in vibrational periods.
    pub fn from_periods(t_p: f64, t_w: f64, t_d: f64, params: &DimerParams) -> Self {
        let tau = params.tau_vib();
        Schedule { t_p: t_p * tau, t_w: t_w * tau, t_d: t_d * tau, ..Schedule::default() }
    }

    pub fn with_delays(mut self, t_p: f64, t_d: f64) -> Self {
        self.t_p = t_p;
        self.t_d = t_d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_p", self.t_p), ("t_w", self.t_w), ("t_d", self.t_d)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Schedule(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        if !self.strength.is_finite() || self.strength == 0.0 {
            return Err(Error::Schedule("pulse strength must be finite and non-zero".into()));
        }
        Ok(())
    }

    fn pulse(&self, label: PulseLabel, pol: Polarization, phase: f64) -> PulseSpec {
        PulseSpec::new(label, pol).with_phase(phase).with_strength(self.strength)
    }
}

/// Shared, immutable machinery for evaluating the interferometric signal.
#[derive(Debug, Clone)]
pub struct InterferometryModel {
    params: DimerParams,
    basis: Arc<VibronicBasis>,
    ops: PulseOperator,
    eig: EigenSystem,
    /// Uncoupled system, used for the first-order transfer mode and, when the
    /// reference runs without coupling, for the reference side.
    eig_free: EigenSystem,
    reference_coupling: bool,
    ground: StateVector,
    ground_energy: f64,
}

impl InterferometryModel {
    /// Build on the four-state basis of the given cutoff. `reference_coupling`
    /// selects whether `J` acts while the reference wavepacket evolves.
    pub fn new(params: &DimerParams, cutoff: usize, reference_coupling: bool) -> Result<Self> {
        params.validate()?;
        let basis = VibronicBasis::full(cutoff);
        let eig = diagonalize(&build_hamiltonian(params, &basis)?)?;
        let eig_free = diagonalize(&build_hamiltonian(&params.with_coupling(0.0), &basis)?)?;
        let ops = PulseOperator::new(params, &basis)?;
        let ground = StateVector::basis_state(&basis, Electronic::Ground, 0, 0)?;
        let ground_energy = params.site_energy(Electronic::Ground) + params.omega;
        Ok(InterferometryModel {
            params: params.clone(),
            basis,
            ops,
            eig,
            eig_free,
            reference_coupling,
            ground,
            ground_energy,
        })
    }

    pub fn params(&self) -> &DimerParams {
        &self.params
    }

    pub fn basis(&self) -> &Arc<VibronicBasis> {
        &self.basis
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn pulses(&self) -> &PulseOperator {
        &self.ops
    }

    pub fn reference_coupling(&self) -> bool {
        self.reference_coupling
    }

    fn reference_eig(&self) -> &EigenSystem {
        if self.reference_coupling {
            &self.eig
        } else {
            &self.eig_free
        }
    }

    fn ground_at(&self, t: f64) -> StateVector {
        self.ground.clone().scaled(Complex64::from_polar(1.0, -self.ground_energy * t))
    }

    /// `U(t)` applied to `psi` with only the part linear in `J` kept.
    fn first_order_transfer(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        // In the uncoupled eigenbasis (the diabatic basis itself) the linear term is
        // −i Σ_l D_kl ψ_l e^{−iE_k t} (e^{i(E_k−E_l)t} − 1)/(i(E_k − E_l)).
        let h = build_hamiltonian(&self.params, &self.basis)?;
        let donor = self.basis.require_block(Electronic::Donor)?;
        let acceptor = self.basis.require_block(Electronic::Acceptor)?;
        let x = psi.amplitudes();
        let mut out = StateVector::zeros(&self.basis);
        let pairs = [(acceptor.clone(), donor.clone()), (donor, acceptor)];
        for (rows, cols) in pairs {
            for k in rows {
                let ek = h.get(k, k);
                let mut acc = ZERO;
                for l in cols.clone() {
                    let v = h.get(k, l);
                    if v == 0.0 || x[l] == ZERO {
                        continue;
                    }
                    let d = ek - h.get(l, l);
                    let integral = if (d * t).abs() < 1e-12 {
                        Complex64::new(t, 0.0)
                    } else {
                        (Complex64::from_polar(1.0, d * t) - 1.0) / Complex64::new(0.0, d)
                    };
                    acc += x[l] * v * integral;
                }
                out.amplitudes_mut()[k] = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -ek * t) * acc;
            }
        }
        Ok(out)
    }

    /// Target wavepacket `Π₁′ U(t_w) B_x U(t_p) |0⟩` (as a full-basis vector).
    pub fn target_wavepacket(&self, s: &Schedule) -> Result<StateVector> {
        s.validate()?;
        let pulse_b = s.pulse(PulseLabel::B, Polarization::X, s.phi_p);
        let excited = self.ops.apply(&self.ground_at(s.t_p), &pulse_b, PerturbativeOrder::Up)?;
        let evolved = match s.transfer {
            TransferMode::Exact => self.eig.propagate(&excited, s.t_w)?,
            TransferMode::FirstOrder => self.first_order_transfer(&excited, s.t_w)?,
        };
        Ok(evolved.project(Electronic::Acceptor))
    }

    /// Reference wavepacket `Π₁′ C_x† U(−t_d) D_x† U(t_p + t_w + t_d) A_y |0⟩`.
    pub fn reference_wavepacket(&self, s: &Schedule) -> Result<StateVector> {
        s.validate()?;
        let eig = self.reference_eig();
        let pulse_a = s.pulse(PulseLabel::A, Polarization::Y, 0.0);
        let pulse_c = s.pulse(PulseLabel::C, Polarization::X, 0.0);
        let pulse_d = s.pulse(PulseLabel::D, Polarization::X, s.phi_d);
        let a = self.ops.apply(&self.ground, &pulse_a, PerturbativeOrder::Up)?;
        let a = eig.propagate(&a, s.t_p + s.t_w + s.t_d)?;
        let d = self.ops.apply_adjoint(&a, &pulse_d, PerturbativeOrder::Down)?;
        let d = eig.propagate(&d, -s.t_d)?;
        let c = self.ops.apply_adjoint(&d, &pulse_c, PerturbativeOrder::Up)?;
        Ok(c.project(Electronic::Acceptor))
    }

    /// `e^{−iΩ_p t_p + iΩ_d t_d}`.
    pub fn lock_factor(&self, t_p: f64, t_d: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.params.lock_p() * t_p + self.params.lock_d() * t_d)
    }

    /// Normalized signal `e^{−iΩ_p t_p + iΩ_d t_d} ⟨reference|target⟩ / θ⁴`.
    pub fn interference_term(&self, s: &Schedule) -> Result<Complex64> {
        let target = self.target_wavepacket(s)?;
        let reference = self.reference_wavepacket(s)?;
        let raw = overlap(&reference, &target, Electronic::Acceptor)?;
        Ok(raw * self.lock_factor(s.t_p, s.t_d) / s.strength.powi(4))
    }

    /// Part of the acceptor population at `t_D` that is linear in every one of the
    /// four pulse fields, with each pulse acting to first order in both directions.
    ///
    /// The carrier phases are locked, `Φ_B = Φ_A + φ_p + Ω_p t_p` and
    /// `Φ_D = Φ_C + φ_d + Ω_d t_d`, and the result is averaged over the absolute
    /// phases `Φ_A, Φ_C ∈ {0, π/2}`.
    pub fn quadrilinear_population(&self, s: &Schedule, phi_p: f64, phi_d: f64) -> Result<f64> {
        s.validate()?;
        let mut total = 0.0;
        for phase_a in [0.0, 0.5 * PI] {
            for phase_c in [0.0, 0.5 * PI] {
                total += self.quadrilinear_fixed(s, phi_p, phi_d, phase_a, phase_c)?;
            }
        }
        Ok(total / 4.0)
    }

    fn quadrilinear_fixed(&self, s: &Schedule, phi_p: f64, phi_d: f64, phase_a: f64, phase_c: f64) -> Result<f64> {
        let pulses = [
            (s.pulse(PulseLabel::A, Polarization::Y, phase_a), s.t_p),
            (s.pulse(PulseLabel::B, Polarization::X, phase_a + phi_p + self.params.lock_p() * s.t_p), s.t_w),
            (s.pulse(PulseLabel::C, Polarization::X, phase_c), s.t_d),
            (s.pulse(PulseLabel::D, Polarization::X, phase_c + phi_d + self.params.lock_d() * s.t_d), 0.0),
        ];
        // terms[mask] holds the amplitude with the pulses in `mask` having acted once
        let mut terms: Vec<Option<StateVector>> = vec![None; 16];
        terms[0] = Some(self.ground.clone());
        for (bit, (pulse, wait)) in pulses.iter().enumerate() {
            let mut next = terms.clone();
            for mask in 0..16usize {
                if let Some(psi) = &terms[mask] {
                    let hit = self.ops.apply(psi, pulse, PerturbativeOrder::Both)?;
                    next[mask | (1 << bit)] = Some(hit);
                }
            }
            terms = next;
            if *wait > 0.0 {
                terms = terms
                    .into_par_iter()
                    .map(|t| t.map(|psi| self.eig.propagate(&psi, *wait)).transpose())
                    .collect::<Result<_>>()?;
            }
        }
        let mut acc = ZERO;
        for mask in 0..16usize {
            let (Some(ket), Some(bra)) = (&terms[mask], &terms[15 ^ mask]) else { continue };
            acc += overlap(bra, ket, Electronic::Acceptor)?;
        }
        Ok(acc.re / s.strength.powi(4))
    }

    /// Evaluate the normalized signal on a delay grid with `t_w` and phases from
    /// `base`. Every cell is computed independently, so the result does not depend
    /// on how work is split between threads.
    pub fn scan(&self, base: &Schedule, t_p: &[f64], t_d: &[f64]) -> Result<InterferogramGrid> {
        base.validate()?;
        check_axis("t_p", t_p)?;
        check_axis("t_d", t_d)?;
        let columns: Vec<Vec<Complex64>> = t_d
            .par_iter()
            .map(|&td| {
                let probe = SignalColumn::new(self, base, td)?;
                Ok(t_p.iter().map(|&tp| probe.at(self, tp)).collect())
            })
            .collect::<Result<_>>()?;
        let mut values = vec![ZERO; t_p.len() * t_d.len()];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * t_d.len() + j] = *v;
            }
        }
        Ok(InterferogramGrid {
            t_p: t_p.to_vec(),
            t_d: t_d.to_vec(),
            values,
            params: self.params.clone(),
            schedule: *base,
            reference_coupling: self.reference_coupling,
        })
    }

    /// Normalized signal at one delay pair through the same fast path as [`Self::scan`].
    pub fn signal(&self, base: &Schedule, t_p: f64, t_d: f64) -> Result<Complex64> {
        let s = base.with_delays(t_p, t_d);
        s.validate()?;
        Ok(SignalColumn::new(self, base, t_d)?.at(self, t_p))
    }
}

/// Signal along `t_p` at fixed `t_d`.
///
/// With the target side written as `η = D U(t_d) C ξ`, only the reference
/// propagation over `T = t_p + t_w + t_d` depends on `t_p`; in the reference
/// eigenbasis the overlap is `Σ_l conj(a_l) e^{iλ_l T} η_l`.
struct SignalColumn {
    t_d: f64,
    t_w: f64,
    phi_p: f64,
    scale: f64,
    a: Vec<Complex64>,
    eta: Vec<Complex64>,
}

impl SignalColumn {
    fn new(model: &InterferometryModel, base: &Schedule, t_d: f64) -> Result<Self> {
        let s = Schedule { t_p: 0.0, t_d, phi_p: 0.0, ..*base };
        let xi = model.target_wavepacket(&s)?;
        let pulse_c = s.pulse(PulseLabel::C, Polarization::X, 0.0);
        let pulse_d = s.pulse(PulseLabel::D, Polarization::X, s.phi_d);
        let c = model.ops.apply(&xi, &pulse_c, PerturbativeOrder::Up)?;
        let c = model.eig.propagate(&c, t_d)?;
        let eta = model.ops.apply(&c, &pulse_d, PerturbativeOrder::Down)?.project(Electronic::Acceptor);
        let eig = model.reference_eig();
        let pulse_a = s.pulse(PulseLabel::A, Polarization::Y, 0.0);
        let a = model.ops.apply(&model.ground, &pulse_a, PerturbativeOrder::Up)?;
        Ok(SignalColumn {
            t_d,
            t_w: base.t_w,
            phi_p: base.phi_p,
            scale: base.strength.powi(4),
            a: eig.to_eigen(&a)?,
            eta: eig.to_eigen(&eta)?,
        })
    }

    fn at(&self, model: &InterferometryModel, t_p: f64) -> Complex64 {
        let eig = model.reference_eig();
        let total = t_p + self.t_w + self.t_d;
        let mut acc = ZERO;
        for ((a, e), &lam) in self.a.iter().zip(&self.eta).zip(eig.eigenvalues()) {
            if *e == ZERO || *a == ZERO {
                continue;
            }
            acc += a.conj() * e * Complex64::from_polar(1.0, lam * total);
        }
        // ξ(t_p) = e^{−iE₀ t_p} e^{−iφ_p} ξ(0)
        let phase = Complex64::from_polar(1.0, -model.ground_energy * t_p - self.phi_p);
        acc * phase * model.lock_factor(t_p, self.t_d) / self.scale
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() || axis.windows(2).any(|w| !(w[1] > w[0])) || axis.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Grid(format!("{name} axis must be non-empty, non-negative and strictly increasing")));
    }
    Ok(())
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Complex signal over a `(t_p, t_d)` grid, stored with `t_p` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferogramGrid {
    pub t_p: Vec<f64>,
    pub t_d: Vec<f64>,
    pub values: Vec<Complex64>,
    pub params: DimerParams,
    pub schedule: Schedule,
    pub reference_coupling: bool,
}

/// Which real component of the signal to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
    Abs,
}

impl Part {
    fn of(self, z: Complex64) -> f64 {
        match self {
            Part::Re => z.re,
            Part::Im => z.im,
            Part::Abs => z.norm(),
        }
    }
}

impl InterferogramGrid {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.t_d.len() + j]
    }

    /// Matrix CSV: the first row holds the `t_d` axis, each following row starts
    /// with its `t_p` value. Times are written in vibrational periods.
    pub fn write_csv<W: Write>(&self, part: Part, mut out: W) -> io::Result<()> {
        let tau = self.params.tau_vib();
        write!(out, "t_p\\t_d")?;
        for td in &self.t_d {
            write!(out, ",{:.16e}", td / tau)?;
        }
        writeln!(out)?;
        for (i, tp) in self.t_p.iter().enumerate() {
            write!(out, "{:.16e}", tp / tau)?;
            for j in 0..self.t_d.len() {
                write!(out, ",{:.16e}", part.of(self.get(i, j)))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Binary 8-bit graymap of one component, min-max normalized; `t_p` runs
    /// along x and `t_d` along y with the largest `t_d` on top.
    pub fn write_pgm<W: Write>(&self, part: Part, mut out: W) -> io::Result<()> {
        let (w, h) = (self.t_p.len(), self.t_d.len());
        let vals: Vec<f64> = self.values.iter().map(|&z| part.of(z)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        write!(out, "P5\n{w} {h}\n255\n")?;
        let mut bytes = Vec::with_capacity(w * h);
        for j in (0..h).rev() {
            for i in 0..w {
                let v = (vals[i * h + j] - lo) / span;
                bytes.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        out.write_all(&bytes)
    }
}

/// Location of the signal maximum and the phase rates `Γ′ = −i ∂ ln S` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReport {
    pub t_p: f64,
    pub t_d: f64,
    pub magnitude: f64,
    pub gamma_tp: Complex64,
    pub gamma_td: Complex64,
}

fn log_rate(plus: Complex64, minus: Complex64, h: f64) -> Complex64 {
    // −i ln(S₊/S₋) / (2h)
    Complex64::new(0.0, -1.0) * (plus / minus).ln() / (2.0 * h)
}

fn parabola_offset(fm: f64, f0: f64, fp: f64) -> f64 {
    let denom = fm - 2.0 * f0 + fp;
    if denom < 0.0 {
        (0.5 * (fm - fp) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    }
}

/// Peak of `|S|` on the grid, refined by a parabola through neighbouring cells,
/// and phase rates by central differences of `ln S` between neighbours.
pub fn peak_and_fringe_analysis(grid: &InterferogramGrid) -> Result<PeakReport> {
    let (np, nd) = (grid.t_p.len(), grid.t_d.len());
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..np {
        for j in 0..nd {
            let m = grid.get(i, j).norm();
            if m > best {
                (bi, bj, best) = (i, j, m);
            }
        }
    }
    if best <= 0.0 {
        return Err(Error::FlatSignal);
    }
    let mag = |i: usize, j: usize| grid.get(i, j).norm();
    let interior_p = bi > 0 && bi + 1 < np;
    let interior_d = bj > 0 && bj + 1 < nd;
    let mut t_p = grid.t_p[bi];
    let mut t_d = grid.t_d[bj];
    let mut gamma_tp = Complex64::new(f64::NAN, f64::NAN);
    let mut gamma_td = Complex64::new(f64::NAN, f64::NAN);
    if interior_p {
        let h = 0.5 * (grid.t_p[bi + 1] - grid.t_p[bi - 1]);
        t_p += h * parabola_offset(mag(bi - 1, bj), best, mag(bi + 1, bj));
        gamma_tp = log_rate(grid.get(bi + 1, bj), grid.get(bi - 1, bj), h);
    }
    if interior_d {
        let h = 0.5 * (grid.t_d[bj + 1] - grid.t_d[bj - 1]);
        t_d += h * parabola_offset(mag(bi, bj - 1), best, mag(bi, bj + 1));
        gamma_td = log_rate(grid.get(bi, bj + 1), grid.get(bi, bj - 1), h);
    }
    Ok(PeakReport { t_p, t_d, magnitude: best, gamma_tp, gamma_td })
}

/// Refine a coarse peak by direct evaluation on a stencil `factor` times finer
/// than the coarse spacing `(h_p, h_d)`, spanning one coarse cell on each side.
/// Phase rates come from a stencil much smaller than the fine spacing, one-sided
/// where a delay is zero. Refined delays never go negative.
pub fn refine_peak(
    model: &InterferometryModel,
    base: &Schedule,
    coarse: &PeakReport,
    spacing: (f64, f64),
    factor: usize,
) -> Result<PeakReport> {
    let factor = factor.max(1);
    let (hp, hd) = (spacing.0 / factor as f64, spacing.1 / factor as f64);
    let k = factor as isize;
    let points: Vec<(f64, f64)> = (-k..=k)
        .flat_map(|i| (-k..=k).map(move |j| (i, j)))
        .map(|(i, j)| ((coarse.t_p + i as f64 * hp).max(0.0), (coarse.t_d + j as f64 * hd).max(0.0)))
        .collect();
    let values: Vec<Complex64> = points.par_iter().map(|&(tp, td)| model.signal(base, tp, td)).collect::<Result<_>>()?;
    let (mut best_idx, mut best) = (0, -1.0);
    for (idx, v) in values.iter().enumerate() {
        if v.norm() > best {
            (best_idx, best) = (idx, v.norm());
        }
    }
    if best <= 0.0 {
        return Err(Error::FlatSignal);
    }
    let (tp0, td0) = points[best_idx];
    let at = |tp: f64, td: f64| model.signal(base, tp, td);
    let s0 = at(tp0, td0)?;
    let (sp_m, sp_p) = (at((tp0 - hp).max(0.0), td0)?, at(tp0 + hp, td0)?);
    let (sd_m, sd_p) = (at(tp0, (td0 - hd).max(0.0))?, at(tp0, td0 + hd)?);
    let tp = (tp0 + hp * parabola_offset(sp_m.norm(), s0.norm(), sp_p.norm())).max(0.0);
    let td = (td0 + hd * parabola_offset(sd_m.norm(), s0.norm(), sd_p.norm())).max(0.0);
    // rates at the refined location with a small stencil, one-sided at a zero delay
    let e = 1e-3 * hp.min(hd);
    let s = at(tp, td)?;
    let gamma_tp = if tp >= e { log_rate(at(tp + e, td)?, at(tp - e, td)?, e) } else { log_rate(at(tp + e, td)?, s, 0.5 * e) };
    let gamma_td = if td >= e { log_rate(at(tp, td + e)?, at(tp, td - e)?, e) } else { log_rate(at(tp, td + e)?, s, 0.5 * e) };
    Ok(PeakReport { t_p: tp, t_d: td, magnitude: s.norm(), gamma_tp, gamma_td })
}

/// Combine four phase-cycled signals,
/// `¼ [P(0,0) − P(π/2,−π/2) + i P(π/2,0) − i P(0,π/2)]`, which returns the
/// coefficient of `e^{−iφ_p + iφ_d}` of a real signal.
pub fn phase_cycle_isolate(p00: f64, p_half_minus_half: f64, p_half_0: f64, p_0_half: f64) -> Complex64 {
    0.25 * (Complex64::new(p00 - p_half_minus_half, 0.0) + Complex64::new(0.0, p_half_0 - p_0_half))
}

/// The phase settings `(φ_p, φ_d)` required by [`phase_cycle_isolate`], in order.
pub const PHASE_CYCLE: [(f64, f64); 4] = [(0.0, 0.0), (0.5 * PI, -0.5 * PI), (0.5 * PI, 0.0), (0.0, 0.5 * PI)];

/// Isolate the interference coefficient from four full-model evaluations.
pub fn isolate_from_model(model: &InterferometryModel, s: &Schedule) -> Result<Complex64> {
    let p: Vec<f64> = PHASE_CYCLE
        .par_iter()
        .map(|&(a, b)| model.quadrilinear_population(s, a, b))
        .collect::<Result<_>>()?;
    Ok(phase_cycle_isolate(p[0], p[1], p[2], p[3]))
}

/// Fraction of `t_w` after which the first transfer act happens,
/// `𝒜 = transfer_instant · τ / t_w`.
pub fn waiting_fraction(params: &DimerParams, t_w: f64) -> Result<f64> {
    if !(t_w > 0.0) {
        return Err(Error::Schedule("t_w must be positive".into()));
    }
    Ok(transfer_instant(params)? * params.tau_vib() / t_w)
}

/// Closed-form coincidence delays `t_p = (m + 1 − 𝒜/2) τ`, `t_d = (n + 𝒜/2) τ`
/// for `t_w = τ/2`, in units of 1/ω.
pub fn semiclassical_match(fraction: f64, m: u32, n: u32, params: &DimerParams) -> (f64, f64) {
    let tau = params.tau_vib();
    ((m as f64 + 1.0 - 0.5 * fraction) * tau, (n as f64 + 0.5 * fraction) * tau)
}

/// Direct solution of the coincidence conditions
///
/// ```text
/// a-mode: (e^{iω𝒜t_w} − 1) e^{−iωt_w} − 1 = −e^{iωt_d}
/// b-mode: e^{−iω((1−𝒜)t_w + t_d)} = e^{−iω(t_p + t_w + t_d)}
/// ```
///
/// for any `t_w`. The b-mode fixes `t_p` modulo τ exactly; the a-mode fixes the
/// phase of `e^{iωt_d}`, and its magnitude mismatch is returned as a residual.
/// Delays are placed in period `m` (for `t_p`, counted from one period) and `n`.
pub fn semiclassical_match_numeric(fraction: f64, t_w: f64, m: u32, n: u32, params: &DimerParams) -> (f64, f64, f64) {
    let w = params.omega;
    let tau = params.tau_vib();
    let lhs = (Complex64::from_polar(1.0, w * fraction * t_w) - 1.0) * Complex64::from_polar(1.0, -w * t_w) - 1.0;
    let target = -lhs;
    let residual = (target.norm() - 1.0).abs();
    let td_phase = target.arg().rem_euclid(2.0 * PI) / w;
    let td = n as f64 * tau + td_phase;
    let tp_phase = (-fraction * t_w).rem_euclid(tau);
    let tp = m as f64 * tau + if tp_phase == 0.0 { tau } else { tp_phase };
    (tp, td, residual)
}

/// Mean phase-space coordinates of the acceptor block of `U(t) B_x |0⟩`, i.e.
/// the target wavepacket as it forms during the waiting time.
///
/// Columns: `q_a, p_a, q_b, p_b`. At instants where the acceptor block is still
/// empty the first-order limit `Π₁′ H B_x|0⟩` is used.
pub fn target_phase_space(model: &InterferometryModel, times: &[f64]) -> Result<Trajectory> {
    let pulse_b = PulseSpec::new(PulseLabel::B, Polarization::X);
    let excited = model.ops.apply(&model.ground, &pulse_b, PerturbativeOrder::Up)?;
    let prop = model.eig.propagator(&excited)?;
    let params = &model.params;
    let limit = || -> Result<StateVector> {
        let h = build_hamiltonian(params, &model.basis)?;
        Ok(h.apply(&excited)?.project(Electronic::Acceptor))
    };
    let rows = times
        .par_iter()
        .map(|&t| {
            let mut psi = prop.at(t);
            if population(&psi, Electronic::Acceptor)? < 1e-300 {
                psi = limit()?;
            }
            let (qa, qb) = mean_position(&psi, Electronic::Acceptor, params)?;
            let (pa, pb) = mean_momentum(&psi, Electronic::Acceptor, params)?;
            Ok(vec![qa, pa, qb, pb])
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), vec!["q_a".into(), "p_a".into(), "q_b".into(), "p_b".into()], rows)
}
