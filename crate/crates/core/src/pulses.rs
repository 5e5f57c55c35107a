//! Impulsive polarized pulses, first order in the field, rotating-wave approximation.
//!
//! A pulse flips the electronic label while leaving the nuclear wavefunction
//! unchanged in coordinate space. Because every block uses oscillator states
//! centred on its own surface minimum, the nuclear amplitudes are carried
//! across by the Franck-Condon change of basis between the two blocks.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::franck_condon::BlockOverlap;
use crate::model::{DimerParams, Electronic, StateVector, VibronicBasis};
use crate::spectral::EigenSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Couples through μ_a: `0 ↔ 1` and `1′ ↔ 2`.
    X,
    /// Couples through μ_b: `0 ↔ 1′` and `1 ↔ 2`.
    Y,
}

impl Polarization {
    /// `(lower, upper)` electronic pairs addressed by this polarization.
    pub fn transitions(self) -> [(Electronic, Electronic); 2] {
        match self {
            Polarization::X => [(Electronic::Ground, Electronic::Donor), (Electronic::Acceptor, Electronic::Doubly)],
            Polarization::Y => [(Electronic::Ground, Electronic::Acceptor), (Electronic::Donor, Electronic::Doubly)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseLabel {
    A,
    B,
    C,
    D,
}

/// Which first-order piece of the pulse propagator to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbativeOrder {
    /// Exciton number +1, weighted by `e^{−iΦ}`.
    Up,
    /// Exciton number −1, weighted by `e^{+iΦ}`.
    Down,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub label: PulseLabel,
    pub polarization: Polarization,
    /// Arrival time.
    pub time: f64,
    /// Locked optical phase Φ.
    pub phase: f64,
    /// Carrier frequency, used only for phase bookkeeping by callers.
    pub carrier: f64,
    /// Dimensionless pulse area θ.
    pub strength: f64,
}

impl PulseSpec {
    pub fn new(label: PulseLabel, polarization: Polarization) -> Self {
        PulseSpec { label, polarization, time: 0.0, phase: 0.0, carrier: 0.0, strength: 1.0 }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }
}

#[derive(Debug, Clone)]
struct Transition {
    lower: Electronic,
    upper: Electronic,
    up: BlockOverlap,
    down: BlockOverlap,
}

/// Dipole operators with the Franck-Condon basis changes cached for one basis.
#[derive(Debug, Clone)]
pub struct PulseOperator {
    basis: Arc<VibronicBasis>,
    x: [Transition; 2],
    y: [Transition; 2],
}

impl PulseOperator {
    pub fn new(params: &DimerParams, basis: &Arc<VibronicBasis>) -> Result<Self> {
        params.validate()?;
        let make = |pol: Polarization| -> Result<[Transition; 2]> {
            let [a, b] = pol.transitions();
            let one = |(lower, upper): (Electronic, Electronic)| -> Result<Transition> {
                let up = BlockOverlap::new(lower, upper, params, basis.cutoff())?;
                let down = up.transposed();
                Ok(Transition { lower, upper, up, down })
            };
            Ok([one(a)?, one(b)?])
        };
        Ok(PulseOperator { basis: Arc::clone(basis), x: make(Polarization::X)?, y: make(Polarization::Y)? })
    }

    pub fn basis(&self) -> &Arc<VibronicBasis> {
        &self.basis
    }

    /// First-order action `−iθ e^{∓iΦ} μ^{±}` of `pulse` on `psi`.
    pub fn apply(&self, psi: &StateVector, pulse: &PulseSpec, order: PerturbativeOrder) -> Result<StateVector> {
        if **psi.basis() != *self.basis {
            return Err(Error::BasisMismatch);
        }
        let basis = &self.basis;
        let transitions = match pulse.polarization {
            Polarization::X => &self.x,
            Polarization::Y => &self.y,
        };
        let mut out = StateVector::zeros(psi.basis());
        let mut buf = vec![Complex64::new(0.0, 0.0); basis.block_size()];
        let minus_i = Complex64::new(0.0, -pulse.strength);
        for tr in transitions {
            let moves = [
                (matches!(order, PerturbativeOrder::Up | PerturbativeOrder::Both), tr.lower, tr.upper, &tr.up, -1.0),
                (matches!(order, PerturbativeOrder::Down | PerturbativeOrder::Both), tr.upper, tr.lower, &tr.down, 1.0),
            ];
            for (active, from, to, overlap, sign) in moves {
                if !active {
                    continue;
                }
                let Some(src) = psi.block(from) else { continue };
                let dst = basis.require_block(to)?;
                let factor = minus_i * Complex64::from_polar(1.0, sign * pulse.phase);
                overlap.apply(basis, src, &mut buf);
                for (o, b) in out.amplitudes_mut()[dst].iter_mut().zip(&buf) {
                    *o += b * factor;
                }
            }
        }
        Ok(out)
    }

    /// Hermitian adjoint of [`PulseOperator::apply`] for the same pulse and order.
    ///
    /// `(−iθe^{−iΦ}μ⁺)† = +iθe^{+iΦ}μ⁻`, which is minus the down action.
    pub fn apply_adjoint(&self, psi: &StateVector, pulse: &PulseSpec, order: PerturbativeOrder) -> Result<StateVector> {
        let flipped = match order {
            PerturbativeOrder::Up => PerturbativeOrder::Down,
            PerturbativeOrder::Down => PerturbativeOrder::Up,
            PerturbativeOrder::Both => PerturbativeOrder::Both,
        };
        Ok(self.apply(psi, pulse, flipped)?.scaled(Complex64::new(-1.0, 0.0)))
    }
}

/// Convenience wrapper building a [`PulseOperator`] for a single application.
pub fn apply_pulse_first_order(
    psi: &StateVector,
    pulse: &PulseSpec,
    order: PerturbativeOrder,
    params: &DimerParams,
) -> Result<StateVector> {
    PulseOperator::new(params, psi.basis())?.apply(psi, pulse, order)
}

/// One pulse followed by free evolution for `wait`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainStep {
    pub pulse: PulseSpec,
    pub order: PerturbativeOrder,
    pub wait: f64,
}

/// Alternate pulse actions and free propagation.
pub fn pulse_train(psi0: &StateVector, steps: &[TrainStep], ops: &PulseOperator, eig: &EigenSystem) -> Result<StateVector> {
    if let Some(bad) = steps.iter().find(|s| !(s.wait >= 0.0) || !s.wait.is_finite()) {
        return Err(Error::Schedule(format!("waiting time {} after pulse {:?} is negative", bad.wait, bad.pulse.label)));
    }
    let mut psi = psi0.clone();
    for step in steps {
        psi = ops.apply(&psi, &step.pulse, step.order)?;
        if step.wait > 0.0 {
            psi = eig.propagate(&psi, step.wait)?;
        }
    }
    Ok(psi)
}
