//! Diabatic and adiabatic potential surfaces and the donor/acceptor crossing line.

use crate::error::{Error, Result};
use crate::model::{DimerParams, Electronic};

/// The four diabatic surfaces `(v₀, v₁, v₁′, v₂)` at `(q_a, q_b)`.
pub fn diabatic_potentials(qa: f64, qb: f64, params: &DimerParams) -> [f64; 4] {
    let k = 0.5 * params.mass * params.omega * params.omega;
    Electronic::ALL.map(|j| {
        let (ca, cb) = params.surface_center(j);
        params.site_energy(j) + k * ((qa - ca).powi(2) + (qb - cb).powi(2))
    })
}

/// The line `q_b = q_a + offset` on which the donor and acceptor surfaces are degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeLine {
    pub offset: f64,
}

impl RidgeLine {
    pub fn q_b(&self, qa: f64) -> f64 {
        qa + self.offset
    }

    /// Signed distance along `q_⊥ = (q_b − q_a)/√2` from the line.
    pub fn perpendicular_offset(&self, qa: f64, qb: f64) -> f64 {
        (qb - qa - self.offset) / std::f64::consts::SQRT_2
    }
}

/// Solve `v₁ = v₁′`, which gives `q_b = q_a − (ε₁ − ε₁′)/(m ω² d)`.
pub fn ridge_line(params: &DimerParams) -> Result<RidgeLine> {
    if params.d == 0.0 {
        return Err(Error::NoRidge);
    }
    let offset = -params.detuning() / (params.mass * params.omega * params.omega * params.d);
    Ok(RidgeLine { offset })
}

/// Lower and upper adiabatic surfaces, the eigenvalues of `[[v₁, J], [J, v₁′]]`.
pub fn adiabatic_surfaces(qa: f64, qb: f64, params: &DimerParams) -> (f64, f64) {
    let v = diabatic_potentials(qa, qb, params);
    let mean = 0.5 * (v[1] + v[2]);
    let half = 0.5 * (v[1] - v[2]);
    let root = half.hypot(params.coupling);
    (mean - root, mean + root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minima_and_vertical_energy() {
        let p = DimerParams { epsilon_1: 0.3, epsilon_1p: -1.1, epsilon_2: Some(4.0), ..DimerParams::default() };
        let d = p.d;
        assert_eq!(diabatic_potentials(0.0, 0.0, &p)[0], 0.0);
        assert!((diabatic_potentials(d, 0.0, &p)[1] - p.epsilon_1).abs() < 1e-14);
        assert!((diabatic_potentials(0.0, d, &p)[2] - p.epsilon_1p).abs() < 1e-14);
        assert!((diabatic_potentials(d, d, &p)[3] - 4.0).abs() < 1e-14);
        let vertical = diabatic_potentials(0.0, 0.0, &p)[1] - p.epsilon_1;
        assert!((vertical - p.reorganization_energy()).abs() < 1e-12);
    }

    #[test]
    fn ridge_examples() {
        let p = DimerParams::default();
        assert_eq!(ridge_line(&p).unwrap().offset, 0.0);
        let lam = p.reorganization_energy();
        let down = p.with_detuning(2.0 * lam);
        let r = ridge_line(&down).unwrap();
        assert!((r.q_b(down.d) - 0.0).abs() < 1e-12, "passes through the donor minimum");
        for qa in [-3.0, -0.5, 0.0, 1.7, 4.2] {
            let v = diabatic_potentials(qa, r.q_b(qa), &down);
            assert!((v[1] - v[2]).abs() < 1e-12);
        }
        let flat = DimerParams { d: 0.0, ..DimerParams::default() };
        assert_eq!(ridge_line(&flat), Err(Error::NoRidge));
    }

    #[test]
    fn adiabatic_limits() {
        let p = DimerParams::default().with_coupling(0.0);
        let (lo, hi) = adiabatic_surfaces(0.4, 1.3, &p);
        let v = diabatic_potentials(0.4, 1.3, &p);
        assert!((lo - v[1].min(v[2])).abs() < 1e-14 && (hi - v[1].max(v[2])).abs() < 1e-14);
        let p = DimerParams::default().with_detuning(1.0);
        let r = ridge_line(&p).unwrap();
        let (lo, hi) = adiabatic_surfaces(0.9, r.q_b(0.9), &p);
        assert!((hi - lo - 2.0 * p.coupling).abs() < 1e-12);
    }
}
