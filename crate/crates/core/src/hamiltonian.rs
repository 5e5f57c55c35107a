//! Dense vibronic Hamiltonian in the truncated product basis.

use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::franck_condon::BlockOverlap;
use crate::model::{DimerParams, Electronic, StateVector, VibronicBasis};

/// Real symmetric Hamiltonian matrix together with the basis it was built on.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    basis: Arc<VibronicBasis>,
    params: DimerParams,
    matrix: DMatrix<f64>,
}

/// Assemble `H` for `params` on `basis`, which must contain the donor and acceptor blocks.
///
/// Diagonal entries are `ε_j + ω(1 + M + N)`. The donor/acceptor block holds
/// `J ⟨1′ M′ N′ | 1 M N⟩`; the ground and doubly excited blocks are uncoupled.
pub fn build_hamiltonian(params: &DimerParams, basis: &Arc<VibronicBasis>) -> Result<HamiltonianMatrix> {
    params.validate()?;
    let donor = basis.require_block(Electronic::Donor)?;
    let acceptor = basis.require_block(Electronic::Acceptor)?;
    let dim = basis.len();
    let mut matrix = DMatrix::<f64>::zeros(dim, dim);
    for (i, e) in basis.entries().iter().enumerate() {
        matrix[(i, i)] = params.site_energy(e.state) + params.omega * (1.0 + (e.m + e.n) as f64);
    }
    if params.coupling != 0.0 {
        let ov = BlockOverlap::new(Electronic::Donor, Electronic::Acceptor, params, basis.cutoff())?;
        let entries = basis.entries();
        for k in acceptor.clone() {
            let ek = entries[k];
            for l in donor.clone() {
                let el = entries[l];
                let v = params.coupling * ov.element(ek.m, ek.n, el.m, el.n);
                matrix[(k, l)] = v;
                matrix[(l, k)] = v;
            }
        }
    }
    Ok(HamiltonianMatrix { basis: Arc::clone(basis), params: params.clone(), matrix })
}

impl HamiltonianMatrix {
    pub fn basis(&self) -> &Arc<VibronicBasis> {
        &self.basis
    }

    pub fn params(&self) -> &DimerParams {
        &self.params
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    /// Largest absolute entry, `max |H - Hᵀ|` is zero by construction.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        worst
    }

    /// `H ψ`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if **psi.basis() != *self.basis {
            return Err(Error::BasisMismatch);
        }
        let x = psi.amplitudes();
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (col, &xc) in x.iter().enumerate() {
            if xc == Complex64::new(0.0, 0.0) {
                continue;
            }
            let column = self.matrix.column(col);
            for (o, &h) in out.iter_mut().zip(column.iter()) {
                if h != 0.0 {
                    *o += xc * h;
                }
            }
        }
        StateVector::from_amplitudes(psi.basis(), out)
    }

    /// `⟨ψ|H|ψ⟩` (real for a symmetric matrix).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let hpsi = self.apply(psi)?;
        Ok(psi.inner(&hpsi)?.re)
    }

    /// Non-zero entries as `row,col,value` lines, row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "row,col,value")?;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i},{j},{v:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::franck_condon::franck_condon_2d;

    #[test]
    fn zero_coupling_is_diagonal() {
        let p = DimerParams::default().with_coupling(0.0);
        let basis = VibronicBasis::full(4);
        let h = build_hamiltonian(&p, &basis).unwrap();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(h.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn diagonal_entries() {
        let p = DimerParams { epsilon_1: 0.7, epsilon_1p: -0.2, ..DimerParams::default() };
        let basis = VibronicBasis::full(3);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let i = basis.index_of(Electronic::Donor, 0, 0).unwrap();
        assert_eq!(h.get(i, i), p.epsilon_1 + p.omega);
        for (k, e) in basis.entries().iter().enumerate() {
            let expect = p.site_energy(e.state) + p.omega * (1.0 + (e.m + e.n) as f64);
            assert_eq!(h.get(k, k), expect);
        }
        assert_eq!(h.asymmetry(), 0.0);
    }

    #[test]
    fn coupling_block_uses_franck_condon_overlaps() {
        let p = DimerParams::default();
        let basis = VibronicBasis::one_exciton(5);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let k = basis.index_of(Electronic::Acceptor, 2, 1).unwrap();
        let l = basis.index_of(Electronic::Donor, 0, 3).unwrap();
        let fc = franck_condon_2d(2, 1, 0, 3, p.delta()).unwrap();
        assert!((h.get(k, l) - p.coupling * fc).abs() < 1e-15);
        let g = basis.index_of(Electronic::Donor, 1, 1).unwrap();
        assert_eq!(h.get(l, g), 0.0);
    }

    #[test]
    fn requires_one_exciton_blocks() {
        let basis = VibronicBasis::new(&[Electronic::Ground], 2).unwrap();
        assert!(matches!(
            build_hamiltonian(&DimerParams::default(), &basis),
            Err(Error::MissingBlock(Electronic::Donor))
        ));
    }
}
