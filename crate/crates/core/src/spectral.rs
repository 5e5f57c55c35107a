//! Exact diagonalization and eigenbasis propagation.
//!
//! The Hamiltonian is split into connected groups of electronic blocks (with the
//! dipole coupling only the donor and acceptor blocks mix), each group is
//! diagonalized on its own and blocks without internal coupling are kept
//! diagonal. Globally the eigenpairs are exposed in ascending energy order.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::ladder::{self, Mode};
use crate::model::{DimerParams, StateVector, VibronicBasis};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
struct Component {
    /// Global basis indices covered by this component, ascending.
    indices: Vec<usize>,
    eigenvalues: Vec<f64>,
    /// Eigenvectors as columns; `None` when the component is already diagonal.
    vectors: Option<DMatrix<f64>>,
}

impl Component {
    fn dim(&self) -> usize {
        self.indices.len()
    }

    /// `Vᵀ x` for the component-local slice `x`.
    fn to_eigen(&self, x: &[Complex64]) -> Vec<Complex64> {
        match &self.vectors {
            None => x.to_vec(),
            Some(v) => {
                let n = self.dim();
                let data = v.as_slice();
                (0..n)
                    .map(|l| {
                        let col = &data[l * n..(l + 1) * n];
                        col.iter().zip(x).map(|(&a, &b)| b * a).sum()
                    })
                    .collect()
            }
        }
    }

    /// `V c`, written into `out`.
    fn from_eigen(&self, c: &[Complex64], out: &mut [Complex64]) {
        match &self.vectors {
            None => out.copy_from_slice(c),
            Some(v) => {
                let n = self.dim();
                let data = v.as_slice();
                out.iter_mut().for_each(|o| *o = ZERO);
                for (l, &cl) in c.iter().enumerate() {
                    if cl == ZERO {
                        continue;
                    }
                    let col = &data[l * n..(l + 1) * n];
                    for (o, &a) in out.iter_mut().zip(col) {
                        *o += cl * a;
                    }
                }
            }
        }
    }

    fn column(&self, l: usize) -> Vec<f64> {
        match &self.vectors {
            None => {
                let mut e = vec![0.0; self.dim()];
                e[l] = 1.0;
                e
            }
            Some(v) => v.column(l).iter().copied().collect(),
        }
    }
}

/// Eigenvalues and eigenvectors of a [`HamiltonianMatrix`].
#[derive(Debug, Clone)]
pub struct EigenSystem {
    basis: Arc<VibronicBasis>,
    components: Vec<Component>,
    /// Global eigen index -> (component, local index), ascending in energy.
    order: Vec<(usize, usize)>,
    eigenvalues: Vec<f64>,
}

fn matrix_hash(m: &DMatrix<f64>) -> u64 {
    let mut h = DefaultHasher::new();
    m.nrows().hash(&mut h);
    for v in m.iter() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Make the largest-magnitude entry of every column positive.
fn fix_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let mut best = 0usize;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Diagonalize `h`. Eigenvector signs are fixed so that each vector's
/// largest-magnitude component is positive.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<EigenSystem> {
    let basis = Arc::clone(h.basis());
    let states = basis.states().to_vec();
    let ranges: Vec<_> = states.iter().map(|&s| basis.block(s).expect("block")).collect();
    let m = h.matrix();

    // group electronic blocks connected by non-zero matrix elements
    let nb = states.len();
    let mut group: Vec<usize> = (0..nb).collect();
    for a in 0..nb {
        for b in (a + 1)..nb {
            let coupled = ranges[a].clone().any(|i| ranges[b].clone().any(|j| m[(i, j)] != 0.0));
            if coupled {
                let (ga, gb) = (group[a], group[b]);
                for g in group.iter_mut() {
                    if *g == gb {
                        *g = ga;
                    }
                }
            }
        }
    }
    let mut labels: Vec<usize> = group.clone();
    labels.sort_unstable();
    labels.dedup();

    let mut components = Vec::with_capacity(labels.len());
    for label in labels {
        let indices: Vec<usize> =
            (0..nb).filter(|&b| group[b] == label).flat_map(|b| ranges[b].clone()).collect();
        let n = indices.len();
        let sub = DMatrix::from_fn(n, n, |i, j| m[(indices[i], indices[j])]);
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || sub[(i, j)] == 0.0));
        let component = if diagonal {
            Component { eigenvalues: (0..n).map(|i| sub[(i, i)]).collect(), indices, vectors: None }
        } else {
            let hash = matrix_hash(&sub);
            let eig = SymmetricEigen::try_new(sub, f64::EPSILON, 1_000_000)
                .ok_or(Error::EigenFailure { hash, dim: n })?;
            let mut pairs: Vec<usize> = (0..n).collect();
            pairs.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
            let eigenvalues: Vec<f64> = pairs.iter().map(|&l| eig.eigenvalues[l]).collect();
            let mut vectors = DMatrix::from_fn(n, n, |i, l| eig.eigenvectors[(i, pairs[l])]);
            fix_signs(&mut vectors);
            Component { indices, eigenvalues, vectors: Some(vectors) }
        };
        components.push(component);
    }

    let mut order: Vec<(usize, usize)> = components
        .iter()
        .enumerate()
        .flat_map(|(c, comp)| (0..comp.dim()).map(move |l| (c, l)))
        .collect();
    order.sort_by(|&(ca, la), &(cb, lb)| {
        let ea = components[ca].eigenvalues[la];
        let eb = components[cb].eigenvalues[lb];
        ea.total_cmp(&eb)
            .then(components[ca].indices[0].cmp(&components[cb].indices[0]))
            .then(la.cmp(&lb))
    });
    let eigenvalues = order.iter().map(|&(c, l)| components[c].eigenvalues[l]).collect();
    Ok(EigenSystem { basis, components, order, eigenvalues })
}

impl EigenSystem {
    pub fn basis(&self) -> &Arc<VibronicBasis> {
        &self.basis
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `|λ|`, the spectral norm of `H`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()))
    }

    /// Eigenvector `l` in the diabatic basis.
    pub fn eigenvector(&self, l: usize) -> Vec<f64> {
        let (c, local) = self.order[l];
        let comp = &self.components[c];
        let mut v = vec![0.0; self.basis.len()];
        for (&g, x) in comp.indices.iter().zip(comp.column(local)) {
            v[g] = x;
        }
        v
    }

    /// Dense transfer matrix `T`, column `l` being eigenvector `l`.
    pub fn transfer_matrix(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        let mut t = DMatrix::zeros(n, n);
        for l in 0..self.len() {
            let v = self.eigenvector(l);
            t.set_column(l, &nalgebra::DVector::from_vec(v));
        }
        t
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        if Arc::ptr_eq(psi.basis(), &self.basis) || **psi.basis() == *self.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    fn component_coefficients(&self, psi: &StateVector) -> Vec<Vec<Complex64>> {
        let x = psi.amplitudes();
        self.components
            .iter()
            .map(|comp| {
                let local: Vec<Complex64> = comp.indices.iter().map(|&i| x[i]).collect();
                comp.to_eigen(&local)
            })
            .collect()
    }

    /// Expansion coefficients `Tᵀ ψ` in global eigen order.
    pub fn to_eigen(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        self.check(psi)?;
        let per = self.component_coefficients(psi);
        Ok(self.order.iter().map(|&(c, l)| per[c][l]).collect())
    }

    /// Inverse of [`EigenSystem::to_eigen`].
    pub fn from_eigen(&self, coefs: &[Complex64]) -> Result<StateVector> {
        if coefs.len() != self.len() {
            return Err(Error::BasisMismatch);
        }
        let mut per: Vec<Vec<Complex64>> = self.components.iter().map(|c| vec![ZERO; c.dim()]).collect();
        for (&(c, l), &v) in self.order.iter().zip(coefs) {
            per[c][l] = v;
        }
        Ok(self.assemble(&per))
    }

    fn assemble(&self, per: &[Vec<Complex64>]) -> StateVector {
        let mut out = vec![ZERO; self.basis.len()];
        let mut buf = Vec::new();
        for (comp, c) in self.components.iter().zip(per) {
            buf.resize(comp.dim(), ZERO);
            comp.from_eigen(c, &mut buf);
            for (&g, &v) in comp.indices.iter().zip(&buf) {
                out[g] = v;
            }
        }
        StateVector::from_amplitudes(&self.basis, out).expect("length matches basis")
    }

    /// `ψ(t) = T e^{−iλt} Tᵀ ψ(0)`. Negative times propagate backwards.
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        Ok(self.propagator(psi)?.at(t))
    }

    /// Cache the eigen expansion of `psi` for repeated propagation.
    pub fn propagator(&self, psi: &StateVector) -> Result<Propagator<'_>> {
        self.check(psi)?;
        Ok(Propagator { eig: self, initial: psi.clone(), coefs: self.component_coefficients(psi) })
    }

    /// `max_l ‖H v_l − λ_l v_l‖`.
    pub fn max_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let m = h.matrix();
        (0..self.len())
            .into_par_iter()
            .map(|l| {
                let v = nalgebra::DVector::from_vec(self.eigenvector(l));
                let r = m * &v - &v * self.eigenvalues[l];
                r.norm()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max |TᵀT − 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for comp in &self.components {
            if let Some(v) = &comp.vectors {
                let g = v.transpose() * v;
                for i in 0..g.nrows() {
                    for j in 0..g.ncols() {
                        let target = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((g[(i, j)] - target).abs());
                    }
                }
            }
        }
        worst
    }

    /// Eigenvalues as `index,energy` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,energy")?;
        for (i, e) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{i},{e:.16e}")?;
        }
        Ok(())
    }

    /// Gram matrix `G_{ll′} = Σ_{i∈block} T_{il} T_{il′}` restricted to the
    /// component containing block `j`, together with that component's global
    /// eigen indices. Used for analytic time averages.
    pub(crate) fn block_gram(&self, j: crate::model::Electronic) -> Result<(Vec<usize>, DMatrix<f64>)> {
        let range = self.basis.require_block(j)?;
        let c = self
            .components
            .iter()
            .position(|comp| comp.indices.contains(&range.start))
            .expect("every index belongs to a component");
        let comp = &self.components[c];
        let rows: Vec<usize> = comp
            .indices
            .iter()
            .enumerate()
            .filter(|(_, g)| range.contains(g))
            .map(|(i, _)| i)
            .collect();
        let n = comp.dim();
        let sub = match &comp.vectors {
            None => DMatrix::from_fn(rows.len(), n, |r, l| if rows[r] == l { 1.0 } else { 0.0 }),
            Some(v) => DMatrix::from_fn(rows.len(), n, |r, l| v[(rows[r], l)]),
        };
        let gram = sub.transpose() * sub;
        let mut global = vec![0usize; n];
        for (g, &(cc, l)) in self.order.iter().enumerate() {
            if cc == c {
                global[l] = g;
            }
        }
        Ok((global, gram))
    }
}

/// Propagation of one fixed initial state to many times.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    eig: &'a EigenSystem,
    initial: StateVector,
    coefs: Vec<Vec<Complex64>>,
}

impl Propagator<'_> {
    pub fn at(&self, t: f64) -> StateVector {
        if t == 0.0 {
            return self.initial.clone();
        }
        let per: Vec<Vec<Complex64>> = self
            .eig
            .components
            .iter()
            .zip(&self.coefs)
            .map(|(comp, c)| {
                comp.eigenvalues
                    .iter()
                    .zip(c)
                    .map(|(&e, &v)| v * Complex64::from_polar(1.0, -e * t))
                    .collect()
            })
            .collect();
        self.eig.assemble(&per)
    }

    /// States at all `times`, computed in parallel, returned in input order.
    pub fn at_many(&self, times: &[f64]) -> Vec<StateVector> {
        times.par_iter().map(|&t| self.at(t)).collect()
    }

    /// Expansion coefficients in global eigen order.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.eig.order.iter().map(|&(c, l)| self.coefs[c][l]).collect()
    }
}

/// Momentum statistics of one eigenstate and its weights in supplied states.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenMoments {
    pub energy: f64,
    /// `⟨p_∥⟩`, `⟨p_⊥⟩`; identically zero for real eigenvectors.
    pub p_par: f64,
    pub p_perp: f64,
    /// `sqrt⟨p_∥²⟩`, `sqrt⟨p_⊥²⟩`.
    pub rms_p_par: f64,
    pub rms_p_perp: f64,
    /// `|⟨l|ψ_s⟩|²` for each supplied state.
    pub weights: Vec<f64>,
}

/// Per-eigenstate mean and RMS momenta along `q_∥` and `q_⊥`, plus expansion
/// weights of the supplied diabatic states.
pub fn eigen_momentum_map(eig: &EigenSystem, params: &DimerParams, states: &[StateVector]) -> Result<Vec<EigenMoments>> {
    let coefs: Vec<Vec<Complex64>> = states.iter().map(|s| eig.to_eigen(s)).collect::<Result<_>>()?;
    let basis = eig.basis();
    let cutoff = basis.cutoff();
    let scale = (0.5 * params.mass * params.omega).sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let out = (0..eig.len())
        .into_par_iter()
        .map(|l| {
            let v = eig.eigenvector(l);
            let (mut pa, mut pb, mut par2, mut perp2) = (0.0, 0.0, 0.0, 0.0);
            for &j in basis.states() {
                let r = basis.block(j).expect("block");
                let amps: Vec<Complex64> = v[r].iter().map(|&x| Complex64::new(x, 0.0)).collect();
                if amps.iter().all(|a| *a == ZERO) {
                    continue;
                }
                // p ψ = i sqrt(mω/2) (a† − a) ψ on the enlarged block
                let p_apply = |mode: Mode| -> Vec<Complex64> {
                    let up = ladder::raise(&amps, cutoff, mode);
                    let down = ladder::embed(&ladder::lower(&amps, cutoff, mode), cutoff, cutoff + 1);
                    up.iter().zip(&down).map(|(u, d)| (u - d) * Complex64::new(0.0, scale)).collect()
                };
                let xa = p_apply(Mode::A);
                let xb = p_apply(Mode::B);
                let big = ladder::embed(&amps, cutoff, cutoff + 1);
                let dot = |x: &[Complex64]| -> f64 { big.iter().zip(x).map(|(a, b)| (a.conj() * b).re).sum() };
                pa += dot(&xa);
                pb += dot(&xb);
                for (a, b) in xa.iter().zip(&xb) {
                    par2 += ((a + b) * s2).norm_sqr();
                    perp2 += ((b - a) * s2).norm_sqr();
                }
            }
            EigenMoments {
                energy: eig.eigenvalues()[l],
                p_par: (pa + pb) * s2,
                p_perp: (pb - pa) * s2,
                rms_p_par: par2.sqrt(),
                rms_p_perp: perp2.sqrt(),
                weights: coefs.iter().map(|c| c[l].norm_sqr()).collect(),
            }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hamiltonian;
    use crate::model::Electronic;

    #[test]
    fn diagonal_hamiltonian_gives_sorted_diagonal() {
        let p = DimerParams { epsilon_1: 0.25, ..DimerParams::default() }.with_coupling(0.0);
        let basis = VibronicBasis::one_exciton(3);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let eig = diagonalize(&h).unwrap();
        let mut diag: Vec<f64> = (0..h.dim()).map(|i| h.get(i, i)).collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(eig.eigenvalues(), &diag[..]);
        let t = eig.transfer_matrix();
        for l in 0..t.ncols() {
            let col = t.column(l);
            assert_eq!(col.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(col.iter().filter(|&&x| x == 0.0).count(), t.nrows() - 1);
        }
    }

    #[test]
    fn two_level_splitting() {
        for (de, j) in [(0.0, 0.1), (0.3, 0.1), (-1.2, 0.45)] {
            let p = DimerParams { d: 0.0, ..DimerParams::default() }.with_detuning(de).with_coupling(j);
            let basis = VibronicBasis::one_exciton(0);
            let eig = diagonalize(&build_hamiltonian(&p, &basis).unwrap()).unwrap();
            let gap = eig.eigenvalues()[1] - eig.eigenvalues()[0];
            let rabi = (de * de + 4.0 * j * j).sqrt();
            assert!((gap - rabi).abs() < 1e-12, "{gap} vs {rabi}");
        }
    }

    #[test]
    fn residuals_and_sign_convention() {
        let p = DimerParams::default().with_detuning(0.7);
        let basis = VibronicBasis::full(8);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let eig = diagonalize(&h).unwrap();
        assert!(eig.max_residual(&h) < 1e-10 * eig.spectral_norm());
        assert!(eig.orthonormality_error() < 1e-10);
        for l in 0..eig.len() {
            let v = eig.eigenvector(l);
            let big = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(big > 0.0);
        }
        assert!(eig.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn propagation_identity_and_eigenstate_phase() {
        let p = DimerParams::default();
        let basis = VibronicBasis::one_exciton(6);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let eig = diagonalize(&h).unwrap();
        let psi = StateVector::basis_state(&basis, Electronic::Donor, 1, 2).unwrap();
        let same = eig.propagate(&psi, 0.0).unwrap();
        for (a, b) in same.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        let l = 7;
        let coefs: Vec<Complex64> =
            (0..eig.len()).map(|k| Complex64::new(if k == l { 1.0 } else { 0.0 }, 0.0)).collect();
        let v = eig.from_eigen(&coefs).unwrap();
        let t = 3.3;
        let vt = eig.propagate(&v, t).unwrap();
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues()[l] * t);
        for (a, b) in vt.amplitudes().iter().zip(v.amplitudes()) {
            assert!((a - b * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn momentum_map_weights_and_zero_means() {
        let p = DimerParams::default().with_coupling(0.0);
        let p = DimerParams { d: 0.0, ..p };
        let basis = VibronicBasis::one_exciton(4);
        let eig = diagonalize(&build_hamiltonian(&p, &basis).unwrap()).unwrap();
        let psi = StateVector::basis_state(&basis, Electronic::Donor, 0, 0).unwrap();
        let map = eigen_momentum_map(&eig, &p, &[psi]).unwrap();
        let total: f64 = map.iter().map(|m| m.weights[0]).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(map.iter().all(|m| m.p_par == 0.0 && m.p_perp == 0.0));
        // ground oscillator state: <p_a^2> = <p_b^2> = 1/2, so <p_par^2> = 1/2
        let ground = map.iter().find(|m| m.weights[0] > 0.5).unwrap();
        assert!((ground.rms_p_par - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
