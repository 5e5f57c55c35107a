//! Scalar and trajectory observables of propagated states, plus the analytic
//! comparison curves used to interpret the transfer kinetics.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::ladder::{self, Mode};
use crate::model::{DimerParams, Electronic, StateVector};
use crate::spectral::{EigenSystem, Propagator};

/// `Σ_{MN} |ψ_{jMN}|²`.
pub fn population(psi: &StateVector, j: Electronic) -> Result<f64> {
    let block = psi.block(j).ok_or(Error::MissingBlock(j))?;
    Ok(block.iter().map(|c| c.norm_sqr()).sum())
}

/// Block-restricted inner product `Σ_{MN} ψ̃*_{jMN} ψ_{jMN}`.
pub fn overlap(psi_tilde: &StateVector, psi: &StateVector, j: Electronic) -> Result<Complex64> {
    psi_tilde.check_compatible(psi)?;
    let a = psi_tilde.block(j).ok_or(Error::MissingBlock(j))?;
    let b = psi.block(j).ok_or(Error::MissingBlock(j))?;
    Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
}

/// Normalized `(⟨a⟩, ⟨b⟩)` of block `j` in surface-`j` frame.
fn block_lowering(psi: &StateVector, j: Electronic) -> Result<(Complex64, Complex64, f64)> {
    let block = psi.block(j).ok_or(Error::MissingBlock(j))?;
    let pop: f64 = block.iter().map(|c| c.norm_sqr()).sum();
    if pop <= 0.0 {
        return Err(Error::EmptyBlock(j));
    }
    let cutoff = psi.basis().cutoff();
    let a = ladder::expect_lower(block, cutoff, Mode::A) / pop;
    let b = ladder::expect_lower(block, cutoff, Mode::B) / pop;
    Ok((a, b, pop))
}

/// Mean coherent amplitudes `(ᾱ, β̄)` of block `j`, measured in the ground frame.
pub fn mean_amplitude(psi: &StateVector, j: Electronic, params: &DimerParams) -> Result<(Complex64, Complex64)> {
    let (a, b, _) = block_lowering(psi, j)?;
    let (da, db) = params.amplitude_center(j);
    Ok((a + da, b + db))
}

/// `(q̄_a, q̄_b)` of block `j` in absolute coordinates.
pub fn mean_position(psi: &StateVector, j: Electronic, params: &DimerParams) -> Result<(f64, f64)> {
    let (a, b) = mean_amplitude(psi, j, params)?;
    let s = params.amplitude_to_position();
    Ok((s * a.re, s * b.re))
}

/// `(p̄_a, p̄_b)` of block `j`.
pub fn mean_momentum(psi: &StateVector, j: Electronic, params: &DimerParams) -> Result<(f64, f64)> {
    let (a, b, _) = block_lowering(psi, j)?;
    let s = params.amplitude_to_momentum();
    Ok((s * a.im, s * b.im))
}

/// Rotate `(x_a, x_b)` into `(x_∥, x_⊥) = ((x_a + x_b)/√2, (−x_a + x_b)/√2)`.
pub fn rotate(xa: f64, xb: f64) -> (f64, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (s * (xa + xb), s * (xb - xa))
}

/// Normalized oscillator eigenfunctions `ψ_0..=ψ_nmax` at displacement `x` from
/// the potential minimum.
pub fn hermite_functions(nmax: usize, x: f64, params: &DimerParams) -> Vec<f64> {
    let mw = params.mass * params.omega;
    let xi = mw.sqrt() * x;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push((mw / PI).powf(0.25) * (-0.5 * xi * xi).exp());
    if nmax >= 1 {
        out.push(2f64.sqrt() * xi * out[0]);
    }
    for n in 1..nmax {
        let next = (2.0 / (n + 1) as f64).sqrt() * xi * out[n] - (n as f64 / (n + 1) as f64).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Rectangular coordinate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub qa: Vec<f64>,
    pub qb: Vec<f64>,
}

impl Grid2D {
    /// `n × n` equally spaced points covering `[lo, hi]` along both axes.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::Grid(format!("need n >= 2 and hi > lo, got n = {n}, [{lo}, {hi}]")));
        }
        let axis: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        Ok(Grid2D { qa: axis.clone(), qb: axis })
    }

    /// Area element, assuming uniform spacing.
    pub fn cell_area(&self) -> f64 {
        let step = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 1.0 };
        step(&self.qa) * step(&self.qb)
    }
}

/// Complex field sampled on a [`Grid2D`], stored with `q_a` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub na: usize,
    pub nb: usize,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn get(&self, ia: usize, ib: usize) -> Complex64 {
        self.values[ia * self.nb + ib]
    }
}

/// `ψ_j(q_a, q_b) = Σ ψ_{jMN} φ_M(q_a − c_a) φ_N(q_b − c_b)`.
pub fn wavefunction_grid(psi: &StateVector, j: Electronic, grid: &Grid2D, params: &DimerParams) -> Result<Field> {
    let block = psi.block(j).ok_or(Error::MissingBlock(j))?;
    let basis = psi.basis();
    let cutoff = basis.cutoff();
    let (ca, cb) = params.surface_center(j);
    let ha: Vec<Vec<f64>> = grid.qa.iter().map(|&q| hermite_functions(cutoff, q - ca, params)).collect();
    let hb: Vec<Vec<f64>> = grid.qb.iter().map(|&q| hermite_functions(cutoff, q - cb, params)).collect();
    let values = ha
        .par_iter()
        .flat_map_iter(|fa| {
            hb.iter().map(move |fb| {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..=cutoff {
                    let mut row = Complex64::new(0.0, 0.0);
                    for m in 0..=(cutoff - n) {
                        row += block[basis.local_index(m, n).expect("in range")] * fa[m];
                    }
                    acc += row * fb[n];
                }
                acc
            })
        })
        .collect();
    Ok(Field { na: grid.qa.len(), nb: grid.qb.len(), values })
}

/// One-exciton nuclear field `ψ₁ + ψ₁′`.
pub fn one_exciton_wavefunction(psi: &StateVector, grid: &Grid2D, params: &DimerParams) -> Result<Field> {
    let mut f = wavefunction_grid(psi, Electronic::Donor, grid, params)?;
    let g = wavefunction_grid(psi, Electronic::Acceptor, grid, params)?;
    for (a, b) in f.values.iter_mut().zip(g.values) {
        *a += b;
    }
    Ok(f)
}

/// Short-time envelope `½ (e^{−Λ/(4ω)})² J² t²`.
pub fn short_time_law(t: f64, params: &DimerParams) -> f64 {
    let fc = (-0.25 * params.reorganization_energy() / params.omega).exp();
    0.5 * fc * fc * params.coupling * params.coupling * t * t
}

/// Acceptor population as an incoherent sum of independent two-level Rabi
/// oscillations, one for every (donor level, acceptor level) pair:
/// `Σ |c_l|² (2V/Ω)² sin²(Ωt/2)` with `Ω = sqrt((H_kk − H_ll)² + 4V²)` and
/// `V = J·FC(l, k)`.
pub fn pair_level_population(h: &HamiltonianMatrix, psi0: &StateVector, t: f64) -> Result<f64> {
    let basis = h.basis();
    if **psi0.basis() != **basis {
        return Err(Error::BasisMismatch);
    }
    let donor = basis.require_block(Electronic::Donor)?;
    let acceptor = basis.require_block(Electronic::Acceptor)?;
    let x = psi0.amplitudes();
    let mut total = 0.0;
    for l in donor {
        let w = x[l].norm_sqr();
        if w == 0.0 {
            continue;
        }
        for k in acceptor.clone() {
            let v = h.get(k, l);
            if v == 0.0 {
                continue;
            }
            let detune = h.get(k, k) - h.get(l, l);
            let rabi = (detune * detune + 4.0 * v * v).sqrt();
            total += w * (2.0 * v / rabi).powi(2) * (0.5 * rabi * t).sin().powi(2);
        }
    }
    Ok(total)
}

/// `e^{−α²} Σ_N α^{2N}/N! cos²(g √(N+1) t)`.
pub fn jcm_curve(t: f64, g: f64, alpha: f64) -> f64 {
    let mean = alpha * alpha;
    let mut weight = (-mean).exp();
    let mut acc = 0.0;
    let mut seen = 0.0;
    let mut n = 0usize;
    loop {
        acc += weight * (g * ((n + 1) as f64).sqrt() * t).cos().powi(2);
        seen += weight;
        n += 1;
        if (1.0 - seen < 1e-15 && n as f64 > mean) || n > 4096 {
            break;
        }
        weight *= mean / n as f64;
    }
    acc
}

/// Least-squares fit of [`jcm_curve`] parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcmFit {
    pub g: f64,
    pub alpha: f64,
    pub rms: f64,
}

fn jcm_rms(times: &[f64], values: &[f64], g: f64, alpha: f64) -> f64 {
    let s: f64 = times.iter().zip(values).map(|(&t, &v)| (jcm_curve(t, g, alpha) - v).powi(2)).sum();
    (s / times.len() as f64).sqrt()
}

/// Fit `(g, α)` on the given box by a coarse grid followed by pattern-search refinement.
pub fn fit_jcm(times: &[f64], values: &[f64], g_range: (f64, f64), alpha_range: (f64, f64)) -> Result<JcmFit> {
    if times.len() != values.len() || times.is_empty() {
        return Err(invalid("values", "need equally many non-empty times and values"));
    }
    let steps = 48;
    let at = |r: (f64, f64), i: usize| r.0 + (r.1 - r.0) * i as f64 / steps as f64;
    let candidates: Vec<(f64, f64)> =
        (0..=steps).flat_map(|i| (0..=steps).map(move |k| (i, k))).map(|(i, k)| (at(g_range, i), at(alpha_range, k))).collect();
    let scored: Vec<(f64, f64, f64)> =
        candidates.par_iter().map(|&(g, a)| (g, a, jcm_rms(times, values, g, a))).collect();
    let (mut g, mut a, mut best) = scored
        .into_iter()
        .fold((0.0, 0.0, f64::INFINITY), |acc, x| if x.2 < acc.2 { x } else { acc });
    let mut hg = (g_range.1 - g_range.0) / steps as f64;
    let mut ha = (alpha_range.1 - alpha_range.0) / steps as f64;
    while hg > 1e-9 * (1.0 + g.abs()) || ha > 1e-9 * (1.0 + a.abs()) {
        let mut moved = false;
        for (dg, da) in [(hg, 0.0), (-hg, 0.0), (0.0, ha), (0.0, -ha)] {
            let (ng, na) = (g + dg, a + da);
            if ng < g_range.0 || ng > g_range.1 || na < alpha_range.0 || na > alpha_range.1 {
                continue;
            }
            let r = jcm_rms(times, values, ng, na);
            if r < best {
                (g, a, best) = (ng, na, r);
                moved = true;
            }
        }
        if !moved {
            hg *= 0.5;
            ha *= 0.5;
        }
    }
    Ok(JcmFit { g, alpha: a, rms: best })
}

/// First ridge-crossing time of the Franck-Condon trajectory as a fraction of
/// the vibrational period, `arccos(1 − Δε/(2Λ)) / (2π)`.
pub fn transfer_instant(params: &DimerParams) -> Result<f64> {
    let lambda = params.reorganization_energy();
    if lambda == 0.0 {
        return Err(Error::NoRidge);
    }
    let arg = 1.0 - params.detuning() / (2.0 * lambda);
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::UnreachableRidge(arg));
    }
    Ok(arg.acos() / (2.0 * PI))
}

/// Exact time average `(1/T) ∫₀ᵀ P_j(t) dt` from the eigen expansion.
pub fn time_averaged_population(eig: &EigenSystem, psi0: &StateVector, j: Electronic, total: f64) -> Result<f64> {
    if !(total > 0.0) {
        return Err(invalid("total", "averaging time must be positive"));
    }
    let coefs = eig.to_eigen(psi0)?;
    let (global, gram) = eig.block_gram(j)?;
    let c: Vec<Complex64> = global.iter().map(|&g| coefs[g]).collect();
    let e: Vec<f64> = global.iter().map(|&g| eig.eigenvalues()[g]).collect();
    let n = c.len();
    let acc: f64 = (0..n)
        .into_par_iter()
        .map(|l| {
            let mut row = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let gkl = gram[(l, k)];
                if gkl == 0.0 {
                    continue;
                }
                let delta = e[l] - e[k];
                let x = delta * total;
                let avg = if x.abs() < 1e-12 {
                    Complex64::new(1.0, 0.5 * x)
                } else {
                    (Complex64::from_polar(1.0, x) - 1.0) / Complex64::new(0.0, x)
                };
                row += c[l].conj() * c[k] * gkl * avg;
            }
            row.re
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    Ok(acc)
}

/// Block population at each time.
pub fn population_trajectory(prop: &Propagator<'_>, times: &[f64], j: Electronic) -> Result<Vec<f64>> {
    times.par_iter().map(|&t| population(&prop.at(t), j)).collect()
}

/// Mean positions of block `j` at each time.
pub fn mean_position_trajectory(
    prop: &Propagator<'_>,
    times: &[f64],
    j: Electronic,
    params: &DimerParams,
) -> Result<Vec<(f64, f64)>> {
    times.par_iter().map(|&t| mean_position(&prop.at(t), j, params)).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(invalid("samples", "need at least two strictly positive (x, y) pairs"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Named columns sampled on a common time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// One row per time.
    pub rows: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != times.len() || rows.iter().any(|r| r.len() != names.len()) {
            return Err(invalid("rows", "shape does not match times and column names"));
        }
        Ok(Trajectory { times, names, rows })
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for n in &self.names {
            write!(out, ",{n}")?;
        }
        writeln!(out)?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            write!(out, "{t:.16e}")?;
            for v in row {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VibronicBasis;
    use crate::states::{coherent_state, CoherentSpec};

    #[test]
    fn populations_sum_to_norm() {
        let basis = VibronicBasis::full(3);
        let n = basis.len();
        let amps = (0..n).map(|i| Complex64::new((i as f64).sin(), 0.1 * i as f64)).collect();
        let psi = StateVector::from_amplitudes(&basis, amps).unwrap();
        let total: f64 = Electronic::ALL.iter().map(|&j| population(&psi, j).unwrap()).sum();
        assert!((total - psi.norm_sqr()).abs() < 1e-12 * total);
        let ov = overlap(&psi, &psi, Electronic::Acceptor).unwrap();
        assert!((ov.re - population(&psi, Electronic::Acceptor).unwrap()).abs() < 1e-14);
        assert_eq!(ov.im, 0.0);
    }

    #[test]
    fn coherent_mean_position() {
        let p = DimerParams::default();
        let basis = VibronicBasis::one_exciton(30);
        let alpha = Complex64::new(0.7, -1.1);
        let psi =
            coherent_state(&CoherentSpec::surface(Electronic::Donor, alpha, Complex64::new(0.0, 0.4)), &basis, &p).unwrap();
        let (qa, qb) = mean_position(&psi, Electronic::Donor, &p).unwrap();
        assert!((qa - (p.d + 2f64.sqrt() * 0.7)).abs() < 1e-9);
        assert!(qb.abs() < 1e-9);
        let (pa, pb) = mean_momentum(&psi, Electronic::Donor, &p).unwrap();
        assert!((pa + 2f64.sqrt() * 1.1).abs() < 1e-9);
        assert!((pb - 2f64.sqrt() * 0.4).abs() < 1e-9);
        assert_eq!(mean_position(&psi, Electronic::Acceptor, &p), Err(Error::EmptyBlock(Electronic::Acceptor)));
    }

    #[test]
    fn ground_gaussian_peak() {
        let p = DimerParams::default();
        let basis = VibronicBasis::one_exciton(4);
        let psi = StateVector::basis_state(&basis, Electronic::Acceptor, 0, 0).unwrap();
        let grid = Grid2D { qa: vec![0.0], qb: vec![p.d] };
        let f = wavefunction_grid(&psi, Electronic::Acceptor, &grid, &p).unwrap();
        let peak = (p.mass * p.omega / PI).sqrt();
        assert!((f.get(0, 0).re - peak).abs() < 1e-15);
    }

    #[test]
    fn short_time_scaling() {
        let p = DimerParams::default().with_coupling(0.01);
        assert_eq!(short_time_law(0.0, &p), 0.0);
        let r = short_time_law(4.0, &p) / short_time_law(1.0, &p);
        assert!((r - 16.0).abs() < 1e-12);
        let q = short_time_law(2.0, &p.with_coupling(0.02)) / short_time_law(2.0, &p);
        assert!((q - 4.0).abs() < 1e-12);
    }

    #[test]
    fn jcm_limits() {
        assert!((jcm_curve(0.0, 0.3, 1.9) - 1.0).abs() < 1e-14);
        for t in [0.0, 0.7, 3.1, 12.0] {
            assert!((jcm_curve(t, 0.4, 0.0) - (0.4 * t).cos().powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn transfer_instant_anchors() {
        let p = DimerParams::default();
        let lam = p.reorganization_energy();
        assert_eq!(transfer_instant(&p).unwrap(), 0.0);
        assert!((transfer_instant(&p.with_detuning(2.0 * lam)).unwrap() - 0.25).abs() < 1e-15);
        assert!((transfer_instant(&p.with_detuning(4.0 * lam)).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(transfer_instant(&p.with_detuning(4.5 * lam)), Err(Error::UnreachableRidge(_))));
        assert!(matches!(transfer_instant(&p.with_detuning(-0.1)), Err(Error::UnreachableRidge(_))));
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 0.3 * v.powf(2.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 2.5).abs() < 1e-12);
    }
}
