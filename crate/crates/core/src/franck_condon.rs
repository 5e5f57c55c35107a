//! Franck-Condon overlaps of displaced harmonic oscillators.
//!
//! `⟨m|D(λ)|n⟩` with `D(λ) = exp(λ a† − λ a)` and real λ equals
//! `e^{−λ²/2} sqrt(n!/m!) λ^{m−n} L_n^{(m−n)}(λ²)` for `m >= n`, and
//! `⟨m|D(λ)|n⟩ = ⟨n|D(−λ)|m⟩`. Each diagonal `m − n = const` is generated by
//! the three-term Laguerre recurrence with the prefactor folded in, so no
//! factorial is formed and nothing overflows. (The simpler two-index ladder
//! recurrence loses about nine digits at twenty quanta.)

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DimerParams, Electronic, VibronicBasis};

/// Largest oscillator quantum number accepted by the overlap routines.
pub const MAX_QUANTA: usize = 512;

/// Dense `rows × cols` table of `⟨m|D(λ)|n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FcTable {
    rows: usize,
    cols: usize,
    lambda: f64,
    data: Vec<f64>,
}

impl FcTable {
    pub fn new(rows: usize, cols: usize, lambda: f64) -> Result<Self> {
        for q in [rows, cols] {
            if q > MAX_QUANTA + 1 {
                return Err(Error::QuantaCap { quanta: q - 1, cap: MAX_QUANTA });
            }
        }
        if !lambda.is_finite() {
            return Err(crate::error::invalid("lambda", "must be finite"));
        }
        let mut data = vec![0.0; rows * cols];
        for alpha in 0..rows {
            fill_diagonal(lambda, alpha, rows.min(cols + alpha) - alpha, |k, v| data[(k + alpha) * cols + k] = v);
        }
        for alpha in 1..cols {
            fill_diagonal(-lambda, alpha, cols.min(rows + alpha) - alpha, |k, v| data[k * cols + k + alpha] = v);
        }
        Ok(FcTable { rows, cols, lambda, data })
    }

    /// Square table for quanta `0..=max`.
    pub fn square(max: usize, lambda: f64) -> Result<Self> {
        Self::new(max + 1, max + 1, lambda)
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.data[m * self.cols + n]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The transposed table, i.e. the overlaps of the inverse displacement.
    pub fn transposed(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for m in 0..self.rows {
            for n in 0..self.cols {
                data[n * self.rows + m] = self.data[m * self.cols + n];
            }
        }
        FcTable { rows: self.cols, cols: self.rows, lambda: -self.lambda, data }
    }
}

/// Emit `⟨k+α|D(λ)|k⟩` for `k < len`.
fn fill_diagonal(lambda: f64, alpha: usize, len: usize, mut put: impl FnMut(usize, f64)) {
    if len == 0 {
        return;
    }
    let x = lambda * lambda;
    let a = alpha as f64;
    // e^{−x/2} λ^α / sqrt(α!)
    let mut g0 = (-0.5 * x).exp();
    for j in 1..=alpha {
        g0 *= lambda / (j as f64).sqrt();
    }
    put(0, g0);
    if len == 1 {
        return;
    }
    let ratio = |k: usize| (((k + 1) as f64) / ((k + 1) as f64 + a)).sqrt();
    let mut prev = g0;
    let mut cur = ratio(0) * (1.0 + a - x) * g0;
    put(1, cur);
    for k in 1..len - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * ratio(k) * cur - (kf + a) * ratio(k) * ratio(k - 1) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        put(k + 1, cur);
    }
}

/// `⟨m|D(λ)|n⟩` for a single pair of quantum numbers.
pub fn franck_condon_1d(m: usize, n: usize, lambda: f64) -> Result<f64> {
    Ok(FcTable::new(m + 1, n + 1, lambda)?.get(m, n))
}

/// Overlap `⟨1′ M′ N′ | 1 M N⟩` between an acceptor and a donor product state,
/// for dimensionless displacement `delta`.
///
/// Mode a is centred at `d` on the donor and at 0 on the acceptor, so it carries
/// `D(+δ)`; mode b carries `D(−δ)`.
pub fn franck_condon_2d(mp: usize, np: usize, m: usize, n: usize, delta: f64) -> Result<f64> {
    Ok(franck_condon_1d(mp, m, delta)? * franck_condon_1d(np, n, -delta)?)
}

/// Displacement arguments `(λ_a, λ_b)` of the overlap `⟨to|from⟩` between the
/// oscillator bases of two electronic surfaces.
pub fn mode_shifts(from: Electronic, to: Electronic, params: &DimerParams) -> (f64, f64) {
    let (fa, fb) = params.amplitude_center(from);
    let (ta, tb) = params.amplitude_center(to);
    (fa - ta, fb - tb)
}

/// Change of oscillator basis between two electronic blocks of a truncated basis,
/// applied to nuclear amplitudes without changing the electronic norm convention
/// (the nuclear wavefunction is copied in coordinate space).
#[derive(Debug, Clone)]
pub struct BlockOverlap {
    cutoff: usize,
    mode_a: Option<FcTable>,
    mode_b: Option<FcTable>,
}

impl BlockOverlap {
    pub fn new(from: Electronic, to: Electronic, params: &DimerParams, cutoff: usize) -> Result<Self> {
        let (la, lb) = mode_shifts(from, to, params);
        let table = |l: f64| -> Result<Option<FcTable>> {
            if l == 0.0 {
                Ok(None)
            } else {
                FcTable::square(cutoff, l).map(Some)
            }
        };
        Ok(BlockOverlap { cutoff, mode_a: table(la)?, mode_b: table(lb)? })
    }

    /// The reverse change of basis, exactly the transpose of this one.
    pub fn transposed(&self) -> Self {
        BlockOverlap {
            cutoff: self.cutoff,
            mode_a: self.mode_a.as_ref().map(FcTable::transposed),
            mode_b: self.mode_b.as_ref().map(FcTable::transposed),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mode_a.is_none() && self.mode_b.is_none()
    }

    /// Matrix element `⟨to, m′, n′ | from, m, n⟩`.
    pub fn element(&self, mp: usize, np: usize, m: usize, n: usize) -> f64 {
        let fa = match &self.mode_a {
            Some(t) => t.get(mp, m),
            None => f64::from(u8::from(mp == m)),
        };
        let fb = match &self.mode_b {
            Some(t) => t.get(np, n),
            None => f64::from(u8::from(np == n)),
        };
        fa * fb
    }

    /// Re-express block amplitudes (in `basis` triangular order) on the target surface.
    pub fn apply(&self, basis: &VibronicBasis, input: &[Complex64], output: &mut [Complex64]) {
        let c = self.cutoff;
        debug_assert_eq!(basis.cutoff(), c);
        if self.is_identity() {
            output.copy_from_slice(input);
            return;
        }
        let size = c + 1;
        let zero = Complex64::new(0.0, 0.0);
        // rectangular scratch indexed [m][n]
        let mut rect = vec![zero; size * size];
        for n in 0..=c {
            for m in 0..=(c - n) {
                rect[m * size + n] = input[basis.local_index(m, n).unwrap()];
            }
        }
        if let Some(t) = &self.mode_a {
            let mut tmp = vec![zero; size * size];
            for mp in 0..size {
                for m in 0..size {
                    let f = t.get(mp, m);
                    if f == 0.0 {
                        continue;
                    }
                    for n in 0..(size - m) {
                        tmp[mp * size + n] += rect[m * size + n] * f;
                    }
                }
            }
            rect = tmp;
        }
        if let Some(t) = &self.mode_b {
            let mut tmp = vec![zero; size * size];
            for mp in 0..size {
                for np in 0..(size - mp) {
                    let mut acc = zero;
                    for n in 0..size {
                        acc += rect[mp * size + n] * t.get(np, n);
                    }
                    tmp[mp * size + np] = acc;
                }
            }
            rect = tmp;
        }
        for n in 0..=c {
            for m in 0..=(c - n) {
                output[basis.local_index(m, n).unwrap()] = rect[m * size + n];
            }
        }
    }
}
