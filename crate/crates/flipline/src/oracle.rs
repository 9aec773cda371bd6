//! Exact reference: ĝ in a truncated Fock basis, its eigenstates, the
//! lowering-operator elements between them, the Pauli balance steady state
//! and the slowest relaxation rate.
//!
//! The unitary â → −iâ makes the matrix real symmetric:
//! ĝ = −λμ n̂ + λ²(n̂+½)² − (λ/2)(â² + â†²) − (λ/2)^{1/2} α_d (â + â†) − λμ/2,
//! with Q = (λ/2)^{1/2}(â + â†); moduli of matrix elements are unchanged.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{FliplineError, Result};
use crate::kinetics;
use crate::landscape;
use crate::markov;
use crate::params::{ModelParams, WellId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WellLabel {
    Left,
    Right,
    Delocalized,
}

impl WellLabel {
    pub fn well(self) -> Option<WellId> {
        match self {
            WellLabel::Left => Some(WellId::Left),
            WellLabel::Right => Some(WellId::Right),
            WellLabel::Delocalized => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSpectrum {
    pub params: ModelParams,
    pub dimension: usize,
    /// retained eigenvalues (ascending), comparable with g(Q,P)
    pub eigenvalues: Vec<f64>,
    pub well_labels: Vec<WellLabel>,
    pub q_expect: Vec<f64>,
    /// |⟨Q⟩| / |q_min|, the classification margin of each state
    pub label_margin: Vec<f64>,
    /// |⟨i|â|j⟩| between retained states (row i = final, column j = initial)
    #[serde(skip)]
    pub lowering: DMatrix<f64>,
    /// largest truncation-edge occupation among retained states
    pub tail: f64,
    pub g_s: f64,
}

/// Number of edge basis states entering the tail test.
const TAIL_WIDTH: usize = 5;
const TAIL_LIMIT: f64 = 1e-12;

fn matrices(p: &ModelParams, n: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (lam, mu, al) = (p.lambda, p.mu, p.alpha_d);
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut q = DMatrix::<f64>::zeros(n, n);
    let s = (lam / 2.0).sqrt();
    for k in 0..n {
        let kf = k as f64;
        h[(k, k)] = -lam * mu * kf + lam * lam * (kf + 0.5) * (kf + 0.5) - lam * mu / 2.0;
        if k + 1 < n {
            let r1 = (kf + 1.0).sqrt();
            a[(k, k + 1)] = r1;
            q[(k, k + 1)] = s * r1;
            q[(k + 1, k)] = s * r1;
            h[(k, k + 1)] = -s * al * r1;
            h[(k + 1, k)] = -s * al * r1;
        }
        if k + 2 < n {
            let r2 = ((kf + 1.0) * (kf + 2.0)).sqrt();
            h[(k, k + 2)] = -lam / 2.0 * r2;
            h[(k + 2, k)] = -lam / 2.0 * r2;
        }
    }
    (h, a, q)
}

/// The represented operator in the Fock basis (for inspection).
pub fn hamiltonian_matrix(p: &ModelParams, n: usize) -> DMatrix<f64> {
    matrices(p, n).0
}

/// Energy cap for retained states: half the deep-well depth above g_s.
fn energy_cap(geo: &landscape::LandscapeGeometry, gs: f64) -> f64 {
    let deepest = [geo.left, geo.right].iter().flatten().map(|m| m.g).fold(f64::INFINITY, f64::min);
    gs + 0.5 * (gs - deepest)
}

struct Diag {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    tail: f64,
}

fn diagonalize(p: &ModelParams, n: usize, cap: f64) -> (Diag, DMatrix<f64>, DMatrix<f64>) {
    let (h, a, q) = matrices(p, n);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] < cap).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values: Vec<f64> = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    let tail = (0..idx.len())
        .map(|c| (n - TAIL_WIDTH..n).map(|r| vectors[(r, c)].powi(2)).sum::<f64>())
        .fold(0.0, f64::max);
    (Diag { values, vectors, tail }, a, q)
}

/// Rotates clusters of near-degenerate states below g_s onto eigenvectors of Q
/// so that tunnel-split doublets are reported as well-localized states.
fn localize(d: &mut Diag, q: &DMatrix<f64>, gs: f64, tol: f64) {
    let n = d.values.len();
    let mut i = 0;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && d.values[j + 1] - d.values[j] < tol && d.values[j + 1] < gs {
            j += 1;
        }
        if j > i {
            let sub = d.vectors.columns(i, j - i + 1).into_owned();
            let qs = sub.transpose() * q * &sub;
            let e = SymmetricEigen::new(qs);
            let rotated = &sub * &e.eigenvectors;
            let h_diag = d.values[i..=j].to_vec();
            d.vectors.columns_mut(i, j - i + 1).copy_from(&rotated);
            // rotated states carry the cluster's mean energy
            let mean: f64 = h_diag.iter().sum::<f64>() / h_diag.len() as f64;
            for k in i..=j {
                d.values[k] = mean;
            }
        }
        i = j + 1;
    }
}

/// Diagonalizes ĝ. With `n = None` the dimension is the smallest multiple
/// of 50 whose retained states pass the truncation tail test.
pub fn build_and_diagonalize(p: &ModelParams, n: Option<usize>) -> Result<OracleSpectrum> {
    p.validate()?;
    let geo = landscape::stationary_points(p)?;
    geo.require_double_well()?;
    let gs = geo.g_s()?;
    let cap = energy_cap(&geo, gs);
    let (mut d, a, q, dim) = match n {
        Some(n) => {
            let (d, a, q) = diagonalize(p, n, cap);
            if d.tail > TAIL_LIMIT {
                return Err(FliplineError::TruncationInsufficient { dimension: n, tail: d.tail });
            }
            (d, a, q, n)
        }
        None => {
            let mut n = 50;
            loop {
                let (d, a, q) = diagonalize(p, n, cap);
                if d.tail <= TAIL_LIMIT {
                    break (d, a, q, n);
                }
                if n + 50 > p.tol.max_dimension {
                    return Err(FliplineError::TruncationInsufficient { dimension: n, tail: d.tail });
                }
                n += 50;
            }
        }
    };
    localize(&mut d, &q, gs, 1e-3 * p.lambda);
    let qv = &q * &d.vectors;
    let q_expect: Vec<f64> = (0..d.values.len()).map(|c| d.vectors.column(c).dot(&qv.column(c))).collect();
    let q_scale = [geo.left, geo.right].iter().flatten().map(|m| m.q.abs()).fold(f64::INFINITY, f64::min);
    let label_margin: Vec<f64> = q_expect.iter().map(|x| x.abs() / q_scale).collect();
    let well_labels = d
        .values
        .iter()
        .zip(&label_margin)
        .zip(&q_expect)
        .map(|((&e, &m), &x)| {
            if e >= gs || m < 0.1 {
                WellLabel::Delocalized
            } else if x > 0.0 {
                WellLabel::Right
            } else {
                WellLabel::Left
            }
        })
        .collect();
    let lowering = (d.vectors.transpose() * a * &d.vectors).map(f64::abs);
    Ok(OracleSpectrum {
        params: *p,
        dimension: dim,
        eigenvalues: d.values,
        well_labels,
        q_expect,
        label_margin,
        lowering,
        tail: d.tail,
        g_s: gs,
    })
}

/// Shift of the highest retained eigenvalue when the basis grows by 50.
pub fn convergence_shift(p: &ModelParams, n: usize) -> Result<f64> {
    let a = build_and_diagonalize(p, Some(n))?;
    let b = build_and_diagonalize(p, Some(n + 50))?;
    let k = a.eigenvalues.len().min(b.eigenvalues.len());
    Ok((a.eigenvalues[k - 1] - b.eigenvalues[k - 1]).abs())
}

impl OracleSpectrum {
    /// Indices of the localized states of a well, in ascending energy
    /// (intrawell quantum number n = position in the list).
    pub fn well_states(&self, well: WellId) -> Vec<usize> {
        (0..self.eigenvalues.len()).filter(|&k| self.well_labels[k].well() == Some(well)).collect()
    }

    pub fn well_energies(&self, well: WellId) -> Vec<f64> {
        self.well_states(well).iter().map(|&k| self.eigenvalues[k]).collect()
    }

    /// |⟨to|â|from⟩|.
    pub fn element(&self, to: usize, from: usize) -> f64 {
        self.lowering[(to, from)]
    }

    /// |⟨n+m|â|n⟩| within a well, by intrawell quantum numbers.
    pub fn intrawell_element(&self, well: WellId, n: usize, m: i64) -> Option<f64> {
        let st = self.well_states(well);
        let to = n as i64 + m;
        if to < 0 || to as usize >= st.len() || n >= st.len() {
            return None;
        }
        Some(self.element(st[to as usize], st[n]))
    }

    /// Rate matrix W(i → j) = 2κ|⟨j|â|i⟩|² over the given states.
    pub fn rate_matrix(&self, states: &[usize], kappa: f64) -> DMatrix<f64> {
        DMatrix::from_fn(states.len(), states.len(), |i, j| {
            if i == j {
                0.0
            } else {
                2.0 * kappa * self.element(states[j], states[i]).powi(2)
            }
        })
    }
}

/// Lowering elements (row = final state, column = initial state).
pub fn exact_matrix_elements(spectrum: &OracleSpectrum) -> &DMatrix<f64> {
    &spectrum.lowering
}

#[derive(Debug, Clone, Serialize)]
pub struct PauliResult {
    pub rho: Vec<f64>,
    /// slowest nonzero relaxation rate; None inside a resonance window
    pub slowest_rate: Option<f64>,
    pub raw_slowest_rate: f64,
    /// m with α_d ≈ mλ (Pauli picture invalid there)
    pub resonance: Vec<i64>,
}

/// Stationary populations of the Pauli balance equation over all retained
/// states and its slowest relaxation rate.
pub fn pauli_steady_state(spectrum: &OracleSpectrum, kappa: f64) -> Result<PauliResult> {
    let states: Vec<usize> = (0..spectrum.eigenvalues.len()).collect();
    let w = spectrum.rate_matrix(&states, kappa);
    let rho: Vec<f64> = markov::stationary(&w)?.iter().copied().collect();
    let rates = markov::relaxation_rates(&w);
    let raw = rates.get(1).copied().unwrap_or(0.0);
    let resonance = kinetics::resonance_offsets(&spectrum.params);
    Ok(PauliResult { rho, slowest_rate: if resonance.is_empty() { Some(raw) } else { None }, raw_slowest_rate: raw, resonance })
}

/// (g_n, ρ_n) of the intrawell balance equation restricted to one well.
pub fn intrawell_quasistationary(spectrum: &OracleSpectrum, kappa: f64, well: WellId) -> Result<Vec<(f64, f64)>> {
    let st = spectrum.well_states(well);
    let w = spectrum.rate_matrix(&st, kappa);
    let rho = markov::stationary(&w)?;
    Ok(st.iter().zip(rho.iter()).map(|(&k, &r)| (spectrum.eigenvalues[k], r)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct AlignmentReport {
    /// (shallow eigenvalue, nearest deep eigenvalue, mismatch / local spacing)
    pub pairs: Vec<(f64, f64, f64)>,
    pub max: f64,
    pub median: f64,
}

/// Pairs each shallow-well level with the nearest deep-well level and
/// reports the mismatch in units of the local deep-well spacing.
pub fn level_alignment(p: &ModelParams, spectrum: &OracleSpectrum) -> Result<AlignmentReport> {
    landscape::stationary_points(p)?.require_double_well()?;
    let shallow = spectrum.well_energies(WellId::shallow(p.alpha_d));
    let deep = spectrum.well_energies(WellId::deep(p.alpha_d));
    if deep.len() < 2 || shallow.is_empty() {
        return Err(FliplineError::NoBoundStates { half_lambda: p.lambda / 2.0, action_at_saddle: 0.0 });
    }
    let mut pairs = Vec::new();
    for &e in &shallow {
        let k = (0..deep.len()).min_by(|&a, &b| (deep[a] - e).abs().total_cmp(&(deep[b] - e).abs())).unwrap();
        let spacing = if k == 0 {
            deep[1] - deep[0]
        } else if k + 1 == deep.len() {
            deep[k] - deep[k - 1]
        } else {
            0.5 * (deep[k + 1] - deep[k - 1])
        };
        pairs.push((e, deep[k], (deep[k] - e).abs() / spacing));
    }
    let mut m: Vec<f64> = pairs.iter().map(|x| x.2).collect();
    m.sort_by(|a, b| a.total_cmp(b));
    let median = if m.len() % 2 == 1 { m[m.len() / 2] } else { 0.5 * (m[m.len() / 2 - 1] + m[m.len() / 2]) };
    Ok(AlignmentReport { max: *m.last().unwrap(), median, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(mu: f64, a: f64, lambda: f64) -> ModelParams {
        ModelParams::new(mu, a, lambda, 0.01).unwrap()
    }

    #[test]
    fn matrix_is_symmetric() {
        let h = hamiltonian_matrix(&pr(0.2, 0.1, 0.05), 80);
        assert_eq!((&h - h.transpose()).abs().max(), 0.0);
    }

    #[test]
    fn ground_state_near_harmonic_estimate() {
        let p = pr(0.2, 0.1, 0.05);
        let s = build_and_diagonalize(&p, None).unwrap();
        let geo = landscape::stationary_points(&p).unwrap();
        let om = landscape::omega_at_minimum(&p, WellId::Right).unwrap();
        let g0 = geo.g_min(WellId::Right).unwrap() + 0.025 * om;
        assert!((s.eigenvalues[0] - g0).abs() < 0.05 * 0.05, "{} vs {g0}", s.eigenvalues[0]);
        assert_eq!(s.well_labels[0], WellLabel::Right);
        assert!(s.tail < 1e-12);
    }

    #[test]
    fn symmetric_doublets() {
        let p = pr(0.2, 0.0, 0.05);
        let s = build_and_diagonalize(&p, None).unwrap();
        let l = s.well_energies(WellId::Left);
        let r = s.well_energies(WellId::Right);
        assert_eq!(l.len(), r.len());
        let spacing = r[1] - r[0];
        for (a, b) in l.iter().zip(&r).take(3) {
            assert!((a - b).abs() < 1e-6 * spacing);
        }
    }

    #[test]
    fn alignment_on_and_off_resonance() {
        let lam = 0.05;
        let on = pr(0.2, 2.0 * lam, lam);
        let rep = level_alignment(&on, &build_and_diagonalize(&on, None).unwrap()).unwrap();
        assert!(rep.median < 0.05, "{rep:?}");
        let off = pr(0.2, 1.5 * lam, lam);
        let rep = level_alignment(&off, &build_and_diagonalize(&off, None).unwrap()).unwrap();
        assert!(rep.median > 0.3, "{rep:?}");
    }
}
