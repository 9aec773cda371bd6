//! Roots of low-degree real polynomials. Complex roots come from the
//! companion-matrix eigenvalues followed by Newton polishing; real roots are
//! additionally bracketed between critical points so that close pairs near a
//! double root are resolved to machine precision.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

/// Evaluates p and p' at z; `coeffs` are highest degree first.
pub fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    coeffs[..n]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (n - i) as f64)
        .collect()
}

/// All complex roots of a real polynomial with nonzero leading coefficient.
/// Uses the companion-matrix Schur form when it converges within a bounded
/// number of sweeps and Aberth–Ehrlich iteration otherwise.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[0];
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    let eig: Vec<Complex64> = match Schur::try_new(comp, f64::EPSILON, 200) {
        Some(s) => s.complex_eigenvalues().iter().copied().collect(),
        None => aberth(coeffs),
    };
    eig.into_iter().map(|z| polish(coeffs, z)).collect()
}

fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let radius = 1.0 + coeffs[1..].iter().map(|c| (c / coeffs[0]).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[k] -= w;
            moved = moved.max(w.norm() / z[k].norm().max(1e-300));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Newton steps while they reduce the residual.
pub fn polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    let (mut p, _) = eval_with_derivative(coeffs, z);
    for _ in 0..8 {
        let (_, dp) = eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = eval_with_derivative(coeffs, cand);
        if pc.norm() >= p.norm() {
            break;
        }
        z = cand;
        p = pc;
    }
    z
}

/// Real roots in ascending order, each bracketed between consecutive real
/// critical points and refined by bisection.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![-coeffs[1] / coeffs[0]];
    }
    let bound = 1.0 + coeffs[1..].iter().map(|c| (c / coeffs[0]).abs()).fold(0.0, f64::max);
    let mut knots = vec![-bound];
    knots.extend(real_roots(&derivative(coeffs)).into_iter().filter(|x| x.abs() < bound));
    knots.push(bound);
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval_real(coeffs, a), eval_real(coeffs, b));
        if fa == 0.0 {
            if out.last().is_none_or(|&l: &f64| l != a) {
                out.push(a);
            }
            continue;
        }
        if fa.signum() != fb.signum() && fb != 0.0 {
            out.push(bisect(coeffs, a, b, fa));
        }
    }
    if eval_real(coeffs, bound) == 0.0 {
        out.push(bound);
    }
    out
}

fn bisect(coeffs: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval_real(coeffs, m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Complex roots with the real ones replaced by their bracketed values.
/// Returns (real roots ascending, non-real roots with Im > 0 first in each pair).
pub fn split_roots(coeffs: &[f64]) -> (Vec<f64>, Vec<Complex64>) {
    let real = real_roots(coeffs);
    let mut cplx = roots(coeffs);
    // drop the companion root nearest each bracketed one; what remains is
    // complex, or an unbracketed (even-multiplicity) real pair
    for &x in &real {
        let k = (0..cplx.len())
            .min_by(|&i, &j| (cplx[i] - x).norm().total_cmp(&(cplx[j] - x).norm()))
            .unwrap();
        cplx.swap_remove(k);
    }
    let ncomplex = cplx.len();
    // pair up conjugates, upper half-plane member first
    cplx.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));
    let mut paired = Vec::with_capacity(ncomplex);
    for z in cplx.chunks(2) {
        let re = 0.5 * (z[0].re + z.get(1).map_or(z[0].re, |w| w.re));
        let im = z.iter().map(|w| w.im.abs()).sum::<f64>() / z.len() as f64;
        paired.push(Complex64::new(re, im));
        if z.len() == 2 {
            paired.push(Complex64::new(re, -im));
        }
    }
    (real, paired)
}
