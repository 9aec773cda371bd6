//! Continuous-time Markov chains given by a dense rate matrix
//! `w[(i, j)]` = rate from state i to state j (diagonal ignored).

use nalgebra::{DMatrix, DVector};

use crate::error::{FliplineError, Result};

fn reachable(w: &DMatrix<f64>, from: usize) -> Vec<bool> {
    let n = w.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if j != i && !seen[j] && w[(i, j)] > 0.0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Closed communicating classes (each a sorted list of states).
pub fn closed_classes(w: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = w.nrows();
    let reach: Vec<Vec<bool>> = (0..n).map(|i| reachable(w, i)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if classes.iter().any(|c| c.contains(&i)) {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        let closed = (0..n).all(|j| !reach[i][j] || class.contains(&j));
        if closed {
            classes.push(class);
        }
    }
    classes
}

/// Grassmann–Taksar–Heyman elimination on an irreducible chain; no
/// subtractions, so populations spanning many decades stay accurate.
fn gth(w: &DMatrix<f64>) -> DVector<f64> {
    let n = w.nrows();
    let mut q = w.clone();
    for i in 0..n {
        q[(i, i)] = 0.0;
    }
    let mut s = vec![0.0; n];
    for k in (1..n).rev() {
        let sk: f64 = (0..k).map(|j| q[(k, j)]).sum();
        s[k] = sk;
        for i in 0..k {
            let qik = q[(i, k)];
            if qik == 0.0 {
                continue;
            }
            for j in 0..k {
                if j != i {
                    q[(i, j)] += qik * q[(k, j)] / sk;
                }
            }
        }
    }
    let mut pi = DVector::<f64>::zeros(n);
    pi[0] = 1.0;
    for k in 1..n {
        pi[k] = (0..k).map(|i| pi[i] * q[(i, k)]).sum::<f64>() / s[k];
    }
    let total = pi.sum();
    pi / total
}

/// Stationary distribution; errors when it is not unique.
pub fn stationary(w: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = w.nrows();
    if n == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    let classes = closed_classes(w);
    if classes.len() != 1 {
        return Err(FliplineError::NullSpaceDegenerate { zero_modes: classes.len() });
    }
    let class = &classes[0];
    let sub = DMatrix::from_fn(class.len(), class.len(), |a, b| w[(class[a], class[b])]);
    let pi_sub = if class.len() == 1 { DVector::from_element(1, 1.0) } else { gth(&sub) };
    let mut pi = DVector::<f64>::zeros(n);
    for (a, &i) in class.iter().enumerate() {
        pi[i] = pi_sub[a];
    }
    Ok(pi)
}

/// Generator L with dρ/dt = Lρ.
pub fn generator(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l[(j, i)] += w[(i, j)];
                l[(i, i)] -= w[(i, j)];
            }
        }
    }
    l
}

/// Relaxation rates −Re λ_k of the generator, ascending (the first is the
/// stationary zero mode up to roundoff).
pub fn relaxation_rates(w: &DMatrix<f64>) -> Vec<f64> {
    let mut r: Vec<f64> = generator(w).complex_eigenvalues().iter().map(|z| -z.re).collect();
    r.sort_by(|a, b| a.total_cmp(b));
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_chain() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        let pi = stationary(&w).unwrap();
        assert!((pi[0] - 1.0 / 3.0).abs() < 1e-15);
        let r = relaxation_rates(&w);
        assert!(r[0].abs() < 1e-14 && (r[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn birth_death_spanning_many_decades() {
        // detailed balance with ratio 1e-15 per step
        let n = 20;
        let w = DMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                1e-15
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let pi = stationary(&w).unwrap();
        for k in 1..n {
            assert!(((pi[k] / pi[k - 1]).log10() + 15.0).abs() < 1e-10);
        }
    }

    #[test]
    fn absorbing_and_degenerate() {
        // state 0 absorbing, states 1, 2 transient
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let pi = stationary(&w).unwrap();
        assert_eq!(pi[0], 1.0);
        // two absorbing states
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(stationary(&w), Err(FliplineError::NullSpaceDegenerate { zero_modes: 2 })));
    }
}
