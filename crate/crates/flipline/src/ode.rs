//! Adaptive Dormand–Prince 5(4) integration of complex autonomous systems
//! along straight lines in the complex time plane.

use num_complex::Complex64;

use crate::error::{FliplineError, Result};

type C = Complex64;

pub const DIM: usize = 3;
pub type State = [C; DIM];

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// |y| beyond which the solution is declared to have hit a pole
    pub blowup: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { rtol: 1e-13, atol: 1e-14, max_steps: 2_000_000, blowup: 1e6 }
    }
}

fn axpy(y: &State, h: C, ks: &[State], coeffs: &[f64]) -> State {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            for i in 0..DIM {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl Integrator {
    /// One Dormand–Prince step of complex size h; returns (y_new, error estimate).
    pub fn step<F: Fn(&State) -> State>(&self, f: &F, y: &State, h: C) -> (State, State) {
        let mut ks: Vec<State> = Vec::with_capacity(7);
        ks.push(f(y));
        for row in A.iter() {
            let yi = axpy(y, h, &ks, row);
            ks.push(f(&yi));
        }
        let y5 = axpy(y, h, &ks, &B5);
        let mut err = [C::new(0.0, 0.0); DIM];
        for i in 0..DIM {
            for (j, k) in ks.iter().enumerate() {
                err[i] += h * (B5[j] - B4[j]) * k[i];
            }
        }
        (y5, err)
    }

    fn error_norm(&self, y: &State, y_new: &State, err: &State) -> f64 {
        (0..DIM)
            .map(|i| err[i].norm() / (self.atol + self.rtol * y[i].norm().max(y_new[i].norm())))
            .fold(0.0, f64::max)
    }

    /// Integrates from y0 over a time interval of complex length `length · dir`
    /// (`dir` unit modulus), calling `observe(s, y)` after every accepted step.
    /// `observe` may stop the integration early by returning false.
    pub fn advance<F, O>(&self, f: &F, y0: State, dir: C, length: f64, mut observe: O) -> Result<State>
    where
        F: Fn(&State) -> State,
        O: FnMut(f64, &State, f64) -> bool,
    {
        let mut y = y0;
        let mut s = 0.0;
        if length == 0.0 {
            return Ok(y);
        }
        let mut h = (length * 1e-3).min(1e-2);
        for _ in 0..self.max_steps {
            if s >= length {
                return Ok(y);
            }
            let hs = h.min(length - s);
            let (y_new, err) = self.step(f, &y, dir * hs);
            let en = self.error_norm(&y, &y_new, &err);
            if !en.is_finite() {
                h *= 0.2;
                if h < 1e-14 * length {
                    return Err(FliplineError::PoleProximity { distance: 0.0 });
                }
                continue;
            }
            if en <= 1.0 {
                s = if hs == length - s { length } else { s + hs };
                y = y_new;
                if y.iter().take(2).any(|z| z.norm() > self.blowup) {
                    return Err(FliplineError::PoleProximity { distance: 1.0 / y[0].norm() });
                }
                if !observe(s, &y, hs) {
                    return Ok(y);
                }
            }
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h = hs * fac;
            if h < 1e-14 * length {
                return Err(FliplineError::PoleProximity { distance: h });
            }
        }
        Err(FliplineError::numerical("ode", "step budget exhausted"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_along_complex_direction() {
        // y' = i y  → y(t) = exp(i t), integrated along t = s·e^{iπ/4}
        let f = |y: &State| [C::new(0.0, 1.0) * y[0], C::new(0.0, 0.0), C::new(0.0, 0.0)];
        let dir = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let y0 = [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
        let integ = Integrator::default();
        let y = integ.advance(&f, y0, dir, 2.0, |_, _, _| true).unwrap();
        let exact = (C::new(0.0, 1.0) * dir * 2.0).exp();
        assert!((y[0] - exact).norm() < 1e-11);
    }

    #[test]
    fn blowup_is_reported() {
        // y' = y² from y=1 blows up at t = 1
        let f = |y: &State| [y[0] * y[0], C::new(0.0, 0.0), C::new(0.0, 0.0)];
        let y0 = [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
        let r = Integrator::default().advance(&f, y0, C::new(1.0, 0.0), 2.0, |_, _, _| true);
        assert!(matches!(r, Err(FliplineError::PoleProximity { .. })));
    }
}
