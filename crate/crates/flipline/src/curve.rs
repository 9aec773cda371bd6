//! The energy surface g(Q,P) = g as an elliptic curve.
//!
//! With Q = c + (d/2)(x + 1/x), c = −α_d/2, d² = g_c − g, the radical
//! becomes √B = d(x − 1/x) and y = xP satisfies y² = R4(x), a quartic whose
//! four roots e_i are the images of the turning points q_i. Time along an
//! orbit is the Abel integral dt = dx/(2y). Periods, pole positions and the
//! interwell half period are integrals of dx/(2y) between branch points, to
//! x = 0 and to x = ∞, evaluated on polylines that keep clear of the roots.

use num_complex::Complex64;

use crate::error::{FliplineError, Result};
use crate::quad::{integrate, QuadOptions};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Principal square root; continuity along a straight segment holds as long
/// as the segment does not pass through a root.
fn csqrt(z: C) -> C {
    z.sqrt()
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub d: C,
    pub lead: C,
    /// roots e_i, index-aligned with the turning points q_i
    pub e: [C; 4],
    quad: QuadOptions,
}

#[derive(Debug, Clone, Copy)]
enum End {
    Root(usize),
    Point(C),
    Infinity(C),
}

/// Result of continuing y along a path: the integral and the end value of
/// y (or of lim y/x² at infinity).
#[derive(Debug, Clone, Copy)]
struct PathValue {
    integral: C,
    y_end: C,
}

impl Curve {
    pub fn new(mu: f64, alpha: f64, g: f64, q: &[C; 4], quad: QuadOptions) -> Result<Self> {
        let c = -0.5 * alpha;
        let gc = -0.25 * ((1.0 - mu) * (1.0 - mu) - alpha * alpha);
        let d = C::new(gc - g, 0.0).sqrt();
        if d.norm() == 0.0 {
            return Err(FliplineError::CriticalPoint { distance: 0.0 });
        }
        let lead = -d * d / 4.0;
        let coeffs = [lead, -d * (c - 1.0), C::from(mu - 1.0 - c * c) - d * d / 2.0, -d * (c + 1.0), -d * d / 4.0];
        let mut e = [C::new(0.0, 0.0); 4];
        for (k, &qk) in q.iter().enumerate() {
            let s = qk * qk + 1.0 - mu;
            e[k] = polish(&coeffs, (qk - c + s / 2.0) / d);
        }
        for i in 0..4 {
            for j in i + 1..4 {
                let scale = e[i].norm().max(e[j].norm());
                if (e[i] - e[j]).norm() <= 1e-14 * scale {
                    return Err(FliplineError::numerical("curve", "coincident branch points"));
                }
            }
        }
        Ok(Self { d, lead, e, quad })
    }

    fn others(&self, skip: &[usize]) -> impl Iterator<Item = C> + '_ {
        let skip = skip.to_vec();
        (0..4).filter(move |k| !skip.contains(k)).map(move |k| self.e[k])
    }

    fn check(&self, r: crate::quad::QuadResult, what: &str) -> Result<C> {
        // roundoff can stall the adaptive estimate a little above a very tight
        // target; near g_c the branch points scale like 1/d and lose digits
        let conditioning = (1e-2 / self.d.norm()).max(1.0);
        let acceptable = r.converged || r.error <= 1e-9 * conditioning * (1.0 + r.value.norm());
        if !acceptable || !r.value.re.is_finite() || !r.value.im.is_finite() {
            return Err(FliplineError::numerical("curve", format!("{what}: quadrature did not converge (err {:e})", r.error)));
        }
        Ok(r.value)
    }

    /// From branch point e_k to b along a straight segment; x = e_k + s²(b − e_k).
    fn from_root(&self, k: usize, b: C) -> Result<PathValue> {
        let ek = self.e[k];
        let dd = b - ek;
        let others: Vec<C> = self.others(&[k]).collect();
        let kk = csqrt(self.lead * others.iter().map(|&r| ek - r).product::<C>());
        let sd = csqrt(dd);
        let prod = |s2: f64| -> C { others.iter().map(|&r| csqrt(1.0 + s2 * dd / (ek - r))).product() };
        let r = integrate(|s| sd / (kk * prod(s * s)), 0.0, 1.0, self.quad);
        Ok(PathValue { integral: self.check(r, "root segment")?, y_end: kk * sd * prod(1.0) })
    }

    /// General segment a → b with y(a) = ya.
    fn segment(&self, a: C, ya: C, b: C) -> Result<PathValue> {
        let dd = b - a;
        let prod = |t: f64| -> C { self.e.iter().map(|&r| csqrt(1.0 + t * dd / (a - r))).product() };
        let r = integrate(|t| dd / (2.0 * ya * prod(t)), 0.0, 1.0, self.quad);
        Ok(PathValue { integral: self.check(r, "segment")?, y_end: ya * prod(1.0) })
    }

    /// Segment a → e_k ending on a branch point; x = e_k + s²(a − e_k).
    fn to_root(&self, a: C, ya: C, k: usize) -> Result<PathValue> {
        let ek = self.e[k];
        let others: Vec<C> = self.others(&[k]).collect();
        let prod = |s2: f64| -> C {
            let x = ek + s2 * (a - ek);
            others.iter().map(|&r| csqrt(1.0 + (x - a) / (a - r))).product()
        };
        let r = integrate(|s| (ek - a) / (ya * prod(s * s)), 0.0, 1.0, self.quad);
        Ok(PathValue { integral: self.check(r, "segment to root")?, y_end: C::new(0.0, 0.0) })
    }

    /// Ray a → ∞ in direction dd; returns lim y/x² as `y_end`.
    fn ray(&self, a: C, ya: C, dd: C) -> Result<PathValue> {
        let w: Vec<C> = self.e.iter().map(|&r| dd / (a - r)).collect();
        let r = integrate(
            |u| {
                let p: C = w.iter().map(|&wr| csqrt(u + wr * (1.0 - u))).product();
                dd / (2.0 * ya * p)
            },
            0.0,
            1.0,
            self.quad,
        );
        let lim = ya * w.iter().map(|&wr| csqrt(wr)).product::<C>() / (dd * dd);
        Ok(PathValue { integral: self.check(r, "ray")?, y_end: lim })
    }

    /// Abel integral from branch point `start` along a root-avoiding polyline.
    fn abel(&self, start: usize, end: End) -> Result<PathValue> {
        let a = self.e[start];
        match end {
            End::Infinity(dir) => {
                let first = a + dir;
                let v1 = self.from_root(start, first)?;
                let v2 = self.ray(first, v1.y_end, dir)?;
                Ok(PathValue { integral: v1.integral + v2.integral, y_end: v2.y_end })
            }
            _ => {
                let (b, end_root) = match end {
                    End::Root(j) => (self.e[j], Some(j)),
                    End::Point(b) => (b, None),
                    End::Infinity(_) => unreachable!(),
                };
                let path = self.route(a, b, Some(start), end_root);
                let mut total = C::new(0.0, 0.0);
                let mut pts = path.iter();
                let mut cur = *pts.next().unwrap();
                let mut y = C::new(0.0, 0.0);
                let n = path.len();
                for (idx, &nxt) in pts.enumerate() {
                    let is_first = idx == 0;
                    let is_last = idx + 2 == n;
                    let v = if is_first && is_last && end_root.is_some() {
                        // straight root-to-root: split at the midpoint
                        let mid = 0.5 * (cur + nxt);
                        let v1 = self.from_root(start, mid)?;
                        let v2 = self.to_root(mid, v1.y_end, end_root.unwrap())?;
                        PathValue { integral: v1.integral + v2.integral, y_end: v2.y_end }
                    } else if is_first {
                        self.from_root(start, nxt)?
                    } else if is_last && end_root.is_some() {
                        self.to_root(cur, y, end_root.unwrap())?
                    } else {
                        self.segment(cur, y, nxt)?
                    };
                    total += v.integral;
                    y = v.y_end;
                    cur = nxt;
                }
                Ok(PathValue { integral: total, y_end: y })
            }
        }
    }

    /// Polyline from a to b whose segments stay clear of the branch points
    /// that are not endpoints.
    fn route(&self, a: C, b: C, ra: Option<usize>, rb: Option<usize>) -> Vec<C> {
        let mut candidates: Vec<Vec<C>> = vec![vec![a, b]];
        let m = 0.5 * (a + b);
        for t in [0.25, 0.5, 1.0, -0.25, -0.5, -1.0] {
            candidates.push(vec![a, m + I * (b - a) * t, b]);
        }
        let (na, nb) = (a.norm(), b.norm());
        if na > 0.0 && nb > 0.0 && (na / nb > 5.0 || nb / na > 5.0) {
            let rho = (na * nb).sqrt();
            for k in 0..8 {
                let th = std::f64::consts::PI * k as f64 / 4.0;
                candidates.push(vec![a, C::from_polar(rho, th), b]);
            }
        }
        let mut best = candidates[0].clone();
        let mut best_score = -1.0;
        for cand in candidates {
            let s = self.path_clearance(&cand, ra, rb);
            if s > best_score + 1e-12 {
                best_score = s;
                best = cand;
            }
        }
        best
    }

    fn path_clearance(&self, path: &[C], ra: Option<usize>, rb: Option<usize>) -> f64 {
        let n = path.len();
        let mut score = f64::INFINITY;
        for i in 0..n - 1 {
            let (p, q) = (path[i], path[i + 1]);
            for k in 0..4 {
                if (i == 0 && ra == Some(k)) || (i + 2 == n && rb == Some(k)) {
                    continue;
                }
                let r = self.e[k];
                let dist = seg_dist(r, p, q);
                let near = (r - p).norm().min((r - q).norm());
                let s = if near == 0.0 { 0.0 } else { dist / near };
                score = score.min(s);
            }
        }
        score
    }

    /// Direction for the ray from e_k to infinity keeping clear of the
    /// other roots.
    fn ray_direction(&self, k: usize) -> C {
        let ek = self.e[k];
        let scale = self.e.iter().map(|e| e.norm()).fold(0.0, f64::max).max(1.0);
        let base = if ek.norm() > 0.0 { ek.arg() } else { 0.0 };
        let mut best = (C::from_polar(scale, base), -1.0);
        for j in 0..32 {
            let th = base + std::f64::consts::PI * j as f64 / 16.0;
            let dir = C::from_polar(1.0, th);
            let mut s = f64::INFINITY;
            for (i, &r) in self.e.iter().enumerate() {
                if i == k {
                    continue;
                }
                let rel = r - ek;
                let along = (rel * dir.conj()).re;
                let dist = if along <= 0.0 { rel.norm() } else { (rel * dir.conj()).im.abs() };
                s = s.min(dist / rel.norm());
            }
            if s > best.1 + 1e-12 {
                best = (dir * scale, s);
            }
        }
        best.0
    }

    /// 2∫_{e_i}^{e_j} dx/(2y): a period of the orbit.
    pub fn pair_period(&self, i: usize, j: usize) -> Result<C> {
        Ok(2.0 * self.abel(i, End::Root(j))?.integral)
    }

    /// Abel image of the branch point e_j seen from e_i.
    pub fn half_period(&self, i: usize, j: usize) -> Result<C> {
        Ok(self.abel(i, End::Root(j))?.integral)
    }

    /// Abel images from e_k of the two points where a = (P − iQ)/√(2λ) has
    /// poles: (x → ∞, y/x² → −id/2) and (x = 0, y = −id/2). Returns the
    /// images and whether the path landed on the opposite sheet.
    pub fn pole_images(&self, k: usize) -> Result<((C, bool), (C, bool))> {
        let target = -I * self.d / 2.0;
        let classify = |v: PathValue| -> Result<(C, bool)> {
            let dm = (v.y_end - target).norm();
            let dp = (v.y_end + target).norm();
            if dm.min(dp) > 1e-6 * target.norm() {
                return Err(FliplineError::numerical("curve", "pole endpoint does not match either sheet"));
            }
            Ok(if dm <= dp { (v.integral, false) } else { (-v.integral, true) })
        };
        let star = classify(self.abel(k, End::Infinity(self.ray_direction(k)))?)?;
        let star_star = classify(self.abel(k, End::Point(C::new(0.0, 0.0)))?)?;
        Ok((star, star_star))
    }

    /// Period lattice from the six pair periods.
    pub fn lattice(&self) -> Result<Lattice> {
        let mut periods = Vec::with_capacity(6);
        for i in 0..4 {
            for j in i + 1..4 {
                periods.push(self.pair_period(i, j)?);
            }
        }
        Lattice::from_generators(&periods)
    }
}

fn seg_dist(r: C, p: C, q: C) -> f64 {
    let d = q - p;
    let t = ((r - p) * d.conj()).re / d.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (r - (p + d * t)).norm()
}

fn polish(coeffs: &[C; 5], mut x: C) -> C {
    let eval = |x: C| {
        let mut p = C::new(0.0, 0.0);
        let mut dp = C::new(0.0, 0.0);
        for &c in coeffs {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    let (mut p, _) = eval(x);
    for _ in 0..6 {
        let (_, dp) = eval(x);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = x - p / dp;
        let (pc, _) = eval(cand);
        if pc.norm() >= p.norm() {
            break;
        }
        x = cand;
        p = pc;
    }
    x
}

/// Period lattice normalised as (τ1 real > 0, τ2 with Im τ2 = h > 0 minimal
/// and Re τ2 ∈ [0, τ1)).
#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    pub tau1: f64,
    pub tau2: C,
    pub h: f64,
}

impl Lattice {
    pub fn from_generators(gens: &[C]) -> Result<Self> {
        let scale = gens.iter().map(|g| g.norm()).fold(0.0, f64::max);
        let eps = 1e-9 * scale;
        let mut vs: Vec<C> = gens.iter().copied().filter(|g| g.norm() > eps).collect();
        vs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let b1 = vs[0];
        let b2 = *vs
            .iter()
            .find(|v| (**v / b1).im.abs() > 1e-7)
            .ok_or_else(|| FliplineError::numerical("lattice", "all periods collinear"))?;
        let (mut b1, mut b2) = gauss_reduce(b1, b2);
        for &v in &vs {
            let (x, y) = coords(b1, b2, v);
            if (x - x.round()).abs() > 1e-6 || (y - y.round()).abs() > 1e-6 {
                let (n1, n2) = reduce_three(b1, b2, v, eps)?;
                b1 = n1;
                b2 = n2;
            }
        }
        for &v in &vs {
            let (x, y) = coords(b1, b2, v);
            if (x - x.round()).abs() > 1e-6 || (y - y.round()).abs() > 1e-6 {
                return Err(FliplineError::numerical("lattice", format!("period {v} not in lattice ({x}, {y})")));
            }
        }
        let covol = (b1.conj() * b2).im.abs();
        let mut tau1 = f64::INFINITY;
        for m in -6i32..=6 {
            for n in -6i32..=6 {
                let v = b1 * m as f64 + b2 * n as f64;
                if v.norm() > eps && v.im.abs() < 1e-8 * v.norm() && v.re.abs() < tau1 {
                    tau1 = v.re.abs();
                }
            }
        }
        if !tau1.is_finite() {
            return Err(FliplineError::numerical("lattice", "no real period"));
        }
        let h = covol / tau1;
        let mut tau2 = None;
        'outer: for m in -8i32..=8 {
            for n in -8i32..=8 {
                let v = b1 * m as f64 + b2 * n as f64;
                if (v.im - h).abs() < 1e-7 * h {
                    tau2 = Some(v);
                    break 'outer;
                }
            }
        }
        let mut tau2 = tau2.ok_or_else(|| FliplineError::numerical("lattice", "no vector with minimal imaginary part"))?;
        tau2.re = tau2.re.rem_euclid(tau1);
        if tau1 - tau2.re < 1e-9 * tau1 {
            tau2.re = 0.0;
        }
        Ok(Self { tau1, tau2, h })
    }

    /// Representative with Im ∈ [0, h) and Re ∈ [0, τ1).
    pub fn reduce(&self, t: C) -> C {
        let k = (t.im / self.h).floor();
        let mut r = t - self.tau2 * k;
        r.re = r.re.rem_euclid(self.tau1);
        r
    }

    /// Distance from t to the nearest lattice translate of `pole`.
    pub fn distance_to(&self, t: C, pole: C) -> f64 {
        let base = self.reduce(t - pole);
        let mut best = f64::INFINITY;
        for m in -1i32..=1 {
            for n in -1i32..=1 {
                best = best.min((base + self.tau2 * n as f64 + m as f64 * self.tau1).norm());
            }
        }
        best
    }
}

fn coords(b1: C, b2: C, v: C) -> (f64, f64) {
    let det = b1.re * b2.im - b1.im * b2.re;
    ((v.re * b2.im - v.im * b2.re) / det, (b1.re * v.im - b1.im * v.re) / det)
}

fn gauss_reduce(mut b1: C, mut b2: C) -> (C, C) {
    for _ in 0..200 {
        if b2.norm() < b1.norm() {
            std::mem::swap(&mut b1, &mut b2);
        }
        let k = ((b2 * b1.conj()).re / b1.norm_sqr()).round();
        if k == 0.0 {
            break;
        }
        b2 -= b1 * k;
    }
    (b1, b2)
}

fn reduce_three(b1: C, b2: C, v: C, eps: f64) -> Result<(C, C)> {
    let mut us = vec![b1, b2, v];
    for _ in 0..500 {
        us.retain(|u| u.norm() > eps);
        us.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        if us.len() == 2 {
            if (us[1] / us[0]).im.abs() < 1e-9 {
                return Err(FliplineError::numerical("lattice", "degenerate basis"));
            }
            return Ok(gauss_reduce(us[0], us[1]));
        }
        if (us[1] / us[0]).im.abs() < 1e-9 {
            let k = (us[1] / us[0]).re.round();
            let u0 = us[0];
            us[1] -= u0 * k;
            continue;
        }
        let (x, y) = coords(us[0], us[1], us[2]);
        us[2] = us[2] - us[0] * x.round() - us[1] * y.round();
    }
    Err(FliplineError::numerical("lattice", "reduction did not terminate"))
}
