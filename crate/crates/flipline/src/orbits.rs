//! Classical orbits of g(Q,P) at fixed quasienergy: turning points, the
//! momentum branches, action and real period, the complex period, the
//! poles of the orbit in complex time, and trajectories in complex time.

use num_complex::Complex64;
use serde::Serialize;

use crate::curve::{Curve, Lattice};
use crate::error::{FliplineError, Result};
use crate::landscape::{self, LandscapeGeometry, Regime};
use crate::ode::{Integrator, State};
use crate::params::{ModelParams, WellId};
use crate::poly;
use crate::quad::{integrate_real, QuadOptions};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchState {
    /// g > g_c: Q± complex conjugate
    ComplexPair,
    /// g < g_c: Q± real
    RealPair,
    /// |g − g_c| below the critical cutoff
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TurningPoints {
    /// q1..q4; real ones ordered left to right
    pub q: [C; 4],
    pub q_plus: C,
    pub q_minus: C,
    pub branch_state: BranchState,
    pub n_real: usize,
}

/// Coefficients of g(Q,0) − g = ¼[Q⁴ − 2(1+μ)Q² − 4α_dQ − 4g].
fn quartic(p: &ModelParams, g: f64) -> [f64; 5] {
    [1.0, 0.0, -2.0 * (1.0 + p.mu), -4.0 * p.alpha_d, -4.0 * g]
}

fn half_width(p: &ModelParams, g: f64) -> C {
    let (gc, _) = landscape::critical_quasienergy(p);
    C::new(gc - g, 0.0).sqrt()
}

/// Turning points q1..q4 (roots of g(Q,0) = g) and the branch points Q± of √B.
pub fn turning_points(p: &ModelParams, g: f64) -> TurningPoints {
    let coeffs = quartic(p, g);
    let (real, cplx) = poly::split_roots(&coeffs);
    let geo = landscape::stationary_points(p).ok();
    let r = |x: f64| C::new(x, 0.0);
    let q = match real.len() {
        4 => [r(real[0]), r(real[1]), r(real[2]), r(real[3])],
        2 => {
            let pair_is_right = match geo.as_ref().and_then(|g| g.saddle) {
                Some(s) if g > s.g => None,
                Some(s) => Some(0.5 * (real[0] + real[1]) > s.q),
                None => Some(geo.as_ref().is_none_or(|g| g.right.is_some())),
            };
            let (zu, zl) = (cplx[0], cplx[1]);
            match pair_is_right {
                None => [r(real[0]), zl, zu, r(real[1])],
                Some(true) => [zl, zu, r(real[0]), r(real[1])],
                Some(false) => [r(real[0]), r(real[1]), zl, zu],
            }
        }
        0 => [cplx[1], cplx[0], cplx[3], cplx[2]],
        _ => {
            // exact double root: fall back to the companion roots by real part
            let mut all = poly::roots(&coeffs);
            all.sort_by(|a, b| a.re.total_cmp(&b.re));
            [all[0], all[1], all[2], all[3]]
        }
    };
    let (gc, qc) = landscape::critical_quasienergy(p);
    let d = half_width(p, g);
    let branch_state = if (g - gc).abs() < p.tol.critical {
        BranchState::Degenerate
    } else if g > gc {
        BranchState::ComplexPair
    } else {
        BranchState::RealPair
    };
    TurningPoints { q, q_plus: qc + d, q_minus: qc - d, branch_state, n_real: real.len() }
}

/// √B(Q) = 2[(Q − Q_c)² − (g_c − g)]^{1/2}: positive on the real axis outside
/// [Q−, Q+]; cut along [Q−, Q+] for g < g_c and along vertical rays from Q±
/// away from the real axis for g > g_c.
pub fn sqrt_b(p: &ModelParams, g: f64, q: C) -> C {
    let (gc, qc) = landscape::critical_quasienergy(p);
    let z = q - qc;
    2.0 * (z * z - (gc - g)).sqrt()
}

/// P(Q|g) on the requested branch. On the real axis in forbidden regions
/// the root with Im P < 0 is returned.
pub fn momentum_branch(p: &ModelParams, g: f64, q: C, branch: Branch) -> C {
    let sb = sqrt_b(p, g, q);
    let base = -q * q - 1.0 + p.mu;
    let p2 = match branch {
        Branch::Plus => base + sb,
        Branch::Minus => base - sb,
    };
    if p2.im == 0.0 {
        if p2.re >= 0.0 {
            C::new(p2.re.sqrt(), 0.0)
        } else {
            C::new(0.0, -(-p2.re).sqrt())
        }
    } else {
        p2.sqrt()
    }
}

struct WellInterval {
    lo: f64,
    hi: f64,
    others: [C; 2],
}

fn check_range(p: &ModelParams, geo: &LandscapeGeometry, g: f64, well: WellId) -> Result<()> {
    let out = || FliplineError::OutsideWellRange { g, sigma: well.sigma() };
    let gmin = geo.g_min(well).map_err(|_| out())?;
    if !(g > gmin) {
        return Err(out());
    }
    if let Some(s) = geo.saddle {
        if !(g < s.g) {
            return Err(out());
        }
    }
    let _ = p;
    Ok(())
}

fn well_interval(p: &ModelParams, g: f64, well: WellId) -> Result<(WellInterval, TurningPoints)> {
    let geo = landscape::stationary_points(p)?;
    check_range(p, &geo, g, well)?;
    let tp = turning_points(p, g);
    let (i, j, o) = match well {
        WellId::Right => (2, 3, [0, 1]),
        WellId::Left => (0, 1, [2, 3]),
    };
    if tp.q[i].im != 0.0 || tp.q[j].im != 0.0 {
        return Err(FliplineError::OutsideWellRange { g, sigma: well.sigma() });
    }
    Ok((WellInterval { lo: tp.q[i].re, hi: tp.q[j].re, others: [tp.q[o[0]], tp.q[o[1]]] }, tp))
}

/// Per-well quantities obtained by Q-plane quadrature with the substitution
/// Q = mid − w cos θ, which removes the turning-point singularities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WellQuadrature {
    pub action: f64,
    pub tau1: f64,
    pub mean_q: f64,
}

/// Point of an intrawell orbit piece at parameter θ: Q, P ≥ 0 on the piece's
/// branch, dQ/dθ ≥ 0, dt/dθ ≥ 0, and the orientation (+1 or −1) with which
/// the piece bounds the enclosed area.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub q: f64,
    pub p: f64,
    pub dq: f64,
    pub dt: f64,
    pub sign: f64,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    branch: Branch,
    /// both ends are turning points of the same branch: P² factorises
    factorised: bool,
}

/// Upper half of an intrawell orbit as one or two Q-monotone pieces, each
/// parametrised by Q = mid − w cos θ, θ ∈ (0, π), which removes the
/// inverse-square-root end singularities. An ordinary orbit is a single
/// piece between its turning points. When μ > 1 and the inner turning point
/// lies on the P²₋ branch (|q_in| < √(μ−1)) the orbit is bean shaped: it
/// turns at the real branch point Q_b of √B with P ≠ 0 and the stretch of
/// the P²₋ branch between q_in and Q_b bounds a dent.
#[derive(Debug, Clone)]
pub struct WellProfile {
    /// Q extent of the orbit
    pub lo: f64,
    pub hi: f64,
    pieces: Vec<Piece>,
    others: [C; 2],
    roots: [C; 4],
    branch_points: [C; 2],
    mu: f64,
    g: f64,
    gc: f64,
    qc: f64,
}

impl WellProfile {
    pub fn is_bean(&self) -> bool {
        self.pieces.len() == 2
    }

    fn point(&self, piece: &Piece, th: f64) -> ProfilePoint {
        let mid = 0.5 * (piece.lo + piece.hi);
        let w = 0.5 * (piece.hi - piece.lo);
        let q = mid - w * th.cos();
        let dq = w * th.sin();
        if piece.factorised {
            let z = q - self.qc;
            let sb = 2.0 * (z * z - (self.gc - self.g)).max(0.0).sqrt();
            let num = ((q - self.others[0]) * (q - self.others[1])).re;
            let rh = (num / (sb + q * q + 1.0 - self.mu)).max(0.0).sqrt();
            return ProfilePoint { q, p: dq * rh, dq, dt: 1.0 / (rh * sb), sign: 1.0 };
        }
        // product forms keep the small factors accurate: B = 4(Q−Q₊)(Q−Q₋) and
        // P²₊P²₋ = Π(Q − q_i); the smaller of P²± is the product over the larger.
        // Distances to the piece ends come from θ directly, not from Q.
        let (gap_lo, gap_hi) = (2.0 * w * (0.5 * th).sin().powi(2), 2.0 * w * (0.5 * th).cos().powi(2));
        let diff = |r: f64| {
            if r == piece.lo {
                gap_lo
            } else if r == piece.hi {
                -gap_hi
            } else {
                q - r
            }
        };
        let diff_c = |r: C| if r.im == 0.0 { C::new(diff(r.re), 0.0) } else { q - r };
        let sb = 2.0 * (diff_c(self.branch_points[0]) * diff_c(self.branch_points[1])).re.max(0.0).sqrt();
        let base = self.mu - 1.0 - q * q;
        let (plus, minus) = (base + sb, base - sb);
        let prod = self.roots.iter().map(|&r| diff_c(r)).product::<C>().re;
        let (p2, sign) = match piece.branch {
            Branch::Plus if plus.abs() < minus.abs() => (prod / minus, 1.0),
            Branch::Plus => (plus, 1.0),
            Branch::Minus if minus.abs() < plus.abs() => (prod / plus, -1.0),
            Branch::Minus => (minus, -1.0),
        };
        let pm = p2.max(0.0).sqrt();
        ProfilePoint { q, p: pm, dq, dt: dq / (pm * sb), sign }
    }

    /// Σ over pieces of ∫_0^π f dθ, summing (value, error) and convergence.
    pub(crate) fn integrate<F: FnMut(&ProfilePoint) -> f64>(&self, mut f: F, opts: QuadOptions) -> (f64, f64, bool) {
        let pi = std::f64::consts::PI;
        let mut total = (0.0, 0.0, true);
        for piece in &self.pieces {
            let (v, e, ok) = integrate_real(|th| f(&self.point(piece, th)), 0.0, pi, opts);
            total = (total.0 + v, total.1 + e, total.2 && ok);
        }
        total
    }
}

pub fn well_profile(p: &ModelParams, g: f64, well: WellId) -> Result<WellProfile> {
    let (wi, tp) = well_interval(p, g, well)?;
    let (gc, qc) = landscape::critical_quasienergy(p);
    let (q_in, q_out) = match well {
        WellId::Right => (wi.lo, wi.hi),
        WellId::Left => (wi.hi, wi.lo),
    };
    let on_minus = |q: f64| {
        let base = p.mu - 1.0 - q * q;
        base > 0.0 && (base - sqrt_b(p, g, C::new(q, 0.0)).re).abs() < (base + sqrt_b(p, g, C::new(q, 0.0)).re).abs()
    };
    let mut prof = WellProfile {
        lo: wi.lo,
        hi: wi.hi,
        pieces: Vec::new(),
        others: wi.others,
        roots: tp.q,
        branch_points: [tp.q_plus, tp.q_minus],
        mu: p.mu,
        g,
        gc,
        qc,
    };
    if on_minus(q_out) {
        return Err(FliplineError::numerical("well profile", format!("g = {g}: outer turning point on the P²₋ branch")));
    }
    if !on_minus(q_in) {
        prof.pieces.push(Piece { lo: wi.lo, hi: wi.hi, branch: Branch::Plus, factorised: true });
        return Ok(prof);
    }
    // bean: the branch point beyond q_in, on the side away from q_out
    let out_dir = (q_in - q_out).signum();
    let q_b = [tp.q_plus, tp.q_minus]
        .iter()
        .filter(|z| z.im == 0.0 && (z.re - q_in) * out_dir > 0.0)
        .map(|z| z.re)
        .min_by(|a, b| (a - q_in).abs().total_cmp(&(b - q_in).abs()))
        .ok_or_else(|| FliplineError::numerical("well profile", format!("g = {g}: no real branch point beyond q_in")))?;
    let span = |a: f64, b: f64| (a.min(b), a.max(b));
    let (lo, hi) = span(q_out, q_b);
    prof.pieces.push(Piece { lo, hi, branch: Branch::Plus, factorised: false });
    let (lo, hi) = span(q_in, q_b);
    prof.pieces.push(Piece { lo, hi, branch: Branch::Minus, factorised: false });
    prof.lo = prof.lo.min(q_b);
    prof.hi = prof.hi.max(q_b);
    Ok(prof)
}

fn well_quadrature(p: &ModelParams, g: f64, well: WellId, opts: QuadOptions) -> Result<WellQuadrature> {
    let prof = well_profile(p, g, well)?;
    let pi = std::f64::consts::PI;
    let (ia, e1, ok1) = prof.integrate(|x| x.sign * x.p * x.dq, opts);
    let (t1, e2, ok2) = prof.integrate(|x| x.dt, opts);
    let (qm, e3, ok3) = prof.integrate(|x| x.q * x.dt, opts);
    // near a degenerate separatrix roundoff stalls the estimate above the
    // target; accept what is still accurate to 1e-7
    let fine = |ok: bool, v: f64, e: f64| ok || e <= 1e-7 * v.abs();
    if !(fine(ok1, ia, e1) && fine(ok2, t1, e2) && fine(ok3, qm, e3)) {
        return Err(FliplineError::numerical(
            "well quadrature",
            format!("g = {g}: errors {e1:e}, {e2:e}, {e3:e}"),
        ));
    }
    Ok(WellQuadrature { action: ia / pi, tau1: 2.0 * t1, mean_q: qm / t1 })
}

fn orbit_quad_opts(p: &ModelParams) -> QuadOptions {
    QuadOptions { rel: (p.tol.quad_rel * 1e-2).max(1e-13), abs: 1e-15, max_intervals: 4000 }
}

/// Action I(g) = (1/2π)∮P dQ, real period τ_p^(1) and ω = 2π/τ_p^(1).
pub fn action_and_period(p: &ModelParams, g: f64, well: WellId) -> Result<(f64, f64, f64)> {
    let wq = well_quadrature(p, g, well, orbit_quad_opts(p))?;
    Ok((wq.action, wq.tau1, 2.0 * std::f64::consts::PI / wq.tau1))
}

/// Action, period and the orbit average of Q.
pub fn well_quadratures(p: &ModelParams, g: f64, well: WellId) -> Result<WellQuadrature> {
    well_quadrature(p, g, well, orbit_quad_opts(p))
}

/// Relative discrepancy between the central difference of I(g) and 1/ω(g).
pub fn frequency_consistency(p: &ModelParams, g: f64, well: WellId, step: f64) -> Result<f64> {
    let (_, _, om) = action_and_period(p, g, well)?;
    let (ip, _, _) = action_and_period(p, g + step, well)?;
    let (im, _, _) = action_and_period(p, g - step, well)?;
    let didg = (ip - im) / (2.0 * step);
    Ok((didg * om - 1.0).abs())
}

/// Everything the kinetics needs about the orbit through one well at
/// quasienergy g. Times are measured from the well's inner turning point
/// (q3 for σ=+1, q2 for σ=−1) where P = 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitData {
    pub g: f64,
    pub well: WellId,
    pub action: f64,
    pub tau1: f64,
    pub omega: f64,
    /// complex period, normalised to Im = h (minimal) and Re ∈ [0, τ1)
    pub tau2: C,
    /// interwell half period: time at which the orbit reaches the other
    /// well's inner turning point, reduced to the fundamental cell
    pub tau_half: C,
    pub tau_star: C,
    pub tau_star_star: C,
    /// whether the continuation landed on the opposite sheet at τ*, τ**
    /// (the numerically determined sign of Im P at infinity)
    pub star_flipped: bool,
    pub star_star_flipped: bool,
}

impl OrbitData {
    pub fn h(&self) -> f64 {
        self.tau2.im
    }

    /// R′(g) = 2 Im(τ_p^(2) − τ* − τ**).
    pub fn r_prime(&self) -> f64 {
        2.0 * (self.tau2.im - self.tau_star.im - self.tau_star_star.im)
    }

    /// Poles of Q(τ) in one cell. Q is real on the real axis, so the poles of
    /// a(τ) come with conjugate images where P ≈ +iQ and a(τ) stays regular.
    pub fn singularities(&self) -> [C; 4] {
        [self.tau_star, self.tau_star_star, self.tau_star.conj(), self.tau_star_star.conj()]
    }

    pub fn lattice(&self) -> Lattice {
        Lattice { tau1: self.tau1, tau2: self.tau2, h: self.tau2.im }
    }
}

fn base_index(well: WellId) -> (usize, usize) {
    match well {
        WellId::Right => (2, 1),
        WellId::Left => (1, 2),
    }
}

/// Orbit data for the orbit through `well` at quasienergy g.
pub fn orbit_data(p: &ModelParams, g: f64, well: WellId) -> Result<OrbitData> {
    let (gc, _) = landscape::critical_quasienergy(p);
    if (g - gc).abs() < p.tol.critical {
        return Err(FliplineError::CriticalPoint { distance: (g - gc).abs() });
    }
    let opts = orbit_quad_opts(p);
    let wq = well_quadrature(p, g, well, opts)?;
    let tp = turning_points(p, g);
    let curve = match Curve::new(p.mu, p.alpha_d, g, &tp.q, opts) {
        Ok(c) => c,
        // the other well's turning points merge at its minimum
        Err(FliplineError::Numerical { stage: "curve", .. }) => return straddle(p, g, well, wq),
        Err(e) => return Err(e),
    };
    let lattice = curve.lattice()?;
    // the uniformized curve loses digits like 1/√|g − g_c| close to g_c, and
    // again near the saddle where two branch points collide
    let near = |d: f64| (1e-2 / d.abs().sqrt()).max(1.0);
    let geo = landscape::stationary_points(p)?;
    if geo.regime == Regime::DoubleWell {
        geo.require_double_well()?;
    }
    let g_s = geo.g_s().unwrap_or(f64::INFINITY);
    let conditioning = near(g - gc) * near(g_s - g);
    if (lattice.tau1 - wq.tau1).abs() > 1e-7 * conditioning * wq.tau1 {
        return Err(FliplineError::numerical(
            "orbit",
            format!("g = {g}: lattice period {} disagrees with quadrature {}", lattice.tau1, wq.tau1),
        ));
    }
    let (base, other) = base_index(well);
    let ((ts, f1), (tss, f2)) = curve.pole_images(base)?;
    let tau_half = lattice.reduce(curve.half_period(base, other)?);
    Ok(OrbitData {
        g,
        well,
        action: wq.action,
        tau1: wq.tau1,
        omega: 2.0 * std::f64::consts::PI / wq.tau1,
        tau2: C::new(lattice.tau2.re * wq.tau1 / lattice.tau1, lattice.tau2.im),
        tau_half,
        tau_star: lattice.reduce(ts),
        tau_star_star: lattice.reduce(tss),
        star_flipped: f1,
        star_star_flipped: f2,
    })
}

/// Orbit data where the other well's turning points coincide. There h and
/// Im τ* diverge logarithmically and Re τ2 jumps by τ1/2, while h − Im τ*,
/// τ** and the Fourier components stay continuous, so the complex times
/// come from just above.
fn straddle(p: &ModelParams, g: f64, well: WellId, wq: WellQuadrature) -> Result<OrbitData> {
    let mut last = None;
    for rel in [1e-9, 1e-7] {
        match orbit_data(p, g + rel * g.abs().max(1e-3), well) {
            Ok(od) => {
                return Ok(OrbitData {
                    g,
                    action: wq.action,
                    tau1: wq.tau1,
                    omega: 2.0 * std::f64::consts::PI / wq.tau1,
                    ..od
                })
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Complex period τ_p^(2) of the orbit family, anchored at the deep well.
pub fn complex_period(p: &ModelParams, g: f64) -> Result<C> {
    Ok(orbit_data(p, g, deep_well_for(p, g)?)?.tau2)
}

/// Pole positions (τ*, τ**) in the fundamental cell anchored at the deep well.
pub fn pole_positions(p: &ModelParams, g: f64) -> Result<(C, C)> {
    let od = orbit_data(p, g, deep_well_for(p, g)?)?;
    Ok((od.tau_star, od.tau_star_star))
}

fn deep_well_for(p: &ModelParams, _g: f64) -> Result<WellId> {
    let geo = landscape::stationary_points(p)?;
    let deep = WellId::deep(p.alpha_d);
    if geo.exists(deep) {
        Ok(deep)
    } else {
        Ok(deep.other())
    }
}

/// Which well an orbit at g can be anchored to: the deep well always
/// works above its minimum; below g_min(shallow) it is the only one.
pub fn regime_at(p: &ModelParams, g: f64) -> Result<Regime> {
    let geo = landscape::stationary_points(p)?;
    if geo.regime == Regime::SingleWell {
        return Ok(Regime::SingleWell);
    }
    let sh = geo.g_min(WellId::shallow(p.alpha_d))?;
    Ok(if g < sh { Regime::SingleWell } else { Regime::DoubleWell })
}

// ---------------------------------------------------------------------------
// trajectories in complex time

fn field(p: &ModelParams) -> impl Fn(&State) -> State {
    let mu = p.mu;
    let alpha = p.alpha_d;
    move |y: &State| {
        let (q, pm) = (y[0], y[1]);
        let r2 = q * q + pm * pm;
        let qdot = pm * (r2 - mu + 1.0);
        let pdot = -q * (r2 - mu - 1.0) + alpha;
        [qdot, pdot, pm * qdot]
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectorySample {
    pub t: C,
    pub q: C,
    pub p: C,
}

fn integrator() -> Integrator {
    Integrator::default()
}

/// Smallest distance from the straight path a → b to any lattice translate
/// of the singularities of Q(τ).
fn path_pole_distance(od: &OrbitData, a: C, b: C) -> f64 {
    let lat = od.lattice();
    let poles = od.singularities();
    let mut best = f64::INFINITY;
    let n = 400;
    for k in 0..=n {
        let t = a + (b - a) * (k as f64 / n as f64);
        for &z in &poles {
            best = best.min(lat.distance_to(t, z));
        }
    }
    best
}

fn pole_cutoff(od: &OrbitData) -> f64 {
    1e-3 * od.tau1
}

/// State (Q, P, ∫P dQ) at complex time tau on the orbit through `well`,
/// reached from (q_inner, 0) at t = 0 along a pole-avoiding path.
fn state_at(p: &ModelParams, od: &OrbitData, tau: C) -> Result<State> {
    let tp = turning_points(p, od.g);
    let (base, _) = base_index(od.well);
    let y0: State = [tp.q[base], C::new(0.0, 0.0), C::new(0.0, 0.0)];
    let zero = C::new(0.0, 0.0);
    let corner_a = C::new(0.0, tau.im);
    let corner_b = C::new(tau.re, 0.0);
    let mut paths = vec![vec![zero, tau], vec![zero, corner_a, tau], vec![zero, corner_b, tau]];
    // detours climbing at an offset real time, for poles on the direct lines
    for k in [1.0, -1.0, 3.0, -3.0] {
        let s = C::new(0.125 * k * od.tau1, 0.0);
        paths.push(vec![zero, s, s + C::new(0.0, tau.im), tau]);
    }
    let mut best: Option<(f64, &Vec<C>)> = None;
    for path in paths.iter() {
        let d = path.windows(2).map(|w| path_pole_distance(od, w[0], w[1])).fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, path));
        }
    }
    let (dist, path) = best.unwrap();
    if dist < pole_cutoff(od) {
        return Err(FliplineError::PoleProximity { distance: dist });
    }
    let f = field(p);
    let integ = integrator();
    let mut y = y0;
    for w in path.windows(2) {
        let dt = w[1] - w[0];
        if dt.norm() == 0.0 {
            continue;
        }
        y = integ.advance(&f, y, dt / dt.norm(), dt.norm(), |_, _, _| true)?;
    }
    Ok(y)
}

/// Samples (t, Q, P) at n equally spaced times over one real period,
/// starting at complex time tau0, on the orbit through the deep well.
pub fn integrate_orbit(p: &ModelParams, g: f64, tau0: C, n_samples: usize) -> Result<Vec<TrajectorySample>> {
    integrate_orbit_in(p, g, deep_well_for(p, g)?, tau0, n_samples)
}

pub fn integrate_orbit_in(
    p: &ModelParams,
    g: f64,
    well: WellId,
    tau0: C,
    n_samples: usize,
) -> Result<Vec<TrajectorySample>> {
    let od = orbit_data(p, g, well)?;
    let d = path_pole_distance(&od, tau0, tau0 + od.tau1);
    if d < pole_cutoff(&od) {
        return Err(FliplineError::PoleProximity { distance: d });
    }
    let mut y = state_at(p, &od, tau0)?;
    let f = field(p);
    let integ = integrator();
    let dt = od.tau1 / n_samples as f64;
    let mut out = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        out.push(TrajectorySample { t: tau0 + dt * k as f64, q: y[0], p: y[1] });
        if k + 1 < n_samples {
            y = integ.advance(&f, y, C::new(1.0, 0.0), dt, |_, _, _| true)?;
        }
    }
    Ok(out)
}

/// I(g|τ) = (1/2π)∫ P Q̇ dt over one real period starting at complex time τ.
pub fn action_of_imag_time(p: &ModelParams, g: f64, tau: C) -> Result<f64> {
    action_of_imag_time_in(p, g, deep_well_for(p, g)?, tau)
}

pub fn action_of_imag_time_in(p: &ModelParams, g: f64, well: WellId, tau: C) -> Result<f64> {
    let od = orbit_data(p, g, well)?;
    let d = path_pole_distance(&od, tau, tau + od.tau1);
    if d < pole_cutoff(&od) {
        return Err(FliplineError::PoleProximity { distance: d });
    }
    let mut y = state_at(p, &od, tau)?;
    y[2] = C::new(0.0, 0.0);
    let f = field(p);
    let y = integrator().advance(&f, y, C::new(1.0, 0.0), od.tau1, |_, _, _| true)?;
    Ok(y[2].re / (2.0 * std::f64::consts::PI))
}

/// Return time of the real orbit through `well`, found by integrating the
/// equations of motion from (q_inner, 0) until P changes sign twice.
pub fn return_time(p: &ModelParams, g: f64, well: WellId) -> Result<f64> {
    let (wi, _) = well_interval(p, g, well)?;
    let start = match well {
        WellId::Right => wi.lo,
        WellId::Left => wi.hi,
    };
    let f = field(p);
    let integ = integrator();
    let y0: State = [C::new(start, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
    let mut prev = (0.0, y0);
    let mut sign = 0.0;
    let mut changes = 0;
    let mut bracket = None;
    integ.advance(&f, y0, C::new(1.0, 0.0), 1e6, |s, y, _| {
        let sp = y[1].re.signum();
        if sign == 0.0 {
            sign = sp;
        } else if sp != sign {
            sign = sp;
            changes += 1;
            if changes == 2 {
                bracket = Some((prev.0, prev.1, s - prev.0));
                return false;
            }
        }
        prev = (s, *y);
        true
    })?;
    let (s0, y_start, h) = bracket.ok_or_else(|| FliplineError::numerical("return time", "no return"))?;
    let p_after = |dt: f64| integ.step(&f, &y_start, C::new(dt, 0.0)).0[1].re;
    let (mut a, mut b) = (0.0, h);
    let fa0 = y_start[1].re;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if p_after(m).signum() == fa0.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(s0 + 0.5 * (a + b))
}

/// Relative variation of g(Q,P) along a set of complex samples.
pub fn energy_drift(p: &ModelParams, g: f64, samples: &[TrajectorySample]) -> f64 {
    samples
        .iter()
        .map(|s| {
            let r2 = s.q * s.q + s.p * s.p - p.mu;
            let gv = 0.25 * r2 * r2 + 0.5 * (s.p * s.p - s.q * s.q) - 0.25 * p.mu * p.mu - p.alpha_d * s.q;
            (gv - g).norm() / g.abs().max(1e-3)
        })
        .fold(0.0, f64::max)
}

/// Integrates forward over `length` and back again from the deep-well
/// inner turning point; returns the distance to the starting point.
pub fn retrace_error(p: &ModelParams, g: f64, length: f64) -> Result<f64> {
    let well = deep_well_for(p, g)?;
    let (wi, _) = well_interval(p, g, well)?;
    let start = if well == WellId::Right { wi.lo } else { wi.hi };
    let f = field(p);
    let integ = integrator();
    let y0: State = [C::new(start, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
    let y1 = integ.advance(&f, y0, C::new(1.0, 0.0), length, |_, _, _| true)?;
    let y2 = integ.advance(&f, y1, C::new(-1.0, 0.0), length, |_, _, _| true)?;
    Ok((y2[0] - y0[0]).norm() + (y2[1] - y0[1]).norm())
}
