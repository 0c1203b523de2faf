//! Phase-plane integration of the Cauchy problem `u(0) = 0, u'(0) = δ` for
//! `-(|u'|^α u')' = (1+α) f_{a,A}(u)`, written for `X = u`, `Y = |u'|^α u'` as
//!
//! ```text
//! X' = sign(Y)|Y|^{1/(1+α)},    Y' = -(1+α) f_{a,A}(X),
//! ```
//!
//! together with its first integral and the heteroclinic profile obtained by
//! inverting `x(u) = ∫_0^u ds / u'(s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{GateVerdict, ReducedNonlinearity};
use crate::numeric::{brent, integrate as quad, MonotoneCubic, QuadOptions};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: f64,
    /// `X = u`.
    pub u: f64,
    /// `Y = |u'|^α u'`.
    pub flux: f64,
}

impl PhaseState {
    /// `u' = sign(Y)|Y|^{1/(1+α)}`.
    pub fn slope(&self, alpha: f64) -> f64 {
        flux_to_slope(self.flux, alpha)
    }
}

pub fn flux_to_slope(flux: f64, alpha: f64) -> f64 {
    if flux == 0.0 {
        0.0
    } else if alpha == 0.0 {
        flux
    } else {
        flux.signum() * flux.abs().powf(1.0 / (1.0 + alpha))
    }
}

pub fn slope_to_flux(slope: f64, alpha: f64) -> f64 {
    if slope == 0.0 || alpha == 0.0 {
        slope
    } else {
        slope.abs().powf(alpha) * slope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    FluxZero,
    LevelCrossing { level: f64 },
    BlowUpGuard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub x: f64,
    #[serde(flatten)]
    pub kind: EventKind,
    pub state: PhaseState,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub micro_steps: usize,
    pub projections: usize,
}

impl IntegratorStats {
    fn merge(&mut self, other: &Self) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
        self.micro_steps += other.micro_steps;
        self.projections += other.projections;
    }
}

/// Samples at accepted steps and event points, strictly increasing in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub alpha: f64,
    pub delta: f64,
    pub samples: Vec<PhaseState>,
    pub events: Vec<Event>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn flux_zeros(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::FluxZero)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.samples[0].x, self.samples[self.samples.len() - 1].x)
    }

    /// Event-free sub-ranges of sample indices between consecutive flux zeros.
    pub fn flux_zero_segments(&self) -> Vec<std::ops::Range<usize>> {
        let mut cuts = vec![0];
        for e in self.flux_zeros() {
            if let Some(k) = self.samples.iter().position(|s| s.x == e.x) {
                cuts.push(k);
            }
        }
        cuts.push(self.samples.len() - 1);
        cuts.dedup();
        cuts.windows(2).map(|w| w[0]..w[1] + 1).collect()
    }
}

/// Optional re-projection of `Y` onto a level set of the first integral after
/// every accepted step. The sign of `Y` is kept, and the projection is skipped
/// near turning points where it would move `Y` by more than `1e-6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    #[default]
    None,
    /// Level of the initial state.
    InitialEnergy,
    /// Level of the heteroclinic connection, `E = F_{a,A}(±1)`, with kinetic
    /// part `∫_u^1 f_{a,A}` (or `∫_{-1}^u -f_{a,A}` for `u < 0`) evaluated
    /// without cancellation so that the saddles at `±1` are approached but
    /// never crossed.
    Connection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Absolute local error bound per step.
    pub tol: f64,
    pub h_max: f64,
    /// Stop a leg once `|X|` exceeds this value.
    pub blow_up: Option<f64>,
    pub projection: Projection,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            h_max: 0.25,
            blow_up: None,
            projection: Projection::None,
            max_steps: 2_000_000,
        }
    }
}

/// Right-hand side `(X', Y')` of the phase-plane system.
pub fn phase_rhs(reduced: &ReducedNonlinearity, u: f64, flux: f64) -> (f64, f64) {
    let alpha = reduced.alpha();
    (flux_to_slope(flux, alpha), -(1.0 + alpha) * reduced.value(u))
}

/// `E = |Y|^{(2+α)/(1+α)}/(2+α) + F_{a,A}(X) = |u'|^{2+α}/(2+α) + F_{a,A}(u)`.
pub fn energy(reduced: &ReducedNonlinearity, state: &PhaseState) -> Result<f64> {
    let p = 2.0 + reduced.alpha();
    let kinetic = state.slope(reduced.alpha()).abs().powf(p) / p;
    Ok(kinetic + reduced.antiderivative(state.u)?)
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
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

struct Stepper<'a> {
    reduced: &'a ReducedNonlinearity,
    evals: usize,
}

impl Stepper<'_> {
    /// One Dormand-Prince step of (signed) length `h`; returns the 5th-order
    /// state and the embedded error estimate.
    fn step(&mut self, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            let (dx, dy) = phase_rhs(self.reduced, ys[0], ys[1]);
            k[s] = [dx, dy];
        }
        self.evals += 7;
        let mut hi = y;
        let mut err = [0.0; 2];
        for s in 0..7 {
            for c in 0..2 {
                hi[c] += h * B5[s] * k[s][c];
                err[c] += h * (B5[s] - B4[s]) * k[s][c];
            }
        }
        (hi, err)
    }
}

#[derive(Debug, Clone, Copy)]
enum Watch {
    Flux,
    Level(f64),
    Guard(f64),
}

impl Watch {
    fn value(&self, y: &[f64; 2]) -> f64 {
        match *self {
            Watch::Flux => y[1],
            Watch::Level(l) => y[0] - l,
            Watch::Guard(b) => y[0].abs() - b,
        }
    }

    fn kind(&self) -> EventKind {
        match *self {
            Watch::Flux => EventKind::FluxZero,
            Watch::Level(level) => EventKind::LevelCrossing { level },
            Watch::Guard(_) => EventKind::BlowUpGuard,
        }
    }
}

struct Leg {
    samples: Vec<PhaseState>,
    events: Vec<Event>,
    stats: IntegratorStats,
}

fn integrate_leg(
    reduced: &ReducedNonlinearity,
    start: [f64; 2],
    end: f64,
    opts: &IntegrateOptions,
    energy0: f64,
) -> std::result::Result<Leg, (Leg, f64, String)> {
    let alpha = reduced.alpha();
    let dir = end.signum();
    let mut leg = Leg {
        samples: vec![PhaseState {
            x: 0.0,
            u: start[0],
            flux: start[1],
        }],
        events: Vec::new(),
        stats: IntegratorStats::default(),
    };
    if end == 0.0 {
        return Ok(leg);
    }
    let mut stepper = Stepper { reduced, evals: 0 };
    let mut watches = vec![Watch::Flux, Watch::Level(-1.0), Watch::Level(0.0), Watch::Level(1.0)];
    if let Some(b) = opts.blow_up {
        watches.push(Watch::Guard(b));
    }
    let (mut x, mut y) = (0.0f64, start);
    let mut h = opts.h_max.min(1e-2);
    let mut err_prev: f64 = 1.0;
    let mut micro_left = 0usize;

    while (end - x) * dir > 0.0 {
        if leg.stats.accepted + leg.stats.rejected >= opts.max_steps {
            leg.stats.rhs_evals = stepper.evals;
            return Err((leg, x, format!("step limit {} reached", opts.max_steps)));
        }
        let micro = micro_left > 0;
        let mut h_try = if micro { tol::MICRO_STEP } else { h };
        let remaining = (end - x).abs();
        if h_try >= remaining {
            h_try = remaining;
        }
        let (y_new, err) = stepper.step(y, dir * h_try);
        let err_norm = err[0].abs().max(err[1].abs()) / opts.tol;
        if !micro && !(err_norm <= 1.0) {
            leg.stats.rejected += 1;
            let factor = if err_norm.is_finite() {
                (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h = h_try * factor;
            if h < 1e-14 * x.abs().max(1.0) {
                leg.stats.rhs_evals = stepper.evals;
                return Err((leg, x, format!("step size underflow (h = {h:e})")));
            }
            continue;
        }
        if micro {
            micro_left -= 1;
            leg.stats.micro_steps += 1;
        } else {
            let e = err_norm.max(1e-10);
            let factor = (0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
            h = (h_try * factor).min(opts.h_max);
            err_prev = e;
        }
        leg.stats.accepted += 1;
        let x_new = x + dir * h_try;

        // Locate sign changes inside the step on the step map itself.
        let mut found: Vec<(f64, Watch, [f64; 2])> = Vec::new();
        for w in &watches {
            let (v0, v1) = (w.value(&y), w.value(&y_new));
            if v0 != 0.0 && (v0 * v1 < 0.0 || v1 == 0.0) {
                let s = if v1 == 0.0 {
                    h_try
                } else {
                    brent(|s| w.value(&stepper.step(y, dir * s).0), 0.0, h_try, 1e-15).unwrap_or(h_try)
                };
                let ys = if s == h_try { y_new } else { stepper.step(y, dir * s).0 };
                found.push((s, *w, ys));
            }
        }
        found.sort_by(|p, q| p.0.total_cmp(&q.0));

        let mut truncated = None;
        for (s, w, ys) in found {
            let xs = x + dir * s;
            let mut state = PhaseState {
                x: xs,
                u: ys[0],
                flux: ys[1],
            };
            let truncate_here = match w {
                Watch::Guard(_) => true,
                Watch::Flux => alpha > 0.0 && state.flux.abs() <= tol::EVENT,
                Watch::Level(_) => false,
            };
            if truncate_here && matches!(w, Watch::Flux) {
                state.flux = 0.0;
            }
            leg.events.push(Event {
                x: xs,
                kind: w.kind(),
                state,
            });
            if s < h_try && leg.samples.last().map_or(true, |p| p.x != xs) {
                leg.samples.push(state);
            }
            if truncate_here {
                truncated = Some((w, state));
                break;
            }
        }

        match truncated {
            Some((Watch::Guard(_), _)) => break,
            Some((_, state)) => {
                x = state.x;
                y = [state.u, state.flux];
                micro_left = tol::MICRO_STEPS;
                continue;
            }
            None => {}
        }

        x = x_new;
        y = y_new;
        if let Some(flux) = project_flux(reduced, y, opts.projection, energy0) {
            y[1] = flux;
            leg.stats.projections += 1;
        }
        if !(y[0].is_finite() && y[1].is_finite()) {
            leg.stats.rhs_evals = stepper.evals;
            return Err((leg, x, "state became non-finite".into()));
        }
        leg.samples.push(PhaseState {
            x,
            u: y[0],
            flux: y[1],
        });
    }
    leg.stats.rhs_evals = stepper.evals;
    Ok(leg)
}

// Flux with the same sign and the magnitude that restores `energy0`, if the
// correction is small; `None` near turning points where the sign is ambiguous.
fn project_flux(reduced: &ReducedNonlinearity, y: [f64; 2], projection: Projection, energy0: f64) -> Option<f64> {
    if y[1] == 0.0 {
        return None;
    }
    let p = 2.0 + reduced.alpha();
    let kinetic = match projection {
        Projection::None => return None,
        Projection::InitialEnergy => energy0 - reduced.antiderivative(y[0]).ok()?,
        Projection::Connection => reduced.connection_potential(y[0]).ok()?,
    };
    if kinetic <= 0.0 {
        return None;
    }
    let flux = y[1].signum() * slope_to_flux((p * kinetic).powf(1.0 / p), reduced.alpha());
    ((flux - y[1]).abs() <= 1e-6 * y[1].abs().max(1.0)).then_some(flux)
}

/// Integrates from `(X, Y) = (0, |δ|^α δ)` at `x = 0` to both ends of `span`.
pub fn integrate(reduced: &ReducedNonlinearity, delta: f64, span: (f64, f64), opts: &IntegrateOptions) -> Result<Trajectory> {
    let (lo, hi) = span;
    if !(lo <= 0.0 && hi >= 0.0) || !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Precondition(format!("span [{lo}, {hi}] must contain 0")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let alpha = reduced.alpha();
    let start = [0.0, slope_to_flux(delta, alpha)];
    let energy0 = energy(
        reduced,
        &PhaseState {
            x: 0.0,
            u: start[0],
            flux: start[1],
        },
    )?;
    let forward = integrate_leg(reduced, start, hi, opts, energy0);
    let backward = integrate_leg(reduced, start, lo, opts, energy0);
    let failure = match (&forward, &backward) {
        (Err((_, x, why)), _) | (_, Err((_, x, why))) => Some((*x, why.clone())),
        _ => None,
    };
    let unwrap = |r: std::result::Result<Leg, (Leg, f64, String)>| match r {
        Ok(l) => l,
        Err((l, _, _)) => l,
    };
    let (fwd, bwd) = (unwrap(forward), unwrap(backward));
    let mut samples: Vec<PhaseState> = bwd.samples.iter().rev().copied().collect();
    samples.extend(fwd.samples.iter().skip(1).copied());
    let mut events: Vec<Event> = bwd.events.iter().chain(&fwd.events).copied().collect();
    events.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut stats = fwd.stats;
    stats.merge(&bwd.stats);
    let traj = Trajectory {
        alpha,
        delta,
        samples,
        events,
        stats,
    };
    match failure {
        Some((x, reason)) => Err(Error::Integration {
            x,
            reason,
            partial: Box::new(traj),
        }),
        None => Ok(traj),
    }
}

/// Max over interior samples of `|ΔY/Δx + (1+α) f_{a,A}(X)|`, with the
/// second-order three-point derivative on the (nonuniform) sample spacing.
/// Triples with a spacing below `1e-9` are skipped.
pub fn weak_residual(traj: &Trajectory, reduced: &ReducedNonlinearity) -> Result<f64> {
    if traj.samples.len() < 3 {
        return Err(Error::Precondition("need at least 3 samples".into()));
    }
    let alpha = reduced.alpha();
    let mut worst: f64 = 0.0;
    for w in traj.samples.windows(3) {
        let (hm, hp) = (w[1].x - w[0].x, w[2].x - w[1].x);
        if hm < 1e-9 || hp < 1e-9 {
            continue;
        }
        let dy = (hm * hm * w[2].flux - hp * hp * w[0].flux + (hp * hp - hm * hm) * w[1].flux) / (hm * hp * (hm + hp));
        worst = worst.max((dy + (1.0 + alpha) * reduced.value(w[1].u)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    /// Number of `u` nodes; odd so that `u = 0` is a node.
    pub points: usize,
    /// Nodes span `[-1 + clearance, 1 - clearance]`.
    pub clearance: f64,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        Self {
            points: 2001,
            clearance: tol::PROFILE_CLEARANCE,
        }
    }
}

/// Increasing heteroclinic profile sampled on a `u`-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `u'(0)`; equals `δ₁` when the balance condition holds.
    pub delta: f64,
    /// `F_{a,A}(1)`, the energy level of the connection.
    pub energy_level: f64,
    pub clearance: f64,
}

impl ProfileSolution {
    pub fn x_range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn flux(&self) -> Vec<f64> {
        self.du.iter().map(|&d| slope_to_flux(d, self.alpha)).collect()
    }

    /// Profile value at any `x`, continued past the grid by exponential tails
    /// that match value and slope at the last node.
    pub fn value_at(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range();
        let n = self.x.len();
        if x > hi {
            let gap = 1.0 - self.u[n - 1];
            let rate = self.du[n - 1] / gap;
            return 1.0 - gap * (-rate * (x - hi)).exp();
        }
        if x < lo {
            let gap = self.u[0] + 1.0;
            let rate = self.du[0] / gap;
            return -1.0 + gap * (-rate * (lo - x)).exp();
        }
        // Linear interpolation is not accurate enough between coarse tail
        // nodes; build the Hermite form from the stored slopes.
        let k = self.x.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.u[k]
            + (t3 - 2.0 * t2 + t) * h * self.du[k]
            + (-2.0 * t3 + 3.0 * t2) * self.u[k + 1]
            + (t3 - t2) * h * self.du[k + 1]
    }

    /// Monotone interpolant of `u(x)` on the grid.
    pub fn interpolant(&self) -> Result<MonotoneCubic> {
        MonotoneCubic::new(self.x.clone(), self.u.clone())
    }
}

/// Heteroclinic profile by quadrature inversion of
/// `u' = [(2+α) ∫_u^1 f_{a,A}]^{1/(2+α)}`.
pub fn heteroclinic_profile(reduced: &ReducedNonlinearity, grid: &ProfileGrid) -> Result<ProfileSolution> {
    let gate = reduced.existence_gate()?;
    if gate.verdict != GateVerdict::HeteroclinicExists {
        return Err(Error::Gate(format!("existence gate verdict {:?}", gate.verdict)));
    }
    if grid.points < 3 || grid.points % 2 == 0 {
        return Err(Error::Config("profile grid needs an odd number (≥ 3) of points".into()));
    }
    if !(grid.clearance > 0.0 && grid.clearance < 1.0) {
        return Err(Error::Config("clearance must lie in (0, 1)".into()));
    }
    let p = 2.0 + reduced.alpha();
    let speed = |u: f64| -> Result<f64> { Ok((p * reduced.connection_potential(u)?.max(0.0)).powf(1.0 / p)) };
    let half = grid.points / 2;
    let top = 1.0 - grid.clearance;
    let us: Vec<f64> = (0..grid.points)
        .map(|k| {
            let i = k as f64 - half as f64;
            top * i / half as f64
        })
        .collect();
    let du = us.iter().map(|&u| speed(u)).collect::<Result<Vec<_>>>()?;
    if let Some(k) = du.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Gate(format!("u' vanishes at interior u = {}", us[k])));
    }
    let opts = QuadOptions {
        abs_tol: tol::QUAD,
        ..QuadOptions::default()
    };
    let mut xs = vec![0.0; grid.points];
    for k in half + 1..grid.points {
        let piece = quad(|s| 1.0 / speed(s).unwrap_or(f64::NAN), us[k - 1], us[k], opts)?;
        xs[k] = xs[k - 1] + piece.value;
    }
    for k in (0..half).rev() {
        let piece = quad(|s| 1.0 / speed(s).unwrap_or(f64::NAN), us[k], us[k + 1], opts)?;
        xs[k] = xs[k + 1] - piece.value;
    }
    Ok(ProfileSolution {
        alpha: reduced.alpha(),
        delta: du[half],
        energy_level: reduced.antiderivative(1.0)?,
        clearance: grid.clearance,
        x: xs,
        u: us,
        du,
    })
}
