//! Classification of the Cauchy problem `u(0) = 0, u'(0) = δ` into the
//! unbounded / heteroclinic / oscillating regimes by comparing `δ` with `δ₁`,
//! backed by evidence read off an integrated trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{GateVerdict, ReducedNonlinearity};
use crate::profile::{integrate, IntegrateOptions, Projection, Trajectory};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    UnboundedIncreasing,
    Heteroclinic,
    Oscillating,
    UnboundedDecreasing,
    AmbiguousAtThreshold,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::UnboundedIncreasing => "unbounded-increasing",
            Regime::Heteroclinic => "heteroclinic",
            Regime::Oscillating => "oscillating",
            Regime::UnboundedDecreasing => "unbounded-decreasing",
            Regime::AmbiguousAtThreshold => "ambiguous-at-threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub x_span: (f64, f64),
    pub tol: f64,
    /// Relative tolerance for `δ = ±δ₁`.
    pub tol_match: f64,
    pub blow_up: f64,
    pub window: f64,
    pub tol_limit: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            x_span: (-40.0, 40.0),
            tol: 1e-10,
            tol_match: tol::MATCH,
            blow_up: tol::BLOW_UP,
            window: tol::LIMIT_WINDOW,
            tol_limit: tol::LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `C = |δ|^{2+α} − δ₁^{2+α}`, the lower bound on `|u'|^{2+α}`.
    pub flux_constant: f64,
    /// `C^{1/(2+α)}`, the slope bound implied by the flux bound.
    pub slope_constant: f64,
    pub flux_bound_holds: bool,
    pub linear_bound_holds: bool,
    /// Whether `|u(x)| ≥ C|x|` with the unrooted constant happens to hold too.
    /// Informational only.
    pub literal_constant_holds: bool,
    pub worst_flux_x: Option<f64>,
    pub worst_linear_x: Option<f64>,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.flux_bound_holds && self.linear_bound_holds
    }
}

/// Checks the case-1 bounds `|u'|^{2+α} ≥ C` everywhere and `|u(x)| ≥ C'|x|`
/// for `|x| ≥ 1`, with a slack of `1e-8` for the integration error.
pub fn growth_bound_check(traj: &Trajectory, delta: f64, delta1: f64, alpha: f64) -> Result<GrowthReport> {
    if !(delta.abs() > delta1) {
        return Err(Error::Precondition(format!("|delta| = {} must exceed delta1 = {delta1}", delta.abs())));
    }
    const SLACK: f64 = 1e-8;
    let p = 2.0 + alpha;
    let flux_constant = delta.abs().powf(p) - delta1.powf(p);
    let slope_constant = flux_constant.powf(1.0 / p);
    let mut worst_flux = (f64::INFINITY, None);
    let mut worst_linear = (f64::INFINITY, None);
    let mut literal = true;
    for s in &traj.samples {
        let margin = s.slope(alpha).abs().powf(p) - flux_constant;
        if margin < worst_flux.0 {
            worst_flux = (margin, Some(s.x));
        }
        if s.x.abs() >= 1.0 {
            let margin = s.u.abs() - slope_constant * s.x.abs();
            if margin < worst_linear.0 {
                worst_linear = (margin, Some(s.x));
            }
            literal &= s.u.abs() >= flux_constant * s.x.abs() - SLACK;
        }
    }
    Ok(GrowthReport {
        flux_constant,
        slope_constant,
        flux_bound_holds: worst_flux.0 >= -SLACK,
        linear_bound_holds: worst_linear.0 >= -SLACK,
        literal_constant_holds: literal,
        worst_flux_x: worst_flux.1,
        worst_linear_x: worst_linear.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub theta_minus: f64,
    pub theta_plus: f64,
    /// `u` at each flux zero, in order of `x`.
    pub turning_values: Vec<f64>,
}

/// `(min, max)` of `u` over the flux-zero events.
pub fn oscillation_envelope(traj: &Trajectory) -> Result<Envelope> {
    let turning_values: Vec<f64> = traj.flux_zeros().map(|e| e.state.u).collect();
    if turning_values.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 flux-zero events, found {}",
            turning_values.len()
        )));
    }
    let theta_minus = turning_values.iter().copied().fold(f64::INFINITY, f64::min);
    let theta_plus = turning_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Envelope {
        theta_minus,
        theta_plus,
        turning_values,
    })
}

/// Mean spacing between every other flux zero.
pub fn period_estimate(traj: &Trajectory) -> Option<f64> {
    let xs: Vec<f64> = traj.flux_zeros().map(|e| e.x).collect();
    if xs.len() < 3 {
        return None;
    }
    let gaps: Vec<f64> = xs.windows(3).map(|w| w[2] - w[0]).collect();
    Some(gaps.iter().sum::<f64>() / gaps.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum End {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub end: End,
    /// Mean of `u` over the window.
    pub mean: f64,
    pub max_deviation: f64,
    pub max_slope: f64,
    /// `Some(±1)` when the trajectory settles at that equilibrium.
    pub limit: Option<f64>,
}

/// Looks at the last `window` of the trajectory at `end` and decides whether
/// `u` has settled at `-1` or `+1` within `tol_limit` (both `|u - L|` and `|u'|`).
pub fn limit_detect(traj: &Trajectory, window: f64, end: End, tol_limit: f64) -> Result<LimitReport> {
    let (lo, hi) = traj.x_range();
    let (from, to) = match end {
        End::Right => (hi - window, hi),
        End::Left => (lo, lo + window),
    };
    if hi - lo < window || (end == End::Right && hi < window) || (end == End::Left && lo > -window) {
        return Err(Error::Precondition(format!(
            "trajectory on [{lo}, {hi}] does not reach |x| ≥ window = {window}"
        )));
    }
    let inside: Vec<_> = traj.samples.iter().filter(|s| s.x >= from && s.x <= to).collect();
    let mean = inside.iter().map(|s| s.u).sum::<f64>() / inside.len() as f64;
    let max_slope = inside.iter().map(|s| s.slope(traj.alpha).abs()).fold(0.0, f64::max);
    let limit = [-1.0, 1.0].into_iter().find(|&l| {
        inside.iter().all(|s| (s.u - l).abs() <= tol_limit) && max_slope <= tol_limit
    });
    let target = limit.unwrap_or(if mean >= 0.0 { 1.0 } else { -1.0 });
    let max_deviation = inside.iter().map(|s| (s.u - target).abs()).fold(0.0, f64::max);
    Ok(LimitReport {
        end,
        mean,
        max_deviation,
        max_slope,
        limit,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub growth: Option<GrowthReport>,
    pub envelope: Option<Envelope>,
    /// `(θ⁻, θ⁺)` from the integral conditions on `f_{a,A}`.
    pub predicted_envelope: Option<(f64, f64)>,
    pub period: Option<f64>,
    pub limit_left: Option<LimitReport>,
    pub limit_right: Option<LimitReport>,
    /// Where the blow-up guard fired, left and right.
    pub blow_up_left: Option<f64>,
    pub blow_up_right: Option<f64>,
    /// Largest `|E − E₀|` between flux zeros.
    pub energy_drift: f64,
    pub flux_zeros: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub regime: Regime,
    pub delta: f64,
    pub delta1: f64,
    /// Threshold on the negative side; equals `delta1` under the balance condition.
    pub delta1_minus: f64,
    pub gate: GateVerdict,
    /// Whether the integrated trajectory behaves as the regime predicts.
    pub consistent: bool,
    pub evidence: Evidence,
    pub note: Option<String>,
}

/// Largest deviation of the first integral from its initial value, measured
/// within each stretch between flux zeros.
pub fn energy_drift(traj: &Trajectory, reduced: &ReducedNonlinearity) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let e0 = crate::profile::energy(reduced, &crate::profile::PhaseState { x: 0.0, u: 0.0, flux: crate::profile::slope_to_flux(traj.delta, traj.alpha) })?;
    for seg in traj.flux_zero_segments() {
        let first = crate::profile::energy(reduced, &traj.samples[seg.start])?;
        for s in &traj.samples[seg] {
            let e = crate::profile::energy(reduced, s)?;
            worst = worst.max((e - first).abs()).max((e - e0).abs());
        }
    }
    Ok(worst)
}

fn near(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}

/// Classifies the solution with `u(0) = 0, u'(0) = delta`.
///
/// The regime follows from comparing `delta` with the thresholds; the
/// trajectory supplies evidence and the `consistent` flag. For `α > 0` the
/// threshold itself is reported as ambiguous, since uniqueness fails there.
pub fn classify(reduced: &ReducedNonlinearity, delta: f64, opts: &ClassifyOptions) -> Result<ClassificationResult> {
    if !delta.is_finite() {
        return Err(Error::Config("delta must be finite".into()));
    }
    let alpha = reduced.alpha();
    let gate = reduced.existence_gate()?.verdict;
    let delta1 = reduced.delta1()?;
    let delta1_minus = reduced.delta1_minus()?;
    let p = 2.0 + alpha;
    let level = delta.abs().powf(p) / p;
    let plus_depth = reduced.antiderivative(1.0)?;
    let minus_depth = reduced.antiderivative(-1.0)?;
    let at_plus = near(delta, delta1, opts.tol_match);
    let at_minus = near(delta, -delta1_minus, opts.tol_match);

    let mut note = None;
    let regime = if at_plus {
        if alpha > 0.0 {
            note = Some("α > 0: the Cauchy problem is not unique at δ = δ₁; the computed branch is reported".into());
            Regime::AmbiguousAtThreshold
        } else if gate != GateVerdict::HeteroclinicExists {
            note = Some("δ = δ₁ but the existence gate fails".into());
            Regime::AmbiguousAtThreshold
        } else {
            Regime::Heteroclinic
        }
    } else if at_minus {
        // Decided from the trajectory below.
        Regime::AmbiguousAtThreshold
    } else if delta > delta1 {
        Regime::UnboundedIncreasing
    } else if delta < -delta1_minus {
        Regime::UnboundedDecreasing
    } else if delta > 0.0 && level >= minus_depth {
        note = Some("energy exceeds the depth of the well at -1; the trajectory escapes downward".into());
        Regime::UnboundedDecreasing
    } else if delta < 0.0 && level >= plus_depth {
        note = Some("energy exceeds the depth of the well at +1; the trajectory escapes upward".into());
        Regime::UnboundedIncreasing
    } else {
        Regime::Oscillating
    };

    let integ = IntegrateOptions {
        tol: opts.tol,
        blow_up: Some(opts.blow_up),
        projection: if regime == Regime::Heteroclinic {
            Projection::Connection
        } else {
            Projection::None
        },
        ..IntegrateOptions::default()
    };
    let traj = integrate(reduced, delta, opts.x_span, &integ)?;
    let mut evidence = Evidence {
        flux_zeros: traj.flux_zeros().count(),
        energy_drift: energy_drift(&traj, reduced)?,
        ..Evidence::default()
    };
    for e in traj.events.iter().filter(|e| e.kind == crate::profile::EventKind::BlowUpGuard) {
        if e.x < 0.0 {
            evidence.blow_up_left = Some(e.x);
        } else {
            evidence.blow_up_right = Some(e.x);
        }
    }
    let limits = |ev: &mut Evidence| {
        ev.limit_left = limit_detect(&traj, opts.window, End::Left, opts.tol_limit).ok();
        ev.limit_right = limit_detect(&traj, opts.window, End::Right, opts.tol_limit).ok();
    };

    let (regime, consistent) = match regime {
        Regime::UnboundedIncreasing | Regime::UnboundedDecreasing => {
            let threshold = if delta > 0.0 { delta1 } else { delta1_minus };
            if delta.abs() > threshold {
                evidence.growth = Some(growth_bound_check(&traj, delta, threshold, alpha)?);
            }
            let sign = if regime == Regime::UnboundedIncreasing { 1.0 } else { -1.0 };
            let escaped = traj.events.iter().any(|e| {
                e.kind == crate::profile::EventKind::BlowUpGuard && (e.state.u * sign) > 0.0
            });
            (regime, escaped && evidence.growth.as_ref().map_or(true, GrowthReport::holds))
        }
        Regime::Heteroclinic => {
            limits(&mut evidence);
            let ok = evidence.limit_right.and_then(|l| l.limit) == Some(1.0)
                && evidence.limit_left.and_then(|l| l.limit) == Some(-1.0)
                && evidence.flux_zeros == 0;
            (regime, ok)
        }
        Regime::Oscillating => {
            evidence.predicted_envelope = reduced.turning_points(delta).ok();
            if delta == 0.0 {
                evidence.envelope = Some(Envelope {
                    theta_minus: 0.0,
                    theta_plus: 0.0,
                    turning_values: Vec::new(),
                });
                note = Some("δ = 0: the solution is the equilibrium u ≡ 0".into());
            } else {
                evidence.envelope = oscillation_envelope(&traj).ok();
                evidence.period = period_estimate(&traj);
            }
            let ok = evidence
                .envelope
                .as_ref()
                .is_some_and(|e| e.theta_minus > -1.0 && e.theta_plus < 1.0)
                && evidence.blow_up_left.is_none()
                && evidence.blow_up_right.is_none();
            (regime, ok)
        }
        Regime::AmbiguousAtThreshold => {
            limits(&mut evidence);
            evidence.envelope = oscillation_envelope(&traj).ok();
            evidence.period = period_estimate(&traj);
            if at_minus && !at_plus {
                if evidence.flux_zeros >= 2 && evidence.blow_up_left.is_none() && evidence.blow_up_right.is_none() {
                    evidence.predicted_envelope = reduced.turning_points(delta).ok();
                    note = Some("δ = −δ₁: trajectory oscillates".into());
                    (Regime::Oscillating, true)
                } else {
                    note = Some("δ = −δ₁: trajectory does not oscillate; see limits".into());
                    (Regime::AmbiguousAtThreshold, true)
                }
            } else {
                if alpha > 0.0 {
                    let branch = if evidence.envelope.is_some() {
                        "oscillating branch"
                    } else if evidence.blow_up_left.is_some() || evidence.blow_up_right.is_some() {
                        "escaping branch"
                    } else {
                        "monotone branch"
                    };
                    note = Some(format!("{}; computed {branch}", note.unwrap_or_default()));
                }
                (Regime::AmbiguousAtThreshold, true)
            }
        }
    };

    Ok(ClassificationResult {
        regime,
        delta,
        delta1,
        delta1_minus,
        gate,
        consistent,
        evidence,
        note,
    })
}

/// Classifies every `delta` in parallel; results keep the input order, and
/// each point fails or succeeds on its own.
pub fn sweep(reduced: &ReducedNonlinearity, deltas: &[f64], opts: &ClassifyOptions) -> Vec<Result<ClassificationResult>> {
    use rayon::prelude::*;
    deltas.par_iter().map(|&d| classify(reduced, d, opts)).collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
