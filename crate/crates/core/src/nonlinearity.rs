//! The nonlinearity `f`, its Pucci-reduced form `f_{a,A}`, and the scalar
//! quantities derived from it: the threshold slope `δ₁`, the oscillation
//! endpoints `θ±`, and the existence gate for increasing heteroclinics.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{brent, integrate, MonotoneCubic, QuadOptions};
use crate::tol;

/// Ellipticity constants `0 < a ≤ A` and the degeneracy exponent `alpha > -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PucciParams {
    #[serde(rename = "a")]
    pub lower: f64,
    #[serde(rename = "A")]
    pub upper: f64,
    pub alpha: f64,
}

impl PucciParams {
    pub fn new(lower: f64, upper: f64, alpha: f64) -> Result<Self> {
        let p = Self { lower, upper, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.alpha.is_finite()) {
            return Err(Error::Config("parameters must be finite".into()));
        }
        if self.lower <= 0.0 {
            return Err(Error::Config(format!("a = {} must be positive", self.lower)));
        }
        if self.upper < self.lower {
            return Err(Error::Config(format!("A = {} must be at least a = {}", self.upper, self.lower)));
        }
        if self.alpha <= -1.0 {
            return Err(Error::Config(format!("alpha = {} must exceed -1", self.alpha)));
        }
        Ok(())
    }

    /// `2 + alpha`, the exponent of the first integral.
    pub fn energy_exponent(&self) -> f64 {
        2.0 + self.alpha
    }
}

#[derive(Clone)]
pub struct Callback(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for Callback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Callback(..)")
    }
}

#[derive(Debug, Clone)]
pub enum NonlinearityKind {
    /// `f(u) = u - u³`.
    Cubic,
    Table(MonotoneCubic),
    Callback(Callback),
}

/// How `f` is continued outside `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extension {
    /// Native behavior: the polynomial for the cubic, the table range for
    /// tabulated data, the callback itself.
    None,
    /// `f(1 + s) = f'(1)·s·e^{-s}` and `f(-1 - s) = -f'(-1)·s·e^{-s}` for `s > 0`.
    DecayingSlope { left: f64, right: f64 },
}

#[derive(Debug, Clone)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    extension: Extension,
}

impl NonlinearitySpec {
    pub fn cubic() -> Self {
        Self {
            kind: NonlinearityKind::Cubic,
            extension: Extension::None,
        }
    }

    /// Tabulated `f` from `(t, f(t))` samples. The table must contain the
    /// knots `t = ±1` with value exactly zero.
    pub fn table(points: &[[f64; 2]]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_by(|p, q| p[0].total_cmp(&q[0]));
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|p| (p[0], p[1])).unzip();
        let interp = MonotoneCubic::new(xs, ys)?;
        for end in [-1.0, 1.0] {
            match interp.knots().iter().position(|&k| k == end) {
                Some(i) if interp.values()[i] == 0.0 => {}
                Some(i) => {
                    return Err(Error::Config(format!(
                        "f({end}) = {} must be exactly zero",
                        interp.values()[i]
                    )))
                }
                None => return Err(Error::Config(format!("table has no knot at t = {end}"))),
            }
        }
        Ok(Self {
            kind: NonlinearityKind::Table(interp),
            extension: Extension::None,
        })
    }

    pub fn callback<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for end in [-1.0, 1.0] {
            let v = f(end);
            if v != 0.0 {
                return Err(Error::Config(format!("f({end}) = {v} must be exactly zero")));
            }
        }
        Ok(Self {
            kind: NonlinearityKind::Callback(Callback(Arc::new(f))),
            extension: Extension::None,
        })
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    fn native(&self, t: f64) -> Option<f64> {
        match &self.kind {
            NonlinearityKind::Cubic => Some(t - t * t * t),
            NonlinearityKind::Table(p) => p.eval(t),
            NonlinearityKind::Callback(cb) => Some((cb.0)(t)),
        }
    }

    fn eval_opt(&self, t: f64) -> Option<f64> {
        match self.extension {
            Extension::DecayingSlope { right, .. } if t > 1.0 => {
                let s = t - 1.0;
                Some(right * s * (-s).exp())
            }
            Extension::DecayingSlope { left, .. } if t < -1.0 => {
                let s = -1.0 - t;
                Some(-left * s * (-s).exp())
            }
            _ => self.native(t),
        }
    }

    /// `f(t)`, continued outside `[-1, 1]` by the extension policy.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_opt(t)
            .ok_or_else(|| Error::Domain(format!("t = {t} lies outside the table and f is not extended")))
    }

    /// `f'(end)` for `end = ±1`, computed from the native definition.
    pub fn endpoint_slope(&self, end: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Cubic => 1.0 - 3.0 * end * end,
            NonlinearityKind::Table(p) => p.derivative(end).unwrap_or(f64::NAN),
            NonlinearityKind::Callback(cb) => {
                // Fourth-order one-sided difference pointing into [-1, 1].
                let h = -end.signum() * 1e-3;
                let f = |k: f64| (cb.0)(end + k * h);
                (-25.0 * f(0.0) + 48.0 * f(1.0) - 36.0 * f(2.0) + 16.0 * f(3.0) - 3.0 * f(4.0)) / (12.0 * h)
            }
        }
    }

    /// Copy of the spec continued by [`Extension::DecayingSlope`], which matches
    /// `f` and `f'` at `±1` and stays bounded.
    pub fn extended(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            extension: Extension::DecayingSlope {
                left: self.endpoint_slope(-1.0),
                right: self.endpoint_slope(1.0),
            },
        }
    }

    /// Interior points where `f` may fail to be smooth (table knots), plus `0`.
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![-1.0, 0.0, 1.0];
        if let NonlinearityKind::Table(p) = &self.kind {
            pts.extend(p.knots().iter().copied().filter(|k| k.abs() < 1.0));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    points: Vec<[f64; 2]>,
}

impl Serialize for NonlinearitySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let file = match &self.kind {
            NonlinearityKind::Cubic => SpecFile {
                kind: "cubic".into(),
                points: Vec::new(),
            },
            NonlinearityKind::Table(p) => SpecFile {
                kind: "table".into(),
                points: p.knots().iter().zip(p.values()).map(|(&t, &v)| [t, v]).collect(),
            },
            NonlinearityKind::Callback(_) => {
                return Err(serde::ser::Error::custom("callback nonlinearities cannot be serialized"))
            }
        };
        file.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonlinearitySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = SpecFile::deserialize(d)?;
        match file.kind.as_str() {
            "cubic" => Ok(Self::cubic()),
            "table" => Self::table(&file.points).map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!(
                "unknown nonlinearity kind {other:?}, expected \"cubic\" or \"table\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateVerdict {
    HeteroclinicExists,
    BalanceViolated,
    SlopeViolated,
    PositivityViolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    /// `∫_{-1}^{1} f_{a,A}`.
    pub balance: f64,
    /// `f'(-1)`.
    pub slope_minus: f64,
    /// `f'(1)`.
    pub slope_plus: f64,
    /// Sampled minimum of `∫_t^1 f_{a,A}` over `t ∈ (-1, 0]`.
    pub cond3_min: f64,
    pub verdict: GateVerdict,
}

/// `f_{a,A}` for a fixed spec and parameter triple, with the antiderivative
/// `F_{a,A}(t) = ∫_0^t f_{a,A}` cached at the breakpoints of `f`.
///
/// The spec is always extended, so every evaluation is total.
#[derive(Debug, Clone)]
pub struct ReducedNonlinearity {
    spec: NonlinearitySpec,
    params: PucciParams,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ReducedNonlinearity {
    pub fn new(spec: &NonlinearitySpec, params: PucciParams) -> Result<Self> {
        params.validate()?;
        let spec = match spec.extension {
            Extension::None => spec.extended(),
            Extension::DecayingSlope { .. } => spec.clone(),
        };
        let nodes = spec.breakpoints();
        let mut reduced = Self {
            spec,
            params,
            nodes,
            cumulative: Vec::new(),
        };
        let zero = reduced.nodes.iter().position(|&n| n == 0.0).expect("0 is a breakpoint");
        let mut cumulative = vec![0.0; reduced.nodes.len()];
        for k in zero + 1..reduced.nodes.len() {
            cumulative[k] = cumulative[k - 1] + reduced.integral(reduced.nodes[k - 1], reduced.nodes[k])?;
        }
        for k in (0..zero).rev() {
            cumulative[k] = cumulative[k + 1] - reduced.integral(reduced.nodes[k], reduced.nodes[k + 1])?;
        }
        reduced.cumulative = cumulative;
        Ok(reduced)
    }

    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    pub fn params(&self) -> PucciParams {
        self.params
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    /// `f(t)` with the extension applied.
    pub fn f(&self, t: f64) -> f64 {
        self.spec.eval_opt(t).expect("extended spec is total")
    }

    /// `f_{a,A}(t)`: `f/a` where `f > 0`, `f/A` where `f < 0`.
    pub fn value(&self, t: f64) -> f64 {
        let v = self.f(t);
        if v > 0.0 {
            v / self.params.lower
        } else if v < 0.0 {
            v / self.params.upper
        } else {
            0.0
        }
    }

    fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        let opts = QuadOptions {
            abs_tol: tol::QUAD,
            ..QuadOptions::default()
        };
        Ok(integrate(|s| self.value(s), lo, hi, opts)?.value)
    }

    /// `F_{a,A}(t) = ∫_0^t f_{a,A}(s) ds`.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let n = self.nodes.len();
        let k = self.nodes.partition_point(|&x| x <= t);
        let (node, base) = if k == 0 {
            (self.nodes[0], self.cumulative[0])
        } else {
            (self.nodes[k - 1], self.cumulative[k - 1])
        };
        // Integrate from whichever neighboring node is closer.
        if k > 0 && k < n && self.nodes[k] - t < t - node {
            return Ok(self.cumulative[k] - self.integral(t, self.nodes[k])?);
        }
        Ok(base + self.integral(node, t)?)
    }

    /// `∫_{-1}^{1} f_{a,A}`.
    pub fn balance(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1] - self.cumulative[0]
    }

    /// `∫_t^1 f_{a,A}`, computed without cancellation near `t = ±1`.
    pub fn potential_above(&self, t: f64) -> Result<f64> {
        if t >= 0.0 {
            self.integral(t, 1.0)
        } else {
            Ok(self.balance() - self.integral(-1.0, t)?)
        }
    }

    /// `∫_{-1}^t f_{a,A}` measured downward: `∫_{-1}^t (-f_{a,A})`, so it is
    /// positive on `(-1, 0]` when `f < 0` there.
    pub fn potential_below(&self, t: f64) -> Result<f64> {
        Ok(-self.integral(-1.0, t)?)
    }

    /// Kinetic part `|u'|^{2+α}/(2+α)` of the heteroclinic connection at `u`:
    /// `∫_t^1 f_{a,A}` for `t ≥ 0` and `∫_{-1}^t (-f_{a,A})` for `t < 0`. The two
    /// agree when the balance condition holds; each is free of cancellation
    /// near its own endpoint.
    pub fn connection_potential(&self, t: f64) -> Result<f64> {
        if t >= 0.0 {
            self.integral(t, 1.0)
        } else {
            self.potential_below(t)
        }
    }

    /// `δ₁ = ((2+α) ∫_0^1 f(s)/a ds)^{1/(2+α)}`.
    pub fn delta1(&self) -> Result<f64> {
        let opts = QuadOptions {
            abs_tol: tol::QUAD,
            ..QuadOptions::default()
        };
        let mass = integrate(|s| self.f(s), 0.0, 1.0, opts)?.value / self.params.lower;
        if mass <= 0.0 {
            return Err(Error::Gate(format!("∫_0^1 f/a = {mass:e} is not positive")));
        }
        let p = self.params.energy_exponent();
        Ok((p * mass).powf(1.0 / p))
    }

    /// Threshold on the negative side, `((2+α) ∫_{-1}^0 (-f)/A)^{1/(2+α)}`.
    /// Equals `δ₁` exactly when the balance condition holds.
    pub fn delta1_minus(&self) -> Result<f64> {
        let opts = QuadOptions {
            abs_tol: tol::QUAD,
            ..QuadOptions::default()
        };
        let mass = -integrate(|s| self.f(s), -1.0, 0.0, opts)?.value / self.params.upper;
        if mass <= 0.0 {
            return Err(Error::Gate(format!("∫_-1^0 (-f)/A = {mass:e} is not positive")));
        }
        let p = self.params.energy_exponent();
        Ok((p * mass).powf(1.0 / p))
    }

    /// The `θ⁺ ∈ (0, 1)` with `(2+α) ∫_0^{θ⁺} f/a = δ^{2+α}`.
    pub fn theta_plus(&self, delta: f64) -> Result<f64> {
        let d1 = self.delta1()?;
        if !(delta > 0.0 && delta < d1) {
            return Err(Error::Domain(format!("delta = {delta} outside (0, δ₁ = {d1})")));
        }
        let p = self.params.energy_exponent();
        let target = delta.powf(p);
        let opts = QuadOptions {
            abs_tol: tol::QUAD,
            ..QuadOptions::default()
        };
        let a = self.params.lower;
        brent(
            |theta| {
                let mass = integrate(|s| self.f(s), 0.0, theta, opts).map(|r| r.value).unwrap_or(f64::NAN);
                p * mass / a - target
            },
            0.0,
            1.0,
            tol::ROOT,
        )
    }

    /// The `θ⁻ ∈ (-1, 0)` with `∫_{θ⁻}^{θ⁺} f_{a,A} = 0`.
    pub fn theta_minus(&self, theta_plus: f64) -> Result<f64> {
        if !(theta_plus > 0.0 && theta_plus < 1.0) {
            return Err(Error::Domain(format!("theta_plus = {theta_plus} outside (0, 1)")));
        }
        let level = self.antiderivative(theta_plus)?;
        self.level_root(level, -1.0, 0.0)
    }

    // Root of F_{a,A}(t) = level in (lo, hi), where F_{a,A} vanishes at the
    // end adjacent to 0 and must exceed `level` at the far end.
    fn level_root(&self, level: f64, lo: f64, hi: f64) -> Result<f64> {
        let far = if lo < 0.0 { lo } else { hi };
        let reach = self.antiderivative(far)?;
        if reach <= level {
            return Err(Error::Gate(format!(
                "∫_0^{far} f_a,A = {reach:e} does not exceed the energy level {level:e}"
            )));
        }
        brent(
            |t| self.antiderivative(t).map(|v| v - level).unwrap_or(f64::NAN),
            lo,
            hi,
            tol::ROOT,
        )
    }

    /// Turning points `(θ⁻, θ⁺)` of the trajectory with `u(0) = 0, u'(0) = δ`.
    pub fn turning_points(&self, delta: f64) -> Result<(f64, f64)> {
        if delta == 0.0 {
            return Ok((0.0, 0.0));
        }
        if delta > 0.0 {
            let plus = self.theta_plus(delta)?;
            Ok((self.theta_minus(plus)?, plus))
        } else {
            let p = self.params.energy_exponent();
            let level = delta.abs().powf(p) / p;
            let minus = self.level_root(level, -1.0, 0.0)?;
            let plus = self.level_root(level, 0.0, 1.0)?;
            Ok((minus, plus))
        }
    }

    /// Conditions on `f` for an increasing heteroclinic connecting `-1` to `1`.
    pub fn existence_gate(&self) -> Result<GateReport> {
        let slope_minus = self.spec.endpoint_slope(-1.0);
        let slope_plus = self.spec.endpoint_slope(1.0);
        let balance = self.balance();
        let n = tol::GATE_SAMPLES;
        let mut cond3_min = f64::INFINITY;
        for k in 1..=n {
            let t = -1.0 + k as f64 / n as f64;
            cond3_min = cond3_min.min(self.potential_above(t)?);
        }
        let verdict = if !(slope_minus < -tol::SLOPE && slope_plus < -tol::SLOPE) {
            GateVerdict::SlopeViolated
        } else if balance.abs() > tol::GATE {
            GateVerdict::BalanceViolated
        } else if cond3_min <= 0.0 {
            GateVerdict::PositivityViolated
        } else {
            GateVerdict::HeteroclinicExists
        };
        Ok(GateReport {
            balance,
            slope_minus,
            slope_plus,
            cond3_min,
            verdict,
        })
    }
}
