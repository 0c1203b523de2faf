//! Pucci extremal operators and the degenerate operator `|p|^α F̃(M)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{NonlinearitySpec, PucciParams};
use crate::tol;

/// Dense symmetric matrix. Only the upper triangle is ever read, so symmetry
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from a full row-major matrix, reading the upper triangle.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("matrix rows must form a square".into()));
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, rows[i][j]);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[i * self.n + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, t: f64) -> Self {
        self.map2(self, |a, _| t * a)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.map2(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.map2(other, |a, b| a - b))
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j) * other.get(j, i);
            }
        }
        Ok(s)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Shape(format!("dimension {} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    fn map2(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Real spectrum, sorted ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev = match self.n {
            0 => Vec::new(),
            1 => vec![self.get(0, 0)],
            2 => {
                let (l1, l2) = eig2(self.get(0, 0), self.get(0, 1), self.get(1, 1));
                vec![l1, l2]
            }
            _ => jacobi_eigenvalues(self)?,
        };
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

/// Eigenvalues of `[[p, q], [q, r]]`, ascending.
pub fn eig2(p: f64, q: f64, r: f64) -> (f64, f64) {
    let mean = 0.5 * (p + r);
    let radius = (0.5 * (p - r)).hypot(q);
    (mean - radius, mean + radius)
}

// Cyclic Jacobi rotations; quadratically convergent and accurate to roundoff.
fn jacobi_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 64;
    let n = m.n;
    let mut a = m.to_rows();
    let scale: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off.sqrt() <= f64::EPSILON * scale * 1e-2 {
            return Ok((0..n).map(|i| a[i][i]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::Eigen { sweeps: MAX_SWEEPS })
}

fn split_spectrum(ev: &[f64]) -> (f64, f64) {
    let pos = ev.iter().filter(|&&e| e > 0.0).sum();
    let neg = ev.iter().filter(|&&e| e < 0.0).map(|e| -e).sum();
    (pos, neg)
}

/// `M⁺_{a,A}(M) = A·tr(M⁺) − a·tr(M⁻)`.
pub fn mplus(params: &PucciParams, m: &SymMatrix) -> Result<f64> {
    let (pos, neg) = split_spectrum(&m.eigenvalues()?);
    Ok(params.upper * pos - params.lower * neg)
}

/// `M⁻_{a,A}(M) = a·tr(M⁺) − A·tr(M⁻) = −M⁺_{a,A}(−M)`.
pub fn mminus(params: &PucciParams, m: &SymMatrix) -> Result<f64> {
    let (pos, neg) = split_spectrum(&m.eigenvalues()?);
    Ok(params.lower * pos - params.upper * neg)
}

/// Scalar Pucci maximal operator on `ddu·e₁⊗e₁`.
pub fn mplus_scalar(params: &PucciParams, ddu: f64) -> f64 {
    if ddu > 0.0 {
        params.upper * ddu
    } else {
        params.lower * ddu
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    PucciPlus,
    PucciMinus,
    /// `tr(B M)` for a fixed symmetric positive definite `B`.
    Trace(SymMatrix),
}

/// The second-order part `F̃(M)` of the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub params: PucciParams,
}

impl OperatorSpec {
    pub fn pucci_plus(params: PucciParams) -> Self {
        Self {
            kind: OperatorKind::PucciPlus,
            params,
        }
    }

    pub fn pucci_minus(params: PucciParams) -> Self {
        Self {
            kind: OperatorKind::PucciMinus,
            params,
        }
    }

    pub fn trace(b: SymMatrix, alpha: f64) -> Result<Self> {
        let ev = b.eigenvalues()?;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if !(lo > 0.0) {
            return Err(Error::Config(format!("B must be positive definite (min eigenvalue {lo})")));
        }
        Ok(Self {
            kind: OperatorKind::Trace(b),
            params: PucciParams::new(lo, hi, alpha)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let OperatorKind::Trace(b) = &self.kind {
            let ev = b.eigenvalues()?;
            if ev.first().map_or(true, |&lo| lo <= 0.0) {
                return Err(Error::Config("B must be positive definite".into()));
            }
        }
        Ok(())
    }

    /// Ellipticity constants `(a, A)` of the sandwich `a tr N ≤ F̃(M+N) − F̃(M) ≤ A tr N`.
    pub fn ellipticity_bounds(&self) -> Result<(f64, f64)> {
        match &self.kind {
            OperatorKind::Trace(b) => {
                let ev = b.eigenvalues()?;
                Ok((ev[0], ev[ev.len() - 1]))
            }
            _ => Ok((self.params.lower, self.params.upper)),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            OperatorKind::Trace(b) => Some(b.dim()),
            _ => None,
        }
    }

    /// `F̃(M)`.
    pub fn apply(&self, m: &SymMatrix) -> Result<f64> {
        match &self.kind {
            OperatorKind::PucciPlus => mplus(&self.params, m),
            OperatorKind::PucciMinus => mminus(&self.params, m),
            OperatorKind::Trace(b) => b.trace_product(m),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    big_a: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<Vec<f64>>>,
}

impl OperatorSpec {
    /// JSON object `{ "op": "pucci+" | "pucci-" | "trace", "a", "A", "B" }`.
    pub fn to_json(&self) -> serde_json::Value {
        let file = match &self.kind {
            OperatorKind::Trace(b) => OperatorFile {
                op: "trace".into(),
                a: None,
                big_a: None,
                b: Some(b.to_rows()),
            },
            kind => OperatorFile {
                op: if matches!(kind, OperatorKind::PucciPlus) { "pucci+" } else { "pucci-" }.into(),
                a: Some(self.params.lower),
                big_a: Some(self.params.upper),
                b: None,
            },
        };
        serde_json::to_value(file).expect("operator file is plain data")
    }

    pub fn from_json(value: &serde_json::Value, alpha: f64) -> Result<Self> {
        let file: OperatorFile = serde_json::from_value(value.clone())?;
        match file.op.as_str() {
            "trace" => {
                let rows = file.b.ok_or_else(|| Error::Config("trace operator needs \"B\"".into()))?;
                Self::trace(SymMatrix::from_rows(&rows)?, alpha)
            }
            "pucci+" | "pucci-" => {
                let params = PucciParams::new(
                    file.a.ok_or_else(|| Error::Config("missing \"a\"".into()))?,
                    file.big_a.ok_or_else(|| Error::Config("missing \"A\"".into()))?,
                    alpha,
                )?;
                Ok(if file.op == "pucci+" {
                    Self::pucci_plus(params)
                } else {
                    Self::pucci_minus(params)
                })
            }
            other => Err(Error::Config(format!("unknown operator {other:?}"))),
        }
    }
}

/// `F(p, M) = |p|^α F̃(M)`. At `p = 0` this is `F̃(M)` for `α = 0`, `0` for
/// `α > 0`, and singular for `α < 0`.
pub fn f_eval(op: &OperatorSpec, alpha: f64, p: &[f64], m: &SymMatrix) -> Result<f64> {
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let weight = gradient_weight(alpha, norm)?;
    if weight == 0.0 {
        return Ok(0.0);
    }
    Ok(weight * op.apply(m)?)
}

fn gradient_weight(alpha: f64, norm: f64) -> Result<f64> {
    if norm == 0.0 {
        return match alpha {
            a if a < 0.0 => Err(Error::Singular { alpha }),
            a if a > 0.0 => Ok(0.0),
            _ => Ok(1.0),
        };
    }
    Ok(if alpha == 0.0 { 1.0 } else { norm.powf(alpha) })
}

/// Checks `a tr(N) ≤ F̃(M+N) − F̃(M) ≤ A tr(N)` and `F̃(tM) = t F̃(M)` for
/// `t ∈ {0.5, 2, 10}`, within `tol::ELLIPTICITY·(|tr N| + 1)`.
pub fn ellipticity_check(op: &OperatorSpec, m: &SymMatrix, n: &SymMatrix) -> Result<bool> {
    let n_ev = n.eigenvalues()?;
    let tr_n = n.trace();
    if n_ev.first().is_some_and(|&lo| lo < -tol::ELLIPTICITY * (tr_n.abs() + 1.0)) {
        return Err(Error::Precondition(format!("N is not positive semidefinite (min eigenvalue {})", n_ev[0])));
    }
    let (a, big_a) = op.ellipticity_bounds()?;
    let base = op.apply(m)?;
    let increment = op.apply(&m.add(n)?)? - base;
    let slack = tol::ELLIPTICITY * (tr_n.abs() + 1.0);
    let sandwich = a * tr_n - slack <= increment && increment <= big_a * tr_n + slack;
    let mut homogeneous = true;
    for t in [0.5, 2.0, 10.0] {
        let scaled = op.apply(&m.scale(t))?;
        homogeneous &= (scaled - t * base).abs() <= tol::ELLIPTICITY * (t * base.abs() + 1.0);
    }
    Ok(sandwich && homogeneous)
}

/// Residual of the one-dimensional equation `F(v' e₁, v'' e₁⊗e₁) + f(v)`.
pub fn residual_1d(op: &OperatorSpec, alpha: f64, spec: &NonlinearitySpec, u: f64, du: f64, ddu: f64) -> Result<f64> {
    let n = op.dim().unwrap_or(1);
    let mut hess = SymMatrix::zeros(n);
    hess.set(0, 0, ddu);
    let mut p = vec![0.0; n];
    p[0] = du;
    Ok(f_eval(op, alpha, &p, &hess)? + spec.eval(u)?)
}
