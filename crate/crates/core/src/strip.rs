//! Pseudo-time relaxation of `|∇u|^α F̃(D²u) + f(u) = 0` on the strip
//! `[-L, L] × (ℝ / Wℤ)`, Dirichlet in `x₁` and periodic in `x₂`, together with
//! the diagnostics used to test one-dimensionality and monotonicity, and the
//! explicit piecewise-cosine family `u_{k,m}`.

use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{NonlinearitySpec, PucciParams, ReducedNonlinearity};
use crate::profile::{heteroclinic_profile, ProfileGrid, ProfileSolution};
use crate::pucci::{eig2, OperatorKind, OperatorSpec};
use crate::tol;

/// How the rows `x₁ = ±L` are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// `u = -1` at `x₁ = -L` and `u = 1` at `x₁ = L`.
    Dirichlet,
    /// The one-dimensional profile evaluated at `x₁ = ±L`.
    #[default]
    ProfileTrace,
}

/// Uniform grid on `[-L, L] × [0, W)`. Rows `i = 0` and `i = n1 - 1` carry
/// Dirichlet data; column `n2` wraps to column `0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub n1: usize,
    pub n2: usize,
    pub h1: f64,
    pub h2: f64,
    pub boundary: BoundaryKind,
}

pub fn build_grid(l: f64, w: f64, n1: usize, n2: usize, boundary: BoundaryKind) -> Result<Grid2D> {
    if !(l > 0.0 && l.is_finite() && w > 0.0 && w.is_finite()) {
        return Err(Error::Config(format!("strip needs L > 0 and W > 0, got L = {l}, W = {w}")));
    }
    if n1 < 4 || n2 < 4 {
        return Err(Error::Config(format!("strip needs n1, n2 ≥ 4, got {n1} × {n2}")));
    }
    Ok(Grid2D {
        l,
        w,
        n1,
        n2,
        h1: 2.0 * l / (n1 - 1) as f64,
        h2: w / n2 as f64,
        boundary,
    })
}

impl Grid2D {
    pub fn x1(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.h1
    }

    pub fn x2(&self, j: usize) -> f64 {
        j as f64 * self.h2
    }

    /// Column index with periodic wrap.
    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.n2 as isize) as usize
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }
}

/// Solver bookkeeping carried with a field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelaxMeta {
    pub steps: usize,
    pub converged: bool,
    pub final_residual: Option<f64>,
    /// Max-node residual at step 0 and every `dt_refresh` steps after.
    pub residual_history: Vec<f64>,
    /// Time step in force after each refresh.
    pub dt_history: Vec<f64>,
    pub grad_floor: f64,
    pub clip: f64,
    /// Free-form remarks about how the field was initialized.
    pub notes: Vec<String>,
}

/// Node values on a [`Grid2D`], row-major in `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub meta: RelaxMeta,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a {} × {} grid",
                values.len(),
                grid.n1,
                grid.n2
            )));
        }
        Ok(Self {
            grid,
            values,
            meta: RelaxMeta {
                grad_floor: tol::GRAD_FLOOR,
                clip: tol::CLIP,
                ..RelaxMeta::default()
            },
        })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.n1)
            .flat_map(|i| (0..grid.n2).map(move |j| (i, j)))
            .map(|(i, j)| f(grid.x1(i), grid.x2(j)))
            .collect();
        Self::new(grid, values).expect("length matches by construction")
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.grid.n2..(i + 1) * self.grid.n2]
    }

    fn check_interior(&self, i: usize, j: usize) -> Result<()> {
        if i == 0 || i + 1 >= self.grid.n1 || j >= self.grid.n2 {
            return Err(Error::Index { i, j });
        }
        Ok(())
    }

    /// Centered differences `(u₁, u₂, u₁₁, u₁₂, u₂₂)` at an interior node.
    fn derivatives(&self, i: usize, j: usize) -> [f64; 5] {
        let g = &self.grid;
        let jm = if j == 0 { g.n2 - 1 } else { j - 1 };
        let jp = if j + 1 == g.n2 { 0 } else { j + 1 };
        let u = |i: usize, j: usize| self.values[i * g.n2 + j];
        let c = u(i, j);
        let (e, w, n, s) = (u(i + 1, j), u(i - 1, j), u(i, jp), u(i, jm));
        [
            (e - w) / (2.0 * g.h1),
            (n - s) / (2.0 * g.h2),
            (e - 2.0 * c + w) / (g.h1 * g.h1),
            (u(i + 1, jp) - u(i + 1, jm) - u(i - 1, jp) + u(i - 1, jm)) / (4.0 * g.h1 * g.h2),
            (n - 2.0 * c + s) / (g.h2 * g.h2),
        ]
    }
}

/// Eigenvalues of the centered-difference Hessian at an interior node, ascending.
pub fn hessian_eigs_2d(field: &Field2D, i: usize, j: usize) -> Result<(f64, f64)> {
    field.check_interior(i, j)?;
    let [_, _, d11, d12, d22] = field.derivatives(i, j);
    Ok(eig2(d11, d12, d22))
}

fn apply_2d(op: &OperatorSpec, d11: f64, d12: f64, d22: f64) -> f64 {
    let (a, big_a) = (op.params.lower, op.params.upper);
    let split = |l: f64| if l > 0.0 { (l, 0.0) } else { (0.0, -l) };
    match &op.kind {
        OperatorKind::PucciPlus | OperatorKind::PucciMinus => {
            // Same closed form as `eig2`, with `sqrt` in place of the slower `hypot`.
            let mean = 0.5 * (d11 + d22);
            let half = 0.5 * (d11 - d22);
            let radius = (half * half + d12 * d12).sqrt();
            let (l1, l2) = (mean - radius, mean + radius);
            let (p1, n1) = split(l1);
            let (p2, n2) = split(l2);
            let (pos, neg) = (p1 + p2, n1 + n2);
            if matches!(op.kind, OperatorKind::PucciPlus) {
                big_a * pos - a * neg
            } else {
                a * pos - big_a * neg
            }
        }
        OperatorKind::Trace(b) => b.get(0, 0) * d11 + 2.0 * b.get(0, 1) * d12 + b.get(1, 1) * d22,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxOptions {
    /// Requested pseudo-time step; capped by the stability bound.
    pub dt0: f64,
    pub tol: f64,
    pub max_steps: usize,
    pub grad_floor: f64,
    pub clip: f64,
    /// Steps between recomputations of the stability bound.
    pub dt_refresh: usize,
    /// Consecutive residual increases that count as divergence.
    pub divergence_window: usize,
    /// Fraction of the stability bound actually used.
    pub safety: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            dt0: 1.0,
            tol: 1e-6,
            max_steps: 1_000_000,
            grad_floor: tol::GRAD_FLOOR,
            clip: tol::CLIP,
            dt_refresh: 100,
            divergence_window: 1000,
            safety: 0.9,
        }
    }
}

struct Problem<'a> {
    op: &'a OperatorSpec,
    alpha: f64,
    f: &'a NonlinearitySpec,
    grad_floor: f64,
}

impl Problem<'_> {
    fn weight(&self, d: &[f64; 5]) -> f64 {
        if self.alpha == 0.0 {
            1.0
        } else {
            (d[0] * d[0] + d[1] * d[1]).sqrt().max(self.grad_floor).powf(self.alpha)
        }
    }

    fn residual(&self, field: &Field2D, i: usize, j: usize) -> Result<f64> {
        let d = field.derivatives(i, j);
        Ok(self.weight(&d) * apply_2d(self.op, d[2], d[3], d[4]) + self.f.eval(field.get(i, j))?)
    }
}

/// `max |∇u|^α`-weighted residual over interior nodes.
pub fn max_residual(field: &Field2D, op: &OperatorSpec, alpha: f64, spec: &NonlinearitySpec, grad_floor: f64) -> Result<f64> {
    let spec = spec.extended();
    let problem = Problem {
        op,
        alpha,
        f: &spec,
        grad_floor,
    };
    let g = field.grid;
    (1..g.n1 - 1)
        .flat_map(|i| (0..g.n2).map(move |j| (i, j)))
        .try_fold(0.0_f64, |acc, (i, j)| Ok(acc.max(problem.residual(field, i, j)?.abs())))
}

fn stability_dt(field: &Field2D, problem: &Problem, upper: f64, opts: &RelaxOptions) -> f64 {
    let g = field.grid;
    // For α < 0 the weight is largest where the gradient is smallest, so the
    // bound uses the largest weight over the grid rather than the largest gradient.
    let weight = if problem.alpha == 0.0 {
        1.0
    } else {
        (1..g.n1 - 1)
            .flat_map(|i| (0..g.n2).map(move |j| (i, j)))
            .map(|(i, j)| problem.weight(&field.derivatives(i, j)))
            .fold(0.0, f64::max)
    };
    // Reduces to h²/(4A·w) when h₁ = h₂.
    let bound = 1.0 / (2.0 * upper * weight * (1.0 / (g.h1 * g.h1) + 1.0 / (g.h2 * g.h2)));
    opts.dt0.min(opts.safety * bound)
}

/// Jacobi pseudo-time marching `u ← u + dt·(|∇u|^α F̃(D²u) + f(u))` on the
/// interior rows until the max-node residual drops to `opts.tol`.
///
/// The boundary rows of `field` are the Dirichlet data and are never touched.
/// Reaching `max_steps` is not an error; check `meta.converged`.
pub fn relax(mut field: Field2D, op: &OperatorSpec, alpha: f64, spec: &NonlinearitySpec, opts: &RelaxOptions) -> Result<Field2D> {
    op.validate()?;
    if op.dim().is_some_and(|d| d != 2) {
        return Err(Error::Config("strip relaxation needs a 2 × 2 operator".into()));
    }
    if !(opts.tol > 0.0 && opts.dt0 > 0.0 && opts.grad_floor > 0.0 && opts.safety > 0.0 && opts.safety <= 1.0) {
        return Err(Error::Config("tol, dt0, grad_floor must be positive and safety in (0, 1]".into()));
    }
    if opts.dt_refresh == 0 || opts.divergence_window == 0 {
        return Err(Error::Config("dt_refresh and divergence_window must be positive".into()));
    }
    let spec = spec.extended();
    let problem = Problem {
        op,
        alpha,
        f: &spec,
        grad_floor: opts.grad_floor,
    };
    let (_, upper) = op.ellipticity_bounds()?;
    let g = field.grid;
    let n2 = g.n2;
    let (lo, hi) = (-1.0 - opts.clip, 1.0 + opts.clip);
    field.meta.grad_floor = opts.grad_floor;
    field.meta.clip = opts.clip;
    field.meta.converged = false;
    let mut next = field.values.clone();
    let mut dt = 0.0;
    let mut previous = f64::INFINITY;
    let mut rising = 0;
    let mut recent: Vec<f64> = Vec::new();
    for step in 0..=opts.max_steps {
        if step % opts.dt_refresh == 0 {
            dt = stability_dt(&field, &problem, upper, opts);
            field.meta.dt_history.push(dt);
        }
        let interior = &mut next[n2..(g.n1 - 1) * n2];
        let current = &field;
        let residual = interior
            .par_chunks_mut(n2)
            .enumerate()
            .map(|(r, row)| -> Result<f64> {
                let i = r + 1;
                let mut worst = 0.0_f64;
                for (j, slot) in row.iter_mut().enumerate() {
                    let res = problem.residual(current, i, j)?;
                    worst = worst.max(res.abs());
                    *slot = (current.get(i, j) + dt * res).clamp(lo, hi);
                }
                Ok(worst)
            })
            .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))?;
        if !residual.is_finite() {
            return Err(Error::Divergence {
                steps: step,
                residual,
                history: recent,
            });
        }
        if step % opts.dt_refresh == 0 {
            field.meta.residual_history.push(residual);
        }
        field.meta.steps = step;
        field.meta.final_residual = Some(residual);
        if residual <= opts.tol {
            field.meta.converged = true;
            return Ok(field);
        }
        rising = if residual > previous { rising + 1 } else { 0 };
        previous = residual;
        if recent.len() == opts.divergence_window {
            recent.remove(0);
        }
        recent.push(residual);
        if rising >= opts.divergence_window {
            return Err(Error::Divergence {
                steps: step,
                residual,
                history: recent,
            });
        }
        if step == opts.max_steps {
            break;
        }
        std::mem::swap(&mut field.values, &mut next);
        field.meta.steps = step + 1;
    }
    Ok(field)
}

/// Largest spread `max_j u − min_j u` over the rows; zero for a field that does
/// not depend on `x₂`.
pub fn one_dimensionality_diag(field: &Field2D) -> f64 {
    (0..field.grid.n1)
        .map(|i| {
            let row = field.row(i);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        })
        .fold(0.0, f64::max)
}

/// Smallest forward difference `(u(i+1, j) − u(i, j)) / h₁` over interior `i`.
pub fn monotonicity_diag(field: &Field2D) -> f64 {
    let g = field.grid;
    (1..g.n1 - 1)
        .flat_map(|i| (0..g.n2).map(move |j| (i, j)))
        .map(|(i, j)| (field.get(i + 1, j) - field.get(i, j)) / g.h1)
        .fold(f64::INFINITY, f64::min)
}

/// Smallest centered `|∇u|` over interior nodes. The grid has no exact analogue
/// of a gradient bound in the viscosity sense, so this is reported as is.
pub fn min_gradient_diag(field: &Field2D) -> f64 {
    let g = field.grid;
    (1..g.n1 - 1)
        .flat_map(|i| (0..g.n2).map(move |j| (i, j)))
        .map(|(i, j)| {
            let d = field.derivatives(i, j);
            d[0].hypot(d[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// The two seams `((2k+1)π, (2m+2)π)` of `u_{k,m}`.
pub fn counterexample_seams(k: u32, m: u32) -> Result<(f64, f64)> {
    if k > m {
        return Err(Error::Domain(format!("u_{{k,m}} needs k ≤ m, got k = {k}, m = {m}")));
    }
    Ok(((2 * k + 1) as f64 * PI, (2 * m + 2) as f64 * PI))
}

/// `u_{k,m}(x₁)`: `-1` left of `(2k+1)π`, `cos x₁` between the seams, `1` right
/// of `(2m+2)π`.
pub fn counterexample_eval(k: u32, m: u32, x1: f64) -> Result<f64> {
    let (left, right) = counterexample_seams(k, m)?;
    Ok(if x1 <= left {
        -1.0
    } else if x1 >= right {
        1.0
    } else {
        x1.cos()
    })
}

/// Classical residual of `|u'|² u'' + u − u³` for `u_{k,m}` at the samples,
/// which must stay at least `1e-6` away from the seams where the gradient
/// vanishes.
pub fn counterexample_residual(k: u32, m: u32, samples: &[f64]) -> Result<f64> {
    const SEAM_GAP: f64 = 1e-6;
    let (left, right) = counterexample_seams(k, m)?;
    let mut worst = 0.0_f64;
    for &x in samples {
        let distance = (x - left).abs().min((x - right).abs());
        if distance < SEAM_GAP {
            return Err(Error::Sampling { x1: x, distance });
        }
        let r = if x < left || x > right {
            let u: f64 = if x < left { -1.0 } else { 1.0 };
            u - u * u * u
        } else {
            let (s, c) = x.sin_cos();
            s * s * (-c) + c - c * c * c
        };
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// `u_{k,m}(x₁ + shift)` on every node of `grid`.
pub fn counterexample_field(k: u32, m: u32, grid: Grid2D, shift: f64) -> Result<Field2D> {
    counterexample_seams(k, m)?;
    Ok(Field2D::from_fn(grid, |x1, _| {
        counterexample_eval(k, m, x1 + shift).expect("k ≤ m checked")
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    /// `min (v − u)` over all nodes.
    pub min_gap: f64,
    pub max_gap: f64,
    pub argmin: (usize, usize),
    /// Nodes where `v − u` is exactly zero.
    pub equal_nodes: usize,
    /// Nodes where `v < u`.
    pub violations: Vec<(usize, usize)>,
}

impl OrderReport {
    pub fn ordered(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `u ≤ v` nodewise.
pub fn order_check(u: &Field2D, v: &Field2D) -> Result<OrderReport> {
    let (gu, gv) = (u.grid, v.grid);
    if gu.n1 != gv.n1 || gu.n2 != gv.n2 || gu.l != gv.l || gu.w != gv.w {
        return Err(Error::Shape(format!(
            "grids differ: {} × {} on L = {}, W = {} versus {} × {} on L = {}, W = {}",
            gu.n1, gu.n2, gu.l, gu.w, gv.n1, gv.n2, gv.l, gv.w
        )));
    }
    let mut report = OrderReport {
        min_gap: f64::INFINITY,
        max_gap: f64::NEG_INFINITY,
        argmin: (0, 0),
        equal_nodes: 0,
        violations: Vec::new(),
    };
    for (idx, (a, b)) in u.values.iter().zip(&v.values).enumerate() {
        let gap = b - a;
        let node = (idx / gu.n2, idx % gu.n2);
        if gap < report.min_gap {
            report.min_gap = gap;
            report.argmin = node;
        }
        report.max_gap = report.max_gap.max(gap);
        if gap == 0.0 {
            report.equal_nodes += 1;
        } else if gap < 0.0 {
            report.violations.push(node);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitKind {
    #[serde(rename = "profile")]
    Profile,
    #[default]
    #[serde(rename = "profile+perturbation")]
    ProfilePerturbation,
    #[serde(rename = "file")]
    File,
}

fn default_op() -> serde_json::Value {
    serde_json::json!({ "op": "pucci+", "a": 1.0, "A": 1.0 })
}

fn default_perturbation() -> f64 {
    0.3
}

fn default_dt0() -> f64 {
    RelaxOptions::default().dt0
}

fn default_tol() -> f64 {
    RelaxOptions::default().tol
}

fn default_max_steps() -> usize {
    RelaxOptions::default().max_steps
}

fn default_grad_floor() -> f64 {
    tol::GRAD_FLOOR
}

fn default_spec() -> NonlinearitySpec {
    NonlinearitySpec::cubic()
}

/// JSON configuration of a strip run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripConfig {
    pub grid: GridConfig,
    #[serde(default = "default_op")]
    pub op: serde_json::Value,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_spec")]
    pub spec: NonlinearitySpec,
    #[serde(default)]
    pub boundary: BoundaryKind,
    #[serde(default = "default_dt0")]
    pub dt0: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub init: InitKind,
    /// Amplitude of `sin(2πx₂/W)·exp(−x₁²)` added by `profile+perturbation`.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    #[serde(default = "default_grad_floor")]
    pub grad_floor: f64,
    /// CSV (`i,j,x1,x2,u`) read when `init` is `file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_file: Option<PathBuf>,
}

impl StripConfig {
    pub fn operator(&self) -> Result<OperatorSpec> {
        let op = OperatorSpec::from_json(&self.op, self.alpha)?;
        op.validate()?;
        Ok(op)
    }

    pub fn grid(&self) -> Result<Grid2D> {
        build_grid(self.grid.l, self.grid.w, self.grid.n1, self.grid.n2, self.boundary)
    }

    pub fn relax_options(&self) -> RelaxOptions {
        RelaxOptions {
            dt0: self.dt0,
            tol: self.tol,
            max_steps: self.max_steps,
            grad_floor: self.grad_floor,
            ..RelaxOptions::default()
        }
    }
}

/// One-dimensional profile used for initial and boundary data. When the
/// operator's `(a, A)` admit no connection, falls back to `(a, a)`, which is
/// reported in the returned note.
pub fn initial_profile(spec: &NonlinearitySpec, params: PucciParams) -> Result<(ProfileSolution, Option<String>)> {
    let build = |p: PucciParams| heteroclinic_profile(&ReducedNonlinearity::new(spec, p)?, &ProfileGrid::default());
    match build(params) {
        Ok(profile) => Ok((profile, None)),
        Err(Error::Gate(reason)) => {
            let fallback = PucciParams::new(params.lower, params.lower, params.alpha)?;
            let profile = build(fallback)?;
            Ok((
                profile,
                Some(format!(
                    "no profile for a = {}, A = {} ({reason}); used the a = A = {} profile",
                    params.lower, params.upper, params.lower
                )),
            ))
        }
        Err(e) => Err(e),
    }
}

/// Builds the initial field, boundary rows included, for a configuration.
/// `file_values` supplies node values when `init` is `file`.
pub fn initial_field(config: &StripConfig, file_values: Option<Vec<f64>>) -> Result<Field2D> {
    let grid = config.grid()?;
    let op = config.operator()?;
    let needs_profile = config.init != InitKind::File || config.boundary == BoundaryKind::ProfileTrace;
    let (profile, note) = if needs_profile {
        let (p, n) = initial_profile(&config.spec, op.params)?;
        (Some(p), n)
    } else {
        (None, None)
    };
    let mut field = match config.init {
        InitKind::File => {
            let values = file_values.ok_or_else(|| Error::Config("init = file needs field values".into()))?;
            Field2D::new(grid, values)?
        }
        InitKind::Profile | InitKind::ProfilePerturbation => {
            let profile = profile.as_ref().expect("profile built above");
            let amp = if config.init == InitKind::ProfilePerturbation {
                config.perturbation
            } else {
                0.0
            };
            Field2D::from_fn(grid, |x1, x2| {
                let bump = amp * (2.0 * PI * x2 / grid.w).sin() * (-x1 * x1).exp();
                (profile.value_at(x1) + bump).clamp(-1.0, 1.0)
            })
        }
    };
    let (left, right) = match (config.boundary, &profile) {
        (BoundaryKind::ProfileTrace, Some(p)) => (p.value_at(-grid.l), p.value_at(grid.l)),
        _ => (-1.0, 1.0),
    };
    let last = grid.n1 - 1;
    for j in 0..grid.n2 {
        field.values[grid.index(0, j)] = left;
        field.values[grid.index(last, j)] = right;
    }
    field.meta.grad_floor = config.grad_floor;
    field.meta.notes.extend(note);
    Ok(field)
}

/// Initializes and relaxes a configured strip run.
pub fn run(config: &StripConfig, file_values: Option<Vec<f64>>) -> Result<Field2D> {
    let field = initial_field(config, file_values)?;
    relax(field, &config.operator()?, config.alpha, &config.spec, &config.relax_options())
}
