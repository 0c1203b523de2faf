use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use pucci_profile::export::{self, SweepRow};
use pucci_profile::profile::{heteroclinic_profile, integrate, IntegrateOptions, ProfileGrid};
use pucci_profile::shooting::{self, ClassifyOptions};
use pucci_profile::strip::{self, BoundaryKind, InitKind, StripConfig};
use pucci_profile::{NonlinearitySpec, PucciParams, ReducedNonlinearity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::manifest::{ensure_parent, read_input, sibling, Failure, Recorder};
use crate::Problem;

const RESIDUAL_CHECK: f64 = 1e-12;

fn load_spec(arg: &str) -> Result<(NonlinearitySpec, serde_json::Value), Failure> {
    let text = if arg == "cubic" && !Path::new(arg).exists() {
        r#"{"kind": "cubic"}"#.to_string()
    } else {
        read_input(Path::new(arg))?
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("spec {arg}: {e}")))?;
    let spec = serde_json::from_value(value.clone()).map_err(|e| Failure::usage(format!("spec {arg}: {e}")))?;
    Ok((spec, value))
}

fn reduced(problem: &Problem) -> Result<(ReducedNonlinearity, serde_json::Value), Failure> {
    let params = PucciParams::new(problem.lower, problem.upper, problem.alpha)?;
    let (spec, spec_json) = load_spec(&problem.spec)?;
    let inputs = json!({
        "spec": spec_json,
        "a": problem.lower,
        "A": problem.upper,
        "alpha": problem.alpha,
    });
    Ok((ReducedNonlinearity::new(&spec, params)?, inputs))
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::usage(format!("--{name} must be positive, got {v}")))
    }
}

fn write_file(path: &Path, rec: &mut Recorder, body: impl FnOnce(&mut BufWriter<File>) -> pucci_profile::Result<()>) -> Result<(), Failure> {
    ensure_parent(path)?;
    let mut out = BufWriter::new(File::create(path)?);
    body(&mut out)?;
    out.flush()?;
    rec.output(path);
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn gate(problem: &Problem) -> Result<(), Failure> {
    let (reduced, inputs) = reduced(problem)?;
    let rec = Recorder::new("gate", inputs, json!({ "gate": pucci_profile::tol::GATE, "slope": pucci_profile::tol::SLOPE }));
    let report = reduced.existence_gate()?;
    let delta1 = reduced.delta1().ok();
    print_json(&json!({ "gate": report, "delta1": delta1, "manifest": rec.finish() }))
}

pub fn profile(problem: &Problem, delta: Option<f64>, xmax: f64, tol: f64, out: &Path) -> Result<(), Failure> {
    positive("xmax", xmax)?;
    positive("tol", tol)?;
    let (reduced, mut inputs) = reduced(problem)?;
    inputs["delta"] = json!(delta);
    inputs["xmax"] = json!(xmax);
    let mut rec = Recorder::new("profile", inputs, json!({ "tol": tol, "quad": pucci_profile::tol::QUAD }));
    let (csv, js) = (sibling(out, "csv"), sibling(out, "json"));
    let summary = match delta {
        None => {
            let profile = heteroclinic_profile(&reduced, &ProfileGrid::default())?;
            write_file(&csv, &mut rec, |w| export::write_profile_csv(w, &profile, &reduced))?;
            write_file(&js, &mut rec, |w| export::write_json(w, &profile))?;
            json!({ "kind": "heteroclinic-profile", "delta": profile.delta, "x_range": profile.x_range(), "points": profile.x.len() })
        }
        Some(delta) => {
            let opts = IntegrateOptions {
                tol,
                ..IntegrateOptions::default()
            };
            let traj = integrate(&reduced, delta, (-xmax, xmax), &opts)?;
            write_file(&csv, &mut rec, |w| export::write_trajectory_csv(w, &traj, &reduced))?;
            write_file(&js, &mut rec, |w| export::write_json(w, &traj))?;
            json!({ "kind": "trajectory", "delta": delta, "x_range": traj.x_range(), "samples": traj.samples.len(), "events": traj.events.len() })
        }
    };
    rec.write(&sibling(out, "manifest.json"))?;
    print_json(&summary)
}

/// Parses `lo:hi:n` into `n` ascending slopes.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("--sweep expects lo:hi:n, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(bad());
    }
    let mut deltas = shooting::linspace(lo.min(hi), lo.max(hi), n);
    deltas.sort_by(f64::total_cmp);
    Ok(deltas)
}

pub struct ClassifyArgs<'a> {
    pub delta: Option<f64>,
    pub sweep: Option<&'a str>,
    pub xmax: f64,
    pub tol: f64,
    pub tol_match: f64,
    pub out: Option<&'a Path>,
}

pub fn classify(problem: &Problem, args: ClassifyArgs) -> Result<(), Failure> {
    let ClassifyArgs { delta, sweep, xmax, tol, tol_match, out } = args;
    positive("xmax", xmax)?;
    positive("tol", tol)?;
    positive("tol-match", tol_match)?;
    let deltas = match (delta, sweep) {
        (Some(d), None) => vec![d],
        (None, Some(s)) => parse_sweep(s)?,
        _ => return Err(Failure::usage("give exactly one of --delta and --sweep")),
    };
    let (reduced, mut inputs) = reduced(problem)?;
    inputs["deltas"] = json!(deltas);
    inputs["xmax"] = json!(xmax);
    let opts = ClassifyOptions {
        x_span: (-xmax, xmax),
        tol,
        tol_match,
        ..ClassifyOptions::default()
    };
    let mut rec = Recorder::new("classify", inputs, serde_json::to_value(opts)?);
    let results = shooting::sweep(&reduced, &deltas, &opts);
    if let (Some(_), [Err(e)]) = (delta, results.as_slice()) {
        // A single slope has no other rows to carry on with.
        return Err(Failure {
            code: if e.is_validation() { 2 } else { 1 },
            message: e.to_string(),
        });
    }
    let rows: Vec<SweepRow> = deltas.iter().zip(results).map(|(&d, r)| SweepRow::new(d, r)).collect();
    match out {
        Some(out) => {
            write_file(&sibling(out, "json"), &mut rec, |w| export::write_json(w, &rows))?;
            write_file(&sibling(out, "csv"), &mut rec, |w| export::write_classification_csv(w, &rows))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            rec.status(format!("{} rows, {failed} failed", rows.len()));
            rec.write(&sibling(out, "manifest.json"))?;
            let regimes: Vec<_> = rows
                .iter()
                .map(|r| json!({ "delta": r.delta, "regime": r.result.as_ref().map(|c| c.regime.as_str()).unwrap_or("error") }))
                .collect();
            print_json(&json!(regimes))
        }
        None => print_json(&json!({ "results": rows, "manifest": rec.finish() })),
    }
}

pub fn pde_run(config_path: &Path, out: &Path) -> Result<(), Failure> {
    let text = read_input(config_path)?;
    let config: StripConfig =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", config_path.display())))?;
    positive("tol", config.tol)?;
    positive("dt0", config.dt0)?;
    let grid = config.grid()?;
    let file_values = match (&config.init, &config.init_file) {
        (InitKind::File, Some(p)) => {
            let path = if p.is_relative() {
                config_path.parent().unwrap_or(Path::new(".")).join(p)
            } else {
                p.clone()
            };
            let file = File::open(&path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            Some(export::read_field_csv(BufReader::new(file), &grid)?)
        }
        (InitKind::File, None) => return Err(Failure::usage("init = file needs init_file")),
        _ => None,
    };
    let mut rec = Recorder::new(
        "pde-run",
        serde_json::to_value(&config)?,
        json!({ "tol": config.tol, "grad_floor": config.grad_floor, "clip": pucci_profile::tol::CLIP }),
    );
    fs::create_dir_all(out)?;
    let field = match strip::run(&config, file_values) {
        Ok(field) => field,
        Err(e) => {
            rec.status(format!("failed: {e}"));
            rec.write(&out.join("manifest.json"))?;
            return Err(e.into());
        }
    };
    write_file(&out.join("field.csv"), &mut rec, |w| export::write_field_csv(w, &field))?;
    let sidecar = export::field_sidecar(&field);
    write_file(&out.join("field.json"), &mut rec, |w| export::write_json(w, &sidecar))?;
    let converged = field.meta.converged;
    if !converged {
        rec.status(format!("not converged after {} steps", field.meta.steps));
    }
    rec.write(&out.join("manifest.json"))?;
    print_json(&json!({
        "converged": converged,
        "steps": field.meta.steps,
        "residual": field.meta.final_residual,
        "boundary": match config.boundary { BoundaryKind::Dirichlet => "dirichlet", BoundaryKind::ProfileTrace => "profile-trace" },
        "diagnostics": sidecar["diagnostics"],
    }))?;
    if converged {
        Ok(())
    } else {
        Err(Failure::numeric(format!(
            "residual {:?} above tol {} after {} steps",
            field.meta.final_residual, config.tol, field.meta.steps
        )))
    }
}

pub fn counterexample(k: u32, m: u32, check: bool, samples: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let (left, right) = strip::counterexample_seams(k, m)?;
    let hi = right + 2.0 * PI;
    let mut rec = Recorder::new(
        "counterexample",
        json!({ "k": k, "m": m, "check": check, "samples": samples, "seed": seed }),
        json!({ "residual": RESIDUAL_CHECK, "seam_gap": 1e-6 }),
    );
    let mut summary = json!({ "k": k, "m": m, "seams": [left, right] });
    let mut passed = true;
    if check {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(samples);
        while points.len() < samples {
            let x: f64 = rng.gen_range(0.0..hi);
            if (x - left).abs() >= 1e-6 && (x - right).abs() >= 1e-6 {
                points.push(x);
            }
        }
        let residual = strip::counterexample_residual(k, m, &points)?;
        // u_{k,k} lies above every u_{k,m}, touching it up to (2k+2)π.
        let half = 0.5 * hi;
        let grid = strip::build_grid(half, 1.0, 200 * (m as usize + 2) + 1, 4, BoundaryKind::Dirichlet)?;
        let lower = strip::counterexample_field(k, m, grid, half)?;
        let upper = strip::counterexample_field(k, k, grid, half)?;
        let order = strip::order_check(&lower, &upper)?;
        let strict = k == m || order.max_gap > 0.0;
        passed = residual <= RESIDUAL_CHECK && order.ordered() && strict;
        summary["residual"] = json!(residual);
        summary["order"] = json!({
            "against": [k, k],
            "min_gap": order.min_gap,
            "max_gap": order.max_gap,
            "equal_nodes": order.equal_nodes,
            "violations": order.violations.len(),
        });
        summary["passed"] = json!(passed);
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let path = dir.join("u.csv");
        write_file(&path, &mut rec, |w| {
            writeln!(w, "x1,u")?;
            for i in 0..=1000 {
                let x = hi * i as f64 / 1000.0;
                writeln!(w, "{},{}", export::num(x), export::num(strip::counterexample_eval(k, m, x)?))?;
            }
            Ok(())
        })?;
        if !passed {
            rec.status("check failed");
        }
        rec.write(&dir.join("manifest.json"))?;
    } else {
        summary["manifest"] = serde_json::to_value(rec.finish())?;
    }
    print_json(&summary)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::numeric("counterexample check failed"))
    }
}
