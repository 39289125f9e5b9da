//! Pipeline orchestration: roots, conditions, solve, reconstruct, verify.

use std::fs;
use std::path::PathBuf;

use perron_ap::appoly::{gf_supnorm, TrigPoly};
use perron_ap::conditions::{
    check_existence, compute_l, fundamental_criterion, ConditionReport, ThetaReport,
};
use perron_ap::example_n3 as ex;
use perron_ap::greenops::BoundMode;
use perron_ap::riccati::{build_root_data, char_roots, ProblemSpec, RootData};
use perron_ap::solver::{
    error_order_check, fundamental_system, reconstruct, solve, PicardMap, SolutionBundle,
    SolutionRepresentation, SolveOptions,
};
use perron_ap::verify::{linspace, residual_at, verify_bundle, OracleOptions, VerifyOptions};
use perron_ap::{ApError, Complex64};
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{self, FrequencyRecord, Mode, Overrides, RunConfig};
use crate::report::{fmt_float, to_canonical_string};

pub const SAMPLES_HEADER: &str = "t,re_y,im_y,re_z,im_z,residual";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    CertificateFailed,
    SolverFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CertificateFailed => 2,
            Status::SolverFailed => 3,
        }
    }
}

/// Certificate failures are mathematical outcomes; everything else raised while
/// solving is numerical.
pub fn classify(e: &ApError) -> Status {
    match e.root_cause() {
        ApError::CertificateFailed(_)
        | ApError::PerRootFailure(_)
        | ApError::L0GreaterThanOne(_)
        | ApError::L0ThetaGreaterThanOne(_)
        | ApError::DegenerateRoots(..)
        | ApError::RepeatedRealParts(..) => Status::CertificateFailed,
        _ => Status::SolverFailed,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub status: Status,
    pub report_path: PathBuf,
    pub samples_path: Option<PathBuf>,
    pub summary: String,
}

/// Per-root solver diagnostics; the full `psi` grid is left out.
#[derive(Debug, Clone, Serialize)]
struct BundleDiagnostics<'a> {
    root_index: usize,
    lambda: Complex64,
    lambda_eff: Complex64,
    iterations: usize,
    step_norms: &'a [f64],
    last_step_norm: f64,
    ball_norm: f64,
    ball_radius: f64,
    ball_ok: bool,
    eps0: f64,
    truncation_budget: f64,
    defect_bound: f64,
    forced: bool,
    mode_count: usize,
    z: &'a TrigPoly,
    theta_conditions: Option<&'a ThetaReport>,
    psi: Option<Value>,
}

fn diagnostics(b: &SolutionBundle, rep: &SolutionRepresentation) -> Value {
    let psi = b.psi.as_ref().map(|p| {
        json!({
            "iterations": p.iterations,
            "step_norms": p.step_norms,
            "ball_norm": p.ball_norm,
            "tail_consistent": p.tail_consistent,
            "pnorm": p.pnorm,
            "sup_psi": gf_supnorm(&p.derivs[0]),
            "grid": {"t0": p.derivs[0].t0(), "h": p.derivs[0].h(), "len": p.derivs[0].len()},
        })
    });
    serde_json::to_value(BundleDiagnostics {
        root_index: b.root_index,
        lambda: b.lambda,
        lambda_eff: rep.lambda_eff,
        iterations: b.iterations,
        step_norms: &b.step_norms,
        last_step_norm: b.last_step_norm,
        ball_norm: b.ball_norm,
        ball_radius: b.ball_radius,
        ball_ok: b.ball_ok,
        eps0: b.eps0,
        truncation_budget: b.truncation_budget,
        defect_bound: b.defect_bound,
        forced: b.forced,
        mode_count: b.z.len(),
        z: &b.z,
        theta_conditions: b.theta_conditions.as_ref(),
        psi,
    })
    .expect("serializable")
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn is_example_roots(roots: &[Complex64]) -> bool {
    roots.len() == 3
        && roots
            .iter()
            .zip([-1.0, 0.0, 1.0])
            .all(|(r, want)| (r - Complex64::new(want, 0.0)).norm() < 1e-12)
}

struct Session {
    cfg: RunConfig,
    mode: Mode,
    opts: SolveOptions,
    report: Map<String, Value>,
    notes: Vec<String>,
    checks: Vec<Value>,
    samples: Option<(ProblemSpec, SolutionBundle, SolutionRepresentation)>,
}

impl Session {
    fn put(&mut self, key: &str, v: Value) {
        self.report.insert(key.to_string(), v);
    }

    fn verify_options(&self) -> VerifyOptions {
        let oracle = self.cfg.verify.oracle.unwrap_or(self.mode == Mode::Verify);
        VerifyOptions {
            residual_half_width: self.cfg.samples.half_width,
            residual_points: self.cfg.samples.points,
            reference_t_end: self.cfg.verify.reference_t_end,
            oracle: oracle.then(OracleOptions::default),
            ..VerifyOptions::default()
        }
    }

    fn conditions(
        &mut self,
        spec: &ProblemSpec,
        roots: &[Complex64],
    ) -> Result<Vec<ConditionReport>, ApError> {
        let example = is_example_roots(roots);
        let mut reps = Vec::with_capacity(roots.len());
        for k in 0..roots.len() {
            let rd = build_root_data(roots, k)?;
            let mut rep = check_existence(&rd, spec, self.opts.beta, self.opts.bound_mode)?;
            if example {
                rep.notes.extend(ex::discrepancy_note(&rep));
            }
            self.notes.extend(rep.notes.iter().map(|n| format!("root {k}: {n}")));
            reps.push(rep);
        }
        self.put("conditions", value(&reps));
        Ok(reps)
    }

    fn roots(&mut self, spec: &ProblemSpec) -> Result<Vec<Complex64>, ApError> {
        let roots = char_roots(&spec.a)?;
        self.put("roots", value(&roots));
        Ok(roots)
    }

    fn single(&mut self, spec: &ProblemSpec, roots: &[Complex64]) -> Result<(), ApError> {
        let rd = build_root_data(roots, self.cfg.root)?;
        self.conditions(spec, roots)?;
        let b = solve(spec, &rd, &self.opts)?;
        let rep = reconstruct(&b, spec, &rd)?;
        self.finish_root(spec, &rd, b, rep)
    }

    fn finish_root(
        &mut self,
        spec: &ProblemSpec,
        rd: &RootData,
        b: SolutionBundle,
        rep: SolutionRepresentation,
    ) -> Result<(), ApError> {
        if b.forced {
            self.notes.push(format!(
                "root {}: solved with --force although the existence certificate failed",
                b.root_index
            ));
        }
        let ver = verify_bundle(spec, rd, &b, &rep, &self.verify_options())?;
        self.put("bundles", json!([diagnostics(&b, &rep)]));
        self.put("verification", json!([value(&ver)]));
        if self.mode == Mode::Verify && self.opts.beta > 0.0 {
            let w = self.cfg.samples.half_width;
            let eo = error_order_check(&b, spec, self.opts.beta, &[w, 2.0 * w])?;
            self.put("error_order", value(&eo));
        }
        self.put("representation", value(&rep_summary(&rep)));
        self.samples = Some((spec.clone(), b, rep));
        Ok(())
    }

    fn fundamental(&mut self, spec: &ProblemSpec, roots: &[Complex64]) -> Result<(), ApError> {
        self.conditions(spec, roots)?;
        let crit = fundamental_criterion(spec, roots, self.opts.beta, self.opts.bound_mode)?;
        self.put("fundamental", value(&crit));
        self.notes.extend(crit.notes.iter().cloned());
        let fs = fundamental_system(spec, roots, &self.opts)?;
        let vopts = self.verify_options();
        let mut diags = Vec::new();
        let mut vers = Vec::new();
        for (k, (b, rep)) in fs.bundles.iter().zip(&fs.representations).enumerate() {
            let rd = build_root_data(roots, k)?;
            vers.push(value(&verify_bundle(spec, &rd, b, rep, &vopts)?));
            diags.push(diagnostics(b, rep));
            if b.forced {
                self.notes.push(format!(
                    "root {k}: solved with --force although the existence certificate failed"
                ));
            }
        }
        self.put("bundles", Value::Array(diags));
        self.put("verification", Value::Array(vers));
        self.put("wronskian_min_abs", json!(fs.wronskian_min_abs));
        let k = self.cfg.root;
        self.samples = Some((
            spec.clone(),
            fs.bundles[k].clone(),
            fs.representations[k].clone(),
        ));
        Ok(())
    }

    fn check(&mut self, name: &str, got: f64, want: f64, tol: f64, kind: &str) -> bool {
        let pass = (got - want).abs() <= tol;
        self.checks.push(json!({
            "name": name, "value": got, "expected": want, "tolerance": tol,
            "pass": pass, "kind": kind,
        }));
        pass
    }

    fn check_le(&mut self, name: &str, got: f64, bound: f64, kind: &str) -> bool {
        let pass = got <= bound;
        self.checks.push(json!({
            "name": name, "value": got, "bound": bound, "pass": pass, "kind": kind,
        }));
        pass
    }

    /// The cubic example end to end, with its published values as checks.
    fn example_n3(&mut self) -> Result<Status, ApError> {
        let s6 = 6f64.sqrt();
        let ap = ex::spec(ex::ETA1, None);
        self.put("problem", json!({"n": 3, "a": ex::coefficients(), "class": "aap0",
            "eta1": ex::ETA1, "eta2": ex::ETA2}));
        let roots = self.roots(&ap)?;
        for (k, want) in [-1.0, 0.0, 1.0].into_iter().enumerate() {
            self.check(&format!("root {k}"), roots[k].re, want, 1e-14, "solver");
        }
        let ex_roots = ex::roots();
        let reps = ex::condition_reports(&ap, self.opts.beta, self.opts.bound_mode)?;
        for r in &reps {
            self.notes.extend(r.notes.iter().map(|n| format!("root {}: {n}", r.root_index)));
        }
        self.put("conditions", value(&reps));
        let r0 = &reps[0];
        let cert = [
            ("L0", r0.l0, 0.0),
            ("Q0", r0.q0, 2.0),
            ("M", r0.m, (s6 - 2.0) / 6.0),
            ("g(M)", r0.g_m, (3.0 * s6 - 7.0) / 9.0),
        ];
        let mut cert_ok = self.opts.beta == 0.0 && self.opts.bound_mode == BoundMode::Conservative;
        for (name, got, want) in cert {
            cert_ok &= self.check(&format!("lambda_1 {name}"), got, want, 1e-12, "certificate");
        }
        let crit = fundamental_criterion(
            &ex::spec(0.002, None),
            &ex_roots,
            self.opts.beta,
            self.opts.bound_mode,
        )?;
        cert_ok &= self.check("|V^-1|_1", crit.vinv_norm, 2.0, 1e-14, "certificate");
        cert_ok &= self.check(
            "factor at lambda_1",
            crit.factors[0],
            (3.0 * s6 - 4.0) / 36.0,
            1e-12,
            "certificate",
        );
        cert_ok &= self.check_le("criterion (eta_1 = 0.002)", crit.criterion, 1.0, "certificate");
        cert_ok &= crit.independent;
        self.put("fundamental", value(&crit));

        let rd = build_root_data(&ex_roots, 0)?;
        let map = PicardMap::new(&ap, &rd, self.opts.policy)?;
        let z1 = map.apply(&[TrigPoly::zero(), TrigPoly::zero()])?;
        let want = TrigPoly::from_modes(ex::mu0(ex::ETA1).modes().map(|(f, c)| (f, c / (f * f + 1.0))));
        let mut solver_ok = self.check(
            "first iterate",
            z1[0].coeff_distance(&want),
            0.0,
            1e-12,
            "solver",
        );
        let b = solve(&ap, &rd, &self.opts)?;
        solver_ok &= self.check_le("iterations", b.iterations as f64, 30.0, "solver");
        let rep = reconstruct(&b, &ap, &rd)?;
        let vopts = VerifyOptions {
            residual_half_width: 50.0,
            residual_points: 10_001,
            reference_t_end: 10.0,
            ..VerifyOptions::default()
        };
        let ver = verify_bundle(&ap, &rd, &b, &rep, &vopts)?;
        solver_ok &= self.check_le("residual_sup on [-50, 50]", ver.residual_sup, 1e-8, "solver");
        solver_ok &= self.check_le(
            "reference relative error on [0, 10]",
            ver.reference_rel_error.unwrap_or(f64::INFINITY),
            1e-6,
            "solver",
        );

        let full = ex::spec(ex::ETA1, Some(ex::ETA2));
        cert_ok &= self.check_le("2 eta_2", 2.0 * ex::ETA2, ex::eta2_bound(), "certificate");
        let bd = solve(&full, &rd, &self.opts)?;
        let repd = reconstruct(&bd, &full, &rd)?;
        if let Some(tr) = &bd.theta_conditions {
            cert_ok &= tr.pass;
            let sup = bd.psi.as_ref().map_or(f64::INFINITY, |p| gf_supnorm(&p.derivs[0]));
            cert_ok &= self.check_le("sup psi <= M_theta", sup, tr.m, "certificate");
        }
        solver_ok &= self.check(
            "theta equals the AP solution",
            bd.z.coeff_distance(&b.z),
            0.0,
            1e-10,
            "solver",
        );
        let verd = verify_bundle(&full, &rd, &bd, &repd, &self.verify_options())?;
        self.put(
            "bundles",
            json!([diagnostics(&b, &rep), diagnostics(&bd, &repd)]),
        );
        self.put("verification", json!([value(&ver), value(&verd)]));
        self.put("representation", value(&rep_summary(&repd)));
        self.samples = Some((full, bd, repd));
        Ok(if !cert_ok {
            Status::CertificateFailed
        } else if !solver_ok {
            Status::SolverFailed
        } else {
            Status::Ok
        })
    }

    fn execute(&mut self, spec: Option<&ProblemSpec>) -> Result<Status, ApError> {
        if self.mode == Mode::ExampleN3 {
            return self.example_n3();
        }
        let spec = spec.expect("validated: mode needs a problem");
        let roots = self.roots(spec)?;
        match self.mode {
            Mode::Roots => {}
            Mode::Conditions => {
                let reps = self.conditions(spec, &roots)?;
                if roots.len() >= 2 {
                    let crit = fundamental_criterion(spec, &roots, self.opts.beta, self.opts.bound_mode)?;
                    self.notes.extend(crit.notes.iter().cloned());
                    self.put("fundamental", value(&crit));
                }
                let failing: Vec<usize> = reps
                    .iter()
                    .filter(|r| !r.existence_pass)
                    .map(|r| r.root_index)
                    .collect();
                if !failing.is_empty() {
                    return Err(ApError::PerRootFailure(failing));
                }
            }
            Mode::Solve | Mode::Decompose | Mode::Verify => self.single(spec, &roots)?,
            Mode::Fundamental => self.fundamental(spec, &roots)?,
            Mode::ExampleN3 => unreachable!(),
        }
        Ok(Status::Ok)
    }
}

fn rep_summary(rep: &SolutionRepresentation) -> Value {
    json!({
        "lambda": rep.lambda,
        "lambda_eff": rep.lambda_eff,
        "kappa": rep.kappa,
        "mean_w": rep.mean_w,
        "normalization": rep.normalization,
        "oscillatory_exponent": rep.oscillatory_exponent,
        "green_terms": rep.green_terms,
        "has_decaying_part": rep.decaying.is_some(),
    })
}

fn problem_summary(spec: &ProblemSpec) -> Value {
    json!({
        "n": spec.n,
        "a": spec.a,
        "class": spec.class,
        "mu": spec.r.iter().map(|p| value(&p.mu)).collect::<Vec<_>>(),
        "nu_present": spec.r.iter().map(|p| p.nu.is_some()).collect::<Vec<_>>(),
    })
}

/// Writes the CSV of `y`, `z` and the pointwise residual on the sample grid.
pub fn write_samples(
    path: &PathBuf,
    spec: &ProblemSpec,
    b: &SolutionBundle,
    rep: &SolutionRepresentation,
    half_width: f64,
    points: usize,
) -> Result<(), CliError> {
    let mut out = String::with_capacity(points * 120);
    out.push_str(SAMPLES_HEADER);
    out.push('\n');
    for t in linspace(-half_width, half_width, points) {
        let y = rep.y(t);
        let z = b.z_deriv(t, 0);
        let cells = [t, y.re, y.im, z.re, z.im, residual_at(spec, b, t)];
        let line: Vec<String> = cells.iter().map(|v| fmt_float(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

/// Loads, validates and runs a configuration file.
pub fn run_file(path: &std::path::Path, ov: &Overrides) -> Result<RunOutput, CliError> {
    let mut cfg = config::load(path).map_err(CliError::Config)?;
    cfg.apply(ov);
    run(cfg)
}

pub fn run(cfg: RunConfig) -> Result<RunOutput, CliError> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(CliError::Config(violations.join("\n")));
    }
    let mode = cfg.mode.expect("validated");
    let built: Option<(ProblemSpec, Vec<FrequencyRecord>)> = match &cfg.problem {
        Some(p) if mode.needs_problem() => Some(p.build().map_err(|e| CliError::Config(e.join("\n")))?),
        _ => None,
    };
    let opts = cfg.solve_options();
    if let Some((spec, _)) = &built {
        if opts.beta > 0.0 {
            let roots = char_roots(&spec.a).unwrap_or_default();
            for k in 0..roots.len() {
                let Ok(rd) = build_root_data(&roots, k) else { break };
                if let Err(e @ ApError::BetaTooLarge { .. }) =
                    compute_l(&rd, spec, opts.beta, opts.bound_mode)
                {
                    return Err(CliError::Config(e.to_string()));
                }
            }
        }
    }
    let mut s = Session {
        mode,
        opts: opts.clone(),
        report: Map::new(),
        notes: Vec::new(),
        checks: Vec::new(),
        samples: None,
        cfg,
    };
    s.put("mode", json!(mode.name()));
    s.put("tool", json!({"name": "perron-ap", "version": env!("CARGO_PKG_VERSION")}));
    s.put("options", value(&opts));
    s.put("samples_grid", value(&s.cfg.samples));
    if let Some((spec, records)) = &built {
        s.put("problem", problem_summary(spec));
        s.put("frequency_rounding", value(records));
    }
    let (status, error) = match s.execute(built.as_ref().map(|b| &b.0)) {
        Ok(st) => (st, None),
        Err(e) => (classify(&e), Some(e.to_string())),
    };
    if mode == Mode::ExampleN3 {
        let checks = std::mem::take(&mut s.checks);
        s.put("checks", Value::Array(checks));
    }
    let notes = std::mem::take(&mut s.notes);
    s.put("notes", json!(notes));
    s.put("status", value(&status));
    s.put("exit_code", json!(status.exit_code()));
    s.put("error", error.clone().map_or(Value::Null, Value::String));

    let dir = s.cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let samples_path = match &s.samples {
        Some((spec, b, rep)) => {
            let p = dir.join(&s.cfg.output.samples);
            write_samples(&p, spec, b, rep, s.cfg.samples.half_width, s.cfg.samples.points)?;
            Some(p)
        }
        None => None,
    };
    s.put(
        "samples_file",
        samples_path
            .as_ref()
            .map_or(Value::Null, |p| json!(p.file_name().map(|f| f.to_string_lossy()))),
    );
    let report_path = dir.join(&s.cfg.output.report);
    let text = to_canonical_string(&Value::Object(s.report)).expect("report serializes");
    fs::write(&report_path, text).map_err(|source| CliError::Io {
        path: report_path.clone(),
        source,
    })?;
    let summary = match (&error, status) {
        (Some(e), _) => format!("{}: {e}", mode.name()),
        (None, Status::Ok) => format!("{}: ok", mode.name()),
        (None, st) => format!("{}: {}", mode.name(), value(&st).as_str().unwrap_or("failed")),
    };
    Ok(RunOutput {
        status,
        report_path,
        samples_path,
        summary,
    })
}

/// Largest residual entry of a samples file, for consistency checks.
pub fn max_residual(csv: &str) -> f64 {
    csv.lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next()?.parse::<f64>().ok())
        .fold(0.0, f64::max)
}
