//! Run configuration: a single JSON document.

use std::path::{Path, PathBuf};

use perron_ap::appoly::{GridFunction, TrigPoly, TruncationPolicy};
use perron_ap::riccati::{ClassTag, Perturbation, ProblemSpec};
use perron_ap::solver::SolveOptions;
use perron_ap::Complex64;
use serde::{Deserialize, Serialize};

use crate::decimal::parse_decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Roots,
    Conditions,
    Solve,
    Fundamental,
    Decompose,
    Verify,
    ExampleN3,
}

impl Mode {
    pub fn needs_problem(self) -> bool {
        self != Mode::ExampleN3
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Roots => "roots",
            Mode::Conditions => "conditions",
            Mode::Solve => "solve",
            Mode::Fundamental => "fundamental",
            Mode::Decompose => "decompose",
            Mode::Verify => "verify",
            Mode::ExampleN3 => "example-n3",
        }
    }
}

/// A frequency given either as an exact decimal string or as a JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    Text(String),
    Number(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub freq: Frequency,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default)]
    pub mu: Vec<ModeConfig>,
    #[serde(default)]
    pub nu: Option<GridFunction>,
}

/// `"ap"`, `"aap"`, `"aap0"`, or `{"kind": "pap", "p": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassConfig {
    Name(String),
    Tagged(ClassTag),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: Option<usize>,
    /// `a_0..a_{n-1}` as `[re, im]` pairs.
    pub a: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub r: Option<Vec<PerturbationConfig>>,
    #[serde(default)]
    pub class: Option<ClassConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    #[serde(rename = "K_max")]
    pub k_max: Option<usize>,
    pub eps_drop: Option<f64>,
    /// Half width `T` of the grid for decaying parts.
    pub window: Option<f64>,
    /// Grid step `h` for decaying parts.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub half_width: f64,
    pub points: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            half_width: 50.0,
            points: 1001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub reference_t_end: f64,
    /// Run the collocation oracle; defaults to on in `verify` mode only.
    pub oracle: Option<bool>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            reference_t_end: 10.0,
            oracle: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub report: String,
    pub samples: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("."),
            report: "report.json".into(),
            samples: "samples.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub problem: Option<ProblemConfig>,
    /// Root index for single-root modes, in ascending order of real parts.
    #[serde(default)]
    pub root: usize,
    pub beta: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub samples: SampleConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub force: bool,
    #[serde(default)]
    pub sharp_bounds: bool,
}

/// Where a frequency came from and how it was rounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub location: String,
    pub text: String,
    pub value: f64,
    pub rounding: f64,
}

fn class_tag(c: &ClassConfig) -> Result<ClassTag, String> {
    match c {
        ClassConfig::Tagged(t) => Ok(*t),
        ClassConfig::Name(s) => match s.to_ascii_lowercase().as_str() {
            "ap" => Ok(ClassTag::Ap),
            "aap" => Ok(ClassTag::Aap),
            "aap0" => Ok(ClassTag::Aap0),
            other => Err(format!(
                "problem.class: unknown class {other:?} (expected ap, aap, aap0, or a pap/pap0 record)"
            )),
        },
    }
}

impl ProblemConfig {
    /// Builds the problem, collecting every violation instead of stopping at the first.
    pub fn build(&self) -> Result<(ProblemSpec, Vec<FrequencyRecord>), Vec<String>> {
        let mut errs = Vec::new();
        if self.n.is_none() {
            errs.push("problem: missing field \"n\"".to_string());
        }
        if self.a.is_none() {
            errs.push("problem: missing field \"a\"".to_string());
        }
        let class = match self.class.as_ref().map(class_tag) {
            None => ClassTag::Ap,
            Some(Ok(c)) => c,
            Some(Err(e)) => {
                errs.push(e);
                ClassTag::Ap
            }
        };
        let mut records = Vec::new();
        let mut r = Vec::new();
        let n = self.n.unwrap_or(0);
        let given = self.r.clone().unwrap_or_else(|| vec![PerturbationConfig::default(); n]);
        for (i, p) in given.iter().enumerate() {
            let mut modes = Vec::with_capacity(p.mu.len());
            for (k, m) in p.mu.iter().enumerate() {
                let location = format!("r[{i}].mu[{k}].freq");
                let parsed = match &m.freq {
                    Frequency::Text(t) => parse_decimal(t),
                    Frequency::Number(v) if v.is_finite() => parse_decimal(&format!("{v:e}")),
                    Frequency::Number(v) => Err(format!("{v} is not finite")),
                };
                match parsed {
                    Ok(d) => {
                        modes.push((d.value, Complex64::new(m.re, m.im)));
                        records.push(FrequencyRecord {
                            location,
                            text: d.text,
                            value: d.value,
                            rounding: d.rounding,
                        });
                    }
                    Err(e) => errs.push(format!("{location}: {e}")),
                }
                if !(m.re.is_finite() && m.im.is_finite()) {
                    errs.push(format!("r[{i}].mu[{k}]: amplitude must be finite"));
                }
            }
            r.push(Perturbation {
                mu: TrigPoly::from_modes(modes),
                nu: p.nu.clone(),
            });
        }
        let spec = ProblemSpec {
            n,
            a: self
                .a
                .as_ref()
                .map(|a| a.iter().map(|c| Complex64::new(c[0], c[1])).collect())
                .unwrap_or_default(),
            r,
            class,
        };
        if errs.is_empty() {
            errs.extend(spec.diagnostics().into_iter().map(|d| format!("problem: {d}")));
        }
        if errs.is_empty() {
            Ok((spec, records))
        } else {
            Err(errs)
        }
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub beta: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub sharp_bounds: bool,
    pub force: bool,
}

impl RunConfig {
    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(m) = ov.mode {
            self.mode = Some(m);
        }
        if let Some(b) = ov.beta {
            self.beta = Some(b);
        }
        if let Some(t) = ov.tol {
            self.solver.tol = Some(t);
        }
        if let Some(o) = &ov.out {
            self.output.dir = o.clone();
        }
        self.sharp_bounds |= ov.sharp_bounds;
        self.force |= ov.force;
    }

    pub fn solve_options(&self) -> SolveOptions {
        let d = SolveOptions::default();
        SolveOptions {
            tol: self.solver.tol.unwrap_or(d.tol),
            max_iter: self.solver.max_iter.unwrap_or(d.max_iter),
            beta: self.beta.unwrap_or(0.0),
            policy: TruncationPolicy {
                eps_drop: self.solver.eps_drop.unwrap_or(d.policy.eps_drop),
                k_max: self.solver.k_max.unwrap_or(d.policy.k_max),
            },
            force: self.force,
            bound_mode: if self.sharp_bounds {
                perron_ap::greenops::BoundMode::Sharp
            } else {
                perron_ap::greenops::BoundMode::Conservative
            },
            window: self.solver.window,
            step: self.solver.step,
            initial: None,
        }
    }

    /// Every violation of the schema and of the mode-specific invariants.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = |name: &str, v: Option<f64>, out: &mut Vec<String>| {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    out.push(format!("{name} = {v} must be positive"));
                }
            }
        };
        positive("solver.tol", self.solver.tol, &mut out);
        positive("solver.window", self.solver.window, &mut out);
        positive("solver.step", self.solver.step, &mut out);
        positive("samples.half_width", Some(self.samples.half_width), &mut out);
        positive("verify.reference_t_end", Some(self.verify.reference_t_end), &mut out);
        if let Some(e) = self.solver.eps_drop {
            if !(e >= 0.0 && e.is_finite()) {
                out.push(format!("solver.eps_drop = {e} must be non-negative"));
            }
        }
        if self.solver.max_iter == Some(0) {
            out.push("solver.max_iter must be positive".into());
        }
        if self.solver.k_max == Some(0) {
            out.push("solver.K_max must be positive".into());
        }
        if self.samples.points < 2 {
            out.push(format!("samples.points = {} must be at least 2", self.samples.points));
        }
        if let Some(b) = self.beta {
            if !(b >= 0.0 && b.is_finite()) {
                out.push(format!("beta = {b} must be non-negative"));
            }
        }
        let Some(mode) = self.mode else {
            out.push("missing field \"mode\"".into());
            return out;
        };
        match (&self.problem, mode.needs_problem()) {
            (None, true) => out.push(format!("mode {} requires a problem", mode.name())),
            (Some(p), _) => match p.build() {
                Err(errs) => out.extend(errs),
                Ok((spec, _)) => {
                    if self.root >= spec.n && mode != Mode::Roots {
                        out.push(format!("root = {} is out of range for n = {}", self.root, spec.n));
                    }
                    if mode == Mode::Decompose && !spec.has_decaying_part() {
                        out.push("mode decompose requires a decaying part nu".into());
                    }
                }
            },
            (None, false) => {}
        }
        out
    }
}

/// Schema and invariant check without running anything.
pub fn validate_config(path: &Path, mode: Option<Mode>) -> Vec<String> {
    match load(path) {
        Err(e) => vec![e],
        Ok(mut cfg) => {
            cfg.apply(&Overrides {
                mode,
                ..Overrides::default()
            });
            cfg.violations()
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
}
