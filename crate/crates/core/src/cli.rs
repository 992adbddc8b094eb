//! System definition files, the command implementations behind the `hodyn`
//! binary, and report rendering.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dynamics::{
    cross_check, energy_drift, hamilton_ode, integrate_rk4, lagrangian_energy_drift,
    lagrangian_ode, OdeSystem, Trajectory,
};
use crate::error::Error;
use crate::hamiltonian::{
    canonical_hamiltonian, reconstruct_lagrangian, CanonicalHamiltonian, ReconstructedLagrangian,
};
use crate::jet::{Chart, StatePoint};
use crate::linalg;
use crate::symbolic::{check_equivalent, parse, Equivalence, EvalError, Expr, ParseError};
use crate::triple::{
    alpha_map, beta_map, characterization_residual, embed_sigma_values, nl_residual_values, rk_map,
    sigma_residual_slots, standard_pullback_check, PullbackSign,
};
use crate::{HamiltonianSystem, LagrangianSystem};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed definition: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Expression {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid definition: {0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Lagrangian,
    Hamiltonian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateBlock {
    pub initial: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDefinition {
    pub name: String,
    pub dof: u32,
    pub order: u32,
    pub kind: SystemKind,
    pub expression: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrate: Option<IntegrateBlock>,
}

#[derive(Debug, Clone)]
pub enum System {
    Lagrangian(LagrangianSystem),
    Hamiltonian(HamiltonianSystem),
}

impl SystemDefinition {
    /// Parses and validates a definition.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let def: SystemDefinition = serde_json::from_str(text)?;
        def.system()?;
        Ok(def)
    }

    /// Builds the system described by the definition.
    pub fn system(&self) -> CliResult<System> {
        if self.dof == 0 || self.order == 0 {
            return Err(CliError::Invalid("dof and order must be at least 1".into()));
        }
        let expression = parse(&self.expression).map_err(|source| CliError::Expression {
            field: "expression".into(),
            source,
        })?;
        let invalid = |e: Error| match e {
            Error::InvalidSystem(msg) => CliError::Invalid(msg),
            other => CliError::Engine(other),
        };
        let system = match self.kind {
            SystemKind::Lagrangian => {
                let base =
                    LagrangianSystem::new(self.dof, self.order, expression).map_err(invalid)?;
                let mut constraints = Vec::with_capacity(self.constraints.len());
                for (idx, c) in self.constraints.iter().enumerate() {
                    constraints.push(parse(c).map_err(|source| CliError::Expression {
                        field: format!("constraints[{idx}]"),
                        source,
                    })?);
                }
                System::Lagrangian(
                    base.extend_with_constraints(&constraints)
                        .map_err(invalid)?,
                )
            }
            SystemKind::Hamiltonian => {
                if !self.constraints.is_empty() {
                    return Err(CliError::Invalid(
                        "constraints are only supported for Lagrangian systems".into(),
                    ));
                }
                System::Hamiltonian(
                    HamiltonianSystem::new(self.dof, self.order, expression).map_err(invalid)?,
                )
            }
        };
        if let Some(block) = &self.integrate {
            let expected = (2 * self.order * self.dof) as usize;
            if block.initial.len() != expected {
                return Err(CliError::Invalid(format!(
                    "integrate.initial has {} values, the state chart needs {expected}",
                    block.initial.len()
                )));
            }
        }
        Ok(system)
    }
}

pub fn load_system(path: &Path) -> CliResult<SystemDefinition> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SystemDefinition::from_json(&text)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Value::Num(x) => s.serialize_str(&fmt_f64(*x)),
            Value::Text(t) => s.serialize_str(t),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<String> for Value {
    fn from(t: String) -> Self {
        Value::Text(t)
    }
}

impl From<&str> for Value {
    fn from(t: &str) -> Self {
        Value::Text(t.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
enum Style {
    /// `name = value`
    Assign,
    /// `name: value`
    #[default]
    Label,
    /// `name: value  PASS|FAIL`
    Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Value,
    #[serde(skip)]
    style: Style,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub system: String,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl Report {
    fn new(system: &str) -> Self {
        Report {
            system: system.to_string(),
            checks: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn assign(&mut self, name: impl Into<String>, value: impl Into<Value>) {
        self.push(name.into(), true, value.into(), Style::Assign);
    }

    fn label(&mut self, name: impl Into<String>, value: impl Into<Value>) {
        self.push(name.into(), true, value.into(), Style::Label);
    }

    fn verdict(&mut self, name: impl Into<String>, pass: bool, value: impl Into<Value>) {
        self.push(name.into(), pass, value.into(), Style::Verdict);
    }

    fn push(&mut self, name: String, pass: bool, value: Value, style: Style) {
        self.checks.push(Check {
            name,
            pass,
            value,
            style,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("system: {}\n", self.system);
        for c in &self.checks {
            let value = match &c.value {
                Value::Num(x) => fmt_f64(*x),
                Value::Text(t) => t.clone(),
            };
            let _ = match c.style {
                Style::Assign => writeln!(out, "{} = {value}", c.name),
                Style::Label => writeln!(out, "{}: {value}", c.name),
                Style::Verdict => writeln!(
                    out,
                    "{}: {value}  {}",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" }
                ),
            };
        }
        for a in &self.artifacts {
            let _ = writeln!(out, "artifact: {a}");
        }
        let _ = writeln!(
            out,
            "result: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Shortest round-trip decimal form; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Header `t,<chart names>` and one LF-terminated row per sample.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in traj.chart.names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        out.push_str(&fmt_f64(*t));
        for v in x {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Overrides `integrate.step`.
    pub step: Option<f64>,
    /// Added to every `q_(2k)` probe value in `verify-triple`.
    pub perturb: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: 1e-6,
            seed: 0x5EED,
            out: None,
            step: None,
            perturb: 0.0,
        }
    }
}

const PROBES: usize = 8;
const PROBE_ATTEMPTS: usize = 64;

fn rng(opts: &Options) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed)
}

fn random_values(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn matrix_text(rows: &[Vec<Expr>]) -> String {
    let rows: Vec<String> = rows
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn equivalence_text(e: &Equivalence) -> String {
    match e {
        Equivalence::Exact => "equivalent (exact)".into(),
        Equivalence::Sampled => "equivalent (sampled)".into(),
        Equivalence::Different { gap } => format!("different (gap {})", fmt_f64(*gap)),
        Equivalence::Inconclusive(err) => format!("inconclusive ({err})"),
    }
}

fn lagrangian_of(def: &SystemDefinition) -> CliResult<LagrangianSystem> {
    match def.system()? {
        System::Lagrangian(l) => Ok(l),
        System::Hamiltonian(_) => Err(CliError::Invalid(
            "this command needs a Lagrangian system".into(),
        )),
    }
}

/// Smallest `|scaled det|` of the highest Hessian over seeded probe points.
fn lagrangian_probe_regularity(lsys: &LagrangianSystem, opts: &Options) -> CliResult<(bool, f64)> {
    let chart = Chart::jet(lsys.k(), lsys.n());
    let mut rng = rng(opts);
    let mut worst = f64::INFINITY;
    let mut regular = true;
    let mut taken = 0;
    for _ in 0..PROBE_ATTEMPTS {
        if taken == PROBES {
            break;
        }
        let point = StatePoint::new(chart, random_values(&mut rng, chart.dim()))?;
        match lsys.is_regular_at(&point) {
            Ok(r) => {
                taken += 1;
                regular &= r.regular;
                worst = worst.min(r.scaled_det.abs());
            }
            Err(Error::Eval(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    if taken == 0 {
        return Err(CliError::Invalid(
            "no probe point in the domain of the Hessian".into(),
        ));
    }
    Ok((regular, worst))
}

fn hamiltonian_probe_regularity(
    hsys: &HamiltonianSystem,
    opts: &Options,
) -> CliResult<(bool, f64)> {
    let chart = hsys.chart();
    let mut rng = rng(opts);
    let mut worst = f64::INFINITY;
    let mut regular = true;
    let mut taken = 0;
    for _ in 0..PROBE_ATTEMPTS {
        if taken == PROBES {
            break;
        }
        let point = StatePoint::new(chart, random_values(&mut rng, chart.dim()))?;
        match hsys.is_regular_hamiltonian_at(&point) {
            Ok(r) => {
                taken += 1;
                regular &= r.regular;
                worst = worst.min(r.scaled_det.abs());
            }
            Err(Error::Eval(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    if taken == 0 {
        return Err(CliError::Invalid(
            "no probe point in the domain of the Hessian".into(),
        ));
    }
    Ok((regular, worst))
}

/// EL residuals or Hamilton's equations, momenta, energy, Hessian and a
/// regularity verdict at seeded probe points.
pub fn cmd_derive(def: &SystemDefinition, opts: &Options) -> CliResult<Report> {
    let mut report = Report::new(&def.name);
    match def.system()? {
        System::Lagrangian(lsys) => {
            report.label("L", lsys.lagrangian().to_string());
            let el = lsys.euler_lagrange();
            for (idx, r) in el.iter().enumerate() {
                let name = if el.len() == 1 {
                    "EL".to_string()
                } else {
                    format!("EL[{}]", idx + 1)
                };
                report.label(name, r.to_string());
            }
            let momenta = lsys.jacobi_ostrogradsky_momenta();
            for r in 0..lsys.k() {
                for i in 1..=lsys.n() {
                    report.assign(format!("p{i}_{r}"), momenta.get(i, r).to_string());
                }
            }
            report.assign("E_L", lsys.lagrangian_energy().to_string());
            let hessian = lsys.highest_hessian();
            report.label("Hessian", matrix_text(&hessian));
            report.label("det Hessian", linalg::det_symbolic(&hessian).to_string());
            let (regular, det) = lagrangian_probe_regularity(&lsys, opts)?;
            report.verdict("regular at probes", regular, det);
        }
        System::Hamiltonian(hsys) => {
            report.label("H", hsys.hamiltonian().to_string());
            for (name, rhs) in hsys
                .chart()
                .names()
                .iter()
                .zip(hsys.hamilton_vector_field())
            {
                report.assign(format!("{name}'"), rhs.to_string());
            }
            let kth = hsys.is_kth_order();
            report.verdict(
                "kth-order",
                kth.holds(),
                if kth.holds() {
                    "yes".to_string()
                } else {
                    kth.to_string()
                },
            );
            let hessian = hsys.top_momentum_hessian();
            report.label("Hessian", matrix_text(&hessian));
            if kth.holds() {
                let (regular, det) = hamiltonian_probe_regularity(&hsys, opts)?;
                report.verdict("regular at probes", regular, det);
            }
        }
    }
    Ok(report)
}

fn diagnostic(e: Error) -> CliResult<String> {
    match e {
        Error::SingularLagrangian(_)
        | Error::NotKthOrder(_)
        | Error::NotProjectable { .. }
        | Error::Irregular(_)
        | Error::InversionFailed { .. } => Ok(e.to_string()),
        other => Err(other.into()),
    }
}

/// `L → H → L̃` or `H → L → H̃`, with the equivalence verdict.
pub fn cmd_roundtrip(def: &SystemDefinition, _opts: &Options) -> CliResult<Report> {
    let mut report = Report::new(&def.name);
    match def.system()? {
        System::Lagrangian(lsys) => {
            report.label("L", lsys.lagrangian().to_string());
            let hsys = match canonical_hamiltonian(&lsys) {
                Ok((CanonicalHamiltonian::Symbolic(h), _)) => h,
                Ok((CanonicalHamiltonian::Numeric(_), _)) => {
                    report.verdict(
                        "canonical H",
                        false,
                        "no closed form: the top fiber derivative is not affine",
                    );
                    return Ok(report);
                }
                Err(e) => {
                    report.verdict("canonical H", false, diagnostic(e)?);
                    return Ok(report);
                }
            };
            report.label("H", hsys.hamiltonian().to_string());
            let back = match reconstruct_lagrangian(&hsys) {
                Ok(ReconstructedLagrangian::Symbolic(l)) => l,
                Ok(ReconstructedLagrangian::Numeric(_)) => {
                    report.verdict("reconstructed L", false, "no closed form");
                    return Ok(report);
                }
                Err(e) => {
                    report.verdict("reconstructed L", false, diagnostic(e)?);
                    return Ok(report);
                }
            };
            report.label("L~", back.lagrangian().to_string());
            let verdict = check_equivalent(back.lagrangian(), lsys.lagrangian());
            report.verdict("L -> H -> L~", verdict.holds(), equivalence_text(&verdict));
        }
        System::Hamiltonian(hsys) => {
            report.label("H", hsys.hamiltonian().to_string());
            let kth = hsys.is_kth_order();
            if !kth.holds() {
                report.verdict("kth-order", false, kth.to_string());
                return Ok(report);
            }
            let lsys = match reconstruct_lagrangian(&hsys) {
                Ok(ReconstructedLagrangian::Symbolic(l)) => l,
                Ok(ReconstructedLagrangian::Numeric(_)) => {
                    report.verdict("reconstructed L", false, "no closed form");
                    return Ok(report);
                }
                Err(e) => {
                    report.verdict("reconstructed L", false, diagnostic(e)?);
                    return Ok(report);
                }
            };
            report.label("L", lsys.lagrangian().to_string());
            let back = match canonical_hamiltonian(&lsys) {
                Ok((CanonicalHamiltonian::Symbolic(h), _)) => h,
                Ok((CanonicalHamiltonian::Numeric(_), _)) => {
                    report.verdict("canonical H", false, "no closed form");
                    return Ok(report);
                }
                Err(e) => {
                    report.verdict("canonical H", false, diagnostic(e)?);
                    return Ok(report);
                }
            };
            report.label("H~", back.hamiltonian().to_string());
            let verdict = check_equivalent(back.hamiltonian(), hsys.hamiltonian());
            report.verdict("H -> L -> H~", verdict.holds(), equivalence_text(&verdict));
        }
    }
    Ok(report)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `|x_h(t1) - x_2h(t1)|_∞ / 15`, the RK4 step-doubling estimate.
fn step_doubling_estimate(
    ode: &OdeSystem,
    traj: &Trajectory,
    block: &IntegrateBlock,
    h: f64,
) -> CliResult<f64> {
    let coarse = integrate_rk4(ode, &block.initial, block.t0, block.t1, 2.0 * h)?;
    Ok(max_abs_diff(traj.last_state(), coarse.last_state()) / 15.0)
}

/// RK4 integration of the definition's `integrate` block. Writes
/// `<name>.csv` into `opts.out` when given.
pub fn cmd_integrate(def: &SystemDefinition, opts: &Options) -> CliResult<Report> {
    let block = def
        .integrate
        .clone()
        .ok_or_else(|| CliError::Invalid("no integrate block".into()))?;
    let h = opts.step.unwrap_or(block.step);
    let mut report = Report::new(&def.name);
    report.label("step", h);
    let (traj, ode) = match def.system()? {
        System::Lagrangian(lsys) => {
            let ode = lagrangian_ode(&lsys)?;
            let x0 = StatePoint::new(ode.chart, block.initial.clone())?;
            let cc = cross_check(&lsys, &x0, block.t0, block.t1, h)?;
            let drift = lagrangian_energy_drift(&lsys, &cc.lagrangian)?;
            report.verdict("energy drift", drift < opts.tol, drift);
            report.verdict(
                "Lagrangian/Hamiltonian deviation",
                cc.max_deviation < opts.tol,
                cc.max_deviation,
            );
            (cc.lagrangian, ode)
        }
        System::Hamiltonian(hsys) => {
            let ode = hamilton_ode(&hsys);
            let traj = integrate_rk4(&ode, &block.initial, block.t0, block.t1, h)?;
            let drift = energy_drift(&hsys, &traj)?;
            report.verdict("energy drift", drift < opts.tol, drift);
            (traj, ode)
        }
    };
    let estimate = step_doubling_estimate(&ode, &traj, &block, h)?;
    report.verdict("error estimate", estimate < opts.tol, estimate);
    report.label("samples", traj.len() as f64);
    for (name, v) in traj.chart.names().iter().zip(traj.last_state()) {
        report.label(format!("final {name}"), *v);
    }
    if let Some(dir) = &opts.out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        let path = dir.join(format!("{}.csv", def.name));
        fs::write(&path, trajectory_csv(&traj)).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        report.artifacts.push(path.display().to_string());
    }
    Ok(report)
}

fn sign_text(sign: PullbackSign) -> &'static str {
    match sign {
        PullbackSign::Symplectic => "symplectic (+1)",
        PullbackSign::AntiSymplectic => "anti (-1)",
        PullbackSign::Neither => "neither",
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num: i64 = rng.gen_range(-12..=12);
    let den: i64 = rng.gen_range(1..=7);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Largest `N_L` residual of `α⁻¹(embed_sigma(s))` over seeded parameters,
/// exact when `L` evaluates over the rationals.
fn nl_probe(lsys: &LagrangianSystem, opts: &Options) -> CliResult<(bool, f64)> {
    let (n, k) = (lsys.n(), lsys.k());
    let alpha_inv = alpha_map(k, n).inverse();
    let dim = (2 * k * n) as usize;
    let mut rng = rng(opts);
    let mut exact = true;
    let mut worst = 0.0f64;
    for _ in 0..PROBES {
        let params: Vec<BigRational> = (0..dim).map(|_| random_rational(&mut rng)).collect();
        let rational = embed_sigma_values(lsys, &params)
            .and_then(|sigma| alpha_inv.apply_values(&sigma))
            .and_then(|x| nl_residual_values(lsys, &x));
        match rational {
            Ok(res) => {
                for r in res {
                    if !r.is_zero() {
                        exact = false;
                        worst = worst.max(r.abs().to_f64().unwrap_or(f64::INFINITY));
                    }
                }
            }
            Err(Error::Eval(EvalError::NotRational(_))) => {
                let floats: Vec<f64> = params.iter().map(|p| p.to_f64().unwrap_or(0.0)).collect();
                let sigma = embed_sigma_values(lsys, &floats)?;
                let res = nl_residual_values(lsys, &alpha_inv.apply_values(&sigma)?)?;
                exact = false;
                worst = res.iter().fold(worst, |a, x| a.max(x.abs()));
            }
            Err(Error::Eval(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok((exact || worst < 1e-12, worst))
}

/// Characterization residual at seeded jets whose `q_(2k)` solves the EL
/// equations, shifted by `opts.perturb`. Returns the worst value and slot.
fn characterization_probe(lsys: &LagrangianSystem, opts: &Options) -> CliResult<(f64, String)> {
    let (n, k) = (lsys.n(), lsys.k());
    let ode = lagrangian_ode(lsys)?;
    let slots = sigma_residual_slots(k, n);
    let mut rng = rng(opts);
    let mut worst = (0.0f64, slots[0].clone());
    let mut taken = 0;
    for _ in 0..PROBE_ATTEMPTS {
        if taken == PROBES {
            break;
        }
        let mut lift = random_values(&mut rng, ode.dim());
        let rate = match ode.eval(0.0, &lift) {
            Ok(r) => r,
            Err(Error::Eval(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        lift.extend(
            rate[rate.len() - n as usize..]
                .iter()
                .map(|v| v + opts.perturb),
        );
        let residual = characterization_residual(lsys, &lift)?;
        taken += 1;
        for (slot, r) in slots.iter().zip(&residual) {
            if r.abs() > worst.0 {
                worst = (r.abs(), slot.clone());
            }
        }
    }
    Ok(worst)
}

/// Pullback signs of α, β and `R_k`, the factorization `α = R_k⁻¹∘β`, the
/// `N_L` embedding residual and the solution characterization.
pub fn cmd_verify_triple(def: &SystemDefinition, opts: &Options) -> CliResult<Report> {
    let lsys = lagrangian_of(def)?;
    if lsys.multipliers() > 0 {
        return Err(CliError::Invalid(
            "verify-triple does not support constraints".into(),
        ));
    }
    let (n, k) = (lsys.n(), lsys.k());
    let mut report = Report::new(&def.name);
    let (alpha, beta, rk) = (alpha_map(k, n), beta_map(k, n), rk_map(k, n));
    let signs = [
        ("alpha", &alpha, PullbackSign::Symplectic),
        ("beta", &beta, PullbackSign::AntiSymplectic),
        ("R_k", &rk, PullbackSign::AntiSymplectic),
    ];
    for (name, map, expected) in signs {
        let sign = standard_pullback_check(map)?;
        report.verdict(name, sign == expected, sign_text(sign));
    }
    let factored = rk.inverse().compose(&beta)? == alpha;
    report.verdict(
        "alpha = R_k^-1 o beta",
        factored,
        if factored { "yes" } else { "no" },
    );
    let (exact, worst) = nl_probe(&lsys, opts)?;
    report.verdict("N_L residual", exact, worst);
    let (residual, slot) = characterization_probe(&lsys, opts)?;
    if residual < opts.tol {
        report.verdict("characterization", true, residual);
    } else {
        report.verdict(
            "characterization",
            false,
            format!("residual {} in slot {slot}", fmt_f64(residual)),
        );
    }
    Ok(report)
}

/// Regularity only.
pub fn cmd_check(def: &SystemDefinition, opts: &Options) -> CliResult<Report> {
    let mut report = Report::new(&def.name);
    match def.system()? {
        System::Lagrangian(lsys) => {
            report.label(
                "det Hessian",
                linalg::det_symbolic(&lsys.highest_hessian()).to_string(),
            );
            let (regular, det) = lagrangian_probe_regularity(&lsys, opts)?;
            report.verdict("regular at probes", regular, det);
        }
        System::Hamiltonian(hsys) => {
            let kth = hsys.is_kth_order();
            report.verdict(
                "kth-order",
                kth.holds(),
                if kth.holds() {
                    "yes".to_string()
                } else {
                    kth.to_string()
                },
            );
            report.label(
                "det Hessian",
                linalg::det_symbolic(&hsys.top_momentum_hessian()).to_string(),
            );
            if kth.holds() {
                let (regular, det) = hamiltonian_probe_regularity(&hsys, opts)?;
                report.verdict("regular at probes", regular, det);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const JAVELIN: &str = r#"{"name": "javelin", "dof": 1, "order": 2, "kind": "lagrangian",
        "expression": "0.5*(q1_1^2 - q1_2^2)",
        "integrate": {"initial": [0, 1, 1, 0], "t0": 0, "t1": 1, "step": 0.01}}"#;

    fn def(text: &str) -> SystemDefinition {
        SystemDefinition::from_json(text).unwrap()
    }

    fn lookup<'a>(r: &'a Report, name: &str) -> &'a Check {
        r.checks.iter().find(|c| c.name == name).unwrap()
    }

    #[test]
    fn rejects_bad_definitions() {
        let err = SystemDefinition::from_json(
            r#"{"name": "x", "dof": 1, "order": 2, "kind": "lagrangian", "expression": "q1_3^2"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("level 3 exceeds order 2"), "{err}");
        let err = SystemDefinition::from_json(
            r#"{"name": "x", "dof": 1, "order": 2, "kind": "lagrangian", "expression": "q1_1 +* 2"}"#,
        )
        .unwrap_err();
        assert!(
            err.to_string()
                .starts_with("expression: syntax error at byte"),
            "{err}"
        );
        let err = SystemDefinition::from_json(
            r#"{"name": "x", "dof": 1, "order": 1, "kind": "hamiltonian", "expression": "p1_0",
                "integrate": {"initial": [1], "t0": 0, "t1": 1, "step": 0.1}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("needs 2"), "{err}");
        assert!(SystemDefinition::from_json("{}").is_err());
    }

    #[test]
    fn empty_constraints_match_absent() {
        let a = def(
            r#"{"name": "f", "dof": 1, "order": 1, "kind": "lagrangian", "expression": "q1_1^2"}"#,
        );
        let b = def(
            r#"{"name": "f", "dof": 1, "order": 1, "kind": "lagrangian", "expression": "q1_1^2", "constraints": []}"#,
        );
        assert_eq!(a, b);
    }

    #[test]
    fn derive_javelin_momenta() {
        let r = cmd_derive(&def(JAVELIN), &Options::default()).unwrap();
        let text = r.to_text();
        assert!(text.contains("p1_0 = q1_1 + q1_3"), "{text}");
        assert!(text.contains("p1_1 = -q1_2"), "{text}");
        assert!(r.passed());
    }

    #[test]
    fn derive_el_examples() {
        let free = def(
            r#"{"name": "f", "dof": 1, "order": 1, "kind": "lagrangian", "expression": "0.5*q1_1^2"}"#,
        );
        assert!(cmd_derive(&free, &Options::default())
            .unwrap()
            .to_text()
            .contains("EL: -q1_2"));
        let acc = def(
            r#"{"name": "a", "dof": 1, "order": 2, "kind": "lagrangian", "expression": "0.5*q1_2^2"}"#,
        );
        assert!(cmd_derive(&acc, &Options::default())
            .unwrap()
            .to_text()
            .contains("EL: q1_4"));
    }

    #[test]
    fn roundtrip_verdicts() {
        let r = cmd_roundtrip(&def(JAVELIN), &Options::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let bad = def(
            r#"{"name": "b", "dof": 1, "order": 2, "kind": "hamiltonian", "expression": "0.5*(p1_0^2 + p1_1^2)"}"#,
        );
        let r = cmd_roundtrip(&bad, &Options::default()).unwrap();
        assert!(!r.passed());
        assert!(lookup(&r, "kth-order").value == Value::Text("∂H/∂p1_0 = p1_0 ≠ q1_1".into()));
        let h = def(
            r#"{"name": "h", "dof": 1, "order": 2, "kind": "hamiltonian", "expression": "p1_0*q1_1 + 0.5*p1_1^2"}"#,
        );
        let r = cmd_roundtrip(&h, &Options::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(lookup(&r, "L").value, Value::Text("0.5*q1_2^2".into()));
    }

    #[test]
    fn verify_triple_and_perturbation() {
        let d = def(JAVELIN);
        let r = cmd_verify_triple(&d, &Options::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(lookup(&r, "N_L residual").value, Value::Num(0.0));
        let perturbed = Options {
            perturb: 0.5,
            ..Options::default()
        };
        let r = cmd_verify_triple(&d, &perturbed).unwrap();
        assert!(!r.passed());
        let Value::Text(msg) = &lookup(&r, "characterization").value else {
            panic!("expected a slot diagnostic");
        };
        assert!(msg.contains("slot p1_0"), "{msg}");
    }

    #[test]
    fn integrate_zero_hamiltonian_is_constant() {
        let d = def(
            r#"{"name": "z", "dof": 1, "order": 1, "kind": "hamiltonian", "expression": "0",
                "integrate": {"initial": [0.25, -3], "t0": 0, "t1": 1, "step": 0.25}}"#,
        );
        let dir = tempfile::tempdir().unwrap();
        let opts = Options {
            out: Some(dir.path().to_path_buf()),
            ..Options::default()
        };
        let r = cmd_integrate(&d, &opts).unwrap();
        assert!(r.passed());
        let csv = fs::read_to_string(dir.path().join("z.csv")).unwrap();
        assert_eq!(
            csv,
            "t,q1_0,p1_0\n0.0,0.25,-3.0\n0.25,0.25,-3.0\n0.5,0.25,-3.0\n0.75,0.25,-3.0\n1.0,0.25,-3.0\n"
        );
    }

    #[test]
    fn json_mirrors_text() {
        let r = cmd_check(&def(JAVELIN), &Options::default()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["system"], "javelin");
        assert_eq!(json["checks"].as_array().unwrap().len(), r.checks.len());
        assert_eq!(json["checks"][1]["pass"], true);
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(
            serde_json::to_string(&Value::Num(f64::INFINITY)).unwrap(),
            "\"inf\""
        );
    }
}
