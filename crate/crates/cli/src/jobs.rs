//! Resolution of config sections into typed jobs, and their execution.

use std::cell::RefCell;
use std::collections::BTreeSet;

use serde::Serialize;

use ineqlab::concentration::{self, BaseFunction, DeviationSpec, McReport, Verdict as McVerdict};
use ineqlab::measures::{Density1D, DiscreteMeasure, PotentialField};
use ineqlab::metric::HalfSpaceSet;
use ineqlab::poincare::{self, Drift, PoincareRecord};
use ineqlab::report::{format_real, to_json, Real};
use ineqlab::spec::parse_family;
use ineqlab::spectral::spectral_gap_estimate;
use ineqlab::transport::{self, DenseCost, Family};
use ineqlab::weight::{alpha, Weight, WeightFunction};

use crate::config::{ConfigError, Entry, JobSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Error => "error",
        }
    }
}

pub const KINDS: [&str; 11] = [
    "muckenhoupt",
    "spectral",
    "sufficient-1d",
    "sufficient-dd",
    "equivalence",
    "tci",
    "tensorize",
    "contraction",
    "deviation-mc",
    "enlargement-mc",
    "omega-table",
];

/// A contraction map applied to atoms.
#[derive(Debug, Clone)]
pub enum AtomMap {
    Identity,
    Scale(f64),
    Weight(WeightFunction),
}

impl AtomMap {
    fn apply(&self, x: f64) -> f64 {
        match self {
            AtomMap::Identity => x,
            AtomMap::Scale(k) => k * x,
            AtomMap::Weight(w) => w.eval(x),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AtomCost {
    Abs,
    Square,
    Alpha(f64),
}

pub enum Task {
    Muckenhoupt,
    Spectral { gridsize: usize, bounds: (f64, f64) },
    Sufficient1d { range: (f64, f64) },
    SufficientDd { field: PotentialField, u: f64, m: f64, radius: f64 },
    Equivalence,
    Tci { a: f64, family: Family, grid: Vec<f64> },
    Tensorize { a: f64, n: usize, grid: Vec<f64> },
    Contraction { mu: DiscreteMeasure, cost: AtomCost, map: AtomMap, family: Family },
    Deviation { spec: DeviationSpec, c: f64, t_grid: Vec<f64>, samples: u64, seed: u64 },
    Enlargement { n: usize, c: f64, h_grid: Vec<f64>, samples: u64, seed: u64 },
    OmegaTable { from: f64, to: f64, step: f64 },
}

pub struct Job {
    pub name: String,
    pub kind: String,
    pub measure: Option<Density1D>,
    pub measure_spec: String,
    pub weight: WeightFunction,
    pub task: Task,
    pub output: String,
}

/// Tracks which keys of a section were read so leftovers can be reported.
struct Keys<'a> {
    sec: &'a JobSection,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Keys<'a> {
    fn new(sec: &'a JobSection) -> Self {
        Self { sec, used: RefCell::new(BTreeSet::new()) }
    }

    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.used.borrow_mut().insert(key.to_string());
        self.sec.entries.get(key)
    }

    fn required(&self, key: &str) -> Result<&'a Entry, ConfigError> {
        self.get(key).ok_or_else(|| {
            ConfigError::at(self.sec.line, 1, format!("job '{}' is missing required key '{key}'", self.sec.name))
        })
    }

    fn number(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match (self.get(key), default) {
            (Some(e), _) => parse_number(e),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.required(key).unwrap_err()),
        }
    }

    fn count(&self, key: &str, default: Option<u64>) -> Result<u64, ConfigError> {
        match (self.get(key), default) {
            (Some(e), _) => parse_count(e),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.required(key).unwrap_err()),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(e) = self.get(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in e.value.split(',') {
            let t = item.trim();
            out.push(t.parse::<f64>().map_err(|_| at(e, format!("'{t}' is not a number")))?);
        }
        Ok(Some(out))
    }

    fn finish(self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        for (k, e) in &self.sec.entries {
            if !used.contains(k) {
                return Err(ConfigError::at(e.line, 1, format!("unknown key '{k}' for this job kind")));
            }
        }
        Ok(())
    }
}

fn at(e: &Entry, message: impl Into<String>) -> ConfigError {
    ConfigError::at(e.line, e.column, message)
}

fn parse_number(e: &Entry) -> Result<f64, ConfigError> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| at(e, format!("'{}' is not a finite number", e.value)))
}

fn parse_count(e: &Entry) -> Result<u64, ConfigError> {
    let v = e.value.replace('_', "");
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(at(e, format!("'{}' is not a non-negative integer", e.value))),
    }
}

fn core_err(e: &Entry, err: ineqlab::Error) -> ConfigError {
    at(e, err.to_string())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Resolves a section. Every measure, weight and parameter is checked here
/// so that errors carry the position of the offending key.
pub fn resolve(sec: &JobSection, seed_override: Option<u64>) -> Result<Job, ConfigError> {
    let keys = Keys::new(sec);
    let kind_e = keys.required("kind")?;
    let kind = kind_e.value.as_str();
    if !KINDS.contains(&kind) {
        return Err(at(kind_e, format!("unknown job kind '{kind}' (expected one of {})", KINDS.join(", "))));
    }
    let output = keys.get("output").map(|e| e.value.clone()).unwrap_or_else(|| format!("{}.json", sec.name));

    let weight = match keys.get("weight") {
        Some(e) => WeightFunction::from_spec(&e.value).map_err(|err| core_err(e, err))?,
        None => WeightFunction::Identity,
    };
    let needs_measure = !matches!(kind, "sufficient-dd" | "contraction" | "omega-table");
    let (measure, measure_spec) = if needs_measure {
        let e = keys.required("measure")?;
        (Some(Density1D::from_spec(&e.value).map_err(|err| core_err(e, err))?), e.value.clone())
    } else {
        (None, String::new())
    };
    let seed = |keys: &Keys| -> Result<u64, ConfigError> {
        let s = keys.count("seed", None)?;
        Ok(seed_override.unwrap_or(s))
    };
    let family = |keys: &Keys| -> Result<Family, ConfigError> {
        match keys.get("family") {
            Some(e) => Family::parse(&e.value).map_err(|err| core_err(e, err)),
            None => Ok(Family::Standard),
        }
    };
    let tci_a = |keys: &Keys| -> Result<f64, ConfigError> {
        match (keys.get("a"), keys.get("C")) {
            (Some(e), None) => {
                let a = parse_number(e)?;
                if a > 0.0 { Ok(a) } else { Err(at(e, "a must be positive")) }
            }
            (None, Some(e)) => transport::sg_to_tci_constant(parse_number(e)?).map_err(|err| core_err(e, err)),
            (Some(e), Some(_)) => Err(at(e, "give either a or C, not both")),
            (None, None) => Err(ConfigError::at(sec.line, 1, format!("job '{}' needs a or C", sec.name))),
        }
    };
    let grid = |keys: &Keys, mu: &Density1D, default_points: u64| -> Result<Vec<f64>, ConfigError> {
        let lo = keys.number("grid_low", Some(mu.quantile(1e-5)))?;
        let hi = keys.number("grid_high", Some(mu.upper_quantile(1e-5)))?;
        let points = keys.count("grid_points", Some(default_points))? as usize;
        if !(hi > lo) || points < 2 {
            return Err(ConfigError::at(sec.line, 1, "grid needs grid_low < grid_high and at least 2 points"));
        }
        Ok(linspace(lo, hi, points))
    };

    let task = match kind {
        "muckenhoupt" => Task::Muckenhoupt,
        "equivalence" => Task::Equivalence,
        "spectral" => {
            let mu = measure.as_ref().expect("measure resolved");
            let gridsize = keys.count("gridsize", Some(4000))? as usize;
            let lo = keys.number("box_low", Some(mu.quantile(2e-9)))?;
            let hi = keys.number("box_high", Some(mu.upper_quantile(2e-9)))?;
            Task::Spectral { gridsize, bounds: (lo, hi) }
        }
        "sufficient-1d" => {
            let lo = keys.number("probe_low", Some(-1e3))?;
            let hi = keys.number("probe_high", Some(1e3))?;
            Task::Sufficient1d { range: (lo, hi) }
        }
        "sufficient-dd" => {
            let e = keys.required("field")?;
            let dim = keys.count("dim", Some(2))? as usize;
            let (fam, params) = parse_family(&e.value).map_err(|err| core_err(e, err))?;
            let field = match fam.as_str() {
                "quadratic" => PotentialField::quadratic(dim),
                "smooth_abs" => PotentialField::smooth_abs(dim),
                "separable_power" => params
                    .number("p")
                    .and_then(|p| PotentialField::separable_power(dim, p)),
                other => return Err(at(e, format!("unknown field '{other}'"))),
            }
            .map_err(|err| core_err(e, err))?;
            let u = keys.number("u", Some(1.0))?;
            let m = keys.number("M", Some(poincare::third_derivative_bound(&weight)))?;
            let radius = keys.number("probe_radius", Some(1e3))?;
            Task::SufficientDd { field, u, m, radius }
        }
        "tci" => {
            let mu = measure.as_ref().expect("measure resolved");
            Task::Tci { a: tci_a(&keys)?, family: family(&keys)?, grid: grid(&keys, mu, 400)? }
        }
        "tensorize" => {
            let mu = measure.as_ref().expect("measure resolved");
            let n = keys.count("n", Some(2))? as usize;
            Task::Tensorize { a: tci_a(&keys)?, n, grid: grid(&keys, mu, 20)? }
        }
        "contraction" => {
            let e = keys.required("atoms")?;
            let atoms = keys.list("atoms")?.unwrap_or_default();
            let weights = keys.list("weights")?.unwrap_or_else(|| vec![1.0 / atoms.len() as f64; atoms.len()]);
            let mu = DiscreteMeasure::new_1d(atoms, weights).map_err(|err| core_err(e, err))?;
            let cost = match keys.get("cost") {
                None => AtomCost::Square,
                Some(c) => {
                    let (fam, params) = parse_family(&c.value).map_err(|err| core_err(c, err))?;
                    match fam.as_str() {
                        "abs" => AtomCost::Abs,
                        "sq" => AtomCost::Square,
                        "alpha" => AtomCost::Alpha(params.number_or("a", 1.0).map_err(|err| core_err(c, err))?),
                        other => return Err(at(c, format!("unknown cost '{other}' (abs, sq, alpha:a=..)"))),
                    }
                }
            };
            let map = match keys.get("map") {
                None => AtomMap::Identity,
                Some(m) => {
                    let (fam, params) = parse_family(&m.value).map_err(|err| core_err(m, err))?;
                    match fam.as_str() {
                        "identity" => AtomMap::Identity,
                        "scale" => AtomMap::Scale(params.number("k").map_err(|err| core_err(m, err))?),
                        _ => AtomMap::Weight(WeightFunction::from_spec(&m.value).map_err(|err| core_err(m, err))?),
                    }
                }
            };
            Task::Contraction { mu, cost, map, family: family(&keys)? }
        }
        "deviation-mc" => {
            let n = keys.count("n", None)? as usize;
            let g = match keys.get("g") {
                None => BaseFunction::Identity,
                Some(e) if e.value == "identity" => BaseFunction::Identity,
                Some(e) if e.value == "omega" => BaseFunction::Omega,
                Some(e) => return Err(at(e, "g must be identity or omega")),
            };
            let coeff = vec![1.0 / (n.max(1) as f64).sqrt(); n];
            let spec = DeviationSpec::linear(coeff, g, weight.clone())
                .map_err(|err| ConfigError::at(sec.line, 1, err.to_string()))?;
            let c = keys.number("C", None)?;
            let t_grid = keys.list("t_grid")?.unwrap_or_else(|| vec![0.0, 1.0, 2.0, 3.0]);
            let samples = keys.count("samples", Some(1_000_000))?;
            Task::Deviation { spec, c, t_grid, samples, seed: seed(&keys)? }
        }
        "enlargement-mc" => {
            let n = keys.count("n", None)? as usize;
            let c = keys.number("C", None)?;
            let h_grid = keys.list("h_grid")?.unwrap_or_else(|| vec![1e3, 1e4, 1e5]);
            let samples = keys.count("samples", Some(1_000_000))?;
            Task::Enlargement { n, c, h_grid, samples, seed: seed(&keys)? }
        }
        "omega-table" => {
            let from = keys.number("from", Some(0.0))?;
            let to = keys.number("to", None)?;
            let e = keys.required("step")?;
            let step = parse_number(e)?;
            if !(step > 0.0) {
                return Err(at(e, "step must be positive"));
            }
            if to < from {
                return Err(ConfigError::at(sec.line, 1, "to must not be below from"));
            }
            Task::OmegaTable { from, to, step }
        }
        _ => unreachable!("kind checked above"),
    };
    keys.finish()?;
    Ok(Job { name: sec.name.clone(), kind: kind.to_string(), measure, measure_spec, weight, task, output })
}

pub struct Outcome {
    pub verdict: Verdict,
    pub report: String,
    /// Extra CSV written next to the report.
    pub csv: Option<String>,
    pub bracket: Option<(f64, f64)>,
    pub estimate: Option<f64>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    job: &'a str,
    kind: &'a str,
    verdict: Verdict,
    result: &'a T,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    job: &'a str,
    kind: &'a str,
    verdict: Verdict,
    error: String,
}

pub fn error_report(job: &Job, err: &ineqlab::Error) -> String {
    to_json(&ErrorEnvelope { job: &job.name, kind: &job.kind, verdict: Verdict::Error, error: err.to_string() })
}

fn envelope<T: Serialize>(job: &Job, verdict: Verdict, result: &T) -> String {
    to_json(&Envelope { job: &job.name, kind: &job.kind, verdict, result })
}

fn drift_verdict(d: Drift) -> Verdict {
    match d {
        Drift::Holds => Verdict::Pass,
        Drift::Fails => Verdict::Fail,
        Drift::Inconclusive => Verdict::Inconclusive,
    }
}

fn mc_verdict(r: &McReport) -> Verdict {
    match r.verdict {
        McVerdict::Pass => Verdict::Pass,
        McVerdict::Fail => Verdict::Fail,
        McVerdict::Inconclusive => Verdict::Inconclusive,
    }
}

#[derive(Serialize)]
struct OmegaTableSummary {
    weight: String,
    rows: usize,
    from: Real,
    to: Real,
    step: Real,
}

pub fn omega_table_csv(omega: &WeightFunction, from: f64, to: f64, step: f64) -> (String, usize) {
    let mut s = String::from("x,omega,omega_prime,omega_inv,alpha_omega\n");
    let count = ((to - from) / step * (1.0 + 1e-12)).floor() as usize + 1;
    for k in 0..count {
        let x = from + step * k as f64;
        let w = omega.eval(x);
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            format_real(x),
            format_real(w),
            format_real(omega.deriv1(x)),
            format_real(omega.inverse(w)),
            format_real(alpha(w))
        ));
    }
    (s, count)
}

pub fn run(job: &Job) -> Result<Outcome, ineqlab::Error> {
    let mu = job.measure.as_ref();
    let omega = &job.weight;
    let mut out = Outcome { verdict: Verdict::Pass, report: String::new(), csv: None, bracket: None, estimate: None };
    match &job.task {
        Task::Muckenhoupt => {
            let mu = mu.expect("measure");
            let r = poincare::muckenhoupt_weighted(mu, omega)?;
            let record = PoincareRecord::from_muckenhoupt(mu, omega, &r);
            out.verdict = match record.verdict.as_str() {
                "pass" => Verdict::Pass,
                "fail" => Verdict::Fail,
                _ => Verdict::Inconclusive,
            };
            out.bracket = Some(r.bracket());
            #[derive(Serialize)]
            struct Full<'a> {
                record: &'a PoincareRecord,
                detail: &'a poincare::MuckenhouptResult,
            }
            out.report = envelope(job, out.verdict, &Full { record: &record, detail: &r });
        }
        Task::Spectral { gridsize, bounds } => {
            let est = spectral_gap_estimate(mu.expect("measure"), omega, *gridsize, *bounds)?;
            out.verdict = if est.value().is_finite() && est.value() > 0.0 { Verdict::Pass } else { Verdict::Inconclusive };
            out.estimate = Some(est.value());
            out.report = envelope(job, out.verdict, &est);
        }
        Task::Sufficient1d { range } => {
            let r = poincare::sufficient_condition_1d(mu.expect("measure"), omega, *range)?;
            out.verdict = drift_verdict(r.verdict);
            out.estimate = Some(r.liminf_estimate.0);
            out.report = envelope(job, out.verdict, &r);
        }
        Task::SufficientDd { field, u, m, radius } => {
            let r = poincare::sufficient_condition_dd(field, omega, *u, *m, *radius)?;
            out.verdict = drift_verdict(r.verdict);
            out.estimate = Some(r.liminf_estimate.0);
            out.report = envelope(job, out.verdict, &r);
        }
        Task::Equivalence => {
            let r = poincare::equivalence_check(mu.expect("measure"), omega)?;
            out.verdict = if r.pass { Verdict::Pass } else { Verdict::Fail };
            out.bracket = Some(r.weighted.bracket());
            out.estimate = Some(r.rel_diff_minus.0.max(r.rel_diff_plus.0));
            out.report = envelope(job, out.verdict, &r);
        }
        Task::Tci { a, family, grid } => {
            let r = transport::tci_check(mu.expect("measure"), omega, *a, *family, grid)?;
            out.verdict = if r.pass { Verdict::Pass } else { Verdict::Fail };
            out.estimate = Some(r.max_ratio.0);
            out.report = envelope(job, out.verdict, &r);
        }
        Task::Tensorize { a, n, grid } => {
            let r = transport::tensorize_check(mu.expect("measure"), omega, *a, *n, grid)?;
            out.verdict = if r.pass { Verdict::Pass } else { Verdict::Fail };
            out.estimate = Some(r.max_ratio.0);
            out.report = envelope(job, out.verdict, &r);
        }
        Task::Contraction { mu: atoms, cost, map, family } => {
            let k = atoms.len();
            let c = |x: f64, y: f64| match cost {
                AtomCost::Abs => (x - y).abs(),
                AtomCost::Square => (x - y) * (x - y),
                AtomCost::Alpha(a) => alpha(a * (x - y)),
            };
            let matrix = DenseCost::from_fn(k, k, |i, j| c(atoms.atom(i)[0], atoms.atom(j)[0]));
            let r = transport::contraction_check(atoms, &matrix, |x| map.apply(x), *family)?;
            out.verdict = if r.pass { Verdict::Pass } else { Verdict::Fail };
            out.estimate = Some(r.max_abs_diff.0);
            out.report = envelope(job, out.verdict, &r);
        }
        Task::Deviation { spec, c, t_grid, samples, seed } => {
            let r = concentration::mc_deviation(mu.expect("measure"), spec, *c, t_grid, *samples, *seed)?;
            out.verdict = mc_verdict(&r);
            out.csv = Some(r.to_csv());
            out.report = envelope(job, out.verdict, &r);
        }
        Task::Enlargement { n, c, h_grid, samples, seed } => {
            let mu = mu.expect("measure");
            let set = HalfSpaceSet::at_most(0, 0, mu.median());
            let r = concentration::mc_enlargement(mu, omega, &set, *n, *c, h_grid, *samples, *seed)?;
            out.verdict = mc_verdict(&r);
            out.csv = Some(r.to_csv());
            out.report = envelope(job, out.verdict, &r);
        }
        Task::OmegaTable { from, to, step } => {
            let (csv, rows) = omega_table_csv(omega, *from, *to, *step);
            out.csv = Some(csv);
            let summary = OmegaTableSummary {
                weight: omega.descriptor(),
                rows,
                from: Real(*from),
                to: Real(*to),
                step: Real(*step),
            };
            out.report = envelope(job, out.verdict, &summary);
        }
    }
    Ok(out)
}
