//! Problem data: processing-time functions, instances, schedules, verification.
//!
//! A malleable job runs non-preemptively and in unison on a set of machines;
//! its duration is a function of the aggregated speed of that set alone.
//! Every function family must be non-increasing in speed while `s * f(s)`
//! (the work) is non-decreasing, so spreading a job over slower machines
//! never makes it finish earlier and speed can be traded for work.

use crate::rational::{dec12, fmt_rat, nth_root, parse_rat, pow_int, pow_rat, Rat};
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Validation or parse failure with a human-readable reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelError(pub String);

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ModelError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError(msg.into()))
}

// Exponent terms (power-law exponents, p-norm indices) must stay small so
// exact integer-power comparisons cannot blow up.
const MAX_EXP_TERM: i64 = 1 << 16;

fn exp_terms(x: &Rat, what: &str) -> Result<(i64, u32), ModelError> {
    let n = x.numer().to_i64();
    let d = x.denom().to_i64();
    match (n, d) {
        (Some(n), Some(d)) if n.abs() <= MAX_EXP_TERM && d <= MAX_EXP_TERM => Ok((n, d as u32)),
        _ => err(format!("{what} has terms too large for exact exponentiation")),
    }
}

/// Speed aggregation norm: a set's effective speed is the p-norm of its
/// speed vector. `p = 1` (the default) is plain summation, `Infinity` takes
/// the fastest machine only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PNorm {
    Finite(Rat),
    Infinity,
}

impl PNorm {
    pub fn one() -> PNorm {
        PNorm::Finite(Rat::one())
    }

    /// Finite index, requires `p >= 1` with small numerator and denominator.
    pub fn finite(p: Rat) -> Result<PNorm, ModelError> {
        if p < Rat::one() {
            return err(format!("norm index must be >= 1, got {}", fmt_rat(&p)));
        }
        exp_terms(&p, "norm index")?;
        Ok(PNorm::Finite(p))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, PNorm::Finite(p) if p.is_one())
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{}", fmt_rat(p)),
            PNorm::Infinity => write!(f, "inf"),
        }
    }
}

/// Processing-time function of one job, mapping effective speed to duration.
///
/// Families and their closed forms:
/// * `CappedInverse { work, floor }`: `max(work / s, floor)`
/// * `PowerLaw { work, exponent }`: `work * s^(-exponent)`, `exponent in (0, 1]`
/// * `Amdahl { work, parallel }`: `work * ((1 - parallel) + parallel / s)`
/// * `Table { points }`: right-continuous step function through breakpoints
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcTimeFn {
    CappedInverse { work: Rat, floor: Rat },
    PowerLaw { work: Rat, exponent: Rat },
    Amdahl { work: Rat, parallel: Rat },
    Table { points: Vec<(Rat, Rat)> },
}

impl ProcTimeFn {
    pub fn capped_inverse(work: Rat, floor: Rat) -> Result<ProcTimeFn, ModelError> {
        if !work.is_positive() || !floor.is_positive() {
            return err("capped_inverse needs positive work and floor");
        }
        Ok(ProcTimeFn::CappedInverse { work, floor })
    }

    pub fn power_law(work: Rat, exponent: Rat) -> Result<ProcTimeFn, ModelError> {
        if !work.is_positive() {
            return err("power_law needs positive work");
        }
        if !exponent.is_positive() || exponent > Rat::one() {
            // exponent above 1 would make the work s^(1-a) decreasing
            return err(format!(
                "power_law exponent must lie in (0, 1], got {}",
                fmt_rat(&exponent)
            ));
        }
        exp_terms(&exponent, "power_law exponent")?;
        Ok(ProcTimeFn::PowerLaw { work, exponent })
    }

    pub fn amdahl(work: Rat, parallel: Rat) -> Result<ProcTimeFn, ModelError> {
        if !work.is_positive() {
            return err("amdahl needs positive work");
        }
        if parallel.is_negative() || parallel > Rat::one() {
            return err(format!(
                "amdahl parallel fraction must lie in [0, 1], got {}",
                fmt_rat(&parallel)
            ));
        }
        Ok(ProcTimeFn::Amdahl { work, parallel })
    }

    /// Breakpoints `(speed, value)` with strictly ascending positive speeds.
    /// Values must be positive, non-increasing, with non-decreasing work,
    /// all checked pairwise on the breakpoints.
    pub fn table(points: Vec<(Rat, Rat)>) -> Result<ProcTimeFn, ModelError> {
        if points.is_empty() {
            return err("table needs at least one breakpoint");
        }
        for (s, v) in &points {
            if !s.is_positive() || !v.is_positive() {
                return err("table breakpoints need positive speed and value");
            }
        }
        for w in points.windows(2) {
            let ((s0, v0), (s1, v1)) = (&w[0], &w[1]);
            if s1 <= s0 {
                return err("table speeds must be strictly ascending");
            }
            if v1 > v0 {
                return err(format!(
                    "table values must be non-increasing: f({}) = {} < f({}) = {}",
                    fmt_rat(s0),
                    fmt_rat(v0),
                    fmt_rat(s1),
                    fmt_rat(v1)
                ));
            }
            if s1 * v1 < s0 * v0 {
                return err(format!(
                    "table work must be non-decreasing: {}*{} < {}*{}",
                    fmt_rat(s1),
                    fmt_rat(v1),
                    fmt_rat(s0),
                    fmt_rat(v0)
                ));
            }
        }
        Ok(ProcTimeFn::Table { points })
    }

    /// Duration at effective speed `s > 0`. Exact for every family except
    /// `PowerLaw` with a non-integral exponent, which goes through the
    /// deterministic high-precision root.
    pub fn eval(&self, s: &Rat) -> Rat {
        assert!(s.is_positive(), "duration needs positive effective speed");
        match self {
            ProcTimeFn::CappedInverse { work, floor } => {
                let v = work / s;
                if v > *floor {
                    v
                } else {
                    floor.clone()
                }
            }
            ProcTimeFn::PowerLaw { work, exponent } => {
                let (n, d) = exp_terms(exponent, "exponent").expect("validated at construction");
                work * pow_rat(s, -n, d)
            }
            ProcTimeFn::Amdahl { work, parallel } => {
                work * ((Rat::one() - parallel) + parallel / s)
            }
            ProcTimeFn::Table { points } => {
                let mut v = &points[0].1;
                for (b, val) in points {
                    if b <= s {
                        v = val;
                    } else {
                        break;
                    }
                }
                v.clone()
            }
        }
    }

    /// Exact test of `f(s) <= bound`, avoiding any root approximation.
    /// For `PowerLaw` the comparison is cross-multiplied into integer powers.
    pub fn le_at(&self, s: &Rat, bound: &Rat) -> bool {
        assert!(s.is_positive());
        if !bound.is_positive() {
            return false; // durations are strictly positive
        }
        match self {
            ProcTimeFn::CappedInverse { work, floor } => {
                floor <= bound && work <= &(bound * s)
            }
            ProcTimeFn::PowerLaw { work, exponent } => {
                // w * s^(-n/d) <= b  <=>  w^d <= b^d * s^n  (all positive)
                let (n, d) = exp_terms(exponent, "exponent").expect("validated at construction");
                pow_int(work, d as i64) <= pow_int(bound, d as i64) * pow_int(s, n)
            }
            ProcTimeFn::Amdahl { .. } | ProcTimeFn::Table { .. } => &self.eval(s) <= bound,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ProcTimeFn::CappedInverse { .. } => "capped_inverse",
            ProcTimeFn::PowerLaw { .. } => "power_law",
            ProcTimeFn::Amdahl { .. } => "amdahl",
            ProcTimeFn::Table { .. } => "table",
        }
    }
}

/// Machine environment class. `Restricted` means all speeds are 0 or 1,
/// `Uniform` means every job sees the same per-machine speed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Unrelated,
    Restricted,
    Uniform,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Unrelated => "unrelated",
            Variant::Restricted => "restricted",
            Variant::Uniform => "uniform",
        };
        write!(f, "{s}")
    }
}

/// A scheduling instance: `machines x jobs` speed matrix, one processing-time
/// function per job, optional completion-time weights, speed norm, variant.
#[derive(Clone, Debug)]
pub struct Instance {
    pub machines: usize,
    pub jobs: usize,
    /// Row-major `machines x jobs`; `speeds[i * jobs + j]` is machine `i`
    /// running job `j`. Zero means the pair is forbidden.
    pub speeds: Vec<Rat>,
    pub functions: Vec<ProcTimeFn>,
    pub weights: Option<Vec<Rat>>,
    pub p: PNorm,
    pub variant: Variant,
    /// Per-machine speeds, present exactly for the uniform variant.
    pub machine_speeds: Option<Vec<Rat>>,
}

impl Instance {
    pub fn new(
        machines: usize,
        jobs: usize,
        speeds: Vec<Rat>,
        functions: Vec<ProcTimeFn>,
        variant: Variant,
    ) -> Result<Instance, ModelError> {
        let inst = Instance {
            machines,
            jobs,
            speeds,
            functions,
            weights: None,
            p: PNorm::one(),
            variant,
            machine_speeds: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Uniform instance: every job sees machine `i` at speed `machine_speeds[i]`.
    pub fn new_uniform(
        machine_speeds: Vec<Rat>,
        jobs: usize,
        functions: Vec<ProcTimeFn>,
    ) -> Result<Instance, ModelError> {
        let machines = machine_speeds.len();
        let mut speeds = Vec::with_capacity(machines * jobs);
        for s in &machine_speeds {
            for _ in 0..jobs {
                speeds.push(s.clone());
            }
        }
        let inst = Instance {
            machines,
            jobs,
            speeds,
            functions,
            weights: None,
            p: PNorm::one(),
            variant: Variant::Uniform,
            machine_speeds: Some(machine_speeds),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_weights(mut self, weights: Vec<Rat>) -> Result<Instance, ModelError> {
        self.weights = Some(weights);
        self.validate()?;
        Ok(self)
    }

    pub fn with_p(mut self, p: PNorm) -> Result<Instance, ModelError> {
        self.p = p;
        self.validate()?;
        Ok(self)
    }

    pub fn with_machine_speeds(mut self, ms: Vec<Rat>) -> Result<Instance, ModelError> {
        self.machine_speeds = Some(ms);
        self.validate()?;
        Ok(self)
    }

    pub fn speed(&self, machine: usize, job: usize) -> &Rat {
        &self.speeds[machine * self.jobs + job]
    }

    pub fn weight(&self, job: usize) -> Rat {
        match &self.weights {
            Some(w) => w[job].clone(),
            None => Rat::one(),
        }
    }

    /// Machines able to run `job` at all.
    pub fn eligible_machines(&self, job: usize) -> Vec<usize> {
        (0..self.machines)
            .filter(|&i| self.speed(i, job).is_positive())
            .collect()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.speeds.len() != self.machines * self.jobs {
            return err(format!(
                "speed matrix has {} entries, expected {}",
                self.speeds.len(),
                self.machines * self.jobs
            ));
        }
        if self.functions.len() != self.jobs {
            return err(format!(
                "{} processing-time functions for {} jobs",
                self.functions.len(),
                self.jobs
            ));
        }
        for (idx, s) in self.speeds.iter().enumerate() {
            if s.is_negative() {
                return err(format!(
                    "negative speed for machine {}, job {}",
                    idx / self.jobs.max(1),
                    idx % self.jobs.max(1)
                ));
            }
        }
        for j in 0..self.jobs {
            if (0..self.machines).all(|i| self.speed(i, j).is_zero()) {
                return err(format!("job {j} cannot run on any machine"));
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != self.jobs {
                return err(format!("{} weights for {} jobs", w.len(), self.jobs));
            }
            if let Some(j) = w.iter().position(|x| x.is_negative()) {
                return err(format!("negative weight for job {j}"));
            }
        }
        match self.variant {
            Variant::Restricted => {
                if self.speeds.iter().any(|s| !s.is_zero() && !s.is_one()) {
                    return err("restricted variant requires all speeds in {0, 1}");
                }
            }
            Variant::Uniform => {
                let ms = match &self.machine_speeds {
                    Some(ms) => ms,
                    None => return err("uniform variant requires machine_speeds"),
                };
                if ms.len() != self.machines {
                    return err(format!(
                        "{} machine speeds for {} machines",
                        ms.len(),
                        self.machines
                    ));
                }
                if ms.iter().any(|s| s.is_negative()) {
                    return err("negative machine speed");
                }
                for i in 0..self.machines {
                    for j in 0..self.jobs {
                        if self.speed(i, j) != &ms[i] {
                            return err(format!(
                                "uniform variant: speed of machine {i} for job {j} \
                                 differs from its machine speed"
                            ));
                        }
                    }
                }
            }
            Variant::Unrelated => {
                if self.machine_speeds.is_some() {
                    return err("machine_speeds is only meaningful for the uniform variant");
                }
            }
        }
        Ok(())
    }

    /// Effective speed of a machine set for `job` under the instance norm.
    /// Zero-speed members contribute nothing.
    pub fn effective_speed(&self, job: usize, set: &[usize]) -> Rat {
        match &self.p {
            PNorm::Finite(p) if p.is_one() => {
                set.iter().map(|&i| self.speed(i, job)).sum()
            }
            PNorm::Finite(p) => {
                let (pn, pd) = exp_terms(p, "norm index").expect("validated at construction");
                let total: Rat = set
                    .iter()
                    .map(|&i| self.speed(i, job))
                    .filter(|s| s.is_positive())
                    .map(|s| pow_rat(s, pn, pd))
                    .sum();
                if total.is_zero() {
                    total
                } else {
                    // total^(1/p) = (total^pd)^(1/pn)
                    nth_root(&pow_int(&total, pd as i64), pn.unsigned_abs() as u32)
                }
            }
            PNorm::Infinity => set
                .iter()
                .map(|&i| self.speed(i, job).clone())
                .max()
                .unwrap_or_else(Rat::zero),
        }
    }

    /// Duration of `job` when run on `set`. Panics if the set yields zero
    /// effective speed; callers must allocate at least one usable machine.
    pub fn duration(&self, job: usize, set: &[usize]) -> Rat {
        let sigma = self.effective_speed(job, set);
        self.functions[job].eval(&sigma)
    }

    /// Instance restricted to a job subset (machines unchanged). Returns the
    /// sub-instance and the original index of each kept job.
    pub fn restrict_jobs(&self, keep: &[usize]) -> (Instance, Vec<usize>) {
        let jobs = keep.len();
        let mut speeds = Vec::with_capacity(self.machines * jobs);
        for i in 0..self.machines {
            for &j in keep {
                speeds.push(self.speed(i, j).clone());
            }
        }
        let inst = Instance {
            machines: self.machines,
            jobs,
            speeds,
            functions: keep.iter().map(|&j| self.functions[j].clone()).collect(),
            weights: self
                .weights
                .as_ref()
                .map(|w| keep.iter().map(|&j| w[j].clone()).collect()),
            p: self.p.clone(),
            variant: self.variant,
            machine_speeds: self.machine_speeds.clone(),
        };
        (inst, keep.to_vec())
    }
}

/// One job's allocation: the machine set it occupies and its time window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobPlacement {
    pub machines: Vec<usize>,
    pub start: Rat,
    pub completion: Rat,
}

/// A complete schedule keyed by job index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub jobs: BTreeMap<usize, JobPlacement>,
    pub makespan: Rat,
}

impl Schedule {
    pub fn empty() -> Schedule {
        Schedule {
            jobs: BTreeMap::new(),
            makespan: Rat::zero(),
        }
    }

    /// Records one job's window and keeps the makespan current.
    pub fn place(&mut self, job: usize, machines: Vec<usize>, start: Rat, completion: Rat) {
        if completion > self.makespan {
            self.makespan = completion.clone();
        }
        let prev = self.jobs.insert(
            job,
            JobPlacement {
                machines,
                start,
                completion,
            },
        );
        assert!(prev.is_none(), "job {job} placed twice");
    }
}

/// A concrete defect found by [`verify_schedule`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MissingJob { job: usize },
    UnknownJob { job: usize },
    EmptyMachineSet { job: usize },
    BadMachineIndex { job: usize, machine: usize },
    DuplicateMachine { job: usize, machine: usize },
    ZeroSpeedMachine { job: usize, machine: usize },
    NegativeStart { job: usize },
    WrongDuration { job: usize, expected: Rat, got: Rat },
    Overlap { machine: usize, job_a: usize, job_b: usize },
    MakespanMismatch { stored: Rat, actual: Rat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingJob { job } => write!(f, "job {job} is not scheduled"),
            Violation::UnknownJob { job } => write!(f, "schedule mentions unknown job {job}"),
            Violation::EmptyMachineSet { job } => write!(f, "job {job} has no machines"),
            Violation::BadMachineIndex { job, machine } => {
                write!(f, "job {job} uses nonexistent machine {machine}")
            }
            Violation::DuplicateMachine { job, machine } => {
                write!(f, "job {job} lists machine {machine} twice")
            }
            Violation::ZeroSpeedMachine { job, machine } => {
                write!(f, "job {job} uses machine {machine} which cannot run it")
            }
            Violation::NegativeStart { job } => write!(f, "job {job} starts before time 0"),
            Violation::WrongDuration { job, expected, got } => write!(
                f,
                "job {job} occupies {} time units but needs {}",
                dec12(got),
                dec12(expected)
            ),
            Violation::Overlap { machine, job_a, job_b } => {
                write!(f, "jobs {job_a} and {job_b} overlap on machine {machine}")
            }
            Violation::MakespanMismatch { stored, actual } => write!(
                f,
                "stored makespan {} but latest completion is {}",
                dec12(stored),
                dec12(actual)
            ),
        }
    }
}

/// Checks a schedule against its instance: completeness, machine validity,
/// exact durations, and exclusive machine occupation. Returns every defect.
pub fn verify_schedule(instance: &Instance, schedule: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    for j in 0..instance.jobs {
        if !schedule.jobs.contains_key(&j) {
            out.push(Violation::MissingJob { job: j });
        }
    }
    let mut by_machine: BTreeMap<usize, Vec<(usize, &JobPlacement)>> = BTreeMap::new();
    for (&j, pl) in &schedule.jobs {
        if j >= instance.jobs {
            out.push(Violation::UnknownJob { job: j });
            continue;
        }
        if pl.start.is_negative() {
            out.push(Violation::NegativeStart { job: j });
        }
        if pl.machines.is_empty() {
            out.push(Violation::EmptyMachineSet { job: j });
            continue;
        }
        let mut seen = Vec::new();
        let mut usable = true;
        for &i in &pl.machines {
            if i >= instance.machines {
                out.push(Violation::BadMachineIndex { job: j, machine: i });
                usable = false;
                continue;
            }
            if seen.contains(&i) {
                out.push(Violation::DuplicateMachine { job: j, machine: i });
                usable = false;
                continue;
            }
            seen.push(i);
            if instance.speed(i, j).is_zero() {
                out.push(Violation::ZeroSpeedMachine { job: j, machine: i });
                usable = false;
            }
            by_machine.entry(i).or_default().push((j, pl));
        }
        if usable {
            let expected = instance.duration(j, &pl.machines);
            let got = &pl.completion - &pl.start;
            if got != expected {
                out.push(Violation::WrongDuration {
                    job: j,
                    expected,
                    got,
                });
            }
        }
    }
    for (&machine, placements) in &by_machine {
        let mut spans: Vec<(usize, &JobPlacement)> = placements.clone();
        spans.sort_by(|a, b| (&a.1.start, a.0).cmp(&(&b.1.start, b.0)));
        for w in spans.windows(2) {
            let ((ja, pa), (jb, pb)) = (&w[0], &w[1]);
            // open intervals: touching end points are fine
            if pb.start < pa.completion {
                out.push(Violation::Overlap {
                    machine,
                    job_a: *ja,
                    job_b: *jb,
                });
            }
        }
    }
    let actual = schedule
        .jobs
        .values()
        .map(|pl| pl.completion.clone())
        .max()
        .unwrap_or_else(Rat::zero);
    if actual != schedule.makespan {
        out.push(Violation::MakespanMismatch {
            stored: schedule.makespan.clone(),
            actual,
        });
    }
    out
}

/// `(makespan, sum of weighted completion times)`, unit weights by default.
pub fn objectives(instance: &Instance, schedule: &Schedule) -> (Rat, Rat) {
    let makespan = schedule
        .jobs
        .values()
        .map(|pl| pl.completion.clone())
        .max()
        .unwrap_or_else(Rat::zero);
    let weighted = schedule
        .jobs
        .iter()
        .map(|(&j, pl)| instance.weight(j) * &pl.completion)
        .sum();
    (makespan, weighted)
}

// ---------------------------------------------------------------------------
// JSON codecs. Rationals travel as "num/den" strings.

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum FnDto {
    CappedInverse { work: String, floor: String },
    PowerLaw { work: String, exponent: String },
    Amdahl { work: String, parallel: String },
    Table { points: Vec<(String, String)> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDto {
    machines: usize,
    jobs: usize,
    speeds: Vec<String>,
    functions: Vec<FnDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<String>,
    variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    machine_speeds: Option<Vec<String>>,
}

fn rat_field(s: &str, what: &str) -> Result<Rat, ModelError> {
    parse_rat(s).map_err(|e| ModelError(format!("{what}: {e}")))
}

fn rat_vec(v: &[String], what: &str) -> Result<Vec<Rat>, ModelError> {
    v.iter().map(|s| rat_field(s, what)).collect()
}

pub fn instance_to_json(instance: &Instance) -> String {
    let functions = instance
        .functions
        .iter()
        .map(|f| match f {
            ProcTimeFn::CappedInverse { work, floor } => FnDto::CappedInverse {
                work: fmt_rat(work),
                floor: fmt_rat(floor),
            },
            ProcTimeFn::PowerLaw { work, exponent } => FnDto::PowerLaw {
                work: fmt_rat(work),
                exponent: fmt_rat(exponent),
            },
            ProcTimeFn::Amdahl { work, parallel } => FnDto::Amdahl {
                work: fmt_rat(work),
                parallel: fmt_rat(parallel),
            },
            ProcTimeFn::Table { points } => FnDto::Table {
                points: points
                    .iter()
                    .map(|(s, v)| (fmt_rat(s), fmt_rat(v)))
                    .collect(),
            },
        })
        .collect();
    let dto = InstanceDto {
        machines: instance.machines,
        jobs: instance.jobs,
        speeds: instance.speeds.iter().map(fmt_rat).collect(),
        functions,
        weights: instance
            .weights
            .as_ref()
            .map(|w| w.iter().map(fmt_rat).collect()),
        p: match &instance.p {
            PNorm::Finite(p) if p.is_one() => None,
            other => Some(other.to_string()),
        },
        variant: instance.variant.to_string(),
        machine_speeds: instance
            .machine_speeds
            .as_ref()
            .map(|ms| ms.iter().map(fmt_rat).collect()),
    };
    serde_json::to_string_pretty(&dto).expect("instance serialization cannot fail")
}

pub fn instance_from_json(text: &str) -> Result<Instance, ModelError> {
    let dto: InstanceDto =
        serde_json::from_str(text).map_err(|e| ModelError(format!("bad instance JSON: {e}")))?;
    let mut functions = Vec::with_capacity(dto.functions.len());
    for f in &dto.functions {
        functions.push(match f {
            FnDto::CappedInverse { work, floor } => ProcTimeFn::capped_inverse(
                rat_field(work, "work")?,
                rat_field(floor, "floor")?,
            )?,
            FnDto::PowerLaw { work, exponent } => ProcTimeFn::power_law(
                rat_field(work, "work")?,
                rat_field(exponent, "exponent")?,
            )?,
            FnDto::Amdahl { work, parallel } => ProcTimeFn::amdahl(
                rat_field(work, "work")?,
                rat_field(parallel, "parallel")?,
            )?,
            FnDto::Table { points } => {
                let pts = points
                    .iter()
                    .map(|(s, v)| Ok((rat_field(s, "speed")?, rat_field(v, "value")?)))
                    .collect::<Result<Vec<_>, ModelError>>()?;
                ProcTimeFn::table(pts)?
            }
        });
    }
    let variant = match dto.variant.as_str() {
        "unrelated" => Variant::Unrelated,
        "restricted" => Variant::Restricted,
        "uniform" => Variant::Uniform,
        other => return err(format!("unknown variant {other:?}")),
    };
    let p = match dto.p.as_deref() {
        None => PNorm::one(),
        Some("inf") | Some("infinity") => PNorm::Infinity,
        Some(s) => PNorm::finite(rat_field(s, "p")?)?,
    };
    let inst = Instance {
        machines: dto.machines,
        jobs: dto.jobs,
        speeds: rat_vec(&dto.speeds, "speed")?,
        functions,
        weights: dto.weights.as_deref().map(|w| rat_vec(w, "weight")).transpose()?,
        p,
        variant,
        machine_speeds: dto
            .machine_speeds
            .as_deref()
            .map(|ms| rat_vec(ms, "machine speed"))
            .transpose()?,
    };
    inst.validate()?;
    Ok(inst)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementDto {
    machines: Vec<usize>,
    start: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDto {
    jobs: BTreeMap<String, PlacementDto>,
}

pub fn schedule_to_json(schedule: &Schedule) -> String {
    let dto = ScheduleDto {
        jobs: schedule
            .jobs
            .iter()
            .map(|(&j, pl)| {
                (
                    j.to_string(),
                    PlacementDto {
                        machines: pl.machines.clone(),
                        start: fmt_rat(&pl.start),
                    },
                )
            })
            .collect(),
    };
    serde_json::to_string_pretty(&dto).expect("schedule serialization cannot fail")
}

/// Rebuilds a schedule against `instance`, recomputing completions from the
/// stored machine sets and starts.
pub fn schedule_from_json(instance: &Instance, text: &str) -> Result<Schedule, ModelError> {
    let dto: ScheduleDto =
        serde_json::from_str(text).map_err(|e| ModelError(format!("bad schedule JSON: {e}")))?;
    let mut jobs = BTreeMap::new();
    for (key, pl) in &dto.jobs {
        let j: usize = key
            .parse()
            .map_err(|_| ModelError(format!("bad job key {key:?}")))?;
        let start = rat_field(&pl.start, "start")?;
        let completion = if j < instance.jobs
            && !pl.machines.is_empty()
            && pl.machines.iter().all(|&i| i < instance.machines)
            && instance.effective_speed(j, &pl.machines).is_positive()
        {
            &start + instance.duration(j, &pl.machines)
        } else {
            start.clone() // verification will flag the defect
        };
        jobs.insert(
            j,
            JobPlacement {
                machines: pl.machines.clone(),
                start,
                completion,
            },
        );
    }
    let makespan = jobs
        .values()
        .map(|pl: &JobPlacement| pl.completion.clone())
        .max()
        .unwrap_or_else(Rat::zero);
    Ok(Schedule { jobs, makespan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};

    fn cap(w: i64, h_n: i64, h_d: i64) -> ProcTimeFn {
        ProcTimeFn::capped_inverse(rint(w), rat(h_n, h_d)).unwrap()
    }

    #[test]
    fn family_constructors_reject_bad_parameters() {
        assert!(ProcTimeFn::power_law(rint(1), rat(3, 2)).is_err());
        assert!(ProcTimeFn::power_law(rint(1), rint(0)).is_err());
        assert!(ProcTimeFn::power_law(rint(1), rint(1)).is_ok());
        assert!(ProcTimeFn::amdahl(rint(2), rat(11, 10)).is_err());
        assert!(ProcTimeFn::amdahl(rint(2), rint(0)).is_ok());
        assert!(ProcTimeFn::capped_inverse(rint(0), rint(1)).is_err());
        // value rises
        assert!(ProcTimeFn::table(vec![(rint(1), rint(1)), (rint(2), rint(2))]).is_err());
        // work drops: 2*1 < 1*3
        assert!(ProcTimeFn::table(vec![(rint(1), rint(3)), (rint(2), rint(1))]).is_err());
        assert!(ProcTimeFn::table(vec![(rint(1), rint(3)), (rint(2), rint(2))]).is_ok());
    }

    #[test]
    fn eval_matches_closed_forms() {
        let f = cap(2, 1, 1);
        assert_eq!(f.eval(&rint(1)), rint(2));
        assert_eq!(f.eval(&rint(4)), rint(1)); // floor takes over
        assert_eq!(f.eval(&rat(1, 2)), rint(4));

        let g = ProcTimeFn::amdahl(rint(10), rat(1, 2)).unwrap();
        assert_eq!(g.eval(&rint(1)), rint(10));
        assert_eq!(g.eval(&rint(2)), rat(15, 2));

        let t = ProcTimeFn::table(vec![(rint(1), rint(3)), (rint(2), rint(2))]).unwrap();
        assert_eq!(t.eval(&rat(1, 2)), rint(3)); // below first breakpoint
        assert_eq!(t.eval(&rat(3, 2)), rint(3));
        assert_eq!(t.eval(&rint(2)), rint(2));
        assert_eq!(t.eval(&rint(50)), rint(2)); // constant past the end

        // integral exponent stays exact: f(s) = 8 / s
        let p = ProcTimeFn::power_law(rint(8), rint(1)).unwrap();
        assert_eq!(p.eval(&rint(4)), rint(2));
    }

    #[test]
    fn le_at_is_exact_for_power_law() {
        // f(s) = 4 * s^(-1/2): f(4) = 2
        let f = ProcTimeFn::power_law(rint(4), rat(1, 2)).unwrap();
        assert!(f.le_at(&rint(4), &rint(2)));
        assert!(!f.le_at(&rint(4), &rat(19999999, 10000000)));
        assert!(f.le_at(&rint(5), &rint(2)));
        assert!(!f.le_at(&rint(3), &rint(2)));
    }

    #[test]
    fn effective_speed_norms() {
        let inst = Instance::new(
            2,
            1,
            vec![rint(3), rint(4)],
            vec![cap(1, 1, 1)],
            Variant::Unrelated,
        )
        .unwrap();
        assert_eq!(inst.effective_speed(0, &[0, 1]), rint(7));

        let inst2 = inst.clone().with_p(PNorm::finite(rint(2)).unwrap()).unwrap();
        assert_eq!(inst2.effective_speed(0, &[0, 1]), rint(5)); // 3-4-5 triangle

        let inst_inf = inst.with_p(PNorm::Infinity).unwrap();
        assert_eq!(inst_inf.effective_speed(0, &[0, 1]), rint(4));
    }

    #[test]
    fn validation_catches_structural_defects() {
        // job 1 has no machine
        let bad = Instance::new(
            2,
            2,
            vec![rint(1), rint(0), rint(1), rint(0)],
            vec![cap(1, 1, 1), cap(1, 1, 1)],
            Variant::Unrelated,
        );
        assert!(bad.is_err());

        // restricted with a speed of 2
        let bad2 = Instance::new(
            1,
            1,
            vec![rint(2)],
            vec![cap(1, 1, 1)],
            Variant::Restricted,
        );
        assert!(bad2.is_err());

        // uniform without machine speeds
        let bad3 = Instance::new(1, 1, vec![rint(2)], vec![cap(1, 1, 1)], Variant::Uniform);
        assert!(bad3.is_err());
    }

    fn two_job_instance() -> Instance {
        Instance::new(
            2,
            2,
            vec![rint(1), rint(1), rint(1), rint(1)],
            vec![cap(1, 1, 2), cap(2, 1, 2)],
            Variant::Unrelated,
        )
        .unwrap()
    }

    #[test]
    fn verify_accepts_a_clean_schedule() {
        let inst = two_job_instance();
        let mut jobs = BTreeMap::new();
        jobs.insert(
            0,
            JobPlacement {
                machines: vec![0],
                start: rint(0),
                completion: rint(1),
            },
        );
        jobs.insert(
            1,
            JobPlacement {
                machines: vec![0, 1],
                start: rint(1),
                completion: rint(2),
            },
        );
        let sched = Schedule {
            jobs,
            makespan: rint(2),
        };
        assert_eq!(verify_schedule(&inst, &sched), vec![]);
        let (mk, wsum) = objectives(&inst, &sched);
        assert_eq!(mk, rint(2));
        assert_eq!(wsum, rint(3));
    }

    #[test]
    fn verify_flags_overlap_and_duration() {
        let inst = two_job_instance();
        let mut jobs = BTreeMap::new();
        jobs.insert(
            0,
            JobPlacement {
                machines: vec![0],
                start: rint(0),
                completion: rint(1),
            },
        );
        jobs.insert(
            1,
            JobPlacement {
                machines: vec![0],
                start: rat(1, 2),
                completion: rat(5, 2),
            },
        );
        let sched = Schedule {
            jobs,
            makespan: rat(5, 2),
        };
        let violations = verify_schedule(&inst, &sched);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::Overlap { machine: 0, .. })));
        assert!(!violations
            .iter()
            .any(|v| matches!(v, Violation::WrongDuration { .. })));

        // shrink job 1's window so the duration is off
        let mut sched2 = sched.clone();
        sched2.jobs.get_mut(&1).unwrap().completion = rint(1);
        sched2.makespan = rint(1);
        let v2 = verify_schedule(&inst, &sched2);
        assert!(v2.iter().any(|v| matches!(v, Violation::WrongDuration { job: 1, .. })));
    }

    #[test]
    fn verify_flags_missing_and_zero_speed() {
        let mut inst = two_job_instance();
        inst.speeds[1] = rint(0); // machine 0 can no longer run job 1
        inst.validate().unwrap();
        let mut jobs = BTreeMap::new();
        jobs.insert(
            1,
            JobPlacement {
                machines: vec![0],
                start: rint(0),
                completion: rint(2),
            },
        );
        let sched = Schedule {
            jobs,
            makespan: rint(2),
        };
        let violations = verify_schedule(&inst, &sched);
        assert!(violations.contains(&Violation::MissingJob { job: 0 }));
        assert!(violations.contains(&Violation::ZeroSpeedMachine { job: 1, machine: 0 }));
    }

    #[test]
    fn empty_instance_has_zero_objectives() {
        let inst = Instance::new(1, 0, vec![], vec![], Variant::Unrelated).unwrap();
        let sched = Schedule::empty();
        assert_eq!(verify_schedule(&inst, &sched), vec![]);
        assert_eq!(objectives(&inst, &sched), (rint(0), rint(0)));
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = two_job_instance()
            .with_weights(vec![rint(1), rint(3)])
            .unwrap();
        let text = instance_to_json(&inst);
        let back = instance_from_json(&text).unwrap();
        assert_eq!(back.machines, inst.machines);
        assert_eq!(back.speeds, inst.speeds);
        assert_eq!(back.functions, inst.functions);
        assert_eq!(back.weights, inst.weights);
        assert_eq!(back.variant, inst.variant);
    }

    #[test]
    fn schedule_json_round_trip_recomputes_completion() {
        let inst = two_job_instance();
        let mut jobs = BTreeMap::new();
        jobs.insert(
            0,
            JobPlacement {
                machines: vec![0, 1],
                start: rint(0),
                completion: rat(1, 2),
            },
        );
        jobs.insert(
            1,
            JobPlacement {
                machines: vec![1],
                start: rat(1, 2),
                completion: rat(5, 2),
            },
        );
        let sched = Schedule {
            jobs,
            makespan: rat(5, 2),
        };
        let text = schedule_to_json(&sched);
        let back = schedule_from_json(&inst, &text).unwrap();
        assert_eq!(back, sched);
        assert_eq!(verify_schedule(&inst, &back), vec![]);
    }

    #[test]
    fn uniform_instance_round_trips_with_machine_speeds() {
        let inst = Instance {
            machines: 2,
            jobs: 1,
            speeds: vec![rint(1), rint(2)],
            functions: vec![cap(2, 1, 1)],
            weights: None,
            p: PNorm::one(),
            variant: Variant::Uniform,
            machine_speeds: Some(vec![rint(1), rint(2)]),
        };
        inst.validate().unwrap();
        let back = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back.machine_speeds, inst.machine_speeds);
        assert_eq!(back.variant, Variant::Uniform);
    }
}
