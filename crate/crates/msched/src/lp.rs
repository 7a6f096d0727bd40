//! Assignment relaxation for a target makespan `C`.
//!
//! For a guess `C`, machine `i` counts job `j` as *fast* when running `j`
//! alone finishes within `C`, contributing its actual duration; otherwise the
//! pair is *slow* and contributes work density based on the critical speed,
//! the least integer speed at which the job finishes within `C`. Fractional
//! assignments must cover every job while keeping each machine's total at
//! most `C`. Any schedule with makespan `C` induces a feasible point, so an
//! exact infeasibility answer is a valid lower-bound certificate.
//!
//! The interval-indexed variant replaces the single deadline with geometric
//! thresholds `tau^1 .. tau^L` and prices each job by the interval in which
//! it completes; it drives the weighted completion-time pipeline.

use crate::model::{Instance, PNorm, ProcTimeFn};
use crate::rational::{dec12, pow_int, pow_rat, Rat};
use crate::simplex::{self, LinearProgram, Row, Sense, SimplexOutcome};
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Critical-speed search gives up beyond this integer speed.
pub const GAMMA_CAP: u64 = 1 << 62;

/// Least integer speed `q >= 1` with `f(q) <= bound`, or `None` when even
/// `GAMMA_CAP` is too slow. Galloping doubling plus binary search; every
/// comparison is exact, so boundary targets resolve correctly.
pub fn critical_speed(f: &ProcTimeFn, bound: &Rat) -> Option<u64> {
    let le = |q: u64| f.le_at(&Rat::from_integer(q.into()), bound);
    if le(1) {
        return Some(1);
    }
    let mut lo = 1u64; // f(lo) > bound
    let mut hi = 2u64;
    while !le(hi) {
        if hi >= GAMMA_CAP {
            return None;
        }
        lo = hi;
        hi = (hi * 2).min(GAMMA_CAP);
    }
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if le(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Why a relaxation could not even be built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpError {
    /// No integer speed lets this job finish within the target, so no
    /// schedule of that makespan exists.
    NoCriticalSpeed { job: usize },
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::NoCriticalSpeed { job } => {
                write!(f, "job {job} cannot meet the target at any integer speed")
            }
        }
    }
}

impl std::error::Error for LpError {}

/// Fast/slow class and machine-row coefficient of one runnable pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCoeff {
    /// True when the machine alone finishes the job within the target.
    pub fast: bool,
    pub value: Rat,
}

/// The relaxation for one target, ready to solve.
#[derive(Clone, Debug)]
pub struct LpRelaxation {
    pub target: Rat,
    pub machines: usize,
    pub jobs: usize,
    pub gamma: Vec<u64>,
    pub coeffs: BTreeMap<(usize, usize), PairCoeff>,
    /// Column order of the program: `(machine, job)` per variable.
    pub columns: Vec<(usize, usize)>,
    pub program: LinearProgram,
}

/// An extreme-point solution of the relaxation.
#[derive(Clone, Debug)]
pub struct FractionalAssignment {
    pub target: Rat,
    pub machines: usize,
    pub jobs: usize,
    pub gamma: Vec<u64>,
    /// Class and coefficient for every runnable pair, support or not.
    pub coeffs: BTreeMap<(usize, usize), PairCoeff>,
    /// Strictly positive assignment values only.
    pub x: BTreeMap<(usize, usize), Rat>,
}

impl FractionalAssignment {
    /// Machine load under the relaxation's coefficients.
    pub fn machine_load(&self, machine: usize) -> Rat {
        self.x
            .iter()
            .filter(|((i, _), _)| *i == machine)
            .map(|((i, j), v)| &self.coeffs[&(*i, *j)].value * v)
            .sum()
    }

    pub fn job_mass(&self, job: usize) -> Rat {
        self.x
            .iter()
            .filter(|((_, j), _)| *j == job)
            .map(|(_, v)| v.clone())
            .sum()
    }

    /// Rows of the relaxation re-checked exactly against this point.
    pub fn rows_satisfied(&self) -> bool {
        (0..self.jobs).all(|j| self.job_mass(j).is_one())
            && (0..self.machines).all(|i| self.machine_load(i) <= self.target)
    }

    /// The support graph (machines + jobs as nodes, support pairs as edges)
    /// must be a pseudoforest: each component has at most one cycle, i.e.
    /// no more edges than nodes.
    pub fn support_is_pseudoforest(&self) -> bool {
        let n = self.machines + self.jobs;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, a: usize) -> usize {
            if parent[a] != a {
                let r = find(parent, parent[a]);
                parent[a] = r;
            }
            parent[a]
        }
        for &(i, j) in self.x.keys() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, self.machines + j));
            if a != b {
                parent[a] = b;
            }
        }
        let mut nodes: BTreeMap<usize, usize> = BTreeMap::new();
        let mut edges: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            *nodes.entry(r).or_insert(0) += 1;
        }
        for &(i, j) in self.x.keys() {
            let _ = j;
            let r = find(&mut parent, i);
            *edges.entry(r).or_insert(0) += 1;
        }
        edges.iter().all(|(root, e)| e <= &nodes[root])
    }
}

pub(crate) fn norm_exponent(p: &PNorm) -> (i64, u32) {
    match p {
        PNorm::Finite(p) => {
            let n = p.numer().to_string().parse::<i64>().expect("validated");
            let d = p.denom().to_string().parse::<u32>().expect("validated");
            (n, d)
        }
        PNorm::Infinity => panic!("relaxations need a finite norm"),
    }
}

fn build_with_norm(
    instance: &Instance,
    target: &Rat,
    p: &PNorm,
) -> Result<LpRelaxation, LpError> {
    let mut gamma = Vec::with_capacity(instance.jobs);
    for j in 0..instance.jobs {
        match critical_speed(&instance.functions[j], target) {
            Some(g) => gamma.push(g),
            None => return Err(LpError::NoCriticalSpeed { job: j }),
        }
    }
    let (pn, pd) = norm_exponent(p);
    let linear = pn == 1 && pd == 1;
    let mut coeffs = BTreeMap::new();
    let mut columns = Vec::new();
    for j in 0..instance.jobs {
        for i in 0..instance.machines {
            let s = instance.speed(i, j);
            if s.is_zero() {
                continue;
            }
            let f = &instance.functions[j];
            let fast = f.le_at(s, target);
            let g = Rat::from_integer(gamma[j].into());
            let ratio = &g / s;
            let scaled = if linear {
                ratio
            } else {
                pow_rat(&ratio, pn, pd)
            };
            let work_line = f.eval(&g) * scaled;
            // a fast machine whose speed still sits below the integer
            // critical speed pays the critical work rate, not its own
            // duration; coefficients never drop under the work line, which
            // the exchange and clustering arguments all lean on
            let value = if fast {
                let duration = f.eval(s);
                if duration >= work_line {
                    duration
                } else {
                    work_line
                }
            } else {
                work_line
            };
            coeffs.insert((i, j), PairCoeff { fast, value });
            columns.push((i, j));
        }
    }
    let var_of: BTreeMap<(usize, usize), usize> = columns
        .iter()
        .enumerate()
        .map(|(v, &pair)| (pair, v))
        .collect();
    let mut rows = Vec::new();
    for j in 0..instance.jobs {
        let coeffs_row: Vec<(usize, Rat)> = (0..instance.machines)
            .filter_map(|i| var_of.get(&(i, j)).map(|&v| (v, Rat::one())))
            .collect();
        rows.push(Row {
            coeffs: coeffs_row,
            sense: Sense::Eq,
            rhs: Rat::one(),
        });
    }
    for i in 0..instance.machines {
        let coeffs_row: Vec<(usize, Rat)> = (0..instance.jobs)
            .filter_map(|j| {
                var_of
                    .get(&(i, j))
                    .map(|&v| (v, coeffs[&(i, j)].value.clone()))
            })
            .collect();
        rows.push(Row {
            coeffs: coeffs_row,
            sense: Sense::Le,
            rhs: target.clone(),
        });
    }
    let num_vars = columns.len();
    Ok(LpRelaxation {
        target: target.clone(),
        machines: instance.machines,
        jobs: instance.jobs,
        gamma,
        coeffs,
        columns,
        program: LinearProgram {
            num_vars,
            rows,
            objective: vec![],
        },
    })
}

/// Relaxation with plain speed summation.
pub fn build_lp(instance: &Instance, target: &Rat) -> Result<LpRelaxation, LpError> {
    build_with_norm(instance, target, &PNorm::one())
}

/// Relaxation for p-norm speed aggregation: slow pairs are charged
/// `f(gamma) * (gamma / s)^p`. Requires finite `p >= 1`.
pub fn build_lp_pnorm(
    instance: &Instance,
    target: &Rat,
    p: &PNorm,
) -> Result<LpRelaxation, LpError> {
    build_with_norm(instance, target, p)
}

/// Solves the relaxation to a basic feasible point. `None` means the
/// relaxation is exactly infeasible at its target.
pub fn solve_extreme_point(lp: &LpRelaxation) -> Option<FractionalAssignment> {
    match simplex::solve(&lp.program) {
        SimplexOutcome::Infeasible { .. } => None,
        SimplexOutcome::Unbounded => unreachable!("feasibility program cannot be unbounded"),
        SimplexOutcome::Optimal { x, .. } => {
            let mut support = BTreeMap::new();
            for (v, value) in x.into_iter().enumerate() {
                if value.is_positive() {
                    support.insert(lp.columns[v], value);
                }
            }
            let fa = FractionalAssignment {
                target: lp.target.clone(),
                machines: lp.machines,
                jobs: lp.jobs,
                gamma: lp.gamma.clone(),
                coeffs: lp.coeffs.clone(),
                x: support,
            };
            debug_assert!(fa.rows_satisfied(), "solver returned an invalid point");
            debug_assert!(
                fa.support_is_pseudoforest(),
                "extreme point support must be a pseudoforest"
            );
            debug_assert!(fa.x.len() <= fa.jobs + fa.machines);
            Some(fa)
        }
    }
}

// ---------------------------------------------------------------------------
// Interval-indexed relaxation for weighted completion times.

/// Relaxation over geometric deadlines `tau^1 .. tau^L`.
#[derive(Clone, Debug)]
pub struct IntervalLp {
    pub tau: Rat,
    pub levels: usize,
    pub machines: usize,
    pub jobs: usize,
    /// `thresholds[l-1] = tau^l`.
    pub thresholds: Vec<Rat>,
    /// Column order: `(machine, job, level)` with levels starting at 1.
    pub columns: Vec<(usize, usize, usize)>,
    /// Machine-row coefficient of pair `(machine, job)` priced at each level:
    /// key `(machine, job, level)`, meaningful when the job can finish by
    /// `tau^level` at all.
    pub coeffs: BTreeMap<(usize, usize, usize), PairCoeff>,
    pub program: LinearProgram,
}

/// Optimal fractional solution of the interval relaxation.
#[derive(Clone, Debug)]
pub struct IntervalSolution {
    pub x: BTreeMap<(usize, usize, usize), Rat>,
    pub objective: Rat,
}

impl IntervalLp {
    /// Fractional completion time of a job under a solution.
    pub fn fractional_completion(&self, x: &BTreeMap<(usize, usize, usize), Rat>, job: usize) -> Rat {
        let mut total = Rat::zero();
        for ((_, j, l), v) in x {
            if *j == job {
                total += pow_int(&self.tau, (*l - 1) as i64) * v;
            }
        }
        total
    }
}

/// Builds the interval relaxation. `upper` must dominate some schedule's
/// makespan (the serialized bound works); durations must be at least 1 so
/// that the first interval `[1, tau)` catches every completion.
pub fn build_interval_lp(
    instance: &Instance,
    weights: &[Rat],
    tau: &Rat,
    upper: &Rat,
) -> IntervalLp {
    assert!(tau > &Rat::one(), "interval base must exceed 1");
    assert!(instance.p.is_one(), "interval relaxation uses plain speed sums");
    assert_eq!(weights.len(), instance.jobs);
    let mut levels = 0usize;
    let mut thresholds = Vec::new();
    let mut power = Rat::one();
    loop {
        power *= tau;
        levels += 1;
        thresholds.push(power.clone());
        if power > *upper {
            break;
        }
        assert!(levels < 10_000, "interval ladder exploded; check the upper bound");
    }

    // gamma[(j, l)] when job j can finish by tau^l somewhere
    let mut gamma: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for j in 0..instance.jobs {
        for (lidx, threshold) in thresholds.iter().enumerate() {
            if let Some(g) = critical_speed(&instance.functions[j], threshold) {
                gamma.insert((j, lidx + 1), g);
            }
        }
    }

    let mut columns = Vec::new();
    let mut coeffs = BTreeMap::new();
    for l in 1..=levels {
        for j in 0..instance.jobs {
            if !gamma.contains_key(&(j, l)) {
                continue;
            }
            for i in 0..instance.machines {
                if instance.speed(i, j).is_positive() {
                    columns.push((i, j, l));
                }
            }
        }
    }
    for l in 1..=levels {
        for j in 0..instance.jobs {
            let g = match gamma.get(&(j, l)) {
                Some(g) => *g,
                None => continue,
            };
            let threshold = &thresholds[l - 1];
            let f = &instance.functions[j];
            for i in 0..instance.machines {
                let s = instance.speed(i, j);
                if s.is_zero() {
                    continue;
                }
                let fast = f.le_at(s, threshold);
                let gr = Rat::from_integer(g.into());
                let work_line = f.eval(&gr) * &gr / s;
                // same work-line floor as the single-target relaxation
                let value = if fast {
                    let duration = f.eval(s);
                    if duration >= work_line {
                        duration
                    } else {
                        work_line
                    }
                } else {
                    work_line
                };
                coeffs.insert((i, j, l), PairCoeff { fast, value });
            }
        }
    }

    let var_of: BTreeMap<(usize, usize, usize), usize> = columns
        .iter()
        .enumerate()
        .map(|(v, &key)| (key, v))
        .collect();
    let mut rows = Vec::new();
    for j in 0..instance.jobs {
        let coeffs_row: Vec<(usize, Rat)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (_, jj, _))| *jj == j)
            .map(|(v, _)| (v, Rat::one()))
            .collect();
        assert!(
            !coeffs_row.is_empty(),
            "job {j} cannot finish by the last threshold; raise the upper bound"
        );
        rows.push(Row {
            coeffs: coeffs_row,
            sense: Sense::Eq,
            rhs: Rat::one(),
        });
    }
    // prefix constraints: everything assigned to machine i by level l,
    // priced at level l, fits into tau^l
    for i in 0..instance.machines {
        for l in 1..=levels {
            let mut coeffs_row = Vec::new();
            for j in 0..instance.jobs {
                let price = match coeffs.get(&(i, j, l)) {
                    Some(c) => c.value.clone(),
                    None => continue,
                };
                for lp in 1..=l {
                    if let Some(&v) = var_of.get(&(i, j, lp)) {
                        coeffs_row.push((v, price.clone()));
                    }
                }
            }
            rows.push(Row {
                coeffs: coeffs_row,
                sense: Sense::Le,
                rhs: thresholds[l - 1].clone(),
            });
        }
    }
    let objective: Vec<Rat> = columns
        .iter()
        .map(|(_, j, l)| &weights[*j] * pow_int(tau, (*l - 1) as i64))
        .collect();
    let num_vars = columns.len();
    IntervalLp {
        tau: tau.clone(),
        levels,
        machines: instance.machines,
        jobs: instance.jobs,
        thresholds,
        columns,
        coeffs,
        program: LinearProgram {
            num_vars,
            rows,
            objective,
        },
    }
}

/// Minimizes the fractional weighted completion objective.
pub fn solve_interval_lp(lp: &IntervalLp) -> Option<IntervalSolution> {
    match simplex::solve(&lp.program) {
        SimplexOutcome::Infeasible { .. } => None,
        SimplexOutcome::Unbounded => unreachable!("objective is nonnegative"),
        SimplexOutcome::Optimal { x, objective, .. } => {
            let mut support = BTreeMap::new();
            for (v, value) in x.into_iter().enumerate() {
                if value.is_positive() {
                    support.insert(lp.columns[v], value);
                }
            }
            Some(IntervalSolution {
                x: support,
                objective,
            })
        }
    }
}

/// Plain-text dump of a program in LP format for external debugging.
/// Rationals are rendered as 12-digit decimals, so the dump is a close
/// approximation, not an exact artifact.
pub fn program_to_lp_text(program: &LinearProgram, name_of: impl Fn(usize) -> String) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut wrote = false;
    for (v, c) in program.objective.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let sign = if c.is_negative() { "-" } else { "+" };
        let _ = write!(out, " {} {} {}", sign, dec12(&c.abs()), name_of(v));
        wrote = true;
    }
    if !wrote {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (r, row) in program.rows.iter().enumerate() {
        let _ = write!(out, " c{r}:");
        if row.coeffs.is_empty() {
            out.push_str(" 0");
        }
        for (v, c) in &row.coeffs {
            let sign = if c.is_negative() { "-" } else { "+" };
            let _ = write!(out, " {} {} {}", sign, dec12(&c.abs()), name_of(*v));
        }
        let op = match row.sense {
            Sense::Eq => "=",
            Sense::Le => "<=",
        };
        let _ = writeln!(out, " {op} {}", dec12(&row.rhs));
    }
    out.push_str("End\n");
    out
}
