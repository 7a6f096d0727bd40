//! Total weighted completion time via interval relaxation. Jobs are priced
//! by the geometric interval their fractional completion falls into, folded
//! into per-interval makespan subproblems, and the rounded subschedules run
//! back to back in interval order.

use crate::lp::{build_interval_lp, build_lp, solve_extreme_point, solve_interval_lp};
use crate::model::{verify_schedule, Instance, Schedule};
use crate::rational::{dec12, fmt_rat, pow_int, rat, Rat};
use crate::rounding::assemble_schedule;
use crate::search::{check_scheme, round_extreme_point, serial_singles_bound, Scheme};
use num::{One, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightedError {
    /// Some duration can drop below 1, breaking the first interval.
    ShortDuration { job: usize, duration: Rat },
    /// The scheme cannot round this instance (wrong variant or norm).
    Scheme(crate::search::SearchError),
}

impl fmt::Display for WeightedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightedError::ShortDuration { job, duration } => write!(
                f,
                "job {job} can finish in {} < 1; rescale the time unit \
                 (multiply every duration) so all durations are at least 1",
                dec12(duration)
            ),
            WeightedError::Scheme(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for WeightedError {}

/// One row of the per-job account.
#[derive(Clone, Debug)]
pub struct JobReport {
    pub job: usize,
    /// Fractional completion under the interval relaxation.
    pub fractional: Rat,
    /// Interval the job was folded into.
    pub bucket: usize,
    /// Completion in the final schedule.
    pub completion: Rat,
    /// completion / fractional.
    pub ratio: Rat,
}

#[derive(Clone, Debug)]
pub struct WeightedOutcome {
    pub schedule: Schedule,
    /// Total weighted completion time of the schedule.
    pub objective: Rat,
    /// Optimum of the interval relaxation, a lower-bound proxy.
    pub lp_objective: Rat,
    /// Proven per-job factor: scheme factor times the folding cushion.
    pub factor: Rat,
    pub report: Vec<JobReport>,
}

/// Factor lost by folding and concatenation on top of the rounding scheme:
/// `alpha^2/(alpha-1) * tau^2/(tau-1)`, 16 at the defaults.
pub fn folding_cushion(tau: &Rat, alpha: &Rat) -> Rat {
    let a2 = alpha * alpha / (alpha - Rat::one());
    let t2 = tau * tau / (tau - Rat::one());
    a2 * t2
}

/// Minimizes total weighted completion time with the default geometry
/// (`tau` = `alpha` = 2) and the given rounding scheme.
pub fn solve_weighted(inst: &Instance, scheme: Scheme) -> Result<WeightedOutcome, WeightedError> {
    solve_weighted_with(inst, scheme, &rat(2, 1), &rat(2, 1))
}

pub fn solve_weighted_with(
    inst: &Instance,
    scheme: Scheme,
    tau: &Rat,
    alpha: &Rat,
) -> Result<WeightedOutcome, WeightedError> {
    assert!(tau > &Rat::one() && alpha > &Rat::one());
    check_scheme(inst, scheme).map_err(WeightedError::Scheme)?;
    let weights: Vec<Rat> = (0..inst.jobs).map(|j| inst.weight(j)).collect();
    let factor = scheme.factor(&inst.p) * folding_cushion(tau, alpha);
    if inst.jobs == 0 {
        return Ok(WeightedOutcome {
            schedule: Schedule::empty(),
            objective: Rat::zero(),
            lp_objective: Rat::zero(),
            factor,
            report: Vec::new(),
        });
    }

    // the first interval [1, tau) must catch every completion
    for j in 0..inst.jobs {
        let d = inst.duration(j, &inst.eligible_machines(j));
        if d < Rat::one() {
            return Err(WeightedError::ShortDuration { job: j, duration: d });
        }
    }
    // topping the ladder at the serial single-machine bound keeps the last
    // level feasible outright: every job has a fast machine up there
    let upper = serial_singles_bound(inst);

    let interval = build_interval_lp(inst, &weights, tau, &upper);
    let sol = solve_interval_lp(&interval)
        .expect("singleton serialization fits the last interval");

    // bucket of job j: the interval holding alpha times its fractional
    // completion; can exceed the ladder by one, with an empty tail there
    let fractional: Vec<Rat> = (0..inst.jobs)
        .map(|j| interval.fractional_completion(&sol.x, j))
        .collect();
    let mut bucket = vec![0usize; inst.jobs];
    for j in 0..inst.jobs {
        let scaled = alpha * &fractional[j];
        let mut b = 1usize;
        let mut power = tau.clone();
        while power <= scaled {
            power *= tau;
            b += 1;
        }
        bucket[j] = b;
        debug_assert!(b <= interval.levels + 1, "bucket beyond the ladder tail");
    }

    // mass above the bucket is scarce; folding scales by at most
    // alpha/(alpha-1)
    let mut tail = vec![Rat::zero(); inst.jobs];
    for ((_, j, l), v) in &sol.x {
        if *l > bucket[*j] {
            tail[*j] += v;
        }
    }
    for j in 0..inst.jobs {
        assert!(
            &tail[j] * alpha <= Rat::one(),
            "interval tail of job {j} too heavy"
        );
    }

    let max_bucket = bucket.iter().copied().max().expect("jobs exist");
    let mut schedule = Schedule::empty();
    let mut offset = Rat::zero();
    for level in 1..=max_bucket {
        let members: Vec<usize> = (0..inst.jobs).filter(|j| bucket[*j] == level).collect();
        if members.is_empty() {
            continue;
        }
        let (sub, back) = inst.restrict_jobs(&members);
        let level_target =
            alpha / (alpha - Rat::one()) * pow_int(tau, level as i64);

        // fold the prefix mass into a feasibility witness for the level
        // target and check it row by row before trusting the re-solve
        let sub_lp = build_lp(&sub, &level_target)
            .expect("bucketed jobs can finish by the level target");
        let mut machine_load = vec![Rat::zero(); sub.machines];
        for (local, &orig) in back.iter().enumerate() {
            let scale = (Rat::one() - &tail[orig]).recip();
            let mut mass = Rat::zero();
            for ((i, j, l), v) in &sol.x {
                if *j == orig && *l <= bucket[orig] {
                    let z = v * &scale;
                    machine_load[*i] += &sub_lp.coeffs[&(*i, local)].value * &z;
                    mass += z;
                }
            }
            assert!(mass.is_one(), "folded mass of job {orig} must be 1");
        }
        for (i, load) in machine_load.iter().enumerate() {
            assert!(
                load <= &level_target,
                "folded witness overloads machine {i} at level {level}"
            );
        }

        let fa = solve_extreme_point(&sub_lp)
            .expect("witnessed level target must be feasible");
        let rounded = round_extreme_point(&sub, &fa, scheme);
        let piece = assemble_schedule(&sub, &rounded);
        debug_assert!(verify_schedule(&sub, &piece).is_empty());
        for (local, placement) in &piece.jobs {
            schedule.place(
                back[*local],
                placement.machines.clone(),
                &offset + &placement.start,
                &offset + &placement.completion,
            );
        }
        offset += &piece.makespan;
    }

    let mut objective = Rat::zero();
    let mut report = Vec::with_capacity(inst.jobs);
    for j in 0..inst.jobs {
        let completion = schedule.jobs[&j].completion.clone();
        objective += &weights[j] * &completion;
        let ratio = &completion / &fractional[j];
        assert!(
            completion <= &factor * &fractional[j],
            "job {j} finished at {} > {} times its fractional completion {}",
            dec12(&completion),
            fmt_rat(&factor),
            dec12(&fractional[j])
        );
        report.push(JobReport {
            job: j,
            fractional: fractional[j].clone(),
            bucket: bucket[j],
            completion,
            ratio,
        });
    }
    let defects = verify_schedule(inst, &schedule);
    assert!(defects.is_empty(), "folded schedule failed checks: {defects:?}");
    Ok(WeightedOutcome {
        schedule,
        objective,
        lp_objective: sol.objective,
        factor,
        report,
    })
}

/// Per-job account as CSV; every rational gets an exact column and a
/// 12-digit decimal column.
pub fn report_csv(out: &WeightedOutcome) -> String {
    let mut text = String::from(
        "job,fractional,fractional_dec,bucket,completion,completion_dec,ratio,ratio_dec\n",
    );
    for row in &out.report {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.job,
            fmt_rat(&row.fractional),
            dec12(&row.fractional),
            row.bucket,
            fmt_rat(&row.completion),
            dec12(&row.completion),
            fmt_rat(&row.ratio),
            dec12(&row.ratio),
        ));
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_random, RandomProfile};
    use crate::model::{ProcTimeFn, Variant};
    use crate::oracle::{brute_force_weighted, OracleBudget};
    use crate::rational::rint;

    fn unit_job() -> ProcTimeFn {
        ProcTimeFn::capped_inverse(rint(1), rint(1)).unwrap()
    }

    #[test]
    fn single_unit_job_finishes_at_one() {
        let inst = Instance::new(
            1,
            1,
            vec![rint(1)],
            vec![unit_job()],
            Variant::Unrelated,
        )
        .unwrap();
        let out = solve_weighted(&inst, Scheme::Filtered).unwrap();
        assert_eq!(out.objective, rint(1));
        assert_eq!(out.lp_objective, rint(1));
        assert_eq!(out.report[0].bucket, 2);
        assert_eq!(out.report[0].ratio, rint(1));
    }

    #[test]
    fn short_durations_are_rejected_with_guidance() {
        let f = ProcTimeFn::capped_inverse(rint(1), rat(1, 4)).unwrap();
        let inst = Instance::new(
            2,
            1,
            vec![rint(4), rint(4)],
            vec![f],
            Variant::Unrelated,
        )
        .unwrap();
        let err = solve_weighted(&inst, Scheme::Filtered).unwrap_err();
        match &err {
            WeightedError::ShortDuration { job, duration } => {
                assert_eq!(*job, 0);
                assert_eq!(*duration, rat(1, 4));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err.to_string().contains("rescale"));
    }

    #[test]
    fn heavy_jobs_land_in_early_buckets() {
        // one short heavy job, one long light one, a single machine
        let short = unit_job();
        let long = ProcTimeFn::capped_inverse(rint(8), rint(8)).unwrap();
        let inst = Instance::new(
            1,
            2,
            vec![rint(1), rint(1)],
            vec![short, long],
            Variant::Unrelated,
        )
        .unwrap()
        .with_weights(vec![rint(8), rint(1)])
        .unwrap();
        let out = solve_weighted(&inst, Scheme::Filtered).unwrap();
        assert!(out.report[0].bucket < out.report[1].bucket);
        assert!(out.schedule.jobs[&0].completion < out.schedule.jobs[&1].completion);
        assert!(verify_schedule(&inst, &out.schedule).is_empty());
    }

    #[test]
    fn objective_stays_within_the_factor_of_the_relaxation() {
        for seed in 0..12u64 {
            let inst = gen_random(
                seed,
                &RandomProfile {
                    max_machines: 3,
                    max_jobs: 3,
                    variant: Variant::Unrelated,
                    weighted: true,
                },
            );
            let out = solve_weighted(&inst, Scheme::Filtered).unwrap();
            assert!(
                out.objective <= &out.factor * &out.lp_objective,
                "seed {seed}"
            );
            let oracle = brute_force_weighted(&inst, &OracleBudget::default()).unwrap();
            assert!(out.objective >= oracle.objective, "seed {seed}");
        }
    }

    #[test]
    fn csv_report_has_exact_and_decimal_columns() {
        let inst = Instance::new(
            1,
            1,
            vec![rint(2)],
            vec![ProcTimeFn::capped_inverse(rint(3), rint(1)).unwrap()],
            Variant::Unrelated,
        )
        .unwrap();
        let out = solve_weighted(&inst, Scheme::Filtered).unwrap();
        let text = report_csv(&out);
        assert!(text.starts_with("job,fractional"));
        assert!(text.contains("3/2"));
        assert!(text.contains("1.5"));
    }

    #[test]
    fn cushion_is_sixteen_at_defaults() {
        assert_eq!(folding_cushion(&rint(2), &rint(2)), rint(16));
    }
}
