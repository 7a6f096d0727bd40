//! Exhaustive reference solver for small instances. Enumerates every
//! machine-set assignment and every start order, placing jobs greedily at
//! the earliest moment their whole set is simultaneously free. Left-shifting
//! never hurts either objective, and an optimal schedule ordered by start
//! time survives it, so the enumeration always contains an optimum.
//!
//! Refuses instances beyond its budget rather than answering slowly or
//! wrongly.

use crate::model::{verify_schedule, Instance, PNorm, Schedule};
use crate::rational::Rat;
use num::Zero;
use std::fmt;

/// Hard ceilings for the enumeration. Combinations count machine-set
/// assignments times start orders.
#[derive(Clone, Debug)]
pub struct OracleBudget {
    pub max_jobs: usize,
    pub max_machines: usize,
    pub max_combos: u64,
}

impl Default for OracleBudget {
    fn default() -> OracleBudget {
        OracleBudget {
            max_jobs: 4,
            max_machines: 5,
            max_combos: 10_000_000,
        }
    }
}

/// The oracle declined; it never guesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverBudget(pub String);

impl fmt::Display for OverBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exhaustive search refused: {}", self.0)
    }
}

impl std::error::Error for OverBudget {}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub objective: Rat,
    pub schedule: Schedule,
    /// Combinations the budget accounted for.
    pub combos: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Objective {
    Makespan,
    WeightedCompletion,
}

/// Exact minimum makespan.
pub fn brute_force_makespan(
    inst: &Instance,
    budget: &OracleBudget,
) -> Result<OracleResult, OverBudget> {
    brute_force(inst, budget, Objective::Makespan)
}

/// Exact minimum total weighted completion time.
pub fn brute_force_weighted(
    inst: &Instance,
    budget: &OracleBudget,
) -> Result<OracleResult, OverBudget> {
    brute_force(inst, budget, Objective::WeightedCompletion)
}

/// Candidate machine sets for one job. Under the max-norm a set runs
/// exactly as fast as its best machine, so supersets only block machines
/// and singletons suffice; under finite norms every machine contributes
/// and all nonempty subsets stay in play.
fn candidate_sets(inst: &Instance, job: usize) -> Vec<Vec<usize>> {
    let eligible = inst.eligible_machines(job);
    match inst.p {
        PNorm::Infinity => eligible.into_iter().map(|i| vec![i]).collect(),
        PNorm::Finite(_) => {
            let mut out = Vec::with_capacity((1usize << eligible.len()) - 1);
            for mask in 1u32..(1 << eligible.len()) {
                out.push(
                    eligible
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1)
                        .map(|(_, &i)| i)
                        .collect(),
                );
            }
            out
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn brute_force(
    inst: &Instance,
    budget: &OracleBudget,
    objective: Objective,
) -> Result<OracleResult, OverBudget> {
    if inst.jobs > budget.max_jobs {
        return Err(OverBudget(format!(
            "{} jobs exceed the limit of {}",
            inst.jobs, budget.max_jobs
        )));
    }
    if inst.machines > budget.max_machines {
        return Err(OverBudget(format!(
            "{} machines exceed the limit of {}",
            inst.machines, budget.max_machines
        )));
    }
    let sets: Vec<Vec<Vec<usize>>> =
        (0..inst.jobs).map(|j| candidate_sets(inst, j)).collect();
    let mut combos: u128 = factorial(inst.jobs);
    for s in &sets {
        combos = combos.saturating_mul(s.len() as u128);
    }
    if combos > budget.max_combos as u128 {
        return Err(OverBudget(format!(
            "{combos} combinations exceed the limit of {}",
            budget.max_combos
        )));
    }

    // durations depend only on the chosen set; compute each once
    let durations: Vec<Vec<Rat>> = sets
        .iter()
        .enumerate()
        .map(|(j, options)| {
            options.iter().map(|s| inst.duration(j, s)).collect()
        })
        .collect();

    let weights: Vec<Rat> = (0..inst.jobs).map(|j| inst.weight(j)).collect();
    let mut best: Option<(Rat, Vec<(usize, Rat)>)> = None;
    let mut choice = vec![0usize; inst.jobs];
    let mut order: Vec<usize> = (0..inst.jobs).collect();
    loop {
        permute_orders(&mut order, 0, &mut |order| {
            place_and_score(
                inst, &sets, &durations, &weights, &choice, order, objective, &mut best,
            );
        });
        // mixed-radix step through the assignment space
        let mut pos = 0;
        loop {
            if pos == inst.jobs {
                let (objective, placed) = best.expect("at least one combination");
                let mut schedule = Schedule::empty();
                for (j, (set_idx, start)) in placed.iter().enumerate() {
                    let completion = start + &durations[j][*set_idx];
                    schedule.place(j, sets[j][*set_idx].clone(), start.clone(), completion);
                }
                debug_assert!(verify_schedule(inst, &schedule).is_empty());
                return Ok(OracleResult {
                    objective,
                    schedule,
                    combos: combos as u64,
                });
            }
            choice[pos] += 1;
            if choice[pos] < sets[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Visits all permutations of `order[at..]` in a deterministic sequence,
/// restoring the slice afterwards.
fn permute_orders(order: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == order.len() {
        visit(order);
        return;
    }
    for k in at..order.len() {
        order.swap(at, k);
        permute_orders(order, at + 1, visit);
        order.swap(at, k);
    }
}

/// Greedy left-shift placement of one assignment in one order, updating the
/// incumbent if strictly better. Keeps per-machine busy intervals so a job
/// can slot into a gap when its whole set fits there.
#[allow(clippy::too_many_arguments)]
fn place_and_score(
    inst: &Instance,
    sets: &[Vec<Vec<usize>>],
    durations: &[Vec<Rat>],
    weights: &[Rat],
    choice: &[usize],
    order: &[usize],
    objective: Objective,
    best: &mut Option<(Rat, Vec<(usize, Rat)>)>,
) {
    let mut busy: Vec<Vec<(Rat, Rat)>> = vec![Vec::new(); inst.machines];
    let mut placed: Vec<(usize, Rat)> = vec![(0, Rat::zero()); inst.jobs];
    let mut score = Rat::zero();
    for &j in order {
        let set = &sets[j][choice[j]];
        let d = &durations[j][choice[j]];
        let start = earliest_joint_slot(&busy, set, d);
        let end = &start + d;
        for &i in set {
            let at = busy[i].partition_point(|(s, _)| *s < start);
            busy[i].insert(at, (start.clone(), end.clone()));
        }
        match objective {
            Objective::Makespan => {
                if end > score {
                    score = end.clone();
                }
            }
            Objective::WeightedCompletion => score += &weights[j] * &end,
        }
        placed[j] = (choice[j], start);
        // both objectives only grow, so a partial tie is already hopeless
        if let Some((incumbent, _)) = best {
            if score >= *incumbent {
                return;
            }
        }
    }
    *best = Some((score, placed));
}

/// Earliest `t` with every machine of `set` idle over `[t, t + d)`.
fn earliest_joint_slot(busy: &[Vec<(Rat, Rat)>], set: &[usize], d: &Rat) -> Rat {
    let mut t = Rat::zero();
    'retry: loop {
        for &i in set {
            for (s, e) in &busy[i] {
                if *s < &t + d && t < *e {
                    t = e.clone();
                    continue 'retry;
                }
                if *s >= &t + d {
                    break;
                }
            }
        }
        return t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_gap_restricted, gen_gap_uniform, gen_random, RandomProfile};
    use crate::model::{ProcTimeFn, Variant};
    use crate::rational::{rat, rint};
    use num::One;

    #[test]
    fn restricted_family_needs_two() {
        let budget = OracleBudget::default();
        for k in [2usize, 3] {
            let r = brute_force_makespan(&gen_gap_restricted(k), &budget).unwrap();
            assert_eq!(r.objective, rint(2), "k = {k}");
            assert!(verify_schedule(&gen_gap_restricted(k), &r.schedule).is_empty());
        }
    }

    #[test]
    fn uniform_family_needs_two() {
        let budget = OracleBudget::default();
        let r = brute_force_makespan(&gen_gap_uniform(1), &budget).unwrap();
        assert_eq!(r.objective, rint(2));
    }

    #[test]
    fn refuses_oversized_instances() {
        let budget = OracleBudget::default();
        let err = brute_force_makespan(&gen_gap_uniform(2), &budget).unwrap_err();
        assert!(err.0.contains("jobs"));
        let tight = OracleBudget {
            max_combos: 10,
            ..OracleBudget::default()
        };
        let err = brute_force_makespan(&gen_gap_restricted(2), &tight).unwrap_err();
        assert!(err.0.contains("combinations"));
    }

    #[test]
    fn weighted_orders_heavy_jobs_first() {
        let f = ProcTimeFn::capped_inverse(Rat::one(), Rat::one()).unwrap();
        let inst = Instance::new(
            1,
            2,
            vec![rint(1), rint(1)],
            vec![f.clone(), f],
            Variant::Unrelated,
        )
        .unwrap()
        .with_weights(vec![rint(1), rint(2)])
        .unwrap();
        let r = brute_force_weighted(&inst, &OracleBudget::default()).unwrap();
        // heavy job first: 2*1 + 1*2 = 4 beats 1*1 + 2*2 = 5
        assert_eq!(r.objective, rint(4));
        assert_eq!(r.schedule.jobs[&1].start, Rat::zero());
    }

    #[test]
    fn max_norm_uses_singletons_only() {
        let f = ProcTimeFn::capped_inverse(rint(3), rat(1, 2)).unwrap();
        let inst = Instance::new(
            2,
            1,
            vec![rint(1), rint(3)],
            vec![f],
            Variant::Unrelated,
        )
        .unwrap()
        .with_p(PNorm::Infinity)
        .unwrap();
        let r = brute_force_makespan(&inst, &OracleBudget::default()).unwrap();
        assert_eq!(r.objective, rint(1));
        assert_eq!(r.combos, 2);
        assert_eq!(r.schedule.jobs[&0].machines, vec![1]);
    }

    #[test]
    fn placement_fills_gaps() {
        // forced sets: job 0 alone on machine 0, job 1 needs both, job 2
        // fits in machine 1's initial idle window
        let f1 = ProcTimeFn::capped_inverse(rint(1), rint(1)).unwrap();
        let inst = Instance::new(
            2,
            3,
            vec![
                rint(1),
                rint(1),
                rint(0),
                rint(0),
                rint(1),
                rint(1),
            ],
            vec![f1.clone(), f1.clone(), f1],
            Variant::Unrelated,
        )
        .unwrap();
        let sets = vec![vec![vec![0]], vec![vec![0, 1]], vec![vec![1]]];
        let durations: Vec<Vec<Rat>> = sets
            .iter()
            .enumerate()
            .map(|(j, options)| options.iter().map(|s| inst.duration(j, s)).collect())
            .collect();
        let weights = vec![Rat::one(); 3];
        let mut best = None;
        place_and_score(
            &inst,
            &sets,
            &durations,
            &weights,
            &[0, 0, 0],
            &[0, 1, 2],
            Objective::Makespan,
            &mut best,
        );
        let (makespan, placed) = best.unwrap();
        assert_eq!(makespan, rint(2));
        // job 1 waits for machine 0, job 2 backfills machine 1 at time 0
        assert_eq!(placed[1].1, rint(1));
        assert_eq!(placed[2].1, rint(0));
    }

    #[test]
    fn relabeling_jobs_keeps_the_optimum() {
        for seed in 0..6u64 {
            let inst = gen_random(
                seed,
                &RandomProfile {
                    max_machines: 3,
                    max_jobs: 3,
                    variant: Variant::Unrelated,
                    weighted: false,
                },
            );
            let r = brute_force_makespan(&inst, &OracleBudget::default()).unwrap();
            let reversed: Vec<usize> = (0..inst.jobs).rev().collect();
            let (flipped, _) = inst.restrict_jobs(&reversed);
            let r2 = brute_force_makespan(&flipped, &OracleBudget::default()).unwrap();
            assert_eq!(r.objective, r2.objective, "seed {seed}");
        }
    }

    #[test]
    fn empty_instance_has_zero_makespan() {
        let inst = Instance::new(1, 0, vec![], vec![], Variant::Unrelated).unwrap();
        let r = brute_force_makespan(&inst, &OracleBudget::default()).unwrap();
        assert_eq!(r.objective, Rat::zero());
        assert!(r.schedule.jobs.is_empty());
    }
}
