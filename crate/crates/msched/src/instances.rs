//! Instance constructions: lower-bound families with known thresholds,
//! the embedding of classical fixed-time instances, and seeded random
//! instances for randomized suites.

use crate::model::{Instance, ModelError, ProcTimeFn, Variant};
use crate::rational::{fmt_rat, pow_int, rat, rint, Rat};
use num::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ratio of consecutive Fibonacci numbers F(26)/F(25), within 2e-10 of the
/// golden ratio. Keeps the unrelated family exactly rational.
pub fn golden_approx() -> Rat {
    rat(121393, 75025)
}

fn steep() -> ProcTimeFn {
    ProcTimeFn::capped_inverse(rint(2), rint(1)).expect("valid parameters")
}

/// `k` identical jobs needing two units of work (duration floor 1), one
/// dedicated unit machine per job plus `k-1` pool machines open to all.
/// The relaxation turns feasible exactly at `2k/(2k-1)` while every real
/// schedule needs 2.
pub fn gen_gap_restricted(k: usize) -> Instance {
    assert!(k >= 1);
    let machines = 2 * k - 1;
    let mut speeds = vec![Rat::zero(); machines * k];
    for j in 0..k {
        speeds[j * k + j] = Rat::one();
        for i in k..machines {
            speeds[i * k + j] = Rat::one();
        }
    }
    let functions = vec![steep(); k];
    Instance::new(machines, k, speeds, functions, Variant::Restricted)
        .expect("construction is valid")
}

/// `2k+1` identical two-unit jobs on `2k` unit machines and `k` double-speed
/// machines. The relaxation turns feasible exactly at `(2k+1)/(2k)` while
/// every real schedule needs 2.
pub fn gen_gap_uniform(k: usize) -> Instance {
    assert!(k >= 1);
    let jobs = 2 * k + 1;
    let mut machine_speeds = vec![Rat::one(); 2 * k];
    machine_speeds.extend(vec![rint(2); k]);
    let functions = vec![steep(); jobs];
    Instance::new_uniform(machine_speeds, jobs, functions).expect("construction is valid")
}

/// `2k` paired jobs plus one long job. Group machine `g` runs its pair
/// `{2g, 2g+1}` fast and the long job at unit speed; each paired job also
/// has a slow dedicated machine. The relaxation is feasible at `1 + 1/k`
/// while every real schedule needs about one plus the golden ratio.
pub fn gen_gap_unrelated(k: usize) -> Instance {
    assert!(k >= 1);
    let phi = golden_approx();
    let jobs = 2 * k + 1;
    let machines = 3 * k;
    let long_job = 2 * k;
    let mut speeds = vec![Rat::zero(); machines * jobs];
    for g in 0..k {
        speeds[g * jobs + 2 * g] = rint(2) / &phi;
        speeds[g * jobs + 2 * g + 1] = rint(2) / &phi;
        speeds[g * jobs + long_job] = Rat::one();
    }
    for j in 0..2 * k {
        speeds[(k + j) * jobs + j] = rint(2) - &phi;
    }
    let half_phi = &phi / rint(2);
    let mut functions =
        vec![ProcTimeFn::capped_inverse(Rat::one(), half_phi).expect("valid parameters"); 2 * k];
    functions.push(ProcTimeFn::capped_inverse(Rat::one(), Rat::one()).expect("valid parameters"));
    Instance::new(machines, jobs, speeds, functions, Variant::Unrelated)
        .expect("construction is valid")
}

/// Candidate targets for the lower-bound families at width `k`: the grid
/// `t / (2k(2k-1))` over `[1, 2]`, which contains both `2k/(2k-1)` and
/// `(2k+1)/(2k)` exactly.
pub fn threshold_grid(k: usize) -> Vec<Rat> {
    assert!(k >= 1);
    let d = (2 * k * (2 * k - 1)) as i64;
    (d..=2 * d).map(|t| rat(t, d)).collect()
}

/// Embeds a fixed-processing-time instance (`times[i * jobs + j]` is job
/// `j`'s duration on machine `i` alone, 0 meaning forbidden) into the
/// malleable model: speeds grow so steeply that grouping machines never
/// pays, and single-machine durations reproduce the matrix exactly.
///
/// Requires `p_max * machines * jobs` to be an integer at most 64, where
/// `p_max` is the largest entry; otherwise the speed exponents overflow.
/// Scale the matrix down if the product comes out larger.
pub fn from_nonmalleable(
    machines: usize,
    jobs: usize,
    times: &[Rat],
) -> Result<Instance, ModelError> {
    let fail = |msg: String| Err(ModelError(msg));
    if times.len() != machines * jobs {
        return fail(format!(
            "time matrix has {} entries, expected {}",
            times.len(),
            machines * jobs
        ));
    }
    if times.iter().any(|t| t.is_negative()) {
        return fail("durations must be nonnegative".into());
    }
    let p_max = match times.iter().filter(|t| t.is_positive()).max() {
        Some(p) => p.clone(),
        None => return fail("every job is forbidden everywhere".into()),
    };
    let exp = &p_max * rint((machines * jobs) as i64);
    if !exp.is_integer() {
        return fail(format!(
            "p_max * machines * jobs = {} must be an integer; scale the matrix",
            fmt_rat(&exp)
        ));
    }
    let exp = exp.to_integer();
    let exp: i64 = match i64::try_from(exp.clone()) {
        Ok(e) if e <= 64 => e,
        _ => {
            return fail(format!(
                "p_max * machines * jobs = {exp} exceeds 64; \
                 scale the matrix down to keep speeds representable"
            ))
        }
    };
    let mut speeds = vec![Rat::zero(); machines * jobs];
    for (idx, t) in times.iter().enumerate() {
        if t.is_positive() {
            speeds[idx] = pow_int(&(&p_max / t), exp);
        }
    }
    let exponent = Rat::new(1.into(), exp.into());
    let functions = vec![ProcTimeFn::power_law(p_max, exponent)?; jobs];
    Instance::new(machines, jobs, speeds, functions, Variant::Unrelated)
}

/// Shape of a random instance draw.
#[derive(Clone, Debug)]
pub struct RandomProfile {
    pub max_machines: usize,
    pub max_jobs: usize,
    pub variant: Variant,
    /// Adds integer weights and keeps every duration at least 1.
    pub weighted: bool,
}

/// Seeded random instance: machine and job counts up to the profile's
/// limits, speeds from {0} and `[1, 10]` with denominator at most 8, and
/// processing-time functions with small parameter grids. Deterministic in
/// `(seed, profile)`.
pub fn gen_random(seed: u64, profile: &RandomProfile) -> Instance {
    assert!(profile.max_machines >= 1 && profile.max_jobs >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let machines = rng.gen_range(1..=profile.max_machines);
    let jobs = rng.gen_range(1..=profile.max_jobs);

    let draw_speed = |rng: &mut ChaCha8Rng| {
        let den = rng.gen_range(1i64..=8);
        let num = rng.gen_range(den..=10 * den);
        rat(num, den)
    };

    let inst = match profile.variant {
        Variant::Uniform => {
            let machine_speeds: Vec<Rat> =
                (0..machines).map(|_| draw_speed(&mut rng)).collect();
            let functions = draw_functions(&mut rng, jobs, profile.weighted);
            Instance::new_uniform(machine_speeds, jobs, functions)
        }
        variant => {
            let mut speeds = vec![Rat::zero(); machines * jobs];
            for i in 0..machines {
                for j in 0..jobs {
                    if rng.gen_ratio(3, 4) {
                        speeds[i * jobs + j] = match variant {
                            Variant::Restricted => Rat::one(),
                            _ => draw_speed(&mut rng),
                        };
                    }
                }
            }
            for j in 0..jobs {
                if (0..machines).all(|i| speeds[i * jobs + j].is_zero()) {
                    let i = rng.gen_range(0..machines);
                    speeds[i * jobs + j] = match variant {
                        Variant::Restricted => Rat::one(),
                        _ => draw_speed(&mut rng),
                    };
                }
            }
            let functions = draw_functions(&mut rng, jobs, profile.weighted);
            Instance::new(machines, jobs, speeds, functions, variant)
        }
    };
    let inst = inst.expect("random draw is valid");
    if profile.weighted {
        let weights: Vec<Rat> = (0..inst.jobs)
            .map(|_| rint(rng.gen_range(1i64..=8)))
            .collect();
        inst.with_weights(weights).expect("weights are valid")
    } else {
        inst
    }
}

/// Inverse-with-floor or serial-fraction functions only; both stay exactly
/// rational. The weighted profile pins every value at 1 or above.
fn draw_functions(rng: &mut ChaCha8Rng, jobs: usize, weighted: bool) -> Vec<ProcTimeFn> {
    (0..jobs)
        .map(|_| {
            if rng.gen_bool(0.5) {
                let work = rat(rng.gen_range(1i64..=8), if weighted { 1 } else { 2 });
                let floor = if weighted {
                    rint(rng.gen_range(1i64..=work.to_integer().try_into().unwrap_or(1)))
                } else {
                    &work / rint(rng.gen_range(1i64..=8))
                };
                ProcTimeFn::capped_inverse(work, floor).expect("valid parameters")
            } else {
                let work = rint(rng.gen_range(if weighted { 4i64 } else { 1 }..=8));
                let parallel = rat(rng.gen_range(0i64..=3), 4);
                ProcTimeFn::amdahl(work, parallel).expect("valid parameters")
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{build_lp, solve_extreme_point};
    use crate::model::{instance_from_json, instance_to_json};

    fn feasible(inst: &Instance, c: &Rat) -> bool {
        match build_lp(inst, c) {
            Ok(lp) => solve_extreme_point(&lp).is_some(),
            Err(_) => false,
        }
    }

    #[test]
    fn restricted_family_threshold_is_sharp() {
        let inst = gen_gap_restricted(2);
        assert_eq!(inst.machines, 3);
        assert_eq!(inst.jobs, 2);
        let c = rat(4, 3);
        assert!(feasible(&inst, &c));
        assert!(!feasible(&inst, &(c - rat(1, 1_000_000))));
    }

    #[test]
    fn uniform_family_threshold_is_sharp() {
        let inst = gen_gap_uniform(1);
        assert_eq!(inst.machines, 3);
        assert_eq!(inst.jobs, 3);
        let c = rat(3, 2);
        assert!(feasible(&inst, &c));
        assert!(!feasible(&inst, &(c - rat(1, 1_000_000))));
    }

    #[test]
    fn unrelated_family_is_feasible_at_one_plus_inverse_k() {
        for k in [1usize, 2] {
            let inst = gen_gap_unrelated(k);
            assert_eq!(inst.machines, 3 * k);
            assert_eq!(inst.jobs, 2 * k + 1);
            let c = Rat::one() + rat(1, k as i64);
            assert!(feasible(&inst, &c), "k = {k}");
        }
    }

    #[test]
    fn unrelated_family_eligibility_pattern() {
        let inst = gen_gap_unrelated(2);
        // long job runs on group machines only
        assert_eq!(inst.eligible_machines(4), vec![0, 1]);
        // paired job 2 runs on its group and its dedicated machine
        assert_eq!(inst.eligible_machines(2), vec![1, 4]);
    }

    #[test]
    fn threshold_grid_contains_both_family_values() {
        for k in [2usize, 3, 5] {
            let grid = threshold_grid(k);
            let restricted = rat(2 * k as i64, 2 * k as i64 - 1);
            let uniform = rat(2 * k as i64 + 1, 2 * k as i64);
            assert!(grid.contains(&restricted));
            assert!(grid.contains(&uniform));
        }
    }

    #[test]
    fn embedding_reproduces_the_time_matrix() {
        let times = vec![rint(3), rint(1), rint(2), rint(4)];
        let inst = from_nonmalleable(2, 2, &times).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(inst.duration(j, &[i]), times[i * 2 + j]);
            }
        }
    }

    #[test]
    fn embedding_never_rewards_grouping() {
        let times = vec![rint(3), rint(1), rint(2), rint(4)];
        let inst = from_nonmalleable(2, 2, &times).unwrap();
        // both machines together barely beat the better one alone
        let solo = inst.duration(0, &[1]);
        let both = inst.duration(0, &[0, 1]);
        assert!(both <= solo);
        assert!(&both + rat(1, 2) > solo);
    }

    #[test]
    fn embedding_rejects_oversized_exponents() {
        let times = vec![rint(9); 9];
        let err = from_nonmalleable(3, 3, &times).unwrap_err();
        assert!(err.to_string().contains("exceeds 64"));
    }

    #[test]
    fn random_instances_are_deterministic_and_round_trip() {
        let profile = RandomProfile {
            max_machines: 5,
            max_jobs: 7,
            variant: Variant::Unrelated,
            weighted: false,
        };
        let a = gen_random(7, &profile);
        let b = gen_random(7, &profile);
        assert_eq!(instance_to_json(&a), instance_to_json(&b));
        let back = instance_from_json(&instance_to_json(&a)).unwrap();
        assert_eq!(instance_to_json(&back), instance_to_json(&a));
    }

    #[test]
    fn random_variants_hold_their_shape() {
        for seed in 0..20u64 {
            let r = gen_random(
                seed,
                &RandomProfile {
                    max_machines: 4,
                    max_jobs: 4,
                    variant: Variant::Restricted,
                    weighted: false,
                },
            );
            assert_eq!(r.variant, Variant::Restricted);
            r.validate().unwrap();
            let u = gen_random(
                seed,
                &RandomProfile {
                    max_machines: 4,
                    max_jobs: 4,
                    variant: Variant::Uniform,
                    weighted: false,
                },
            );
            assert_eq!(u.variant, Variant::Uniform);
            u.validate().unwrap();
        }
    }

    #[test]
    fn weighted_profile_keeps_durations_above_one() {
        for seed in 0..30u64 {
            let inst = gen_random(
                seed,
                &RandomProfile {
                    max_machines: 4,
                    max_jobs: 4,
                    variant: Variant::Unrelated,
                    weighted: true,
                },
            );
            assert!(inst.weights.is_some());
            let all: Vec<usize> = (0..inst.machines).collect();
            for j in 0..inst.jobs {
                let eligible: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|&i| inst.speed(i, j).is_positive())
                    .collect();
                assert!(inst.duration(j, &eligible) >= Rat::one());
            }
        }
    }
}
