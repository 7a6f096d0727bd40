//! Rounding fractional assignments into schedules.
//!
//! The support of an extreme point is a pseudoforest, so its edges can be
//! directed with in-degree at most one everywhere. That gives each job at
//! most one parent machine and a private set of children machines, and each
//! machine at most one job claiming it as a child. Every scheme below then
//! sends each job either alone to its parent or in unison to (a subset of)
//! its children, and the schedule runs all children-set jobs first.

use crate::lp::FractionalAssignment;
use crate::model::{Instance, PNorm, Schedule, Variant};
use crate::rational::{fmt_rat, rat, Rat};
use num::{One, Signed, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Directed view of the support graph. Node order is machines first, then
/// jobs, which makes tree roots machines and guarantees every job a parent.
#[derive(Clone, Debug)]
pub struct Orientation {
    /// In-edge source of each job, when the job has one.
    pub parent: Vec<Option<usize>>,
    /// Children machines of each job, ascending.
    pub children: Vec<Vec<usize>>,
}

/// Orients the support pseudoforest deterministically: tree components are
/// rooted at their lowest node and directed away from it; unicyclic
/// components direct their cycle starting at the lowest cycle node toward
/// its lower-indexed neighbor, then direct the hanging trees away.
///
/// Panics if a component carries more than one cycle, which would mean the
/// solver did not return an extreme point.
pub fn orient(fa: &FractionalAssignment) -> Orientation {
    let m = fa.machines;
    let n = fa.jobs;
    let total = m + n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for &(i, j) in fa.x.keys() {
        adj[i].push(m + j);
        adj[m + j].push(i);
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }

    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_deg = vec![0usize; total];
    let mut record = |from: usize, to: usize| {
        in_deg[to] += 1;
        assert!(in_deg[to] <= 1, "orientation produced in-degree above one");
        if to >= m {
            parent[to - m] = Some(from);
        } else {
            children[from - m].push(to);
        }
    };

    let mut seen = vec![false; total];
    for start in 0..total {
        if seen[start] || adj[start].is_empty() {
            seen[start] = true;
            continue;
        }
        // collect the component
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        let edges: usize = comp.iter().map(|&v| adj[v].len()).sum::<usize>() / 2;
        if edges == comp.len() - 1 {
            // tree: direct away from the lowest node, a machine
            bfs_away(&adj, &comp[..1], &mut record);
        } else if edges == comp.len() {
            // one cycle: peel leaves to expose it
            let mut deg: BTreeMap<usize, usize> =
                comp.iter().map(|&v| (v, adj[v].len())).collect();
            let mut stack: Vec<usize> =
                comp.iter().copied().filter(|v| adj[*v].len() == 1).collect();
            while let Some(v) = stack.pop() {
                deg.insert(v, 0);
                for &w in &adj[v] {
                    let d = deg.get_mut(&w).expect("neighbor in component");
                    if *d > 0 {
                        *d -= 1;
                        if *d == 1 {
                            stack.push(w);
                        }
                    }
                }
            }
            let on_cycle: BTreeSet<usize> = deg
                .iter()
                .filter(|(_, d)| **d == 2)
                .map(|(v, _)| *v)
                .collect();
            assert!(on_cycle.len() >= 4, "support cycles alternate sides");
            // walk the cycle from its lowest node toward its lower neighbor
            let first = *on_cycle.iter().next().expect("nonempty cycle");
            let second = *adj[first]
                .iter()
                .filter(|w| on_cycle.contains(w))
                .min()
                .expect("cycle neighbor");
            let mut prev = first;
            let mut cur = second;
            record(first, second);
            while cur != first {
                let next = *adj[cur]
                    .iter()
                    .find(|&&w| w != prev && on_cycle.contains(&w))
                    .expect("cycle continues");
                record(cur, next);
                prev = cur;
                cur = next;
            }
            let roots: Vec<usize> = on_cycle.iter().copied().collect();
            bfs_away(&adj, &roots, &mut record);
        } else {
            panic!("support component has more than one cycle; not an extreme point");
        }
    }
    for ch in &mut children {
        ch.sort_unstable();
    }
    Orientation { parent, children }
}

/// Directs all edges reachable from `roots` away from them, skipping edges
/// between two roots (already directed cycle edges).
fn bfs_away(
    adj: &[Vec<usize>],
    roots: &[usize],
    record: &mut impl FnMut(usize, usize),
) {
    let mut seen: BTreeSet<usize> = roots.iter().copied().collect();
    let mut queue: VecDeque<usize> = roots.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if seen.insert(w) {
                record(v, w);
                queue.push_back(w);
            }
        }
    }
}

/// Where one job ends up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JobDecision {
    /// Alone on its parent machine, after that machine's unison job if any.
    Parent { machine: usize },
    /// In unison on a set of children machines, starting at time zero.
    Cluster {
        machines: Vec<usize>,
        /// Filtering threshold that selected the set, when one was used.
        theta: Option<Rat>,
    },
}

/// Output of a rounding scheme.
#[derive(Clone, Debug)]
pub struct RoundedAssignment {
    /// Parent-assignment threshold the scheme used.
    pub beta: Rat,
    pub decisions: Vec<JobDecision>,
    /// Fractional load per machine from parent-assigned jobs only, under the
    /// relaxation's coefficients. Drives the filtering scheme.
    pub frac_load: Vec<Rat>,
}

impl RoundedAssignment {
    pub fn is_parent(&self, job: usize) -> bool {
        matches!(self.decisions[job], JobDecision::Parent { .. })
    }
}

/// Parent-assigned load cannot exceed `1/beta` times the fractional load:
/// each such job carries at least `beta` mass on that machine and its solo
/// duration is dominated by its row coefficient.
fn assert_parent_load(inst: &Instance, r: &RoundedAssignment) {
    for i in 0..inst.machines {
        let mut total = Rat::zero();
        for (j, d) in r.decisions.iter().enumerate() {
            if *d == (JobDecision::Parent { machine: i }) {
                total += inst.duration(j, &[i]);
            }
        }
        assert!(
            &total * &r.beta <= r.frac_load[i],
            "parent load bound violated on machine {i}"
        );
    }
}

fn cluster_disjointness(decisions: &[JobDecision], machines: usize) {
    let mut taken = vec![false; machines];
    for d in decisions {
        if let JobDecision::Cluster { machines: set, .. } = d {
            assert!(!set.is_empty(), "unison job with an empty machine set");
            for &i in set {
                assert!(!taken[i], "machine {i} claimed by two unison jobs");
                taken[i] = true;
            }
        }
    }
}

/// Splits jobs by the mass on their parent and computes the parent-side
/// fractional loads. Shared by every scheme.
fn split_by_threshold(
    fa: &FractionalAssignment,
    o: &Orientation,
    beta: &Rat,
) -> (Vec<bool>, Vec<Rat>) {
    let to_parent: Vec<bool> = (0..fa.jobs)
        .map(|j| match o.parent[j] {
            Some(p) => fa.x.get(&(p, j)).map_or(false, |v| v >= beta),
            None => false,
        })
        .collect();
    let mut frac_load = vec![Rat::zero(); fa.machines];
    for ((i, j), v) in &fa.x {
        if to_parent[*j] {
            frac_load[*i] += &fa.coeffs[&(*i, *j)].value * v;
        }
    }
    (to_parent, frac_load)
}

/// Threshold rounding: parent when the parent holds at least `beta` mass,
/// otherwise the full children set. The workhorse behind the factor-4 scheme
/// (`beta` = 1/2) and the p-norm scheme (`beta` tuned to `p`).
pub fn round_threshold(
    inst: &Instance,
    fa: &FractionalAssignment,
    o: &Orientation,
    beta: &Rat,
) -> RoundedAssignment {
    let (to_parent, frac_load) = split_by_threshold(fa, o, beta);
    let decisions = (0..inst.jobs)
        .map(|j| {
            if to_parent[j] {
                JobDecision::Parent {
                    machine: o.parent[j].expect("threshold met implies a parent"),
                }
            } else {
                assert!(!o.children[j].is_empty(), "childless job below threshold");
                JobDecision::Cluster {
                    machines: o.children[j].clone(),
                    theta: None,
                }
            }
        })
        .collect();
    let r = RoundedAssignment {
        beta: beta.clone(),
        decisions,
        frac_load,
    };
    cluster_disjointness(&r.decisions, inst.machines);
    assert_parent_load(inst, &r);
    r
}

/// The factor-4 scheme: threshold rounding at 1/2. Children-set durations
/// stay within twice the target.
pub fn round_simple(
    inst: &Instance,
    fa: &FractionalAssignment,
    o: &Orientation,
) -> RoundedAssignment {
    let r = round_threshold(inst, fa, o, &rat(1, 2));
    for (j, d) in r.decisions.iter().enumerate() {
        if let JobDecision::Cluster { machines, .. } = d {
            debug_assert!(
                inst.duration(j, machines) <= rat(2, 1) * &fa.target,
                "children-set duration above twice the target"
            );
        }
    }
    r
}

/// Filtering scheme: like threshold rounding, but each children-set job
/// drops children whose parent-side load is too high. The threshold walks
/// the candidate values `1 - load_i / C` and keeps the machines at or above
/// it, minimizing `(1/beta)(1-theta)C + duration`; ties prefer the smaller
/// threshold, i.e. the larger set. At `beta` = 1/2 the makespan stays
/// within 2e/(e-1) times the target, and tuning `beta` near 0.465941
/// improves that to about 3.1462.
pub fn round_filtered(
    inst: &Instance,
    fa: &FractionalAssignment,
    o: &Orientation,
    beta: &Rat,
) -> RoundedAssignment {
    assert!(beta.is_positive() && beta < &Rat::one());
    let (to_parent, frac_load) = split_by_threshold(fa, o, beta);
    let c = &fa.target;
    let inv_beta = beta.recip();
    let mut decisions = Vec::with_capacity(inst.jobs);
    for j in 0..inst.jobs {
        if to_parent[j] {
            decisions.push(JobDecision::Parent {
                machine: o.parent[j].expect("threshold met implies a parent"),
            });
            continue;
        }
        let t = &o.children[j];
        assert!(!t.is_empty(), "childless job below threshold");
        let mut candidates: Vec<Rat> = t
            .iter()
            .map(|&i| Rat::one() - &frac_load[i] / c)
            .collect();
        candidates.push(Rat::one());
        candidates.sort();
        candidates.dedup();
        let mut best: Option<(Rat, Rat, Vec<usize>)> = None;
        for theta in candidates {
            let set: Vec<usize> = t
                .iter()
                .copied()
                .filter(|&i| Rat::one() - &frac_load[i] / c >= theta)
                .collect();
            if set.is_empty() {
                continue;
            }
            let value = &inv_beta * (Rat::one() - &theta) * c + inst.duration(j, &set);
            let better = match &best {
                None => true,
                // strict: earlier (smaller) theta wins ties
                Some((v, _, _)) => value < *v,
            };
            if better {
                best = Some((value, theta, set));
            }
        }
        let (_, theta, set) = best.expect("feasible job has a nonempty filtered set");
        decisions.push(JobDecision::Cluster {
            machines: set,
            theta: Some(theta),
        });
    }
    let r = RoundedAssignment {
        beta: beta.clone(),
        decisions,
        frac_load,
    };
    cluster_disjointness(&r.decisions, inst.machines);
    assert_parent_load(inst, &r);
    r
}

/// Restricted-assignment scheme (all usable speeds are 1): parent only on
/// full integral mass; two-children jobs try both singletons and the pair
/// against the realized parent-side loads and keep the best, preferring the
/// lexicographically smallest set on ties. Makespan stays within 7/3 of the
/// target.
pub fn round_restricted(
    inst: &Instance,
    fa: &FractionalAssignment,
    o: &Orientation,
) -> RoundedAssignment {
    assert_eq!(inst.variant, Variant::Restricted);
    let (to_parent, frac_load) = split_by_threshold(fa, o, &Rat::one());
    // realized parent-side loads: those jobs run alone at unit speed
    let mut realized = vec![Rat::zero(); inst.machines];
    for j in 0..inst.jobs {
        if to_parent[j] {
            let p = o.parent[j].expect("full mass implies a parent");
            realized[p] += inst.duration(j, &[p]);
        }
    }
    let mut decisions = Vec::with_capacity(inst.jobs);
    for j in 0..inst.jobs {
        if to_parent[j] {
            decisions.push(JobDecision::Parent {
                machine: o.parent[j].expect("full mass implies a parent"),
            });
            continue;
        }
        let t = &o.children[j];
        assert!(!t.is_empty(), "childless job below threshold");
        let set = if t.len() == 2 {
            let (a, b) = (t[0], t[1]);
            // candidate order is lexicographic so strict improvement keeps
            // the smallest set on ties
            let options = [vec![a], vec![a, b], vec![b]];
            let mut best: Option<(Rat, &Vec<usize>)> = None;
            for s in &options {
                let high = s
                    .iter()
                    .map(|i| realized[*i].clone())
                    .max()
                    .expect("nonempty option");
                let value = inst.duration(j, s) + high;
                if best.as_ref().map_or(true, |(v, _)| value < *v) {
                    best = Some((value, s));
                }
            }
            best.expect("three options evaluated").1.clone()
        } else {
            t.clone()
        };
        decisions.push(JobDecision::Cluster {
            machines: set,
            theta: None,
        });
    }
    let r = RoundedAssignment {
        beta: Rat::one(),
        decisions,
        frac_load,
    };
    cluster_disjointness(&r.decisions, inst.machines);
    r
}

/// At most one machine supporting `job` is slow for it and shared with
/// another job, and that machine is no faster than any other support
/// machine of `job`.
pub fn uniform_support_is_canonical(fa: &FractionalAssignment, speeds: &[Rat]) -> bool {
    (0..fa.jobs).all(|j| {
        let support: Vec<usize> = fa
            .x
            .keys()
            .filter(|(_, jj)| *jj == j)
            .map(|(i, _)| *i)
            .collect();
        let shared_slow: Vec<usize> = support
            .iter()
            .copied()
            .filter(|&i| {
                !fa.coeffs[&(i, j)].fast
                    && fa.x.keys().any(|&(ii, jj)| ii == i && jj != j)
            })
            .collect();
        match shared_slow.as_slice() {
            [] => true,
            [i] => support.iter().all(|&k| speeds[*i] <= speeds[k]),
            _ => false,
        }
    })
}

/// Rewrites a feasible point so that each job keeps at most one shared slow
/// machine, and only its slowest one. Mass on a slower shared machine is
/// pushed to a faster shared machine while an equal load of some sharer
/// moves the other way, which never raises any machine row. Each exchange
/// runs until one of the two variables hits zero.
///
/// Not every point can be fully rewritten: a pair of jobs pinned to the
/// same two tight machines can trade places forever without either shape
/// improving, because the exchange that fixes one job un-fixes the other.
/// The loop therefore stops after a generous budget and returns whatever it
/// reached. Feasibility is re-checked exactly on exit either way, and the
/// rounding copes with leftover sharing.
pub fn canonicalize_uniform(inst: &Instance, fa: &FractionalAssignment) -> FractionalAssignment {
    assert_eq!(inst.variant, Variant::Uniform);
    let speeds = inst
        .machine_speeds
        .as_ref()
        .expect("uniform instances carry machine speeds")
        .clone();
    let mut fa = fa.clone();
    let cap = 64 * (fa.jobs + fa.machines) * (fa.jobs + fa.machines) + 64;
    let mut iterations = 0usize;
    'outer: loop {
        for j in 0..fa.jobs {
            let support: Vec<usize> = fa
                .x
                .keys()
                .filter(|(_, jj)| *jj == j)
                .map(|(i, _)| *i)
                .collect();
            let is_shared = |i: usize| fa.x.keys().any(|&(ii, jj)| ii == i && jj != j);
            let mut slow: Vec<usize> = support
                .iter()
                .copied()
                .filter(|&i| !fa.coeffs[&(i, j)].fast)
                .collect();
            slow.sort_by(|&a, &b| speeds[a].cmp(&speeds[b]).then(a.cmp(&b)));
            let shared_slow: Vec<usize> =
                slow.iter().copied().filter(|&i| is_shared(i)).collect();
            let pick = match shared_slow.as_slice() {
                [] => None,
                [only] => {
                    // the shared machine must be the slowest support machine
                    let slower = slow
                        .iter()
                        .copied()
                        .find(|&i| speeds[i] < speeds[*only]);
                    slower.map(|i1| (i1, *only))
                }
                [first, second, ..] => Some((*first, *second)),
            };
            let (i1, i2) = match pick {
                Some(p) => p,
                None => continue,
            };
            let j2 = fa
                .x
                .keys()
                .filter(|&&(ii, jj)| ii == i2 && jj != j)
                .map(|(_, jj)| *jj)
                .min()
                .expect("shared machine has a sharer");
            let a2j = fa.coeffs[&(i2, j)].value.clone();
            let a2j2 = fa.coeffs[&(i2, j2)].value.clone();
            let limit = &fa.x[&(i2, j2)] * &a2j2 / &a2j;
            let eps = fa.x[&(i1, j)].clone().min(limit);
            let eps2 = &eps * &a2j / &a2j2;
            assert!(eps.is_positive());
            shift(&mut fa.x, (i1, j), -&eps);
            shift(&mut fa.x, (i2, j), eps.clone());
            shift(&mut fa.x, (i2, j2), -&eps2);
            shift(&mut fa.x, (i1, j2), eps2);
            iterations += 1;
            if iterations >= cap {
                break 'outer;
            }
            continue 'outer;
        }
        break;
    }
    assert!(fa.rows_satisfied(), "mass exchange broke a constraint row");
    debug_assert!(fa.support_is_pseudoforest());
    fa
}

fn shift(x: &mut BTreeMap<(usize, usize), Rat>, key: (usize, usize), delta: Rat) {
    let v = x.entry(key).or_insert_with(Rat::zero);
    *v += delta;
    assert!(!v.is_negative(), "mass went negative at {key:?}");
    if v.is_zero() {
        x.remove(&key);
    }
}

/// Uniform-machines scheme: parent at mass 1/2; otherwise one fastest fast
/// child if any; otherwise the exclusive slow children when their pooled
/// speed reaches a third of the critical work density; otherwise those plus
/// shared slow children. On a canonicalized point the last case adds the
/// single shared child and the makespan stays within 3 times the target;
/// when the rewrite left several shared children, the cheapest bundle is
/// chosen by evaluating each finish time exactly.
pub fn round_uniform(
    inst: &Instance,
    fa: &FractionalAssignment,
    o: &Orientation,
) -> RoundedAssignment {
    assert_eq!(inst.variant, Variant::Uniform);
    let speeds = inst
        .machine_speeds
        .as_ref()
        .expect("uniform instances carry machine speeds");
    let beta = rat(1, 2);
    let c = &fa.target;
    let (to_parent, frac_load) = split_by_threshold(fa, o, &beta);
    // parent-assigned durations are already decided, so the shared-child
    // picker below can weigh the exact load each child machine will carry
    let mut realized = vec![Rat::zero(); inst.machines];
    for j in 0..inst.jobs {
        if to_parent[j] {
            let p = o.parent[j].expect("threshold met implies a parent");
            realized[p] += inst.duration(j, &[p]);
        }
    }
    let mut decisions = Vec::with_capacity(inst.jobs);
    for j in 0..inst.jobs {
        if to_parent[j] {
            decisions.push(JobDecision::Parent {
                machine: o.parent[j].expect("threshold met implies a parent"),
            });
            continue;
        }
        let t = &o.children[j];
        assert!(!t.is_empty(), "childless job below threshold");
        let fast: Vec<usize> = t
            .iter()
            .copied()
            .filter(|&i| fa.coeffs[&(i, j)].fast)
            .collect();
        let set = if !fast.is_empty() {
            let best = fast
                .iter()
                .copied()
                .max_by(|&a, &b| speeds[a].cmp(&speeds[b]).then(b.cmp(&a)))
                .expect("nonempty fast set");
            debug_assert!(inst.duration(j, &[best]) <= rat(3, 1) * c);
            vec![best]
        } else {
            let is_shared = |i: usize| fa.x.keys().any(|&(ii, jj)| ii == i && jj != j);
            let exclusive: Vec<usize> =
                t.iter().copied().filter(|&i| !is_shared(i)).collect();
            let pooled: Rat = exclusive.iter().map(|&i| speeds[i].clone()).sum();
            let gamma = Rat::from_integer(fa.gamma[j].into());
            let density = &gamma * inst.functions[j].eval(&gamma) / (rat(3, 1) * c);
            if pooled >= density {
                debug_assert!(inst.duration(j, &exclusive) <= rat(3, 1) * c);
                exclusive
            } else {
                let mut shared: Vec<usize> =
                    t.iter().copied().filter(|&i| is_shared(i)).collect();
                assert!(
                    !shared.is_empty(),
                    "low pooled speed leaves a shared slow child"
                );
                shared.sort_by(|&a, &b| speeds[a].cmp(&speeds[b]).then(a.cmp(&b)));
                let mut candidates: Vec<Vec<usize>> = shared
                    .iter()
                    .map(|&i| {
                        let mut u = exclusive.clone();
                        u.push(i);
                        u.sort_unstable();
                        u
                    })
                    .collect();
                if shared.len() > 1 {
                    // with the mass split across children no single one may
                    // carry enough speed, so heavy prefixes pool them
                    let mut by_mass = shared.clone();
                    by_mass.sort_by(|&a, &b| {
                        fa.x[&(b, j)].cmp(&fa.x[&(a, j)]).then(a.cmp(&b))
                    });
                    for r in 2..=by_mass.len() {
                        let mut u = exclusive.clone();
                        u.extend_from_slice(&by_mass[..r]);
                        u.sort_unstable();
                        candidates.push(u);
                    }
                }
                let finish = |u: &Vec<usize>| {
                    let busy = u
                        .iter()
                        .map(|&i| realized[i].clone())
                        .max()
                        .unwrap_or_else(Rat::zero);
                    inst.duration(j, u) + busy
                };
                candidates
                    .into_iter()
                    .min_by_key(finish)
                    .expect("at least one candidate")
            }
        };
        decisions.push(JobDecision::Cluster {
            machines: set,
            theta: None,
        });
    }
    let r = RoundedAssignment {
        beta,
        decisions,
        frac_load,
    };
    cluster_disjointness(&r.decisions, inst.machines);
    r
}

/// Minimizer of `1/b + (1-b)^(-1/p)` over `(0,1)`: the parent threshold
/// with the best provable factor. Exact 1/2 at `p` = 1; golden-section
/// search to 1e-9 otherwise.
pub fn tuned_threshold(p: &PNorm) -> Rat {
    let pv = match p {
        PNorm::Finite(v) => {
            if v.is_one() {
                return rat(1, 2);
            }
            crate::rational::to_f64(v)
        }
        PNorm::Infinity => panic!("threshold tuning needs a finite norm"),
    };
    let objective = |b: f64| 1.0 / b + (1.0 - b).powf(-1.0 / pv);
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while hi - lo > 1e-9 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    Rat::from_float((lo + hi) / 2.0).expect("finite threshold")
}

/// Threshold rounding with the tuned parent threshold for the instance's
/// norm. Children-set jobs take their full children set; the makespan stays
/// within `1/b + (1-b)^(-1/p)` of the target.
pub fn round_pnorm(
    inst: &Instance,
    fa: &FractionalAssignment,
    o: &Orientation,
) -> RoundedAssignment {
    let beta = tuned_threshold(&inst.p);
    round_threshold(inst, fa, o, &beta)
}

/// Builds the actual schedule: children-set jobs all start at zero on their
/// disjoint sets; each machine then runs its parent-assigned jobs
/// back-to-back in ascending job order, starting when it falls idle.
pub fn assemble_schedule(inst: &Instance, r: &RoundedAssignment) -> Schedule {
    cluster_disjointness(&r.decisions, inst.machines);
    let mut busy_until = vec![Rat::zero(); inst.machines];
    let mut schedule = Schedule::empty();
    for (j, d) in r.decisions.iter().enumerate() {
        if let JobDecision::Cluster { machines, .. } = d {
            let dur = inst.duration(j, machines);
            for &i in machines {
                busy_until[i] = dur.clone();
            }
            schedule.place(j, machines.clone(), Rat::zero(), dur);
        }
    }
    for (j, d) in r.decisions.iter().enumerate() {
        if let JobDecision::Parent { machine } = d {
            let start = busy_until[*machine].clone();
            let end = &start + inst.duration(j, &[*machine]);
            busy_until[*machine] = end.clone();
            schedule.place(j, vec![*machine], start, end);
        }
    }
    schedule
}

#[derive(Serialize)]
struct DecisionDto {
    job: usize,
    kind: &'static str,
    machines: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<String>,
}

/// Debug dump of the per-job decisions.
pub fn rounding_to_json(r: &RoundedAssignment) -> String {
    let rows: Vec<DecisionDto> = r
        .decisions
        .iter()
        .enumerate()
        .map(|(job, d)| match d {
            JobDecision::Parent { machine } => DecisionDto {
                job,
                kind: "parent",
                machines: vec![*machine],
                theta: None,
            },
            JobDecision::Cluster { machines, theta } => DecisionDto {
                job,
                kind: "unison",
                machines: machines.clone(),
                theta: theta.as_ref().map(fmt_rat),
            },
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("decision dump serializes")
}
