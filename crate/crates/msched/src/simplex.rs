//! Self-contained exact simplex over big rationals.
//!
//! Dense two-phase tableau method with Bland's pivoting rule, which cannot
//! cycle, so termination needs no perturbation or tolerance. Every entry is
//! a `BigRational`; feasibility answers are exact. The returned solution is
//! always a basic feasible solution of the slack-extended system, which is
//! what the rounding layer relies on for its sparsity structure.

use crate::rational::Rat;
use num::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

/// One linear constraint, sparse over structural variables.
#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, Rat)>,
    pub sense: Sense,
    pub rhs: Rat,
}

/// Minimization program over nonnegative structural variables.
/// An empty objective asks for feasibility only.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub rows: Vec<Row>,
    pub objective: Vec<Rat>,
}

#[derive(Clone, Debug)]
pub enum SimplexOutcome {
    /// Phase one ended with a positive artificial residue.
    Infeasible { residue: Rat },
    /// Basic feasible optimum. `basis[r]` is the column basic in row `r`;
    /// columns `0..num_vars` are structural, the rest are slacks.
    Optimal {
        x: Vec<Rat>,
        objective: Rat,
        basis: Vec<usize>,
    },
    /// The objective is unbounded below (never produced by well-formed
    /// scheduling relaxations; kept for solver honesty).
    Unbounded,
}

const MAX_PIVOTS: usize = 200_000;

struct Tableau {
    rhs_col: usize,
    art_start: usize,
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    z1: Vec<Rat>, // phase-one reduced costs
    z2: Vec<Rat>, // phase-two reduced costs
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        assert!(!piv.is_zero(), "pivot on zero entry");
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v / &piv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for rr in 0..self.rows.len() {
            if rr == r {
                continue;
            }
            let factor = self.rows[rr][c].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, p) in self.rows[rr].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v = &*v - &factor * p;
                }
            }
        }
        for z in [&mut self.z1, &mut self.z2] {
            let factor = z[c].clone();
            if !factor.is_zero() {
                for (v, p) in z.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v = &*v - &factor * p;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule: entering column is the lowest index with a negative
    /// reduced cost, leaving row minimizes the ratio with ties broken by
    /// the lowest basic variable index. Returns false when optimal.
    fn bland_step(&mut self, phase_one: bool, allow_artificial: bool) -> Result<bool, ()> {
        let z = if phase_one { &self.z1 } else { &self.z2 };
        let limit = if allow_artificial {
            self.rhs_col
        } else {
            self.art_start
        };
        let entering = (0..limit).find(|&c| z[c].is_negative());
        let c = match entering {
            Some(c) => c,
            None => return Ok(false),
        };
        let mut best: Option<(Rat, usize, usize)> = None; // ratio, basis var, row
        for r in 0..self.rows.len() {
            let t = &self.rows[r][c];
            if t.is_positive() {
                let ratio = &self.rows[r][self.rhs_col] / t;
                let key = (ratio, self.basis[r], r);
                if best.as_ref().map_or(true, |b| (&key.0, key.1) < (&b.0, b.1)) {
                    best = Some(key);
                }
            }
        }
        match best {
            Some((_, _, r)) => {
                self.pivot(r, c);
                Ok(true)
            }
            None => Err(()), // unbounded direction
        }
    }
}

/// Solves the program exactly. Deterministic for a fixed input.
pub fn solve(lp: &LinearProgram) -> SimplexOutcome {
    let nv = lp.num_vars;
    debug_assert!(lp.objective.is_empty() || lp.objective.len() == nv);

    // Count extra columns: slack for Le (or surplus for negated rows),
    // artificial for Eq and negated-Le rows.
    let m = lp.rows.len();
    let mut n_slack = 0;
    for row in &lp.rows {
        if row.sense == Sense::Le {
            n_slack += 1;
        }
    }
    let art_start = nv + n_slack;
    // worst case one artificial per row
    let cols = art_start + m + 1;
    let rhs_col = cols - 1;

    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut basis = vec![usize::MAX; m];
    let mut slack_idx = 0;
    let mut art_idx = 0;
    for (r, row) in lp.rows.iter().enumerate() {
        let mut t = vec![Rat::zero(); cols];
        let flip = row.rhs.is_negative();
        for (c, v) in &row.coeffs {
            assert!(*c < nv, "coefficient for unknown variable");
            t[*c] = if flip { -v } else { v.clone() };
        }
        t[rhs_col] = if flip { -&row.rhs } else { row.rhs.clone() };
        match (row.sense, flip) {
            (Sense::Le, false) => {
                // slack is directly basic
                t[nv + slack_idx] = Rat::one();
                basis[r] = nv + slack_idx;
                slack_idx += 1;
            }
            (Sense::Le, true) => {
                // negated to >=: surplus plus artificial
                t[nv + slack_idx] = -Rat::one();
                slack_idx += 1;
                t[art_start + art_idx] = Rat::one();
                basis[r] = art_start + art_idx;
                art_idx += 1;
            }
            (Sense::Eq, _) => {
                t[art_start + art_idx] = Rat::one();
                basis[r] = art_start + art_idx;
                art_idx += 1;
            }
        }
        rows.push(t);
    }

    // Phase-one costs: 1 on artificials. Reduced costs subtract basic rows.
    let mut z1 = vec![Rat::zero(); cols];
    for c in art_start..art_start + art_idx {
        z1[c] = Rat::one();
    }
    // Phase-two costs on structural variables.
    let mut z2 = vec![Rat::zero(); cols];
    for (c, v) in lp.objective.iter().enumerate() {
        z2[c] = v.clone();
    }
    let mut tab = Tableau {
        rhs_col,
        art_start,
        rows,
        basis,
        z1,
        z2,
    };
    for r in 0..m {
        for z_id in 0..2 {
            let b = tab.basis[r];
            let cost = if z_id == 0 { tab.z1[b].clone() } else { tab.z2[b].clone() };
            if !cost.is_zero() {
                let row = tab.rows[r].clone();
                let z = if z_id == 0 { &mut tab.z1 } else { &mut tab.z2 };
                for (v, p) in z.iter_mut().zip(&row) {
                    if !p.is_zero() {
                        *v = &*v - &cost * p;
                    }
                }
            }
        }
    }

    let mut pivots = 0;
    loop {
        match tab.bland_step(true, true) {
            Ok(true) => {}
            Ok(false) => break,
            Err(()) => unreachable!("phase one is bounded below by zero"),
        }
        pivots += 1;
        assert!(pivots < MAX_PIVOTS, "simplex exceeded pivot budget");
    }
    // z1 rhs holds the negated phase-one objective
    let residue = -tab.z1[rhs_col].clone();
    if residue.is_positive() {
        return SimplexOutcome::Infeasible { residue };
    }

    // Drive leftover artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= tab.art_start {
            debug_assert!(tab.rows[r][tab.rhs_col].is_zero());
            match (0..tab.art_start).find(|&c| !tab.rows[r][c].is_zero()) {
                Some(c) => {
                    tab.pivot(r, c);
                    r += 1;
                }
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }

    if !lp.objective.is_empty() {
        loop {
            match tab.bland_step(false, false) {
                Ok(true) => {}
                Ok(false) => break,
                Err(()) => return SimplexOutcome::Unbounded,
            }
            pivots += 1;
            assert!(pivots < MAX_PIVOTS, "simplex exceeded pivot budget");
        }
    }

    let mut x = vec![Rat::zero(); nv];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            x[b] = tab.rows[r][tab.rhs_col].clone();
        }
    }
    let objective = lp
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum();
    SimplexOutcome::Optimal {
        x,
        objective,
        basis: tab.basis.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};

    fn le(coeffs: Vec<(usize, Rat)>, rhs: Rat) -> Row {
        Row {
            coeffs,
            sense: Sense::Le,
            rhs,
        }
    }

    fn eq(coeffs: Vec<(usize, Rat)>, rhs: Rat) -> Row {
        Row {
            coeffs,
            sense: Sense::Eq,
            rhs,
        }
    }

    #[test]
    fn solves_a_textbook_minimum() {
        // min -x0 - 2 x1  s.t.  x0 + x1 <= 3, x1 <= 2
        let lp = LinearProgram {
            num_vars: 2,
            rows: vec![
                le(vec![(0, rint(1)), (1, rint(1))], rint(3)),
                le(vec![(1, rint(1))], rint(2)),
            ],
            objective: vec![rint(-1), rint(-2)],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { x, objective, .. } => {
                assert_eq!(x, vec![rint(1), rint(2)]);
                assert_eq!(objective, rint(-5));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility_exactly() {
        // x0 <= 1, x0 = 2
        let lp = LinearProgram {
            num_vars: 1,
            rows: vec![
                le(vec![(0, rint(1))], rint(1)),
                eq(vec![(0, rint(1))], rint(2)),
            ],
            objective: vec![],
        };
        match solve(&lp) {
            SimplexOutcome::Infeasible { residue } => assert_eq!(residue, rint(1)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn feasibility_only_returns_a_basic_point() {
        // x0 + x1 = 1, x0 + 2 x1 <= 3/2
        let lp = LinearProgram {
            num_vars: 2,
            rows: vec![
                eq(vec![(0, rint(1)), (1, rint(1))], rint(1)),
                le(vec![(0, rint(1)), (1, rint(2))], rat(3, 2)),
            ],
            objective: vec![],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { x, basis, .. } => {
                assert_eq!(&x[0] + &x[1], rint(1));
                assert!(&x[0] + rint(2) * &x[1] <= rat(3, 2));
                assert_eq!(basis.len(), 2);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn handles_redundant_equalities() {
        // x0 = 1 stated twice
        let lp = LinearProgram {
            num_vars: 1,
            rows: vec![
                eq(vec![(0, rint(1))], rint(1)),
                eq(vec![(0, rint(1))], rint(1)),
            ],
            objective: vec![rint(1)],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { x, objective, .. } => {
                assert_eq!(x, vec![rint(1)]);
                assert_eq!(objective, rint(1));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn reports_unbounded_directions() {
        // min -x0 with no upper bound on x0
        let lp = LinearProgram {
            num_vars: 1,
            rows: vec![],
            objective: vec![rint(-1)],
        };
        assert!(matches!(solve(&lp), SimplexOutcome::Unbounded));
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // -x0 <= -2 means x0 >= 2
        let lp = LinearProgram {
            num_vars: 1,
            rows: vec![le(vec![(0, rint(-1))], rint(-2))],
            objective: vec![rint(1)],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { x, .. } => assert_eq!(x, vec![rint(2)]),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn degenerate_pivoting_terminates() {
        // classic degeneracy: several rows tie at zero ratio
        let lp = LinearProgram {
            num_vars: 3,
            rows: vec![
                le(vec![(0, rint(1)), (1, rint(1))], rint(1)),
                le(vec![(0, rint(1)), (2, rint(1))], rint(1)),
                eq(vec![(0, rint(1))], rint(1)),
            ],
            objective: vec![rint(-1), rint(1), rint(1)],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { x, objective, .. } => {
                assert_eq!(x[0], rint(1));
                assert_eq!(objective, rint(-1));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
