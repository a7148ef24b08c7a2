//! Exact two-variable LP solver used as an independent oracle for the
//! closed-form bounds.
//!
//! The programs minimize `x + y` over a box `0 <= x <= x_max`,
//! `0 <= y <= y_max` cut by half-planes `a*x + b*y >= c`. Here `x` is the
//! total read from unchanged symbols and `y` the total read from retired
//! symbols. Every per-symbol constraint `0 <= beta_j <= ell` aggregates to
//! the box, and every `(x, y)` in the box splits back into admissible
//! `beta_j`, so the aggregated program has the same optimum as the
//! per-symbol one.
//!
//! The solver enumerates all pairwise intersections of boundary lines and
//! keeps the best feasible one. With at most six lines this is exact and
//! shares no code with the closed forms.

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bounds::Regime;
use crate::code_model::SplitParams;
use crate::rational::{frac, q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("the feasible region is empty")]
    Infeasible,
    #[error("constraint {0} has a = b = 0")]
    DegenerateConstraint(usize),
    #[error("box bounds must be non-negative")]
    NegativeBox,
    #[error("regime mismatch: {which} requires {premise}")]
    RegimeMismatch {
        which: &'static str,
        premise: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, LpError>;

/// `a*x + b*y >= c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

impl Constraint {
    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Self {
        Self { a, b, c }
    }

    fn slack(&self, x: &BigRational, y: &BigRational) -> BigRational {
        &self.a * x + &self.b * y - &self.c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    constraints: Vec<Constraint>,
    x_max: BigRational,
    y_max: BigRational,
}

impl LpProblem {
    pub fn new(
        constraints: Vec<Constraint>,
        x_max: BigRational,
        y_max: BigRational,
    ) -> Result<Self> {
        if x_max.is_negative() || y_max.is_negative() {
            return Err(LpError::NegativeBox);
        }
        if let Some(i) = constraints
            .iter()
            .position(|c| c.a.is_zero() && c.b.is_zero())
        {
            return Err(LpError::DegenerateConstraint(i));
        }
        Ok(Self {
            constraints,
            x_max,
            y_max,
        })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn x_max(&self) -> &BigRational {
        &self.x_max
    }

    pub fn y_max(&self) -> &BigRational {
        &self.y_max
    }

    /// Multiplies every right-hand side and box bound by `s`.
    pub fn scaled(&self, s: i64) -> Self {
        let s = q(s);
        Self {
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint::new(c.a.clone(), c.b.clone(), &c.c * &s))
                .collect(),
            x_max: &self.x_max * &s,
            y_max: &self.y_max * &s,
        }
    }

    pub fn is_feasible_point(&self, x: &BigRational, y: &BigRational) -> bool {
        !x.is_negative()
            && !y.is_negative()
            && x <= &self.x_max
            && y <= &self.y_max
            && self
                .constraints
                .iter()
                .all(|c| !c.slack(x, y).is_negative())
    }

    /// Indices of constraints holding with equality at `(x, y)`.
    pub fn tight_constraints(&self, x: &BigRational, y: &BigRational) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&i| self.constraints[i].slack(x, y).is_zero())
            .collect()
    }

    fn boundary_lines(&self) -> Vec<Constraint> {
        let mut lines = self.constraints.clone();
        lines.push(Constraint::new(q(1), q(0), q(0)));
        lines.push(Constraint::new(q(0), q(1), q(0)));
        lines.push(Constraint::new(q(1), q(0), self.x_max.clone()));
        lines.push(Constraint::new(q(0), q(1), self.y_max.clone()));
        lines
    }

    /// Every feasible vertex, deduplicated, in lexicographic `(x, y)` order.
    pub fn feasible_vertices(&self) -> Vec<(BigRational, BigRational)> {
        let lines = self.boundary_lines();
        let mut points: Vec<(BigRational, BigRational)> = lines
            .iter()
            .tuple_combinations()
            .filter_map(|(l1, l2)| {
                let det = &l1.a * &l2.b - &l2.a * &l1.b;
                if det.is_zero() {
                    return None;
                }
                let x = (&l1.c * &l2.b - &l2.c * &l1.b) / &det;
                let y = (&l1.a * &l2.c - &l2.a * &l1.c) / &det;
                self.is_feasible_point(&x, &y).then_some((x, y))
            })
            .collect();
        points.sort();
        points.dedup();
        points
    }

    /// All feasible vertices attaining the minimum of `x + y`.
    pub fn optimal_vertices(&self) -> Vec<(BigRational, BigRational)> {
        let vertices = self.feasible_vertices();
        let Some(best) = vertices.iter().map(|(x, y)| x + y).min() else {
            return Vec::new();
        };
        vertices
            .into_iter()
            .filter(|(x, y)| x + y == best)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VertexKind {
    /// Intersection of two constraint boundaries.
    ConstraintConstraint,
    /// A constraint boundary meets a box edge.
    ConstraintBox,
    BoxCorner,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub x: BigRational,
    pub y: BigRational,
    pub value: BigRational,
    pub vertex_kind: VertexKind,
    /// Constraints holding with equality at the optimum.
    pub tight: Vec<usize>,
}

/// Minimizes `x + y`. Ties go to the lexicographically smallest `(x, y)`.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    let (x, y) = problem
        .feasible_vertices()
        .into_iter()
        .min_by(|(x1, y1), (x2, y2)| {
            (x1 + y1)
                .cmp(&(x2 + y2))
                .then_with(|| (x1, y1).cmp(&(x2, y2)))
        })
        .ok_or(LpError::Infeasible)?;
    let tight = problem.tight_constraints(&x, &y);
    let vertex_kind = match tight.len() {
        0 => VertexKind::BoxCorner,
        1 => VertexKind::ConstraintBox,
        _ => VertexKind::ConstraintConstraint,
    };
    let value = &x + &y;
    Ok(LpSolution {
        x,
        y,
        value,
        vertex_kind,
        tight,
    })
}

fn first_constraint(p: &SplitParams) -> Constraint {
    let (l, k_f, r_f, ell) = (p.lambda as i64, p.k_f as i64, p.r_f as i64, p.ell as i64);
    Constraint::new(q(r_f), q(k_f), q(l * k_f * r_f * ell))
}

fn initial_box(p: &SplitParams) -> (BigRational, BigRational) {
    (q((p.k_i() * p.ell) as i64), q((p.r_i * p.ell) as i64))
}

/// Program behind the `kF <= rF` bound: only the total-rank constraint.
pub fn thm1_problem(p: &SplitParams) -> Result<LpProblem> {
    if p.k_f > p.r_f {
        return Err(LpError::RegimeMismatch {
            which: "thm1",
            premise: "kF <= rF",
        });
    }
    let (x_max, y_max) = initial_box(p);
    LpProblem::new(vec![first_constraint(p)], x_max, y_max)
}

/// Program behind the `rF < kF`, `rI <= kF` bound.
pub fn thm2_problem(p: &SplitParams) -> Result<LpProblem> {
    if p.r_f >= p.k_f {
        return Err(LpError::RegimeMismatch {
            which: "thm2",
            premise: "rF < kF",
        });
    }
    if p.r_i > p.k_f {
        return Err(LpError::RegimeMismatch {
            which: "thm2",
            premise: "rI <= kF",
        });
    }
    let (l, k_f, r_f, r_i, ell) = (
        p.lambda as i64,
        p.k_f as i64,
        p.r_f as i64,
        p.r_i as i64,
        p.ell as i64,
    );
    let x_floor = frac(l * k_f * (l - 1) * r_f * ell, (l - 1) * r_f + r_i);
    let (x_max, y_max) = initial_box(p);
    LpProblem::new(
        vec![first_constraint(p), Constraint::new(q(1), q(0), x_floor)],
        x_max,
        y_max,
    )
}

/// Program behind the `rF < kF < rI` bound.
pub fn thm3_problem(p: &SplitParams) -> Result<LpProblem> {
    if !(p.r_f < p.k_f && p.k_f < p.r_i) {
        return Err(LpError::RegimeMismatch {
            which: "thm3",
            premise: "rF < kF < rI",
        });
    }
    let (l, k_f, r_f, r_i, ell) = (
        p.lambda as i64,
        p.k_f as i64,
        p.r_f as i64,
        p.r_i as i64,
        p.ell as i64,
    );
    let second = Constraint::new(
        frac((l - 1) * r_f + k_f, k_f),
        frac(l * (r_i - k_f), r_i),
        q(l * (l - 1) * r_f * ell),
    );
    let (x_max, y_max) = initial_box(p);
    LpProblem::new(vec![first_constraint(p), second], x_max, y_max)
}

/// Builds the program matching the premise that holds at `p`.
pub fn problem_for(p: &SplitParams) -> Result<(Regime, LpProblem)> {
    if p.k_f <= p.r_f {
        Ok((Regime::Thm1, thm1_problem(p)?))
    } else if p.r_i <= p.k_f {
        Ok((Regime::Thm2Case1, thm2_problem(p)?))
    } else {
        Ok((Regime::Thm3Case1, thm3_problem(p)?))
    }
}

/// The oracle's optimum for whichever program applies at `p`.
pub fn oracle_bound(p: &SplitParams) -> Result<LpSolution> {
    solve(&problem_for(p)?.1)
}
