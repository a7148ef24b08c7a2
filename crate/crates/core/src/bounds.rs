//! Closed-form lower bounds on the read bandwidth of split conversions.
//!
//! All values are exact rationals in subsymbol units. Regime dispatch
//! follows the premises of the three bounds, which partition the parameter
//! space:
//!
//! * `kF <= rF`: read everything of the message, `kI * ell`.
//! * `rF < kF` and `rI <= kF`: two cases split at `rI = rF`.
//! * `rF < kF < rI`: four cases decided by `kI` vs `rI`, the sign of
//!   `disc = lambda*kF^2 - (lambda-1)(kF-rF)rI`, and `rI` vs `(lambda-1)rF + kF`.
//!
//! Where case conditions overlap on a boundary every matching formula is
//! evaluated and must agree; a disagreement is a [`BoundError::CaseConflict`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::code_model::SplitParams;
use crate::rational::{frac, q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("regime mismatch: {which} requires {premise}")]
    RegimeMismatch {
        which: &'static str,
        premise: &'static str,
    },
    #[error("case formulas disagree: {0}")]
    CaseConflict(String),
    #[error("no case condition matches {0:?}")]
    NoMatchingCase(SplitParams),
    #[error("identity violated: {0}")]
    IdentityViolation(String),
    #[error("bad grid spec: {0}")]
    BadGridSpec(String),
}

pub type Result<T> = std::result::Result<T, BoundError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Regime {
    #[serde(rename = "THM1")]
    Thm1,
    #[serde(rename = "THM2_CASE1")]
    Thm2Case1,
    #[serde(rename = "THM2_CASE2")]
    Thm2Case2,
    #[serde(rename = "THM3_CASE1")]
    Thm3Case1,
    #[serde(rename = "THM3_CASE2")]
    Thm3Case2,
    #[serde(rename = "THM3_CASE3")]
    Thm3Case3,
    #[serde(rename = "THM3_CASE4")]
    Thm3Case4,
    #[serde(rename = "PRIOR_LOW")]
    PriorLow,
    #[serde(rename = "PRIOR_HIGH")]
    PriorHigh,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Thm1 => "THM1",
            Regime::Thm2Case1 => "THM2_CASE1",
            Regime::Thm2Case2 => "THM2_CASE2",
            Regime::Thm3Case1 => "THM3_CASE1",
            Regime::Thm3Case2 => "THM3_CASE2",
            Regime::Thm3Case3 => "THM3_CASE3",
            Regime::Thm3Case4 => "THM3_CASE4",
            Regime::PriorLow => "PRIOR_LOW",
            Regime::PriorHigh => "PRIOR_HIGH",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundResult {
    pub value: BigRational,
    pub regime: Regime,
    /// `ceil(value)`. Informational only.
    pub ceiling: BigInt,
    /// Optimal `(x, y)` of the two-variable program where the bound has a
    /// closed-form vertex (`x` = reads from unchanged symbols, `y` = reads
    /// from retired symbols).
    pub vertex: Option<(BigRational, BigRational)>,
}

impl BoundResult {
    fn new(value: BigRational, regime: Regime) -> Self {
        let ceiling = value.ceil().to_integer();
        Self {
            value,
            regime,
            ceiling,
            vertex: None,
        }
    }

    fn with_vertex(mut self, x: BigRational, y: BigRational) -> Self {
        self.vertex = Some((x, y));
        self
    }
}

struct P {
    lambda: i64,
    k_f: i64,
    r_f: i64,
    r_i: i64,
    ell: i64,
}

impl P {
    fn of(params: &SplitParams) -> Self {
        Self {
            lambda: params.lambda as i64,
            k_f: params.k_f as i64,
            r_f: params.r_f as i64,
            r_i: params.r_i as i64,
            ell: params.ell as i64,
        }
    }

    fn k_i(&self) -> i64 {
        self.lambda * self.k_f
    }

    /// `lambda*kF^2 - (lambda-1)(kF-rF)rI`.
    fn disc(&self) -> i64 {
        self.lambda * self.k_f * self.k_f - (self.lambda - 1) * (self.k_f - self.r_f) * self.r_i
    }
}

/// Bound for `kF <= rF`: `R >= kI * ell`.
pub fn bound_thm1(params: &SplitParams) -> Result<BoundResult> {
    let p = P::of(params);
    if p.k_f > p.r_f {
        return Err(BoundError::RegimeMismatch {
            which: "thm1",
            premise: "kF <= rF",
        });
    }
    Ok(BoundResult::new(q(p.k_i() * p.ell), Regime::Thm1))
}

/// Bound for `rF < kF`, `rI <= kF`.
pub fn bound_thm2(params: &SplitParams) -> Result<BoundResult> {
    let p = P::of(params);
    if p.r_f >= p.k_f {
        return Err(BoundError::RegimeMismatch {
            which: "thm2",
            premise: "rF < kF",
        });
    }
    if p.r_i > p.k_f {
        return Err(BoundError::RegimeMismatch {
            which: "thm2",
            premise: "rI <= kF",
        });
    }
    let case1 = || q(p.lambda * p.k_f * p.ell) - frac((p.k_f - p.r_f) * p.r_i * p.ell, p.r_f);
    let case2 = || {
        frac(
            p.lambda * p.r_f * p.ell * ((p.lambda - 1) * p.k_f + p.r_i),
            (p.lambda - 1) * p.r_f + p.r_i,
        )
    };
    if p.r_i < p.r_f {
        Ok(BoundResult::new(case1(), Regime::Thm2Case1))
    } else if p.r_i > p.r_f {
        Ok(BoundResult::new(case2(), Regime::Thm2Case2))
    } else {
        let (a, b) = (case1(), case2());
        if a != b {
            return Err(BoundError::CaseConflict(format!(
                "thm2 at rI = rF: {a} vs {b}"
            )));
        }
        Ok(BoundResult::new(a, Regime::Thm2Case1))
    }
}

/// All cases of the `rF < kF < rI` regime whose conditions hold, with value and displayed vertex.
fn thm3_matches(p: &P) -> Vec<(Regime, BigRational, (BigRational, BigRational))> {
    let (l, k_f, r_f, r_i, ell) = (p.lambda, p.k_f, p.r_f, p.r_i, p.ell);
    let k_i = p.k_i();
    let disc = p.disc();
    let mut out = Vec::new();
    if k_i <= r_i {
        out.push((
            Regime::Thm3Case1,
            q(l * r_f * ell),
            (q(0), q(l * r_f * ell)),
        ));
    }
    if k_i > r_i && disc >= 0 {
        let den = k_f * r_i - r_f * r_i + l * k_f * r_f;
        let value = frac(l * l * k_f * k_f * r_f * ell, den);
        let x = frac(l * k_f * r_f * (l * k_f - r_i) * ell, den);
        let y = frac(l * k_f * r_f * r_i * ell, den);
        out.push((Regime::Thm3Case2, value, (x, y)));
    }
    let threshold = (l - 1) * r_f + k_f;
    if r_i < threshold && disc <= 0 {
        let x = frac(l * k_f * ((l - 1) * r_f - (r_i - k_f)) * ell, threshold);
        let value = q(r_i * ell) + x.clone();
        out.push((Regime::Thm3Case3, value, (x, q(r_i * ell))));
    }
    if k_i > r_i && r_i >= threshold && disc <= 0 {
        let y = frac((l - 1) * r_f * r_i * ell, r_i - k_f);
        out.push((Regime::Thm3Case4, y.clone(), (q(0), y)));
    }
    out
}

/// Bound for `rF < kF < rI`.
pub fn bound_thm3(params: &SplitParams) -> Result<BoundResult> {
    let p = P::of(params);
    if !(p.r_f < p.k_f) {
        return Err(BoundError::RegimeMismatch {
            which: "thm3",
            premise: "rF < kF",
        });
    }
    if !(p.k_f < p.r_i) {
        return Err(BoundError::RegimeMismatch {
            which: "thm3",
            premise: "kF < rI",
        });
    }
    let matches = thm3_matches(&p);
    let Some((regime, value, (x, y))) = matches.first().cloned() else {
        return Err(BoundError::NoMatchingCase(*params));
    };
    if let Some((other, v, _)) = matches.iter().find(|(_, v, _)| *v != value) {
        return Err(BoundError::CaseConflict(format!(
            "{regime} = {value} but {other} = {v} at {params:?}"
        )));
    }
    Ok(BoundResult::new(value, regime).with_vertex(x, y))
}

/// Every case of the `rF < kF < rI` regime whose condition holds at `params`, with its formula
/// value and displayed optimal vertex. Empty outside `rF < kF < rI`.
pub fn thm3_case_formulas(
    params: &SplitParams,
) -> Vec<(Regime, BigRational, (BigRational, BigRational))> {
    let p = P::of(params);
    if p.r_f < p.k_f && p.k_f < p.r_i {
        thm3_matches(&p)
    } else {
        Vec::new()
    }
}

/// The earlier bound for split conversions that assumes uniform download.
pub fn bound_prior(params: &SplitParams) -> BoundResult {
    let p = P::of(params);
    if p.r_i <= p.lambda * p.r_f {
        let slack = frac(p.k_f, p.r_f) - q(1);
        let slack = if slack.is_positive() { slack } else { q(0) };
        let value = q(p.lambda * p.k_f * p.ell) - q(p.r_i * p.ell) * slack;
        BoundResult::new(value, Regime::PriorLow)
    } else {
        BoundResult::new(q(p.lambda * p.r_f.min(p.k_f) * p.ell), Regime::PriorHigh)
    }
}

/// Dispatches to the bound whose premise holds. The boundary `kF = rF` goes
/// to the first bound, `rI = kF` to the second.
pub fn lower_bound(params: &SplitParams) -> Result<BoundResult> {
    if params.k_f <= params.r_f {
        bound_thm1(params)
    } else if params.r_i <= params.k_f {
        bound_thm2(params)
    } else {
        bound_thm3(params)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub regime: Regime,
    pub ours: BigRational,
    pub prior: BigRational,
    pub delta: BigRational,
    pub strict: bool,
}

pub fn compare(params: &SplitParams) -> Result<Comparison> {
    let ours = lower_bound(params)?;
    let prior = bound_prior(params).value;
    let delta = &ours.value - &prior;
    Ok(Comparison {
        regime: ours.regime,
        strict: delta.is_positive(),
        ours: ours.value,
        prior,
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    fn holds(self, lhs: &BigRational, rhs: &BigRational) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
        }
    }
}

/// One evaluated comparison identity: `lhs relation rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub label: &'static str,
    pub lhs: BigRational,
    pub relation: Relation,
    pub rhs: BigRational,
    pub holds: bool,
}

fn check(
    label: &'static str,
    lhs: BigRational,
    relation: Relation,
    rhs: BigRational,
) -> IdentityCheck {
    let holds = relation.holds(&lhs, &rhs);
    IdentityCheck {
        label,
        lhs,
        relation,
        rhs,
        holds,
    }
}

/// Evaluates both sides of each comparison identity that applies at `params`.
///
/// * `ratio_mid_low`: `rF <= rI <= kF`, `rI <= lambda*rF`: prior/ours equals
///   `1 - rI(kF-rF)(rI-rF) / (lambda rF^2 ((lambda-1)kF + rI))`, and is `<= 1`.
/// * `ratio_mid_high`: same range with `rI > lambda*rF`: prior/ours equals
///   `((lambda-1)rF + rI) / ((lambda-1)kF + rI)`, and is `<= 1`.
/// * `case2_high` .. `case4`: comparisons against the prior bound for `rF < kF < rI < kI`.
///
/// Returns [`BoundError::IdentityViolation`] on the first failing relation.
pub fn comparison_identities(params: &SplitParams) -> Result<Vec<IdentityCheck>> {
    let p = P::of(params);
    let (l, k_f, r_f, r_i, ell) = (p.lambda, p.k_f, p.r_f, p.r_i, p.ell);
    let k_i = p.k_i();
    let ours = lower_bound(params)?.value;
    let prior = bound_prior(params).value;
    let mut checks = Vec::new();

    if r_f < k_f && r_f <= r_i && r_i <= k_f {
        let ratio = &prior / &ours;
        if r_i <= l * r_f {
            let rhs = q(1)
                - frac(
                    r_i * (k_f - r_f) * (r_i - r_f),
                    l * r_f * r_f * ((l - 1) * k_f + r_i),
                );
            checks.push(check("ratio_mid_low", ratio.clone(), Relation::Eq, rhs));
            checks.push(check("ratio_mid_low_le_1", ratio, Relation::Le, q(1)));
        } else {
            let rhs = frac((l - 1) * r_f + r_i, (l - 1) * k_f + r_i);
            checks.push(check("ratio_mid_high", ratio.clone(), Relation::Eq, rhs));
            checks.push(check("ratio_mid_high_le_1", ratio, Relation::Le, q(1)));
        }
    }

    if r_f < k_f && k_f < r_i && r_i < k_i {
        let threshold = (l - 1) * r_f + k_f;
        for (regime, value, _) in thm3_matches(&p) {
            match regime {
                Regime::Thm3Case2 if r_i >= l * r_f => {
                    let lhs = q(l * r_f * ell) / &value;
                    let rhs = frac(
                        r_i * (k_f - r_f) + l * k_f * r_f,
                        l * k_f * (k_f - r_f) + l * k_f * r_f,
                    );
                    checks.push(check("case2_high", lhs.clone(), Relation::Eq, rhs));
                    checks.push(check("case2_high_lt_1", lhs, Relation::Lt, q(1)));
                }
                Regime::Thm3Case2 => {
                    let prior_low = q(l * k_f * ell) - q(r_i * ell) * (frac(k_f, r_f) - q(1));
                    let lhs = prior_low / &value;
                    let a = l * k_f * r_f;
                    let b = r_i * (k_f - r_f);
                    let rhs = frac(a * a - b * b, a * a);
                    checks.push(check("case2_low", lhs.clone(), Relation::Eq, rhs));
                    checks.push(check("case2_low_lt_1", lhs, Relation::Lt, q(1)));
                }
                Regime::Thm3Case3 if r_i >= l * r_f => {
                    let rewritten = q(r_i * ell) + q(l * k_f * ell) * (q(1) - frac(r_i, threshold));
                    checks.push(check("case3_high", value.clone(), Relation::Eq, rewritten));
                    checks.push(check(
                        "case3_high_gt_prior",
                        value,
                        Relation::Gt,
                        q(l * r_f * ell),
                    ));
                }
                Regime::Thm3Case3 => {
                    let rewritten =
                        q(l * k_f * ell) - q(r_i * ell) * (frac(l * k_f, threshold) - q(1));
                    let prior_low = q(l * k_f * ell) - q(r_i * ell) * (frac(k_f, r_f) - q(1));
                    checks.push(check(
                        "case3_low_slope",
                        frac(l * k_f, threshold),
                        Relation::Lt,
                        frac(k_f, r_f),
                    ));
                    checks.push(check("case3_low", value.clone(), Relation::Eq, rewritten));
                    checks.push(check("case3_low_gt_prior", value, Relation::Gt, prior_low));
                }
                Regime::Thm3Case4 => {
                    let lhs = q(l * r_f * ell) / &value;
                    let rhs = frac(l * r_i - k_i, (l - 1) * r_i);
                    checks.push(check("case4", lhs.clone(), Relation::Eq, rhs));
                    checks.push(check("case4_lt_1", lhs, Relation::Lt, q(1)));
                }
                _ => {}
            }
        }
    }

    if let Some(bad) = checks.iter().find(|c| !c.holds) {
        return Err(BoundError::IdentityViolation(format!(
            "{}: {} {} {} fails at {params:?}",
            bad.label,
            bad.lhs,
            bad.relation.symbol(),
            bad.rhs
        )));
    }
    Ok(checks)
}

/// A rectangular sweep over parameter tuples, e.g.
/// `lambda=2..3,kF=1..6,rF=1..6,rI=1..12,ell=1,2,4`.
///
/// Each key takes a comma-separated list of integers or inclusive `a..b`
/// ranges; bare values after a key extend that key's list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamGrid {
    pub lambda: Vec<usize>,
    pub k_f: Vec<usize>,
    pub r_f: Vec<usize>,
    pub r_i: Vec<usize>,
    pub ell: Vec<usize>,
}

impl ParamGrid {
    pub const DEFAULT_SPEC: &'static str = "lambda=2..4,kF=1..6,rF=1..6,rI=1..12,ell=1,2,4";

    pub fn parse(spec: &str) -> Result<Self> {
        let mut lists: [Option<Vec<usize>>; 5] = Default::default();
        let keys = ["lambda", "kF", "rF", "rI", "ell"];
        let mut current: Option<usize> = None;
        for token in spec.split(',').map(str::trim) {
            if token.is_empty() {
                return Err(BoundError::BadGridSpec(format!("empty item in {spec:?}")));
            }
            let values = match token.split_once('=') {
                Some((key, values)) => {
                    let idx = keys
                        .iter()
                        .position(|k| *k == key.trim())
                        .ok_or_else(|| BoundError::BadGridSpec(format!("unknown key {key:?}")))?;
                    if lists[idx].is_some() {
                        return Err(BoundError::BadGridSpec(format!("key {key:?} given twice")));
                    }
                    lists[idx] = Some(Vec::new());
                    current = Some(idx);
                    values
                }
                None => token,
            };
            let idx = current.ok_or_else(|| {
                BoundError::BadGridSpec(format!("value {token:?} before any key"))
            })?;
            let list = lists[idx].as_mut().expect("key registered");
            list.extend(parse_values(values)?);
        }
        let mut take = |i: usize| {
            lists[i]
                .take()
                .filter(|l| !l.is_empty())
                .ok_or_else(|| BoundError::BadGridSpec(format!("missing key {:?}", keys[i])))
        };
        Ok(Self {
            lambda: take(0)?,
            k_f: take(1)?,
            r_f: take(2)?,
            r_i: take(3)?,
            ell: take(4)?,
        })
    }

    /// Valid tuples in lexicographic order of `(lambda, kF, rF, rI, ell)`.
    /// Tuples that fail [`SplitParams::new`] are skipped.
    pub fn tuples(&self) -> Vec<SplitParams> {
        let mut out = Vec::new();
        for &lambda in &self.lambda {
            for &k_f in &self.k_f {
                for &r_f in &self.r_f {
                    for &r_i in &self.r_i {
                        for &ell in &self.ell {
                            if let Ok(p) = SplitParams::new(lambda, k_f, r_f, r_i, ell) {
                                out.push(p);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn parse_values(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| BoundError::BadGridSpec(format!("not a count: {t:?}")))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(BoundError::BadGridSpec(format!("empty range {a}..{b}")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(s)?]),
    }
}

/// One row of a grid comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridRow {
    pub params: SplitParams,
    pub comparison: Comparison,
}

impl GridRow {
    pub const CSV_HEADER: &'static str =
        "lambda,kF,rF,rI,ell,regime,ours_num,ours_den,prior_num,prior_den,delta_num,delta_den";

    pub fn to_csv(&self) -> String {
        let p = &self.params;
        let c = &self.comparison;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.lambda,
            p.k_f,
            p.r_f,
            p.r_i,
            p.ell,
            c.regime,
            c.ours.numer(),
            c.ours.denom(),
            c.prior.numer(),
            c.prior.denom(),
            c.delta.numer(),
            c.delta.denom()
        )
    }
}

/// Compares both bounds on every tuple of `grid`, in parallel, in grid order.
pub fn sweep(grid: &ParamGrid) -> Result<Vec<GridRow>> {
    grid.tuples()
        .into_par_iter()
        .map(|params| {
            Ok(GridRow {
                params,
                comparison: compare(&params)?,
            })
        })
        .collect()
}

/// True iff `v` is a non-negative rational.
pub fn is_nonnegative(v: &BigRational) -> bool {
    !v.is_negative() || v.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(lambda: usize, k_f: usize, r_f: usize, r_i: usize, ell: usize) -> SplitParams {
        SplitParams::new(lambda, k_f, r_f, r_i, ell).unwrap()
    }

    #[test]
    fn thm1_examples() {
        assert_eq!(bound_thm1(&sp(2, 2, 3, 1, 4)).unwrap().value, q(16));
        assert_eq!(bound_thm1(&sp(3, 1, 1, 1, 1)).unwrap().value, q(3));
        assert!(matches!(
            bound_thm1(&sp(2, 3, 2, 1, 1)),
            Err(BoundError::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn thm2_examples() {
        let a = bound_thm2(&sp(2, 4, 2, 1, 2)).unwrap();
        assert_eq!((a.value, a.regime), (q(14), Regime::Thm2Case1));
        let b = bound_thm2(&sp(2, 4, 2, 3, 1)).unwrap();
        assert_eq!((b.value, b.regime), (frac(28, 5), Regime::Thm2Case2));
        assert_eq!(bound_thm2(&sp(2, 4, 2, 2, 1)).unwrap().value, q(6));
        assert!(matches!(
            bound_thm2(&sp(2, 2, 1, 4, 4)),
            Err(BoundError::RegimeMismatch { .. })
        ));
        assert!(matches!(
            bound_thm2(&sp(2, 2, 2, 1, 1)),
            Err(BoundError::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn thm3_examples() {
        let a = bound_thm3(&sp(2, 2, 1, 4, 4)).unwrap();
        assert_eq!((a.value.clone(), a.regime), (q(8), Regime::Thm3Case1));
        assert_eq!(a.vertex, Some((q(0), q(8))));
        let b = bound_thm3(&sp(2, 3, 1, 4, 1)).unwrap();
        assert_eq!((b.value, b.regime), (frac(18, 7), Regime::Thm3Case2));
        let c = bound_thm3(&sp(6, 3, 2, 11, 1)).unwrap();
        assert_eq!((c.value, c.regime), (frac(179, 13), Regime::Thm3Case3));
        let d = bound_thm3(&sp(6, 3, 2, 13, 1)).unwrap();
        assert_eq!((d.value, d.regime), (q(13), Regime::Thm3Case4));
        assert_eq!(d.vertex, Some((q(0), q(13))));
        assert!(matches!(
            bound_thm3(&sp(2, 4, 2, 3, 1)),
            Err(BoundError::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn thm3_overlap_at_zero_discriminant() {
        // disc = 3*16 - 2*3*8 = 0: cases 2 and 4 both hold and agree
        let params = sp(3, 4, 1, 8, 1);
        let matches = thm3_case_formulas(&params);
        let regimes: Vec<Regime> = matches.iter().map(|m| m.0).collect();
        assert_eq!(regimes, vec![Regime::Thm3Case2, Regime::Thm3Case4]);
        assert_eq!(bound_thm3(&params).unwrap().value, q(4));
    }

    #[test]
    fn prior_examples() {
        assert_eq!(bound_prior(&sp(2, 2, 1, 4, 4)).value, q(8));
        assert_eq!(bound_prior(&sp(2, 4, 2, 3, 1)).value, q(5));
        assert_eq!(bound_prior(&sp(2, 2, 3, 1, 1)).value, q(4));
    }

    #[test]
    fn dispatch() {
        let a = lower_bound(&sp(2, 2, 1, 4, 4)).unwrap();
        assert_eq!((a.regime, a.value), (Regime::Thm3Case1, q(8)));
        let b = lower_bound(&sp(2, 2, 2, 5, 1)).unwrap();
        assert_eq!((b.regime, b.value), (Regime::Thm1, q(4)));
        assert_eq!(
            lower_bound(&sp(2, 4, 2, 4, 1)).unwrap().regime,
            Regime::Thm2Case2
        );
    }

    #[test]
    fn compare_examples() {
        let a = compare(&sp(2, 4, 2, 3, 1)).unwrap();
        assert_eq!(
            (a.ours, a.prior, a.delta.clone()),
            (frac(28, 5), q(5), frac(3, 5))
        );
        assert!(a.strict);
        let b = compare(&sp(2, 2, 1, 4, 4)).unwrap();
        assert_eq!((b.ours, b.prior, b.delta), (q(8), q(8), q(0)));
        let c = compare(&sp(2, 2, 3, 1, 1)).unwrap();
        assert_eq!((c.ours, c.delta, c.strict), (q(4), q(0), false));
    }

    #[test]
    fn identity_examples() {
        let checks = comparison_identities(&sp(2, 4, 2, 3, 1)).unwrap();
        assert_eq!(checks[0].label, "ratio_mid_low");
        assert_eq!(checks[0].lhs, frac(25, 28));
        let checks = comparison_identities(&sp(2, 4, 1, 3, 1)).unwrap();
        assert_eq!(checks[0].label, "ratio_mid_high");
        assert_eq!(checks[0].rhs, frac(4, 7));
        let checks = comparison_identities(&sp(2, 4, 3, 3, 1)).unwrap();
        assert_eq!(checks[0].lhs, q(1));
        let checks = comparison_identities(&sp(6, 3, 2, 11, 1)).unwrap();
        assert!(checks.iter().any(|c| c.label == "case3_low"));
    }

    #[test]
    fn grid_parsing() {
        let g = ParamGrid::parse("lambda=2..3,kF=1..6,rF=1..6,rI=1..12,ell=1,2,4").unwrap();
        assert_eq!(g.lambda, vec![2, 3]);
        assert_eq!(g.ell, vec![1, 2, 4]);
        assert_eq!(g.tuples().len(), 2 * 6 * 6 * 12 * 3);
        assert!(ParamGrid::parse("lambda=2,kF=1,rF=1,rI=1").is_err());
        assert!(ParamGrid::parse("mu=2,kF=1,rF=1,rI=1,ell=1").is_err());
        assert!(ParamGrid::parse("lambda=3..2,kF=1,rF=1,rI=1,ell=1").is_err());
        assert!(ParamGrid::parse("1,lambda=2,kF=1,rF=1,rI=1,ell=1").is_err());
        let with_bad = ParamGrid::parse("lambda=1..2,kF=0..1,rF=1,rI=1,ell=1").unwrap();
        assert_eq!(with_bad.tuples(), vec![sp(2, 1, 1, 1, 1)]);
    }

    #[test]
    fn csv_row() {
        let params = sp(2, 4, 2, 3, 1);
        let row = GridRow {
            params,
            comparison: compare(&params).unwrap(),
        };
        assert_eq!(row.to_csv(), "2,4,2,3,1,THM2_CASE2,28,5,5,1,3,5");
    }
}
