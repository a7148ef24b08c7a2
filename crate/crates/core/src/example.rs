//! The bundled worked example: `lambda = 2`, `kF = 2`, `rF = 1`, `rI = 4`,
//! `ell = 4` over `F_43`, with a plan reading subsymbols `{0, 1}` of each
//! retired symbol and nothing from the unchanged ones.

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bounds::{bound_thm3, Regime};
use crate::code_model::{encode_final, is_mds_systematic, ConvertiblePair, Message};
use crate::conversion::{
    build_restricted, convert, cost, derive_transform, feasibility_of, ReadPlan,
};
use crate::io::{parse_json, CodeFile, MatrixFile, PlanFile};
use crate::rational::display;

pub const CODE_JSON: &str = include_str!("../data/worked_example/code.json");
pub const PLAN_JSON: &str = include_str!("../data/worked_example/plan.json");
pub const E_JSON: &str = include_str!("../data/worked_example/e.json");

/// SHA-256 of [`canonical_text`] for the bundled files.
pub const CHECKSUM: &str = "ea00ed51c8ac2379cad6334d2d2d76a50a4e5282aed54324de189bbec45b3173";

/// `(lambda, kF, rF, rI, ell, p)` of the example.
pub const PARAMS: (usize, usize, usize, usize, usize, u64) = (2, 2, 1, 4, 4, 43);

pub const DEFAULT_MESSAGES: usize = 100;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub code: CodeFile,
    pub plan: PlanFile,
    pub e: MatrixFile,
}

impl Fixture {
    pub fn bundled() -> Self {
        Self {
            code: parse_json(CODE_JSON, "worked_example/code.json").expect("bundled code parses"),
            plan: parse_json(PLAN_JSON, "worked_example/plan.json").expect("bundled plan parses"),
            e: parse_json(E_JSON, "worked_example/e.json").expect("bundled E parses"),
        }
    }

    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(canonical_text(self).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn push_rows(out: &mut String, rows: &[Vec<i64>]) {
    for r in rows {
        let cells: Vec<String> = r.iter().map(i64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
}

/// Whitespace-independent rendering of the fixture's signed entries, as transcribed.
pub fn canonical_text(f: &Fixture) -> String {
    let c = &f.code;
    let mut out = format!(
        "p={} ell={} lambda={} kF={} rF={} rI={}\nB\n",
        c.p, c.ell, c.lambda, c.k_f, c.r_f, c.r_i
    );
    push_rows(&mut out, &c.b);
    out.push_str("C\n");
    push_rows(&mut out, &c.c);
    out.push_str("D\n");
    for d in &f.plan.d {
        let cells: Vec<String> = d.iter().map(usize::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.push_str(&format!("E p={}\n", f.e.p));
    push_rows(&mut out, &f.e.m);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExampleReport {
    pub checks: Vec<Check>,
    pub read: Option<usize>,
    pub write: Option<usize>,
    pub bound: Option<String>,
    pub regime: Option<Regime>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Compare against this checksum first; `None` for edited fixtures.
    pub expected_checksum: Option<String>,
    pub messages: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            expected_checksum: Some(CHECKSUM.to_string()),
            messages: DEFAULT_MESSAGES,
            seed: DEFAULT_SEED,
        }
    }
}

struct Recorder(Vec<Check>);

impl Recorder {
    fn check(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) -> bool {
        self.0.push(Check {
            name,
            passed,
            detail: detail.into(),
        });
        passed
    }

    fn fail(&mut self, name: &'static str, detail: impl ToString) {
        self.check(name, false, detail.to_string());
    }
}

/// Runs every check of the worked example. Checks whose inputs could not be
/// built are recorded as failures and the run stops there.
pub fn verify_fixture(f: &Fixture, opts: &VerifyOptions) -> ExampleReport {
    let mut rec = Recorder(Vec::new());
    let mut report = ExampleReport {
        checks: Vec::new(),
        read: None,
        write: None,
        bound: None,
        regime: None,
    };
    run(f, opts, &mut rec, &mut report);
    report.checks = rec.0;
    report
}

pub fn verify_bundled() -> ExampleReport {
    verify_fixture(&Fixture::bundled(), &VerifyOptions::default())
}

fn run(f: &Fixture, opts: &VerifyOptions, rec: &mut Recorder, report: &mut ExampleReport) {
    if let Some(want) = &opts.expected_checksum {
        let got = f.checksum();
        rec.check("checksum", &got == want, format!("sha256 {got}"));
    }
    let c = &f.code;
    let (lambda, k_f, r_f, r_i, ell, p) = PARAMS;
    rec.check(
        "params",
        (c.lambda, c.k_f, c.r_f, c.r_i, c.ell, c.p) == (lambda, k_f, r_f, r_i, ell, p),
        format!(
            "lambda={} kF={} rF={} rI={} ell={} p={}",
            c.lambda, c.k_f, c.r_f, c.r_i, c.ell, c.p
        ),
    );

    let pair: ConvertiblePair = match c.to_pair() {
        Ok(pair) => pair,
        Err(e) => return rec.fail("load_code", e),
    };
    let params = pair.params;
    let n_subsets = num_combinations(params.n_i(), params.k_i());
    match is_mds_systematic(params.n_i(), params.k_i(), params.ell(), &pair.b) {
        Ok(ok) => rec.check(
            "b_mds",
            ok,
            format!("{n_subsets} symbol subsets, block superregularity agrees"),
        ),
        Err(e) => return rec.fail("b_mds", e),
    };
    match is_mds_systematic(params.n_f(), params.k_f(), params.ell(), &pair.c) {
        Ok(ok) => rec.check("c_mds", ok, "final code"),
        Err(e) => return rec.fail("c_mds", e),
    };

    let plan: ReadPlan = match f.plan.to_plan(&params) {
        Ok(plan) => plan,
        Err(e) => return rec.fail("load_plan", e),
    };
    let rm = match build_restricted(&pair, &plan) {
        Ok(rm) => rm,
        Err(e) => return rec.fail("restricted_matrices", e),
    };
    let feas = feasibility_of(&rm).expect("restricted matrices share a row count");
    let target = params.lambda() * params.r_f() * params.ell();
    rec.check(
        "inclusion_c_in_b",
        feas.holds,
        format!("rank B~ = {}, rank C~ = {}", feas.rank_b, feas.rank_c),
    );
    let reverse = rm
        .c_tilde
        .column_space_contains(&rm.b_tilde)
        .expect("same row count");
    rec.check(
        "inclusion_b_in_c",
        reverse,
        "column spaces equal when both hold",
    );
    rec.check(
        "ranks",
        feas.rank_b == target && feas.rank_c == target,
        format!(
            "rank B~ = {}, rank C~ = {}, expected {target}",
            feas.rank_b, feas.rank_c
        ),
    );

    match f.e.to_matrix() {
        Ok(e) if e.field() == pair.field() => {
            rec.check("e_witness", rm.is_witness(&e), "C~ E = B~");
            rec.check(
                "e_invertible",
                e.is_invertible(),
                format!("{} x {}", e.rows(), e.cols()),
            );
        }
        Ok(_) => rec.fail("e_witness", "E is over a different field"),
        Err(e) => rec.fail("e_witness", e),
    }
    match rm.c_tilde.solve_right(&rm.b_tilde) {
        Ok(x) => rec.check(
            "solve_c_b",
            rm.is_witness(&x),
            "canonical solution of C~ X = B~",
        ),
        Err(e) => rec.check("solve_c_b", false, e.to_string()),
    };

    let transform = match derive_transform(&pair, &plan) {
        Ok(t) => {
            rec.check(
                "derive_transform",
                true,
                format!("T is {} x {}", t.matrix.rows(), t.matrix.cols()),
            );
            t
        }
        Err(e) => return rec.fail("derive_transform", e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut mismatches = 0usize;
    for _ in 0..opts.messages {
        let m = Message::random(&params, &mut rng);
        let converted =
            convert(&pair, &plan, &transform, &m).expect("transform derived for this plan");
        for (i, cw) in converted.iter().enumerate() {
            if *cw != encode_final(&pair, m.segment(&params, i)).expect("segment length matches") {
                mismatches += 1;
            }
        }
    }
    rec.check(
        "conversions",
        mismatches == 0,
        format!(
            "{} messages, {mismatches} mismatched codewords",
            opts.messages
        ),
    );

    let costs = cost(&plan, &params).expect("plan checked against params");
    report.read = Some(costs.read);
    report.write = Some(costs.write);
    match bound_thm3(&params.split) {
        Ok(b) => {
            let read = BigRational::from_integer(costs.read.into());
            let closed = BigRational::from_integer(target.into());
            report.bound = Some(display(&b.value));
            report.regime = Some(b.regime);
            rec.check(
                "read_meets_bound",
                read == b.value && b.value == closed && b.regime == Regime::Thm3Case1,
                format!(
                    "read {} write {} bound {} regime {}",
                    costs.read,
                    costs.write,
                    display(&b.value),
                    b.regime
                ),
            );
        }
        Err(e) => rec.fail("read_meets_bound", e),
    }
}

fn num_combinations(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_passes() {
        let report = verify_bundled();
        assert!(report.passed(), "{:#?}", report.first_failure());
        assert_eq!((report.read, report.write), (Some(8), Some(8)));
        assert_eq!(report.bound.as_deref(), Some("8/1"));
        assert_eq!(report.regime, Some(Regime::Thm3Case1));
    }

    #[test]
    fn checksum_matches() {
        assert_eq!(Fixture::bundled().checksum(), CHECKSUM);
    }

    #[test]
    fn combinations() {
        assert_eq!(num_combinations(8, 4), 70);
    }

    #[test]
    fn empty_plan_breaks_inclusion() {
        let mut f = Fixture::bundled();
        f.plan.d = vec![vec![]; 8];
        let report = verify_fixture(
            &f,
            &VerifyOptions {
                expected_checksum: None,
                ..Default::default()
            },
        );
        assert_eq!(report.first_failure().unwrap().name, "inclusion_c_in_b");
    }

    #[test]
    fn corrupted_entry_detected() {
        let mut f = Fixture::bundled();
        f.code.b[0][0] += 1;
        let report = verify_fixture(&f, &VerifyOptions::default());
        assert_eq!(report.first_failure().unwrap().name, "checksum");
        let later: Vec<_> = report
            .checks
            .iter()
            .skip(1)
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert!(
            later.contains(&"b_mds") || later.contains(&"inclusion_c_in_b"),
            "{later:?}"
        );
    }
}
