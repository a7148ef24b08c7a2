//! Minimum-read plan search on small instances.
//!
//! Exhaustive mode walks all `2^(nI*ell)` plans level by level in
//! nondecreasing read cost and stops at the first level containing a
//! feasible plan. Within that level the winner is the plan whose
//! per-symbol bitmask vector is lexicographically smallest, so the result
//! does not depend on iteration order or thread scheduling.
//!
//! Prefix mode only considers plans reading `{0, .., beta_j - 1}` from each
//! symbol. It is an upper-bound heuristic and never reports itself as
//! exhaustive.

use std::time::Instant;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{lower_bound, BoundError};
use crate::code_model::{encode_final, CodeParams, ConvertiblePair, Message, ModelError};
use crate::conversion::{
    build_restricted, convert, derive_transform, feasibility_of, ConversionError, ReadPlan,
};

/// Largest exhaustive space (`nI * ell` bits) searched without an explicit plan cap.
pub const EXHAUSTIVE_BIT_CAP: usize = 24;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(
        "search space of 2^{bits} plans exceeds the 2^{cap} cap; use prefix mode or set max_plans"
    )]
    SpaceTooLarge { bits: usize, cap: usize },
    #[error("no feasible plan reads at most {max_read} subsymbols")]
    NoFeasiblePlan { max_read: usize },
    #[error("plan cap of {0} reached before any feasible plan was found")]
    SearchCapReached(u64),
    #[error("internal check failed: {0}")]
    InternalCheckFailed(String),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

pub type Result<T> = std::result::Result<T, SearchError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    PrefixOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub mode: SearchMode,
    /// Ignore plans reading more than this many subsymbols.
    pub max_read: Option<usize>,
    /// Stop after this many feasibility checks.
    pub max_plans: Option<u64>,
    /// Shuffle the plans of each cost level with this seed.
    pub seed: Option<u64>,
    /// Report each finished level on stderr.
    pub progress: bool,
}

impl SearchConfig {
    pub fn exhaustive() -> Self {
        Self {
            mode: SearchMode::Exhaustive,
            max_read: None,
            max_plans: None,
            seed: None,
            progress: false,
        }
    }

    pub fn prefix() -> Self {
        Self {
            mode: SearchMode::PrefixOnly,
            ..Self::exhaustive()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub best_plan: ReadPlan,
    pub best_cost: usize,
    /// Every plan of cost `<= best_cost` was examined, so `best_cost` is the
    /// true minimum for this pair.
    pub exhaustive: bool,
    pub plans_checked: u64,
}

fn is_feasible(pair: &ConvertiblePair, plan: &ReadPlan) -> bool {
    let rm = build_restricted(pair, plan).expect("plan built for this pair");
    feasibility_of(&rm)
        .expect("restricted matrices share a row count")
        .holds
}

/// All `bits`-bit words with exactly `ones` bits set, in increasing order.
fn words_with_popcount(bits: usize, ones: usize) -> Vec<u64> {
    if ones > bits {
        return Vec::new();
    }
    if ones == 0 {
        return vec![0];
    }
    let limit: u64 = if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    };
    let mut out = Vec::new();
    let mut w: u64 = (1u64 << ones) - 1;
    loop {
        out.push(w);
        // Gosper's hack: next word with the same popcount
        let c = w & w.wrapping_neg();
        let r = w.wrapping_add(c);
        if r == 0 {
            break;
        }
        let next = (((r ^ w) >> 2) / c) | r;
        if next > limit || next < w {
            break;
        }
        w = next;
    }
    out
}

/// Splits a packed word (bit `j*ell + t` = subsymbol `t` of symbol `j`) into masks.
fn unpack(word: u64, n: usize, ell: usize) -> Vec<u64> {
    let lane = (1u64 << ell) - 1;
    (0..n).map(|j| (word >> (j * ell)) & lane).collect()
}

/// All `beta` vectors with entries in `0..=ell` summing to `total`.
fn compositions(n: usize, ell: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, ell: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let remaining_slots = n - cur.len() - 1;
        for b in 0..=ell.min(left) {
            if left - b <= remaining_slots * ell {
                cur.push(b);
                rec(n, ell, left - b, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, ell, total, &mut Vec::with_capacity(n), &mut out);
    out
}

fn level_candidates(params: &CodeParams, mode: SearchMode, cost: usize) -> Vec<Vec<u64>> {
    let (n, ell) = (params.n_i(), params.ell());
    match mode {
        SearchMode::Exhaustive => words_with_popcount(n * ell, cost)
            .into_iter()
            .map(|w| unpack(w, n, ell))
            .collect(),
        SearchMode::PrefixOnly => compositions(n, ell, cost)
            .into_iter()
            .map(|betas| betas.into_iter().map(|b| (1u64 << b) - 1).collect())
            .collect(),
    }
}

fn space_bits(params: &CodeParams, mode: SearchMode) -> f64 {
    let (n, ell) = (params.n_i() as f64, params.ell() as f64);
    match mode {
        SearchMode::Exhaustive => n * ell,
        SearchMode::PrefixOnly => n * (ell + 1.0).log2(),
    }
}

/// Searches for a feasible plan of minimum read cost.
pub fn min_read_search(pair: &ConvertiblePair, config: &SearchConfig) -> Result<SearchResult> {
    let params = &pair.params;
    let full = params.n_i() * params.ell();
    if full > 64 {
        return Err(SearchError::SpaceTooLarge {
            bits: full,
            cap: EXHAUSTIVE_BIT_CAP,
        });
    }
    let bits = space_bits(params, config.mode);
    if config.max_plans.is_none() && bits > EXHAUSTIVE_BIT_CAP as f64 {
        return Err(SearchError::SpaceTooLarge {
            bits: bits.ceil() as usize,
            cap: EXHAUSTIVE_BIT_CAP,
        });
    }
    let max_read = config.max_read.unwrap_or(full).min(full);
    let mut checked: u64 = 0;
    let mut truncated = false;
    let started = Instant::now();

    for cost in 0..=max_read {
        let mut candidates = level_candidates(params, config.mode, cost);
        if let Some(seed) = config.seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ cost as u64);
            candidates.shuffle(&mut rng);
        }
        if let Some(cap) = config.max_plans {
            let room = cap.saturating_sub(checked) as usize;
            if candidates.len() > room {
                candidates.truncate(room);
                truncated = true;
            }
        }
        checked += candidates.len() as u64;

        let best = candidates
            .par_chunks(CHUNK)
            .filter_map(|chunk| {
                chunk
                    .iter()
                    .filter(|masks| {
                        let plan = ReadPlan::from_masks(params, masks).expect("masks fit the code");
                        is_feasible(pair, &plan)
                    })
                    .min()
                    .cloned()
            })
            .min();

        if config.progress {
            let secs = started.elapsed().as_secs_f64().max(1e-9);
            eprintln!(
                "cost {cost}: {checked} plans checked ({:.0} plans/s){}",
                checked as f64 / secs,
                if best.is_some() {
                    ", feasible plan found"
                } else {
                    ""
                }
            );
        }

        if let Some(masks) = best {
            let plan = ReadPlan::from_masks(params, &masks)?;
            debug_assert_eq!(plan.total_read(), cost);
            return Ok(SearchResult {
                best_plan: plan,
                best_cost: cost,
                exhaustive: config.mode == SearchMode::Exhaustive && !truncated,
                plans_checked: checked,
            });
        }
        if truncated {
            return Err(SearchError::SearchCapReached(
                config.max_plans.unwrap_or_default(),
            ));
        }
    }

    if max_read < full {
        Err(SearchError::NoFeasiblePlan { max_read })
    } else {
        Err(SearchError::InternalCheckFailed(
            "even the full-read plan is infeasible".into(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AchievabilityReport {
    pub cost: usize,
    pub bound: BigRational,
    /// `cost - bound`, never negative for a sound bound.
    pub gap: BigRational,
    pub messages_checked: usize,
}

/// Derives `T` for the found plan, checks it on random messages against
/// direct final encoding, and compares the cost with the lower bound.
pub fn verify_achievability(
    pair: &ConvertiblePair,
    result: &SearchResult,
    messages: usize,
    seed: u64,
) -> Result<AchievabilityReport> {
    let params = &pair.params;
    let plan = &result.best_plan;
    if plan.total_read() != result.best_cost {
        return Err(SearchError::InternalCheckFailed(
            "best_cost differs from the plan's read count".into(),
        ));
    }
    let transform = derive_transform(pair, plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..messages {
        let m = Message::random(params, &mut rng);
        let converted = convert(pair, plan, &transform, &m)?;
        for (i, cw) in converted.iter().enumerate() {
            if *cw != encode_final(pair, m.segment(params, i))? {
                return Err(SearchError::InternalCheckFailed(format!(
                    "converted codeword {i} differs from direct encoding"
                )));
            }
        }
    }
    let bound = lower_bound(&params.split)?.value;
    let gap = BigRational::from_integer(result.best_cost.into()) - &bound;
    Ok(AchievabilityReport {
        cost: result.best_cost,
        bound,
        gap,
        messages_checked: messages,
    })
}
