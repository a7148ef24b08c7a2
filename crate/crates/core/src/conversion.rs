//! Read plans, the restricted matrices `B~`/`C~`, and linear conversion.
//!
//! A read plan chooses, for every symbol `j` of the initial codeword, the set
//! `D[j]` of subsymbol indices downloaded during conversion. Unchanged
//! symbols keep their place: initial symbol `i*kF + u` becomes symbol `u` of
//! final codeword `i`. Only the `lambda * rF` new parity symbols are computed,
//! which fixes the write cost at `lambda * rF * ell`.
//!
//! Feasibility of a plan is decided by the column-space inclusion
//! `<C~> ⊆ <B~>`. [`derive_transform`] solves the unreduced system
//! `G~^I * T = blockdiag(C, ..., C)` directly, so the two routes check
//! each other.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{
    encode_initial, CodeParams, Codeword, ConvertiblePair, Message, ModelError,
};
use crate::ff_linalg::{LinalgError, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("bad read plan: {0}")]
    BadPlan(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("plan is infeasible: rank(B~) = {rank_b}, rank([B~ | C~]) = {rank_joint}")]
    Infeasible { rank_b: usize, rank_joint: usize },
    #[error("internal check failed: {0}")]
    InternalCheckFailed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ConversionError>;

/// Per-symbol sets of read subsymbol indices, each kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReadPlan {
    ell: usize,
    sets: Vec<Vec<usize>>,
}

impl ReadPlan {
    /// Validates `sets` against `params`: `nI` entries, indices `< ell`, no duplicates.
    pub fn new(params: &CodeParams, sets: Vec<Vec<usize>>) -> Result<Self> {
        let ell = params.ell();
        if sets.len() != params.n_i() {
            return Err(ConversionError::BadPlan(format!(
                "{} read sets for {} symbols",
                sets.len(),
                params.n_i()
            )));
        }
        let mut normalized = Vec::with_capacity(sets.len());
        for (j, set) in sets.into_iter().enumerate() {
            let mut seen = vec![false; ell];
            for &t in &set {
                if t >= ell {
                    return Err(ConversionError::BadPlan(format!(
                        "symbol {j}: index {t} >= ell = {ell}"
                    )));
                }
                if std::mem::replace(&mut seen[t], true) {
                    return Err(ConversionError::BadPlan(format!(
                        "symbol {j}: duplicate index {t}"
                    )));
                }
            }
            normalized.push((0..ell).filter(|&t| seen[t]).collect());
        }
        Ok(Self {
            ell,
            sets: normalized,
        })
    }

    /// Read everything: plain re-encoding.
    pub fn full(params: &CodeParams) -> Self {
        Self {
            ell: params.ell(),
            sets: vec![(0..params.ell()).collect(); params.n_i()],
        }
    }

    pub fn empty(params: &CodeParams) -> Self {
        Self {
            ell: params.ell(),
            sets: vec![Vec::new(); params.n_i()],
        }
    }

    /// Reads the first `betas[j]` subsymbols of every symbol `j`.
    pub fn prefix(params: &CodeParams, betas: &[usize]) -> Result<Self> {
        let ell = params.ell();
        if let Some(&b) = betas.iter().find(|&&b| b > ell) {
            return Err(ConversionError::BadPlan(format!(
                "prefix length {b} > ell = {ell}"
            )));
        }
        Self::new(params, betas.iter().map(|&b| (0..b).collect()).collect())
    }

    /// Builds a plan from per-symbol bitmasks (bit `t` set = subsymbol `t` read).
    pub fn from_masks(params: &CodeParams, masks: &[u64]) -> Result<Self> {
        let sets = masks
            .iter()
            .map(|&m| (0..64).filter(|t| m >> t & 1 == 1).collect())
            .collect();
        Self::new(params, sets)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn num_symbols(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn read_set(&self, j: usize) -> &[usize] {
        &self.sets[j]
    }

    /// Subsymbols of symbol `j` that are not read, ascending.
    pub fn unread(&self, j: usize) -> Vec<usize> {
        (0..self.ell)
            .filter(|t| !self.sets[j].contains(t))
            .collect()
    }

    pub fn beta(&self, j: usize) -> usize {
        self.sets[j].len()
    }

    pub fn betas(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    pub fn total_read(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn mask(&self, j: usize) -> u64 {
        self.sets[j].iter().fold(0, |acc, &t| acc | 1 << t)
    }

    /// Tie-break key: per-symbol bitmasks, compared lexicographically.
    pub fn masks(&self) -> Vec<u64> {
        (0..self.sets.len()).map(|j| self.mask(j)).collect()
    }

    /// `D'[j] ⊇ D[j]` for every symbol.
    pub fn contains_plan(&self, other: &ReadPlan) -> bool {
        self.sets.len() == other.sets.len()
            && self
                .masks()
                .iter()
                .zip(other.masks())
                .all(|(a, b)| a & b == b)
    }

    fn check_for(&self, params: &CodeParams) -> Result<()> {
        if self.sets.len() != params.n_i() || self.ell != params.ell() {
            return Err(ConversionError::DimensionMismatch(format!(
                "plan for {} symbols with ell = {}, code has nI = {}, ell = {}",
                self.sets.len(),
                self.ell,
                params.n_i(),
                params.ell()
            )));
        }
        Ok(())
    }
}

/// The matrices `B~`, `C~` and their per-codeword parts `B^(i)`, `C^(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedMatrices {
    pub b_tilde: Matrix,
    pub c_tilde: Matrix,
    pub b_blocks: Vec<Matrix>,
    pub c_blocks: Vec<Matrix>,
    /// `sum_{j < kI} (ell - beta[j])`.
    pub row_count_unread: usize,
    /// `sum_{j >= kI} beta[j]`.
    pub col_count_read: usize,
}

impl RestrictedMatrices {
    /// `C~ * E = B~`, which certifies `<B~> ⊆ <C~>`.
    pub fn is_witness(&self, e: &Matrix) -> bool {
        self.c_tilde.mul(e).is_ok_and(|prod| prod == self.b_tilde)
    }
}

fn unread_rows(
    plan: &ReadPlan,
    ell: usize,
    symbols: std::ops::Range<usize>,
    offset: usize,
) -> Vec<usize> {
    symbols
        .flat_map(|j| {
            plan.unread(j)
                .into_iter()
                .map(move |t| (j - offset) * ell + t)
        })
        .collect()
}

/// Builds `B~` and `C~` for `plan`.
///
/// `C^(i)` keeps, for every local block row `u`, the rows of `C` whose
/// subsymbol index is not read from initial symbol `i*kF + u`. `B~` keeps the
/// rows of `B` not read from each systematic symbol and the columns of `B`
/// read from each parity symbol.
pub fn build_restricted(pair: &ConvertiblePair, plan: &ReadPlan) -> Result<RestrictedMatrices> {
    let p = &pair.params;
    plan.check_for(p)?;
    let (ell, k_f, k_i) = (p.ell(), p.k_f(), p.k_i());

    let read_cols: Vec<usize> = (k_i..p.n_i())
        .flat_map(|j| plan.read_set(j).iter().map(move |&t| (j - k_i) * ell + t))
        .collect();

    let mut b_blocks = Vec::with_capacity(p.lambda());
    let mut c_blocks = Vec::with_capacity(p.lambda());
    for i in 0..p.lambda() {
        let first = i * k_f;
        let b_rows = unread_rows(plan, ell, first..first + k_f, 0);
        b_blocks.push(pair.b.submatrix(&b_rows, &read_cols)?);
        let c_rows = unread_rows(plan, ell, first..first + k_f, first);
        c_blocks.push(pair.c.select_rows(&c_rows)?);
    }

    let all_rows = unread_rows(plan, ell, 0..k_i, 0);
    let b_tilde = pair.b.submatrix(&all_rows, &read_cols)?;
    let c_tilde = Matrix::block_diag(pair.field(), &c_blocks)?;

    Ok(RestrictedMatrices {
        row_count_unread: all_rows.len(),
        col_count_read: read_cols.len(),
        b_tilde,
        c_tilde,
        b_blocks,
        c_blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub holds: bool,
    pub rank_b: usize,
    pub rank_c: usize,
    /// Informational: read-minimal plans always have it.
    pub b_full_col_rank: bool,
}

/// Decides `<C~> ⊆ <B~>` for `plan`.
pub fn check_feasible(pair: &ConvertiblePair, plan: &ReadPlan) -> Result<FeasibilityReport> {
    let rm = build_restricted(pair, plan)?;
    Ok(feasibility_of(&rm)?)
}

pub(crate) fn feasibility_of(
    rm: &RestrictedMatrices,
) -> std::result::Result<FeasibilityReport, LinalgError> {
    let rank_b = rm.b_tilde.rank();
    let rank_c = rm.c_tilde.rank();
    let rank_joint = rm.b_tilde.hconcat(&rm.c_tilde)?.rank();
    Ok(FeasibilityReport {
        holds: rank_joint == rank_b,
        rank_b,
        rank_c,
        b_full_col_rank: rank_b == rm.b_tilde.cols(),
    })
}

/// The columns of `G^I` for the read subsymbols, in plan order.
pub fn restricted_generator(pair: &ConvertiblePair, plan: &ReadPlan) -> Result<Matrix> {
    let p = &pair.params;
    plan.check_for(p)?;
    let ell = p.ell();
    let cols: Vec<usize> = (0..p.n_i())
        .flat_map(|j| plan.read_set(j).iter().map(move |&t| j * ell + t))
        .collect();
    Ok(pair.initial_generator().select_cols(&cols)?)
}

/// The conversion matrix `T` with `G~^I * T = blockdiag(C, ..., C)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transform {
    pub matrix: Matrix,
}

/// Solves for `T`, then re-verifies the defining identity exactly.
pub fn derive_transform(pair: &ConvertiblePair, plan: &ReadPlan) -> Result<Transform> {
    let p = &pair.params;
    let g = restricted_generator(pair, plan)?;
    let target = Matrix::block_diag(pair.field(), &vec![pair.c.clone(); p.lambda()])?;
    let t = match g.solve_right(&target) {
        Ok(t) => t,
        Err(LinalgError::NoSolution) => {
            let rank_b = g.rank();
            let rank_joint = g.hconcat(&target)?.rank();
            return Err(ConversionError::Infeasible { rank_b, rank_joint });
        }
        Err(e) => return Err(e.into()),
    };
    if g.mul(&t)? != target {
        return Err(ConversionError::InternalCheckFailed(
            "G~ * T differs from blockdiag(C, ..., C)".into(),
        ));
    }
    Ok(Transform { matrix: t })
}

/// Runs a conversion: encode, download the planned subsymbols, apply `T`,
/// and assemble the `lambda` final codewords.
pub fn convert(
    pair: &ConvertiblePair,
    plan: &ReadPlan,
    transform: &Transform,
    message: &Message,
) -> Result<Vec<Codeword>> {
    let p = &pair.params;
    plan.check_for(p)?;
    let (ell, k_f, r_f) = (p.ell(), p.k_f(), p.r_f());
    let t = &transform.matrix;
    if t.shape() != (plan.total_read(), p.lambda() * r_f * ell) {
        return Err(ConversionError::DimensionMismatch(format!(
            "T is {:?}, plan reads {} and writes {}",
            t.shape(),
            plan.total_read(),
            p.lambda() * r_f * ell
        )));
    }
    let initial = encode_initial(pair, message)?;
    let downloaded: Vec<u32> = (0..p.n_i())
        .flat_map(|j| {
            plan.read_set(j)
                .iter()
                .map(|&t| initial[j][t])
                .collect::<Vec<_>>()
        })
        .collect();
    let new_parity = Matrix::row_vector(pair.field(), &downloaded).mul(t)?;
    let new_parity = new_parity.row(0);

    let per_codeword = r_f * ell;
    Ok((0..p.lambda())
        .map(|i| {
            let mut cw: Codeword = initial[i * k_f..(i + 1) * k_f].to_vec();
            let chunk = &new_parity[i * per_codeword..(i + 1) * per_codeword];
            cw.extend(chunk.chunks(ell).map(<[u32]>::to_vec));
            cw
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub read: usize,
    pub write: usize,
    pub total: usize,
}

pub fn cost(plan: &ReadPlan, params: &CodeParams) -> Result<CostReport> {
    plan.check_for(params)?;
    let read = plan.total_read();
    let write = params.split.write_cost();
    Ok(CostReport {
        read,
        write,
        total: read + write,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{encode_final, random_mds_pair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> ConvertiblePair {
        let params = CodeParams::new(2, 1, 1, 2, 2, 7).unwrap();
        random_mds_pair(params, 5, 1000).unwrap()
    }

    #[test]
    fn plan_validation() {
        let params = CodeParams::new(2, 1, 1, 2, 2, 7).unwrap();
        assert!(ReadPlan::new(&params, vec![vec![]; 3]).is_err());
        assert!(ReadPlan::new(&params, vec![vec![2], vec![], vec![], vec![]]).is_err());
        assert!(ReadPlan::new(&params, vec![vec![1, 1], vec![], vec![], vec![]]).is_err());
        let plan = ReadPlan::new(&params, vec![vec![1, 0], vec![], vec![1], vec![0]]).unwrap();
        assert_eq!(plan.read_set(0), &[0, 1]);
        assert_eq!(plan.unread(2), vec![0]);
        assert_eq!(plan.betas(), vec![2, 0, 1, 1]);
        assert_eq!(plan.masks(), vec![3, 0, 2, 1]);
        assert_eq!(ReadPlan::from_masks(&params, &plan.masks()).unwrap(), plan);
    }

    #[test]
    fn full_and_empty_restrictions() {
        let pair = tiny();
        let p = pair.params;
        let full = build_restricted(&pair, &ReadPlan::full(&p)).unwrap();
        assert_eq!(full.b_tilde.rows(), 0);
        assert_eq!(full.c_tilde.rows(), 0);
        assert_eq!(full.col_count_read, p.r_i() * p.ell());

        let empty = build_restricted(&pair, &ReadPlan::empty(&p)).unwrap();
        assert_eq!(empty.b_tilde.shape(), (p.k_i() * p.ell(), 0));
        let expected = Matrix::block_diag(pair.field(), &[pair.c.clone(), pair.c.clone()]).unwrap();
        assert_eq!(empty.c_tilde, expected);
    }

    #[test]
    fn feasibility_extremes() {
        let pair = tiny();
        let p = pair.params;
        assert!(check_feasible(&pair, &ReadPlan::full(&p)).unwrap().holds);
        let r = check_feasible(&pair, &ReadPlan::empty(&p)).unwrap();
        assert!(!r.holds);
        assert_eq!(r.rank_b, 0);
        assert_eq!(r.rank_c, p.lambda() * p.r_f() * p.ell());
        assert!(matches!(
            derive_transform(&pair, &ReadPlan::empty(&p)),
            Err(ConversionError::Infeasible { .. })
        ));
    }

    #[test]
    fn full_read_conversion_matches_direct_encoding() {
        let pair = tiny();
        let p = pair.params;
        let plan = ReadPlan::full(&p);
        let t = derive_transform(&pair, &plan).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let m = Message::random(&p, &mut rng);
            let out = convert(&pair, &plan, &t, &m).unwrap();
            for (i, cw) in out.iter().enumerate() {
                assert_eq!(cw, &encode_final(&pair, m.segment(&p, i)).unwrap());
            }
        }
        let zero = convert(&pair, &plan, &t, &Message::zero(&p)).unwrap();
        assert!(zero.iter().flatten().flatten().all(|&v| v == 0));
    }

    #[test]
    fn cost_accounting() {
        let params = CodeParams::new(2, 2, 1, 4, 4, 43).unwrap();
        let c = cost(&ReadPlan::full(&params), &params).unwrap();
        assert_eq!(
            c,
            CostReport {
                read: 32,
                write: 8,
                total: 40
            }
        );
        assert_eq!(cost(&ReadPlan::empty(&params), &params).unwrap().read, 0);
    }

    #[test]
    fn plan_for_wrong_code_rejected() {
        let pair = tiny();
        let other = CodeParams::new(2, 2, 1, 4, 4, 43).unwrap();
        assert!(matches!(
            build_restricted(&pair, &ReadPlan::full(&other)),
            Err(ConversionError::DimensionMismatch(_))
        ));
    }
}
