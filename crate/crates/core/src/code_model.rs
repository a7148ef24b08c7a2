//! Convertible-code parameters and the systematic generator pair.
//!
//! The initial code has generator `G^I = [I | B]` and each of the `lambda`
//! final codes has `G^F = [I | C]`. Only the parity parts `B` and `C` are
//! stored. All indices are 0-based: symbol `j` of a codeword occupies
//! coordinates `j*ell .. (j+1)*ell`.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff_linalg::{LinalgError, Matrix, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no MDS pair found after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("MDS subset check and block superregularity check disagree")]
    MdsPathsDisagree,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// The split-regime parameter tuple without a field.
///
/// `k_i = lambda * k_f`, `n_i = k_i + r_i`, `n_f = k_f + r_f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SplitParams {
    pub lambda: usize,
    #[serde(rename = "kF")]
    pub k_f: usize,
    #[serde(rename = "rF")]
    pub r_f: usize,
    #[serde(rename = "rI")]
    pub r_i: usize,
    pub ell: usize,
}

impl SplitParams {
    pub fn new(lambda: usize, k_f: usize, r_f: usize, r_i: usize, ell: usize) -> Result<Self> {
        if lambda < 2 {
            return Err(ModelError::BadParams(format!(
                "lambda = {lambda}, need lambda >= 2"
            )));
        }
        for (name, v) in [("kF", k_f), ("rF", r_f), ("rI", r_i), ("ell", ell)] {
            if v == 0 {
                return Err(ModelError::BadParams(format!("{name} must be at least 1")));
            }
        }
        Ok(Self {
            lambda,
            k_f,
            r_f,
            r_i,
            ell,
        })
    }

    #[inline]
    pub fn k_i(&self) -> usize {
        self.lambda * self.k_f
    }

    #[inline]
    pub fn n_i(&self) -> usize {
        self.k_i() + self.r_i
    }

    #[inline]
    pub fn n_f(&self) -> usize {
        self.k_f + self.r_f
    }

    /// Subsymbols written by a stable conversion.
    pub fn write_cost(&self) -> usize {
        self.lambda * self.r_f * self.ell
    }
}

/// [`SplitParams`] together with the prime field the code lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub split: SplitParams,
    pub field: PrimeField,
}

impl CodeParams {
    /// Validates raw inputs. The initial dimension `kI = lambda * kF` is derived.
    pub fn new(
        lambda: usize,
        k_f: usize,
        r_f: usize,
        r_i: usize,
        ell: usize,
        p: u64,
    ) -> Result<Self> {
        let split = SplitParams::new(lambda, k_f, r_f, r_i, ell)?;
        let field = PrimeField::new(p)
            .map_err(|_| ModelError::BadParams(format!("p = {p} is not prime")))?;
        Ok(Self { split, field })
    }

    /// Like [`CodeParams::new`] but also checks a caller-supplied `kI`.
    pub fn with_initial_dimension(
        lambda: usize,
        k_i: usize,
        k_f: usize,
        r_f: usize,
        r_i: usize,
        ell: usize,
        p: u64,
    ) -> Result<Self> {
        let params = Self::new(lambda, k_f, r_f, r_i, ell, p)?;
        if params.k_i() != k_i {
            return Err(ModelError::BadParams(format!(
                "kI = {k_i} but lambda * kF = {}",
                params.k_i()
            )));
        }
        Ok(params)
    }

    pub fn lambda(&self) -> usize {
        self.split.lambda
    }
    pub fn k_f(&self) -> usize {
        self.split.k_f
    }
    pub fn r_f(&self) -> usize {
        self.split.r_f
    }
    pub fn r_i(&self) -> usize {
        self.split.r_i
    }
    pub fn ell(&self) -> usize {
        self.split.ell
    }
    pub fn k_i(&self) -> usize {
        self.split.k_i()
    }
    pub fn n_i(&self) -> usize {
        self.split.n_i()
    }
    pub fn n_f(&self) -> usize {
        self.split.n_f()
    }
    pub fn p(&self) -> u32 {
        self.field.modulus()
    }
}

/// A message `m = (m_1, ..., m_lambda)` of `kI * ell` field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message(Vec<u32>);

impl Message {
    pub fn new(params: &CodeParams, values: Vec<u32>) -> Result<Self> {
        let want = params.k_i() * params.ell();
        if values.len() != want {
            return Err(ModelError::DimensionMismatch(format!(
                "message has {} entries, expected {want}",
                values.len()
            )));
        }
        let p = params.p();
        Ok(Self(values.into_iter().map(|v| v % p).collect()))
    }

    pub fn random(params: &CodeParams, rng: &mut impl Rng) -> Self {
        let p = params.p();
        Self(
            (0..params.k_i() * params.ell())
                .map(|_| rng.gen_range(0..p))
                .collect(),
        )
    }

    pub fn zero(params: &CodeParams) -> Self {
        Self(vec![0; params.k_i() * params.ell()])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Segment `m_i` (0-based), of length `kF * ell`.
    pub fn segment(&self, params: &CodeParams, i: usize) -> &[u32] {
        let len = params.k_f() * params.ell();
        &self.0[i * len..(i + 1) * len]
    }
}

/// A codeword as a list of symbols, each holding `ell` subsymbols.
pub type Codeword = Vec<Vec<u32>>;

/// The systematic generator pair of a split convertible code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvertiblePair {
    pub params: CodeParams,
    /// Parity part of `G^I`, shape `(kI*ell) x (rI*ell)`.
    pub b: Matrix,
    /// Parity part of `G^F`, shape `(kF*ell) x (rF*ell)`.
    pub c: Matrix,
}

impl ConvertiblePair {
    pub fn new(params: CodeParams, b: Matrix, c: Matrix) -> Result<Self> {
        let ell = params.ell();
        let want_b = (params.k_i() * ell, params.r_i() * ell);
        let want_c = (params.k_f() * ell, params.r_f() * ell);
        if b.shape() != want_b {
            return Err(ModelError::DimensionMismatch(format!(
                "B is {:?}, expected {want_b:?}",
                b.shape()
            )));
        }
        if c.shape() != want_c {
            return Err(ModelError::DimensionMismatch(format!(
                "C is {:?}, expected {want_c:?}",
                c.shape()
            )));
        }
        if b.field() != params.field || c.field() != params.field {
            return Err(ModelError::BadParams(
                "matrices are not over the code's field".into(),
            ));
        }
        Ok(Self { params, b, c })
    }

    pub fn field(&self) -> PrimeField {
        self.params.field
    }

    /// Block `(i, j)` of `B`, an `ell x ell` matrix.
    pub fn b_block(&self, i: usize, j: usize) -> Matrix {
        block(&self.b, self.params.ell(), i, j)
    }

    pub fn c_block(&self, i: usize, j: usize) -> Matrix {
        block(&self.c, self.params.ell(), i, j)
    }

    /// `G^I = [I | B]`, materialized on request only.
    pub fn initial_generator(&self) -> Matrix {
        systematic_generator(&self.b)
    }

    pub fn final_generator(&self) -> Matrix {
        systematic_generator(&self.c)
    }

    /// Both parity matrices pass [`is_mds_systematic`].
    pub fn is_mds(&self) -> Result<bool> {
        let p = &self.params;
        Ok(is_mds_systematic(p.n_i(), p.k_i(), p.ell(), &self.b)?
            && is_mds_systematic(p.n_f(), p.k_f(), p.ell(), &self.c)?)
    }
}

fn block(m: &Matrix, ell: usize, i: usize, j: usize) -> Matrix {
    let rows: Vec<usize> = (i * ell..(i + 1) * ell).collect();
    let cols: Vec<usize> = (j * ell..(j + 1) * ell).collect();
    m.submatrix(&rows, &cols).expect("block index in range")
}

fn systematic_generator(parity: &Matrix) -> Matrix {
    Matrix::identity(parity.field(), parity.rows())
        .hconcat(parity)
        .expect("identity has as many rows as the parity part")
}

fn block_indices(blocks: &[usize], ell: usize) -> Vec<usize> {
    blocks
        .iter()
        .flat_map(|&b| b * ell..(b + 1) * ell)
        .collect()
}

fn check_parity_shape(n: usize, k: usize, ell: usize, parity: &Matrix) -> Result<()> {
    if n < k || parity.shape() != (k * ell, (n - k) * ell) {
        return Err(ModelError::DimensionMismatch(format!(
            "parity is {:?}, expected {:?} for [n={n}, k={k}, ell={ell}]",
            parity.shape(),
            (k * ell, n.saturating_sub(k) * ell)
        )));
    }
    Ok(())
}

/// Definitional MDS test: every `k` of the `n` symbols of `[I | parity]`
/// determine the message, i.e. the `k*ell` columns of those symbols are
/// linearly independent.
pub fn is_mds_by_subsets(n: usize, k: usize, ell: usize, parity: &Matrix) -> Result<bool> {
    check_parity_shape(n, k, ell, parity)?;
    let generator = systematic_generator(parity);
    let subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    Ok(subsets.par_iter().all(|subset| {
        let cols = block_indices(subset, ell);
        generator
            .select_cols(&cols)
            .expect("columns in range")
            .is_invertible()
    }))
}

/// Block superregularity: every `s x s` block submatrix of `parity`
/// (`s <= min(k, n-k)`) is invertible.
pub fn is_superregular_blocks(n: usize, k: usize, ell: usize, parity: &Matrix) -> Result<bool> {
    check_parity_shape(n, k, ell, parity)?;
    let r = n - k;
    let selections: Vec<(Vec<usize>, Vec<usize>)> = (1..=k.min(r))
        .flat_map(|s| {
            (0..k)
                .combinations(s)
                .cartesian_product((0..r).combinations(s).collect::<Vec<_>>())
        })
        .collect();
    Ok(selections.par_iter().all(|(rows, cols)| {
        parity
            .submatrix(&block_indices(rows, ell), &block_indices(cols, ell))
            .expect("blocks in range")
            .is_invertible()
    }))
}

/// Whether `[I | parity]` generates an `[n, k, ell]` MDS array code.
///
/// Runs both the subset definition and the block-superregularity criterion
/// and fails loudly if they ever disagree.
pub fn is_mds_systematic(n: usize, k: usize, ell: usize, parity: &Matrix) -> Result<bool> {
    let by_subsets = is_mds_by_subsets(n, k, ell, parity)?;
    let by_blocks = is_superregular_blocks(n, k, ell, parity)?;
    if by_subsets != by_blocks {
        return Err(ModelError::MdsPathsDisagree);
    }
    Ok(by_subsets)
}

fn random_parity(field: PrimeField, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let p = field.modulus();
    Matrix::from_fn(field, rows, cols, |_, _| rng.gen_range(0..p))
}

fn sample_mds(
    field: PrimeField,
    n: usize,
    k: usize,
    ell: usize,
    rng: &mut ChaCha8Rng,
    max_attempts: usize,
) -> Result<Matrix> {
    for _ in 0..max_attempts {
        let candidate = random_parity(field, k * ell, (n - k) * ell, rng);
        if is_mds_systematic(n, k, ell, &candidate)? {
            return Ok(candidate);
        }
    }
    Err(ModelError::GenerationFailed {
        attempts: max_attempts,
    })
}

/// Seeded rejection sampling of a random MDS pair.
///
/// `B` and `C` are drawn from independent ChaCha8 streams (0 and 1) of the
/// same seed; each gets up to `max_attempts` draws.
pub fn random_mds_pair(
    params: CodeParams,
    seed: u64,
    max_attempts: usize,
) -> Result<ConvertiblePair> {
    if max_attempts == 0 {
        return Err(ModelError::BadParams(
            "max_attempts must be at least 1".into(),
        ));
    }
    let mut rng_b = ChaCha8Rng::seed_from_u64(seed);
    rng_b.set_stream(0);
    let mut rng_c = ChaCha8Rng::seed_from_u64(seed);
    rng_c.set_stream(1);
    let field = params.field;
    let b = sample_mds(
        field,
        params.n_i(),
        params.k_i(),
        params.ell(),
        &mut rng_b,
        max_attempts,
    )?;
    let c = sample_mds(
        field,
        params.n_f(),
        params.k_f(),
        params.ell(),
        &mut rng_c,
        max_attempts,
    )?;
    ConvertiblePair::new(params, b, c)
}

fn encode_systematic(parity: &Matrix, ell: usize, m: &[u32]) -> Result<Codeword> {
    if m.len() != parity.rows() {
        return Err(ModelError::DimensionMismatch(format!(
            "message of length {} for a code of dimension {}",
            m.len(),
            parity.rows()
        )));
    }
    let field = parity.field();
    let parity_part = Matrix::row_vector(field, m).mul(parity)?;
    let mut symbols: Codeword = m.chunks(ell).map(<[u32]>::to_vec).collect();
    symbols.extend(parity_part.row(0).chunks(ell).map(<[u32]>::to_vec));
    Ok(symbols)
}

/// `m * G^I`, split into `nI` symbols of `ell` subsymbols.
pub fn encode_initial(pair: &ConvertiblePair, m: &Message) -> Result<Codeword> {
    encode_systematic(&pair.b, pair.params.ell(), m.as_slice())
}

/// `m_i * G^F` for one segment of `kF * ell` entries.
pub fn encode_final(pair: &ConvertiblePair, segment: &[u32]) -> Result<Codeword> {
    encode_systematic(&pair.c, pair.params.ell(), segment)
}

/// Recovers the message from the given symbol positions of an initial codeword.
///
/// Requires exactly `kI` distinct positions; succeeds for every choice when
/// the code is MDS.
pub fn decode_initial(
    pair: &ConvertiblePair,
    positions: &[usize],
    symbols: &[Vec<u32>],
) -> Result<Message> {
    let p = &pair.params;
    let ell = p.ell();
    if positions.len() != p.k_i() || symbols.len() != positions.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "need {} symbols to decode, got {}",
            p.k_i(),
            positions.len()
        )));
    }
    let g = pair.initial_generator();
    let g_sel = g.select_cols(&block_indices(positions, ell))?;
    let received: Vec<u32> = symbols.iter().flatten().copied().collect();
    // m * G_S = c_S  <=>  G_S^T * m^T = c_S^T
    let rhs = Matrix::row_vector(p.field, &received).transpose();
    let m = g_sel.transpose().solve_right(&rhs)?;
    Message::new(p, m.transpose().row(0).to_vec())
}
