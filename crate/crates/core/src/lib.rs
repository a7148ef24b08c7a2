//! Bandwidth of converting `lambda` split MDS codewords into `lambda` final
//! MDS codewords over a prime field.
//!
//! Indices are 0-based throughout: symbols `0..nI`, subsymbols `0..ell`,
//! final codewords `0..lambda`.

pub mod bounds;
pub mod code_model;
pub mod conversion;
pub mod example;
pub mod ff_linalg;
pub mod io;
pub mod lp_oracle;
pub mod rational;
pub mod search;

pub use bounds::{compare, lower_bound, BoundResult, Comparison, ParamGrid, Regime};
pub use code_model::{random_mds_pair, CodeParams, ConvertiblePair, Message, SplitParams};
pub use conversion::{check_feasible, convert, derive_transform, ReadPlan, Transform};
pub use ff_linalg::{Matrix, PrimeField};
pub use search::{min_read_search, SearchConfig, SearchMode, SearchResult};
