//! Coefficient-matrix view of a state: mode 1 indexes the rows, the remaining
//! modes index the columns lexicographically (mode 2 most significant).
//!
//! The columns split into `d × d` blocks. The block starting at column `k`
//! collects the columns whose last digit runs over `0..d`; its other digits
//! `(n_2, ..., n_(m-1))` together with the running last digit fix the block's
//! content, and their sum at the block start is written `‖k‖`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::ModeTensor;
use crate::linalg::CMatrix;

/// Default absolute tolerance for block-structure checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct CoefficientMatrix<'a> {
    state: &'a ModeTensor,
}

pub fn coefficient_matrix_view(state: &ModeTensor) -> Result<CoefficientMatrix<'_>> {
    if state.modes() < 2 {
        return Err(Error::InvalidInput("coefficient matrix needs at least 2 modes".into()));
    }
    Ok(CoefficientMatrix { state })
}

impl<'a> CoefficientMatrix<'a> {
    pub fn rows(&self) -> usize {
        self.state.dim()
    }

    pub fn cols(&self) -> usize {
        self.state.dim().pow(self.state.modes() as u32 - 1)
    }

    pub fn state(&self) -> &'a ModeTensor {
        self.state
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.state.amplitudes()[row * self.cols() + col]
    }

    /// Base-`d` digits `(n_2, ..., n_m)` of a column index.
    pub fn decode_column(&self, col: usize) -> Vec<usize> {
        let d = self.state.dim();
        let mut digits = vec![0; self.state.modes() - 1];
        let mut c = col;
        for slot in digits.iter_mut().rev() {
            *slot = c % d;
            c /= d;
        }
        digits
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.rows(), self.cols(), |r, c| self.entry(r, c))
    }

    pub fn block_count(&self) -> usize {
        self.cols() / self.rows()
    }

    /// `d × d` block whose first column is `k`, with `‖k‖ = n_2 + ... + n_m`
    /// of the decoded column `k`.
    pub fn block(&self, k: usize) -> Result<(CMatrix, usize)> {
        let d = self.rows();
        if !k.is_multiple_of(d) || k >= self.cols() {
            return Err(Error::BadBlockIndex { column: k });
        }
        let norm = self.decode_column(k).iter().sum();
        Ok((CMatrix::from_fn(d, d, |r, c| self.entry(r, k + c)), norm))
    }

    /// Block start columns grouped by `‖k‖`.
    pub fn blocks_by_norm(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for b in 0..self.block_count() {
            let k = b * self.rows();
            out.entry(self.decode_column(k).iter().sum()).or_default().push(k);
        }
        out
    }

    /// Plain-text dump: one row per line, entries `re±imj` separated by single
    /// spaces, optionally with a `|` line between blocks of columns.
    pub fn to_text(&self, delimit_blocks: bool) -> String {
        let d = self.rows();
        let mut out = String::new();
        let write_rows = |out: &mut String, cols: std::ops::Range<usize>| {
            for r in 0..d {
                let line: Vec<String> = cols.clone().map(|c| format_complex(self.entry(r, c))).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        };
        if delimit_blocks {
            for b in 0..self.block_count() {
                if b > 0 {
                    out.push_str("|\n");
                }
                write_rows(&mut out, b * d..(b + 1) * d);
            }
        } else {
            write_rows(&mut out, 0..self.cols());
        }
        out
    }
}

pub fn format_complex(z: C64) -> String {
    let mut s = String::new();
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    write!(s, "{}{}{}j", z.re, sign, z.im.abs()).unwrap();
    s
}

/// Rebuilds a state from a `d × d^(m-1)` coefficient matrix.
pub fn state_from_matrix(matrix: &CMatrix, modes: usize) -> Result<ModeTensor> {
    let d = matrix.nrows();
    if modes < 2 || matrix.ncols() != d.pow(modes as u32 - 1) {
        return Err(Error::ShapeMismatch(format!("{:?} is not a coefficient matrix for m={modes}", matrix.shape())));
    }
    let amps = (0..d).flat_map(|r| (0..matrix.ncols()).map(move |c| (r, c))).map(|(r, c)| matrix[(r, c)]).collect();
    ModeTensor::from_amplitudes(modes, d, amps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockMismatch {
    pub block_column: usize,
    pub row: usize,
    pub col: usize,
    pub expected: C64,
    pub found: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub matches: bool,
    pub first_mismatch: Option<BlockMismatch>,
}

/// Expected block entry after `stages` elimination stages have been applied
/// to `Σ h_n |Φ_n⟩`: the shifted Hankel pattern `h_(n+i+j)` with its first
/// `stages - n` columns cleared except for the anti-diagonal `h_N`.
fn stage_pattern(h: &[C64], norm: usize, stages: usize, i: usize, j: usize) -> C64 {
    let top = h.len() - 1;
    let total = norm + i + j;
    if total > top {
        return C64::new(0.0, 0.0);
    }
    if total == top {
        return h[top];
    }
    if j + norm < stages {
        return C64::new(0.0, 0.0);
    }
    h[total]
}

/// Checks the block pattern of `view` against the elimination display after
/// `stages` stages (`0` is the untouched Hankel form).
pub fn verify_elimination_stage(view: &CoefficientMatrix<'_>, h: &[C64], stages: usize, tol: f64) -> StructureReport {
    let d = view.rows();
    if h.is_empty() || h.len() > d {
        return StructureReport { matches: false, first_mismatch: None };
    }
    for b in 0..view.block_count() {
        let k = b * d;
        let norm: usize = view.decode_column(k).iter().sum();
        for i in 0..d {
            for j in 0..d {
                // Column j of the block changes the last digit, so ‖·‖ of that column is norm + j.
                let expected = stage_pattern(h, norm, stages, i, j);
                let found = view.entry(i, k + j);
                if (expected - found).norm() > tol {
                    return StructureReport {
                        matches: false,
                        first_mismatch: Some(BlockMismatch { block_column: k, row: i, col: j, expected, found }),
                    };
                }
            }
        }
    }
    StructureReport { matches: true, first_mismatch: None }
}

/// Checks that every block is the shifted Hankel matrix of `h`.
pub fn verify_uniform_block_structure(view: &CoefficientMatrix<'_>, h: &[C64], tol: f64) -> StructureReport {
    verify_elimination_stage(view, h, 0, tol)
}
