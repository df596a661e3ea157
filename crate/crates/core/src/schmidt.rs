//! Bipartitions and Schmidt ranks.

use std::fmt;

use crate::error::{Error, Result};
use crate::fock::ModeTensor;
use crate::linalg::{singular_values as matrix_singular_values, CMatrix};

/// Default relative singular-value threshold.
pub const RANK_TOL: f64 = 1e-8;

pub const MAX_BIPARTITION_MODES: usize = 12;

/// Split of the modes `1..=m` into two nonempty sides; `left` holds mode 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Bipartition {
    pub fn new(left: Vec<usize>, modes: usize) -> Result<Self> {
        let mut left = left;
        left.sort_unstable();
        left.dedup();
        if left.is_empty() || left.len() >= modes || left.iter().any(|&q| q == 0 || q > modes) {
            return Err(Error::InvalidInput(format!("{left:?} is not one side of a bipartition of {modes} modes")));
        }
        let right = (1..=modes).filter(|q| !left.contains(q)).collect();
        Ok(Self { left, right })
    }

    pub fn swapped(&self) -> Self {
        Self { left: self.right.clone(), right: self.left.clone() }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{}|{}", join(&self.left), join(&self.right))
    }
}

/// All `2^(m-1) - 1` bipartitions with mode 1 on the left, ordered by the
/// size of the left side and then lexicographically.
pub fn bipartitions(modes: usize) -> Result<Vec<Bipartition>> {
    if modes > MAX_BIPARTITION_MODES {
        return Err(Error::TooManyModes { modes, max: MAX_BIPARTITION_MODES });
    }
    if modes < 2 {
        return Err(Error::InvalidInput("bipartitions need at least 2 modes".into()));
    }
    let others = modes - 1;
    let mut out: Vec<Bipartition> = (0u32..(1 << others) - 1)
        .map(|mask| {
            let mut left = vec![1];
            left.extend((0..others).filter(|b| mask & (1 << b) != 0).map(|b| b + 2));
            Bipartition::new(left, modes).expect("mask never covers all modes")
        })
        .collect();
    out.sort_by(|a, b| a.left.len().cmp(&b.left.len()).then_with(|| a.left.cmp(&b.left)));
    Ok(out)
}

/// State reshaped as a `d^|left| × d^|right|` matrix.
pub fn reshape(state: &ModeTensor, bp: &Bipartition) -> Result<CMatrix> {
    let (m, d) = (state.modes(), state.dim());
    if bp.left.len() + bp.right.len() != m || bp.left.iter().chain(&bp.right).any(|&q| q == 0 || q > m) {
        return Err(Error::ShapeMismatch(format!("bipartition {bp} does not fit {m} modes")));
    }
    let rows = d.pow(bp.left.len() as u32);
    let cols = d.pow(bp.right.len() as u32);
    let mut out = CMatrix::zeros(rows, cols);
    for (flat, &amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let idx = state.occupation(flat);
        let r = bp.left.iter().fold(0, |acc, &q| acc * d + idx[q - 1]);
        let c = bp.right.iter().fold(0, |acc, &q| acc * d + idx[q - 1]);
        out[(r, c)] = amp;
    }
    Ok(out)
}

/// Schmidt coefficients across `bp`, largest first.
pub fn schmidt_coefficients(state: &ModeTensor, bp: &Bipartition) -> Result<Vec<f64>> {
    if state.norm_sqr() == 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(matrix_singular_values(&reshape(state, bp)?))
}

/// Number of singular values above `tol · σ_max`.
pub fn schmidt_rank(state: &ModeTensor, bp: &Bipartition, tol: f64) -> Result<usize> {
    let sv = schmidt_coefficients(state, bp)?;
    let floor = tol * sv[0];
    Ok(sv.iter().filter(|&&s| s > floor).count())
}

/// Ranks for every canonical bipartition, in [`bipartitions`] order.
pub fn all_schmidt_ranks(state: &ModeTensor, tol: f64) -> Result<Vec<(Bipartition, usize)>> {
    bipartitions(state.modes())?
        .into_iter()
        .map(|bp| {
            let r = schmidt_rank(state, &bp, tol)?;
            Ok((bp, r))
        })
        .collect()
}

/// True iff every bipartition has Schmidt rank above one.
pub fn is_genuinely_entangled(state: &ModeTensor, tol: f64) -> Result<bool> {
    Ok(all_schmidt_ranks(state, tol)?.iter().all(|(_, r)| *r > 1))
}
