//! Search for product vectors in the range of a reduced density matrix.
//!
//! Tracing out one mode leaves an operator on the other `m - 1` modes; the
//! number of (projectively distinct) product vectors in its range is an SLOCC
//! invariant. It is found here by multi-start alternating maximization of
//! `‖P (v_1 ⊗ ... ⊗ v_(m-1))‖`, where `P` projects onto the range. Each sweep
//! replaces one factor by the dominant eigenvector of its effective quadratic
//! form. The result is a lower bound: restarts that never reach a product
//! vector in the range simply contribute nothing.
//!
//! Every product vector in the range has each factor inside the local support
//! of the corresponding mode, so the range is first compressed onto those
//! supports. This keeps the search small even for large cutoffs.

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::ModeTensor;
use crate::linalg::{range_basis, CMatrix};
use crate::schmidt::{reshape, Bipartition};

/// Largest `d^(m-1)` accepted by the search.
pub const MAX_SEARCH_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductSearchConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Stop once the ratio changes by less than this between sweeps.
    pub convergence_tol: f64,
    /// Witnesses whose factors all lie within this angle (radians) are the same.
    pub dedup_angle: f64,
    /// Accept a product vector when `‖Pv‖/‖v‖ ≥ 1 - membership_tol`.
    pub membership_tol: f64,
    /// Relative eigenvalue floor defining the range.
    pub range_tol: f64,
    pub seed: u64,
}

impl Default for ProductSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 200,
            max_sweeps: 500,
            convergence_tol: 1e-12,
            dedup_angle: 0.5,
            membership_tol: 1e-6,
            range_tol: 1e-8,
            seed: 0,
        }
    }
}

impl ProductSearchConfig {
    fn validate(&self) -> Result<()> {
        let positive = [self.convergence_tol, self.dedup_angle, self.membership_tol, self.range_tol];
        if self.restarts == 0 || self.max_sweeps == 0 || positive.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidInput("search parameters must be positive".into()));
        }
        if self.dedup_angle >= std::f64::consts::FRAC_PI_4 {
            return Err(Error::InvalidInput("dedup angle must be below π/4".into()));
        }
        Ok(())
    }
}

/// Product vector in the range: one unit factor per untraced mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Modes (1-based) the factors belong to.
    pub modes: Vec<usize>,
    pub factors: Vec<Vec<C64>>,
    /// `‖Pv‖/‖v‖` reached by the search.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductSearchResult {
    /// Lower bound on the number of distinct product vectors in the range.
    pub count: usize,
    pub witnesses: Vec<Witness>,
    /// Dimension of the range.
    pub range_rank: usize,
    /// Restarts that hit `max_sweeps` before converging.
    pub unconverged: usize,
}

/// Dense tensor over the untraced modes with per-mode dimensions.
struct Compressed {
    dims: Vec<usize>,
    /// Range basis columns, compressed onto local supports; `k` columns of length `Π dims`.
    columns: Vec<Vec<C64>>,
    /// Local support bases, `d × dims[q]`.
    supports: Vec<CMatrix>,
}

/// Applies `mat` to the tensor index at position `pos`.
fn apply_to_index(tensor: &[C64], dims: &[usize], pos: usize, mat: &CMatrix) -> (Vec<C64>, Vec<usize>) {
    let inner: usize = dims[pos + 1..].iter().product();
    let outer: usize = dims[..pos].iter().product();
    let (rows, cols) = mat.shape();
    debug_assert_eq!(cols, dims[pos]);
    let mut out = vec![C64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        for i in 0..rows {
            for j in 0..cols {
                let a = mat[(i, j)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = (o * cols + j) * inner;
                let dst = (o * rows + i) * inner;
                for t in 0..inner {
                    out[dst + t] += a * tensor[src + t];
                }
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[pos] = rows;
    (out, new_dims)
}

fn compress(state: &ModeTensor, untraced: &[usize], traced: usize, tol: f64) -> Result<Compressed> {
    let modes = state.modes();
    let supports: Vec<CMatrix> = untraced
        .iter()
        .map(|&q| {
            let bp = Bipartition {
                left: vec![q],
                right: (1..=modes).filter(|&p| p != q).collect(),
            };
            Ok(range_basis(&reshape(state, &bp)?, tol))
        })
        .collect::<Result<_>>()?;
    let bp = Bipartition { left: untraced.to_vec(), right: vec![traced] };
    let range = range_basis(&reshape(state, &bp)?, tol);
    let full_dims = vec![state.dim(); untraced.len()];
    let mut dims = full_dims.clone();
    let columns = (0..range.ncols())
        .map(|a| {
            let mut t: Vec<C64> = range.column(a).iter().copied().collect();
            dims = full_dims.clone();
            for (pos, l) in supports.iter().enumerate() {
                let (next, next_dims) = apply_to_index(&t, &dims, pos, &l.adjoint());
                t = next;
                dims = next_dims;
            }
            t
        })
        .collect();
    Ok(Compressed { dims, columns, supports })
}

/// Effective `k × dims[j]` map `w_j ↦ U† (w_1 ⊗ ... ⊗ w_j ⊗ ...)`.
fn effective_map(c: &Compressed, factors: &[Vec<C64>], j: usize) -> CMatrix {
    let dims = &c.dims;
    let total: usize = dims.iter().product();
    // Weight of every flat index from the fixed factors.
    let mut weights = vec![C64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; dims.len()];
    for w in weights.iter_mut() {
        *w = idx
            .iter()
            .enumerate()
            .filter(|(q, _)| *q != j)
            .map(|(q, &n)| factors[q][n])
            .product();
        for (slot, &d) in idx.iter_mut().zip(dims).rev() {
            *slot += 1;
            if *slot < d {
                break;
            }
            *slot = 0;
        }
    }
    let inner: usize = dims[j + 1..].iter().product();
    let dj = dims[j];
    let mut k = CMatrix::zeros(c.columns.len(), dj);
    for (a, col) in c.columns.iter().enumerate() {
        for (flat, (u, w)) in col.iter().zip(&weights).enumerate() {
            let i = (flat / inner) % dj;
            k[(a, i)] += u.conj() * w;
        }
    }
    k
}

/// Dominant eigenpair of `K†K`.
fn dominant(k: &CMatrix) -> (f64, Vec<C64>) {
    let gram = k.adjoint() * k;
    let eig = SymmetricEigen::new(gram);
    let (best, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    (lambda.max(0.0), eig.eigenvectors.column(best).iter().copied().collect())
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

struct Attempt {
    ratio: f64,
    factors: Vec<Vec<C64>>,
    converged: bool,
}

fn run_restart(c: &Compressed, cfg: &ProductSearchConfig, restart: usize) -> Attempt {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut factors: Vec<Vec<C64>> = c.dims.iter().map(|&d| random_unit(&mut rng, d)).collect();
    let mut ratio = 0.0;
    for _sweep in 0..cfg.max_sweeps {
        let previous = ratio;
        for j in 0..factors.len() {
            let (lambda, v) = dominant(&effective_map(c, &factors, j));
            factors[j] = v;
            ratio = lambda.sqrt();
        }
        if (ratio - previous).abs() < cfg.convergence_tol {
            return Attempt { ratio, factors, converged: true };
        }
    }
    Attempt { ratio, factors, converged: false }
}

/// `‖U† (w_1 ⊗ ... )‖` for unit factors.
fn product_ratio(c: &Compressed, factors: &[Vec<C64>]) -> f64 {
    let k = effective_map(c, factors, 0);
    (k * nalgebra::DVector::from_column_slice(&factors[0])).norm()
}

/// Factor-wise phase-aligned midpoints, normalized.
fn midpoint(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    a.iter()
        .zip(b)
        .map(|(u, v)| {
            let overlap: C64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
            let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { C64::new(1.0, 0.0) };
            let w: Vec<C64> = u.iter().zip(v).map(|(x, y)| x + phase * y).collect();
            let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 { w.into_iter().map(|z| z / n).collect() } else { u.clone() }
        })
        .collect()
}

/// Unit norm with the first significant entry real and positive.
fn canonical(v: &[C64]) -> Vec<C64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let phase = v.iter().find(|z| z.norm() > 1e-6 * max).map(|z| z / z.norm()).unwrap_or(C64::new(1.0, 0.0));
    v.iter().map(|z| z / (phase * n)).collect()
}

fn same_witness(a: &[Vec<C64>], b: &[Vec<C64>], angle: f64) -> bool {
    let cos = angle.cos();
    a.iter().zip(b).all(|(u, v)| u.iter().zip(v).map(|(x, y)| x.conj() * y).sum::<C64>().norm() > cos)
}

/// Lower bound on the number of product vectors in the range of the reduced
/// density matrix left after tracing out `traced_mode` (1-based).
pub fn product_state_count(
    state: &ModeTensor,
    traced_mode: usize,
    cfg: &ProductSearchConfig,
) -> Result<ProductSearchResult> {
    cfg.validate()?;
    let (m, d) = (state.modes(), state.dim());
    if m < 3 {
        return Err(Error::InvalidInput("product-state search needs at least 3 modes".into()));
    }
    if traced_mode == 0 || traced_mode > m {
        return Err(Error::BadMode { mode: traced_mode, modes: m });
    }
    if state.norm_sqr() == 0.0 {
        return Err(Error::ZeroState);
    }
    let dim = d.checked_pow(m as u32 - 1).unwrap_or(usize::MAX);
    if dim > MAX_SEARCH_DIM {
        return Err(Error::TooLarge { dim, limit: MAX_SEARCH_DIM });
    }
    let untraced: Vec<usize> = (1..=m).filter(|&q| q != traced_mode).collect();
    let compressed = compress(state, &untraced, traced_mode, cfg.range_tol)?;

    let attempts: Vec<Attempt> =
        (0..cfg.restarts).into_par_iter().map(|i| run_restart(&compressed, cfg, i)).collect();
    let unconverged = attempts.iter().filter(|a| !a.converged).count();

    let mut witnesses: Vec<Witness> = Vec::new();
    let mut raw: Vec<Vec<Vec<C64>>> = Vec::new();
    for attempt in attempts {
        if attempt.ratio < 1.0 - cfg.membership_tol {
            continue;
        }
        // Near a degenerate maximum the sweeps creep; copies of one product vector
        // are joined when the product of their midpoints is still in the range.
        if raw.iter().any(|r| product_ratio(&compressed, &midpoint(r, &attempt.factors)) >= 1.0 - cfg.membership_tol) {
            continue;
        }
        raw.push(attempt.factors.clone());
        let factors: Vec<Vec<C64>> = attempt
            .factors
            .iter()
            .zip(&compressed.supports)
            .map(|(w, l)| {
                let v = l * nalgebra::DVector::from_column_slice(w);
                canonical(v.as_slice())
            })
            .collect();
        if !witnesses.iter().any(|w| same_witness(&w.factors, &factors, cfg.dedup_angle)) {
            witnesses.push(Witness { modes: untraced.clone(), factors, ratio: attempt.ratio.min(1.0) });
        }
    }
    Ok(ProductSearchResult {
        count: witnesses.len(),
        witnesses,
        range_rank: compressed.columns.len(),
        unconverged,
    })
}
