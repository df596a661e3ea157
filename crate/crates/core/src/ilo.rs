//! Invertible local operators and replayable equivalence certificates.
//!
//! A certificate is an ordered list of single-mode operators plus a global
//! scalar. Replaying it on a source state and comparing with a target state
//! (up to scale) is the whole proof of SLOCC equivalence; nothing else in the
//! pipeline is trusted.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{coherent_mode_vector, factorial, uniform_state, ModeTensor};
use crate::linalg::{complete_unitary, gram_schmidt, hermitian_condition, singular_values, upper_triangular_inverse, CMatrix};

/// Relative singular-value floor below which an operator counts as singular.
pub const INVERTIBILITY_TOL: f64 = 1e-13;

/// Gram condition number above which coherent amplitudes are treated as unresolvable.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Fidelity tolerance for pipelines without coherent components.
pub const TOL_FID_NUMBER: f64 = 1e-10;

/// Fidelity tolerance for pipelines with coherent components.
pub const TOL_FID_COHERENT: f64 = 1e-8;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Square matrix acting on a single mode, checked invertible.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    matrix: CMatrix,
}

impl LocalOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!("operator must be square, got {:?}", matrix.shape())));
        }
        let sv = singular_values(&matrix);
        let ratio = sv.last().copied().unwrap_or(0.0) / sv[0];
        if !(sv[0] > 0.0) || !(ratio > INVERTIBILITY_TOL) {
            return Err(Error::NotInvertible { ratio: if ratio.is_nan() { 0.0 } else { ratio } });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn scalar(dim: usize, value: C64) -> Result<Self> {
        Self::diagonal(&vec![value; dim])
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        let d = entries.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        let inv = self.matrix.clone().try_inverse().expect("checked invertible at construction");
        Self { matrix: inv }
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch("composing operators of different dimension".into()));
        }
        Self::new(&self.matrix * &other.matrix)
    }
}

/// One factor of a certificate: `op` acting on the 1-based `mode`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertStep {
    pub mode: usize,
    pub name: String,
    pub op: LocalOperator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IloCertificate {
    pub steps: Vec<CertStep>,
    pub global_scalar: C64,
    pub source_label: String,
    pub target_label: String,
}

impl IloCertificate {
    pub fn new(source_label: impl Into<String>, target_label: impl Into<String>) -> Self {
        Self { steps: Vec::new(), global_scalar: one(), source_label: source_label.into(), target_label: target_label.into() }
    }

    pub fn push(&mut self, mode: usize, name: impl Into<String>, op: LocalOperator) {
        self.steps.push(CertStep { mode, name: name.into(), op });
    }

    /// Pushes the same operator on every mode `1..=modes`.
    pub fn push_all(&mut self, modes: usize, name: &str, op: &LocalOperator) {
        for mode in 1..=modes {
            self.push(mode, format!("{name}_{mode}"), op.clone());
        }
    }

    /// Undoes this certificate.
    pub fn inverse(&self) -> Result<Self> {
        if self.global_scalar == C64::new(0.0, 0.0) {
            return Err(Error::ZeroState);
        }
        Ok(Self {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| CertStep { mode: s.mode, name: format!("{}^-1", s.name), op: s.op.inverse() })
                .collect(),
            global_scalar: self.global_scalar.inv(),
            source_label: self.target_label.clone(),
            target_label: self.source_label.clone(),
        })
    }

    /// Product of all steps on each mode, collapsed to one operator per mode.
    pub fn collapsed(&self, modes: usize, dim: usize) -> Result<Vec<LocalOperator>> {
        let mut per_mode = vec![LocalOperator::identity(dim); modes];
        for step in &self.steps {
            if step.mode == 0 || step.mode > modes {
                return Err(Error::BadMode { mode: step.mode, modes });
            }
            per_mode[step.mode - 1] = step.op.compose(&per_mode[step.mode - 1])?;
        }
        Ok(per_mode)
    }
}

/// Contracts `op` against the index of the 1-based `mode`.
pub fn apply_local(state: &ModeTensor, mode: usize, op: &LocalOperator) -> Result<ModeTensor> {
    let (m, d) = (state.modes(), state.dim());
    if mode == 0 || mode > m {
        return Err(Error::BadMode { mode, modes: m });
    }
    if op.dim() != d {
        return Err(Error::ShapeMismatch(format!("operator dimension {} on a state with d={d}", op.dim())));
    }
    let inner = d.pow((m - mode) as u32);
    let outer = d.pow((mode - 1) as u32);
    let src = state.amplitudes();
    let mut out = ModeTensor::zeros(m, d);
    let dst = out.amplitudes_mut();
    let a = op.matrix();
    for o in 0..outer {
        let base = o * d * inner;
        for t in 0..inner {
            for i in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..d {
                    let aij = a[(i, j)];
                    if aij != C64::new(0.0, 0.0) {
                        acc += aij * src[base + j * inner + t];
                    }
                }
                dst[base + i * inner + t] = acc;
            }
        }
    }
    Ok(out)
}

/// Replays the steps left to right, then multiplies by the global scalar.
pub fn apply_certificate(state: &ModeTensor, cert: &IloCertificate) -> Result<ModeTensor> {
    let mut s = state.clone();
    for step in &cert.steps {
        s = apply_local(&s, step.mode, &step.op)?;
    }
    Ok(s.scaled(cert.global_scalar))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equivalence {
    /// `|⟨a|b⟩| / (‖a‖‖b‖)`.
    pub fidelity: f64,
    pub ok: bool,
}

pub fn verify_equivalence(a: &ModeTensor, b: &ModeTensor, tol_fid: f64) -> Result<Equivalence> {
    let overlap = a.inner(b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na <= f64::MIN_POSITIVE || nb <= f64::MIN_POSITIVE {
        return Err(Error::ZeroState);
    }
    let fidelity = (overlap.norm() / (na * nb)).min(1.0);
    Ok(Equivalence { fidelity, ok: fidelity >= 1.0 - tol_fid })
}

/// `h_n = c_n √(n!/mⁿ)`.
pub fn to_uniform_coeffs(coefficients: &[C64], modes: usize) -> Result<Vec<C64>> {
    match coefficients.last() {
        Some(c) if c.norm() != 0.0 => {}
        _ => return Err(Error::DegenerateLeadingCoefficient),
    }
    Ok(coefficients
        .iter()
        .enumerate()
        .map(|(n, &c)| c * (factorial(n) / (modes as f64).powi(n as i32)).sqrt())
        .collect())
}

/// `diag(√0!, √1!, ..., √N!, 1, ..., 1)` on `dim` levels.
pub fn factorial_rescale_op(top: usize, dim: usize) -> Result<LocalOperator> {
    if top >= dim {
        return Err(Error::CutoffTooSmall { needed: top + 1, got: dim });
    }
    let entries: Vec<C64> =
        (0..dim).map(|n| if n <= top { C64::new(factorial(n).sqrt(), 0.0) } else { one() }).collect();
    LocalOperator::diagonal(&entries)
}

/// Largest dynamic range `t^N` allowed for [`conditioning_op`].
pub const CONDITIONING_RANGE: f64 = 1e12;

/// Scale `t ≥ 1` for which `h_n tⁿ` has every `|λ_n| = |h_n tⁿ| / |h_N t^N| ≤ 1`,
/// capped so that `t^N ≤` [`CONDITIONING_RANGE`].
///
/// The elimination stages multiply rounding residues by `|λ_n|` at every stage,
/// so large ratios `|h_n/h_N|` otherwise swamp the result.
pub fn conditioning_scale(h: &[C64]) -> f64 {
    let top = match h.len() {
        0 | 1 => return 1.0,
        n => n - 1,
    };
    let h_top = h[top].norm();
    if h_top == 0.0 {
        return 1.0;
    }
    let t = h[..top]
        .iter()
        .enumerate()
        .filter(|(_, hn)| hn.norm() > 0.0)
        .map(|(n, hn)| (hn.norm() / h_top).powf(1.0 / (top - n) as f64))
        .fold(1.0, f64::max);
    t.min(CONDITIONING_RANGE.powf(1.0 / top as f64))
}

/// `diag(t⁰, t¹, ..., t^N, 1, ..., 1)`: on every mode it sends `h_n |Φ_n⟩` to
/// `h_n tⁿ |Φ_n⟩` and leaves levels above `N` alone.
pub fn conditioning_op(t: f64, top: usize, dim: usize) -> Result<LocalOperator> {
    if top >= dim {
        return Err(Error::CutoffTooSmall { needed: top + 1, got: dim });
    }
    let entries: Vec<C64> = (0..dim).map(|n| C64::new(if n <= top { t.powi(n as i32) } else { 1.0 }, 0.0)).collect();
    LocalOperator::diagonal(&entries)
}

/// `h_n tⁿ`.
pub fn conditioned_coeffs(h: &[C64], t: f64) -> Vec<C64> {
    h.iter().enumerate().map(|(n, hn)| hn * t.powi(n as i32)).collect()
}

/// Row-elimination stages that clear a Hankel-structured coefficient matrix
/// down to its anti-diagonal, plus the final rescaling.
#[derive(Clone, Debug)]
pub struct Elimination {
    /// `A^(0), ..., A^(N-1)`, applied in this order.
    pub stages: Vec<LocalOperator>,
    /// `(1/h_N) 𝕀`.
    pub scale: LocalOperator,
}

/// Builds `A^(k) = 𝕀 + Σ_{n=k}^{N-1} λ_n |n-k⟩⟨N-k|` with `λ_n = -h_n/h_N`.
///
/// Stage `k` subtracts multiples of row `N-k`, which by then holds only `h_N`
/// in column `k`, from the rows above it.
pub fn elimination_ops(h: &[C64], dim: usize) -> Result<Elimination> {
    let top = match h.len() {
        0 => return Err(Error::DegenerateLeadingCoefficient),
        n => n - 1,
    };
    let h_top = h[top];
    if h_top.norm() == 0.0 {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    if top >= dim {
        return Err(Error::CutoffTooSmall { needed: top + 1, got: dim });
    }
    let lambda: Vec<C64> = h.iter().map(|hn| -hn / h_top).collect();
    let stages = (0..top)
        .map(|k| {
            let mut a = CMatrix::identity(dim, dim);
            for n in k..top {
                a[(n - k, top - k)] += lambda[n];
            }
            LocalOperator::new(a)
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = LocalOperator::scalar(dim, h_top.inv())?;
    Ok(Elimination { stages, scale })
}

/// Operators reducing a cat-state output to `GHZ_(r)`.
#[derive(Clone, Debug)]
pub struct CatOps {
    /// Sends each truncated `|β_k⟩` to the orthonormal `|χ_k⟩`.
    pub b: LocalOperator,
    /// Unitary `|χ_k⟩ → |k⟩`.
    pub w: LocalOperator,
    /// `diag(1/c_k)` on the first `r` levels.
    pub t: LocalOperator,
    /// `(𝒩/√r) 𝕀`.
    pub s: LocalOperator,
    pub gram_condition: f64,
}

fn check_coherent_inputs(coefficients: &[C64], betas: &[C64]) -> Result<()> {
    if coefficients.len() != betas.len() {
        return Err(Error::ShapeMismatch("one coefficient per coherent amplitude".into()));
    }
    if let Some(index) = coefficients.iter().position(|c| c.norm() == 0.0) {
        return Err(Error::ZeroCatCoefficient { index });
    }
    for i in 0..betas.len() {
        for j in i + 1..betas.len() {
            if betas[i] == betas[j] {
                return Err(Error::CoincidentCoherentAmplitudes { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Invertible `X` with `X v_j = q_j` for the orthonormalization `V = Q R`,
/// completed by the identity on the orthogonal complement of `span(V)`.
fn orthonormalizing_operator(columns: &CMatrix) -> Result<(LocalOperator, CMatrix, f64)> {
    let gram = columns.adjoint() * columns;
    let condition = hermitian_condition(&gram);
    if !(condition <= GRAM_CONDITION_LIMIT) {
        return Err(Error::IllConditionedGram { condition, threshold: GRAM_CONDITION_LIMIT });
    }
    let o = gram_schmidt(columns)
        .ok_or(Error::IllConditionedGram { condition: f64::INFINITY, threshold: GRAM_CONDITION_LIMIT })?;
    let r_inv = upper_triangular_inverse(&o.r)
        .ok_or(Error::IllConditionedGram { condition: f64::INFINITY, threshold: GRAM_CONDITION_LIMIT })?;
    let d = columns.nrows();
    let k = columns.ncols();
    let u = complete_unitary(&o.q);
    let complement = u.columns(k, d - k).clone_owned();
    let x = &o.q * r_inv * o.q.adjoint() + &complement * complement.adjoint();
    Ok((LocalOperator::new(x)?, u, condition))
}

fn coherent_columns(betas: &[C64], dim: usize, prefix: usize) -> CMatrix {
    let mut cols = CMatrix::zeros(dim, prefix + betas.len());
    for n in 0..prefix {
        cols[(n, n)] = one();
    }
    for (k, &beta) in betas.iter().enumerate() {
        let v = coherent_mode_vector(beta, dim);
        for (n, a) in v.amplitudes.into_iter().enumerate() {
            cols[(n, prefix + k)] = a;
        }
    }
    cols
}

pub fn cat_reduction_ops(coefficients: &[C64], betas: &[C64], dim: usize, norm: f64) -> Result<CatOps> {
    check_coherent_inputs(coefficients, betas)?;
    let r = betas.len();
    if r == 0 {
        return Err(Error::InvalidInput("cat state needs at least one term".into()));
    }
    if r > dim {
        return Err(Error::CutoffTooSmall { needed: r, got: dim });
    }
    let columns = coherent_columns(betas, dim, 0);
    let (b, u, gram_condition) = orthonormalizing_operator(&columns)?;
    let w = LocalOperator::new(u.adjoint())?;
    let t: Vec<C64> = (0..dim).map(|n| if n < r { coefficients[n].inv() } else { one() }).collect();
    Ok(CatOps {
        b,
        w,
        t: LocalOperator::diagonal(&t)?,
        s: LocalOperator::scalar(dim, C64::new(norm / (r as f64).sqrt(), 0.0))?,
        gram_condition,
    })
}

/// Operators reducing a hybrid output to `|Φ_N⟩ + Σ_{n=N+1}^{N+r} |n⟩^⊗m`.
#[derive(Clone, Debug)]
pub struct HybridOps {
    /// Fixes `|0⟩..|N⟩`, sends `|β_k⟩` to `|μ_k⟩` orthogonal to them.
    pub f: LocalOperator,
    /// Unitary `|μ_k⟩ → |N+1+k⟩`, identity on `|0⟩..|N⟩`.
    pub v: LocalOperator,
    /// `diag(1, ..., 1, 1/d_0, ..., 1/d_(r-1), 1, ...)`.
    pub q: LocalOperator,
    /// `𝒩 𝕀`.
    pub p: LocalOperator,
    /// `√n!` on `n ≤ N`, identity above.
    pub g: LocalOperator,
    /// See [`conditioning_op`]; `None` when no rescaling is needed.
    pub conditioning: Option<LocalOperator>,
    /// Elimination for the conditioned coefficients `h_n tⁿ`.
    pub elimination: Elimination,
    /// `diag(1 on n ≤ N, h_N t^N on n > N)`, undoing the effect of `S` on the
    /// coherent part.
    pub repair: LocalOperator,
    pub gram_condition: f64,
}

pub fn hybrid_reduction_ops(
    number: &[C64],
    cat_coefficients: &[C64],
    betas: &[C64],
    modes: usize,
    dim: usize,
    norm: f64,
) -> Result<HybridOps> {
    check_coherent_inputs(cat_coefficients, betas)?;
    let h = to_uniform_coeffs(number, modes)?;
    let top = number.len() - 1;
    let r = betas.len();
    if top + r >= dim {
        return Err(Error::CutoffTooSmall { needed: top + r + 1, got: dim });
    }
    let columns = coherent_columns(betas, dim, top + 1);
    let (f, u, gram_condition) = orthonormalizing_operator(&columns)?;
    let v = LocalOperator::new(u.adjoint())?;
    let q: Vec<C64> = (0..dim)
        .map(|n| if n > top && n <= top + r { cat_coefficients[n - top - 1].inv() } else { one() })
        .collect();
    let t = conditioning_scale(&h);
    let conditioning = if t > 1.0 { Some(conditioning_op(t, top, dim)?) } else { None };
    let h = conditioned_coeffs(&h, t);
    let elimination = elimination_ops(&h, dim)?;
    let h_top = h[top];
    let repair: Vec<C64> = (0..dim).map(|n| if n <= top { one() } else { h_top }).collect();
    Ok(HybridOps {
        f,
        v,
        q: LocalOperator::diagonal(&q)?,
        p: LocalOperator::scalar(dim, C64::new(norm, 0.0))?,
        g: factorial_rescale_op(top, dim)?,
        conditioning,
        elimination,
        repair: LocalOperator::diagonal(&repair)?,
        gram_condition,
    })
}

fn push_elimination(cert: &mut IloCertificate, elim: &Elimination) {
    for (k, a) in elim.stages.iter().enumerate() {
        cert.push(1, format!("A({k})"), a.clone());
    }
    cert.push(1, "S", elim.scale.clone());
}

/// `|Φ_N⟩`, the number-family representative.
pub fn number_representative(top: usize, modes: usize, dim: usize) -> Result<ModeTensor> {
    uniform_state(top, modes, dim)
}

/// `GHZ_(r) = r^(-1/2) Σ_k |k⟩^⊗m`.
pub fn ghz_state(r: usize, modes: usize, dim: usize) -> Result<ModeTensor> {
    if r == 0 || r > dim {
        return Err(Error::CutoffTooSmall { needed: r.max(1), got: dim });
    }
    let mut out = ModeTensor::zeros(modes, dim);
    let amp = C64::new((r as f64).powf(-0.5), 0.0);
    for k in 0..r {
        out.set_amp(&vec![k; modes], amp);
    }
    Ok(out)
}

/// `|Φ_N⟩ + Σ_{n=N+1}^{N+r} |n⟩^⊗m`.
pub fn hybrid_representative(top: usize, r: usize, modes: usize, dim: usize) -> Result<ModeTensor> {
    if top + r >= dim {
        return Err(Error::CutoffTooSmall { needed: top + r + 1, got: dim });
    }
    let mut out = uniform_state(top, modes, dim)?;
    for n in top + 1..=top + r {
        out.set_amp(&vec![n; modes], one());
    }
    Ok(out)
}

/// Certificate taking `Σ c_n |Ψ_n⟩` (with `c` normalized to `‖c‖ = norm`)
/// to `|Φ_N⟩`.
pub fn number_certificate(coefficients: &[C64], modes: usize, dim: usize) -> Result<IloCertificate> {
    let h = to_uniform_coeffs(coefficients, modes)?;
    let top = h.len() - 1;
    let mut cert = IloCertificate::new("number-superposition output", format!("Phi_{top}"));
    cert.push_all(modes, "R", &factorial_rescale_op(top, dim)?);
    let t = conditioning_scale(&h);
    if t > 1.0 {
        cert.push_all(modes, "D", &conditioning_op(t, top, dim)?);
    }
    push_elimination(&mut cert, &elimination_ops(&conditioned_coeffs(&h, t), dim)?);
    Ok(cert)
}

/// Certificate taking `𝒩⁻¹ Σ c_k |β_k⟩^⊗m` to `GHZ_(r)`.
pub fn cat_certificate(
    coefficients: &[C64],
    betas: &[C64],
    modes: usize,
    dim: usize,
    norm: f64,
) -> Result<(IloCertificate, f64)> {
    let ops = cat_reduction_ops(coefficients, betas, dim, norm)?;
    let mut cert = IloCertificate::new("cat-state output", format!("GHZ_({})", betas.len()));
    cert.push_all(modes, "B", &ops.b);
    cert.push_all(modes, "W", &ops.w);
    cert.push(1, "T", ops.t);
    cert.push(1, "S", ops.s);
    Ok((cert, ops.gram_condition))
}

/// Certificate taking the hybrid output to its representative.
pub fn hybrid_certificate(
    number: &[C64],
    cat_coefficients: &[C64],
    betas: &[C64],
    modes: usize,
    dim: usize,
    norm: f64,
) -> Result<(IloCertificate, f64)> {
    let ops = hybrid_reduction_ops(number, cat_coefficients, betas, modes, dim, norm)?;
    let top = number.len() - 1;
    let mut cert = IloCertificate::new("hybrid output", format!("Phi_{top} + GHZ tail ({} terms)", betas.len()));
    cert.push_all(modes, "F", &ops.f);
    cert.push_all(modes, "V", &ops.v);
    cert.push(1, "P", ops.p);
    cert.push(1, "Q", ops.q);
    cert.push_all(modes, "G", &ops.g);
    if let Some(d) = &ops.conditioning {
        cert.push_all(modes, "D", d);
    }
    push_elimination(&mut cert, &ops.elimination);
    cert.push(1, "repair", ops.repair);
    Ok((cert, ops.gram_condition))
}

/// Certificate built from [`crate::fock::balancing_operators`].
pub fn balancing_certificate(gamma: &[C64], dim: usize) -> Result<IloCertificate> {
    let mut cert = IloCertificate::new("general beam-splitter output", "balanced output");
    for (q, op) in crate::fock::balancing_operators(gamma, dim)?.into_iter().enumerate() {
        cert.push(q + 1, format!("D_{}", q + 1), op);
    }
    Ok(cert)
}
