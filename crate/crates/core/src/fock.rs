//! Truncated Fock-space states and the output of a multiport beam-splitter.
//!
//! Every state lives on `m` bosonic modes, each truncated to the occupation
//! numbers `0..d`. Amplitudes are stored densely in row-major order with the
//! first mode varying slowest, so the flat index of `(n_1, ..., n_m)` is
//! `n_1 d^(m-1) + n_2 d^(m-2) + ... + n_m`.
//!
//! The beam-splitter is assumed balanced on the first input port: the creation
//! operator of mode 1 is sent to `(a_1† + ... + a_m†)/√m` and all other input
//! ports carry vacuum.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ilo::LocalOperator;

/// Default tail bound used when picking a cutoff for coherent components.
pub const DEFAULT_CUTOFF_EPS: f64 = 1e-10;

/// Dense amplitude tensor over `modes` modes of local dimension `dim`.
#[derive(Clone, Debug)]
pub struct ModeTensor {
    modes: usize,
    dim: usize,
    amps: Vec<C64>,
    normalized: bool,
}

impl ModeTensor {
    pub fn zeros(modes: usize, dim: usize) -> Self {
        assert!(modes >= 1 && dim >= 1, "a state needs at least one mode and one level");
        Self { modes, dim, amps: vec![C64::new(0.0, 0.0); dim.pow(modes as u32)], normalized: false }
    }

    pub fn from_amplitudes(modes: usize, dim: usize, amps: Vec<C64>) -> Result<Self> {
        if modes == 0 || dim == 0 {
            return Err(Error::ShapeMismatch("modes and dimension must be positive".into()));
        }
        let expected = dim.pow(modes as u32);
        if amps.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} amplitudes for m={modes}, d={dim}, got {}",
                amps.len()
            )));
        }
        Ok(Self { modes, dim, amps, normalized: false })
    }

    /// Tensor product of single-mode vectors, all of the same length.
    pub fn product(factors: &[Vec<C64>]) -> Result<Self> {
        let dim = factors.first().map(Vec::len).ok_or_else(|| Error::InvalidInput("no factors".into()))?;
        if factors.iter().any(|f| f.len() != dim) {
            return Err(Error::ShapeMismatch("product factors differ in length".into()));
        }
        let mut out = Self::zeros(factors.len(), dim);
        let mut idx = vec![0usize; factors.len()];
        for amp in out.amps.iter_mut() {
            *amp = idx.iter().zip(factors).map(|(&n, f)| f[n]).product();
            increment(&mut idx, dim);
        }
        Ok(out)
    }

    /// `|k⟩^⊗m`.
    pub fn basis_product(modes: usize, dim: usize, level: usize) -> Self {
        let mut out = Self::zeros(modes, dim);
        let idx = vec![level; modes];
        let flat = out.flat_index(&idx);
        out.amps[flat] = C64::new(1.0, 0.0);
        out
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        self.normalized = false;
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn flat_index(&self, occupation: &[usize]) -> usize {
        debug_assert_eq!(occupation.len(), self.modes);
        occupation.iter().fold(0, |acc, &n| {
            debug_assert!(n < self.dim);
            acc * self.dim + n
        })
    }

    pub fn occupation(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.modes];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn amp(&self, occupation: &[usize]) -> C64 {
        self.amps[self.flat_index(occupation)]
    }

    pub fn set_amp(&mut self, occupation: &[usize], value: C64) {
        let flat = self.flat_index(occupation);
        self.amps[flat] = value;
        self.normalized = false;
    }

    /// Iterates `(occupation, amplitude)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, C64)> + '_ {
        (0..self.amps.len()).map(move |i| (self.occupation(i), self.amps[i]))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_shape(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            modes: self.modes,
            dim: self.dim,
            amps: self.amps.iter().map(|a| a * factor).collect(),
            normalized: false,
        }
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroState);
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        self.normalized = true;
        Ok(norm)
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Embeds the state into a larger local dimension by zero padding.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::CutoffTooSmall { needed: self.dim, got: dim });
        }
        let mut out = Self::zeros(self.modes, dim);
        for (idx, amp) in self.iter() {
            if amp != C64::new(0.0, 0.0) {
                out.set_amp(&idx, amp);
            }
        }
        out.normalized = self.normalized;
        Ok(out)
    }

    /// Largest absolute amplitude difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes || self.dim != other.dim {
            return Err(Error::ShapeMismatch(format!(
                "(m={}, d={}) vs (m={}, d={})",
                self.modes, self.dim, other.modes, other.dim
            )));
        }
        Ok(())
    }
}

// The normalized flag is advisory and does not take part in equality.
impl PartialEq for ModeTensor {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.dim == other.dim && self.amps == other.amps
    }
}

/// Advances a base-`dim` odometer, last digit fastest.
pub(crate) fn increment(idx: &mut [usize], dim: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `n! / (n_1! ... n_m!)` evaluated on the sorted occupations so the result is
/// bit-identical under mode permutations.
fn multinomial(occupation: &[usize]) -> f64 {
    let mut parts = occupation.to_vec();
    parts.sort_unstable();
    let total: usize = parts.iter().sum();
    // Build the coefficient as a product of binomials to stay well inside f64 range.
    let mut acc = 1.0;
    let mut running = 0usize;
    for &p in &parts {
        for j in 1..=p {
            acc *= (running + j) as f64 / j as f64;
        }
        running += p;
    }
    debug_assert_eq!(running, total);
    acc
}

fn check_level(n: usize, dim: usize) -> Result<()> {
    if n >= dim {
        return Err(Error::CutoffTooSmall { needed: n + 1, got: dim });
    }
    Ok(())
}

fn check_modes(modes: usize) -> Result<()> {
    if modes < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 modes, got {modes}")));
    }
    Ok(())
}

/// Output `|Ψ_n⟩` of the balanced beam-splitter for `n` photons in mode 1.
pub fn number_mbs_output(n: usize, modes: usize, dim: usize) -> Result<ModeTensor> {
    check_modes(modes)?;
    check_level(n, dim)?;
    let scale = (modes as f64).powf(-(n as f64) / 2.0);
    let mut out = ModeTensor::zeros(modes, dim);
    for flat in 0..out.amps.len() {
        let idx = out.occupation(flat);
        if idx.iter().sum::<usize>() == n {
            out.amps[flat] = C64::new(scale * multinomial(&idx).sqrt(), 0.0);
        }
    }
    out.normalized = true;
    Ok(out)
}

/// Unnormalized uniform state `|Φ_n⟩`: amplitude one on every occupation
/// pattern with total `n`.
pub fn uniform_state(n: usize, modes: usize, dim: usize) -> Result<ModeTensor> {
    check_modes(modes)?;
    check_level(n, dim)?;
    let mut out = ModeTensor::zeros(modes, dim);
    for flat in 0..out.amps.len() {
        if out.occupation(flat).iter().sum::<usize>() == n {
            out.amps[flat] = C64::new(1.0, 0.0);
        }
    }
    Ok(out)
}

/// Amplitude-wise linear combination.
pub fn superpose(terms: &[(C64, &ModeTensor)]) -> Result<ModeTensor> {
    let (_, first) = terms.first().ok_or_else(|| Error::InvalidInput("empty superposition".into()))?;
    let mut out = ModeTensor::zeros(first.modes, first.dim);
    for (scalar, state) in terms {
        out.check_same_shape(state)?;
        for (o, a) in out.amps.iter_mut().zip(&state.amps) {
            *o += scalar * a;
        }
    }
    Ok(out)
}

/// Truncated single-mode coherent state together with its truncation deficit.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentVector {
    pub amplitudes: Vec<C64>,
    /// `1 - Σ_{n<d} |⟨n|α⟩|²`.
    pub deficit: f64,
}

/// Probability mass of the Poisson distribution with mean `mean` at `n >= dim`.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    // p_n built by recurrence; summing the tail directly avoids cancellation in 1 - head.
    let mut p = (-mean).exp();
    let mut n = 0usize;
    while n < dim {
        n += 1;
        p *= mean / n as f64;
    }
    let mut tail = 0.0;
    loop {
        tail += p;
        n += 1;
        p *= mean / n as f64;
        if n as f64 > mean && p <= tail * 1e-18 {
            break;
        }
        if p == 0.0 {
            break;
        }
    }
    tail
}

pub fn coherent_mode_vector(alpha: C64, dim: usize) -> CoherentVector {
    let mut amplitudes = Vec::with_capacity(dim);
    let mut a = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            a = a * alpha / (n as f64).sqrt();
        }
        amplitudes.push(a);
    }
    CoherentVector { amplitudes, deficit: poisson_tail(alpha.norm_sqr(), dim) }
}

/// Smallest local dimension whose Poisson tail for `|beta|` is below `eps`.
pub fn auto_cutoff(beta: C64, eps: f64) -> usize {
    let mean = beta.norm_sqr();
    let mut dim = 1;
    while poisson_tail(mean, dim) >= eps {
        dim += 1;
    }
    dim
}

/// Local truncation: either fixed or picked from the coherent amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    Auto,
    /// Local dimension `d` (levels `0..d`).
    Fixed(usize),
}

/// Output `|β⟩^⊗m` with `β = α/√m`. Returns the state and the per-mode deficit.
pub fn coherent_mbs_output(alpha: C64, modes: usize, cutoff: Cutoff, eps: f64) -> Result<(ModeTensor, f64)> {
    check_modes(modes)?;
    let beta = alpha / (modes as f64).sqrt();
    let dim = match cutoff {
        Cutoff::Auto => auto_cutoff(beta, eps),
        Cutoff::Fixed(d) => {
            if d == 0 {
                return Err(Error::CutoffTooSmall { needed: 1, got: 0 });
            }
            let deficit = poisson_tail(beta.norm_sqr(), d);
            if deficit >= eps {
                return Err(Error::CutoffTooSmall { needed: auto_cutoff(beta, eps), got: d });
            }
            d
        }
    };
    let v = coherent_mode_vector(beta, dim);
    let state = ModeTensor::product(&vec![v.amplitudes; modes])?;
    Ok((state, v.deficit))
}

fn check_scattering(gamma: &[C64], tol: f64) -> Result<()> {
    if let Some(index) = gamma.iter().position(|g| g.norm() == 0.0) {
        return Err(Error::ZeroScatteringAmplitude { index });
    }
    let norm_sq: f64 = gamma.iter().map(|g| g.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > tol {
        return Err(Error::NotNormalizedScattering { norm_sq });
    }
    Ok(())
}

/// Output of an arbitrary beam-splitter whose first column is `gamma`, for the
/// number superposition `Σ c_n |n⟩` in mode 1. Not normalized beyond what `c` carries.
pub fn general_mbs_output(coefficients: &[C64], gamma: &[C64], dim: usize, tol: f64) -> Result<ModeTensor> {
    let modes = gamma.len();
    check_modes(modes)?;
    check_scattering(gamma, tol)?;
    if coefficients.is_empty() {
        return Err(Error::InvalidInput("no number-state coefficients".into()));
    }
    check_level(coefficients.len() - 1, dim)?;
    let mut out = ModeTensor::zeros(modes, dim);
    for flat in 0..out.amps.len() {
        let idx = out.occupation(flat);
        let n: usize = idx.iter().sum();
        if n < coefficients.len() {
            let phase: C64 = idx.iter().zip(gamma).map(|(&k, g)| g.powu(k as u32)).product();
            out.amps[flat] = coefficients[n] * phase * multinomial(&idx).sqrt();
        }
    }
    Ok(out)
}

/// Diagonal operators `diag((γ_q √m)^(-n))` that map the general output onto
/// the balanced one.
pub fn balancing_operators(gamma: &[C64], dim: usize) -> Result<Vec<LocalOperator>> {
    if let Some(index) = gamma.iter().position(|g| g.norm() == 0.0) {
        return Err(Error::ZeroScatteringAmplitude { index });
    }
    let root_m = (gamma.len() as f64).sqrt();
    gamma
        .iter()
        .map(|g| {
            let inv = (g * root_m).inv();
            LocalOperator::diagonal(&(0..dim).map(|n| inv.powu(n as u32)).collect::<Vec<_>>())
        })
        .collect()
}

/// Input family on the first beam-splitter port.
#[derive(Clone, Debug, PartialEq)]
pub enum InputFamily {
    /// `Σ_n c_n |n⟩`, trailing coefficient nonzero.
    NumberSuperposition { coefficients: Vec<C64> },
    /// `Σ_k c_k |α_k⟩`, pairwise distinct `α_k`.
    CatState { terms: Vec<CatTerm> },
    Hybrid { number: Vec<C64>, cat: Vec<CatTerm> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatTerm {
    pub coefficient: C64,
    pub alpha: C64,
}

impl CatTerm {
    pub fn new(coefficient: C64, alpha: C64) -> Self {
        Self { coefficient, alpha }
    }
}

/// Validated input specification.
#[derive(Clone, Debug, PartialEq)]
pub struct InputSpec {
    pub family: InputFamily,
    pub modes: usize,
    /// Tail bound for coherent truncation.
    pub tolerance: f64,
    pub cutoff: Cutoff,
    /// Notes produced during validation, e.g. trimmed coefficients.
    pub warnings: Vec<String>,
}

/// State produced from an [`InputSpec`], normalized to unit norm.
#[derive(Clone, Debug)]
pub struct BuiltState {
    pub state: ModeTensor,
    /// Norm of the unnormalized superposition that was divided out.
    pub norm: f64,
    /// Largest per-mode truncation deficit over the coherent components.
    pub deficit: f64,
}

fn trim_number(coefficients: &[C64], warnings: &mut Vec<String>) -> Result<Vec<C64>> {
    let top = coefficients
        .iter()
        .rposition(|c| c.norm() != 0.0)
        .ok_or_else(|| Error::InvalidInput("all number-state coefficients are zero".into()))?;
    if top + 1 < coefficients.len() {
        warnings.push(format!(
            "trimmed {} trailing zero coefficient(s); highest photon number is {top}",
            coefficients.len() - top - 1
        ));
    }
    Ok(coefficients[..=top].to_vec())
}

fn check_cat(terms: &[CatTerm]) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::InvalidInput("cat state needs at least one term".into()));
    }
    if let Some(index) = terms.iter().position(|t| t.coefficient.norm() == 0.0) {
        return Err(Error::ZeroCatCoefficient { index });
    }
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            if terms[i].alpha == terms[j].alpha {
                return Err(Error::CoincidentCoherentAmplitudes { first: i, second: j });
            }
        }
    }
    Ok(())
}

impl InputSpec {
    pub fn new(family: InputFamily, modes: usize, cutoff: Cutoff, tolerance: f64) -> Result<Self> {
        check_modes(modes)?;
        if !(tolerance > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tolerance}")));
        }
        let mut warnings = Vec::new();
        let family = match family {
            InputFamily::NumberSuperposition { coefficients } => {
                InputFamily::NumberSuperposition { coefficients: trim_number(&coefficients, &mut warnings)? }
            }
            InputFamily::CatState { terms } => {
                check_cat(&terms)?;
                InputFamily::CatState { terms }
            }
            InputFamily::Hybrid { number, cat } => {
                let number = trim_number(&number, &mut warnings)?;
                check_cat(&cat)?;
                InputFamily::Hybrid { number, cat }
            }
        };
        let spec = Self { family, modes, tolerance, cutoff, warnings };
        if let Cutoff::Fixed(d) = cutoff {
            let needed = spec.minimum_dim();
            if d < needed {
                return Err(Error::CutoffTooSmall { needed, got: d });
            }
        }
        Ok(spec)
    }

    pub fn number(coefficients: Vec<C64>, modes: usize) -> Result<Self> {
        Self::new(InputFamily::NumberSuperposition { coefficients }, modes, Cutoff::Auto, DEFAULT_CUTOFF_EPS)
    }

    pub fn cat(terms: Vec<CatTerm>, modes: usize) -> Result<Self> {
        Self::new(InputFamily::CatState { terms }, modes, Cutoff::Auto, DEFAULT_CUTOFF_EPS)
    }

    pub fn hybrid(number: Vec<C64>, cat: Vec<CatTerm>, modes: usize) -> Result<Self> {
        Self::new(InputFamily::Hybrid { number, cat }, modes, Cutoff::Auto, DEFAULT_CUTOFF_EPS)
    }

    fn cat_terms(&self) -> &[CatTerm] {
        match &self.family {
            InputFamily::NumberSuperposition { .. } => &[],
            InputFamily::CatState { terms } => terms,
            InputFamily::Hybrid { cat, .. } => cat,
        }
    }

    fn number_coefficients(&self) -> &[C64] {
        match &self.family {
            InputFamily::NumberSuperposition { coefficients } => coefficients,
            InputFamily::CatState { .. } => &[],
            InputFamily::Hybrid { number, .. } => number,
        }
    }

    /// Highest photon number `N` of the number part, if any.
    pub fn top_number(&self) -> Option<usize> {
        let c = self.number_coefficients();
        (!c.is_empty()).then(|| c.len() - 1)
    }

    /// Number of coherent terms `r`.
    pub fn cat_rank(&self) -> usize {
        self.cat_terms().len()
    }

    /// Output coherent amplitudes `β_k = α_k / √m`.
    pub fn betas(&self) -> Vec<C64> {
        let root_m = (self.modes as f64).sqrt();
        self.cat_terms().iter().map(|t| t.alpha / root_m).collect()
    }

    /// Dimension needed to hold the reduction targets.
    fn minimum_dim(&self) -> usize {
        let number_levels = self.top_number().map_or(0, |n| n + 1);
        number_levels + self.cat_rank()
    }

    /// Local dimension implied by the cutoff policy.
    pub fn resolve_dim(&self) -> usize {
        match self.cutoff {
            Cutoff::Fixed(d) => d,
            Cutoff::Auto => {
                let coherent = self.betas().into_iter().map(|b| auto_cutoff(b, self.tolerance)).max().unwrap_or(1);
                coherent.max(self.minimum_dim()).max(1)
            }
        }
    }

    /// Beam-splitter output at the resolved cutoff.
    pub fn build_output(&self) -> Result<BuiltState> {
        self.build_output_at(self.resolve_dim())
    }

    /// Beam-splitter output at an explicit local dimension.
    pub fn build_output_at(&self, dim: usize) -> Result<BuiltState> {
        let needed = self.minimum_dim();
        if dim < needed {
            return Err(Error::CutoffTooSmall { needed, got: dim });
        }
        let modes = self.modes;
        let mut acc = ModeTensor::zeros(modes, dim);
        for (n, &c) in self.number_coefficients().iter().enumerate() {
            if c.norm() != 0.0 {
                acc = superpose(&[(C64::new(1.0, 0.0), &acc), (c, &number_mbs_output(n, modes, dim)?)])?;
            }
        }
        let mut deficit: f64 = 0.0;
        for (term, beta) in self.cat_terms().iter().zip(self.betas()) {
            let v = coherent_mode_vector(beta, dim);
            deficit = deficit.max(v.deficit);
            let eta = ModeTensor::product(&vec![v.amplitudes; modes])?;
            acc = superpose(&[(C64::new(1.0, 0.0), &acc), (term.coefficient, &eta)])?;
        }
        let norm = acc.normalize()?;
        Ok(BuiltState { state: acc, norm, deficit })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn single_photon_three_modes_is_w_state() {
        let s = number_mbs_output(1, 3, 2).unwrap();
        let w = 3f64.powf(-0.5);
        for (idx, a) in s.iter() {
            let expected = if idx.iter().sum::<usize>() == 1 { w } else { 0.0 };
            assert_relative_eq!(a.re, expected, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn vacuum_passes_unchanged() {
        let s = number_mbs_output(0, 4, 2).unwrap();
        assert_eq!(s.amp(&[0, 0, 0, 0]), c(1.0));
        assert_relative_eq!(s.norm(), 1.0);
    }

    #[test]
    fn two_photons_two_modes() {
        let s = number_mbs_output(2, 2, 3).unwrap();
        assert_relative_eq!(s.amp(&[2, 0]).re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.amp(&[1, 1]).re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.amp(&[0, 2]).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn cutoff_too_small_is_rejected() {
        assert_eq!(number_mbs_output(2, 2, 2), Err(Error::CutoffTooSmall { needed: 3, got: 2 }));
        assert!(uniform_state(3, 3, 3).is_err());
    }

    #[test]
    fn uniform_state_counts() {
        let s = uniform_state(2, 3, 3).unwrap();
        let ones = s.amplitudes().iter().filter(|a| **a == c(1.0)).count();
        assert_eq!(ones, 6);
        assert_eq!(s.norm_sqr(), 6.0);
        let s = uniform_state(1, 2, 2).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn superpose_linear() {
        let a = ModeTensor::basis_product(2, 2, 0);
        let b = ModeTensor::basis_product(2, 2, 1);
        let s = superpose(&[(c(1.0), &a), (c(1.0), &b)]).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        let half = superpose(&[(c(0.5), &s), (c(0.5), &s)]).unwrap();
        assert_eq!(half, s);
        let other = ModeTensor::zeros(3, 2);
        assert!(matches!(superpose(&[(c(1.0), &a), (c(1.0), &other)]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn uniform_superposition_with_h() {
        let phi0 = uniform_state(0, 2, 2).unwrap();
        let phi1 = uniform_state(1, 2, 2).unwrap();
        let h1 = c(0.5f64.sqrt());
        let s = superpose(&[(c(1.0), &phi0), (h1, &phi1)]).unwrap();
        assert_eq!(s.amp(&[0, 0]), c(1.0));
        assert_eq!(s.amp(&[0, 1]), h1);
        assert_eq!(s.amp(&[1, 0]), h1);
        assert_eq!(s.amp(&[1, 1]), c(0.0));
    }

    #[test]
    fn coherent_vector_values() {
        let v = coherent_mode_vector(c(0.0), 4);
        assert_eq!(v.amplitudes, vec![c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(v.deficit, 0.0);

        let v = coherent_mode_vector(c(1.0), 2);
        let e = (-0.5f64).exp();
        assert_relative_eq!(v.amplitudes[0].re, e, epsilon = 1e-15);
        assert_relative_eq!(v.amplitudes[1].re, e, epsilon = 1e-15);
        assert_relative_eq!(v.deficit, 1.0 - 2.0 * (-1.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn auto_cutoff_meets_tail_bound() {
        let d = auto_cutoff(c(1.0), 1e-10);
        let v = coherent_mode_vector(c(1.0), d);
        assert!(v.deficit < 1e-10);
        // Independent check against the head sum.
        let head: f64 = v.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        assert!(1.0 - head < 1e-10);
        assert!(poisson_tail(1.0, d - 1) >= 1e-10);
    }

    #[test]
    fn coherent_output_splits_amplitude() {
        let (s, _) = coherent_mbs_output(c(0.0), 3, Cutoff::Auto, 1e-10).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.amplitudes(), &[c(1.0)]);

        let (s, deficit) = coherent_mbs_output(c(2f64.sqrt()), 2, Cutoff::Fixed(20), 1e-10).unwrap();
        let beta = coherent_mode_vector(c(1.0), 20);
        let expected = ModeTensor::product(&[beta.amplitudes.clone(), beta.amplitudes]).unwrap();
        assert!(s.max_abs_diff(&expected).unwrap() < 1e-15);
        assert!(deficit < 1e-10);

        assert!(matches!(
            coherent_mbs_output(c(2.0), 2, Cutoff::Fixed(3), 1e-10),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn general_output_single_photon() {
        let g = [c(0.8f64.sqrt()), c(0.2f64.sqrt())];
        let s = general_mbs_output(&[c(0.0), c(1.0)], &g, 2, 1e-12).unwrap();
        assert_relative_eq!(s.amp(&[1, 0]).re, 0.8f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.amp(&[0, 1]).re, 0.2f64.sqrt(), epsilon = 1e-15);

        let g = [c(0.5f64.sqrt()), c(0.5f64.sqrt())];
        let s = general_mbs_output(&[c(0.0), c(1.0)], &g, 2, 1e-12).unwrap();
        assert!(s.max_abs_diff(&number_mbs_output(1, 2, 2).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn general_output_rejects_bad_gamma() {
        assert_eq!(
            general_mbs_output(&[c(1.0)], &[c(1.0), c(0.0)], 2, 1e-12),
            Err(Error::ZeroScatteringAmplitude { index: 1 })
        );
        assert!(matches!(
            general_mbs_output(&[c(1.0)], &[c(1.0), c(1.0)], 2, 1e-12),
            Err(Error::NotNormalizedScattering { .. })
        ));
    }

    #[test]
    fn balancing_two_level_example() {
        let g = [c(0.8f64.sqrt()), c(0.2f64.sqrt())];
        let s = general_mbs_output(&[c(0.0), c(1.0)], &g, 2, 1e-12).unwrap();
        let ops = balancing_operators(&g, 2).unwrap();
        let mut out = s;
        for (mode, op) in ops.iter().enumerate() {
            out = crate::ilo::apply_local(&out, mode + 1, op).unwrap();
        }
        // Both surviving amplitudes become 1/√2, i.e. the balanced single photon.
        assert_relative_eq!(out.amp(&[1, 0]).re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(out.amp(&[0, 1]).re, 0.5f64.sqrt(), epsilon = 1e-15);

        let balanced = [c(0.5f64.sqrt()), c(0.5f64.sqrt())];
        for op in balancing_operators(&balanced, 4).unwrap() {
            for n in 0..4 {
                assert_relative_eq!(op.matrix()[(n, n)].re, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn spec_validation() {
        let spec = InputSpec::number(vec![c(1.0), c(1.0), c(0.0)], 3).unwrap();
        assert_eq!(spec.top_number(), Some(1));
        assert_eq!(spec.warnings.len(), 1);
        assert!(InputSpec::number(vec![c(0.0), c(0.0)], 3).is_err());
        assert_eq!(
            InputSpec::cat(vec![CatTerm::new(c(1.0), c(1.0)), CatTerm::new(c(1.0), c(1.0))], 3),
            Err(Error::CoincidentCoherentAmplitudes { first: 0, second: 1 })
        );
        assert_eq!(
            InputSpec::cat(vec![CatTerm::new(c(0.0), c(1.0))], 3),
            Err(Error::ZeroCatCoefficient { index: 0 })
        );
        let fixed = InputSpec::new(
            InputFamily::Hybrid { number: vec![c(1.0), c(1.0)], cat: vec![CatTerm::new(c(1.0), c(0.5))] },
            2,
            Cutoff::Fixed(2),
            1e-10,
        );
        assert_eq!(fixed, Err(Error::CutoffTooSmall { needed: 3, got: 2 }));
    }

    #[test]
    fn auto_dim_covers_targets() {
        let spec = InputSpec::number(vec![c(1.0), c(0.0), c(2.0)], 3).unwrap();
        assert_eq!(spec.resolve_dim(), 3);
        let spec = InputSpec::hybrid(vec![c(1.0), c(1.0)], vec![CatTerm::new(c(1.0), c(0.01))], 2).unwrap();
        assert!(spec.resolve_dim() >= 3);
        let built = spec.build_output().unwrap();
        assert_relative_eq!(built.state.norm(), 1.0, epsilon = 1e-14);
        assert!(built.deficit < 1e-10);
    }
}
