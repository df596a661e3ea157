//! End-to-end classification of beam-splitter outputs.
//!
//! The class label is read off the input structurally (top photon number,
//! number of coherent terms) and then has to survive two independent checks:
//! the certificate must replay onto the representative, and every bipartition
//! must carry the Schmidt rank the label predicts. Either failing marks the
//! report as failed; nothing is reconciled after the fact.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{InputFamily, InputSpec, ModeTensor};
use crate::ilo::{
    apply_certificate, cat_certificate, ghz_state, hybrid_certificate, hybrid_representative, number_certificate,
    number_representative, verify_equivalence, IloCertificate, TOL_FID_COHERENT, TOL_FID_NUMBER,
};
use crate::product::{product_state_count, ProductSearchConfig};
use crate::schmidt::{all_schmidt_ranks, Bipartition, RANK_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassLabel {
    /// Number superpositions with top photon number `top`.
    C { top: usize },
    /// Cat states with `r` coherent terms.
    R { r: usize },
    Hybrid { top: usize, r: usize },
}

impl ClassLabel {
    pub fn expected_rank(&self) -> usize {
        match *self {
            ClassLabel::C { top } => top + 1,
            ClassLabel::R { r } => r,
            ClassLabel::Hybrid { top, r } => top + r + 1,
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            ClassLabel::C { .. } => "C",
            ClassLabel::R { .. } => "R",
            ClassLabel::Hybrid { .. } => "Hybrid",
        }
    }

    /// Product-state count of the representative's reduced ranges.
    pub fn predicted_a_value(&self) -> usize {
        match *self {
            ClassLabel::C { .. } => 1,
            ClassLabel::R { r } => r,
            ClassLabel::Hybrid { r, .. } => r + 1,
        }
    }

    /// Smallest local dimension holding the representative.
    pub fn representative_dim(&self) -> usize {
        match *self {
            ClassLabel::C { top } => top + 1,
            ClassLabel::R { r } => r,
            ClassLabel::Hybrid { top, r } => top + r + 1,
        }
    }

    pub fn representative(&self, modes: usize, dim: usize) -> Result<ModeTensor> {
        match *self {
            ClassLabel::C { top } => number_representative(top, modes, dim),
            ClassLabel::R { r } => ghz_state(r, modes, dim),
            ClassLabel::Hybrid { top, r } => hybrid_representative(top, r, modes, dim),
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::C { top } => write!(f, "C{top}"),
            ClassLabel::R { r } => write!(f, "R{r}"),
            ClassLabel::Hybrid { top, r } => write!(f, "Hybrid({top},{r})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub rank_tol: f64,
    /// Overrides the family default fidelity tolerance.
    pub tol_fid: Option<f64>,
    pub compute_a: bool,
    pub search: ProductSearchConfig,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { rank_tol: RANK_TOL, tol_fid: None, compute_a: false, search: ProductSearchConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub status: Status,
    pub label: ClassLabel,
    pub modes: usize,
    /// Local dimension the pipeline ran at.
    pub dim: usize,
    pub representative: ModeTensor,
    pub certificate: IloCertificate,
    pub fidelity: f64,
    pub tol_fid: f64,
    pub schmidt_ranks: Vec<(Bipartition, usize)>,
    /// Product-state counts with each mode traced out in turn.
    pub a_values: Option<Vec<usize>>,
    pub hierarchy_note: String,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
}

impl ClassificationReport {
    /// Common Schmidt rank, if all bipartitions agree.
    pub fn schmidt_rank(&self) -> Option<usize> {
        let first = self.schmidt_ranks.first()?.1;
        self.schmidt_ranks.iter().all(|(_, r)| *r == first).then_some(first)
    }

    pub fn ensure_success(&self) -> Result<&Self> {
        match self.status {
            Status::Success => Ok(self),
            Status::Failed => Err(Error::VerificationFailed { fidelity: self.fidelity, tol_fid: self.tol_fid }),
        }
    }
}

fn hierarchy_note(label: &ClassLabel) -> String {
    match *label {
        ClassLabel::C { top } => {
            let mut chain = Vec::new();
            if top > 0 {
                chain.push(format!("C{}", top - 1));
            }
            chain.push(format!("C{top}"));
            chain.push(format!("C{}", top + 1));
            chain.join(" ⊂ ")
        }
        ClassLabel::R { r } => {
            let mut chain = Vec::new();
            if r > 1 {
                chain.push(format!("R{}", r - 1));
            }
            chain.push(format!("R{r}"));
            chain.push(format!("R{}", r + 1));
            chain.join(" ⊂ ")
        }
        ClassLabel::Hybrid { top, r } => format!(
            "Hybrid({top},{r}) has Schmidt rank {}; no containment with the number or cat chains is asserted",
            top + r + 1
        ),
    }
}

/// Builds the beam-splitter output for `spec`, reduces it to its class
/// representative and verifies the reduction.
pub fn classify(spec: &InputSpec, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    let built = spec.build_output()?;
    let (state, dim, modes) = (&built.state, built.state.dim(), spec.modes);
    let mut warnings = spec.warnings.clone();
    let betas = spec.betas();

    let (label, certificate, gram_condition) = match &spec.family {
        InputFamily::NumberSuperposition { coefficients } => {
            let mut cert = number_certificate(coefficients, modes, dim)?;
            // The built state is divided by its norm; put it back at the end.
            cert.global_scalar = C64::new(built.norm, 0.0);
            (ClassLabel::C { top: coefficients.len() - 1 }, cert, None)
        }
        InputFamily::CatState { terms } => {
            let c: Vec<C64> = terms.iter().map(|t| t.coefficient).collect();
            let (cert, cond) = cat_certificate(&c, &betas, modes, dim, built.norm)?;
            (ClassLabel::R { r: terms.len() }, cert, Some(cond))
        }
        InputFamily::Hybrid { number, cat } => {
            let d: Vec<C64> = cat.iter().map(|t| t.coefficient).collect();
            let (cert, cond) = hybrid_certificate(number, &d, &betas, modes, dim, built.norm)?;
            (ClassLabel::Hybrid { top: number.len() - 1, r: cat.len() }, cert, Some(cond))
        }
    };

    let coherent = !betas.is_empty();
    if coherent {
        warnings.push(format!("coherent truncation deficit per mode {:.3e} at d={dim}", built.deficit));
    }
    if let Some(cond) = gram_condition {
        if cond > 1e6 {
            warnings.push(format!("coherent Gram matrix condition number {cond:.3e}"));
        }
    }

    let tol_fid = opts.tol_fid.unwrap_or(if coherent { TOL_FID_COHERENT } else { TOL_FID_NUMBER });
    let representative = label.representative(modes, dim)?;
    let image = apply_certificate(state, &certificate)?;
    let fidelity = verify_equivalence(&image, &representative, tol_fid)?.fidelity;

    let rank_tol = opts.rank_tol.max(10.0 * built.deficit);
    let schmidt_ranks = all_schmidt_ranks(state, rank_tol)?;

    let mut failure = None;
    if fidelity < 1.0 - tol_fid {
        failure = Some(format!("certificate replay fidelity {fidelity} below 1 - {tol_fid:e}"));
    } else if let Some((bp, r)) = schmidt_ranks.iter().find(|(_, r)| *r != label.expected_rank()) {
        failure = Some(format!("bipartition {bp} has Schmidt rank {r}, label {label} requires {}", label.expected_rank()));
    }

    let a_values = if opts.compute_a {
        if modes < 3 {
            warnings.push("product-state counts need at least 3 modes; skipped".into());
            None
        } else {
            // Counts are SLOCC invariants, so the certified representative stands in for the output.
            let compact = label.representative(modes, label.representative_dim())?;
            let counts = (1..=modes)
                .map(|q| {
                    let res = product_state_count(&compact, q, &opts.search)?;
                    if res.unconverged > 0 {
                        warnings.push(format!(
                            "product search with mode {q} traced: {} of {} restarts did not converge",
                            res.unconverged, opts.search.restarts
                        ));
                    }
                    Ok(res.count)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(counts)
        }
    } else {
        None
    };

    Ok(ClassificationReport {
        status: if failure.is_none() { Status::Success } else { Status::Failed },
        label,
        modes,
        dim,
        representative,
        certificate,
        fidelity,
        tol_fid,
        schmidt_ranks,
        a_values,
        hierarchy_note: hierarchy_note(&label),
        warnings,
        failure,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Inequivalent,
    Undecided,
}

fn proportional(a: &ModeTensor, b: &ModeTensor) -> Result<bool> {
    let dim = a.dim().max(b.dim());
    let (a, b) = (a.padded(dim)?, b.padded(dim)?);
    Ok(verify_equivalence(&a, &b, TOL_FID_NUMBER)?.ok)
}

/// Compares two successful reports on the same number of modes.
///
/// Different Schmidt ranks, or equal ranks with different product-state
/// counts, prove inequivalence. Equal labels, or representatives that are
/// the same state, prove equivalence. Anything else is undecided.
pub fn cross_scenario_compare(a: &ClassificationReport, b: &ClassificationReport) -> Result<Verdict> {
    if a.modes != b.modes {
        return Err(Error::IncomparableModes { left: a.modes, right: b.modes });
    }
    a.ensure_success()?;
    b.ensure_success()?;
    if a.label == b.label {
        return Ok(Verdict::Equivalent);
    }
    if a.schmidt_rank() != b.schmidt_rank() {
        return Ok(Verdict::Inequivalent);
    }
    if let (Some(x), Some(y)) = (&a.a_values, &b.a_values) {
        if x != y {
            return Ok(Verdict::Inequivalent);
        }
    }
    if proportional(&a.representative, &b.representative)? {
        return Ok(Verdict::Equivalent);
    }
    Ok(Verdict::Undecided)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Number,
    Cat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    pub chain: Vec<ClassLabel>,
    pub note: &'static str,
}

const NUMBER_NOTE: &str = "Each class is contained in the closure of the next: a state of a higher class can be \
    brought arbitrarily close to any lower representative, while no state of a lower class approaches a higher \
    one because local invertible maps cannot raise the Schmidt rank.";

const CAT_NOTE: &str = "Ordered by the number of coherent terms: a higher GHZ-type representative approaches any \
    lower one under local diagonal filtering, never the reverse, since the Schmidt rank cannot grow.";

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.chain.iter().map(ToString::to_string).collect();
        write!(f, "{}", names.join(" ⊂ "))
    }
}

pub fn class_hierarchy(scenario: Scenario, upto: usize) -> Hierarchy {
    match scenario {
        Scenario::Number => Hierarchy { chain: (0..=upto).map(|top| ClassLabel::C { top }).collect(), note: NUMBER_NOTE },
        Scenario::Cat => Hierarchy { chain: (1..=upto).map(|r| ClassLabel::R { r }).collect(), note: CAT_NOTE },
    }
}
