//! JSON form of classification reports and certificates.

use std::collections::BTreeMap;

use mbs_slocc::ilo::CertStep;
use mbs_slocc::linalg::CMatrix;
use mbs_slocc::{ClassLabel, ClassificationReport, IloCertificate, LocalOperator, Status, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// `[re, im]`.
pub type ComplexPair = [f64; 2];

fn pair(z: C64) -> ComplexPair {
    [z.re, z.im]
}

fn unpair(p: ComplexPair) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelDoc {
    /// `C`, `R` or `Hybrid`.
    pub variant: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub top: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Display name such as `C1` or `Hybrid(2,3)`.
    pub name: String,
}

impl LabelDoc {
    pub fn from_label(label: &ClassLabel) -> Self {
        let (top, r) = match *label {
            ClassLabel::C { top } => (Some(top), None),
            ClassLabel::R { r } => (None, Some(r)),
            ClassLabel::Hybrid { top, r } => (Some(top), Some(r)),
        };
        Self { variant: label.variant().to_string(), top, r, name: label.to_string() }
    }

    pub fn to_label(&self) -> Result<ClassLabel> {
        let missing = |key: &str| CliError::schema(format!("/label/{key}"), format!("required for variant {}", self.variant));
        match self.variant.as_str() {
            "C" => Ok(ClassLabel::C { top: self.top.ok_or_else(|| missing("N"))? }),
            "R" => match self.r.ok_or_else(|| missing("r"))? {
                0 => Err(CliError::schema("/label/r", "must be positive")),
                r => Ok(ClassLabel::R { r }),
            },
            "Hybrid" => Ok(ClassLabel::Hybrid {
                top: self.top.ok_or_else(|| missing("N"))?,
                r: self.r.ok_or_else(|| missing("r"))?,
            }),
            other => Err(CliError::schema("/label/variant", format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub mode: usize,
    pub name: String,
    /// Row-major matrix of `[re, im]` entries.
    pub matrix: Vec<Vec<ComplexPair>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub source: String,
    pub target: String,
    pub steps: Vec<StepDoc>,
    pub global_scalar: ComplexPair,
}

impl CertificateDoc {
    pub fn from_certificate(cert: &IloCertificate) -> Self {
        let steps = cert
            .steps
            .iter()
            .map(|s| {
                let m = s.op.matrix();
                StepDoc {
                    mode: s.mode,
                    name: s.name.clone(),
                    matrix: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect(),
                }
            })
            .collect();
        Self {
            source: cert.source_label.clone(),
            target: cert.target_label.clone(),
            steps,
            global_scalar: pair(cert.global_scalar),
        }
    }

    /// Rebuilds the certificate, checking every step acts on a valid mode with
    /// an invertible `dim × dim` matrix.
    pub fn to_certificate(&self, modes: usize, dim: usize) -> Result<IloCertificate> {
        let mut cert = IloCertificate::new(self.source.clone(), self.target.clone());
        for (i, step) in self.steps.iter().enumerate() {
            let ptr = format!("/certificate/steps/{i}");
            if step.mode == 0 || step.mode > modes {
                return Err(CliError::schema(format!("{ptr}/mode"), format!("mode must be in 1..={modes}")));
            }
            if step.matrix.len() != dim || step.matrix.iter().any(|row| row.len() != dim) {
                return Err(CliError::schema(format!("{ptr}/matrix"), format!("expected a {dim}x{dim} matrix")));
            }
            let m = CMatrix::from_fn(dim, dim, |r, c| unpair(step.matrix[r][c]));
            let op = LocalOperator::new(m).map_err(CliError::invariant)?;
            cert.steps.push(CertStep { mode: step.mode, name: step.name.clone(), op });
        }
        cert.global_scalar = unpair(self.global_scalar);
        Ok(cert)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    /// `success` or `failed`.
    pub status: String,
    pub label: LabelDoc,
    /// Common rank over all bipartitions; absent when they disagree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schmidt_rank: Option<usize>,
    pub schmidt_ranks: BTreeMap<String, usize>,
    pub fidelity: f64,
    pub tol_fid: f64,
    pub modes: usize,
    /// Local dimension the certificate acts on.
    pub cutoff: usize,
    pub certificate: CertificateDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_values: Option<Vec<usize>>,
    pub hierarchy_note: String,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ReportDoc {
    pub fn from_report(report: &ClassificationReport) -> Self {
        Self {
            status: match report.status {
                Status::Success => "success",
                Status::Failed => "failed",
            }
            .to_string(),
            label: LabelDoc::from_label(&report.label),
            schmidt_rank: report.schmidt_rank(),
            schmidt_ranks: report.schmidt_ranks.iter().map(|(bp, r)| (bp.to_string(), *r)).collect(),
            fidelity: report.fidelity,
            tol_fid: report.tol_fid,
            modes: report.modes,
            cutoff: report.dim,
            certificate: CertificateDoc::from_certificate(&report.certificate),
            a_values: report.a_values.clone(),
            hierarchy_note: report.hierarchy_note.clone(),
            warnings: report.warnings.clone(),
            failure: report.failure.clone(),
        }
    }

    pub fn parse(document: &str) -> Result<Self> {
        serde_json::from_str(document).map_err(|e| CliError::schema("", format!("not a classification report: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mbs_slocc::{classify, ClassifyOptions, InputSpec};

    #[test]
    fn label_round_trip() {
        for label in [ClassLabel::C { top: 0 }, ClassLabel::R { r: 3 }, ClassLabel::Hybrid { top: 2, r: 1 }] {
            let doc = LabelDoc::from_label(&label);
            assert_eq!(doc.to_label().unwrap(), label);
        }
        let json = serde_json::to_value(LabelDoc::from_label(&ClassLabel::C { top: 1 })).unwrap();
        assert_eq!(json, serde_json::json!({"variant": "C", "N": 1, "name": "C1"}));
        let bad = LabelDoc { variant: "R".into(), top: None, r: None, name: "R?".into() };
        assert!(matches!(bad.to_label(), Err(CliError::Schema { pointer, .. }) if pointer == "/label/r"));
    }

    #[test]
    fn report_round_trip_is_exact() {
        let spec = InputSpec::number(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.0), C64::new(0.9, 0.0)], 3).unwrap();
        let report = classify(&spec, &ClassifyOptions::default()).unwrap();
        let doc = ReportDoc::from_report(&report);
        let back = ReportDoc::parse(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let cert = back.certificate.to_certificate(back.modes, back.cutoff).unwrap();
        assert_eq!(cert, report.certificate);
    }

    #[test]
    fn certificate_checks() {
        let doc = CertificateDoc {
            source: "a".into(),
            target: "b".into(),
            steps: vec![StepDoc { mode: 3, name: "X".into(), matrix: vec![vec![[1.0, 0.0]]] }],
            global_scalar: [1.0, 0.0],
        };
        assert!(matches!(doc.to_certificate(2, 1), Err(CliError::Schema { pointer, .. }) if pointer == "/certificate/steps/0/mode"));
        assert!(matches!(doc.to_certificate(3, 2), Err(CliError::Schema { .. })));
        let singular = CertificateDoc {
            steps: vec![StepDoc { mode: 1, name: "Z".into(), matrix: vec![vec![[0.0, 0.0]]] }],
            ..doc.clone()
        };
        assert!(matches!(singular.to_certificate(1, 1), Err(CliError::Invariant { kind, .. }) if kind == "NotInvertible"));
    }
}
