use std::path::Path;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The document does not follow the input or report schema.
    #[error("schema error at '{pointer}': {message}")]
    Schema { pointer: String, message: String },
    /// The document is well-formed but violates a model invariant.
    #[error("invariant violated ({kind}): {message}")]
    Invariant { kind: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("certificate replay fidelity {fidelity} is below 1 - {tol_fid:e}")]
    Verification { fidelity: f64, tol_fid: f64 },
    #[error("classification failed: {0}")]
    ClassificationFailed(String),
    #[error(transparent)]
    Core(#[from] mbs_slocc::Error),
}

/// Name of the enum variant, e.g. `CoincidentCoherentAmplitudes`.
fn variant_name(err: &mbs_slocc::Error) -> String {
    let debug = format!("{err:?}");
    debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

impl CliError {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema { pointer: pointer.into(), message: message.into() }
    }

    pub fn invariant(err: mbs_slocc::Error) -> Self {
        Self::Invariant { kind: variant_name(&err), message: err.to_string() }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Schema { .. } => "SchemaError",
            Self::Invariant { .. } => "InvariantError",
            Self::Io { .. } => "IoError",
            Self::Usage(_) => "UsageError",
            Self::Verification { .. } => "VerificationFailed",
            Self::ClassificationFailed(_) => "ClassificationFailed",
            Self::Core(_) => "ComputationError",
        }
    }

    /// Process exit status: 1 when a check ran and failed, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification { .. } | Self::ClassificationFailed(_) => 1,
            _ => 2,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            Self::Schema { pointer, .. } => body["pointer"] = json!(pointer),
            Self::Invariant { kind, .. } => body["detail"] = json!(kind),
            Self::Verification { fidelity, tol_fid } => {
                body["fidelity"] = json!(fidelity);
                body["tol_fid"] = json!(tol_fid);
            }
            Self::Core(err) => body["detail"] = json!(variant_name(err)),
            _ => {}
        }
        json!({ "error": body }).to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names() {
        let e = mbs_slocc::Error::CoincidentCoherentAmplitudes { first: 0, second: 1 };
        assert_eq!(variant_name(&e), "CoincidentCoherentAmplitudes");
        assert_eq!(variant_name(&mbs_slocc::Error::ZeroState), "ZeroState");
        assert_eq!(variant_name(&mbs_slocc::Error::InvalidInput("x".into())), "InvalidInput");
    }

    #[test]
    fn error_json_is_structured() {
        let v: serde_json::Value = serde_json::from_str(&CliError::schema("/modes", "expected integer").to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "SchemaError");
        assert_eq!(v["error"]["pointer"], "/modes");
        let v: serde_json::Value =
            serde_json::from_str(&CliError::Verification { fidelity: 0.5, tol_fid: 1e-8 }.to_json()).unwrap();
        assert_eq!(v["error"]["fidelity"], 0.5);
        assert_eq!(CliError::Verification { fidelity: 0.5, tol_fid: 1e-8 }.exit_code(), 1);
    }
}
