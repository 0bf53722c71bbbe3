//! Error and warning types shared across the crate.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading a file and emitting a report.
#[derive(Debug, Error)]
pub enum Error {
    /// The file is not a RIFF/WAVE container or its chunk layout is broken.
    #[error("malformed container: {0}")]
    MalformedContainer(String),
    /// The container is valid WAVE but holds an encoding we do not decode.
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    /// More channels than this pipeline handles.
    #[error("unsupported channel count: {0}")]
    UnsupportedChannelCount(usize),
    /// Reference/test pair with non-stereo members.
    #[error("channel count mismatch: reference has {reference} channel(s), test has {test}; both must be stereo")]
    ChannelCountMismatch { reference: usize, test: usize },
    /// Reference/test pair with different sample rates; no implicit resampling.
    #[error("sample rate mismatch: reference {reference} Hz, test {test} Hz")]
    SampleRateMismatch { reference: u32, test: u32 },
    /// Signal shorter than one analysis window.
    #[error("signal too short: {samples} samples, need at least {needed}")]
    SignalTooShort { samples: usize, needed: usize },
    /// Phaseogram shorter than one patch.
    #[error("too short: {frames} frames, need at least {needed}")]
    TooShort { frames: usize, needed: usize },
    /// Two matrices that must share dimensions do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A frequency band received no FFT bins.
    #[error("degenerate band: band {0} received no bins")]
    DegenerateBand(usize),
    /// Statistic undefined for the given data (zero variance, too few points).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// Box-Cox transform applied to a non-positive value.
    #[error("non-positive value at index {index}: {value}")]
    NonPositiveValue { index: usize, value: f64 },
    /// Batch manifest with no entries.
    #[error("empty manifest")]
    EmptyManifest,
    /// A stimulus, pan, or degradation spec violates its constraints.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    /// An analysis configuration violates its constraints.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// The batch manifest could not be parsed.
    #[error("manifest parse error: {0}")]
    ManifestParse(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable category, used in CLI stderr lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::MalformedContainer(_) => "malformed-container",
            Error::UnsupportedEncoding(_) => "unsupported-encoding",
            Error::UnsupportedChannelCount(_) => "unsupported-channel-count",
            Error::ChannelCountMismatch { .. } => "channel-count-mismatch",
            Error::SampleRateMismatch { .. } => "sample-rate-mismatch",
            Error::SignalTooShort { .. } => "signal-too-short",
            Error::TooShort { .. } => "too-short",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::DegenerateBand(_) => "degenerate-band",
            Error::DegenerateInput(_) => "degenerate-input",
            Error::NonPositiveValue { .. } => "non-positive-value",
            Error::EmptyManifest => "empty-manifest",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::InvalidConfig(_) => "invalid-config",
            Error::ManifestParse(_) => "manifest-parse",
            Error::Io(_) => "io-failure",
        }
    }
}

/// Non-fatal condition worth surfacing alongside a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningKind {
    /// Reference/test lengths differed; both were truncated to the shorter.
    LengthTruncated,
    /// Samples outside [-1, 1] were saturated while encoding.
    ClippingDetected,
}

impl WarningKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WarningKind::LengthTruncated => "length-truncated",
            WarningKind::ClippingDetected => "clipping-detected",
        }
    }
}

/// A warning with its machine-readable kind and a human-readable detail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
}

impl Warning {
    pub fn new(kind: WarningKind, message: impl Into<String>) -> Self {
        Warning {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.message)
    }
}
