//! JSON fixture manifests: a declarative list of stimuli to synthesize, pan,
//! degrade, and write as WAV files, plus a lockfile recording seeds and
//! content digests so a corpus can be verified and regenerated byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::synth::degrade::{degrade, DegradeOp};
use crate::synth::pan::{pan_binaural, PanSpec};
use crate::synth::{generate, StimulusSpec};
use crate::wav::{write_wav, BitDepth};

/// Current manifest schema version.
pub const MANIFEST_VERSION: u32 = 1;

/// One output file: a stimulus, an optional pan, and degradations in order.
/// Without a pan the output stays mono.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthItem {
    pub name: String,
    pub stimulus: StimulusSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pan: Option<PanSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degrade: Vec<DegradeOp>,
    /// Output encoding; 24-bit PCM when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_depth: Option<BitDepth>,
}

/// A full fixture manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthManifest {
    pub version: u32,
    pub sample_rate_hz: u32,
    pub items: Vec<SynthItem>,
}

/// Lockfile entry for one rendered file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockEntry {
    pub name: String,
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub sha256: String,
    pub frames: usize,
    pub channels: usize,
}

/// Seeds and digests for a rendered corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthLock {
    pub version: u32,
    pub sample_rate_hz: u32,
    pub files: Vec<LockEntry>,
}

/// Parses manifest JSON.
pub fn parse_manifest(text: &str) -> Result<SynthManifest> {
    let manifest: SynthManifest =
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("manifest: {e}")))?;
    validate_manifest(&manifest)?;
    Ok(manifest)
}

fn validate_manifest(manifest: &SynthManifest) -> Result<()> {
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::InvalidSpec(format!(
            "unsupported manifest version {}; expected {MANIFEST_VERSION}",
            manifest.version
        )));
    }
    if manifest.sample_rate_hz == 0 {
        return Err(Error::InvalidSpec("sample_rate_hz must be positive".into()));
    }
    if manifest.items.is_empty() {
        return Err(Error::InvalidSpec("manifest has no items".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for item in &manifest.items {
        if item.name.is_empty()
            || !item
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(Error::InvalidSpec(format!(
                "item name {:?} must be non-empty and limited to [A-Za-z0-9._-]",
                item.name
            )));
        }
        if !seen.insert(&item.name) {
            return Err(Error::InvalidSpec(format!(
                "duplicate item name {:?}",
                item.name
            )));
        }
    }
    Ok(())
}

/// Renders one item to an in-memory buffer.
pub fn render_item(item: &SynthItem, sample_rate_hz: u32) -> Result<crate::audio::AudioBuffer> {
    let mut buffer = generate(&item.stimulus, sample_rate_hz)?;
    if let Some(pan) = &item.pan {
        buffer = pan_binaural(&buffer, pan)?;
    }
    for op in &item.degrade {
        buffer = degrade(&buffer, op)?;
    }
    Ok(buffer)
}

/// Renders every item of a manifest into `out_dir` as `<name>.wav` and
/// returns the lockfile describing what was written.
pub fn render_manifest(manifest: &SynthManifest, out_dir: impl AsRef<Path>) -> Result<SynthLock> {
    validate_manifest(manifest)?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;

    let mut files = Vec::with_capacity(manifest.items.len());
    for item in &manifest.items {
        let buffer = render_item(item, manifest.sample_rate_hz)?;
        let file = format!("{}.wav", item.name);
        let path: PathBuf = out_dir.join(&file);
        write_wav(&buffer, &path, item.bit_depth.unwrap_or(BitDepth::Int24))?;
        files.push(LockEntry {
            name: item.name.clone(),
            file,
            seed: item.stimulus.seed,
            sha256: sha256_file(&path)?,
            frames: buffer.frames(),
            channels: buffer.channel_count(),
        });
    }
    Ok(SynthLock {
        version: MANIFEST_VERSION,
        sample_rate_hz: manifest.sample_rate_hz,
        files,
    })
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}
