//! In-memory audio buffers and reference/test pair validation.

use crate::error::{Error, Result, Warning, WarningKind};

/// A multichannel audio signal: per-channel sample vectors plus a sample rate.
///
/// Samples are nominal full-scale amplitudes in [-1.0, 1.0]. All channels have
/// the same length and the buffer is immutable after construction, so it can
/// be shared freely across concurrent metric evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    channels: Vec<Vec<f32>>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    /// Builds a buffer from per-channel sample vectors.
    ///
    /// Fails if there are no channels, the channel lengths differ, or the
    /// sample rate is zero.
    pub fn new(channels: Vec<Vec<f32>>, sample_rate_hz: u32) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::UnsupportedChannelCount(0));
        }
        if sample_rate_hz == 0 {
            return Err(Error::InvalidSpec("sample rate must be positive".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::DimensionMismatch(
                "all channels must have identical length".into(),
            ));
        }
        Ok(AudioBuffer {
            channels,
            sample_rate_hz,
        })
    }

    /// Single-channel buffer.
    pub fn mono(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate_hz)
    }

    /// Two-channel buffer from separate left/right vectors.
    pub fn stereo(left: Vec<f32>, right: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![left, right], sample_rate_hz)
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Number of frames (samples per channel).
    pub fn frames(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channel(&self, index: usize) -> &[f32] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f32>] {
        &self.channels
    }

    pub fn is_stereo(&self) -> bool {
        self.channels.len() == 2
    }

    /// Copy with every channel truncated to `frames` samples.
    pub fn truncated(&self, frames: usize) -> AudioBuffer {
        AudioBuffer {
            channels: self
                .channels
                .iter()
                .map(|c| c[..frames.min(c.len())].to_vec())
                .collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Copy with left and right swapped. Panics if not stereo.
    pub fn channel_swapped(&self) -> AudioBuffer {
        assert!(self.is_stereo(), "channel_swapped requires a stereo buffer");
        AudioBuffer {
            channels: vec![self.channels[1].clone(), self.channels[0].clone()],
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// A reference/test pair that passed validation: both stereo, same rate,
/// equal length (after truncation to the shorter input, which is recorded as
/// a warning rather than treated as an error).
#[derive(Debug, Clone)]
pub struct ValidatedPair {
    pub reference: AudioBuffer,
    pub test: AudioBuffer,
    pub warnings: Vec<Warning>,
}

/// Checks a reference/test pair for comparability.
///
/// Both buffers must be stereo and share a sample rate; a rate mismatch is an
/// error because resampling would alter the phase spectra the metric reads.
/// A length mismatch is tolerated: both buffers are truncated to the shorter
/// length and a `LengthTruncated` warning is attached (codec round trips can
/// shift lengths by a few samples).
pub fn validate_pair(reference: &AudioBuffer, test: &AudioBuffer) -> Result<ValidatedPair> {
    if !reference.is_stereo() || !test.is_stereo() {
        return Err(Error::ChannelCountMismatch {
            reference: reference.channel_count(),
            test: test.channel_count(),
        });
    }
    if reference.sample_rate_hz() != test.sample_rate_hz() {
        return Err(Error::SampleRateMismatch {
            reference: reference.sample_rate_hz(),
            test: test.sample_rate_hz(),
        });
    }
    let mut warnings = Vec::new();
    let frames = reference.frames().min(test.frames());
    if reference.frames() != test.frames() {
        warnings.push(Warning::new(
            WarningKind::LengthTruncated,
            format!(
                "reference has {} frames, test has {}; both truncated to {}",
                reference.frames(),
                test.frames(),
                frames
            ),
        ));
    }
    Ok(ValidatedPair {
        reference: reference.truncated(frames),
        test: test.truncated(frames),
        warnings,
    })
}
