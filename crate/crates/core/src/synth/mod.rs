//! Deterministic test-stimulus generation.
//!
//! Mono stimuli (tones, noise, amplitude-modulated noise bursts) rendered to
//! binaural stereo through a parametric ITD/ILD panner, plus controlled
//! degradations. Everything is a pure function of its spec and seed, so
//! fixture corpora regenerate byte-identically.

pub mod degrade;
pub mod manifest;
pub mod pan;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Spectral color of a noise stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseColor {
    White,
    Pink,
}

/// Stimulus family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusKind {
    PureTone,
    WhiteNoise,
    PinkNoise,
    /// Noise gated by a raised-cosine burst envelope; `color` picks the
    /// noise, defaulting to white.
    AmBurstNoise,
}

/// Default burst envelope rate in Hz.
pub const DEFAULT_BURST_RATE_HZ: f64 = 4.0;
/// Default burst duty cycle.
pub const DEFAULT_BURST_DUTY: f64 = 0.5;

/// A mono stimulus description, serializable into fixture manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusSpec {
    pub kind: StimulusKind,
    /// Tone frequency; required for `PureTone`, ignored otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<f64>,
    pub duration_s: f64,
    /// Peak level in dB re full scale; must be <= 0.
    pub level_dbfs: f64,
    /// Noise seed; required for the noise kinds, ignored for tones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Noise color for `AmBurstNoise` (default white).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<NoiseColor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burst_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duty: Option<f64>,
}

impl StimulusSpec {
    pub fn pure_tone(freq_hz: f64, duration_s: f64, level_dbfs: f64) -> Self {
        StimulusSpec {
            kind: StimulusKind::PureTone,
            freq_hz: Some(freq_hz),
            duration_s,
            level_dbfs,
            seed: None,
            color: None,
            burst_rate_hz: None,
            duty: None,
        }
    }

    pub fn white_noise(duration_s: f64, level_dbfs: f64, seed: u64) -> Self {
        StimulusSpec {
            kind: StimulusKind::WhiteNoise,
            freq_hz: None,
            duration_s,
            level_dbfs,
            seed: Some(seed),
            color: None,
            burst_rate_hz: None,
            duty: None,
        }
    }

    pub fn pink_noise(duration_s: f64, level_dbfs: f64, seed: u64) -> Self {
        StimulusSpec {
            kind: StimulusKind::PinkNoise,
            seed: Some(seed),
            ..StimulusSpec::white_noise(duration_s, level_dbfs, seed)
        }
    }

    pub fn am_burst_noise(
        color: NoiseColor,
        duration_s: f64,
        level_dbfs: f64,
        seed: u64,
    ) -> Self {
        StimulusSpec {
            kind: StimulusKind::AmBurstNoise,
            freq_hz: None,
            duration_s,
            level_dbfs,
            seed: Some(seed),
            color: Some(color),
            burst_rate_hz: None,
            duty: None,
        }
    }

    fn validate(&self, sample_rate_hz: u32) -> Result<()> {
        if !(self.duration_s >= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "duration_s must be at least 1.0 (so the signal fills a patch); got {}",
                self.duration_s
            )));
        }
        if !(self.level_dbfs <= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "level_dbfs must be <= 0; got {}",
                self.level_dbfs
            )));
        }
        match self.kind {
            StimulusKind::PureTone => {
                let f = self.freq_hz.ok_or_else(|| {
                    Error::InvalidSpec("pure_tone requires freq_hz".into())
                })?;
                if !(f > 0.0 && f < f64::from(sample_rate_hz) / 2.0) {
                    return Err(Error::InvalidSpec(format!(
                        "freq_hz must lie in (0, Nyquist); got {f}"
                    )));
                }
            }
            StimulusKind::WhiteNoise | StimulusKind::PinkNoise | StimulusKind::AmBurstNoise => {
                if self.seed.is_none() {
                    return Err(Error::InvalidSpec("noise stimuli require a seed".into()));
                }
            }
        }
        if let Some(rate) = self.burst_rate_hz {
            if !(rate > 0.0) {
                return Err(Error::InvalidSpec("burst_rate_hz must be positive".into()));
            }
        }
        if let Some(duty) = self.duty {
            if !(duty > 0.0 && duty <= 1.0) {
                return Err(Error::InvalidSpec("duty must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Seeded standard-normal samples.
fn white_samples(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// -3 dB/octave pinking filter: the classic 3-pole/3-zero IIR approximation
/// (coefficients after Julius O. Smith), accurate to a fraction of a dB over
/// the audio band.
fn pink_filter(white: &[f64]) -> Vec<f64> {
    const B: [f64; 4] = [0.049_922_035, -0.095_993_537, 0.050_612_699, -0.004_408_786];
    const A: [f64; 3] = [-2.494_956_002, 2.017_265_875, -0.522_189_400];
    let mut x = [0.0f64; 3];
    let mut y = [0.0f64; 3];
    let mut out = Vec::with_capacity(white.len());
    for &w in white {
        let value = B[0] * w + B[1] * x[0] + B[2] * x[1] + B[3] * x[2]
            - A[0] * y[0]
            - A[1] * y[1]
            - A[2] * y[2];
        x = [w, x[0], x[1]];
        y = [value, y[0], y[1]];
        out.push(value);
    }
    out
}

/// Raised-cosine burst gate: within each period of `1/rate` seconds the first
/// `duty` fraction carries a full Hann lobe, the rest is silence.
fn burst_envelope(n: usize, sample_rate_hz: u32, rate_hz: f64, duty: f64) -> Vec<f64> {
    let fs = f64::from(sample_rate_hz);
    (0..n)
        .map(|i| {
            let position = (i as f64 * rate_hz / fs).fract();
            if position < duty {
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * position / duty).cos())
            } else {
                0.0
            }
        })
        .collect()
}

/// Renders a stimulus spec to a mono buffer.
///
/// Deterministic given `(spec, sample_rate_hz)`; the waveform is scaled so
/// its peak sits exactly at `level_dbfs`.
pub fn generate(spec: &StimulusSpec, sample_rate_hz: u32) -> Result<AudioBuffer> {
    spec.validate(sample_rate_hz)?;
    let n = (spec.duration_s * f64::from(sample_rate_hz)).round() as usize;
    let raw: Vec<f64> = match spec.kind {
        StimulusKind::PureTone => {
            let f = spec.freq_hz.expect("validated");
            let fs = f64::from(sample_rate_hz);
            (0..n)
                .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
                .collect()
        }
        StimulusKind::WhiteNoise => white_samples(n, spec.seed.expect("validated")),
        StimulusKind::PinkNoise => pink_filter(&white_samples(n, spec.seed.expect("validated"))),
        StimulusKind::AmBurstNoise => {
            let seed = spec.seed.expect("validated");
            let noise = match spec.color.unwrap_or(NoiseColor::White) {
                NoiseColor::White => white_samples(n, seed),
                NoiseColor::Pink => pink_filter(&white_samples(n, seed)),
            };
            let envelope = burst_envelope(
                n,
                sample_rate_hz,
                spec.burst_rate_hz.unwrap_or(DEFAULT_BURST_RATE_HZ),
                spec.duty.unwrap_or(DEFAULT_BURST_DUTY),
            );
            noise
                .iter()
                .zip(&envelope)
                .map(|(x, e)| x * e)
                .collect()
        }
    };

    let peak = raw.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let target = 10f64.powf(spec.level_dbfs / 20.0);
    let scale = if peak > 0.0 { target / peak } else { 0.0 };
    let samples: Vec<f32> = raw.iter().map(|&v| (v * scale) as f32).collect();
    AudioBuffer::mono(samples, sample_rate_hz)
}
