//! Controlled degradations with ordered severity.
//!
//! These operators stand in for codec chains in fixtures: additive noise at a
//! target SNR, a fourth-order Butterworth low-pass, and requantization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// A single degradation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum DegradeOp {
    /// Adds seeded Gaussian noise scaled to hit `snr_db` of broadband SNR.
    /// `snr_db: None` means infinite SNR: the input passes through bit-exact.
    AdditiveNoise {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snr_db: Option<f64>,
        seed: u64,
    },
    /// Fourth-order Butterworth low-pass (two cascaded biquads), applied
    /// identically to both channels.
    Lowpass { cutoff_hz: f64 },
    /// Rounds samples to the grid of the stated integer bit depth.
    Quantize { bits: u32 },
}

/// Applies one degradation, returning a new buffer.
pub fn degrade(buffer: &AudioBuffer, op: &DegradeOp) -> Result<AudioBuffer> {
    match *op {
        DegradeOp::AdditiveNoise { snr_db, seed } => additive_noise(buffer, snr_db, seed),
        DegradeOp::Lowpass { cutoff_hz } => lowpass(buffer, cutoff_hz),
        DegradeOp::Quantize { bits } => quantize(buffer, bits),
    }
}

fn additive_noise(buffer: &AudioBuffer, snr_db: Option<f64>, seed: u64) -> Result<AudioBuffer> {
    let Some(snr_db) = snr_db else {
        return Ok(buffer.clone());
    };
    if !snr_db.is_finite() {
        return Err(Error::InvalidSpec(
            "snr_db must be finite; omit it for a pass-through".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<Vec<f64>> = (0..buffer.channel_count())
        .map(|_| {
            (0..buffer.frames())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect()
        })
        .collect();

    let signal_energy: f64 = buffer
        .channels()
        .iter()
        .flat_map(|c| c.iter())
        .map(|&x| f64::from(x) * f64::from(x))
        .sum();
    let noise_energy: f64 = noise.iter().flatten().map(|&x| x * x).sum();
    if signal_energy == 0.0 || noise_energy == 0.0 {
        return Ok(buffer.clone());
    }
    // scale so signal_energy / (alpha^2 * noise_energy) == 10^(snr/10)
    let alpha = (signal_energy / (noise_energy * 10f64.powf(snr_db / 10.0))).sqrt();

    let channels = buffer
        .channels()
        .iter()
        .zip(&noise)
        .map(|(samples, noise)| {
            samples
                .iter()
                .zip(noise)
                .map(|(&x, &n)| (f64::from(x) + alpha * n) as f32)
                .collect()
        })
        .collect();
    AudioBuffer::new(channels, buffer.sample_rate_hz())
}

/// One second-order section of an RBJ cookbook low-pass.
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn lowpass(cutoff_hz: f64, sample_rate_hz: f64, q: f64) -> Biquad {
        let w0 = 2.0 * std::f64::consts::PI * cutoff_hz / sample_rate_hz;
        let alpha = w0.sin() / (2.0 * q);
        let cos_w0 = w0.cos();
        let a0 = 1.0 + alpha;
        Biquad {
            b0: ((1.0 - cos_w0) / 2.0) / a0,
            b1: (1.0 - cos_w0) / a0,
            b2: ((1.0 - cos_w0) / 2.0) / a0,
            a1: (-2.0 * cos_w0) / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    fn run(&self, input: &[f64]) -> Vec<f64> {
        let mut x1 = 0.0;
        let mut x2 = 0.0;
        let mut y1 = 0.0;
        let mut y2 = 0.0;
        input
            .iter()
            .map(|&x0| {
                let y0 =
                    self.b0 * x0 + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
                x2 = x1;
                x1 = x0;
                y2 = y1;
                y1 = y0;
                y0
            })
            .collect()
    }
}

/// Butterworth pole quality factors for a 4th-order low-pass split into two
/// second-order sections: 1/(2 cos(pi/8)) and 1/(2 cos(3 pi/8)).
const BUTTERWORTH_Q: [f64; 2] = [0.541_196_100_146_197, 1.306_562_964_876_376_5];

fn lowpass(buffer: &AudioBuffer, cutoff_hz: f64) -> Result<AudioBuffer> {
    let fs = f64::from(buffer.sample_rate_hz());
    if !(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
        return Err(Error::InvalidSpec(format!(
            "cutoff_hz must lie in (0, Nyquist); got {cutoff_hz}"
        )));
    }
    let sections = [
        Biquad::lowpass(cutoff_hz, fs, BUTTERWORTH_Q[0]),
        Biquad::lowpass(cutoff_hz, fs, BUTTERWORTH_Q[1]),
    ];
    let channels = buffer
        .channels()
        .iter()
        .map(|samples| {
            let mut data: Vec<f64> = samples.iter().map(|&x| f64::from(x)).collect();
            for section in &sections {
                data = section.run(&data);
            }
            data.iter().map(|&x| x as f32).collect()
        })
        .collect();
    AudioBuffer::new(channels, buffer.sample_rate_hz())
}

fn quantize(buffer: &AudioBuffer, bits: u32) -> Result<AudioBuffer> {
    if !(2..=24).contains(&bits) {
        return Err(Error::InvalidSpec(format!(
            "bits must lie in 2..=24; got {bits}"
        )));
    }
    let scale = f64::from(1u32 << (bits - 1));
    let channels = buffer
        .channels()
        .iter()
        .map(|samples| {
            samples
                .iter()
                .map(|&x| {
                    let code = (f64::from(x) * scale).round().clamp(-scale, scale - 1.0);
                    (code / scale) as f32
                })
                .collect()
        })
        .collect();
    AudioBuffer::new(channels, buffer.sample_rate_hz())
}
