//! Parametric ITD/ILD azimuth panner.
//!
//! Renders a mono source to stereo using the two primary binaural cues: an
//! interaural time difference from the Woodworth spherical-head model,
//! applied as a fractional delay to the far ear, and a frequency-independent
//! interaural level difference following a sine law. This gives physically
//! ordered, monotone cue differences across azimuth without any HRTF data.
//! There is no elevation model.

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Default head radius in meters.
pub const DEFAULT_HEAD_RADIUS_M: f64 = 0.0875;
/// Default speed of sound in m/s.
pub const DEFAULT_SPEED_OF_SOUND_MPS: f64 = 343.0;
/// Default maximum interaural level difference in dB, reached at +/-90 deg.
pub const DEFAULT_ILD_MAX_DB: f64 = 12.0;

fn default_head_radius() -> f64 {
    DEFAULT_HEAD_RADIUS_M
}

fn default_speed_of_sound() -> f64 {
    DEFAULT_SPEED_OF_SOUND_MPS
}

fn default_ild_max() -> f64 {
    DEFAULT_ILD_MAX_DB
}

/// Where to place the source. Positive azimuth is to the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanSpec {
    /// Degrees in [-180, 180).
    pub azimuth_deg: f64,
    #[serde(default = "default_head_radius")]
    pub head_radius_m: f64,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound_mps: f64,
    #[serde(default = "default_ild_max")]
    pub ild_max_db: f64,
}

impl PanSpec {
    pub fn azimuth(azimuth_deg: f64) -> Self {
        PanSpec {
            azimuth_deg,
            head_radius_m: DEFAULT_HEAD_RADIUS_M,
            speed_of_sound_mps: DEFAULT_SPEED_OF_SOUND_MPS,
            ild_max_db: DEFAULT_ILD_MAX_DB,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(-180.0..180.0).contains(&self.azimuth_deg) {
            return Err(Error::InvalidSpec(format!(
                "azimuth_deg must lie in [-180, 180); got {}",
                self.azimuth_deg
            )));
        }
        if !(self.head_radius_m > 0.0) || !(self.speed_of_sound_mps > 0.0) {
            return Err(Error::InvalidSpec(
                "head radius and speed of sound must be positive".into(),
            ));
        }
        if !(self.ild_max_db >= 0.0) {
            return Err(Error::InvalidSpec("ild_max_db must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for PanSpec {
    fn default() -> Self {
        PanSpec::azimuth(0.0)
    }
}

/// Woodworth spherical-head ITD, tau = (r/c)(theta + sin theta), valid for
/// |theta| <= 90 deg and mirrored into the rear quadrants.
pub fn woodworth_itd_seconds(spec: &PanSpec) -> f64 {
    let mut az = spec.azimuth_deg.abs();
    if az > 90.0 {
        az = 180.0 - az;
    }
    let theta = az.to_radians();
    (spec.head_radius_m / spec.speed_of_sound_mps) * (theta + theta.sin())
}

/// 32-tap Hann-windowed-sinc fractional delay. A zero delay degenerates to
/// (numerically) the identity.
fn fractional_delay(input: &[f32], delay_samples: f64) -> Vec<f32> {
    debug_assert!(delay_samples >= 0.0);
    const TAPS: usize = 32;
    const CENTER: i64 = 15;
    const HALF_WIDTH: f64 = 16.0;

    let whole = delay_samples.floor() as i64;
    let frac = delay_samples - delay_samples.floor();
    let mut taps = [0.0f64; TAPS];
    for (m, tap) in taps.iter_mut().enumerate() {
        let t = m as f64 - CENTER as f64 - frac;
        let sinc = if t == 0.0 {
            1.0
        } else {
            (std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t)
        };
        let window = if t.abs() <= HALF_WIDTH {
            0.5 * (1.0 + (std::f64::consts::PI * t / HALF_WIDTH).cos())
        } else {
            0.0
        };
        *tap = sinc * window;
    }

    let n = input.len() as i64;
    let mut output = vec![0.0f32; input.len()];
    for (i, out) in output.iter_mut().enumerate() {
        let mut acc = 0.0f64;
        for (m, &tap) in taps.iter().enumerate() {
            let src = i as i64 - whole - (m as i64 - CENTER);
            if src >= 0 && src < n {
                acc += tap * f64::from(input[src as usize]);
            }
        }
        *out = acc as f32;
    }
    output
}

/// Renders a mono buffer to stereo at the given azimuth.
///
/// The near ear receives the source as-is (plus the ILD gain); the far ear
/// receives it through the fractional delay. The construction is exactly
/// mirror-symmetric: `pan(theta)` equals `pan(-theta)` with channels swapped,
/// bit for bit.
pub fn pan_binaural(mono: &AudioBuffer, spec: &PanSpec) -> Result<AudioBuffer> {
    if mono.channel_count() != 1 {
        return Err(Error::UnsupportedChannelCount(mono.channel_count()));
    }
    spec.validate()?;

    let itd_samples = woodworth_itd_seconds(spec) * f64::from(mono.sample_rate_hz());
    let gain_db = (spec.ild_max_db / 2.0) * spec.azimuth_deg.abs().to_radians().sin();
    let near_gain = 10f64.powf(gain_db / 20.0);
    let far_gain = 10f64.powf(-gain_db / 20.0);

    let source = mono.channel(0);
    let near: Vec<f32> = source
        .iter()
        .map(|&x| (f64::from(x) * near_gain) as f32)
        .collect();
    let far: Vec<f32> = fractional_delay(source, itd_samples)
        .iter()
        .map(|&x| (f64::from(x) * far_gain) as f32)
        .collect();

    if spec.azimuth_deg >= 0.0 {
        AudioBuffer::stereo(far, near, mono.sample_rate_hz())
    } else {
        AudioBuffer::stereo(near, far, mono.sample_rate_hz())
    }
}
