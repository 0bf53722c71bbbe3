//! Short-time Fourier analysis and phase-angle spectrograms (phaseograms).
//!
//! The defaults implement the analysis front end of the localization metric:
//! a 2048-point STFT over a 1536-sample symmetric Hamming window with 50%
//! overlap (768-sample hop, 16 ms at 48 kHz), keeping the first 640 bins.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default FFT length.
pub const DEFAULT_FFT_SIZE: usize = 2048;
/// Default analysis window length.
pub const DEFAULT_WINDOW_LEN: usize = 1536;
/// Default hop: half the window length.
pub const DEFAULT_HOP: usize = 768;
/// Default number of retained low-frequency bins.
pub const DEFAULT_RETAINED_BINS: usize = 640;

/// STFT front-end parameters.
///
/// Non-default values exist for tests; analysis results are only comparable
/// across identical configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StftConfig {
    pub fft_size: usize,
    pub window_len: usize,
    pub hop: usize,
    pub retained_bins: usize,
}

impl StftConfig {
    /// Validated constructor. The hop must be half the window length, the
    /// window must fit in the FFT frame (the tail is zero-padded), and the
    /// retained bin count cannot exceed the one-sided spectrum length.
    pub fn new(fft_size: usize, window_len: usize, hop: usize, retained_bins: usize) -> Result<Self> {
        if window_len < 2 {
            return Err(Error::InvalidConfig("window_len must be at least 2".into()));
        }
        if hop * 2 != window_len {
            return Err(Error::InvalidConfig(format!(
                "hop ({hop}) must be half the window length ({window_len})"
            )));
        }
        if window_len > fft_size {
            return Err(Error::InvalidConfig(format!(
                "window_len ({window_len}) must not exceed fft_size ({fft_size})"
            )));
        }
        if retained_bins == 0 || retained_bins > fft_size / 2 + 1 {
            return Err(Error::InvalidConfig(format!(
                "retained_bins ({retained_bins}) must be in 1..={}",
                fft_size / 2 + 1
            )));
        }
        Ok(StftConfig {
            fft_size,
            window_len,
            hop,
            retained_bins,
        })
    }

    /// Number of full analysis frames for a signal of `samples` samples.
    pub fn frame_count(&self, samples: usize) -> usize {
        if samples < self.window_len {
            0
        } else {
            (samples - self.window_len) / self.hop + 1
        }
    }
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            fft_size: DEFAULT_FFT_SIZE,
            window_len: DEFAULT_WINDOW_LEN,
            hop: DEFAULT_HOP,
            retained_bins: DEFAULT_RETAINED_BINS,
        }
    }
}

/// A bins-by-frames matrix of principal-value phase angles.
///
/// Every value lies in (-pi, pi]; bins with exactly zero magnitude report
/// phase 0 rather than an undefined angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Phaseogram {
    bins: usize,
    frames: usize,
    frame_duration_s: f64,
    values: Vec<f64>,
}

impl Phaseogram {
    pub(crate) fn from_values(
        bins: usize,
        frames: usize,
        frame_duration_s: f64,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), bins * frames);
        Phaseogram {
            bins,
            frames,
            frame_duration_s,
            values,
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Seconds of signal each frame advances (hop / sample rate).
    pub fn frame_duration_s(&self) -> f64 {
        self.frame_duration_s
    }

    /// Phase at (bin, frame). Storage is bin-major.
    pub fn value(&self, bin: usize, frame: usize) -> f64 {
        self.values[bin * self.frames + frame]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Symmetric Hamming window: w[n] = 0.54 - 0.46*cos(2*pi*n/(len-1)).
pub fn hamming_window(len: usize) -> Vec<f64> {
    assert!(len >= 2, "hamming_window needs at least 2 points");
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
        .collect()
}

/// Maps an angle from atan2's [-pi, pi] onto the principal interval (-pi, pi].
fn principal_phase(re: f64, im: f64) -> f64 {
    if re == 0.0 && im == 0.0 {
        return 0.0;
    }
    let phase = im.atan2(re);
    if phase <= -std::f64::consts::PI {
        phase + 2.0 * std::f64::consts::PI
    } else {
        phase
    }
}

/// Computes the phaseogram of a single channel.
///
/// Frame `f` covers samples `[f*hop, f*hop + window_len)`; the windowed
/// segment is zero-padded to `fft_size` and only the first `retained_bins`
/// bins are kept. Trailing samples that do not fill a window are discarded.
pub fn stft_phase(signal: &[f32], config: &StftConfig, sample_rate_hz: u32) -> Result<Phaseogram> {
    if signal.len() < config.window_len {
        return Err(Error::SignalTooShort {
            samples: signal.len(),
            needed: config.window_len,
        });
    }
    let frames = config.frame_count(signal.len());
    let window = hamming_window(config.window_len);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(config.fft_size);
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex::new(0.0, 0.0); config.fft_size];
    let mut values = vec![0.0f64; config.retained_bins * frames];

    for frame in 0..frames {
        let start = frame * config.hop;
        for (i, w) in window.iter().enumerate() {
            buf[i] = Complex::new(f64::from(signal[start + i]) * w, 0.0);
        }
        for slot in buf.iter_mut().skip(config.window_len) {
            *slot = Complex::new(0.0, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for bin in 0..config.retained_bins {
            values[bin * frames + frame] = principal_phase(buf[bin].re, buf[bin].im);
        }
    }

    Ok(Phaseogram::from_values(
        config.retained_bins,
        frames,
        config.hop as f64 / f64::from(sample_rate_hz),
        values,
    ))
}

/// Naive O(n^2) discrete Fourier transform, straight from the definition.
///
/// This is deliberately independent of the fast transform used by
/// [`stft_phase`] so the two can be checked against each other.
pub fn dft_reference(segment: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let n = segment.len();
    assert!(n >= 1, "dft_reference needs at least one sample");
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex::new(0.0, 0.0);
        for (i, x) in segment.iter().enumerate() {
            // reduce k*i mod n before taking sin/cos so the angle stays small
            let m = (k * i) % n;
            let angle = -2.0 * std::f64::consts::PI * m as f64 / n as f64;
            acc += x * Complex::new(angle.cos(), angle.sin());
        }
        out.push(acc);
    }
    out
}
