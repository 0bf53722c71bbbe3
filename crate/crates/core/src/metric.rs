//! Full pipeline: stereo pair in, localization similarity out.
//!
//! Each channel of the validated pair goes through phaseogram extraction and
//! NSIM scoring; the localization similarity (LS) is the product of the left
//! and right channel scores. Results carry a fingerprint of every parameter
//! so scores are only compared across identical configurations.

use sha2::{Digest, Sha256};

use crate::audio::{validate_pair, AudioBuffer};
use crate::bands::{build_band_map, BandMap, DEFAULT_BAND_COUNT, DEFAULT_F_MIN_HZ};
use crate::error::{Result, Warning};
use crate::nsim::{channel_nsim, AlignmentPolicy, ChannelScore, NsimParams};
use crate::spectral::{stft_phase, StftConfig};

/// Every knob of the pipeline in one place.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    pub stft: StftConfig,
    pub nsim: NsimParams,
    pub band_count: usize,
    pub f_min_hz: f64,
    pub alignment: AlignmentPolicy,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            stft: StftConfig::default(),
            nsim: NsimParams::default(),
            band_count: DEFAULT_BAND_COUNT,
            f_min_hz: DEFAULT_F_MIN_HZ,
            alignment: AlignmentPolicy::default(),
        }
    }
}

impl MetricConfig {
    /// Builds the band map this configuration implies for a sample rate.
    pub fn band_map(&self, sample_rate_hz: u32) -> Result<BandMap> {
        build_band_map(
            sample_rate_hz,
            self.stft.fft_size,
            self.stft.retained_bins,
            self.band_count,
            self.f_min_hz,
        )
    }

    /// Digest of all parameters. Two results are comparable exactly when
    /// their fingerprints match.
    pub fn fingerprint(&self) -> String {
        let mut canonical = String::new();
        canonical.push_str("binaqual-config-v1;");
        canonical.push_str(&format!(
            "fft={};win={};hop={};bins={};",
            self.stft.fft_size, self.stft.window_len, self.stft.hop, self.stft.retained_bins
        ));
        canonical.push_str(&format!(
            "L={};c1={};c3={};",
            self.nsim.dynamic_range, self.nsim.c1, self.nsim.c3
        ));
        canonical.push_str("kernel=");
        for row in &self.nsim.kernel {
            for w in row {
                canonical.push_str(&format!("{w},"));
            }
        }
        canonical.push(';');
        canonical.push_str(&format!("bands={};fmin={};", self.band_count, self.f_min_hz));
        match self.alignment {
            AlignmentPolicy::SameIndex => canonical.push_str("align=same-index"),
            AlignmentPolicy::Search { max_offset_frames } => {
                canonical.push_str(&format!("align=search:{max_offset_frames}"))
            }
        }
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

/// Localization similarity of a reference/test pair, with the per-channel
/// breakdown and any validation warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult {
    /// Product of the two channel scores, in [0, 1].
    pub ls: f64,
    pub left: ChannelScore,
    pub right: ChannelScore,
    pub warnings: Vec<Warning>,
    pub config_fingerprint: String,
}

/// Scores how similar the spatial-localization cues of `test` are to those of
/// `reference`.
///
/// Both buffers must be stereo at the same sample rate; a length mismatch is
/// truncated to the shorter buffer and reported as a warning. The result's
/// `ls` is exactly `left.nsim * right.nsim`.
pub fn binaqual(
    reference: &AudioBuffer,
    test: &AudioBuffer,
    config: &MetricConfig,
) -> Result<LocalizationResult> {
    let pair = validate_pair(reference, test)?;
    let band_map = config.band_map(pair.reference.sample_rate_hz())?;
    let rate = pair.reference.sample_rate_hz();

    let mut scores = Vec::with_capacity(2);
    for channel in 0..2 {
        let ref_pg = stft_phase(pair.reference.channel(channel), &config.stft, rate)?;
        let test_pg = stft_phase(pair.test.channel(channel), &config.stft, rate)?;
        scores.push(channel_nsim(
            &ref_pg,
            &test_pg,
            &band_map,
            &config.nsim,
            config.alignment,
        )?);
    }
    let right = scores.pop().expect("two channels scored");
    let left = scores.pop().expect("two channels scored");

    Ok(LocalizationResult {
        ls: left.nsim * right.nsim,
        left,
        right,
        warnings: pair.warnings,
        config_fingerprint: config.fingerprint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise_stereo(seed: u64, frames: usize) -> AudioBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l: Vec<f32> = (0..frames).map(|_| rng.random_range(-0.5..0.5)).collect();
        let r: Vec<f32> = (0..frames).map(|_| rng.random_range(-0.5..0.5)).collect();
        AudioBuffer::stereo(l, r, 48_000).unwrap()
    }

    #[test]
    fn identity_scores_one() {
        let x = noise_stereo(1, 96_000);
        let result = binaqual(&x, &x, &MetricConfig::default()).unwrap();
        assert_eq!(result.ls, 1.0);
        assert_eq!(result.left.nsim, 1.0);
        assert_eq!(result.right.nsim, 1.0);
        assert!(result.warnings.is_empty());
    }

    #[test]
    fn ls_is_exactly_the_channel_product() {
        let a = noise_stereo(2, 96_000);
        let b = noise_stereo(3, 96_000);
        let result = binaqual(&a, &b, &MetricConfig::default()).unwrap();
        assert_eq!(result.ls, result.left.nsim * result.right.nsim);
        assert!((0.0..=1.0).contains(&result.ls));
    }

    #[test]
    fn unit_left_factor_passes_right_score_through() {
        // identical left channels, differing right channels
        let a = noise_stereo(4, 96_000);
        let mut right = a.channel(1).to_vec();
        for (i, v) in right.iter_mut().enumerate() {
            if i % 2 == 0 {
                *v = -*v;
            }
        }
        let b = AudioBuffer::stereo(a.channel(0).to_vec(), right, 48_000).unwrap();
        let result = binaqual(&a, &b, &MetricConfig::default()).unwrap();
        assert_eq!(result.left.nsim, 1.0);
        assert_eq!(result.ls, result.right.nsim);
        assert!(result.right.nsim < 1.0);
    }

    #[test]
    fn results_are_deterministic() {
        let a = noise_stereo(5, 96_000);
        let b = noise_stereo(6, 96_000);
        let cfg = MetricConfig::default();
        let first = binaqual(&a, &b, &cfg).unwrap();
        let second = binaqual(&a, &b, &cfg).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn swapping_both_sides_preserves_ls() {
        let a = noise_stereo(7, 96_000);
        let b = noise_stereo(8, 96_000);
        let cfg = MetricConfig::default();
        let straight = binaqual(&a, &b, &cfg).unwrap();
        let swapped = binaqual(&a.channel_swapped(), &b.channel_swapped(), &cfg).unwrap();
        assert_eq!(straight.ls, swapped.ls);
        assert_eq!(straight.left.nsim, swapped.right.nsim);
        assert_eq!(straight.right.nsim, swapped.left.nsim);
    }

    #[test]
    fn length_mismatch_warning_propagates() {
        let a = noise_stereo(9, 96_000);
        let b = noise_stereo(9, 95_500);
        let result = binaqual(&a, &b, &MetricConfig::default()).unwrap();
        assert_eq!(result.warnings.len(), 1);
    }

    #[test]
    fn fingerprint_tracks_parameters() {
        let base = MetricConfig::default();
        let mut tweaked = MetricConfig::default();
        tweaked.nsim.c1 *= 2.0;
        assert_ne!(base.fingerprint(), tweaked.fingerprint());
        assert_eq!(base.fingerprint(), MetricConfig::default().fingerprint());
        assert_eq!(base.fingerprint().len(), 64);
    }
}
