//! Full-reference localization-similarity scoring for binaural audio.
//!
//! Given a reference and a test stereo recording, the metric compares the
//! phase spectrograms (phaseograms) of the two channels with a neurogram
//! similarity measure (NSIM) aggregated over ERB-scale critical bands, and
//! reports the localization similarity (LS) as the product of the left and
//! right channel scores. A score of 1.0 means the spatial cues are identical;
//! scores fall as interaural cues diverge.
//!
//! The crate also ships:
//!
//! - [`synth`]: deterministic stimuli (tones, white/pink noise, noise bursts),
//!   a parametric ITD/ILD azimuth panner, and ordered degradations, so test
//!   corpora can be regenerated byte-identically from JSON manifests;
//! - [`harness`]: batch evaluation over CSV manifests with group statistics
//!   and correlation against subjective scores;
//! - [`wav`]: a small RIFF/WAVE codec for PCM and float files.
//!
//! ```no_run
//! use binaqual::{binaqual, read_wav, MetricConfig};
//!
//! let reference = read_wav("reference.wav")?;
//! let test = read_wav("test.wav")?;
//! let result = binaqual(&reference, &test, &MetricConfig::default())?;
//! println!("LS = {:.9}", result.ls);
//! # Ok::<(), binaqual::Error>(())
//! ```

pub mod audio;
pub mod bands;
pub mod error;
pub mod harness;
pub mod metric;
pub mod nsim;
pub mod spectral;
pub mod stats;
pub mod synth;
pub mod wav;

pub use audio::{validate_pair, AudioBuffer, ValidatedPair};
pub use bands::{build_band_map, default_band_map, erb_rate, BandMap};
pub use error::{Error, Result, Warning, WarningKind};
pub use harness::{
    read_manifest, run_batch, BatchOptions, BatchReport, BoxCoxOptions, ManifestEntry,
};
pub use metric::{binaqual, LocalizationResult, MetricConfig};
pub use nsim::{
    band_average, channel_nsim, nsim_map, segment_patches, AlignmentPolicy, ChannelScore,
    NsimParams, Patch, PATCH_FRAMES,
};
pub use spectral::{dft_reference, hamming_window, stft_phase, Phaseogram, StftConfig};
pub use stats::{box_cox, pearson, spearman};
pub use synth::{generate, NoiseColor, StimulusKind, StimulusSpec};
pub use wav::{read_wav, write_wav, BitDepth};
