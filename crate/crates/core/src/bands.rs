//! ERB-scale critical-band map for aggregating FFT bins.
//!
//! The retained FFT bins are partitioned into bands whose centers are evenly
//! spaced on the ERB-rate scale (Glasberg & Moore), approximating gammatone
//! critical bands. Assignment is hard: every bin belongs to exactly one band,
//! which keeps per-band averaging exactly invertible for constant inputs.
//! The published band edges of comparable metrics vary slightly; results are
//! sensitive to the exact edges only at the few-percent level.

use crate::error::{Error, Result};

/// Default number of aggregation bands.
pub const DEFAULT_BAND_COUNT: usize = 32;
/// Default lower edge of the band centers, in Hz.
pub const DEFAULT_F_MIN_HZ: f64 = 50.0;

/// ERB-rate (number of ERBs below `freq_hz`): 21.4*log10(0.00437*f + 1).
pub fn erb_rate(freq_hz: f64) -> f64 {
    21.4 * (0.00437 * freq_hz + 1.0).log10()
}

/// Inverse of [`erb_rate`].
pub fn erb_rate_to_hz(erb: f64) -> f64 {
    (10f64.powf(erb / 21.4) - 1.0) / 0.00437
}

/// Assignment of retained FFT bins to critical bands.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMap {
    band_of_bin: Vec<usize>,
    band_centers_hz: Vec<f64>,
    band_edges_hz: Vec<f64>,
    bins_per_band: Vec<usize>,
}

impl BandMap {
    pub fn band_count(&self) -> usize {
        self.band_centers_hz.len()
    }

    pub fn bin_count(&self) -> usize {
        self.band_of_bin.len()
    }

    /// Band index for each retained bin, monotonically non-decreasing.
    pub fn band_of_bin(&self) -> &[usize] {
        &self.band_of_bin
    }

    pub fn band_centers_hz(&self) -> &[f64] {
        &self.band_centers_hz
    }

    /// The `band_count + 1` boundary frequencies, from 0 Hz to Nyquist.
    pub fn band_edges_hz(&self) -> &[f64] {
        &self.band_edges_hz
    }

    pub fn bins_per_band(&self) -> &[usize] {
        &self.bins_per_band
    }
}

/// Builds the bin-to-band assignment.
///
/// Band centers are evenly spaced on the ERB-rate scale between `f_min_hz`
/// and the frequency of the top retained bin; interior edges sit at ERB-rate
/// midpoints between neighboring centers, with outer limits at 0 Hz and
/// Nyquist. Each bin goes to the band whose edges contain its center
/// frequency, so bins below the first interior edge land in band 0.
pub fn build_band_map(
    sample_rate_hz: u32,
    fft_size: usize,
    retained_bins: usize,
    n_bands: usize,
    f_min_hz: f64,
) -> Result<BandMap> {
    if n_bands == 0 {
        return Err(Error::InvalidConfig("n_bands must be at least 1".into()));
    }
    if retained_bins == 0 || retained_bins > fft_size / 2 + 1 {
        return Err(Error::InvalidConfig(format!(
            "retained_bins ({retained_bins}) must be in 1..={}",
            fft_size / 2 + 1
        )));
    }
    let bin_hz = f64::from(sample_rate_hz) / fft_size as f64;
    let top_hz = (retained_bins - 1) as f64 * bin_hz;
    if !(f_min_hz >= 0.0) || f_min_hz >= top_hz {
        return Err(Error::InvalidConfig(format!(
            "f_min_hz ({f_min_hz}) must lie in [0, {top_hz})"
        )));
    }

    let erb_lo = erb_rate(f_min_hz);
    let erb_hi = erb_rate(top_hz);
    let centers_erb: Vec<f64> = if n_bands == 1 {
        vec![(erb_lo + erb_hi) / 2.0]
    } else {
        (0..n_bands)
            .map(|i| erb_lo + (erb_hi - erb_lo) * i as f64 / (n_bands - 1) as f64)
            .collect()
    };
    let band_centers_hz: Vec<f64> = centers_erb.iter().map(|&e| erb_rate_to_hz(e)).collect();

    let mut band_edges_hz = Vec::with_capacity(n_bands + 1);
    band_edges_hz.push(0.0);
    for w in centers_erb.windows(2) {
        band_edges_hz.push(erb_rate_to_hz((w[0] + w[1]) / 2.0));
    }
    band_edges_hz.push(f64::from(sample_rate_hz) / 2.0);

    let mut band_of_bin = Vec::with_capacity(retained_bins);
    let mut bins_per_band = vec![0usize; n_bands];
    let mut band = 0usize;
    for bin in 0..retained_bins {
        let f = bin as f64 * bin_hz;
        while band + 1 < n_bands && f >= band_edges_hz[band + 1] {
            band += 1;
        }
        band_of_bin.push(band);
        bins_per_band[band] += 1;
    }

    if let Some(empty) = bins_per_band.iter().position(|&c| c == 0) {
        return Err(Error::DegenerateBand(empty));
    }

    Ok(BandMap {
        band_of_bin,
        band_centers_hz,
        band_edges_hz,
        bins_per_band,
    })
}

/// The default map: 48 kHz, 2048-point FFT, 640 bins, 32 bands from 50 Hz.
pub fn default_band_map() -> BandMap {
    build_band_map(48_000, 2048, 640, DEFAULT_BAND_COUNT, DEFAULT_F_MIN_HZ)
        .expect("default band configuration is valid")
}
