//! Neurogram similarity (NSIM) between phaseogram patches.
//!
//! The similarity of two aligned patches is computed per pixel as the product
//! of a luminance term and a structure term over Gaussian-weighted local
//! statistics, then averaged across critical bands and patches. This is the
//! luminance-times-structure form of NSIM (Hines & Harte) applied to phase
//! angles, with the dynamic range set to the 2*pi span of principal-value
//! phase. The constants and the 3x3 sigma=0.5 window are configurable but the
//! defaults are frozen: scores are only comparable across identical
//! parameterizations.

use serde::{Deserialize, Serialize};

use crate::bands::BandMap;
use crate::error::{Error, Result};
use crate::spectral::Phaseogram;

/// Frames per patch: 30 frames of 16 ms = 480 ms at the default front end.
pub const PATCH_FRAMES: usize = 30;

/// NSIM constants and the local-statistics kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsimParams {
    /// Dynamic range L of the compared values; 2*pi for phase angles.
    pub dynamic_range: f64,
    /// Luminance stabilizer, (0.01*L)^2 by default.
    pub c1: f64,
    /// Structure stabilizer, ((0.03*L)^2)/2 by default.
    pub c3: f64,
    /// 3x3 Gaussian weights, normalized to sum 1.
    pub kernel: [[f64; 3]; 3],
}

impl NsimParams {
    /// Parameters for values spanning `dynamic_range`, with the usual
    /// 0.01/0.03 stabilizer fractions and a sigma = 0.5 Gaussian window.
    pub fn for_dynamic_range(dynamic_range: f64) -> Self {
        let c1 = (0.01 * dynamic_range).powi(2);
        let c3 = (0.03 * dynamic_range).powi(2) / 2.0;
        NsimParams {
            dynamic_range,
            c1,
            c3,
            kernel: gaussian_kernel_3x3(0.5),
        }
    }

    pub fn kernel_sum(&self) -> f64 {
        self.kernel.iter().flatten().sum()
    }
}

impl Default for NsimParams {
    fn default() -> Self {
        NsimParams::for_dynamic_range(2.0 * std::f64::consts::PI)
    }
}

/// 3x3 Gaussian taps exp(-(dx^2+dy^2)/(2*sigma^2)), normalized to sum 1.
pub fn gaussian_kernel_3x3(sigma: f64) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    let mut sum = 0.0;
    for (i, row) in k.iter_mut().enumerate() {
        for (j, w) in row.iter_mut().enumerate() {
            let dx = i as f64 - 1.0;
            let dy = j as f64 - 1.0;
            *w = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            sum += *w;
        }
    }
    for row in k.iter_mut() {
        for w in row.iter_mut() {
            *w /= sum;
        }
    }
    k
}

/// A fixed-length slice of a phaseogram: all bins by [`PATCH_FRAMES`] frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    bins: usize,
    frames: usize,
    /// First frame of this patch in the source phaseogram.
    pub start_frame: usize,
    values: Vec<f64>,
}

impl Patch {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn value(&self, bin: usize, frame: usize) -> f64 {
        self.values[bin * self.frames + frame]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copies frames `[start, start + PATCH_FRAMES)` out of a phaseogram.
    fn from_phaseogram(pg: &Phaseogram, start: usize) -> Patch {
        let mut values = Vec::with_capacity(pg.bins() * PATCH_FRAMES);
        for bin in 0..pg.bins() {
            for frame in start..start + PATCH_FRAMES {
                values.push(pg.value(bin, frame));
            }
        }
        Patch {
            bins: pg.bins(),
            frames: PATCH_FRAMES,
            start_frame: start,
            values,
        }
    }
}

/// Per-pixel similarity values for a patch pair; same layout as [`Patch`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    bins: usize,
    frames: usize,
    values: Vec<f64>,
}

impl SimilarityMap {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn value(&self, bin: usize, frame: usize) -> f64 {
        self.values[bin * self.frames + frame]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// How reference patches are paired with test patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum AlignmentPolicy {
    /// Pair patches at identical start frames. The default: full-reference
    /// pairs are time-aligned by construction.
    SameIndex,
    /// For each reference patch, search test patches within
    /// `max_offset_frames` of the same start and keep the best-scoring one.
    /// Useful when a codec chain introduces a small constant delay.
    Search { max_offset_frames: usize },
}

impl Default for AlignmentPolicy {
    fn default() -> Self {
        AlignmentPolicy::SameIndex
    }
}

/// Per-channel similarity with its patch and band breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScore {
    /// Mean patch score clamped to [0, 1].
    pub nsim: f64,
    /// Mean patch score before clamping; kept for diagnostics.
    pub nsim_pre_clamp: f64,
    /// One score per patch, each the mean of its band scores.
    pub patch_scores: Vec<f64>,
    /// Per-patch band scores (one vector of `band_count` values per patch).
    pub band_scores: Vec<Vec<f64>>,
}

/// Splits a phaseogram into consecutive non-overlapping patches.
///
/// The trailing remainder of fewer than [`PATCH_FRAMES`] frames is discarded.
pub fn segment_patches(pg: &Phaseogram) -> Result<Vec<Patch>> {
    if pg.frames() < PATCH_FRAMES {
        return Err(Error::TooShort {
            frames: pg.frames(),
            needed: PATCH_FRAMES,
        });
    }
    let count = pg.frames() / PATCH_FRAMES;
    Ok((0..count)
        .map(|p| Patch::from_phaseogram(pg, p * PATCH_FRAMES))
        .collect())
}

/// Computes the per-pixel NSIM map between two patches of equal dimensions.
///
/// For each pixel, local mean, variance, and covariance are taken over the
/// 3x3 neighborhood with Gaussian weights; at matrix borders the kernel is
/// truncated to the in-bounds taps and renormalized, so border statistics use
/// only real data. Variances are floored at zero before taking roots.
pub fn nsim_map(
    reference: &Patch,
    test: &Patch,
    params: &NsimParams,
) -> Result<SimilarityMap> {
    if reference.bins() != test.bins() || reference.frames() != test.frames() {
        return Err(Error::DimensionMismatch(format!(
            "reference patch is {}x{}, test patch is {}x{}",
            reference.bins(),
            reference.frames(),
            test.bins(),
            test.frames()
        )));
    }
    let bins = reference.bins();
    let frames = reference.frames();
    let k = &params.kernel;
    let mut values = vec![0.0f64; bins * frames];

    for bin in 0..bins {
        for frame in 0..frames {
            // first pass: renormalized weighted means
            let mut wsum = 0.0;
            let mut sr = 0.0;
            let mut sd = 0.0;
            for di in -1i64..=1 {
                let b = bin as i64 + di;
                if b < 0 || b >= bins as i64 {
                    continue;
                }
                for dj in -1i64..=1 {
                    let f = frame as i64 + dj;
                    if f < 0 || f >= frames as i64 {
                        continue;
                    }
                    let w = k[(di + 1) as usize][(dj + 1) as usize];
                    wsum += w;
                    sr += w * reference.value(b as usize, f as usize);
                    sd += w * test.value(b as usize, f as usize);
                }
            }
            let mu_r = sr / wsum;
            let mu_d = sd / wsum;

            // second pass: central moments, so variances cannot go negative
            // from cancellation and identical inputs give exactly equal
            // variance and covariance
            let mut vr = 0.0;
            let mut vd = 0.0;
            let mut cov = 0.0;
            for di in -1i64..=1 {
                let b = bin as i64 + di;
                if b < 0 || b >= bins as i64 {
                    continue;
                }
                for dj in -1i64..=1 {
                    let f = frame as i64 + dj;
                    if f < 0 || f >= frames as i64 {
                        continue;
                    }
                    let w = k[(di + 1) as usize][(dj + 1) as usize];
                    let er = reference.value(b as usize, f as usize) - mu_r;
                    let ed = test.value(b as usize, f as usize) - mu_d;
                    vr += w * er * er;
                    vd += w * ed * ed;
                    cov += w * er * ed;
                }
            }
            let inv = 1.0 / wsum;
            let vr = (vr * inv).max(0.0);
            let vd = (vd * inv).max(0.0);
            let cov = cov * inv;

            let luminance = (2.0 * mu_r * mu_d + params.c1) / (mu_r * mu_r + mu_d * mu_d + params.c1);
            // sqrt of the product rather than the product of square roots:
            // algebraically identical, and exact when vr == vd == cov
            let structure = (cov + params.c3) / ((vr * vd).sqrt() + params.c3);
            values[bin * frames + frame] = luminance * structure;
        }
    }

    Ok(SimilarityMap {
        bins,
        frames,
        values,
    })
}

/// Averages a similarity map into one value per critical band.
///
/// Entry `b` is the arithmetic mean over every pixel whose bin belongs to
/// band `b`, pooled across all frames of the patch.
pub fn band_average(map: &SimilarityMap, band_map: &BandMap) -> Vec<f64> {
    debug_assert_eq!(map.bins(), band_map.bin_count());
    let bands = band_map.band_count();
    let mut sums = vec![0.0f64; bands];
    for bin in 0..map.bins() {
        let band = band_map.band_of_bin()[bin];
        for frame in 0..map.frames() {
            sums[band] += map.value(bin, frame);
        }
    }
    sums.iter()
        .zip(band_map.bins_per_band())
        .map(|(s, &count)| s / (count * map.frames()) as f64)
        .collect()
}

/// Scores one channel: segments both phaseograms, pairs patches according to
/// the alignment policy, and aggregates band scores into patch scores and the
/// channel score. Patch scores are summed in index order so the result is
/// bit-identical regardless of how callers parallelize around this.
pub fn channel_nsim(
    reference: &Phaseogram,
    test: &Phaseogram,
    band_map: &BandMap,
    params: &NsimParams,
    alignment: AlignmentPolicy,
) -> Result<ChannelScore> {
    let ref_patches = segment_patches(reference)?;
    let test_patches = segment_patches(test)?;
    if ref_patches.len() != test_patches.len() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} patches, test has {}",
            ref_patches.len(),
            test_patches.len()
        )));
    }

    let mut patch_scores = Vec::with_capacity(ref_patches.len());
    let mut band_scores = Vec::with_capacity(ref_patches.len());
    for (index, ref_patch) in ref_patches.iter().enumerate() {
        let (score, bands) = match alignment {
            AlignmentPolicy::SameIndex => {
                score_pair(ref_patch, &test_patches[index], band_map, params)?
            }
            AlignmentPolicy::Search { max_offset_frames } => {
                let mut best: Option<(f64, Vec<f64>)> = None;
                let offset = max_offset_frames as i64;
                let base = ref_patch.start_frame as i64;
                for delta in -offset..=offset {
                    let start = base + delta;
                    if start < 0 || start as usize + PATCH_FRAMES > test.frames() {
                        continue;
                    }
                    let candidate = Patch::from_phaseogram(test, start as usize);
                    let scored = score_pair(ref_patch, &candidate, band_map, params)?;
                    if best.as_ref().is_none_or(|(s, _)| scored.0 > *s) {
                        best = Some(scored);
                    }
                }
                best.expect("search window always contains the same-index patch")
            }
        };
        patch_scores.push(score);
        band_scores.push(bands);
    }

    let mean = patch_scores.iter().sum::<f64>() / patch_scores.len() as f64;
    Ok(ChannelScore {
        nsim: mean.clamp(0.0, 1.0),
        nsim_pre_clamp: mean,
        patch_scores,
        band_scores,
    })
}

fn score_pair(
    reference: &Patch,
    test: &Patch,
    band_map: &BandMap,
    params: &NsimParams,
) -> Result<(f64, Vec<f64>)> {
    let map = nsim_map(reference, test, params)?;
    let bands = band_average(&map, band_map);
    let score = bands.iter().sum::<f64>() / bands.len() as f64;
    Ok((score, bands))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::default_band_map;
    use crate::spectral::{stft_phase, StftConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn patch_from(values: Vec<f64>, bins: usize, frames: usize) -> Patch {
        Patch {
            bins,
            frames,
            start_frame: 0,
            values,
        }
    }

    fn random_patch(seed: u64, bins: usize, frames: usize) -> Patch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        patch_from(
            (0..bins * frames)
                .map(|_| rng.random_range(-PI..PI))
                .collect(),
            bins,
            frames,
        )
    }

    fn phaseogram(bins: usize, frames: usize, f: impl Fn(usize, usize) -> f64) -> Phaseogram {
        let mut values = vec![0.0; bins * frames];
        for b in 0..bins {
            for t in 0..frames {
                values[b * frames + t] = f(b, t);
            }
        }
        Phaseogram::from_values(bins, frames, 0.016, values)
    }

    #[test]
    fn default_params_match_conventions() {
        let p = NsimParams::default();
        assert!((p.c1 - 0.003947841760435743).abs() < 1e-15);
        assert!((p.c3 - 0.017765287921960842).abs() < 1e-15);
        assert!((p.kernel_sum() - 1.0).abs() < 1e-12);
        assert!(p.c1 > 0.0 && p.c3 > 0.0);
        // center tap dominates, corners are smallest
        assert!(p.kernel[1][1] > p.kernel[0][1]);
        assert!(p.kernel[0][1] > p.kernel[0][0]);
    }

    #[test]
    fn segmentation_counts_and_trailing_discard() {
        let pg = phaseogram(8, 124, |_, _| 0.0);
        let patches = segment_patches(&pg).unwrap();
        assert_eq!(patches.len(), 4);
        assert_eq!(patches[3].start_frame, 90);
        let pg30 = phaseogram(8, 30, |_, _| 0.0);
        assert_eq!(segment_patches(&pg30).unwrap().len(), 1);
        let pg29 = phaseogram(8, 29, |_, _| 0.0);
        assert!(matches!(
            segment_patches(&pg29).unwrap_err(),
            Error::TooShort { frames: 29, needed: 30 }
        ));
    }

    #[test]
    fn identical_patches_score_exactly_one() {
        let p = random_patch(1, 640, PATCH_FRAMES);
        let map = nsim_map(&p, &p, &NsimParams::default()).unwrap();
        for &v in map.values() {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn constant_vs_constant_matches_closed_form() {
        let params = NsimParams::default();
        let a = patch_from(vec![PI; 640 * PATCH_FRAMES], 640, PATCH_FRAMES);
        let b = patch_from(vec![0.0; 640 * PATCH_FRAMES], 640, PATCH_FRAMES);
        let map = nsim_map(&a, &b, &params).unwrap();
        // zero variances: structure = 1, luminance = c1 / (pi^2 + c1)
        let expected = params.c1 / (PI * PI + params.c1);
        assert!((expected - 3.998_400_639_744e-4).abs() < 1e-15);
        for &v in map.values() {
            assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
        }
    }

    #[test]
    fn sign_flip_lowers_luminance_where_mean_is_nonzero() {
        let params = NsimParams::default();
        let p = random_patch(2, 64, PATCH_FRAMES);
        let negated = patch_from(p.values().iter().map(|v| -v).collect(), 64, PATCH_FRAMES);
        let map = nsim_map(&p, &negated, &params).unwrap();
        // oracle: recompute local statistics with the same truncated kernel.
        // Negating the test patch gives mu_d = -mu_r, vd = vr, cov = -vr.
        for bin in 0..64 {
            for frame in 0..PATCH_FRAMES {
                let mut wsum = 0.0;
                let mut sr = 0.0;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let b = bin as i64 + di;
                        let f = frame as i64 + dj;
                        if b < 0 || b >= 64 || f < 0 || f >= PATCH_FRAMES as i64 {
                            continue;
                        }
                        let w = params.kernel[(di + 1) as usize][(dj + 1) as usize];
                        wsum += w;
                        sr += w * p.value(b as usize, f as usize);
                    }
                }
                let mu = sr / wsum;
                let mut vr = 0.0;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let b = bin as i64 + di;
                        let f = frame as i64 + dj;
                        if b < 0 || b >= 64 || f < 0 || f >= PATCH_FRAMES as i64 {
                            continue;
                        }
                        let w = params.kernel[(di + 1) as usize][(dj + 1) as usize];
                        let e = p.value(b as usize, f as usize) - mu;
                        vr += w * e * e;
                    }
                }
                let vr = vr / wsum;
                let luminance = (-2.0 * mu * mu + params.c1) / (2.0 * mu * mu + params.c1);
                let structure = (-vr + params.c3) / ((vr * vr).sqrt() + params.c3);
                if mu.abs() > 1e-6 {
                    assert!(luminance < 1.0, "luminance {luminance} at mean {mu}");
                }
                assert!(
                    (map.value(bin, frame) - luminance * structure).abs() < 1e-12,
                    "({bin},{frame}): map {} vs oracle {}",
                    map.value(bin, frame),
                    luminance * structure
                );
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = random_patch(3, 16, PATCH_FRAMES);
        let b = random_patch(3, 8, PATCH_FRAMES);
        assert!(matches!(
            nsim_map(&a, &b, &NsimParams::default()).unwrap_err(),
            Error::DimensionMismatch(_)
        ));
    }

    #[test]
    fn nsim_map_matches_hand_rolled_statistics() {
        // independent per-pixel recomputation on a 9x9 excerpt
        let params = NsimParams::default();
        let bins = 9;
        let frames = 9;
        let r = random_patch(41, bins, frames);
        let d = random_patch(42, bins, frames);
        let map = nsim_map(&r, &d, &params).unwrap();
        for i in 0..bins {
            for j in 0..frames {
                let mut w_total = 0.0;
                let mut taps: Vec<(f64, f64, f64)> = Vec::new();
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let b = i as i64 + di;
                        let f = j as i64 + dj;
                        if b < 0 || b >= bins as i64 || f < 0 || f >= frames as i64 {
                            continue;
                        }
                        let w = params.kernel[(di + 1) as usize][(dj + 1) as usize];
                        w_total += w;
                        taps.push((w, r.value(b as usize, f as usize), d.value(b as usize, f as usize)));
                    }
                }
                let mu_r: f64 = taps.iter().map(|(w, x, _)| w * x).sum::<f64>() / w_total;
                let mu_d: f64 = taps.iter().map(|(w, _, y)| w * y).sum::<f64>() / w_total;
                let vr: f64 = taps
                    .iter()
                    .map(|(w, x, _)| w * (x - mu_r) * (x - mu_r))
                    .sum::<f64>()
                    / w_total;
                let vd: f64 = taps
                    .iter()
                    .map(|(w, _, y)| w * (y - mu_d) * (y - mu_d))
                    .sum::<f64>()
                    / w_total;
                let cov: f64 = taps
                    .iter()
                    .map(|(w, x, y)| w * (x - mu_r) * (y - mu_d))
                    .sum::<f64>()
                    / w_total;
                let l = (2.0 * mu_r * mu_d + params.c1) / (mu_r * mu_r + mu_d * mu_d + params.c1);
                let s = (cov + params.c3) / ((vr.max(0.0) * vd.max(0.0)).sqrt() + params.c3);
                let expected = l * s;
                assert!(
                    (map.value(i, j) - expected).abs() < 1e-12,
                    "({i},{j}): {} vs {}",
                    map.value(i, j),
                    expected
                );
            }
        }
    }

    #[test]
    fn band_average_all_ones_and_partition() {
        let band_map = default_band_map();
        let ones = SimilarityMap {
            bins: 640,
            frames: PATCH_FRAMES,
            values: vec![1.0; 640 * PATCH_FRAMES],
        };
        let averaged = band_average(&ones, &band_map);
        assert_eq!(averaged.len(), 32);
        for v in averaged {
            assert_eq!(v, 1.0);
        }

        // value only in band 0's bins
        let mut values = vec![0.0; 640 * PATCH_FRAMES];
        for bin in 0..640 {
            if band_map.band_of_bin()[bin] == 0 {
                for frame in 0..PATCH_FRAMES {
                    values[bin * PATCH_FRAMES + frame] = 0.625;
                }
            }
        }
        let map = SimilarityMap {
            bins: 640,
            frames: PATCH_FRAMES,
            values,
        };
        let averaged = band_average(&map, &band_map);
        assert_eq!(averaged[0], 0.625);
        for &v in &averaged[1..] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn band_average_matches_brute_force_double_loop() {
        let band_map = default_band_map();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let values: Vec<f64> = (0..640 * PATCH_FRAMES)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let map = SimilarityMap {
            bins: 640,
            frames: PATCH_FRAMES,
            values: values.clone(),
        };
        let fast = band_average(&map, &band_map);
        let mut sums = vec![0.0f64; 32];
        let mut counts = vec![0usize; 32];
        for bin in 0..640 {
            for frame in 0..PATCH_FRAMES {
                let band = band_map.band_of_bin()[bin];
                sums[band] += values[bin * PATCH_FRAMES + frame];
                counts[band] += 1;
            }
        }
        for band in 0..32 {
            assert_eq!(fast[band], sums[band] / counts[band] as f64, "band {band}");
        }
    }

    #[test]
    fn channel_identity_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let signal: Vec<f32> = (0..96_000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let pg = stft_phase(&signal, &StftConfig::default(), 48_000).unwrap();
        let score = channel_nsim(
            &pg,
            &pg,
            &default_band_map(),
            &NsimParams::default(),
            AlignmentPolicy::SameIndex,
        )
        .unwrap();
        assert_eq!(score.nsim, 1.0);
        assert!((score.nsim_pre_clamp - 1.0).abs() < 1e-12);
        assert_eq!(score.patch_scores.len(), 4);
    }

    #[test]
    fn tiny_perturbation_keeps_similarity_high() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let clean: Vec<f32> = (0..96_000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let noisy: Vec<f32> = clean
            .iter()
            .map(|&x| x + rng.random_range(-1e-6..1e-6))
            .collect();
        let cfg = StftConfig::default();
        let a = stft_phase(&clean, &cfg, 48_000).unwrap();
        let b = stft_phase(&noisy, &cfg, 48_000).unwrap();
        let score = channel_nsim(
            &a,
            &b,
            &default_band_map(),
            &NsimParams::default(),
            AlignmentPolicy::SameIndex,
        )
        .unwrap();
        assert!(score.nsim >= 0.99, "nsim {}", score.nsim);
    }

    #[test]
    fn channel_score_is_symmetric_in_its_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x: Vec<f32> = (0..48_000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let y: Vec<f32> = (0..48_000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let cfg = StftConfig::default();
        let a = stft_phase(&x, &cfg, 48_000).unwrap();
        let b = stft_phase(&y, &cfg, 48_000).unwrap();
        let band_map = default_band_map();
        let params = NsimParams::default();
        let ab = channel_nsim(&a, &b, &band_map, &params, AlignmentPolicy::SameIndex).unwrap();
        let ba = channel_nsim(&b, &a, &band_map, &params, AlignmentPolicy::SameIndex).unwrap();
        assert!((ab.nsim - ba.nsim).abs() <= 1e-12);
        assert!((ab.nsim_pre_clamp - ba.nsim_pre_clamp).abs() <= 1e-12);
    }

    #[test]
    fn aggregation_consistency_is_structural() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: Vec<f32> = (0..96_000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let y: Vec<f32> = x.iter().map(|&v| v * 0.5 + 0.01).collect();
        let cfg = StftConfig::default();
        let a = stft_phase(&x, &cfg, 48_000).unwrap();
        let b = stft_phase(&y, &cfg, 48_000).unwrap();
        let score = channel_nsim(
            &a,
            &b,
            &default_band_map(),
            &NsimParams::default(),
            AlignmentPolicy::SameIndex,
        )
        .unwrap();
        let mean = score.patch_scores.iter().sum::<f64>() / score.patch_scores.len() as f64;
        assert_eq!(score.nsim_pre_clamp, mean);
        assert_eq!(score.nsim, mean.clamp(0.0, 1.0));
        for (patch, bands) in score.patch_scores.iter().zip(&score.band_scores) {
            assert_eq!(*patch, bands.iter().sum::<f64>() / bands.len() as f64);
            for &band in bands {
                assert!((-1.0..=1.0).contains(&band), "band score {band}");
            }
        }
    }

    #[test]
    fn search_alignment_recovers_a_frame_shift() {
        // test phaseogram delayed by one frame relative to the reference;
        // same-index pairing scores below the searched pairing
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let long: Vec<f32> = (0..96_768).map(|_| rng.random_range(-0.5..0.5)).collect();
        let cfg = StftConfig::default();
        let reference = stft_phase(&long[768..], &cfg, 48_000).unwrap();
        let shifted = stft_phase(&long[..long.len() - 768], &cfg, 48_000).unwrap();
        let band_map = default_band_map();
        let params = NsimParams::default();
        let fixed = channel_nsim(
            &reference,
            &shifted,
            &band_map,
            &params,
            AlignmentPolicy::SameIndex,
        )
        .unwrap();
        let searched = channel_nsim(
            &reference,
            &shifted,
            &band_map,
            &params,
            AlignmentPolicy::Search {
                max_offset_frames: 2,
            },
        )
        .unwrap();
        assert!(searched.nsim > fixed.nsim);
        assert!(searched.nsim > 0.999, "searched {}", searched.nsim);
    }
}
