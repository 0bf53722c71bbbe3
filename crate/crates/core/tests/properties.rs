//! Property tests for the crate-wide invariants.

use binaqual::harness::format_score;
use binaqual::nsim::PATCH_FRAMES;
use binaqual::synth::degrade::{degrade, DegradeOp};
use binaqual::synth::pan::{pan_binaural, PanSpec};
use binaqual::{
    binaqual, box_cox, channel_nsim, default_band_map, pearson, read_wav, spearman, stft_phase,
    validate_pair, write_wav, AlignmentPolicy, AudioBuffer, BitDepth, MetricConfig, NsimParams,
    StftConfig,
};
use proptest::prelude::*;

fn sample_vec(len: usize) -> impl Strategy<Value = Vec<f32>> {
    proptest::collection::vec(-1.0f32..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wav_float_round_trip_is_bit_exact(samples in sample_vec(512)) {
        let buf = AudioBuffer::stereo(samples.clone(), samples.iter().map(|s| -s).collect(), 48_000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.wav");
        write_wav(&buf, &path, BitDepth::Float32).unwrap();
        let back = read_wav(&path).unwrap();
        prop_assert_eq!(buf.channel(0), back.channel(0));
        prop_assert_eq!(buf.channel(1), back.channel(1));
    }

    #[test]
    fn wav_integer_round_trip_stays_within_one_lsb(samples in sample_vec(256)) {
        let buf = AudioBuffer::mono(samples, 48_000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for (depth, lsb) in [(BitDepth::Int16, 1.0 / 32_768.0f64), (BitDepth::Int24, 1.0 / 8_388_608.0)] {
            let path = dir.path().join("q.wav");
            write_wav(&buf, &path, depth).unwrap();
            let back = read_wav(&path).unwrap();
            prop_assert!(back.channel(0).iter().all(|v| v.abs() <= 1.0));
            for (a, b) in buf.channel(0).iter().zip(back.channel(0)) {
                prop_assert!((f64::from(*a) - f64::from(*b)).abs() <= lsb);
            }
        }
    }

    #[test]
    fn validate_pair_is_idempotent(a in sample_vec(700), b in sample_vec(650)) {
        let reference = AudioBuffer::stereo(a.clone(), a, 48_000).unwrap();
        let test = AudioBuffer::stereo(b.clone(), b, 48_000).unwrap();
        let once = validate_pair(&reference, &test).unwrap();
        let twice = validate_pair(&once.reference, &once.test).unwrap();
        prop_assert!(twice.warnings.is_empty());
        prop_assert_eq!(once.reference, twice.reference);
        prop_assert_eq!(once.test, twice.test);
    }

    #[test]
    fn panner_mirror_symmetry_is_bit_exact(samples in sample_vec(2_000), azimuth in -179.0f64..179.0) {
        let mono = AudioBuffer::mono(samples, 48_000).unwrap();
        let plus = pan_binaural(&mono, &PanSpec::azimuth(azimuth)).unwrap();
        let minus = pan_binaural(&mono, &PanSpec::azimuth(-azimuth)).unwrap();
        prop_assert_eq!(plus.channel(0), minus.channel(1));
        prop_assert_eq!(plus.channel(1), minus.channel(0));
    }

    #[test]
    fn quantize_is_idempotent_at_any_depth(samples in sample_vec(200), bits in 2u32..=24) {
        let buf = AudioBuffer::mono(samples, 48_000).unwrap();
        let once = degrade(&buf, &DegradeOp::Quantize { bits }).unwrap();
        let twice = degrade(&once, &DegradeOp::Quantize { bits }).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn box_cox_preserves_sorted_order(mut values in proptest::collection::vec(1e-9f64..100.0, 2..64), lambda in -3.0f64..3.0) {
        values.sort_by(f64::total_cmp);
        let transformed = box_cox(&values, lambda).unwrap();
        for pair in transformed.windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
    }

    #[test]
    fn correlation_invariances(
        xy in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 8..64),
        scale in 0.01f64..50.0,
        offset in -100.0f64..100.0,
    ) {
        let x: Vec<f64> = xy.iter().map(|(a, _)| *a).collect();
        let y: Vec<f64> = xy.iter().map(|(_, b)| *b).collect();
        prop_assume!(pearson(&x, &y).is_ok());
        let x_affine: Vec<f64> = x.iter().map(|v| scale * v + offset).collect();
        prop_assert!((pearson(&x_affine, &y).unwrap() - pearson(&x, &y).unwrap()).abs() < 1e-12);
        let x_monotone: Vec<f64> = x.iter().map(|v| v.exp().ln_1p()).collect();
        prop_assert!((spearman(&x_monotone, &y).unwrap() - spearman(&x, &y).unwrap()).abs() < 1e-12);
    }
}

proptest! {
    // heavier cases: full channel scoring on one-patch signals
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn channel_scores_stay_in_range_and_symmetric(a in sample_vec(24_000), b in sample_vec(24_000)) {
        let cfg = StftConfig::default();
        let pa = stft_phase(&a, &cfg, 48_000).unwrap();
        let pb = stft_phase(&b, &cfg, 48_000).unwrap();
        let band_map = default_band_map();
        let params = NsimParams::default();
        let ab = channel_nsim(&pa, &pb, &band_map, &params, AlignmentPolicy::SameIndex).unwrap();
        let ba = channel_nsim(&pb, &pa, &band_map, &params, AlignmentPolicy::SameIndex).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab.nsim));
        prop_assert!((ab.nsim - ba.nsim).abs() <= 1e-12);
        for bands in &ab.band_scores {
            for &score in bands {
                prop_assert!((-1.0..=1.0).contains(&score), "band score {}", score);
            }
        }
    }

    #[test]
    fn ls_is_the_exact_channel_product(a in sample_vec(24_000), b in sample_vec(24_000)) {
        let reference = AudioBuffer::stereo(a.clone(), b.clone(), 48_000).unwrap();
        let test = AudioBuffer::stereo(b, a, 48_000).unwrap();
        let result = binaqual(&reference, &test, &MetricConfig::default()).unwrap();
        prop_assert_eq!(result.ls, result.left.nsim * result.right.nsim);
        prop_assert!((0.0..=1.0).contains(&result.ls));
    }
}

#[test]
fn patch_frames_matches_the_default_front_end() {
    // 30 frames of 768 samples at 48 kHz is 480 ms
    assert_eq!(PATCH_FRAMES, 30);
    assert_eq!(format_score(PATCH_FRAMES as f64 * 768.0 / 48_000.0), "0.480000000");
}
