use dfvqm_core::alignment::{identify_dropped_frames, GaConfig};
use dfvqm_core::correction::ConcealmentStrategy;
use dfvqm_core::distortion::synth::{synthesize, SynthSpec};
use dfvqm_core::distortion::{
    drop_frames, embed_bitplane, plan_drops_with, DropCase, DropPlan, SimilarityProbe, SpatialSpec,
};
use dfvqm_core::index::{dfvqmi, Scorer, TdVariant};
use dfvqm_core::metrics::MetricConfig;
use dfvqm_core::video_io::{Frame, FrameRate, VideoSequence};
use dfvqm_core::Result;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise_video(m: usize, seed: u64) -> VideoSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = (0..m)
        .map(|_| Frame::from_luma(16, 16, (0..256).map(|_| rng.gen()).collect()).unwrap())
        .collect();
    VideoSequence::new(frames, FrameRate::default(), "noise").unwrap()
}

/// Chunks of length 1..=4 separated by at least one kept frame, never
/// touching the first or last frame.
fn chunks(m: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut s = rng.gen_range(1..4);
    loop {
        let len = rng.gen_range(1..=4);
        if s + len >= m - 1 {
            return out;
        }
        out.push((s, len));
        s += len + rng.gen_range(1..8);
    }
}

/// Every frame looks like every other one.
struct Uniform(usize);

impl SimilarityProbe for Uniform {
    fn len(&self) -> usize {
        self.0
    }

    fn similarity(&self, _: usize, _: usize) -> Result<f64> {
        Ok(1.0)
    }
}

fn case() -> impl Strategy<Value = DropCase> {
    prop::sample::select(DropCase::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dropping_then_aligning_recovers_the_plan(m in 10usize..60, seed: u64) {
        let reference = noise_video(m, seed);
        let plan = DropPlan::manual(m, chunks(m, seed)).unwrap();
        let distorted = drop_frames(&reference, &plan).unwrap();
        let found = identify_dropped_frames(&reference, &distorted, &MetricConfig::default(), &GaConfig::default()).unwrap();
        prop_assert_eq!(found.missing().to_vec(), plan.dropped_indices());
    }

    #[test]
    fn generated_plans_respect_their_bands(m in 100usize..400, case in case(), seed: u64) {
        let plan = plan_drops_with(&Uniform(m), case, None, seed, 0.9).unwrap();
        plan.validate().unwrap();
        prop_assert_eq!(plan.m, m);
        if plan.warnings.is_empty() {
            prop_assert!(plan.within_bands(case), "{:?} outside {case}", plan.chunks);
        }
    }

    #[test]
    fn index_is_sd_minus_td(m in 6usize..24, seed: u64, literal: bool) {
        let reference = noise_video(m, seed);
        let plan = DropPlan::manual(m, chunks(m, seed ^ 1)).unwrap();
        let distorted = drop_frames(&reference, &plan).unwrap();
        let variant = if literal { TdVariant::Literal } else { TdVariant::FullChunk };
        let r = dfvqmi(&reference, &distorted, &MetricConfig::default(), &GaConfig::default(), ConcealmentStrategy::RepeatLast, variant).unwrap();
        prop_assert!((r.dfvqmi - (r.sd - r.td)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.td));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn low_bitplane_noise_hurts_less(seed: u64) {
        let clip = synthesize(&SynthSpec::standard_with_len(48, 32, 12, seed)).unwrap();
        let scorer = Scorer::new(&clip, &MetricConfig::default()).unwrap();
        let mean_ssim = |bit: u8| {
            let noisy = embed_bitplane(&clip, &SpatialSpec { bitplane: Some(bit), seed }).unwrap();
            (0..clip.len()).map(|t| scorer.ssim_to(t, noisy.frame(t)).unwrap()).sum::<f64>() / clip.len() as f64
        };
        prop_assert!(mean_ssim(0) > mean_ssim(3));
    }
}
