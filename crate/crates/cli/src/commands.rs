use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dfvqm_core::alignment::identify_dropped_frames;
use dfvqm_core::correction::construct_corrected;
use dfvqm_core::distortion::synth::{synthesize, SynthSpec};
use dfvqm_core::distortion::{
    drop_frames, embed_bitplane, plan_drops_with, DropCase, DropPlan, FrameSimilarity, Possibility, SpatialSpec,
};
use dfvqm_core::harness::{
    correlate, open_video, read_grid_scores, read_label_table, run_experiment_grid, write_csv, ExperimentConfig,
    RawGeometry, CSV_HEADER,
};
use dfvqm_core::index::Scorer;
use dfvqm_core::metrics::{psnr, ssim, MetricConfig};
use dfvqm_core::video_io::{write_y4m, VideoSequence};
use serde::Serialize;

use crate::args::{AnalyzeArgs, Command, CorrelateArgs, DistortArgs, ExperimentArgs, PairArgs, SynthArgs};

pub enum Failure {
    Usage(String),
    Data(dfvqm_core::Error),
}

impl From<dfvqm_core::Error> for Failure {
    fn from(e: dfvqm_core::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Metrics(a) => metrics(a),
        Command::Align(a) => align(a),
        Command::Analyze(a) => analyze(a),
        Command::Distort(a) => distort(a),
        Command::Experiment(a) => experiment(a),
        Command::Correlate(a) => correlate_tables(a),
        Command::Synth(a) => synth(a),
    }
}

fn load(path: &Path, raw: Option<RawGeometry>) -> Result<VideoSequence, Failure> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("y4m") => {}
        Some("yuv") if raw.is_some() => {}
        Some("yuv") => {
            return Err(Failure::Usage(format!(
                "{}: --width and --height are required",
                path.display()
            )))
        }
        _ => {
            return Err(Failure::Usage(format!(
                "{}: expected a .y4m or .yuv file",
                path.display()
            )))
        }
    }
    Ok(open_video(path, raw)?)
}

fn load_pair(a: &PairArgs) -> Result<(VideoSequence, VideoSequence), Failure> {
    let raw = a.raw.geometry();
    Ok((load(&a.reference, raw)?, load(&a.distorted, raw)?))
}

/// Replaces `path` only once the full contents exist.
fn write_atomically(path: &Path, bytes: &[u8]) -> Outcome {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => write_atomically(path, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn y4m_bytes(video: &VideoSequence) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_y4m(video, &mut buf)?;
    Ok(buf)
}

fn metrics(a: PairArgs) -> Outcome {
    let (reference, distorted) = load_pair(&a)?;
    let cfg = a.metric_config();
    cfg.validate()?;
    let mut table = String::from("frame,psnr,ssim\n");
    for i in 0..reference.len().min(distorted.len()) {
        let (r, d) = (reference.frame(i), distorted.frame(i));
        table.push_str(&format!("{i},{},{}\n", psnr(r, d, &cfg)?, ssim(r, d, &cfg)?));
    }
    emit(a.out.as_deref(), table.as_bytes())
}

fn align(a: AnalyzeArgs) -> Outcome {
    let (reference, distorted) = load_pair(&a.pair)?;
    let alignment = identify_dropped_frames(&reference, &distorted, &a.pair.metric_config(), &a.ga.config())?;
    emit(a.pair.out.as_deref(), &json(&alignment)?)
}

fn analyze(a: AnalyzeArgs) -> Outcome {
    let (reference, distorted) = load_pair(&a.pair)?;
    let cfg = a.pair.metric_config();
    let scorer = Scorer::new(&reference, &cfg)?;
    let alignment = identify_dropped_frames(&reference, &distorted, &cfg, &a.ga.config())?;
    let report = scorer.score_aligned(&distorted, &alignment, a.strategy.into(), a.td_variant.into())?;
    let report_bytes = json(&report)?;
    if let Some(path) = &a.emit_corrected {
        let corrected = construct_corrected(&distorted, &alignment, a.strategy.into())?;
        write_atomically(path, &y4m_bytes(&corrected.video)?)?;
    }
    emit(a.pair.out.as_deref(), &report_bytes)
}

fn distort(a: DistortArgs) -> Outcome {
    let case = a
        .case
        .as_deref()
        .map(str::parse::<DropCase>)
        .transpose()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let reference = load(&a.reference, a.raw.geometry())?;
    let plan = match (&a.plan, case) {
        (Some(path), _) => serde_json::from_str::<DropPlan>(&fs::read_to_string(path)?)?,
        (None, Some(case)) => {
            let possibility = a.possibility.map(Possibility::try_from).transpose()?;
            let probe = FrameSimilarity::new(&reference, &MetricConfig::default())?;
            plan_drops_with(&probe, case, possibility, a.seed, a.sim_threshold)?
        }
        (None, None) => return Err(Failure::Usage("either --plan or --case is required".into())),
    };
    let mut distorted = drop_frames(&reference, &plan)?;
    if let Some(bit) = &a.bitplane {
        let spec = SpatialSpec {
            bitplane: Some(
                bit.parse()
                    .map_err(|_| Failure::Usage(format!("bad bitplane `{bit}`")))?,
            ),
            seed: a.seed,
        };
        distorted = embed_bitplane(&distorted, &spec)?;
    }
    let video_bytes = y4m_bytes(&distorted)?;
    let plan_bytes = json(&plan)?;
    let plan_path = a.plan_out.clone().unwrap_or_else(|| a.out.with_extension("plan.json"));
    write_atomically(&a.out, &video_bytes)?;
    write_atomically(&plan_path, &plan_bytes)
}

fn experiment(a: ExperimentArgs) -> Outcome {
    let mut cfg = ExperimentConfig::from_json(&fs::read_to_string(&a.config)?)?;
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    let rows = run_experiment_grid(&cfg)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    emit(a.out.as_deref().or(cfg.output.as_deref()), &csv)
}

fn correlate_tables(a: CorrelateArgs) -> Outcome {
    let scores_text = fs::read_to_string(&a.scores)?;
    let is_grid = scores_text.lines().next() == Some(CSV_HEADER.join(",").as_str());
    let scores = if is_grid {
        read_grid_scores(scores_text.as_bytes(), &a.metric)?
    } else {
        read_label_table(scores_text.as_bytes())?
    };
    let mos = read_label_table(fs::File::open(&a.mos)?)?;
    emit(a.out.as_deref(), &json(&correlate(&scores, &mos)?)?)
}

fn synth(a: SynthArgs) -> Outcome {
    let spec = SynthSpec::standard_with_len(a.width, a.height, a.frames, a.seed);
    let video = synthesize(&spec)?;
    write_atomically(&a.out, &y4m_bytes(&video)?)
}
