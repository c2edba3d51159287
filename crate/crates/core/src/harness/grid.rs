//! The video × scenario × case × possibility grid.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{open_video, with_thread_cap, ExperimentConfig, Scenario};
use crate::distortion::{
    drop_frames, embed_bitplane, plan_drops_with, DropCase, DropPlan, FrameSimilarity, Possibility, SpatialSpec,
};
use crate::error::{Error, Result};
use crate::index::Scorer;
use crate::video_io::VideoSequence;

pub const CSV_HEADER: [&str; 14] = [
    "video",
    "scenario",
    "case",
    "possibility",
    "cfd_pct",
    "tdf_pct",
    "sd",
    "td",
    "dfvqmi",
    "mean_psnr",
    "mean_ssim",
    "seed",
    "status",
    "reason",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    /// The content has no site for the requested possibility.
    Skipped,
    Error,
}

/// One attempted grid cell. Numeric fields are empty unless the status is ok,
/// except the plan measurements, which are present whenever a plan exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub video: String,
    pub scenario: Scenario,
    pub case: DropCase,
    pub possibility: Possibility,
    pub cfd_pct: Option<f64>,
    pub tdf_pct: Option<f64>,
    pub sd: Option<f64>,
    pub td: Option<f64>,
    pub dfvqmi: Option<f64>,
    pub mean_psnr: Option<f64>,
    pub mean_ssim: Option<f64>,
    pub seed: u64,
    pub status: CellStatus,
    pub reason: String,
}

/// Loads every reference in `config` and runs the grid, honoring
/// `VQ_THREADS`.
pub fn run_experiment_grid(config: &ExperimentConfig) -> Result<Vec<ScoreRow>> {
    config.validate()?;
    let videos = config
        .reference_videos
        .iter()
        .map(|p| {
            let video = open_video(p, config.raw_geometry)?;
            Ok((label_for(p), video))
        })
        .collect::<Result<Vec<_>>>()?;
    with_thread_cap(|| run_grid_on(&videos, config))?
}

fn label_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs the grid on already loaded references; `config.reference_videos` is
/// ignored. Rows come out ordered by video, scenario, case, possibility and
/// repeat, whatever order cells finish in.
pub fn run_grid_on(videos: &[(String, VideoSequence)], config: &ExperimentConfig) -> Result<Vec<ScoreRow>> {
    config.validate_axes()?;
    let mut rows = Vec::new();
    for (vi, (name, video)) in videos.iter().enumerate() {
        let keys: Vec<(DropCase, Possibility, usize)> = config
            .cases
            .iter()
            .flat_map(|&c| {
                config
                    .possibilities
                    .iter()
                    .flat_map(move |&p| (0..config.repeats).map(move |r| (c, p, r)))
            })
            .collect();
        let seeds: Vec<u64> = keys
            .iter()
            .map(|&(c, p, r)| cell_seed(config.seed, &[vi as u64, c as u64, p.number() as u64, r as u64]))
            .collect();

        let probe = match Scorer::new(video, &config.metric_config) {
            Ok(scorer) => FrameSimilarity::from_scorer(scorer),
            Err(e) => {
                for &scenario in &config.scenarios {
                    for (&(c, p, _), &seed) in keys.iter().zip(&seeds) {
                        rows.push(failed_row(name, scenario, c, p, seed, None, CellStatus::Error, &e));
                    }
                }
                continue;
            }
        };

        let plans: Vec<Result<DropPlan>> = keys
            .par_iter()
            .zip(&seeds)
            .map(|(&(c, p, _), &seed)| plan_drops_with(&probe, c, Some(p), seed, config.sim_threshold))
            .collect();

        let cells: Vec<(Scenario, usize)> = config
            .scenarios
            .iter()
            .flat_map(|&s| (0..keys.len()).map(move |k| (s, k)))
            .collect();
        let scored: Vec<ScoreRow> = cells
            .par_iter()
            .map(|&(scenario, k)| {
                let (c, p, _) = keys[k];
                score_cell(probe.scorer(), name, scenario, c, p, seeds[k], &plans[k], config)
            })
            .collect();
        rows.extend(scored);
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn score_cell(
    scorer: &Scorer<'_>,
    name: &str,
    scenario: Scenario,
    case: DropCase,
    possibility: Possibility,
    seed: u64,
    plan: &Result<DropPlan>,
    config: &ExperimentConfig,
) -> ScoreRow {
    let plan = match plan {
        Ok(plan) => plan,
        Err(e @ Error::NoQualifyingSite(_)) => {
            return failed_row(name, scenario, case, possibility, seed, None, CellStatus::Skipped, e)
        }
        Err(e) => return failed_row(name, scenario, case, possibility, seed, None, CellStatus::Error, e),
    };
    let outcome = (|| {
        let mut distorted = drop_frames(scorer.reference(), plan)?;
        if let Some(bit) = scenario.bitplane() {
            let spec = SpatialSpec {
                bitplane: Some(bit),
                seed: cell_seed(seed, &[0x5d]),
            };
            distorted = embed_bitplane(&distorted, &spec)?;
        }
        let report = scorer.score(&distorted, &config.ga_config, config.strategy, config.td_variant)?;
        let values = [
            report.sd,
            report.td,
            report.dfvqmi,
            report.naive_mean_psnr,
            report.naive_mean_ssim,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Undefined(format!("non-finite score {values:?}")));
        }
        Ok(values)
    })();
    match outcome {
        Ok([sd, td, dfvqmi, mean_psnr, mean_ssim]) => ScoreRow {
            video: name.to_string(),
            scenario,
            case,
            possibility,
            cfd_pct: Some(plan.cfd_pct()),
            tdf_pct: Some(plan.tdf_pct()),
            sd: Some(sd),
            td: Some(td),
            dfvqmi: Some(dfvqmi),
            mean_psnr: Some(mean_psnr),
            mean_ssim: Some(mean_ssim),
            seed,
            status: CellStatus::Ok,
            reason: String::new(),
        },
        Err(e) => failed_row(
            name,
            scenario,
            case,
            possibility,
            seed,
            Some(plan),
            CellStatus::Error,
            &e,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn failed_row(
    name: &str,
    scenario: Scenario,
    case: DropCase,
    possibility: Possibility,
    seed: u64,
    plan: Option<&DropPlan>,
    status: CellStatus,
    err: &Error,
) -> ScoreRow {
    ScoreRow {
        video: name.to_string(),
        scenario,
        case,
        possibility,
        cfd_pct: plan.map(DropPlan::cfd_pct),
        tdf_pct: plan.map(DropPlan::tdf_pct),
        sd: None,
        td: None,
        dfvqmi: None,
        mean_psnr: None,
        mean_ssim: None,
        seed,
        status,
        reason: err.to_string(),
    }
}

/// Mixes `parts` into `base` with the splitmix64 finalizer.
fn cell_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(base, |acc, &p| {
        let mut z = acc ^ p.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}

/// Writes the fixed header followed by one line per row.
pub fn write_csv<W: Write>(rows: &[ScoreRow], writer: W) -> Result<()> {
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    csv.write_record(CSV_HEADER)?;
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads `column` from the ok rows of a grid CSV, labelled
/// `video/scenario/case/possibility`.
pub fn read_grid_scores<R: Read>(reader: R, column: &str) -> Result<Vec<(String, f64)>> {
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidConfig("not an experiment grid CSV".into()));
    }
    let col = headers
        .iter()
        .position(|h| h == column)
        .filter(|&i| (4..=10).contains(&i))
        .ok_or_else(|| Error::InvalidConfig(format!("`{column}` is not a numeric grid column")))?;
    let mut out = Vec::new();
    for record in csv.records() {
        let record = record?;
        if &record[12] != "ok" {
            continue;
        }
        let value = record[col]
            .parse::<f64>()
            .map_err(|_| Error::InvalidConfig(format!("bad `{column}` value `{}`", &record[col])))?;
        out.push((
            format!("{}/{}/{}/{}", &record[0], &record[1], &record[2], &record[3]),
            value,
        ));
    }
    Ok(out)
}
