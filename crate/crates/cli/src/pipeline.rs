use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use editstyle::media_io::{read_clip, write_png, write_y4m_file, Frame, FrameDirMeta, FrameSequence, META_FILE};
use editstyle::motion::{
    load_sidecar, render_mosaic, slice_annotations, track_camera, BoundingBox, ForegroundAnnotation, HomographyTrack,
    MAX_MOSAIC_AREA,
};
use editstyle::retrieval::{select_footage, RepoClip, RepoIndex};
use editstyle::shot_detect::{check_tiling, detect_shots, group_scenes, shots_to_json, Shot};
use editstyle::style::{
    assemble_style, brightness_curve, label_range, ContentCategory, ShotStyle, SpeedMap,
};
use editstyle::transfer::{render_shot, solve_framing, source_frame_index, FramingSolution};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::plan::{EditPlan, PlanFlags, PlanRecord, StyleSummary, Timeline, TimelineShot};
use crate::{CliError, ProjectConfig};

/// File names inside `output_dir`.
pub mod artifacts {
    pub const SHOTS: &str = "shots.json";
    pub const STYLES: &str = "styles.json";
    pub const MOSAICS: &str = "mosaics";
    pub const INDEX: &str = "index.json";
    pub const PLAN: &str = "plan.json";
    pub const OUTPUT: &str = "output.y4m";
    pub const SIDE_BY_SIDE: &str = "side_by_side.y4m";
    pub const TIMELINE: &str = "timeline.json";
    pub const GALLERY: &str = "gallery";
    pub const LOCK: &str = ".editstyle.lock";

    pub fn mosaic_name(shot: usize) -> String {
        format!("shot_{shot:03}.png")
    }
}

/// Advisory lock on `output_dir`, released on drop.
struct OutputLock(PathBuf);

impl OutputLock {
    fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("output_dir {}: {e}", dir.display())))?;
        let path = dir.join(artifacts::LOCK);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::pipeline(
                "lock",
                format!("{} is held by another run (delete it if stale)", path.display()),
            )),
            Err(e) => Err(CliError::pipeline("lock", format!("{}: {e}", path.display()))),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn write_json<T: Serialize + ?Sized>(stage: &'static str, path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::pipeline(stage, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::pipeline(stage, format!("{}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(stage: &'static str, path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::pipeline(stage, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::pipeline(stage, format!("{}: {e}", path.display())))
}

fn load_clip(stage: &'static str, path: &Path) -> Result<FrameSequence, CliError> {
    let seq = read_clip(path).map_err(|e| CliError::pipeline(stage, format!("clip {}: {e}", path.display())))?;
    if seq.is_empty() {
        return Err(CliError::pipeline(stage, format!("clip {} has no frames", path.display())));
    }
    Ok(seq)
}

/// Sidecar `<annotations_dir>/<source_id>.json`, if present.
fn annotations_for(
    cfg: &ProjectConfig,
    stage: &'static str,
    seq: &FrameSequence,
) -> Result<Option<Vec<ForegroundAnnotation>>, CliError> {
    let Some(dir) = &cfg.annotations_dir else {
        return Ok(None);
    };
    let path = dir.join(format!("{}.json", seq.source_id()));
    if !path.is_file() {
        return Ok(None);
    }
    let ann = load_sidecar(&path).map_err(|e| CliError::pipeline(stage, format!("clip `{}`: {e}", seq.source_id())))?;
    let (w, h) = seq.dimensions().unwrap_or((0, 0));
    for a in &ann {
        a.validate(w, h)
            .map_err(|e| CliError::pipeline(stage, format!("clip `{}`: {e}", seq.source_id())))?;
    }
    Ok(Some(ann))
}

fn source_seq(cfg: &ProjectConfig, stage: &'static str) -> Result<FrameSequence, CliError> {
    load_clip(stage, &cfg.source)
}

fn analyze(cfg: &ProjectConfig) -> Result<(Vec<Shot>, Vec<ShotStyle<f64>>), CliError> {
    const STAGE: &str = "analyze";
    let speeds = SpeedMap::load(&cfg.speed_map).map_err(|e| CliError::Config(e.to_string()))?;
    let source = source_seq(cfg, STAGE)?;
    let id = source.source_id().to_string();
    let shots = detect_shots(&source, &cfg.shot_detect).map_err(|e| CliError::pipeline(STAGE, format!("source `{id}`: {e}")))?;
    let shots = group_scenes(&source, &shots, &cfg.shot_detect);
    let ann = annotations_for(cfg, STAGE, &source)?.unwrap_or_default();
    let dims = source.dimensions().expect("nonempty");
    let styles = shots
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let frames = &source.frames()[s.start..s.end];
            let fg = slice_annotations(&ann, s.start, s.end);
            let track = track_camera(frames, &fg, &cfg.tracker, s.start)
                .map_err(|e| CliError::pipeline(STAGE, format!("shot {i}: {e}")))?;
            let label = label_range(&ann, s.start, s.end, &cfg.labels);
            assemble_style(i, s, track, label, brightness_curve(frames), &speeds, dims)
                .map_err(|e| CliError::pipeline(STAGE, e))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let out = &cfg.output_dir;
    fs::write(out.join(artifacts::SHOTS), shots_to_json(&shots) + "\n")
        .map_err(|e| CliError::pipeline(STAGE, format!("{}: {e}", artifacts::SHOTS)))?;
    write_json(STAGE, &out.join(artifacts::STYLES), &styles)?;
    write_mosaics(STAGE, &source, &styles, &out.join(artifacts::MOSAICS))?;
    Ok((shots, styles))
}

fn write_mosaics(stage: &'static str, source: &FrameSequence, styles: &[ShotStyle<f64>], dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::pipeline(stage, format!("{}: {e}", dir.display())))?;
    styles.par_iter().try_for_each(|s| {
        let frames = &source.frames()[s.shot.start..s.shot.end];
        let mosaic = render_mosaic(frames, &s.track, MAX_MOSAIC_AREA)
            .map_err(|e| CliError::pipeline(stage, format!("shot {} mosaic: {e}", s.shot_index)))?;
        write_png(&mosaic, &dir.join(artifacts::mosaic_name(s.shot_index)))
            .map_err(|e| CliError::pipeline(stage, format!("shot {} mosaic: {e}", s.shot_index)))
    })
}

/// Detects shots, tracks and labels each one, and writes shots.json,
/// styles.json and one mosaic per shot.
pub fn cmd_analyze(cfg: &ProjectConfig) -> Result<(Vec<Shot>, Vec<ShotStyle<f64>>), CliError> {
    let _lock = OutputLock::acquire(&cfg.output_dir)?;
    analyze(cfg)
}

/// Clip paths in `repo_dir`: `.y4m` files and PNG frame directories, by name.
fn repo_entries(repo_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = fs::read_dir(repo_dir).map_err(|e| CliError::pipeline("index", format!("{}: {e}", repo_dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            (p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("y4m"))) || p.join(META_FILE).is_file()
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// `source_id` of a repository entry without decoding its frames.
fn entry_id(path: &Path) -> Option<String> {
    if path.is_dir() {
        let text = fs::read_to_string(path.join(META_FILE)).ok()?;
        serde_json::from_str::<FrameDirMeta>(&text).ok().map(|m| m.source_id)
    } else {
        path.file_stem().map(|s| s.to_string_lossy().into_owned())
    }
}

fn index(cfg: &ProjectConfig) -> Result<RepoIndex, CliError> {
    const STAGE: &str = "index";
    let paths = repo_entries(&cfg.repo_dir)?;
    if paths.is_empty() {
        return Err(CliError::pipeline(STAGE, format!("repo_dir {} contains no clips", cfg.repo_dir.display())));
    }
    let clips = paths
        .par_iter()
        .map(|p| {
            let seq = load_clip(STAGE, p)?;
            let ann = annotations_for(cfg, STAGE, &seq)?;
            Ok(RepoClip::from_clip(&seq, ann.as_deref(), &cfg.labels))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let index = RepoIndex::new(clips).map_err(|e| CliError::pipeline(STAGE, e))?;
    write_json(STAGE, &cfg.output_dir.join(artifacts::INDEX), &index)?;
    Ok(index)
}

/// Indexes every clip in `repo_dir` into index.json.
pub fn cmd_index(cfg: &ProjectConfig) -> Result<RepoIndex, CliError> {
    let _lock = OutputLock::acquire(&cfg.output_dir)?;
    index(cfg)
}

/// A target clip trimmed to the raw frames one shot samples, with its own
/// camera track.
struct PreparedTarget {
    clip: FrameSequence,
    track: HomographyTrack<f64>,
    content: Option<BoundingBox>,
}

struct Repo<'a> {
    cfg: &'a ProjectConfig,
    paths: BTreeMap<String, PathBuf>,
    loaded: BTreeMap<String, (FrameSequence, Vec<ForegroundAnnotation>)>,
}

impl<'a> Repo<'a> {
    fn open(cfg: &'a ProjectConfig, stage: &'static str) -> Result<Self, CliError> {
        let paths = repo_entries(&cfg.repo_dir)
            .map_err(|e| CliError::pipeline(stage, e))?
            .into_iter()
            .filter_map(|p| entry_id(&p).map(|id| (id, p)))
            .collect();
        Ok(Self {
            cfg,
            paths,
            loaded: BTreeMap::new(),
        })
    }

    fn prepare(&mut self, stage: &'static str, id: &str, style: &ShotStyle<f64>) -> Result<PreparedTarget, CliError> {
        if !self.loaded.contains_key(id) {
            let path = self
                .paths
                .get(id)
                .ok_or_else(|| CliError::pipeline(stage, format!("shot {}: clip `{id}` not found in repo_dir", style.shot_index)))?;
            let seq = load_clip(stage, path)?;
            let ann = annotations_for(self.cfg, stage, &seq)?.unwrap_or_default();
            self.loaded.insert(id.to_string(), (seq, ann));
        }
        let (seq, ann) = &self.loaded[id];
        let used = (source_frame_index(style.speed, style.len().saturating_sub(1), usize::MAX) + 1).min(seq.len());
        let clip = seq.slice(0, used);
        let fg = slice_annotations(ann, 0, used);
        let track = track_camera(clip.frames(), &fg, &self.cfg.tracker, 0)
            .map_err(|e| CliError::pipeline(stage, format!("shot {}: target `{id}`: {e}", style.shot_index)))?;
        let salient = &self.cfg.labels.salient_labels;
        let content = fg
            .iter()
            .filter(|a| a.frame == 0)
            .flat_map(|a| a.boxes.iter())
            .filter(|b| salient.contains(&b.label))
            .max_by(|a, b| a.area().total_cmp(&b.area()))
            .cloned();
        Ok(PreparedTarget { clip, track, content })
    }
}

fn load_styles(cfg: &ProjectConfig, stage: &'static str) -> Result<Vec<ShotStyle<f64>>, CliError> {
    read_json(stage, &cfg.output_dir.join(artifacts::STYLES))
}

fn render_target(
    stage: &'static str,
    style: &ShotStyle<f64>,
    target: &PreparedTarget,
    framing: &FramingSolution<f64>,
) -> Result<Vec<Frame>, CliError> {
    render_shot(style, &target.clip, &target.track, framing)
        .map(|r| r.frames)
        .map_err(|e| CliError::pipeline(stage, format!("shot {}: {e}", style.shot_index)))
}

fn write_sequence(stage: &'static str, frames: Vec<Frame>, like: &EditPlan, id: &str, path: &Path) -> Result<(), CliError> {
    let seq = FrameSequence::from_frames(frames, like.frame_rate, id).map_err(|e| CliError::pipeline(stage, e))?;
    write_y4m_file(&seq, path).map_err(|e| CliError::pipeline(stage, format!("{}: {e}", path.display())))
}

/// Selects footage for every analyzed shot, renders output.y4m and writes
/// plan.json. Missing analysis or index artifacts are rebuilt first.
pub fn cmd_transfer(cfg: &ProjectConfig) -> Result<EditPlan, CliError> {
    const STAGE: &str = "transfer";
    let _lock = OutputLock::acquire(&cfg.output_dir)?;
    let out = &cfg.output_dir;
    let styles = if out.join(artifacts::STYLES).is_file() {
        load_styles(cfg, STAGE)?
    } else {
        analyze(cfg)?.1
    };
    let mut repo_index = if out.join(artifacts::INDEX).is_file() {
        let text = fs::read_to_string(out.join(artifacts::INDEX)).map_err(|e| CliError::pipeline(STAGE, e))?;
        RepoIndex::from_json(&text).map_err(|e| CliError::pipeline(STAGE, e))?
    } else {
        index(cfg)?
    };
    repo_index.reset_usage();
    let source = source_seq(cfg, STAGE)?;
    let (width, height) = source.dimensions().expect("nonempty");
    let shots: Vec<Shot> = styles.iter().map(|s| s.shot.clone()).collect();
    check_tiling(&shots, source.len()).map_err(|e| CliError::pipeline(STAGE, format!("styles do not match the source: {e}")))?;

    let mut repo = Repo::open(cfg, STAGE)?;
    let mut records = Vec::with_capacity(styles.len());
    let mut frames = Vec::with_capacity(source.len());
    for style in &styles {
        let sel = select_footage(style, &mut repo_index).map_err(|e| CliError::pipeline(STAGE, e))?;
        let chosen = repo_index.get(&sel.source_id).expect("selected clip is indexed");
        let category_waived = chosen.label.category != style.label.category;
        let target = repo.prepare(STAGE, &sel.source_id, style)?;
        let content = match style.label.category {
            ContentCategory::SingleFocus => target.content.as_ref(),
            _ => None,
        };
        let framing = solve_framing(style, target.clip.dimensions().expect("nonempty"), content, &cfg.framing)
            .map_err(|e| CliError::pipeline(STAGE, e))?;
        frames.extend(render_target(STAGE, style, &target, &framing)?);
        records.push(PlanRecord {
            shot_index: style.shot_index,
            shot: style.shot.clone(),
            style: StyleSummary::of(style),
            source_id: sel.source_id,
            offset: sel.offset,
            framing,
            flags: PlanFlags {
                track_failed: style.track.failed,
                fallback_steps: style.track.fallback_count(),
                category_waived,
                target_track_failed: target.track.failed,
            },
        });
    }
    let plan = EditPlan {
        config_fingerprint: cfg.fingerprint(),
        source_id: source.source_id().to_string(),
        frame_rate: source.frame_rate(),
        width,
        height,
        records,
    };
    write_sequence(STAGE, frames, &plan, "output", &out.join(artifacts::OUTPUT))?;
    write_json(STAGE, &out.join(artifacts::PLAN), &plan)?;
    Ok(plan)
}

/// Re-renders the output from a plan without re-running retrieval.
fn render_plan(cfg: &ProjectConfig, plan: &EditPlan, styles: &[ShotStyle<f64>]) -> Result<Vec<Frame>, CliError> {
    const STAGE: &str = "review";
    let mut repo = Repo::open(cfg, STAGE)?;
    let mut frames = Vec::new();
    for r in &plan.records {
        let style = styles
            .get(r.shot_index)
            .ok_or_else(|| CliError::pipeline(STAGE, format!("shot {}: no style record", r.shot_index)))?;
        let target = repo.prepare(STAGE, &r.source_id, style)?;
        frames.extend(render_target(STAGE, style, &target, &r.framing)?);
    }
    Ok(frames)
}

/// Places `frame` in an `w x h` black canvas at column `x`, centred
/// vertically.
fn blit(canvas: &mut [u8], cw: u32, ch: u32, frame: &Frame, x: u32) {
    let (fw, fh) = frame.dimensions();
    let y0 = (ch - fh) / 2;
    for y in 0..fh {
        let src = &frame.pixels()[(y * fw * 3) as usize..((y + 1) * fw * 3) as usize];
        let at = (((y0 + y) * cw + x) * 3) as usize;
        canvas[at..at + src.len()].copy_from_slice(src);
    }
}

fn side_by_side(a: &Frame, b: &Frame, index: usize) -> Frame {
    let w = a.width() + b.width();
    let h = a.height().max(b.height());
    let mut px = vec![0u8; (w * h * 3) as usize];
    blit(&mut px, w, h, a, 0);
    blit(&mut px, w, h, b, a.width());
    Frame::new(w, h, px, index).expect("canvas size")
}

fn boundaries(shots: &[TimelineShot]) -> Vec<usize> {
    shots.iter().skip(1).map(|s| s.start).collect()
}

/// Writes side_by_side.y4m, timeline.json and the mosaic gallery from an
/// existing plan.
pub fn cmd_review(cfg: &ProjectConfig) -> Result<Timeline, CliError> {
    const STAGE: &str = "review";
    let _lock = OutputLock::acquire(&cfg.output_dir)?;
    let out = &cfg.output_dir;
    let plan_path = out.join(artifacts::PLAN);
    if !plan_path.is_file() {
        return Err(CliError::pipeline(STAGE, format!("missing plan {}; run transfer first", plan_path.display())));
    }
    let plan: EditPlan = read_json(STAGE, &plan_path)?;
    let styles = load_styles(cfg, STAGE)?;
    let source = source_seq(cfg, STAGE)?;
    let output_path = out.join(artifacts::OUTPUT);
    let output: Vec<Frame> = if output_path.is_file() {
        load_clip(STAGE, &output_path)?.into_frames()
    } else {
        render_plan(cfg, &plan, &styles)?
    };
    if output.len() != source.len() {
        return Err(CliError::pipeline(
            STAGE,
            format!("output has {} frames, source has {}", output.len(), source.len()),
        ));
    }

    let combined: Vec<Frame> = source
        .frames()
        .par_iter()
        .zip(output.par_iter())
        .enumerate()
        .map(|(i, (a, b))| side_by_side(a, b, i))
        .collect();
    write_sequence(STAGE, combined, &plan, "side_by_side", &out.join(artifacts::SIDE_BY_SIDE))?;

    let source_shots: Vec<TimelineShot> = plan
        .records
        .iter()
        .map(|r| TimelineShot {
            start: r.shot.start,
            end: r.shot.end,
            transition_in: r.shot.transition_in,
            clip: plan.source_id.clone(),
        })
        .collect();
    let mut at = 0;
    let output_shots: Vec<TimelineShot> = plan
        .records
        .iter()
        .map(|r| {
            let start = at;
            at += r.shot.len();
            TimelineShot {
                start,
                end: at,
                transition_in: r.shot.transition_in,
                clip: r.source_id.clone(),
            }
        })
        .collect();
    let timeline = Timeline {
        source_boundaries: boundaries(&source_shots),
        output_boundaries: boundaries(&output_shots),
        source: source_shots,
        output: output_shots,
    };
    write_json(STAGE, &out.join(artifacts::TIMELINE), &timeline)?;
    write_mosaics(STAGE, &source, &styles, &out.join(artifacts::GALLERY))?;
    Ok(timeline)
}
