//! End-to-end acceptance checks on synthetic ground truth. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use editstyle::media_io::{mean_luma, parse_y4m, write_y4m, Frame, FrameRate, FrameSequence};
use editstyle::motion::{track_camera, track_camera_report, HomographyTrack, TrackReport, TrackerConfig};
use editstyle::retrieval::{select_footage, RepoClip, RepoIndex, RetrievalError};
use editstyle::shot_detect::{detect_shots, ShotDetectParams, Transition};
use editstyle::style::{assemble_style, brightness_curve, ContentLabel, LabelConfig, ShotStyle, SpeedMap};
use editstyle::synth::{
    block_texture, camera_clip, centered_view, noise_texture, pan, roll, scale_brightness, static_clip, with_distractor, zoom,
    Palette,
};
use editstyle::transfer::{render_shot, solve_framing, FramingParams};
use editstyle::vision::{estimate_homography_ransac, Homography, RansacParams};
use editstyle::Homography64;
use editstyle_cli::{artifacts, cmd_transfer};
use nalgebra::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn max_corner_error(est: &[Homography64], truth: &[Homography64], w: f64, h: f64) -> (f64, usize) {
    est.iter()
        .zip(truth)
        .enumerate()
        .map(|(t, (a, b))| (a.corner_distance(b, w, h), t))
        .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn single_core<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn motion_recovery() -> Outcome {
    let tex = noise_texture(1024, 1024, 5, Palette::GRAY);
    let (w, h) = (256u32, 256u32);
    let cases = [
        ("pan", pan(2.0, -1.5)),
        ("pan+zoom-out", pan(1.0, 1.0) * zoom(0.995, w, h)),
        ("pan+zoom-in+roll", pan(-1.0, 1.0) * zoom(1.005, w, h) * roll(-0.2, w, h)),
        ("roll+pan", roll(0.2, w, h) * pan(-2.0, 2.0)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, motion) in cases {
        let clip = camera_clip(&tex, centered_view(&tex, w, h), motion, 100, (w, h), name);
        let started = Instant::now();
        let track: HomographyTrack<f64> =
            single_core(|| track_camera(clip.seq.frames(), &[], &TrackerConfig::default(), 0)).unwrap();
        let secs = started.elapsed().as_secs_f64();
        let (err, at) = max_corner_error(&track.cumulative, &clip.truth, w as f64, h as f64);
        pass &= err < 1.5 && secs < 30.0;
        parts.push(format!("{name} max {err:.3} px @t={at}, {secs:.1} s"));
    }
    outcome(pass, format!("{} (limit 1.5 px, 30 s on one core)", parts.join("; ")))
}

fn ransac_robustness() -> Outcome {
    let truth = Homography::from_rows([[0.9, 0.08, 40.0], [-0.05, 1.1, -25.0], [2e-4, -1e-4, 1.0]]).unwrap();
    let mut worst = 0.0f64;
    let mut leaked = 0;
    let mut failures = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 200;
        let n_out = 80;
        let mut src = Vec::with_capacity(n);
        let mut dst = Vec::with_capacity(n);
        let mut is_outlier = vec![false; n];
        for (i, flag) in is_outlier.iter_mut().enumerate() {
            let p = Point2::new(rng.gen_range(0.0..640.0), rng.gen_range(0.0..480.0));
            let q = truth.apply(p);
            if i < n_out {
                *flag = true;
                // uniform over the frame, away from the true image
                let o = loop {
                    let o = Point2::new(rng.gen_range(0.0..640.0), rng.gen_range(0.0..480.0));
                    if nalgebra::distance(&o, &q) > 10.0 {
                        break o;
                    }
                };
                dst.push(o);
            } else {
                dst.push(Point2::new(q.x + rng.gen_range(-0.2..0.2), q.y + rng.gen_range(-0.2..0.2)));
            }
            src.push(p);
        }
        match estimate_homography_ransac(&src, &dst, &RansacParams::new(1.0, 1000, seed)) {
            Ok(fit) => {
                leaked += (0..n).filter(|&i| is_outlier[i] && fit.inliers[i]).count();
                for i in (0..n).filter(|&i| !is_outlier[i]) {
                    worst = worst.max(nalgebra::distance(&fit.model.apply(src[i]), &dst[i]));
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        worst < 0.5 && leaked == 0 && failures == 0,
        format!("20 seeds, 40% outliers: max inlier reprojection {worst:.3} px (limit 0.5), {leaked} outliers accepted, {failures} failed fits"),
    )
}

/// Concatenation with known cut frames and fade-through-black transitions.
fn concatenation(rng: &mut ChaCha8Rng, k: u64) -> (FrameSequence, Vec<usize>, Vec<(usize, usize)>) {
    let n_shots = rng.gen_range(3..=8);
    let size = 64;
    let mut frames: Vec<Frame> = Vec::new();
    let mut cuts = Vec::new();
    // (planted boundary, search window start) for fades
    let mut fades = Vec::new();
    let mut last_palette = usize::MAX;
    const FADE: usize = 6;
    for s in 0..n_shots {
        let palette = loop {
            let p = rng.gen_range(0..Palette::DISTINCT.len());
            if p != last_palette {
                break p;
            }
        };
        last_palette = palette;
        let len = rng.gen_range(14..=30);
        let tex = noise_texture(192, 192, 1000 * k + s as u64, Palette::DISTINCT[palette]);
        let clip = camera_clip(&tex, centered_view(&tex, size, size), pan(0.5, 0.25), len, (size, size), "c");
        let mut shot: Vec<Frame> = clip.seq.into_frames();
        let fade_in = s > 0 && rng.gen_bool(0.3);
        if s > 0 {
            if fade_in {
                // darken the previous shot's tail to black and ramp this one up
                let start = frames.len() - FADE;
                for (j, f) in frames[start..].iter_mut().enumerate() {
                    *f = scale_brightness(f, (FADE - 1 - j) as f64 / FADE as f64);
                }
                for (j, f) in shot[..FADE].iter_mut().enumerate() {
                    *f = scale_brightness(f, (j + 1) as f64 / FADE as f64);
                }
                fades.push((frames.len(), start));
            } else {
                cuts.push(frames.len());
            }
        }
        frames.extend(shot);
    }
    let seq = FrameSequence::from_frames(frames, FrameRate::default(), "concat").unwrap();
    (seq, cuts, fades)
}

fn shot_detection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    let (mut fades_total, mut fades_ok, mut worst_fade) = (0usize, 0usize, 0usize);
    for k in 0..50 {
        let (seq, cuts, fades) = concatenation(&mut rng, k);
        let shots = detect_shots(&seq, &ShotDetectParams::default()).unwrap();
        let detected: Vec<(usize, Transition)> = shots.iter().skip(1).map(|s| (s.start, s.transition_in)).collect();
        let luma: Vec<f64> = seq.frames().iter().map(mean_luma).collect();
        let mut used = vec![false; detected.len()];
        for &c in &cuts {
            match detected.iter().position(|&(b, _)| b == c) {
                Some(i) => {
                    used[i] = true;
                    tp += 1;
                }
                None => fneg += 1,
            }
        }
        for &(planted, start) in &fades {
            fades_total += 1;
            // oracle: luma extremum of the planted ramp pair
            let window = start..(planted + 6).min(luma.len());
            let extremum = window.min_by(|&a, &b| luma[a].total_cmp(&luma[b])).unwrap();
            match detected
                .iter()
                .enumerate()
                .filter(|(i, (b, _))| !used[*i] && b.abs_diff(extremum) <= 2)
                .min_by_key(|(_, (b, _))| b.abs_diff(extremum))
            {
                Some((i, &(b, kind))) => {
                    used[i] = true;
                    tp += 1;
                    worst_fade = worst_fade.max(b.abs_diff(extremum));
                    if kind == Transition::Fade {
                        fades_ok += 1;
                    }
                }
                None => fneg += 1,
            }
        }
        fp += used.iter().filter(|&&u| !u).count();
    }
    let precision = tp as f64 / (tp + fp).max(1) as f64;
    let recall = tp as f64 / (tp + fneg).max(1) as f64;
    outcome(
        precision == 1.0 && recall == 1.0 && fades_ok == fades_total,
        format!(
            "50 concatenations: precision {precision:.3}, recall {recall:.3} ({tp} hits, {fp} false, {fneg} missed); {fades_ok}/{fades_total} fades tagged, worst offset {worst_fade} frames (limit 2)"
        ),
    )
}

fn closed_loop_transfer() -> Outcome {
    let (w, h) = (256u32, 256u32);
    let src_tex = noise_texture(1024, 1024, 21, Palette::GRAY);
    let clip = camera_clip(&src_tex, centered_view(&src_tex, w, h), pan(1.5, -1.0), 100, (w, h), "src");
    let shot = editstyle::shot_detect::Shot {
        start: 0,
        end: 100,
        transition_in: Transition::HardCut,
        scene_id: 0,
    };
    let track: HomographyTrack<f64> = track_camera(clip.seq.frames(), &[], &TrackerConfig::default(), 0).unwrap();
    let curve = brightness_curve(clip.seq.frames());
    let style = assemble_style(0, &shot, track, ContentLabel::background(), curve.clone(), &SpeedMap::default(), (w, h)).unwrap();
    // the target is brighter than the source so brightness transfer only darkens
    let target_tex = noise_texture(512, 512, 22, Palette { dark: [120; 3], light: [250; 3] });
    let target = static_clip(&target_tex, 100, "tgt");
    let target_track = HomographyTrack::identity(100, 0);
    let framing = solve_framing(&style, (512, 512), None, &FramingParams::default()).unwrap();
    let rendered = render_shot(&style, &target, &target_track, &framing).unwrap();
    let re: HomographyTrack<f64> = track_camera(&rendered.frames, &[], &TrackerConfig::default(), 0).unwrap();
    let (motion_err, at) = max_corner_error(&re.cumulative, &style.track.cumulative, w as f64, h as f64);
    let luma_err = |frames: &[Frame], curve: &[f64]| {
        frames
            .iter()
            .zip(curve)
            .map(|(f, c)| (mean_luma(f) - c).abs())
            .fold(0.0, f64::max)
    };
    let luma_plain = luma_err(&rendered.frames, &curve);

    // same shot with a 20-frame fade-to-black tail on the brightness curve
    let mut faded = style.clone();
    for (j, b) in faded.brightness[80..].iter_mut().enumerate() {
        *b *= 1.0 - (j + 1) as f64 / 20.0;
    }
    let rendered_fade = render_shot(&faded, &target, &target_track, &framing).unwrap();
    let luma_fade = luma_err(&rendered_fade.frames, &faded.brightness);
    let durations = rendered.frames.len() == shot.len() && rendered_fade.frames.len() == shot.len();
    outcome(
        motion_err < 2.0 && luma_plain <= 2.0 && luma_fade <= 2.0 && durations,
        format!(
            "re-estimated motion max {motion_err:.3} px @t={at} (limit 2); mean luma max dev {luma_plain:.3} plain, {luma_fade:.3} with fade tail (limit 2); durations {} / {} frames",
            rendered.frames.len(),
            shot.len()
        ),
    )
}

fn foreground_rejection() -> Outcome {
    let (w, h) = (256u32, 256u32);
    let tex = noise_texture(1024, 1024, 5, Palette { dark: [70; 3], light: [180; 3] });
    let clip = camera_clip(&tex, centered_view(&tex, w, h), pan(2.0, 0.0), 60, (w, h), "fg");
    // 99 x 99 covers 15% of the frame
    let patch = block_texture(99, 99, 2, 9);
    let (seq, ann) = with_distractor(&clip.seq, &patch, (20, 20), (1, 1), "person");
    let coverage = 99.0 * 99.0 / (w * h) as f64;
    let run = |fg: &[editstyle::motion::ForegroundAnnotation]| -> TrackReport<f64> {
        track_camera_report(seq.frames(), fg, &TrackerConfig::default(), 0).unwrap()
    };
    let annotated = run(&ann);
    let bare = run(&[]);
    let (err_ann, _) = max_corner_error(&annotated.track.cumulative, &clip.truth, w as f64, h as f64);
    let (err_bare, at) = max_corner_error(&bare.track.cumulative, &clip.truth, w as f64, h as f64);
    let mut fg_inliers = 0;
    for (i, s) in annotated.steps.iter().enumerate() {
        let t = annotated.keyframes[i + 1];
        fg_inliers += s.inliers_prev.iter().filter(|p| ann[t - 1].boxes[0].contains(p.0, p.1)).count();
        fg_inliers += s.inliers_next.iter().filter(|p| ann[t].boxes[0].contains(p.0, p.1)).count();
    }
    outcome(
        err_ann < 1.5 && err_bare > 3.0 && fg_inliers == 0,
        format!(
            "distractor {:.1}% of frame: annotated max {err_ann:.3} px (limit 1.5), {fg_inliers} foreground inliers; un-annotated max {err_bare:.1} px @t={at} (must exceed 3)",
            100.0 * coverage
        ),
    )
}

const ASPECTS: [f64; 5] = [16.0 / 9.0, 4.0 / 3.0, 1.0, 16.0 / 9.0 * 1.005, 16.0 / 9.0 * 1.02];
/// Speeds as exact fractions `num / den`.
const SPEEDS: [(usize, usize); 5] = [(3, 10), (1, 2), (1, 1), (3, 2), (2, 1)];

fn random_counts(rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for label in ["person", "face", "car"] {
        if rng.gen_bool(0.5) {
            m.insert(label.to_string(), rng.gen_range(0..9) as f64 * 0.5);
        }
    }
    m
}

fn label_of(counts: BTreeMap<String, f64>) -> ContentLabel {
    let cfg = LabelConfig::default();
    let salient: f64 = cfg.salient_labels.iter().filter_map(|l| counts.get(l)).sum();
    ContentLabel {
        category: cfg.category(salient),
        object_counts: counts,
    }
}

fn repo_clip(id: String, duration: usize, aspect: f64, label: ContentLabel) -> RepoClip {
    RepoClip {
        source_id: id,
        duration,
        frame_rate: FrameRate::default(),
        width: (aspect * 180.0).round() as u32,
        height: 180,
        aspect,
        object_counts: label.object_counts.clone(),
        label,
        used: 0,
    }
}

fn style_for(index: usize, len: usize, speed: (usize, usize), aspect: f64, label: ContentLabel) -> ShotStyle<f64> {
    let shot = editstyle::shot_detect::Shot {
        start: 0,
        end: len,
        transition_in: Transition::HardCut,
        scene_id: 0,
    };
    let mut speeds = SpeedMap::default();
    speeds.0.insert(index, speed.0 as f64 / speed.1 as f64);
    let mut s = assemble_style(index, &shot, HomographyTrack::identity(len, 0), label, vec![0.0; len], &speeds, (16, 9)).unwrap();
    s.aspect = aspect;
    s
}

/// Independent check of both hard constraints in exact arithmetic.
fn oracle_ok(c: &RepoClip, aspect: f64, len: usize, speed: (usize, usize)) -> bool {
    let needed = (len * speed.0).div_ceil(speed.1);
    (c.aspect - aspect).abs() <= 0.01 * aspect && c.duration >= needed
}

fn retrieval_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut selections, mut errors, mut violations, mut nondeterministic, mut waiver_bad) = (0, 0, 0, 0, 0);
    let mut fairness_worst = 0usize;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=8);
        let clips: Vec<RepoClip> = (0..k)
            .map(|i| {
                let aspect = ASPECTS[rng.gen_range(0..ASPECTS.len())];
                repo_clip(format!("clip{i:02}"), rng.gen_range(20..=400), aspect, label_of(random_counts(&mut rng)))
            })
            .collect();
        let styles: Vec<(ShotStyle<f64>, (usize, usize))> = (0..rng.gen_range(1..=6))
            .map(|i| {
                let speed = SPEEDS[rng.gen_range(0..SPEEDS.len())];
                let aspect = ASPECTS[rng.gen_range(0..3)];
                (style_for(i, rng.gen_range(10..=150), speed, aspect, label_of(random_counts(&mut rng))), speed)
            })
            .collect();
        let index = RepoIndex::new(clips).unwrap();
        let run = || {
            let mut idx = index.clone();
            styles
                .iter()
                .map(|(s, _)| select_footage(s, &mut idx).map(|sel| sel.source_id))
                .collect::<Vec<Result<String, RetrievalError>>>()
        };
        let first = run();
        if first != run() {
            nondeterministic += 1;
        }
        for ((style, speed), result) in styles.iter().zip(&first) {
            let eligible: Vec<&RepoClip> = index
                .clips()
                .iter()
                .filter(|c| oracle_ok(c, style.aspect, style.len(), *speed))
                .collect();
            match result {
                Ok(id) => {
                    selections += 1;
                    let c = index.get(id).unwrap();
                    if !oracle_ok(c, style.aspect, style.len(), *speed) {
                        violations += 1;
                    }
                    let waived = c.label.category != style.label.category;
                    if waived && eligible.iter().any(|e| e.label.category == style.label.category) {
                        waiver_bad += 1;
                    }
                }
                Err(_) => {
                    errors += 1;
                    if !eligible.is_empty() {
                        violations += 1;
                    }
                }
            }
        }

        // fairness among identical clips
        let k = rng.gen_range(1..=6);
        let label = label_of(random_counts(&mut rng));
        let clips: Vec<RepoClip> = (0..k).map(|i| repo_clip(format!("same{i}"), 300, 16.0 / 9.0, label.clone())).collect();
        let mut idx = RepoIndex::new(clips).unwrap();
        for i in 0..rng.gen_range(1..=30) {
            let s = style_for(i, rng.gen_range(10..=100), SPEEDS[rng.gen_range(0..3)], 16.0 / 9.0, label_of(random_counts(&mut rng)));
            select_footage(&s, &mut idx).unwrap();
        }
        let used: Vec<usize> = idx.clips().iter().map(|c| c.used).collect();
        fairness_worst = fairness_worst.max(used.iter().max().unwrap() - used.iter().min().unwrap());
    }
    outcome(
        violations == 0 && nondeterministic == 0 && waiver_bad == 0 && fairness_worst <= 1,
        format!(
            "1000 instances: {selections} selections, {errors} justified refusals, {violations} constraint violations, {waiver_bad} bad waivers, {nondeterministic} nondeterministic; max used-count spread {fairness_worst} (limit 1)"
        ),
    )
}

fn format_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut structural, mut worst) = (0, 0i32);
    for _ in 0..100 {
        let (w, h) = (rng.gen_range(1..=24), rng.gen_range(1..=24));
        let n = rng.gen_range(1..=4);
        let rate = FrameRate::new(rng.gen_range(1..=60000), rng.gen_range(1..=1001)).unwrap();
        let frames: Vec<Frame> = (0..n)
            .map(|i| {
                let px = (0..w * h * 3).map(|_| rng.gen::<u8>()).collect();
                Frame::new(w, h, px, i).unwrap()
            })
            .collect();
        let seq = FrameSequence::new(frames, rate, "").unwrap();
        let back = parse_y4m(&write_y4m(&seq).unwrap()).unwrap();
        let same_shape = back.len() == seq.len()
            && back.dimensions() == seq.dimensions()
            && back.frame_rate() == seq.frame_rate()
            && back.frames().iter().enumerate().all(|(i, f)| f.index() == i);
        if !same_shape {
            structural += 1;
            continue;
        }
        for (a, b) in seq.frames().iter().zip(back.frames()) {
            for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
                worst = worst.max((x as i32 - y as i32).abs());
            }
        }
    }
    outcome(
        structural == 0 && worst <= 1,
        format!("100 random sequences: {structural} structural mismatches, max channel error {worst} (limit 1)"),
    )
}

fn plan_determinism() -> Outcome {
    let p = common::Project::new(2);
    let cfg = p.config_with(&[]);
    let first = cmd_transfer(&cfg).map(|_| fs::read(p.out(artifacts::PLAN)).unwrap());
    fs::remove_dir_all(p.path("out")).unwrap();
    let second = cmd_transfer(&cfg).map(|_| fs::read(p.out(artifacts::PLAN)).unwrap());
    match (first, second) {
        (Ok(a), Ok(b)) => outcome(a == b, format!("plan.json {} bytes, identical: {}", a.len(), a == b)),
        (a, b) => outcome(false, format!("transfer failed: {:?} / {:?}", a.err(), b.err())),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("motion recovery", motion_recovery),
        ("ransac robustness", ransac_robustness),
        ("shot detection", shot_detection),
        ("closed-loop transfer", closed_loop_transfer),
        ("foreground rejection", foreground_rejection),
        ("retrieval contracts", retrieval_contracts),
        ("format round-trip", format_round_trip),
        ("determinism", plan_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "acceptance {} {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
