#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use editstyle::media_io::{write_y4m_file, FrameSequence};
use editstyle::synth::{camera_clip, centered_view, noise_texture, pan, static_clip, Palette};
use editstyle_cli::ProjectConfig;
use tempfile::TempDir;

pub const SHOT_LEN: usize = 30;
pub const SIZE: u32 = 128;

/// A project directory with a two-shot panning source and a repository of
/// static square clips.
pub struct Project {
    pub dir: TempDir,
}

impl Project {
    pub fn new(repo_clips: usize) -> Self {
        let p = Self::empty();
        write_y4m_file(&two_shot_source(), &p.path("source.y4m")).unwrap();
        for i in 0..repo_clips {
            p.add_clip(&format!("clip{i}"), (256, 256), 40);
        }
        p
    }

    /// Config, speed map and empty directories only.
    pub fn empty() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let p = Self { dir };
        fs::create_dir(p.path("repo")).unwrap();
        fs::write(p.path("speeds.json"), "{}").unwrap();
        fs::write(
            p.path("project.toml"),
            "source = \"source.y4m\"\nrepo_dir = \"repo\"\nspeed_map = \"speeds.json\"\noutput_dir = \"out\"\n",
        )
        .unwrap();
        p
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn out(&self, rel: &str) -> PathBuf {
        self.path("out").join(rel)
    }

    pub fn add_clip(&self, id: &str, size: (u32, u32), len: usize) {
        let seed = 100 + id.bytes().map(u64::from).sum::<u64>();
        let tex = noise_texture(size.0, size.1, seed, Palette { dark: [110; 3], light: [250; 3] });
        write_y4m_file(&static_clip(&tex, len, id), &self.path(&format!("repo/{id}.y4m"))).unwrap();
    }

    pub fn config(&self) -> ProjectConfig {
        self.config_with(&[])
    }

    pub fn config_with(&self, overrides: &[&str]) -> ProjectConfig {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        ProjectConfig::load(&self.path("project.toml"), &o, None).unwrap()
    }
}

/// Two distinct tinted textures, each panned for `SHOT_LEN` frames.
pub fn two_shot_source() -> FrameSequence {
    let mut frames = Vec::new();
    for (k, palette) in [Palette::DISTINCT[0], Palette::DISTINCT[2]].into_iter().enumerate() {
        let tex = noise_texture(512, 512, 7 + k as u64, palette);
        let clip = camera_clip(&tex, centered_view(&tex, SIZE, SIZE), pan(1.0, 0.5), SHOT_LEN, (SIZE, SIZE), "s");
        frames.extend(clip.seq.into_frames());
    }
    FrameSequence::from_frames(frames, editstyle::media_io::FrameRate::new(30, 1).unwrap(), "source").unwrap()
}

pub fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
