use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{synth_clip, write_clip_dir, write_manifest, Label, ManifestEntry, Split};
use crate::{Error, Result};

/// Number of clips per split and label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthCounts {
    pub train_blink: usize,
    pub train_nonblink: usize,
    pub test_blink: usize,
    pub test_nonblink: usize,
    /// Frames per clip.
    pub length: usize,
}

impl Default for SynthCounts {
    fn default() -> Self {
        Self {
            train_blink: 100,
            train_nonblink: 100,
            test_blink: 40,
            test_nonblink: 40,
            length: 10,
        }
    }
}

impl SynthCounts {
    pub fn total(&self) -> usize {
        self.train_blink + self.train_nonblink + self.test_blink + self.test_nonblink
    }

    fn groups(&self) -> [(Split, Label, usize); 4] {
        [
            (Split::Train, Label::Blink, self.train_blink),
            (Split::Train, Label::NonBlink, self.train_nonblink),
            (Split::Test, Label::Blink, self.test_blink),
            (Split::Test, Label::NonBlink, self.test_nonblink),
        ]
    }
}

/// Per-clip seeds, one independent stream per split and label so changing one count leaves the
/// other groups untouched.
fn clip_plan(seed: u64, counts: &SynthCounts) -> Vec<(ManifestEntry, u64)> {
    let mut plan = Vec::with_capacity(counts.total());
    for (k, (split, label, n)) in counts.groups().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for i in 0..n {
            let name = format!("{}_{}_{i:04}", split.as_str(), label.as_str());
            plan.push((
                ManifestEntry {
                    clip_dir: PathBuf::from("clips").join(&name),
                    label,
                    split,
                    source_id: name,
                },
                rng.random(),
            ));
        }
    }
    plan
}

/// Renders a synthetic dataset under `out` (`clips/` plus `manifest.tsv`) and returns the
/// manifest path. Everything is written to a staging directory first and moved into place
/// only after every clip succeeded.
pub fn synth_dataset(seed: u64, counts: &SynthCounts, out: &Path) -> Result<PathBuf> {
    let clips = out.join("clips");
    let manifest = out.join("manifest.tsv");
    for p in [&clips, &manifest] {
        if p.exists() {
            return Err(Error::invalid(format!("refusing to overwrite {}", p.display())));
        }
    }
    let staging = out.join(".synth-staging");
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    let result = (|| {
        let plan = clip_plan(seed, counts);
        plan.par_iter().try_for_each(|(entry, clip_seed)| {
            let clip = synth_clip(*clip_seed, entry.label, counts.length)?;
            write_clip_dir(&staging.join(&entry.clip_dir), &clip)
        })?;
        let entries: Vec<ManifestEntry> = plan.into_iter().map(|(e, _)| e).collect();
        write_manifest(&staging.join("manifest.tsv"), &entries)?;
        let staged_clips = staging.join("clips");
        if entries.is_empty() {
            fs::create_dir_all(&staged_clips).map_err(|e| Error::io(&staged_clips, e))?;
        }
        fs::rename(&staged_clips, &clips).map_err(|e| Error::io(&clips, e))?;
        fs::rename(staging.join("manifest.tsv"), &manifest).map_err(|e| Error::io(&manifest, e))
    })();
    let cleanup = fs::remove_dir_all(&staging);
    result?;
    cleanup.map_err(|e| Error::io(&staging, e))?;
    Ok(manifest)
}
