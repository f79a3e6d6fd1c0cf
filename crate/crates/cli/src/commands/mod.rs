pub mod group;
pub mod kernel;
pub mod lift;
pub mod simulate;
pub mod stimulus;

use anyhow::{bail, Context, Result};
use se2group::kernel::read_grid;
use se2group::{KernelGrid, Normalization, StimulusSet};
use std::path::Path;

pub fn load_stimulus(path: &Path) -> Result<StimulusSet> {
    StimulusSet::read(path).with_context(|| format!("reading stimulus {}", path.display()))
}

/// Stimulus that must contain at least one element.
pub fn load_nonempty_stimulus(path: &Path) -> Result<StimulusSet> {
    let s = load_stimulus(path)?;
    if s.is_empty() {
        bail!("stimulus {} has no elements", path.display());
    }
    Ok(s)
}

/// Reads a kernel cache and checks it holds a symmetrised max-one ω.
pub fn load_omega(path: &Path) -> Result<KernelGrid> {
    let file = std::fs::File::open(path).with_context(|| format!("opening kernel {}", path.display()))?;
    let (grid, _) =
        read_grid(std::io::BufReader::new(file)).with_context(|| format!("reading kernel {}", path.display()))?;
    if !grid.symmetrized || grid.normalization != Normalization::MaxOne {
        bail!(
            "kernel {} is not a symmetrised, max-one normalised connectivity kernel",
            path.display()
        );
    }
    Ok(grid)
}
