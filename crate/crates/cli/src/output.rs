//! Output directory handling. Every file is written to a temporary file in
//! the target directory and renamed into place.

use anyhow::{Context, Result};
use se2group::{GrayImage, RgbImage};
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SE2GROUP_OUT_DIR";

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_with(&mut self, name: &str, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let target = self.path(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)
            .with_context(|| format!("creating temporary file in {}", self.root.display()))?;
        {
            let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
            fill(&mut buf)?;
            buf.flush()?;
        }
        tmp.as_file().sync_all()?;
        tmp.persist(&target)
            .with_context(|| format!("renaming into {}", target.display()))?;
        log::info!("wrote {}", target.display());
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write_with(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_pgm(&mut self, name: &str, image: &GrayImage, config: &Value) -> Result<()> {
        let comment = config.to_string();
        self.write_with(name, |w| Ok(image.write_pgm_with_comment(w, &comment)?))
    }

    pub fn write_ppm(&mut self, name: &str, image: &RgbImage, config: &Value) -> Result<()> {
        let comment = config.to_string();
        self.write_with(name, |w| Ok(image.write_ppm_with_comment(w, &comment)?))
    }
}

/// `--out-dir`, then the config file, then the environment, then `.`.
pub fn resolve_out_dir(flag: Option<PathBuf>, from_config: Option<String>) -> PathBuf {
    flag.or_else(|| from_config.map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| Path::new(".").to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_only_the_target() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path().join("nested")).unwrap();
        out.write_text("a.txt", "hello").unwrap();
        out.write_text("a.txt", "again").unwrap();
        let names: Vec<_> = std::fs::read_dir(out.path(""))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec!["a.txt"]);
        assert_eq!(std::fs::read_to_string(out.path("a.txt")).unwrap(), "again");
        assert_eq!(out.written(), ["a.txt", "a.txt"]);
    }

    #[test]
    fn failed_fill_keeps_the_old_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path().to_path_buf()).unwrap();
        out.write_text("a.txt", "old").unwrap();
        let err = out.write_with("a.txt", |w| {
            w.write_all(b"partial")?;
            anyhow::bail!("boom")
        });
        assert!(err.is_err());
        assert_eq!(std::fs::read_to_string(out.path("a.txt")).unwrap(), "old");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
