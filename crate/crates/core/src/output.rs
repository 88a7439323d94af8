//! Comma-separated tables with `#` metadata headers, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut file = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    file.write_all(contents.as_bytes())
        .and_then(|_| file.as_file().sync_all())
        .map_err(|e| Error::io(path, e))?;
    file.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Table text: metadata lines, a `#` column line, then one row per line.
pub fn render_table(metadata: &[(String, String)], columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "# {}", columns.join(", "));
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.12e}")).collect();
        out.push_str(&line.join(", "));
        out.push('\n');
    }
    out
}

/// Output directory plus the metadata stamped on every file written into it.
#[derive(Debug, Clone)]
pub struct OutputSink {
    directory: PathBuf,
    metadata: Vec<(String, String)>,
    written: Vec<PathBuf>,
}

impl OutputSink {
    pub fn new(directory: impl Into<PathBuf>, command: &str, timestamp: bool) -> Self {
        let mut metadata = vec![
            ("command".to_string(), command.to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            (
                "units".to_string(),
                "energies in eV unless a column says otherwise; couplings in atomic units"
                    .to_string(),
            ),
        ];
        if timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            metadata.push(("generated_unix".to_string(), secs.to_string()));
        }
        Self {
            directory: directory.into(),
            metadata,
            written: Vec::new(),
        }
    }

    pub fn directory(&self) -> &Path {
        &self.directory
    }

    pub fn push_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn extend_metadata(&mut self, items: impl IntoIterator<Item = (String, String)>) {
        self.metadata.extend(items);
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    /// Files written so far, in order.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
        self.table_with(name, &[], columns, rows)
    }

    /// Table with extra metadata lines specific to this file.
    pub fn table_with(
        &mut self,
        name: &str,
        extra: &[(String, String)],
        columns: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<PathBuf> {
        let mut meta = self.metadata.clone();
        meta.extend_from_slice(extra);
        self.file(name, &render_table(&meta, columns, rows))
    }

    /// Free-form text file prefixed by the metadata block.
    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(body);
        self.file(name, &out)
    }

    /// Gnuplot script plotting columns of `data` against its first column.
    pub fn gnuplot(
        &mut self,
        name: &str,
        data: &str,
        xlabel: &str,
        series: &[(usize, &str)],
        logscale_y: bool,
    ) -> Result<PathBuf> {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let stem = Path::new(name).with_extension("png");
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set terminal pngcairo size 900,600");
        let _ = writeln!(s, "set output '{}'", stem.display());
        let _ = writeln!(s, "set xlabel '{xlabel}'");
        if logscale_y {
            let _ = writeln!(s, "set logscale y");
        }
        let plots: Vec<String> = series
            .iter()
            .map(|(col, title)| format!("'{data}' using 1:{col} with lines title '{title}'"))
            .collect();
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
        self.file(name, &s)
    }

    fn file(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.directory.join(name);
        write_atomic(&path, contents)?;
        self.written.push(path.clone());
        Ok(path)
    }
}
