//! Table formatting, run manifests and file output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::{CliError, CliResult, FormatArgs};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, Copy)]
pub enum Precision {
    Decimals(usize),
    Full,
}

impl Precision {
    pub fn from_args(args: &FormatArgs) -> CliResult<Self> {
        if args.precision.eq_ignore_ascii_case("full") {
            return Ok(Precision::Full);
        }
        args.precision
            .parse()
            .map(Precision::Decimals)
            .map_err(|_| CliError::Usage(format!("--precision must be a digit count or `full`, got `{}`", args.precision)))
    }

    pub fn num(self, x: f64) -> String {
        if !x.is_finite() {
            return "NA".into();
        }
        let s = match self {
            Precision::Decimals(p) => format!("{x:.p$}"),
            Precision::Full => format!("{x}"),
        };
        // No "-0.0000".
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    }

    pub fn opt(self, x: Option<f64>) -> String {
        x.map_or_else(|| "NA".into(), |v| self.num(v))
    }
}

/// Comma-separated table with a header row and leading `#` comment lines.
#[derive(Debug, Clone, Default)]
pub struct Table {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        self.rows.push(cells);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Record of one command run. Tables reference it; its `duration_seconds`
/// line is the only field that varies between identical invocations, and it
/// is never copied into the tables.
#[derive(Debug)]
pub struct RunManifest {
    command: &'static str,
    seed: Option<u64>,
    config: Vec<(String, String)>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl RunManifest {
    pub fn new(command: &'static str, seed: Option<u64>) -> Self {
        Self {
            command,
            seed,
            config: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    /// Deterministic header lines for tables: everything except timing.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "ar1bayes {} {}{}",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.seed.map(|s| format!(" seed={s}")).unwrap_or_default()
        )];
        lines.extend(self.config.iter().map(|(k, v)| format!("{k} = {v}")));
        lines
    }

    /// Prefixes `table` with the manifest pointer and the deterministic
    /// header lines.
    pub fn stamp(&self, table: &mut Table, manifest_name: &str) {
        let mut lines = vec![format!("manifest: {manifest_name}")];
        lines.extend(self.header_lines());
        lines.append(&mut table.comments);
        table.comments = lines;
    }

    /// Writes a table to `path` with a pointer back to `manifest_name`.
    pub fn write_table(&mut self, path: &Path, table: &mut Table, manifest_name: &str) -> CliResult<()> {
        self.stamp(table, manifest_name);
        self.write_text(path, &table.render())
    }

    pub fn write_text(&mut self, path: &Path, text: &str) -> CliResult<()> {
        write_file(path, text)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command = {}\n", self.command));
        out.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed = {seed}\n"));
        }
        for (k, v) in &self.config {
            out.push_str(&format!("config.{k} = {v}\n"));
        }
        for p in &self.outputs {
            out.push_str(&format!("output = {}\n", p.display()));
        }
        out.push_str(&format!("duration_seconds = {:.3}\n", self.started.elapsed().as_secs_f64()));
        out
    }

    pub fn finish(self, path: &Path) -> CliResult<()> {
        write_file(path, &self.render())
    }
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

/// `file.csv` → `file.manifest.txt` beside it.
pub fn sibling_manifest(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{MANIFEST_FILE}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        let p = Precision::Decimals(4);
        assert_eq!(p.num(0.75604), "0.7560");
        assert_eq!(p.num(-0.00001), "0.0000");
        assert_eq!(p.num(f64::NAN), "NA");
        assert_eq!(Precision::Full.num(0.1), "0.1");
    }

    #[test]
    fn table_rendering() {
        let mut t = Table::new(["a", "b"]);
        t.comment("hello").row(vec!["1".into(), "2".into()]);
        assert_eq!(t.render(), "# hello\na,b\n1,2\n");
    }
}
