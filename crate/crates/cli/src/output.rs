use std::fmt::Write as _;
use std::path::Path;

use benchtrack::sim::PathBundle;

use crate::{CliError, CliResult};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV text with a one-line header.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let cols: Vec<&str> = header.iter().map(|s| s.as_ref()).collect();
        Self { text: cols.join(",") + "\n", width: cols.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.width);
        let cells: Vec<String> = values.iter().map(|v| fmt(*v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Columns t, X, Z, V, L, A, theta, c; a leading path index when there is
/// more than one path.
pub fn paths_csv(bundle: &PathBundle) -> String {
    let many = bundle.paths.len() > 1;
    let mut text = String::from(if many { "path,t,X,Z,V,L,A,theta,c\n" } else { "t,X,Z,V,L,A,theta,c\n" });
    for (i, p) in bundle.paths.iter().enumerate() {
        for (k, t) in bundle.times.iter().enumerate() {
            if many {
                let _ = write!(text, "{i},");
            }
            let cells = [*t, p.x[k], p.z[k], p.v[k], p.l[k], p.a[k], p.theta[k], p.c[k]].map(fmt);
            text.push_str(&cells.join(","));
            text.push('\n');
        }
    }
    text
}
