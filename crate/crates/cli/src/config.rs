//! Run configuration: command-line flags over a TOML file over built-in defaults.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use ringmatch::{Error, Result};
use serde::Deserialize;

/// Every key a config file may set. Keys not relevant to the command are ignored.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub gamma: Option<f64>,
    pub system: Option<PathBuf>,
    pub m: Option<u32>,
    pub n: Option<usize>,
    pub a: Option<Vec<f64>>,
    pub root: Option<usize>,
    pub mu: Option<f64>,
    pub mus: Option<Vec<f64>>,
    pub starts: Option<usize>,
    pub tol: Option<f64>,
    pub disc: Option<f64>,
    pub square: Option<f64>,
    pub points: Option<usize>,
    pub sign: Option<f64>,
    pub regions: Option<String>,
    pub r0: Option<f64>,
    pub both: Option<bool>,
    pub c0: Option<f64>,
    pub c3: Option<f64>,
    pub s_max: Option<f64>,
    pub h: Option<f64>,
    pub r_max: Option<f64>,
    pub refine: Option<f64>,
    pub branch: Option<String>,
    pub grid: Option<usize>,
    pub family: Option<Vec<usize>>,
    pub table: Option<PathBuf>,
    pub compare_paper: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Resolved settings, in resolution order, for the output header.
#[derive(Clone, Debug, Default)]
pub struct Meta {
    entries: Vec<(String, String, Source)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Default,
}

impl Meta {
    pub fn pick<T: Display + Clone>(&mut self, key: &str, flag: Option<T>, file: Option<T>, default: T) -> T {
        let (v, src) = match (flag, file) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v, Source::File),
            (None, None) => (default, Source::Default),
        };
        self.record(key, v.to_string(), src);
        v
    }

    /// Like [`Meta::pick`] with no default; records the key only when set.
    pub fn maybe<T: Display + Clone>(&mut self, key: &str, flag: Option<T>, file: Option<T>) -> Option<T> {
        let (v, src) = match (flag, file) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v, Source::File),
            (None, None) => return None,
        };
        self.record(key, v.to_string(), src);
        Some(v)
    }

    pub fn record(&mut self, key: &str, value: String, src: Source) {
        self.entries.push((key.to_string(), value, src));
    }

    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self.entries.iter().map(|(k, v, _)| (k.clone(), v.clone())).collect();
        let defaults: Vec<&str> = self.entries.iter().filter(|e| e.2 == Source::Default).map(|e| e.0.as_str()).collect();
        out.push(("defaults".into(), if defaults.is_empty() { "-".into() } else { defaults.join(",") }));
        out
    }

    /// `# key=value` lines.
    pub fn header(&self) -> String {
        self.pairs().into_iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }
}

pub fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Wrapper so list-valued settings print as comma lists.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&join(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mut m = Meta::default();
        assert_eq!(m.pick("a", Some(1), Some(2), 3), 1);
        assert_eq!(m.pick("b", None, Some(2), 3), 2);
        assert_eq!(m.pick("c", None, None, 3), 3);
        assert_eq!(m.maybe::<i32>("d", None, None), None);
        assert_eq!(m.header(), "# a=1\n# b=2\n# c=3\n# defaults=c\n");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("gamma = 1.6\nbogus = 1").is_err());
        let c: FileConfig = toml::from_str("gamma = 1.6\nmus = [0.08, 0.02]").unwrap();
        assert_eq!(c.mus, Some(vec![0.08, 0.02]));
    }
}
