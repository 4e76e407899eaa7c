//! Flat `key = value` run configuration with command-line overrides.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hubalign::kvfile::{self, KeyValues};
use hubalign::Error;

/// Process exit codes.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_CONVERGENCE: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(Error),
    Convergence(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Data(e) => write!(f, "data error: {e}"),
            CliError::Convergence(e) => write!(f, "alignment did not converge: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_convergence_failure() {
            return CliError::Convergence(e);
        }
        match e {
            Error::UnknownLanguage(_) => CliError::Config(e.to_string()),
            other => CliError::Data(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config_err(msg: impl Display) -> CliError {
    CliError::Config(msg.to_string())
}

/// Values from the config file, overridden by flags. Every value that ends up
/// being used is remembered so it can be written to the run record.
#[derive(Debug, Default)]
pub struct Settings {
    file: KeyValues,
    base: PathBuf,
    used: KeyValues,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Settings {
                base: PathBuf::from("."),
                ..Default::default()
            });
        };
        if !path.is_file() {
            return Err(config_err(format!("config file {} does not exist", path.display())));
        }
        let file = kvfile::read_kv(path).map_err(config_err)?;
        Ok(Settings {
            file,
            base: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            used: KeyValues::new(),
        })
    }

    /// The raw config file entries.
    pub fn file_entries(&self) -> &KeyValues {
        &self.file
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    fn record(&mut self, key: &str, value: String) {
        self.used.insert(key.to_string(), value);
    }

    /// Flag if given, else the config entry, else `default`.
    pub fn value<T>(&mut self, flag: Option<T>, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
    {
        let v = self.optional(flag, key)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn optional<T>(&mut self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr + Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(
                    raw.parse::<T>()
                        .map_err(|_| config_err(format!("bad value `{raw}` for `{key}`")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.record(key, v.to_string());
        }
        Ok(v)
    }

    pub fn required<T>(&mut self, flag: Option<T>, key: &str) -> CliResult<T>
    where
        T: FromStr + Display,
    {
        self.optional(flag, key)?
            .ok_or_else(|| config_err(format!("`{key}` is required (flag or config entry)")))
    }

    /// An input file that must already exist. Config-file paths are relative
    /// to the config file.
    pub fn input_path(&mut self, flag: Option<PathBuf>, key: &str) -> CliResult<PathBuf> {
        self.optional_input(flag, key)?
            .ok_or_else(|| config_err(format!("`{key}` is required (flag or config entry)")))
    }

    pub fn optional_input(&mut self, flag: Option<PathBuf>, key: &str) -> CliResult<Option<PathBuf>> {
        let path = match flag {
            Some(p) => Some(p),
            None => self.file.get(key).map(|raw| self.base.join(raw)),
        };
        if let Some(p) = &path {
            if !p.exists() {
                return Err(config_err(format!("{key}: {} does not exist", p.display())));
            }
            self.record(key, p.display().to_string());
        }
        Ok(path)
    }

    /// An output location; only recorded, never checked for existence.
    pub fn output_path(&mut self, flag: Option<PathBuf>, key: &str) -> CliResult<PathBuf> {
        let path = match flag {
            Some(p) => p,
            None => self
                .file
                .get(key)
                .map(|raw| self.base.join(raw))
                .ok_or_else(|| config_err(format!("`{key}` is required (flag or config entry)")))?,
        };
        self.record(key, path.display().to_string());
        Ok(path)
    }

    /// Embedding file of `lang`: the flag, else `lang.<code>` from the config.
    pub fn embedding_path(&mut self, flag: Option<PathBuf>, lang: &str) -> CliResult<PathBuf> {
        self.input_path(flag, &format!("lang.{lang}"))
    }

    /// The run record: command, random seed and every setting used.
    pub fn run_record(&self, command: &str, random_seed: u64) -> String {
        let mut kv = KeyValues::new();
        kv.insert("command".into(), command.into());
        kv.insert("random_seed".into(), random_seed.to_string());
        for (k, v) in &self.used {
            if k != "random_seed" {
                kv.insert(k.clone(), v.clone());
            }
        }
        kvfile::format_kv(&kv)
    }
}

/// A comma-separated list such as `1,5,10`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|_| format!("bad list item `{x}`")))
            .collect::<Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let items: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&items.join(","))
    }
}

/// `lo:hi` rank band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band(pub usize, pub usize);

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or("expected `lo:hi`")?;
        let (lo, hi): (usize, usize) = (
            lo.trim().parse().map_err(|_| "bad band start")?,
            hi.trim().parse().map_err(|_| "bad band end")?,
        );
        if lo >= hi {
            return Err("band start must be below its end".into());
        }
        Ok(Band(lo, hi))
    }
}

impl Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.0, self.1)
    }
}

/// Vocabulary cap that also accepts `unlimited`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabCap(pub Option<usize>);

impl FromStr for VocabCap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "unlimited" => Ok(VocabCap(None)),
            n => n.parse().map(|n| VocabCap(Some(n))).map_err(|_| format!("bad vocabulary size `{n}`")),
        }
    }
}

impl Display for VocabCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("unlimited"),
        }
    }
}
