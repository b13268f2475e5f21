//! Artifact writing: JSON with 17 significant digits, CSV, and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Pretty JSON where every float is written as `d.dddddddddddddddde±x`.
struct Sig17<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident $(, $arg:ident : $ty:ty)*;)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Sig17<'_> {
    delegate! {
        begin_array;
        end_array;
        begin_array_value, first: bool;
        end_array_value;
        begin_object;
        end_object;
        begin_object_key, first: bool;
        begin_object_value;
        end_object_value;
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(v))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{}", fmt_f64(v as f64))
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::numeric(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, &to_json(value)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// What a command read, what it was configured with and what it wrote.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    /// Input path to SHA-256 of its bytes.
    pub input_digests: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    /// Seconds; only filled with `--record-time`, so reruns stay identical.
    pub wall_time_s: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            config,
            seed,
            input_digests: BTreeMap::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_s: None,
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.input_digests
            .insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }
}

/// `foo.csv` becomes `foo.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.manifest.json"))
}
