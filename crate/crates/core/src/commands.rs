//! File-level operations behind the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extract::{extract_profiles, verify, ExtractConfig};
use crate::field::CoeffField;
use crate::io::{read_json, write_json, FieldFile, ReportFile, SpecFile};
use crate::norms::{norm_report, BesovParams, NormReport};
use crate::synth::generate;

/// Process exit status for an error: 3 for internal invariant breaches, 2 for
/// everything caused by the input.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Internal(_) => 3,
        _ => 2,
    }
}

pub fn field_file_name(n: usize) -> String {
    format!("u_{n:04}.json")
}

/// Field files `u_*.json` in `dir`, sorted by name.
pub fn field_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(dir)
        .map_err(|e| Error::Input(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in rd {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if name.starts_with("u_") && name.ends_with(".json") && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Input(format!(
            "no u_*.json field files in {}",
            dir.display()
        )));
    }
    Ok(paths)
}

pub fn load_sequence(dir: &Path) -> Result<Vec<CoeffField<f64>>> {
    field_paths(dir)?
        .iter()
        .map(|p| read_json::<FieldFile>(p)?.to_field())
        .collect()
}

/// Writes `u_0001.json, ...` and `truth.json` into `out_dir`; returns the
/// number of fields.
pub fn cmd_generate(spec_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<usize> {
    let spec = read_json::<SpecFile>(spec_path)?.to_spec(seed)?;
    let (fields, truth) = generate(&spec)?;
    fs::create_dir_all(out_dir)?;
    for (pos, f) in fields.iter().enumerate() {
        write_json(&out_dir.join(field_file_name(pos + 1)), &FieldFile::from(f))?;
    }
    write_json(
        &out_dir.join("truth.json"),
        &ReportFile::new(&truth, None, None),
    )?;
    Ok(fields.len())
}

/// Default configuration for a corpus: `L^p` mode at the fields' exponent.
pub fn default_config(seq: &[CoeffField<f64>]) -> Result<ExtractConfig<f64>> {
    let first = seq.first().ok_or(Error::EmptySequence)?;
    Ok(ExtractConfig::lp(first.p()))
}

pub fn cmd_decompose(seq: Vec<CoeffField<f64>>, cfg: &ExtractConfig<f64>) -> Result<ReportFile> {
    let dec = extract_profiles(&seq, cfg)?;
    let rep = verify(&dec, cfg)?;
    Ok(ReportFile::new(&dec, Some(*cfg), Some(rep)))
}

/// Recomputes the verification section of a stored report against the
/// corpus it was built from.
pub fn cmd_verify(
    seq: Vec<CoeffField<f64>>,
    report: &ReportFile,
    cfg: Option<ExtractConfig<f64>>,
) -> Result<ReportFile> {
    let cfg = match cfg.or(report.config) {
        Some(c) => c,
        None => default_config(&seq)?,
    };
    cfg.validate()?;
    let dec = report.decomposition(seq)?;
    let rep = verify(&dec, &cfg)?;
    Ok(ReportFile::new(&dec, Some(cfg), Some(rep)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormsOutput {
    pub dimension: usize,
    pub p: f64,
    pub entries: usize,
    #[serde(flatten)]
    pub norms: NormReport<f64>,
}

pub fn cmd_norms(field_path: &Path, besov: &[BesovParams<f64>]) -> Result<NormsOutput> {
    let f: CoeffField<f64> = read_json::<FieldFile>(field_path)?.to_field()?;
    Ok(NormsOutput {
        dimension: f.dim(),
        p: f.p(),
        entries: f.len(),
        norms: norm_report(&f, besov),
    })
}
