//! JSON file formats.
//!
//! Shifts cross the boundary as integer numerators plus `denom_exp`, never as
//! floats. Amplitudes use the shortest decimal that round-trips the `f64`
//! exactly.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::{DyadicVec, WaveletIndex};
use crate::error::{Error, Result};
use crate::extract::{
    Decomposition, Diagnostic, ExtractConfig, ProfileGroup, StopReason, VerificationReport,
};
use crate::field::CoeffField;
use crate::scalar::Scalar;
use crate::synth::{NoiseSpec, ParamLaw, SyntheticSpec};

/// Extended reals: finite values as JSON numbers, infinities as `"inf"` /
/// `"-inf"`.
pub mod ext_real {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        let x = v.as_f64();
        if x.is_infinite() {
            s.serialize_str(if x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(x)
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(T::of(x)),
            Repr::Text(t) => match t.as_str() {
                "inf" | "infinity" | "+inf" => Ok(T::infinity()),
                "-inf" | "-infinity" => Ok(T::neg_infinity()),
                other => Err(serde::de::Error::custom(format!(
                    "not an extended real: {other}"
                ))),
            },
        }
    }

    /// Parses `"inf"` or a decimal number.
    pub fn parse<T: Scalar>(text: &str) -> std::result::Result<T, String> {
        match text.trim() {
            "inf" | "infinity" | "+inf" => Ok(T::infinity()),
            t => t
                .parse::<f64>()
                .map(T::of)
                .map_err(|e| format!("bad number {t:?}: {e}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub i: u32,
    pub j: i64,
    pub k: Vec<i64>,
    pub denom_exp: u32,
    pub amp: f64,
}

/// One coefficient field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub dimension: usize,
    pub p: f64,
    pub entries: Vec<EntryRecord>,
}

impl<T: Scalar> From<&CoeffField<T>> for FieldFile {
    fn from(f: &CoeffField<T>) -> Self {
        FieldFile {
            dimension: f.dim(),
            p: f.p().as_f64(),
            entries: f
                .iter()
                .map(|(idx, &a)| EntryRecord {
                    i: idx.gen,
                    j: idx.scale,
                    k: idx.shift.numerators().to_vec(),
                    denom_exp: idx.shift.denom_exp(),
                    amp: a.as_f64(),
                })
                .collect(),
        }
    }
}

impl FieldFile {
    pub fn to_field<T: Scalar>(&self) -> Result<CoeffField<T>> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                if e.k.is_empty() {
                    return Err(Error::Input("entry with empty shift".into()));
                }
                let shift = DyadicVec::new(e.k.clone(), e.denom_exp);
                if shift.denom_exp() != e.denom_exp || shift.numerators() != e.k.as_slice() {
                    return Err(Error::Input(format!(
                        "shift {:?}/2^{} is not normalized",
                        e.k, e.denom_exp
                    )));
                }
                Ok((WaveletIndex::new(e.i, e.j, shift), T::of(e.amp)))
            })
            .collect::<Result<Vec<_>>>()?;
        CoeffField::from_entries(self.dimension, T::of(self.p), entries)
    }
}

impl<T: Scalar> Serialize for CoeffField<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FieldFile::from(self).serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for CoeffField<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        FieldFile::deserialize(d)?
            .to_field()
            .map_err(serde::de::Error::custom)
    }
}

/// A decomposition without its input sequence, plus optional verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: Option<ExtractConfig<f64>>,
    pub sequence_len: usize,
    pub retained: Vec<usize>,
    pub stop: StopReason,
    pub input_bound: f64,
    pub groups: Vec<ProfileGroup<f64>>,
    pub diagnostics: Vec<Diagnostic>,
    pub verification: Option<VerificationReport<f64>>,
}

impl ReportFile {
    pub fn new(
        dec: &Decomposition<f64>,
        config: Option<ExtractConfig<f64>>,
        verification: Option<VerificationReport<f64>>,
    ) -> Self {
        ReportFile {
            config,
            sequence_len: dec.sequence.len(),
            retained: dec.retained.clone(),
            stop: dec.stop,
            input_bound: dec.input_bound,
            groups: dec.groups.clone(),
            diagnostics: dec.diagnostics.clone(),
            verification,
        }
    }

    /// Reattaches the input sequence.
    pub fn decomposition(&self, sequence: Vec<CoeffField<f64>>) -> Result<Decomposition<f64>> {
        if sequence.len() != self.sequence_len {
            return Err(Error::Input(format!(
                "report expects {} fields, found {}",
                self.sequence_len,
                sequence.len()
            )));
        }
        for g in &self.groups {
            if g.anchors.len() != self.sequence_len {
                return Err(Error::Input("anchor table length mismatch".into()));
            }
            for &n in &self.retained {
                if g.anchor(n).is_none() {
                    return Err(Error::Input(format!(
                        "missing anchor at retained position {n}"
                    )));
                }
            }
        }
        Ok(Decomposition {
            sequence,
            groups: self.groups.clone(),
            retained: self.retained.clone(),
            diagnostics: self.diagnostics.clone(),
            stop: self.stop,
            input_bound: self.input_bound,
        })
    }
}

/// On-disk form of a synthetic spec. The seed may be supplied on the command
/// line instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub dimension: usize,
    pub p: f64,
    pub profiles: Vec<Vec<EntryRecord>>,
    pub laws: Vec<ParamLaw>,
    #[serde(default)]
    pub noise: Option<NoiseSpec<f64>>,
    pub n_count: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SpecFile {
    pub fn to_spec(&self, seed_override: Option<u64>) -> Result<SyntheticSpec<f64>> {
        let seed = seed_override.or(self.seed).ok_or_else(|| {
            Error::InvalidSpec("a seed is required (spec field or --seed)".into())
        })?;
        let profiles = self
            .profiles
            .iter()
            .map(|entries| {
                FieldFile {
                    dimension: self.dimension,
                    p: self.p,
                    entries: entries.clone(),
                }
                .to_field()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SyntheticSpec {
            dim: self.dimension,
            p: self.p,
            profiles,
            laws: self.laws.clone(),
            noise: self.noise,
            n_count: self.n_count,
            seed,
        })
    }

    pub fn from_spec(spec: &SyntheticSpec<f64>) -> Self {
        SpecFile {
            dimension: spec.dim,
            p: spec.p,
            profiles: spec
                .profiles
                .iter()
                .map(|f| FieldFile::from(f).entries)
                .collect(),
            laws: spec.laws.clone(),
            noise: spec.noise,
            n_count: spec.n_count,
            seed: Some(spec.seed),
        }
    }
}

pub fn read_json<X: DeserializeOwned>(path: &Path) -> Result<X> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("cannot parse {}: {e}", path.display())))
}

pub fn to_json<X: Serialize>(value: &X) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<X: Serialize>(path: &Path, value: &X) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}
