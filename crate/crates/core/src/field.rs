//! Functions as finite wavelet expansions.

use std::collections::btree_map::{self, BTreeMap};

use crate::dyadic::{DyadicAffine, WaveletIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite expansion `u = sum a_lambda psi_lambda` in `d` dimensions with
/// reference exponent `p`.
///
/// No zero amplitudes are stored; entries iterate in index order.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffField<T> {
    dim: usize,
    p: T,
    entries: BTreeMap<WaveletIndex, T>,
}

fn max_gen(dim: usize) -> u64 {
    (1u64 << dim) - 1
}

impl<T: Scalar> CoeffField<T> {
    /// Empty field. `dim` must be in `1..=16`, `p` finite with `p >= 2`.
    pub fn new(dim: usize, p: T) -> Result<Self> {
        if dim == 0 || dim > 16 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(p.is_finite() && p >= T::of(2.0)) {
            return Err(Error::Param(format!(
                "reference exponent p = {p} needs 2 <= p < inf"
            )));
        }
        Ok(CoeffField {
            dim,
            p,
            entries: BTreeMap::new(),
        })
    }

    /// Builds a field, rejecting duplicate indices and zero amplitudes.
    pub fn from_entries<I>(dim: usize, p: T, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WaveletIndex, T)>,
    {
        let mut f = Self::new(dim, p)?;
        for (idx, a) in entries {
            f.check_index(&idx)?;
            if a == T::zero() || !a.is_finite() {
                return Err(Error::BadAmplitude(format!("{idx:?}")));
            }
            if f.entries.insert(idx.clone(), a).is_some() {
                return Err(Error::DuplicateIndex(format!("{idx:?}")));
            }
        }
        Ok(f)
    }

    fn check_index(&self, idx: &WaveletIndex) -> Result<()> {
        if idx.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: idx.dim(),
            });
        }
        if idx.gen == 0 || u64::from(idx.gen) > max_gen(self.dim) {
            return Err(Error::InvalidGenerator {
                gen: idx.gen,
                max: max_gen(self.dim),
                dim: self.dim,
            });
        }
        Ok(())
    }

    /// Sets the amplitude at `idx`; a zero amplitude removes the entry.
    pub fn set(&mut self, idx: WaveletIndex, a: T) -> Result<()> {
        self.check_index(&idx)?;
        if !a.is_finite() {
            return Err(Error::BadAmplitude(format!("{idx:?}")));
        }
        if a == T::zero() {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, a);
        }
        Ok(())
    }

    pub fn remove(&mut self, idx: &WaveletIndex) -> Option<T> {
        self.entries.remove(idx)
    }

    pub fn get(&self, idx: &WaveletIndex) -> Option<T> {
        self.entries.get(idx).copied()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, WaveletIndex, T> {
        self.entries.iter()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = T> + '_ {
        self.entries.values().copied()
    }

    /// True iff every shift is an integer vector.
    pub fn is_lattice(&self) -> bool {
        self.entries.keys().all(WaveletIndex::is_lattice)
    }

    /// Empty field with the same dimension and exponent.
    pub fn empty_like(&self) -> Self {
        CoeffField {
            dim: self.dim,
            p: self.p,
            entries: BTreeMap::new(),
        }
    }

    /// `tau f`: every index moved by `tau`, amplitudes unchanged.
    pub fn transform(&self, tau: &DyadicAffine) -> Result<Self> {
        if tau.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: tau.dim(),
            });
        }
        let entries = self
            .entries
            .iter()
            .map(|(idx, &a)| (tau.act_on_index(idx), a))
            .collect();
        Ok(CoeffField {
            dim: self.dim,
            p: self.p,
            entries,
        })
    }

    /// `alpha * self + beta * other`, dropping exact zeros.
    pub fn combine(&self, other: &Self, alpha: T, beta: T) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if other.p != self.p {
            return Err(Error::ExponentMismatch(self.p.as_f64(), other.p.as_f64()));
        }
        let mut out = self.empty_like();
        for (idx, &a) in &self.entries {
            out.entries.insert(idx.clone(), alpha * a);
        }
        for (idx, &b) in &other.entries {
            let v = out.entries.entry(idx.clone()).or_insert(T::zero());
            *v = *v + beta * b;
        }
        out.entries.retain(|_, v| *v != T::zero());
        Ok(out)
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.empty_like();
        if c != T::zero() {
            out.entries = self
                .entries
                .iter()
                .map(|(i, &a)| (i.clone(), c * a))
                .collect();
        }
        out
    }

    /// Largest-modulus entry, ties going to the smallest index.
    pub fn top(&self) -> Option<(&WaveletIndex, T)> {
        let mut best: Option<(&WaveletIndex, T)> = None;
        for (idx, &a) in &self.entries {
            match best {
                Some((_, b)) if a.abs() <= b.abs() => {}
                _ => best = Some((idx, a)),
            }
        }
        best
    }

    pub fn rank(&self) -> RankedOrder<T> {
        let mut v: Vec<(WaveletIndex, T)> =
            self.entries.iter().map(|(i, &a)| (i.clone(), a)).collect();
        // Stable sort on modulus keeps the index order among ties.
        v.sort_by(|x, y| {
            y.1.abs()
                .partial_cmp(&x.1.abs())
                .expect("finite amplitudes")
        });
        RankedOrder(v)
    }

    /// Nonlinear projection: `(P_N f, Q_N f)` with `P_N` the `n` top-ranked
    /// entries.
    pub fn split_top(&self, n: usize) -> (Self, Self) {
        let order = self.rank();
        let mut top = self.empty_like();
        let mut rest = self.clone();
        for (idx, a) in order.0.into_iter().take(n) {
            rest.entries.remove(&idx);
            top.entries.insert(idx, a);
        }
        (top, rest)
    }
}

impl<'a, T> IntoIterator for &'a CoeffField<T> {
    type Item = (&'a WaveletIndex, &'a T);
    type IntoIter = btree_map::Iter<'a, WaveletIndex, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Entries sorted by decreasing modulus; ties by `(scale, shift, gen)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedOrder<T>(pub Vec<(WaveletIndex, T)>);

impl<T> RankedOrder<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<&(WaveletIndex, T)> {
        self.0.first()
    }
}
