//! Exact arithmetic on the dyadic index lattice.
//!
//! Shifts are stored as dyadic-rational vectors `numerators / 2^denom_exp`,
//! normalized after every operation so that structural equality is value
//! equality. Integer overflow panics with a message naming the operation;
//! nothing in this module wraps silently.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Multiplies `x` by `2^k`, or `None` on overflow.
fn mul_pow2(x: i64, k: u32) -> Option<i64> {
    if x == 0 {
        return Some(0);
    }
    if k >= 63 {
        return None;
    }
    x.checked_mul(1i64 << k)
}

fn overflow(op: &str) -> ! {
    panic!("dyadic arithmetic overflow in {op}")
}

/// A vector of dyadic rationals `numerators / 2^denom_exp`.
///
/// Invariant: if `denom_exp > 0` at least one numerator is odd.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDyadicVec", into = "RawDyadicVec")]
pub struct DyadicVec {
    numerators: Vec<i64>,
    denom_exp: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDyadicVec {
    k: Vec<i64>,
    denom_exp: u32,
}

impl TryFrom<RawDyadicVec> for DyadicVec {
    type Error = String;

    fn try_from(raw: RawDyadicVec) -> Result<Self, Self::Error> {
        if raw.k.is_empty() {
            return Err("dyadic vector must have dimension >= 1".into());
        }
        Ok(DyadicVec::new(raw.k, raw.denom_exp))
    }
}

impl From<DyadicVec> for RawDyadicVec {
    fn from(v: DyadicVec) -> Self {
        RawDyadicVec {
            k: v.numerators,
            denom_exp: v.denom_exp,
        }
    }
}

impl DyadicVec {
    /// Builds `numerators / 2^denom_exp` and normalizes it.
    ///
    /// Panics if `numerators` is empty.
    pub fn new(numerators: Vec<i64>, denom_exp: u32) -> Self {
        assert!(!numerators.is_empty(), "dyadic vector needs dimension >= 1");
        let mut v = DyadicVec {
            numerators,
            denom_exp,
        };
        v.normalize();
        v
    }

    pub fn integer(k: Vec<i64>) -> Self {
        Self::new(k, 0)
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0; dim], 0)
    }

    fn normalize(&mut self) {
        if self.denom_exp == 0 {
            return;
        }
        let bits = self.numerators.iter().fold(0i64, |acc, &x| acc | x);
        if bits == 0 {
            self.denom_exp = 0;
            return;
        }
        let tz = bits.trailing_zeros().min(self.denom_exp);
        if tz > 0 {
            for x in &mut self.numerators {
                *x >>= tz;
            }
            self.denom_exp -= tz;
        }
    }

    pub fn dim(&self) -> usize {
        self.numerators.len()
    }

    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    pub fn is_integer(&self) -> bool {
        self.denom_exp == 0
    }

    pub fn is_zero(&self) -> bool {
        self.numerators.iter().all(|&x| x == 0)
    }

    /// Numerators rescaled to the common denominator `2^exp` (`exp >= denom_exp`).
    fn numerators_at(&self, exp: u32) -> impl Iterator<Item = i64> + '_ {
        let shift = exp - self.denom_exp;
        self.numerators
            .iter()
            .map(move |&x| mul_pow2(x, shift).unwrap_or_else(|| overflow("rescale")))
    }

    fn assert_same_dim(&self, other: &Self) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "dyadic vectors of different dimension"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_dim(other);
        let e = self.denom_exp.max(other.denom_exp);
        let nums = self
            .numerators_at(e)
            .zip(other.numerators_at(e))
            .map(|(a, b)| a.checked_add(b).unwrap_or_else(|| overflow("add")))
            .collect();
        Self::new(nums, e)
    }

    pub fn neg(&self) -> Self {
        let nums = self
            .numerators
            .iter()
            .map(|x| x.checked_neg().unwrap_or_else(|| overflow("neg")))
            .collect();
        Self::new(nums, self.denom_exp)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies every component by `2^j`.
    pub fn mul_pow2(&self, j: i64) -> Self {
        if j >= 0 {
            let j = u32::try_from(j).unwrap_or_else(|_| overflow("mul_pow2"));
            // Cancel against the denominator first.
            let cancel = j.min(self.denom_exp);
            let rest = j - cancel;
            let nums = self
                .numerators
                .iter()
                .map(|&x| mul_pow2(x, rest).unwrap_or_else(|| overflow("mul_pow2")))
                .collect();
            Self::new(nums, self.denom_exp - cancel)
        } else {
            let extra = u32::try_from(-j).unwrap_or_else(|_| overflow("mul_pow2"));
            let e = self
                .denom_exp
                .checked_add(extra)
                .unwrap_or_else(|| overflow("mul_pow2"));
            Self::new(self.numerators.clone(), e)
        }
    }

    pub fn component_f64(&self, c: usize) -> f64 {
        self.numerators[c] as f64 * (-(self.denom_exp as f64)).exp2()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.dim()).map(|c| self.component_f64(c)).collect()
    }

    pub fn norm2(&self) -> f64 {
        self.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Integer numerators at resolution `2^exp` (`exp >= denom_exp`), widened
    /// to `i128` for geometric work.
    pub(crate) fn scaled_i128(&self, exp: u32) -> Vec<i128> {
        let shift = exp - self.denom_exp;
        assert!(shift < 100, "dyadic resolution out of range");
        self.numerators
            .iter()
            .map(|&x| {
                (x as i128)
                    .checked_mul(1i128 << shift)
                    .unwrap_or_else(|| overflow("resolution"))
            })
            .collect()
    }

    fn cmp_component(&self, other: &Self, c: usize) -> Ordering {
        let e = self.denom_exp.max(other.denom_exp);
        let a = (self.numerators[c] as i128) << (e - self.denom_exp);
        let b = (other.numerators[c] as i128) << (e - other.denom_exp);
        a.cmp(&b)
    }
}

/// Lexicographic order on component values.
impl Ord for DyadicVec {
    fn cmp(&self, other: &Self) -> Ordering {
        for c in 0..self.dim().min(other.dim()) {
            match self.cmp_component(other, c) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl PartialOrd for DyadicVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for DyadicVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DyadicVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (c, x) in self.numerators.iter().enumerate() {
            if c > 0 {
                write!(f, ",")?;
            }
            if self.denom_exp == 0 {
                write!(f, "{x}")?;
            } else {
                write!(f, "{x}/2^{}", self.denom_exp)?;
            }
        }
        write!(f, ")")
    }
}

/// A point `(i, j, k)` of the index lattice.
///
/// Field order gives the derived ordering `(scale, shift, gen)`, which is the
/// tie-break used when ranking coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveletIndex {
    pub scale: i64,
    pub shift: DyadicVec,
    pub gen: u32,
}

impl WaveletIndex {
    pub fn new(gen: u32, scale: i64, shift: DyadicVec) -> Self {
        WaveletIndex { scale, shift, gen }
    }

    /// Index with integer shift.
    pub fn lattice(gen: u32, scale: i64, k: Vec<i64>) -> Self {
        Self::new(gen, scale, DyadicVec::integer(k))
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }

    pub fn is_lattice(&self) -> bool {
        self.shift.is_integer()
    }

    /// Scale and shift as the affine map `x -> 2^j x - k` sending the cube of
    /// this index onto the unit cube.
    pub fn frame(&self) -> DyadicAffine {
        DyadicAffine::new(self.scale, self.shift.clone())
    }
}

impl fmt::Debug for WaveletIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.gen, self.scale, self.shift)
    }
}

/// The cube `{x : 2^j x - k in [0,1)^d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    pub scale: i64,
    pub corner: DyadicVec,
}

impl DyadicCube {
    pub fn dim(&self) -> usize {
        self.corner.dim()
    }

    /// Side length `2^{-j}`.
    pub fn side(&self) -> f64 {
        (-(self.scale as f64)).exp2()
    }

    /// Volume `2^{-dj}`.
    pub fn volume(&self) -> f64 {
        (-(self.scale as f64) * self.dim() as f64).exp2()
    }

    /// Lower corner in space, `2^{-j} k`.
    pub fn lower(&self) -> Vec<f64> {
        self.corner.mul_pow2(-self.scale).to_f64()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let a = (self.scale as f64).exp2();
        x.iter().enumerate().all(|(c, &xc)| {
            let y = a * xc - self.corner.component_f64(c);
            (0.0..1.0).contains(&y)
        })
    }
}

pub fn cube_of(idx: &WaveletIndex) -> DyadicCube {
    DyadicCube {
        scale: idx.scale,
        corner: idx.shift.clone(),
    }
}

/// The map `tau(x) = 2^j x - k`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicAffine {
    pub scale: i64,
    pub shift: DyadicVec,
}

impl DyadicAffine {
    pub fn new(scale: i64, shift: DyadicVec) -> Self {
        DyadicAffine { scale, shift }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(0, DyadicVec::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 0 && self.shift.is_zero()
    }

    /// `tau2 ∘ tau1`: first `self`, then `then`.
    ///
    /// Scale `j1 + j2`, shift `2^{j2} k1 + k2`.
    pub fn compose(&self, then: &DyadicAffine) -> DyadicAffine {
        let scale = self
            .scale
            .checked_add(then.scale)
            .unwrap_or_else(|| overflow("compose"));
        let shift = self.shift.mul_pow2(then.scale).add(&then.shift);
        DyadicAffine::new(scale, shift)
    }

    /// Scale `-j`, shift `-2^{-j} k`.
    pub fn invert(&self) -> DyadicAffine {
        let scale = self
            .scale
            .checked_neg()
            .unwrap_or_else(|| overflow("invert"));
        DyadicAffine::new(scale, self.shift.mul_pow2(scale).neg())
    }

    /// `|j| + ||2^{-j} k||_2`, logarithm taken base 2.
    pub fn magnitude(&self) -> f64 {
        self.scale.unsigned_abs() as f64 + self.shift.mul_pow2(-self.scale).norm2()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let a = (self.scale as f64).exp2();
        x.iter()
            .enumerate()
            .map(|(c, &xc)| a * xc - self.shift.component_f64(c))
            .collect()
    }

    /// Index of `tau psi_lambda` in the transformed expansion:
    /// `(i, j_tau + j, 2^j k_tau + k)`.
    pub fn act_on_index(&self, idx: &WaveletIndex) -> WaveletIndex {
        assert_eq!(
            self.dim(),
            idx.dim(),
            "map and index of different dimension"
        );
        let scale = self
            .scale
            .checked_add(idx.scale)
            .unwrap_or_else(|| overflow("act_on_index"));
        let shift = self.shift.mul_pow2(idx.scale).add(&idx.shift);
        WaveletIndex::new(idx.gen, scale, shift)
    }
}

impl fmt::Debug for DyadicAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ(j={}, k={})", self.scale, self.shift)
    }
}

/// `|j_a - j_b| + ||2^{j_a - j_b} k_b - k_a||_2`.
pub fn orthogonality_gap(a: &DyadicAffine, b: &DyadicAffine) -> f64 {
    let dj = a
        .scale
        .checked_sub(b.scale)
        .unwrap_or_else(|| overflow("orthogonality_gap"));
    dj.unsigned_abs() as f64 + b.shift.mul_pow2(dj).sub(&a.shift).norm2()
}
