//! Profile decomposition of a finite sequence of coefficient fields.
//!
//! Each iterate removes the largest remaining coefficient of every retained
//! `u_n` and decides, on the last `tail_window` retained indices, whether its
//! frame is a constant relative map away from an existing profile (the
//! coefficient joins that profile) or diverges from all of them (a new
//! profile starts). Infinite "pass to a subsequence" steps become explicit
//! pruning of the retained index set, and every pruning is recorded.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cells;
use crate::dyadic::{orthogonality_gap, DyadicAffine, DyadicVec, WaveletIndex};
use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::norms::{besov_tilde, ell_norm, lp_tilde, sup_tilde, BesovParams};
use crate::scalar::Scalar;

/// Absolute slack for the stability inequalities.
pub const STABILITY_SLACK: f64 = 1e-9;

/// Input space of the sequence and the space in which remainders are small.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound = "T: Scalar")]
pub enum Space<T> {
    /// Bounded in `L^p`; remainders measured in `B^{s_{p,r}}_{r,q}`,
    /// `2 <= p < q, r <= inf`.
    Lp {
        p: T,
        #[serde(with = "crate::io::ext_real")]
        q: T,
        #[serde(with = "crate::io::ext_real")]
        r: T,
    },
    /// Bounded in `B^{s_{p,a}}_{a,q}`; remainders measured in
    /// `B^{s_{p,b}}_{b,r}`, `1 <= a < b <= inf`, `q <= r`, `r >= (b/a) q`.
    Besov {
        p: T,
        a: T,
        #[serde(with = "crate::io::ext_real")]
        q: T,
        #[serde(with = "crate::io::ext_real")]
        b: T,
        #[serde(with = "crate::io::ext_real")]
        r: T,
    },
}

impl<T: Scalar> Space<T> {
    pub fn p(&self) -> T {
        match *self {
            Space::Lp { p, .. } | Space::Besov { p, .. } => p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        match *self {
            Space::Lp { p, q, r } => {
                if !(p.is_finite() && p >= T::of(2.0) && q > p && r > p) {
                    return Err(Error::Param(format!(
                        "L^p mode needs 2 <= p < q, r (p = {p}, q = {q}, r = {r})"
                    )));
                }
            }
            Space::Besov { p, a, q, b, r } => {
                let ok = p.is_finite()
                    && p >= T::of(2.0)
                    && a.is_finite()
                    && a >= one
                    && b > a
                    && q >= one
                    && r >= q
                    && r >= b / a * q;
                if !ok {
                    return Err(Error::Param(format!(
                        "Besov mode needs 1 <= a < b, 1 <= q <= r, r >= (b/a) q \
                         (a = {a}, q = {q}, b = {b}, r = {r})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Norm in which the sequence is assumed bounded.
    pub fn input_norm(&self, f: &CoeffField<T>) -> T {
        match *self {
            Space::Lp { .. } => lp_tilde(f),
            Space::Besov { p, a, q, .. } => besov_tilde(f, &critical(f.dim(), p, a, q)),
        }
    }

    /// Norm in which remainders become small.
    pub fn remainder_norm(&self, f: &CoeffField<T>) -> T {
        match *self {
            Space::Lp { p, q, r } => besov_tilde(f, &critical(f.dim(), p, r, q)),
            Space::Besov { p, b, r, .. } => besov_tilde(f, &critical(f.dim(), p, b, r)),
        }
    }

    /// Exponent used to aggregate per-profile norms in the stability bound:
    /// `p` in `L^p` mode (sum of `p`-th powers), `max{a, q}` in Besov mode.
    pub fn aggregation_exponent(&self) -> T {
        match *self {
            Space::Lp { p, .. } => p,
            Space::Besov { a, q, .. } => a.max(q),
        }
    }
}

fn critical<T: Scalar>(dim: usize, p: T, a: T, b: T) -> BesovParams<T> {
    BesovParams::critical(dim, p, a, b).expect("validated exponents")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ExtractConfig<T> {
    pub max_iterations: usize,
    pub tail_window: usize,
    pub conv_tol: T,
    pub bound_threshold: T,
    pub stop_epsilon: T,
    pub space: Space<T>,
}

impl<T: Scalar> ExtractConfig<T> {
    /// Defaults for `L^p` input with remainders in `B^{s_{p,2p}}_{2p,2p}`.
    pub fn lp(p: T) -> Self {
        let two_p = p * T::of(2.0);
        ExtractConfig {
            max_iterations: 64,
            tail_window: 4,
            conv_tol: T::of(1e-6),
            bound_threshold: T::of(8.0),
            stop_epsilon: T::of(1e-6),
            space: Space::Lp {
                p,
                q: two_p,
                r: two_p,
            },
        }
    }

    pub fn with_space(mut self, space: Space<T>) -> Self {
        self.space = space;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tail_window < 2 {
            return Err(Error::Param("tail window must be at least 2".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Param("max_iterations must be at least 1".into()));
        }
        for (name, v) in [
            ("conv_tol", self.conv_tol),
            ("bound_threshold", self.bound_threshold),
            ("stop_epsilon", self.stop_epsilon),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Param(format!("{name} must be positive and finite")));
            }
        }
        self.space.validate()
    }
}

/// One extracted coefficient, expressed in its profile's frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Member<T> {
    pub gen: u32,
    /// Constant relative map from the profile anchor to this coefficient.
    pub relative: DyadicAffine,
    /// Limit amplitude.
    pub amplitude: T,
    /// Extraction rank (global iteration count at which it was found).
    pub rank: usize,
}

impl<T> Member<T> {
    /// Position of this member inside the profile.
    pub fn profile_index(&self) -> WaveletIndex {
        let dim = self.relative.dim();
        self.relative
            .act_on_index(&WaveletIndex::new(self.gen, 0, DyadicVec::zero(dim)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProfileGroup<T> {
    /// `(j_n, k_n)` per sequence position; `None` where the position was not
    /// retained when the profile started.
    pub anchors: Vec<Option<DyadicAffine>>,
    pub members: Vec<Member<T>>,
    pub profile: CoeffField<T>,
}

impl<T: Scalar> ProfileGroup<T> {
    pub fn anchor(&self, n: usize) -> Option<&DyadicAffine> {
        self.anchors.get(n).and_then(Option::as_ref)
    }

    /// `tau_{l,n} phi_l`.
    pub fn placed(&self, n: usize) -> Result<CoeffField<T>> {
        let tau = self
            .anchor(n)
            .ok_or_else(|| Error::OutOfRange(format!("no anchor at position {n}")))?;
        self.profile.transform(tau)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    EmptyResidual,
    GeneratorMismatch,
    RelativeMapMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Tail amplitudes spread more than `conv_tol`.
    NonConvergentAmplitude {
        rank: usize,
        spread: f64,
    },
    /// Relative maps neither constant nor divergent on the tail; a new
    /// profile was started.
    OscillatingRelativeMap {
        rank: usize,
        groups: Vec<usize>,
    },
    Pruned {
        rank: usize,
        reason: PruneReason,
        positions: Vec<usize>,
    },
    /// Fewer than `tail_window` positions remain.
    WindowExhausted {
        rank: usize,
    },
    MaxIterationsReached {
        rank: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Residual sup-norm below `stop_epsilon` on the tail.
    Converged,
    MaxIterations,
    WindowExhausted,
    /// Ground truth built by the synthetic generator.
    Synthetic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<T> {
    pub sequence: Vec<CoeffField<T>>,
    pub groups: Vec<ProfileGroup<T>>,
    /// Positions surviving all pruning, ascending.
    pub retained: Vec<usize>,
    pub diagnostics: Vec<Diagnostic>,
    pub stop: StopReason,
    /// `max_n` of the input-space norm.
    pub input_bound: T,
}

impl<T: Scalar> Decomposition<T> {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn is_retained(&self, n: usize) -> bool {
        self.retained.binary_search(&n).is_ok()
    }

    /// The last `w` retained positions.
    pub fn tail(&self, w: usize) -> &[usize] {
        &self.retained[self.retained.len().saturating_sub(w)..]
    }

    fn check(&self, level: usize, n: usize) -> Result<()> {
        if level > self.groups.len() {
            return Err(Error::OutOfRange(format!(
                "L = {level} exceeds group count {}",
                self.groups.len()
            )));
        }
        if !self.is_retained(n) {
            return Err(Error::OutOfRange(format!("position {n} is not retained")));
        }
        Ok(())
    }

    /// `sum_{l < level} tau_{l,n} phi_l`.
    pub fn reconstruct(&self, level: usize, n: usize) -> Result<CoeffField<T>> {
        self.check(level, n)?;
        let mut acc = self.sequence[n].empty_like();
        for g in &self.groups[..level] {
            acc = acc.combine(&g.placed(n)?, T::one(), T::one())?;
        }
        Ok(acc)
    }

    /// `r_n^L = u_n - reconstruct(L, n)`.
    pub fn remainder(&self, level: usize, n: usize) -> Result<CoeffField<T>> {
        let rec = self.reconstruct(level, n)?;
        self.sequence[n].combine(&rec, T::one(), -T::one())
    }

    /// Coefficients removed from `u_n`, in extraction order, with the actual
    /// (not limit) amplitudes.
    pub fn extracted(&self, n: usize) -> Result<Vec<(usize, WaveletIndex, T)>> {
        self.check(0, n)?;
        let mut out = Vec::new();
        for g in &self.groups {
            let tau = g
                .anchor(n)
                .ok_or_else(|| Error::OutOfRange(format!("no anchor at position {n}")))?;
            for m in &g.members {
                let idx = tau.act_on_index(&m.profile_index());
                let a = self.sequence[n].get(&idx).unwrap_or(T::zero());
                out.push((m.rank, idx, a));
            }
        }
        out.sort_by_key(|e| e.0);
        Ok(out)
    }

    /// `u_n^N`: `u_n` with its first `iterations` extracted coefficients
    /// removed.
    pub fn residual(&self, n: usize, iterations: usize) -> Result<CoeffField<T>> {
        let mut r = self.sequence[n].clone();
        for (rank, idx, _) in self.extracted(n)? {
            if rank < iterations {
                r.remove(&idx);
            }
        }
        Ok(r)
    }
}

fn prune(retained: &mut Vec<usize>, drop: &[usize]) {
    retained.retain(|n| !drop.contains(n));
}

/// Limit of tail amplitudes: their mean, exact when they agree.
fn tail_limit<T: Scalar>(values: &[T]) -> (T, T) {
    let x0 = values[0];
    let w = T::of(values.len() as f64);
    let mean = x0 + values.iter().map(|&x| (x - x0) / w).sum::<T>();
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    (mean, hi - lo)
}

pub fn extract_profiles<T: Scalar>(
    seq: &[CoeffField<T>],
    cfg: &ExtractConfig<T>,
) -> Result<Decomposition<T>> {
    cfg.validate()?;
    let first = seq.first().ok_or(Error::EmptySequence)?;
    let (dim, p) = (first.dim(), first.p());
    for (n, f) in seq.iter().enumerate() {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: f.dim(),
            });
        }
        if f.p() != p {
            return Err(Error::ExponentMismatch(p.as_f64(), f.p().as_f64()));
        }
        if !f.is_lattice() {
            return Err(Error::NonLattice(n));
        }
    }
    if cfg.space.p() != p {
        return Err(Error::ExponentMismatch(p.as_f64(), cfg.space.p().as_f64()));
    }
    let w = cfg.tail_window;
    if w > seq.len() {
        return Err(Error::WindowTooLarge {
            window: w,
            len: seq.len(),
        });
    }
    let input_bound = seq
        .iter()
        .map(|f| cfg.space.input_norm(f))
        .fold(T::zero(), T::max);

    let mut residual: Vec<CoeffField<T>> = seq.to_vec();
    let mut retained: Vec<usize> = (0..seq.len()).collect();
    let mut groups: Vec<ProfileGroup<T>> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut rank = 0usize;

    let stop = loop {
        if rank == cfg.max_iterations {
            diagnostics.push(Diagnostic::MaxIterationsReached { rank });
            break StopReason::MaxIterations;
        }
        if retained.len() < w {
            diagnostics.push(Diagnostic::WindowExhausted { rank });
            break StopReason::WindowExhausted;
        }
        let tail_sup = retained[retained.len() - w..]
            .iter()
            .map(|&n| sup_tilde(&residual[n]))
            .fold(T::zero(), T::max);
        if tail_sup <= cfg.stop_epsilon {
            break StopReason::Converged;
        }

        let mut tops: BTreeMap<usize, (WaveletIndex, T)> = BTreeMap::new();
        let mut empty = Vec::new();
        for &n in &retained {
            match residual[n].top() {
                Some((idx, a)) => {
                    tops.insert(n, (idx.clone(), a));
                }
                None => empty.push(n),
            }
        }
        if !empty.is_empty() {
            prune(&mut retained, &empty);
            diagnostics.push(Diagnostic::Pruned {
                rank,
                reason: PruneReason::EmptyResidual,
                positions: empty,
            });
            continue;
        }

        let tail: Vec<usize> = retained[retained.len() - w..].to_vec();
        let mut gen_count: BTreeMap<u32, usize> = BTreeMap::new();
        for n in &tail {
            *gen_count.entry(tops[n].0.gen).or_default() += 1;
        }
        // Most frequent generator on the tail; smallest generator on ties.
        let gen = gen_count
            .iter()
            .fold(
                (0u32, 0usize),
                |best, (&g, &c)| if c > best.1 { (g, c) } else { best },
            )
            .0;
        let off_gen: Vec<usize> = retained
            .iter()
            .copied()
            .filter(|n| tops[n].0.gen != gen)
            .collect();
        if !off_gen.is_empty() {
            prune(&mut retained, &off_gen);
            diagnostics.push(Diagnostic::Pruned {
                rank,
                reason: PruneReason::GeneratorMismatch,
                positions: off_gen,
            });
            if retained.len() < w {
                continue;
            }
        }
        let tail: Vec<usize> = retained[retained.len() - w..].to_vec();

        let tail_amps: Vec<T> = tail.iter().map(|n| tops[n].1).collect();
        let (limit, spread) = tail_limit(&tail_amps);
        if spread > cfg.conv_tol {
            diagnostics.push(Diagnostic::NonConvergentAmplitude {
                rank,
                spread: spread.as_f64(),
            });
        }

        let frames: BTreeMap<usize, DyadicAffine> =
            retained.iter().map(|&n| (n, tops[&n].0.frame())).collect();
        let mut attach: Option<(usize, DyadicAffine, BTreeMap<usize, DyadicAffine>)> = None;
        let mut undecided = Vec::new();
        for (l, g) in groups.iter().enumerate() {
            let rel: BTreeMap<usize, DyadicAffine> = retained
                .iter()
                .map(|&n| {
                    let anchor = g.anchor(n).expect("anchors cover retained positions");
                    (n, anchor.invert().compose(&frames[&n]))
                })
                .collect();
            let first_rel = &rel[&tail[0]];
            let constant = tail.iter().all(|n| &rel[n] == first_rel);
            if constant && T::of(first_rel.magnitude()) <= cfg.bound_threshold {
                attach = Some((l, first_rel.clone(), rel));
                break;
            }
            let mags: Vec<f64> = tail.iter().map(|n| rel[n].magnitude()).collect();
            let nondecreasing = mags.windows(2).all(|m| m[0] <= m[1]);
            let large = T::of(*mags.last().expect("tail nonempty")) > cfg.bound_threshold;
            if !(nondecreasing || large) {
                undecided.push(l);
            }
        }

        match attach {
            Some((l, relative, rel)) => {
                let mismatched: Vec<usize> = retained
                    .iter()
                    .copied()
                    .filter(|n| rel[n] != relative)
                    .collect();
                if !mismatched.is_empty() {
                    prune(&mut retained, &mismatched);
                    diagnostics.push(Diagnostic::Pruned {
                        rank,
                        reason: PruneReason::RelativeMapMismatch,
                        positions: mismatched,
                    });
                }
                let member = Member {
                    gen,
                    relative,
                    amplitude: limit,
                    rank,
                };
                let at = member.profile_index();
                let g = &mut groups[l];
                if g.profile.get(&at).is_some() {
                    return Err(Error::Internal(format!(
                        "profile {l} already holds index {at:?}"
                    )));
                }
                g.profile.set(at, limit)?;
                g.members.push(member);
            }
            None => {
                if !undecided.is_empty() {
                    diagnostics.push(Diagnostic::OscillatingRelativeMap {
                        rank,
                        groups: undecided,
                    });
                }
                let mut anchors = vec![None; seq.len()];
                for &n in &retained {
                    anchors[n] = Some(frames[&n].clone());
                }
                let member = Member {
                    gen,
                    relative: DyadicAffine::identity(dim),
                    amplitude: limit,
                    rank,
                };
                let mut profile = CoeffField::new(dim, p)?;
                profile.set(member.profile_index(), limit)?;
                groups.push(ProfileGroup {
                    anchors,
                    members: vec![member],
                    profile,
                });
            }
        }

        for &n in &retained {
            residual[n].remove(&tops[&n].0);
        }
        rank += 1;
    };

    Ok(Decomposition {
        sequence: seq.to_vec(),
        groups,
        retained,
        diagnostics,
        stop,
        input_bound,
    })
}

/// `∫ S_a(x) S_b(x)^{p/2 - 1} dx` for the square functions of two fields;
/// zero when `p = 2`.
pub fn cross_interaction_fields<T: Scalar>(a: &CoeffField<T>, b: &CoeffField<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.p() != b.p() {
        return Err(Error::ExponentMismatch(a.p().as_f64(), b.p().as_f64()));
    }
    let p = a.p();
    if p < T::of(2.0) {
        return Err(Error::Param(format!(
            "cross interaction needs p >= 2, got {p}"
        )));
    }
    if p == T::of(2.0) {
        return Ok(T::zero());
    }
    let e = p / T::of(2.0) - T::one();
    Ok(cells::integrate(&[a, b], |s| s[0] * s[1].powf(e)))
}

/// `I^{l,l'}(n)` between the placed profiles `l` and `l2` at position `n`.
pub fn cross_interaction<T: Scalar>(
    dec: &Decomposition<T>,
    l: usize,
    l2: usize,
    n: usize,
) -> Result<T> {
    if l == l2 {
        return Err(Error::Param(
            "cross interaction needs distinct profiles".into(),
        ));
    }
    let count = dec.group_count();
    if l >= count || l2 >= count {
        return Err(Error::OutOfRange(format!("profile index out of {count}")));
    }
    dec.check(0, n)?;
    cross_interaction_fields(&dec.groups[l].placed(n)?, &dec.groups[l2].placed(n)?)
}

/// Closed bounding box of the union of cubes of a field, per axis.
fn bounding_box<T: Scalar>(f: &CoeffField<T>) -> Option<Vec<(f64, f64)>> {
    let mut bb: Option<Vec<(f64, f64)>> = None;
    for (idx, _) in f {
        let cube = crate::dyadic::cube_of(idx);
        let lo = cube.lower();
        let side = cube.side();
        let b = bb.get_or_insert_with(|| vec![(f64::INFINITY, f64::NEG_INFINITY); lo.len()]);
        for (c, x) in lo.into_iter().enumerate() {
            b[c].0 = b[c].0.min(x);
            b[c].1 = b[c].1.max(x + side);
        }
    }
    bb
}

fn boxes_disjoint(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    a.iter().zip(b).any(|(x, y)| x.1 <= y.0 || y.1 <= x.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GapTable<T> {
    pub pair: (usize, usize),
    /// `(position, gap)` over retained positions.
    pub values: Vec<(usize, T)>,
    pub nondecreasing_on_tail: bool,
    pub strictly_increasing_on_tail: bool,
    pub final_value: T,
    /// Nondecreasing on the tail and final value at least `bound_threshold`.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RemainderTable<T> {
    /// Number of profiles subtracted.
    pub level: usize,
    /// `(position, ||r_n^L||~)` in the remainder space.
    pub norms: Vec<(usize, T)>,
    /// Maximum over the tail: finite stand-in for `limsup_n`.
    pub tail_max: T,
    /// `(position, ||r_n^L||~ - ||u_n||~)` in the input space.
    pub margins: Vec<(usize, T)>,
    /// Largest margin on the tail, clamped below at zero.
    pub tail_margin: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StabilityReport<T> {
    /// Input-space norm of each profile in its own frame.
    pub profile_norms: Vec<T>,
    /// Aggregated placed-profile norms per tail position: sum of `p`-th powers
    /// in `L^p` mode, `l^{max(a,q)}` norm in Besov mode.
    pub aggregate: Vec<(usize, T)>,
    /// Tail minimum of `||u_n||~^p` (`L^p`) or `||u_n||~` (Besov).
    pub bound: T,
    pub pass: bool,
    /// Every profile norm is at most the tail minimum of `||u_n||~`.
    pub profiles_bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CrossTable<T> {
    pub pair: (usize, usize),
    /// `(position, I^{l,l'}(n))` over retained positions.
    pub values: Vec<(usize, T)>,
    /// First retained position from which the bounding boxes of the two placed
    /// profiles stay disjoint.
    pub separation_index: Option<usize>,
    pub vanishes_after_separation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VerificationReport<T> {
    pub gaps: Vec<GapTable<T>>,
    pub remainders: Vec<RemainderTable<T>>,
    /// Per-level tail maxima are nonincreasing in the level.
    pub remainder_trend_nonincreasing: bool,
    pub stability: StabilityReport<T>,
    pub cross: Vec<CrossTable<T>>,
    /// `sum_m |a_m|^p` over all limit amplitudes.
    pub amplitude_sum: T,
    /// `max_n ||u_n||~_{L^p}^p`.
    pub amplitude_sum_bound: T,
}

impl<T: Scalar> VerificationReport<T> {
    pub fn gaps_pass(&self) -> bool {
        self.gaps.iter().all(|g| g.pass)
    }
}

fn tail_of<X: Copy>(values: &[(usize, X)], tail: &[usize]) -> Vec<X> {
    values
        .iter()
        .filter(|(n, _)| tail.contains(n))
        .map(|&(_, v)| v)
        .collect()
}

pub fn verify<T: Scalar>(
    dec: &Decomposition<T>,
    cfg: &ExtractConfig<T>,
) -> Result<VerificationReport<T>> {
    let tail = dec.tail(cfg.tail_window).to_vec();
    let space = cfg.space;
    let count = dec.group_count();
    let pairs: Vec<(usize, usize)> = (0..count)
        .flat_map(|l| (l + 1..count).map(move |l2| (l, l2)))
        .collect();

    let mut gaps = Vec::new();
    for &(l, l2) in &pairs {
        let values: Vec<(usize, T)> = dec
            .retained
            .iter()
            .map(|&n| {
                let a = dec.groups[l]
                    .anchor(n)
                    .expect("anchor on retained position");
                let b = dec.groups[l2]
                    .anchor(n)
                    .expect("anchor on retained position");
                (n, T::of(orthogonality_gap(a, b)))
            })
            .collect();
        let t = tail_of(&values, &tail);
        let nondecreasing = t.windows(2).all(|v| v[0] <= v[1]);
        let strictly = t.windows(2).all(|v| v[0] < v[1]);
        let final_value = t.last().copied().unwrap_or(T::zero());
        gaps.push(GapTable {
            pair: (l, l2),
            values,
            nondecreasing_on_tail: nondecreasing,
            strictly_increasing_on_tail: strictly,
            final_value,
            pass: nondecreasing && final_value >= cfg.bound_threshold,
        });
    }

    let input_norms: BTreeMap<usize, T> = dec
        .retained
        .iter()
        .map(|&n| (n, space.input_norm(&dec.sequence[n])))
        .collect();
    let mut remainders = Vec::new();
    for level in 0..=count {
        let mut norms = Vec::new();
        let mut margins = Vec::new();
        for &n in &dec.retained {
            let r = dec.remainder(level, n)?;
            norms.push((n, space.remainder_norm(&r)));
            margins.push((n, space.input_norm(&r) - input_norms[&n]));
        }
        let tail_max = tail_of(&norms, &tail).into_iter().fold(T::zero(), T::max);
        let tail_margin = tail_of(&margins, &tail).into_iter().fold(T::zero(), T::max);
        remainders.push(RemainderTable {
            level,
            norms,
            tail_max,
            margins,
            tail_margin,
        });
    }
    let remainder_trend_nonincreasing = remainders
        .windows(2)
        .all(|w| w[1].tail_max <= w[0].tail_max * (T::one() + crate::norms::rel_tol()));

    let profile_norms: Vec<T> = dec
        .groups
        .iter()
        .map(|g| space.input_norm(&g.profile))
        .collect();
    let e = space.aggregation_exponent();
    let lp_mode = matches!(space, Space::Lp { .. });
    let mut aggregate = Vec::new();
    for &n in &tail {
        let placed: Vec<T> = dec
            .groups
            .iter()
            .map(|g| g.placed(n).map(|f| space.input_norm(&f)))
            .collect::<Result<_>>()?;
        let v = if lp_mode {
            placed.iter().map(|x| x.powf(e)).sum()
        } else {
            ell_norm(placed, e)
        };
        aggregate.push((n, v));
    }
    let tail_min_input = tail
        .iter()
        .map(|n| input_norms[n])
        .fold(T::infinity(), T::min);
    let bound = if lp_mode {
        tail_min_input.powf(e)
    } else {
        tail_min_input
    };
    let slack = T::of(STABILITY_SLACK);
    let stability = StabilityReport {
        pass: aggregate.iter().all(|&(_, v)| v <= bound + slack),
        profiles_bounded: profile_norms.iter().all(|&x| x <= tail_min_input + slack),
        profile_norms,
        aggregate,
        bound,
    };

    let mut cross = Vec::new();
    for &(l, l2) in &pairs {
        let mut values = Vec::new();
        let mut separation_index = None;
        for &n in &dec.retained {
            let a = dec.groups[l].placed(n)?;
            let b = dec.groups[l2].placed(n)?;
            values.push((n, cross_interaction_fields(&a, &b)?));
            let disjoint = match (bounding_box(&a), bounding_box(&b)) {
                (Some(x), Some(y)) => boxes_disjoint(&x, &y),
                _ => true,
            };
            match (disjoint, separation_index) {
                (true, None) => separation_index = Some(n),
                (false, _) => separation_index = None,
                _ => {}
            }
        }
        let vanishes_after_separation = separation_index
            .map(|s| {
                values
                    .iter()
                    .filter(|(n, _)| *n >= s)
                    .all(|(_, v)| *v == T::zero())
            })
            .unwrap_or(false);
        cross.push(CrossTable {
            pair: (l, l2),
            values,
            separation_index,
            vanishes_after_separation,
        });
    }

    let p = dec.sequence.first().map(|f| f.p()).unwrap_or(T::of(2.0));
    let amplitude_sum = dec
        .groups
        .iter()
        .flat_map(|g| g.members.iter().map(|m| m.amplitude.abs().powf(p)))
        .sum();
    let amplitude_sum_bound = dec
        .retained
        .iter()
        .map(|&n| lp_tilde(&dec.sequence[n]).powf(p))
        .fold(T::zero(), T::max);

    Ok(VerificationReport {
        gaps,
        remainders,
        remainder_trend_nonincreasing,
        stability,
        cross,
        amplitude_sum,
        amplitude_sum_bound,
    })
}
