//! Synthetic sequences with known profile decompositions.
//!
//! `u_n = sum_l tau_{l,n} phi_l + noise_n` for `n = 1..=n_count`, stored at
//! sequence position `n - 1`. Randomness (noise only) comes from ChaCha8
//! seeded with `seed`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{orthogonality_gap, DyadicAffine, DyadicVec, WaveletIndex};
use crate::error::{Error, Result};
use crate::extract::{Decomposition, Member, ProfileGroup, StopReason};
use crate::field::CoeffField;
use crate::norms::lp_tilde;
use crate::scalar::Scalar;

/// Parameter law `n -> (j_n, k_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ParamLaw {
    Constant {
        scale: i64,
        shift: Vec<i64>,
    },
    /// `j_n = scale`, `k_n = shift0 + n * velocity`.
    Translation {
        scale: i64,
        shift0: Vec<i64>,
        velocity: Vec<i64>,
    },
    /// `j_n = scale0 + step * n` with `step = ±1`, `k_n = shift`.
    GeometricScale {
        scale0: i64,
        step: i64,
        shift: Vec<i64>,
    },
    /// `j_n = scale0 + step * n` with `step` in `{-1, 0, 1}`,
    /// `k_n = shift0 + n * velocity`.
    Mixed {
        scale0: i64,
        step: i64,
        shift0: Vec<i64>,
        velocity: Vec<i64>,
    },
}

fn affine_shift(k0: &[i64], v: &[i64], n: i64) -> DyadicVec {
    let k = k0
        .iter()
        .zip(v)
        .map(|(&a, &b)| {
            b.checked_mul(n)
                .and_then(|x| x.checked_add(a))
                .expect("translation law overflow")
        })
        .collect();
    DyadicVec::integer(k)
}

impl ParamLaw {
    pub fn at(&self, n: i64) -> DyadicAffine {
        match self {
            ParamLaw::Constant { scale, shift } => {
                DyadicAffine::new(*scale, DyadicVec::integer(shift.clone()))
            }
            ParamLaw::Translation {
                scale,
                shift0,
                velocity,
            } => DyadicAffine::new(*scale, affine_shift(shift0, velocity, n)),
            ParamLaw::GeometricScale {
                scale0,
                step,
                shift,
            } => DyadicAffine::new(scale0 + step * n, DyadicVec::integer(shift.clone())),
            ParamLaw::Mixed {
                scale0,
                step,
                shift0,
                velocity,
            } => DyadicAffine::new(scale0 + step * n, affine_shift(shift0, velocity, n)),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let (dims, step_ok) = match self {
            ParamLaw::Constant { shift, .. } => (vec![shift.len()], true),
            ParamLaw::Translation {
                shift0, velocity, ..
            } => (vec![shift0.len(), velocity.len()], true),
            ParamLaw::GeometricScale { step, shift, .. } => (vec![shift.len()], step.abs() == 1),
            ParamLaw::Mixed {
                step,
                shift0,
                velocity,
                ..
            } => (vec![shift0.len(), velocity.len()], step.abs() <= 1),
        };
        if dims.iter().any(|&d| d != dim) {
            return Err(Error::InvalidSpec(format!(
                "law {self:?} has wrong dimension"
            )));
        }
        if !step_ok {
            return Err(Error::InvalidSpec(format!(
                "law {self:?} has an invalid scale step"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NoiseSpec<T> {
    /// Amplitudes are uniform in `[-epsilon, epsilon]`.
    pub epsilon: T,
    /// Entries per field.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec<T> {
    pub dim: usize,
    pub p: T,
    /// Profiles in their anchor frame; dyadic shifts allowed.
    pub profiles: Vec<CoeffField<T>>,
    pub laws: Vec<ParamLaw>,
    pub noise: Option<NoiseSpec<T>>,
    pub n_count: usize,
    pub seed: u64,
}

/// Largest `|scale|` and `|shift|` component drawn for noise entries.
const NOISE_SCALE_RANGE: i64 = 3;
const NOISE_SHIFT_RANGE: i64 = 64;

impl<T: Scalar> SyntheticSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_count < 2 {
            return Err(Error::InvalidSpec("n_count must be at least 2".into()));
        }
        if self.profiles.len() != self.laws.len() {
            return Err(Error::InvalidSpec(format!(
                "{} profiles but {} laws",
                self.profiles.len(),
                self.laws.len()
            )));
        }
        CoeffField::new(self.dim, self.p)?;
        for (l, (phi, law)) in self.profiles.iter().zip(&self.laws).enumerate() {
            if phi.is_empty() {
                return Err(Error::InvalidSpec(format!("profile {l} is empty")));
            }
            if phi.dim() != self.dim || phi.p() != self.p {
                return Err(Error::InvalidSpec(format!(
                    "profile {l} has wrong dimension or p"
                )));
            }
            law.validate(self.dim)?;
        }
        // Parameter sequences must separate: gaps strictly increase over the
        // second half of the generated range, in both directions.
        let from = (self.n_count / 2).max(1);
        for l in 0..self.laws.len() {
            for l2 in 0..self.laws.len() {
                if l == l2 {
                    continue;
                }
                let gaps: Vec<f64> = (from as i64..=self.n_count as i64)
                    .map(|n| orthogonality_gap(&self.laws[l].at(n), &self.laws[l2].at(n)))
                    .collect();
                if !gaps.windows(2).all(|g| g[0] < g[1]) {
                    return Err(Error::InvalidSpec(format!(
                        "parameter laws {l} and {l2} do not diverge (gaps {gaps:?})"
                    )));
                }
            }
        }
        if let Some(noise) = &self.noise {
            if !(noise.epsilon > T::zero() && noise.epsilon.is_finite()) {
                return Err(Error::InvalidSpec("noise epsilon must be positive".into()));
            }
        }
        Ok(())
    }

    fn placed_profiles(&self, n: i64) -> Result<CoeffField<T>> {
        let mut u = CoeffField::new(self.dim, self.p)?;
        for (l, (phi, law)) in self.profiles.iter().zip(&self.laws).enumerate() {
            let placed = phi.transform(&law.at(n))?;
            for (idx, &a) in &placed {
                if !idx.is_lattice() {
                    return Err(Error::InvalidSpec(format!(
                        "profile {l} lands off the lattice at n = {n}: {idx:?}"
                    )));
                }
                if u.get(idx).is_some() {
                    return Err(Error::InvalidSpec(format!(
                        "profiles collide at n = {n} on {idx:?}"
                    )));
                }
                u.set(idx.clone(), a)?;
            }
        }
        Ok(u)
    }
}

fn add_noise<T: Scalar>(
    u: &mut CoeffField<T>,
    noise: &NoiseSpec<T>,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let dim = u.dim();
    let max_gen = (1u32 << dim) - 1;
    let eps = noise.epsilon.as_f64();
    let mut added = 0;
    while added < noise.count {
        let gen = rng.gen_range(1..=max_gen);
        let scale = rng.gen_range(-NOISE_SCALE_RANGE..=NOISE_SCALE_RANGE);
        let k = (0..dim)
            .map(|_| rng.gen_range(-NOISE_SHIFT_RANGE..=NOISE_SHIFT_RANGE))
            .collect();
        let idx = WaveletIndex::lattice(gen, scale, k);
        let a = rng.gen_range(-eps..=eps);
        if a == 0.0 || u.get(&idx).is_some() {
            continue;
        }
        u.set(idx, T::of(a))?;
        added += 1;
    }
    Ok(())
}

/// Builds the sequence and its exact decomposition.
pub fn generate<T: Scalar>(
    spec: &SyntheticSpec<T>,
) -> Result<(Vec<CoeffField<T>>, Decomposition<T>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut fields = Vec::with_capacity(spec.n_count);
    for n in 1..=spec.n_count as i64 {
        let mut u = spec.placed_profiles(n)?;
        if let Some(noise) = &spec.noise {
            add_noise(&mut u, noise, &mut rng)?;
        }
        fields.push(u);
    }

    let mut rank = 0;
    let mut groups = Vec::new();
    for (phi, law) in spec.profiles.iter().zip(&spec.laws) {
        let anchors = (1..=spec.n_count as i64).map(|n| Some(law.at(n))).collect();
        let members = phi
            .rank()
            .0
            .into_iter()
            .map(|(idx, a)| {
                let m = Member {
                    gen: idx.gen,
                    relative: idx.frame(),
                    amplitude: a,
                    rank,
                };
                rank += 1;
                m
            })
            .collect();
        groups.push(ProfileGroup {
            anchors,
            members,
            profile: phi.clone(),
        });
    }
    let input_bound = fields.iter().map(lp_tilde).fold(T::zero(), T::max);
    let truth = Decomposition {
        sequence: fields.clone(),
        groups,
        retained: (0..spec.n_count).collect(),
        diagnostics: Vec::new(),
        stop: StopReason::Synthetic,
        input_bound,
    };
    Ok((fields, truth))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupMatch<T> {
    pub truth: usize,
    pub found: Option<usize>,
    /// `sigma` with `sigma phi_found = phi_truth`.
    pub sigma: Option<DyadicAffine>,
    pub max_amplitude_deviation: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentReport<T> {
    pub matches: Vec<GroupMatch<T>>,
    /// Found groups not matched to any truth group.
    pub unmatched_found: Vec<usize>,
}

impl<T: Scalar> AlignmentReport<T> {
    pub fn all_matched(&self) -> bool {
        self.unmatched_found.is_empty() && self.matches.iter().all(|m| m.found.is_some())
    }

    pub fn max_deviation(&self) -> T {
        self.matches
            .iter()
            .map(|m| m.max_amplitude_deviation)
            .fold(T::zero(), T::max)
    }
}

/// Tries to express `found` as `truth` moved into another frame.
///
/// Returns `sigma` and the largest amplitude deviation when the index sets
/// agree after `sigma` and `anchor_found(n) = sigma ∘ anchor_truth(n)` on
/// every position retained by both.
fn match_group<T: Scalar>(
    found: &ProfileGroup<T>,
    truth: &ProfileGroup<T>,
    positions: &[usize],
) -> Option<(DyadicAffine, T)> {
    let &n0 = positions.first()?;
    let sigma = truth.anchor(n0)?.invert().compose(found.anchor(n0)?);
    for &n in positions {
        let tf = found.anchor(n)?;
        let tt = truth.anchor(n)?;
        if &tt.compose(&sigma) != tf {
            return None;
        }
    }
    let moved = found.profile.transform(&sigma).ok()?;
    if moved.len() != truth.profile.len() {
        return None;
    }
    let mut dev = T::zero();
    for (idx, &a) in &moved {
        let b = truth.profile.get(idx)?;
        dev = dev.max((a - b).abs());
    }
    Some((sigma, dev))
}

/// Order-free matching of found groups to truth groups.
pub fn align_frames<T: Scalar>(
    found: &Decomposition<T>,
    truth: &Decomposition<T>,
) -> AlignmentReport<T> {
    let positions: Vec<usize> = found
        .retained
        .iter()
        .copied()
        .filter(|n| truth.is_retained(*n))
        .collect();
    let mut used = vec![false; found.groups.len()];
    let mut matches = Vec::new();
    for (t, tg) in truth.groups.iter().enumerate() {
        let mut best: Option<(usize, DyadicAffine, T)> = None;
        for (f, fg) in found.groups.iter().enumerate() {
            if used[f] {
                continue;
            }
            if let Some((sigma, dev)) = match_group(fg, tg, &positions) {
                if best.as_ref().is_none_or(|b| dev < b.2) {
                    best = Some((f, sigma, dev));
                }
            }
        }
        match best {
            Some((f, sigma, dev)) => {
                used[f] = true;
                matches.push(GroupMatch {
                    truth: t,
                    found: Some(f),
                    sigma: Some(sigma),
                    max_amplitude_deviation: dev,
                });
            }
            None => matches.push(GroupMatch {
                truth: t,
                found: None,
                sigma: None,
                max_amplitude_deviation: T::infinity(),
            }),
        }
    }
    AlignmentReport {
        matches,
        unmatched_found: (0..used.len()).filter(|&f| !used[f]).collect(),
    }
}
