//! Wavelet-side ("tilde") norms computed exactly from coefficients, and the
//! coefficient-level embedding and interpolation checks.
//!
//! With amplitudes normalized so that `psi_lambda` carries the `L^p` scaling,
//!
//! * `lp_tilde(f) = || (sum |a|^2 2^{2dj/p} chi_cube)^{1/2} ||_{L^p}`,
//! * `besov_tilde(f, (s, a, b)) = || 2^{j(s + d(1/p - 1/a))} ||a_{j,.}||_{l^a} ||_{l^b}`,
//! * `sup_tilde(f) = sup |a|`.
//!
//! `lp_tilde` integrates the square function over the exact cell arrangement
//! (see `cells`); its only error is floating-point rounding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cells;
use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::scalar::Scalar;

/// Relative slack for inequalities that hold exactly in real arithmetic.
pub fn rel_tol<T: Scalar>() -> T {
    T::of(1e-12).max(T::epsilon() * T::of(16.0))
}

/// `(s, a, b)` of a homogeneous Besov norm; `a, b` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BesovParams<T> {
    pub s: T,
    #[serde(with = "crate::io::ext_real")]
    pub a: T,
    #[serde(with = "crate::io::ext_real")]
    pub b: T,
}

impl<T: Scalar> BesovParams<T> {
    pub fn new(s: T, a: T, b: T) -> Result<Self> {
        for (name, e) in [("a", a), ("b", b)] {
            if e.is_nan() || e < T::one() {
                return Err(Error::Param(format!(
                    "Besov exponent {name} = {e} must lie in [1, inf]"
                )));
            }
        }
        if !s.is_finite() {
            return Err(Error::Param(format!("smoothness s = {s} must be finite")));
        }
        Ok(BesovParams { s, a, b })
    }

    /// `(s_{p,a}, a, b)` with the critical smoothness `d(1/a - 1/p)`.
    pub fn critical(dim: usize, p: T, a: T, b: T) -> Result<Self> {
        Self::new(critical_smoothness(dim, p, a), a, b)
    }
}

/// `s_{p,a} = d(1/a - 1/p)`; `1/inf = 0`.
pub fn critical_smoothness<T: Scalar>(dim: usize, p: T, a: T) -> T {
    T::of(dim as f64) * (a.recip() - p.recip())
}

/// `l^e` norm, `e = inf` giving the supremum.
pub fn ell_norm<T: Scalar, I: IntoIterator<Item = T>>(values: I, e: T) -> T {
    if e.is_infinite() {
        values.into_iter().fold(T::zero(), |m, x| m.max(x.abs()))
    } else {
        let sum: T = values.into_iter().map(|x| x.abs().powf(e)).sum();
        sum.powf(e.recip())
    }
}

pub fn lp_tilde<T: Scalar>(f: &CoeffField<T>) -> T {
    let half = f.p() / T::of(2.0);
    cells::integrate(&[f], |s| s[0].powf(half)).powf(f.p().recip())
}

pub fn besov_tilde<T: Scalar>(f: &CoeffField<T>, prm: &BesovParams<T>) -> T {
    let mut by_scale: BTreeMap<i64, Vec<T>> = BTreeMap::new();
    for (idx, &a) in f {
        by_scale.entry(idx.scale).or_default().push(a);
    }
    let dim = T::of(f.dim() as f64);
    let exponent = prm.s + dim * (f.p().recip() - prm.a.recip());
    let per_scale = by_scale.into_iter().map(|(j, amps)| {
        let w = (T::of(j as f64) * exponent).exp2();
        w * ell_norm(amps, prm.a)
    });
    ell_norm(per_scale, prm.b)
}

pub fn sup_tilde<T: Scalar>(f: &CoeffField<T>) -> T {
    ell_norm(f.amplitudes(), T::infinity())
}

/// `l^p` norm of the amplitudes, `p` the field's reference exponent.
pub fn coeff_lp<T: Scalar>(f: &CoeffField<T>) -> T {
    ell_norm(f.amplitudes(), f.p())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormReport<T> {
    pub lp_tilde: T,
    pub sup_tilde: T,
    pub coeff_lp: T,
    pub besov: Vec<(BesovParams<T>, T)>,
}

pub fn norm_report<T: Scalar>(f: &CoeffField<T>, params: &[BesovParams<T>]) -> NormReport<T> {
    NormReport {
        lp_tilde: lp_tilde(f),
        sup_tilde: sup_tilde(f),
        coeff_lp: coeff_lp(f),
        besov: params
            .iter()
            .map(|prm| (*prm, besov_tilde(f, prm)))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// `||f||~_{B^{s_{p,r}}_{r,q}} <= ||a||_{l^p}^alpha sup|a|^{1-alpha}`.
///
/// Requires `2 <= p < q, r <= inf` and `alpha` in `(max{p/r, p/q}, 1)`. In
/// coefficient norms the Hölder chain behind the inequality is exact with
/// constant one, so `holds` is expected to be true for every admissible input.
pub fn interpolation_check<T: Scalar>(
    f: &CoeffField<T>,
    q: T,
    r: T,
    alpha: T,
) -> Result<InterpolationCheck<T>> {
    let p = f.p();
    if !(q > p && r > p) {
        return Err(Error::Param(format!(
            "need p < q, r (p = {p}, q = {q}, r = {r})"
        )));
    }
    let lower = (p / r).max(p / q);
    if !(alpha > lower && alpha < T::one()) {
        return Err(Error::Param(format!(
            "alpha = {alpha} outside ({lower}, 1)"
        )));
    }
    let prm = BesovParams::critical(f.dim(), p, r, q)?;
    let lhs = besov_tilde(f, &prm);
    let rhs = coeff_lp(f).powf(alpha) * sup_tilde(f).powf(T::one() - alpha);
    Ok(InterpolationCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (T::one() + rel_tol()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingReport<T> {
    /// `||f||~_{B^0_{p,p}}`, equal to the amplitude `l^p` norm.
    pub b0_pp: T,
    /// `||f||~_{B^0_{p,q}}`.
    pub b0_pq: T,
    /// `||f||~_{B^{s_{p,r}}_{r,q}}`.
    pub bs_rq: T,
    pub pq_below_pp: bool,
    pub rq_below_pq: bool,
    /// `coeff_lp / lp_tilde`, an empirical lower bound for the constant of
    /// `||a||_{l^p} <= C ||u||_{L^p}`; `None` for the empty field.
    pub lp_ratio: Option<T>,
}

/// Coefficient-level chain `B^{s_{p,r}}_{r,q} <- B^0_{p,q} <- B^0_{p,p}`.
///
/// Requires `2 <= p <= q, r <= inf`.
pub fn embedding_chain_check<T: Scalar>(
    f: &CoeffField<T>,
    q: T,
    r: T,
) -> Result<EmbeddingReport<T>> {
    let p = f.p();
    if !(q >= p && r >= p) {
        return Err(Error::Param(format!(
            "need p <= q, r (p = {p}, q = {q}, r = {r})"
        )));
    }
    let zero = T::zero();
    let b0_pp = besov_tilde(f, &BesovParams::new(zero, p, p)?);
    let b0_pq = besov_tilde(f, &BesovParams::new(zero, p, q)?);
    let bs_rq = besov_tilde(f, &BesovParams::critical(f.dim(), p, r, q)?);
    let slack = T::one() + rel_tol();
    let lp = lp_tilde(f);
    Ok(EmbeddingReport {
        b0_pp,
        b0_pq,
        bs_rq,
        pq_below_pp: b0_pq <= b0_pp * slack,
        rq_below_pq: bs_rq <= b0_pq * slack,
        lp_ratio: (lp > zero).then(|| coeff_lp(f) / lp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicAffine, DyadicVec, WaveletIndex};
    use proptest::prelude::*;

    fn idx(i: u32, j: i64, k: i64) -> WaveletIndex {
        WaveletIndex::lattice(i, j, vec![k])
    }

    fn field(p: f64, entries: &[(WaveletIndex, f64)]) -> CoeffField<f64> {
        CoeffField::from_entries(entries[0].0.dim(), p, entries.iter().cloned()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn lp_tilde_examples() {
        assert_eq!(lp_tilde(&CoeffField::<f64>::new(2, 3.0).unwrap()), 0.0);
        for (p, j, k, a) in [(2.0, 0, 0, 1.5), (3.0, -3, 7, -0.25), (4.0, 5, -11, 2.0)] {
            let f = field(p, &[(idx(1, j, k), a)]);
            assert!(close(lp_tilde(&f), a.abs(), 1e-14), "p={p} j={j}");
        }
        let f = field(4.0, &[(idx(1, 0, 0), 1.0), (idx(1, 1, 0), 1.0)]);
        let expected = (2.0 + 2f64.sqrt()).powf(0.25);
        assert!(close(lp_tilde(&f), expected, 1e-14));
        assert!(close(expected, 1.359323, 1e-6));
        let g = field(
            2.0,
            &[
                (idx(1, 0, 0), 3.0),
                (idx(1, 2, 1), -4.0),
                (idx(1, -1, 0), 12.0),
            ],
        );
        assert!(close(lp_tilde(&g), 13.0, 1e-14));
    }

    #[test]
    fn lp_tilde_dyadic_shift_and_2d() {
        // [1/2, 3/2) overlapping [0, 1) on [1/2, 1), p = 4:
        // S = 2 there and 1 on the rest, so the integral is 4/2 + 1/2 + 1/2.
        let f = field(
            4.0,
            &[
                (idx(1, 0, 0), 1.0),
                (WaveletIndex::new(1, 0, DyadicVec::new(vec![1], 1)), 1.0),
            ],
        );
        assert!(close(lp_tilde(&f), 3f64.powf(0.25), 1e-14));
        // Two unit squares and a quarter square inside the first, d = 2, p = 4:
        // weights 1, 1 and 2^{2*2*1/4} = 2.
        let g = field(
            4.0,
            &[
                (WaveletIndex::lattice(1, 0, vec![0, 0]), 1.0),
                (WaveletIndex::lattice(2, 0, vec![1, 0]), 1.0),
                (WaveletIndex::lattice(3, 1, vec![0, 0]), 1.0),
            ],
        );
        let integral = 9.0 * 0.25 + 1.0 * 0.75 + 1.0;
        assert!(close(lp_tilde(&g), f64::powf(integral, 0.25), 1e-14));
    }

    #[test]
    fn besov_examples() {
        let f = field(3.0, &[(idx(1, 2, 5), -1.5)]);
        let prm = BesovParams::new(0.7, 2.0, 5.0).unwrap();
        let expected = (2.0f64 * (0.7 + (1.0 / 3.0 - 0.5))).exp2() * 1.5;
        assert!(close(besov_tilde(&f, &prm), expected, 1e-14));
        let g = field(
            4.0,
            &[
                (idx(1, 2, 5), -1.5),
                (idx(1, -3, 0), 7.0),
                (idx(1, 0, 0), 2.0),
            ],
        );
        let sup = BesovParams::new(-0.25, f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(besov_tilde(&g, &sup), 7.0);
        assert_eq!(sup_tilde(&g), 7.0);
        let h = field(2.0, &[(idx(1, 0, 0), 3.0), (idx(1, 4, 1), 4.0)]);
        let pp = BesovParams::new(0.0, 2.0, 2.0).unwrap();
        assert!(close(besov_tilde(&h, &pp), 5.0, 1e-15));
        assert!(BesovParams::new(0.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn sup_examples() {
        assert_eq!(sup_tilde(&CoeffField::<f64>::new(1, 2.0).unwrap()), 0.0);
        let f = field(
            2.0,
            &[
                (idx(1, 0, 0), 5.0),
                (idx(1, 0, 1), -7.0),
                (idx(1, 0, 2), 2.0),
            ],
        );
        assert_eq!(sup_tilde(&f), 7.0);
    }

    #[test]
    fn interpolation_examples() {
        let f = field(2.0, &[(idx(1, 3, 1), -0.75)]);
        let c = interpolation_check(&f, 4.0, 6.0, 0.8).unwrap();
        assert!(close(c.lhs, 0.75, 1e-14) && close(c.rhs, 0.75, 1e-14) && c.holds);

        let g = field(
            2.0,
            &[
                (idx(1, 0, 0), 1.0),
                (idx(1, 0, 1), 1.0),
                (idx(1, 0, 2), 1.0),
                (idx(1, 0, 3), 1.0),
            ],
        );
        let c = interpolation_check(&g, 4.0, 4.0, 0.75).unwrap();
        assert!(close(c.lhs, 2f64.sqrt(), 1e-14));
        assert!(close(c.rhs, 2f64.powf(0.75), 1e-14));
        assert!(c.holds);

        assert!(interpolation_check(&g, 2.0, 4.0, 0.75).is_err());
        assert!(interpolation_check(&g, 4.0, 4.0, 0.5).is_err());
        assert!(interpolation_check(&g, 4.0, 4.0, 1.0).is_err());
    }

    #[test]
    fn interpolation_tight_when_one_amplitude_dominates() {
        let f = field(3.0, &[(idx(1, 0, 0), 1.0), (idx(1, 2, 9), 1e-7)]);
        let c = interpolation_check(&f, 6.0, 9.0, 0.6).unwrap();
        assert!(c.holds);
        assert!(close(c.lhs, c.rhs, 1e-12));
    }

    #[test]
    fn embedding_examples() {
        let f = field(4.0, &[(idx(1, -2, 3), 0.5)]);
        let e = embedding_chain_check(&f, 6.0, 8.0).unwrap();
        for v in [e.b0_pp, e.b0_pq, e.bs_rq] {
            assert!(close(v, 0.5, 1e-14));
        }
        let g = field(2.0, &[(idx(1, 0, 0), 0.5), (idx(1, 0, 3), -2.0)]);
        let e = embedding_chain_check(&g, 2.0, 2.0).unwrap();
        assert!(close(e.lp_ratio.unwrap(), 1.0, 1e-14));
        assert!(embedding_chain_check(&g, 1.5, 3.0).is_err());
        assert!(
            embedding_chain_check(&CoeffField::<f64>::new(1, 2.0).unwrap(), 3.0, 3.0)
                .unwrap()
                .lp_ratio
                .is_none()
        );
    }

    fn arb_field(max: usize) -> impl Strategy<Value = CoeffField<f64>> {
        (
            1usize..=2,
            prop::sample::select(vec![2.0, 3.0, 4.0, 5.5]),
            prop::collection::vec(
                (
                    1u32..4,
                    -4i64..=4,
                    prop::collection::vec(-6i64..=6, 2),
                    0u32..2,
                    -3.0f64..3.0,
                ),
                1..max,
            ),
        )
            .prop_map(|(d, p, raw)| {
                let mut f = CoeffField::new(d, p).unwrap();
                for (i, j, k, e, a) in raw {
                    let gen = 1 + (i - 1) % ((1 << d) - 1);
                    let idx = WaveletIndex::new(gen, j, DyadicVec::new(k[..d].to_vec(), e));
                    if a != 0.0 {
                        f.set(idx, a).unwrap();
                    }
                }
                f
            })
            .prop_filter("nonempty", |f| !f.is_empty())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn removing_an_entry_never_increases_norms(f in arb_field(20), pick in 0usize..20) {
            let victim = f.iter().nth(pick % f.len()).unwrap().0.clone();
            let mut g = f.clone();
            g.remove(&victim);
            let slack = 1.0 + 1e-12;
            prop_assert!(lp_tilde(&g) <= lp_tilde(&f) * slack);
            prop_assert!(sup_tilde(&g) <= sup_tilde(&f));
            for (s, a, b) in [(0.0, 2.0, 3.0), (-0.4, 1.0, f64::INFINITY), (0.3, 4.0, 1.0)] {
                let prm = BesovParams::new(s, a, b).unwrap();
                prop_assert!(besov_tilde(&g, &prm) <= besov_tilde(&f, &prm) * slack);
            }
        }

        #[test]
        fn outer_exponent_monotone(f in arb_field(20), extra in 0.0f64..6.0) {
            let p = f.p();
            let pp = besov_tilde(&f, &BesovParams::new(0.0, p, p).unwrap());
            let pq = besov_tilde(&f, &BesovParams::new(0.0, p, p + extra).unwrap());
            prop_assert!(pq <= pp * (1.0 + 1e-12));
        }

        #[test]
        fn interpolation_always_holds(
            f in arb_field(20),
            dq in 0.01f64..8.0,
            dr in 0.01f64..8.0,
            q_inf in any::<bool>(),
            t in 0.001f64..0.999,
        ) {
            let p = f.p();
            let q = if q_inf { f64::INFINITY } else { p + dq };
            let r = p + dr;
            let lower = (p / r).max(p / q);
            let alpha = lower + t * (1.0 - lower);
            prop_assume!(alpha > lower && alpha < 1.0);
            let c = interpolation_check(&f, q, r, alpha).unwrap();
            prop_assert!(c.holds, "lhs {} rhs {}", c.lhs, c.rhs);
        }

        #[test]
        fn norms_are_homogeneous(f in arb_field(20), c in -5.0f64..5.0) {
            prop_assume!(c.abs() > 1e-3);
            let g = f.scaled(c);
            let prm = BesovParams::new(0.2, 3.0, 2.0).unwrap();
            let pairs = [
                (lp_tilde(&g), lp_tilde(&f)),
                (sup_tilde(&g), sup_tilde(&f)),
                (coeff_lp(&g), coeff_lp(&f)),
                (besov_tilde(&g, &prm), besov_tilde(&f, &prm)),
            ];
            for (scaled, base) in pairs {
                prop_assert!(close(scaled, c.abs() * base, 1e-12));
            }
        }

        #[test]
        fn sup_matches_besov_at_critical_sup(f in arb_field(20)) {
            let d = f.dim() as f64;
            let prm = BesovParams::new(-d / f.p(), f64::INFINITY, f64::INFINITY).unwrap();
            prop_assert!(close(besov_tilde(&f, &prm), sup_tilde(&f), 1e-14));
        }

        #[test]
        fn lp_tilde_invariant_under_transform(
            f in arb_field(15),
            j in -5i64..=5,
            k in prop::collection::vec(-20i64..=20, 2),
            e in 0u32..3,
        ) {
            let tau = DyadicAffine::new(j, DyadicVec::new(k[..f.dim()].to_vec(), e));
            let g = f.transform(&tau).unwrap();
            prop_assert!(close(lp_tilde(&g), lp_tilde(&f), 1e-9));
        }

        #[test]
        fn p2_lp_tilde_is_l2(f in arb_field(25)) {
            let mut g = CoeffField::new(f.dim(), 2.0).unwrap();
            for (i, &a) in &f {
                g.set(i.clone(), a).unwrap();
            }
            prop_assert!(close(lp_tilde(&g), ell_norm(g.amplitudes(), 2.0), 1e-12));
        }

        #[test]
        fn coeff_lp_bounded_by_lp_tilde(f in arb_field(25)) {
            // Superadditivity of t^{p/2} for p >= 2.
            prop_assert!(coeff_lp(&f) <= lp_tilde(&f) * (1.0 + 1e-12));
        }
    }
}
