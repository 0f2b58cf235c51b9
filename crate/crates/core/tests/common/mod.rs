#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavelet_profiles::{
    CoeffField, DyadicAffine, DyadicVec, Field, NoiseSpec, ParamLaw, Spec, WaveletIndex,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Up to `max_entries` entries, scales in `[-4, 4]`, shifts in `[-3, 3]` with
/// denominators up to 4 when `dyadic` is set.
pub fn random_field(
    rng: &mut ChaCha8Rng,
    dim: usize,
    p: f64,
    max_entries: usize,
    dyadic: bool,
) -> Field {
    let mut f = CoeffField::new(dim, p).unwrap();
    let count = rng.gen_range(1..=max_entries);
    let max_gen = (1u32 << dim) - 1;
    for _ in 0..count {
        let gen = rng.gen_range(1..=max_gen);
        let scale = rng.gen_range(-4..=4);
        let e = if dyadic { rng.gen_range(0..=2) } else { 0 };
        let k = (0..dim)
            .map(|_| rng.gen_range(-3i64 << e..=3i64 << e))
            .collect();
        let mut a: f64 = rng.gen_range(-2.0..2.0);
        if a == 0.0 {
            a = 1.0;
        }
        f.set(WaveletIndex::new(gen, scale, DyadicVec::new(k, e)), a)
            .unwrap();
    }
    f
}

pub fn random_affine(rng: &mut ChaCha8Rng, dim: usize) -> DyadicAffine {
    let e = rng.gen_range(0..=3);
    let k = (0..dim).map(|_| rng.gen_range(-40i64..=40)).collect();
    DyadicAffine::new(rng.gen_range(-4..=4), DyadicVec::new(k, e))
}

/// Axis-aligned box `[lo, lo + side)^d` of an index, in floating point.
fn cube(idx: &WaveletIndex) -> (Vec<f64>, f64) {
    let side = (-idx.scale as f64).exp2();
    let lo = (0..idx.dim())
        .map(|c| idx.shift.component_f64(c) * side)
        .collect();
    (lo, side)
}

fn square_fn(f: &Field, x: &[f64]) -> f64 {
    let d = f.dim() as f64;
    let p = f.p();
    f.iter()
        .filter(|(idx, _)| {
            let (lo, side) = cube(idx);
            lo.iter().zip(x).all(|(&l, &xc)| l <= xc && xc < l + side)
        })
        .map(|(idx, &a)| a * a * (2.0 * d * idx.scale as f64 / p).exp2())
        .sum()
}

fn product_cells(axes: &[Vec<f64>]) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for pts in axes {
        let mut next = Vec::new();
        for (mid, vol) in &out {
            for w in pts.windows(2) {
                let mut m = mid.clone();
                m.push(0.5 * (w[0] + w[1]));
                next.push((m, vol * (w[1] - w[0])));
            }
        }
        out = next;
    }
    out
}

/// `∫ F(S_f, S_g)` summed over the cells of the grid spanned by every cube
/// face. The square functions are constant on those cells, so this is the
/// Riemann sum on the finest dyadic grid with equal cells merged.
pub fn breakpoint_integral(fields: &[&Field], integrand: impl Fn(&[f64]) -> f64) -> f64 {
    let dim = fields[0].dim();
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); dim];
    for f in fields {
        for (idx, _) in f.iter() {
            let (lo, side) = cube(idx);
            for c in 0..dim {
                axes[c].push(lo[c]);
                axes[c].push(lo[c] + side);
            }
        }
    }
    for a in &mut axes {
        a.sort_by(f64::total_cmp);
        a.dedup();
    }
    if axes.iter().any(|a| a.len() < 2) {
        return 0.0;
    }
    product_cells(&axes)
        .into_iter()
        .map(|(mid, vol)| {
            let s: Vec<f64> = fields.iter().map(|f| square_fn(f, &mid)).collect();
            if s.iter().all(|&v| v == 0.0) {
                0.0
            } else {
                integrand(&s) * vol
            }
        })
        .sum()
}

pub fn oracle_lp(f: &Field) -> f64 {
    let half = f.p() / 2.0;
    breakpoint_integral(&[f], |s| s[0].powf(half)).powf(1.0 / f.p())
}

/// Dense Riemann sum on every cell of side `2^{-R}` in the bounding box,
/// `R` the finest resolution present. One-dimensional fields only.
pub fn dense_oracle_lp_1d(f: &Field) -> f64 {
    assert_eq!(f.dim(), 1);
    if f.is_empty() {
        return 0.0;
    }
    let finest = f
        .iter()
        .map(|(i, _)| i.scale + i64::from(i.shift.denom_exp()))
        .max()
        .unwrap();
    let h = (-finest as f64).exp2();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (idx, _) in f.iter() {
        let (l, side) = cube(idx);
        lo = lo.min(l[0]);
        hi = hi.max(l[0] + side);
    }
    let cells = ((hi - lo) / h).round() as usize;
    let half = f.p() / 2.0;
    let sum: f64 = (0..cells)
        .map(|c| square_fn(f, &[lo + (c as f64 + 0.5) * h]).powf(half))
        .sum();
    (sum * h).powf(1.0 / f.p())
}

pub fn oracle_cross(a: &Field, b: &Field) -> f64 {
    let e = a.p() / 2.0 - 1.0;
    breakpoint_integral(&[a, b], |s| s[0] * s[1].powf(e))
}

fn entries(dim: usize, p: f64, list: &[(u32, i64, &[i64], f64)]) -> Field {
    CoeffField::from_entries(
        dim,
        p,
        list.iter()
            .map(|&(i, j, k, a)| (WaveletIndex::lattice(i, j, k.to_vec()), a)),
    )
    .unwrap()
}

fn one_d(p: f64, list: &[(i64, i64, f64)]) -> Field {
    let v: Vec<(u32, i64, Vec<i64>, f64)> =
        list.iter().map(|&(j, k, a)| (1, j, vec![k], a)).collect();
    CoeffField::from_entries(
        1,
        p,
        v.into_iter()
            .map(|(i, j, k, a)| (WaveletIndex::lattice(i, j, k), a)),
    )
    .unwrap()
}

fn constant(scale: i64, shift: &[i64]) -> ParamLaw {
    ParamLaw::Constant {
        scale,
        shift: shift.to_vec(),
    }
}

fn translation(scale: i64, shift0: &[i64], velocity: &[i64]) -> ParamLaw {
    ParamLaw::Translation {
        scale,
        shift0: shift0.to_vec(),
        velocity: velocity.to_vec(),
    }
}

fn geometric(scale0: i64, step: i64, shift: &[i64]) -> ParamLaw {
    ParamLaw::GeometricScale {
        scale0,
        step,
        shift: shift.to_vec(),
    }
}

fn mixed(scale0: i64, step: i64, shift0: &[i64], velocity: &[i64]) -> ParamLaw {
    ParamLaw::Mixed {
        scale0,
        step,
        shift0: shift0.to_vec(),
        velocity: velocity.to_vec(),
    }
}

pub struct CorpusItem {
    pub name: &'static str,
    pub spec: Spec,
}

impl CorpusItem {
    pub fn epsilon(&self) -> f64 {
        self.spec.noise.map_or(0.0, |n| n.epsilon)
    }
}

#[allow(clippy::too_many_arguments)]
fn item(
    name: &'static str,
    dim: usize,
    p: f64,
    profiles: Vec<Field>,
    laws: Vec<ParamLaw>,
    n_count: usize,
    noise: Option<(f64, usize)>,
    seed: u64,
) -> CorpusItem {
    CorpusItem {
        name,
        spec: Spec {
            dim,
            p,
            profiles,
            laws,
            noise: noise.map(|(epsilon, count)| NoiseSpec { epsilon, count }),
            n_count,
            seed,
        },
    }
}

/// Fixed acceptance corpus. Scale divergence uses coarsening laws so that
/// supports separate; amplitudes are distinct across all profiles of an item.
pub fn corpus() -> Vec<CorpusItem> {
    let translation_pair = |p: f64| {
        (
            vec![
                one_d(p, &[(0, 0, 1.0), (1, 1, -0.4)]),
                one_d(p, &[(0, 0, 0.7)]),
            ],
            vec![constant(0, &[0]), translation(0, &[4], &[8])],
        )
    };
    let coarse_multi = |p: f64| {
        (
            vec![
                one_d(p, &[(0, 0, 1.0), (1, 0, 0.45)]),
                one_d(p, &[(0, 0, 0.8), (1, 1, 0.3), (2, 3, 0.2)]),
            ],
            vec![constant(0, &[0]), geometric(-1, -1, &[-1])],
        )
    };
    let planar = |p: f64| {
        (
            vec![
                entries(
                    2,
                    p,
                    &[
                        (1, 0, &[0, 0], 1.0),
                        (2, 0, &[0, 0], 0.6),
                        (3, 1, &[1, 1], 0.35),
                    ],
                ),
                entries(2, p, &[(2, 0, &[0, 0], 0.8), (1, 0, &[1, 0], 0.25)]),
            ],
            vec![constant(0, &[0, 0]), translation(1, &[0, 4], &[6, -4])],
        )
    };

    let (tp, tl) = translation_pair(4.0);
    let (tp_n, tl_n) = translation_pair(4.0);
    let (cm, cl) = coarse_multi(3.0);
    let (cm_n, cl_n) = coarse_multi(3.0);
    let (pp, pl) = planar(4.0);
    let (pp_n, pl_n) = planar(4.0);
    vec![
        item("translation pair", 1, 4.0, tp, tl, 16, None, 1),
        item(
            "three translations",
            1,
            3.0,
            vec![
                one_d(3.0, &[(0, 0, 1.0), (0, 1, 0.15)]),
                one_d(3.0, &[(0, 0, 0.8), (2, 1, -0.35)]),
                one_d(3.0, &[(0, 0, -0.6)]),
            ],
            vec![
                constant(0, &[0]),
                translation(0, &[3], &[6]),
                translation(0, &[-5], &[-10]),
            ],
            24,
            None,
            2,
        ),
        item(
            "coarsening scale",
            1,
            4.0,
            vec![one_d(4.0, &[(0, 0, 1.0)]), one_d(4.0, &[(0, 0, 0.9)])],
            vec![constant(0, &[0]), geometric(0, -1, &[-1])],
            12,
            None,
            3,
        ),
        item("coarsening multi-member", 1, 3.0, cm, cl, 16, None, 4),
        item(
            "three-member translation",
            1,
            6.0,
            vec![
                one_d(6.0, &[(0, 0, 1.0), (1, 1, 0.5), (-1, 0, 0.3)]),
                one_d(6.0, &[(2, 0, 0.75), (2, 1, 0.2)]),
            ],
            vec![translation(0, &[0], &[6]), constant(0, &[0])],
            20,
            None,
            5,
        ),
        item(
            "refining and translating",
            1,
            2.0,
            vec![
                one_d(2.0, &[(0, 0, 0.9), (1, 0, -0.5)]),
                one_d(2.0, &[(0, 0, 1.2)]),
            ],
            vec![mixed(0, 1, &[0], &[3]), translation(0, &[2], &[4])],
            20,
            None,
            6,
        ),
        item(
            "coarsening and translating",
            1,
            4.0,
            vec![
                one_d(4.0, &[(0, 0, 0.95), (1, 1, 0.4)]),
                one_d(4.0, &[(0, 0, 0.7)]),
                one_d(4.0, &[(0, 0, -0.55), (0, 1, 0.1)]),
            ],
            vec![
                mixed(0, -1, &[1], &[1]),
                constant(0, &[0]),
                translation(0, &[-3], &[-5]),
            ],
            16,
            None,
            7,
        ),
        item(
            "four translations",
            1,
            3.0,
            vec![
                one_d(3.0, &[(0, 0, 1.0)]),
                one_d(3.0, &[(0, 0, 0.85), (1, 0, 0.3)]),
                one_d(3.0, &[(0, 0, -0.65)]),
                one_d(3.0, &[(0, 0, 0.5), (-1, 0, 0.12)]),
            ],
            vec![
                constant(0, &[0]),
                translation(0, &[11], &[7]),
                translation(0, &[-13], &[-9]),
                translation(0, &[40], &[20]),
            ],
            64,
            None,
            8,
        ),
        item("planar translation", 2, 4.0, pp, pl, 12, None, 9),
        item(
            "dyadic profile frame",
            1,
            3.0,
            vec![
                one_d(3.0, &[(1, 1, 1.0), (0, 0, 0.6)]),
                one_d(3.0, &[(0, 0, 0.8)]),
            ],
            vec![translation(0, &[0], &[4]), constant(0, &[-3])],
            12,
            None,
            10,
        ),
        item(
            "translation pair, noisy",
            1,
            4.0,
            tp_n,
            tl_n,
            16,
            Some((1e-3, 6)),
            11,
        ),
        item(
            "coarsening multi-member, noisy",
            1,
            3.0,
            cm_n,
            cl_n,
            16,
            Some((5e-4, 8)),
            12,
        ),
        item(
            "planar translation, noisy",
            2,
            4.0,
            pp_n,
            pl_n,
            12,
            Some((1e-3, 4)),
            13,
        ),
        item(
            "four translations, noisy",
            1,
            2.0,
            vec![
                one_d(2.0, &[(0, 0, 1.0)]),
                one_d(2.0, &[(0, 0, 0.85)]),
                one_d(2.0, &[(0, 0, -0.65), (1, 1, 0.2)]),
                one_d(2.0, &[(0, 0, 0.5)]),
            ],
            vec![
                constant(0, &[0]),
                translation(0, &[11], &[7]),
                translation(0, &[-13], &[-9]),
                translation(0, &[40], &[20]),
            ],
            32,
            Some((1e-3, 10)),
            14,
        ),
    ]
}
