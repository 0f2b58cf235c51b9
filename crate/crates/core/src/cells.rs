//! Exact integration of functions of square functions over the arrangement of
//! dyadic cubes.
//!
//! Every cube is mapped to an integer box at the finest resolution `2^{-R}`
//! present in the input. The integrand is constant on the leaves of a
//! `2^d`-ary subdivision built top-down from coarse root cells; a node stops
//! splitting as soon as no box boundary crosses it. Lattice cubes are tree
//! nodes themselves, so the work is bounded by entries times scale range.

use std::collections::BTreeMap;

use crate::field::CoeffField;
use crate::scalar::Scalar;

struct IntBox<T> {
    lo: Vec<i128>,
    side_exp: u32,
    channel: usize,
    weight: T,
}

impl<T> IntBox<T> {
    fn covers(&self, corner: &[i128], s: u32) -> bool {
        let side = 1i128 << self.side_exp;
        let region = 1i128 << s;
        corner
            .iter()
            .zip(&self.lo)
            .all(|(&c, &l)| l <= c && c + region <= l + side)
    }

    fn meets(&self, corner: &[i128], s: u32) -> bool {
        let side = 1i128 << self.side_exp;
        let region = 1i128 << s;
        corner
            .iter()
            .zip(&self.lo)
            .all(|(&c, &l)| l < c + region && c < l + side)
    }
}

/// Square-function weight `|a|^2 2^{(2d/p) j}` of one entry.
pub(crate) fn square_weight<T: Scalar>(a: T, scale: i64, dim: usize, p: T) -> T {
    let e = T::of(2.0 * dim as f64 * scale as f64) / p;
    a * a * e.exp2()
}

/// `∫ F(S_0(x), ..., S_{m-1}(x)) dx` where `S_c` is the square function of
/// `layers[c]`. `F` must vanish when all arguments are zero.
///
/// All layers must share dimension and exponent.
pub(crate) fn integrate<T, F>(layers: &[&CoeffField<T>], integrand: F) -> T
where
    T: Scalar,
    F: Fn(&[T]) -> T,
{
    let Some(first) = layers.first() else {
        return T::zero();
    };
    let dim = first.dim();
    let p = first.p();
    let entries: Vec<(usize, &crate::dyadic::WaveletIndex, T)> = layers
        .iter()
        .enumerate()
        .flat_map(|(c, f)| f.iter().map(move |(i, &a)| (c, i, a)))
        .collect();
    if entries.is_empty() {
        return T::zero();
    }
    let finest = entries
        .iter()
        .map(|(_, i, _)| i.scale + i64::from(i.shift.denom_exp()))
        .max()
        .expect("nonempty");
    let coarsest = entries
        .iter()
        .map(|(_, i, _)| i.scale)
        .min()
        .expect("nonempty");
    let root_exp = u32::try_from(finest - coarsest).expect("resolution fits");
    assert!(
        root_exp < 96,
        "scale range {root_exp} too wide for exact integration"
    );

    let boxes: Vec<IntBox<T>> = entries
        .iter()
        .map(|&(c, idx, a)| {
            let side_exp = (finest - idx.scale) as u32;
            IntBox {
                lo: idx.shift.scaled_i128(side_exp),
                side_exp,
                channel: c,
                weight: square_weight(a, idx.scale, dim, p),
            }
        })
        .collect();

    let mut roots: BTreeMap<Vec<i128>, Vec<usize>> = BTreeMap::new();
    for (b, bx) in boxes.iter().enumerate() {
        let side = 1i128 << bx.side_exp;
        let ranges: Vec<(i128, i128)> = bx
            .lo
            .iter()
            .map(|&l| (l >> root_exp, (l + side - 1) >> root_exp))
            .collect();
        for corner in grid(&ranges) {
            let corner: Vec<i128> = corner.into_iter().map(|x| x << root_exp).collect();
            roots.entry(corner).or_default().push(b);
        }
    }

    let ctx = Ctx {
        boxes: &boxes,
        dim,
        finest,
        channels: layers.len(),
        integrand: &integrand,
    };
    roots
        .iter()
        .map(|(corner, members)| ctx.node(corner, root_exp, vec![T::zero(); ctx.channels], members))
        .fold(T::zero(), |acc, v| acc + v)
}

fn grid(ranges: &[(i128, i128)]) -> Vec<Vec<i128>> {
    let mut out = vec![Vec::with_capacity(ranges.len())];
    for &(a, b) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (a..=b).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

struct Ctx<'a, T, F> {
    boxes: &'a [IntBox<T>],
    dim: usize,
    finest: i64,
    channels: usize,
    integrand: &'a F,
}

impl<T: Scalar, F: Fn(&[T]) -> T> Ctx<'_, T, F> {
    fn volume(&self, s: u32) -> T {
        T::of(((s as f64) - self.finest as f64) * self.dim as f64).exp2()
    }

    fn node(&self, corner: &[i128], s: u32, mut base: Vec<T>, candidates: &[usize]) -> T {
        let mut partial = Vec::new();
        for &b in candidates {
            let bx = &self.boxes[b];
            if bx.covers(corner, s) {
                base[bx.channel] = base[bx.channel] + bx.weight;
            } else if bx.meets(corner, s) {
                partial.push(b);
            }
        }
        if partial.is_empty() {
            if base.iter().all(|w| *w == T::zero()) {
                return T::zero();
            }
            return (self.integrand)(&base) * self.volume(s);
        }
        assert!(s > 0, "unit cell crossed by an integer box");
        let half = 1i128 << (s - 1);
        let mut total = T::zero();
        let mut plain = 0u64;
        for mask in 0u64..(1u64 << self.dim) {
            let child: Vec<i128> = corner
                .iter()
                .enumerate()
                .map(|(c, &x)| if mask >> c & 1 == 1 { x + half } else { x })
                .collect();
            if partial.iter().any(|&b| self.boxes[b].meets(&child, s - 1)) {
                total = total + self.node(&child, s - 1, base.clone(), &partial);
            } else {
                plain += 1;
            }
        }
        if plain > 0 && base.iter().any(|w| *w != T::zero()) {
            total = total + (self.integrand)(&base) * self.volume(s - 1) * T::of(plain as f64);
        }
        total
    }
}
