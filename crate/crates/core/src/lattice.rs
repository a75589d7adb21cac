//! Dilation and shear matrices, frame indices and cell geometry.
//!
//! Cones are numbered by the axis they are aligned with, 0-based: cone `c`
//! uses A_(c) (4^j on axis c, 2^j elsewhere) and B_(c) (shear entries in row
//! c). Shear vectors list the entries for the remaining axes in increasing
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    pub dim: usize,
    pub entries: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        IntMatrix { dim, entries }
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.dim + c]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.dim;
        let mut entries = vec![0; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[r * n + c] = (0..n).map(|k| self.get(r, k) * other.get(k, c)).sum();
            }
        }
        IntMatrix { dim: n, entries }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) as f64 * x[c]).sum())
            .collect()
    }

    /// Exact determinant by fraction-free elimination.
    pub fn det(&self) -> i128 {
        let n = self.dim;
        let mut m: Vec<i128> = self.entries.iter().map(|&v| v as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if m[k * n + k] == 0 {
                let Some(p) = (k + 1..n).find(|&r| m[r * n + k] != 0) else {
                    return 0;
                };
                for c in 0..n {
                    m.swap(k * n + c, p * n + c);
                }
                sign = -sign;
            }
            for r in k + 1..n {
                for c in k + 1..n {
                    m[r * n + c] =
                        (m[r * n + c] * m[k * n + k] - m[r * n + k] * m[k * n + c]) / prev;
                }
            }
            prev = m[k * n + k];
        }
        sign * m[(n - 1) * n + (n - 1)]
    }
}

fn check_cone(cone: usize, d: usize) -> Result<()> {
    if d < 2 {
        return invalid(format!("dimension must be at least 2, got {d}"));
    }
    if cone >= d {
        return invalid(format!("cone {cone} out of range for d={d}"));
    }
    Ok(())
}

/// A^j_(cone): diagonal with 4^j on the cone axis and 2^j elsewhere.
pub fn dilation_matrix(cone: usize, j: i32, d: usize) -> Result<IntMatrix> {
    check_cone(cone, d)?;
    if j < 0 {
        return invalid(format!("scale must be nonnegative, got {j}"));
    }
    if j > 30 {
        return invalid(format!("scale {j} overflows integer entries"));
    }
    let mut m = IntMatrix::identity(d);
    for i in 0..d {
        m.entries[i * d + i] = if i == cone { 1 << (2 * j) } else { 1 << j };
    }
    Ok(m)
}

/// B^[ℓ]_(cone): identity with ℓ in row `cone`, off the diagonal.
pub fn shear_matrix(cone: usize, shear: &[i64], d: usize) -> Result<IntMatrix> {
    check_cone(cone, d)?;
    if shear.len() != d - 1 {
        return invalid(format!(
            "shear has length {}, expected {}",
            shear.len(),
            d - 1
        ));
    }
    let mut m = IntMatrix::identity(d);
    for (t, &l) in shear.iter().enumerate() {
        m.entries[cone * d + other_axis(cone, t)] = l;
    }
    Ok(m)
}

/// Axis of the t-th shear entry in cone `cone`.
#[inline]
pub fn other_axis(cone: usize, t: usize) -> usize {
    if t < cone {
        t
    } else {
        t + 1
    }
}

/// B^[ℓ] A^j x for cone `cone`.
pub fn apply_ba(cone: usize, j: u32, shear: &[i64], x: &[f64]) -> Vec<f64> {
    let two_j = (1u64 << j) as f64;
    let mut y: Vec<f64> = x.iter().map(|v| v * two_j).collect();
    let mut head = x[cone] * two_j * two_j;
    for (t, &l) in shear.iter().enumerate() {
        head += l as f64 * y[other_axis(cone, t)];
    }
    y[cone] = head;
    y
}

/// A^{-j} B^{-[ℓ]} y, the inverse of [`apply_ba`].
pub fn apply_inv_ab(cone: usize, j: u32, shear: &[i64], y: &[f64]) -> Vec<f64> {
    let two_j = (1u64 << j) as f64;
    let mut head = y[cone];
    for (t, &l) in shear.iter().enumerate() {
        head -= l as f64 * y[other_axis(cone, t)];
    }
    let mut x: Vec<f64> = y.iter().map(|v| v / two_j).collect();
    x[cone] = head / (two_j * two_j);
    x
}

/// Frequency-side action ξ A^{-j} B^{[-ℓ]} (row vector).
pub fn freq_action(cone: usize, j: u32, shear: &[i64], xi: &[f64]) -> Vec<f64> {
    let two_j = (1u64 << j) as f64;
    let head = xi[cone] / (two_j * two_j);
    let mut out: Vec<f64> = xi.iter().map(|v| v / two_j).collect();
    for (t, &l) in shear.iter().enumerate() {
        out[other_axis(cone, t)] -= l as f64 * head;
    }
    out[cone] = head;
    out
}

/// (cone, scale, shear): one sub-band of the frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Band {
    pub cone: usize,
    pub scale: u32,
    pub shear: Vec<i64>,
}

impl Band {
    pub fn new(cone: usize, scale: u32, shear: Vec<i64>) -> Result<Self> {
        check_cone(cone, shear.len() + 1)?;
        let bound = 1i64 << scale;
        if shear.iter().any(|l| l.abs() > bound) {
            return invalid(format!("shear {shear:?} exceeds 2^{scale}"));
        }
        Ok(Band { cone, scale, shear })
    }

    pub fn dim(&self) -> usize {
        self.shear.len() + 1
    }

    /// True when some |ℓ_i| = 2^j (the atom sits on a cone seam).
    pub fn is_boundary(&self) -> bool {
        let bound = 1i64 << self.scale;
        self.shear.iter().any(|l| l.abs() == bound)
    }

    /// |Q| = 2^{-(d+1)j}.
    pub fn cell_volume(&self) -> f64 {
        cell_volume(self.scale, self.dim())
    }

    /// The integer matrix B^[ℓ] A^j.
    pub fn matrix(&self) -> IntMatrix {
        let d = self.dim();
        let b = shear_matrix(self.cone, &self.shear, d).expect("valid band");
        let a = dilation_matrix(self.cone, self.scale as i32, d).expect("valid band");
        b.mul(&a)
    }
}

pub fn cell_volume(j: u32, d: usize) -> f64 {
    2f64.powi(-((d as i32 + 1) * j as i32))
}

/// Frame index (cone, j, ℓ, k).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShearIndex {
    pub band: Band,
    pub translation: Vec<i64>,
}

/// A point with coordinates num_i / 4^j, kept exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicPoint {
    pub numerators: Vec<i64>,
    pub log2_denominator: u32,
}

impl DyadicPoint {
    pub fn to_f64(&self) -> Vec<f64> {
        let den = 2f64.powi(self.log2_denominator as i32);
        self.numerators.iter().map(|&n| n as f64 / den).collect()
    }
}

/// Q_{j,ℓ,k} = A^{-j} B^{-[ℓ]} (Q₀ + k).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub owner: ShearIndex,
    pub lower_left: DyadicPoint,
    pub volume: f64,
}

/// Exact corner x_P = A^{-j}B^{-[ℓ]}k as numerators over 4^j.
pub fn corner(band: &Band, k: &[i64]) -> DyadicPoint {
    let j = band.scale;
    let mut num: Vec<i64> = k.iter().map(|&v| v << j).collect();
    let mut head = k[band.cone];
    for (t, &l) in band.shear.iter().enumerate() {
        head -= l * k[other_axis(band.cone, t)];
    }
    num[band.cone] = head;
    DyadicPoint {
        numerators: num,
        log2_denominator: 2 * j,
    }
}

pub fn cell_of(idx: &ShearIndex) -> Cell {
    Cell {
        lower_left: corner(&idx.band, &idx.translation),
        volume: idx.band.cell_volume(),
        owner: idx.clone(),
    }
}

/// The translation k with x ∈ Q_{j,ℓ,k}, i.e. k = ⌊B^[ℓ]A^j x⌋.
pub fn cell_containing(band: &Band, x: &[f64]) -> Vec<i64> {
    apply_ba(band.cone, band.scale, &band.shear, x)
        .into_iter()
        .map(|v| v.floor() as i64)
        .collect()
}

/// Classical dyadic index (ν, k), cube 2^{-ν}(Q₀ + k).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub level: u32,
    pub translation: Vec<i64>,
}

impl DyadicIndex {
    pub fn volume(&self) -> f64 {
        2f64.powi(-((self.level as usize * self.translation.len()) as i32))
    }

    pub fn lower_left(&self) -> Vec<f64> {
        let s = 2f64.powi(-(self.level as i32));
        self.translation.iter().map(|&k| k as f64 * s).collect()
    }
}

/// (2^{j+1}+1)^{d-1}.
pub fn shear_count(j: u32, d: usize) -> usize {
    ((1usize << (j + 1)) + 1).pow(d as u32 - 1)
}

/// All shear vectors with |ℓ_i| ≤ 2^j, lexicographic.
pub fn enumerate_shears(j: u32, d: usize) -> Vec<Vec<i64>> {
    let b = 1i64 << j;
    let width = (2 * b + 1) as usize;
    let count = shear_count(j, d);
    (0..count)
        .map(|mut r| {
            let mut l = vec![0i64; d - 1];
            for t in (0..d - 1).rev() {
                l[t] = (r % width) as i64 - b;
                r /= width;
            }
            l
        })
        .collect()
}

/// Lexicographic rank of a shear vector within [`enumerate_shears`].
pub fn shear_rank(j: u32, shear: &[i64]) -> usize {
    let b = 1i64 << j;
    let width = (2 * b + 1) as usize;
    shear
        .iter()
        .fold(0, |acc, &l| acc * width + (l + b) as usize)
}

/// Deterministic unit-sphere samples in R^d.
pub fn sphere_samples(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 2 * d);
    // coordinate axes first: they are the extremal directions of A^j
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            out.push(e);
        }
    }
    while out.len() < count + 2 * d {
        let v: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let n = crate::windows::norm2(&v);
        if n > 1e-12 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

/// min over sphere samples of |B^[ℓ]A^j x| / (2^j |x|), cone 0 convention.
pub fn min_expansion(j: u32, shear: &[i64], samples: &[Vec<f64>]) -> f64 {
    let two_j = (1u64 << j) as f64;
    samples
        .iter()
        .map(|x| crate::windows::norm2(&apply_ba(0, j, shear, x)) / two_j)
        .fold(f64::INFINITY, f64::min)
}

/// min over sphere samples of |A^{-j}B^{-[ℓ]} x|, cone 0 convention.
pub fn min_inverse_expansion(j: u32, shear: &[i64], samples: &[Vec<f64>]) -> f64 {
    samples
        .iter()
        .map(|x| crate::windows::norm2(&apply_inv_ab(0, j, shear, x)))
        .fold(f64::INFINITY, f64::min)
}

/// Frobenius norm. |M^{-1}x| ≥ |x| / ‖M‖_F for any invertible M.
pub fn frobenius_norm(m: &IntMatrix) -> f64 {
    m.entries
        .iter()
        .map(|&v| (v as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn dilation_examples() {
        assert_eq!(
            dilation_matrix(0, 1, 2).unwrap().rows(),
            vec![vec![4, 0], vec![0, 2]]
        );
        assert_eq!(dilation_matrix(0, 0, 3).unwrap(), IntMatrix::identity(3));
        assert_eq!(
            dilation_matrix(2, 2, 3).unwrap().rows(),
            vec![vec![4, 0, 0], vec![0, 4, 0], vec![0, 0, 16]]
        );
        assert!(dilation_matrix(0, -1, 2).is_err());
        assert!(dilation_matrix(3, 1, 3).is_err());
    }

    #[test]
    fn shear_examples() {
        assert_eq!(
            shear_matrix(0, &[1], 2).unwrap().rows(),
            vec![vec![1, 1], vec![0, 1]]
        );
        assert_eq!(shear_matrix(0, &[0, 0], 3).unwrap(), IntMatrix::identity(3));
        assert_eq!(
            shear_matrix(2, &[1, 2], 3).unwrap().rows(),
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 2, 1]]
        );
        assert!(shear_matrix(0, &[1, 2], 2).is_err());
    }

    #[test]
    fn determinants() {
        for d in 2..=4 {
            for j in 0..5 {
                for c in 0..d {
                    let a = dilation_matrix(c, j, d).unwrap();
                    assert_eq!(a.det(), 1i128 << ((d as i32 + 1) * j));
                    let l: Vec<i64> = (0..d as i64 - 1).map(|t| t - 1).collect();
                    assert_eq!(shear_matrix(c, &l, d).unwrap().det(), 1);
                }
            }
        }
    }

    #[test]
    fn apply_ba_examples() {
        assert_eq!(apply_ba(0, 1, &[1], &[1.0, 1.0]), vec![6.0, 2.0]);
        assert_eq!(apply_ba(0, 0, &[0], &[0.3, -2.0]), vec![0.3, -2.0]);
    }

    #[test]
    fn apply_ba_matches_matrix_product() {
        let band = Band::new(1, 2, vec![3, -4]).unwrap();
        let m = band.matrix();
        let x = [0.3, -1.1, 2.5];
        let direct = m.apply(&x);
        let fast = apply_ba(1, 2, &[3, -4], &x);
        for (a, b) in direct.iter().zip(&fast) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn freq_action_is_row_vector_product_with_inverse() {
        // ξ A^{-j}B^{[-ℓ]} · (B^[ℓ]A^j x) = ξ · x
        let xi = [3.0, -7.0, 5.0];
        let x = [0.2, 0.7, -0.4];
        let (c, j, l) = (2usize, 2u32, [1i64, -3]);
        let eta = freq_action(c, j, &l, &xi);
        let y = apply_ba(c, j, &l, &x);
        let lhs: f64 = eta.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn cell_examples() {
        let unit = cell_of(&ShearIndex {
            band: Band::new(0, 0, vec![0]).unwrap(),
            translation: vec![0, 0],
        });
        assert_eq!(unit.lower_left.to_f64(), vec![0.0, 0.0]);
        assert_eq!(unit.volume, 1.0);
        let c = cell_of(&ShearIndex {
            band: Band::new(0, 2, vec![3]).unwrap(),
            translation: vec![5, 1],
        });
        assert_eq!(c.volume, 2f64.powi(-6));
        let c = cell_of(&ShearIndex {
            band: Band::new(0, 1, vec![1]).unwrap(),
            translation: vec![1, 0],
        });
        assert_eq!(c.lower_left.to_f64(), vec![0.25, 0.0]);
    }

    #[test]
    fn shear_count_examples() {
        assert_eq!(shear_count(0, 2), 3);
        assert_eq!(shear_count(2, 2), 9);
        assert_eq!(shear_count(1, 3), 25);
        for j in 0..4 {
            for d in 2..4 {
                let all = enumerate_shears(j, d);
                assert_eq!(all.len(), shear_count(j, d));
                for (r, l) in all.iter().enumerate() {
                    assert_eq!(shear_rank(j, l), r);
                }
            }
        }
    }

    #[test]
    fn min_expansion_examples() {
        let s2 = sphere_samples(2, 10_000, 7);
        assert_abs_diff_eq!(min_expansion(0, &[0], &s2), 1.0, epsilon = 1e-12);
        assert!(min_expansion(3, &[8], &s2) >= 0.5);
        let s3 = sphere_samples(3, 10_000, 7);
        let worst = enumerate_shears(2, 3)
            .iter()
            .map(|l| min_expansion(2, l, &s3))
            .fold(f64::INFINITY, f64::min);
        assert!(worst >= 0.25, "{worst}");
    }

    #[test]
    fn stated_inverse_bound_fails_along_the_cone_axis() {
        // |A^{-j}B^{-ℓ}e_c| = 4^{-j} < 2^{-2(j-1)}; a weaker bound does hold
        let s2 = sphere_samples(2, 2000, 3);
        for j in 1..4u32 {
            for l in enumerate_shears(j, 2) {
                let m = min_inverse_expansion(j, &l, &s2);
                assert!(m < 2f64.powi(-2 * (j as i32 - 1)));
                let band = Band::new(0, j, l.clone()).unwrap();
                assert!(m >= 1.0 / frobenius_norm(&band.matrix()) - 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn roundtrip_inverse(x in prop::collection::vec(-10.0f64..10.0, 3), j in 0u32..5,
                             l0 in -16i64..=16, l1 in -16i64..=16, c in 0usize..3) {
            let b = 1i64 << j;
            let l = [l0.clamp(-b, b), l1.clamp(-b, b)];
            let back = apply_inv_ab(c, j, &l, &apply_ba(c, j, &l, &x));
            for (a, bb) in back.iter().zip(&x) {
                prop_assert!((a - bb).abs() <= 1e-14 * (1.0 + bb.abs()) * 16.0);
            }
        }

        #[test]
        fn tiling_membership(x in prop::collection::vec(-3.0f64..3.0, 2), j in 0u32..4, l in -8i64..=8) {
            let b = 1i64 << j;
            let band = Band::new(0, j, vec![l.clamp(-b, b)]).unwrap();
            let k = cell_containing(&band, &x);
            let y = apply_ba(0, j, &band.shear, &x);
            for (yi, ki) in y.iter().zip(&k) {
                let r = yi - *ki as f64;
                prop_assert!((0.0..1.0).contains(&r));
            }
            // the neighbouring translation does not contain x
            let mut k2 = k.clone();
            k2[0] += 1;
            let inside = y.iter().zip(&k2).all(|(yi, ki)| (0.0..1.0).contains(&(yi - *ki as f64)));
            prop_assert!(!inside);
        }

        #[test]
        fn corner_is_exact_inverse_image(k0 in -50i64..50, k1 in -50i64..50, k2 in -50i64..50,
                                         j in 0u32..4, c in 0usize..3) {
            let b = 1i64 << j;
            let band = Band::new(c, j, vec![b, -1]).unwrap();
            let k = [k0, k1, k2];
            let x = corner(&band, &k).to_f64();
            let back = apply_ba(c, j, &band.shear, &x);
            for (a, kk) in back.iter().zip(&k) {
                prop_assert_eq!(*a, *kk as f64);
            }
        }
    }
}
