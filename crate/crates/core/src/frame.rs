//! Frequency-domain shearlet frames on a periodic grid.
//!
//! Every grid frequency ξ ≠ 0 is owned by exactly one cone: the axis with the
//! largest |ξ_i|, ties going to the lowest axis. Masks are evaluated only in
//! the owning cone, which realises the cone indicators χ_D exactly.
//!
//! The finest scale j_max carries the closure of the radial sum (every
//! frequency above its nominal band), so the partition of unity holds at all
//! grid frequencies and not just below 2^{2 j_max − 1}.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFft};
use crate::lattice::{apply_ba, enumerate_shears, other_axis, shear_count, shear_rank, Band};
use crate::windows::{WindowBank, WindowParams};

/// Half-width of the low-frequency box R; the cones start beyond it.
pub const BOX_HALF_WIDTH: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// ψ̂₁ ⊗ ψ̂₂ atoms cut by the cone indicators, low-pass Ψ̂ χ_R.
    ConeProjected,
    /// W ⊗ v atoms with boundary atoms glued across seams, low-pass Φ̂.
    Smooth,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cone_projected" | "cone-projected" => Ok(Variant::ConeProjected),
            "smooth" => Ok(Variant::Smooth),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::ConeProjected => "cone_projected",
            Variant::Smooth => "smooth",
        })
    }
}

fn default_period() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub d: usize,
    pub n: usize,
    pub j_max: u32,
    pub variant: Variant,
    /// Side length of the torus. 1 is the unit torus.
    #[serde(default = "default_period")]
    pub period: usize,
    #[serde(default)]
    pub windows: WindowParams,
}

impl FrameSpec {
    pub fn new(d: usize, n: usize, j_max: u32, variant: Variant) -> Self {
        FrameSpec {
            d,
            n,
            j_max,
            variant,
            period: 1,
            windows: WindowParams::default(),
        }
    }

    /// j_max = ⌊log₂(N/L)/2⌋ − 1, which leaves a guard band above the top scale.
    pub fn default_scales(d: usize, n: usize, variant: Variant) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return invalid(format!("N must be a power of two >= 16, got {n}"));
        }
        let j_max = n.trailing_zeros() / 2 - 1;
        Ok(FrameSpec::new(d, n, j_max, variant))
    }

    /// The torus is stretched to L = N / 4^{j_max}, so the lattice of the top
    /// scale matches the grid spacing and every band fits inside its sampling
    /// cell. Sequence-level synthesis is then exact for arbitrary grid data.
    pub fn sampling_compatible(d: usize, n: usize, j_max: u32, variant: Variant) -> Result<Self> {
        let top = 1usize.checked_shl(2 * j_max).unwrap_or(usize::MAX);
        if top > n {
            return invalid(format!("4^{j_max} exceeds N={n}"));
        }
        Ok(FrameSpec {
            period: n / top,
            ..FrameSpec::new(d, n, j_max, variant)
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::with_period(self.d, self.n, self.period)
    }

    pub fn validate(&self) -> Result<Grid> {
        if !(2..=3).contains(&self.d) {
            return invalid(format!("frames are built for d = 2 or 3, got {}", self.d));
        }
        let grid = self.grid()?;
        let fits = 1usize
            .checked_shl(2 * self.j_max)
            .is_some_and(|top| top * self.period <= self.n);
        if !fits {
            return invalid(format!(
                "j_max={} too large: need 4^j_max <= N/L = {}",
                self.j_max,
                self.n / self.period
            ));
        }
        WindowBank::new(self.windows.clone())?;
        Ok(grid)
    }

    /// 4^{j_max} L = N.
    pub fn is_sampling_compatible(&self) -> bool {
        (1usize << (2 * self.j_max)) * self.period == self.n
    }

    pub fn band_count(&self) -> usize {
        self.d
            * (0..=self.j_max)
                .map(|j| shear_count(j, self.d))
                .sum::<usize>()
    }
}

/// Nonzero values of a real mask, sorted by flat grid index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseMask {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseMask {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, idx: usize) -> f64 {
        match self.indices.binary_search(&(idx as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    pub fn dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpectrum {
    pub band: Band,
    pub mask: SparseMask,
}

/// Overlapping same-cone bands of one band, split by relative scale.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub same_scale: usize,
    pub coarser: usize,
    pub finer: usize,
    /// Overlaps with bands two or more scales away; always 0 for a valid frame.
    pub distant: usize,
}

impl Overlap {
    pub fn total(&self) -> usize {
        self.same_scale + self.coarser + self.finer + self.distant
    }
}

/// Upper bound 2^{d−1} + 3^{d−1} + 6^{d−1} on same-cone overlaps.
pub fn overlap_bound(d: usize) -> usize {
    let e = d as u32 - 1;
    2usize.pow(e) + 3usize.pow(e) + 6usize.pow(e)
}

/// Alternative count 3^{d−1} + 3^{d−1} + 6^{d−1} + 1 of overlapping terms,
/// including the band itself.
pub fn overlap_remark_count(d: usize) -> usize {
    let e = d as u32 - 1;
    2 * 3usize.pow(e) + 6usize.pow(e) + 1
}

#[derive(Clone, Debug)]
pub struct Frame {
    spec: FrameSpec,
    grid: Grid,
    bank: WindowBank,
    lowpass: SparseMask,
    atoms: Vec<AtomSpectrum>,
    /// offsets[cone * (j_max+1) + j] = id of the first band of (cone, j)
    offsets: Vec<usize>,
}

struct Contribution {
    band: u32,
    value: f64,
}

impl Frame {
    /// Builds every atom mask and the low-pass mask for `spec`.
    pub fn build(spec: FrameSpec) -> Result<Frame> {
        let grid = spec.validate()?;
        let bank = WindowBank::new(spec.windows.clone())?;
        let offsets = band_offsets(&spec);
        let mut frame = Frame {
            spec,
            grid,
            bank,
            lowpass: SparseMask::default(),
            atoms: Vec::new(),
            offsets,
        };

        let total = grid.len();
        let chunk = 4096usize;
        let pieces: Vec<Result<(Vec<(u32, f64)>, Vec<(u32, u32, f64)>)>> = (0..total
            .div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut low = Vec::new();
                let mut entries = Vec::new();
                let mut buf = Vec::new();
                let mut xi = vec![0.0; grid.d];
                for idx in c * chunk..((c + 1) * chunk).min(total) {
                    grid.frequency(idx, &mut xi);
                    let l = frame.lowpass_value(&xi);
                    if l != 0.0 {
                        low.push((idx as u32, l));
                    }
                    buf.clear();
                    frame.contributions(&xi, &mut buf)?;
                    for cb in &buf {
                        if cb.value != 0.0 {
                            entries.push((cb.band, idx as u32, cb.value));
                        }
                    }
                }
                Ok((low, entries))
            })
            .collect();

        let band_total = frame.spec.band_count();
        let mut counts = vec![0usize; band_total];
        let mut parts = Vec::with_capacity(pieces.len());
        for p in pieces {
            let (low, entries) = p?;
            for &(b, _, _) in &entries {
                counts[b as usize] += 1;
            }
            for (i, v) in low {
                frame.lowpass.indices.push(i);
                frame.lowpass.values.push(v);
            }
            parts.push(entries);
        }
        let mut masks: Vec<SparseMask> = counts
            .iter()
            .map(|&c| SparseMask {
                indices: Vec::with_capacity(c),
                values: Vec::with_capacity(c),
            })
            .collect();
        for entries in parts {
            for (b, i, v) in entries {
                let m = &mut masks[b as usize];
                m.indices.push(i);
                m.values.push(v);
            }
        }
        frame.atoms = frame
            .enumerate_bands()
            .into_iter()
            .zip(masks)
            .map(|(band, mask)| AtomSpectrum { band, mask })
            .collect();
        Ok(frame)
    }

    /// Reassembles a frame from stored masks, checking them against `spec`.
    pub fn from_parts(
        spec: FrameSpec,
        lowpass: SparseMask,
        atoms: Vec<AtomSpectrum>,
    ) -> Result<Frame> {
        let grid = spec.validate()?;
        let bank = WindowBank::new(spec.windows.clone())?;
        let offsets = band_offsets(&spec);
        let frame = Frame {
            spec,
            grid,
            bank,
            lowpass,
            atoms: Vec::new(),
            offsets,
        };
        let expected = frame.enumerate_bands();
        if expected.len() != atoms.len() || expected.iter().zip(&atoms).any(|(a, b)| *a != b.band) {
            return Err(Error::BandMismatch(
                "stored bands do not match the frame spec".into(),
            ));
        }
        let len = grid.len() as u32;
        for m in atoms
            .iter()
            .map(|a| &a.mask)
            .chain(std::iter::once(&frame.lowpass))
        {
            if m.indices.len() != m.values.len()
                || m.indices.windows(2).any(|w| w[0] >= w[1])
                || m.indices.last().is_some_and(|&i| i >= len)
            {
                return Err(Error::GridMismatch(
                    "mask indices are not sorted grid indices".into(),
                ));
            }
        }
        Ok(Frame { atoms, ..frame })
    }

    pub fn spec(&self) -> &FrameSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bank(&self) -> &WindowBank {
        &self.bank
    }

    pub fn lowpass(&self) -> &SparseMask {
        &self.lowpass
    }

    pub fn atoms(&self) -> &[AtomSpectrum] {
        &self.atoms
    }

    pub fn atom(&self, band_id: usize) -> &AtomSpectrum {
        &self.atoms[band_id]
    }

    /// Bands in canonical order: cone, then scale, then lexicographic shear.
    pub fn enumerate_bands(&self) -> Vec<Band> {
        let d = self.spec.d;
        let mut out = Vec::with_capacity(self.spec.band_count());
        for cone in 0..d {
            for j in 0..=self.spec.j_max {
                for shear in enumerate_shears(j, d) {
                    out.push(Band {
                        cone,
                        scale: j,
                        shear,
                    });
                }
            }
        }
        out
    }

    pub fn band_id(&self, band: &Band) -> Option<usize> {
        if band.cone >= self.spec.d || band.scale > self.spec.j_max || band.dim() != self.spec.d {
            return None;
        }
        let b = 1i64 << band.scale;
        if band.shear.iter().any(|l| l.abs() > b) {
            return None;
        }
        Some(self.band_id_unchecked(band.cone, band.scale, &band.shear))
    }

    fn band_id_unchecked(&self, cone: usize, j: u32, shear: &[i64]) -> usize {
        self.offsets[cone * (self.spec.j_max as usize + 1) + j as usize] + shear_rank(j, shear)
    }

    fn lowpass_value(&self, xi: &[f64]) -> f64 {
        match self.spec.variant {
            Variant::ConeProjected => {
                let in_box = xi.iter().all(|v| v.abs() <= BOX_HALF_WIDTH);
                if in_box {
                    self.bank.shear_lowpass(xi)
                } else {
                    0.0
                }
            }
            Variant::Smooth => self.bank.smooth_big_phi_hat(xi),
        }
    }

    /// Radial factor of scale j at ξ in cone `cone`.
    fn radial(&self, xi: &[f64], cone: usize, j: u32) -> Result<f64> {
        let s = 4f64.powi(-(j as i32));
        let last = j == self.spec.j_max;
        match self.spec.variant {
            Variant::ConeProjected => {
                let w = xi[cone] * s;
                Ok(if last {
                    self.bank.psi1_tail(w)
                } else {
                    self.bank.psi1_hat(w)
                })
            }
            Variant::Smooth => {
                let scaled: Vec<f64> = xi.iter().map(|v| v * s).collect();
                if last {
                    self.bank.w_tail(&scaled)
                } else {
                    self.bank.w(&scaled)
                }
            }
        }
    }

    /// All band values at a frequency point (bands not listed are zero).
    fn contributions(&self, xi: &[f64], out: &mut Vec<Contribution>) -> Result<()> {
        let d = self.spec.d;
        let mut cone = 0;
        for i in 1..d {
            if xi[i].abs() > xi[cone].abs() {
                cone = i;
            }
        }
        let a = xi[cone].abs();
        if a == 0.0 {
            return Ok(());
        }
        if self.spec.variant == Variant::ConeProjected && a <= BOX_HALF_WIDTH {
            return Ok(());
        }
        let mut choices: Vec<Vec<(i64, f64)>> = vec![Vec::with_capacity(2); d - 1];
        for j in 0..=self.spec.j_max {
            let r = self.radial(xi, cone, j)?;
            if r == 0.0 {
                continue;
            }
            let b = 1i64 << j;
            let bf = b as f64;
            for (t, ch) in choices.iter_mut().enumerate() {
                ch.clear();
                let s = bf * xi[other_axis(cone, t)] / xi[cone];
                let lo = s.floor() as i64;
                for l in [lo, lo + 1] {
                    if l.abs() <= b {
                        let v = self.bank.psi2_hat(s - l as f64);
                        if v > 0.0 {
                            ch.push((l, v));
                        }
                    }
                }
            }
            if choices.iter().any(|c| c.is_empty()) {
                continue;
            }
            let combos: usize = choices.iter().map(|c| c.len()).product();
            let mut shear = vec![0i64; d - 1];
            for mut r_idx in 0..combos {
                let mut val = r;
                for t in 0..d - 1 {
                    let c = &choices[t];
                    let (l, v) = c[r_idx % c.len()];
                    r_idx /= c.len();
                    shear[t] = l;
                    val *= v;
                }
                let boundary = shear.iter().any(|l| l.abs() == b);
                if self.spec.variant == Variant::Smooth && boundary {
                    let members = seam_class(cone, j, &shear);
                    let share = val / (members.len() as f64).sqrt();
                    for (c2, l2) in members {
                        out.push(Contribution {
                            band: self.band_id_unchecked(c2, j, &l2) as u32,
                            value: share,
                        });
                    }
                } else {
                    out.push(Contribution {
                        band: self.band_id_unchecked(cone, j, &shear) as u32,
                        value: val,
                    });
                }
            }
        }
        Ok(())
    }

    /// max over grid frequencies of |Σ mask² + lowpass² − 1|.
    pub fn verify_parseval(&self) -> f64 {
        let mut acc = vec![0.0f64; self.grid.len()];
        for (i, v) in self.lowpass.iter() {
            acc[i] += v * v;
        }
        for a in &self.atoms {
            for (i, v) in a.mask.iter() {
                acc[i] += v * v;
            }
        }
        acc.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }

    /// For each grid index, the ids of the bands whose mask is nonzero there.
    pub fn support_index(&self) -> SupportIndex {
        let len = self.grid.len();
        let mut start = vec![0u32; len + 1];
        for a in &self.atoms {
            for &i in &a.mask.indices {
                start[i as usize + 1] += 1;
            }
        }
        for i in 0..len {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut bands = vec![0u32; start[len] as usize];
        for (b, a) in self.atoms.iter().enumerate() {
            for &i in &a.mask.indices {
                let p = &mut fill[i as usize];
                bands[*p as usize] = b as u32;
                *p += 1;
            }
        }
        SupportIndex { start, bands }
    }

    /// Same-cone bands whose support meets the support of `band_id`.
    pub fn overlaps(&self, index: &SupportIndex, band_id: usize) -> Overlap {
        let me = &self.atoms[band_id].band;
        let mut seen = vec![false; self.atoms.len()];
        seen[band_id] = true;
        let mut out = Overlap::default();
        for &i in &self.atoms[band_id].mask.indices {
            for &b in index.at(i as usize) {
                let b = b as usize;
                if seen[b] {
                    continue;
                }
                seen[b] = true;
                let other = &self.atoms[b].band;
                if other.cone != me.cone {
                    continue;
                }
                match other.scale as i64 - me.scale as i64 {
                    0 => out.same_scale += 1,
                    -1 => out.coarser += 1,
                    1 => out.finer += 1,
                    _ => out.distant += 1,
                }
            }
        }
        out
    }

    pub fn overlap_count(&self, band_id: usize) -> usize {
        self.overlaps(&self.support_index(), band_id).total()
    }

    /// Spatial profile of an atom: inverse DFT of its mask, complex samples
    /// proportional to ψ_{A^{-j}B^{-ℓ}} on the grid.
    pub fn atom_profile(&self, fft: &GridFft, band_id: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); self.grid.len()];
        for (i, v) in self.atoms[band_id].mask.iter() {
            buf[i] = Complex64::new(v, 0.0);
        }
        fft.inverse(&mut buf);
        buf
    }

    /// sup over |x| ≤ L/4 of |ψ(x)|(1+|B^ℓA^j x|)^radius / max|ψ|.
    pub fn atom_spatial_profile(&self, fft: &GridFft, band_id: usize, radius: f64) -> f64 {
        let prof = self.atom_profile(fft, band_id);
        let band = &self.atoms[band_id].band;
        let peak = prof.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let lim = self.grid.period as f64 / 4.0;
        let mut x = vec![0.0; self.grid.d];
        let mut best = 0.0f64;
        for (i, v) in prof.iter().enumerate() {
            self.grid.offset(i, &mut x);
            if crate::windows::norm2(&x) > lim {
                continue;
            }
            let y = apply_ba(band.cone, band.scale, &band.shear, &x);
            let w = (1.0 + crate::windows::norm2(&y)).powf(radius);
            best = best.max(v.norm() * w / peak);
        }
        best
    }
}

/// Compressed map from grid index to the bands supported there.
pub struct SupportIndex {
    start: Vec<u32>,
    bands: Vec<u32>,
}

impl SupportIndex {
    pub fn at(&self, idx: usize) -> &[u32] {
        &self.bands[self.start[idx] as usize..self.start[idx + 1] as usize]
    }
}

fn band_offsets(spec: &FrameSpec) -> Vec<usize> {
    let mut offsets = Vec::new();
    let mut acc = 0;
    for _ in 0..spec.d {
        for j in 0..=spec.j_max {
            offsets.push(acc);
            acc += shear_count(j, spec.d);
        }
    }
    offsets
}

/// Boundary atoms that describe the same seam direction from each adjacent
/// cone. Direction u has u_cone = 1 and u_i = ℓ_i / 2^j; every axis with
/// |u_i| = 1 contributes a cone, with ℓ rescaled by 1/u_i.
pub fn seam_class(cone: usize, j: u32, shear: &[i64]) -> Vec<(usize, Vec<i64>)> {
    let d = shear.len() + 1;
    let b = 1i64 << j;
    let mut u = vec![0i64; d];
    u[cone] = b;
    for (t, &l) in shear.iter().enumerate() {
        u[other_axis(cone, t)] = l;
    }
    let mut members = Vec::new();
    for c2 in 0..d {
        if u[c2].abs() != b {
            continue;
        }
        let sign = u[c2].signum();
        let l2: Vec<i64> = (0..d - 1).map(|t| u[other_axis(c2, t)] * sign).collect();
        members.push((c2, l2));
    }
    members
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(FrameSpec::new(2, 256, 4, Variant::Smooth)
            .validate()
            .is_ok());
        assert!(FrameSpec::new(2, 256, 5, Variant::Smooth)
            .validate()
            .is_err());
        assert!(FrameSpec::new(4, 16, 1, Variant::Smooth)
            .validate()
            .is_err());
        assert!(FrameSpec::new(2, 100, 1, Variant::Smooth)
            .validate()
            .is_err());
        assert_eq!(
            FrameSpec::default_scales(2, 256, Variant::Smooth)
                .unwrap()
                .j_max,
            3
        );
        assert_eq!(
            FrameSpec::default_scales(3, 64, Variant::Smooth)
                .unwrap()
                .j_max,
            2
        );
        let c = FrameSpec::sampling_compatible(2, 256, 3, Variant::Smooth).unwrap();
        assert_eq!(c.period, 4);
        assert!(c.is_sampling_compatible());
        assert!("wavelet".parse::<Variant>().is_err());
    }

    #[test]
    fn band_count_example() {
        let f = Frame::build(FrameSpec::new(2, 256, 3, Variant::Smooth)).unwrap();
        assert_eq!(f.atoms().len() + 1, 69);
        for (id, a) in f.atoms().iter().enumerate() {
            assert_eq!(f.band_id(&a.band), Some(id));
        }
    }

    #[test]
    fn lowpass_at_dc_and_atoms_vanish_there() {
        for v in [Variant::Smooth, Variant::ConeProjected] {
            let f = Frame::build(FrameSpec::new(2, 64, 2, v)).unwrap();
            assert_eq!(f.lowpass().get(0), 1.0);
            assert!(f.atoms().iter().all(|a| a.mask.get(0) == 0.0));
        }
    }

    #[test]
    fn parseval_small_grids() {
        for v in [Variant::Smooth, Variant::ConeProjected] {
            for spec in [
                FrameSpec::new(2, 64, 2, v),
                FrameSpec::sampling_compatible(2, 64, 2, v).unwrap(),
                FrameSpec::new(3, 16, 1, v),
                FrameSpec::sampling_compatible(3, 32, 2, v).unwrap(),
            ] {
                let f = Frame::build(spec).unwrap();
                assert!(f.verify_parseval() < 1e-12);
            }
        }
    }

    #[test]
    fn inner_atoms_respect_declared_support() {
        let spec = FrameSpec::sampling_compatible(2, 128, 3, Variant::Smooth).unwrap();
        let f = Frame::build(spec).unwrap();
        let g = *f.grid();
        let mut xi = [0.0; 2];
        for a in f.atoms() {
            if a.band.is_boundary() || a.band.scale == f.spec().j_max {
                continue;
            }
            let j = a.band.scale as i32;
            for (i, _) in a.mask.iter() {
                g.frequency(i, &mut xi);
                let c = a.band.cone;
                let o = 1 - c;
                let hi = 2f64.powi(2 * j - 1);
                let lo = 2f64.powi(2 * j - 4);
                assert!(xi[c].abs() <= hi && xi[0].abs().max(xi[1].abs()) >= lo);
                let s = 2f64.powi(j) * xi[o] / xi[c] - a.band.shear[0] as f64;
                assert!(s.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn seam_class_examples() {
        assert_eq!(seam_class(0, 1, &[2]), vec![(0, vec![2]), (1, vec![2])]);
        assert_eq!(seam_class(0, 1, &[-2]), vec![(0, vec![-2]), (1, vec![-2])]);
        assert_eq!(seam_class(1, 0, &[-1]), vec![(0, vec![-1]), (1, vec![-1])]);
        let corner = seam_class(0, 2, &[4, -4]);
        assert_eq!(
            corner,
            vec![(0, vec![4, -4]), (1, vec![4, -4]), (2, vec![-4, -4])]
        );
        assert_eq!(
            seam_class(2, 1, &[2, 0]),
            vec![(0, vec![0, 2]), (2, vec![2, 0])]
        );
        // every member maps back to the same class
        for (c, l) in &corner {
            let mut again = seam_class(*c, 2, l);
            again.sort();
            let mut base = corner.clone();
            base.sort();
            assert_eq!(again, base);
        }
    }

    #[test]
    fn same_scale_neighbours_of_inner_band() {
        let f = Frame::build(FrameSpec::new(2, 256, 3, Variant::ConeProjected)).unwrap();
        let idx = f.support_index();
        let id = f.band_id(&Band::new(0, 2, vec![1]).unwrap()).unwrap();
        let o = f.overlaps(&idx, id);
        assert_eq!(o.same_scale, 2);
        assert_eq!(o.distant, 0);
        assert!(o.total() <= overlap_bound(2));
    }

    #[test]
    fn profile_radius_zero_is_one() {
        let f = Frame::build(FrameSpec::new(2, 64, 2, Variant::Smooth)).unwrap();
        let fft = GridFft::new(*f.grid());
        let id = f.band_id(&Band::new(0, 2, vec![0]).unwrap()).unwrap();
        let c0 = f.atom_spatial_profile(&fft, id, 0.0);
        assert!((c0 - 1.0).abs() < 1e-12);
        let c1 = f.atom_spatial_profile(&fft, id, 1.0);
        let c3 = f.atom_spatial_profile(&fft, id, 3.0);
        assert!(c0 <= c1 && c1 <= c3 && c3.is_finite());
    }
}
