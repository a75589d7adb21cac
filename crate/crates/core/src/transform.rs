//! Analysis and synthesis.
//!
//! Fourier coefficients follow f̂(ξ) = ∫_{[0,L)^d} f(x) e^{−2πi x·ξ} dx, so the
//! torus coefficient of a periodised atom ψ_M is exactly ψ̂(ξM) = mask(ξ).
//! A coefficient field is stored as its DFT restricted to the atom support,
//! which is all of it.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frame::{Frame, SparseMask};
use crate::grid::{Grid, GridFft};
use crate::lattice::{corner, other_axis, Band, DyadicIndex, ShearIndex};
use crate::windows::WindowBank;

/// Samples of a periodic function on a grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl GridFunction {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        Ok(GridFunction {
            grid,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        GridFunction::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            samples: vec![Complex64::default(); grid.len()],
            grid,
            spectrum: OnceLock::new(),
        }
    }

    /// The function whose unnormalised DFT is `dft`.
    pub fn from_dft(fft: &GridFft, mut dft: Vec<Complex64>) -> Result<Self> {
        let grid = *fft.grid();
        if dft.len() != grid.len() {
            return Err(Error::GridMismatch("spectrum length".into()));
        }
        let spectrum = dft.clone();
        fft.inverse(&mut dft);
        let lock = OnceLock::new();
        let _ = lock.set(spectrum);
        Ok(GridFunction {
            grid,
            samples: dft,
            spectrum: lock,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.re).collect()
    }

    /// Unnormalised DFT, cached.
    pub fn dft(&self, fft: &GridFft) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut buf = self.samples.clone();
            fft.forward(&mut buf);
            buf
        })
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        let samples = self.samples.iter().map(|v| v * c).collect();
        GridFunction {
            grid: self.grid,
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction {
            grid: self.grid,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    /// Quadrature L^p norm ((L/N)^d Σ|f|^p)^{1/p}, sup for p = ∞.
    pub fn norm_lp(&self, p: f64) -> f64 {
        lp_norm(
            self.samples.iter().map(|c| c.norm()),
            p,
            self.grid.cell_weight(),
        )
    }

    pub fn norm2(&self) -> f64 {
        self.norm_lp(2.0)
    }
}

/// ((w Σ v^p)^{1/p}) over nonnegative values, or max for p = ∞.
pub fn lp_norm(values: impl Iterator<Item = f64>, p: f64, weight: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        root(weight * values.map(|v| pow(v, p)).sum::<f64>(), p)
    }
}

/// v^e for v ≥ 0, with the common exponents done without `powf`.
#[inline]
pub(crate) fn pow(v: f64, e: f64) -> f64 {
    if e == 2.0 {
        v * v
    } else if e == 1.0 {
        v
    } else {
        v.powf(e)
    }
}

/// v^{1/e} for v ≥ 0.
#[inline]
pub(crate) fn root(v: f64, e: f64) -> f64 {
    if e == 2.0 {
        v.sqrt()
    } else if e == 1.0 {
        v
    } else {
        v.powf(1.0 / e)
    }
}

/// Per-band convolutions f ∗ ψ̃_{A^{-j}B^{-ℓ}}, stored as DFT values on the
/// band support.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    pub grid: Grid,
    pub lowpass: Vec<Complex64>,
    pub bands: Vec<Vec<Complex64>>,
}

impl CoefficientField {
    pub fn zeros(frame: &Frame) -> Self {
        CoefficientField {
            grid: *frame.grid(),
            lowpass: vec![Complex64::default(); frame.lowpass().len()],
            bands: frame
                .atoms()
                .iter()
                .map(|a| vec![Complex64::default(); a.mask.len()])
                .collect(),
        }
    }

    fn check(&self, frame: &Frame) -> Result<()> {
        frame.grid().check_same(&self.grid)?;
        let ok = self.lowpass.len() == frame.lowpass().len()
            && self.bands.len() == frame.atoms().len()
            && self
                .bands
                .iter()
                .zip(frame.atoms())
                .all(|(b, a)| b.len() == a.mask.len());
        if !ok {
            return Err(Error::BandMismatch(
                "field does not match the frame's bands".into(),
            ));
        }
        Ok(())
    }

    /// Grid samples of one band field.
    pub fn band_samples(&self, frame: &Frame, fft: &GridFft, band_id: usize) -> Vec<Complex64> {
        scatter_inverse(fft, &frame.atom(band_id).mask, &self.bands[band_id])
    }

    pub fn lowpass_samples(&self, frame: &Frame, fft: &GridFft) -> Vec<Complex64> {
        scatter_inverse(fft, frame.lowpass(), &self.lowpass)
    }

    /// Σ_bands ‖c‖² + ‖low‖², by Plancherel on the stored spectra.
    pub fn energy(&self) -> f64 {
        let g = self.grid;
        let scale = g.volume() / (g.len() as f64).powi(2);
        let sum: f64 = self
            .bands
            .iter()
            .chain(std::iter::once(&self.lowpass))
            .map(|b| b.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum();
        scale * sum
    }
}

fn scatter_inverse(fft: &GridFft, mask: &SparseMask, values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); fft.grid().len()];
    if values.iter().all(|v| *v == Complex64::default()) {
        return buf;
    }
    for (&i, &v) in mask.indices.iter().zip(values) {
        buf[i as usize] = v;
    }
    fft.inverse(&mut buf);
    buf
}

/// c = IDFT(DFT(f) · mask) for every band and the low-pass.
pub fn forward_grid(frame: &Frame, fft: &GridFft, f: &GridFunction) -> Result<CoefficientField> {
    frame.grid().check_same(f.grid())?;
    fft.grid().check_same(f.grid())?;
    let spec = f.dft(fft);
    let restrict = |m: &SparseMask| m.iter().map(|(i, v)| spec[i] * v).collect::<Vec<_>>();
    Ok(CoefficientField {
        grid: *f.grid(),
        lowpass: restrict(frame.lowpass()),
        bands: frame
            .atoms()
            .par_iter()
            .map(|a| restrict(&a.mask))
            .collect(),
    })
}

/// f̂ = Σ ĉ·mask + loŵ·lowmask.
pub fn inverse_grid(
    frame: &Frame,
    fft: &GridFft,
    field: &CoefficientField,
) -> Result<GridFunction> {
    field.check(frame)?;
    let mut acc = vec![Complex64::default(); frame.grid().len()];
    for ((i, v), c) in frame.lowpass().iter().zip(&field.lowpass) {
        acc[i] += c * v;
    }
    for (a, b) in frame.atoms().iter().zip(&field.bands) {
        for ((i, v), c) in a.mask.iter().zip(b) {
            acc[i] += c * v;
        }
    }
    GridFunction::from_dft(fft, acc)
}

/// Canonical translations of a band: all k with x_P = A^{-j}B^{-[ℓ]}k in
/// [0, L)^d. For axes other than the cone k_i ∈ [0, 2^j L); along the cone
/// k_c = Σ ℓ_i k_i + r with r ∈ [0, 4^j L). Enumerated with r fastest.
#[derive(Clone, Copy, Debug)]
pub struct Translations<'a> {
    band: &'a Band,
    period: i64,
}

impl<'a> Translations<'a> {
    pub fn new(band: &'a Band, period: usize) -> Self {
        Translations {
            band,
            period: period as i64,
        }
    }

    fn side(&self) -> i64 {
        (1i64 << self.band.scale) * self.period
    }

    fn depth(&self) -> i64 {
        (1i64 << (2 * self.band.scale)) * self.period
    }

    pub fn len(&self) -> usize {
        (self.depth() * self.side().pow(self.band.shear.len() as u32)) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn translation(&self, pos: usize) -> Vec<i64> {
        let d = self.band.dim();
        let c = self.band.cone;
        let depth = self.depth();
        let side = self.side();
        let r = pos as i64 % depth;
        let mut rest = pos as i64 / depth;
        let mut k = vec![0i64; d];
        for t in (0..d - 1).rev() {
            k[other_axis(c, t)] = rest % side;
            rest /= side;
        }
        k[c] = r + self
            .band
            .shear
            .iter()
            .enumerate()
            .map(|(t, &l)| l * k[other_axis(c, t)])
            .sum::<i64>();
        k
    }

    /// Position of the lattice point of k reduced mod L; k need not be canonical.
    pub fn position_mod(&self, k: &[i64]) -> usize {
        let c = self.band.cone;
        let side = self.side();
        let mut rank = 0i64;
        let mut head = k[c];
        for (t, &l) in self.band.shear.iter().enumerate() {
            let a = other_axis(c, t);
            rank = rank * side + k[a].rem_euclid(side);
            head -= l * k[a];
        }
        (rank * self.depth() + head.rem_euclid(self.depth())) as usize
    }

    /// Position of a canonical k, or None when x_P lies outside [0, L)^d.
    pub fn position(&self, k: &[i64]) -> Option<usize> {
        let pos = self.position_mod(k);
        (self.translation(pos) == k).then_some(pos)
    }

    /// Grid node of x_P (exact when 4^j L divides N, nearest node otherwise).
    pub fn node(&self, grid: &Grid, pos: usize) -> usize {
        let k = self.translation(pos);
        let p = corner(self.band, &k);
        let scale = (grid.n / grid.period) as i64;
        let den = 1i64 << p.log2_denominator;
        if scale % den == 0 {
            let m: Vec<i64> = p.numerators.iter().map(|&v| v * (scale / den)).collect();
            grid.wrap_index(&m)
        } else {
            grid.nearest_node(&p.to_f64())
        }
    }
}

/// Sequence coefficients of one band, in canonical translation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSequence {
    pub band: Band,
    pub values: Vec<Complex64>,
}

/// Frame coefficients: low-pass s_k for k ∈ Z^d ∩ [0, L)^d (row-major) and
/// s_Q per band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceCoefficients {
    pub d: usize,
    pub period: usize,
    pub lowpass: Vec<Complex64>,
    pub bands: Vec<BandSequence>,
}

impl SequenceCoefficients {
    pub fn zeros(frame: &Frame) -> Self {
        let g = frame.grid();
        SequenceCoefficients {
            d: g.d,
            period: g.period,
            lowpass: vec![Complex64::default(); g.period.pow(g.d as u32)],
            bands: frame
                .atoms()
                .iter()
                .map(|a| BandSequence {
                    values: vec![Complex64::default(); Translations::new(&a.band, g.period).len()],
                    band: a.band.clone(),
                })
                .collect(),
        }
    }

    fn band_position(&self, frame: &Frame, idx: &ShearIndex) -> Result<(usize, usize)> {
        let id = frame
            .band_id(&idx.band)
            .ok_or_else(|| Error::OutOfRange(format!("band {:?} not in frame", idx.band)))?;
        if idx.translation.len() != self.d {
            return Err(Error::OutOfRange("translation length".into()));
        }
        let pos = Translations::new(&idx.band, self.period)
            .position(&idx.translation)
            .ok_or_else(|| {
                Error::OutOfRange(format!(
                    "translation {:?} outside the torus",
                    idx.translation
                ))
            })?;
        Ok((id, pos))
    }

    pub fn get(&self, frame: &Frame, idx: &ShearIndex) -> Result<Complex64> {
        let (b, p) = self.band_position(frame, idx)?;
        Ok(self.bands[b].values[p])
    }

    pub fn set(&mut self, frame: &Frame, idx: &ShearIndex, value: Complex64) -> Result<()> {
        let (b, p) = self.band_position(frame, idx)?;
        self.bands[b].values[p] = value;
        Ok(())
    }

    pub fn add(&self, other: &SequenceCoefficients) -> Result<SequenceCoefficients> {
        if self.lowpass.len() != other.lowpass.len() || self.bands.len() != other.bands.len() {
            return Err(Error::BandMismatch("sequence shapes differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.lowpass.iter_mut().zip(&other.lowpass) {
            *a += b;
        }
        for (x, y) in out.bands.iter_mut().zip(&other.bands) {
            if x.band != y.band || x.values.len() != y.values.len() {
                return Err(Error::BandMismatch("sequence bands differ".into()));
            }
            for (a, b) in x.values.iter_mut().zip(&y.values) {
                *a += b;
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.lowpass.len() + self.bands.iter().map(|b| b.values.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, frame: &Frame) -> Result<()> {
        let g = frame.grid();
        if self.d != g.d || self.period != g.period || self.bands.len() != frame.atoms().len() {
            return Err(Error::BandMismatch(
                "sequence does not match the frame".into(),
            ));
        }
        if self.lowpass.len() != g.period.pow(g.d as u32) {
            return Err(Error::OutOfRange("low-pass translations".into()));
        }
        for (b, a) in self.bands.iter().zip(frame.atoms()) {
            if b.band != a.band {
                return Err(Error::BandMismatch(format!(
                    "band {:?} vs {:?}",
                    b.band, a.band
                )));
            }
            if b.values.len() != Translations::new(&a.band, g.period).len() {
                return Err(Error::OutOfRange(format!(
                    "translations of band {:?}",
                    b.band
                )));
            }
        }
        Ok(())
    }
}

/// Grid nodes of the integer translates k ∈ [0, L)^d.
fn integer_nodes(grid: &Grid) -> Vec<usize> {
    let l = grid.period;
    let step = (grid.n / grid.period) as i64;
    let count = l.pow(grid.d as u32);
    let mut k = vec![0i64; grid.d];
    (0..count)
        .map(|mut r| {
            for a in (0..grid.d).rev() {
                k[a] = (r % l) as i64 * step;
                r /= l;
            }
            grid.wrap_index(&k)
        })
        .collect()
}

/// s_Q = |Q|^{1/2} c_{j,ℓ}(x_Q), x_Q on the grid; s_k = (f ∗ Ψ̃)(k).
pub fn subsample(
    frame: &Frame,
    fft: &GridFft,
    field: &CoefficientField,
) -> Result<SequenceCoefficients> {
    field.check(frame)?;
    let grid = *frame.grid();
    let low = field.lowpass_samples(frame, fft);
    let lowpass = integer_nodes(&grid).into_iter().map(|i| low[i]).collect();
    let bands = (0..frame.atoms().len())
        .into_par_iter()
        .map(|b| {
            let band = &frame.atom(b).band;
            let c = field.band_samples(frame, fft, b);
            let tr = Translations::new(band, grid.period);
            let w = band.cell_volume().sqrt();
            let values = (0..tr.len()).map(|p| c[tr.node(&grid, p)] * w).collect();
            BandSequence {
                band: band.clone(),
                values,
            }
        })
        .collect();
    Ok(SequenceCoefficients {
        d: grid.d,
        period: grid.period,
        lowpass,
        bands,
    })
}

/// T s = Σ_k s_k Ψ(· − k) + Σ_Q s_Q ψ_Q, assembled per band in frequency.
pub fn synthesize_sequence(
    frame: &Frame,
    fft: &GridFft,
    s: &SequenceCoefficients,
) -> Result<GridFunction> {
    s.check(frame)?;
    let grid = *frame.grid();
    let spread =
        |mask: &SparseMask, nodes: &mut dyn Iterator<Item = (usize, Complex64)>, w: f64| {
            let mut buf = vec![Complex64::default(); grid.len()];
            let mut any = false;
            for (i, v) in nodes {
                buf[i] += v;
                any = true;
            }
            if !any {
                return vec![Complex64::default(); mask.len()];
            }
            fft.forward(&mut buf);
            mask.iter()
                .map(|(i, m)| buf[i] * (m * w))
                .collect::<Vec<_>>()
        };
    let parts: Vec<Vec<Complex64>> = (0..frame.atoms().len())
        .into_par_iter()
        .map(|b| {
            let a = frame.atom(b);
            let tr = Translations::new(&a.band, grid.period);
            let vals = &s.bands[b].values;
            let mut it = vals
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != Complex64::default())
                .map(|(p, v)| (tr.node(&grid, p), *v));
            spread(&a.mask, &mut it, a.band.cell_volume().sqrt())
        })
        .collect();
    let nodes = integer_nodes(&grid);
    let mut it = nodes.iter().zip(&s.lowpass).map(|(&i, &v)| (i, v));
    let low = spread(frame.lowpass(), &mut it, 1.0);

    let mut acc = vec![Complex64::default(); grid.len()];
    for ((i, _), v) in frame.lowpass().iter().zip(&low) {
        acc[i] += v;
    }
    for (a, part) in frame.atoms().iter().zip(&parts) {
        for (&i, v) in a.mask.indices.iter().zip(part) {
            acc[i as usize] += v;
        }
    }
    // samples = L^{-d} Σ_ξ ĝ(ξ) e^{2πi x·ξ} = (N/L)^d · IDFT(ĝ)
    let scale = 1.0 / grid.cell_weight();
    acc.iter_mut().for_each(|v| *v *= scale);
    GridFunction::from_dft(fft, acc)
}

/// The atom ψ_Q as a grid function.
pub fn atom(frame: &Frame, fft: &GridFft, idx: &ShearIndex) -> Result<GridFunction> {
    let mut s = SequenceCoefficients::zeros(frame);
    s.set(frame, idx, Complex64::new(1.0, 0.0))?;
    synthesize_sequence(frame, fft, &s)
}

/// Radial Littlewood-Paley bank on a grid: low-pass Φ̂ and levels
/// φ̂(2^{-ν}ξ) for ν < ν_max; level ν_max carries sqrt(1 − Φ̂²(2^{-ν_max}ξ)).
#[derive(Clone, Debug)]
pub struct DyadicBank {
    grid: Grid,
    nu_max: u32,
    lowpass: SparseMask,
    levels: Vec<SparseMask>,
}

impl DyadicBank {
    /// Largest ν with 2^{ν+1} ≤ N/(2L).
    pub fn default_nu_max(grid: &Grid) -> Result<u32> {
        let ny = grid.n / (2 * grid.period);
        if ny < 2 {
            return invalid("grid too coarse for a dyadic level");
        }
        Ok(ny.trailing_zeros() - 1)
    }

    pub fn new(bank: &WindowBank, grid: Grid, nu_max: Option<u32>) -> Result<Self> {
        let top = DyadicBank::default_nu_max(&grid)?;
        let nu_max = nu_max.unwrap_or(top);
        if nu_max > top {
            return invalid(format!("nu_max={nu_max} exceeds {top} for this grid"));
        }
        let mut xi = vec![0.0; grid.d];
        let mut scaled = vec![0.0; grid.d];
        let mut lowpass = SparseMask::default();
        let mut levels = vec![SparseMask::default(); nu_max as usize + 1];
        for idx in 0..grid.len() {
            grid.frequency(idx, &mut xi);
            let v = bank.dyadic_big_phi_hat(&xi);
            if v != 0.0 {
                lowpass.indices.push(idx as u32);
                lowpass.values.push(v);
            }
            for nu in 0..=nu_max {
                let s = 2f64.powi(-(nu as i32));
                for (o, x) in scaled.iter_mut().zip(&xi) {
                    *o = x * s;
                }
                let v = if nu == nu_max {
                    bank.dyadic_tail(&scaled)
                } else {
                    bank.dyadic_phi_hat(&scaled)
                };
                if v != 0.0 {
                    levels[nu as usize].indices.push(idx as u32);
                    levels[nu as usize].values.push(v);
                }
            }
        }
        Ok(DyadicBank {
            grid,
            nu_max,
            lowpass,
            levels,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nu_max(&self) -> u32 {
        self.nu_max
    }

    pub fn level(&self, nu: u32) -> &SparseMask {
        &self.levels[nu as usize]
    }

    pub fn lowpass(&self) -> &SparseMask {
        &self.lowpass
    }

    pub fn verify_partition(&self) -> f64 {
        let mut acc = vec![0.0; self.grid.len()];
        for m in self.levels.iter().chain(std::iter::once(&self.lowpass)) {
            for (i, v) in m.iter() {
                acc[i] += v * v;
            }
        }
        acc.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Dyadic convolutions f ∗ Φ̃ and f ∗ φ̃_ν as spectra on their supports.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicField {
    pub grid: Grid,
    pub lowpass: Vec<Complex64>,
    pub levels: Vec<Vec<Complex64>>,
}

impl DyadicField {
    pub fn level_samples(&self, bank: &DyadicBank, fft: &GridFft, nu: u32) -> Vec<Complex64> {
        scatter_inverse(fft, bank.level(nu), &self.levels[nu as usize])
    }

    pub fn lowpass_samples(&self, bank: &DyadicBank, fft: &GridFft) -> Vec<Complex64> {
        scatter_inverse(fft, bank.lowpass(), &self.lowpass)
    }
}

pub fn dyadic_forward(bank: &DyadicBank, fft: &GridFft, f: &GridFunction) -> Result<DyadicField> {
    bank.grid.check_same(f.grid())?;
    let spec = f.dft(fft);
    let restrict = |m: &SparseMask| m.iter().map(|(i, v)| spec[i] * v).collect::<Vec<_>>();
    Ok(DyadicField {
        grid: bank.grid,
        lowpass: restrict(&bank.lowpass),
        levels: bank.levels.iter().map(restrict).collect(),
    })
}

pub fn dyadic_inverse(
    bank: &DyadicBank,
    fft: &GridFft,
    field: &DyadicField,
) -> Result<GridFunction> {
    bank.grid.check_same(&field.grid)?;
    if field.levels.len() != bank.levels.len()
        || field
            .levels
            .iter()
            .zip(&bank.levels)
            .any(|(a, b)| a.len() != b.len())
        || field.lowpass.len() != bank.lowpass.len()
    {
        return Err(Error::BandMismatch(
            "dyadic field does not match the bank".into(),
        ));
    }
    let mut acc = vec![Complex64::default(); bank.grid.len()];
    for (m, vals) in bank
        .levels
        .iter()
        .zip(&field.levels)
        .chain(std::iter::once((&bank.lowpass, &field.lowpass)))
    {
        for ((i, v), c) in m.iter().zip(vals) {
            acc[i] += c * v;
        }
    }
    GridFunction::from_dft(fft, acc)
}

/// Dyadic sequence s_{ν,k} = |Q_ν|^{1/2}(f ∗ φ̃_ν)(2^{-ν}k), k ∈ [0, 2^ν L)^d
/// row-major, and s_k = (f ∗ Φ̃)(k).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicSequence {
    pub d: usize,
    pub period: usize,
    pub lowpass: Vec<Complex64>,
    pub levels: Vec<Vec<Complex64>>,
}

impl DyadicSequence {
    pub fn zeros(bank: &DyadicBank) -> Self {
        let g = bank.grid;
        DyadicSequence {
            d: g.d,
            period: g.period,
            lowpass: vec![Complex64::default(); g.period.pow(g.d as u32)],
            levels: (0..=bank.nu_max)
                .map(|nu| vec![Complex64::default(); ((1usize << nu) * g.period).pow(g.d as u32)])
                .collect(),
        }
    }

    pub fn position(&self, idx: &DyadicIndex) -> Option<usize> {
        let side = (1i64 << idx.level) * self.period as i64;
        if idx.level as usize >= self.levels.len() || idx.translation.len() != self.d {
            return None;
        }
        if idx.translation.iter().any(|&k| k < 0 || k >= side) {
            return None;
        }
        Some(idx.translation.iter().fold(0i64, |acc, &k| acc * side + k) as usize)
    }

    pub fn translation(&self, level: u32, pos: usize) -> Vec<i64> {
        let side = (1usize << level) * self.period;
        let mut k = vec![0i64; self.d];
        let mut r = pos;
        for a in (0..self.d).rev() {
            k[a] = (r % side) as i64;
            r /= side;
        }
        k
    }
}

fn level_nodes(grid: &Grid, nu: u32) -> Vec<usize> {
    let side = (1usize << nu) * grid.period;
    let step = (grid.n / side) as i64;
    let mut k = vec![0i64; grid.d];
    (0..side.pow(grid.d as u32))
        .map(|mut r| {
            for a in (0..grid.d).rev() {
                k[a] = (r % side) as i64 * step;
                r /= side;
            }
            grid.wrap_index(&k)
        })
        .collect()
}

pub fn dyadic_subsample(bank: &DyadicBank, fft: &GridFft, field: &DyadicField) -> DyadicSequence {
    let g = bank.grid;
    let low = field.lowpass_samples(bank, fft);
    let lowpass = integer_nodes(&g).into_iter().map(|i| low[i]).collect();
    let levels = (0..=bank.nu_max)
        .into_par_iter()
        .map(|nu| {
            let c = field.level_samples(bank, fft, nu);
            let w = 2f64.powi(-((nu as usize * g.d) as i32)).sqrt();
            level_nodes(&g, nu).into_iter().map(|i| c[i] * w).collect()
        })
        .collect();
    DyadicSequence {
        d: g.d,
        period: g.period,
        lowpass,
        levels,
    }
}

/// Σ_k s_k Φ(·−k) + Σ s_{ν,k} φ_{ν,k} on the grid.
pub fn dyadic_synthesize(
    bank: &DyadicBank,
    fft: &GridFft,
    s: &DyadicSequence,
) -> Result<GridFunction> {
    let g = bank.grid;
    if s.levels.len() != bank.levels.len() || s.d != g.d || s.period != g.period {
        return Err(Error::BandMismatch(
            "dyadic sequence does not match the bank".into(),
        ));
    }
    let mut acc = vec![Complex64::default(); g.len()];
    let mut add =
        |mask: &SparseMask, nodes: Vec<usize>, vals: &[Complex64], w: f64| -> Result<()> {
            if nodes.len() != vals.len() {
                return Err(Error::OutOfRange("dyadic translations".into()));
            }
            let mut buf = vec![Complex64::default(); g.len()];
            for (i, v) in nodes.into_iter().zip(vals) {
                buf[i] += v;
            }
            fft.forward(&mut buf);
            for (i, m) in mask.iter() {
                acc[i] += buf[i] * (m * w);
            }
            Ok(())
        };
    add(&bank.lowpass, integer_nodes(&g), &s.lowpass, 1.0)?;
    for nu in 0..=bank.nu_max {
        let w = 2f64.powi(-((nu as usize * g.d) as i32)).sqrt();
        add(
            &bank.levels[nu as usize],
            level_nodes(&g, nu),
            &s.levels[nu as usize],
            w,
        )?;
    }
    let scale = 1.0 / g.cell_weight();
    acc.iter_mut().for_each(|v| *v *= scale);
    GridFunction::from_dft(fft, acc)
}
