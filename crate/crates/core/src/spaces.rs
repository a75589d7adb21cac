//! Besov and Triebel-Lizorkin functionals, shear-anisotropic and dyadic,
//! plus the maximal functions used to compare them.
//!
//! All L^p norms are quadratures on the torus with node weight (L/N)^d.
//! Exponents may be `f64::INFINITY`; values below one give quasi-norms.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frame::Frame;
use crate::grid::{Grid, GridFft};
use crate::lattice::{corner, other_axis, Band};
use crate::transform::{
    dyadic_forward, forward_grid, lp_norm, pow, root, BandSequence, CoefficientField, DyadicBank,
    DyadicField, DyadicSequence, GridFunction, SequenceCoefficients, Translations,
};

mod exponent {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Num(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => super::parse_exponent(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a number or `inf`/`infinity`.
pub fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| format!("bad exponent `{s}`: {e}")),
    }
}

/// (α, p, q).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    pub alpha: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
}

impl SmoothnessParams {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        let s = SmoothnessParams { alpha, p, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return invalid("alpha must be finite");
        }
        if !(self.p > 0.0) || !(self.q > 0.0) {
            return invalid(format!("need p, q > 0 (got p={}, q={})", self.p, self.q));
        }
        Ok(())
    }

    fn validate_tl(&self) -> Result<()> {
        self.validate()?;
        if self.p.is_infinite() {
            return invalid("Triebel-Lizorkin norms need p < inf");
        }
        Ok(())
    }
}

/// Parameters of s*_{r,N} and of the Peetre maximal function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalParams {
    pub r: f64,
    /// The decay exponent N of s*_{r,N}.
    pub decay: f64,
    pub lambda: f64,
}

impl MaximalParams {
    pub fn new(r: f64, decay: f64, lambda: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return invalid(format!("r must be positive and finite, got {r}"));
        }
        if !(decay >= 0.0) || !decay.is_finite() {
            return invalid(format!("decay must be finite and >= 0, got {decay}"));
        }
        if !(lambda > 0.0) {
            return invalid(format!("lambda must be positive, got {lambda}"));
        }
        Ok(MaximalParams { r, decay, lambda })
    }

    /// Smallest admissible decay, (d+1)·max(1, r/q, r/p), exclusive.
    pub fn decay_threshold(d: usize, r: f64, p: f64, q: f64) -> f64 {
        (d as f64 + 1.0) * 1f64.max(r / q).max(r / p)
    }
}

/// Which coefficients enter (s*)_Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// P ranges over the band of Q, weight 2^j with j the scale of Q.
    SameBand,
    /// P ranges over every band of Q's cone with scale j_P ≤ scale of Q,
    /// weight 2^{j_P}.
    Literal,
}

/// Norm selector for the CLI and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    #[serde(rename = "BAB")]
    BesovAb,
    #[serde(rename = "FAB")]
    TlAb,
    #[serde(rename = "bAB")]
    BesovAbSeq,
    #[serde(rename = "fAB")]
    TlAbSeq,
    B,
    F,
    #[serde(rename = "b")]
    BSeq,
    #[serde(rename = "f")]
    FSeq,
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "BAB" => Space::BesovAb,
            "FAB" => Space::TlAb,
            "bAB" => Space::BesovAbSeq,
            "fAB" => Space::TlAbSeq,
            "B" => Space::B,
            "F" => Space::F,
            "b" => Space::BSeq,
            "f" => Space::FSeq,
            _ => return Err(Error::UnknownVariant(s.into())),
        })
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::BesovAb => "BAB",
            Space::TlAb => "FAB",
            Space::BesovAbSeq => "bAB",
            Space::TlAbSeq => "fAB",
            Space::B => "B",
            Space::F => "F",
            Space::BSeq => "b",
            Space::FSeq => "f",
        })
    }
}

/// (Σ v^q)^{1/q}, or max for q = ∞, over nonnegative terms.
pub fn lq(values: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.into_iter().fold(0.0, f64::max)
    } else {
        root(values.into_iter().map(|v| pow(v, q)).sum::<f64>(), q)
    }
}

/// Pointwise accumulator for L^p(ℓ^q): holds Σ v^q, or max v for q = ∞.
#[derive(Clone, Debug)]
struct Pointwise {
    q: f64,
    acc: Vec<f64>,
}

impl Pointwise {
    fn new(len: usize, q: f64) -> Self {
        Pointwise {
            q,
            acc: vec![0.0; len],
        }
    }

    fn add(&mut self, i: usize, v: f64) {
        if self.q.is_infinite() {
            self.acc[i] = self.acc[i].max(v);
        } else {
            self.acc[i] += pow(v, self.q);
        }
    }

    fn merge(mut self, other: Pointwise) -> Pointwise {
        for (a, b) in self.acc.iter_mut().zip(other.acc) {
            if self.q.is_infinite() {
                *a = a.max(b);
            } else {
                *a += b;
            }
        }
        self
    }

    fn lp(&self, p: f64, weight: f64) -> f64 {
        let q = self.q;
        let vals = self
            .acc
            .iter()
            .map(|&s| if q.is_infinite() { s } else { root(s, q) });
        lp_norm(vals, p, weight)
    }
}

/// |Q_j|^{-α} for a band.
fn band_weight(band: &Band, alpha: f64) -> f64 {
    band.cell_volume().powf(-alpha)
}

/// B^{α,q}_p(AB) from a precomputed field.
pub fn besov_ab_norm_field(
    frame: &Frame,
    fft: &GridFft,
    field: &CoefficientField,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate()?;
    let g = frame.grid();
    let w = g.cell_weight();
    let low = lp_norm(
        field.lowpass_samples(frame, fft).iter().map(|c| c.norm()),
        params.p,
        w,
    );
    let terms: Vec<f64> = (0..frame.atoms().len())
        .into_par_iter()
        .map(|b| {
            let c = field.band_samples(frame, fft, b);
            band_weight(&frame.atom(b).band, params.alpha)
                * lp_norm(c.iter().map(|v| v.norm()), params.p, w)
        })
        .collect();
    Ok(low + lq(terms, params.q))
}

pub fn besov_ab_norm(
    frame: &Frame,
    fft: &GridFft,
    f: &GridFunction,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate()?;
    let field = forward_grid(frame, fft, f)?;
    besov_ab_norm_field(frame, fft, &field, params)
}

/// F^{α,q}_p(AB) from a precomputed field.
pub fn tl_ab_norm_field(
    frame: &Frame,
    fft: &GridFft,
    field: &CoefficientField,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate_tl()?;
    let g = frame.grid();
    let w = g.cell_weight();
    let low = lp_norm(
        field.lowpass_samples(frame, fft).iter().map(|c| c.norm()),
        params.p,
        w,
    );
    let agg = (0..frame.atoms().len())
        .into_par_iter()
        .fold(
            || Pointwise::new(g.len(), params.q),
            |mut acc, b| {
                let c = field.band_samples(frame, fft, b);
                let s = band_weight(&frame.atom(b).band, params.alpha);
                for (i, v) in c.iter().enumerate() {
                    acc.add(i, s * v.norm());
                }
                acc
            },
        )
        .reduce(|| Pointwise::new(g.len(), params.q), Pointwise::merge);
    Ok(low + agg.lp(params.p, w))
}

pub fn tl_ab_norm(
    frame: &Frame,
    fft: &GridFft,
    f: &GridFunction,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate_tl()?;
    let field = forward_grid(frame, fft, f)?;
    tl_ab_norm_field(frame, fft, &field, params)
}

/// ‖s‖ in b^{α,q}_p(AB): (Σ|s_k|^p)^{1/p} plus the ℓ^q over bands of
/// (Σ_Q [|Q|^{-α+d/(p(d+1))-1/2}|s_Q|]^p)^{1/p}.
pub fn besov_seq_norm(s: &SequenceCoefficients, params: &SmoothnessParams) -> Result<f64> {
    params.validate()?;
    let d = s.d as f64;
    let p = params.p;
    let low = lp_norm(s.lowpass.iter().map(|c| c.norm()), p, 1.0);
    let expo = -params.alpha + d / (p * (d + 1.0)) - 0.5;
    let terms = s.bands.iter().map(|b| {
        let w = b.band.cell_volume().powf(expo);
        lp_norm(b.values.iter().map(|c| c.norm() * w), p, 1.0)
    });
    Ok(low + lq(terms, params.q))
}

/// Per band, the grid node → translation position map of the cell tiling:
/// k = ⌊L·M·x_node / N⌋ reduced to a canonical translation.
pub fn cell_positions(grid: &Grid, band: &Band) -> Vec<u32> {
    let m = band.matrix();
    let (d, n) = (grid.d, grid.n);
    let shift = n.trailing_zeros();
    let period = grid.period as i64;
    // table[(c·d + r)·N + x] = M_rc · x · L; N and L are powers of two, so
    // floors and remainders below are shifts and masks
    let mut table = vec![0i64; d * d * n];
    for c in 0..d {
        for r in 0..d {
            for x in 0..n {
                table[(c * d + r) * n + x] = m.get(r, c) * x as i64 * period;
            }
        }
    }
    let side = (1i64 << band.scale) * period;
    let depth = (1i64 << (2 * band.scale)) * period;
    let cone = band.cone;
    let others: Vec<usize> = (0..d - 1).map(|t| other_axis(cone, t)).collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut coords = vec![0usize; d];
    let mut k = vec![0i64; d];
    for _ in 0..grid.len() {
        for (r, kr) in k.iter_mut().enumerate() {
            let num: i64 = (0..d).map(|c| table[(c * d + r) * n + coords[c]]).sum();
            *kr = num >> shift;
        }
        let mut rank = 0i64;
        let mut head = k[cone];
        for (&a, &l) in others.iter().zip(&band.shear) {
            rank = rank * side + (k[a] & (side - 1));
            head -= l * k[a];
        }
        out.push((rank * depth + (head & (depth - 1))) as u32);
        for a in (0..d).rev() {
            coords[a] += 1;
            if coords[a] < n {
                break;
            }
            coords[a] = 0;
        }
    }
    out
}

/// ‖s‖ in f^{α,q}_p(AB): L^p of (Σ_Q (|Q|^{-α}|s_Q|χ̃_Q)^q)^{1/q}, with the
/// cells sampled at grid nodes, plus (Σ|s_k|^p)^{1/p}.
pub fn tl_seq_norm(
    frame: &Frame,
    s: &SequenceCoefficients,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate_tl()?;
    let g = *frame.grid();
    if s.d != g.d || s.period != g.period || s.bands.len() != frame.atoms().len() {
        return Err(Error::BandMismatch(
            "sequence does not match the frame".into(),
        ));
    }
    let low = lp_norm(s.lowpass.iter().map(|c| c.norm()), params.p, 1.0);
    let agg = s
        .bands
        .par_iter()
        .fold(
            || Pointwise::new(g.len(), params.q),
            |mut acc, b| {
                if b.values.iter().all(|v| v.norm() == 0.0) {
                    return acc;
                }
                let vol = b.band.cell_volume();
                let w = vol.powf(-params.alpha - 0.5);
                for (i, pos) in cell_positions(&g, &b.band).into_iter().enumerate() {
                    let v = b.values[pos as usize].norm();
                    if v != 0.0 {
                        acc.add(i, w * v);
                    }
                }
                acc
            },
        )
        .reduce(|| Pointwise::new(g.len(), params.q), Pointwise::merge);
    Ok(low + agg.lp(params.p, g.cell_weight()))
}

/// B^{α,q}_p with the radial bank: ‖Φ∗f‖_p + (Σ_ν [2^{να}‖φ_ν∗f‖_p]^q)^{1/q}.
pub fn dyadic_besov_norm_field(
    bank: &DyadicBank,
    fft: &GridFft,
    field: &DyadicField,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate()?;
    let w = bank.grid().cell_weight();
    let low = lp_norm(
        field.lowpass_samples(bank, fft).iter().map(|c| c.norm()),
        params.p,
        w,
    );
    let terms: Vec<f64> = (0..=bank.nu_max())
        .into_par_iter()
        .map(|nu| {
            let c = field.level_samples(bank, fft, nu);
            2f64.powf(nu as f64 * params.alpha) * lp_norm(c.iter().map(|v| v.norm()), params.p, w)
        })
        .collect();
    Ok(low + lq(terms, params.q))
}

pub fn dyadic_besov_norm(
    bank: &DyadicBank,
    fft: &GridFft,
    f: &GridFunction,
    params: &SmoothnessParams,
) -> Result<f64> {
    dyadic_besov_norm_field(bank, fft, &dyadic_forward(bank, fft, f)?, params)
}

pub fn dyadic_tl_norm_field(
    bank: &DyadicBank,
    fft: &GridFft,
    field: &DyadicField,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate_tl()?;
    let g = *bank.grid();
    let w = g.cell_weight();
    let low = lp_norm(
        field.lowpass_samples(bank, fft).iter().map(|c| c.norm()),
        params.p,
        w,
    );
    let agg = (0..=bank.nu_max())
        .into_par_iter()
        .fold(
            || Pointwise::new(g.len(), params.q),
            |mut acc, nu| {
                let c = field.level_samples(bank, fft, nu);
                let s = 2f64.powf(nu as f64 * params.alpha);
                for (i, v) in c.iter().enumerate() {
                    acc.add(i, s * v.norm());
                }
                acc
            },
        )
        .reduce(|| Pointwise::new(g.len(), params.q), Pointwise::merge);
    Ok(low + agg.lp(params.p, w))
}

pub fn dyadic_tl_norm(
    bank: &DyadicBank,
    fft: &GridFft,
    f: &GridFunction,
    params: &SmoothnessParams,
) -> Result<f64> {
    dyadic_tl_norm_field(bank, fft, &dyadic_forward(bank, fft, f)?, params)
}

/// b^{α,q}_p: weights |Q|^{-α/d+1/p-1/2}, plus (Σ|s_k|^p)^{1/p}.
pub fn dyadic_besov_seq_norm(s: &DyadicSequence, params: &SmoothnessParams) -> Result<f64> {
    params.validate()?;
    let d = s.d as f64;
    let p = params.p;
    let low = lp_norm(s.lowpass.iter().map(|c| c.norm()), p, 1.0);
    let terms = s.levels.iter().enumerate().map(|(nu, vals)| {
        let vol = 2f64.powf(-(nu as f64) * d);
        let w = vol.powf(-params.alpha / d + 1.0 / p - 0.5);
        lp_norm(vals.iter().map(|c| c.norm() * w), p, 1.0)
    });
    Ok(low + lq(terms, params.q))
}

/// f^{α,q}_p: L^p of (Σ (|Q|^{-α/d}|s_Q|χ̃_Q)^q)^{1/q}, plus (Σ|s_k|^p)^{1/p}.
pub fn dyadic_tl_seq_norm(
    grid: &Grid,
    s: &DyadicSequence,
    params: &SmoothnessParams,
) -> Result<f64> {
    params.validate_tl()?;
    if s.d != grid.d || s.period != grid.period {
        return Err(Error::GridMismatch(
            "dyadic sequence does not match the grid".into(),
        ));
    }
    let d = grid.d;
    let low = lp_norm(s.lowpass.iter().map(|c| c.norm()), params.p, 1.0);
    let agg = s
        .levels
        .par_iter()
        .enumerate()
        .fold(
            || Pointwise::new(grid.len(), params.q),
            |mut acc, (nu, vals)| {
                let side = (1usize << nu) * grid.period;
                let vol = 2f64.powf(-((nu * d) as f64));
                let w = vol.powf(-params.alpha / d as f64 - 0.5);
                let mut coords = vec![0usize; d];
                for i in 0..grid.len() {
                    grid.unravel(i, &mut coords);
                    // cube index ⌊2^ν x⌋ with x = n L / N
                    let pos = coords
                        .iter()
                        .fold(0usize, |a, &c| a * side + c * side / grid.n);
                    let v = vals[pos].norm();
                    if v != 0.0 {
                        acc.add(i, w * v);
                    }
                }
                acc
            },
        )
        .reduce(|| Pointwise::new(grid.len(), params.q), Pointwise::merge);
    Ok(low + agg.lp(params.p, grid.cell_weight()))
}

/// Pointwise magnitudes of every band of a decomposition, for evaluating
/// many (α, p, q) on the same data. Band b carries the weight base w_b with
/// weight w_b^α: 1/|Q_j| for shear bands, 2^ν for dyadic levels.
#[derive(Clone, Debug)]
pub struct FieldMagnitudes {
    pub cell_weight: f64,
    pub lowpass: Vec<f64>,
    pub bands: Vec<(f64, Vec<f64>)>,
}

impl FieldMagnitudes {
    pub fn shear(frame: &Frame, fft: &GridFft, field: &CoefficientField) -> Self {
        let abs = |v: Vec<Complex64>| v.into_iter().map(|c| c.norm()).collect::<Vec<_>>();
        FieldMagnitudes {
            cell_weight: frame.grid().cell_weight(),
            lowpass: abs(field.lowpass_samples(frame, fft)),
            bands: (0..frame.atoms().len())
                .into_par_iter()
                .map(|b| {
                    (
                        1.0 / frame.atom(b).band.cell_volume(),
                        abs(field.band_samples(frame, fft, b)),
                    )
                })
                .collect(),
        }
    }

    pub fn dyadic(bank: &DyadicBank, fft: &GridFft, field: &DyadicField) -> Self {
        let abs = |v: Vec<Complex64>| v.into_iter().map(|c| c.norm()).collect::<Vec<_>>();
        FieldMagnitudes {
            cell_weight: bank.grid().cell_weight(),
            lowpass: abs(field.lowpass_samples(bank, fft)),
            bands: (0..=bank.nu_max())
                .into_par_iter()
                .map(|nu| {
                    (
                        2f64.powi(nu as i32),
                        abs(field.level_samples(bank, fft, nu)),
                    )
                })
                .collect(),
        }
    }

    fn low(&self, p: f64) -> f64 {
        lp_norm(self.lowpass.iter().copied(), p, self.cell_weight)
    }

    /// Besov-type: low-pass L^p plus ℓ^q over bands of w^α‖c_b‖_p.
    pub fn besov(&self, params: &SmoothnessParams) -> Result<f64> {
        params.validate()?;
        let terms = self.bands.iter().map(|(base, c)| {
            base.powf(params.alpha) * lp_norm(c.iter().copied(), params.p, self.cell_weight)
        });
        Ok(self.low(params.p) + lq(terms, params.q))
    }

    /// Triebel-Lizorkin-type: low-pass L^p plus L^p of the pointwise ℓ^q.
    pub fn tl(&self, params: &SmoothnessParams) -> Result<f64> {
        params.validate_tl()?;
        let mut agg = Pointwise::new(self.lowpass.len(), params.q);
        for (base, c) in &self.bands {
            let s = base.powf(params.alpha);
            for (i, v) in c.iter().enumerate() {
                agg.add(i, s * v);
            }
        }
        Ok(self.low(params.p) + agg.lp(params.p, self.cell_weight))
    }
}

/// Euclidean distance on the torus [0, L)^d.
pub fn torus_distance(a: &[f64], b: &[f64], period: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = (x - y).rem_euclid(period);
            t.min(period - t).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// (s*_{r,N})_Q = (Σ_P |s_P|^r / (1 + 2^j|x_Q − x_P|)^N)^{1/r} over the
/// nonzero entries of s. Low-pass entries are carried over as |s_k|.
pub fn maximal_sequence(
    frame: &Frame,
    s: &SequenceCoefficients,
    params: &MaximalParams,
    coupling: Coupling,
) -> Result<SequenceCoefficients> {
    check_sequence(frame, s)?;
    let period = frame.grid().period;
    let support: Vec<_> = s
        .bands
        .iter()
        .map(|b| band_support(b, period, params.r))
        .collect();
    let bands = (0..s.bands.len())
        .into_par_iter()
        .map(|id| star_band(s, id, &star_sources(s, id, coupling), &support, params))
        .collect();
    Ok(SequenceCoefficients {
        d: s.d,
        period,
        lowpass: s
            .lowpass
            .iter()
            .map(|c| Complex64::new(c.norm(), 0.0))
            .collect(),
        bands,
    })
}

/// Band `id` of [`maximal_sequence`] alone.
pub fn maximal_band(
    frame: &Frame,
    s: &SequenceCoefficients,
    id: usize,
    params: &MaximalParams,
    coupling: Coupling,
) -> Result<BandSequence> {
    check_sequence(frame, s)?;
    if id >= s.bands.len() {
        return Err(Error::BandMismatch(format!("no band {id}")));
    }
    let sources = star_sources(s, id, coupling);
    let period = frame.grid().period;
    let mut support = vec![Vec::new(); s.bands.len()];
    for &(src, _) in &sources {
        support[src] = band_support(&s.bands[src], period, params.r);
    }
    Ok(star_band(s, id, &sources, &support, params))
}

fn check_sequence(frame: &Frame, s: &SequenceCoefficients) -> Result<()> {
    if s.bands.len() != frame.atoms().len() || s.period != frame.grid().period {
        return Err(Error::BandMismatch(
            "sequence does not match the frame".into(),
        ));
    }
    Ok(())
}

/// Nonzero entries of a band: (corner, |s|^r).
fn band_support(b: &BandSequence, period: usize, r: f64) -> Vec<(Vec<f64>, f64)> {
    let tr = Translations::new(&b.band, period);
    b.values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(p, v)| {
            (
                corner(&b.band, &tr.translation(p)).to_f64(),
                v.norm().powf(r),
            )
        })
        .collect()
}

/// Bands feeding (s*)_Q for Q in band `id`, with their weights 2^j.
fn star_sources(s: &SequenceCoefficients, id: usize, coupling: Coupling) -> Vec<(usize, f64)> {
    let b = &s.bands[id].band;
    match coupling {
        Coupling::SameBand => vec![(id, 2f64.powi(b.scale as i32))],
        Coupling::Literal => s
            .bands
            .iter()
            .enumerate()
            .filter(|(_, o)| o.band.cone == b.cone && o.band.scale <= b.scale)
            .map(|(i, o)| (i, 2f64.powi(o.band.scale as i32)))
            .collect(),
    }
}

fn star_band(
    s: &SequenceCoefficients,
    id: usize,
    sources: &[(usize, f64)],
    support: &[Vec<(Vec<f64>, f64)>],
    params: &MaximalParams,
) -> BandSequence {
    let b = &s.bands[id];
    if sources.iter().all(|&(src, _)| support[src].is_empty()) {
        return BandSequence {
            band: b.band.clone(),
            values: vec![Complex64::default(); b.values.len()],
        };
    }
    let period = s.period;
    let tr = Translations::new(&b.band, period);
    let values = (0..b.values.len())
        .into_par_iter()
        .map(|pos| {
            let xq = corner(&b.band, &tr.translation(pos)).to_f64();
            let mut sum = 0.0;
            for &(src, scale) in sources {
                for (xp, a) in &support[src] {
                    let dist = torus_distance(&xq, xp, period as f64);
                    sum += a / (1.0 + scale * dist).powf(params.decay);
                }
            }
            Complex64::new(sum.powf(1.0 / params.r), 0.0)
        })
        .collect();
    BandSequence {
        band: b.band.clone(),
        values,
    }
}

/// Dyadic s*_{r,N}: P at the same level ν as Q, weight 2^ν, corners 2^{-ν}k.
pub fn dyadic_maximal_sequence(s: &DyadicSequence, params: &MaximalParams) -> DyadicSequence {
    let period = s.period as f64;
    let levels = s
        .levels
        .par_iter()
        .enumerate()
        .map(|(nu, vals)| {
            let h = 2f64.powi(-(nu as i32));
            let pt = |pos: usize| {
                s.translation(nu as u32, pos)
                    .iter()
                    .map(|&k| k as f64 * h)
                    .collect::<Vec<_>>()
            };
            let support: Vec<(Vec<f64>, f64)> = vals
                .iter()
                .enumerate()
                .filter(|(_, v)| v.norm() > 0.0)
                .map(|(p, v)| (pt(p), v.norm().powf(params.r)))
                .collect();
            (0..vals.len())
                .map(|pos| {
                    let xq = pt(pos);
                    let sum: f64 = support
                        .iter()
                        .map(|(xp, a)| {
                            a / (1.0 + torus_distance(&xq, xp, period) / h).powf(params.decay)
                        })
                        .sum();
                    Complex64::new(sum.powf(1.0 / params.r), 0.0)
                })
                .collect()
        })
        .collect();
    DyadicSequence {
        d: s.d,
        period: s.period,
        lowpass: s
            .lowpass
            .iter()
            .map(|c| Complex64::new(c.norm(), 0.0))
            .collect(),
        levels,
    }
}

/// Half-widths (in nodes) of the HL cubes: 0, 1, 2, 4, …, N/4.
pub fn hl_half_widths(grid: &Grid) -> Vec<usize> {
    let mut out = vec![0];
    let mut h = 1;
    while h <= grid.n / 4 {
        out.push(h);
        h *= 2;
    }
    out
}

/// Periodic box sum of half-width h along one axis, in place.
fn box_sum_axis(grid: &Grid, data: &mut [f64], axis: usize, h: usize) {
    let n = grid.n;
    let stride = n.pow((grid.d - 1 - axis) as u32);
    let span = n * stride;
    let mut line = vec![0.0; n];
    let mut prefix = vec![0.0; n + 1];
    for chunk in data.chunks_mut(span) {
        for off in 0..stride {
            for (t, v) in line.iter_mut().enumerate() {
                *v = chunk[t * stride + off];
            }
            for t in 0..n {
                prefix[t + 1] = prefix[t] + line[t];
            }
            let total = prefix[n];
            let width = 2 * h + 1;
            for t in 0..n {
                // window [t-h, t+h] mod n; 2h+1 ≤ n/2 + 1 ≤ n
                let lo = (t + n - h) % n;
                let hi = lo + width;
                let sum = if hi <= n {
                    prefix[hi] - prefix[lo]
                } else {
                    total - prefix[lo] + prefix[hi - n]
                };
                chunk[t * stride + off] = sum;
            }
        }
    }
}

/// Hardy-Littlewood maximal function over grid-aligned centred cubes with
/// dyadic half-widths.
pub fn hl_maximal(grid: &Grid, values: &[f64]) -> Result<Vec<f64>> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch("HL input length".into()));
    }
    if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return invalid("HL maximal function needs finite nonnegative input");
    }
    let mut best = values.to_vec();
    for h in hl_half_widths(grid).into_iter().skip(1) {
        let mut buf = values.to_vec();
        for axis in 0..grid.d {
            box_sum_axis(grid, &mut buf, axis, h);
        }
        let count = ((2 * h + 1) as f64).powi(grid.d as i32);
        for (b, v) in best.iter_mut().zip(&buf) {
            *b = b.max(v / count);
        }
    }
    Ok(best)
}

/// Offsets y (signed node coordinates) and weights (1+|B^[ℓ]A^j y|)^{-dλ},
/// sorted by decreasing weight.
fn peetre_weights(grid: &Grid, band: &Band, lambda: f64) -> Vec<(f64, Vec<i64>)> {
    let m = band.matrix();
    let mut y = vec![0.0; grid.d];
    let mut sidx = vec![0i64; grid.d];
    let mut out: Vec<(f64, Vec<i64>)> = (0..grid.len())
        .map(|i| {
            grid.offset(i, &mut y);
            grid.signed_index(i, &mut sidx);
            let r = crate::windows::norm2(&m.apply(&y));
            ((1.0 + r).powf(-(grid.d as f64) * lambda), sidx.clone())
        })
        .collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

/// sup_y |c(x−y)| / (1 + |B^[ℓ]A^j y|)^{dλ} over grid offsets y.
pub fn peetre_maximal(
    grid: &Grid,
    band: &Band,
    field: &[Complex64],
    lambda: f64,
) -> Result<Vec<f64>> {
    if field.len() != grid.len() {
        return Err(Error::GridMismatch("Peetre input length".into()));
    }
    if !(lambda > 0.0) {
        return invalid("lambda must be positive");
    }
    let abs: Vec<f64> = field.iter().map(|c| c.norm()).collect();
    let top = abs.iter().cloned().fold(0.0, f64::max);
    let weights = peetre_weights(grid, band, lambda);
    let d = grid.d;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut xs = vec![0usize; d];
            grid.unravel(x, &mut xs);
            let mut pt = vec![0i64; d];
            let mut best = 0.0f64;
            for (w, y) in &weights {
                if w * top <= best {
                    break;
                }
                for a in 0..d {
                    pt[a] = xs[a] as i64 - y[a];
                }
                best = best.max(abs[grid.wrap_index(&pt)] * w);
            }
            best
        })
        .collect())
}

/// Dyadic cube volume 2^{-νd}.
pub fn dyadic_volume(nu: u32, d: usize) -> f64 {
    2f64.powi(-((nu as usize * d) as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{FrameSpec, Variant};
    use crate::lattice::ShearIndex;
    use crate::signals;
    use crate::windows::WindowBank;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> (Frame, GridFft) {
        let frame = Frame::build(FrameSpec::new(2, 32, 2, Variant::Smooth)).unwrap();
        let fft = GridFft::new(*frame.grid());
        (frame, fft)
    }

    fn delta(frame: &Frame, band: Band, value: f64) -> SequenceCoefficients {
        let mut s = SequenceCoefficients::zeros(frame);
        let idx = ShearIndex {
            translation: vec![0; band.dim()],
            band,
        };
        s.set(frame, &idx, Complex64::new(value, 0.0)).unwrap();
        s
    }

    #[test]
    fn params_validation() {
        assert!(SmoothnessParams::new(0.0, 0.0, 1.0).is_err());
        assert!(SmoothnessParams::new(0.0, 1.0, -1.0).is_err());
        assert!(SmoothnessParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(MaximalParams::new(0.0, 3.0, 1.0).is_err());
        let p = SmoothnessParams::new(0.5, f64::INFINITY, 2.0).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<SmoothnessParams>(&text).unwrap(), p);
        for name in ["BAB", "FAB", "bAB", "fAB", "B", "F", "b", "f"] {
            assert_eq!(name.parse::<Space>().unwrap().to_string(), name);
        }
    }

    #[test]
    fn zero_inputs_have_zero_norm() {
        let (frame, fft) = small();
        let z = GridFunction::zeros(*frame.grid());
        let prm = SmoothnessParams::new(0.3, 2.0, 1.0).unwrap();
        assert_eq!(besov_ab_norm(&frame, &fft, &z, &prm).unwrap(), 0.0);
        assert_eq!(tl_ab_norm(&frame, &fft, &z, &prm).unwrap(), 0.0);
        let s = SequenceCoefficients::zeros(&frame);
        assert_eq!(besov_seq_norm(&s, &prm).unwrap(), 0.0);
        assert_eq!(tl_seq_norm(&frame, &s, &prm).unwrap(), 0.0);
        let bank = DyadicBank::new(&WindowBank::default(), *frame.grid(), None).unwrap();
        assert_eq!(dyadic_besov_norm(&bank, &fft, &z, &prm).unwrap(), 0.0);
        assert_eq!(
            dyadic_tl_seq_norm(frame.grid(), &DyadicSequence::zeros(&bank), &prm).unwrap(),
            0.0
        );
    }

    #[test]
    fn tl_rejects_infinite_p() {
        let (frame, fft) = small();
        let z = GridFunction::zeros(*frame.grid());
        let prm = SmoothnessParams::new(0.0, f64::INFINITY, 2.0).unwrap();
        assert!(tl_ab_norm(&frame, &fft, &z, &prm).is_err());
        assert!(besov_ab_norm(&frame, &fft, &z, &prm).is_ok());
    }

    #[test]
    fn cell_positions_match_direct_floor() {
        for (d, n, period, j) in [(2, 32, 1, 2u32), (2, 16, 4, 1), (3, 16, 2, 1)] {
            let grid = Grid::with_period(d, n, period).unwrap();
            for cone in 0..d {
                for shear in crate::lattice::enumerate_shears(j, d) {
                    let band = Band::new(cone, j, shear).unwrap();
                    let tr = Translations::new(&band, period);
                    let m = band.matrix();
                    let mut coords = vec![0usize; d];
                    let want: Vec<u32> = (0..grid.len())
                        .map(|i| {
                            grid.unravel(i, &mut coords);
                            let k: Vec<i64> = (0..d)
                                .map(|r| {
                                    let num: i64 =
                                        (0..d).map(|c| m.get(r, c) * coords[c] as i64).sum();
                                    (num * period as i64).div_euclid(n as i64)
                                })
                                .collect();
                            tr.position_mod(&k) as u32
                        })
                        .collect();
                    assert_eq!(cell_positions(&grid, &band), want, "{band:?}");
                }
            }
        }
    }

    #[test]
    fn delta_sequences_have_unit_norm() {
        let (frame, _) = small();
        for (alpha, p, q) in [
            (0.0, 2.0, 2.0),
            (0.7, 1.0, 3.0),
            (-0.4, 0.5, f64::INFINITY),
            (1.0, 3.0, 0.5),
        ] {
            let prm = SmoothnessParams::new(alpha, p, q).unwrap();
            for j in 0..=2u32 {
                let band = Band::new(1, j, vec![0]).unwrap();
                let vol = band.cell_volume();
                let b = delta(
                    &frame,
                    band.clone(),
                    vol.powf(alpha - 2.0 / (p * 3.0) + 0.5),
                );
                assert!((besov_seq_norm(&b, &prm).unwrap() - 1.0).abs() < 1e-12);
                let f = delta(&frame, band, vol.powf(alpha - 1.0 / p + 0.5));
                assert!(
                    (tl_seq_norm(&frame, &f, &prm).unwrap() - 1.0).abs() < 1e-12,
                    "j={j} {prm:?}"
                );
            }
        }
    }

    #[test]
    fn dyadic_delta_has_unit_norm() {
        let grid = Grid::new(2, 32).unwrap();
        let bank = DyadicBank::new(&WindowBank::default(), grid, None).unwrap();
        for (alpha, p) in [(0.0, 2.0), (1.5, 1.0), (-0.5, 4.0)] {
            let prm = SmoothnessParams::new(alpha, p, p).unwrap();
            for nu in 0..=bank.nu_max() {
                let mut s = DyadicSequence::zeros(&bank);
                s.levels[nu as usize][0] =
                    Complex64::new(dyadic_volume(nu, 2).powf(alpha / 2.0 - 1.0 / p + 0.5), 0.0);
                let b = dyadic_besov_seq_norm(&s, &prm).unwrap();
                let f = dyadic_tl_seq_norm(&grid, &s, &prm).unwrap();
                assert!((b - 1.0).abs() < 1e-12);
                assert!((f - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn p_equals_q_collapses() {
        let (frame, fft) = small();
        let f = signals::random_real(*frame.grid(), &mut ChaCha8Rng::seed_from_u64(4));
        for p in [1.0, 2.0, 3.5] {
            let prm = SmoothnessParams::new(0.25, p, p).unwrap();
            let b = besov_ab_norm(&frame, &fft, &f, &prm).unwrap();
            let t = tl_ab_norm(&frame, &fft, &f, &prm).unwrap();
            assert!((b - t).abs() < 1e-12 * b);
        }
    }

    /// Plancherel per band, masks evaluated from the window bank directly.
    #[test]
    fn besov_two_two_matches_frequency_sum() {
        let (frame, fft) = small();
        let g = *frame.grid();
        let f = signals::random_real(g, &mut ChaCha8Rng::seed_from_u64(8));
        let spec = f.dft(&fft).to_vec();
        let scale = g.volume() / (g.len() as f64).powi(2);
        let low: f64 = frame
            .lowpass()
            .iter()
            .map(|(i, m)| (spec[i] * m).norm_sqr())
            .sum::<f64>();
        let bands: f64 = frame
            .atoms()
            .iter()
            .map(|a| {
                a.mask
                    .iter()
                    .map(|(i, m)| (spec[i] * m).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        let want = (scale * low).sqrt() + (scale * bands).sqrt();
        let got = besov_ab_norm(
            &frame,
            &fft,
            &f,
            &SmoothnessParams::new(0.0, 2.0, 2.0).unwrap(),
        )
        .unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn maximal_sequence_single_entry() {
        let (frame, _) = small();
        let band = Band::new(0, 2, vec![1]).unwrap();
        let s = delta(&frame, band.clone(), 3.0);
        let prm = MaximalParams::new(1.5, 4.0, 1.0).unwrap();
        let star = maximal_sequence(&frame, &s, &prm, Coupling::SameBand).unwrap();
        let id = frame.band_id(&band).unwrap();
        let tr = Translations::new(&band, 1);
        for pos in 0..tr.len() {
            let x = corner(&band, &tr.translation(pos)).to_f64();
            let dist = torus_distance(&x, &[0.0, 0.0], 1.0);
            let want = 3.0 / (1.0 + 4.0 * dist).powf(4.0 / 1.5);
            assert!((star.bands[id].values[pos].re - want).abs() < 1e-12 * want);
        }
        // other bands see nothing under SameBand, the literal coupling reaches finer bands
        let other = frame.band_id(&Band::new(0, 2, vec![0]).unwrap()).unwrap();
        assert!(star.bands[other].values.iter().all(|v| v.re == 0.0));
        let lit = maximal_sequence(&frame, &s, &prm, Coupling::Literal).unwrap();
        assert!(lit.bands[other].values[0].re > 0.0);
        let coarse = frame.band_id(&Band::new(0, 1, vec![0]).unwrap()).unwrap();
        assert!(lit.bands[coarse].values.iter().all(|v| v.re == 0.0));
    }

    #[test]
    fn hl_of_constant_is_constant() {
        let grid = Grid::new(2, 16).unwrap();
        let m = hl_maximal(&grid, &vec![2.5; grid.len()]).unwrap();
        assert!(m.iter().all(|v| (v - 2.5).abs() < 1e-12));
        assert!(hl_maximal(&grid, &vec![-1.0; grid.len()]).is_err());
    }

    #[test]
    fn hl_matches_direct_cube_averages() {
        let grid = Grid::new(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = signals::random_real(grid, &mut rng)
            .samples()
            .iter()
            .map(|c| c.re.abs())
            .collect();
        let got = hl_maximal(&grid, &v).unwrap();
        let mut xs = [0usize; 2];
        for x in 0..grid.len() {
            grid.unravel(x, &mut xs);
            let mut best = 0.0f64;
            for h in hl_half_widths(&grid) {
                let h = h as i64;
                let mut sum = 0.0;
                for a in -h..=h {
                    for b in -h..=h {
                        sum += v[grid.wrap_index(&[xs[0] as i64 + a, xs[1] as i64 + b])];
                    }
                }
                best = best.max(sum / ((2 * h + 1) * (2 * h + 1)) as f64);
            }
            assert!((got[x] - best).abs() < 1e-12);
        }
    }

    #[test]
    fn peetre_matches_brute_force_and_large_lambda_limit() {
        let grid = Grid::new(2, 16).unwrap();
        let band = Band::new(0, 1, vec![-1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = signals::random_real(grid, &mut rng).into_samples();
        let lambda = 0.7;
        let got = peetre_maximal(&grid, &band, &c, lambda).unwrap();
        let m = band.matrix();
        let (mut xs, mut y, mut ys) = ([0usize; 2], [0.0; 2], [0i64; 2]);
        for x in 0..grid.len() {
            grid.unravel(x, &mut xs);
            let mut best = 0.0f64;
            for i in 0..grid.len() {
                grid.offset(i, &mut y);
                grid.signed_index(i, &mut ys);
                let w = (1.0 + crate::windows::norm2(&m.apply(&y))).powf(-2.0 * lambda);
                let v = c[grid.wrap_index(&[xs[0] as i64 - ys[0], xs[1] as i64 - ys[1]])].norm();
                best = best.max(v * w);
            }
            assert!((got[x] - best).abs() < 1e-14);
        }
        let sharp = peetre_maximal(&grid, &band, &c, 200.0).unwrap();
        for (s, v) in sharp.iter().zip(&c) {
            assert!((s - v.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn magnitudes_agree_with_streaming_norms() {
        let (frame, fft) = small();
        let f = signals::random_real(*frame.grid(), &mut ChaCha8Rng::seed_from_u64(12));
        let field = forward_grid(&frame, &fft, &f).unwrap();
        let mags = FieldMagnitudes::shear(&frame, &fft, &field);
        let bank = DyadicBank::new(&WindowBank::default(), *frame.grid(), None).unwrap();
        let dfield = dyadic_forward(&bank, &fft, &f).unwrap();
        let dmags = FieldMagnitudes::dyadic(&bank, &fft, &dfield);
        for (alpha, p, q) in [(0.0, 2.0, 2.0), (0.6, 1.0, 3.0), (-0.3, 0.7, f64::INFINITY)] {
            let prm = SmoothnessParams::new(alpha, p, q).unwrap();
            let pairs = [
                (
                    mags.besov(&prm).unwrap(),
                    besov_ab_norm_field(&frame, &fft, &field, &prm).unwrap(),
                ),
                (
                    mags.tl(&prm).unwrap(),
                    tl_ab_norm_field(&frame, &fft, &field, &prm).unwrap(),
                ),
                (
                    dmags.besov(&prm).unwrap(),
                    dyadic_besov_norm_field(&bank, &fft, &dfield, &prm).unwrap(),
                ),
                (
                    dmags.tl(&prm).unwrap(),
                    dyadic_tl_norm_field(&bank, &fft, &dfield, &prm).unwrap(),
                ),
            ];
            for (a, b) in pairs {
                assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn norms_are_absolutely_homogeneous(seed in 0u64..1000, scale in -3.0f64..3.0, alpha in -1.0f64..1.0) {
            let (frame, fft) = small();
            let f = signals::random_real(*frame.grid(), &mut ChaCha8Rng::seed_from_u64(seed));
            let g = f.scale(Complex64::new(scale, 0.5));
            let k = Complex64::new(scale, 0.5).norm();
            let prm = SmoothnessParams::new(alpha, 1.5, 0.8).unwrap();
            let (a, b) = (besov_ab_norm(&frame, &fft, &f, &prm).unwrap(), besov_ab_norm(&frame, &fft, &g, &prm).unwrap());
            prop_assert!((b - k * a).abs() <= 1e-12 * b.max(1e-300));
            let (a, b) = (tl_ab_norm(&frame, &fft, &f, &prm).unwrap(), tl_ab_norm(&frame, &fft, &g, &prm).unwrap());
            prop_assert!((b - k * a).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn maximal_sequence_dominates(seed in 0u64..1000, r in 0.3f64..3.0) {
            let (frame, _) = small();
            let mut s = SequenceCoefficients::zeros(&frame);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            use rand::Rng;
            for _ in 0..100 {
                let b = rng.gen_range(0..s.bands.len());
                let p = rng.gen_range(0..s.bands[b].values.len());
                s.bands[b].values[p] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let prm = MaximalParams::new(r, 5.0, 1.0).unwrap();
            for coupling in [Coupling::SameBand, Coupling::Literal] {
                let star = maximal_sequence(&frame, &s, &prm, coupling).unwrap();
                for (a, b) in star.bands.iter().zip(&s.bands) {
                    for (x, y) in a.values.iter().zip(&b.values) {
                        prop_assert!(x.re >= y.norm() * (1.0 - 1e-12));
                    }
                }
            }
        }

        #[test]
        fn q_monotonicity(seed in 0u64..1000, q1 in 0.3f64..4.0, dq in 0.0f64..4.0) {
            let (frame, fft) = small();
            let f = signals::random_real(*frame.grid(), &mut ChaCha8Rng::seed_from_u64(seed));
            let field = forward_grid(&frame, &fft, &f).unwrap();
            let p1 = SmoothnessParams::new(0.2, 2.0, q1).unwrap();
            let p0 = SmoothnessParams::new(0.2, 2.0, q1 + dq).unwrap();
            prop_assert!(besov_ab_norm_field(&frame, &fft, &field, &p0).unwrap() <= besov_ab_norm_field(&frame, &fft, &field, &p1).unwrap() * (1.0 + 1e-12));
            prop_assert!(tl_ab_norm_field(&frame, &fft, &field, &p0).unwrap() <= tl_ab_norm_field(&frame, &fft, &field, &p1).unwrap() * (1.0 + 1e-12));
        }
    }
}
