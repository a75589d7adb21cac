//! Decay of shear–shear convolutions and of the shear–dyadic cross integral.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use super::{layout_json, max_of, spread, CheckReport, Recorder, VerifyConfig, Workspace};
use crate::error::Result;
use crate::frame::{Frame, SparseMask, Variant};
use crate::grid::{Grid, GridFft};
use crate::windows::{norm2, WindowBank};

/// Product of two masks on the intersection of their supports.
fn mask_product(a: &SparseMask, b: &SparseMask) -> Vec<(usize, f64)> {
    let (mut i, mut k) = (0, 0);
    let mut out = Vec::new();
    while i < a.indices.len() && k < b.indices.len() {
        match a.indices[i].cmp(&b.indices[k]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                out.push((a.indices[i] as usize, a.values[i] * b.values[k]));
                i += 1;
                k += 1;
            }
        }
    }
    out
}

/// Moves a spectrum onto a coarser grid with the same period. None when
/// some frequency does not fit.
fn crop(full: &Grid, small: &Grid, entries: &[(usize, f64)]) -> Option<Vec<Complex64>> {
    let half = (small.n / 2) as i64;
    let mut m = vec![0i64; full.d];
    let mut out = vec![Complex64::default(); small.len()];
    for &(i, v) in entries {
        full.signed_index(i, &mut m);
        if m.iter().any(|x| x.abs() >= half) {
            return None;
        }
        out[small.wrap_index(&m)] = Complex64::new(v, 0.0);
    }
    Some(out)
}

/// sup over nodes with |x| ≤ L/4 and 2^s|x| ≤ reach of
/// values(x)·(1 + 2^s|x|)^decay.
fn weighted_sup(grid: &Grid, values: &[f64], s: u32, decay: f64, reach: f64) -> f64 {
    let scale = 2f64.powi(s as i32);
    let lim = (grid.period as f64 / 4.0).min(reach / scale);
    let mut x = vec![0.0; grid.d];
    let mut best = 0.0f64;
    for (i, v) in values.iter().enumerate() {
        grid.offset(i, &mut x);
        let r = norm2(&x);
        if r <= lim {
            best = best.max(v * (1.0 + scale * r).powf(decay));
        }
    }
    best
}

/// Cone-0 bands with 0 ≤ ℓ_1 ≤ … ≤ ℓ_{d−1}; every band at these scales is
/// the image of one of them under an axis permutation or reflection.
fn representatives(frame: &Frame, top: u32) -> Vec<usize> {
    frame
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| {
            let b = &a.band;
            b.cone == 0
                && (1..=top).contains(&b.scale)
                && b.shear.iter().all(|&l| l >= 0)
                && b.shear.windows(2).all(|w| w[0] <= w[1])
        })
        .map(|(i, _)| i)
        .collect()
}

/// Samples of g with ĝ = mask on the full grid: (N/L)^d·IDFT(mask).
fn spatial(fft: &GridFft, entries: impl Iterator<Item = (usize, f64)>) -> Vec<Complex64> {
    let g = fft.grid();
    let mut buf = vec![Complex64::default(); g.len()];
    for (i, v) in entries {
        buf[i] = Complex64::new(v, 0.0);
    }
    fft.inverse(&mut buf);
    let s = 1.0 / g.cell_weight();
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

/// ∫ a(x−y) b(y) dy on the torus for real nonnegative samples.
fn abs_convolution(fft: &GridFft, a: &[f64], b: &[f64]) -> Vec<f64> {
    let g = fft.grid();
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut fa);
    fft.forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft.inverse(&mut fa);
    let w = g.cell_weight();
    fa.iter().map(|v| v.re * w).collect()
}

pub(super) fn almost_orthogonality(cfg: &VerifyConfig, ws: &Workspace) -> Result<CheckReport> {
    let o = cfg.orthogonality;
    let d = cfg.d;
    let decay = d as f64 + 1.0;
    let fr = ws.frame(&o.grid.spec(d, Variant::Smooth))?;
    let (frame, fft) = (&fr.0, &fr.1);
    let grid = *frame.grid();
    let small = Grid::with_period(d, o.eval_n, grid.period)?;
    let small_fft = GridFft::new(small);
    let mut rec = Recorder::new(
        "almost_orthogonality",
        json!({"d": d, "grid": layout_json(&o.grid), "eval_n": o.eval_n, "scales": [1, o.top_scale], "decay": decay,
               "radius": grid.period as f64 / 4.0, "rescaled_radius": grid.period as f64 / 2.0}),
    );

    // the sup grows with the radius it sees, so every scale is measured on
    // the same rescaled ball 2^j|x| ≤ reach, the largest that fits at j = 1
    let reach = grid.period as f64 / 2.0;
    let reps = representatives(frame, o.top_scale);
    let atoms = frame.atoms();

    // shear–shear: g = ψ_{A^{-j}B^{-ℓ}} (L¹ scaling), h_Q = ψ_{i,ℓ',0}
    let mut per_scale: BTreeMap<u32, f64> = BTreeMap::new();
    let mut per_gap: BTreeMap<i64, f64> = BTreeMap::new();
    let mut per_scale_full: BTreeMap<u32, f64> = BTreeMap::new();
    let mut pairs = 0usize;
    let mut full_grid_pairs = 0usize;
    let mut gap_overlaps = 0usize;
    for &g in &reps {
        let j = atoms[g].band.scale;
        for other in atoms {
            let i = other.band.scale;
            let gap = i as i64 - j as i64;
            let prod = mask_product(&atoms[g].mask, &other.mask);
            if gap.abs() >= 2 {
                gap_overlaps += usize::from(!prod.is_empty());
                continue;
            }
            if i > o.top_scale || prod.is_empty() {
                continue;
            }
            let q = other.band.cell_volume();
            let (conv, eval_grid) = match crop(&grid, &small, &prod) {
                Some(mut buf) => {
                    small_fft.inverse(&mut buf);
                    let s = 1.0 / small.cell_weight();
                    (buf.iter().map(|v| v.norm() * s).collect::<Vec<_>>(), small)
                }
                None => {
                    full_grid_pairs += 1;
                    (
                        spatial(fft, prod.into_iter())
                            .iter()
                            .map(|v| v.norm())
                            .collect(),
                        grid,
                    )
                }
            };
            let c = weighted_sup(&eval_grid, &conv, i, decay, reach) * q;
            let full = weighted_sup(&eval_grid, &conv, i, decay, f64::INFINITY) * q;
            let e = per_scale_full.entry(j).or_insert(0.0);
            *e = e.max(full);
            pairs += 1;
            let e = per_scale.entry(j).or_insert(0.0);
            *e = e.max(c);
            let e = per_gap.entry(gap).or_insert(0.0);
            *e = e.max(c);
        }
    }
    let shear: Vec<f64> = per_scale.values().copied().collect();
    rec.measure("shear_shear_pairs", pairs);
    rec.measure("shear_shear_full_grid_pairs", full_grid_pairs);
    rec.measure("shear_shear_constant_per_scale", &per_scale);
    rec.measure("shear_shear_constant_per_scale_gap", &per_gap);
    rec.measure(
        "shear_shear_constant_per_scale_full_radius",
        &per_scale_full,
    );
    rec.at_most(
        "shear_shear_spread",
        spread(&shear),
        cfg.thresholds.uniformity_ratio,
    );
    rec.at_most("scale_gap_2_overlapping_pairs", gap_overlaps as f64, 0.0);

    // shear–dyadic: ∫|ψ(B^ℓA^j(x−y))||φ(4^j y)|dy against |P_j|/(1+2^j|x|)^N
    let bank = WindowBank::new(o.grid.spec(d, Variant::Smooth).windows)?;
    let mut xi = vec![0.0; d];
    let mut lemma: BTreeMap<u32, f64> = BTreeMap::new();
    let mut dyadic_norm: BTreeMap<u32, f64> = BTreeMap::new();
    let mut lemma_full: BTreeMap<u32, f64> = BTreeMap::new();
    for j in 1..=o.top_scale {
        let nu = 2 * j as i32;
        let s = 2f64.powi(-nu);
        let mask = (0..grid.len()).filter_map(|idx| {
            grid.frequency(idx, &mut xi);
            let scaled: Vec<f64> = xi.iter().map(|v| v * s).collect();
            let v = bank.dyadic_phi_hat(&scaled);
            (v != 0.0).then_some((idx, v))
        });
        let mask: Vec<(usize, f64)> = mask.collect();
        // φ(2^ν y) = 2^{-νd} φ_ν(y)
        let vol_q = 2f64.powi(-nu * d as i32);
        let phi: Vec<f64> = spatial(fft, mask.into_iter())
            .iter()
            .map(|v| v.norm() * vol_q)
            .collect();
        for &g in reps.iter().filter(|&&g| atoms[g].band.scale == j) {
            let band = &atoms[g].band;
            let p = band.cell_volume();
            // ψ(B^ℓA^j x) = |P_j| g_b(x)
            let psi: Vec<f64> = spatial(fft, atoms[g].mask.iter())
                .iter()
                .map(|v| v.norm() * p)
                .collect();
            let integral = abs_convolution(fft, &psi, &phi);
            let sup = weighted_sup(&grid, &integral, j, decay, reach);
            let e = lemma_full.entry(j).or_insert(0.0);
            *e = e.max(weighted_sup(&grid, &integral, j, decay, f64::INFINITY) / p);
            let e = lemma.entry(j).or_insert(0.0);
            *e = e.max(sup / p);
            let e = dyadic_norm.entry(j).or_insert(0.0);
            *e = e.max(sup / vol_q);
        }
    }
    let cross: Vec<f64> = lemma.values().copied().collect();
    rec.measure("shear_dyadic_constant_per_scale", &lemma);
    rec.measure("shear_dyadic_constant_per_scale_over_Q2j", &dyadic_norm);
    rec.measure("shear_dyadic_constant_per_scale_full_radius", &lemma_full);
    // the integral is of size |Q_2j|, smaller than |P_j| by 2^{-(d-1)j}: with
    // the |P_j| normalization the constant may only be checked not to grow
    rec.measure("shear_dyadic_spread", spread(&cross));
    let first = lemma.values().next().copied().unwrap_or(0.0);
    rec.at_most(
        "shear_dyadic_growth",
        max_of(&cross) / first,
        cfg.thresholds.uniformity_ratio,
    );
    let sharp: Vec<f64> = dyadic_norm.values().copied().collect();
    rec.at_most(
        "shear_dyadic_sharp_spread",
        spread(&sharp),
        cfg.thresholds.uniformity_ratio,
    );
    rec.measure("max_constant", max_of(&shear).max(max_of(&cross)));
    Ok(rec.finish())
}
