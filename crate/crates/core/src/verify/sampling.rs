//! Reconstruction from anisotropic lattice samples and the
//! Plancherel-Pólya constant.

use num_complex::Complex64;
use serde_json::json;

use super::{
    layout_json, max_of, min_of, spread, Check, CheckReport, Recorder, VerifyConfig, Workspace,
};
use crate::error::Result;
use crate::frame::Variant;
use crate::grid::{Grid, GridFft};
use crate::lattice::{freq_action, Band};
use crate::signals;
use crate::spaces::cell_positions;
use crate::transform::{lp_norm, GridFunction, Translations};

/// ξ lies in the open box (−1/2, 1/2)^d B^[ℓ]A^j.
pub(crate) fn in_band_box(band: &Band, xi: &[f64]) -> bool {
    freq_action(band.cone, band.scale, &band.shear, xi)
        .iter()
        .all(|e| e.abs() < 0.5)
}

/// g_rec = |P| Σ_k g(x_k) h(· − x_k) with ĥ the indicator of the band box,
/// x_k running over the lattice A^{-j}B^{-[ℓ]}Z^d ∩ [0, L)^d.
pub fn reconstruct_from_samples(
    fft: &GridFft,
    band: &Band,
    g: &GridFunction,
) -> Result<GridFunction> {
    let grid = *fft.grid();
    grid.check_same(g.grid())?;
    let tr = Translations::new(band, grid.period);
    let mut buf = vec![Complex64::default(); grid.len()];
    for pos in 0..tr.len() {
        let node = tr.node(&grid, pos);
        buf[node] += g.samples()[node];
    }
    fft.forward(&mut buf);
    let w = band.cell_volume() / grid.cell_weight();
    let mut xi = vec![0.0; grid.d];
    for (i, v) in buf.iter_mut().enumerate() {
        grid.frequency(i, &mut xi);
        *v = if in_band_box(band, &xi) {
            *v * w
        } else {
            Complex64::default()
        };
    }
    GridFunction::from_dft(fft, buf)
}

/// (Σ_Q sup_{z∈Q}|g(z)|^p)^{1/p} over the cells of `band`, sup over nodes.
pub fn cell_sup_sum(grid: &Grid, band: &Band, g: &GridFunction, p: f64) -> f64 {
    let tr = Translations::new(band, grid.period);
    let mut sup = vec![0.0f64; tr.len()];
    for (i, pos) in cell_positions(grid, band).into_iter().enumerate() {
        let s = &mut sup[pos as usize];
        *s = s.max(g.samples()[i].norm());
    }
    lp_norm(sup.into_iter(), p, 1.0)
}

pub(super) fn sampling_plancherel_polya(cfg: &VerifyConfig, ws: &Workspace) -> Result<CheckReport> {
    let d = cfg.d;
    let layout = cfg.compatible;
    let fr = ws.frame(&layout.spec(d, Variant::Smooth))?;
    let (frame, fft) = (&fr.0, &fr.1);
    let grid = *frame.grid();
    let ps = [1.0, 2.0];
    let mut rec = Recorder::new(
        "sampling_plancherel_polya",
        json!({"d": d, "grid": layout_json(&layout), "trials": cfg.trials, "p": ps, "scales": [1, layout.j_max]}),
    );
    let mut rng = cfg.rng(Check::SamplingPlancherelPolya);
    let mut worst = 0.0f64;
    let mut paper: Vec<Vec<f64>> = vec![Vec::new(); ps.len()];
    let mut volume: Vec<Vec<f64>> = vec![Vec::new(); ps.len()];
    for j in 1..=layout.j_max {
        let top = 1i64 << j;
        for shear in [vec![0i64; d - 1], vec![top - 1; d - 1]] {
            let band = Band::new(0, j, shear)?;
            let q = band.cell_volume();
            for _ in 0..cfg.trials {
                let g = signals::random_in(grid, fft, &mut rng, |xi| in_band_box(&band, xi));
                let back = reconstruct_from_samples(fft, &band, &g)?;
                worst = worst.max(back.sub(&g)?.norm2() / g.norm2());
                for (k, &p) in ps.iter().enumerate() {
                    let lhs = cell_sup_sum(&grid, &band, &g, p);
                    let gp = g.norm_lp(p);
                    paper[k].push(lhs / (q.powf(-(d as f64) / (p * (d as f64 + 1.0))) * gp));
                    volume[k].push(lhs / (q.powf(-1.0 / p) * gp));
                }
            }
        }
    }
    rec.at_most("sampling_relative_error", worst, cfg.thresholds.sampling);

    // one cone-projected atom: ψ̂₁ ⊗ ψ̂₂ sits inside the box of its own band
    let cp = ws.frame(&layout.spec(d, Variant::ConeProjected))?;
    let band = Band::new(0, 1, vec![0; d - 1])?;
    let id = cp.0.band_id(&band).expect("band in frame");
    let mut buf = cp.0.atom_profile(fft, id);
    fft.forward(&mut buf);
    let atom = GridFunction::from_dft(fft, buf)?;
    let back = reconstruct_from_samples(fft, &band, &atom)?;
    rec.at_most(
        "single_atom_error",
        back.sub(&atom)?.norm2() / atom.norm2(),
        1e-10,
    );

    for (k, p) in ps.iter().enumerate() {
        rec.measure(
            format!("pp_constant_p{p}_range"),
            [min_of(&paper[k]), max_of(&paper[k])],
        );
        rec.measure(
            format!("pp_constant_volume_normalized_p{p}_range"),
            [min_of(&volume[k]), max_of(&volume[k])],
        );
        rec.at_most(
            format!("pp_spread_p{p}"),
            spread(&paper[k]),
            cfg.thresholds.pp_spread,
        );
    }
    rec.note("normalizing by |Q_j|^{-1/p} instead of |Q_j|^{-d/(p(d+1))} removes the 2^{j/p} drift across scales");
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Frame, FrameSpec};

    #[test]
    fn zero_function_has_zero_sides() {
        let frame =
            Frame::build(FrameSpec::sampling_compatible(2, 64, 2, Variant::Smooth).unwrap())
                .unwrap();
        let fft = GridFft::new(*frame.grid());
        let g = GridFunction::zeros(*frame.grid());
        let band = Band::new(0, 2, vec![1]).unwrap();
        assert_eq!(cell_sup_sum(frame.grid(), &band, &g, 2.0), 0.0);
        assert_eq!(
            reconstruct_from_samples(&fft, &band, &g).unwrap().norm2(),
            0.0
        );
    }
}
