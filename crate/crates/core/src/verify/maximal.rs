//! Peetre maximal function against the Hardy-Littlewood maximal function,
//! derivatives under Peetre, and s* against HL of cell indicators.

use num_complex::Complex64;
use serde_json::json;

use super::{
    layout_json, max_of, min_of, spread, Check, CheckReport, Recorder, VerifyConfig, Workspace,
};
use crate::error::Result;
use crate::frame::{Frame, Variant};
use crate::grid::GridFft;
use crate::lattice::{corner, freq_action, Band};
use crate::signals;
use crate::spaces::{
    cell_positions, hl_maximal, maximal_band, peetre_maximal, Coupling, MaximalParams,
};
use crate::transform::{forward_grid, subsample, Translations};

/// max_x Peetre(x) / HL(|c|^{1/λ})(x)^λ.
pub fn peetre_hl_ratio(frame: &Frame, band: &Band, c: &[Complex64], lambda: f64) -> Result<f64> {
    let grid = frame.grid();
    let peetre = peetre_maximal(grid, band, c, lambda)?;
    let pow: Vec<f64> = c.iter().map(|v| v.norm().powf(1.0 / lambda)).collect();
    let hl = hl_maximal(grid, &pow)?;
    Ok(peetre
        .iter()
        .zip(&hl)
        .map(|(p, h)| p / h.powf(lambda))
        .fold(0.0, f64::max))
}

/// Spectral derivative along the band's own coordinates:
/// multiplier 2πi (ξ A^{-j}B^{-[ℓ]})_axis.
fn band_derivative(fft: &GridFft, band: &Band, c: &[Complex64], axis: usize) -> Vec<Complex64> {
    let grid = fft.grid();
    let mut buf = c.to_vec();
    fft.forward(&mut buf);
    let mut xi = vec![0.0; grid.d];
    for (i, v) in buf.iter_mut().enumerate() {
        grid.frequency(i, &mut xi);
        let eta = freq_action(band.cone, band.scale, &band.shear, &xi);
        *v *= Complex64::new(0.0, 2.0 * std::f64::consts::PI * eta[axis]);
    }
    fft.inverse(&mut buf);
    buf
}

/// max over Q in the band of (s*)_Q / HL(Σ_P |s_P|^a χ_P)(x)^{1/a}, x ∈ Q.
pub fn s_star_hl_ratio(
    frame: &Frame,
    s: &crate::transform::SequenceCoefficients,
    band_id: usize,
    mp: &MaximalParams,
    a: f64,
) -> Result<f64> {
    let grid = frame.grid();
    let star = maximal_band(frame, s, band_id, mp, Coupling::SameBand)?;
    let band = &frame.atom(band_id).band;
    let vals = &s.bands[band_id].values;
    let cells = cell_positions(grid, band);
    let g: Vec<f64> = cells
        .iter()
        .map(|&pos| vals[pos as usize].norm().powf(a))
        .collect();
    let hl = hl_maximal(grid, &g)?;
    let mut worst = 0.0f64;
    for (i, &pos) in cells.iter().enumerate() {
        let lhs = star.values[pos as usize].re;
        worst = worst.max(lhs / hl[i].powf(1.0 / a));
    }
    Ok(worst)
}

pub(super) fn maximal_inequalities(cfg: &VerifyConfig, ws: &Workspace) -> Result<CheckReport> {
    let d = cfg.d;
    let fr = ws.frame(&cfg.small.spec(d, Variant::Smooth))?;
    let (frame, fft) = (&fr.0, &fr.1);
    let grid = *frame.grid();
    let lambda = 1.0;
    let j = cfg.small.j_max;
    let band = Band::new(0, j, vec![0; d - 1])?;
    let id = frame.band_id(&band).expect("band in frame");
    let (r, a) = (1.0, 1.0);
    let decay = (d as f64 + 1.0) * r / a + 1.0;
    let mp = MaximalParams::new(r, decay, lambda)?;
    let mut rec = Recorder::new(
        "maximal_inequalities",
        json!({"d": d, "grid": layout_json(&cfg.small), "band": band, "lambda": lambda, "trials": cfg.trials,
               "s_star": {"r": r, "a": a, "decay": decay}}),
    );
    let mut rng = cfg.rng(Check::MaximalInequalities);
    let (mut pa, mut pb, mut pc) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..cfg.trials {
        let f = signals::random_real(grid, &mut rng);
        let field = forward_grid(frame, fft, &f)?;
        let c = field.band_samples(frame, fft, id);
        pa.push(peetre_hl_ratio(frame, &band, &c, lambda)?);
        let base = peetre_maximal(&grid, &band, &c, lambda)?;
        let mut worst = 0.0f64;
        for axis in 0..d {
            let dc = band_derivative(fft, &band, &c, axis);
            let dp = peetre_maximal(&grid, &band, &dc, lambda)?;
            worst = dp
                .iter()
                .zip(&base)
                .map(|(x, y)| x / y)
                .fold(worst, f64::max);
        }
        pb.push(worst);
        let s = subsample(frame, fft, &field)?;
        pc.push(s_star_hl_ratio(frame, &s, id, &mp, a)?);
    }
    let lim = cfg.thresholds.maximal_stability;
    for (name, v) in [
        ("peetre_hl", &pa),
        ("derivative_peetre", &pb),
        ("s_star_hl", &pc),
    ] {
        rec.measure(format!("{name}_constant_range"), [min_of(v), max_of(v)]);
        rec.at_most(format!("{name}_stability"), spread(v), lim);
    }

    // one nonzero entry: (s*)_Q has a closed form, the right side is direct
    let mut s = crate::transform::SequenceCoefficients::zeros(frame);
    let tr = Translations::new(&band, grid.period);
    let src = tr.len() / 3;
    s.bands[id].values[src] = Complex64::new(2.0, 0.0);
    let star = maximal_band(frame, &s, id, &mp, Coupling::SameBand)?;
    let xp = corner(&band, &tr.translation(src)).to_f64();
    let mut defect = 0.0f64;
    for pos in 0..tr.len() {
        let xq = corner(&band, &tr.translation(pos)).to_f64();
        let dist = crate::spaces::torus_distance(&xq, &xp, grid.period as f64);
        let want = 2.0 / (1.0 + 2f64.powi(j as i32) * dist).powf(decay / r);
        defect = defect.max((star.values[pos].re - want).abs() / want);
    }
    rec.at_most("single_entry_closed_form_defect", defect, 1e-12);
    rec.measure(
        "single_entry_hl_ratio",
        s_star_hl_ratio(frame, &s, id, &mp, a)?,
    );
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::FrameSpec;

    #[test]
    fn constant_field_has_unit_ratio() {
        let frame = Frame::build(FrameSpec::new(2, 16, 1, Variant::Smooth)).unwrap();
        let band = Band::new(1, 1, vec![-1]).unwrap();
        let c = vec![Complex64::new(1.5, 0.0); frame.grid().len()];
        let r = peetre_hl_ratio(&frame, &band, &c, 1.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }
}
