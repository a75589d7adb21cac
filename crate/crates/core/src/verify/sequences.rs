//! Distribution norms against sequence norms, and the s* equivalence.

use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use super::{
    layout_json, max_of, median, min_of, spread, Check, CheckReport, Recorder, VerifyConfig,
    Workspace,
};
use crate::error::Result;
use crate::frame::Variant;
use crate::signals;
use crate::spaces::{
    besov_seq_norm, maximal_sequence, tl_seq_norm, Coupling, FieldMagnitudes, MaximalParams,
    SmoothnessParams,
};
use crate::transform::{forward_grid, subsample, SequenceCoefficients};

/// (α, p, q) pairs used for the Besov and Triebel-Lizorkin comparisons.
const BESOV_TUPLES: [(f64, f64, f64); 3] = [(0.0, 2.0, 2.0), (0.5, 1.0, 2.0), (-0.25, 4.0, 1.0)];
const TL_TUPLES: [(f64, f64, f64); 3] = [(0.0, 2.0, 2.0), (0.5, 1.0, 2.0), (-0.25, 4.0, 1.0)];

pub(super) fn sequence_characterization(cfg: &VerifyConfig, ws: &Workspace) -> Result<CheckReport> {
    let fr = ws.frame(&cfg.compatible.spec(cfg.d, Variant::Smooth))?;
    let (frame, fft) = (&fr.0, &fr.1);
    let grid = *frame.grid();
    let mut rec = Recorder::new(
        "sequence_characterization",
        json!({"d": cfg.d, "grid": layout_json(&cfg.compatible), "trials": cfg.trials, "besov": BESOV_TUPLES, "tl": TL_TUPLES}),
    );
    let mut rng = cfg.rng(Check::SequenceCharacterization);
    let mut besov = vec![Vec::new(); BESOV_TUPLES.len()];
    let mut tl = vec![Vec::new(); TL_TUPLES.len()];
    for _ in 0..cfg.trials {
        // band limits spread over the scales so that the trials differ in where their energy sits
        let radius = grid.nyquist() * rng.gen_range(0.05..1.0f64);
        let f = signals::random_bandlimited(grid, fft, radius, &mut rng);
        let field = forward_grid(frame, fft, &f)?;
        let mags = FieldMagnitudes::shear(frame, fft, &field);
        let s = subsample(frame, fft, &field)?;
        for (k, &(a, p, q)) in BESOV_TUPLES.iter().enumerate() {
            let prm = SmoothnessParams::new(a, p, q)?;
            besov[k].push(mags.besov(&prm)? / besov_seq_norm(&s, &prm)?);
        }
        for (k, &(a, p, q)) in TL_TUPLES.iter().enumerate() {
            let prm = SmoothnessParams::new(a, p, q)?;
            tl[k].push(mags.tl(&prm)? / tl_seq_norm(frame, &s, &prm)?);
        }
    }
    let mut c = 1.0f64;
    for (kind, ratios) in [("besov", &besov), ("tl", &tl)] {
        for (k, r) in ratios.iter().enumerate() {
            c = c.max(max_of(r)).max(1.0 / min_of(r));
            rec.measure(format!("{kind}_{k}_ratio_range"), [min_of(r), max_of(r)]);
            rec.at_most(
                format!("{kind}_{k}_stability"),
                spread(r),
                cfg.thresholds.stability_ratio,
            );
        }
    }
    rec.measure("equivalence_constant", c);
    Ok(rec.finish())
}

/// A sequence with `terms` random nonzero shear entries.
pub(crate) fn random_sparse_sequence<R: Rng>(
    frame: &crate::frame::Frame,
    terms: usize,
    rng: &mut R,
) -> SequenceCoefficients {
    let mut s = SequenceCoefficients::zeros(frame);
    let mut placed = 0;
    while placed < terms {
        let b = rng.gen_range(0..s.bands.len());
        let len = s.bands[b].values.len();
        if len == 0 {
            continue;
        }
        let p = rng.gen_range(0..len);
        if s.bands[b].values[p] != Complex64::default() {
            continue;
        }
        s.bands[b].values[p] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        placed += 1;
    }
    s
}

pub(super) fn s_star_equivalence(cfg: &VerifyConfig, ws: &Workspace) -> Result<CheckReport> {
    let fr = ws.frame(&cfg.small.spec(cfg.d, Variant::Smooth))?;
    let frame = &fr.0;
    let (r, p, q) = (1.0, 2.0, 2.0);
    let decay = MaximalParams::decay_threshold(cfg.d, r, p, q) + 1.0;
    let mp = MaximalParams::new(r, decay, 1.0)?;
    let prm = SmoothnessParams::new(0.0, p, q)?;
    let terms = 100;
    let mut rec = Recorder::new(
        "s_star_equivalence",
        json!({"d": cfg.d, "grid": layout_json(&cfg.small), "r": r, "p": p, "q": q, "alpha": 0.0, "decay": decay,
               "coupling": Coupling::SameBand, "sequences": cfg.sequence_trials, "terms": terms}),
    );
    let mut rng = cfg.rng(Check::SStarEquivalence);
    let mut violations = 0usize;
    let mut ratios = Vec::with_capacity(cfg.sequence_trials);
    for _ in 0..cfg.sequence_trials {
        let s = random_sparse_sequence(frame, terms, &mut rng);
        let star = maximal_sequence(frame, &s, &mp, Coupling::SameBand)?;
        let a = tl_seq_norm(frame, &s, &prm)?;
        let b = tl_seq_norm(frame, &star, &prm)?;
        if b < a {
            violations += 1;
        }
        ratios.push(b / a);
    }
    rec.at_most("left_inequality_violations", violations as f64, 0.0);
    let med = median(&ratios);
    rec.measure("right_constant_median", med);
    rec.measure("right_constant_max", max_of(&ratios));
    rec.at_most(
        "right_constant_max_over_median",
        max_of(&ratios) / med,
        cfg.thresholds.stability_ratio,
    );
    Ok(rec.finish())
}
