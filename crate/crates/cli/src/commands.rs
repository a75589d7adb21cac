use std::io::Write;
use std::path::Path;

use serde_json::json;
use shearframe::frame::{Frame, FrameSpec, Variant};
use shearframe::grid::{Grid, GridFft};
use shearframe::spaces::{
    besov_ab_norm, besov_seq_norm, dyadic_besov_norm, dyadic_besov_seq_norm, dyadic_tl_norm,
    dyadic_tl_seq_norm, tl_ab_norm, tl_seq_norm, SmoothnessParams,
};
use shearframe::transform::{
    dyadic_forward, dyadic_subsample, forward_grid, inverse_grid, subsample, DyadicBank,
    Translations,
};
use shearframe::verify::{run_suite, SuiteReport, VerifyConfig};
use shearframe::windows::WindowBank;

use crate::config::{ReportFormat, RunConfig};
use crate::io::{self, fmt17};
use crate::CliError;

type Out<'a> = &'a mut dyn Write;

fn emit(out: Out, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// CSV of the one-dimensional windows on `grid` points of [−2, 2].
pub fn windows_dump(cfg: &RunConfig, out: Out) -> Result<(), CliError> {
    let n = RunConfig::require(&cfg.grid, "grid")?;
    if n < 2 {
        return Err(CliError::Usage("--grid needs at least 2 points".into()));
    }
    let bank = WindowBank::new(cfg.windows.clone().unwrap_or_default())?;
    let mut text = String::from("x,meyer_aux,smooth_phi_hat,psi1_hat,psi2_hat,dyadic_phi_hat\n");
    for k in 0..n {
        let x = -2.0 + 4.0 * k as f64 / (n - 1) as f64;
        let row = [
            x,
            bank.aux(x),
            bank.smooth_phi_hat(x),
            bank.psi1_hat(x),
            bank.psi2_hat(x),
            bank.dyadic_phi_hat(&[x]),
        ];
        text.push_str(&row.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(","));
        text.push('\n');
    }
    match &cfg.out {
        Some(p) => write_text(p, &text),
        None => emit(out, &text),
    }
}

/// CSV of the band index set with cell volumes and translation counts.
pub fn lattice_enumerate(cfg: &RunConfig, out: Out) -> Result<(), CliError> {
    let d = RunConfig::require(&cfg.d, "d")?;
    let j_max = RunConfig::require(&cfg.j_max, "jmax")?;
    let period = cfg.period.unwrap_or(1);
    let mut spec = FrameSpec::new(d, 4usize.pow(j_max) * period, j_max, Variant::Smooth);
    spec.period = period;
    spec.validate()?;
    let mut text = String::from("band_id,cone,scale,shear,boundary,cell_volume,translations\n");
    let mut id = 0;
    for cone in 0..d {
        for j in 0..=j_max {
            for shear in shearframe::lattice::enumerate_shears(j, d) {
                let band = shearframe::lattice::Band::new(cone, j, shear)?;
                let shear_text = band
                    .shear
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                let count = Translations::new(&band, period).len();
                text.push_str(&format!(
                    "{id},{cone},{j},{shear_text},{},{},{count}\n",
                    band.is_boundary(),
                    fmt17(band.cell_volume())
                ));
                id += 1;
            }
        }
    }
    match &cfg.out {
        Some(p) => write_text(p, &text),
        None => emit(out, &text),
    }
}

fn frame_spec(cfg: &RunConfig) -> Result<FrameSpec, CliError> {
    let d = RunConfig::require(&cfg.d, "d")?;
    let n = RunConfig::require(&cfg.n, "N")?;
    let variant = cfg.variant.unwrap_or(Variant::Smooth);
    let mut spec = match cfg.j_max {
        Some(j) => FrameSpec::new(d, n, j, variant),
        None => FrameSpec::default_scales(d, n, variant)?,
    };
    if let Some(l) = cfg.period {
        spec.period = l;
    }
    if let Some(w) = &cfg.windows {
        spec.windows = w.clone();
    }
    spec.validate()?;
    Ok(spec)
}

pub fn frame_build(cfg: &RunConfig, out: Out) -> Result<(), CliError> {
    let spec = frame_spec(cfg)?;
    let path = RunConfig::require(&cfg.out, "out")?;
    let frame = Frame::build(spec)?;
    io::write_frame(&path, &frame)?;
    let summary = json!({"out": path, "spec": frame.spec(), "bands": frame.atoms().len(),
                         "parseval_deviation": frame.verify_parseval()});
    emit(
        out,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&summary).expect("json")
        ),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
    Roundtrip,
}

fn load_frame(cfg: &RunConfig) -> Result<Frame, CliError> {
    io::read_frame(&RunConfig::require(&cfg.frame, "frame")?)
}

fn check_grid(frame: &Frame, grid: &Grid) -> Result<(), CliError> {
    frame
        .grid()
        .check_same(grid)
        .map_err(|e| CliError::Input(format!("signal does not match the frame: {e}")))
}

pub fn transform(cfg: &RunConfig, dir: Direction, out: Out) -> Result<(), CliError> {
    let frame = load_frame(cfg)?;
    let fft = GridFft::new(*frame.grid());
    let input = RunConfig::require(&cfg.input, "input")?;
    match dir {
        Direction::Forward => {
            let f = io::read_signal(&input, Some(frame.grid().period))?;
            check_grid(&frame, f.grid())?;
            let field = forward_grid(&frame, &fft, &f)?;
            io::write_coefficients(&RunConfig::require(&cfg.out, "out")?, &frame, &field)?;
            emit(
                out,
                &format!(
                    "{}\n",
                    json!({"energy": field.energy(), "norm2_squared": f.norm2().powi(2)})
                ),
            )
        }
        Direction::Inverse => {
            let field = io::read_coefficients(&input, &frame)?;
            let f = inverse_grid(&frame, &fft, &field)?;
            io::write_signal(&RunConfig::require(&cfg.out, "out")?, &f)?;
            emit(out, &format!("{}\n", json!({"norm2": f.norm2()})))
        }
        Direction::Roundtrip => {
            let f = io::read_signal(&input, Some(frame.grid().period))?;
            check_grid(&frame, f.grid())?;
            let back = inverse_grid(&frame, &fft, &forward_grid(&frame, &fft, &f)?)?;
            let norm = f.norm2();
            let err = back.sub(&f)?.norm2();
            let rel = if norm > 0.0 { err / norm } else { err };
            if let Some(p) = &cfg.out {
                io::write_signal(p, &back)?;
            }
            emit(out, &format!("{}\n", json!({"relative_error": rel})))
        }
    }
}

pub fn norm(cfg: &RunConfig, out: Out) -> Result<(), CliError> {
    let space = RunConfig::require(&cfg.space, "space")?;
    let alpha = RunConfig::require(&cfg.alpha, "alpha")?;
    let p = RunConfig::require(&cfg.p, "p")?.0;
    let q = RunConfig::require(&cfg.q, "q")?.0;
    let params = SmoothnessParams::new(alpha, p, q)?;
    let input = RunConfig::require(&cfg.input, "input")?;
    let f = io::read_signal(&input, cfg.period)?;
    let grid = *f.grid();
    let fft = GridFft::new(grid);
    let shear_frame = || -> Result<Frame, CliError> {
        if cfg.frame.is_some() {
            let frame = load_frame(cfg)?;
            check_grid(&frame, &grid)?;
            return Ok(frame);
        }
        let mut spec = match cfg.j_max {
            Some(j) => FrameSpec::new(grid.d, grid.n, j, cfg.variant.unwrap_or(Variant::Smooth)),
            None => {
                FrameSpec::default_scales(grid.d, grid.n, cfg.variant.unwrap_or(Variant::Smooth))?
            }
        };
        spec.period = grid.period;
        Ok(Frame::build(spec)?)
    };
    let dyadic = || -> Result<DyadicBank, CliError> {
        let bank = WindowBank::new(cfg.windows.clone().unwrap_or_default())?;
        Ok(DyadicBank::new(&bank, grid, None)?)
    };
    let value = match space.as_str() {
        "BAB" | "FAB" | "bAB" | "fAB" => {
            let frame = shear_frame()?;
            match space.as_str() {
                "BAB" => besov_ab_norm(&frame, &fft, &f, &params)?,
                "FAB" => tl_ab_norm(&frame, &fft, &f, &params)?,
                s => {
                    let seq = subsample(&frame, &fft, &forward_grid(&frame, &fft, &f)?)?;
                    if s == "bAB" {
                        besov_seq_norm(&seq, &params)?
                    } else {
                        tl_seq_norm(&frame, &seq, &params)?
                    }
                }
            }
        }
        "B" => dyadic_besov_norm(&dyadic()?, &fft, &f, &params)?,
        "F" => dyadic_tl_norm(&dyadic()?, &fft, &f, &params)?,
        "b" | "f" => {
            let bank = dyadic()?;
            let seq = dyadic_subsample(&bank, &fft, &dyadic_forward(&bank, &fft, &f)?);
            if space == "b" {
                dyadic_besov_seq_norm(&seq, &params)?
            } else {
                dyadic_tl_seq_norm(&grid, &seq, &params)?
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown space `{other}`; expected bAB, fAB, BAB, FAB, b, f, B or F"
            )))
        }
    };
    let record = json!({"space": space, "params": params, "value": value});
    emit(out, &format!("{record}\n"))
}

fn report_csv(report: &SuiteReport) -> String {
    let mut text = String::from("check,bound,value,limit,kind,pass\n");
    for c in &report.checks {
        for b in &c.bounds {
            text.push_str(&format!(
                "{},{},{},{},{:?},{}\n",
                c.check,
                b.name,
                fmt17(b.value),
                fmt17(b.limit),
                b.kind,
                b.pass
            ));
        }
    }
    text
}

/// Returns whether every check passed.
pub fn verify(cfg: &RunConfig, out: Out) -> Result<bool, CliError> {
    let vc = match &cfg.verify {
        Some(v) => v.clone(),
        None => {
            let d = RunConfig::require(&cfg.d, "d")?;
            let n = RunConfig::require(&cfg.n, "N")?;
            VerifyConfig::new(d, n, cfg.seed.unwrap_or(0))?
        }
    };
    vc.validate()?;
    let suite = cfg.suite.clone().unwrap_or_else(|| "all".into());
    let report = run_suite(&vc, &suite)?;
    for c in &report.checks {
        emit(out, &format!("{}\n", c.summary()))?;
    }
    if let Some(path) = &cfg.out {
        let text = match cfg.format.unwrap_or_default() {
            ReportFormat::Json => serde_json::to_string_pretty(&report).expect("report serializes"),
            ReportFormat::Csv => report_csv(&report),
        };
        write_text(path, &text)?;
    }
    emit(
        out,
        &format!(
            "{}\n",
            if report.pass {
                "all checks passed"
            } else {
                "some checks failed"
            }
        ),
    )?;
    Ok(report.pass)
}
