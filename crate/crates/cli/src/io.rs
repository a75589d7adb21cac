//! File formats: signals (raw f64 + JSON sidecar, or CSV for d = 2), frames
//! and coefficient dumps (u64 header length, JSON header, f64 payload).

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use shearframe::frame::{AtomSpectrum, Frame, FrameSpec, SparseMask};
use shearframe::grid::Grid;
use shearframe::lattice::Band;
use shearframe::transform::{CoefficientField, GridFunction};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    /// Real samples.
    F64,
    /// Interleaved real and imaginary parts.
    C128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub dtype: Dtype,
    #[serde(default = "one")]
    pub period: usize,
}

fn one() -> usize {
    1
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn read_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect()
}

fn push_f64s(out: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a signal. `.csv` files hold an N×N real array (d = 2, unit torus
/// unless `period` is given); anything else is raw little-endian f64 with a
/// `<path>.json` sidecar.
pub fn read_signal(path: &Path, period: Option<usize>) -> Result<GridFunction, CliError> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut values = Vec::new();
        let mut rows = 0;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            rows += 1;
            for cell in line.split(',') {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                values.push(v);
            }
        }
        if rows * rows != values.len() {
            return Err(CliError::Input(format!(
                "{}: expected a square N×N array",
                path.display()
            )));
        }
        let grid = Grid::with_period(2, rows, period.unwrap_or(1))?;
        return Ok(GridFunction::from_real(grid, &values)?);
    }
    let meta_path = sidecar_path(path);
    let meta: Sidecar =
        serde_json::from_str(&fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?)
            .map_err(|e| CliError::Input(format!("{}: {e}", meta_path.display())))?;
    let grid = Grid::with_period(meta.d, meta.n, period.unwrap_or(meta.period))?;
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let values = read_f64s(&bytes);
    let per = if meta.dtype == Dtype::F64 { 1 } else { 2 };
    if bytes.len() % 8 != 0 || values.len() != grid.len() * per {
        return Err(CliError::Input(format!(
            "{}: {} bytes do not hold {} {:?} samples",
            path.display(),
            bytes.len(),
            grid.len(),
            meta.dtype
        )));
    }
    Ok(match meta.dtype {
        Dtype::F64 => GridFunction::from_real(grid, &values)?,
        Dtype::C128 => GridFunction::new(
            grid,
            values
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )?,
    })
}

/// Writes raw samples plus sidecar; real output when the imaginary parts are
/// at rounding level.
pub fn write_signal(path: &Path, f: &GridFunction) -> Result<(), CliError> {
    let grid = f.grid();
    let peak = f.samples().iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let imag = f.samples().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let dtype = if imag <= 1e-12 * peak.max(f64::MIN_POSITIVE) {
        Dtype::F64
    } else {
        Dtype::C128
    };
    let mut out = Vec::with_capacity(grid.len() * 16);
    match dtype {
        Dtype::F64 => push_f64s(&mut out, f.samples().iter().map(|c| c.re)),
        Dtype::C128 => push_f64s(&mut out, f.samples().iter().flat_map(|c| [c.re, c.im])),
    }
    fs::write(path, out).map_err(|e| io_err(path, e))?;
    let meta = Sidecar {
        d: grid.d,
        n: grid.n,
        dtype,
        period: grid.period,
    };
    let meta_path = sidecar_path(path);
    fs::write(
        &meta_path,
        serde_json::to_string_pretty(&meta).expect("sidecar serializes"),
    )
    .map_err(|e| io_err(&meta_path, e))
}

/// Box of signed frequency indices, `lo` inclusive, `shape` entries per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub lo: Vec<i64>,
    pub shape: Vec<usize>,
}

impl SupportBox {
    fn of(grid: &Grid, indices: &[u32]) -> SupportBox {
        if indices.is_empty() {
            return SupportBox {
                lo: vec![0; grid.d],
                shape: vec![0; grid.d],
            };
        }
        let mut lo = vec![i64::MAX; grid.d];
        let mut hi = vec![i64::MIN; grid.d];
        let mut m = vec![0i64; grid.d];
        for &i in indices {
            grid.signed_index(i as usize, &mut m);
            for a in 0..grid.d {
                lo[a] = lo[a].min(m[a]);
                hi[a] = hi[a].max(m[a]);
            }
        }
        let shape = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .collect();
        SupportBox { lo, shape }
    }

    fn len(&self) -> usize {
        self.shape.iter().product()
    }

    /// Row-major position of a grid index inside the box.
    fn position(&self, grid: &Grid, idx: usize, m: &mut [i64]) -> usize {
        grid.signed_index(idx, m);
        m.iter()
            .zip(&self.lo)
            .zip(&self.shape)
            .fold(0, |acc, ((v, l), s)| acc * s + (v - l) as usize)
    }

    /// Grid index of every box position, row-major.
    fn grid_indices(&self, grid: &Grid) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut m = vec![0i64; grid.d];
        for pos in 0..self.len() {
            let mut rest = pos;
            for a in (0..grid.d).rev() {
                m[a] = self.lo[a] + (rest % self.shape[a]) as i64;
                rest /= self.shape[a];
            }
            out.push(grid.wrap_index(&m));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BandEntry {
    band: Band,
    #[serde(flatten)]
    support: SupportBox,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FrameHeader {
    format: String,
    spec: FrameSpec,
    lowpass: SupportBox,
    bands: Vec<BandEntry>,
}

const FRAME_FORMAT: &str = "shearframe-masks-1";
const COEFF_FORMAT: &str = "shearframe-coefficients-1";

fn write_container(path: &Path, header: &impl Serialize, payload: &[u8]) -> Result<(), CliError> {
    let json = serde_json::to_vec(header).expect("header serializes");
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&(json.len() as u64).to_le_bytes())
        .and_then(|_| w.write_all(&json))
        .and_then(|_| w.write_all(payload))
        .and_then(|_| w.flush())
        .map_err(|e| io_err(path, e))
}

fn read_container<H: for<'de> Deserialize<'de>>(path: &Path) -> Result<(H, Vec<f64>), CliError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    let bad = |msg: &str| CliError::Input(format!("{}: {msg}", path.display()));
    if bytes.len() < 8 {
        return Err(bad("truncated header"));
    }
    let len = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
    let end = 8usize
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad("truncated header"))?;
    let header: H = serde_json::from_slice(&bytes[8..end]).map_err(|e| bad(&e.to_string()))?;
    if (bytes.len() - end) % 8 != 0 {
        return Err(bad("payload is not a whole number of f64 values"));
    }
    Ok((header, read_f64s(&bytes[end..])))
}

fn boxes(frame: &Frame) -> (SupportBox, Vec<BandEntry>) {
    let grid = frame.grid();
    let low = SupportBox::of(grid, &frame.lowpass().indices);
    let bands = frame
        .atoms()
        .iter()
        .map(|a| BandEntry {
            band: a.band.clone(),
            support: SupportBox::of(grid, &a.mask.indices),
        })
        .collect();
    (low, bands)
}

/// Scatters sparse values into a dense box; `emit` writes one value.
fn scatter<T: Copy>(grid: &Grid, b: &SupportBox, indices: &[u32], values: &[T], zero: T) -> Vec<T> {
    let mut dense = vec![zero; b.len()];
    let mut m = vec![0i64; grid.d];
    for (&i, &v) in indices.iter().zip(values) {
        dense[b.position(grid, i as usize, &mut m)] = v;
    }
    dense
}

pub fn write_frame(path: &Path, frame: &Frame) -> Result<(), CliError> {
    let grid = frame.grid();
    let (lowpass, bands) = boxes(frame);
    let mut payload = Vec::new();
    let low = frame.lowpass();
    push_f64s(
        &mut payload,
        scatter(grid, &lowpass, &low.indices, &low.values, 0.0),
    );
    for (a, e) in frame.atoms().iter().zip(&bands) {
        push_f64s(
            &mut payload,
            scatter(grid, &e.support, &a.mask.indices, &a.mask.values, 0.0),
        );
    }
    let header = FrameHeader {
        format: FRAME_FORMAT.into(),
        spec: frame.spec().clone(),
        lowpass,
        bands,
    };
    write_container(path, &header, &payload)
}

/// Sparse mask from a dense box, keeping nonzero entries in grid order.
fn gather_mask(grid: &Grid, b: &SupportBox, dense: &[f64]) -> SparseMask {
    let mut pairs: Vec<(u32, f64)> = b
        .grid_indices(grid)
        .into_iter()
        .zip(dense)
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i as u32, *v))
        .collect();
    pairs.sort_unstable_by_key(|p| p.0);
    SparseMask {
        indices: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
    }
}

pub fn read_frame(path: &Path) -> Result<Frame, CliError> {
    let (header, payload): (FrameHeader, _) = read_container(path)?;
    if header.format != FRAME_FORMAT {
        return Err(CliError::Input(format!(
            "{}: not a frame file ({})",
            path.display(),
            header.format
        )));
    }
    let grid = header.spec.validate()?;
    let total: usize =
        header.lowpass.len() + header.bands.iter().map(|b| b.support.len()).sum::<usize>();
    if total != payload.len() {
        return Err(CliError::Input(format!(
            "{}: payload holds {} values, header needs {total}",
            path.display(),
            payload.len()
        )));
    }
    let mut at = 0;
    let mut take = |n: usize| {
        let s = &payload[at..at + n];
        at += n;
        s
    };
    let lowpass = gather_mask(&grid, &header.lowpass, take(header.lowpass.len()));
    let atoms = header
        .bands
        .iter()
        .map(|e| AtomSpectrum {
            band: e.band.clone(),
            mask: gather_mask(&grid, &e.support, take(e.support.len())),
        })
        .collect();
    Ok(Frame::from_parts(header.spec, lowpass, atoms)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CoeffHeader {
    format: String,
    spec: FrameSpec,
    /// Payload entries are (re, im) pairs of DFT values on each box.
    lowpass: SupportBox,
    bands: Vec<BandEntry>,
}

pub fn write_coefficients(
    path: &Path,
    frame: &Frame,
    field: &CoefficientField,
) -> Result<(), CliError> {
    let grid = frame.grid();
    let (lowpass, bands) = boxes(frame);
    let zero = Complex64::default();
    let mut payload = Vec::new();
    let mut push = |dense: Vec<Complex64>| {
        push_f64s(&mut payload, dense.into_iter().flat_map(|c| [c.re, c.im]))
    };
    push(scatter(
        grid,
        &lowpass,
        &frame.lowpass().indices,
        &field.lowpass,
        zero,
    ));
    for ((a, e), vals) in frame.atoms().iter().zip(&bands).zip(&field.bands) {
        push(scatter(grid, &e.support, &a.mask.indices, vals, zero));
    }
    let header = CoeffHeader {
        format: COEFF_FORMAT.into(),
        spec: frame.spec().clone(),
        lowpass,
        bands,
    };
    write_container(path, &header, &payload)
}

pub fn read_coefficients(path: &Path, frame: &Frame) -> Result<CoefficientField, CliError> {
    let (header, payload): (CoeffHeader, _) = read_container(path)?;
    if header.format != COEFF_FORMAT {
        return Err(CliError::Input(format!(
            "{}: not a coefficient file ({})",
            path.display(),
            header.format
        )));
    }
    if header.spec != *frame.spec() {
        return Err(CliError::Input(format!(
            "{}: coefficients were computed with a different frame",
            path.display()
        )));
    }
    let grid = frame.grid();
    let (lowpass, bands) = boxes(frame);
    let total: usize = 2 * (lowpass.len() + bands.iter().map(|b| b.support.len()).sum::<usize>());
    if total != payload.len() {
        return Err(CliError::Input(format!(
            "{}: payload holds {} values, frame needs {total}",
            path.display(),
            payload.len()
        )));
    }
    let mut at = 0;
    let mut gather = |b: &SupportBox, indices: &[u32]| {
        let dense = &payload[at..at + 2 * b.len()];
        at += 2 * b.len();
        let mut m = vec![0i64; grid.d];
        indices
            .iter()
            .map(|&i| {
                let p = b.position(grid, i as usize, &mut m);
                Complex64::new(dense[2 * p], dense[2 * p + 1])
            })
            .collect::<Vec<_>>()
    };
    let low = gather(&lowpass, &frame.lowpass().indices);
    let band_vals = frame
        .atoms()
        .iter()
        .zip(&bands)
        .map(|(a, e)| gather(&e.support, &a.mask.indices))
        .collect();
    Ok(CoefficientField {
        grid: *grid,
        lowpass: low,
        bands: band_vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use shearframe::frame::Variant;

    #[test]
    fn frame_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let frame = Frame::build(FrameSpec::new(2, 32, 2, Variant::Smooth)).unwrap();
        write_frame(&path, &frame).unwrap();
        let back = read_frame(&path).unwrap();
        assert_eq!(back.lowpass(), frame.lowpass());
        assert_eq!(back.atoms(), frame.atoms());
    }

    #[test]
    fn signal_round_trips_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let grid = Grid::new(2, 8).unwrap();
        let values: Vec<f64> = (0..64).map(|i| (i as f64).sin() / 3.0).collect();
        let f = GridFunction::from_real(grid, &values).unwrap();
        write_signal(&path, &f).unwrap();
        assert_eq!(read_signal(&path, None).unwrap(), f);
    }

    #[test]
    fn csv_must_be_square() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        fs::write(&path, "1,2\n3,4\n5,6\n").unwrap();
        assert!(matches!(read_signal(&path, None), Err(CliError::Input(_))));
    }
}
