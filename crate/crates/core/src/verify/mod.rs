//! Numerical checks. Each check builds what it needs from a [`VerifyConfig`],
//! runs seeded trials and returns a [`CheckReport`] with the measured values,
//! the bounds they were compared against and a pass flag.

mod embeddings;
mod identities;
mod maximal;
mod orthogonality;
mod sampling;
mod sequences;
mod vanishing;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::frame::{Frame, FrameSpec, Variant};
use crate::grid::GridFft;

pub use embeddings::{
    ab_to_besov_hypothesis, besov_to_ab_hypothesis, besov_to_ab_lambda, f_to_fab_hypothesis,
    fab_to_f_hypothesis,
};
pub use vanishing::{Construction, VanishingTuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    AtMost,
    AtLeast,
}

/// One comparison of a measured value against a limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub kind: BoundKind,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub parameters: Value,
    pub measured: BTreeMap<String, Value>,
    pub bounds: Vec<Bound>,
    pub notes: Vec<String>,
    pub pass: bool,
    /// Wall clock; kept out of the serialized report so that reports are
    /// byte-identical across runs. The suite report lists it separately.
    #[serde(skip)]
    pub runtime_seconds: f64,
}

impl CheckReport {
    pub fn bound(&self, name: &str) -> Option<&Bound> {
        self.bounds.iter().find(|b| b.name == name)
    }

    /// One line: name, pass flag and the failing bounds, if any.
    pub fn summary(&self) -> String {
        let failing: Vec<String> = self
            .bounds
            .iter()
            .filter(|b| !b.pass)
            .map(|b| {
                let op = if b.kind == BoundKind::AtMost {
                    "<="
                } else {
                    ">="
                };
                format!("{}={:.4e} (want {op} {:.4e})", b.name, b.value, b.limit)
            })
            .collect();
        let status = if self.pass { "PASS" } else { "FAIL" };
        if failing.is_empty() {
            format!("{status} {} ({:.1}s)", self.check, self.runtime_seconds)
        } else {
            format!(
                "{status} {} ({:.1}s): {}",
                self.check,
                self.runtime_seconds,
                failing.join(", ")
            )
        }
    }
}

/// Builder used by the checks.
pub(crate) struct Recorder {
    report: CheckReport,
    start: Instant,
}

impl Recorder {
    pub(crate) fn new(name: &str, parameters: Value) -> Self {
        Recorder {
            report: CheckReport {
                check: name.to_string(),
                parameters,
                measured: BTreeMap::new(),
                bounds: Vec::new(),
                notes: Vec::new(),
                pass: false,
                runtime_seconds: 0.0,
            },
            start: Instant::now(),
        }
    }

    pub(crate) fn measure(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.report.measured.insert(key.into(), v);
    }

    fn push(&mut self, name: impl Into<String>, value: f64, limit: f64, kind: BoundKind) -> bool {
        let pass = match kind {
            BoundKind::AtMost => value <= limit,
            BoundKind::AtLeast => value >= limit,
        };
        self.report.bounds.push(Bound {
            name: name.into(),
            value,
            limit,
            kind,
            pass,
        });
        pass
    }

    pub(crate) fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) -> bool {
        self.push(name, value, limit, BoundKind::AtMost)
    }

    pub(crate) fn at_least(&mut self, name: impl Into<String>, value: f64, limit: f64) -> bool {
        self.push(name, value, limit, BoundKind::AtLeast)
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) {
        self.report.notes.push(text.into());
    }

    pub(crate) fn finish(mut self) -> CheckReport {
        self.report.pass =
            !self.report.bounds.is_empty() && self.report.bounds.iter().all(|b| b.pass);
        self.report.runtime_seconds = self.start.elapsed().as_secs_f64();
        self.report
    }
}

/// Tolerances and stability ratios. Defaults follow the acceptance table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub parseval: f64,
    pub roundtrip: f64,
    pub sequence_roundtrip: f64,
    pub lowpass_roundtrip: f64,
    pub energy: f64,
    pub sampling: f64,
    /// Relative slack on inequalities that hold exactly in real arithmetic.
    pub exact_slack: f64,
    pub uniformity_ratio: f64,
    pub maximal_stability: f64,
    pub stability_ratio: f64,
    pub slope_rel_tol: f64,
    pub source_spread: f64,
    pub pp_spread: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            parseval: 1e-10,
            roundtrip: 1e-10,
            sequence_roundtrip: 1e-6,
            lowpass_roundtrip: 1e-12,
            energy: 1e-10,
            sampling: 1e-8,
            exact_slack: 1e-12,
            uniformity_ratio: 3.0,
            maximal_stability: 5.0,
            stability_ratio: 10.0,
            slope_rel_tol: 0.25,
            source_spread: 2.0,
            pp_spread: 10.0,
        }
    }
}

/// Grid used by a check: N nodes per axis on [0, L)^d, frame scales 0..=j_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub j_max: u32,
    pub period: usize,
}

impl Layout {
    pub fn spec(&self, d: usize, variant: Variant) -> FrameSpec {
        FrameSpec {
            period: self.period,
            j_max: self.j_max,
            ..FrameSpec::new(d, self.n, self.j_max, variant)
        }
    }

    fn compatible(n: usize, j_max: u32) -> Layout {
        Layout {
            n,
            j_max,
            period: n >> (2 * j_max),
        }
    }
}

/// Grid for the almost-orthogonality check. Shear–shear convolutions are
/// band-limited and are evaluated on a coarser grid of `eval_n` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalityLayout {
    pub grid: Layout,
    pub eval_n: usize,
    /// Scales 1..=top_scale are measured; top_scale < grid.j_max.
    pub top_scale: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub energy_trials: usize,
    pub exact_trials: usize,
    pub sequence_trials: usize,
    /// Sampling-compatible grid for sequence-level checks.
    pub compatible: Layout,
    /// Small compatible grid for the maximal-function checks.
    pub small: Layout,
    pub orthogonality: OrthogonalityLayout,
    /// Grid for scale j of the vanishing constructions at index j, with
    /// j < j_max. Coarse scales need a large period to have frequencies on
    /// the grid; scales 1.. enter the slope fit.
    pub vanishing: Vec<Layout>,
    pub vanishing_tuples: Vec<VanishingTuple>,
    pub thresholds: Thresholds,
}

impl VerifyConfig {
    /// Defaults for dimension d with main grid size n.
    pub fn new(d: usize, n: usize, seed: u64) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return invalid(format!("checks run for d = 2 or 3, got {d}"));
        }
        let main = FrameSpec::default_scales(d, n, Variant::Smooth)?;
        let (compatible, small, orthogonality, vanishing) = if d == 2 {
            (
                Layout::compatible(n, main.j_max),
                Layout::compatible(64, 2),
                OrthogonalityLayout {
                    grid: Layout {
                        n: 1024,
                        j_max: 4,
                        period: 4,
                    },
                    eval_n: 512,
                    top_scale: 3,
                },
                [(64, 2, 4), (512, 4, 2), (512, 4, 2), (512, 4, 2)].to_vec(),
            )
        } else {
            (
                Layout::compatible(32, 2),
                Layout::compatible(32, 2),
                OrthogonalityLayout {
                    grid: Layout {
                        n: 128,
                        j_max: 3,
                        period: 2,
                    },
                    eval_n: 64,
                    top_scale: 2,
                },
                [(16, 1, 4), (64, 2, 4), (64, 3, 1)].to_vec(),
            )
        };
        Ok(VerifyConfig {
            d,
            n,
            seed,
            trials: 20,
            energy_trials: 50,
            exact_trials: 50,
            sequence_trials: 100,
            compatible,
            small,
            orthogonality,
            vanishing: vanishing
                .iter()
                .map(|&(n, j_max, period)| Layout { n, j_max, period })
                .collect(),
            vanishing_tuples: VanishingTuple::defaults(d),
            thresholds: Thresholds::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for l in [self.compatible, self.small] {
            let spec = l.spec(self.d, Variant::Smooth);
            spec.validate()?;
            if !spec.is_sampling_compatible() {
                return invalid(format!("layout {l:?} is not sampling compatible"));
            }
        }
        let o = self.orthogonality;
        o.grid.spec(self.d, Variant::Smooth).validate()?;
        if o.top_scale == 0
            || o.top_scale >= o.grid.j_max
            || o.eval_n > o.grid.n
            || !o.eval_n.is_power_of_two()
        {
            return invalid(
                "orthogonality layout: need 1 <= top_scale < j_max and eval_n a power of two <= n",
            );
        }
        if self.vanishing.len() < 3 {
            return invalid("vanishing layouts: need scales 0, 1 and 2 at least");
        }
        for (j, l) in self.vanishing.iter().enumerate() {
            l.spec(self.d, Variant::Smooth).validate()?;
            if j as u32 >= l.j_max {
                return invalid(format!("vanishing layout for scale {j} needs j_max > {j}"));
            }
        }
        if self.trials < 2
            || self.energy_trials == 0
            || self.exact_trials == 0
            || self.sequence_trials < 2
        {
            return invalid("trial counts too small");
        }
        Ok(())
    }

    /// Independent stream for each check.
    pub(crate) fn rng(&self, check: Check) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(check as u64 + 1);
        rng
    }
}

/// Frames and FFT plans shared between checks.
#[derive(Default)]
pub struct Workspace {
    frames: Mutex<HashMap<String, Arc<(Frame, GridFft)>>>,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace::default()
    }

    pub fn frame(&self, spec: &FrameSpec) -> Result<Arc<(Frame, GridFft)>> {
        let key =
            serde_json::to_string(spec).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        if let Some(hit) = self.frames.lock().expect("frame cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let frame = Frame::build(spec.clone())?;
        let fft = GridFft::new(*frame.grid());
        let entry = Arc::new((frame, fft));
        self.frames
            .lock()
            .expect("frame cache poisoned")
            .insert(key, entry.clone());
        Ok(entry)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Parseval,
    ReproducingIdentity,
    Energy,
    Overlaps,
    Geometry,
    AlmostOrthogonality,
    SequenceCharacterization,
    SStarEquivalence,
    Embeddings,
    VanishingSequences,
    SamplingPlancherelPolya,
    MaximalInequalities,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::Parseval,
        Check::ReproducingIdentity,
        Check::Energy,
        Check::Overlaps,
        Check::Geometry,
        Check::AlmostOrthogonality,
        Check::SequenceCharacterization,
        Check::SStarEquivalence,
        Check::Embeddings,
        Check::VanishingSequences,
        Check::SamplingPlancherelPolya,
        Check::MaximalInequalities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Parseval => "parseval",
            Check::ReproducingIdentity => "reproducing_identity",
            Check::Energy => "energy",
            Check::Overlaps => "overlaps",
            Check::Geometry => "geometry",
            Check::AlmostOrthogonality => "almost_orthogonality",
            Check::SequenceCharacterization => "sequence_characterization",
            Check::SStarEquivalence => "s_star_equivalence",
            Check::Embeddings => "embeddings",
            Check::VanishingSequences => "vanishing_sequences",
            Check::SamplingPlancherelPolya => "sampling_plancherel_polya",
            Check::MaximalInequalities => "maximal_inequalities",
        }
    }

    pub fn from_name(name: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn run(self, cfg: &VerifyConfig, ws: &Workspace) -> Result<CheckReport> {
        cfg.validate()?;
        match self {
            Check::Parseval => identities::parseval(cfg, ws),
            Check::ReproducingIdentity => identities::reproducing_identity(cfg, ws),
            Check::Energy => identities::energy(cfg, ws),
            Check::Overlaps => identities::overlaps(cfg, ws),
            Check::Geometry => identities::geometry(cfg),
            Check::AlmostOrthogonality => orthogonality::almost_orthogonality(cfg, ws),
            Check::SequenceCharacterization => sequences::sequence_characterization(cfg, ws),
            Check::SStarEquivalence => sequences::s_star_equivalence(cfg, ws),
            Check::Embeddings => embeddings::embeddings(cfg, ws),
            Check::VanishingSequences => vanishing::vanishing_sequences(cfg, ws),
            Check::SamplingPlancherelPolya => sampling::sampling_plancherel_polya(cfg, ws),
            Check::MaximalInequalities => maximal::maximal_inequalities(cfg, ws),
        }
    }
}

/// Wall-clock data, the only part of a suite report that varies between runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub runtime_seconds: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
    pub timestamp: Timestamp,
}

/// Runs `all` or a single named check.
pub fn run_suite(cfg: &VerifyConfig, suite: &str) -> Result<SuiteReport> {
    let checks: Vec<Check> = if suite == "all" {
        Check::ALL.to_vec()
    } else {
        vec![Check::from_name(suite)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{suite}`")))?]
    };
    let ws = Workspace::new();
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut reports = Vec::new();
    for c in checks {
        reports.push(c.run(cfg, &ws)?);
    }
    let runtime_seconds = reports
        .iter()
        .map(|r| (r.check.clone(), r.runtime_seconds))
        .collect();
    Ok(SuiteReport {
        config: cfg.clone(),
        pass: reports.iter().all(|r| r.pass),
        checks: reports,
        timestamp: Timestamp {
            unix_seconds: started,
            runtime_seconds,
        },
    })
}

/// Median of a nonempty sample.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub(crate) fn max_of(values: &[f64]) -> f64 {
    values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn min_of(values: &[f64]) -> f64 {
    values.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// max / min of positive values; infinite when a value is zero.
pub(crate) fn spread(values: &[f64]) -> f64 {
    max_of(values) / min_of(values)
}

/// Least-squares slope of y against x.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub(crate) fn layout_json(l: &Layout) -> Value {
    json!({"n": l.n, "j_max": l.j_max, "period": l.period})
}
