//! Monte-Carlo FER/BER simulation over BPSK/AWGN.
//!
//! Every frame draws its message and noise from its own ChaCha stream keyed
//! by `(seed, point, frame)`, so results do not depend on how frames are
//! spread over worker threads. All decoders at a point see the same frames.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decode::{decode_sc, decode_ssc};
use crate::error::{param, Error, Result};
use crate::kernels::{FixedFormat, FixedKernel, FloatKernel, Kernel, LutKernel};
use crate::quantdesign::{design_channel_quantizer, design_luts, LutVariant, DEFAULT_GRID_SIZE};
use crate::{ebn0_to_sigma, Bit, DecoderTree, PolarCode};

/// Frames simulated between two stopping checks.
pub const BATCH: usize = 1024;

/// Standard normal sample by the Box–Muller transform.
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// BPSK (0 -> +1) over AWGN, returning channel LLRs `2y / sigma^2`.
pub fn awgn_channel<R: Rng>(codeword: &[Bit], sigma: f64, rng: &mut R) -> Vec<f64> {
    let s2 = sigma * sigma;
    codeword
        .iter()
        .map(|&b| {
            let x = if b == 0 { 1.0 } else { -1.0 };
            2.0 * (x + sigma * gaussian(rng)) / s2
        })
        .collect()
}

/// Random stream of one frame.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(point as u64).to_le_bytes());
    key[16..24].copy_from_slice(&frame.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSpec {
    Float,
    Fixed(FixedFormat),
    Lut(LutVariant),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Ssc,
    Sc,
}

/// A decoder as written on the command line: `float`, `fixed:Qi.Qc`, `ib`,
/// `ms-ib` or `re-ms-ib`, optionally suffixed with `/sc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderSpec {
    pub kernel: KernelSpec,
    pub algorithm: Algorithm,
}

impl FromStr for DecoderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, algorithm) = match s.trim().strip_suffix("/sc") {
            Some(b) => (b, Algorithm::Sc),
            None => (
                s.trim().strip_suffix("/ssc").unwrap_or(s.trim()),
                Algorithm::Ssc,
            ),
        };
        let kernel = match body {
            "float" => KernelSpec::Float,
            "ib" => KernelSpec::Lut(LutVariant::Ib),
            "ms-ib" => KernelSpec::Lut(LutVariant::MsIb),
            "re-ms-ib" => KernelSpec::Lut(LutVariant::ReMsIb),
            _ => {
                let Some(q) = body.strip_prefix("fixed:") else {
                    return param(format!("unknown decoder '{s}'"));
                };
                let parsed = q
                    .split_once('.')
                    .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
                let Some((qi, qc)) = parsed else {
                    return param(format!("fixed-point format '{q}' is not Qi.Qc"));
                };
                KernelSpec::Fixed(FixedFormat::new(qi, qc)?)
            }
        };
        Ok(Self { kernel, algorithm })
    }
}

impl fmt::Display for DecoderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kernel {
            KernelSpec::Float => write!(f, "float")?,
            KernelSpec::Fixed(q) => write!(f, "fixed:{q}")?,
            KernelSpec::Lut(v) => write!(f, "{}", v.name())?,
        }
        if self.algorithm == Algorithm::Sc {
            write!(f, "/sc")?;
        }
        Ok(())
    }
}

impl Serialize for DecoderSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DecoderSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters shared by every decoder built at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignParams {
    /// LUT message alphabet size.
    pub lut_size: usize,
    /// Eb/N0 the LUTs and the fixed-point channel scale are designed for;
    /// `None` takes the code's design point.
    pub design_ebn0_db: Option<f64>,
    /// Target probability of a saturated fixed-point channel LLR.
    pub saturation: f64,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self {
            lut_size: 16,
            design_ebn0_db: None,
            saturation: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Float(FloatKernel),
    Fixed(FixedKernel),
    Lut(LutKernel),
}

/// A decoder instantiated for one code. It is designed once and then used
/// at every point of a sweep.
#[derive(Debug, Clone)]
pub struct Decoder {
    pub spec: DecoderSpec,
    engine: Engine,
}

fn run<K: Kernel>(
    kernel: &K,
    alg: Algorithm,
    code: &PolarCode,
    tree: &DecoderTree,
    llr: &[f64],
) -> Vec<Bit> {
    let input: Vec<K::Msg> = llr.iter().map(|&l| kernel.map_channel(l)).collect();
    let out = match alg {
        Algorithm::Ssc => decode_ssc(code, tree, kernel, &input),
        Algorithm::Sc => decode_sc(code, kernel, &input),
    };
    out.expect("frame length checked by the caller").codeword
}

impl Decoder {
    pub fn build(spec: DecoderSpec, code: &PolarCode, params: &DesignParams) -> Result<Self> {
        let design_ebn0 = params.design_ebn0_db.unwrap_or(code.design_ebn0_db());
        let sigma = ebn0_to_sigma(design_ebn0, code.rate());
        let engine = match spec.kernel {
            KernelSpec::Float => Engine::Float(FloatKernel),
            KernelSpec::Fixed(fmt) => Engine::Fixed(FixedKernel::new(
                fmt,
                crate::kernels::saturation_scale(fmt, sigma, params.saturation)?,
            )?),
            KernelSpec::Lut(variant) => {
                let grid = DEFAULT_GRID_SIZE.max(16 * params.lut_size);
                let q = design_channel_quantizer(sigma, params.lut_size, grid)?;
                let d = design_luts(code, &q, variant)?;
                Engine::Lut(LutKernel::new(d.luts))
            }
        };
        Ok(Self { spec, engine })
    }

    /// Decodes channel LLRs into a codeword estimate.
    pub fn decode(&self, code: &PolarCode, tree: &DecoderTree, llr: &[f64]) -> Vec<Bit> {
        let alg = self.spec.algorithm;
        match &self.engine {
            Engine::Float(k) => run(k, alg, code, tree, llr),
            Engine::Fixed(k) => run(k, alg, code, tree, llr),
            Engine::Lut(k) => run(k, alg, code, tree, llr),
        }
    }
}

/// Code given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeRef {
    Path(PathBuf),
    Inline(PolarCode),
}

impl CodeRef {
    pub fn load(&self) -> Result<PolarCode> {
        match self {
            CodeRef::Inline(c) => Ok(c.clone()),
            CodeRef::Path(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.clone(),
                    source,
                })?;
                PolarCode::from_json(&text)
            }
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub code: CodeRef,
    pub decoders: Vec<DecoderSpec>,
    pub ebn0_db: Vec<f64>,
    pub max_frames: u64,
    pub min_frame_errors: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, flatten)]
    pub design: DesignParams,
}

impl SweepConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebn0_db.is_empty() {
            return param("no Eb/N0 points");
        }
        if self.decoders.is_empty() {
            return param("no decoders");
        }
        if self.min_frame_errors < 1 {
            return param("min_frame_errors must be at least 1");
        }
        if self.max_frames < self.min_frame_errors {
            return param("max_frames is below min_frame_errors");
        }
        if self.ebn0_db.iter().any(|e| !e.is_finite()) {
            return param("Eb/N0 points must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    /// Message bits per frame.
    pub k: usize,
}

impl PointStats {
    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames as f64
    }

    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / (self.frames as f64 * self.k as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderCurve {
    pub decoder: DecoderSpec,
    pub points: Vec<PointStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub seed: u64,
    pub curves: Vec<DecoderCurve>,
}

/// One transmitted frame: message and channel LLRs.
pub fn frame(code: &PolarCode, sigma: f64, rng: &mut ChaCha8Rng) -> (Vec<Bit>, Vec<f64>) {
    let msg: Vec<Bit> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
    let x = code
        .encode_systematic(&msg)
        .expect("message length matches k");
    let llr = awgn_channel(&x, sigma, rng);
    (msg, llr)
}

/// Runs the sweep on a thread pool of `config.workers` threads.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let code = config.code.load()?;
    let tree = DecoderTree::build(&code);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let decoders = config
        .decoders
        .iter()
        .map(|&s| Decoder::build(s, &code, &config.design))
        .collect::<Result<Vec<_>>>()?;
    let mut curves: Vec<DecoderCurve> = config
        .decoders
        .iter()
        .map(|&decoder| DecoderCurve {
            decoder,
            points: Vec::new(),
        })
        .collect();

    for (p, &ebn0) in config.ebn0_db.iter().enumerate() {
        let sigma = ebn0_to_sigma(ebn0, code.rate());
        let mut stats: Vec<PointStats> = (0..decoders.len())
            .map(|_| PointStats {
                ebn0_db: ebn0,
                frames: 0,
                frame_errors: 0,
                bit_errors: 0,
                k: code.k(),
            })
            .collect();
        let mut done = 0u64;
        while done < config.max_frames
            && stats
                .iter()
                .any(|s| s.frame_errors < config.min_frame_errors)
        {
            let n = (config.max_frames - done).min(BATCH as u64);
            // Per-frame bit errors for every decoder, merged in frame order.
            let errors: Vec<Vec<u64>> = pool.install(|| {
                (done..done + n)
                    .into_par_iter()
                    .map(|f| {
                        let mut rng = frame_rng(config.seed, p, f);
                        let (msg, llr) = frame(&code, sigma, &mut rng);
                        decoders
                            .iter()
                            .map(|d| {
                                let est = code.extract_message(&d.decode(&code, &tree, &llr));
                                est.iter().zip(&msg).filter(|(a, b)| a != b).count() as u64
                            })
                            .collect()
                    })
                    .collect()
            });
            for row in &errors {
                for (s, &e) in stats.iter_mut().zip(row) {
                    s.frames += 1;
                    s.bit_errors += e;
                    s.frame_errors += (e > 0) as u64;
                }
            }
            done += n;
        }
        for (c, s) in curves.iter_mut().zip(stats) {
            c.points.push(s);
        }
    }
    Ok(SweepResult {
        seed: config.seed,
        curves,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub frame: u64,
    pub a: Vec<Bit>,
    pub b: Vec<Bit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub a: DecoderSpec,
    pub b: DecoderSpec,
    pub frames: u64,
    pub divergent_frames: u64,
    pub first: Option<Divergence>,
}

impl ComparisonReport {
    pub fn equivalent(&self) -> bool {
        self.divergent_frames == 0
    }
}

/// Decodes `frames` frames at `ebn0_db` with both decoders on the same
/// channel outputs and reports where their codeword estimates differ.
///
/// Each decoder maps the channel through its own quantizer. For `ms-ib`
/// against `re-ms-ib` both are designed from the same density, so the second
/// sees exactly the relabeled messages of the first.
pub fn compare_decoders(
    code: &PolarCode,
    a: DecoderSpec,
    b: DecoderSpec,
    ebn0_db: f64,
    params: &DesignParams,
    frames: u64,
    seed: u64,
) -> Result<ComparisonReport> {
    let tree = DecoderTree::build(code);
    let da = Decoder::build(a, code, params)?;
    let db = Decoder::build(b, code, params)?;
    let sigma = ebn0_to_sigma(ebn0_db, code.rate());
    let results: Vec<Option<Divergence>> = (0..frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = frame_rng(seed, 0, f);
            let (_, llr) = frame(code, sigma, &mut rng);
            let (xa, xb) = (da.decode(code, &tree, &llr), db.decode(code, &tree, &llr));
            (xa != xb).then_some(Divergence {
                frame: f,
                a: xa,
                b: xb,
            })
        })
        .collect();
    let divergent_frames = results.iter().filter(|d| d.is_some()).count() as u64;
    Ok(ComparisonReport {
        a,
        b,
        frames,
        divergent_frames,
        first: results.into_iter().flatten().next(),
    })
}

#[derive(Serialize)]
struct CsvRow {
    ebn0_db: f64,
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
    #[serde(rename = "FER")]
    fer: f64,
    #[serde(rename = "BER")]
    ber: f64,
}

/// File name used for a decoder's CSV, e.g. `fixed-5.4.csv`.
pub fn csv_file_name(spec: &DecoderSpec) -> String {
    format!("{}.csv", spec.to_string().replace([':', '/'], "-"))
}

/// Writes one CSV per decoder into `dir`, rows ascending in Eb/N0.
pub fn write_results_csv(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.curves.is_empty() || result.curves.iter().any(|c| c.points.is_empty()) {
        return param("nothing to write: the result has no points");
    }
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for c in &result.curves {
        let path = dir.join(csv_file_name(&c.decoder));
        let csv_err = |source| Error::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        let mut points = c.points.clone();
        points.sort_by(|x, y| x.ebn0_db.total_cmp(&y.ebn0_db));
        for p in points {
            w.serialize(CsvRow {
                ebn0_db: p.ebn0_db,
                frames: p.frames,
                frame_errors: p.frame_errors,
                bit_errors: p.bit_errors,
                fer: p.fer(),
                ber: p.ber(),
            })
            .map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        paths.push(path);
    }
    Ok(paths)
}

/// Eb/N0 where a FER curve crosses `target`, by linear interpolation of
/// `log10(FER)` between the two bracketing points.
pub fn crossing_ebn0(points: &[PointStats], target: f64) -> Option<f64> {
    let mut pts: Vec<&PointStats> = points.iter().filter(|p| p.frames > 0).collect();
    pts.sort_by(|x, y| x.ebn0_db.total_cmp(&y.ebn0_db));
    pts.windows(2).find_map(|w| {
        let (p, q) = (w[0], w[1]);
        let (fp, fq) = (p.fer(), q.fer());
        if fp >= target && fq < target && fq > 0.0 {
            let (lp, lq, lt) = (fp.log10(), fq.log10(), target.log10());
            Some(p.ebn0_db + (lt - lp) / (lq - lp) * (q.ebn0_db - p.ebn0_db))
        } else {
            None
        }
    })
}
