use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use polarlut::harness::{self, CodeRef, DecoderSpec, DesignParams, SweepConfig};
use polarlut::pipeline::{self, PipelineMode};
use polarlut::quantdesign::{design_channel_quantizer, design_luts, LutVariant, DEFAULT_GRID_SIZE};
use polarlut::{ebn0_to_sigma, DecoderTree, PolarCode};

#[derive(Parser)]
#[command(
    name = "polarlut",
    version,
    about = "Polar code LUT decoder design and simulation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Ib,
    MsIb,
    ReMsIb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Deep,
    Partial,
}

#[derive(Subcommand)]
enum Cmd {
    /// Choose a frozen set by density evolution and write the code as JSON.
    Construct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 3.0)]
        design_ebn0: f64,
        #[arg(long, default_value_t = 256)]
        fidelity: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Design a LUT set for a code.
    DesignLuts {
        #[arg(long)]
        code: PathBuf,
        #[arg(long, value_enum, default_value = "ms-ib")]
        variant: Variant,
        #[arg(long, default_value_t = 16)]
        size: usize,
        #[arg(long, default_value_t = 3.0)]
        design_ebn0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a FER/BER sweep and write one CSV per decoder.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        code: Option<PathBuf>,
        #[arg(long = "decoder")]
        decoders: Vec<String>,
        /// Comma-separated Eb/N0 points in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ebn0: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_frames: Option<u64>,
        #[arg(long)]
        min_frame_errors: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        lut_size: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        design_ebn0: Option<f64>,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
    /// Schedule the unrolled decoder and print the register inventory.
    Schedule {
        #[arg(long)]
        code: PathBuf,
        #[arg(long, value_enum, default_value = "deep")]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        ii: usize,
        #[arg(long, default_value_t = 1.0)]
        clock_ghz: f64,
        /// Bits per internal message.
        #[arg(long, default_value_t = 5)]
        quant: usize,
    },
    /// Decode the same channel outputs with two decoders and report divergences.
    Compare {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 10_000)]
        frames: u64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        ebn0: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        lut_size: usize,
    },
}

fn load_code(path: &Path) -> Result<PolarCode> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    PolarCode::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Construct {
            n,
            k,
            design_ebn0,
            fidelity,
            out,
        } => {
            let code = PolarCode::construct(n, k, design_ebn0, fidelity)?;
            emit(&code.to_json()?, out.as_deref())?;
            eprintln!("({n},{k}) code, tree {}", DecoderTree::build(&code).shape());
        }
        Cmd::DesignLuts {
            code,
            variant,
            size,
            design_ebn0,
            out,
        } => {
            let code = load_code(&code)?;
            let variant = match variant {
                Variant::Ib => LutVariant::Ib,
                Variant::MsIb => LutVariant::MsIb,
                Variant::ReMsIb => LutVariant::ReMsIb,
            };
            let sigma = ebn0_to_sigma(design_ebn0, code.rate());
            let q = design_channel_quantizer(sigma, size, DEFAULT_GRID_SIZE.max(16 * size))?;
            let d = design_luts(&code, &q, variant)?;
            emit(&d.luts.to_json()?, out.as_deref())?;
            eprintln!(
                "{} tables, channel I(X;T) = {:.4} bit",
                d.luts.table_count(),
                q.distribution.mutual_information()
            );
        }
        Cmd::Simulate {
            config,
            code,
            decoders,
            ebn0,
            seed,
            max_frames,
            min_frame_errors,
            workers,
            lut_size,
            design_ebn0,
            out_dir,
        } => {
            let mut cfg = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    let mut cfg = SweepConfig::from_json(&text)?;
                    // Relative code paths are resolved against the config file.
                    if let (CodeRef::Path(c), Some(dir)) = (&mut cfg.code, p.parent()) {
                        if c.is_relative() {
                            *c = dir.join(&*c);
                        }
                    }
                    cfg
                }
                None => {
                    let Some(code) = &code else {
                        bail!("either --config or --code is required");
                    };
                    SweepConfig {
                        code: CodeRef::Path(code.clone()),
                        decoders: Vec::new(),
                        ebn0_db: (0..=10).map(|i| i as f64 * 0.5).collect(),
                        max_frames: 1_000_000,
                        min_frame_errors: 400,
                        seed: 0,
                        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
                        design: DesignParams::default(),
                    }
                }
            };
            if let Some(c) = code {
                cfg.code = CodeRef::Path(c);
            }
            if !decoders.is_empty() {
                cfg.decoders = decoders
                    .iter()
                    .map(|d| d.parse::<DecoderSpec>())
                    .collect::<Result<_, _>>()?;
            }
            if let Some(e) = ebn0 {
                cfg.ebn0_db = e;
            }
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.max_frames = max_frames.unwrap_or(cfg.max_frames);
            cfg.min_frame_errors = min_frame_errors.unwrap_or(cfg.min_frame_errors);
            cfg.workers = workers.unwrap_or(cfg.workers);
            cfg.design.lut_size = lut_size.unwrap_or(cfg.design.lut_size);
            if design_ebn0.is_some() {
                cfg.design.design_ebn0_db = design_ebn0;
            }
            let result = harness::run_sweep(&cfg)?;
            for c in &result.curves {
                for p in &c.points {
                    println!(
                        "{:<12} {:>5.2} dB  frames {:>9}  FER {:.3e}  BER {:.3e}",
                        c.decoder.to_string(),
                        p.ebn0_db,
                        p.frames,
                        p.fer(),
                        p.ber()
                    );
                }
            }
            for p in harness::write_results_csv(&result, &out_dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Cmd::Schedule {
            code,
            mode,
            ii,
            clock_ghz,
            quant,
        } => {
            let code = load_code(&code)?;
            let mode = match mode {
                Mode::Deep => PipelineMode::Deep,
                Mode::Partial => PipelineMode::Partial(ii),
            };
            let graph = pipeline::unroll(&DecoderTree::build(&code));
            let s = pipeline::schedule(&graph, mode)?;
            let r = pipeline::throughput_report(&s, clock_ghz * 1e9, code.k(), quant)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&pipeline::export_schedule(&s, quant))?
            );
            println!(
                "latency_cc={} II={} throughput={:.3} Gbps latency={:.1} ns registers={} bits",
                r.latency_cc,
                r.initiation_interval,
                r.info_throughput_bps / 1e9,
                r.latency_ns,
                r.register_bits
            );
        }
        Cmd::Compare {
            code,
            a,
            b,
            frames,
            ebn0,
            seed,
            lut_size,
        } => {
            let code = load_code(&code)?;
            let params = DesignParams {
                lut_size,
                ..Default::default()
            };
            let r = harness::compare_decoders(
                &code,
                a.parse()?,
                b.parse()?,
                ebn0,
                &params,
                frames,
                seed,
            )?;
            match &r.first {
                None => println!("{} and {} agree on all {} frames", r.a, r.b, r.frames),
                Some(d) => println!(
                    "{} and {} differ on {} of {} frames, first at frame {}",
                    r.a, r.b, r.divergent_frames, r.frames, d.frame
                ),
            }
        }
    }
    Ok(())
}
