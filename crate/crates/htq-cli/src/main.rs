//! `htq` — transform-coded variable-resolution pixel quantization at the
//! command line: calibration, encode/decode, quality/power sweeps, ADC
//! Monte Carlo studies, and synthetic test images.

mod imgio;
mod resize;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use htq::adcsim::{MonteCarloConfig, monte_carlo};
use htq::calibrate::calibrate_dataset;
use htq::codec::{CodedImage, decode, encode, transcode_baseline};
use htq::metrics::QualityReport;
use htq::power::{AdcKind, AdcParams, io_and_memory_normalized, multi_channel_power, normalized_power};
use htq::{HtConfig, ImagePlane};

#[derive(Debug)]
pub enum CliError {
    /// Filesystem problems — exit code 3.
    Io(String),
    /// Malformed images, containers, or flag values — exit code 4.
    Format(String),
}

impl From<htq::Error> for CliError {
    fn from(e: htq::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Format(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "htq", version, about = "Hadamard-transform variable-resolution image codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Transform order (power of two).
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Full-scale resolution N0 (DC channel bits).
    #[arg(long, default_value_t = 8)]
    n0: u32,
    /// Per-channel gain exponents, comma separated.
    #[arg(long, default_value = "0,3,2,3")]
    alphas: String,
    /// Bits per channel as a digit string ("8060") or comma list
    /// ("10,0,8,0"); zero eliminates a channel. Overrides --n0.
    #[arg(long)]
    bpc: Option<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<HtConfig, CliError> {
        let alphas = parse_u32_list(&self.alphas, self.m, "--alphas")?;
        match &self.bpc {
            Some(bpc) => {
                let bits = parse_bpc(bpc, self.m)?;
                if bits[0] == 0 {
                    return Err(CliError::Format(
                        "--bpc: the DC channel (first digit) cannot be eliminated".into(),
                    ));
                }
                Ok(HtConfig::with_bits(self.m, bits[0], alphas, bits)?)
            }
            None => Ok(HtConfig::from_n0(self.m, self.n0, alphas)?),
        }
    }
}

#[derive(Args, Clone)]
struct PowerParams {
    /// Sampling frequency [Hz].
    #[arg(long, default_value_t = 50e6)]
    f_s: f64,
    /// Full-scale reference [V].
    #[arg(long, default_value_t = 1.0)]
    v_ref: f64,
    /// Transistor overdrive voltage [V].
    #[arg(long, default_value_t = 0.1)]
    v_eff: f64,
    /// Minimum inverter input capacitance [F].
    #[arg(long, default_value_t = 1e-15)]
    c_min: f64,
    /// SAR DAC unit capacitance [F].
    #[arg(long, default_value_t = 4.8e-15)]
    c_unit: f64,
    /// Temperature [K].
    #[arg(long, default_value_t = 300.0)]
    temperature: f64,
}

impl PowerParams {
    fn build(&self) -> Result<AdcParams, CliError> {
        let p = AdcParams {
            f_s: self.f_s,
            v_ref: self.v_ref,
            v_eff: self.v_eff,
            c_min: self.c_min,
            c_unit: self.c_unit,
            t: self.temperature,
        };
        p.validate()
            .map_err(|_| CliError::Format("invalid ADC parameters".into()))?;
        Ok(p)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pipelined,
    Sar,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Large photograph-like grayscale plane.
    Photo,
    /// Small, busy dataset-thumbnail-like plane.
    Thumb,
    /// Photograph-like RGB triple.
    Rgb,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate per-channel gains and bit allocation from an image set.
    Calibrate {
        /// Calibration images (PGM/PPM/PNG); color planes count
        /// separately.
        images: Vec<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write the result as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Encode an image into an .htq container.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Decode an .htq container back to an image file.
    Decode { input: PathBuf, output: PathBuf },
    /// Quality/power sweep over images, sizes, and configurations.
    Sweep {
        images: Vec<PathBuf>,
        /// Square sizes to resize to (bilinear), comma separated; 0 keeps
        /// the native size.
        #[arg(long, default_value = "0")]
        sizes: String,
        /// Configurations: BPC digit strings. Uniform strings (8888, 6666,
        /// 3333) denote flat LSB-truncation at that depth; anything else
        /// is the transform codec.
        #[arg(long, default_value = "8888,6666,3333,8565,8060,7060,7050")]
        configs: String,
        /// Gain exponents used by the transform-codec configurations.
        #[arg(long, default_value = "0,3,2,3")]
        alphas: String,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print normalized ADC power tables and per-channel figures.
    Power {
        /// Bits per channel for the multi-channel block.
        #[arg(long, default_value = "8565")]
        bpc: String,
        #[command(flatten)]
        params: PowerParams,
        /// Also write the table rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo capacitor-mismatch study of the transform-embedded ADC.
    Adcsim {
        image: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Relative capacitor mismatch sigma (0.01 = 1%).
        #[arg(long, default_value_t = 0.01)]
        mismatch: f64,
        /// Op-amp DC gain in dB; omit for an ideal op amp.
        #[arg(long)]
        gain_db: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Restrict mismatch to the MDAC networks.
        #[arg(long)]
        mdac_only: bool,
        /// Inject kT/C sampling noise.
        #[arg(long)]
        thermal: bool,
        /// Write per-trial results as CSV (trial, psnr_db).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        hist_bins: usize,
    },
    /// Generate deterministic synthetic test images.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 512)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SynthKind::Photo)]
        kind: SynthKind,
        /// File extension: pgm, ppm, or png.
        #[arg(long, default_value = "pgm")]
        format: String,
    },
}

fn parse_u32_list(s: &str, expected: usize, flag: &str) -> Result<Vec<u32>, CliError> {
    let values: Result<Vec<u32>, _> = s.split(',').map(|t| t.trim().parse::<u32>()).collect();
    let values =
        values.map_err(|_| CliError::Format(format!("{flag}: expected comma-separated integers")))?;
    if values.len() != expected {
        return Err(CliError::Format(format!(
            "{flag}: expected {expected} values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

/// BPC strings: one digit per channel ("8060"), or comma-separated for
/// widths above 9 ("10,0,8,0").
fn parse_bpc(s: &str, m: usize) -> Result<Vec<u32>, CliError> {
    let bits = if s.contains(',') {
        parse_u32_list(s, m, "--bpc")?
    } else {
        let digits: Option<Vec<u32>> = s.chars().map(|c| c.to_digit(10)).collect();
        let digits =
            digits.ok_or_else(|| CliError::Format(format!("--bpc: bad digit string {s:?}")))?;
        if digits.len() != m {
            return Err(CliError::Format(format!(
                "--bpc: expected {m} digits, got {}",
                digits.len()
            )));
        }
        digits
    };
    if let Some(&b) = bits.iter().find(|&&b| b > 16) {
        return Err(CliError::Format(format!("--bpc: {b} bits is out of range")));
    }
    Ok(bits)
}

fn load_planes(path: &Path) -> Result<Vec<ImagePlane>, CliError> {
    Ok(imgio::load(path)?.planes)
}

#[derive(Serialize)]
struct CalibrationJson {
    m: usize,
    n0: u32,
    alphas: Vec<u32>,
    gains: Vec<u32>,
    bits: Vec<u32>,
    bpp: f64,
    mean_ratios: Vec<f64>,
    degenerate_dc: bool,
    planes_used: usize,
}

fn cmd_calibrate(
    images: &[PathBuf],
    cfg: &ConfigArgs,
    json: Option<&Path>,
) -> Result<(), CliError> {
    if images.is_empty() {
        return Err(CliError::Format("calibrate: no input images".into()));
    }
    let mut planes = Vec::new();
    for path in images {
        planes.extend(load_planes(path)?);
    }
    let cal = calibrate_dataset(&planes, cfg.m, cfg.n0)?;
    if cal.degenerate_dc {
        eprintln!("warning: DC channel shows no spread; falling back to all-zero gains");
    }
    let gains: Vec<u32> = cal.config.alphas().iter().map(|&a| 1 << a).collect();
    println!("calibrated over {} plane(s), M = {}", planes.len(), cfg.m);
    println!("channel  mean_ratio  alpha  gain  bits");
    for (j, &gain) in gains.iter().enumerate() {
        println!(
            "{:>7}  {:>10.3}  {:>5}  {:>4}  {:>4}",
            j,
            cal.mean_ratios[j],
            cal.config.alphas()[j],
            gain,
            cal.config.bits()[j]
        );
    }
    println!("bpp: {}", cal.config.bpp());
    if let Some(path) = json {
        let doc = CalibrationJson {
            m: cfg.m,
            n0: cfg.n0,
            alphas: cal.config.alphas().to_vec(),
            gains,
            bits: cal.config.bits().to_vec(),
            bpp: cal.config.bpp(),
            mean_ratios: cal.mean_ratios.clone(),
            degenerate_dc: cal.degenerate_dc,
            planes_used: planes.len(),
        };
        let body = serde_json::to_string_pretty(&doc).expect("serializable");
        std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_encode(input: &Path, output: &Path, cfg: &ConfigArgs) -> Result<(), CliError> {
    let planes = load_planes(input)?;
    let config = cfg.build()?;
    let coded = encode(&planes, &config)?;
    let bytes = coded.to_bytes();
    std::fs::write(output, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", output.display())))?;
    println!(
        "{} -> {}: {}x{} ({} plane(s)), bpc {:?}, bpp {}, {} bytes",
        input.display(),
        output.display(),
        coded.header.width,
        coded.header.height,
        coded.header.color_channels,
        coded.header.bits,
        coded.bpp(),
        bytes.len()
    );
    Ok(())
}

fn cmd_decode(input: &Path, output: &Path) -> Result<(), CliError> {
    let bytes =
        std::fs::read(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let coded = CodedImage::from_bytes(&bytes)?;
    let planes = decode(&coded)?;
    imgio::save(output, &planes)?;
    println!(
        "{} -> {}: {}x{} ({} plane(s))",
        input.display(),
        output.display(),
        coded.header.width,
        coded.header.height,
        planes.len()
    );
    Ok(())
}

enum SweepConfig {
    /// Flat LSB truncation at N bits (the uniform-digit labels).
    Baseline(u32),
    /// Transform codec with explicit per-channel bits.
    Proposed(Vec<u32>),
}

impl SweepConfig {
    fn parse(token: &str, m: usize) -> Result<(String, Self), CliError> {
        let bits = parse_bpc(token, m)?;
        let first = bits[0];
        if first > 0 && bits.iter().all(|&b| b == first) {
            Ok((token.to_string(), SweepConfig::Baseline(first)))
        } else {
            if bits[0] == 0 {
                return Err(CliError::Format(format!(
                    "config {token:?}: the DC channel cannot be eliminated"
                )));
            }
            Ok((token.to_string(), SweepConfig::Proposed(bits)))
        }
    }
}

struct SweepRow {
    image: String,
    size: usize,
    config: String,
    bpp: f64,
    psnr_db: f64,
    ssim: f64,
    p_pipe_pc: f64,
    p_sar_pc: f64,
    io_energy: f64,
    memory: f64,
}

fn sweep_cell(
    name: &str,
    planes: &[ImagePlane],
    size: usize,
    label: &str,
    config: &SweepConfig,
    alphas: &[u32],
    params: &AdcParams,
) -> Result<SweepRow, CliError> {
    let m = alphas.len();
    let (bits, reference, processed): (Vec<u32>, Vec<ImagePlane>, Vec<ImagePlane>) = match config {
        SweepConfig::Baseline(n) => {
            let out: Result<Vec<_>, _> =
                planes.iter().map(|p| transcode_baseline(p, *n)).collect();
            (vec![*n; m], planes.to_vec(), out?)
        }
        SweepConfig::Proposed(bits) => {
            let cfg = HtConfig::with_bits(m, bits[0], alphas.to_vec(), bits.clone())?;
            let coded = encode(planes, &cfg)?;
            let out = decode(&coded)?;
            let clipped: Vec<ImagePlane> = planes.iter().map(|p| p.clip_width(m)).collect();
            (bits.clone(), clipped, out)
        }
    };
    let report = QualityReport::compare(&reference, &processed)?;
    let bpp = htq::quantize::bpp(&bits);
    let pipe = multi_channel_power(&bits, AdcKind::Pipelined, params)?;
    let sar = multi_channel_power(&bits, AdcKind::Sar, params)?;
    let iomem = io_and_memory_normalized(bpp);
    Ok(SweepRow {
        image: name.to_string(),
        size,
        config: label.to_string(),
        bpp,
        psnr_db: report.psnr_db,
        ssim: report.ssim,
        p_pipe_pc: pipe.per_channel_normalized,
        p_sar_pc: sar.per_channel_normalized,
        io_energy: iomem.io_energy,
        memory: iomem.memory,
    })
}

fn cmd_sweep(
    images: &[PathBuf],
    sizes: &str,
    configs: &str,
    alphas: &str,
    out: &Path,
) -> Result<(), CliError> {
    if images.is_empty() {
        return Err(CliError::Format("sweep: no input images".into()));
    }
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Format("--sizes: expected comma-separated integers".into()))?;
    let m = 4usize;
    let alphas = parse_u32_list(alphas, m, "--alphas")?;
    let configs: Vec<(String, SweepConfig)> = configs
        .split(',')
        .map(|t| SweepConfig::parse(t.trim(), m))
        .collect::<Result<_, _>>()?;
    let params = AdcParams::default();

    let loaded: Vec<(String, Vec<ImagePlane>)> = images
        .iter()
        .map(|path| {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            load_planes(path).map(|planes| (name, planes))
        })
        .collect::<Result<_, _>>()?;

    // One cell per (image, size, config), evaluated in a work pool but
    // emitted in deterministic order.
    let mut cells = Vec::new();
    for (name, planes) in &loaded {
        for &size in &sizes {
            for (label, config) in &configs {
                cells.push((name, planes, size, label, config));
            }
        }
    }
    let run_cell = |(name, planes, size, label, config): &(
        &String,
        &Vec<ImagePlane>,
        usize,
        &String,
        &SweepConfig,
    )| {
        let resized: Vec<ImagePlane> = if *size == 0 {
            (*planes).clone()
        } else {
            planes.iter().map(|p| resize::bilinear(p, *size, *size)).collect()
        };
        let actual = if *size == 0 { resized[0].width() } else { *size };
        sweep_cell(name, &resized, actual, label, config, &alphas, &params)
    };
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<SweepRow>, CliError> = {
        use rayon::prelude::*;
        cells.par_iter().map(run_cell).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<SweepRow>, CliError> = cells.iter().map(run_cell).collect();
    let rows = rows?;

    let mut csv = String::from("image,size,config,bpp,psnr_db,ssim,p_pipe_pc,p_sar_pc,io_energy,memory\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{:.4},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.image, r.size, r.config, r.bpp, r.psnr_db, r.ssim, r.p_pipe_pc, r.p_sar_pc,
            r.io_energy, r.memory
        )
        .expect("string write");
    }
    std::fs::write(out, csv).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn cmd_power(bpc: &str, params: &PowerParams, csv: Option<&Path>) -> Result<(), CliError> {
    let p = params.build()?;
    let bits = parse_bpc(bpc, 4)?;

    println!("Normalized power vs resolution (1.0 = same ADC at 8 bits)");
    println!("| N       |     8 |     7 |     6 |     5 |     4 |     3 |     2 |");
    println!("|---------|-------|-------|-------|-------|-------|-------|-------|");
    let mut csv_body = String::from("kind,bits,normalized_power\n");
    for (kind, label) in [(AdcKind::Pipelined, "P_pipe"), (AdcKind::Sar, "P_sar")] {
        let mut row = format!("| {label:<7} |");
        for n in (2..=8u32).rev() {
            let v = normalized_power(kind, n, &p)?;
            write!(row, " {v:.3} |").expect("string write");
            writeln!(csv_body, "{label},{n},{v:.6}").expect("string write");
        }
        println!("{row}");
    }

    println!();
    println!("Per-channel bank at BPC {bits:?}:");
    for (kind, label) in [(AdcKind::Pipelined, "pipelined"), (AdcKind::Sar, "sar")] {
        let mc = multi_channel_power(&bits, kind, &p)?;
        println!(
            "  {label:<9} total {:.4}  per-channel {:.5}",
            mc.total_normalized, mc.per_channel_normalized
        );
        writeln!(
            csv_body,
            "{label}_bank,{},{:.6}",
            bpc, mc.per_channel_normalized
        )
        .expect("string write");
    }
    let bpp = htq::quantize::bpp(&bits);
    let iomem = io_and_memory_normalized(bpp);
    println!(
        "  bpp {bpp}  io_energy {:.4}  memory {:.4}  (normalized to 8 BPP)",
        iomem.io_energy, iomem.memory
    );
    println!("  per-channel figures are per color plane; multiply by 3 for RGB");

    if let Some(path) = csv {
        std::fs::write(path, csv_body)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_adcsim(
    image: &Path,
    cfg: &ConfigArgs,
    trials: usize,
    mismatch: f64,
    gain_db: Option<f64>,
    seed: u64,
    mdac_only: bool,
    thermal: bool,
    csv: Option<&Path>,
    hist_bins: usize,
) -> Result<(), CliError> {
    let img = imgio::load(image)?.luma();
    let config = cfg.build()?;
    let mut mc = MonteCarloConfig::new(
        trials,
        mismatch,
        gain_db.unwrap_or(f64::INFINITY),
        seed,
    );
    mc.mismatch_in_subadc = !mdac_only;
    mc.thermal_noise = thermal;
    let report = monte_carlo(&img, &config, &mc)?;

    println!(
        "{}: {} trials, mismatch sigma {}, op-amp gain {}, seed {}",
        image.display(),
        trials,
        mismatch,
        gain_db.map_or("ideal".into(), |g| format!("{g} dB")),
        seed
    );
    println!(
        "psnr: min {:.3} dB, mean {:.3} dB, max {:.3} dB, spread {:.3} dB",
        report.min_db(),
        report.mean_db(),
        report.max_db(),
        report.spread_db()
    );
    let hist = report.histogram(hist_bins);
    for (i, &count) in hist.counts.iter().enumerate() {
        println!(
            "  [{:>7.3}, {:>7.3}) {:>6}  {}",
            hist.edges[i],
            hist.edges[i + 1],
            count,
            "#".repeat((count * 50).div_ceil(report.trials.max(1)))
        );
    }

    if let Some(path) = csv {
        let mut body = String::from("trial,psnr_db\n");
        for (i, p) in report.psnr_db.iter().enumerate() {
            writeln!(body, "{i},{p:.6}").expect("string write");
        }
        std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_synth(
    out: &Path,
    count: usize,
    size: usize,
    seed: u64,
    kind: SynthKind,
    format: &str,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    for i in 0..count {
        let item_seed = seed.wrapping_add(1 + i as u64);
        let planes = match kind {
            SynthKind::Photo => vec![htq::synth::photo_like(size, size, item_seed)],
            SynthKind::Thumb => vec![htq::synth::thumbnail_like(size, size, item_seed)],
            SynthKind::Rgb => htq::synth::photo_like_rgb(size, size, item_seed),
        };
        let ext = match (format, planes.len()) {
            ("pgm", 1) | ("png", _) | ("ppm", 3) => format,
            ("pgm", _) => "ppm",
            ("ppm", _) => "pgm",
            _ => {
                return Err(CliError::Format(format!(
                    "--format {format:?} unsupported (use pgm, ppm, or png)"
                )));
            }
        };
        let path = out.join(format!("synth_{size}_{item_seed:04}.{ext}"));
        imgio::save(&path, &planes)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Calibrate { images, cfg, json } => cmd_calibrate(images, cfg, json.as_deref()),
        Command::Encode { input, output, cfg } => cmd_encode(input, output, cfg),
        Command::Decode { input, output } => cmd_decode(input, output),
        Command::Sweep {
            images,
            sizes,
            configs,
            alphas,
            out,
        } => cmd_sweep(images, sizes, configs, alphas, out),
        Command::Power { bpc, params, csv } => cmd_power(bpc, params, csv.as_deref()),
        Command::Adcsim {
            image,
            cfg,
            trials,
            mismatch,
            gain_db,
            seed,
            mdac_only,
            thermal,
            csv,
            hist_bins,
        } => cmd_adcsim(
            image,
            cfg,
            *trials,
            *mismatch,
            *gain_db,
            *seed,
            *mdac_only,
            *thermal,
            csv.as_deref(),
            *hist_bins,
        ),
        Command::Synth {
            out,
            count,
            size,
            seed,
            kind,
            format,
        } => cmd_synth(out, *count, *size, *seed, *kind, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Io(_) => ExitCode::from(3),
                CliError::Format(_) => ExitCode::from(4),
            }
        }
    }
}
