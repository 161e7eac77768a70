use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pcac::codec::{decode_bytes, encode, EncoderConfig};
use pcac::entropy::{unpack_index_map, Bitstream, ToolFlags};
use pcac::eval::{fit_lambda_from_sweeps, read_sweep_csv, run_ablation, run_rd_sweep, write_ablation_csv, write_sweep_csv};
use pcac::ply::{load_ply, save_ply};
use pcac::transform::{GraphOverrides, LambdaQModel};
use pcac::{Error, ErrorKind, PointCloud};

const EXIT_ARGUMENT: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_FORMAT: u8 = 4;

#[derive(Parser)]
#[command(name = "pcac", version, about = "Lossy point cloud color codec")]
struct Cli {
    /// Worker threads; all cores when unset.
    #[arg(long, global = true, env = "PCAC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress the colors of a PLY cloud.
    Encode {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Quantization step.
        #[arg(long, default_value_t = 16.0)]
        q: f64,
        #[command(flatten)]
        coder: CoderArgs,
    },
    /// Rebuild colors from a bitstream and the original geometry.
    Decode {
        #[arg(short, long)]
        input: PathBuf,
        /// PLY holding the geometry the stream was coded against.
        #[arg(long)]
        geometry: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rate-distortion sweep over several quantization steps.
    Sweep {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        q: Vec<f64>,
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        coder: CoderArgs,
    },
    /// Sweep the five cumulative tool sets and report BD-rate against the first.
    Ablate {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        q: Vec<f64>,
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        coder: CoderArgs,
    },
    /// Fit the lambda-Q model to sweep CSVs.
    FitLambda {
        #[arg(long, value_delimiter = ',', required = true)]
        csv: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the header of a bitstream.
    Info {
        #[arg(short, long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct CoderArgs {
    #[arg(long)]
    no_slices: bool,
    #[arg(long)]
    no_intra: bool,
    #[arg(long)]
    no_adaptive_transform: bool,
    #[arg(long)]
    no_scan_select: bool,
    /// Kd-tree depth; chosen from the point count when unset.
    #[arg(long)]
    depth: Option<u32>,
    /// Depth of the probe tree used to split smooth and textured regions.
    #[arg(long)]
    probe_depth: Option<u32>,
    /// Color variance above which a probe block counts as textured.
    #[arg(long, default_value_t = pcac::partition::DEFAULT_THRESHOLD_1)]
    t1: f64,
    /// Textured block fraction above which the frame is split in two slices.
    #[arg(long, default_value_t = pcac::partition::DEFAULT_THRESHOLD_2)]
    t2: f64,
    /// Graph kernel width; per-block default when unset.
    #[arg(long)]
    delta: Option<f64>,
    /// Squared-distance edge threshold; per-block default when unset.
    #[arg(long)]
    tau: Option<f64>,
    /// Model file written by fit-lambda; built-in coefficients when unset.
    #[arg(long)]
    lambda_model: Option<PathBuf>,
}

impl CoderArgs {
    fn config(&self, q: f64) -> Result<EncoderConfig, Error> {
        let lambda_model = match &self.lambda_model {
            Some(path) => fs::read_to_string(path)?.parse::<LambdaQModel>()?,
            None => LambdaQModel::default(),
        };
        Ok(EncoderConfig {
            q,
            threshold_1: self.t1,
            threshold_2: self.t2,
            depth: self.depth,
            probe_depth: self.probe_depth,
            graph: GraphOverrides { delta: self.delta, tau: self.tau },
            lambda_model,
            tools: ToolFlags {
                slices: !self.no_slices,
                intra: !self.no_intra,
                adaptive_transform: !self.no_adaptive_transform,
                scan_select: !self.no_scan_select,
            },
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn load(path: &Path) -> Result<PointCloud, Error> {
    load_ply(path).map_err(|e| match e {
        pcac::ply::PlyError::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other.into(),
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Error> {
    fs::read(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Encode { input, output, q, coder } => {
            let cloud = load(&input)?;
            let frame = encode(&cloud, &coder.config(q)?)?;
            fs::write(&output, &frame.bytes)?;
            let s = &frame.stats;
            println!(
                "{} points, {} bytes, {:.4} bpp, {} slices, {} blocks ({} GFT, {} empty)",
                cloud.len(),
                frame.bytes.len(),
                frame.bits_per_point(),
                s.slices,
                s.blocks,
                s.gft_blocks,
                s.empty_blocks
            );
        }
        Command::Decode { input, geometry, output } => {
            let bytes = read_bytes(&input)?;
            let geometry = load(&geometry)?;
            let decoded = decode_bytes(&bytes, &geometry.positions())?;
            save_ply(&decoded.cloud, &output)?;
            println!("{} points decoded", decoded.cloud.len());
        }
        Command::Sweep { input, q, csv, coder } => {
            let cloud = load(&input)?;
            let rows = run_rd_sweep(&cloud, &coder.config(16.0)?, &q)?;
            write_sweep_csv(&rows, create(&csv)?)?;
            for r in &rows {
                println!("Q {:>6} {:>9.4} bpp {:>8.3} dB", r.q, r.bpp, r.psnr_y);
            }
        }
        Command::Ablate { input, q, csv, coder } => {
            let cloud = load(&input)?;
            let models = run_ablation(&cloud, &coder.config(16.0)?, &q)?;
            write_ablation_csv(&models, create(&csv)?)?;
            for m in &models {
                match m.bd_rate_vs_v1 {
                    Some(bd) => println!("{} BD-rate {bd:+.3}%", m.label),
                    None => println!("{} BD-rate n/a", m.label),
                }
            }
        }
        Command::FitLambda { csv, output } => {
            let sweeps = csv
                .iter()
                .map(|p| read_sweep_csv(File::open(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?))
                .collect::<Result<Vec<_>, Error>>()?;
            let fit = fit_lambda_from_sweeps(&sweeps)?;
            let mut out = create(&output)?;
            write!(out, "{fit}")?;
            out.flush()?;
            print!("{fit}");
        }
        Command::Info { input } => {
            let stream = Bitstream::from_bytes(&read_bytes(&input)?)?;
            let h = &stream.header;
            println!("points: {}", h.point_count);
            println!(
                "tools: slices={} intra={} adaptive_transform={} scan_select={}",
                h.flags.slices, h.flags.intra, h.flags.adaptive_transform, h.flags.scan_select
            );
            for (k, (s, seg)) in h.slices.iter().zip(&stream.segments).enumerate() {
                let members = if s.index_map.is_empty() {
                    "all".to_string()
                } else {
                    let (probe, map) = unpack_index_map(&s.index_map)?;
                    format!("{} of {} probe blocks (probe depth {probe})", map.iter().filter(|&&b| b).count(), map.len())
                };
                let param = |v: f32| if v == 0.0 { "default".to_string() } else { v.to_string() };
                println!(
                    "slice {k}: depth {} Q {} delta {} tau {} members {members} payload {} bytes",
                    s.depth,
                    s.q,
                    param(s.delta),
                    param(s.tau),
                    seg.len()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_ARGUMENT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ARGUMENT);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Io => EXIT_IO,
                ErrorKind::Format => EXIT_FORMAT,
                ErrorKind::Argument => EXIT_ARGUMENT,
            })
        }
    }
}
