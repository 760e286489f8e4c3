use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use submig::analysis::{e_sweep, write_e_sweep_csv, BandLimits};
use submig::harness::{preset, run_experiment, ExperimentConfig, PRESET_NAMES};
use submig::specfun::Quadrature;

#[derive(Parser)]
#[command(
    name = "submig",
    version,
    about = "Multi-frequency subspace migration imaging of thin inclusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a preset or a config file, with optional overrides.
    Run(RunArgs),
    /// List presets, or print one as a config file.
    Presets { name: Option<String> },
    /// Tabulate E1, E2 and -E1+E2 against distance for a frequency band.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Print the metrics JSON to stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    curve: Option<String>,
    /// Comma-separated inclusions, each `curve` or `curve:eps:mu`.
    #[arg(long)]
    curves: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "F")]
    f: Option<String>,
    #[arg(long)]
    lambda_max: Option<String>,
    #[arg(long)]
    lambda_min: Option<String>,
    /// A number in dB, or `none` for clean data.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// SF, MF, WMF<n> or LOG; repeatable.
    #[arg(long)]
    functional: Vec<String>,
    /// `201` or `201x151`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    /// Steering weights `c0,c1,c2`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> submig::Result<()> {
        let pairs = [
            ("curve", &self.curve),
            ("curves", &self.curves),
            ("eps", &self.eps),
            ("mu", &self.mu),
            ("h", &self.h),
            ("N", &self.n),
            ("F", &self.f),
            ("lambda_max", &self.lambda_max),
            ("lambda_min", &self.lambda_min),
            ("snr_db", &self.snr_db),
            ("seed", &self.seed),
            ("grid", &self.grid),
            ("tau", &self.tau),
            ("c", &self.c),
            ("out_dir", &self.out_dir),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        if !self.functional.is_empty() {
            cfg.set("functionals", &self.functional.join(","))?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.5)]
    lambda_max: f64,
    #[arg(long, default_value_t = 0.3)]
    lambda_min: f64,
    #[arg(long = "F", default_value_t = 10)]
    f: usize,
    #[arg(long, default_value_t = 1e-3)]
    r_min: f64,
    #[arg(long, default_value_t = 1.0)]
    r_max: f64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> submig::Result<()> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(p), _) => preset(p)?,
        (None, Some(path)) => ExperimentConfig::from_file(path)?,
        (None, None) => ExperimentConfig::default(),
    };
    args.overrides.apply(&mut cfg)?;
    let report = run_experiment(&cfg)?;
    if args.json {
        println!("{}", report.metrics_json()?);
    } else {
        println!("{} (config {:016x})", cfg.name, report.config_hash);
        for s in &report.spectra {
            println!(
                "  lambda={:.4} omega={:.4} rank={} segments={}",
                s.wavelength, s.omega, s.effective_rank, s.segment_count
            );
        }
        println!(
            "  tube radius {:.4}, localization k = {}",
            report.tube_radius, report.localization_k
        );
        for (f, m) in &report.metrics {
            println!(
                "  {:<7} sidelobe={:.5} localization={:.5} peak={:.5e} at ({:.3}, {:.3})",
                f.to_string(),
                m.sidelobe_energy,
                m.localization_error,
                m.peak_value,
                m.peak_location[0],
                m.peak_location[1]
            );
        }
        if let Some(d) = &cfg.out_dir {
            println!("  written to {}", d.display());
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> submig::Result<()> {
    let band = BandLimits::from_wavelengths(args.lambda_max, args.lambda_min, args.f)?;
    if args.count < 2 || !(args.r_min > 0.0 && args.r_min < args.r_max) {
        return Err(submig::Error::Domain(
            "need count >= 2 and 0 < r_min < r_max".into(),
        ));
    }
    let radii: Vec<f64> = (0..args.count)
        .map(|i| args.r_min + (args.r_max - args.r_min) * i as f64 / (args.count - 1) as f64)
        .collect();
    let rows = e_sweep(&radii, &band, &Quadrature::default())?;
    match args.out {
        Some(p) => write_e_sweep_csv(&rows, BufWriter::new(File::create(p)?)),
        None => write_e_sweep_csv(&rows, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Presets { name: None } => {
            for p in PRESET_NAMES {
                println!("{p}");
            }
            Ok(())
        }
        Command::Presets { name: Some(p) } => preset(&p).map(|cfg| print!("{}", cfg.to_text())),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
