use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvtc_cli::bench::{iteration_ratios, scale_sweep, SweepConfig};
use mvtc_cli::io::{read_labels, save_dataset, Format};
use mvtc_cli::pipeline::{run_source, DataSource, Metrics, PipelineConfig};
use mvtc_cli::synthetic::{generate_synthetic, SyntheticSpec};
use mvtc_cli::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "mvtc", version, about = "Scalable multi-view clustering with tensor low-frequency smoothing")]
struct Cli {
    /// Worker threads for the parallel kernels (results do not depend on it).
    #[arg(long, global = true, env = "MVTC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cluster a dataset and write a JSON report.
    Run(RunArgs),
    /// Score predicted labels against ground truth.
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Write a synthetic dataset with a manifest.
    GenSynthetic {
        #[command(flatten)]
        data: SyntheticArgs,
        #[arg(long)]
        clusters: usize,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
        format: FileFormat,
    },
    /// Time solver iterations at increasing sample counts.
    Bench {
        #[arg(long, required = true)]
        scale_sweep: bool,
        #[arg(long, value_delimiter = ',', default_value = "10000,20000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        anchors: usize,
        #[arg(long, default_value_t = 10)]
        embed_dim: usize,
        #[arg(long, default_value_t = 3)]
        views: usize,
        #[arg(long, default_value_t = 20)]
        dim: usize,
        #[arg(long, default_value_t = 7)]
        iters: usize,
        /// Interleaved passes over the sizes; iteration times are pooled.
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FileFormat {
    Csv,
    Binary,
}

#[derive(Args, Debug)]
struct SyntheticArgs {
    #[arg(long, default_value_t = 500)]
    n_samples: usize,
    /// Feature dimensions, one per view.
    #[arg(long, value_delimiter = ',', default_value = "20,30,25")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 7)]
    data_seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    manifest: Option<PathBuf>,
    /// Generate Gaussian blobs instead of reading a manifest (needs --clusters).
    #[arg(long, requires = "clusters")]
    synthetic: bool,
    #[command(flatten)]
    data: SyntheticArgs,

    #[arg(long)]
    anchors: Option<usize>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lowfreq: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative consensus change that stops iterating early; 0 disables.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    /// k-means runs with seeds seed, seed+1, ...; the lowest inertia wins.
    restarts: Option<usize>,
    /// Named hyperparameters (CCV, Caltech102, NUS-WIDE-OBJ, AwA, Cifar-10, YoutubeFace_sel).
    #[arg(long)]
    preset: Option<String>,
    /// Drop the consensus coupling (beta = 0).
    #[arg(long)]
    no_isc: bool,
    /// Skip the low-frequency projection.
    #[arg(long)]
    no_igs: bool,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SyntheticArgs {
    fn spec(&self, clusters: usize) -> SyntheticSpec {
        SyntheticSpec {
            n: self.n_samples,
            clusters,
            dims: self.dims.clone(),
            noise: self.noise,
            seed: self.data_seed,
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = PipelineConfig::default();
    if let Some(name) = &args.preset {
        cfg.apply_preset(name)?;
    }
    cfg.anchors = args.anchors;
    cfg.clusters = args.clusters;
    cfg.embed_dim = args.embed_dim;
    cfg.lambda = args.lambda.unwrap_or(cfg.lambda);
    cfg.beta = args.beta.unwrap_or(cfg.beta);
    cfg.low_freq = args.lowfreq.or(cfg.low_freq);
    cfg.max_iters = args.iters.unwrap_or(cfg.max_iters);
    cfg.early_stop_tol = args.tol.unwrap_or(cfg.early_stop_tol);
    cfg.restarts = args.restarts.unwrap_or(cfg.restarts);
    cfg.seed = args.seed;
    cfg.no_isc = args.no_isc;
    cfg.no_igs = args.no_igs;

    let source = match (&args.manifest, args.clusters) {
        (Some(path), _) => DataSource::Manifest(path.clone()),
        (None, Some(c)) => DataSource::Synthetic(args.data.spec(c)),
        (None, None) => return Err(CliError::Usage("--synthetic needs --clusters".into())),
    };
    let report = run_source(&source, &cfg)?;
    match &args.out {
        Some(path) => report.write(path),
        None => {
            println!("{}", report.to_json());
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Metrics { pred, truth } => {
            let p = read_labels(&pred)?;
            let t = read_labels(&truth)?;
            if p.len() != t.len() {
                return Err(CliError::DimensionMismatch {
                    paths: vec![pred, truth],
                    expected: format!("{} labels", p.len()),
                    actual: format!("{} labels", t.len()),
                });
            }
            let scores: Metrics = mvtc::metrics::evaluate(&p, &t)?.into();
            println!("{}", serde_json::to_string_pretty(&scores).expect("metrics serialise"));
            Ok(())
        }
        Command::GenSynthetic { data, clusters, out_dir, format } => {
            let dataset = generate_synthetic(&data.spec(clusters))?;
            let format = match format {
                FileFormat::Csv => Format::Csv,
                FileFormat::Binary => Format::Binary,
            };
            let manifest = save_dataset(&out_dir, "synthetic", &dataset, Some(clusters), format)?;
            println!("{}", manifest.display());
            Ok(())
        }
        Command::Bench { scale_sweep: _, sizes, anchors, embed_dim, views, dim, iters, rounds, seed } => {
            let cfg = SweepConfig { sizes, anchors, embed_dim, views, dim, iters, rounds, seed };
            let points = scale_sweep(&cfg)?;
            for p in &points {
                println!("{}", serde_json::to_string(p).expect("sweep point serialises"));
            }
            for (w, ratio) in points.windows(2).zip(iteration_ratios(&points)) {
                println!("{}", serde_json::json!({ "n_from": w[0].n, "n_to": w[1].n, "iteration_ratio": ratio }));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().lines().next().unwrap_or_default().to_string());
            eprintln!("{}", serde_json::to_string(&err.record()).expect("record serialises"));
            return ExitCode::from(2);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            let err = CliError::Usage(format!("--threads: {e}"));
            eprintln!("{}", serde_json::to_string(&err.record()).expect("record serialises"));
            return ExitCode::from(2);
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).expect("record serialises"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
