use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use voxrisk::audio::read_wav;
use voxrisk::config::Config;
use voxrisk::features::{extract_feature_vector, Feature};
use voxrisk::pipeline::{build_cohort, emit_report, load_manifest, run_crossdb, run_screening, ReportFormat};
use voxrisk::robustness::{list_wavs, robustness_report};
use voxrisk::splice::{derive_seed, splice, splice_file, SpliceConfig};
use voxrisk::stats::Priors;
use voxrisk::{Error, Result};

#[derive(Parser)]
#[command(name = "voxrisk", version, about = "Voice anonymization, acoustic features and depression-risk screening statistics")]
struct Cli {
    /// Master seed for splicing and data splits.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpliceArgs {
    /// Segment length lower bound, seconds.
    #[arg(long)]
    seg_min: Option<f64>,
    /// Segment length upper bound, seconds.
    #[arg(long)]
    seg_max: Option<f64>,
    /// Crossfade length, seconds.
    #[arg(long)]
    crossfade: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Randomly splice a WAV file.
    Splice {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        splice: SpliceArgs,
        /// Write the cut points and permutation as JSON.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Extract features from a WAV file or every WAV in a directory into CSV.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Splice each file before extraction.
        #[arg(long)]
        splice: bool,
    },
    /// Compare features of original and spliced recordings (CCC).
    Robustness {
        /// Directory of WAV files.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        splice: SpliceArgs,
    },
    /// Run the screening analysis on a cohort manifest.
    Screen {
        #[arg(long)]
        manifest: PathBuf,
        /// Report path; format follows the extension (.json, .txt, .csv) unless --format is given.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
        /// Additional human-readable report.
        #[arg(long)]
        text_out: Option<PathBuf>,
        #[arg(long, value_enum)]
        priors: Option<Priors>,
        /// Splice recordings before extraction.
        #[arg(long)]
        splice: bool,
        /// Include the omnibus multivariate test.
        #[arg(long)]
        mancova: bool,
    },
    /// Cross-corpus emotion classification grid.
    Crossdb {
        /// Corpus manifest (audio_path,label[,split]); give at least two.
        #[arg(long = "corpus", required = true, num_args = 1)]
        corpora: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// SVM misclassification cost.
        #[arg(long)]
        cost: Option<f64>,
    },
}

fn splice_config(base: &SpliceConfig, args: &SpliceArgs, seed: u64) -> Result<SpliceConfig> {
    let cfg = SpliceConfig {
        seg_min_s: args.seg_min.unwrap_or(base.seg_min_s),
        seg_max_s: args.seg_max.unwrap_or(base.seg_max_s),
        crossfade_s: args.crossfade.unwrap_or(base.crossfade_s),
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn extract(input: &Path, out: &Path, config: &Config, splice_cfg: Option<&SpliceConfig>) -> Result<()> {
    let files = if input.is_dir() { list_wavs(input)? } else { vec![input.to_path_buf()] };
    if files.is_empty() {
        return Err(Error::Validation(format!("{}: no WAV files found", input.display())));
    }
    let results: Vec<Result<_>> = files
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let buf = read_wav::<f64>(p)?;
            let buf = match splice_cfg {
                Some(c) => splice(&buf, &c.with_seed(derive_seed(c.seed, i as u64)))?,
                None => buf,
            };
            extract_feature_vector(&buf, &config.features)
        })
        .collect();
    let mut w = csv::Writer::from_path(out).map_err(|e| Error::Serialize(format!("{}: {e}", out.display())))?;
    let mut header = vec!["file".to_string()];
    header.extend(Feature::ALL.iter().map(|f| f.name().to_string()));
    header.push("flags".into());
    w.write_record(&header)?;
    let mut failures = 0;
    for (p, r) in files.iter().zip(results) {
        match r {
            Ok(v) => {
                let mut rec = vec![p.display().to_string()];
                rec.extend(v.iter().map(|(_, x)| x.map(|x| x.to_string()).unwrap_or_default()));
                rec.push(v.flags.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "));
                w.write_record(&rec)?;
            }
            Err(e) => {
                // a single bad input is a hard error; in a directory it is skipped
                if files.len() == 1 {
                    return Err(e);
                }
                log::warn!("{}: skipped: {e}", p.display());
                failures += 1;
            }
        }
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    if failures == files.len() {
        return Err(Error::Validation("no file could be processed".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(config.splice.seed);
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::Validation("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::invalid(e.to_string()))?;
    }
    match cli.command {
        Command::Splice { input, out, splice, plan_out } => {
            let cfg = splice_config(&config.splice, &splice, seed)?;
            let plan = splice_file(&input, &out, &cfg)?;
            log::info!("{} segments written to {}", plan.n_segments(), out.display());
            if let Some(p) = plan_out {
                write_json(&p, &plan)?;
            }
        }
        Command::Extract { input, out, splice } => {
            let cfg = splice_config(&config.splice, &SpliceArgs { seg_min: None, seg_max: None, crossfade: None }, seed)?;
            extract(&input, &out, &config, splice.then_some(&cfg))?;
        }
        Command::Robustness { corpus, threshold, out, splice } => {
            let cfg = splice_config(&config.splice, &splice, seed)?;
            let threshold = threshold.unwrap_or(config.robustness.threshold);
            let report = robustness_report(&corpus, &cfg, &config.features, threshold)?;
            for f in &report.features {
                let c = f.ccc.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
                let verdict = if f.control { "control" } else if f.pass { "pass" } else { "FAIL" };
                println!("{:<24} CCC {c:>7}  {verdict}", f.feature);
            }
            write_json(&out, &report)?;
        }
        Command::Screen { manifest, out, format, text_out, priors, splice, mancova } => {
            let records = load_manifest(&manifest)?;
            let cfg = splice_config(&config.splice, &SpliceArgs { seg_min: None, seg_max: None, crossfade: None }, seed)?;
            let cohort = build_cohort(&records, &config.features, splice.then_some(&cfg))?;
            let mut screening = config.screening.clone();
            if let Some(p) = priors {
                screening.priors = p;
            }
            screening.mancova |= mancova;
            let mut report = run_screening(&cohort, &screening)?;
            report.config.seed = Some(seed);
            report.config.features = Some(config.features.clone());
            report.config.splice = splice.then_some(cfg);
            emit_report(&report, format.unwrap_or_else(|| ReportFormat::from_path(&out)), &out)?;
            if let Some(t) = text_out {
                emit_report(&report, ReportFormat::Text, &t)?;
            }
        }
        Command::Crossdb { corpora, out, cost } => {
            let mut cfg = config.crossdb.clone();
            if let Some(c) = cost {
                cfg.svm.c = c;
            }
            let result = run_crossdb(&corpora, &config.features, &cfg, seed)?;
            println!("accuracy (rows: train, columns: test)");
            for (name, row) in result.corpora.iter().zip(&result.accuracy) {
                println!("{name:<16} {}", row.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "));
            }
            write_json(&out, &result)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class() as u8)
        }
    }
}
