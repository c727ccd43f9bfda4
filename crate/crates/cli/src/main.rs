use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use crisda::corpus::{Corpus, Manifest};
use crisda::harness::{read_report_csv, run_matrix, split_corpus, write_outputs, write_splits_json, ExperimentConfig, Workspace};
use crisda::model::TrainedModel;
use crisda::text::{builtin_profiles, identify_language, LanguageProfile, Preprocessor, StopwordTable};
use crisda::Error;

const STOPWORDS_ENV: &str = "CRISDA_STOPWORDS_DIR";

#[derive(Parser)]
#[command(name = "crisda", version, about = "Cross-event crisis message classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment matrix and write its reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report.csv, report.md, per_class.csv,
        /// gate_audit.csv and splits.json.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to one per core). Outputs do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the config's manifest_path.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Also save each experiment's model as <dir>/<experiment>.json.
        #[arg(long)]
        models_dir: Option<PathBuf>,
    },
    /// Classify id,text rows with a saved model.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the per-dataset splits of a config without training.
    Split {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Render report.md from a report.csv.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fill the empty lang cells of a CSV by language identification.
    Tag {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Profile JSON files ({"tag", "trigrams"}) replacing the built-in set.
        #[arg(long)]
        profile: Vec<PathBuf>,
    },
}

/// An error with its exit status: 1 for configuration problems, 2 for data
/// and runtime failures.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_config() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn config_failure(e: Error) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn data_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            jobs,
            manifest,
            models_dir,
        } => cmd_run(&config, &out, seed, jobs, manifest, models_dir),
        Command::Classify { model, input, out } => cmd_classify(&model, &input, &out),
        Command::Split {
            config,
            out,
            seed,
            manifest,
        } => cmd_split(&config, &out, seed, manifest),
        Command::Report { input, out } => cmd_report(&input, &out),
        Command::Tag { input, out, profile } => cmd_tag(&input, &out, &profile),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn preprocessor() -> Result<Preprocessor, Failure> {
    let table = match std::env::var_os(STOPWORDS_ENV) {
        Some(dir) => StopwordTable::with_overrides(Path::new(&dir)).map_err(config_failure)?,
        None => StopwordTable::builtin(),
    };
    Ok(Preprocessor::new(table))
}

/// Reads and validates the config and manifest. Every error here is a
/// configuration error.
fn load_config(path: &Path, seed: Option<u64>, manifest: Option<PathBuf>) -> Result<(ExperimentConfig, Manifest), Failure> {
    let mut config = ExperimentConfig::load(path).map_err(config_failure)?;
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    if let Some(manifest) = manifest {
        config.manifest_path = manifest;
    }
    let manifest = Manifest::load(&config.manifest_file()).map_err(config_failure)?;
    for w in config.validate(&manifest).map_err(config_failure)? {
        warn!("{w}");
    }
    Ok((config, manifest))
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure {
                code: 1,
                message: "--jobs must be at least 1".into(),
            });
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| data_failure(e.to_string()))
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn cmd_run(
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    jobs: Option<usize>,
    manifest: Option<PathBuf>,
    models_dir: Option<PathBuf>,
) -> CmdResult {
    let (config, manifest) = load_config(config_path, seed, manifest)?;
    let pre = preprocessor()?;
    let pool = thread_pool(jobs)?;
    let corpus = Corpus::load(&manifest)?;
    info!("loaded {} datasets", corpus.datasets().len());
    let (report, models, taxonomy, splits) = pool.install(|| -> Result<_, Failure> {
        let ws = Workspace::new(config, corpus, pre)?;
        let (report, models) = run_matrix(&ws, models_dir.is_some());
        Ok((report, models, ws.corpus().taxonomy.clone(), ws.splits().to_vec()))
    })?;
    write_outputs(out, &report, &taxonomy, &splits)?;
    if let Some(dir) = models_dir {
        fs::create_dir_all(&dir).map_err(|e| data_failure(format!("{}: {e}", dir.display())))?;
        for (row, model) in report.rows.iter().zip(models) {
            if let Some(model) = model {
                model.save(&dir.join(format!("{}.json", file_stem(&row.experiment))))?;
            }
        }
    }
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        warn!("{failed} of {} experiments failed; see the error column of report.csv", report.rows.len());
    }
    Ok(())
}

fn cmd_split(config_path: &Path, out: &Path, seed: Option<u64>, manifest: Option<PathBuf>) -> CmdResult {
    let (config, manifest) = load_config(config_path, seed, manifest)?;
    let corpus = Corpus::load(&manifest)?;
    let splits = split_corpus(&corpus, config.test_fraction, config.master_seed).map_err(config_failure)?;
    let mut buf = Vec::new();
    write_splits_json(&splits, &mut buf)?;
    fs::create_dir_all(out).map_err(|e| data_failure(format!("{}: {e}", out.display())))?;
    let path = out.join("splits.json");
    fs::write(&path, buf).map_err(|e| data_failure(format!("{}: {e}", path.display())))
}

fn cmd_report(input: &Path, out: &Path) -> CmdResult {
    let file = fs::File::open(input).map_err(|e| data_failure(format!("{}: {e}", input.display())))?;
    let rows = read_report_csv(file)?;
    crisda::harness::emit_report(&rows, crisda::harness::ReportFormat::Markdown, out)?;
    Ok(())
}

/// Column index of `name` in a CSV header, case-insensitive.
fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

fn row_error(path: &Path, e: csv::Error) -> Failure {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    data_failure(format!("{}: malformed row {line}: {e}", path.display()))
}

fn cmd_classify(model_path: &Path, input: &Path, out: &Path) -> CmdResult {
    let model = TrainedModel::load(model_path).map_err(|e| data_failure(e.to_string()))?;
    let pre = preprocessor()?;
    let mut reader = csv::Reader::from_path(input).map_err(|e| data_failure(format!("{}: {e}", input.display())))?;
    let headers = reader.headers().map_err(|e| row_error(input, e))?.clone();
    let (Some(id_col), Some(text_col)) = (column(&headers, "id"), column(&headers, "text")) else {
        return Err(data_failure(format!("{}: header must contain id and text", input.display())));
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| row_error(input, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = record.get(id_col).unwrap_or("").trim();
        if id.is_empty() {
            return Err(data_failure(format!("{}: malformed row {line}: empty id", input.display())));
        }
        rows.push((id.to_string(), record.get(text_col).unwrap_or("").to_string()));
    }
    let predictions: Vec<_> = {
        use rayon::prelude::*;
        rows.par_iter().map(|(_, text)| model.predict_text(text, &pre)).collect()
    };
    let mut buf = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        let csv_err = |e: csv::Error| data_failure(e.to_string());
        writer.write_record(["id", "predicted_label", "confidence"]).map_err(csv_err)?;
        for ((id, _), p) in rows.iter().zip(&predictions) {
            writer
                .write_record([id.as_str(), model.taxonomy.name(p.label), &p.confidence.to_string()])
                .map_err(csv_err)?;
        }
        writer.flush().map_err(|e| data_failure(e.to_string()))?;
    }
    fs::write(out, buf).map_err(|e| data_failure(format!("{}: {e}", out.display())))
}

fn cmd_tag(input: &Path, out: &Path, profile_paths: &[PathBuf]) -> CmdResult {
    let profiles: Vec<LanguageProfile> = if profile_paths.is_empty() {
        builtin_profiles()
    } else {
        profile_paths
            .iter()
            .map(|p| LanguageProfile::load(p))
            .collect::<Result<_, _>>()
            .map_err(config_failure)?
    };
    let mut reader = csv::Reader::from_path(input).map_err(|e| data_failure(format!("{}: {e}", input.display())))?;
    let mut headers = reader.headers().map_err(|e| row_error(input, e))?.clone();
    let Some(text_col) = column(&headers, "text") else {
        return Err(data_failure(format!("{}: header must contain text", input.display())));
    };
    let lang_col = match column(&headers, "lang") {
        Some(c) => c,
        None => {
            headers.push_field("lang");
            headers.len() - 1
        }
    };
    let mut buf = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        let csv_err = |e: csv::Error| data_failure(e.to_string());
        writer.write_record(&headers).map_err(csv_err)?;
        for record in reader.records() {
            let record = record.map_err(|e| row_error(input, e))?;
            let mut fields: Vec<String> = record.iter().map(str::to_string).collect();
            fields.resize(headers.len(), String::new());
            if fields[lang_col].trim().is_empty() {
                let guess = identify_language(&fields[text_col], &profiles).map_err(config_failure)?;
                fields[lang_col] = guess.tag().to_string();
            }
            writer.write_record(&fields).map_err(csv_err)?;
        }
        writer.flush().map_err(|e| data_failure(e.to_string()))?;
    }
    let mut file = fs::File::create(out).map_err(|e| data_failure(format!("{}: {e}", out.display())))?;
    file.write_all(&buf).map_err(|e| data_failure(format!("{}: {e}", out.display())))
}
