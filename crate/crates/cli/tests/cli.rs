use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crisda::corpus::{write_dataset, Taxonomy};
use crisda::synth::{generate_event, Language, SynthSpec};

fn crisda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crisda"))
        .args(args)
        .env_remove("CRISDA_STOPWORDS_DIR")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Three synthetic events, a manifest and a config over them.
struct Fixture {
    dir: tempfile::TempDir,
}

const EXPERIMENTS: &str = r#"[
    {"name": "c-ss", "exp_type": "SS", "target": "EVC", "sources": [{"dataset": "EVB"}]},
    {"name": "c-ms", "exp_type": "MS", "target": "EVC", "sources": [{"dataset": "EVA"}, {"dataset": "EVB"}]},
    {"name": "c-mswt", "exp_type": "MSWT", "target": "EVC",
     "sources": [{"dataset": "EVA"}, {"dataset": "EVC", "portion": "train_split"}]}
  ]"#;

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let synth = SynthSpec::default();
        let lang = Language::new("en", &synth);
        let mut entries = Vec::new();
        for (i, name) in ["EVA", "EVB", "EVC"].iter().enumerate() {
            let ds = generate_event(name, 10 * i as u32, &lang, &synth, 150, 3);
            let file = format!("{}.csv", name.to_lowercase());
            write_dataset(&ds, &Taxonomy::default(), fs::File::create(dir.path().join(&file)).unwrap()).unwrap();
            entries.push(serde_json::json!({
                "short_name": name,
                "path": file,
                "event_type": "synthetic",
                "date": ds.date.to_string(),
                "default_lang": "en",
                "expected_count": 150,
            }));
        }
        fs::write(dir.path().join("manifest.json"), serde_json::to_string(&entries).unwrap()).unwrap();
        let fixture = Fixture { dir };
        fixture.write_config("config.json", EXPERIMENTS);
        fixture
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write_config(&self, name: &str, experiments: &str) -> String {
        let raw = format!(
            "{{\n  \"manifest_path\": \"manifest.json\",\n  \"feature_k\": 300,\n  \"forest\": {{\"n_trees\": 20}},\n  \"gate\": {{\"enabled\": true}},\n  \"experiments\": {experiments}\n}}\n"
        );
        fs::write(self.path(name), raw).unwrap();
        self.arg(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

const OUTPUTS: [&str; 5] = ["report.csv", "report.md", "per_class.csv", "gate_audit.csv", "splits.json"];

#[test]
fn run_writes_all_outputs() {
    let fx = Fixture::new();
    let out = crisda(&["run", "--config", &fx.arg("config.json"), "--out", &fx.arg("out")]);
    assert!(out.status.success(), "{}", stderr(&out));
    for name in OUTPUTS {
        assert!(fx.path("out").join(name).is_file(), "{name}");
    }
    let report = read(&fx.path("out/report.csv"));
    assert_eq!(report.lines().count(), 4);
    assert!(read(&fx.path("out/report.md")).contains("| MSWT |"));
    assert!(read(&fx.path("out/gate_audit.csv")).lines().count() > 1);
}

#[test]
fn run_is_deterministic_across_jobs() {
    let fx = Fixture::new();
    let config = fx.arg("config.json");
    for (dir, jobs) in [("j1", "1"), ("j8", "8"), ("again", "1")] {
        let out = crisda(&["run", "--config", &config, "--out", &fx.arg(dir), "--jobs", jobs]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in OUTPUTS {
        let a = fs::read(fx.path("j1").join(name)).unwrap();
        assert_eq!(a, fs::read(fx.path("j8").join(name)).unwrap(), "{name} differs across --jobs");
        assert_eq!(a, fs::read(fx.path("again").join(name)).unwrap(), "{name} differs across runs");
    }
}

#[test]
fn seed_override_changes_splits() {
    let fx = Fixture::new();
    let config = fx.arg("config.json");
    crisda(&["split", "--config", &config, "--out", &fx.arg("s0")]);
    crisda(&["split", "--config", &config, "--out", &fx.arg("s7"), "--seed", "7"]);
    let s0 = read(&fx.path("s0/splits.json"));
    assert_ne!(s0, read(&fx.path("s7/splits.json")));

    let out = crisda(&["run", "--config", &config, "--out", &fx.arg("run")]);
    assert!(out.status.success());
    assert_eq!(s0, read(&fx.path("run/splits.json")));
}

#[test]
fn invariant_violation_exits_1_without_outputs() {
    let fx = Fixture::new();
    let bad = fx.write_config(
        "bad.json",
        r#"[
    {"name": "ok", "exp_type": "SS", "target": "EVC", "sources": [{"dataset": "EVB"}]},
    {"name": "own-target", "exp_type": "MS", "target": "EVC",
     "sources": [{"dataset": "EVA"}, {"dataset": "EVC"}]}
  ]"#,
    );
    let out = crisda(&["run", "--config", &bad, "--out", &fx.arg("out")]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("ExperimentSpec invariant") && err.contains("own-target"), "{err}");
    assert!(err.contains("line 8"), "{err}");
    assert!(!fx.path("out").exists());
}

#[test]
fn schema_error_exits_1_with_line() {
    let fx = Fixture::new();
    fs::write(fx.path("bad.json"), "{\n  \"manifest_path\": \"manifest.json\",\n  \"feature_k\": -3\n}\n").unwrap();
    let out = crisda(&["run", "--config", &fx.arg("bad.json"), "--out", &fx.arg("out")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = crisda(&["run", "--config", &fx.arg("missing.json"), "--out", &fx.arg("out")]);
    assert_eq!(out.status.code(), Some(1));
    let out = crisda(&["run", "--out", &fx.arg("out")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!fx.path("out").exists());
}

#[test]
fn dataset_load_failure_exits_2() {
    let fx = Fixture::new();
    let mut csv = read(&fx.path("evb.csv"));
    csv.push_str("extra,\"some text\",\n");
    fs::write(fx.path("evb.csv"), csv).unwrap();
    let out = crisda(&["run", "--config", &fx.arg("config.json"), "--out", &fx.arg("out")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line: 152"), "{}", stderr(&out));
    assert!(!fx.path("out").exists());
}

#[test]
fn classify_with_saved_model() {
    let fx = Fixture::new();
    let out = crisda(&[
        "run",
        "--config",
        &fx.arg("config.json"),
        "--out",
        &fx.arg("out"),
        "--models-dir",
        &fx.arg("models"),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let model = fx.arg("models/c-mswt.json");
    let lines: Vec<String> = read(&fx.path("evc.csv")).lines().take(6).map(str::to_string).collect();
    fs::write(fx.path("input.csv"), lines.join("\n") + "\n").unwrap();
    let out = crisda(&["classify", "--model", &model, "--input", &fx.arg("input.csv"), "--out", &fx.arg("pred.csv")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let pred = read(&fx.path("pred.csv"));
    let rows: Vec<&str> = pred.lines().collect();
    assert_eq!(rows[0], "id,predicted_label,confidence");
    assert_eq!(rows.len(), 6);
    for (row, input) in rows[1..].iter().zip(&lines[1..]) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], input.split(',').next().unwrap());
        assert!(Taxonomy::default().id_of(fields[1]).is_some());
        let confidence: f64 = fields[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&confidence));
    }

    // All out-of-vocabulary text still gets a prediction.
    fs::write(fx.path("oov.csv"), "id,text\nx1,qqqq zzzz\n").unwrap();
    let out = crisda(&["classify", "--model", &model, "--input", &fx.arg("oov.csv"), "--out", &fx.arg("oov_pred.csv")]);
    assert!(out.status.success());
    assert_eq!(read(&fx.path("oov_pred.csv")).lines().count(), 2);

    fs::write(fx.path("broken.csv"), "id,text\na,fine\nb,too,many\n").unwrap();
    let out = crisda(&["classify", "--model", &model, "--input", &fx.arg("broken.csv"), "--out", &fx.arg("x.csv")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 3"), "{}", stderr(&out));

    let json = read(&fx.path("models/c-mswt.json")).replacen("\"format_version\":1", "\"format_version\":2", 1);
    fs::write(fx.path("future.json"), json).unwrap();
    let out = crisda(&["classify", "--model", &fx.arg("future.json"), "--input", &fx.arg("oov.csv"), "--out", &fx.arg("y.csv")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("version"), "{}", stderr(&out));
}

#[test]
fn report_rerenders_markdown() {
    let fx = Fixture::new();
    assert!(crisda(&["run", "--config", &fx.arg("config.json"), "--out", &fx.arg("out")]).status.success());
    let out = crisda(&["report", "--input", &fx.arg("out/report.csv"), "--out", &fx.arg("again.md")]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(read(&fx.path("again.md")), read(&fx.path("out/report.md")));
}

#[test]
fn empty_experiment_list_succeeds() {
    let fx = Fixture::new();
    let config = fx.write_config("empty.json", "[]");
    let out = crisda(&["run", "--config", &config, "--out", &fx.arg("out")]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(read(&fx.path("out/report.csv")).lines().count(), 1);
}

#[test]
fn tag_fills_missing_languages() {
    let fx = Fixture::new();
    fs::write(
        fx.path("untagged.csv"),
        "id,text,label,lang\n\
         1,\"Strong earthquake felt across the city, buildings evacuated\",caution_and_advice,\n\
         2,\"Forte scossa di terremoto avvertita in tutta la regione\",caution_and_advice,\n\
         3,whatever,caution_and_advice,es\n",
    )
    .unwrap();
    let out = crisda(&["tag", "--input", &fx.arg("untagged.csv"), "--out", &fx.arg("tagged.csv")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let tagged = read(&fx.path("tagged.csv"));
    let langs: Vec<&str> = tagged.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(langs, ["en", "it", "es"]);
}

#[test]
fn stopword_override_directory() {
    let fx = Fixture::new();
    let out = Command::new(env!("CARGO_BIN_EXE_crisda"))
        .args(["run", "--config", &fx.arg("config.json"), "--out", &fx.arg("out")])
        .env("CRISDA_STOPWORDS_DIR", fx.path("no-such-dir"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    fs::create_dir(fx.path("stop")).unwrap();
    fs::write(fx.path("stop/en.txt"), "# custom\nens0w0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_crisda"))
        .args(["run", "--config", &fx.arg("config.json"), "--out", &fx.arg("out2")])
        .env("CRISDA_STOPWORDS_DIR", fx.path("stop"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
