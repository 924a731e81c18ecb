//! Operator entry point: every pipeline stage as a subcommand over the
//! documented file formats, reproducible from a run config.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use graph_sim::config::{ConfigError, RunConfig};
use graph_sim::eval::metrics_table_csv;
use graph_sim::ingest::{
    compute_stats, densify_scene_file, load_scene, verify_interpolation, DetectionsFile,
    LoadedScene, ProjectionsFile, SceneFile,
};
use graph_sim::model::{GraphSimModel, WindowInput};
use graph_sim::nn::Checkpoint;
use graph_sim::pipeline::{
    ablation_csv, evaluate_model, prepare_inputs, run_ablation, train_and_evaluate, AblationTable,
};
use graph_sim::scene::ObservationWindow;
use graph_sim::synthetic::{
    directional_group_scenes, generate_scene, lanes_to_file, scene_to_file, separable_scenes,
    AnnotatedScene, ScenarioSpec,
};

#[derive(Parser)]
#[command(
    name = "graph-sim",
    about = "Pedestrian crossing prediction over bird's-eye-view traffic scenes",
    version
)]
struct Cli {
    /// Base directory all relative paths resolve against.
    #[arg(long, global = true, default_value = ".")]
    workdir: PathBuf,

    /// Run configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolate sparse keyframe annotations up to the target frame rate.
    Densify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        rate: f64,
    },
    /// Dataset statistics over annotation files, in the published table layout.
    Stats {
        /// Annotation files (or a directory of scene_*.json).
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write synthetic scenes (and their map) in the annotation schema.
    GenSynthetic {
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config scenario (separable | directional-group | mixed).
        #[arg(long)]
        scenario: Option<String>,
        /// Overrides the config pedestrian count.
        #[arg(long)]
        peds: Option<usize>,
    },
    /// Dump per-window V/A (and B/D) matrices as CSV for inspection.
    BuildGraphs {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Cap on the number of windows dumped.
        #[arg(long, default_value_t = 8)]
        limit: usize,
    },
    /// Train on the scene directory's training split and save a checkpoint.
    Train {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the test split.
    Eval {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Metrics CSV output; raw (probability, label) pairs go next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and score every variant of an experiment table.
    Ablate {
        #[arg(long)]
        scenes: PathBuf,
        /// 2 = model comparison, 3 = graph variants, 4 = dynamics subsets.
        #[arg(long)]
        table: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check projected 2-D footprints of interpolated boxes against detections.
    VerifyInterp {
        #[arg(long)]
        projections: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.
#[derive(Debug)]
enum CliError {
    Config(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<graph_sim::ingest::IngestError> for CliError {
    fn from(e: graph_sim::ingest::IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<graph_sim::scene::SceneError> for CliError {
    fn from(e: graph_sim::scene::SceneError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<graph_sim::synthetic::SyntheticError> for CliError {
    fn from(e: graph_sim::synthetic::SyntheticError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<graph_sim::pipeline::PipelineError> for CliError {
    fn from(e: graph_sim::pipeline::PipelineError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<graph_sim::model::ModelError> for CliError {
    fn from(e: graph_sim::model::ModelError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<graph_sim::nn::CheckpointError> for CliError {
    fn from(e: graph_sim::nn::CheckpointError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Records every file written so a failed run leaves nothing behind.
struct OutputTracker {
    written: Vec<PathBuf>,
}

impl OutputTracker {
    fn new() -> Self {
        OutputTracker { written: Vec::new() }
    }

    fn write(&mut self, path: &Path, contents: &[u8]) -> Result<(), CliError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
        std::fs::write(path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn cleanup(&self) {
        for path in &self.written {
            let _ = std::fs::remove_file(path);
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    config_hash: String,
    seed: u64,
    version: &'static str,
}

impl RunManifest {
    fn new(config: &RunConfig, seed: u64) -> Self {
        RunManifest {
            config_hash: format!("{:016x}", config.hash()),
            seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("manifest serializes")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut tracker = OutputTracker::new();
    match run(&cli, &mut tracker) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            tracker.cleanup();
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli, tracker: &mut OutputTracker) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::from_path(&cli.workdir.join(path))?,
        None => RunConfig::default(),
    };
    let at = |p: &PathBuf| cli.workdir.join(p);

    match &cli.command {
        Command::Densify { input, output, rate } => {
            let file: SceneFile = read_scene_file(&at(input))?;
            let dense = densify_scene_file(&file, *rate)?;
            let json = serde_json::to_vec_pretty(&dense)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            tracker.write(&at(output), &json)?;
            tracker.write(
                &manifest_path(&at(output)),
                &RunManifest::new(&config, config.synthetic.seed).to_json(),
            )?;
            println!("densified {} frames -> {} frames", file.frames.len(), dense.frames.len());
            Ok(())
        }
        Command::Stats { input, output } => {
            let mut files = Vec::new();
            for path in input {
                let path = at(path);
                if path.is_dir() {
                    for entry in list_scene_files(&path)? {
                        files.push(read_scene_file(&entry)?);
                    }
                } else {
                    files.push(read_scene_file(&path)?);
                }
            }
            let stats = compute_stats(&files);
            tracker.write(&at(output), stats.to_csv().as_bytes())?;
            println!("{}", stats.to_csv());
            Ok(())
        }
        Command::GenSynthetic {
            out,
            seed,
            scenario,
            peds,
        } => {
            let mut synth = config.synthetic.clone();
            if let Some(seed) = seed {
                synth.seed = *seed;
            }
            if let Some(peds) = peds {
                synth.pedestrians = *peds;
            }
            if let Some(name) = scenario {
                synth.scenario = match name.as_str() {
                    "separable" => graph_sim::config::SyntheticScenario::Separable,
                    "directional-group" => graph_sim::config::SyntheticScenario::DirectionalGroup,
                    "mixed" => graph_sim::config::SyntheticScenario::Mixed,
                    other => {
                        return Err(CliError::Config(format!("unknown scenario {other}")))
                    }
                };
            }
            let scenes = build_scenario(&synth)?;
            let out_dir = at(out);
            for (idx, (scene, behaviours)) in scenes.iter().enumerate() {
                let file = scene_to_file(scene, behaviours);
                let json = serde_json::to_vec_pretty(&file)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                tracker.write(&out_dir.join(format!("scene_{idx:04}.json")), &json)?;
            }
            if let Some((scene, _)) = scenes.first() {
                let map = lanes_to_file(&scene.lanes);
                let json = serde_json::to_vec_pretty(&map)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                tracker.write(&out_dir.join("map.json"), &json)?;
            }
            tracker.write(
                &out_dir.join("run_manifest.json"),
                &RunManifest::new(&config, synth.seed).to_json(),
            )?;
            println!("wrote {} scenes to {}", scenes.len(), out_dir.display());
            Ok(())
        }
        Command::BuildGraphs { scenes, out, limit } => {
            let windows = load_windows(&at(scenes), &config)?;
            let manifest = graph_sim::graph::NormalizationManifest::fit(
                &windows,
                config.speed_definition,
                config.graph.d_thresh,
            );
            let refs: Vec<&ObservationWindow> = windows.iter().take(*limit).collect();
            let inputs = prepare_inputs(&refs, &manifest, &config)?;
            let out_dir = at(out);
            for (idx, input) in inputs.iter().enumerate() {
                let dir = out_dir.join(format!("window_{idx:04}"));
                dump_window(tracker, &dir, input)?;
            }
            tracker.write(
                &out_dir.join("run_manifest.json"),
                &RunManifest::new(&config, config.train.seed).to_json(),
            )?;
            println!("dumped {} windows to {}", inputs.len(), out_dir.display());
            Ok(())
        }
        Command::Train {
            scenes,
            checkpoint,
            log,
        } => {
            let windows = load_windows(&at(scenes), &config)?;
            let artifacts = train_and_evaluate(&windows, &config)?;
            let ck = artifacts
                .model
                .to_checkpoint(artifacts.config_hash, artifacts.manifest);
            let ck_path = at(checkpoint);
            if let Some(parent) = ck_path.parent() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            ck.save(&ck_path)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            tracker.written.push(ck_path.clone());
            if let Some(log_path) = log {
                tracker.write(&at(log_path), artifacts.log.to_csv().as_bytes())?;
            }
            tracker.write(
                &manifest_path(&ck_path),
                &RunManifest::new(&config, config.train.seed).to_json(),
            )?;
            println!(
                "trained on {} windows: train acc {:.4}, test acc {:.4}",
                windows.len(),
                artifacts.train_metrics.accuracy,
                artifacts.test_metrics.accuracy
            );
            Ok(())
        }
        Command::Eval {
            scenes,
            checkpoint,
            out,
        } => {
            let windows = load_windows(&at(scenes), &config)?;
            let ck = Checkpoint::load(&at(checkpoint))?;
            if ck.config_hash != config.hash() {
                return Err(CliError::Data(format!(
                    "checkpoint was trained under config hash {:016x}, current config hashes to {:016x}",
                    ck.config_hash,
                    config.hash()
                )));
            }
            if (ck.manifest.d_thresh - config.graph.d_thresh).abs() > 1e-12 {
                return Err(CliError::Data(
                    "checkpoint normalization manifest disagrees with the config d_thresh".into(),
                ));
            }
            let model = GraphSimModel::from_checkpoint(config.model, &ck)?;

            let labels = graph_sim::pipeline::pedestrian_labels(&windows);
            let split = graph_sim::eval::stratified_split(
                &labels,
                config.split.train_ratio,
                config.split.seed,
            )
            .map_err(|e| CliError::Runtime(e.to_string()))?;
            let test_windows: Vec<&ObservationWindow> = windows
                .iter()
                .filter(|w| split.test.contains(&w.target_id))
                .collect();
            let inputs = prepare_inputs(&test_windows, &ck.manifest, &config)?;
            let metrics = evaluate_model(&model, &inputs)?;

            let csv = metrics_table_csv(&[("test".to_string(), metrics.clone())]);
            let out_path = at(out);
            tracker.write(&out_path, csv.as_bytes())?;
            let pairs_path = out_path.with_extension("pairs.json");
            let pairs_json = serde_json::to_vec_pretty(&metrics.pairs)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            tracker.write(&pairs_path, &pairs_json)?;
            tracker.write(
                &manifest_path(&out_path),
                &RunManifest::new(&config, config.split.seed).to_json(),
            )?;
            println!("{csv}");
            Ok(())
        }
        Command::Ablate { scenes, table, out } => {
            let table = AblationTable::from_number(*table)
                .ok_or_else(|| CliError::Config(format!("unknown table {table}; use 2, 3 or 4")))?;
            let windows = load_windows(&at(scenes), &config)?;
            let runs = run_ablation(table, &windows, &config)?;
            let out_dir = at(out);
            let csv = ablation_csv(&runs);
            tracker.write(&out_dir.join("table.csv"), csv.as_bytes())?;
            for run in &runs {
                let slug: String = run
                    .row_name
                    .chars()
                    .map(|c| if c.is_alphanumeric() { c } else { '_' })
                    .collect();
                let pairs_json = serde_json::to_vec_pretty(&run.metrics.pairs)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                tracker.write(
                    &out_dir.join(format!("{slug}.pairs.json")),
                    &pairs_json,
                )?;
                let manifest = serde_json::json!({
                    "row": run.row_name,
                    "config_hash": format!("{:016x}", run.config_hash),
                    "seed": config.train.seed,
                    "version": env!("CARGO_PKG_VERSION"),
                });
                tracker.write(
                    &out_dir.join(format!("{slug}.manifest.json")),
                    serde_json::to_string_pretty(&manifest)
                        .map_err(|e| CliError::Runtime(e.to_string()))?
                        .as_bytes(),
                )?;
            }
            println!("{csv}");
            Ok(())
        }
        Command::VerifyInterp {
            projections,
            detections,
            threshold,
            out,
        } => {
            let projections: ProjectionsFile = read_json_file(&at(projections))?;
            let detections: DetectionsFile = read_json_file(&at(detections))?;
            let report = verify_interpolation(&projections, &detections, *threshold)?;
            let json = serde_json::to_vec_pretty(&report)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            tracker.write(&at(out), &json)?;
            println!(
                "checked {} objects, {} interpolated boxes below IoU {}",
                report.per_object.len(),
                report.unmatched_interpolated.len(),
                threshold
            );
            Ok(())
        }
    }
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("cannot parse {}: {e}", path.display())))
}

fn read_scene_file(path: &Path) -> Result<SceneFile, CliError> {
    read_json_file(path)
}

fn list_scene_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("scene_") && n.ends_with(".json"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Load every scene of a directory and extract its labelled windows.
fn load_windows(dir: &Path, config: &RunConfig) -> Result<Vec<ObservationWindow>, CliError> {
    let map_path = dir.join("map.json");
    let scene_paths = list_scene_files(dir)?;
    if scene_paths.is_empty() {
        return Err(CliError::Data(format!(
            "no scene_*.json files in {}",
            dir.display()
        )));
    }
    let mut windows = Vec::new();
    for path in scene_paths {
        let LoadedScene { scene, behaviours } = load_scene(&path, &map_path)?;
        windows.extend(graph_sim::synthetic::windows_from_scene(
            &scene,
            &behaviours,
            config.window.length,
            config.window.stride,
            config.window.pre_event(),
        )?);
    }
    Ok(windows)
}

fn build_scenario(synth: &graph_sim::config::SyntheticConfig) -> Result<Vec<AnnotatedScene>, CliError> {
    use graph_sim::config::SyntheticScenario;
    Ok(match synth.scenario {
        SyntheticScenario::Separable => separable_scenes(synth.pedestrians, synth.seed)?,
        SyntheticScenario::DirectionalGroup => {
            directional_group_scenes(synth.pedestrians, synth.seed)?
        }
        SyntheticScenario::Mixed => {
            // A handful of multi-user scenes with roughly five behavioural
            // pedestrians each.
            let scenes = synth.pedestrians.div_ceil(5).max(1);
            let mut out = Vec::new();
            for k in 0..scenes {
                let spec = ScenarioSpec {
                    seed: synth.seed.wrapping_add(k as u64),
                    lane_layout: synth.lane_layout,
                    crossers: 2,
                    walkers: 2,
                    standers: 1,
                    vehicles: 3,
                    bicycles: 1,
                    ..ScenarioSpec::default()
                };
                out.push(generate_scene(&spec)?);
            }
            out
        }
    })
}

fn dump_window(tracker: &mut OutputTracker, dir: &Path, input: &WindowInput) -> Result<(), CliError> {
    let matrix_csv = |m: &graph_sim::nn::Tensor| -> String {
        let mut out = String::new();
        for r in 0..m.rows() {
            let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    };
    tracker.write(
        &dir.join("nodes.csv"),
        input.graph.node_ids.join("\n").as_bytes(),
    )?;
    for t in 0..input.graph.frame_count() {
        tracker.write(
            &dir.join(format!("v_{t:02}.csv")),
            matrix_csv(&input.graph.features[t]).as_bytes(),
        )?;
        tracker.write(
            &dir.join(format!("a_{t:02}.csv")),
            matrix_csv(&input.graph.adjacency[t]).as_bytes(),
        )?;
        if t < input.graph.b.len() {
            tracker.write(
                &dir.join(format!("b_{t:02}.csv")),
                matrix_csv(&input.graph.b[t]).as_bytes(),
            )?;
            tracker.write(
                &dir.join(format!("d_{t:02}.csv")),
                matrix_csv(&input.graph.d[t]).as_bytes(),
            )?;
        }
    }
    Ok(())
}
