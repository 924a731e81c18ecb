//! Python bindings: scene loading, synthetic generation, clustering, graph
//! tensors, the train/evaluate pipeline, and classification metrics.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use graph_sim::clustering::{cluster_frame, ClusteringMode, ClusteringParams};
use graph_sim::config::{RunConfig, SyntheticScenario};
use graph_sim::eval::compute_metrics as eval_metrics;
use graph_sim::graph::NormalizationManifest;
use graph_sim::ingest::{self, BehaviourRecord};
use graph_sim::model::prepare_window;
use graph_sim::pipeline::train_and_evaluate as pipeline_train_eval;
use graph_sim::scene::{ObservationWindow, SpeedDefinition};
use graph_sim::synthetic::{
    directional_group_scenes, generate_scene, lanes_to_file, scene_to_file, separable_scenes,
    ScenarioSpec,
};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyIOError::new_err(e.to_string())
}

/// A loaded bird's-eye-view scene with its behavioural annotations.
#[pyclass(name = "Scene")]
struct PyScene {
    inner: Arc<graph_sim::scene::Scene>,
    behaviours: Vec<BehaviourRecord>,
}

#[pymethods]
impl PyScene {
    #[getter]
    fn frames(&self) -> usize {
        self.inner.frames
    }

    #[getter]
    fn frame_rate(&self) -> f64 {
        self.inner.frame_rate
    }

    /// Ids of the non-ego road users.
    fn user_ids(&self) -> Vec<String> {
        self.inner.users.iter().map(|u| u.id.clone()).collect()
    }

    fn ego_id(&self) -> String {
        self.inner.ego.id.clone()
    }

    /// Pedestrians annotated as crossing.
    fn crossing_pedestrians(&self) -> Vec<String> {
        self.behaviours
            .iter()
            .filter(|b| b.will_cross)
            .map(|b| b.pedestrian_id.clone())
            .collect()
    }

    /// Hierarchical clusters of one frame as lists of member ids.
    #[pyo3(signature = (frame, physical_speed = true))]
    fn cluster_frame(&self, frame: usize, physical_speed: bool) -> PyResult<Vec<Vec<String>>> {
        let speed_def = if physical_speed {
            SpeedDefinition::Physical
        } else {
            SpeedDefinition::PaperLiteral
        };
        let set = cluster_frame(
            &self.inner,
            frame,
            &ClusteringParams::default(),
            ClusteringMode::Full,
            speed_def,
        )
        .map_err(value_err)?;
        Ok(set.clusters.into_iter().map(|c| c.members).collect())
    }

    /// Node ids plus the stacked feature and adjacency tensors of one
    /// observation window, as nested lists indexed [frame][node][...].
    #[pyo3(signature = (target_id, start_frame, length = 5))]
    #[allow(clippy::type_complexity)]
    fn window_tensors(
        &self,
        target_id: &str,
        start_frame: usize,
        length: usize,
    ) -> PyResult<(Vec<String>, Vec<Vec<Vec<f64>>>, Vec<Vec<Vec<f64>>>)> {
        let window = ObservationWindow::new(
            Arc::clone(&self.inner),
            target_id,
            start_frame,
            length,
            0,
        )
        .map_err(value_err)?;
        let windows = [window.clone()];
        let manifest =
            NormalizationManifest::fit(&windows, SpeedDefinition::Physical, 20.0);
        let config = RunConfig::default();
        let input = prepare_window(
            &window,
            &manifest,
            &config.clustering,
            ClusteringMode::Full,
            SpeedDefinition::Physical,
            &config.graph,
        )
        .map_err(value_err)?;
        let features = input
            .graph
            .features
            .iter()
            .map(|m| (0..m.rows()).map(|r| m.row(r).to_vec()).collect())
            .collect();
        let adjacency = input
            .graph
            .adjacency
            .iter()
            .map(|m| (0..m.rows()).map(|r| m.row(r).to_vec()).collect())
            .collect();
        Ok((input.graph.node_ids, features, adjacency))
    }
}

/// Load a scene from an annotation file and a map file.
#[pyfunction]
fn load_scene(annotation_path: PathBuf, map_path: PathBuf) -> PyResult<PyScene> {
    let loaded = ingest::load_scene(&annotation_path, &map_path).map_err(io_err)?;
    Ok(PyScene {
        inner: loaded.scene,
        behaviours: loaded.behaviours,
    })
}

/// Interpolate a sparse annotation file up to `rate` Hz.
#[pyfunction]
#[pyo3(signature = (input_path, output_path, rate = 10.0))]
fn densify(input_path: PathBuf, output_path: PathBuf, rate: f64) -> PyResult<usize> {
    let text = std::fs::read_to_string(&input_path).map_err(io_err)?;
    let file: ingest::SceneFile = serde_json::from_str(&text).map_err(value_err)?;
    let dense = ingest::densify_scene_file(&file, rate).map_err(value_err)?;
    let json = serde_json::to_vec_pretty(&dense).map_err(value_err)?;
    std::fs::write(&output_path, json).map_err(io_err)?;
    Ok(dense.frames.len())
}

/// Write synthetic scenes (and their shared map) in the annotation schema.
/// Returns the number of scene files written.
#[pyfunction]
#[pyo3(signature = (out_dir, scenario = "separable", pedestrians = 20, seed = 7))]
fn generate_synthetic(
    out_dir: PathBuf,
    scenario: &str,
    pedestrians: usize,
    seed: u64,
) -> PyResult<usize> {
    let scenario = match scenario {
        "separable" => SyntheticScenario::Separable,
        "directional-group" => SyntheticScenario::DirectionalGroup,
        "mixed" => SyntheticScenario::Mixed,
        other => return Err(PyValueError::new_err(format!("unknown scenario {other}"))),
    };
    let scenes = match scenario {
        SyntheticScenario::Separable => separable_scenes(pedestrians, seed).map_err(value_err)?,
        SyntheticScenario::DirectionalGroup => {
            directional_group_scenes(pedestrians, seed).map_err(value_err)?
        }
        SyntheticScenario::Mixed => {
            let n_scenes = pedestrians.div_ceil(5).max(1);
            let mut out = Vec::new();
            for k in 0..n_scenes {
                let spec = ScenarioSpec {
                    seed: seed.wrapping_add(k as u64),
                    crossers: 2,
                    walkers: 2,
                    standers: 1,
                    vehicles: 3,
                    bicycles: 1,
                    ..ScenarioSpec::default()
                };
                out.push(generate_scene(&spec).map_err(value_err)?);
            }
            out
        }
    };
    std::fs::create_dir_all(&out_dir).map_err(io_err)?;
    for (idx, (scene, behaviours)) in scenes.iter().enumerate() {
        let file = scene_to_file(scene, behaviours);
        let json = serde_json::to_vec_pretty(&file).map_err(value_err)?;
        std::fs::write(out_dir.join(format!("scene_{idx:04}.json")), json).map_err(io_err)?;
    }
    if let Some((scene, _)) = scenes.first() {
        let map = lanes_to_file(&scene.lanes);
        let json = serde_json::to_vec_pretty(&map).map_err(value_err)?;
        std::fs::write(out_dir.join("map.json"), json).map_err(io_err)?;
    }
    Ok(scenes.len())
}

fn load_windows(dir: &Path, config: &RunConfig) -> PyResult<Vec<ObservationWindow>> {
    let map_path = dir.join("map.json");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("scene_") && n.ends_with(".json"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(PyIOError::new_err(format!(
            "no scene_*.json files in {}",
            dir.display()
        )));
    }
    let mut windows = Vec::new();
    for path in paths {
        let loaded = ingest::load_scene(&path, &map_path).map_err(io_err)?;
        windows.extend(
            graph_sim::synthetic::windows_from_scene(
                &loaded.scene,
                &loaded.behaviours,
                config.window.length,
                config.window.stride,
                config.window.pre_event(),
            )
            .map_err(value_err)?,
        );
    }
    Ok(windows)
}

/// Train on a directory of scene files and return the test-split metrics.
#[pyfunction]
#[pyo3(signature = (scenes_dir, config_path = None))]
fn train_and_evaluate<'py>(
    py: Python<'py>,
    scenes_dir: PathBuf,
    config_path: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = match config_path {
        Some(path) => RunConfig::from_path(&path).map_err(value_err)?,
        None => {
            // Synthetic-scale defaults for the binding's one-call pipeline.
            let mut config = RunConfig::default();
            config.speed_definition = SpeedDefinition::Physical;
            config.model = graph_sim::model::ModelConfig::compact();
            config.train.learning_rate = 1e-3;
            config.train.epochs = 10;
            config
        }
    };
    let windows = load_windows(&scenes_dir, &config)?;
    let artifacts = pipeline_train_eval(&windows, &config).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("windows", windows.len())?;
    out.set_item("train_accuracy", artifacts.train_metrics.accuracy)?;
    out.set_item("test_accuracy", artifacts.test_metrics.accuracy)?;
    out.set_item("test_f1", artifacts.test_metrics.f1)?;
    out.set_item("test_precision", artifacts.test_metrics.precision)?;
    out.set_item("test_auc", artifacts.test_metrics.auc)?;
    out.set_item("config_hash", format!("{:016x}", artifacts.config_hash))?;
    Ok(out)
}

/// Accuracy, AUC, F1, and precision of (probability, label) pairs.
#[pyfunction]
#[pyo3(signature = (pairs, threshold = 0.5))]
fn compute_metrics<'py>(
    py: Python<'py>,
    pairs: Vec<(f64, u8)>,
    threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = eval_metrics(&pairs, threshold).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("accuracy", report.accuracy)?;
    out.set_item("auc", report.auc)?;
    out.set_item("f1", report.f1)?;
    out.set_item("precision", report.precision)?;
    out.set_item(
        "confusion",
        (
            report.confusion.tp,
            report.confusion.fp,
            report.confusion.fn_,
            report.confusion.tn,
        ),
    )?;
    Ok(out)
}

#[pymodule]
fn graph_sim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScene>()?;
    m.add_function(wrap_pyfunction!(load_scene, m)?)?;
    m.add_function(wrap_pyfunction!(densify, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(train_and_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    Ok(())
}
