//! Reproducible runs: a manifest records every input digest and parameter,
//! and executing the manifest writes the full set of output files.
//!
//! Outputs contain no timestamps or host details, so replaying a manifest
//! on the same inputs reproduces them byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::SweepConfig;
use crate::compactness::{DirectionSet, FilterMode};
use crate::dataset::{normalize, parse_labels, parse_points, Normalization, Partition, PointSet};
use crate::error::{Error, Result};
use crate::pipeline::{analyze_partition, run_sweep, IndexParams, PartitionAnalysis, SweepReport};
use crate::plot::decision_svg;
use crate::separability::adjacency_flags;

pub const SCHEMA: &str = "clusterscope/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Task {
    Analyze {
        data: String,
        labels: String,
        directions: Option<String>,
        normalization: Option<Normalization>,
        params: IndexParams,
        /// Filters whose margin matrices are written in addition to the primary one.
        margin_filters: Vec<FilterMode>,
    },
    Sweep {
        data: String,
        directions: Option<String>,
        normalization: Option<Normalization>,
        params: IndexParams,
        sweep: SweepConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub task: Task,
    pub inputs: Vec<InputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &str) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn text(bytes: Vec<u8>, path: &str) -> Result<String> {
    String::from_utf8(bytes).map_err(|e| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        )
    })
}

impl Task {
    fn files(&self) -> Vec<(&'static str, &str)> {
        let (mut files, directions) = match self {
            Task::Analyze {
                data,
                labels,
                directions,
                ..
            } => (vec![("data", data.as_str()), ("labels", labels.as_str())], directions),
            Task::Sweep {
                data, directions, ..
            } => (vec![("data", data.as_str())], directions),
        };
        if let Some(d) = directions {
            files.push(("directions", d.as_str()));
        }
        files
    }
}

impl RunManifest {
    /// Hashes the task's input files as they are now.
    pub fn new(task: Task) -> Result<Self> {
        let inputs = task
            .files()
            .into_iter()
            .map(|(role, path)| {
                Ok(InputDigest {
                    role: role.to_string(),
                    path: path.to_string(),
                    sha256: sha256_hex(&read(path)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schema: SCHEMA.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            task,
            inputs,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| Error::Manifest(e.to_string()))?;
        // a full report embeds its manifest
        let value = match value.get("manifest") {
            Some(m) => m.clone(),
            None => value,
        };
        let manifest: RunManifest =
            serde_json::from_value(value).map_err(|e| Error::Manifest(e.to_string()))?;
        if manifest.schema != SCHEMA {
            return Err(Error::Manifest(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                manifest.schema
            )));
        }
        Ok(manifest)
    }

    fn read_input(&self, role: &str, path: &str) -> Result<String> {
        let bytes = read(path)?;
        let expected = self
            .inputs
            .iter()
            .find(|d| d.role == role && d.path == path)
            .ok_or_else(|| Error::Manifest(format!("no digest recorded for {role} file {path}")))?;
        let found = sha256_hex(&bytes);
        if found != expected.sha256 {
            return Err(Error::Manifest(format!(
                "{role} file {path} has changed: sha256 {found}, manifest records {}",
                expected.sha256
            )));
        }
        text(bytes, path)
    }

    fn load_points(&self, data: &str, normalization: Option<Normalization>) -> Result<PointSet> {
        let points = parse_points(&self.read_input("data", data)?).map_err(|e| in_file(e, data))?;
        match normalization {
            Some(n) => normalize(&points, n),
            None => Ok(points),
        }
    }

    fn load_directions(&self, path: &Option<String>, eta: f64) -> Result<Option<DirectionSet>> {
        path.as_deref()
            .map(|p| DirectionSet::parse(&self.read_input("directions", p)?, eta))
            .transpose()
    }

    /// Runs the task and renders every output file in memory.
    pub fn compute(&self) -> Result<RunOutput> {
        let (result, files) = match &self.task {
            Task::Analyze {
                data,
                labels,
                directions,
                normalization,
                params,
                margin_filters,
            } => {
                let points = self.load_points(data, *normalization)?;
                let labels_text = self.read_input("labels", labels)?;
                let parsed = parse_labels(&labels_text, None).map_err(|e| in_file(e, labels))?;
                if parsed.ids.len() != points.len() {
                    return Err(Error::LengthMismatch(format!(
                        "{data} has {} points but {labels} has {} labels",
                        points.len(),
                        parsed.ids.len()
                    )));
                }
                let partition = Partition::from_labels(&points, &parsed)?;
                let dirs = self.load_directions(directions, params.eta)?;
                let analysis =
                    analyze_partition(&points, &partition, params, dirs.as_ref(), margin_filters)?;
                let files = self.render_analysis(&points, &partition, &analysis, params)?;
                (RunResult::Analyze(Box::new(analysis)), files)
            }
            Task::Sweep {
                data,
                directions,
                normalization,
                params,
                sweep,
            } => {
                let points = self.load_points(data, *normalization)?;
                let dirs = self.load_directions(directions, params.eta)?;
                let report = run_sweep(&points, sweep, params, dirs.as_ref())?;
                let files = self.render_sweep(&report)?;
                (RunResult::Sweep(Box::new(report)), files)
            }
        };
        Ok(RunOutput { result, files })
    }

    /// Runs the task and writes all outputs into `out_dir`.
    pub fn execute(&self, out_dir: &Path) -> Result<RunOutput> {
        let output = self.compute()?;
        output.write_all(out_dir)?;
        Ok(output)
    }

    fn envelope<T: Serialize>(&self, result: &T) -> Result<String> {
        let mut body = serde_json::to_string_pretty(&Envelope {
            schema: SCHEMA,
            manifest: self,
            result,
        })?;
        body.push('\n');
        Ok(body)
    }

    fn render_analysis(
        &self,
        points: &PointSet,
        partition: &Partition,
        analysis: &PartitionAnalysis,
        params: &IndexParams,
    ) -> Result<Vec<(String, String)>> {
        let mut files = vec![
            (REPORT_JSON.to_string(), self.envelope(analysis)?),
            (MANIFEST_JSON.to_string(), self.to_json()?),
            (CLUSTERS_CSV.to_string(), analysis.clusters_csv()),
        ];
        if let Some(sep) = &analysis.separability {
            let matrices = std::iter::once(&sep.margins).chain(&analysis.extra_margins);
            for m in matrices {
                let tag = m.filter.as_str();
                files.push((format!("margins_{tag}.csv"), m.to_csv(false)));
                files.push((format!("margins_{tag}_scaled.csv"), m.to_csv(true)));
            }
            let flags = adjacency_flags(points, partition, params.filter)?;
            let mut csv = String::from("point,cluster,adjacent_to\n");
            for (i, f) in flags.iter().enumerate() {
                let list: Vec<String> = f.iter().map(usize::to_string).collect();
                csv.push_str(&format!("{i},{},{}\n", partition.labels()[i], list.join(";")));
            }
            files.push(("adjacency.csv".to_string(), csv));
        }
        Ok(files)
    }

    fn render_sweep(&self, report: &SweepReport) -> Result<Vec<(String, String)>> {
        let mut files = vec![
            (REPORT_JSON.to_string(), self.envelope(report)?),
            (MANIFEST_JSON.to_string(), self.to_json()?),
            (TABLE_CSV.to_string(), report.table_csv()),
            ("decision.csv".to_string(), report.decision_csv()),
            (
                DECISION_SVG.to_string(),
                decision_svg(&report.decision_points, &report.selection),
            ),
        ];
        for p in &report.partitions {
            files.push((format!("labels_k{}.txt", p.k()), p.to_labels().to_text()));
        }
        Ok(files)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        Ok(body)
    }
}

pub const REPORT_JSON: &str = "report.json";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const TABLE_CSV: &str = "table.csv";
pub const CLUSTERS_CSV: &str = "clusters.csv";
pub const DECISION_SVG: &str = "decision.svg";

#[derive(Debug)]
pub enum RunResult {
    Analyze(Box<PartitionAnalysis>),
    Sweep(Box<SweepReport>),
}

#[derive(Debug)]
pub struct RunOutput {
    pub result: RunResult,
    /// `(file name, contents)` in a fixed order.
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, body)| body.as_str())
    }

    pub fn write_all(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        self.files
            .iter()
            .map(|(name, body)| {
                let path = out_dir.join(name);
                write_file(&path, body)?;
                Ok(path)
            })
            .collect()
    }
}

pub fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn in_file(e: Error, path: &str) -> Error {
    match e {
        Error::Parse {
            row,
            column,
            message,
        } => Error::Parse {
            row,
            column,
            message: format!("{path}: {message}"),
        },
        other => other,
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    manifest: &'a RunManifest,
    result: &'a T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn manifest_round_trip_and_tamper_check() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("x.csv");
        fs::write(&data, "0,0\n0,1\n5,5\n5,6\n9,0\n9,1\n").unwrap();
        let task = Task::Sweep {
            data: data.to_string_lossy().into_owned(),
            directions: None,
            normalization: None,
            params: IndexParams::default(),
            sweep: SweepConfig {
                k_min: 2,
                k_max: 3,
                restarts: 2,
                ..Default::default()
            },
        };
        let m = RunManifest::new(task).unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), m);

        let out = dir.path().join("out");
        let output = m.execute(&out).unwrap();
        match &output.result {
            RunResult::Sweep(report) => assert_eq!(report.selection.k, 3),
            _ => unreachable!(),
        }
        assert!(out.join(DECISION_SVG).exists());
        assert_eq!(fs::read_to_string(out.join(TABLE_CSV)).unwrap(), output.file(TABLE_CSV).unwrap());
        // the embedded manifest in a report is accepted too
        assert_eq!(RunManifest::load(out.join("report.json")).unwrap(), m);

        fs::write(&data, "0,0\n0,1\n5,5\n5,6\n9,0\n9,2\n").unwrap();
        assert!(matches!(m.compute(), Err(Error::Manifest(_))));
    }
}
