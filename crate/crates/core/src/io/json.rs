//! JSON sidecars: motion paths, solver configs and reports.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LfError, Result};
use crate::path::MotionPath;

pub const PATH_JSON_VERSION: u32 = 1;
const UNITS: &str = "angular samples; control point 0 is the exposure start and fixed at the origin";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub version: u32,
    pub n: usize,
    pub control_points: Vec<[f64; 3]>,
    #[serde(default)]
    pub units: String,
}

impl From<&MotionPath> for PathJson {
    fn from(p: &MotionPath) -> Self {
        PathJson {
            version: PATH_JSON_VERSION,
            n: p.n(),
            control_points: p.control_points().to_vec(),
            units: UNITS.to_string(),
        }
    }
}

impl TryFrom<PathJson> for MotionPath {
    type Error = LfError;

    fn try_from(j: PathJson) -> Result<MotionPath> {
        if j.version != PATH_JSON_VERSION {
            return Err(LfError::Format(format!("unsupported path version {}", j.version)));
        }
        if j.n != j.control_points.len() {
            return Err(LfError::Format(format!(
                "path declares n = {} but has {} control points",
                j.n,
                j.control_points.len()
            )));
        }
        MotionPath::new(j.control_points).map_err(|e| LfError::Format(e.to_string()))
    }
}

/// Serializes to pretty JSON with a trailing newline, written atomically.
pub fn save<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LfError::Format(e.to_string()))?;
    text.push('\n');
    super::write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| LfError::Format(format!("{}: {e}", path.display())))
}

pub fn save_path(p: &MotionPath, path: &Path) -> Result<()> {
    save(&PathJson::from(p), path)
}

pub fn load_path(path: &Path) -> Result<MotionPath> {
    load::<PathJson>(path)?.try_into()
}
