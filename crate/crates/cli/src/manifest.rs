//! Dataset manifests listing paired low- and high-resolution meshes.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectEntry {
    pub id: String,
    pub low_res_mesh_path: PathBuf,
    #[serde(default)]
    pub high_res_mesh_path: Option<PathBuf>,
    #[serde(default)]
    pub measured_hrtf_path: Option<PathBuf>,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub subjects: Vec<SubjectEntry>,
}

impl DatasetManifest {
    /// Parses and checks a manifest. Relative paths resolve against the
    /// manifest's directory; every referenced file must exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(usage(format!("manifest {}", path.display())))?;
        let mut m: Self =
            serde_json::from_str(&text).map_err(usage(format!("manifest {}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        m.resolve(base);
        m.check()?;
        Ok(m)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for s in &mut self.subjects {
            fix(&mut s.low_res_mesh_path);
            if let Some(p) = &mut s.high_res_mesh_path {
                fix(p);
            }
            if let Some(p) = &mut s.measured_hrtf_path {
                fix(p);
            }
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(CliError::Usage("manifest lists no subjects".into()));
        }
        let mut seen = HashSet::new();
        for s in &self.subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(CliError::Usage(format!("duplicate subject id `{}`", s.id)));
            }
            let paths = std::iter::once(&s.low_res_mesh_path)
                .chain(s.high_res_mesh_path.as_ref())
                .chain(s.measured_hrtf_path.as_ref());
            for p in paths {
                if !p.is_file() {
                    return Err(CliError::Usage(format!(
                        "subject `{}`: {} does not exist",
                        s.id,
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Entries of `split` that carry a high-resolution mesh.
    pub fn pairs(&self, split: Split) -> impl Iterator<Item = &SubjectEntry> {
        self.subjects
            .iter()
            .filter(move |s| s.split == split && s.high_res_mesh_path.is_some())
    }
}
