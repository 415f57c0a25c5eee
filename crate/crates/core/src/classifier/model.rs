use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClassifierError, Model, Representation};
use crate::metaclass::Abstraction;
use crate::tree::ExclusionList;
use crate::Scalar;

pub const MODEL_FORMAT: &str = "vidsource-model";
pub const MODEL_VERSION: u32 = 1;

/// Identity of the exclusion list a model was trained under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionStamp {
    pub name: String,
    pub version: u32,
    pub sha256: String,
}

impl From<&ExclusionList> for ExclusionStamp {
    fn from(e: &ExclusionList) -> Self {
        ExclusionStamp { name: e.name.clone(), version: e.version, sha256: e.sha256() }
    }
}

/// Everything needed to predict: class names, the exclusion stamp and the
/// model itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelFile<F: Scalar> {
    pub format: String,
    pub version: u32,
    pub representation: Representation,
    pub level1: Abstraction,
    pub exclusion: ExclusionStamp,
    pub class_names: Vec<String>,
    pub model: Model<F>,
}

impl<F: Scalar> ModelFile<F> {
    pub fn new(
        model: Model<F>,
        representation: Representation,
        level1: Abstraction,
        exclusion: &ExclusionList,
        class_names: Vec<String>,
    ) -> Self {
        ModelFile {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            representation,
            level1,
            exclusion: exclusion.into(),
            class_names,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let m: Self = serde_json::from_str(text).map_err(|e| ClassifierError::BadModelFile(e.to_string()))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(ClassifierError::BadModelFile(format!("unsupported format {} v{}", m.format, m.version)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClassifierError::BadModelFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fails unless `given` is the list the model was trained under.
    pub fn check_exclusion(&self, given: &ExclusionList) -> Result<(), ClassifierError> {
        if given.sha256() == self.exclusion.sha256 {
            Ok(())
        } else {
            Err(ClassifierError::ExclusionMismatch {
                model: format!("{} ({})", self.exclusion.name, &self.exclusion.sha256[..12]),
                given: format!("{} ({})", given.name, &given.sha256()[..12]),
            })
        }
    }
}
