//! The category manifest: which keys every illness script must provide.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Binding, ScriptError};

pub const REQUIRED_CATEGORY_COUNT: usize = 45;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryEntry {
    pub key: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub placeholder: bool,
}

/// Ordered list of required category keys plus the keys allowed to be blank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryManifest {
    #[serde(default)]
    allowed_blank: BTreeSet<String>,
    categories: Vec<CategoryEntry>,
}

impl CategoryManifest {
    pub fn new(
        categories: Vec<CategoryEntry>,
        allowed_blank: BTreeSet<String>,
    ) -> Result<Self, ScriptError> {
        let manifest = Self {
            allowed_blank,
            categories,
        };
        manifest.check()?;
        Ok(manifest)
    }

    pub fn from_toml(document: &str) -> Result<Self, ScriptError> {
        let manifest: Self = toml::from_str(document)
            .map_err(|e| ScriptError::Parse(format!("manifest: {e}")))?;
        manifest.check()?;
        Ok(manifest)
    }

    /// The manifest shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_toml(crate::bundled::MANIFEST).expect("bundled manifest is valid")
    }

    fn check(&self) -> Result<(), ScriptError> {
        let mut problems = Vec::new();
        if self.categories.len() != REQUIRED_CATEGORY_COUNT {
            problems.push(format!(
                "expected {REQUIRED_CATEGORY_COUNT} categories, found {}",
                self.categories.len()
            ));
        }
        let mut seen = BTreeSet::new();
        for entry in &self.categories {
            if !seen.insert(entry.key.as_str()) {
                problems.push(format!("duplicate key `{}`", entry.key));
            }
            if entry.label.trim().is_empty() {
                problems.push(format!("key `{}` has an empty label", entry.key));
            }
        }
        for key in &self.allowed_blank {
            if !seen.contains(key.as_str()) {
                problems.push(format!("allowed_blank key `{key}` is not a category"));
            }
        }
        for binding in Binding::ALL {
            if !seen.contains(binding.key()) {
                problems.push(format!("structured key `{}` missing", binding.key()));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ScriptError::Manifest(problems))
        }
    }

    pub fn entries(&self) -> &[CategoryEntry] {
        &self.categories
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|e| e.key.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.categories.iter().any(|e| e.key == key)
    }

    pub fn is_blank_allowed(&self, key: &str) -> bool {
        self.allowed_blank.contains(key)
    }

    pub fn allowed_blank(&self) -> &BTreeSet<String> {
        &self.allowed_blank
    }
}
