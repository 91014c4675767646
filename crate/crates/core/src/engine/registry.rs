use std::collections::BTreeMap;
use std::sync::Arc;

use crate::script::{load_script, CasePrompt, CategoryManifest, IllnessScript, ScriptError};
use crate::{Locale, SatirStyle};

/// A validated script with its prompt text rendered once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedScript {
    pub script: IllnessScript,
    pub case: CasePrompt,
}

/// Scripts by (style, locale). Immutable after construction.
#[derive(Debug, Clone)]
pub struct ScriptRegistry {
    manifest: CategoryManifest,
    scripts: BTreeMap<(SatirStyle, Locale), Arc<LoadedScript>>,
}

impl ScriptRegistry {
    pub fn new(manifest: CategoryManifest) -> Self {
        Self {
            manifest,
            scripts: BTreeMap::new(),
        }
    }

    pub fn bundled() -> Self {
        let mut registry = Self::new(CategoryManifest::bundled());
        for (_, _, _, document) in crate::bundled::SCRIPTS {
            registry.add_document(document).expect("bundled scripts are valid");
        }
        registry
    }

    /// Parses, validates and registers a script document.
    pub fn add_document(&mut self, document: &str) -> Result<&LoadedScript, ScriptError> {
        let script = load_script(document, &self.manifest)?;
        self.add(script)
    }

    pub fn add(&mut self, script: IllnessScript) -> Result<&LoadedScript, ScriptError> {
        let key = (script.style, script.locale);
        if self.scripts.contains_key(&key) {
            return Err(ScriptError::Parse(format!(
                "a {} script for locale {} is already registered",
                key.0, key.1
            )));
        }
        let case = CasePrompt::new(&script, &self.manifest);
        self.scripts.insert(key, Arc::new(LoadedScript { script, case }));
        Ok(&self.scripts[&key])
    }

    pub fn manifest(&self) -> &CategoryManifest {
        &self.manifest
    }

    pub fn get(&self, style: SatirStyle, locale: Locale) -> Option<Arc<LoadedScript>> {
        self.scripts.get(&(style, locale)).cloned()
    }

    pub fn by_id(&self, script_id: &str) -> Option<Arc<LoadedScript>> {
        self.scripts.values().find(|s| s.script.script_id.0 == script_id).cloned()
    }

    /// Styles with a script in `locale`.
    pub fn styles(&self, locale: Locale) -> Vec<SatirStyle> {
        self.scripts.keys().filter(|(_, l)| *l == locale).map(|(s, _)| *s).collect()
    }

    /// Every style with at least one script.
    pub fn all_styles(&self) -> Vec<SatirStyle> {
        let mut styles: Vec<SatirStyle> = self.scripts.keys().map(|(s, _)| *s).collect();
        styles.dedup();
        styles
    }

    pub fn locales(&self) -> Vec<Locale> {
        let mut locales: Vec<Locale> = self.scripts.keys().map(|(_, l)| *l).collect();
        locales.sort_by_key(|l| l.as_str());
        locales.dedup();
        locales
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<LoadedScript>> {
        self.scripts.values()
    }
}
