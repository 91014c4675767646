use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use vpsim_core::affect::{AffectProvider, AffectProviderConfig, HttpAffectProvider, LexiconMockProvider};
use vpsim_core::engine::{
    AssignmentLedger, Clock, ConversationEngine, IdSource, ScriptRegistry, SessionHub, SystemClock, UuidIds,
};
use vpsim_core::gateway::{ChatProvider, GoldenConversation, HttpChatProvider};
use vpsim_core::script::CategoryManifest;
use vpsim_core::study::{AdjectiveMap, Questionnaire};
use vpsim_core::Locale;

use crate::config::{ApiConfig, ProviderMode};
use crate::store::FileStore;

/// Everything a request handler needs.
pub struct AppState {
    pub hub: SessionHub,
    pub store: Arc<FileStore>,
    pub affect: Arc<dyn AffectProvider>,
    pub adjectives: AdjectiveMap,
    pub admin_token: Option<String>,
    pub locales: Vec<Locale>,
}

/// Replaces the production collaborators, for tests and replays.
#[derive(Default)]
pub struct Overrides {
    pub clock: Option<Arc<dyn Clock>>,
    pub ids: Option<Arc<dyn IdSource>>,
    pub chat: Option<Arc<dyn ChatProvider>>,
    pub affect: Option<Arc<dyn AffectProvider>>,
    /// Used instead of the environment variable named in the config.
    pub admin_token: Option<String>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Scripts under `<storage>/scripts` for the configured locales.
pub fn load_registry(storage: &Path, locales: &[Locale]) -> anyhow::Result<ScriptRegistry> {
    let manifest = CategoryManifest::from_toml(&read(&storage.join("manifest.toml"))?)
        .map_err(|e| anyhow::anyhow!("manifest.toml: {e}"))?;
    let mut registry = ScriptRegistry::new(manifest);
    let dir = storage.join("scripts");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("toml"))
        .collect();
    paths.sort();
    for path in paths {
        let document = read(&path)?;
        let script = vpsim_core::script::load_script(&document, registry.manifest())
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if locales.contains(&script.locale) {
            registry.add(script).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        }
    }
    for locale in locales {
        if registry.styles(*locale).is_empty() {
            bail!("no script for configured locale {locale}");
        }
    }
    Ok(registry)
}

fn chat_provider(config: &ApiConfig) -> anyhow::Result<Arc<dyn ChatProvider>> {
    Ok(match config.provider_mode {
        ProviderMode::Http => Arc::new(HttpChatProvider::from_config(&config.provider)?),
        ProviderMode::Scripted => {
            let path = config.scripted_replies.as_ref().context("scripted_replies not set")?;
            let golden = GoldenConversation::from_toml(&read(path)?)?;
            Arc::new(golden.provider()?)
        }
    })
}

fn affect_provider(config: &AffectProviderConfig) -> anyhow::Result<Arc<dyn AffectProvider>> {
    Ok(match config {
        AffectProviderConfig::LexiconMock { lexicon_path: None } => Arc::new(LexiconMockProvider::bundled()),
        AffectProviderConfig::LexiconMock {
            lexicon_path: Some(path),
        } => Arc::new(LexiconMockProvider::from_toml(&read(Path::new(path))?)?),
        AffectProviderConfig::Http {
            endpoint_url,
            credential_ref,
            timeout_ms,
        } => Arc::new(HttpAffectProvider::new(
            endpoint_url.clone(),
            std::env::var(credential_ref).ok(),
            Duration::from_millis(*timeout_ms),
        )?),
    })
}

/// Opens storage (seeding missing data files), loads scripts and
/// questionnaires, and restores persisted sessions.
pub fn build_state(config: &ApiConfig, overrides: Overrides) -> anyhow::Result<AppState> {
    config.validate()?;
    let store = Arc::new(FileStore::open(&config.storage_path)?);
    store.seed_data_files()?;
    let root = store.root().to_path_buf();

    let registry = Arc::new(load_registry(&root, &config.locales)?);
    let mut questionnaires = Vec::new();
    for locale in &config.locales {
        let path = root.join("questionnaires").join(format!("{locale}.toml"));
        let questionnaire = Questionnaire::from_toml(&read(&path)?).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if questionnaire.locale != *locale {
            bail!("{} declares locale {}", path.display(), questionnaire.locale);
        }
        questionnaires.push(questionnaire);
    }
    let adjectives = AdjectiveMap::from_toml(&read(&root.join("adjectives.toml"))?)?;
    for questionnaire in &questionnaires {
        adjectives.check_against(questionnaire)?;
    }

    let ledger = match store.ledger()? {
        Some(ledger) => ledger,
        None => AssignmentLedger::new(registry.all_styles(), config.assignment_seed),
    };
    let chat = match overrides.chat {
        Some(chat) => chat,
        None => chat_provider(config)?,
    };
    let affect = match overrides.affect {
        Some(affect) => affect,
        None => affect_provider(&config.affect_provider)?,
    };
    let engine = ConversationEngine::new(
        registry,
        chat,
        config.provider.clone(),
        overrides.clock.unwrap_or_else(|| Arc::new(SystemClock)),
        overrides.ids.unwrap_or_else(|| Arc::new(UuidIds)),
    );
    let hub = SessionHub::new(engine, questionnaires, ledger, store.clone());
    let last_seq = store.audit_events()?.last().map(|e| e.seq).unwrap_or(0);
    let restored = hub.restore(store.sessions()?, last_seq)?;
    tracing::info!(restored, storage = %root.display(), "state loaded");

    Ok(AppState {
        hub,
        store,
        affect,
        adjectives,
        admin_token: overrides.admin_token.or_else(|| config.admin_token()),
        locales: config.locales.clone(),
    })
}
