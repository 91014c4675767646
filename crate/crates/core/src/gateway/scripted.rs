use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::{ChatProvider, GatewayError, GatewayErrorKind, ProviderConfig};
use crate::prompt::{PromptPlan, Role};

/// Deterministic provider: replies are looked up by plan fingerprint first,
/// then by turn index (number of user messages in the plan minus one).
#[derive(Debug)]
pub struct ScriptedProvider {
    by_fingerprint: HashMap<String, String>,
    by_turn: Vec<String>,
    faults: Mutex<VecDeque<GatewayError>>,
    log: Mutex<Vec<PromptPlan>>,
}

#[derive(Debug, Default)]
pub struct ScriptedProviderBuilder {
    by_fingerprint: HashMap<String, String>,
    by_turn: Vec<String>,
    faults: VecDeque<GatewayError>,
}

impl ScriptedProviderBuilder {
    pub fn turn_replies<I, S>(mut self, replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.by_turn.extend(replies.into_iter().map(Into::into));
        self
    }

    pub fn fingerprint_reply(mut self, fingerprint: impl Into<String>, reply: impl Into<String>) -> Self {
        self.by_fingerprint.insert(fingerprint.into(), reply.into());
        self
    }

    /// Queues an error returned by the next call, before any fixture lookup.
    pub fn fault(mut self, error: GatewayError) -> Self {
        self.faults.push_back(error);
        self
    }

    pub fn build(self) -> Result<ScriptedProvider, GatewayError> {
        if self.by_fingerprint.is_empty() && self.by_turn.is_empty() {
            return Err(GatewayError::new(
                GatewayErrorKind::ProviderRejected,
                "scripted provider needs at least one fixture",
            ));
        }
        Ok(ScriptedProvider {
            by_fingerprint: self.by_fingerprint,
            by_turn: self.by_turn,
            faults: Mutex::new(self.faults),
            log: Mutex::new(Vec::new()),
        })
    }
}

impl ScriptedProvider {
    pub fn builder() -> ScriptedProviderBuilder {
        ScriptedProviderBuilder::default()
    }

    /// Replays `replies` in turn order.
    pub fn by_turn<I, S>(replies: I) -> Result<Self, GatewayError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::builder().turn_replies(replies).build()
    }

    /// Queues an error for the next call.
    pub fn inject_fault(&self, error: GatewayError) {
        self.faults.lock().expect("fault queue poisoned").push_back(error);
    }

    /// Every plan received, in call order (including failed calls).
    pub fn requests(&self) -> Vec<PromptPlan> {
        self.log.lock().expect("request log poisoned").clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().expect("request log poisoned").len()
    }

    fn lookup(&self, plan: &PromptPlan) -> Result<String, GatewayError> {
        let fingerprint = plan.fingerprint();
        if let Some(reply) = self.by_fingerprint.get(&fingerprint) {
            return Ok(reply.clone());
        }
        let users = plan
            .messages()
            .iter()
            .filter(|m| m.role() == Role::User)
            .count();
        users
            .checked_sub(1)
            .and_then(|turn| self.by_turn.get(turn))
            .cloned()
            .ok_or_else(|| {
                GatewayError::new(
                    GatewayErrorKind::ProviderRejected,
                    format!("no scripted reply for plan {fingerprint}"),
                )
            })
    }
}

/// One participant message and the raw reply the provider returns for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenTurn {
    pub user: String,
    pub reply: String,
}

/// A recorded conversation used to drive the scripted provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenConversation {
    pub script_id: String,
    pub turns: Vec<GoldenTurn>,
}

impl GoldenConversation {
    pub fn from_toml(document: &str) -> Result<Self, GatewayError> {
        toml::from_str(document)
            .map_err(|e| GatewayError::new(GatewayErrorKind::ProviderRejected, format!("golden conversation: {e}")))
    }

    pub fn bundled_accuser_en() -> Self {
        Self::from_toml(crate::bundled::GOLDEN_ACCUSER_EN).expect("bundled golden conversation is valid")
    }

    /// A provider replaying the replies in turn order.
    pub fn provider(&self) -> Result<ScriptedProvider, GatewayError> {
        ScriptedProvider::by_turn(self.turns.iter().map(|t| t.reply.clone()))
    }
}

#[async_trait]
impl ChatProvider for ScriptedProvider {
    async fn complete(&self, plan: &PromptPlan, _config: &ProviderConfig) -> Result<String, GatewayError> {
        self.log.lock().expect("request log poisoned").push(plan.clone());
        if let Some(fault) = self.faults.lock().expect("fault queue poisoned").pop_front() {
            return Err(fault);
        }
        self.lookup(plan)
    }
}
