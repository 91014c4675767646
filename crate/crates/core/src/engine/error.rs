use crate::gateway::GatewayError;
use crate::prompt::PlanError;
use crate::script::ScriptError;
use crate::study::ResponseError;
use crate::{Locale, SatirStyle};

use super::SessionStatus;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("no script registered for locale {0}")]
    NoScript(Locale),
    #[error("no {style} script registered for locale {locale}")]
    UnknownStyle { style: SatirStyle, locale: Locale },
    #[error("cannot {op} while session is {status}")]
    InvalidState { op: &'static str, status: SessionStatus },
    #[error("message text must not be empty")]
    EmptyText,
    #[error("another turn is in flight for this session")]
    TurnInFlight,
    #[error("session {0} not found")]
    NotFound(String),
    #[error("no sessions to summarize")]
    EmptyInput,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("storage failure: {0}")]
    Storage(String),
}
