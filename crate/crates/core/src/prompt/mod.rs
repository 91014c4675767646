//! Prompt assembly.
//!
//! Every turn the model receives: the short-case system message, the running
//! history (assistant messages raw, annotations included), the current user
//! message, and the author's note injected so that at most six non-system
//! messages follow it.

mod annotation;
mod plan;

pub use annotation::{
    parse_annotations, strip_for_display, AnnotatedContent, Annotation, AnnotationError,
    THOUGHT_DELIMITER,
};
pub use plan::{
    assemble, build_opening, note_position, ChatMessage, MessageError, Origin, PlanError,
    PromptPlan, Role, NOTE_TRAILING_MESSAGES,
};
