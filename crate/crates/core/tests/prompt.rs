use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpsim_core::bundled;
use vpsim_core::prompt::{
    assemble, build_opening, note_position, parse_annotations, strip_for_display, Annotation, ChatMessage, Origin,
    PlanError, PromptPlan, Role, THOUGHT_DELIMITER,
};
use vpsim_core::script::{load_script, CasePrompt, CategoryManifest};

const GOLDEN_FIRST_TURN: &str = include_str!("golden/accuser_en_first_turn.json");
const FIRST_USER_TEXT: &str = "Hello, what brings you here?";

fn accuser_case() -> CasePrompt {
    let manifest = CategoryManifest::bundled();
    CasePrompt::new(&load_script(bundled::ACCUSER_EN, &manifest).unwrap(), &manifest)
}

/// A history of `pairs` exchanges after the opening.
fn history(case: &CasePrompt, pairs: usize) -> Vec<ChatMessage> {
    let (opening, _) = build_opening(case);
    let mut out = vec![opening[2].clone()];
    for i in 0..pairs {
        out.push(ChatMessage::participant(format!("question {i}")).unwrap());
        out.push(ChatMessage::model_reply(format!("<calm> answer {i}")).unwrap());
    }
    out
}

#[test]
fn first_turn_matches_golden() {
    let plan = assemble(&accuser_case(), &[], FIRST_USER_TEXT).unwrap();
    assert_eq!(plan.canonical_json(), GOLDEN_FIRST_TURN);
    let roles: Vec<Role> = plan.messages().iter().map(ChatMessage::role).collect();
    assert_eq!(roles, [Role::System, Role::System, Role::Assistant, Role::User]);
    assert_eq!(plan.note_index(), 1);
}

#[test]
fn opening_display_is_visible_text() {
    let (messages, display) = build_opening(&accuser_case());
    assert_eq!(messages.len(), 3);
    assert_eq!(display, "Hello!");
    assert!(messages[2].content().starts_with("<tormented> <Thoughts: \"Why do I have to come here?"));
}

#[test]
fn listing_opening_annotations() {
    let raw = "<tormented> <Thoughts: \"Why do I have to come here? Why can't my family doctor find anything, the pain is getting worse!\"> Hello!";
    let content = parse_annotations(raw).unwrap();
    assert_eq!(content.annotations().len(), 2);
    assert_eq!(content.annotations()[0], Annotation::EmotionTag("tormented".into()));
    assert!(matches!(&content.annotations()[1], Annotation::ThoughtBlock(t) if t.starts_with("Why do I have to come here?")));
    assert_eq!(content.visible_text(), "Hello!");
    assert_eq!(content.to_raw(), raw);
}

#[test]
fn mid_text_angle_bracket_is_literal() {
    let content = parse_annotations("Pain is < 5 today <maybe>").unwrap();
    assert!(content.annotations().is_empty());
    assert_eq!(content.visible_text(), "Pain is < 5 today <maybe>");
}

#[test]
fn unterminated_annotation_is_an_error() {
    assert!(parse_annotations("<Thoughts: \"never closed").is_err());
    assert!(strip_for_display("<tormented Hello").is_err());
}

#[test]
fn note_position_examples() {
    assert_eq!(note_position(2), 0);
    assert_eq!(note_position(6), 0);
    assert_eq!(note_position(8), 2);
    assert_eq!(note_position(30), 24);
}

/// Independent count: walk the list and count non-system messages after the
/// one system message that is not first.
fn count_after_note(messages: &[(Role, bool)]) -> usize {
    let mut seen_note = false;
    let mut count = 0;
    for (role, is_note) in messages {
        if *is_note {
            seen_note = true;
        } else if seen_note && *role != Role::System {
            count += 1;
        }
    }
    count
}

#[test]
fn note_position_brute_force_all_lengths() {
    for n in 1..=30usize {
        let mut messages = vec![(Role::System, false)];
        let insert = note_position(n);
        for i in 0..n {
            if i == insert {
                messages.push((Role::System, true));
            }
            messages.push((if i % 2 == 0 { Role::Assistant } else { Role::User }, false));
        }
        assert_eq!(count_after_note(&messages), n.min(6), "n = {n}");
    }
}

#[test]
fn assembled_plans_keep_six_after_note() {
    let case = accuser_case();
    for pairs in 0..15 {
        let plan = assemble(&case, &history(&case, pairs), "next").unwrap();
        let n = plan.messages().iter().filter(|m| m.role() != Role::System).count();
        assert_eq!(n, 2 * pairs + 2);
        assert_eq!(plan.messages_after_note(), n.min(6), "pairs = {pairs}");
        let flags: Vec<(Role, bool)> = plan
            .messages()
            .iter()
            .map(|m| (m.role(), m.origin() == Origin::InjectedNote))
            .collect();
        assert_eq!(count_after_note(&flags), n.min(6));
    }
}

#[test]
fn assemble_rejects_bad_input() {
    let case = accuser_case();
    assert_eq!(assemble(&case, &[], "   ").unwrap_err(), PlanError::EmptyUserText);
    let mut with_system = history(&case, 1);
    with_system.insert(1, ChatMessage::new(Role::System, "x", Origin::Scripted).unwrap());
    assert!(matches!(assemble(&case, &with_system, "hi"), Err(PlanError::SystemInHistory { index: 1 })));
    let mut broken = history(&case, 1);
    broken.pop();
    assert!(matches!(assemble(&case, &broken, "hi"), Err(PlanError::Alternation { .. })));
}

#[test]
fn message_origin_rules() {
    assert!(ChatMessage::new(Role::User, "x", Origin::Model).is_err());
    assert!(ChatMessage::new(Role::Assistant, "x", Origin::InjectedNote).is_err());
    assert!(ChatMessage::new(Role::Assistant, " ", Origin::Model).is_err());
    let json = r#"{"role":"user","content":"hi","origin":"model"}"#;
    assert!(serde_json::from_str::<ChatMessage>(json).is_err());
}

#[test]
fn plan_with_two_notes_is_rejected() {
    let case = accuser_case();
    let plan = assemble(&case, &[], "hi").unwrap();
    let mut messages = plan.messages().to_vec();
    messages.insert(3, messages[1].clone());
    assert!(matches!(PromptPlan::from_messages(messages), Err(PlanError::Invariant(_))));
}

#[test]
fn fingerprint_tracks_content() {
    let case = accuser_case();
    let a = assemble(&case, &[], "hi").unwrap();
    let b = assemble(&case, &[], "hi").unwrap();
    let c = assemble(&case, &[], "hello").unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_ne!(a.fingerprint(), c.fingerprint());
    assert_eq!(a.fingerprint().len(), 64);
}

const WORDS: [&str; 8] = ["pain", "why", "doctor", "<", "a < b", "x<y", "ok>", "really?"];
const TAGS: [&str; 5] = ["tormented", "annoyed", "wary", "sighs heavily", "composed"];

/// Raw assistant content with a random annotation prefix and a visible text
/// that may contain `<` anywhere but at its start.
fn generated_message(rng: &mut ChaCha8Rng) -> (String, Vec<Annotation>, String) {
    let mut annotations = Vec::new();
    for _ in 0..rng.random_range(0..4) {
        if rng.random_bool(0.5) {
            annotations.push(Annotation::EmotionTag(TAGS[rng.random_range(0..TAGS.len())].to_string()));
        } else {
            let thought: Vec<&str> = (0..rng.random_range(1..6)).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
            annotations.push(Annotation::ThoughtBlock(thought.join(" ")));
        }
    }
    let mut visible = vec!["Well"];
    for _ in 0..rng.random_range(0..8) {
        visible.push(WORDS[rng.random_range(0..WORDS.len())]);
    }
    let visible = visible.join(" ");
    let mut raw = String::new();
    for a in &annotations {
        raw.push_str(&a.to_string());
        raw.push(' ');
    }
    raw.push_str(&visible);
    (raw, annotations, visible)
}

#[test]
fn generated_corpus_hygiene() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (raw, annotations, visible) = generated_message(&mut rng);
        let shown = strip_for_display(&raw).unwrap();
        assert!(!shown.contains(THOUGHT_DELIMITER), "{raw}");
        assert_eq!(shown, visible);
        let parsed = parse_annotations(&raw).unwrap();
        assert_eq!(parsed.annotations(), annotations.as_slice());
        assert_eq!(parsed.to_raw(), raw);
    }
}

#[test]
fn embedded_thought_block_is_scrubbed() {
    let raw = "<calm> Fine. <Thoughts: \"he must not know\"> Really fine.";
    let shown = strip_for_display(raw).unwrap();
    assert_eq!(shown, "Fine. Really fine.");
}

proptest! {
    #[test]
    fn strip_never_leaks_thoughts(prefix in "[a-z <>\"]{0,30}", thought in "[^\"]{0,30}", tail in "\\PC{0,40}") {
        let raw = format!("{prefix}<Thoughts: \"{thought}\"> {tail}");
        if let Ok(shown) = strip_for_display(&raw) {
            prop_assert!(!shown.contains(THOUGHT_DELIMITER));
        }
    }

    #[test]
    fn strip_never_panics(raw in "\\PC{0,80}") {
        if let Ok(shown) = strip_for_display(&raw) {
            prop_assert!(!shown.contains(THOUGHT_DELIMITER));
        }
    }

    #[test]
    fn plans_have_exactly_one_note(pairs in 0usize..20, text in "[a-zA-Z ?]{1,30}") {
        prop_assume!(!text.trim().is_empty());
        let case = accuser_case();
        let plan = assemble(&case, &history(&case, pairs), &text).unwrap();
        let notes = plan.messages().iter().filter(|m| m.origin() == Origin::InjectedNote).count();
        prop_assert_eq!(notes, 1);
        prop_assert_eq!(plan.messages()[0].role(), Role::System);
        prop_assert_eq!(plan.messages().last().unwrap().content(), text.as_str());
    }
}
