use std::collections::HashMap;
use std::sync::OnceLock;

pub const EMOTION_COUNT: usize = 53;

struct Catalog {
    names: Vec<&'static str>,
    index: HashMap<&'static str, usize>,
}

fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let names: Vec<&'static str> = crate::bundled::EMOTION_CATALOG
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        assert_eq!(names.len(), EMOTION_COUNT, "emotion catalog must list 53 names");
        let index = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        Catalog { names, index }
    })
}

/// The 53 emotion names in catalog order.
pub fn emotion_catalog() -> &'static [&'static str] {
    &catalog().names
}

pub fn emotion_index(name: &str) -> Option<usize> {
    catalog().index.get(name).copied()
}
