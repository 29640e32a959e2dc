//! Built-in problem files.

pub struct Entry {
    pub file: &'static str,
    pub text: &'static str,
}

pub const ENTRIES: &[Entry] = &[
    Entry {
        file: "khz.prob",
        text: include_str!("../problems/khz.prob"),
    },
    Entry {
        file: "mkhz.prob",
        text: include_str!("../problems/mkhz.prob"),
    },
    Entry {
        file: "broken.prob",
        text: include_str!("../problems/broken.prob"),
    },
    Entry {
        file: "khz-potential.prob",
        text: include_str!("../problems/khz-potential.prob"),
    },
    Entry {
        file: "mkhz-backlund.prob",
        text: include_str!("../problems/mkhz-backlund.prob"),
    },
    Entry {
        file: "heat.prob",
        text: include_str!("../problems/heat.prob"),
    },
];

/// Looks up an entry by file name, with or without the `.prob` suffix.
pub fn get(name: &str) -> Option<&'static Entry> {
    let name = name.rsplit('/').next().unwrap_or(name);
    ENTRIES
        .iter()
        .find(|e| e.file == name || e.file.strip_suffix(".prob") == Some(name))
}

/// The text of a built-in entry. Panics on unknown names.
pub fn text(name: &str) -> &'static str {
    get(name).unwrap_or_else(|| panic!("no catalog entry {name}")).text
}
