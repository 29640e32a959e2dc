//! Interned symbols.
//!
//! Every symbol lives for the lifetime of the process. Equality and hashing
//! use the interned id; ordering uses the display name, so the canonical
//! monomial order never depends on the order in which symbols were created.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{OnceLock, RwLock};

struct SymbolData {
    id: u32,
    name: &'static str,
}

#[derive(Default)]
struct Interner {
    by_name: HashMap<&'static str, &'static SymbolData>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

/// An interned variable name.
#[derive(Clone, Copy)]
pub struct Symbol(&'static SymbolData);

impl Symbol {
    /// Returns the symbol with this display name, registering it on first use.
    pub fn new(name: &str) -> Symbol {
        if let Some(data) = interner().read().unwrap().by_name.get(name) {
            return Symbol(data);
        }
        let mut guard = interner().write().unwrap();
        if let Some(data) = guard.by_name.get(name) {
            return Symbol(data);
        }
        let id = guard.by_name.len() as u32;
        let name: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let data: &'static SymbolData = Box::leak(Box::new(SymbolData { id, name }));
        guard.by_name.insert(name, data);
        Symbol(data)
    }

    /// Looks a symbol up without registering it.
    pub fn lookup(name: &str) -> Option<Symbol> {
        interner().read().unwrap().by_name.get(name).map(|d| Symbol(d))
    }

    pub fn name(&self) -> &'static str {
        self.0.name
    }

    pub fn id(&self) -> u32 {
        self.0.id
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0.id == other.0.id {
            return Ordering::Equal;
        }
        self.0.name.cmp(other.0.name)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0.name)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.0.name)
    }
}
