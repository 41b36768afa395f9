//! Labels and alphabets.
//!
//! A label is either the internal step `tau` or a letter drawn from a finite
//! alphabet. `tau` is not part of the alphabet itself; the extended alphabet
//! (written `Σ_τ` in diagrams) is the letter set plus `tau`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ModelError;

/// Reserved spelling of the internal step; no letter may use it.
pub const TAU_NAME: &str = "tau";

/// A transition label: the internal step or a named letter.
///
/// Ordering sorts letters by name and places `Tau` last, which is the
/// canonical order used for menus, scripted resolution and serialization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// A letter of the alphabet.
    Letter(String),
    /// The internal step, never subject to synchronization.
    Tau,
}

impl Label {
    /// Builds a letter label, rejecting the reserved name `tau`.
    pub fn letter(name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if name == TAU_NAME {
            return Err(ModelError::ReservedName(name));
        }
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        Ok(Label::Letter(name))
    }

    /// True for the internal step.
    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    /// The letter name, or `None` for `tau`.
    pub fn letter_name(&self) -> Option<&str> {
        match self {
            Label::Letter(name) => Some(name),
            Label::Tau => None,
        }
    }

    /// Parses the textual spelling: `tau` or a letter name.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        if text == TAU_NAME {
            Ok(Label::Tau)
        } else {
            Label::letter(text)
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Letter(name) => f.write_str(name),
            Label::Tau => f.write_str(TAU_NAME),
        }
    }
}

/// A finite set of letter names, excluding `tau`.
///
/// Systems in this crate share one alphabet between all member automata.
/// The set may be empty: the seed systems of a refinement chain often
/// carry only `tau` behavior before any synchronization letter is added.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alphabet {
    letters: BTreeSet<String>,
}

impl Alphabet {
    /// Builds an alphabet from letter names. Rejects `tau` and empty names.
    pub fn new<I, S>(letters: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for letter in letters {
            let name = letter.into();
            if name == TAU_NAME {
                return Err(ModelError::ReservedName(name));
            }
            if name.is_empty() {
                return Err(ModelError::EmptyName);
            }
            set.insert(name);
        }
        Ok(Alphabet { letters: set })
    }

    /// The empty alphabet (only `tau` behavior possible).
    pub fn empty() -> Self {
        Alphabet::default()
    }

    /// Letter names in sorted order.
    pub fn letters(&self) -> impl Iterator<Item = &str> {
        self.letters.iter().map(String::as_str)
    }

    /// Number of letters (without `tau`).
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// True when no letters are declared.
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Membership test for a letter name.
    pub fn contains(&self, name: &str) -> bool {
        self.letters.contains(name)
    }

    /// True when the label is `tau` or one of the declared letters.
    pub fn contains_label(&self, label: &Label) -> bool {
        match label {
            Label::Tau => true,
            Label::Letter(name) => self.letters.contains(name),
        }
    }

    /// Set inclusion on the letter sets (equivalently on the extended sets).
    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.letters.is_subset(&other.letters)
    }

    /// Letters of `self` missing from `other`, in sorted order.
    pub fn missing_from(&self, other: &Alphabet) -> Vec<String> {
        self.letters.difference(&other.letters).cloned().collect()
    }

    /// All labels of the extended alphabet in canonical order: letters
    /// sorted by name, then `tau`.
    pub fn labels_with_tau(&self) -> Vec<Label> {
        let mut labels: Vec<Label> = self
            .letters
            .iter()
            .map(|name| Label::Letter(name.clone()))
            .collect();
        labels.push(Label::Tau);
        labels
    }
}
