//! Negation patterns: which occurrences of a predicate get inverted within a
//! single run. The set is closed and ordered roughly by simplicity; the order
//! doubles as the tie-breaking rank when several patterns repair equally.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pattern {
    #[serde(rename = "all")]
    All,
    #[serde(rename = "first")]
    First,
    #[serde(rename = "last")]
    Last,
    #[serde(rename = "all-first")]
    AllButFirst,
    #[serde(rename = "all-last")]
    AllButLast,
    #[serde(rename = "all-(first+last)")]
    AllButFirstAndLast,
    #[serde(rename = "first+1")]
    FirstPlusOne,
    #[serde(rename = "last-1")]
    LastMinusOne,
    #[serde(rename = "first+last")]
    FirstAndLast,
    #[serde(rename = "odd")]
    Odd,
    #[serde(rename = "even")]
    Even,
}

/// Every pattern, in simplicity order.
pub const PATTERNS: [Pattern; 11] = [
    Pattern::All,
    Pattern::First,
    Pattern::Last,
    Pattern::AllButFirst,
    Pattern::AllButLast,
    Pattern::AllButFirstAndLast,
    Pattern::FirstPlusOne,
    Pattern::LastMinusOne,
    Pattern::FirstAndLast,
    Pattern::Odd,
    Pattern::Even,
];

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::All => "all",
            Pattern::First => "first",
            Pattern::Last => "last",
            Pattern::AllButFirst => "all-first",
            Pattern::AllButLast => "all-last",
            Pattern::AllButFirstAndLast => "all-(first+last)",
            Pattern::FirstPlusOne => "first+1",
            Pattern::LastMinusOne => "last-1",
            Pattern::FirstAndLast => "first+last",
            Pattern::Odd => "odd",
            Pattern::Even => "even",
        }
    }

    /// Position in the pattern list; lower is simpler.
    pub fn simplicity_rank(self) -> usize {
        PATTERNS.iter().position(|p| *p == self).expect("all patterns are listed")
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The 1-based occurrence indices a pattern selects out of `n` evaluations.
/// Indices falling outside 1..=n are dropped; n = 0 selects nothing.
pub fn occurrences_for_pattern(pattern: Pattern, n: u32) -> BTreeSet<u32> {
    let mut set = BTreeSet::new();
    if n == 0 {
        return set;
    }
    match pattern {
        Pattern::All => set.extend(1..=n),
        Pattern::First => {
            set.insert(1);
        }
        Pattern::Last => {
            set.insert(n);
        }
        Pattern::AllButFirst => set.extend(2..=n),
        Pattern::AllButLast => set.extend(1..n),
        Pattern::AllButFirstAndLast => {
            if n > 2 {
                set.extend(2..n);
            }
        }
        Pattern::FirstPlusOne => {
            if n >= 2 {
                set.insert(2);
            }
        }
        Pattern::LastMinusOne => {
            if n >= 2 {
                set.insert(n - 1);
            }
        }
        Pattern::FirstAndLast => {
            set.insert(1);
            set.insert(n);
        }
        Pattern::Odd => set.extend((1..=n).step_by(2)),
        Pattern::Even => set.extend((2..=n).step_by(2)),
    }
    set
}
