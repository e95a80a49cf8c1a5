//! Extracted-relation inputs and the reproduction metrics computed over them.
//!
//! Metric definitions, given a sampled query term set `S` and the `k` nearest
//! neighbors `NN(t)` of each `t` in `S`:
//!
//! * an instance `(h, x)` is *reproduced* if `h` is in `S` and `x` is in `NN(h)`,
//!   or (symmetric mode) `x` is in `S` and `h` is in `NN(x)`;
//! * `RC` counts reproduced instances;
//! * `TR` counts terms of `S` whose own neighbor list reproduces at least one
//!   instance, and `SSRIC = TR / N` with `N` the number of relations;
//! * `retrieved` counts neighbor hits `(t, n)` where `n` takes part in any relation;
//! * `R-Prec = RC / retrieved` and `R-Rec = RC / N`.
//!
//! `R-Prec` is the standard precision orientation (correct over retrieved).
//! `SSRIC` divides a term count by a relation count and can exceed 1 when
//! terms take part in few relations each. Duplicate instances of one pair
//! are counted separately, which can push `R-Prec` above 1.

mod eval;
mod parse;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use eval::{evaluate, CategoryRow, EvalOptions, EvalReport, SamplingSpec};
pub use parse::{normalize_term, parse_semeval, parse_semeval_from, parse_tsv, parse_tsv_from};
pub use report::{render_report, ReportFormat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationCategory {
    CauseEffect,
    ComponentWhole,
    ContentContainer,
    EntityDestination,
    EntityOrigin,
    MessageTopic,
    MemberCollection,
    InstrumentAgency,
    ProductProducer,
    Other,
}

impl RelationCategory {
    pub const ALL: [RelationCategory; 10] = [
        RelationCategory::CauseEffect,
        RelationCategory::ComponentWhole,
        RelationCategory::ContentContainer,
        RelationCategory::EntityDestination,
        RelationCategory::EntityOrigin,
        RelationCategory::MessageTopic,
        RelationCategory::MemberCollection,
        RelationCategory::InstrumentAgency,
        RelationCategory::ProductProducer,
        RelationCategory::Other,
    ];

    /// Hyphenated surface form used in SemEval files, e.g. `Content-Container`.
    pub fn label(self) -> &'static str {
        match self {
            RelationCategory::CauseEffect => "Cause-Effect",
            RelationCategory::ComponentWhole => "Component-Whole",
            RelationCategory::ContentContainer => "Content-Container",
            RelationCategory::EntityDestination => "Entity-Destination",
            RelationCategory::EntityOrigin => "Entity-Origin",
            RelationCategory::MessageTopic => "Message-Topic",
            RelationCategory::MemberCollection => "Member-Collection",
            RelationCategory::InstrumentAgency => "Instrument-Agency",
            RelationCategory::ProductProducer => "Product-Producer",
            RelationCategory::Other => "Other",
        }
    }

    /// Identifier form, e.g. `ContentContainer`.
    pub fn name(self) -> &'static str {
        match self {
            RelationCategory::CauseEffect => "CauseEffect",
            RelationCategory::ComponentWhole => "ComponentWhole",
            RelationCategory::ContentContainer => "ContentContainer",
            RelationCategory::EntityDestination => "EntityDestination",
            RelationCategory::EntityOrigin => "EntityOrigin",
            RelationCategory::MessageTopic => "MessageTopic",
            RelationCategory::MemberCollection => "MemberCollection",
            RelationCategory::InstrumentAgency => "InstrumentAgency",
            RelationCategory::ProductProducer => "ProductProducer",
            RelationCategory::Other => "Other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Case-insensitive; accepts `Content-Container`, `content-container` and
/// `ContentContainer`.
impl FromStr for RelationCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key: String = s.trim().chars().filter(|&c| c != '-').collect::<String>().to_lowercase();
        RelationCategory::ALL
            .into_iter()
            .find(|c| c.name().to_lowercase() == key)
            .ok_or_else(|| s.to_owned())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    E1ToE2,
    E2ToE1,
    Undirected,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && !matches!(c, '(' | ')'))
            .collect::<String>()
            .to_lowercase();
        match key.as_str() {
            "e1toe2" | "e1,e2" | "e1->e2" => Ok(Direction::E1ToE2),
            "e2toe1" | "e2,e1" | "e2->e1" => Ok(Direction::E2ToE1),
            "undirected" | "" => Ok(Direction::Undirected),
            _ => Err(s.to_owned()),
        }
    }
}

/// A head/tail entity pair with its relation label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationInstance {
    pub head: String,
    pub tail: String,
    pub category: RelationCategory,
    pub direction: Direction,
}

impl RelationInstance {
    pub fn new(head: impl Into<String>, tail: impl Into<String>, category: RelationCategory, direction: Direction) -> Self {
        RelationInstance {
            head: head.into(),
            tail: tail.into(),
            category,
            direction,
        }
    }
}
