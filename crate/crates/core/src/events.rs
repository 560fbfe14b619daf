use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Vertex};
use crate::guessing::{GuessCase, GuessClass};
use crate::oracle::{GuardSite, QueryAnswer, QueryKey, QueryOutcome};

/// One step of a search, in the order it happened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum SearchEvent {
    Query {
        site: GuardSite,
        key: QueryKey,
        outcome: QueryOutcome,
        cached: bool,
        guess: Option<GuessClass>,
        case: Option<GuessCase>,
    },
    Grow {
        from: Vertex,
        inner: Vertex,
        outer: Vertex,
    },
    Blossom {
        base: Vertex,
        cycle: Vec<Edge>,
    },
    /// Phase 1 found an edge joining two search trees.
    Sap {
        u: Vertex,
        v: Vertex,
    },
    DualAdjust {
        delta: i64,
        round: i64,
    },
    Exhausted,
    /// Phase 2 started a search from a free root.
    Root {
        root: Vertex,
    },
    /// Phase 2 extracted an augmenting path.
    PathFound {
        path: Vec<Vertex>,
    },
    RemoveEdge {
        u: Vertex,
        v: Vertex,
    },
    RemoveVertices {
        vertices: Vec<Vertex>,
    },
}

/// Append-only event log that can be switched off for bulk runs.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventLog {
    events: Vec<SearchEvent>,
    #[serde(skip)]
    disabled: bool,
}

impl EventLog {
    pub fn new(enabled: bool) -> Self {
        EventLog {
            events: Vec::new(),
            disabled: !enabled,
        }
    }

    pub fn push(&mut self, event: SearchEvent) {
        if !self.disabled {
            self.events.push(event);
        }
    }

    pub fn query(&mut self, site: GuardSite, key: QueryKey, answer: &QueryAnswer) {
        if self.disabled {
            return;
        }
        self.events.push(SearchEvent::Query {
            site,
            key,
            outcome: answer.outcome,
            cached: answer.cached,
            guess: answer.verdict.map(|v| v.class),
            case: answer.verdict.and_then(|v| v.case),
        });
    }

    pub fn events(&self) -> &[SearchEvent] {
        &self.events
    }

    pub fn is_enabled(&self) -> bool {
        !self.disabled
    }
}
