//! The refinement dialogue.
//!
//! A [`Session`] is a base problem plus an append-only log of
//! [`RefinementEvent`]s. The working interval structure is always the fold of
//! the log over the base, so undo and reload are plain replays. Every
//! accepted event contracts intervals, and the session checks that the new
//! Pareto set is contained in the previous one before committing.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::pareto::{check_nesting, interval_pareto, ParetoReport, ParetoResult};
use crate::problem::{wrong_variant, Matrix, Problem, Structure};
use crate::relation::PreferenceRelation;
use crate::utility::{utility_matrix, vpr_to_interval_structure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementEvent {
    pub sequence: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
    #[serde(flatten)]
    pub payload: EventPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EventPayload {
    /// Replace the interval of one cell by a sub-interval.
    Tighten {
        alternative: String,
        criterion: String,
        interval: Interval,
    },
    /// Assert that `preferred` is at least as good as `other` on one
    /// criterion; with `indifferent` both directions are asserted at once.
    Compare {
        criterion: String,
        preferred: String,
        other: String,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        indifferent: bool,
    },
}

impl RefinementEvent {
    pub fn tighten(sequence: u64, alternative: &str, criterion: &str, interval: Interval) -> Self {
        RefinementEvent {
            sequence,
            timestamp: None,
            payload: EventPayload::Tighten {
                alternative: alternative.to_owned(),
                criterion: criterion.to_owned(),
                interval,
            },
        }
    }

    pub fn compare(sequence: u64, criterion: &str, preferred: &str, other: &str) -> Self {
        RefinementEvent {
            sequence,
            timestamp: None,
            payload: EventPayload::Compare {
                criterion: criterion.to_owned(),
                preferred: preferred.to_owned(),
                other: other.to_owned(),
                indifferent: false,
            },
        }
    }

    pub fn indifferent(sequence: u64, criterion: &str, a: &str, b: &str) -> Self {
        let mut e = RefinementEvent::compare(sequence, criterion, a, b);
        if let EventPayload::Compare { indifferent, .. } = &mut e.payload {
            *indifferent = true;
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangedInterval {
    pub alternative: String,
    pub criterion: String,
    pub old: Interval,
    pub new: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDelta {
    pub sequence: u64,
    pub new_pareto: Vec<String>,
    pub removed: Vec<String>,
    pub changed_intervals: Vec<ChangedInterval>,
    pub nesting_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuggestionKind {
    ComparePair {
        x: String,
        y: String,
        criteria: Vec<String>,
        multiplicity: usize,
    },
    Tighten {
        alternative: String,
        criterion: String,
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    #[serde(flatten)]
    pub kind: SuggestionKind,
    pub score: f64,
}

/// The Pareto chain, newest last, with its nesting certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryReport {
    pub chain: Vec<Vec<String>>,
    /// Newest set is contained in every earlier one, step by step.
    pub nesting_ok: bool,
    pub all_nonempty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<String>>,
    /// Baseline contained in the newest set; absent without a baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_ok: Option<bool>,
}

/// On-disk session schema: everything needed to replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFile {
    pub id: String,
    pub base: Problem,
    pub log: Vec<RefinementEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<String>>,
}

/// Read-only view of a session for clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    /// `interval` or `relation`, after the base structure.
    pub kind: String,
    pub sequence: u64,
    pub alternatives: Vec<String>,
    pub criteria: Vec<String>,
    pub base: Problem,
    pub log: Vec<RefinementEvent>,
    pub initial_intervals: Vec<Vec<Interval>>,
    pub intervals: Vec<Vec<Interval>>,
    /// Current closed relations, relation bases only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<crate::problem::RelationFile>>,
    pub pareto: ParetoReport,
    pub history: HistoryReport,
}

/// Derived state: the current interval problem and, for relation bases,
/// the current closed relations it was built from.
#[derive(Debug, Clone, PartialEq)]
struct Working {
    problem: Problem,
    relations: Option<Vec<PreferenceRelation>>,
}

impl Working {
    fn intervals(&self) -> &Matrix<Interval> {
        self.problem.intervals().expect("working problem is an interval problem").0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    id: String,
    base: Problem,
    baseline: Option<BTreeSet<usize>>,
    log: Vec<RefinementEvent>,
    initial: Matrix<Interval>,
    working: Working,
    result: ParetoResult,
    history: Vec<BTreeSet<usize>>,
}

impl Session {
    /// Starts a dialogue on an interval or relation problem. Point problems
    /// carry no uncertainty and are rejected.
    pub fn create(id: impl Into<String>, base: Problem, baseline: Option<&[String]>) -> Result<Session> {
        let working = match base.structure() {
            Structure::Interval { .. } => Working {
                problem: base.clone(),
                relations: None,
            },
            Structure::Relation(rels) => Working {
                problem: vpr_to_interval_structure(&base)?,
                relations: Some(rels.to_vec()),
            },
            Structure::Point(_) => {
                return Err(Error::WrongVariant {
                    expected: "interval or relation",
                    found: "point",
                })
            }
        };
        let baseline = baseline
            .map(|labels| labels.iter().map(|l| base.alt_index(l)).collect::<Result<BTreeSet<_>>>())
            .transpose()?;
        let result = interval_pareto(&working.problem)?;
        Ok(Session {
            id: id.into(),
            initial: working.intervals().clone(),
            history: vec![result.pareto_set().clone()],
            base,
            baseline,
            log: Vec::new(),
            working,
            result,
        })
    }

    /// Rebuilds a session by folding `log` over `base`.
    pub fn replay(
        id: impl Into<String>,
        base: Problem,
        baseline: Option<&[String]>,
        log: &[RefinementEvent],
    ) -> Result<Session> {
        let mut s = Session::create(id, base, baseline)?;
        for event in log {
            s.apply_event(event.clone()).map_err(|e| Error::Replay {
                sequence: event.sequence,
                source: Box::new(e),
            })?;
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn base(&self) -> &Problem {
        &self.base
    }

    pub fn log(&self) -> &[RefinementEvent] {
        &self.log
    }

    /// Sequence number of the last accepted event, 0 when fresh.
    pub fn last_sequence(&self) -> u64 {
        self.log.len() as u64
    }

    /// The current interval problem.
    pub fn working(&self) -> &Problem {
        &self.working.problem
    }

    pub fn working_relations(&self) -> Option<&[PreferenceRelation]> {
        self.working.relations.as_deref()
    }

    pub fn intervals(&self) -> &Matrix<Interval> {
        self.working.intervals()
    }

    pub fn initial_intervals(&self) -> &Matrix<Interval> {
        &self.initial
    }

    pub fn result(&self) -> &ParetoResult {
        &self.result
    }

    pub fn pareto_set(&self) -> &BTreeSet<usize> {
        self.result.pareto_set()
    }

    pub fn pareto_report(&self) -> ParetoReport {
        self.result.report(&self.working.problem)
    }

    pub fn history(&self) -> &[BTreeSet<usize>] {
        &self.history
    }

    pub fn baseline(&self) -> Option<&BTreeSet<usize>> {
        self.baseline.as_ref()
    }

    fn labels(&self, set: &BTreeSet<usize>) -> Vec<String> {
        set.iter().map(|&i| self.base.alt_label(i).to_owned()).collect()
    }

    /// Applies one piece of additional information. On error the session
    /// is left untouched.
    pub fn apply_event(&mut self, event: RefinementEvent) -> Result<SessionDelta> {
        let expected = self.last_sequence() + 1;
        if event.sequence != expected {
            return Err(Error::StaleSequence {
                expected,
                got: event.sequence,
            });
        }
        let next = self.step(&event.payload)?;
        let result = interval_pareto(&next.problem)?;

        let old_m = self.working.intervals();
        let new_m = next.intervals();
        let mut changed = Vec::new();
        for i in 0..old_m.rows() {
            for j in 0..old_m.cols() {
                let (old, new) = (*old_m.get(i, j), *new_m.get(i, j));
                if !old.includes(&new) {
                    return Err(Error::Invariant(format!(
                        "interval ({}, {}) widened from {old} to {new}",
                        self.base.alt_label(i),
                        self.base.criterion_label(j)
                    )));
                }
                if old != new {
                    changed.push(ChangedInterval {
                        alternative: self.base.alt_label(i).to_owned(),
                        criterion: self.base.criterion_label(j).to_owned(),
                        old,
                        new,
                    });
                }
            }
        }
        let previous = self.result.pareto_set();
        let new_set = result.pareto_set();
        if !new_set.is_subset(previous) {
            return Err(Error::Invariant(format!(
                "Pareto set {:?} does not refine {:?}",
                self.labels(new_set),
                self.labels(previous)
            )));
        }
        let delta = SessionDelta {
            sequence: event.sequence,
            new_pareto: self.labels(new_set),
            removed: self.labels(&previous.difference(new_set).copied().collect()),
            changed_intervals: changed,
            nesting_ok: true,
        };

        self.history.push(new_set.clone());
        self.working = next;
        self.result = result;
        self.log.push(event);
        Ok(delta)
    }

    /// The working state after `payload`, without committing it.
    fn step(&self, payload: &EventPayload) -> Result<Working> {
        match payload {
            EventPayload::Tighten {
                alternative,
                criterion,
                interval,
            } => {
                if self.working.relations.is_some() {
                    return Err(wrong_variant("interval", self.base.structure()));
                }
                let i = self.base.alt_index(alternative)?;
                let j = self.base.criterion_index(criterion)?;
                let (matrix, mode) = self.working.problem.intervals()?;
                let contracted = matrix.get(i, j).contract(*interval)?;
                let mut matrix = matrix.clone();
                matrix.set(i, j, contracted);
                Ok(Working {
                    problem: Problem::new(
                        self.base.alternatives().to_vec(),
                        self.base.criteria().to_vec(),
                        Structure::Interval { matrix, mode },
                    )?,
                    relations: None,
                })
            }
            EventPayload::Compare {
                criterion,
                preferred,
                other,
                indifferent,
            } => {
                let Some(rels) = &self.working.relations else {
                    return Err(wrong_variant("relation", self.base.structure()));
                };
                let j = self.base.criterion_index(criterion)?;
                let p = self.base.alt_index(preferred)?;
                let o = self.base.alt_index(other)?;
                if p == o {
                    return Err(Error::SamePair(preferred.clone()));
                }
                let old = &rels[j];
                let mut grown = old.clone();
                grown.insert(p, o);
                if *indifferent {
                    grown.insert(o, p);
                }
                let grown = grown.transitive_closure();
                if grown.downgraded_strict_pair(old).is_some() {
                    return Err(Error::ContradictoryInformation {
                        criterion: criterion.clone(),
                        preferred: preferred.clone(),
                        other: other.clone(),
                    });
                }
                let mut rels = rels.clone();
                rels[j] = grown;
                Ok(Working {
                    problem: Problem::new(
                        self.base.alternatives().to_vec(),
                        self.base.criteria().to_vec(),
                        Structure::Interval {
                            matrix: utility_matrix(&rels),
                            mode: crate::interval::DominanceMode::Strict,
                        },
                    )?,
                    relations: Some(rels),
                })
            }
        }
    }

    /// Removes the last event by replaying the rest of the log.
    pub fn undo(&mut self) -> Result<()> {
        if self.log.is_empty() {
            return Err(Error::EmptyLog);
        }
        let log = &self.log[..self.log.len() - 1];
        let baseline = self.baseline.as_ref().map(|b| self.labels(b));
        *self = Session::replay(self.id.clone(), self.base.clone(), baseline.as_deref(), log)?;
        Ok(())
    }

    pub fn pareto_history(&self) -> HistoryReport {
        let reversed: Vec<BTreeSet<usize>> = self.history.iter().rev().cloned().collect();
        let newest = self.history.last().expect("history is never empty");
        HistoryReport {
            chain: self.history.iter().map(|s| self.labels(s)).collect(),
            nesting_ok: check_nesting(&reversed),
            all_nonempty: self.history.iter().all(|s| !s.is_empty()),
            baseline: self.baseline.as_ref().map(|b| self.labels(b)),
            baseline_ok: self.baseline.as_ref().map(|b| b.is_subset(newest)),
        }
    }

    /// At most `k` prompts for information that is still unresolved among
    /// current Pareto members.
    pub fn suggestions(&self, k: usize) -> Vec<Suggestion> {
        if k == 0 {
            return Vec::new();
        }
        let pareto: Vec<usize> = self.pareto_set().iter().copied().collect();
        let mut out: Vec<Suggestion> = match &self.working.relations {
            Some(rels) => {
                let mut pairs = Vec::new();
                for (a, &x) in pareto.iter().enumerate() {
                    for &y in &pareto[a + 1..] {
                        let criteria: Vec<String> = rels
                            .iter()
                            .enumerate()
                            .filter(|(_, r)| r.incomparable(x, y))
                            .map(|(j, _)| self.base.criterion_label(j).to_owned())
                            .collect();
                        if !criteria.is_empty() {
                            pairs.push((criteria.len(), x, y, criteria));
                        }
                    }
                }
                // Multiplicity descending; stable sort keeps declaration order on ties.
                pairs.sort_by_key(|p| std::cmp::Reverse(p.0));
                pairs
                    .into_iter()
                    .map(|(mult, x, y, criteria)| Suggestion {
                        kind: SuggestionKind::ComparePair {
                            x: self.base.alt_label(x).to_owned(),
                            y: self.base.alt_label(y).to_owned(),
                            criteria,
                            multiplicity: mult,
                        },
                        score: mult as f64,
                    })
                    .collect()
            }
            None => {
                let m = self.intervals();
                let mut cells: Vec<(f64, usize, usize)> = pareto
                    .iter()
                    .flat_map(|&i| (0..m.cols()).map(move |j| (i, j)))
                    .map(|(i, j)| (m.get(i, j).width(), i, j))
                    .filter(|(w, _, _)| *w > 0.0)
                    .collect();
                cells.sort_by(|a, b| b.0.total_cmp(&a.0));
                cells
                    .into_iter()
                    .map(|(w, i, j)| Suggestion {
                        kind: SuggestionKind::Tighten {
                            alternative: self.base.alt_label(i).to_owned(),
                            criterion: self.base.criterion_label(j).to_owned(),
                            width: w,
                        },
                        score: w,
                    })
                    .collect()
            }
        };
        out.truncate(k);
        out
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        let relations = self.working.relations.as_ref().map(|rels| {
            rels.iter()
                .enumerate()
                .map(|(j, r)| crate::problem::RelationFile {
                    criterion: self.base.criterion_label(j).to_owned(),
                    pairs: r
                        .pairs()
                        .map(|(x, y)| (self.base.alt_label(x).to_owned(), self.base.alt_label(y).to_owned()))
                        .collect(),
                })
                .collect()
        });
        SessionSnapshot {
            id: self.id.clone(),
            kind: self.base.structure().kind().to_owned(),
            sequence: self.last_sequence(),
            alternatives: self.base.alternatives().iter().map(ToString::to_string).collect(),
            criteria: self.base.criteria().iter().map(ToString::to_string).collect(),
            base: self.base.clone(),
            log: self.log.clone(),
            initial_intervals: self.initial.to_rows(),
            intervals: self.intervals().to_rows(),
            relations,
            pareto: self.pareto_report(),
            history: self.pareto_history(),
        }
    }

    pub fn to_file(&self) -> SessionFile {
        SessionFile {
            id: self.id.clone(),
            base: self.base.clone(),
            log: self.log.clone(),
            baseline: self.baseline.as_ref().map(|b| self.labels(b)),
        }
    }

    pub fn from_file(file: SessionFile) -> Result<Session> {
        Session::replay(file.id, file.base, file.baseline.as_deref(), &file.log)
    }

    /// Writes the session file atomically (temp file in the same directory,
    /// then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp, &self.to_file()).map_err(std::io::Error::from)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Session> {
        let bytes = fs::read(path)?;
        let file: SessionFile = serde_json::from_slice(&bytes).map_err(|e| Error::Schema(e.to_string()))?;
        Session::from_file(file)
    }
}

pub fn create_session(problem: Problem) -> Result<Session> {
    Session::create("session", problem, None)
}
