//! Pass/fail items with witnesses, and theorem verdicts assembled from them.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Whether the measured value must stay below the threshold or exceed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    MustVanish,
    MustExceed,
}

/// A sample location, optionally tagged with a deformation parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub t: Option<f64>,
    pub value: f64,
}

/// One pointwise measurement feeding a [`CheckItem`].
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub point: Vec<f64>,
    pub t: Option<f64>,
    pub value: f64,
}

impl Probe {
    pub fn new(point: &[f64], t: Option<f64>, value: f64) -> Self {
        Probe {
            point: point.to_vec(),
            t,
            value,
        }
    }

    fn witness(&self) -> Witness {
        Witness {
            point: self.point.clone(),
            t: self.t,
            value: self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub status: Status,
    /// Maximum (vanishing checks) or minimum (exceeding checks) over all probes.
    pub value: f64,
    pub threshold: f64,
    pub sense: Sense,
    /// First offending probe in sample order.
    pub witness: Option<Witness>,
    /// Probe with the largest violation (or the extreme value when passing).
    pub worst: Option<Witness>,
    pub note: Option<String>,
}

impl CheckItem {
    /// Passes when every probe value is at most `threshold`. NaN fails.
    pub fn must_vanish<I>(name: impl Into<String>, threshold: f64, probes: I) -> Self
    where
        I: IntoIterator<Item = Probe>,
    {
        let mut value = 0.0f64;
        let mut witness = None;
        let mut worst: Option<Probe> = None;
        for p in probes {
            let bad = !(p.value <= threshold);
            if bad && witness.is_none() {
                witness = Some(p.witness());
            }
            let beats = match &worst {
                None => true,
                Some(w) => p.value > w.value || (p.value.is_nan() && !w.value.is_nan()),
            };
            if beats {
                value = p.value;
                worst = Some(p);
            }
        }
        CheckItem {
            name: name.into(),
            status: if witness.is_some() {
                Status::Fail
            } else {
                Status::Pass
            },
            value,
            threshold,
            sense: Sense::MustVanish,
            witness,
            worst: worst.map(|p| p.witness()),
            note: None,
        }
    }

    /// Passes when every probe value is strictly above `threshold`. NaN fails.
    pub fn must_exceed<I>(name: impl Into<String>, threshold: f64, probes: I) -> Self
    where
        I: IntoIterator<Item = Probe>,
    {
        let mut value = f64::INFINITY;
        let mut witness = None;
        let mut worst: Option<Probe> = None;
        for p in probes {
            let bad = !(p.value > threshold);
            if bad && witness.is_none() {
                witness = Some(p.witness());
            }
            let beats = match &worst {
                None => true,
                Some(w) => p.value < w.value || (p.value.is_nan() && !w.value.is_nan()),
            };
            if beats {
                value = p.value;
                worst = Some(p);
            }
        }
        CheckItem {
            name: name.into(),
            status: if witness.is_some() {
                Status::Fail
            } else {
                Status::Pass
            },
            value,
            threshold,
            sense: Sense::MustExceed,
            witness,
            worst: worst.map(|p| p.witness()),
            note: None,
        }
    }

    /// A single scalar measurement without a location.
    pub fn scalar(name: impl Into<String>, sense: Sense, value: f64, threshold: f64) -> Self {
        let ok = match sense {
            Sense::MustVanish => value <= threshold,
            Sense::MustExceed => value > threshold,
        };
        CheckItem {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            threshold,
            sense,
            witness: None,
            worst: None,
            note: None,
        }
    }

    pub fn skipped(name: impl Into<String>, note: impl Into<String>) -> Self {
        CheckItem {
            name: name.into(),
            status: Status::Skipped,
            value: f64::NAN,
            threshold: f64::NAN,
            sense: Sense::MustVanish,
            witness: None,
            worst: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_prefix(mut self, prefix: &str) -> Self {
        self.name = format!("{prefix}{}", self.name);
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    /// The value lies within a factor of 10 of the threshold on either side.
    pub fn is_marginal(&self) -> bool {
        if self.status == Status::Skipped || !self.value.is_finite() || self.threshold <= 0.0 {
            return false;
        }
        let v = self.value.abs();
        v >= self.threshold / 10.0 && v <= self.threshold * 10.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Converse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Falsified,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremVerdict {
    pub direction: Direction,
    pub hypotheses: Vec<CheckItem>,
    pub conclusions: Vec<CheckItem>,
    /// Intermediate quantities reported for inspection; they do not affect the verdict.
    pub facts: Vec<CheckItem>,
    pub verdict: Verdict,
}

impl TheoremVerdict {
    pub fn new(
        direction: Direction,
        hypotheses: Vec<CheckItem>,
        conclusions: Vec<CheckItem>,
        facts: Vec<CheckItem>,
    ) -> Self {
        let verdict = if hypotheses.iter().any(CheckItem::failed) {
            Verdict::NotApplicable
        } else if conclusions.iter().any(CheckItem::failed) {
            Verdict::Falsified
        } else {
            Verdict::Holds
        };
        TheoremVerdict {
            direction,
            hypotheses,
            conclusions,
            facts,
            verdict,
        }
    }

    pub fn first_failed_hypothesis(&self) -> Option<&CheckItem> {
        self.hypotheses.iter().find(|c| c.failed())
    }

    pub fn failed_conclusions(&self) -> impl Iterator<Item = &CheckItem> {
        self.conclusions.iter().filter(|c| c.failed())
    }

    pub fn find(&self, name: &str) -> Option<&CheckItem> {
        self.hypotheses
            .iter()
            .chain(&self.conclusions)
            .chain(&self.facts)
            .find(|c| c.name == name)
    }

    /// True when an item that decides the verdict sits within 10x of its threshold.
    pub fn is_inconclusive(&self) -> bool {
        match self.verdict {
            Verdict::Holds => self
                .hypotheses
                .iter()
                .chain(&self.conclusions)
                .any(CheckItem::is_marginal),
            Verdict::Falsified => {
                self.hypotheses.iter().any(CheckItem::is_marginal)
                    || self.failed_conclusions().all(CheckItem::is_marginal)
            }
            Verdict::NotApplicable => self
                .hypotheses
                .iter()
                .filter(|c| c.failed())
                .all(CheckItem::is_marginal),
        }
    }
}
