use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::problem::Direction;

use super::LogRecord;

/// Decides whether an evaluation is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum Trigger {
    Always,
    /// Evaluations that strictly improve the best-so-far.
    OnImprovement,
    /// Every `k`-th evaluation (`t mod k == 0`).
    Each(u64),
    /// The listed evaluation counts.
    At(BTreeSet<u64>),
    /// Quality thresholds, each firing the first time the best-so-far reaches it.
    Targets { values: Vec<f64>, fired: Vec<bool> },
}

impl Trigger {
    pub fn each(k: u64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("EACH trigger needs k >= 1".into()));
        }
        Ok(Trigger::Each(k))
    }

    pub fn at(points: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for p in points {
            if p < 1 {
                return Err(Error::InvalidParameter("AT points must be >= 1".into()));
            }
            if !set.insert(p) {
                return Err(Error::InvalidParameter(format!("duplicate AT point {p}")));
            }
        }
        Ok(Trigger::At(set))
    }

    pub fn targets(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut values: Vec<f64> = values.into_iter().collect();
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter("target values must not be NaN".into()));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        let fired = vec![false; values.len()];
        Ok(Trigger::Targets { values, fired })
    }

    pub fn fires(&mut self, record: &LogRecord, direction: Direction) -> bool {
        match self {
            Trigger::Always => true,
            Trigger::OnImprovement => record.improved,
            Trigger::Each(k) => record.evaluations % *k == 0,
            Trigger::At(points) => points.contains(&record.evaluations),
            Trigger::Targets { values, fired } => {
                let mut any = false;
                for (v, done) in values.iter().zip(fired.iter_mut()) {
                    if !*done && direction.is_not_worse(record.raw_y_best, *v) {
                        *done = true;
                        any = true;
                    }
                }
                any
            }
        }
    }

    /// Clears per-run state.
    pub fn reset(&mut self) {
        if let Trigger::Targets { fired, .. } = self {
            fired.iter_mut().for_each(|f| *f = false);
        }
    }
}

/// Union of triggers: a record is stored when any member fires.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerSet {
    triggers: Vec<Trigger>,
}

impl TriggerSet {
    pub fn new(triggers: Vec<Trigger>) -> Result<Self> {
        if triggers.is_empty() {
            return Err(Error::InvalidParameter("trigger set must not be empty".into()));
        }
        Ok(TriggerSet { triggers })
    }

    pub fn always() -> Self {
        TriggerSet {
            triggers: vec![Trigger::Always],
        }
    }

    pub fn triggers(&self) -> &[Trigger] {
        &self.triggers
    }

    /// Every member is evaluated so that each keeps its own per-run state.
    pub fn fires(&mut self, record: &LogRecord, direction: Direction) -> bool {
        self.triggers
            .iter_mut()
            .fold(false, |any, t| t.fires(record, direction) | any)
    }

    pub fn reset(&mut self) {
        self.triggers.iter_mut().for_each(Trigger::reset);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(bests: &[f64], direction: Direction) -> Vec<LogRecord> {
        let mut best = direction.worst();
        bests
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let improved = direction.is_better(y, best);
                if improved {
                    best = y;
                }
                LogRecord {
                    evaluations: i as u64 + 1,
                    raw_y: y,
                    raw_y_best: best,
                    improved,
                }
            })
            .collect()
    }

    fn firing_points(t: &mut Trigger, records: &[LogRecord], d: Direction) -> Vec<u64> {
        records
            .iter()
            .filter(|r| t.fires(r, d))
            .map(|r| r.evaluations)
            .collect()
    }

    #[test]
    fn on_improvement() {
        let records = stream(&[3.0, 3.0, 5.0], Direction::Maximize);
        let mut t = Trigger::OnImprovement;
        assert_eq!(firing_points(&mut t, &records, Direction::Maximize), vec![1, 3]);
    }

    #[test]
    fn each_k() {
        let records = stream(&[0.0; 25], Direction::Maximize);
        let mut t = Trigger::each(10).unwrap();
        assert_eq!(firing_points(&mut t, &records, Direction::Maximize), vec![10, 20]);
        assert!(Trigger::each(0).is_err());
    }

    #[test]
    fn at_points() {
        let records = stream(&[0.0; 10], Direction::Minimize);
        let mut t = Trigger::at([1, 5, 50]).unwrap();
        assert_eq!(firing_points(&mut t, &records, Direction::Minimize), vec![1, 5]);
        assert!(Trigger::at([2, 2]).is_err());
    }

    #[test]
    fn targets_fire_once() {
        let records = stream(&[1.0, 3.0, 5.0, 6.0], Direction::Maximize);
        let mut t = Trigger::targets([4.0, 2.0]).unwrap();
        assert_eq!(firing_points(&mut t, &records, Direction::Maximize), vec![2, 3]);
        assert!(firing_points(&mut t, &records, Direction::Maximize).is_empty());
        t.reset();
        assert_eq!(firing_points(&mut t, &records, Direction::Maximize), vec![2, 3]);
    }

    #[test]
    fn targets_minimizing() {
        let records = stream(&[10.0, 0.5, 0.01], Direction::Minimize);
        let mut t = Trigger::targets([1.0, 0.1, 0.001]).unwrap();
        assert_eq!(firing_points(&mut t, &records, Direction::Minimize), vec![2, 3]);
    }

    #[test]
    fn set_evaluates_every_member() {
        let records = stream(&[1.0, 3.0], Direction::Maximize);
        let mut set = TriggerSet::new(vec![Trigger::Always, Trigger::targets([2.0]).unwrap()]).unwrap();
        for r in &records {
            assert!(set.fires(r, Direction::Maximize));
        }
        let Trigger::Targets { fired, .. } = &set.triggers()[1] else {
            unreachable!()
        };
        assert_eq!(fired, &vec![true]);
        assert!(TriggerSet::new(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn union_is_superset(ys in proptest::collection::vec(-50.0f64..50.0, 1..200), k in 1u64..20) {
            let d = Direction::Maximize;
            let records = stream(&ys, d);
            let mut alone = Trigger::each(k).unwrap();
            let expected = firing_points(&mut alone, &records, d);
            let mut set = TriggerSet::new(vec![
                Trigger::OnImprovement,
                Trigger::each(k).unwrap(),
                Trigger::targets([0.0, 10.0]).unwrap(),
            ]).unwrap();
            let fired: Vec<u64> = records.iter().filter(|r| set.fires(r, d)).map(|r| r.evaluations).collect();
            for t in expected {
                prop_assert!(fired.contains(&t));
            }
        }
    }
}
