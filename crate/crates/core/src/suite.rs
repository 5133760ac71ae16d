//! Suites: ordered collections of problem instances.

use std::collections::HashSet;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::functions::{FunctionEntry, Registry};
use crate::problem::{Domain, ProblemInstance};

pub const PBO_MINI: &str = "PBO-mini";
pub const BBOB_MINI: &str = "BBOB-mini";
pub const PBO_MINI_IDS: [u32; 6] = [1, 2, 3, 4, 5, 6];
pub const BBOB_MINI_IDS: [u32; 5] = [1, 2, 3, 8, 10];

/// Cross product of problem ids, dimensions and instance ids.
///
/// Instances are built fresh on every [`Suite::next_problem`] call, in the order
/// problem (outer), dimension, instance (inner).
#[derive(Debug, Clone)]
pub struct Suite {
    name: String,
    domain: Domain,
    problems: Vec<FunctionEntry>,
    instance_ids: Vec<u32>,
    dimensions: Vec<usize>,
    cursor: usize,
}

impl Suite {
    pub fn new(
        registry: &Registry,
        name: impl Into<String>,
        domain: Domain,
        problem_ids: &[u32],
        instance_ids: &[u32],
        dimensions: &[usize],
    ) -> Result<Self> {
        check_list("problem_ids", problem_ids)?;
        check_list("instance_ids", instance_ids)?;
        check_list("dimensions", dimensions)?;
        if instance_ids.contains(&0) {
            return Err(Error::InvalidParameter("instance ids must be >= 1".into()));
        }
        if dimensions.contains(&0) {
            return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
        }
        let problems = problem_ids
            .iter()
            .map(|&id| registry.lookup(id, domain).cloned())
            .collect::<Result<Vec<_>>>()?;
        Ok(Suite {
            name: name.into(),
            domain,
            problems,
            instance_ids: instance_ids.to_vec(),
            dimensions: dimensions.to_vec(),
            cursor: 0,
        })
    }

    /// Boolean ids 1..=6.
    pub fn pbo_mini(registry: &Registry, instance_ids: &[u32], dimensions: &[usize]) -> Result<Self> {
        Suite::new(registry, PBO_MINI, Domain::Boolean, &PBO_MINI_IDS, instance_ids, dimensions)
    }

    /// Continuous ids 1, 2, 3, 8, 10.
    pub fn bbob_mini(registry: &Registry, instance_ids: &[u32], dimensions: &[usize]) -> Result<Self> {
        Suite::new(registry, BBOB_MINI, Domain::Continuous, &BBOB_MINI_IDS, instance_ids, dimensions)
    }

    /// Looks up one of the named default suites.
    pub fn named(
        registry: &Registry,
        name: &str,
        instance_ids: &[u32],
        dimensions: &[usize],
    ) -> Result<Self> {
        match name {
            PBO_MINI => Self::pbo_mini(registry, instance_ids, dimensions),
            BBOB_MINI => Self::bbob_mini(registry, instance_ids, dimensions),
            other => Err(Error::InvalidParameter(format!("unknown suite {other:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn problem_ids(&self) -> Vec<u32> {
        self.problems.iter().map(|p| p.problem_id).collect()
    }

    pub fn instance_ids(&self) -> &[u32] {
        &self.instance_ids
    }

    pub fn dimensions(&self) -> &[usize] {
        &self.dimensions
    }

    pub fn size(&self) -> usize {
        self.problems.len() * self.dimensions.len() * self.instance_ids.len()
    }

    /// `(problem_id, dimension, instance_id)` at position `index` of the iteration order.
    pub fn key_at(&self, index: usize) -> Option<(u32, usize, u32)> {
        if index >= self.size() {
            return None;
        }
        let per_dim = self.instance_ids.len();
        let per_problem = per_dim * self.dimensions.len();
        Some((
            self.problems[index / per_problem].problem_id,
            self.dimensions[(index % per_problem) / per_dim],
            self.instance_ids[index % per_dim],
        ))
    }

    pub fn keys(&self) -> Vec<(u32, usize, u32)> {
        (0..self.size()).filter_map(|i| self.key_at(i)).collect()
    }

    /// Builds the instance at `index` regardless of the cursor.
    pub fn construct_at(&self, index: usize) -> Option<Result<ProblemInstance>> {
        let (id, dim, inst) = self.key_at(index)?;
        let entry = self
            .problems
            .iter()
            .find(|p| p.problem_id == id)
            .expect("key comes from the problem list");
        Some(entry.construct(inst, dim).map(|mut p| {
            p.set_suite_name(self.name.clone());
            p
        }))
    }

    /// Next fresh instance, or `None` once the suite is exhausted.
    pub fn next_problem(&mut self) -> Option<Result<ProblemInstance>> {
        let item = self.construct_at(self.cursor)?;
        self.cursor += 1;
        Some(item)
    }

    pub fn reset(&mut self) {
        self.cursor = 0;
    }
}

impl Iterator for Suite {
    type Item = Result<ProblemInstance>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_problem()
    }
}

fn check_list<T: Eq + Hash + Copy + std::fmt::Debug>(field: &str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{field} must not be empty")));
    }
    let mut seen = HashSet::new();
    for v in values {
        if !seen.insert(*v) {
            return Err(Error::InvalidParameter(format!("duplicate entry {v:?} in {field}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let r = Registry::with_defaults();
        let s = Suite::new(&r, "s", Domain::Boolean, &[1, 2], &[1, 2, 3, 4, 5], &[16, 100]).unwrap();
        assert_eq!(s.size(), 20);
        let s = Suite::new(&r, "s", Domain::Boolean, &[1], &[1], &[4]).unwrap();
        assert_eq!(s.size(), 1);
        assert_eq!(Suite::pbo_mini(&r, &[1, 2, 3, 4, 5], &[16, 64]).unwrap().size(), 60);
        assert_eq!(Suite::bbob_mini(&r, &[1, 2, 3], &[2, 5]).unwrap().size(), 30);
    }

    #[test]
    fn invalid_suites() {
        let r = Registry::with_defaults();
        assert!(matches!(
            Suite::new(&r, "s", Domain::Boolean, &[1, 424242], &[1], &[4]),
            Err(Error::UnknownProblem { id: 424242, .. })
        ));
        assert!(Suite::new(&r, "s", Domain::Boolean, &[1, 1], &[1], &[4]).is_err());
        assert!(Suite::new(&r, "s", Domain::Boolean, &[1], &[1], &[0]).is_err());
        assert!(Suite::new(&r, "s", Domain::Boolean, &[], &[1], &[4]).is_err());
        assert!(Suite::named(&r, "nope", &[1], &[4]).is_err());
    }

    #[test]
    fn iteration_order_and_reset() {
        let r = Registry::with_defaults();
        let mut s = Suite::new(&r, "s", Domain::Boolean, &[1, 2], &[1, 2], &[4]).unwrap();
        let order: Vec<_> = s
            .by_ref()
            .map(|p| {
                let p = p.unwrap();
                let m = p.metadata();
                assert_eq!(p.state().evaluations, 0);
                assert_eq!(p.suite_name(), "s");
                (m.problem_id, m.dimension, m.instance_id)
            })
            .collect();
        assert_eq!(order, vec![(1, 4, 1), (1, 4, 2), (2, 4, 1), (2, 4, 2)]);
        assert!(s.next_problem().is_none());
        assert!(s.next_problem().is_none());
        s.reset();
        let again: Vec<_> = s
            .map(|p| {
                let p = p.unwrap();
                let m = p.metadata();
                (m.problem_id, m.dimension, m.instance_id)
            })
            .collect();
        assert_eq!(again, order);
    }

    #[test]
    fn dimension_is_middle_loop() {
        let r = Registry::with_defaults();
        let s = Suite::new(&r, "s", Domain::Continuous, &[1, 8], &[1, 2], &[2, 3]).unwrap();
        assert_eq!(
            s.keys(),
            vec![
                (1, 2, 1), (1, 2, 2), (1, 3, 1), (1, 3, 2),
                (8, 2, 1), (8, 2, 2), (8, 3, 1), (8, 3, 2),
            ]
        );
    }

    #[test]
    fn default_suites_resolve() {
        let r = Registry::with_defaults();
        for mut s in [
            Suite::pbo_mini(&r, &[1, 2], &[9]).unwrap(),
            Suite::bbob_mini(&r, &[1, 2], &[3]).unwrap(),
        ] {
            let n = s.size();
            assert_eq!(s.by_ref().filter(|p| p.is_ok()).count(), n);
        }
    }
}
