use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ActionId, JointAction};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributionError {
    #[error("negative probability {0}")]
    Negative(Rational),
    #[error("probabilities sum to {0}, expected 1")]
    BadSum(Rational),
}

/// Finite probability distribution with exact weights.
///
/// Only outcomes with positive probability are stored, and the stored weights
/// sum to exactly one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Distribution<T: Ord> {
    support: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> Distribution<T> {
    /// Builds a distribution, merging repeated outcomes and dropping zero weights.
    pub fn new(entries: impl IntoIterator<Item = (T, Rational)>) -> Result<Self, DistributionError> {
        let mut support: BTreeMap<T, Rational> = BTreeMap::new();
        for (outcome, p) in entries {
            if p.is_negative() {
                return Err(DistributionError::Negative(p));
            }
            *support.entry(outcome).or_insert_with(Rational::zero) += p;
        }
        support.retain(|_, p| !p.is_zero());
        let total: Rational = support.values().sum();
        if !total.is_one() {
            return Err(DistributionError::BadSum(total));
        }
        Ok(Distribution { support })
    }

    pub fn dirac(outcome: T) -> Self {
        let mut support = BTreeMap::new();
        support.insert(outcome, Rational::one());
        Distribution { support }
    }

    /// Uniform over the given outcomes. Panics on an empty slice.
    pub fn uniform(outcomes: &[T]) -> Self {
        assert!(!outcomes.is_empty(), "uniform distribution over nothing");
        let w = Rational::new(1, outcomes.len() as i64);
        Distribution::new(outcomes.iter().map(|o| (o.clone(), w.clone())))
            .expect("uniform weights sum to one")
    }

    pub fn prob(&self, outcome: &T) -> Rational {
        self.support.get(outcome).cloned().unwrap_or_else(Rational::zero)
    }

    /// Probability mass on the outcomes accepted by `pred`.
    pub fn mass(&self, mut pred: impl FnMut(&T) -> bool) -> Rational {
        self.support
            .iter()
            .filter(|(o, _)| pred(o))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.support.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.support.keys()
    }

    pub fn contains(&self, outcome: &T) -> bool {
        self.support.contains_key(outcome)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// The single outcome of a point distribution.
    pub fn as_dirac(&self) -> Option<&T> {
        if self.support.len() == 1 {
            self.support.keys().next()
        } else {
            None
        }
    }

    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Distribution<U> {
        Distribution::new(self.support.iter().map(|(o, p)| (f(o), p.clone())))
            .expect("image of a distribution is a distribution")
    }
}

/// Product of per-agent action distributions, one per agent in agent order.
pub fn product_distribution(per_agent: &[Distribution<ActionId>]) -> Distribution<JointAction> {
    let mut acc: Vec<(Vec<ActionId>, Rational)> = vec![(Vec::new(), Rational::one())];
    for dist in per_agent {
        let mut next = Vec::with_capacity(acc.len() * dist.len());
        for (prefix, w) in &acc {
            for (action, p) in dist.iter() {
                let mut joint = prefix.clone();
                joint.push(*action);
                next.push((joint, w * p));
            }
        }
        acc = next;
    }
    Distribution::new(acc.into_iter().map(|(j, p)| (JointAction(j), p)))
        .expect("product of distributions sums to one")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rejects_bad_sums() {
        let err = Distribution::new([(0usize, r(9, 10))]).unwrap_err();
        assert_eq!(err, DistributionError::BadSum(r(9, 10)));
        assert!(Distribution::new([(0usize, r(-1, 2)), (1, r(3, 2))]).is_err());
    }

    #[test]
    fn zero_entries_are_dropped() {
        let d = Distribution::new([(0usize, Rational::zero()), (1, Rational::one())]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.as_dirac(), Some(&1));
    }

    #[test]
    fn product_of_diracs_is_dirac() {
        let d = product_distribution(&[
            Distribution::dirac(ActionId(1)),
            Distribution::dirac(ActionId(0)),
        ]);
        assert_eq!(d.as_dirac(), Some(&JointAction(vec![ActionId(1), ActionId(0)])));
    }

    #[test]
    fn product_of_fair_coins() {
        let coin = Distribution::uniform(&[ActionId(0), ActionId(1)]);
        let d = product_distribution(&[coin.clone(), coin]);
        assert_eq!(d.len(), 4);
        assert!(d.iter().all(|(_, p)| *p == r(1, 4)));
    }

    #[test]
    fn product_weights_multiply() {
        let (a, b, x, y) = (ActionId(0), ActionId(1), ActionId(2), ActionId(3));
        let left = Distribution::new([(a, r(1, 3)), (b, r(2, 3))]).unwrap();
        let right = Distribution::new([(x, r(1, 2)), (y, r(1, 2))]).unwrap();
        let d = product_distribution(&[left, right]);
        assert_eq!(d.prob(&JointAction(vec![a, x])), r(1, 6));
        assert_eq!(d.prob(&JointAction(vec![a, y])), r(1, 6));
        assert_eq!(d.prob(&JointAction(vec![b, x])), r(1, 3));
        assert_eq!(d.prob(&JointAction(vec![b, y])), r(1, 3));
    }

    #[test]
    fn empty_product_is_the_empty_joint_action() {
        let d = product_distribution(&[]);
        assert_eq!(d.as_dirac(), Some(&JointAction(vec![])));
    }
}
