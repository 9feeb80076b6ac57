use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::chain::{chain_next_probability, chain_regions, chain_until_probability, induced_chain, MarkovChain, Profile};
use super::OracleError;
use crate::model::{Cgs, StateId};
use crate::rational::Rational;

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.5758293035489;

/// Samples drawn per seeded generator; fixes the merge independently of threads.
const CHUNK: u64 = 1024;

#[derive(Clone, Debug)]
pub enum PathGoal {
    Next(Vec<bool>),
    Until(Vec<bool>, Vec<bool>),
}

#[derive(Clone, Debug)]
pub struct SampleOptions {
    pub samples: u64,
    pub seed: u64,
    /// Walks longer than this are cut off and counted as failures.
    pub max_steps: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            samples: 10_000,
            seed: 0,
            max_steps: 100_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleEstimate {
    pub estimate: f64,
    pub successes: u64,
    pub samples: u64,
    /// Walks that hit the step bound; each biases the estimate downward.
    pub truncated: u64,
    /// 99% interval; zero width when the value was decided by graph analysis.
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Rational>,
}

impl SampleEstimate {
    fn exact(v: Rational, samples: u64) -> Self {
        let x = v.to_f64();
        SampleEstimate {
            estimate: x,
            successes: if v.is_one() { samples } else { 0 },
            samples,
            truncated: 0,
            lower: x,
            upper: x,
            half_width: 0.0,
            exact: Some(v),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Wilson score interval at 99%: `(lower, upper)`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z99 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

struct Sampler {
    /// Cumulative weights per row.
    cdf: Vec<Vec<(usize, f64)>>,
}

impl Sampler {
    fn new(mc: &MarkovChain) -> Self {
        let cdf = mc
            .rows()
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|(t, p)| {
                        acc += p.to_f64();
                        (t.0, acc)
                    })
                    .collect()
            })
            .collect();
        Sampler { cdf }
    }

    fn step(&self, s: usize, rng: &mut impl Rng) -> usize {
        let row = &self.cdf[s];
        let u: f64 = rng.gen::<f64>() * row.last().map_or(1.0, |l| l.1);
        row.iter().find(|(_, c)| u < *c).unwrap_or(row.last().expect("nonempty row")).0
    }
}

/// Estimates the probability of `goal` from `start` by sampling walks.
///
/// For until goals, walks stop as soon as they enter a state whose
/// probability is 0 or 1 by graph analysis, so they end almost surely.
pub fn sample_chain(mc: &MarkovChain, start: StateId, goal: &PathGoal, opts: &SampleOptions) -> SampleEstimate {
    let n = opts.samples.max(1);
    let (decided_one, decided_zero) = match goal {
        PathGoal::Next(target) => {
            let v = &chain_next_probability(mc, target)[start.0];
            if v.is_zero() || v.is_one() {
                return SampleEstimate::exact(v.clone(), n);
            }
            (vec![], vec![])
        }
        PathGoal::Until(safe, target) => {
            let r = chain_regions(mc, safe, target);
            if r.zero[start.0] || r.one[start.0] {
                let v = chain_until_probability(mc, safe, target)[start.0].clone();
                return SampleEstimate::exact(v, n);
            }
            (r.one, r.zero)
        }
    };
    let sampler = Sampler::new(mc);
    let chunks = n.div_ceil(CHUNK);
    let (successes, truncated) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(c);
            let count = CHUNK.min(n - c * CHUNK);
            let mut hit = 0u64;
            let mut cut = 0u64;
            for _ in 0..count {
                match goal {
                    PathGoal::Next(target) => {
                        if target[sampler.step(start.0, &mut rng)] {
                            hit += 1;
                        }
                    }
                    PathGoal::Until(..) => {
                        let mut s = start.0;
                        let mut steps = 0;
                        loop {
                            if decided_one[s] {
                                hit += 1;
                                break;
                            }
                            if decided_zero[s] {
                                break;
                            }
                            if steps == opts.max_steps {
                                cut += 1;
                                break;
                            }
                            s = sampler.step(s, &mut rng);
                            steps += 1;
                        }
                    }
                }
            }
            (hit, cut)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (lower, upper) = wilson_interval(successes, n);
    SampleEstimate {
        estimate: successes as f64 / n as f64,
        successes,
        samples: n,
        truncated,
        lower,
        upper,
        half_width: (upper - lower) / 2.0,
        exact: None,
    }
}

/// Monte Carlo estimate under a full memoryless profile.
pub fn monte_carlo_estimate(
    cgs: &Cgs,
    profile: &Profile,
    start: StateId,
    goal: &PathGoal,
    opts: &SampleOptions,
) -> Result<SampleEstimate, OracleError> {
    let mc = induced_chain(cgs, profile)?;
    Ok(sample_chain(&mc, start, goal, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Distribution;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn row(entries: &[(usize, Rational)]) -> Distribution<StateId> {
        Distribution::new(entries.iter().map(|(s, p)| (StateId(*s), p.clone()))).unwrap()
    }

    #[test]
    fn dirac_chain_is_exact() {
        let mc = MarkovChain::new(vec![row(&[(1, r(1, 1))]), row(&[(1, r(1, 1))])]);
        let est = sample_chain(&mc, StateId(0), &PathGoal::Until(vec![true; 2], vec![false, true]), &SampleOptions::default());
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.half_width, 0.0);
        assert_eq!(est.exact, Some(r(1, 1)));
    }

    #[test]
    fn fair_coin_next() {
        let mc = MarkovChain::new(vec![row(&[(0, r(1, 2)), (1, r(1, 2))]), row(&[(1, r(1, 1))])]);
        let est = sample_chain(&mc, StateId(0), &PathGoal::Next(vec![false, true]), &SampleOptions::default());
        assert!(est.contains(0.5), "{est:?}");
        assert!(est.half_width < 0.02);
    }

    #[test]
    fn seeded_runs_repeat() {
        let mc = MarkovChain::new(vec![
            row(&[(0, r(1, 3)), (1, r(1, 3)), (2, r(1, 3))]),
            row(&[(1, r(1, 1))]),
            row(&[(2, r(1, 1))]),
        ]);
        let goal = PathGoal::Until(vec![true; 3], vec![false, true, false]);
        let opts = SampleOptions {
            samples: 5000,
            seed: 7,
            max_steps: 1000,
        };
        let a = sample_chain(&mc, StateId(0), &goal, &opts);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| sample_chain(&mc, StateId(0), &goal, &opts));
        assert_eq!(a.successes, b.successes);
        assert!(a.contains(0.5));
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }
}
