//! Baseline solvers used to exercise the pipeline.
//!
//! Every solver stops after `budget` evaluations, or earlier when `stop_on_optimum`
//! is set and the problem reports its optimum as reached.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::logging::Parameters;
use crate::problem::{Domain, ProblemInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub budget: u64,
    pub seed: u64,
    pub stop_on_optimum: bool,
    /// Algorithm-specific overrides, e.g. `mutation_rate` or `sigma0`.
    pub parameters: BTreeMap<String, f64>,
}

impl RunSettings {
    pub fn new(budget: u64, seed: u64) -> Self {
        RunSettings {
            budget,
            seed,
            stop_on_optimum: true,
            parameters: BTreeMap::new(),
        }
    }
}

pub type RunFn = fn(&mut ProblemInstance, &RunSettings, &Parameters) -> Result<()>;

#[derive(Debug, Clone, Copy)]
pub struct AlgorithmEntry {
    pub name: &'static str,
    pub domains: &'static [Domain],
    /// Parameters published for watchers.
    pub exposed: &'static [&'static str],
    /// Keys accepted in [`RunSettings::parameters`].
    pub settings: &'static [&'static str],
    pub run: RunFn,
}

pub const ALGORITHMS: &[AlgorithmEntry] = &[
    AlgorithmEntry {
        name: "random_search",
        domains: &[Domain::Boolean, Domain::Continuous],
        exposed: &[],
        settings: &[],
        run: random_search,
    },
    AlgorithmEntry {
        name: "rls",
        domains: &[Domain::Boolean],
        exposed: &[],
        settings: &[],
        run: rls,
    },
    AlgorithmEntry {
        name: "one_plus_one_ea",
        domains: &[Domain::Boolean],
        exposed: &["mutation_rate"],
        settings: &["mutation_rate"],
        run: one_plus_one_ea,
    },
    AlgorithmEntry {
        name: "one_plus_one_es",
        domains: &[Domain::Continuous],
        exposed: &["sigma"],
        settings: &["sigma0"],
        run: one_plus_one_es,
    },
];

pub fn lookup_algorithm(name: &str) -> Option<&'static AlgorithmEntry> {
    ALGORITHMS.iter().find(|a| a.name == name)
}

fn keep_going(problem: &ProblemInstance, settings: &RunSettings) -> bool {
    problem.state().evaluations < settings.budget
        && !(settings.stop_on_optimum && problem.final_target_hit() == Some(true))
}

fn require(problem: &ProblemInstance, domain: Domain) -> Result<()> {
    if problem.metadata().domain != domain {
        return Err(Error::DomainMismatch { expected: domain });
    }
    Ok(())
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..=1u8)).collect()
}

fn random_point(rng: &mut ChaCha8Rng, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect()
}

/// Independent uniform samples.
pub fn random_search(problem: &mut ProblemInstance, settings: &RunSettings, _: &Parameters) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let n = problem.metadata().dimension;
    let bounds = problem.metadata().bounds.clone();
    while keep_going(problem, settings) {
        match problem.metadata().domain {
            Domain::Boolean => problem.evaluate(&random_bits(&mut rng, n))?,
            Domain::Continuous => problem.evaluate(&random_point(&mut rng, &bounds))?,
        };
    }
    Ok(())
}

/// Random local search from a uniform starting point.
pub fn rls(problem: &mut ProblemInstance, settings: &RunSettings, params: &Parameters) -> Result<()> {
    require(problem, Domain::Boolean)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let x0 = random_bits(&mut rng, problem.metadata().dimension);
    rls_with_rng(problem, settings, params, x0, &mut rng)
}

/// Random local search from `x0`: flip one uniformly chosen bit, keep it unless worse.
pub fn rls_from(
    problem: &mut ProblemInstance,
    settings: &RunSettings,
    params: &Parameters,
    x0: Vec<u8>,
) -> Result<()> {
    require(problem, Domain::Boolean)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rls_with_rng(problem, settings, params, x0, &mut rng)
}

fn rls_with_rng(
    problem: &mut ProblemInstance,
    settings: &RunSettings,
    _: &Parameters,
    mut x: Vec<u8>,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let n = problem.metadata().dimension;
    let direction = problem.metadata().direction;
    if !keep_going(problem, settings) {
        return Ok(());
    }
    let mut fx = problem.evaluate(&x)?;
    while keep_going(problem, settings) {
        let i = rng.gen_range(0..n);
        x[i] ^= 1;
        let fy = problem.evaluate(&x)?;
        if direction.is_not_worse(fy, fx) {
            fx = fy;
        } else {
            x[i] ^= 1;
        }
    }
    Ok(())
}

/// (1+1) EA with standard bit mutation; offspring identical to the parent are resampled.
pub fn one_plus_one_ea(problem: &mut ProblemInstance, settings: &RunSettings, params: &Parameters) -> Result<()> {
    require(problem, Domain::Boolean)?;
    let n = problem.metadata().dimension;
    let direction = problem.metadata().direction;
    let rate = settings
        .parameters
        .get("mutation_rate")
        .copied()
        .unwrap_or(1.0 / n as f64);
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mutation_rate must be in (0, 1], got {rate}"
        )));
    }
    let flips = Binomial::new(n as u64, rate)
        .map_err(|e| Error::InvalidParameter(format!("mutation_rate: {e}")))?;
    params.set("mutation_rate", rate);

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut x = random_bits(&mut rng, n);
    if !keep_going(problem, settings) {
        return Ok(());
    }
    let mut fx = problem.evaluate(&x)?;
    while keep_going(problem, settings) {
        let k = loop {
            let k = flips.sample(&mut rng) as usize;
            if k > 0 {
                break k;
            }
        };
        let mut y = x.clone();
        for i in index::sample(&mut rng, n, k) {
            y[i] ^= 1;
        }
        let fy = problem.evaluate(&y)?;
        if direction.is_not_worse(fy, fx) {
            x = y;
            fx = fy;
        }
    }
    Ok(())
}

const ES_UP: f64 = 1.5;
const ES_MIN_SIGMA: f64 = 1e-12;

/// (1+1) ES with Gaussian mutation and the 1/5th success rule: the step size grows by
/// 1.5 after a strict improvement and shrinks by `1.5^(-1/4)` otherwise.
pub fn one_plus_one_es(problem: &mut ProblemInstance, settings: &RunSettings, params: &Parameters) -> Result<()> {
    require(problem, Domain::Continuous)?;
    let bounds = problem.metadata().bounds.clone();
    let direction = problem.metadata().direction;
    let width = bounds.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / bounds.len() as f64;
    let mut sigma = settings
        .parameters
        .get("sigma0")
        .copied()
        .unwrap_or(0.3 * width);
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma0 must be > 0, got {sigma}")));
    }
    let down = ES_UP.powf(-0.25);

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut x = random_point(&mut rng, &bounds);
    if !keep_going(problem, settings) {
        return Ok(());
    }
    params.set("sigma", sigma);
    let mut fx = problem.evaluate(&x)?;
    while keep_going(problem, settings) {
        let y: Vec<f64> = x
            .iter()
            .map(|xi| xi + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        params.set("sigma", sigma);
        let fy = problem.evaluate(&y)?;
        if direction.is_better(fy, fx) {
            sigma *= ES_UP;
        } else {
            sigma *= down;
        }
        sigma = sigma.clamp(ES_MIN_SIGMA, width);
        if direction.is_not_worse(fy, fx) {
            x = y;
            fx = fy;
        }
    }
    Ok(())
}
