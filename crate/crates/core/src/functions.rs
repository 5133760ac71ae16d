//! Base functions and the problem registry.
//!
//! Boolean catalog (maximization):
//!
//! | id | name | construction |
//! |----|------|--------------|
//! | 1 | OneMax | number of ones |
//! | 2 | LeadingOnes | length of the all-ones prefix |
//! | 3 | LinearHarmonic | `sum i * x_i`, 1-based |
//! | 4 | OneMaxDummy | W-model dummy layer, `m = ceil(0.9 n)` |
//! | 5 | OneMaxNeutrality | W-model neutrality layer, `mu = 3` |
//! | 6 | OneMaxEpistasisRuggedness | W-model epistasis `nu = 4` plus ruggedness |
//!
//! Continuous catalog (minimization, bounds `[-5, 5]`), numbered after BBOB:
//! 1 Sphere, 2 Ellipsoid, 3 Rastrigin, 8 Rosenbrock, 10 RotatedEllipsoid.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{
    Direction, Domain, Objective, Optimum, ProblemInstance, ProblemMetadata, Solution,
};
use crate::transforms::{
    derive_seed, make_boolean_transform, make_continuous_transform, DomainTransform,
};

pub const CONTINUOUS_BOUNDS: (f64, f64) = (-5.0, 5.0);

const EPISTASIS_MULTIPLIER: u64 = 5;
const EPISTASIS_INCREMENT: u64 = 1;

pub fn onemax(x: &[u8]) -> f64 {
    x.iter().filter(|&&b| b == 1).count() as f64
}

pub fn leading_ones(x: &[u8]) -> f64 {
    x.iter().take_while(|&&b| b == 1).count() as f64
}

pub fn linear_harmonic(x: &[u8]) -> f64 {
    x.iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(i, _)| (i + 1) as f64)
        .sum()
}

/// Positions kept by the dummy layer: `m` of `0..n` drawn without replacement, ascending.
pub fn dummy_positions(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m < 1 || m > n {
        return Err(Error::InvalidParameter(format!(
            "dummy layer needs 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = rand::seq::index::sample(&mut rng, n, m).into_vec();
    positions.sort_unstable();
    Ok(positions)
}

pub fn w_dummy(x: &[u8], m: usize, seed: u64) -> Result<Vec<u8>> {
    Ok(dummy_positions(x.len(), m, seed)?
        .into_iter()
        .map(|p| x[p])
        .collect())
}

/// Majority bit of each full block of `mu` bits; ties give 0, a partial tail is dropped.
pub fn w_neutrality(x: &[u8], mu: usize) -> Vec<u8> {
    assert!(mu >= 1, "neutrality block size must be >= 1");
    x.chunks_exact(mu)
        .map(|block| {
            let ones = block.iter().filter(|&&b| b == 1).count();
            u8::from(2 * ones > mu)
        })
        .collect()
}

/// Block map of the epistasis layer: `(5 v + 1) mod 2^nu`.
pub fn epistasis_block(v: u64, nu: usize) -> u64 {
    let mask = if nu >= 64 { u64::MAX } else { (1u64 << nu) - 1 };
    (EPISTASIS_MULTIPLIER.wrapping_mul(v).wrapping_add(EPISTASIS_INCREMENT)) & mask
}

/// Applies [`epistasis_block`] to every full block of `nu` bits (first bit most
/// significant); a partial tail passes through unchanged.
pub fn w_epistasis(x: &[u8], nu: usize) -> Vec<u8> {
    assert!((1..64).contains(&nu), "epistasis block size must be in 1..64");
    let mut out = x.to_vec();
    for block in out.chunks_exact_mut(nu) {
        let v = block.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        let mapped = epistasis_block(v, nu);
        for (k, bit) in block.iter_mut().enumerate() {
            *bit = ((mapped >> (nu - 1 - k)) & 1) as u8;
        }
    }
    out
}

/// Optimum-preserving permutation of `{0..n}`: `n` is fixed, and below it adjacent
/// pairs `(n-1, n-2), (n-3, n-4), ...` are swapped. A leftover 0 maps to itself.
pub fn w_ruggedness(y: usize, n: usize) -> Result<usize> {
    if y > n {
        return Err(Error::InvalidParameter(format!(
            "ruggedness input {y} outside 0..={n}"
        )));
    }
    if y == n {
        return Ok(n);
    }
    let depth = n - 1 - y;
    Ok(if depth % 2 == 0 {
        if y == 0 {
            0
        } else {
            y - 1
        }
    } else {
        y + 1
    })
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn ellipsoid_weight(i: usize, n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        10f64.powf(6.0 * i as f64 / (n - 1) as f64)
    }
}

pub fn ellipsoid(x: &[f64]) -> f64 {
    let n = x.len();
    x.iter()
        .enumerate()
        .map(|(i, v)| ellipsoid_weight(i, n) * v * v)
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

/// Layer configuration of a W-model function built on OneMax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WModelParams {
    /// Number of bits kept by the dummy layer (`m == n` keeps all).
    pub dummy_m: usize,
    pub dummy_seed: u64,
    /// Neutrality block size (`1` is the identity).
    pub neutrality_mu: usize,
    /// Epistasis block size; `None` skips the layer.
    pub epistasis_nu: Option<usize>,
    pub ruggedness: bool,
}

impl WModelParams {
    pub fn identity(n: usize) -> Self {
        WModelParams {
            dummy_m: n,
            dummy_seed: 0,
            neutrality_mu: 1,
            epistasis_nu: None,
            ruggedness: false,
        }
    }
}

/// OneMax composed with dummy, neutrality, epistasis and ruggedness layers, in that order.
#[derive(Debug, Clone)]
pub struct WModel {
    n: usize,
    params: WModelParams,
    positions: Vec<usize>,
    reduced_len: usize,
}

impl WModel {
    pub fn new(n: usize, params: WModelParams) -> Result<Self> {
        let positions = dummy_positions(n, params.dummy_m, params.dummy_seed)?;
        if params.neutrality_mu < 1 {
            return Err(Error::InvalidParameter(
                "neutrality block size must be >= 1".into(),
            ));
        }
        if let Some(nu) = params.epistasis_nu {
            if !(1..64).contains(&nu) {
                return Err(Error::InvalidParameter(format!(
                    "epistasis block size must be in 1..64, got {nu}"
                )));
            }
        }
        let reduced_len = params.dummy_m / params.neutrality_mu;
        if reduced_len < 1 {
            return Err(Error::InvalidParameter(format!(
                "W-model with n={n}, m={}, mu={} leaves no bits",
                params.dummy_m, params.neutrality_mu
            )));
        }
        Ok(WModel {
            n,
            params,
            positions,
            reduced_len,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Optimal value: the bit count after dummy and neutrality.
    pub fn optimum_value(&self) -> f64 {
        self.reduced_len as f64
    }

    pub fn evaluate(&self, x: &[u8]) -> f64 {
        let kept: Vec<u8> = self.positions.iter().map(|&p| x[p]).collect();
        let neutral = if self.params.neutrality_mu > 1 {
            w_neutrality(&kept, self.params.neutrality_mu)
        } else {
            kept
        };
        let mixed = match self.params.epistasis_nu {
            Some(nu) => w_epistasis(&neutral, nu),
            None => neutral,
        };
        let count = onemax(&mixed) as usize;
        if self.params.ruggedness {
            w_ruggedness(count, self.reduced_len).expect("count within range") as f64
        } else {
            count as f64
        }
    }

    /// A bit string attaining [`Self::optimum_value`].
    pub fn optimal_solution(&self) -> Vec<u8> {
        let mut reduced = vec![1u8; self.reduced_len];
        if let Some(nu) = self.params.epistasis_nu {
            let all_ones = (1u64 << nu) - 1;
            let source = (0..1u64 << nu)
                .find(|&v| epistasis_block(v, nu) == all_ones)
                .expect("epistasis block map is a bijection");
            for block in reduced.chunks_exact_mut(nu) {
                for (k, bit) in block.iter_mut().enumerate() {
                    *bit = ((source >> (nu - 1 - k)) & 1) as u8;
                }
            }
        }
        let mu = self.params.neutrality_mu;
        let mut kept = vec![0u8; self.params.dummy_m];
        for (i, &b) in reduced.iter().enumerate() {
            kept[i * mu..(i + 1) * mu].fill(b);
        }
        let mut x = vec![1u8; self.n];
        for (&p, &b) in self.positions.iter().zip(&kept) {
            x[p] = b;
        }
        x
    }
}

type Constructor = Arc<dyn Fn(u32, usize) -> Result<ProblemInstance> + Send + Sync>;
type RawOptimum = Arc<dyn Fn(usize) -> Result<Option<Optimum>> + Send + Sync>;

/// A registered base function and how to build its instances.
#[derive(Clone)]
pub struct FunctionEntry {
    pub problem_id: u32,
    pub name: String,
    pub domain: Domain,
    constructor: Constructor,
    raw_optimum: RawOptimum,
}

impl fmt::Debug for FunctionEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionEntry")
            .field("problem_id", &self.problem_id)
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl FunctionEntry {
    pub fn new(
        problem_id: u32,
        name: impl Into<String>,
        domain: Domain,
        constructor: impl Fn(u32, usize) -> Result<ProblemInstance> + Send + Sync + 'static,
        raw_optimum: impl Fn(usize) -> Result<Option<Optimum>> + Send + Sync + 'static,
    ) -> Self {
        FunctionEntry {
            problem_id,
            name: name.into(),
            domain,
            constructor: Arc::new(constructor),
            raw_optimum: Arc::new(raw_optimum),
        }
    }

    /// A boolean maximization function with the standard instance transforms.
    /// `base` builds the function and its untransformed optimum for dimension `n`.
    pub fn transformed_boolean<F, B>(problem_id: u32, name: &str, base: B) -> Self
    where
        F: Fn(&[u8]) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> Result<(F, Optimum)> + Send + Sync + 'static,
    {
        let base = Arc::new(base);
        let name_owned = name.to_string();
        let base_for_optimum = base.clone();
        FunctionEntry::new(
            problem_id,
            name,
            Domain::Boolean,
            move |instance_id, n| {
                let (f, raw) = base(n)?;
                let transform = make_boolean_transform(problem_id, instance_id, n);
                let DomainTransform::Boolean(bt) = &transform.domain else {
                    unreachable!("boolean transform")
                };
                let x = match &raw.x {
                    Some(Solution::Bits(b)) => Some(Solution::Bits(bt.preimage(b)?)),
                    _ => None,
                };
                let optimum = Optimum {
                    y: transform.apply_output(raw.y),
                    x,
                };
                let metadata = ProblemMetadata {
                    problem_id,
                    name: name_owned.clone(),
                    dimension: n,
                    instance_id,
                    direction: Direction::Maximize,
                    domain: Domain::Boolean,
                    bounds: vec![(0.0, 1.0); n],
                };
                ProblemInstance::new(metadata, Objective::bits(f), transform, Some(optimum))
            },
            move |n| base_for_optimum(n).map(|(_, o)| Some(o)),
        )
    }

    /// A continuous minimization function on `[-5, 5]^n` with the standard instance transforms.
    pub fn transformed_continuous(
        problem_id: u32,
        name: &str,
        f: fn(&[f64]) -> f64,
        raw_argmin: fn(usize) -> Vec<f64>,
        use_rotation: bool,
    ) -> Self {
        let name_owned = name.to_string();
        FunctionEntry::new(
            problem_id,
            name,
            Domain::Continuous,
            move |instance_id, n| {
                if n < 1 {
                    return Err(Error::InvalidParameter("dimension must be >= 1".into()));
                }
                let transform = make_continuous_transform(problem_id, instance_id, n, use_rotation);
                let DomainTransform::Continuous(ct) = &transform.domain else {
                    unreachable!("continuous transform")
                };
                let argmin = raw_argmin(n);
                let optimum = Optimum {
                    y: transform.apply_output(f(&argmin)),
                    x: Some(Solution::Reals(ct.preimage(&argmin)?)),
                };
                let metadata = ProblemMetadata {
                    problem_id,
                    name: name_owned.clone(),
                    dimension: n,
                    instance_id,
                    direction: Direction::Minimize,
                    domain: Domain::Continuous,
                    bounds: vec![CONTINUOUS_BOUNDS; n],
                };
                ProblemInstance::new(metadata, Objective::reals(f), transform, Some(optimum))
            },
            move |n| {
                let x = raw_argmin(n);
                Ok(Some(Optimum {
                    y: f(&x),
                    x: Some(Solution::Reals(x)),
                }))
            },
        )
    }

    pub fn construct(&self, instance_id: u32, dimension: usize) -> Result<ProblemInstance> {
        if instance_id < 1 {
            return Err(Error::InvalidParameter("instance id must be >= 1".into()));
        }
        if dimension < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let instance = (self.constructor)(instance_id, dimension)?;
        if instance.metadata().dimension != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: instance.metadata().dimension,
            });
        }
        Ok(instance)
    }

    /// Optimum of the untransformed function in dimension `n`.
    pub fn raw_optimum(&self, dimension: usize) -> Result<Option<Optimum>> {
        (self.raw_optimum)(dimension)
    }
}

fn all_ones_optimum(n: usize, y: f64) -> Optimum {
    Optimum {
        y,
        x: Some(Solution::Bits(vec![1; n])),
    }
}

fn wmodel_entry(problem_id: u32, name: &str, params: fn(usize, u64) -> WModelParams) -> FunctionEntry {
    let seed = derive_seed(problem_id, 1, Domain::Boolean);
    FunctionEntry::transformed_boolean(problem_id, name, move |n| {
        let model = WModel::new(n, params(n, seed))?;
        let optimum = Optimum {
            y: model.optimum_value(),
            x: Some(Solution::Bits(model.optimal_solution())),
        };
        Ok((move |x: &[u8]| model.evaluate(x), optimum))
    })
}

fn origin(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

fn ones(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// Catalog of functions keyed by `(domain, problem_id)`.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: BTreeMap<(Domain, u32), FunctionEntry>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// Registry holding the built-in boolean and continuous catalogs.
    pub fn with_defaults() -> Self {
        let mut r = Registry::empty();
        let builtins = [
            FunctionEntry::transformed_boolean(1, "OneMax", |n| {
                Ok((onemax, all_ones_optimum(n, n as f64)))
            }),
            FunctionEntry::transformed_boolean(2, "LeadingOnes", |n| {
                Ok((leading_ones, all_ones_optimum(n, n as f64)))
            }),
            FunctionEntry::transformed_boolean(3, "LinearHarmonic", |n| {
                Ok((linear_harmonic, all_ones_optimum(n, (n * (n + 1) / 2) as f64)))
            }),
            wmodel_entry(4, "OneMaxDummy", |n, seed| WModelParams {
                dummy_m: (9 * n).div_ceil(10),
                dummy_seed: seed,
                ..WModelParams::identity(n)
            }),
            wmodel_entry(5, "OneMaxNeutrality", |n, _| WModelParams {
                neutrality_mu: 3,
                ..WModelParams::identity(n)
            }),
            wmodel_entry(6, "OneMaxEpistasisRuggedness", |n, _| WModelParams {
                epistasis_nu: Some(4),
                ruggedness: true,
                ..WModelParams::identity(n)
            }),
            FunctionEntry::transformed_continuous(1, "Sphere", sphere, origin, false),
            FunctionEntry::transformed_continuous(2, "Ellipsoid", ellipsoid, origin, false),
            FunctionEntry::transformed_continuous(3, "Rastrigin", rastrigin, origin, false),
            FunctionEntry::transformed_continuous(8, "Rosenbrock", rosenbrock, ones, false),
            FunctionEntry::transformed_continuous(10, "RotatedEllipsoid", ellipsoid, origin, true),
        ];
        for entry in builtins {
            r.register(entry).expect("built-in ids are unique");
        }
        r
    }

    pub fn register(&mut self, entry: FunctionEntry) -> Result<()> {
        let key = (entry.domain, entry.problem_id);
        if entry.problem_id < 1 {
            return Err(Error::InvalidParameter("problem id must be >= 1".into()));
        }
        if self.entries.contains_key(&key) {
            return Err(Error::DuplicateProblem {
                id: entry.problem_id,
                domain: entry.domain,
            });
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn lookup(&self, problem_id: u32, domain: Domain) -> Result<&FunctionEntry> {
        self.entries
            .get(&(domain, problem_id))
            .ok_or(Error::UnknownProblem {
                id: problem_id,
                domain,
            })
    }

    pub fn ids(&self, domain: Domain) -> Vec<u32> {
        self.entries
            .keys()
            .filter(|(d, _)| *d == domain)
            .map(|&(_, id)| id)
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionEntry> {
        self.entries.values()
    }

    pub fn create(
        &self,
        domain: Domain,
        problem_id: u32,
        instance_id: u32,
        dimension: usize,
    ) -> Result<ProblemInstance> {
        self.lookup(problem_id, domain)?
            .construct(instance_id, dimension)
    }
}
