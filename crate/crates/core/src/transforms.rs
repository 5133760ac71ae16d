//! Instance transformations.
//!
//! A problem instance is `F(x) = T_y(f(T_x(x)))`. The domain map `T_x` is a
//! permutation followed by an XOR mask on bit strings, or a translation followed
//! by a rotation on real vectors. The range map `T_y` is a positive affine map,
//! so it never changes which solutions are optimal.
//!
//! Instance 1 is always the untransformed base function. Higher instance ids draw
//! their parameters from a ChaCha8 generator seeded with [`derive_seed`], so the
//! same `(problem_id, instance_id, n)` always yields the same transform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::problem::Domain;

const CONTINUOUS_SEED_OFFSET: u64 = 500_000_000;
const SCALE_RANGE: (f64, f64) = (0.2, 5.0);
const OFFSET_RANGE: (f64, f64) = (-1000.0, 1000.0);
const SHIFT_RANGE: (f64, f64) = (-4.0, 4.0);
const SINGULAR_TOLERANCE: f64 = 1e-10;

/// Seed for the transform generator of one instance.
///
/// `problem_id * 10^4 + instance_id`, plus `5 * 10^8` for continuous problems.
/// Instance ids above 9999 therefore collide with the next problem id.
pub fn derive_seed(problem_id: u32, instance_id: u32, domain: Domain) -> u64 {
    let base = problem_id as u64 * 10_000 + instance_id as u64;
    match domain {
        Domain::Boolean => base,
        Domain::Continuous => base + CONTINUOUS_SEED_OFFSET,
    }
}

/// `T_x` for bit strings: `y[j] = x[sigma[j]] ^ z[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanTransform {
    xor_mask: Vec<u8>,
    permutation: Vec<usize>,
    identity: bool,
}

impl BooleanTransform {
    pub fn identity(n: usize) -> Self {
        BooleanTransform {
            xor_mask: vec![0; n],
            permutation: (0..n).collect(),
            identity: true,
        }
    }

    pub fn new(xor_mask: Vec<u8>, permutation: Vec<usize>) -> Result<Self> {
        let n = xor_mask.len();
        if permutation.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: permutation.len(),
            });
        }
        if let Some((index, &value)) = xor_mask.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(Error::NonBinary { index, value });
        }
        let mut seen = vec![false; n];
        for &p in &permutation {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameter(format!(
                    "{permutation:?} is not a permutation of 0..{n}"
                )));
            }
            seen[p] = true;
        }
        let identity =
            xor_mask.iter().all(|&b| b == 0) && permutation.iter().enumerate().all(|(i, &p)| i == p);
        Ok(BooleanTransform {
            xor_mask,
            permutation,
            identity,
        })
    }

    /// A transform that only flips the bits set in `mask`.
    pub fn xor_only(mask: Vec<u8>) -> Result<Self> {
        let n = mask.len();
        Self::new(mask, (0..n).collect())
    }

    pub fn dimension(&self) -> usize {
        self.xor_mask.len()
    }

    pub fn xor_mask(&self) -> &[u8] {
        &self.xor_mask
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn apply(&self, x: &[u8]) -> Result<Vec<u8>> {
        let mut out = vec![0; self.dimension()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, x: &[u8], out: &mut [u8]) -> Result<()> {
        let n = self.dimension();
        if x.len() != n || out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if x.len() != n { x.len() } else { out.len() },
            });
        }
        for ((o, &p), &z) in out.iter_mut().zip(&self.permutation).zip(&self.xor_mask) {
            *o = x[p] ^ z;
        }
        Ok(())
    }

    /// The unique `x` with `T_x(x) == target`.
    pub fn preimage(&self, target: &[u8]) -> Result<Vec<u8>> {
        let n = self.dimension();
        if target.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: target.len(),
            });
        }
        let mut x = vec![0; n];
        for j in 0..n {
            x[self.permutation[j]] = target[j] ^ self.xor_mask[j];
        }
        Ok(x)
    }
}

/// `T_x` for real vectors: `R (x - x_opt)`, together with the objective offset `f_opt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTransform {
    shift: Vec<f64>,
    /// Row-major `n x n`.
    rotation: Vec<f64>,
    rotated: bool,
    f_offset: f64,
    identity: bool,
}

impl ContinuousTransform {
    pub fn identity(n: usize) -> Self {
        ContinuousTransform {
            shift: vec![0.0; n],
            rotation: identity_matrix(n),
            rotated: false,
            f_offset: 0.0,
            identity: true,
        }
    }

    /// `rotation` is row-major; pass `None` for no rotation.
    pub fn new(shift: Vec<f64>, rotation: Option<Vec<f64>>, f_offset: f64) -> Result<Self> {
        let n = shift.len();
        let (rotation, rotated) = match rotation {
            Some(r) => {
                if r.len() != n * n {
                    return Err(Error::DimensionMismatch {
                        expected: n * n,
                        got: r.len(),
                    });
                }
                if orthogonality_error(&r, n) > 1e-9 {
                    return Err(Error::InvalidParameter(
                        "rotation matrix is not orthonormal".into(),
                    ));
                }
                (r, true)
            }
            None => (identity_matrix(n), false),
        };
        let identity = !rotated && f_offset == 0.0 && shift.iter().all(|&s| s == 0.0);
        Ok(ContinuousTransform {
            shift,
            rotation,
            rotated,
            f_offset,
            identity,
        })
    }

    pub fn dimension(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn is_rotated(&self) -> bool {
        self.rotated
    }

    pub fn f_offset(&self) -> f64 {
        self.f_offset
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dimension()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dimension();
        if x.len() != n || out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if x.len() != n { x.len() } else { out.len() },
            });
        }
        if self.identity {
            out.copy_from_slice(x);
        } else if !self.rotated {
            for ((o, xi), s) in out.iter_mut().zip(x).zip(&self.shift) {
                *o = xi - s;
            }
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                let row = &self.rotation[i * n..(i + 1) * n];
                *o = row
                    .iter()
                    .zip(x.iter().zip(&self.shift))
                    .map(|(r, (xi, s))| r * (xi - s))
                    .sum();
            }
        }
        Ok(())
    }

    /// The `x` with `T_x(x) == target`, i.e. `x_opt + R^T target`.
    pub fn preimage(&self, target: &[f64]) -> Result<Vec<f64>> {
        let n = self.dimension();
        if target.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: target.len(),
            });
        }
        Ok((0..n)
            .map(|j| {
                let rotated: f64 = if self.rotated {
                    (0..n).map(|i| self.rotation[i * n + j] * target[i]).sum()
                } else {
                    target[j]
                };
                self.shift[j] + rotated
            })
            .collect())
    }
}

/// `T_y(y) = a y + b` with `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeAffine {
    scale: f64,
    offset: f64,
}

impl RangeAffine {
    pub const IDENTITY: RangeAffine = RangeAffine {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn new(scale: f64, offset: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "range transform needs finite a > 0 and finite b, got a={scale}, b={offset}"
            )));
        }
        Ok(RangeAffine { scale, offset })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn apply(&self, y: f64) -> f64 {
        self.scale * y + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainTransform {
    Boolean(BooleanTransform),
    Continuous(ContinuousTransform),
}

/// The `(T_x, T_y)` pair attached to one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceTransform {
    pub domain: DomainTransform,
    pub range: RangeAffine,
}

impl InstanceTransform {
    pub fn identity(domain: Domain, n: usize) -> Self {
        let domain = match domain {
            Domain::Boolean => DomainTransform::Boolean(BooleanTransform::identity(n)),
            Domain::Continuous => DomainTransform::Continuous(ContinuousTransform::identity(n)),
        };
        InstanceTransform {
            domain,
            range: RangeAffine::IDENTITY,
        }
    }

    pub fn domain_kind(&self) -> Domain {
        match self.domain {
            DomainTransform::Boolean(_) => Domain::Boolean,
            DomainTransform::Continuous(_) => Domain::Continuous,
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.domain {
            DomainTransform::Boolean(t) => t.dimension(),
            DomainTransform::Continuous(t) => t.dimension(),
        }
    }

    pub fn is_identity(&self) -> bool {
        let domain_identity = match &self.domain {
            DomainTransform::Boolean(t) => t.is_identity(),
            DomainTransform::Continuous(t) => t.is_identity(),
        };
        domain_identity && self.range == RangeAffine::IDENTITY
    }

    /// Objective offset added after the range map (zero for boolean problems).
    pub fn f_offset(&self) -> f64 {
        match &self.domain {
            DomainTransform::Boolean(_) => 0.0,
            DomainTransform::Continuous(t) => t.f_offset(),
        }
    }

    /// `a y + b + f_opt`.
    pub fn apply_output(&self, y: f64) -> f64 {
        let f_offset = self.f_offset();
        if f_offset == 0.0 {
            self.range.apply(y)
        } else {
            self.range.apply(y) + f_offset
        }
    }
}

/// Boolean instance transform. Instance 1 is the identity; other instances draw a
/// uniform mask, a uniform permutation, `a` log-uniform in `[0.2, 5]` and `b`
/// uniform in `[-1000, 1000]`, in that order.
pub fn make_boolean_transform(problem_id: u32, instance_id: u32, n: usize) -> InstanceTransform {
    if instance_id <= 1 {
        return InstanceTransform::identity(Domain::Boolean, n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(problem_id, instance_id, Domain::Boolean));
    let xor_mask: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.shuffle(&mut rng);
    let scale = rng
        .gen_range(SCALE_RANGE.0.ln()..=SCALE_RANGE.1.ln())
        .exp();
    let offset = rng.gen_range(OFFSET_RANGE.0..=OFFSET_RANGE.1);
    InstanceTransform {
        domain: DomainTransform::Boolean(
            BooleanTransform::new(xor_mask, permutation).expect("generated transform is valid"),
        ),
        range: RangeAffine::new(scale, offset).expect("generated scale is positive"),
    }
}

/// Continuous instance transform. Instance 1 is the identity; other instances draw
/// `x_opt` uniform in `[-4, 4]^n`, `f_opt` uniform in `[-1000, 1000]` rounded to two
/// decimals and, when `use_rotation`, a random orthonormal matrix.
pub fn make_continuous_transform(
    problem_id: u32,
    instance_id: u32,
    n: usize,
    use_rotation: bool,
) -> InstanceTransform {
    if instance_id <= 1 {
        return InstanceTransform::identity(Domain::Continuous, n);
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(problem_id, instance_id, Domain::Continuous));
    let shift: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(SHIFT_RANGE.0..=SHIFT_RANGE.1))
        .collect();
    let f_offset = (rng.gen_range(OFFSET_RANGE.0..=OFFSET_RANGE.1) * 100.0).round() / 100.0;
    let rotation = use_rotation.then(|| random_rotation(n, &mut rng));
    InstanceTransform {
        domain: DomainTransform::Continuous(
            ContinuousTransform::new(shift, rotation, f_offset)
                .expect("generated transform is valid"),
        ),
        range: RangeAffine::IDENTITY,
    }
}

/// Random orthonormal `n x n` matrix (row-major): modified Gram-Schmidt on the rows
/// of a standard normal matrix, redrawn while numerically singular.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut m: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        if modified_gram_schmidt(&mut m, n) {
            return m;
        }
    }
}

/// Orthonormalizes the rows of a row-major `n x n` matrix in place.
/// Returns `false` when a row collapses below the singularity tolerance.
pub fn modified_gram_schmidt(m: &mut [f64], n: usize) -> bool {
    assert_eq!(m.len(), n * n);
    for i in 0..n {
        let (done, rest) = m.split_at_mut(i * n);
        let row = &mut rest[..n];
        for j in 0..i {
            let q = &done[j * n..(j + 1) * n];
            let proj: f64 = row.iter().zip(q).map(|(a, b)| a * b).sum();
            for (r, qk) in row.iter_mut().zip(q) {
                *r -= proj * qk;
            }
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > SINGULAR_TOLERANCE) {
            return false;
        }
        row.iter_mut().for_each(|v| *v /= norm);
    }
    true
}

/// `max |R R^T - I|` over all entries.
pub fn orthogonality_error(r: &[f64], n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = (0..n).map(|k| r[i * n + k] * r[j * n + k]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

fn identity_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn seed_formula() {
        assert_eq!(derive_seed(1, 1, Domain::Boolean), 10001);
        assert_eq!(derive_seed(3, 7, Domain::Boolean), 30007);
        assert_eq!(derive_seed(1, 1, Domain::Continuous), 500010001);
    }

    #[test]
    fn instance_one_is_identity() {
        for n in [1, 5, 32] {
            let t = make_boolean_transform(4, 1, n);
            assert!(t.is_identity());
            assert_eq!(t.range, RangeAffine::IDENTITY);
            let c = make_continuous_transform(10, 1, n, true);
            assert!(c.is_identity());
            match &c.domain {
                DomainTransform::Continuous(ct) => {
                    assert!(ct.shift().iter().all(|&s| s == 0.0));
                    assert_eq!(ct.f_offset(), 0.0);
                    assert_eq!(orthogonality_error(ct.rotation(), n), 0.0);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(make_boolean_transform(1, 2, 40), make_boolean_transform(1, 2, 40));
        assert_eq!(
            make_continuous_transform(10, 4, 6, true),
            make_continuous_transform(10, 4, 6, true)
        );
    }

    #[test]
    fn distinct_instances_differ() {
        let a = make_boolean_transform(1, 2, 32);
        let b = make_boolean_transform(1, 3, 32);
        assert_ne!(a, b);
        let c = make_continuous_transform(1, 2, 5, false);
        let d = make_continuous_transform(1, 3, 5, false);
        assert_ne!(c, d);
    }

    #[test]
    fn generated_parameters_in_range() {
        for inst in 2..40 {
            let t = make_boolean_transform(2, inst, 20);
            assert!(t.range.scale() >= 0.2 && t.range.scale() <= 5.0);
            assert!(t.range.offset().abs() <= 1000.0);
            let c = make_continuous_transform(3, inst, 4, false);
            let DomainTransform::Continuous(ct) = &c.domain else {
                unreachable!()
            };
            assert!(ct.shift().iter().all(|s| s.abs() <= 4.0));
            let cents = ct.f_offset() * 100.0;
            assert!((cents - cents.round()).abs() < 1e-6);
            assert_eq!(c.range, RangeAffine::IDENTITY);
        }
    }

    #[test]
    fn apply_boolean_examples() {
        let t = BooleanTransform::new(vec![0, 1, 1], vec![0, 1, 2]).unwrap();
        assert_eq!(t.apply(&[1, 0, 1]).unwrap(), vec![1, 1, 0]);
        let t = BooleanTransform::new(vec![0, 0, 0], vec![2, 0, 1]).unwrap();
        // [a, b, c] -> [c, a, b]
        assert_eq!(t.apply(&[10, 20, 30]).unwrap(), vec![30, 10, 20]);
        let id = BooleanTransform::identity(4);
        assert_eq!(id.apply(&[1, 0, 0, 1]).unwrap(), vec![1, 0, 0, 1]);
        assert!(matches!(
            id.apply(&[1, 0]),
            Err(Error::DimensionMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn rejects_invalid_permutation() {
        assert!(BooleanTransform::new(vec![0, 0, 0], vec![0, 0, 1]).is_err());
        assert!(BooleanTransform::new(vec![0, 0], vec![0, 2]).is_err());
        assert!(BooleanTransform::new(vec![0, 2], vec![0, 1]).is_err());
    }

    #[test]
    fn apply_range_examples() {
        let r = RangeAffine::new(2.0, 3.0).unwrap();
        assert_eq!(r.apply(5.0), 13.0);
        assert!(RangeAffine::new(0.0, 1.0).is_err());
        assert!(RangeAffine::new(-1.0, 1.0).is_err());
        let id = ContinuousTransform::identity(3);
        assert_eq!(id.apply(&[1.5, -2.0, 3.25]).unwrap(), vec![1.5, -2.0, 3.25]);
    }

    #[test]
    fn gram_schmidt_detects_singular() {
        let mut m = vec![1.0, 2.0, 2.0, 4.0];
        assert!(!modified_gram_schmidt(&mut m, 2));
    }

    #[test]
    fn continuous_preimage_inverts() {
        let t = make_continuous_transform(10, 5, 6, true);
        let DomainTransform::Continuous(ct) = &t.domain else {
            unreachable!()
        };
        let target = [1.0, -2.0, 0.5, 0.0, 3.0, -1.5];
        let x = ct.preimage(&target).unwrap();
        let back = ct.apply(&x).unwrap();
        for (a, b) in back.iter().zip(&target) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn permutation_sorts_to_range(inst in 2u32..500, n in 1usize..64) {
            let t = make_boolean_transform(1, inst, n);
            let DomainTransform::Boolean(bt) = &t.domain else { unreachable!() };
            let mut p = bt.permutation().to_vec();
            p.sort_unstable();
            prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn xor_is_involution(mask in proptest::collection::vec(0u8..=1, 1..40), seed in any::<u64>()) {
            let t = BooleanTransform::xor_only(mask.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<u8> = (0..mask.len()).map(|_| rng.gen_range(0..=1)).collect();
            prop_assert_eq!(t.apply(&t.apply(&x).unwrap()).unwrap(), x);
        }

        #[test]
        fn boolean_preimage_inverts(inst in 2u32..200, n in 1usize..40, seed in any::<u64>()) {
            let t = make_boolean_transform(6, inst, n);
            let DomainTransform::Boolean(bt) = &t.domain else { unreachable!() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
            prop_assert_eq!(bt.apply(&bt.preimage(&target).unwrap()).unwrap(), target);
        }

        #[test]
        fn range_is_monotone(inst in 2u32..300, y1 in -1e4f64..1e4, dy in 1e-3f64..1e3) {
            let t = make_boolean_transform(1, inst, 8);
            prop_assert!(t.range.apply(y1) < t.range.apply(y1 + dy));
        }
    }
}
