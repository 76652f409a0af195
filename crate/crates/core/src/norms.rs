//! Partition-and-weight norms and the reference norms they are compared against.
//!
//! For a partition `P = {N_i}` of the index set and weights `w_j ∈ (0, 1]`,
//!
//! ```text
//! ‖a‖_{P,W} = ( Σ_i ( Σ_{j ∈ N_i} a_j² w_j² )^{p/2} )^{1/p}
//! ```
//!
//! and a family norm is the supremum of these over a family of pairs. All
//! sequences are finite; zero-padding leaves every quantity unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stepfn::{linear_combination, StepFunction};

pub(crate) fn check_p_above_two<T: Real>(p: T) -> Result<()> {
    if !(p > T::lit(2.0)) || !p.is_finite() {
        return Err(Error::InvalidExponent {
            value: p.to_f64().unwrap_or(f64::NAN),
            reason: "exponent must satisfy 2 < p < inf",
        });
    }
    Ok(())
}

fn check_p_at_least_one<T: Real>(p: T) -> Result<()> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::InvalidExponent {
            value: p.to_f64().unwrap_or(f64::NAN),
            reason: "exponent must satisfy 1 <= p < inf",
        });
    }
    Ok(())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[derive(Deserialize)]
struct RawCoefficients<T> {
    a: Vec<T>,
}

/// Finite coefficient sequence `(a_1, ..., a_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficients<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Coefficients<T> {
    a: Vec<T>,
}

impl<T: Real> TryFrom<RawCoefficients<T>> for Coefficients<T> {
    type Error = Error;
    fn try_from(raw: RawCoefficients<T>) -> Result<Self> {
        Self::new(raw.a)
    }
}

impl<T: Real> Coefficients<T> {
    pub fn new(a: Vec<T>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficients"));
        }
        Ok(Self { a })
    }

    /// The `n`-th standard unit vector of length `len`.
    pub fn unit(len: usize, n: usize) -> Result<Self> {
        let mut a = vec![T::zero(); len];
        *a.get_mut(n).ok_or(Error::DimensionMismatch { expected: len, found: n + 1 })? = T::one();
        Self::new(a)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn entries(&self) -> &[T] {
        &self.a
    }

    pub fn scaled(&self, t: T) -> Result<Self> {
        Self::new(self.a.iter().map(|&v| v * t).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|v| *v == T::zero())
    }
}

#[derive(Serialize, Deserialize)]
struct RawPartition {
    blocks: Vec<Vec<usize>>,
}

/// Partition of `{0, ..., N-1}` into non-empty disjoint blocks.
///
/// Serialized with 1-based indices: `{"blocks": [[1, 2], [3]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition", into = "RawPartition")]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    len: usize,
}

impl TryFrom<RawPartition> for Partition {
    type Error = Error;
    fn try_from(raw: RawPartition) -> Result<Self> {
        let mut blocks = Vec::with_capacity(raw.blocks.len());
        for block in raw.blocks {
            let mut zero_based = Vec::with_capacity(block.len());
            for j in block {
                if j == 0 {
                    return Err(Error::InvalidPartition("indices are 1-based".into()));
                }
                zero_based.push(j - 1);
            }
            blocks.push(zero_based);
        }
        let len = blocks.iter().map(Vec::len).sum();
        Partition::new(blocks, len)
    }
}

impl From<Partition> for RawPartition {
    fn from(p: Partition) -> Self {
        RawPartition { blocks: p.blocks.into_iter().map(|b| b.into_iter().map(|j| j + 1).collect()).collect() }
    }
}

impl Partition {
    /// Validates that `blocks` (0-based) is an exact cover of `0..len` by
    /// non-empty disjoint blocks.
    pub fn new(blocks: Vec<Vec<usize>>, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidPartition("index set is empty".into()));
        }
        let mut seen = vec![false; len];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &j in block {
                match seen.get_mut(j) {
                    None => return Err(Error::InvalidPartition(format!("index {} outside 1..={len}", j + 1))),
                    Some(true) => return Err(Error::InvalidPartition(format!("index {} appears twice", j + 1))),
                    Some(s) => *s = true,
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {} not covered", missing + 1)));
        }
        Ok(Self { blocks, len })
    }

    /// The single-block partition `P_I`.
    pub fn trivial(len: usize) -> Result<Self> {
        Self::new(vec![(0..len).collect()], len)
    }

    /// The all-singletons partition `P_D`.
    pub fn discrete(len: usize) -> Result<Self> {
        Self::new((0..len).map(|j| vec![j]).collect(), len)
    }

    /// Consecutive blocks of the given sizes.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let b: Vec<usize> = (start..start + s).collect();
                start += s;
                b
            })
            .collect();
        Self::new(blocks, start)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

#[derive(Deserialize)]
struct RawWeights<T> {
    w: Vec<T>,
}

/// Weight vector with every entry in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Weights<T> {
    w: Vec<T>,
}

impl<T: Real> TryFrom<RawWeights<T>> for Weights<T> {
    type Error = Error;
    fn try_from(raw: RawWeights<T>) -> Result<Self> {
        Self::new(raw.w)
    }
}

impl<T: Real> Weights<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptyInput("weights"));
        }
        for (index, &v) in w.iter().enumerate() {
            if !(v > T::zero() && v <= T::one()) {
                return Err(Error::InvalidWeight { index, value: v.to_f64().unwrap_or(f64::NAN) });
            }
        }
        Ok(Self { w })
    }

    pub fn ones(len: usize) -> Result<Self> {
        Self::new(vec![T::one(); len])
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.w
    }
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
struct RawPair<T> {
    partition: Partition,
    weights: Weights<T>,
}

/// One `(P, W)` pair over a common index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PWPair<T: Real> {
    partition: Partition,
    weights: Weights<T>,
}

impl<T: Real> TryFrom<RawPair<T>> for PWPair<T> {
    type Error = Error;
    fn try_from(raw: RawPair<T>) -> Result<Self> {
        Self::new(raw.partition, raw.weights)
    }
}

impl<T: Real> PWPair<T> {
    pub fn new(partition: Partition, weights: Weights<T>) -> Result<Self> {
        check_dim(partition.len(), weights.len())?;
        Ok(Self { partition, weights })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partition.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
struct RawFamily<T: Real> {
    pairs: Vec<PWPair<T>>,
}

/// Non-empty finite family of pairs sharing one index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Family<T: Real> {
    pairs: Vec<PWPair<T>>,
}

impl<T: Real> TryFrom<RawFamily<T>> for Family<T> {
    type Error = Error;
    fn try_from(raw: RawFamily<T>) -> Result<Self> {
        Self::new(raw.pairs)
    }
}

impl<T: Real> Family<T> {
    pub fn new(pairs: Vec<PWPair<T>>) -> Result<Self> {
        let first = pairs.first().ok_or(Error::EmptyFamily)?;
        let n = first.len();
        for pair in &pairs[1..] {
            check_dim(n, pair.len())?;
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[PWPair<T>] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Size of the shared index set.
    pub fn dim(&self) -> usize {
        self.pairs[0].len()
    }

    /// Appends a pair; the result is again a valid family.
    pub fn push(&mut self, pair: PWPair<T>) -> Result<()> {
        check_dim(self.dim(), pair.len())?;
        self.pairs.push(pair);
        Ok(())
    }
}

/// Structural facts declared for a basis sequence. `normalized` and
/// `disjoint_supports` are checked on construction; `independent` and `haar`
/// are guaranteed by the generators that set them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisTags {
    pub disjoint_supports: bool,
    pub independent: bool,
    pub haar: bool,
    pub normalized: bool,
}

/// Which generator produced a basis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    #[default]
    Explicit,
    Indicators,
    DisjointlySupported,
    IndicatorRademacherGrid,
    Independent,
    Rademacher,
    Haar,
}

/// Finite sequence `(x_n)` of step functions in `L_p`, together with `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisSequence<T: Real> {
    functions: Vec<StepFunction<T>>,
    p: T,
    tags: BasisTags,
    kind: BasisKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<usize>>,
}

impl<T: Real> BasisSequence<T> {
    pub fn new(functions: Vec<StepFunction<T>>, p: T, tags: BasisTags) -> Result<Self> {
        check_p_above_two(p)?;
        if functions.is_empty() {
            return Err(Error::EmptyInput("basis functions"));
        }
        if tags.normalized {
            for f in &functions {
                let norm = f.lp_norm(p)?;
                if (norm - T::one()).abs() > T::validation_tol() {
                    return Err(Error::NotNormalized { norm: norm.to_f64().unwrap_or(f64::NAN) });
                }
            }
        }
        if tags.disjoint_supports {
            check_disjoint_supports(&functions)?;
        }
        Ok(Self { functions, p, tags, kind: BasisKind::Explicit, groups: None })
    }

    pub(crate) fn with_kind(mut self, kind: BasisKind) -> Self {
        self.kind = kind;
        self
    }

    /// Records a grouping of consecutive basis functions (sizes must sum to `len`).
    pub fn with_groups(mut self, sizes: Vec<usize>) -> Result<Self> {
        check_dim(self.len(), sizes.iter().sum())?;
        if sizes.contains(&0) {
            return Err(Error::InvalidPartition("empty group".into()));
        }
        self.groups = Some(sizes);
        Ok(self)
    }

    pub fn functions(&self) -> &[StepFunction<T>] {
        &self.functions
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn tags(&self) -> BasisTags {
        self.tags
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn groups(&self) -> Option<&[usize]> {
        self.groups.as_deref()
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Finest grid level among the basis functions.
    pub fn level(&self) -> u32 {
        self.functions.iter().map(StepFunction::level).max().unwrap_or(0)
    }

    pub fn require(&self, tag: &'static str) -> Result<()> {
        let present = match tag {
            "disjoint_supports" => self.tags.disjoint_supports,
            "independent" => self.tags.independent,
            "haar" => self.tags.haar,
            "normalized" => self.tags.normalized,
            _ => false,
        };
        if present {
            Ok(())
        } else {
            Err(Error::MissingTag(tag))
        }
    }
}

pub(crate) fn check_disjoint_supports<T: Real>(functions: &[StepFunction<T>]) -> Result<()> {
    let level = functions.iter().map(StepFunction::level).max().unwrap_or(0);
    let mut owner: Vec<Option<usize>> = vec![None; 1usize << level];
    for (n, f) in functions.iter().enumerate() {
        let factor = 1usize << (level - f.level());
        for k in f.support_cells() {
            for slot in &mut owner[k * factor..(k + 1) * factor] {
                if let Some(m) = *slot {
                    return Err(Error::OverlappingSupports(m, n));
                }
                *slot = Some(n);
            }
        }
    }
    Ok(())
}

/// `‖a‖_{P,W}` for one pair.
pub fn pw_norm<T: Real>(a: &Coefficients<T>, pair: &PWPair<T>, p: T) -> Result<T> {
    check_p_above_two(p)?;
    check_dim(pair.len(), a.len())?;
    let half_p = p / T::lit(2.0);
    let w = pair.weights.values();
    let outer: T = pair
        .partition
        .blocks()
        .iter()
        .map(|block| {
            let inner: T = block.iter().map(|&j| (a.a[j] * w[j]).powi(2)).sum();
            inner.powf(half_p)
        })
        .sum();
    Ok(outer.powf(p.recip()))
}

/// `sup_k ‖a‖_{P_k,W_k}` over a finite family.
pub fn family_norm<T: Real>(a: &Coefficients<T>, fam: &Family<T>, p: T) -> Result<T> {
    Ok(family_norm_breakdown(a, fam, p)?.into_iter().fold(T::zero(), T::max))
}

/// Value of every pair in the family, in family order.
pub fn family_norm_breakdown<T: Real>(a: &Coefficients<T>, fam: &Family<T>, p: T) -> Result<Vec<T>> {
    if fam.is_empty() {
        return Err(Error::EmptyFamily);
    }
    fam.pairs.iter().map(|pair| pw_norm(a, pair, p)).collect()
}

/// `(Σ|a_n|^p)^{1/p}`.
pub fn ell_p_norm<T: Real>(a: &Coefficients<T>, p: T) -> Result<T> {
    check_p_at_least_one(p)?;
    Ok(a.a.iter().map(|v| v.abs().powf(p)).sum::<T>().powf(p.recip()))
}

/// The `(Σ ℓ_2)_{ℓ_p}` norm `(Σ_n (Σ_j a_{n,j}²)^{p/2})^{1/p}`.
pub fn mixed_norm<T: Real>(groups: &[Coefficients<T>], p: T) -> Result<T> {
    check_p_above_two(p)?;
    if groups.is_empty() {
        return Err(Error::EmptyInput("groups"));
    }
    let half_p = p / T::lit(2.0);
    let outer: T = groups.iter().map(|g| g.a.iter().map(|v| v.powi(2)).sum::<T>().powf(half_p)).sum();
    Ok(outer.powf(p.recip()))
}

/// Splits a flat coefficient vector into consecutive groups of the given sizes.
pub fn split_groups<T: Real>(a: &Coefficients<T>, sizes: &[usize]) -> Result<Vec<Coefficients<T>>> {
    check_dim(a.len(), sizes.iter().sum())?;
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let g = Coefficients::new(a.a[start..start + s].to_vec());
            start += s;
            g
        })
        .collect()
}

/// The step function `Σ a_n² x_n²`.
pub fn square_function<T: Real>(a: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<StepFunction<T>> {
    check_dim(basis.len(), a.len())?;
    let sq: Vec<T> = a.a.iter().map(|v| v.powi(2)).collect();
    linear_combination(&basis.functions, &sq, |x| x * x)
}

/// `‖Σ a_n² x_n²‖_{p/2}^{1/2}`, evaluated by exact step-function integration.
pub fn square_function_norm<T: Real>(a: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<T> {
    let f = square_function(a, basis)?;
    Ok(f.lp_norm(basis.p / T::lit(2.0))?.sqrt())
}

/// The expansion `Σ a_n x_n`.
pub fn expansion<T: Real>(a: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<StepFunction<T>> {
    check_dim(basis.len(), a.len())?;
    linear_combination(&basis.functions, &a.a, |x| x)
}

/// `‖Σ a_n x_n‖_p`.
pub fn expansion_norm<T: Real>(a: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<T> {
    expansion(a, basis)?.lp_norm(basis.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coeffs(a: &[f64]) -> Coefficients<f64> {
        Coefficients::new(a.to_vec()).unwrap()
    }

    fn pair(blocks: Vec<Vec<usize>>, w: &[f64]) -> PWPair<f64> {
        PWPair::new(Partition::new(blocks, w.len()).unwrap(), Weights::new(w.to_vec()).unwrap()).unwrap()
    }

    fn half_indicators() -> BasisSequence<f64> {
        let c = 2f64.powf(0.25);
        BasisSequence::new(
            vec![StepFunction::new(1, vec![c, 0.0]).unwrap(), StepFunction::new(1, vec![0.0, c]).unwrap()],
            4.0,
            BasisTags { disjoint_supports: true, normalized: true, ..Default::default() },
        )
        .unwrap()
    }

    fn rademachers() -> BasisSequence<f64> {
        BasisSequence::new(
            vec![
                StepFunction::new(1, vec![1.0, -1.0]).unwrap(),
                StepFunction::new(2, vec![1.0, -1.0, 1.0, -1.0]).unwrap(),
            ],
            4.0,
            BasisTags { independent: true, normalized: true, ..Default::default() },
        )
        .unwrap()
    }

    #[test]
    fn pw_norm_hand_values() {
        // ((9+16)^2 + 4^2)^(1/4) = 641^(1/4)
        let v = pw_norm(&coeffs(&[3.0, 4.0, 2.0]), &pair(vec![vec![0, 1], vec![2]], &[1.0; 3]), 4.0).unwrap();
        assert_relative_eq!(v, 641f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(v, 5.0316, epsilon = 1e-4);

        for p in [2.5, 3.0, 4.0, 10.0] {
            let v = pw_norm(&coeffs(&[5.0]), &pair(vec![vec![0]], &[1.0]), p).unwrap();
            assert_relative_eq!(v, 5.0, max_relative = 1e-15);
        }

        let a = coeffs(&[1.0, 1.0]);
        let v = pw_norm(&a, &pair(vec![vec![0], vec![1]], &[1.0, 1.0]), 4.0).unwrap();
        assert_relative_eq!(v, 2f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(v, ell_p_norm(&a, 4.0).unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn pw_norm_errors() {
        let pr = pair(vec![vec![0, 1]], &[1.0, 1.0]);
        assert!(matches!(pw_norm(&coeffs(&[1.0]), &pr, 4.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(pw_norm(&coeffs(&[1.0, 1.0]), &pr, 2.0), Err(Error::InvalidExponent { .. })));
    }

    #[test]
    fn family_norm_is_max_over_pairs() {
        let a = coeffs(&[1.0, 1.0]);
        let trivial = pair(vec![vec![0, 1]], &[1.0, 1.0]);
        let discrete = pair(vec![vec![0], vec![1]], &[1.0, 1.0]);
        let single = Family::new(vec![trivial.clone()]).unwrap();
        assert_eq!(family_norm(&a, &single, 4.0).unwrap(), pw_norm(&a, &trivial, 4.0).unwrap());
        let fam = Family::new(vec![trivial, discrete]).unwrap();
        assert_relative_eq!(family_norm(&a, &fam, 4.0).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(family_norm(&coeffs(&[0.0, 0.0]), &fam, 4.0).unwrap(), 0.0);
        assert_eq!(Family::<f64>::new(vec![]).unwrap_err(), Error::EmptyFamily);
    }

    #[test]
    fn family_rejects_mismatched_pairs() {
        let err = Family::new(vec![pair(vec![vec![0]], &[1.0]), pair(vec![vec![0, 1]], &[1.0, 1.0])]).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"));
    }

    #[test]
    fn ell_p_cases() {
        assert_relative_eq!(ell_p_norm(&coeffs(&[1.0, 1.0]), 4.0).unwrap(), 2f64.powf(0.25));
        assert_relative_eq!(ell_p_norm(&coeffs(&[3.0, 4.0]), 2.0).unwrap(), 5.0);
        for p in [1.0, 2.5, 7.0] {
            assert_eq!(ell_p_norm(&coeffs(&[1.0, 0.0, 0.0]), p).unwrap(), 1.0);
        }
        assert!(ell_p_norm(&coeffs(&[1.0]), 0.5).is_err());
    }

    #[test]
    fn mixed_norm_cases() {
        let v = mixed_norm(&[coeffs(&[1.0, 1.0]), coeffs(&[1.0])], 4.0).unwrap();
        assert_relative_eq!(v, 5f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(v, 1.4953, epsilon = 1e-4);
        let one = coeffs(&[3.0, 4.0]);
        assert_relative_eq!(mixed_norm(std::slice::from_ref(&one), 3.0).unwrap(), 5.0, max_relative = 1e-15);
        let singles = [coeffs(&[1.5]), coeffs(&[-2.0]), coeffs(&[0.5])];
        assert_relative_eq!(
            mixed_norm(&singles, 3.0).unwrap(),
            ell_p_norm(&coeffs(&[1.5, -2.0, 0.5]), 3.0).unwrap(),
            max_relative = 1e-14
        );
        assert!(mixed_norm::<f64>(&[], 4.0).is_err());
    }

    #[test]
    fn square_function_norm_cases() {
        assert_relative_eq!(
            square_function_norm(&coeffs(&[3.0, 4.0]), &rademachers()).unwrap(),
            5.0,
            max_relative = 1e-15
        );
        let v = square_function_norm(&coeffs(&[1.0, 1.0]), &half_indicators()).unwrap();
        assert_relative_eq!(v, 2f64.powf(0.25), max_relative = 1e-14);
        assert_relative_eq!(v, 1.18921, epsilon = 1e-5);
        let v = square_function_norm(&coeffs(&[-2.5, 0.0]), &half_indicators()).unwrap();
        assert_relative_eq!(v, 2.5, max_relative = 1e-14);
        assert!(square_function_norm(&coeffs(&[1.0]), &rademachers()).is_err());
    }

    #[test]
    fn expansion_norm_cases() {
        assert_relative_eq!(
            expansion_norm(&coeffs(&[1.0, 0.0]), &half_indicators()).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        // |r1 + r2| = 2 on half the interval
        let v = expansion_norm(&coeffs(&[1.0, 1.0]), &rademachers()).unwrap();
        assert_relative_eq!(v, 8f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(v, 1.6818, epsilon = 1e-4);
        assert_relative_eq!(
            expansion_norm(&coeffs(&[1.0, 1.0]), &half_indicators()).unwrap(),
            2f64.powf(0.25),
            max_relative = 1e-14
        );
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0], vec![0, 1]], 2).is_err());
        assert!(Partition::new(vec![vec![0]], 2).is_err());
        assert!(Partition::new(vec![vec![0, 1], vec![]], 2).is_err());
        assert!(Partition::new(vec![vec![0, 2]], 2).is_err());
        assert_eq!(Partition::contiguous(&[2, 1]).unwrap().blocks(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(vec![0.5, 1.0]).is_ok());
        assert!(matches!(Weights::new(vec![0.0]), Err(Error::InvalidWeight { index: 0, .. })));
        assert!(matches!(Weights::new(vec![1.0, 1.5]), Err(Error::InvalidWeight { index: 1, .. })));
    }

    #[test]
    fn json_schemas() {
        let a: Coefficients<f64> = serde_json::from_str(r#"{"a": [3, 4, 2]}"#).unwrap();
        assert_eq!(a.entries(), &[3.0, 4.0, 2.0]);
        let p: Partition = serde_json::from_str(r#"{"blocks": [[1, 2], [3]]}"#).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"blocks":[[1,2],[3]]}"#);
        let fam: Family<f64> = serde_json::from_str(
            r#"{"pairs": [{"partition": {"blocks": [[1, 2], [3]]}, "weights": {"w": [1, 1, 1]}}]}"#,
        )
        .unwrap();
        assert_relative_eq!(family_norm(&a, &fam, 4.0).unwrap(), 641f64.powf(0.25));
        let back: Family<f64> = serde_json::from_str(&serde_json::to_string(&fam).unwrap()).unwrap();
        assert_eq!(back, fam);

        assert!(serde_json::from_str::<Partition>(r#"{"blocks": [[0, 1]]}"#).is_err());
        assert!(serde_json::from_str::<Weights<f64>>(r#"{"w": [1.2]}"#).is_err());
        let err = serde_json::from_str::<Family<f64>>(
            r#"{"pairs": [{"partition": {"blocks": [[1, 2]]}, "weights": {"w": [1]}}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"));
    }

    #[test]
    fn basis_tag_validation() {
        let bad = StepFunction::new(0, vec![2.0]).unwrap();
        let tags = BasisTags { normalized: true, ..Default::default() };
        assert!(matches!(BasisSequence::new(vec![bad], 4.0, tags), Err(Error::NotNormalized { .. })));
        let one = StepFunction::constant(1.0);
        let tags = BasisTags { disjoint_supports: true, ..Default::default() };
        assert_eq!(
            BasisSequence::new(vec![one.clone(), one], 4.0, tags).unwrap_err(),
            Error::OverlappingSupports(0, 1)
        );
    }

    #[test]
    fn generic_over_f32() {
        let a = Coefficients::new(vec![3.0f32, 4.0, 2.0]).unwrap();
        let pr = PWPair::new(Partition::contiguous(&[2, 1]).unwrap(), Weights::ones(3).unwrap()).unwrap();
        assert_relative_eq!(pw_norm(&a, &pr, 4.0f32).unwrap(), 641f32.powf(0.25), max_relative = 1e-6);
    }
}
