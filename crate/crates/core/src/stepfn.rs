//! Dyadic piecewise-constant functions on `[0, 1)`.
//!
//! A [`StepFunction`] at level `m` is constant on each of the `2^m` half-open
//! intervals `[k 2^-m, (k+1) 2^-m)`. Every integral of such a function is a
//! finite sum, so the calculus in this module is exact up to floating point
//! rounding. Binary operations align both operands to the finer grid
//! implicitly.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grid cap used when `PWNORM_MAX_LEVEL` is not set.
pub const DEFAULT_MAX_LEVEL: u32 = 20;

/// Hard ceiling for the environment override; `2^30` values is already 8 GiB of `f64`.
const ABSOLUTE_MAX_LEVEL: u32 = 30;

/// Largest grid level any step function may use.
///
/// Read once from `PWNORM_MAX_LEVEL`; unparsable values fall back to
/// [`DEFAULT_MAX_LEVEL`].
pub fn max_level() -> u32 {
    static CAP: OnceLock<u32> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("PWNORM_MAX_LEVEL")
            .ok()
            .and_then(|s| s.trim().parse::<u32>().ok())
            .map(|v| v.min(ABSOLUTE_MAX_LEVEL))
            .unwrap_or(DEFAULT_MAX_LEVEL)
    })
}

fn check_level(level: u32) -> Result<()> {
    let max = max_level();
    if level > max {
        return Err(Error::LevelTooLarge { level, max });
    }
    Ok(())
}

/// The interval `[index 2^-level, (index+1) 2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, index: u64) -> Result<Self> {
        check_level(level)?;
        if index >= 1u64 << level {
            return Err(Error::InvalidInterval { level, index });
        }
        Ok(Self { level, index })
    }

    /// The whole unit interval.
    pub fn unit() -> Self {
        Self { level: 0, index: 0 }
    }

    pub fn measure<T: Real>(&self) -> T {
        T::lit(2.0).powi(-(self.level as i32))
    }

    /// Cell indices covered by this interval on the grid at `level >= self.level`.
    pub fn cells_at(&self, level: u32) -> std::ops::Range<usize> {
        debug_assert!(level >= self.level);
        let shift = level - self.level;
        let start = (self.index as usize) << shift;
        start..start + (1usize << shift)
    }
}

/// A finite union of dyadic intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DyadicSet {
    pub intervals: Vec<DyadicInterval>,
}

impl DyadicSet {
    pub fn new(intervals: Vec<DyadicInterval>) -> Self {
        Self { intervals }
    }

    pub fn finest_level(&self) -> u32 {
        self.intervals.iter().map(|i| i.level).max().unwrap_or(0)
    }
}

impl From<DyadicInterval> for DyadicSet {
    fn from(interval: DyadicInterval) -> Self {
        Self::new(vec![interval])
    }
}

/// Pairwise-disjoint dyadic sets `A_1, ..., A_n`, each of positive measure,
/// rasterised onto a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DisjointDyadicSets {
    sets: Vec<DyadicSet>,
    level: u32,
    labels: Vec<Option<usize>>,
    counts: Vec<usize>,
}

impl DisjointDyadicSets {
    pub fn new(sets: Vec<DyadicSet>) -> Result<Self> {
        let level = sets.iter().map(DyadicSet::finest_level).max().unwrap_or(0);
        Self::with_level(sets, level)
    }

    /// Rasterises the sets at `level`, which must be at least as fine as
    /// every interval involved.
    pub fn with_level(sets: Vec<DyadicSet>, level: u32) -> Result<Self> {
        check_level(level)?;
        let mut labels = vec![None; 1usize << level];
        let mut counts = Vec::with_capacity(sets.len());
        for (id, set) in sets.iter().enumerate() {
            if set.intervals.is_empty() {
                return Err(Error::EmptySet);
            }
            let mut count = 0;
            for interval in &set.intervals {
                let interval = DyadicInterval::new(interval.level, interval.index)?;
                if interval.level > level {
                    return Err(Error::Internal(format!(
                        "interval level {} finer than raster level {level}",
                        interval.level
                    )));
                }
                for cell in interval.cells_at(level) {
                    if labels[cell].is_some() {
                        return Err(Error::OverlappingSets);
                    }
                    labels[cell] = Some(id);
                    count += 1;
                }
            }
            counts.push(count);
        }
        Ok(Self { sets, level, labels, counts })
    }

    /// Builds the sets from a per-cell labelling at `level`; labels must be
    /// dense in `0..n` and every label must appear.
    pub fn from_labels(level: u32, labels: Vec<Option<usize>>) -> Result<Self> {
        check_level(level)?;
        if labels.len() != 1usize << level {
            return Err(Error::LengthMismatch { level, found: labels.len() });
        }
        let n = labels.iter().flatten().map(|&l| l + 1).max().unwrap_or(0);
        let mut sets = vec![DyadicSet::new(Vec::new()); n];
        let mut counts = vec![0; n];
        for (cell, label) in labels.iter().enumerate() {
            if let Some(id) = *label {
                sets[id].intervals.push(DyadicInterval { level, index: cell as u64 });
                counts[id] += 1;
            }
        }
        if counts.contains(&0) {
            return Err(Error::EmptySet);
        }
        Ok(Self { sets, level, labels, counts })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[DyadicSet] {
        &self.sets
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Which set (if any) contains each cell of the raster grid.
    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn measure<T: Real>(&self, id: usize) -> T {
        T::from_usize(self.counts[id]).expect("cell count fits") * T::lit(2.0).powi(-(self.level as i32))
    }

    /// Indicator function of set `id`.
    pub fn indicator<T: Real>(&self, id: usize) -> StepFunction<T> {
        let values = self.labels.iter().map(|l| if *l == Some(id) { T::one() } else { T::zero() }).collect();
        StepFunction { level: self.level, values }
    }
}

/// Pointwise binary operation for [`StepFunction::pointwise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointwiseOp {
    Add,
    Mul,
    Max,
}

impl PointwiseOp {
    fn apply<T: Real>(self, x: T, y: T) -> T {
        match self {
            PointwiseOp::Add => x + y,
            PointwiseOp::Mul => x * y,
            PointwiseOp::Max => x.max(y),
        }
    }
}

#[derive(Deserialize)]
struct RawStepFunction<T> {
    level: u32,
    values: Vec<T>,
}

impl<T: Real> TryFrom<RawStepFunction<T>> for StepFunction<T> {
    type Error = Error;

    fn try_from(raw: RawStepFunction<T>) -> Result<Self> {
        StepFunction::new(raw.level, raw.values)
    }
}

/// Real function on `[0, 1)`, constant on each dyadic interval of one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct StepFunction<T> {
    level: u32,
    values: Vec<T>,
}

impl<T: Real> StepFunction<T> {
    pub fn new(level: u32, values: Vec<T>) -> Result<Self> {
        check_level(level)?;
        if values.len() != 1usize << level {
            return Err(Error::LengthMismatch { level, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("step function values"));
        }
        Ok(Self { level, values })
    }

    pub fn constant(c: T) -> Self {
        Self { level: 0, values: vec![c] }
    }

    pub fn zero(level: u32) -> Result<Self> {
        check_level(level)?;
        Ok(Self { level, values: vec![T::zero(); 1usize << level] })
    }

    /// Builds the function at `level` from the value on each cell index.
    pub fn from_fn(level: u32, mut f: impl FnMut(usize) -> T) -> Result<Self> {
        check_level(level)?;
        Self::new(level, (0..1usize << level).map(&mut f).collect())
    }

    pub fn indicator(interval: DyadicInterval) -> Result<Self> {
        let interval = DyadicInterval::new(interval.level, interval.index)?;
        let mut values = vec![T::zero(); 1usize << interval.level];
        values[interval.index as usize] = T::one();
        Ok(Self { level: interval.level, values })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Value at `t` in `[0, 1)`.
    pub fn eval(&self, t: f64) -> Option<T> {
        if !(0.0..1.0).contains(&t) {
            return None;
        }
        let k = (t * (1u64 << self.level) as f64).floor() as usize;
        self.values.get(k).copied()
    }

    /// Same function on the finer grid `m`.
    pub fn refine(&self, m: u32) -> Result<Self> {
        if m < self.level {
            return Err(Error::CannotCoarsen { from: self.level, to: m });
        }
        check_level(m)?;
        let factor = 1usize << (m - self.level);
        let values = self.values.iter().flat_map(|&v| std::iter::repeat_n(v, factor)).collect();
        Ok(Self { level: m, values })
    }

    /// Values refined to `m`, borrowing when no refinement is needed.
    pub(crate) fn values_at(&self, m: u32) -> Result<std::borrow::Cow<'_, [T]>> {
        if m == self.level {
            Ok(std::borrow::Cow::Borrowed(&self.values))
        } else {
            Ok(std::borrow::Cow::Owned(self.refine(m)?.values))
        }
    }

    pub fn pointwise(op: PointwiseOp, f: &Self, h: &Self) -> Result<Self> {
        let level = f.level.max(h.level);
        let fv = f.values_at(level)?;
        let hv = h.values_at(level)?;
        let values: Vec<T> = fv.iter().zip(hv.iter()).map(|(&x, &y)| op.apply(x, y)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pointwise result"));
        }
        Ok(Self { level, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::pointwise(PointwiseOp::Add, self, other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::pointwise(PointwiseOp::Mul, self, other)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        Self::pointwise(PointwiseOp::Max, self, other)
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        self.map(|v| v * c)
    }

    /// Applies `f` to every value; fails if the result is not finite.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let values: Vec<T> = self.values.iter().map(|&v| f(v)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mapped values"));
        }
        Ok(Self { level: self.level, values })
    }

    /// Pointwise `|f|^alpha`.
    pub fn abs_pow(&self, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::InvalidExponent {
                value: alpha.to_f64().unwrap_or(f64::NAN),
                reason: "power must be positive",
            });
        }
        self.map(|v| v.abs().powf(alpha))
    }

    pub fn integral(&self) -> T {
        let cell = T::lit(2.0).powi(-(self.level as i32));
        self.values.iter().copied().sum::<T>() * cell
    }

    /// `(∫|f|^p)^(1/p)` for `p >= 1`.
    pub fn lp_norm(&self, p: T) -> Result<T> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::InvalidExponent {
                value: p.to_f64().unwrap_or(f64::NAN),
                reason: "L_p norm requires p >= 1",
            });
        }
        let cell = T::lit(2.0).powi(-(self.level as i32));
        let s: T = self.values.iter().map(|v| v.abs().powf(p)).sum::<T>() * cell;
        Ok(s.powf(p.recip()))
    }

    /// Conditional expectation onto the σ-algebra generated by `sets`:
    /// the average of `f` on each set, and zero off their union.
    pub fn cond_expect(&self, sets: &DisjointDyadicSets) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::EmptyInput("conditional expectation sets"));
        }
        let level = self.level.max(sets.level());
        let fv = self.values_at(level)?;
        let shift = level - sets.level();
        let label_of = |cell: usize| sets.labels()[cell >> shift];

        let mut sums = vec![T::zero(); sets.len()];
        let mut counts = vec![0usize; sets.len()];
        for (cell, &v) in fv.iter().enumerate() {
            if let Some(id) = label_of(cell) {
                sums[id] = sums[id] + v;
                counts[id] += 1;
            }
        }
        let means: Vec<T> =
            sums.iter().zip(&counts).map(|(&s, &c)| s / T::from_usize(c).expect("count fits")).collect();
        let values = (0..fv.len()).map(|cell| label_of(cell).map_or(T::zero(), |id| means[id])).collect();
        Ok(Self { level, values })
    }

    /// Cells (at the function's own level) where the value is non-zero.
    pub fn support_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| **v != T::zero()).map(|(k, _)| k)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T: Real> PartialEq for StepFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        let level = self.level.max(other.level);
        match (self.values_at(level), other.values_at(level)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

/// Sums `Σ coeffs[n] * transform(fns[n])` directly on the common grid.
pub(crate) fn linear_combination<T: Real>(
    fns: &[StepFunction<T>],
    coeffs: &[T],
    transform: impl Fn(T) -> T,
) -> Result<StepFunction<T>> {
    let level = fns.iter().map(StepFunction::level).max().unwrap_or(0);
    check_level(level)?;
    let mut acc = vec![T::zero(); 1usize << level];
    for (f, &c) in fns.iter().zip(coeffs) {
        if c == T::zero() {
            continue;
        }
        let factor = 1usize << (level - f.level);
        for (k, &v) in f.values.iter().enumerate() {
            let t = c * transform(v);
            for slot in &mut acc[k * factor..(k + 1) * factor] {
                *slot = *slot + t;
            }
        }
    }
    StepFunction::new(level, acc)
}
