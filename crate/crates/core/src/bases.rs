//! Generators for the basis sequences used throughout the crate, and the
//! closed-form Haar weights.
//!
//! Conventions:
//! - `r_j` is `+1` on dyadic intervals whose `j`-th binary digit is 0.
//! - Binary digit `d` of a cell index `k` at grid level `L` is bit `L - d` of
//!   `k`, so digit 1 is the most significant.
//! - The Haar system is ordered `h_{0,0}, h_{1,0}, h_{2,0}, h_{2,1}, ...`;
//!   `h_{m,l}` with `m >= 1` sits at flat position `2^{m-1} + l`.

use serde::{Deserialize, Serialize};

use crate::duality::{optimal_g_for, NormingFunction};
use crate::error::{Error, Result};
use crate::norms::{check_disjoint_supports, check_p_above_two, BasisKind, BasisSequence, BasisTags, Coefficients};
use crate::scalar::{dual_exponent, pow2, Real};
use crate::stepfn::{DisjointDyadicSets, DyadicSet, StepFunction};

fn normalized_tags(disjoint_supports: bool) -> BasisTags {
    BasisTags { disjoint_supports, normalized: true, ..Default::default() }
}

/// `x_n = λ(A_n)^{-1/p} 1_{A_n}`.
pub fn disjoint_indicators<T: Real>(sets: &DisjointDyadicSets, p: T) -> Result<BasisSequence<T>> {
    check_p_above_two(p)?;
    if sets.is_empty() {
        return Err(Error::EmptyInput("indicator sets"));
    }
    let fns = (0..sets.len())
        .map(|n| {
            let scale = sets.measure::<T>(n).powf(-p.recip());
            sets.indicator::<T>(n).scale(scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisSequence::new(fns, p, normalized_tags(true))?.with_kind(BasisKind::Indicators))
}

/// Rescales disjointly supported non-zero functions to unit `L_p` norm.
pub fn disjointly_supported<T: Real>(fns: Vec<StepFunction<T>>, p: T) -> Result<BasisSequence<T>> {
    check_p_above_two(p)?;
    check_disjoint_supports(&fns)?;
    let fns = fns
        .into_iter()
        .enumerate()
        .map(|(n, f)| {
            if f.is_zero() {
                return Err(Error::ZeroFunction(n));
            }
            let norm = f.lp_norm(p)?;
            f.map(|v| v / norm)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisSequence::new(fns, p, normalized_tags(true))?.with_kind(BasisKind::DisjointlySupported))
}

/// The non-negative unit vector `y` of `L_q` norming `x²`, i.e.
/// `∫ y x² = ‖x²‖_{p/2}`.
pub fn norming_companion<T: Real>(x: &StepFunction<T>, p: T) -> Result<NormingFunction<T>> {
    optimal_g_for(&x.mul(x)?, p)
}

/// `r_j` at level `j`.
pub fn rademacher<T: Real>(j: u32) -> Result<StepFunction<T>> {
    if j < 1 {
        return Err(Error::InvalidRademacher(j));
    }
    StepFunction::from_fn(j, |k| if k % 2 == 0 { T::one() } else { -T::one() })
}

/// `(r_1, ..., r_n)` as an independent normalized basis.
pub fn rademacher_basis<T: Real>(n: u32, p: T) -> Result<BasisSequence<T>> {
    check_p_above_two(p)?;
    if n == 0 {
        return Err(Error::EmptyInput("Rademacher basis"));
    }
    let fns = (1..=n).map(rademacher).collect::<Result<Vec<_>>>()?;
    let tags = BasisTags { independent: true, normalized: true, ..Default::default() };
    Ok(BasisSequence::new(fns, p, tags)?.with_kind(BasisKind::Rademacher))
}

/// `x_{n,j} = λ(A_n)^{-1/p} 1_{A_n} r_j` for `j = 1..=J`, flattened with `n`
/// outer and `j` inner; groups of size `J` are recorded on the basis.
pub fn indicator_rademacher_grid<T: Real>(sets: &DisjointDyadicSets, j_count: u32, p: T) -> Result<BasisSequence<T>> {
    check_p_above_two(p)?;
    if j_count == 0 {
        return Err(Error::EmptyInput("Rademacher count"));
    }
    let indicators = disjoint_indicators(sets, p)?;
    let rs = (1..=j_count).map(rademacher).collect::<Result<Vec<StepFunction<T>>>>()?;
    let mut fns = Vec::with_capacity(sets.len() * j_count as usize);
    for x in indicators.functions() {
        for r in &rs {
            fns.push(x.mul(r)?);
        }
    }
    let tags = BasisTags { normalized: true, ..Default::default() };
    BasisSequence::new(fns, p, tags)?
        .with_kind(BasisKind::IndicatorRademacherGrid)
        .with_groups(vec![j_count as usize; sets.len()])
}

/// Functions of disjoint blocks of binary digits, each rescaled to unit `L_p`
/// norm. `values[n]` has `2^{|blocks[n]|}` entries, indexed by the block's
/// digits read in the listed order (first digit most significant). Digits
/// are 1-based.
pub fn independent_digit_functions<T: Real>(blocks: &[Vec<u32>], values: &[Vec<T>], p: T) -> Result<BasisSequence<T>> {
    check_p_above_two(p)?;
    if blocks.is_empty() {
        return Err(Error::EmptyInput("digit blocks"));
    }
    if blocks.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: blocks.len(), found: values.len() });
    }
    let mut used = std::collections::BTreeSet::new();
    for block in blocks {
        if block.is_empty() {
            return Err(Error::InvalidDigitBlocks("empty block".into()));
        }
        for &d in block {
            if d == 0 {
                return Err(Error::InvalidDigitBlocks("digits are 1-based".into()));
            }
            if !used.insert(d) {
                return Err(Error::InvalidDigitBlocks(format!("digit {d} appears in two blocks")));
            }
        }
    }
    let level = *used.iter().next_back().expect("non-empty");
    let mut fns = Vec::with_capacity(blocks.len());
    for (n, (block, table)) in blocks.iter().zip(values).enumerate() {
        if table.len() != 1usize << block.len() {
            return Err(Error::DimensionMismatch { expected: 1usize << block.len(), found: table.len() });
        }
        let f = StepFunction::from_fn(level, |k| {
            let idx = block.iter().fold(0usize, |acc, &d| (acc << 1) | ((k >> (level - d)) & 1));
            table[idx]
        })?;
        if f.is_zero() {
            return Err(Error::ZeroFunction(n));
        }
        let norm = f.lp_norm(p)?;
        fns.push(f.map(|v| v / norm)?);
    }
    let tags = BasisTags { independent: true, normalized: true, ..Default::default() };
    Ok(BasisSequence::new(fns, p, tags)?.with_kind(BasisKind::Independent))
}

/// Index `(n, k)` of a Haar function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HaarIndex {
    pub n: u32,
    pub k: u64,
}

impl HaarIndex {
    pub fn new(n: u32, k: u64) -> Result<Self> {
        let valid = if n == 0 { k == 0 } else { n < 64 && k < 1u64 << (n - 1) };
        if !valid {
            return Err(Error::InvalidHaarIndex { n, k });
        }
        Ok(Self { n, k })
    }

    /// Position in the flattened Haar ordering.
    pub fn flat(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            (1usize << (self.n - 1)) + self.k as usize
        }
    }

    pub fn from_flat(i: usize) -> Self {
        if i == 0 {
            return Self { n: 0, k: 0 };
        }
        let n = usize::BITS - i.leading_zeros();
        Self { n, k: (i - (1usize << (n - 1))) as u64 }
    }
}

/// All Haar indices with `n <= max_level`, in flat order.
pub fn haar_indices(max_level: u32) -> Vec<HaarIndex> {
    (0..1usize << max_level).map(HaarIndex::from_flat).collect()
}

/// `h_{n,k} = 2^{(n-1)/p} (1_{[2k 2^-n, (2k+1) 2^-n)} - 1_{[(2k+1) 2^-n, (2k+2) 2^-n)})`
/// and `h_{0,0} = 1`.
pub fn haar<T: Real>(idx: HaarIndex, p: T) -> Result<StepFunction<T>> {
    let idx = HaarIndex::new(idx.n, idx.k)?;
    if !(p >= T::one()) {
        return Err(Error::InvalidExponent { value: p.to_f64().unwrap_or(f64::NAN), reason: "p must be >= 1" });
    }
    if idx.n == 0 {
        return Ok(StepFunction::constant(T::one()));
    }
    let amp = pow2(T::from_u32(idx.n - 1).unwrap() / p);
    let (lo, hi) = (2 * idx.k as usize, 2 * idx.k as usize + 1);
    StepFunction::from_fn(idx.n, |c| {
        if c == lo {
            amp
        } else if c == hi {
            -amp
        } else {
            T::zero()
        }
    })
}

/// `h_{0,0}, ..., h_{max_level, 2^{max_level-1}-1}` (`2^{max_level}` functions).
pub fn haar_basis<T: Real>(max_level: u32, p: T) -> Result<BasisSequence<T>> {
    check_p_above_two(p)?;
    let fns = haar_indices(max_level).into_iter().map(|i| haar(i, p)).collect::<Result<Vec<_>>>()?;
    let tags = BasisTags { haar: true, normalized: true, ..Default::default() };
    Ok(BasisSequence::new(fns, p, tags)?.with_kind(BasisKind::Haar))
}

/// Coefficients of the Haar expansion up to level `max_level`, in flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients<T> {
    max_level: u32,
    a: Coefficients<T>,
}

impl<T: Real> HaarCoefficients<T> {
    pub fn new(max_level: u32, a: Coefficients<T>) -> Result<Self> {
        let expected = 1usize << max_level;
        if a.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: a.len() });
        }
        Ok(Self { max_level, a })
    }

    /// Coefficient vector with a single non-zero entry `value` at `idx`.
    pub fn single(max_level: u32, idx: HaarIndex, value: T) -> Result<Self> {
        let mut a = vec![T::zero(); 1usize << max_level];
        *a.get_mut(idx.flat()).ok_or(Error::InvalidHaarIndex { n: idx.n, k: idx.k })? = value;
        Self::new(max_level, Coefficients::new(a)?)
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        &self.a
    }

    pub fn get(&self, idx: HaarIndex) -> T {
        self.a.entries()[idx.flat()]
    }
}

/// `g = Σ_k b_k 2^{(n-1)(p-2)/p} 1_{[k 2^{1-n}, (k+1) 2^{1-n})}` with
/// non-negative `b` of unit `ℓ_{p/(p-2)}` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarG<T> {
    n: u32,
    b: Vec<T>,
    p: T,
}

impl<T: Real> HaarG<T> {
    pub fn new(n: u32, b: Vec<T>, p: T) -> Result<Self> {
        check_p_above_two(p)?;
        if !(1..=62).contains(&n) {
            return Err(Error::InvalidHaarIndex { n, k: 0 });
        }
        let expected = 1usize << (n - 1);
        if b.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: b.len() });
        }
        for (index, &v) in b.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite("b"));
            }
            if v < T::zero() {
                return Err(Error::NegativeEntry { index, value: v.to_f64().unwrap_or(f64::NAN) });
            }
        }
        let q = dual_exponent(p);
        let norm = b.iter().map(|v| v.powf(q)).sum::<T>().powf(q.recip());
        if (norm - T::one()).abs() > T::validation_tol() {
            return Err(Error::NotNormalized { norm: norm.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { n, b, p })
    }

    /// Rescales a non-negative, non-zero `b` onto the `ℓ_{p/(p-2)}` sphere.
    pub fn normalized(n: u32, b: Vec<T>, p: T) -> Result<Self> {
        check_p_above_two(p)?;
        let q = dual_exponent(p);
        let norm = b.iter().map(|v| v.abs().powf(q)).sum::<T>().powf(q.recip());
        if !(norm > T::zero()) {
            return Err(Error::DegenerateCoefficients);
        }
        Self::new(n, b.into_iter().map(|v| v / norm).collect(), p)
    }

    /// Uniform `b`, for which `g ≡ 1`.
    pub fn uniform(n: u32, p: T) -> Result<Self> {
        let len = 1usize << n.saturating_sub(1);
        Self::normalized(n, vec![T::one(); len], p)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn p(&self) -> T {
        self.p
    }
}

/// `∫ g h_{m,l}²` via the closed form for the appropriate range of `m`:
///
/// - `m = 0`: `Σ_k b_k 2^{2(1-n)/p}`
/// - `0 < m <= n`: `2^{2(m-n)/p} Σ_{k = l 2^{n-m}}^{(l+1) 2^{n-m} - 1} b_k`
/// - `m > n`: `b_k 2^{(n-m)(p-2)/p}` with `k = ⌊l / 2^{m-n}⌋`
pub fn haar_weight_closed_form<T: Real>(hg: &HaarG<T>, m: u32, l: u64) -> Result<T> {
    let idx = HaarIndex::new(m, l)?;
    let p = hg.p;
    let n = hg.n;
    let two = T::lit(2.0);
    if idx.n == 0 {
        let e = two * (T::one() - T::from_u32(n).unwrap()) / p;
        return Ok(hg.b.iter().copied().sum::<T>() * pow2(e));
    }
    if m <= n {
        let width = 1usize << (n - m);
        let start = l as usize * width;
        let s: T = hg.b[start..start + width].iter().copied().sum();
        let e = two * (T::from_u32(m).unwrap() - T::from_u32(n).unwrap()) / p;
        Ok(s * pow2(e))
    } else {
        let k = (l >> (m - n)) as usize;
        let e = (T::from_u32(n).unwrap() - T::from_u32(m).unwrap()) * (p - two) / p;
        Ok(hg.b[k] * pow2(e))
    }
}

/// The step function `g` of a [`HaarG`], at level `n - 1`.
pub fn haar_g<T: Real>(hg: &HaarG<T>) -> Result<NormingFunction<T>> {
    let p = hg.p;
    let height = pow2(T::from_u32(hg.n - 1).unwrap() * (p - T::lit(2.0)) / p);
    let g = StepFunction::new(hg.n - 1, hg.b.iter().map(|&b| b * height).collect())?;
    NormingFunction::for_p(g, p)
}

/// `Σ_{m,l} a_{m,l}² ∫ g h_{m,l}²` by the closed forms, skipping `m > n`
/// when `truncated`.
pub fn haar_quadratic_form<T: Real>(a: &HaarCoefficients<T>, hg: &HaarG<T>, truncated: bool) -> Result<T> {
    let mut total = T::zero();
    for (i, &coef) in a.a.entries().iter().enumerate() {
        let idx = HaarIndex::from_flat(i);
        if truncated && idx.n > hg.n {
            continue;
        }
        if coef == T::zero() {
            continue;
        }
        total = total + coef * coef * haar_weight_closed_form(hg, idx.n, idx.k)?;
    }
    Ok(total)
}

/// Result of [`haar_truncated_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarNorms<T> {
    /// Supremum including the `m > n` terms.
    pub full: T,
    /// Supremum with the `m > n` terms dropped.
    pub truncated: T,
}

/// Supremum over `family` of `(Σ a_{m,l}² ∫ g h_{m,l}²)^{1/2}`, with and without
/// the terms `m > n`.
pub fn haar_truncated_norm<T: Real>(a: &HaarCoefficients<T>, family: &[HaarG<T>], p: T) -> Result<HaarNorms<T>> {
    check_p_above_two(p)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut full = T::zero();
    let mut truncated = T::zero();
    for hg in family {
        if hg.p != p {
            return Err(Error::InvalidExponent {
                value: hg.p.to_f64().unwrap_or(f64::NAN),
                reason: "family member built for a different p",
            });
        }
        // the truncated sum is a prefix of the same non-negative terms, so it never exceeds the full one
        full = full.max(haar_quadratic_form(a, hg, false)?.sqrt());
        truncated = truncated.max(haar_quadratic_form(a, hg, true)?.sqrt());
    }
    Ok(HaarNorms { full, truncated })
}

/// The `b` attaining `sup_b Σ a_{m,l}² ∫ g_b h_{m,l}²` at a fixed `n`.
///
/// The form is linear in `b`, `Σ_k b_k C_k`, so by Hölder the maximizer is
/// `b_k ∝ C_k^{(p-2)/2}` and the maximum is `‖C‖_{p/2}`. Falls back to the
/// uniform `b` when every `C_k` vanishes.
pub fn haar_optimal_b<T: Real>(a: &HaarCoefficients<T>, n: u32, p: T, truncated: bool) -> Result<HaarG<T>> {
    check_p_above_two(p)?;
    if n < 1 {
        return Err(Error::InvalidHaarIndex { n, k: 0 });
    }
    let len = 1usize << (n - 1);
    let two = T::lit(2.0);
    let nf = T::from_u32(n).unwrap();
    let mut c = vec![T::zero(); len];
    for (i, &coef) in a.a.entries().iter().enumerate() {
        if coef == T::zero() {
            continue;
        }
        let sq = coef * coef;
        let idx = HaarIndex::from_flat(i);
        let m = idx.n;
        let mf = T::from_u32(m).unwrap();
        if m == 0 {
            let t = sq * pow2(two * (T::one() - nf) / p);
            c.iter_mut().for_each(|ck| *ck = *ck + t);
        } else if m <= n {
            let width = 1usize << (n - m);
            let t = sq * pow2(two * (mf - nf) / p);
            let start = idx.k as usize * width;
            c[start..start + width].iter_mut().for_each(|ck| *ck = *ck + t);
        } else if !truncated {
            let k = (idx.k >> (m - n)) as usize;
            c[k] = c[k] + sq * pow2((nf - mf) * (p - two) / p);
        }
    }
    if c.iter().all(|v| *v == T::zero()) {
        return HaarG::uniform(n, p);
    }
    let alpha = (p - two) / two;
    HaarG::normalized(n, c.into_iter().map(|v| v.powf(alpha)).collect(), p)
}

/// JSON description of a generated basis, tagged by `kind`, e.g.
/// `{"kind": "haar", "max_level": 4, "p": 4}`. `p` may be left out and
/// supplied at build time instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisDescriptor {
    /// Normalized indicators of disjoint dyadic sets.
    Indicators {
        sets: Vec<DyadicSet>,
        p: Option<f64>,
    },
    /// Disjointly supported step functions, rescaled to unit norm.
    Disjoint {
        functions: Vec<StepFunction<f64>>,
        p: Option<f64>,
    },
    /// Indicator-Rademacher grid with `j` Rademacher functions per set.
    Grid {
        sets: Vec<DyadicSet>,
        j: u32,
        p: Option<f64>,
    },
    Rademacher {
        n: u32,
        p: Option<f64>,
    },
    /// Functions of disjoint digit blocks (1-based digits).
    Digits {
        blocks: Vec<Vec<u32>>,
        values: Vec<Vec<f64>>,
        p: Option<f64>,
    },
    Haar {
        max_level: u32,
        p: Option<f64>,
    },
    /// Arbitrary functions with declared tags.
    Explicit {
        functions: Vec<StepFunction<f64>>,
        #[serde(default)]
        tags: BasisTags,
        p: Option<f64>,
    },
}

impl BasisDescriptor {
    pub fn p(&self) -> Option<f64> {
        match self {
            Self::Indicators { p, .. }
            | Self::Disjoint { p, .. }
            | Self::Grid { p, .. }
            | Self::Rademacher { p, .. }
            | Self::Digits { p, .. }
            | Self::Haar { p, .. }
            | Self::Explicit { p, .. } => *p,
        }
    }

    /// Builds the basis. `p` fills in a missing descriptor `p`; when both are
    /// present they must agree.
    pub fn build(&self, p: Option<f64>) -> Result<BasisSequence<f64>> {
        let p = match (self.p(), p) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidExponent { value: b, reason: "disagrees with the basis descriptor's p" })
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::InvalidExponent { value: f64::NAN, reason: "p is required" }),
        };
        match self {
            Self::Indicators { sets, .. } => disjoint_indicators(&DisjointDyadicSets::new(sets.clone())?, p),
            Self::Disjoint { functions, .. } => disjointly_supported(functions.clone(), p),
            Self::Grid { sets, j, .. } => indicator_rademacher_grid(&DisjointDyadicSets::new(sets.clone())?, *j, p),
            Self::Rademacher { n, .. } => rademacher_basis(*n, p),
            Self::Digits { blocks, values, .. } => independent_digit_functions(blocks, values, p),
            Self::Haar { max_level, .. } => haar_basis(*max_level, p),
            Self::Explicit { functions, tags, .. } => BasisSequence::new(functions.clone(), p, *tags),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::weights_from_g;
    use crate::norms::{mixed_norm, square_function_norm};
    use crate::stepfn::{DyadicInterval, DyadicSet};
    use approx::assert_relative_eq;

    fn halves() -> DisjointDyadicSets {
        DisjointDyadicSets::new(vec![
            DyadicSet::from(DyadicInterval::new(1, 0).unwrap()),
            DyadicSet::from(DyadicInterval::new(1, 1).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn disjoint_indicator_cases() {
        let b = disjoint_indicators::<f64>(&halves(), 4.0).unwrap();
        let c = 2f64.powf(0.25);
        assert_eq!(b.functions()[0].values(), &[c, 0.0]);
        assert_eq!(b.functions()[1].values(), &[0.0, c]);
        assert!(b.tags().disjoint_supports && b.tags().normalized);

        let unit = DisjointDyadicSets::new(vec![DyadicInterval::unit().into()]).unwrap();
        assert_eq!(disjoint_indicators::<f64>(&unit, 3.0).unwrap().functions()[0], StepFunction::constant(1.0));

        let quarter = DisjointDyadicSets::new(vec![DyadicInterval::new(2, 0).unwrap().into()]).unwrap();
        let b = disjoint_indicators::<f64>(&quarter, 4.0).unwrap();
        assert_relative_eq!(b.functions()[0].values()[0], 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn disjointly_supported_cases() {
        let ind = disjoint_indicators::<f64>(&halves(), 4.0).unwrap();
        let again = disjointly_supported(ind.functions().to_vec(), 4.0).unwrap();
        for (x, y) in ind.functions().iter().zip(again.functions()) {
            for (u, v) in x.values().iter().zip(y.values()) {
                assert_relative_eq!(u, v, max_relative = 1e-15);
            }
        }

        let f = StepFunction::new(2, vec![3.0, 1.0, 0.0, 0.0]).unwrap();
        let b = disjointly_supported(vec![f], 4.0).unwrap();
        let s = 20.5f64.powf(0.25);
        assert_relative_eq!(b.functions()[0].values()[0], 3.0 / s, max_relative = 1e-15);
        assert_relative_eq!(b.functions()[0].values()[1], 1.0 / s, max_relative = 1e-15);

        let one = StepFunction::constant(1.0);
        assert!(matches!(disjointly_supported(vec![one.clone(), one], 4.0), Err(Error::OverlappingSupports(0, 1))));
        assert!(matches!(disjointly_supported(vec![StepFunction::zero(1).unwrap()], 4.0), Err(Error::ZeroFunction(0))));
    }

    #[test]
    fn norming_companion_of_half_indicator() {
        let x = StepFunction::new(1, vec![2f64.powf(0.25), 0.0]).unwrap();
        let y = norming_companion(&x, 4.0).unwrap();
        assert_relative_eq!(y.g().values()[0], 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(y.g().values()[1], 0.0);
        assert_relative_eq!(y.norm(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(y.g().mul(&x.mul(&x).unwrap()).unwrap().integral(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn rademacher_cases() {
        assert_eq!(rademacher::<f64>(1).unwrap().values(), &[1.0, -1.0]);
        assert_eq!(rademacher::<f64>(2).unwrap().values(), &[1.0, -1.0, 1.0, -1.0]);
        let prod = rademacher::<f64>(1).unwrap().mul(&rademacher(2).unwrap()).unwrap();
        assert_eq!(prod.integral(), 0.0);
        assert_eq!(rademacher::<f64>(0).unwrap_err(), Error::InvalidRademacher(0));
    }

    #[test]
    fn grid_cases() {
        let b = indicator_rademacher_grid::<f64>(&halves(), 2, 4.0).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.groups(), Some(&[2, 2][..]));
        let c = 2f64.powf(0.25);
        assert_eq!(b.functions()[0], StepFunction::new(1, vec![c, 0.0]).unwrap());
        for n in 0..2 {
            let sq1 = b.functions()[2 * n].mul(&b.functions()[2 * n]).unwrap();
            for j in 0..2 {
                let x = &b.functions()[2 * n + j];
                assert_eq!(x.mul(x).unwrap(), sq1);
            }
        }
        let single = indicator_rademacher_grid::<f64>(&halves(), 1, 4.0).unwrap();
        let ind = disjoint_indicators::<f64>(&halves(), 4.0).unwrap();
        for (x, y) in single.functions().iter().zip(ind.functions()) {
            assert_eq!(x.mul(x).unwrap(), y.mul(y).unwrap());
        }
        let a = Coefficients::new(vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let groups = [Coefficients::new(vec![1.0, 1.0]).unwrap(), Coefficients::new(vec![1.0, 0.0]).unwrap()];
        let sq = square_function_norm(&a, &b).unwrap();
        assert_relative_eq!(sq, mixed_norm(&groups, 4.0).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(sq, 5f64.powf(0.25), max_relative = 1e-14);
    }

    #[test]
    fn digit_function_cases() {
        let b =
            independent_digit_functions::<f64>(&[vec![1], vec![2]], &[vec![1.0, -1.0], vec![1.0, -1.0]], 4.0).unwrap();
        assert_eq!(b.functions()[0], rademacher(1).unwrap());
        assert_eq!(b.functions()[1], rademacher(2).unwrap());

        let b = independent_digit_functions::<f64>(
            &[vec![1, 2], vec![3]],
            &[vec![1.0, 2.0, -3.0, 0.5], vec![1.0, -1.0]],
            4.0,
        )
        .unwrap();
        assert_eq!(b.functions()[1], rademacher(3).unwrap());
        let x1 = &b.functions()[0];
        // digits (0,0),(0,1),(1,0),(1,1) occupy the four quarters
        let ratio = x1.values()[0] / 1.0;
        assert_relative_eq!(x1.values()[2], 2.0 * ratio, max_relative = 1e-15);
        assert_relative_eq!(x1.values()[4], -3.0 * ratio, max_relative = 1e-15);
        assert_relative_eq!(x1.values()[7], 0.5 * ratio, max_relative = 1e-15);
        for (x, y) in [(0, 1), (1, 0)] {
            let fx = b.functions()[x].mul(&b.functions()[x]).unwrap();
            let fy = b.functions()[y].mul(&b.functions()[y]).unwrap();
            assert_relative_eq!(fx.mul(&fy).unwrap().integral(), fx.integral() * fy.integral(), max_relative = 1e-12);
        }

        assert!(independent_digit_functions::<f64>(&[vec![1, 2], vec![2]], &[vec![1.0; 4], vec![1.0; 2]], 4.0).is_err());
        assert!(independent_digit_functions::<f64>(&[vec![1]], &[vec![1.0; 4]], 4.0).is_err());
        assert!(independent_digit_functions::<f64>(&[vec![0]], &[vec![1.0; 2]], 4.0).is_err());
    }

    #[test]
    fn haar_cases() {
        assert_eq!(haar::<f64>(HaarIndex::new(0, 0).unwrap(), 4.0).unwrap(), StepFunction::constant(1.0));
        assert_eq!(haar::<f64>(HaarIndex::new(1, 0).unwrap(), 4.0).unwrap().values(), &[1.0, -1.0]);
        let c = 2f64.powf(0.25);
        assert_eq!(haar::<f64>(HaarIndex::new(2, 0).unwrap(), 4.0).unwrap().values(), &[c, -c, 0.0, 0.0]);
        assert!(HaarIndex::new(0, 1).is_err());
        assert!(HaarIndex::new(2, 2).is_err());
        for i in 0..64 {
            assert_eq!(HaarIndex::from_flat(i).flat(), i);
        }
    }

    #[test]
    fn haar_closed_form_hand_values() {
        let hg = HaarG::new(1, vec![1.0], 4.0).unwrap();
        assert_relative_eq!(haar_weight_closed_form(&hg, 0, 0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(haar_weight_closed_form(&hg, 1, 0).unwrap(), 1.0, max_relative = 1e-15);
        for l in 0..2 {
            assert_relative_eq!(haar_weight_closed_form(&hg, 2, l).unwrap(), 0.5f64.sqrt(), max_relative = 1e-15);
        }
        let hg = HaarG::new(2, vec![1.0, 0.0], 4.0).unwrap();
        assert_relative_eq!(haar_weight_closed_form(&hg, 1, 0).unwrap(), 0.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(haar_weight_closed_form(&hg, 3, 0).unwrap(), 0.5f64.sqrt(), max_relative = 1e-15);
        assert!(haar_weight_closed_form(&hg, 3, 4).is_err());
    }

    #[test]
    fn haar_g_cases() {
        let g = haar_g(&HaarG::new(1, vec![1.0], 4.0).unwrap()).unwrap();
        assert_eq!(g.g(), &StepFunction::constant(1.0));
        let g2 = haar_g(&HaarG::new(2, vec![1.0, 0.0], 4.0).unwrap()).unwrap();
        assert_relative_eq!(g2.g().values()[0], 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(g2.g().values()[1], 0.0);
        assert_relative_eq!(g.norm(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(g2.norm(), 1.0, max_relative = 1e-15);
        assert!(HaarG::new(2, vec![1.0, 1.0], 4.0).is_err());
        assert!(HaarG::new(2, vec![1.0], 4.0).is_err());
    }

    #[test]
    fn closed_form_agrees_with_weights_from_g() {
        let hg = HaarG::normalized(3, vec![0.3, 1.0, 0.0, 2.0], 3.0).unwrap();
        let g = haar_g(&hg).unwrap();
        let basis = haar_basis(5, 3.0).unwrap();
        let w = weights_from_g(&g, &basis).unwrap();
        for (i, raw) in w.raw.iter().enumerate() {
            let idx = HaarIndex::from_flat(i);
            assert_relative_eq!(raw * raw, haar_weight_closed_form(&hg, idx.n, idx.k).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn truncated_norm_cases() {
        let fam = vec![HaarG::new(1, vec![1.0], 4.0).unwrap()];
        let a = HaarCoefficients::single(3, HaarIndex::new(0, 0).unwrap(), 1.0).unwrap();
        let r = haar_truncated_norm(&a, &fam, 4.0).unwrap();
        assert_relative_eq!(r.full, 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.truncated, 1.0, max_relative = 1e-15);

        let a = HaarCoefficients::single(3, HaarIndex::new(2, 1).unwrap(), 2.0).unwrap();
        let r = haar_truncated_norm(&a, &fam, 4.0).unwrap();
        assert_eq!(r.truncated, 0.0);
        assert_relative_eq!(r.full, 2.0 * 0.5f64.sqrt().sqrt(), max_relative = 1e-15);
        assert!(haar_truncated_norm(&a, &[], 4.0).is_err());
    }

    #[test]
    fn optimal_b_attains_the_dual_bound() {
        let coefs: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.7).collect();
        let a = HaarCoefficients::new(4, Coefficients::new(coefs).unwrap()).unwrap();
        for truncated in [false, true] {
            for n in 1..=4 {
                let best = haar_optimal_b(&a, n, 4.0, truncated).unwrap();
                let top = haar_quadratic_form(&a, &best, truncated).unwrap();
                for other in [
                    HaarG::uniform(n, 4.0).unwrap(),
                    HaarG::normalized(n, (0..1 << (n - 1)).map(|k| k as f64 + 0.5).collect(), 4.0).unwrap(),
                ] {
                    assert!(haar_quadratic_form(&a, &other, truncated).unwrap() <= top * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn descriptors_build_bases() {
        let d: BasisDescriptor = serde_json::from_str(r#"{"kind": "haar", "max_level": 4, "p": 4}"#).unwrap();
        let b = d.build(None).unwrap();
        assert_eq!(b.len(), 16);
        assert!(b.tags().haar);
        assert!(d.build(Some(3.0)).is_err());

        let d: BasisDescriptor = serde_json::from_str(
            r#"{"kind": "indicators", "sets": [[{"level": 1, "index": 0}], [{"level": 2, "index": 2}, {"level": 2, "index": 3}]]}"#,
        )
        .unwrap();
        assert!(d.build(None).is_err());
        let b = d.build(Some(4.0)).unwrap();
        assert!(b.tags().disjoint_supports);
        assert_eq!(b.functions()[1].values(), b.functions()[0].values().iter().rev().copied().collect::<Vec<_>>());

        let d: BasisDescriptor =
            serde_json::from_str(r#"{"kind": "grid", "sets": [[{"level": 0, "index": 0}]], "j": 3, "p": 6}"#).unwrap();
        assert_eq!(d.build(None).unwrap().groups(), Some(&[3usize][..]));

        assert!(serde_json::from_str::<BasisDescriptor>(r#"{"kind": "wavelets"}"#).is_err());
    }
}
