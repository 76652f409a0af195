//! Norming functions and the weight families they induce.
//!
//! A norming function is a non-negative `g` in the unit ball of `L_q`,
//! `q = p/(p-2)`. Each one yields weights `w_{g,n} = (∫ g x_n²)^{1/2}`, and
//! the trivial-partition norms built from these weights have supremum
//! `‖Σ a_n² x_n²‖_{p/2}^{1/2}` over all such `g`. The supremum is attained by
//! the Hölder maximizer returned from [`optimal_g`].

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{
    check_p_above_two, square_function, BasisSequence, Coefficients, Family, PWPair, Partition, Weights,
};
use crate::scalar::{dual_exponent, Real};
use crate::stepfn::{DisjointDyadicSets, StepFunction};

/// Floor applied to constructed weights that come out as zero.
pub const CLAMP_EPS: f64 = 1e-30;

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
struct RawNormingFunction<T> {
    g: StepFunction<T>,
    q: T,
}

/// Non-negative `g` with `‖g‖_q <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNormingFunction<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct NormingFunction<T: Real> {
    g: StepFunction<T>,
    q: T,
}

impl<T: Real> TryFrom<RawNormingFunction<T>> for NormingFunction<T> {
    type Error = Error;
    fn try_from(raw: RawNormingFunction<T>) -> Result<Self> {
        Self::new(raw.g, raw.q)
    }
}

impl<T: Real> NormingFunction<T> {
    /// Wraps `g` as an element of the unit ball of `L_q`.
    pub fn new(g: StepFunction<T>, q: T) -> Result<Self> {
        if !(q > T::one()) || !q.is_finite() {
            return Err(Error::InvalidExponent {
                value: q.to_f64().unwrap_or(f64::NAN),
                reason: "dual exponent must satisfy 1 < q < inf",
            });
        }
        if !g.is_nonnegative() {
            return Err(Error::InvalidNormingFunction("g takes negative values".into()));
        }
        let norm = g.lp_norm(q)?;
        if norm > T::one() + T::validation_tol() {
            return Err(Error::InvalidNormingFunction(format!("‖g‖_q = {norm} exceeds 1")));
        }
        Ok(Self { g, q })
    }

    /// Same as [`NormingFunction::new`] with `q = p/(p-2)`.
    pub fn for_p(g: StepFunction<T>, p: T) -> Result<Self> {
        check_p_above_two(p)?;
        Self::new(g, dual_exponent(p))
    }

    /// The constant function 1, which has unit norm for every `q`.
    pub fn one(p: T) -> Result<Self> {
        Self::for_p(StepFunction::constant(T::one()), p)
    }

    pub fn g(&self) -> &StepFunction<T> {
        &self.g
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn norm(&self) -> T {
        self.g.lp_norm(self.q).expect("q > 1 checked on construction")
    }
}

/// Weights `w_{g,n}` with a record of every entry that had to be clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedWeights<T> {
    pub weights: Weights<T>,
    /// `(∫ g x_n²)^{1/2}` before clamping.
    pub raw: Vec<T>,
    /// Indices raised to [`CLAMP_EPS`] because `∫ g x_n²` vanished.
    pub clamped_low: Vec<usize>,
    /// Indices lowered to 1 because rounding pushed them just above it.
    pub capped: Vec<usize>,
}

/// `w_n = (∫ g x_n²)^{1/2}` for every basis function.
///
/// Zero weights are clamped to [`CLAMP_EPS`]; values above one within the
/// validation tolerance are capped at one. Anything larger is an error since
/// it cannot occur for a normalized basis.
pub fn weights_from_g<T: Real>(g: &NormingFunction<T>, basis: &BasisSequence<T>) -> Result<DerivedWeights<T>> {
    let eps = T::lit(CLAMP_EPS);
    let mut raw = Vec::with_capacity(basis.len());
    let mut w = Vec::with_capacity(basis.len());
    let mut clamped_low = Vec::new();
    let mut capped = Vec::new();
    for (n, x) in basis.functions().iter().enumerate() {
        let integral = g.g.mul(&x.mul(x)?)?.integral();
        if integral < T::zero() {
            return Err(Error::Internal(format!("negative integrand ∫g·x_{n}² = {integral}")));
        }
        let value = integral.sqrt();
        raw.push(value);
        if value < eps {
            clamped_low.push(n);
            w.push(eps);
        } else if value > T::one() {
            if value > T::one() + T::validation_tol() {
                return Err(Error::InvalidWeight { index: n, value: value.to_f64().unwrap_or(f64::NAN) });
            }
            capped.push(n);
            w.push(T::one());
        } else {
            w.push(value);
        }
    }
    Ok(DerivedWeights { weights: Weights::new(w)?, raw, clamped_low, capped })
}

/// The Hölder maximizer `g = f^{(p-2)/2} / ‖f‖_{p/2}^{(p-2)/2}` for
/// `f = Σ a_n² x_n²`, so that `∫ g f = ‖f‖_{p/2}` and `‖g‖_q = 1`.
pub fn optimal_g<T: Real>(a: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<NormingFunction<T>> {
    let f = square_function(a, basis)?;
    if f.is_zero() {
        return Err(Error::DegenerateCoefficients);
    }
    let p = basis.p();
    optimal_g_for(&f, p)
}

/// Hölder maximizer for an arbitrary non-negative, non-zero `f` in `L_{p/2}`.
pub fn optimal_g_for<T: Real>(f: &StepFunction<T>, p: T) -> Result<NormingFunction<T>> {
    check_p_above_two(p)?;
    if f.is_zero() {
        return Err(Error::DegenerateCoefficients);
    }
    let two = T::lit(2.0);
    let alpha = (p - two) / two;
    let scale = f.lp_norm(p / two)?.powf(alpha);
    let g = f.abs_pow(alpha)?.map(|v| v / scale)?;
    NormingFunction::for_p(g, p)
}

fn check_admissible_c<T: Real>(c: &Coefficients<T>, q: T) -> Result<()> {
    for (index, &v) in c.entries().iter().enumerate() {
        if v < T::zero() {
            return Err(Error::NegativeEntry { index, value: v.to_f64().unwrap_or(f64::NAN) });
        }
    }
    let norm = c.entries().iter().map(|v| v.powf(q)).sum::<T>().powf(q.recip());
    if (norm - T::one()).abs() > T::validation_tol() {
        return Err(Error::NotNormalized { norm: norm.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

fn maxc_terms<T: Real>(c: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<(u32, Vec<Vec<T>>)> {
    if c.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: c.len() });
    }
    let q = dual_exponent(basis.p());
    check_admissible_c(c, q)?;
    let level = basis.level();
    let power = basis.p() - T::lit(2.0);
    let terms = basis
        .functions()
        .iter()
        .zip(c.entries())
        .map(|(x, &cn)| {
            let xv = x.values_at(level)?;
            Ok(xv.iter().map(|v| cn * v.abs().powf(power)).collect())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    Ok((level, terms))
}

/// `g = max_n c_n |x_n|^{p-2}` for non-negative `c` with `‖c‖_q = 1`.
pub fn maxc_g<T: Real>(c: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<NormingFunction<T>> {
    let (level, terms) = maxc_terms(c, basis)?;
    let g = (0..1usize << level).map(|k| terms.iter().fold(T::zero(), |m, t| m.max(t[k]))).collect();
    NormingFunction::for_p(StepFunction::new(level, g)?, basis.p())
}

/// The selector `τ(t) = min{k : c_k |x_k(t)|^{p-2} = g(t)}` on every cell of
/// the basis grid; `g` restricted to `{τ = n}` equals `c_n |x_n|^{p-2}`.
pub fn maxc_selector<T: Real>(c: &Coefficients<T>, basis: &BasisSequence<T>) -> Result<Vec<usize>> {
    let (level, terms) = maxc_terms(c, basis)?;
    Ok((0..1usize << level)
        .map(|k| {
            let g = terms.iter().fold(T::zero(), |m, t| m.max(t[k]));
            terms.iter().position(|t| t[k] == g).expect("max is attained")
        })
        .collect())
}

/// Maximizer of `Σ a_n² c_n` over non-negative `c` on the unit sphere of
/// `ℓ_q`, `q = p/(p-2)`: `c_n ∝ |a_n|^{p-2}`. The maximum is `‖a‖_p²`.
pub fn dual_optimal_c<T: Real>(a: &Coefficients<T>, p: T) -> Result<Coefficients<T>> {
    check_p_above_two(p)?;
    if a.is_zero() {
        return Err(Error::DegenerateCoefficients);
    }
    let q = dual_exponent(p);
    let raw: Vec<T> = a.entries().iter().map(|v| v.abs().powf(p - T::lit(2.0))).collect();
    let norm = raw.iter().map(|v| v.powf(q)).sum::<T>().powf(q.recip());
    Coefficients::new(raw.into_iter().map(|v| v / norm).collect())
}

/// Grid maximum of `Σ a_n² c_n` over the non-negative part of the `ℓ_q` sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMax<T> {
    pub value: T,
    pub c: Vec<T>,
    pub evaluations: u64,
}

/// Largest dimension accepted by [`brute_force_dual_max`].
pub const BRUTE_FORCE_MAX_DIM: usize = 4;

/// Exhaustive search for the maximum of `Σ a_n² c_n` subject to `c >= 0`,
/// `Σ c_n^q = 1`.
///
/// The sphere is parametrised by `u_n = c_n^q` on the probability simplex.
/// Every simplex point with coordinates on the `step` lattice is evaluated,
/// then `zoom_passes` local grids of 41 points per axis are laid around the
/// incumbent, each ten times finer than the last. No closed form is used.
pub fn brute_force_dual_max<T: Real>(a: &Coefficients<T>, p: T, step: f64, zoom_passes: usize) -> Result<GridMax<T>> {
    check_p_above_two(p)?;
    let n = a.len();
    if n > BRUTE_FORCE_MAX_DIM {
        return Err(Error::DimensionMismatch { expected: BRUTE_FORCE_MAX_DIM, found: n });
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidExponent { value: step, reason: "grid step must lie in (0, 1]" });
    }
    let inv_q = dual_exponent(p).recip();
    let sq: Vec<T> = a.entries().iter().map(|v| v.powi(2)).collect();
    let objective = |u: &[T]| -> T { u.iter().zip(&sq).map(|(&ui, &s)| s * ui.powf(inv_q)).sum() };

    // coarse lattice: u_n = k_n / K with Σ k_n = K
    let k_total = (1.0 / step).round() as usize;
    let tables: Vec<Vec<T>> = sq
        .iter()
        .map(|&s| {
            (0..=k_total)
                .map(|k| s * (T::from_usize(k).unwrap() / T::from_usize(k_total).unwrap()).powf(inv_q))
                .collect()
        })
        .collect();
    let mut best = (T::neg_infinity(), vec![0usize; n]);
    let mut counts = vec![0usize; n];
    let mut evaluations = 0u64;
    lattice_search(&tables, k_total, 0, T::zero(), &mut counts, &mut best, &mut evaluations);

    let kf = T::from_usize(k_total).unwrap();
    let mut u: Vec<T> = best.1.iter().map(|&k| T::from_usize(k).unwrap() / kf).collect();
    let mut value = best.0;
    let mut h = T::lit(step);
    const HALF: i64 = 20;
    let free = n.saturating_sub(1);
    for _ in 0..zoom_passes {
        if free == 0 {
            break;
        }
        let fine = h / T::lit(10.0);
        let centre = u.clone();
        let mut offsets = vec![-HALF; free];
        let mut candidate = vec![T::zero(); n];
        loop {
            let mut rest = T::one();
            let mut feasible = true;
            for i in 0..free {
                let ui = centre[i] + T::from_i64(offsets[i]).unwrap() * fine;
                if ui < T::zero() {
                    feasible = false;
                    break;
                }
                candidate[i] = ui;
                rest = rest - ui;
            }
            if feasible && rest >= T::zero() {
                candidate[free] = rest;
                evaluations += 1;
                let v = objective(&candidate);
                if v > value {
                    value = v;
                    u.copy_from_slice(&candidate);
                }
            }
            // odometer over the free coordinates
            let mut i = 0;
            while i < free {
                offsets[i] += 1;
                if offsets[i] <= HALF {
                    break;
                }
                offsets[i] = -HALF;
                i += 1;
            }
            if i == free {
                break;
            }
        }
        h = fine;
    }
    let c = u.iter().map(|&ui| ui.powf(inv_q)).collect();
    Ok(GridMax { value, c, evaluations })
}

fn lattice_search<T: Real>(
    tables: &[Vec<T>],
    remaining: usize,
    i: usize,
    partial: T,
    counts: &mut [usize],
    best: &mut (T, Vec<usize>),
    evaluations: &mut u64,
) {
    let n = tables.len();
    if i == n - 1 {
        counts[i] = remaining;
        *evaluations += 1;
        let v = partial + tables[i][remaining];
        if v > best.0 {
            best.0 = v;
            best.1.copy_from_slice(counts);
        }
        return;
    }
    if i == n - 2 {
        // innermost pair inline
        let (ti, tl) = (&tables[i], &tables[n - 1]);
        for k in 0..=remaining {
            let v = partial + ti[k] + tl[remaining - k];
            if v > best.0 {
                counts[i] = k;
                counts[n - 1] = remaining - k;
                best.0 = v;
                best.1.copy_from_slice(counts);
            }
        }
        *evaluations += remaining as u64 + 1;
        return;
    }
    for k in 0..=remaining {
        counts[i] = k;
        lattice_search(tables, remaining - k, i + 1, partial + tables[i][k], counts, best, evaluations);
    }
}

/// Replaces `g` by its conditional expectation on the σ-algebra generated by
/// `sets`. Weights of any basis whose squares are measurable with respect to
/// `sets` are unchanged.
pub fn reduce_g<T: Real>(g: &NormingFunction<T>, sets: &DisjointDyadicSets) -> Result<NormingFunction<T>> {
    NormingFunction::new(g.g.cond_expect(sets)?, g.q)
}

/// One trivial-partition pair per norming function, optionally followed by
/// the discrete partition with unit weights.
pub fn build_family<T: Real>(
    gs: &[NormingFunction<T>],
    basis: &BasisSequence<T>,
    include_discrete: bool,
) -> Result<Family<T>> {
    if gs.is_empty() {
        return Err(Error::EmptyInput("norming functions"));
    }
    let n = basis.len();
    let trivial = Partition::trivial(n)?;
    let mut pairs = gs
        .iter()
        .map(|g| PWPair::new(trivial.clone(), weights_from_g(g, basis)?.weights))
        .collect::<Result<Vec<_>>>()?;
    if include_discrete {
        pairs.push(discrete_pair(n)?);
    }
    Family::new(pairs)
}

/// `(P_D, w ≡ 1)`.
pub fn discrete_pair<T: Real>(n: usize) -> Result<PWPair<T>> {
    PWPair::new(Partition::discrete(n)?, Weights::ones(n)?)
}

/// Distribution of the raw cell values drawn by [`sample_g`] before normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GSampler {
    #[default]
    SquaredNormal,
    Uniform,
}

/// Random element of the unit sphere of `L_q` (non-negative, full support
/// with probability one) at grid `level`.
pub fn sample_g<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    level: u32,
    p: T,
    sampler: GSampler,
) -> Result<NormingFunction<T>> {
    check_p_above_two(p)?;
    let q = dual_exponent(p);
    loop {
        let raw = StepFunction::from_fn(level, |_| {
            let v: f64 = match sampler {
                GSampler::SquaredNormal => {
                    let z: f64 = StandardNormal.sample(rng);
                    z * z
                }
                GSampler::Uniform => rng.random::<f64>(),
            };
            T::lit(v)
        })?;
        let norm = raw.lp_norm(q)?;
        if norm > T::zero() {
            return NormingFunction::new(raw.map(|v| v / norm)?, q);
        }
    }
}
