//! Finite point processes on a discrete, weighted state space.
//!
//! A process is stored as `p₀` plus one Janossy density value per multiset of
//! points of size `1..=N`. Sums over ordered tuples `(x₁, …, xₙ)` are computed
//! over multisets, each weighted by its permutation multiplicity.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{multisets_up_to, Multiset};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Labeled points with positive quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace<S> {
    labels: Vec<String>,
    weights: Vec<S>,
}

impl<S: Scalar> StateSpace<S> {
    pub fn new(labels: Vec<String>, weights: Vec<S>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace(
                "state space needs at least one point".into(),
            ));
        }
        if labels.len() != weights.len() {
            return Err(Error::InvalidSpace(format!(
                "{} labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(',') {
                return Err(Error::InvalidSpace(format!(
                    "label `{l}` must be nonempty and comma-free"
                )));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}`")));
            }
        }
        if let Some(w) = weights.iter().find(|w| **w <= S::zero()) {
            return Err(Error::InvalidSpace(format!("weight {w} is not positive")));
        }
        Ok(StateSpace { labels, weights })
    }

    /// Unit weights (counting measure).
    pub fn unit<L: Into<String>>(labels: impl IntoIterator<Item = L>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let weights = vec![S::one(); labels.len()];
        Self::new(labels, weights)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> StateSpace<T> {
        StateSpace {
            labels: self.labels.clone(),
            weights: self.weights.iter().map(f).collect(),
        }
    }
}

/// Values `ψ(x)` of a test function, one per state-space point.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<S> {
    pub values: Vec<S>,
}

impl<S: Scalar> TestFunction<S> {
    pub fn new(values: Vec<S>) -> Self {
        TestFunction { values }
    }

    pub fn constant(space: &StateSpace<S>, value: S) -> Self {
        TestFunction {
            values: vec![value; space.len()],
        }
    }
}

/// `p₀` and the symmetric Janossy densities up to order `max_order`.
///
/// Only nonzero densities are stored; absent multisets read as zero. Values
/// may be negative when the process comes from a deconvolution that is not a
/// probability law.
#[derive(Debug, Clone, PartialEq)]
pub struct JanossyProcess<S> {
    space: StateSpace<S>,
    max_order: usize,
    p0: S,
    densities: BTreeMap<Multiset, S>,
    tail_mass_allowed: bool,
}

impl<S: Scalar> JanossyProcess<S> {
    /// Process with the given `p₀` and no densities yet.
    pub fn new(space: StateSpace<S>, max_order: usize, p0: S) -> Self {
        JanossyProcess {
            space,
            max_order,
            p0,
            densities: BTreeMap::new(),
            tail_mass_allowed: false,
        }
    }

    /// The process with no points: `G ≡ 1`.
    pub fn empty(space: StateSpace<S>, max_order: usize) -> Self {
        Self::new(space, max_order, S::one())
    }

    pub fn space(&self) -> &StateSpace<S> {
        &self.space
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn p0(&self) -> &S {
        &self.p0
    }

    pub fn set_p0(&mut self, p0: S) {
        self.p0 = p0;
    }

    pub fn tail_mass_allowed(&self) -> bool {
        self.tail_mass_allowed
    }

    pub fn set_tail_mass_allowed(&mut self, allowed: bool) {
        self.tail_mass_allowed = allowed;
    }

    /// Stored (nonzero) densities in canonical key order.
    pub fn densities(&self) -> impl Iterator<Item = (&Multiset, &S)> {
        self.densities.iter()
    }

    pub fn stored_count(&self) -> usize {
        self.densities.len()
    }

    /// Density on a multiset; size 0 gives `p₀`.
    pub fn density(&self, key: &Multiset) -> S {
        if key.is_empty() {
            return self.p0.clone();
        }
        self.densities.get(key).cloned().unwrap_or_else(S::zero)
    }

    /// Density at an ordered tuple of point indices.
    pub fn density_at(&self, points: &[usize]) -> S {
        self.density(&Multiset::from_points(points))
    }

    pub fn set_density(&mut self, key: Multiset, value: S) -> Result<()> {
        let n = key.size();
        if n == 0 {
            self.p0 = value;
            return Ok(());
        }
        if n > self.max_order {
            return Err(Error::OrderExceeded {
                order: n,
                max: self.max_order,
            });
        }
        if key.max_index().is_some_and(|i| i >= self.space.len()) {
            return Err(Error::InvalidProcess(
                "density key outside the state space".into(),
            ));
        }
        if value.is_zero() {
            self.densities.remove(&key);
        } else {
            self.densities.insert(key, value);
        }
        Ok(())
    }

    pub fn set_density_at(&mut self, points: &[usize], value: S) -> Result<()> {
        self.set_density(Multiset::from_points(points), value)
    }

    /// Drops densities above `order`. Any dropped nonzero mass turns on the
    /// tail flag.
    pub fn truncated(&self, order: usize) -> Self {
        let mut out = self.clone();
        if order >= self.max_order {
            return out;
        }
        out.max_order = order;
        let before = out.densities.len();
        out.densities.retain(|k, _| k.size() <= order);
        if out.densities.len() != before {
            out.tail_mass_allowed = true;
        }
        out
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> JanossyProcess<T> {
        let mut densities = BTreeMap::new();
        for (k, v) in &self.densities {
            let t = f(v);
            if !t.is_zero() {
                densities.insert(k.clone(), t);
            }
        }
        JanossyProcess {
            space: self.space.map_scalar(&f),
            max_order: self.max_order,
            p0: f(&self.p0),
            densities,
            tail_mass_allowed: self.tail_mass_allowed,
        }
    }

    pub fn to_float(&self) -> JanossyProcess<f64> {
        self.map_scalar(Scalar::to_f64)
    }

    /// Largest `|a − b|` over `p₀` and every density stored in either process.
    pub fn max_abs_difference(&self, other: &Self) -> S {
        let mut worst = (self.p0.clone() - other.p0.clone()).abs();
        for key in self.densities.keys().chain(other.densities.keys()) {
            let d = (self.density(key) - other.density(key)).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    /// Same densities in the mode's sense of equality (exact for rationals).
    pub fn densities_close_to(&self, other: &Self) -> bool {
        self.space == other.space
            && self.p0.close_to(&other.p0)
            && self
                .densities
                .keys()
                .chain(other.densities.keys())
                .all(|k| self.density(k).close_to(&other.density(k)))
    }

    pub fn min_value(&self) -> S {
        self.densities
            .values()
            .fold(self.p0.clone(), |m, v| if *v < m { v.clone() } else { m })
    }

    /// Nonnegative values, and unit mass unless tail mass is allowed (then
    /// mass at most one).
    pub fn is_valid_probability(&self) -> bool {
        if self.p0.is_definitely_negative()
            || self.densities.values().any(Scalar::is_definitely_negative)
        {
            return false;
        }
        let mass = normalization_mass(self);
        mass.close_to(&S::one()) || (self.tail_mass_allowed && mass <= S::one())
    }
}

/// `∏ (ψ(x)·w(x))^{m_x}` over the entries of a multiset.
fn weighted_product<S: Scalar>(key: &Multiset, psi: &[S], weights: &[S]) -> S {
    let mut out = S::one();
    for &(x, m) in key.entries() {
        let base = psi[x].clone() * weights[x].clone();
        out *= base.powi(m as usize);
    }
    out
}

/// `G(ψ) = p₀ + Σₙ (1/n!) Σ_{ordered tuples} pₙ(x₁..xₙ) ∏ ψ(xᵢ)w(xᵢ)`.
pub fn pgfl_eval<S: Scalar>(process: &JanossyProcess<S>, psi: &TestFunction<S>) -> S {
    let weights = process.space.weights();
    let mut acc = process.p0.clone();
    for (key, value) in &process.densities {
        let coeff = S::from_u64(key.permutation_multiplicity()) / S::factorial(key.size());
        acc += coeff * value.clone() * weighted_product(key, &psi.values, weights);
    }
    acc
}

/// Total probability mass `G(1)`.
pub fn normalization_mass<S: Scalar>(process: &JanossyProcess<S>) -> S {
    pgfl_eval(process, &TestFunction::constant(&process.space, S::one()))
}

/// Poisson process with intensity `λ(x)` per unit weight, truncated at
/// order `max_order`.
///
/// `p₀ = e^{−Λ}` with `Λ = Σ λ(x)w(x)`. In rational mode `e^{−Λ}` is the
/// exact binary value of the nearest double, so only ratios of densities are
/// exact. The tail flag is set whenever `Λ > 0`.
pub fn poisson_process<S: Scalar>(
    space: &StateSpace<S>,
    intensity: &[S],
    max_order: usize,
) -> Result<JanossyProcess<S>> {
    if intensity.len() != space.len() {
        return Err(Error::InvalidProcess(format!(
            "{} intensities for {} points",
            intensity.len(),
            space.len()
        )));
    }
    if let Some(i) = intensity.iter().position(|l| l.is_negative()) {
        return Err(Error::NegativeIntensity {
            label: space.labels()[i].clone(),
            value: intensity[i].to_f64(),
        });
    }
    let total = intensity
        .iter()
        .zip(space.weights())
        .fold(S::zero(), |acc, (l, w)| acc + l.clone() * w.clone());
    if total.is_zero() {
        return Ok(JanossyProcess::empty(space.clone(), max_order));
    }
    let factor = S::from_f64((-total.to_f64()).exp());
    let mut out = JanossyProcess::new(space.clone(), max_order, factor.clone());
    out.tail_mass_allowed = true;
    for key in multisets_up_to(space.len(), 1, max_order) {
        let mut v = factor.clone();
        for &(x, m) in key.entries() {
            v *= intensity[x].powi(m as usize);
        }
        out.set_density(key, v)?;
    }
    Ok(out)
}

/// Random process with nonnegative rational densities, `p₀ > 0`, and unit
/// mass. Deterministic per seed.
///
/// Order-`n` values are drawn as `a / (b·Mⁿ)` so each order carries
/// comparable mass.
pub fn random_process<S: Scalar>(
    space: &StateSpace<S>,
    max_order: usize,
    seed: u64,
) -> JanossyProcess<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = space.len() as i64;
    let p0 = Rational::new(rng.random_range(2i64..=8).into(), 1.into());
    let mut out = JanossyProcess::new(space.clone(), max_order, S::from_rational(&p0));
    for key in multisets_up_to(space.len(), 1, max_order) {
        let a: i64 = rng.random_range(0..=6);
        let b: i64 = rng.random_range(1..=3);
        let scale = b * m.pow(key.size() as u32);
        let v = Rational::new(a.into(), scale.into());
        out.set_density(key, S::from_rational(&v))
            .expect("generated keys lie within the space and order");
    }
    let mass = normalization_mass(&out);
    out.p0 = out.p0.clone() / mass.clone();
    for v in out.densities.values_mut() {
        *v = v.clone() / mass.clone();
    }
    out
}

/// `|points|`-th differential of `G` at `ψ = 0` in the discrete Dirac
/// directions `ξᵢ = 1_{xᵢ}/w(xᵢ)`, by direct expansion of the generating
/// functional over ordered tuples. Equals the stored density.
pub fn janossy_consistency_check<S: Scalar>(
    process: &JanossyProcess<S>,
    points: &[usize],
) -> Result<S> {
    let k = points.len();
    if k > process.max_order {
        return Err(Error::OrderExceeded {
            order: k,
            max: process.max_order,
        });
    }
    let m = process.space.len();
    if points.iter().any(|&x| x >= m) {
        return Err(Error::InvalidProcess(
            "point outside the state space".into(),
        ));
    }
    let weights = process.space.weights();
    let direction = |i: usize, y: usize| -> S {
        if points[i] == y {
            S::one() / weights[y].clone()
        } else {
            S::zero()
        }
    };
    let perms = permutations(k);
    let mut total = S::zero();
    let mut tuple = vec![0usize; k];
    'tuples: loop {
        // only the n = k term of G survives k differentiations at ψ = 0:
        // ∂ᵏ/∂t₁…∂tₖ ∏ⱼ Σᵢ tᵢ ξᵢ(yⱼ) = Σ_σ ∏ⱼ ξ_σ(j)(yⱼ)
        let mut increments = S::zero();
        for sigma in &perms {
            let mut term = S::one();
            for (j, &y) in tuple.iter().enumerate() {
                term *= direction(sigma[j], y);
                if term.is_zero() {
                    break;
                }
            }
            increments += term;
        }
        if !increments.is_zero() {
            let mut measure = S::one();
            for &y in &tuple {
                measure *= weights[y].clone();
            }
            total += process.density_at(&tuple) * measure * increments;
        }
        for slot in tuple.iter_mut().rev() {
            *slot += 1;
            if *slot < m {
                continue 'tuples;
            }
            *slot = 0;
        }
        break;
    }
    Ok(total / S::factorial(k))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}
