//! Superposition and deconvolution of point processes.
//!
//! Superposing independent processes multiplies their generating
//! functionals, `G = G₁·G₂`, and the Janossy densities of the product follow
//! from the product rule with Dirac increments at `h = 0`:
//!
//! ```text
//! p(x₁..xₙ) = Σ_{Φ⊆Ξ} q(Φ) · r(Ξ∖Φ)
//! ```
//!
//! Deconvolution recovers `G₂ = G/G₁` through the higher-order quotient rule:
//!
//! ```text
//! r(Ξ) = Σ_{Π⊆Ξ} [ Σ_{π ∈ partitions(Π)} (−1)^{|π|} |π|! / q₀^{|π|+1} ∏_{ω∈π} q(ω) ] · p(Ξ∖Π)
//! ```
//!
//! with `r₀ = p₀/q₀`. Both sums run over labeled subsets of the argument list;
//! repeated points are handled by enumerating the expanded tuple of each
//! multiset key.
//!
//! The bracketed inner sum depends only on the multiset of points in `Π`, so
//! it is evaluated once per multiset of size `≤ N` and reused (see
//! [`Options::memoize`]). Per-target evaluation is data-parallel; each value
//! is accumulated in a fixed canonical term order (subsets by increasing
//! bitmask, partitions in restricted-growth order).

use std::collections::HashMap;

use serde::Serialize;

use crate::combinatorics::{
    binomial, multisets_up_to, partition_tables, Multiset, PartitionTable, DEFAULT_MAX_ORDER,
    MAX_GROUND,
};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::process::{normalization_mass, pgfl_eval, JanossyProcess, TestFunction};
use crate::scalar::Scalar;
use crate::series::reciprocal_prefactors;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub execution: Execution,
    /// Cache inner partition sums per multiset instead of re-enumerating
    /// them for every `(target, subset)` pair.
    pub memoize: bool,
    /// Largest output order computed. Superposition output is capped here;
    /// deconvolution refuses inputs whose common order exceeds it.
    pub order_limit: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            execution: Execution::default(),
            memoize: true,
            order_limit: DEFAULT_MAX_ORDER,
        }
    }
}

/// Diagnostics for a deconvolution. `G/G₁` need not be a generating
/// functional, so failure is quantified here rather than raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeconvolutionReport<S> {
    /// Most negative recovered value, zero if none is negative.
    pub min_density: S,
    pub negative_count: usize,
    /// Total `(Π, π)` terms of the quotient rule, summed over all targets.
    pub term_count: u64,
    /// Normalization mass of the recovered process.
    pub mass: S,
    pub valid_process: bool,
    /// `term_count` split by order `n = 0..=N`.
    #[serde(skip)]
    pub terms_by_order: Vec<u64>,
}

fn check_spaces<S: Scalar>(a: &JanossyProcess<S>, b: &JanossyProcess<S>) -> Result<()> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// Mixed-radix multiset codes: a multiset with counts `cᵢ ≤ order` maps to
/// `Σ cᵢ·(order+1)ⁱ`. Codes are additive under multiset union, so the codes
/// of all `2ⁿ` sub-tuples of a target fill in with one addition each.
struct Coder {
    radix: Vec<u128>,
}

impl Coder {
    fn new(points: usize, order: usize) -> Result<Self> {
        let base = order as u128 + 1;
        let mut radix = Vec::with_capacity(points);
        let mut w: u128 = 1;
        for i in 0..points {
            radix.push(w);
            w = match w.checked_mul(base) {
                Some(v) => v,
                None if i + 1 == points => w,
                None => {
                    return Err(Error::InvalidSpace(format!(
                        "{points} points at order {order} exceed the multiset code range"
                    )))
                }
            };
        }
        Ok(Coder { radix })
    }

    fn code(&self, key: &Multiset) -> u128 {
        key.entries()
            .iter()
            .map(|&(x, m)| self.radix[x] * m as u128)
            .sum()
    }

    /// `codes[mask]` for every sub-tuple of the sorted tuple `x`.
    fn subset_codes(&self, x: &[usize]) -> Vec<u128> {
        let mut codes = vec![0u128; 1 << x.len()];
        for mask in 1..codes.len() {
            let low = mask.trailing_zeros() as usize;
            codes[mask] = codes[mask & (mask - 1)] + self.radix[x[low]];
        }
        codes
    }

    /// `p₀` and every density with at most `order` points, keyed by code.
    fn table<S: Scalar>(&self, process: &JanossyProcess<S>, order: usize) -> HashMap<u128, S> {
        let mut map = HashMap::with_capacity(process.stored_count() + 1);
        map.insert(0, process.p0().clone());
        for (key, v) in process.densities() {
            if key.size() <= order {
                map.insert(self.code(key), v.clone());
            }
        }
        map
    }
}

fn lookup<S: Scalar>(table: &HashMap<u128, S>, code: u128) -> Option<&S> {
    table.get(&code).filter(|v| !v.is_zero())
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_GROUND {
        return Err(Error::OrderExceeded {
            order,
            max: MAX_GROUND,
        });
    }
    Ok(())
}

/// Superposition with default options.
pub fn superpose<S: Scalar>(
    q: &JanossyProcess<S>,
    r: &JanossyProcess<S>,
) -> Result<JanossyProcess<S>> {
    superpose_with(q, r, &Options::default())
}

/// Janossy densities of the superposition `G_Q·G_R`.
///
/// With both inputs of exact support the product has support up to
/// `N_Q + N_R` and is computed that far (capped by `order_limit`). If either
/// input allows tail mass, only orders `≤ min(N_Q, N_R)` are determined and
/// the output is flagged accordingly.
pub fn superpose_with<S: Scalar>(
    q: &JanossyProcess<S>,
    r: &JanossyProcess<S>,
    opts: &Options,
) -> Result<JanossyProcess<S>> {
    check_spaces(q, r)?;
    let exact = !q.tail_mass_allowed() && !r.tail_mass_allowed();
    let natural = if exact {
        q.max_order() + r.max_order()
    } else {
        q.max_order().min(r.max_order())
    };
    let order = natural.min(opts.order_limit);
    check_order(order)?;
    let coder = Coder::new(q.space().len(), order)?;
    let (q_table, r_table) = (coder.table(q, order), coder.table(r, order));
    let targets = multisets_up_to(q.space().len(), 1, order);
    let values = map_slice(opts.execution, &targets, |target| {
        // labeled subsets sharing a sub-multiset contribute equal terms, so
        // each sub-multiset is visited once with its binomial multiplicity
        let total = coder.code(target);
        let entries = target.entries();
        let mut counts = vec![0u32; entries.len()];
        let mut acc = S::zero();
        loop {
            let code: u128 = entries
                .iter()
                .zip(&counts)
                .map(|(&(x, _), &a)| coder.radix[x] * a as u128)
                .sum();
            if let (Some(qv), Some(rv)) = (lookup(&q_table, code), lookup(&r_table, total - code)) {
                let mult: u64 = entries
                    .iter()
                    .zip(&counts)
                    .map(|(&(_, m), &a)| binomial(m as usize, a as usize))
                    .product();
                acc += S::from_u64(mult) * qv.clone() * rv.clone();
            }
            let Some(i) = (0..entries.len()).find(|&i| counts[i] < entries[i].1) else {
                break;
            };
            counts[i] += 1;
            counts[..i].fill(0);
        }
        acc
    });
    let mut out = JanossyProcess::new(q.space().clone(), order, q.p0().clone() * r.p0().clone());
    for (key, v) in targets.into_iter().zip(values) {
        out.set_density(key, v)?;
    }
    out.set_tail_mass_allowed(!exact || order < natural);
    Ok(out)
}

/// The quotient-rule bracket for one subset `Π`:
/// `Σ_π (−1)^{|π|}|π|!/q₀^{|π|+1} ∏_{ω∈π} q(ω)`.
struct InnerSum<'a, S> {
    coder: &'a Coder,
    q_table: &'a HashMap<u128, S>,
    tables: &'a [PartitionTable],
    prefactors: &'a [S],
}

impl<S: Scalar> InnerSum<'_, S> {
    /// `points` is the sorted tuple of `Π`.
    fn eval(&self, points: &[usize]) -> S {
        let codes = self.coder.subset_codes(points);
        let zero = S::zero();
        let mut acc = S::zero();
        for blocks in self.tables[points.len()].partitions() {
            let mut term = self.prefactors[blocks.len()].clone();
            for &b in blocks {
                // blocks are nonempty, so code 0 (p₀ of Q) is never read here
                term *= self
                    .q_table
                    .get(&codes[b as usize])
                    .unwrap_or(&zero)
                    .clone();
                if term.is_zero() {
                    break;
                }
            }
            acc += term;
        }
        acc
    }
}

/// Deconvolution with default options.
pub fn deconvolve<S: Scalar>(
    p: &JanossyProcess<S>,
    q: &JanossyProcess<S>,
) -> Result<(JanossyProcess<S>, DeconvolutionReport<S>)> {
    deconvolve_with(p, q, &Options::default())
}

/// Recovers `R` with `G_P = G_Q·G_R` from `P` and `Q`.
///
/// Output order is `min(N_P, N_Q)`: the quotient is lower-triangular in
/// order, so every recovered value is exact regardless of truncation above.
pub fn deconvolve_with<S: Scalar>(
    p: &JanossyProcess<S>,
    q: &JanossyProcess<S>,
    opts: &Options,
) -> Result<(JanossyProcess<S>, DeconvolutionReport<S>)> {
    check_spaces(p, q)?;
    let q0 = q.p0().clone();
    if q0.is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    let order = p.max_order().min(q.max_order());
    if order > opts.order_limit {
        return Err(Error::OrderExceeded {
            order,
            max: opts.order_limit,
        });
    }
    check_order(order)?;
    let m = p.space().len();
    let coder = Coder::new(m, order)?;
    let (p_table, q_table) = (coder.table(p, order), coder.table(q, order));
    let tables = partition_tables(order);
    let prefactors = reciprocal_prefactors(&q0, order)?;
    let inner = InnerSum {
        coder: &coder,
        q_table: &q_table,
        tables: &tables,
        prefactors: &prefactors,
    };

    let memo: Option<HashMap<u128, S>> = if opts.memoize {
        let keys = multisets_up_to(m, 0, order);
        let values = map_slice(opts.execution, &keys, |key| inner.eval(&key.expand()));
        Some(keys.iter().map(|k| coder.code(k)).zip(values).collect())
    } else {
        None
    };

    let targets = multisets_up_to(m, 1, order);
    let results = map_slice(opts.execution, &targets, |target| {
        let x = target.expand();
        let codes = coder.subset_codes(&x);
        let total = codes[codes.len() - 1];
        let mut acc = S::zero();
        let mut terms = 0u64;
        let mut sub = Vec::with_capacity(x.len());
        for (mask, &code) in codes.iter().enumerate() {
            terms += tables[mask.count_ones() as usize].len() as u64;
            let Some(rest) = lookup(&p_table, total - code) else {
                continue;
            };
            let bracket = match &memo {
                Some(cache) => cache[&code].clone(),
                None => {
                    sub.clear();
                    sub.extend((0..x.len()).filter(|i| mask & (1 << i) != 0).map(|i| x[i]));
                    inner.eval(&sub)
                }
            };
            acc += bracket * rest.clone();
        }
        (acc, terms)
    });

    let mut out = JanossyProcess::new(p.space().clone(), order, p.p0().clone() / q0);
    out.set_tail_mass_allowed(p.tail_mass_allowed() || q.tail_mass_allowed());
    let mut terms_by_order = vec![0u64; order + 1];
    terms_by_order[0] = tables[0].len() as u64;
    for (key, (value, terms)) in targets.into_iter().zip(results) {
        terms_by_order[key.size()] += terms;
        out.set_density(key, value)?;
    }

    let negatives: Vec<S> = std::iter::once(out.p0().clone())
        .chain(out.densities().map(|(_, v)| v.clone()))
        .filter(Scalar::is_definitely_negative)
        .collect();
    let min_density = negatives
        .iter()
        .cloned()
        .fold(S::zero(), |m, v| if v < m { v } else { m });
    let report = DeconvolutionReport {
        min_density,
        negative_count: negatives.len(),
        term_count: terms_by_order.iter().sum(),
        mass: normalization_mass(&out),
        valid_process: out.is_valid_probability(),
        terms_by_order,
    };
    Ok((out, report))
}

/// `max_ψ |G_P(ψ) − G_Q(ψ)·G_R(ψ)|` over the sampled test functions.
pub fn pointwise_quotient_check<S: Scalar>(
    p: &JanossyProcess<S>,
    q: &JanossyProcess<S>,
    r: &JanossyProcess<S>,
    samples: &[TestFunction<S>],
) -> Result<S> {
    check_spaces(p, q)?;
    check_spaces(p, r)?;
    let mut worst = S::zero();
    for psi in samples {
        let d = (pgfl_eval(p, psi) - pgfl_eval(q, psi) * pgfl_eval(r, psi)).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}
