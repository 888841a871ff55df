//! Randomized invariant suites behind `janossy check` and `janossy selftest`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use janossy::combinatorics::{binomial, multisets_of_size};
use janossy::format::JsonScalar;
use janossy::series::{leibniz_binomial, reciprocal_prefactors};
use janossy::{
    bell_number, deconvolve, enumerate_partitions, faadibruno_nth, janossy_consistency_check,
    leibniz_nth, process_to_json, quotient_nth, random_process, reciprocal_nth, series_div,
    series_mul, superpose, DerivativeVector, IndexSubset, JanossyProcess, Multiset, PowerSeries,
    Rational, Scalar, StateSpace,
};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LABELS: [&str; 4] = ["a", "b", "c", "d"];

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    pub points: usize,
    pub order: usize,
    pub trials: usize,
    pub corrupt: bool,
    pub dump_dir: Option<PathBuf>,
}

impl CheckConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=LABELS.len()).contains(&self.points) {
            return Err(format!("--points must be in 1..=4, got {}", self.points));
        }
        if !(1..=6).contains(&self.order) {
            return Err(format!(
                "--max-order for check must be in 1..=6, got {}",
                self.order
            ));
        }
        if self.trials == 0 {
            return Err("--trials must be positive".into());
        }
        Ok(())
    }
}

pub fn space<S: Scalar>(points: usize) -> StateSpace<S> {
    StateSpace::unit(LABELS[..points].iter().copied()).expect("fixed labels are valid")
}

/// Random polynomial with rational coefficients in `[−3, 3]` and the given
/// degree bound.
pub fn random_polynomial(rng: &mut impl Rng, order: usize) -> Vec<Rational> {
    (0..=order)
        .map(|_| {
            let d: i64 = rng.random_range(1..=4);
            let n: i64 = rng.random_range(-3 * d..=3 * d);
            Rational::new(n.into(), d.into())
        })
        .collect()
}

/// Random `(f, g)` pair with `g₀ ≠ 0`, deterministic per seed.
pub fn random_pair(seed: u64, order: usize) -> (Vec<Rational>, Vec<Rational>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_polynomial(&mut rng, order);
    let mut g = random_polynomial(&mut rng, order);
    while g[0] == Rational::from_i64(0) {
        g[0] = random_polynomial(&mut rng, 0)[0].clone();
    }
    (f, g)
}

/// Quotient rule, reciprocal rule (directly and through the chain rule), and
/// product rule against series arithmetic for one polynomial pair.
pub fn scalar_identities_hold<S: Scalar>(f: &[Rational], g: &[Rational], order: usize) -> bool {
    let conv =
        |v: &[Rational]| PowerSeries::with_order(v.iter().map(S::from_rational).collect(), order);
    let (fs, gs) = (conv(f), conv(g));
    let (fd, gd) = (
        DerivativeVector::from_series(&fs),
        DerivativeVector::from_series(&gs),
    );
    let (Ok(h), Ok(prod)) = (series_div(&fs, &gs), series_mul(&fs, &gs)) else {
        return false;
    };
    let Ok(outer) = reciprocal_prefactors(&gd.0[0], order) else {
        return false;
    };
    let outer = DerivativeVector(outer);
    let one = DerivativeVector::from_series(&PowerSeries::constant(S::one(), order));
    (0..=order).all(|n| {
        let fact = S::factorial(n);
        let ok = || -> janossy::Result<bool> {
            let q = quotient_nth(&fd, &gd, n)?;
            let rec = reciprocal_nth(&gd, n)?;
            let lb = leibniz_nth(&fd, &gd, n)?;
            Ok(q.close_to(&(h.coeff(n) * fact.clone()))
                && rec.close_to(&quotient_nth(&one, &gd, n)?)
                && rec.close_to(&faadibruno_nth(&outer, &gd, n)?)
                && lb.close_to(&leibniz_binomial(&fd, &gd, n)?)
                && lb.close_to(&(prod.coeff(n) * fact.clone())))
        };
        ok().unwrap_or(false)
    })
}

/// One superpose → deconvolve round trip.
pub struct RoundTrip<S> {
    pub q: JanossyProcess<S>,
    pub r: JanossyProcess<S>,
    pub p: JanossyProcess<S>,
    pub terms_by_order: Vec<u64>,
    pub failure: Option<String>,
}

pub fn round_trip<S: Scalar>(
    points: usize,
    order: usize,
    seed: u64,
    corrupt: bool,
) -> RoundTrip<S> {
    let s = space::<S>(points);
    let q = random_process(&s, order, seed.wrapping_mul(2));
    let r = random_process(&s, order, seed.wrapping_mul(2).wrapping_add(1));
    let mut p = superpose(&q, &r).expect("same space");
    if corrupt {
        let key = Multiset::from_points(&vec![0; order]);
        let bumped = p.density(&key) + S::from_rational(&Rational::new(1.into(), 7.into()));
        p.set_density(key, bumped).expect("key within order");
    }
    let mut out = RoundTrip {
        q,
        r,
        p,
        terms_by_order: Vec::new(),
        failure: None,
    };
    let (recovered, report) = match deconvolve(&out.p, &out.q) {
        Ok(v) => v,
        Err(e) => {
            out.failure = Some(format!("deconvolve failed: {e}"));
            return out;
        }
    };
    out.terms_by_order = report.terms_by_order.clone();
    let expected_r0 = out.p.p0().clone() / out.q.p0().clone();
    let back = superpose(&out.q, &recovered).expect("same space");
    let bell_ok = (0..=order).all(|n| {
        let per = bell_number(n + 1) * BigUint::from(multisets_of_size(points, n).len());
        BigUint::from(report.terms_by_order[n]) == per
    });
    out.failure = if !recovered.densities_close_to(&out.r) {
        Some(format!(
            "recovered densities differ from R (max abs error {})",
            recovered.max_abs_difference(&out.r)
        ))
    } else if !recovered.p0().close_to(&expected_r0) {
        Some("r0 != p0/q0".into())
    } else if !report.valid_process {
        Some("report flags a valid round trip as invalid".into())
    } else if !back.densities_close_to(&out.p) {
        Some("superpose(Q, deconvolve(P, Q)) != P".into())
    } else if !bell_ok {
        Some("term counts differ from Bell(n+1) per multiset".into())
    } else {
        None
    };
    out
}

fn dump<S: JsonScalar>(dir: &Path, inst: &RoundTrip<S>, header: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let to_io = |e: janossy::Error| std::io::Error::other(e.to_string());
    fs::write(dir.join("q.json"), process_to_json(&inst.q).map_err(to_io)?)?;
    fs::write(dir.join("r.json"), process_to_json(&inst.r).map_err(to_io)?)?;
    fs::write(dir.join("p.json"), process_to_json(&inst.p).map_err(to_io)?)?;
    fs::write(
        dir.join("failure.txt"),
        format!("{header}\n{}\n", inst.failure.as_deref().unwrap_or("")),
    )
}

/// Smallest `(points, order)` at which the instance for `seed` still fails,
/// searched by increasing `points + order`.
fn shrink<S: Scalar>(cfg: &CheckConfig, seed: u64) -> Option<(usize, usize, RoundTrip<S>)> {
    for total in 2..=cfg.points + cfg.order {
        for m in 1..=cfg.points {
            let Some(n) = total.checked_sub(m).filter(|n| (1..=cfg.order).contains(n)) else {
                continue;
            };
            let inst = round_trip::<S>(m, n, seed, cfg.corrupt);
            if inst.failure.is_some() {
                return Some((m, n, inst));
            }
        }
    }
    None
}

fn line(out: &mut impl Write, ok: bool, name: &str, detail: &str) {
    let _ = writeln!(
        out,
        "[{}] {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// Runs every suite; returns true iff all pass.
pub fn run_check<S: JsonScalar>(cfg: &CheckConfig, out: &mut impl Write) -> bool {
    let _ = writeln!(
        out,
        "check: mode={} seed={} points={} order={} trials={}",
        S::MODE,
        cfg.seed,
        cfg.points,
        cfg.order,
        cfg.trials
    );
    let mut all = true;

    // partition counts and the subset-of-partitions identity
    let bell_ok = (0..=cfg.order + 1).all(|n| {
        let count = enumerate_partitions(&IndexSubset::full(n)).len();
        let sum: BigUint = (0..=n)
            .map(|k| BigUint::from(binomial(n, k)) * bell_number(k))
            .sum();
        bell_number(n) == BigUint::from(count) && sum == bell_number(n + 1)
    });
    line(
        out,
        bell_ok,
        "bell counts",
        &format!("n <= {}", cfg.order + 1),
    );
    all &= bell_ok;

    let scalar_passed = (0..cfg.trials)
        .filter(|&i| {
            let (f, g) = random_pair(cfg.seed.wrapping_add(i as u64), cfg.order);
            scalar_identities_hold::<S>(&f, &g, cfg.order)
        })
        .count();
    line(
        out,
        scalar_passed == cfg.trials,
        "scalar quotient/reciprocal/Leibniz vs series",
        &format!("{scalar_passed}/{}", cfg.trials),
    );
    all &= scalar_passed == cfg.trials;

    let s = space::<S>(cfg.points);
    let recovery_total = cfg.trials;
    let recovery_passed = (0..cfg.trials)
        .filter(|&i| {
            let p = random_process(
                &s,
                cfg.order,
                cfg.seed.wrapping_add(i as u64).wrapping_mul(7),
            );
            (0..=cfg.order.min(3)).all(|k| {
                multisets_of_size(cfg.points, k).iter().all(|t| {
                    janossy_consistency_check(&p, &t.expand())
                        .is_ok_and(|v| v.close_to(&p.density(t)))
                })
            })
        })
        .count();
    line(
        out,
        recovery_passed == recovery_total,
        "Janossy recovery at psi = 0",
        &format!("{recovery_passed}/{recovery_total}"),
    );
    all &= recovery_passed == recovery_total;

    let mut first_failure = None;
    let mut rt_passed = 0;
    let mut per_multiset = Vec::new();
    for i in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(i as u64);
        let inst = round_trip::<S>(cfg.points, cfg.order, seed, cfg.corrupt);
        if per_multiset.is_empty() && !inst.terms_by_order.is_empty() {
            per_multiset = (0..=cfg.order)
                .map(|n| inst.terms_by_order[n] / multisets_of_size(cfg.points, n).len() as u64)
                .collect();
        }
        match inst.failure {
            None => rt_passed += 1,
            Some(_) if first_failure.is_none() => first_failure = Some(seed),
            Some(_) => {}
        }
    }
    line(
        out,
        rt_passed == cfg.trials,
        "round trip deconvolve(superpose(Q, R), Q) = R",
        &format!("{rt_passed}/{}", cfg.trials),
    );
    all &= rt_passed == cfg.trials;
    let counts: Vec<String> = per_multiset
        .iter()
        .enumerate()
        .map(|(n, c)| format!("n={n}:{c}"))
        .collect();
    let _ = writeln!(out, "term counts per multiset: {}", counts.join(" "));

    if let Some(seed) = first_failure {
        if let Some((m, n, inst)) = shrink::<S>(cfg, seed) {
            let header = format!("seed={seed} points={m} order={n} mode={}", S::MODE);
            let _ = writeln!(
                out,
                "first failure: {header}: {}",
                inst.failure.as_deref().unwrap_or("")
            );
            if let Some(dir) = &cfg.dump_dir {
                match dump(dir, &inst, &header) {
                    Ok(()) => {
                        let _ = writeln!(out, "failing instance written to {}", dir.display());
                    }
                    Err(e) => eprintln!("error: could not write failing instance: {e}"),
                }
            }
        }
    }
    let _ = writeln!(
        out,
        "{}",
        if all {
            "all checks passed"
        } else {
            "CHECK FAILED"
        }
    );
    all
}

fn bernoulli(q0: i64, q1: i64, den: i64) -> JanossyProcess<Rational> {
    let mut p = JanossyProcess::new(space(1), 1, Rational::new(q0.into(), den.into()));
    p.set_density_at(&[0], Rational::new(q1.into(), den.into()))
        .expect("order 1");
    p
}

/// Golden fixtures, a short check run, and the corruption hook.
pub fn selftest(seed: u64, out: &mut impl Write) -> bool {
    let half = Rational::new(1.into(), 2.into());
    let mut all = true;
    let mut record = |out: &mut dyn Write, ok: bool, name: &str| {
        let _ = writeln!(out, "[{}] {name}", if ok { "PASS" } else { "FAIL" });
        all &= ok;
    };

    let b = bernoulli(1, 1, 2);
    let p = superpose(&b, &b).expect("same space");
    record(
        out,
        p.density_at(&[0, 0]) == half && p.p0() == &Rational::new(1.into(), 4.into()),
        "Bernoulli ⊕ Bernoulli has p0 = 1/4, p2(a,a) = 1/2",
    );
    let ok = deconvolve(&p, &b).is_ok_and(|(r, rep)| r == b && rep.valid_process);
    record(
        out,
        ok,
        "deconvolve(Bernoulli ⊕ Bernoulli, Bernoulli) = Bernoulli",
    );
    let ok = deconvolve(&p, &p).is_ok_and(|(r, rep)| {
        r.stored_count() == 0 && r.p0() == &Rational::from_i64(1) && rep.valid_process
    });
    record(out, ok, "P / P is the empty process");
    let f = vec![Rational::from_i64(1)];
    let g = vec![Rational::from_i64(1), Rational::from_i64(-1)];
    let fs = PowerSeries::with_order(f, 5);
    let gs = PowerSeries::with_order(g, 5);
    let ok = quotient_nth(
        &DerivativeVector::from_series(&fs),
        &DerivativeVector::from_series(&gs),
        5,
    )
    .is_ok_and(|v| v == Rational::from_i64(120));
    record(out, ok, "d^5/dx^5 [1/(1-x)] at 0 = 120");
    let ok = deconvolve(&bernoulli(1, 1, 2), &bernoulli(1, 3, 4)).is_ok_and(|(r, rep)| {
        rep.negative_count > 0 && !rep.valid_process && r.density_at(&[0]) == Rational::from_i64(-4)
    });
    record(out, ok, "non-closure fixture is flagged with r1(a) = -4");

    let cfg = CheckConfig {
        seed,
        points: 3,
        order: 5,
        trials: 5,
        corrupt: false,
        dump_dir: None,
    };
    let mut sink = Vec::new();
    record(
        out,
        run_check::<Rational>(&cfg, &mut sink),
        "check (rational, M=3, N=5)",
    );
    let corrupted = CheckConfig {
        corrupt: true,
        ..cfg
    };
    let mut sink = Vec::new();
    record(
        out,
        !run_check::<Rational>(&corrupted, &mut sink),
        "check detects a corrupted superposition",
    );
    let _ = writeln!(
        out,
        "{}",
        if all {
            "selftest passed"
        } else {
            "SELFTEST FAILED"
        }
    );
    all
}
