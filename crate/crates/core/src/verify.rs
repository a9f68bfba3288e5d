//! Self-checks: exhaustive and sampled consistency suites over small primes.
//!
//! Every suite is deterministic. The sampled suites use a fixed ChaCha seed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chatelet::{classify_pair, normalize_pair, LocalChowResult, Outcome, Provenance};
use crate::chi::{
    classify_confirmed, classify_cubic_confirmed, verify_e1d1, ChiContext, ChiValue, SearchGrid,
};
use crate::cubic::{count_roots_cubic, Cubic};
use crate::error::{Error, Result};
use crate::global::{bad_places, classify_all_places, rational, spot_check_good_place, Place};
use crate::hilbert::{hilbert, hilbert_classes, hilbert_oracle, ORACLE_PRIME_LIMIT};
use crate::padic::{check_prime, default_precision, filtration_level, is_square, square_class};
use crate::padic::{PAdic, SquareClass};
use crate::quadratic_ext::{QuadExt, QuadExtElem};

pub const SEED: u64 = 0x5eed_c4a7;

/// Stored failure messages per suite; further failures are only counted.
const FAILURE_LOG_LIMIT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Hilbert,
    Norm,
    Filtration,
    Disjunction,
    Oracle,
    Diagonal,
    Dyadic,
    Cubic,
    Global,
    Normalization,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Hilbert,
        Suite::Norm,
        Suite::Filtration,
        Suite::Disjunction,
        Suite::Oracle,
        Suite::Diagonal,
        Suite::Dyadic,
        Suite::Cubic,
        Suite::Global,
        Suite::Normalization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hilbert => "hilbert",
            Suite::Norm => "norm",
            Suite::Filtration => "filtration",
            Suite::Disjunction => "disjunction",
            Suite::Oracle => "oracle",
            Suite::Diagonal => "diagonal",
            Suite::Dyadic => "dyadic",
            Suite::Cubic => "cubic",
            Suite::Global => "global",
            Suite::Normalization => "normalization",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Primes to sweep; each suite has its own default list.
    pub primes: Option<Vec<u64>>,
    /// Valuation window of the witness grid.
    pub window: Option<u32>,
    pub fuzz_samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            primes: None,
            window: None,
            fuzz_samples: 500,
            seed: SEED,
        }
    }
}

impl VerifyConfig {
    fn primes_or(&self, default: &[u64]) -> Vec<u64> {
        self.primes.clone().unwrap_or_else(|| default.to_vec())
    }

    fn grid(&self, p: u64) -> SearchGrid {
        match self.window {
            Some(m) => SearchGrid::with_window(p, m),
            None => SearchGrid::default_for(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessRow {
    pub p: u64,
    pub d: i64,
    pub e: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<ChiValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: u64,
    pub failure_count: u64,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessRow>,
}

#[derive(Default)]
struct Tally {
    checks: u64,
    failure_count: u64,
    failures: Vec<String>,
    witnesses: Vec<WitnessRow>,
}

impl Tally {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(msg());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < FAILURE_LOG_LIMIT {
            self.failures.push(msg);
        }
    }

    /// Records an error from the library as a failure.
    fn attempt<T>(&mut self, what: impl FnOnce() -> String, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.fail(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < FAILURE_LOG_LIMIT {
                self.failures.push(f);
            }
        }
        self.witnesses.extend(other.witnesses);
    }

    fn finish(self, suite: Suite) -> SuiteReport {
        SuiteReport {
            suite,
            passed: self.failure_count == 0,
            checks: self.checks,
            failure_count: self.failure_count,
            failures: self.failures,
            witnesses: self.witnesses,
        }
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let tally = match suite {
        Suite::Hilbert => hilbert_suite(cfg),
        Suite::Norm => norm_suite(cfg),
        Suite::Filtration => filtration_suite(),
        Suite::Disjunction => disjunction_suite(),
        Suite::Oracle => grid_suite(cfg, true),
        Suite::Diagonal => grid_suite(cfg, false),
        Suite::Dyadic => dyadic_suite(cfg),
        Suite::Cubic => cubic_suite(cfg),
        Suite::Global => global_suite(cfg),
        Suite::Normalization => normalization_suite(cfg),
    };
    tally.finish(suite)
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<SuiteReport> {
    Suite::ALL.iter().map(|&s| run_suite(s, cfg)).collect()
}

fn class_padic(c: SquareClass) -> Result<PAdic> {
    c.to_padic(default_precision(c.p()))
}

fn hilbert_suite(cfg: &VerifyConfig) -> Tally {
    let mut t = Tally::default();
    for p in cfg.primes_or(&[2, 3, 5, 7, 13]) {
        if let Some(()) = t.attempt(|| format!("p = {p}"), check_prime(p)) {
            hilbert_prime(p, &mut t);
        }
    }
    t
}

fn hilbert_prime(p: u64, t: &mut Tally) {
    let classes = SquareClass::all(p);
    let minus_one = square_class(&PAdic::from_i64(p, -1, default_precision(p)).unwrap()).unwrap();
    for &a in &classes {
        for &b in &classes {
            let (pa, pb) = match (class_padic(a), class_padic(b)) {
                (Ok(x), Ok(y)) => (x, y),
                _ => {
                    t.fail(format!("p = {p}: cannot embed {a}, {b}"));
                    continue;
                }
            };
            let formula = t.attempt(|| format!("hilbert({a}, {b})_{p}"), hilbert(&pa, &pb));
            // Beyond the oracle's range only the formula's own axioms are checked.
            let oracle = if p <= ORACLE_PRIME_LIMIT {
                t.attempt(|| format!("oracle({a}, {b})_{p}"), hilbert_oracle(&pa, &pb))
            } else {
                None
            };
            if let (Some((f, _)), Some(o)) = (formula, oracle) {
                t.check(f == o.value, || {
                    format!("({a}, {b})_{p}: formula {f}, conic search {}", o.value)
                });
            }
            let h = hilbert_classes(a, b);
            t.check(h == hilbert_classes(b, a), || format!("({a}, {b})_{p} not symmetric"));
            for &c in &classes {
                let lhs = hilbert_classes(a.mul(&b), c);
                let rhs = hilbert_classes(a, c).times(hilbert_classes(b, c));
                t.check(lhs == rhs, || format!("({a}*{b}, {c})_{p} not bilinear"));
            }
        }
        t.check(hilbert_classes(a, a.mul(&minus_one)).is_plus(), || {
            format!("({a}, -{a})_{p} != 1")
        });
        if !a.is_trivial() {
            t.check(
                classes.iter().any(|&b| !hilbert_classes(a, b).is_plus()),
                || format!("({a}, .)_{p} degenerate"),
            );
        }
    }
}

fn norm_suite(cfg: &VerifyConfig) -> Tally {
    let mut t = Tally::default();
    for p in cfg.primes_or(&[2, 3, 5, 7]) {
        for d in SquareClass::all(p).into_iter().filter(|c| !c.is_trivial()) {
            let Some(l) = t.attempt(|| format!("Q_{p}(√{d})"), QuadExt::from_class(d)) else {
                continue;
            };
            t.check(l.norm_group().len() * 2 == SquareClass::count(p), || {
                format!("N(Q_{p}(√{d})*) has {} classes", l.norm_group().len())
            });
            for x in SquareClass::all(p) {
                let Ok(px) = class_padic(x) else { continue };
                let by_group = t.attempt(|| format!("is_norm({x})"), l.is_norm(&px));
                let by_symbol = t.attempt(|| format!("symbol({x})"), l.is_norm_by_symbol(&px));
                let by_val = t.attempt(|| format!("valuation({x})"), l.is_norm_by_valuation(&px));
                if let (Some(a), Some(b), Some(c)) = (by_group, by_symbol, by_val) {
                    t.check(a == b && c.is_none_or(|c| c == a), || {
                        format!("p = {p}, d = {d}, x = {x}: generators {a}, symbol {b}, valuation {c:?}")
                    });
                }
            }
        }
    }
    t
}

/// `s(L/Q_2)` for the six ramified quadratic extensions.
pub const S_TABLE: [(i64, u32); 6] = [(-1, 1), (-5, 1), (2, 2), (-2, 2), (10, 2), (-10, 2)];

fn filtration_suite() -> Tally {
    let mut t = Tally::default();
    let prec = default_precision(2);
    for (d, s_expected) in S_TABLE {
        let Some(l) = t.attempt(
            || format!("Q_2(√{d})"),
            PAdic::from_i64(2, d, prec).and_then(|x| QuadExt::new(&x)),
        ) else {
            continue;
        };
        let s = l.s_invariant();
        t.check(s == Some(s_expected), || {
            format!("s(Q_2(√{d})) = {s:?}, expected {s_expected}")
        });
        let s = s_expected;
        // U_s \ U_{s+1} modulo 2^{s+2}: no element is a norm.
        for u in (1u64..1 << (s + 2)).step_by(2) {
            let g = PAdic::new(2, 0, u, prec).unwrap();
            if filtration_level(&g) != Ok(s) {
                continue;
            }
            let n = t.attempt(|| format!("is_norm({u}, √{d})"), l.is_norm(&g));
            if let Some(n) = n {
                t.check(!n, || format!("{u} in U_{s} \\ U_{} is a norm from Q_2(√{d})", s + 1));
            }
        }
        // Below s the norm matches levels: N(U_i \ U_{i+1}) ⊂ U_i \ U_{i+1}.
        let pi = *l.uniformiser().expect("ramified");
        for i in 1..s {
            let r = (|| -> Result<(u8, u32, u32)> {
                let one = QuadExtElem::from_ints(&l, 1, 0)?;
                let x = one.add(&pi.pow(i)?)?;
                let y = one.add(&pi.pow(i + 1)?)?;
                let lam = l.lambda(i, &x)?;
                let lx = filtration_level(&x.norm()?)?;
                let ly = match filtration_level(&y.norm()?) {
                    Err(Error::FiltrationCap(c)) => c,
                    other => other?,
                };
                Ok((lam, lx, ly))
            })();
            if let Some((lam, lx, ly)) = t.attempt(|| format!("levels for √{d}"), r) {
                t.check(lam == 1 && lx == i && ly > i, || {
                    format!("√{d}, i = {i}: λ = {lam}, level N(1+π^i) = {lx}, level N(1+π^(i+1)) = {ly}")
                });
            }
        }
    }
    t
}

fn disjunction_suite() -> Tally {
    let mut t = Tally::default();
    let prec = default_precision(2);
    for d in [2i64, -2, 10, -10] {
        let dp = PAdic::from_i64(2, d, prec).unwrap();
        for v in [1i64, 3] {
            for u in (1u64..16).step_by(2) {
                let e = PAdic::new(2, v, u, prec).unwrap();
                if square_class(&e) == square_class(&dp) {
                    continue;
                }
                let r = t.attempt(|| format!("d = {d}, e = {e}"), verify_e1d1(&dp, &e));
                if let Some(ok) = r {
                    t.check(ok, || format!("disjunction fails for d = {d}, e = {e}"));
                }
            }
        }
    }
    t
}

/// `{±1, …, ±20} × {1, p, p^2, p^3}`, within `i64`.
pub fn e_grid(p: u64) -> Vec<i64> {
    let p = p as i64;
    let mut out = Vec::new();
    for k in 0..4u32 {
        for n in 1..=20i64 {
            // Entries past i64 are left out; for p < 2^32 that drops k = 3 only.
            if let Some(e) = p.checked_pow(k).and_then(|pk| pk.checked_mul(n)) {
                out.push(e);
                out.push(-e);
            }
        }
    }
    out
}

fn grid_pair(
    l: &QuadExt,
    d: SquareClass,
    e_int: i64,
    grid: &SearchGrid,
    oracle: bool,
) -> Tally {
    let mut t = Tally::default();
    let p = l.p();
    let e = PAdic::from_i64(p, e_int, l.precision()).unwrap();
    if is_square(&e).unwrap_or(true) {
        return t;
    }
    let label = || format!("p = {p}, d = {d}, e = {e_int}");
    let Some(result) = t.attempt(label, classify_pair(l.d_value(), &e)) else {
        return t;
    };
    let Some(ctx) = t.attempt(label, ChiContext::with_extension(l.clone(), &e)) else {
        return t;
    };
    let Some(image) = t.attempt(label, ctx.image(grid)) else {
        return t;
    };
    if oracle {
        let witness = image.iter().find(|(_, c)| *c == ChiValue::DIAGONAL);
        match result.outcome {
            Outcome::Z2 => {
                t.check(witness.is_some(), || format!("{}: Z/2 but no witness", label()));
                if let Some((x, chi)) = witness {
                    t.witnesses.push(WitnessRow {
                        p,
                        d: d.representative(),
                        e: e_int.to_string(),
                        outcome: result.outcome,
                        x: Some(crate::chi::WitnessValue(*x).to_string()),
                        chi: Some(*chi),
                    });
                }
            }
            Outcome::Zero => {
                let bad = image.iter().find(|(_, c)| *c != ChiValue::ZERO);
                t.check(bad.is_none(), || {
                    let (x, c) = bad.unwrap();
                    format!("{}: 0 but χ({x}) = {c}", label())
                });
            }
            Outcome::OutOfScope => t.fail(format!("{}: unexpected {result}", label())),
        }
    } else {
        for (x, c) in &image {
            if ctx.is_isomorphic() {
                t.check(*c == ChiValue::ZERO, || format!("{}: L ≅ E, χ({x}) = {c}", label()));
            } else {
                t.check(c.is_diagonal(), || format!("{}: χ({x}) = {c} off the diagonal", label()));
            }
        }
    }
    t
}

fn grid_suite(cfg: &VerifyConfig, oracle: bool) -> Tally {
    let mut t = Tally::default();
    for p in cfg.primes_or(&[2, 3, 5, 7]) {
        let grid = cfg.grid(p);
        for d in SquareClass::all(p).into_iter().filter(|c| !c.is_trivial()) {
            let Some(l) = t.attempt(|| format!("Q_{p}(√{d})"), QuadExt::from_class(d)) else {
                continue;
            };
            let parts: Vec<Tally> = e_grid(p)
                .par_iter()
                .map(|&e| grid_pair(&l, d, e, &grid, oracle))
                .collect();
            for part in parts {
                t.merge(part);
            }
        }
    }
    t
}

fn confirm(t: &mut Tally, d: &PAdic, e: &PAdic, grid: &SearchGrid, expected: Outcome) {
    let label = || format!("p = 2, d = {d}, e = {e}");
    if let Some(r) = t.attempt(label, classify_confirmed(d, e, grid)) {
        t.check(r.outcome == expected, || {
            format!("{}: {} expected {}", label(), r.outcome, expected)
        });
        if r.outcome == Outcome::Z2 {
            t.check(r.witness.is_some(), || format!("{}: no witness", label()));
        }
    }
}

fn dyadic_suite(cfg: &VerifyConfig) -> Tally {
    let mut t = Tally::default();
    let prec = default_precision(2);
    let grid = cfg.grid(2);
    let five = PAdic::from_i64(2, 5, prec).unwrap();
    for v in 0..=4i64 {
        for u in (1u64..16).step_by(2) {
            let e = PAdic::new(2, v, u, prec).unwrap();
            if is_square(&e).unwrap() || square_class(&e) == square_class(&five) {
                continue;
            }
            let expected = if v % 4 == 0 { Outcome::Zero } else { Outcome::Z2 };
            confirm(&mut t, &five, &e, &grid, expected);
        }
    }
    for (d, _) in S_TABLE {
        let dp = PAdic::from_i64(2, d, prec).unwrap();
        for v in 0..=3i64 {
            for u in (1u64..16).step_by(2) {
                let e = PAdic::new(2, v, u, prec).unwrap();
                if is_square(&e).unwrap() || square_class(&e) == square_class(&dp) {
                    continue;
                }
                confirm(&mut t, &dp, &e, &grid, Outcome::Z2);
            }
        }
    }
    t
}

fn cubic_suite(cfg: &VerifyConfig) -> Tally {
    let mut t = Tally::default();
    let q = |p: u64, n: i64| PAdic::from_i64(p, n, default_precision(p)).unwrap();

    let f = Cubic::from_ints(7, 0, 0, -2).unwrap();
    if let Some(r) = t.attempt(|| "x^3 - 2 over Q_7".into(), crate::chatelet::classify_cubic(&q(7, 3), &f)) {
        let cert_ok = r
            .root_certificate
            .as_ref()
            .is_some_and(|c| c.roots.is_empty());
        t.check(r.provenance == Provenance::IrreducibleCubic && cert_ok, || {
            format!("x^3 - 2 over Q_7 with d = 3: {r}")
        });
    }

    let g = Cubic::from_ints(5, 0, -5, 0).unwrap();
    if let Some(r) = t.attempt(
        || "x^3 - 5x over Q_5".into(),
        classify_cubic_confirmed(&q(5, 2), &g, &cfg.grid(5)),
    ) {
        t.check(
            r.provenance == Provenance::OddPrimeDistinctExtensions
                && r.witness.is_some_and(|w| w.chi == ChiValue::DIAGONAL),
            || format!("x^3 - 5x over Q_5 with d = 2: {r}"),
        );
    }

    // Root counts against residues mod p when the discriminant is a unit.
    for p in [3u64, 5, 7] {
        let pi = p as i64;
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                for c in -3i64..=3 {
                    let disc = a * a * b * b - 4 * b.pow(3) - 4 * a.pow(3) * c - 27 * c * c
                        + 18 * a * b * c;
                    if disc.rem_euclid(pi) == 0 {
                        continue;
                    }
                    let expected = (0..pi)
                        .filter(|&x| (x.pow(3) + a * x * x + b * x + c).rem_euclid(pi) == 0)
                        .count();
                    let f = Cubic::from_ints(p, a, b, c).unwrap();
                    if let Some(rep) = t.attempt(|| format!("roots of ({a}, {b}, {c}) over Q_{p}"), count_roots_cubic(&f)) {
                        t.check(rep.count == expected, || {
                            format!("({a}, {b}, {c}) over Q_{p}: {} roots, expected {expected}", rep.count)
                        });
                    }
                }
            }
        }
    }
    t
}

fn small_primes(limit: u64) -> Vec<u64> {
    (3..limit).filter(|&n| check_prime(n).is_ok()).collect()
}

fn global_suite(cfg: &VerifyConfig) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pool = small_primes(2000);
    let cases: [(i64, i64, &[u64]); 4] = [
        (-1, -2, &[2]),
        (-1, 2, &[2]),
        (5, 21, &[2, 3, 5, 7]),
        (-1, 15, &[2, 3, 5]),
    ];
    for (d, e, expected) in cases {
        let (dq, eq) = (rational(d, 1), rational(e, 1));
        let label = || format!("d = {d}, e = {e}");
        if let Some(bad) = t.attempt(label, bad_places(&dq, &eq)) {
            t.check(bad == expected, || format!("{}: bad places {bad:?}", label()));
            let mut checked = 0;
            while checked < 20 {
                let p = pool[rng.gen_range(0..pool.len())];
                if bad.contains(&p) {
                    continue;
                }
                checked += 1;
                let r = t.attempt(|| format!("{}, p = {p}", label()), spot_check_good_place(&dq, &eq, p));
                t.check(r.is_some(), || format!("{}: good place {p} not zero", label()));
            }
        }
        if let Some(rep) = t.attempt(label, classify_all_places(&dq, &eq)) {
            let real = rep.places.iter().find(|r| r.place == Place::Real);
            let expected_real = if e < 0 { Outcome::Zero } else { Outcome::OutOfScope };
            t.check(real.is_some_and(|r| r.outcome == expected_real), || {
                format!("{}: real place {real:?}", label())
            });
            t.check(rep.places.len() == rep.bad_places.len() + 1, || {
                format!("{}: {} reports", label(), rep.places.len())
            });
        }
    }
    t
}

/// One normalization-invariance sample: `(p, d, e, λ, k)`.
pub fn normalization_sample(rng: &mut impl Rng) -> (u64, i64, i64, i64, i64) {
    const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
    let p = PRIMES[rng.gen_range(0..PRIMES.len())];
    let nonzero = |rng: &mut dyn rand::RngCore, m: i64| loop {
        let n = rng.gen_range(-m..=m);
        if n != 0 {
            break n;
        }
    };
    let d = nonzero(rng, 300);
    let e = nonzero(rng, 300);
    let lambda = nonzero(rng, 40);
    let k = nonzero(rng, 2);
    (p, d, e, lambda, k)
}

/// The classifications that must coincide for one sample: original,
/// `d λ^2`, `e p^{4k}`, and the normalized pair.
pub fn normalization_variants(p: u64, d: i64, e: i64, lambda: i64, k: i64) -> Result<Vec<LocalChowResult>> {
    let prec = default_precision(p);
    let dp = PAdic::from_i64(p, d, prec)?;
    let ep = PAdic::from_i64(p, e, prec)?;
    let l = PAdic::from_i64(p, lambda, prec)?;
    let d_scaled = dp.checked_mul(&l.square())?;
    let e_scaled = ep.shift(4 * k);
    let (dn, en) = normalize_pair(&dp, &ep)?;
    Ok(vec![
        classify_pair(&dp, &ep)?,
        classify_pair(&d_scaled, &ep)?,
        classify_pair(&dp, &e_scaled)?,
        classify_pair(&d_scaled, &e_scaled)?,
        classify_pair(&dn, &en)?,
    ])
}

fn normalization_suite(cfg: &VerifyConfig) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.fuzz_samples {
        let (p, d, e, lambda, k) = normalization_sample(&mut rng);
        let label = || format!("p = {p}, d = {d}, e = {e}, λ = {lambda}, k = {k}");
        if let Some(v) = t.attempt(label, normalization_variants(p, d, e, lambda, k)) {
            t.check(v.windows(2).all(|w| w[0] == w[1]), || {
                let shown: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                format!("{}: {}", label(), shown.join(" / "))
            });
        }
    }
    t
}
