//! Seeded property suites behind `quatgenus selftest`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use quatgenus_core::arith::{squarefree_part, Rational, SquareClass};
use quatgenus_core::forms::{evaluate, isotropic_vector, isotropy, DiagonalForm, Isotropy};
use quatgenus_core::local::{hilbert_symbol, is_local_square, relevant_places, Place};
use quatgenus_core::oracle;
use quatgenus_core::quaternion::{
    common_subfield_witness, distinguishing_witness, is_isomorphic, is_linked, QuaternionAlgebra,
};
use quatgenus_core::tower::{replay, tamper, Algebra, CertificateSource, Rule, Status};

use crate::script::{run, AssumptionSpec, BaseSpec, Script, Step};
use crate::{join, CliError, Exit, Outcome, RunConfig};

/// Coefficients used by the exhaustive and fuzzing suites.
pub const COEFFICIENTS: [i64; 16] = [1, -1, 2, -2, 3, -3, 5, -5, 6, -6, 7, -7, 10, -10, 15, -15];

/// Height of random rationals in the product-formula suite.
pub const SYMBOL_HEIGHT: i64 = 1000;
pub const LINKAGE_WITNESS_BOUND: u64 = 50;
pub const GENUS_WITNESS_BOUND: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ProductFormula,
    IsotropyOracle,
    LinkageQ,
    GenusQ,
    Certificates,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::ProductFormula,
        Suite::IsotropyOracle,
        Suite::LinkageQ,
        Suite::GenusQ,
        Suite::Certificates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ProductFormula => "product-formula",
            Suite::IsotropyOracle => "isotropy-oracle",
            Suite::LinkageQ => "linkage-q",
            Suite::GenusQ => "genus-q",
            Suite::Certificates => "certificates",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::ProductFormula => 1000,
            Suite::IsotropyOracle => 4,
            Suite::LinkageQ | Suite::GenusQ => 200,
            Suite::Certificates => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::Input(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub checks: usize,
    pub failures: usize,
    /// Smallest failing instance, when there is one.
    pub counterexample: Option<String>,
    pub details: BTreeMap<String, String>,
}

impl SuiteResult {
    fn new(suite: Suite, seed: u64) -> SuiteResult {
        SuiteResult {
            suite: suite.name(),
            seed,
            trials: 0,
            checks: 0,
            failures: 0,
            counterexample: None,
            details: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn check(
        &mut self,
        ok: bool,
        size: u64,
        instance: impl FnOnce() -> String,
        smallest: &mut Option<u64>,
    ) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if smallest.is_none_or(|s| size < s) {
                *smallest = Some(size);
                self.counterexample = Some(instance());
            }
        }
    }

    fn detail(&mut self, key: &str, value: impl fmt::Display) {
        self.details.insert(key.to_string(), value.to_string());
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, cfg: &RunConfig) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = SuiteResult::new(suite, seed);
    match suite {
        Suite::ProductFormula => product_formula(&mut result, &mut rng, trials),
        Suite::IsotropyOracle => isotropy_oracle(&mut result, trials, cfg.height_bound),
        Suite::LinkageQ => linkage(&mut result, &mut rng, trials),
        Suite::GenusQ => genus(&mut result, &mut rng, trials),
        Suite::Certificates => certificates(&mut result, &mut rng, trials, cfg),
    }
    result
}

/// The `selftest` command.
pub fn selftest(suite: Suite, trials: Option<usize>, cfg: &RunConfig) -> Outcome {
    let trials = trials.unwrap_or(suite.default_trials());
    let r = run_suite(suite, trials, cfg.seed, cfg);
    let mut lines = vec![format!(
        "{} seed {} trials {} checks {} failures {}",
        r.suite, r.seed, r.trials, r.checks, r.failures
    )];
    for (k, v) in &r.details {
        lines.push(format!("{k} {v}"));
    }
    if let Some(c) = &r.counterexample {
        lines.push(format!("counterexample {c}"));
    }
    lines.push(if r.passed() { "PASS" } else { "FAIL" }.to_string());
    let exit = if r.passed() {
        Exit::Success
    } else {
        Exit::PropertyFailure
    };
    Outcome::new(exit, lines, json!(r))
}

fn random_rational(rng: &mut ChaCha8Rng, height: i64) -> Rational {
    loop {
        let n = rng.gen_range(-height..=height);
        if n != 0 {
            let d = rng.gen_range(1..=height);
            return Rational::new(n.into(), d.into()).expect("nonzero denominator");
        }
    }
}

fn product_formula(r: &mut SuiteResult, rng: &mut ChaCha8Rng, trials: usize) {
    let mut smallest = None;
    for _ in 0..trials {
        r.trials += 1;
        let a = random_rational(rng, SYMBOL_HEIGHT);
        let b = random_rational(rng, SYMBOL_HEIGHT);
        let sa = squarefree_part(&a).expect("nonzero");
        let sb = squarefree_part(&b).expect("nonzero");
        let q = DiagonalForm::new(vec![sa, sb]).expect("two coefficients");
        let places = relevant_places(&q);
        let symbols: Vec<i8> = places
            .iter()
            .map(|v| hilbert_symbol(&a, &b, v).expect("nonzero"))
            .collect();
        let product: i8 = symbols.iter().product();
        let symmetric = places
            .iter()
            .zip(&symbols)
            .all(|(v, s)| hilbert_symbol(&b, &a, v).expect("nonzero") == *s);
        let size = a
            .numerator()
            .magnitude()
            .max(b.numerator().magnitude())
            .clone();
        let size = u64::try_from(size).unwrap_or(u64::MAX);
        r.check(
            product == 1 && symmetric,
            size,
            || {
                format!(
                    "a={a} b={b} places {} symbols {}",
                    join(&places, ","),
                    join(&symbols, ",")
                )
            },
            &mut smallest,
        );
    }
}

fn oracle_place(v: &Place) -> oracle::OraclePlace {
    v.prime().map(|p| u64::try_from(p).expect("small prime"))
}

/// Multisets of `COEFFICIENTS` of size `dim`, as index tuples.
fn multisets(dim: usize) -> Vec<Vec<usize>> {
    let n = COEFFICIENTS.len();
    let mut out = Vec::new();
    let mut idx = vec![0; dim];
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..dim).rev().find(|&i| idx[i] < n - 1) else {
            return out;
        };
        idx[pos] += 1;
        for i in pos + 1..dim {
            idx[i] = idx[pos];
        }
    }
}

/// Exhaustive over forms of dimension at most `max_dim`. Isotropic verdicts
/// must be witnessed by a vector with entries up to `height`; anisotropic
/// verdicts must name a place where the brute-force oracle finds no zero.
/// Local verdicts at every relevant place are compared with the oracle too.
fn isotropy_oracle(r: &mut SuiteResult, max_dim: usize, height: u64) {
    let mut smallest = None;
    let mut cache: BTreeMap<(Vec<i64>, Option<u64>), bool> = BTreeMap::new();
    let mut local = |coeffs: &[i64], v: oracle::OraclePlace| -> bool {
        *cache
            .entry((coeffs.to_vec(), v))
            .or_insert_with(|| oracle::local_isotropic(coeffs, v))
    };
    let (mut isotropic, mut anisotropic) = (0usize, 0usize);
    for dim in 1..=max_dim {
        for idx in multisets(dim) {
            r.trials += 1;
            let coeffs: Vec<i64> = idx.iter().map(|&i| COEFFICIENTS[i]).collect();
            let q = DiagonalForm::from_integers(&coeffs).expect("nonzero");
            let size = dim as u64;
            match isotropy(&q) {
                Isotropy::Isotropic => {
                    isotropic += 1;
                    let x = isotropic_vector(&q, height);
                    let ok = x.as_ref().is_some_and(|x| {
                        evaluate(&q, x).is_zero() && x.iter().any(|c| !c.is_zero())
                    });
                    r.check(
                        ok,
                        size,
                        || format!("{q} isotropic but no vector up to {height}"),
                        &mut smallest,
                    );
                }
                Isotropy::Anisotropic { failing_place } => {
                    anisotropic += 1;
                    let ok = !local(&coeffs, oracle_place(&failing_place));
                    r.check(
                        ok,
                        size,
                        || {
                            format!(
                                "{q} anisotropic at {failing_place} but the oracle finds a zero"
                            )
                        },
                        &mut smallest,
                    );
                }
            }
            for v in relevant_places(&q) {
                let ours = quatgenus_core::forms::is_isotropic_local(&q, &v);
                let theirs = local(&coeffs, oracle_place(&v));
                r.check(
                    ours == theirs,
                    size,
                    || format!("{q} at {v}: local verdict {ours}, oracle {theirs}"),
                    &mut smallest,
                );
            }
        }
    }
    r.detail("isotropic", isotropic);
    r.detail("anisotropic", anisotropic);
    r.detail("max_dimension", max_dim);
}

/// Division algebra with both entries drawn from `COEFFICIENTS`.
fn random_division(rng: &mut ChaCha8Rng) -> QuaternionAlgebra {
    loop {
        let a = SquareClass::from_i64(*COEFFICIENTS.choose(rng).expect("nonempty"));
        let b = SquareClass::from_i64(*COEFFICIENTS.choose(rng).expect("nonempty"));
        let d = QuaternionAlgebra::new(a, b);
        if d.is_division() {
            return d;
        }
    }
}

/// Embedding test through local squares at the ramified places, independent
/// of the representation test used by the library.
fn embeds_locally(d: &QuaternionAlgebra, c: &SquareClass) -> bool {
    !c.is_one()
        && d.ramification()
            .places
            .iter()
            .all(|v| !is_local_square(c, v))
}

fn algebra_size(d1: &QuaternionAlgebra, d2: &QuaternionAlgebra) -> u64 {
    [&d1.a, &d1.b, &d2.a, &d2.b]
        .iter()
        .map(|c| u64::try_from(c.value().magnitude().clone()).unwrap_or(u64::MAX))
        .max()
        .unwrap_or(0)
}

fn linkage(r: &mut SuiteResult, rng: &mut ChaCha8Rng, trials: usize) {
    let mut smallest = None;
    let mut largest = SquareClass::one();
    for _ in 0..trials {
        r.trials += 1;
        let d1 = random_division(rng);
        let d2 = random_division(rng);
        let linked = is_linked(&d1, &d2).expect("division");
        let witness = common_subfield_witness(&d1, &d2, LINKAGE_WITNESS_BOUND).expect("division");
        let ok = linked
            && witness
                .as_ref()
                .is_some_and(|c| embeds_locally(&d1, c) && embeds_locally(&d2, c));
        if let Some(c) = &witness {
            if c.value().magnitude() > largest.value().magnitude() {
                largest = c.clone();
            }
        }
        r.check(
            ok,
            algebra_size(&d1, &d2),
            || format!("{d1} {d2} linked {linked} witness {witness:?}"),
            &mut smallest,
        );
    }
    r.detail("largest_witness", largest);
    r.detail("witness_bound", LINKAGE_WITNESS_BOUND);
}

fn genus(r: &mut SuiteResult, rng: &mut ChaCha8Rng, trials: usize) {
    let mut smallest = None;
    let mut largest = SquareClass::one();
    for _ in 0..trials {
        r.trials += 1;
        let (d1, d2) = loop {
            let d1 = random_division(rng);
            let d2 = random_division(rng);
            if !is_isomorphic(&d1, &d2) {
                break (d1, d2);
            }
        };
        let witness =
            distinguishing_witness(&d1, &d2, GENUS_WITNESS_BOUND).expect("non-isomorphic");
        let ok = witness.as_ref().is_some_and(|c| {
            let (e1, e2) = (embeds_locally(&d1, c), embeds_locally(&d2, c));
            e1 != e2 && e1 == d1.contains_subfield(c) && e2 == d2.contains_subfield(c)
        });
        if let Some(c) = &witness {
            if c.value().magnitude() > largest.value().magnitude() {
                largest = c.clone();
            }
        }
        r.check(
            ok,
            algebra_size(&d1, &d2),
            || format!("{d1} {d2} witness {witness:?}"),
            &mut smallest,
        );
    }
    r.detail("largest_witness", largest);
    r.detail("witness_bound", GENUS_WITNESS_BOUND);
}

fn pick_class(rng: &mut ChaCha8Rng) -> SquareClass {
    SquareClass::from_i64(*COEFFICIENTS[1..].choose(rng).expect("nonempty"))
}

fn concrete_script(rng: &mut ChaCha8Rng) -> Script {
    let k = rng.gen_range(1..=4);
    let mut algebras: Vec<QuaternionAlgebra> = Vec::new();
    while algebras.len() < k {
        let a = SquareClass::from_i64(*COEFFICIENTS.choose(rng).expect("nonempty"));
        let b = SquareClass::from_i64(*COEFFICIENTS.choose(rng).expect("nonempty"));
        let d = QuaternionAlgebra::new(a, b);
        if d.is_division() && !algebras.iter().any(|e| is_isomorphic(e, &d)) {
            algebras.push(d);
        }
    }
    let mut steps = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        steps.push(match rng.gen_range(0..4) {
            0 => {
                let mut classes: Vec<SquareClass> =
                    (0..rng.gen_range(1..=3)).map(|_| pick_class(rng)).collect();
                classes.sort();
                classes.dedup();
                Step::Pushing { classes }
            }
            1 => Step::IterateP {
                window: Some(rng.gen_range(2..=7)),
                max_levels: Some(rng.gen_range(1..=3)),
            },
            2 => Step::Linking,
            _ => Step::TheoremC {
                rounds: rng.gen_range(1..=2),
                window: Some(rng.gen_range(2..=5)),
                max_levels: Some(rng.gen_range(1..=2)),
            },
        });
    }
    Script {
        base: BaseSpec::Rationals,
        algebras: algebras.iter().map(Algebra::from).collect(),
        linked: Vec::new(),
        steps,
    }
}

fn symbol(name: String) -> quatgenus_core::tower::FormalClass {
    quatgenus_core::tower::FormalClass::symbol(&name)
}

/// Symbolic algebras; each pair is either declared linked or has an assumed
/// anisotropic Albert form.
fn abstract_script(rng: &mut ChaCha8Rng) -> Script {
    let k = rng.gen_range(2..=4);
    let mut algebras: Vec<Algebra> = Vec::new();
    for i in 0..k {
        let b = symbol(format!("b{i}"));
        let a = if i > 0 && rng.gen_bool(0.4) {
            algebras[i - 1].a.clone()
        } else {
            symbol(format!("a{i}"))
        };
        algebras.push(Algebra::new(a, b));
    }
    let mut assumptions: Vec<AssumptionSpec> = algebras
        .iter()
        .enumerate()
        .map(|(i, d)| AssumptionSpec {
            id: format!("N{i}"),
            anisotropic: d.norm_form(),
        })
        .collect();
    let mut linked = Vec::new();
    for j in 0..k {
        for i in 0..j {
            if rng.gen_bool(0.5) {
                linked.push((i, j));
                if let Some(e) = algebras[i].shared_slot_product(&algebras[j]) {
                    if rng.gen_bool(0.5) {
                        assumptions.push(AssumptionSpec {
                            id: format!("C{i}{j}"),
                            anisotropic: e.norm_form(),
                        });
                    }
                }
            } else {
                assumptions.push(AssumptionSpec {
                    id: format!("A{i}{j}"),
                    anisotropic: algebras[i].albert_form(&algebras[j]),
                });
            }
        }
    }
    let steps = match rng.gen_range(0..3) {
        0 => vec![Step::Linking],
        1 => vec![Step::Linking, Step::Linking],
        _ => vec![Step::TheoremC {
            rounds: rng.gen_range(1..=2),
            window: None,
            max_levels: None,
        }],
    };
    Script {
        base: BaseSpec::Abstract { assumptions },
        algebras,
        linked,
        steps,
    }
}

/// Random construction scripts: every emitted certificate must replay, every
/// tampered certificate node must fail replay, and no tracked subject may go
/// from ISOTROPIC back to ANISOTROPIC along the tower.
fn certificates(r: &mut SuiteResult, rng: &mut ChaCha8Rng, trials: usize, cfg: &RunConfig) {
    let mut smallest = None;
    let mut rules: BTreeSet<Rule> = BTreeSet::new();
    let (mut nodes, mut tampered, mut incomplete) = (0usize, 0usize, 0usize);
    for _ in 0..trials {
        r.trials += 1;
        let script = if rng.gen_bool(0.6) {
            concrete_script(rng)
        } else {
            abstract_script(rng)
        };
        let size = (script.algebras.len() * 10 + script.steps.len()) as u64;
        let text = || serde_json::to_string(&script).expect("scripts serialize");
        let report = match run(&script, cfg) {
            Ok(report) => report,
            Err(e) => {
                r.check(false, size, || format!("{e}: {}", text()), &mut smallest);
                continue;
            }
        };
        if !report.complete {
            incomplete += 1;
        }
        r.check(
            report.replay.passed(),
            size,
            || format!("replay failed: {}", text()),
            &mut smallest,
        );
        for cert in report.certificates() {
            for node in cert.nodes() {
                nodes += 1;
                rules.insert(node.rule());
                let caught = !replay(&tamper(node), &report.tower);
                tampered += 1;
                r.check(
                    caught,
                    size,
                    || format!("tampered {} replays true: {}", node.rule(), text()),
                    &mut smallest,
                );
            }
        }
        for (label, subject) in report.tower.tracked_subjects() {
            let history = report.tower.status_history(subject);
            let monotone = history
                .iter()
                .skip_while(|s| **s != Status::Isotropic)
                .all(|s| *s == Status::Isotropic);
            r.check(
                monotone,
                size,
                || format!("{label} {subject} history {history:?}: {}", text()),
                &mut smallest,
            );
        }
    }
    r.detail("certificate_nodes", nodes);
    r.detail("tampered", tampered);
    r.detail("incomplete_runs", incomplete);
    r.detail("rules", join(&rules.iter().collect::<Vec<_>>(), ","));
}

/// Rule kinds a suite run must exercise for its tampering checks to cover
/// every rule.
pub fn rules_covered(result: &SuiteResult) -> usize {
    result
        .details
        .get("rules")
        .map(|s| s.split(',').filter(|x| !x.is_empty()).count())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(1).len(), 16);
        assert_eq!(multisets(2).len(), 136);
        assert_eq!(multisets(4).len(), 3876);
    }

    #[test]
    fn small_runs_pass() {
        let cfg = RunConfig::default();
        for suite in [Suite::ProductFormula, Suite::LinkageQ, Suite::GenusQ] {
            let r = run_suite(suite, 20, 7, &cfg);
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.trials, 20);
        }
        let r = run_suite(Suite::IsotropyOracle, 2, 0, &cfg);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.trials, 152);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }
}
