//! Pushing, linking and iterated constructions over a tower.

use serde::Serialize;

use super::cert::{Certificate, CertificateSource, RuleParams, Status};
use super::formal::{Algebra, FormalClass, TowerForm};
use super::state::{Derivation, LabelledStatement, TowerState, TrackedStatement};
use super::TowerError;
use crate::arith::SquareClass;
use crate::quaternion::{connecting_algebra, is_isomorphic, is_linked, QuaternionAlgebra};

/// Algebras under study, with pairs declared linked (abstract bases only).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Family {
    pub algebras: Vec<Algebra>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub linked: Vec<(usize, usize)>,
}

impl Family {
    pub fn concrete(algebras: &[QuaternionAlgebra]) -> Family {
        Family {
            algebras: algebras.iter().map(Algebra::from).collect(),
            linked: Vec::new(),
        }
    }

    pub fn to_concrete(&self) -> Result<Vec<QuaternionAlgebra>, TowerError> {
        self.algebras
            .iter()
            .map(|a| {
                a.to_concrete()
                    .ok_or_else(|| TowerError::FormalAlgebra(a.to_string()))
            })
            .collect()
    }

    fn validate(&self) -> Result<(), TowerError> {
        let n = self.algebras.len();
        match self
            .linked
            .iter()
            .find(|&&(i, j)| i >= n || j >= n || i == j)
        {
            Some(&(i, j)) => Err(TowerError::BadPair(i, j)),
            None => Ok(()),
        }
    }

    fn declared_linked(&self, i: usize, j: usize) -> bool {
        self.linked.iter().any(|&p| p == (i, j) || p == (j, i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Contained,
    NotContained,
    Unknown,
}

/// A statement the rules could not settle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unresolved {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<SquareClass>,
    pub algebras: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<TowerForm>,
    pub level: usize,
    pub reason: String,
}

impl Unresolved {
    fn from_statement(
        class: Option<SquareClass>,
        algebras: Vec<usize>,
        s: &TrackedStatement,
    ) -> Self {
        let (level, reason) = match &s.unknown {
            Some(r) => (r.level, r.reason.clone()),
            None => (
                s.level,
                format!("expected a different status than {}", s.status),
            ),
        };
        Unresolved {
            class,
            algebras,
            subject: Some(s.subject.clone()),
            level,
            reason,
        }
    }
}

fn norm_label(d: &impl std::fmt::Display) -> String {
    format!("q{d}")
}

fn pair_label(d1: &impl std::fmt::Display, d2: &impl std::fmt::Display) -> String {
    format!("q{d1}{d2}")
}

/// Containment of `√c` in `d` over the top level, decided by the status of
/// `⟨c, −a, −b, ab⟩`.
fn containment(
    state: &TowerState,
    d: &QuaternionAlgebra,
    c: &SquareClass,
) -> (Verdict, TrackedStatement) {
    let phi = Algebra::from(d).embedding_form(&FormalClass::from(c.clone()));
    let statement = state.derive_status(&phi);
    let verdict = match statement.status {
        Status::Isotropic => Verdict::Contained,
        Status::Anisotropic => Verdict::NotContained,
        Status::Unknown => Verdict::Unknown,
    };
    if state.top() == 0 {
        assert_eq!(
            verdict == Verdict::Contained,
            d.contains_subfield(c),
            "embedding form and subfield test disagree for {d}, {c}"
        );
    }
    (verdict, statement)
}

fn require_rational(state: &TowerState, what: &'static str) -> Result<(), TowerError> {
    if state.base().is_rational() {
        Ok(())
    } else {
        Err(TowerError::AbstractBase(what))
    }
}

fn check_division_distinct(algebras: &[QuaternionAlgebra]) -> Result<(), TowerError> {
    for d in algebras {
        if !d.is_division() {
            return Err(TowerError::NotDivision(d.to_string()));
        }
    }
    for j in 0..algebras.len() {
        for i in 0..j {
            if is_isomorphic(&algebras[i], &algebras[j]) {
                return Err(TowerError::Isomorphic(
                    algebras[i].to_string(),
                    algebras[j].to_string(),
                ));
            }
        }
    }
    Ok(())
}

fn check_pushing_family(algebras: &[QuaternionAlgebra]) -> Result<(), TowerError> {
    check_division_distinct(algebras)?;
    for j in 0..algebras.len() {
        for i in 0..j {
            if !is_linked(&algebras[i], &algebras[j])? {
                return Err(TowerError::Unlinked(
                    algebras[i].to_string(),
                    algebras[j].to_string(),
                ));
            }
        }
    }
    Ok(())
}

/// Norm forms of the algebras and of the connecting algebras of all pairs.
fn injectivity_subjects(
    algebras: &[QuaternionAlgebra],
) -> Result<Vec<(String, TowerForm)>, TowerError> {
    let mut out: Vec<(String, TowerForm)> = algebras
        .iter()
        .map(|d| (norm_label(d), TowerForm::from(&d.norm_form())))
        .collect();
    for j in 0..algebras.len() {
        for i in 0..j {
            let c = connecting_algebra(&algebras[i], &algebras[j])?;
            out.push((
                pair_label(&algebras[i], &algebras[j]),
                TowerForm::from(&c.norm_form()),
            ));
        }
    }
    Ok(out)
}

fn labelled(state: &mut TowerState, subjects: &[(String, TowerForm)]) -> Vec<LabelledStatement> {
    subjects
        .iter()
        .map(|(label, subject)| {
            state.track(label, subject);
            LabelledStatement {
                label: label.clone(),
                statement: state.derive_status(subject),
            }
        })
        .collect()
}

/// Anisotropy over the union of the chain of fields from level `first` up
/// to the top.
fn over_union(state: &TowerState, subject: &TowerForm, first: usize) -> TrackedStatement {
    let mut s = state.derive_status(subject);
    if let (Status::Anisotropic, Some(c)) = (s.status, s.certificate.take()) {
        s.certificate = Some(Certificate::new(
            subject.clone(),
            state.top(),
            Status::Anisotropic,
            RuleParams::Chain {
                first_level: first,
                last_level: state.top(),
            },
            vec![c],
        ));
    }
    s
}

fn union_ledger(
    state: &mut TowerState,
    subjects: &[(String, TowerForm)],
    first: usize,
    unknown: &mut Vec<Unresolved>,
) -> Vec<LabelledStatement> {
    subjects
        .iter()
        .map(|(label, subject)| {
            state.track(label, subject);
            let statement = over_union(state, subject, first);
            if statement.status != Status::Anisotropic {
                unknown.push(Unresolved::from_statement(None, vec![], &statement));
            }
            LabelledStatement {
                label: label.clone(),
                statement,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassExclusion {
    pub class: SquareClass,
    /// Indices of the algebras certified not to contain `√class`.
    pub not_containing: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PushedPair {
    pub class: SquareClass,
    pub algebra: usize,
    pub form: TowerForm,
    pub discriminant: FormalClass,
    pub level: usize,
    pub anisotropy: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingClaim {
    pub class: SquareClass,
    pub algebra: usize,
    pub statement: TrackedStatement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PushingReport {
    pub from_level: usize,
    pub to_level: usize,
    pub algebras: Vec<QuaternionAlgebra>,
    pub classes: Vec<SquareClass>,
    pub exclusions: Vec<ClassExclusion>,
    /// The pairs `(c, D)` with `√c ⊄ D`, in adjunction order.
    pub pairs: Vec<PushedPair>,
    /// Norm forms and connecting forms, which must stay anisotropic.
    pub injectivity: Vec<LabelledStatement>,
    /// `⟨c, −a, −b, ab⟩` isotropic over the new top, for every class and algebra.
    pub embeddings: Vec<EmbeddingClaim>,
    pub unresolved: Vec<Unresolved>,
}

impl PushingReport {
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// Adjoins `⟨c, −a_D, −b_D, a_D b_D⟩` for every class `c` and every algebra
/// `D` not containing `√c`, so that afterwards each algebra contains every
/// `√c` while staying division and pairwise distinct.
pub fn step_pushing_extension(
    state: &TowerState,
    algebras: &[QuaternionAlgebra],
    classes: &[SquareClass],
) -> Result<(TowerState, PushingReport), TowerError> {
    require_rational(state, "the pushing step")?;
    check_pushing_family(algebras)?;
    if classes.iter().any(SquareClass::is_one) {
        return Err(TowerError::TrivialClass);
    }
    let from = state.top();
    let mut exclusions = Vec::new();
    let mut plan = Vec::new();
    let mut unresolved = Vec::new();
    for c in classes {
        let mut not_containing = Vec::new();
        for (i, d) in algebras.iter().enumerate() {
            let (verdict, statement) = containment(state, d, c);
            match verdict {
                Verdict::NotContained => {
                    not_containing.push(i);
                    plan.push((c.clone(), i));
                }
                Verdict::Contained => {}
                Verdict::Unknown => unresolved.push(Unresolved::from_statement(
                    Some(c.clone()),
                    vec![i],
                    &statement,
                )),
            }
        }
        exclusions.push(ClassExclusion {
            class: c.clone(),
            not_containing,
        });
    }

    let mut next = state.clone();
    let mut pairs = Vec::new();
    for (c, i) in plan {
        let phi = Algebra::from(&algebras[i]).embedding_form(&FormalClass::from(c.clone()));
        let discriminant = phi.signed_discriminant();
        if discriminant != FormalClass::from(c.clone()) || discriminant.is_one() {
            return Err(TowerError::Bookkeeping(format!(
                "{phi} has discriminant {discriminant}, expected {c}"
            )));
        }
        next = next.adjoin_over(&phi, from, &format!("pushing {c} into {}", algebras[i]))?;
        let adj = next.adjunction(next.top()).expect("just adjoined");
        pairs.push(PushedPair {
            class: c,
            algebra: i,
            form: phi,
            discriminant,
            level: adj.level,
            anisotropy: adj.anisotropy.clone(),
        });
    }

    let injectivity = labelled(&mut next, &injectivity_subjects(algebras)?);
    for s in &injectivity {
        if s.statement.status != Status::Anisotropic {
            unresolved.push(Unresolved::from_statement(None, vec![], &s.statement));
        }
    }
    let mut embeddings = Vec::new();
    for c in classes {
        for (i, d) in algebras.iter().enumerate() {
            let (verdict, statement) = containment(&next, d, c);
            if verdict != Verdict::Contained {
                unresolved.push(Unresolved::from_statement(
                    Some(c.clone()),
                    vec![i],
                    &statement,
                ));
            }
            embeddings.push(EmbeddingClaim {
                class: c.clone(),
                algebra: i,
                statement,
            });
        }
    }
    next.record("pushing", from);
    let report = PushingReport {
        from_level: from,
        to_level: next.top(),
        algebras: algebras.to_vec(),
        classes: classes.to_vec(),
        exclusions,
        pairs,
        injectivity,
        embeddings,
        unresolved,
    };
    Ok((next, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContainmentEntry {
    pub algebra: usize,
    pub verdict: Verdict,
    pub statement: TrackedStatement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowRow {
    pub class: SquareClass,
    pub entries: Vec<ContainmentEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowScan {
    pub level: usize,
    pub rows: Vec<WindowRow>,
    /// Classes contained in some algebra but certified absent from another.
    pub distinguishing: Vec<SquareClass>,
    /// Classes certified absent from at least one algebra.
    pub pushable: Vec<SquareClass>,
    pub unresolved: Vec<Unresolved>,
}

/// The classes of `window` whose quadratic extension lies in some but not
/// all algebras over the top level. Class 1 is ignored.
pub fn compute_s(
    state: &TowerState,
    algebras: &[QuaternionAlgebra],
    window: &[SquareClass],
) -> Result<WindowScan, TowerError> {
    require_rational(state, "computing the distinguishing set")?;
    let mut rows = Vec::new();
    let mut distinguishing = Vec::new();
    let mut pushable = Vec::new();
    let mut unresolved = Vec::new();
    for c in window.iter().filter(|c| !c.is_one()) {
        let entries: Vec<ContainmentEntry> = algebras
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (verdict, statement) = containment(state, d, c);
                if verdict == Verdict::Unknown {
                    unresolved.push(Unresolved::from_statement(
                        Some(c.clone()),
                        vec![i],
                        &statement,
                    ));
                }
                ContainmentEntry {
                    algebra: i,
                    verdict,
                    statement,
                }
            })
            .collect();
        let has = |v: Verdict| entries.iter().any(|e| e.verdict == v);
        if has(Verdict::Contained) && has(Verdict::NotContained) {
            distinguishing.push(c.clone());
        }
        if has(Verdict::NotContained) {
            pushable.push(c.clone());
        }
        rows.push(WindowRow {
            class: c.clone(),
            entries,
        });
    }
    Ok(WindowScan {
        level: state.top(),
        rows,
        distinguishing,
        pushable,
        unresolved,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationRound {
    pub round: usize,
    pub distinguishing: Vec<SquareClass>,
    pub pushed: Vec<SquareClass>,
    pub pushing: PushingReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationReport {
    pub from_level: usize,
    pub to_level: usize,
    pub window: Vec<SquareClass>,
    pub initial_distinguishing: Vec<SquareClass>,
    pub rounds: Vec<IterationRound>,
    pub stabilized: bool,
    /// No class of the window distinguishes any two algebras over the top.
    pub weakly_isomorphic_in_window: bool,
    pub final_scan: WindowScan,
    /// Anisotropy of norm and connecting forms over the union of the levels.
    pub injectivity: Vec<LabelledStatement>,
    pub unknown: Vec<Unresolved>,
    pub notes: Vec<String>,
}

impl IterationReport {
    pub fn is_complete(&self) -> bool {
        self.stabilized && self.unknown.is_empty()
    }
}

const WINDOW_NOTES: [&str; 2] = [
    "the distinguishing set is truncated to the finite window; weak isomorphism is relative to it",
    "square classes are compared as classes of the rational base",
];

/// Repeats the pushing step until no class of `window` distinguishes two
/// algebras, or `max_levels` rounds have run. Each round pushes every window
/// class that some algebra is certified not to contain, which covers the
/// distinguishing classes.
pub fn iterate_theorem1(
    state: &TowerState,
    algebras: &[QuaternionAlgebra],
    window: &[SquareClass],
    max_levels: usize,
) -> Result<(TowerState, IterationReport), TowerError> {
    require_rational(state, "the iterated pushing construction")?;
    check_pushing_family(algebras)?;
    let from = state.top();
    let mut st = state.clone();
    let mut scan = compute_s(&st, algebras, window)?;
    let initial_distinguishing = scan.distinguishing.clone();
    let mut rounds = Vec::new();
    let mut unknown = Vec::new();
    for round in 1..=max_levels {
        if scan.distinguishing.is_empty() && scan.unresolved.is_empty() {
            break;
        }
        if scan.pushable.is_empty() {
            break;
        }
        let (next, pushing) = step_pushing_extension(&st, algebras, &scan.pushable)?;
        unknown.extend(pushing.unresolved.iter().cloned());
        rounds.push(IterationRound {
            round,
            distinguishing: scan.distinguishing.clone(),
            pushed: scan.pushable.clone(),
            pushing,
        });
        st = next;
        scan = compute_s(&st, algebras, window)?;
    }
    let stabilized = scan.distinguishing.is_empty() && scan.unresolved.is_empty();
    unknown.extend(scan.unresolved.iter().cloned());
    let injectivity = union_ledger(
        &mut st,
        &injectivity_subjects(algebras)?,
        from,
        &mut unknown,
    );
    st.record("iterateP", from);
    let report = IterationReport {
        from_level: from,
        to_level: st.top(),
        window: window.to_vec(),
        initial_distinguishing,
        rounds,
        stabilized,
        weakly_isomorphic_in_window: stabilized,
        final_scan: scan,
        injectivity,
        unknown,
        notes: WINDOW_NOTES.iter().map(|s| s.to_string()).collect(),
    };
    Ok((st, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairState {
    Linked,
    DeclaredLinked,
    Unlinked,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairLinkage {
    pub first: usize,
    pub second: usize,
    pub albert_form: TowerForm,
    pub before: PairState,
    pub before_statement: TrackedStatement,
    /// Status of the Albert form over the new top.
    pub after: TrackedStatement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjoinedAlbert {
    pub first: usize,
    pub second: usize,
    pub level: usize,
    pub form: TowerForm,
    pub anisotropy: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkingReport {
    pub from_level: usize,
    pub to_level: usize,
    pub pairs: Vec<PairLinkage>,
    pub adjoined: Vec<AdjoinedAlbert>,
    /// Four-dimensional forms that must stay anisotropic.
    pub preserved: Vec<LabelledStatement>,
    pub unresolved: Vec<Unresolved>,
    pub notes: Vec<String>,
}

impl LinkingReport {
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// Preserved four-dimensional forms: norm forms, plus connecting forms for
/// pairs where one is available.
fn preserved_subjects(
    state: &TowerState,
    family: &Family,
    linked: &[(usize, usize)],
    notes: &mut Vec<String>,
) -> Result<Vec<(String, TowerForm)>, TowerError> {
    let mut out: Vec<(String, TowerForm)> = family
        .algebras
        .iter()
        .map(|d| (norm_label(d), d.norm_form()))
        .collect();
    if state.base().is_rational() {
        let concrete = family.to_concrete()?;
        out.extend(
            injectivity_subjects(&concrete)?
                .into_iter()
                .skip(concrete.len()),
        );
        return Ok(out);
    }
    for &(i, j) in linked {
        let (d1, d2) = (&family.algebras[i], &family.algebras[j]);
        let label = pair_label(d1, d2);
        match d1.shared_slot_product(d2) {
            Some(p) if matches!(state.derive_at(&p.norm_form(), 0), Derivation::Proved(_)) => {
                out.push((label, p.norm_form()));
            }
            Some(p) => notes.push(format!(
                "{label} = {} is not tracked: no ledger assumption for its anisotropy",
                p.norm_form()
            )),
            None => notes.push(format!(
                "{label} is not tracked: the symbols share no entry, so no connecting form is available"
            )),
        }
    }
    Ok(out)
}

/// Adjoins the Albert form of every unlinked pair, which links the pair,
/// and reports that the tracked four-dimensional forms stay anisotropic.
pub fn step_linking_extension(
    state: &TowerState,
    family: &Family,
) -> Result<(TowerState, LinkingReport), TowerError> {
    family.validate()?;
    if state.base().is_rational() {
        check_division_distinct(&family.to_concrete()?)?;
    }
    let from = state.top();
    let n = family.algebras.len();
    let mut classified = Vec::new();
    let mut unresolved = Vec::new();
    for j in 0..n {
        for i in 0..j {
            let (d1, d2) = (&family.algebras[i], &family.algebras[j]);
            let albert = d1.albert_form(d2);
            let statement = state.derive_status(&albert);
            let before = match statement.status {
                Status::Isotropic => PairState::Linked,
                _ if family.declared_linked(i, j) => PairState::DeclaredLinked,
                Status::Anisotropic => PairState::Unlinked,
                Status::Unknown => {
                    if matches!(state.derive_at(&albert, 0), Derivation::Proved(_)) {
                        unresolved.push(Unresolved::from_statement(None, vec![i, j], &statement));
                        PairState::Unresolved
                    } else {
                        return Err(TowerError::MissingAssumption {
                            first: d1.to_string(),
                            second: d2.to_string(),
                            albert: albert.to_string(),
                        });
                    }
                }
            };
            classified.push((i, j, albert, before, statement));
        }
    }

    let mut next = state.clone();
    let mut adjoined = Vec::new();
    for (i, j, albert, before, _) in &classified {
        if *before != PairState::Unlinked {
            continue;
        }
        let (d1, d2) = (&family.algebras[*i], &family.algebras[*j]);
        next = next.adjoin_over(albert, from, &format!("linking {d1} and {d2}"))?;
        let adj = next.adjunction(next.top()).expect("just adjoined");
        adjoined.push(AdjoinedAlbert {
            first: *i,
            second: *j,
            level: adj.level,
            form: albert.clone(),
            anisotropy: adj.anisotropy.clone(),
        });
    }

    let mut pairs = Vec::new();
    let mut linked = Vec::new();
    for (i, j, albert, before, before_statement) in classified {
        let after = next.derive_status(&albert);
        if after.status == Status::Isotropic || before == PairState::DeclaredLinked {
            linked.push((i, j));
        } else if before != PairState::Unresolved {
            unresolved.push(Unresolved::from_statement(None, vec![i, j], &after));
        }
        pairs.push(PairLinkage {
            first: i,
            second: j,
            albert_form: albert,
            before,
            before_statement,
            after,
        });
    }

    let mut notes = Vec::new();
    if state.base().is_rational() && adjoined.is_empty() {
        notes.push(
            "any two quaternion division algebras over a global field are linked; no adjunction is needed"
                .to_string(),
        );
    }
    let subjects = preserved_subjects(state, family, &linked, &mut notes)?;
    let preserved = labelled(&mut next, &subjects);
    for s in &preserved {
        if s.statement.status != Status::Anisotropic {
            unresolved.push(Unresolved::from_statement(None, vec![], &s.statement));
        }
    }
    next.record("linking", from);
    let report = LinkingReport {
        from_level: from,
        to_level: next.top(),
        pairs,
        adjoined,
        preserved,
        unresolved,
        notes,
    };
    Ok((next, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremCRound {
    pub round: usize,
    pub linking: LinkingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration: Option<IterationReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremCReport {
    pub from_level: usize,
    pub to_level: usize,
    pub rounds: Vec<TheoremCRound>,
    /// Anisotropy of norm and connecting forms over the union of the levels,
    /// certifying that the algebras stay division and pairwise distinct.
    pub injectivity: Vec<LabelledStatement>,
    pub unknown: Vec<Unresolved>,
    pub complete: bool,
    pub notes: Vec<String>,
}

/// Alternates the linking step and the iterated pushing construction for
/// `rounds` rounds.
pub fn run_theorem_c_truncation(
    state: &TowerState,
    family: &Family,
    window: &[SquareClass],
    rounds: usize,
    max_levels: usize,
) -> Result<(TowerState, TheoremCReport), TowerError> {
    family.validate()?;
    let from = state.top();
    let concrete = if state.base().is_rational() {
        Some(family.to_concrete()?)
    } else {
        None
    };
    let mut st = state.clone();
    let mut out = Vec::new();
    let mut unknown = Vec::new();
    let mut notes = Vec::new();
    if concrete.is_none() {
        notes.push(
            "the pushing construction is skipped over an abstract base: subfield containment \
             is not decidable from the ledger"
                .to_string(),
        );
    } else {
        notes.extend(WINDOW_NOTES.iter().map(|s| s.to_string()));
    }
    notes.push("distinctness of the images is certified; non-linkage is not".to_string());
    for round in 1..=rounds {
        let (next, linking) = step_linking_extension(&st, family)?;
        unknown.extend(linking.unresolved.iter().cloned());
        st = next;
        let iteration = match &concrete {
            Some(algebras) => {
                let (next, rep) = iterate_theorem1(&st, algebras, window, max_levels)?;
                unknown.extend(rep.unknown.iter().cloned());
                if !rep.stabilized && rep.unknown.is_empty() {
                    unknown.push(Unresolved {
                        class: None,
                        algebras: vec![],
                        subject: None,
                        level: next.top(),
                        reason: format!(
                            "the pushing iteration did not stabilise within {max_levels} levels"
                        ),
                    });
                }
                st = next;
                Some(rep)
            }
            None => None,
        };
        out.push(TheoremCRound {
            round,
            linking,
            iteration,
        });
    }
    let mut subject_notes = Vec::new();
    let linked: Vec<(usize, usize)> = (0..family.algebras.len())
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .filter(|&(i, j)| {
            family.declared_linked(i, j)
                || st
                    .derive_status(&family.algebras[i].albert_form(&family.algebras[j]))
                    .status
                    == Status::Isotropic
        })
        .collect();
    let subjects = preserved_subjects(&st, family, &linked, &mut subject_notes)?;
    let injectivity = union_ledger(&mut st, &subjects, from, &mut unknown);
    notes.extend(subject_notes);
    st.record("theoremC", from);
    let report = TheoremCReport {
        from_level: from,
        to_level: st.top(),
        rounds: out,
        injectivity,
        complete: unknown.is_empty(),
        unknown,
        notes,
    };
    Ok((st, report))
}

impl CertificateSource for PushedPair {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        out.push(&self.anisotropy);
    }
}

impl CertificateSource for EmbeddingClaim {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.statement.collect_certificates(out);
    }
}

impl CertificateSource for PushingReport {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.pairs.collect_certificates(out);
        self.injectivity.collect_certificates(out);
        self.embeddings.collect_certificates(out);
    }
}

impl CertificateSource for ContainmentEntry {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.statement.collect_certificates(out);
    }
}

impl CertificateSource for WindowScan {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        for row in &self.rows {
            row.entries.collect_certificates(out);
        }
    }
}

impl CertificateSource for IterationReport {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        for r in &self.rounds {
            r.pushing.collect_certificates(out);
        }
        self.final_scan.collect_certificates(out);
        self.injectivity.collect_certificates(out);
    }
}

impl CertificateSource for PairLinkage {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.before_statement.collect_certificates(out);
        self.after.collect_certificates(out);
    }
}

impl CertificateSource for AdjoinedAlbert {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        out.push(&self.anisotropy);
    }
}

impl CertificateSource for LinkingReport {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.pairs.collect_certificates(out);
        self.adjoined.collect_certificates(out);
        self.preserved.collect_certificates(out);
    }
}

impl CertificateSource for TheoremCReport {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        for r in &self.rounds {
            r.linking.collect_certificates(out);
            r.iteration.collect_certificates(out);
        }
        self.injectivity.collect_certificates(out);
    }
}
