//! Tower states and the derivation engine.

use serde::Serialize;

use super::cert::{replay, Certificate, CertificateSource, RuleParams, Status};
use super::formal::{recognize_pfister, FormalClass, TowerForm};
use super::TowerError;
use crate::forms::{isotropy, Isotropy};

/// Hypothesis "`subject` is anisotropic over the base".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assumption {
    pub id: String,
    pub subject: TowerForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Base {
    Rationals,
    Abstract { assumptions: Vec<Assumption> },
}

impl Base {
    pub fn abstract_with(assumptions: Vec<Assumption>) -> Result<Base, TowerError> {
        let mut ids: Vec<&str> = assumptions.iter().map(|a| a.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(TowerError::DuplicateAssumption(w[0].to_string()));
        }
        Ok(Base::Abstract { assumptions })
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Base::Rationals)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Adjunction {
    pub level: usize,
    pub form: TowerForm,
    /// Anisotropy of `form` over some level below `level`.
    pub anisotropy: Certificate,
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnknownReason {
    pub level: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    Proved(Certificate),
    Unknown(UnknownReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackedStatement {
    pub subject: TowerForm,
    pub level: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unknown: Option<UnknownReason>,
}

impl TrackedStatement {
    fn from_derivation(subject: &TowerForm, level: usize, d: Derivation) -> TrackedStatement {
        match d {
            Derivation::Proved(c) => TrackedStatement {
                subject: subject.clone(),
                level,
                status: c.status,
                certificate: Some(c),
                unknown: None,
            },
            Derivation::Unknown(r) => TrackedStatement {
                subject: subject.clone(),
                level,
                status: Status::Unknown,
                certificate: None,
                unknown: Some(r),
            },
        }
    }
}

impl CertificateSource for TrackedStatement {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.certificate.collect_certificates(out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelledStatement {
    pub label: String,
    #[serde(flatten)]
    pub statement: TrackedStatement,
}

impl CertificateSource for LabelledStatement {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.statement.collect_certificates(out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub step: String,
    pub from_level: usize,
    pub to_level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct Tracked {
    label: String,
    subject: TowerForm,
}

/// An immutable tower; steps return new states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerState {
    base: Base,
    adjunctions: Vec<Adjunction>,
    tracked: Vec<Tracked>,
    log: Vec<LogEntry>,
}

impl TowerState {
    pub fn new(base: Base) -> TowerState {
        TowerState {
            base,
            adjunctions: Vec::new(),
            tracked: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn rationals() -> TowerState {
        TowerState::new(Base::Rationals)
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn adjunctions(&self) -> &[Adjunction] {
        &self.adjunctions
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// Number of adjunctions; the level of the top field.
    pub fn top(&self) -> usize {
        self.adjunctions.len()
    }

    /// The adjunction creating level `level` (levels start at 1).
    pub fn adjunction(&self, level: usize) -> Option<&Adjunction> {
        level.checked_sub(1).and_then(|i| self.adjunctions.get(i))
    }

    pub fn assumption(&self, id: &str) -> Option<&Assumption> {
        match &self.base {
            Base::Rationals => None,
            Base::Abstract { assumptions } => assumptions.iter().find(|a| a.id == id),
        }
    }

    fn assumption_for(&self, q: &TowerForm) -> Option<&Assumption> {
        match &self.base {
            Base::Rationals => None,
            Base::Abstract { assumptions } => {
                assumptions.iter().find(|a| a.subject.same_multiset(q))
            }
        }
    }

    fn derive_base(&self, q: &TowerForm) -> Derivation {
        match &self.base {
            Base::Rationals => match q.to_diagonal() {
                None => Derivation::Unknown(UnknownReason {
                    level: 0,
                    reason: "formal coefficients over the rational base".into(),
                }),
                Some(d) => {
                    let (status, failing_place) = match isotropy(&d) {
                        Isotropy::Isotropic => (Status::Isotropic, None),
                        Isotropy::Anisotropic { failing_place } => {
                            (Status::Anisotropic, Some(failing_place))
                        }
                    };
                    Derivation::Proved(Certificate::new(
                        q.clone(),
                        0,
                        status,
                        RuleParams::Base { failing_place },
                        vec![],
                    ))
                }
            },
            Base::Abstract { .. } => match self.assumption_for(q) {
                Some(a) => Derivation::Proved(Certificate::new(
                    q.clone(),
                    0,
                    Status::Anisotropic,
                    RuleParams::Assume { id: a.id.clone() },
                    vec![],
                )),
                None => Derivation::Unknown(UnknownReason {
                    level: 0,
                    reason: "no ledger assumption covers this form".into(),
                }),
            },
        }
    }

    /// Status of `q` over level `level`, using only the tower rules.
    pub fn derive_at(&self, q: &TowerForm, level: usize) -> Derivation {
        let pfister = recognize_pfister(q);
        self.derive_with(q, level.min(self.top()), pfister.as_deref())
    }

    fn derive_with(
        &self,
        q: &TowerForm,
        level: usize,
        pfister: Option<&[FormalClass]>,
    ) -> Derivation {
        if level == 0 {
            return self.derive_base(q);
        }
        let adj = &self.adjunctions[level - 1];
        if q.same_multiset(&adj.form) {
            return Derivation::Proved(Certificate::new(
                q.clone(),
                level,
                Status::Isotropic,
                RuleParams::Generic {
                    adjoined_dim: adj.form.dim(),
                },
                vec![],
            ));
        }
        let below = match self.derive_with(q, level - 1, pfister) {
            Derivation::Unknown(r) => return Derivation::Unknown(r),
            Derivation::Proved(c) => c,
        };
        if below.status == Status::Isotropic {
            let origin = match below.params {
                RuleParams::Monotone { .. } => below.premises.into_iter().next().expect("premise"),
                _ => below,
            };
            return Derivation::Proved(Certificate::new(
                q.clone(),
                level,
                Status::Isotropic,
                RuleParams::Monotone {
                    from_level: origin.level,
                },
                vec![origin],
            ));
        }
        if let Some(generators) = pfister {
            let subject_discriminant = q.signed_discriminant();
            let adjoined_discriminant = adj.form.signed_discriminant();
            if adj.form.dim() == q.dim() && subject_discriminant != adjoined_discriminant {
                return Derivation::Proved(Certificate::new(
                    q.clone(),
                    level,
                    Status::Anisotropic,
                    RuleParams::Pfister {
                        n: generators.len() as u32,
                        generators: generators.to_vec(),
                        subject_discriminant,
                        adjoined_dim: adj.form.dim(),
                        adjoined_discriminant,
                    },
                    vec![below],
                ));
            }
        }
        let n = q.dim().next_power_of_two().trailing_zeros();
        if (1usize << n) < adj.form.dim() {
            return Derivation::Proved(Certificate::new(
                q.clone(),
                level,
                Status::Anisotropic,
                RuleParams::Hoffmann {
                    n,
                    subject_dim: q.dim(),
                    adjoined_dim: adj.form.dim(),
                },
                vec![below],
            ));
        }
        Derivation::Unknown(UnknownReason {
            level,
            reason: format!(
                "anisotropic below, but over the function field of {} neither the Pfister \
                 comparison nor the dimension bound applies",
                adj.form
            ),
        })
    }

    /// Status of `q` over the top level.
    pub fn derive_status(&self, q: &TowerForm) -> TrackedStatement {
        TrackedStatement::from_derivation(q, self.top(), self.derive_at(q, self.top()))
    }

    /// Status of `q` over every level `0..=top`.
    pub fn status_history(&self, q: &TowerForm) -> Vec<Status> {
        let pfister = recognize_pfister(q);
        (0..=self.top())
            .map(|l| match self.derive_with(q, l, pfister.as_deref()) {
                Derivation::Proved(c) => c.status,
                Derivation::Unknown(_) => Status::Unknown,
            })
            .collect()
    }

    /// Adjoins `φ` after certifying it anisotropic over the top level.
    pub fn adjoin(&self, phi: &TowerForm) -> Result<TowerState, TowerError> {
        self.adjoin_over(phi, self.top(), "adjoin")
    }

    /// Adjoins `φ` after certifying it anisotropic over level `level`
    /// (at most the top).
    pub(crate) fn adjoin_over(
        &self,
        phi: &TowerForm,
        level: usize,
        origin: &str,
    ) -> Result<TowerState, TowerError> {
        if phi.dim() < 2 {
            return Err(TowerError::AdjoinTooSmall {
                form: phi.to_string(),
            });
        }
        match self.derive_at(phi, level) {
            Derivation::Proved(c) if c.status == Status::Anisotropic => {
                let mut next = self.clone();
                next.adjunctions.push(Adjunction {
                    level: self.top() + 1,
                    form: phi.clone(),
                    anisotropy: c,
                    origin: origin.to_string(),
                });
                Ok(next)
            }
            Derivation::Proved(c) => Err(TowerError::AdjoinRefused {
                form: phi.to_string(),
                status: c.status,
                reason: format!("derived by {} over level {}", c.rule(), c.level),
            }),
            Derivation::Unknown(r) => Err(TowerError::AdjoinRefused {
                form: phi.to_string(),
                status: Status::Unknown,
                reason: r.reason,
            }),
        }
    }

    pub(crate) fn track(&mut self, label: &str, subject: &TowerForm) {
        if !self.tracked.iter().any(|t| t.label == label) {
            self.tracked.push(Tracked {
                label: label.to_string(),
                subject: subject.clone(),
            });
        }
    }

    pub(crate) fn record(&mut self, step: &str, from_level: usize) {
        self.log.push(LogEntry {
            step: step.to_string(),
            from_level,
            to_level: self.top(),
        });
    }

    /// Current statuses of all tracked subjects over the top level.
    pub fn tracked(&self) -> Vec<LabelledStatement> {
        self.tracked
            .iter()
            .map(|t| LabelledStatement {
                label: t.label.clone(),
                statement: self.derive_status(&t.subject),
            })
            .collect()
    }

    pub fn tracked_subjects(&self) -> impl Iterator<Item = (&str, &TowerForm)> {
        self.tracked.iter().map(|t| (t.label.as_str(), &t.subject))
    }

    /// Replays the anisotropy certificate of every adjunction.
    pub fn replay_adjunctions(&self) -> bool {
        self.adjunctions.iter().all(|adj| {
            adj.anisotropy.subject.same_multiset(&adj.form)
                && adj.anisotropy.status == Status::Anisotropic
                && adj.anisotropy.level < adj.level
                && replay(&adj.anisotropy, self)
        })
    }
}

impl CertificateSource for TowerState {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        for adj in &self.adjunctions {
            out.push(&adj.anisotropy);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::cert::{tamper, Rule};

    fn tf(s: &str) -> TowerForm {
        s.parse().unwrap()
    }

    fn proved(d: Derivation) -> Certificate {
        match d {
            Derivation::Proved(c) => c,
            Derivation::Unknown(r) => panic!("unknown: {}", r.reason),
        }
    }

    #[test]
    fn base_status() {
        let st = TowerState::rationals();
        let s = st.derive_status(&tf("1,1,1,1"));
        assert_eq!(s.status, Status::Anisotropic);
        assert_eq!(s.certificate.unwrap().rule(), Rule::Base);
    }

    #[test]
    fn worked_tower() {
        let st = TowerState::rationals().adjoin(&tf("-2,1,3,3")).unwrap();
        let c = proved(st.derive_at(&tf("1,1,1,1"), 1));
        assert_eq!(c.rule(), Rule::Pfister);
        assert_eq!(c.status, Status::Anisotropic);
        assert!(replay(&c, &st));
        let g = proved(st.derive_at(&tf("1,3,3,-2"), 1));
        assert_eq!(g.rule(), Rule::Generic);
        assert_eq!(g.status, Status::Isotropic);
        assert!(replay(&g, &st));
        // Non-Pfister, dimension 4, over a 4-dimensional adjunction.
        assert!(matches!(
            st.derive_at(&tf("1,1,1,2"), 1),
            Derivation::Unknown(_)
        ));
        assert!(st.replay_adjunctions());
    }

    #[test]
    fn adjoin_refusals() {
        let st = TowerState::rationals();
        assert!(matches!(
            st.adjoin(&tf("1,-1")),
            Err(TowerError::AdjoinRefused {
                status: Status::Isotropic,
                ..
            })
        ));
        assert!(matches!(
            st.adjoin(&tf("3")),
            Err(TowerError::AdjoinTooSmall { .. })
        ));
        let st = st.adjoin(&tf("-2,1,3,3")).unwrap();
        assert!(matches!(
            st.adjoin(&tf("-7,1,1,1")),
            Err(TowerError::AdjoinRefused {
                status: Status::Unknown,
                ..
            })
        ));
    }

    #[test]
    fn hoffmann_over_six_dimensional_adjunction() {
        let base = Base::abstract_with(vec![
            Assumption {
                id: "A1".into(),
                subject: tf("a,b,-a*b,-c,-d,c*d"),
            },
            Assumption {
                id: "Q1".into(),
                subject: tf("1,-a,-b,a*b"),
            },
        ])
        .unwrap();
        let st = TowerState::new(base)
            .adjoin(&tf("a,b,-a*b,-c,-d,c*d"))
            .unwrap();
        let c = proved(st.derive_at(&tf("1,-a,-b,a*b"), 1));
        assert_eq!(c.rule(), Rule::Hoffmann);
        assert_eq!(
            c.params,
            RuleParams::Hoffmann {
                n: 2,
                subject_dim: 4,
                adjoined_dim: 6
            }
        );
        assert_eq!(c.assumptions, vec!["Q1".to_string()]);
        assert!(replay(&c, &st));
        assert!(!replay(&tamper(&c), &st));
        assert!(!replay(&tamper(&c.premises[0]), &st));
        assert!(st.replay_adjunctions());
        // Nothing is known about forms outside the ledger.
        assert!(matches!(
            st.derive_at(&tf("1,-c,-d,c*d"), 1),
            Derivation::Unknown(_)
        ));
    }

    #[test]
    fn monotone_points_at_origin() {
        let st = TowerState::rationals()
            .adjoin(&tf("-2,1,3,3"))
            .unwrap()
            .adjoin_over(&tf("-7,1,1,1"), 0, "test")
            .unwrap();
        let c = proved(st.derive_at(&tf("-2,1,3,3"), 2));
        assert_eq!(c.rule(), Rule::Monotone);
        assert_eq!(c.params, RuleParams::Monotone { from_level: 1 });
        assert_eq!(c.premises[0].rule(), Rule::Generic);
        assert!(replay(&c, &st));
        assert!(!replay(&tamper(&c), &st));
        assert_eq!(
            st.status_history(&tf("-2,1,3,3")),
            vec![Status::Anisotropic, Status::Isotropic, Status::Isotropic]
        );
        assert!(st.replay_adjunctions());
    }

    #[test]
    fn tampering_is_detected() {
        let st = TowerState::rationals().adjoin(&tf("-2,1,3,3")).unwrap();
        for q in ["1,1,1,1", "-2,1,3,3", "1,-1"] {
            let c = proved(st.derive_at(&tf(q), 1));
            assert!(replay(&c, &st));
            for node in c.nodes() {
                assert!(!replay(&tamper(node), &st), "{:?}", node.rule());
            }
        }
        let c = proved(st.derive_at(&tf("1,1,1,1"), 1));
        // Certificates do not transfer to a shorter tower.
        assert!(!replay(&c, &TowerState::rationals()));
    }
}
