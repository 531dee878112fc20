//! Certificates and their replay.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::formal::{formal_pfister, FormalClass, TowerForm};
use super::state::{Base, TowerState};
use crate::forms::{isotropy, Isotropy};
use crate::local::Place;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Anisotropic,
    Isotropic,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Anisotropic => "ANISOTROPIC",
            Status::Isotropic => "ISOTROPIC",
            Status::Unknown => "UNKNOWN",
        })
    }
}

/// The rule kinds a derivation may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    /// Hasse–Minkowski over the rational base.
    #[serde(rename = "R-BASE")]
    Base,
    /// An anisotropic `n`-fold Pfister form stays anisotropic over the
    /// function field of a `2ⁿ`-dimensional form it is not Witt equivalent to.
    #[serde(rename = "R-PFISTER")]
    Pfister,
    /// Hoffmann: an anisotropic `q` stays anisotropic over `F(φ)` when
    /// `dim q ≤ 2ⁿ < dim φ`.
    #[serde(rename = "R-HOFFMANN")]
    Hoffmann,
    /// An adjoined form is isotropic over its own function field.
    #[serde(rename = "R-GENERIC")]
    Generic,
    /// Isotropy persists in extensions.
    #[serde(rename = "R-MONOTONE")]
    Monotone,
    /// Anisotropy over every field of a chain gives anisotropy over the union.
    #[serde(rename = "R-CHAIN")]
    Chain,
    /// A ledger assumption about the abstract base.
    #[serde(rename = "R-ASSUME")]
    Assume,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::Base,
        Rule::Pfister,
        Rule::Hoffmann,
        Rule::Generic,
        Rule::Monotone,
        Rule::Chain,
        Rule::Assume,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Base => "R-BASE",
            Rule::Pfister => "R-PFISTER",
            Rule::Hoffmann => "R-HOFFMANN",
            Rule::Generic => "R-GENERIC",
            Rule::Monotone => "R-MONOTONE",
            Rule::Chain => "R-CHAIN",
            Rule::Assume => "R-ASSUME",
        })
    }
}

/// The facts each rule consumed; replay re-checks all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", content = "params")]
pub enum RuleParams {
    #[serde(rename = "R-BASE")]
    Base { failing_place: Option<Place> },
    #[serde(rename = "R-PFISTER")]
    Pfister {
        n: u32,
        generators: Vec<FormalClass>,
        subject_discriminant: FormalClass,
        adjoined_dim: usize,
        adjoined_discriminant: FormalClass,
    },
    #[serde(rename = "R-HOFFMANN")]
    Hoffmann {
        n: u32,
        subject_dim: usize,
        adjoined_dim: usize,
    },
    #[serde(rename = "R-GENERIC")]
    Generic { adjoined_dim: usize },
    #[serde(rename = "R-MONOTONE")]
    Monotone { from_level: usize },
    #[serde(rename = "R-CHAIN")]
    Chain {
        first_level: usize,
        last_level: usize,
    },
    #[serde(rename = "R-ASSUME")]
    Assume { id: String },
}

impl RuleParams {
    pub fn rule(&self) -> Rule {
        match self {
            RuleParams::Base { .. } => Rule::Base,
            RuleParams::Pfister { .. } => Rule::Pfister,
            RuleParams::Hoffmann { .. } => Rule::Hoffmann,
            RuleParams::Generic { .. } => Rule::Generic,
            RuleParams::Monotone { .. } => Rule::Monotone,
            RuleParams::Chain { .. } => Rule::Chain,
            RuleParams::Assume { .. } => Rule::Assume,
        }
    }
}

/// A derivation tree for "`subject` is `status` over level `level`".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub subject: TowerForm,
    pub level: usize,
    pub status: Status,
    #[serde(flatten)]
    pub params: RuleParams,
    /// Ledger ids this certificate depends on, sorted.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<Certificate>,
}

impl Certificate {
    pub(crate) fn new(
        subject: TowerForm,
        level: usize,
        status: Status,
        params: RuleParams,
        premises: Vec<Certificate>,
    ) -> Certificate {
        let assumptions = collected_assumptions(&params, &premises)
            .into_iter()
            .collect();
        Certificate {
            subject,
            level,
            status,
            params,
            assumptions,
            premises,
        }
    }

    pub fn rule(&self) -> Rule {
        self.params.rule()
    }

    /// This node and all premises, depth first.
    pub fn nodes(&self) -> Vec<&Certificate> {
        let mut out = vec![self];
        for p in &self.premises {
            out.extend(p.nodes());
        }
        out
    }
}

fn collected_assumptions(params: &RuleParams, premises: &[Certificate]) -> BTreeSet<String> {
    let mut ids: BTreeSet<String> = premises
        .iter()
        .flat_map(|p| p.assumptions.iter().cloned())
        .collect();
    if let RuleParams::Assume { id } = params {
        ids.insert(id.clone());
    }
    ids
}

/// Re-checks every node of `cert` against the tower it claims to live in.
pub fn replay(cert: &Certificate, state: &TowerState) -> bool {
    if cert.level > state.top() || cert.status == Status::Unknown {
        return false;
    }
    let ids: Vec<String> = collected_assumptions(&cert.params, &cert.premises)
        .into_iter()
        .collect();
    if ids != cert.assumptions {
        return false;
    }
    let single_premise = |status: Status, level: usize| -> bool {
        matches!(cert.premises.as_slice(), [p]
            if p.status == status && p.level == level && p.subject.same_multiset(&cert.subject))
    };
    let node_ok = match &cert.params {
        RuleParams::Base { failing_place } => {
            let Base::Rationals = state.base() else {
                return false;
            };
            let Some(q) = cert.subject.to_diagonal() else {
                return false;
            };
            cert.level == 0
                && cert.premises.is_empty()
                && match isotropy(&q) {
                    Isotropy::Isotropic => {
                        cert.status == Status::Isotropic && failing_place.is_none()
                    }
                    Isotropy::Anisotropic { failing_place: fp } => {
                        cert.status == Status::Anisotropic && failing_place.as_ref() == Some(&fp)
                    }
                }
        }
        RuleParams::Assume { id } => {
            cert.level == 0
                && cert.premises.is_empty()
                && cert.status == Status::Anisotropic
                && state
                    .assumption(id)
                    .is_some_and(|a| a.subject.same_multiset(&cert.subject))
        }
        RuleParams::Generic { adjoined_dim } => {
            cert.status == Status::Isotropic
                && cert.premises.is_empty()
                && state.adjunction(cert.level).is_some_and(|adj| {
                    adj.form.same_multiset(&cert.subject) && adj.form.dim() == *adjoined_dim
                })
        }
        RuleParams::Monotone { from_level } => {
            cert.status == Status::Isotropic
                && *from_level < cert.level
                && single_premise(Status::Isotropic, *from_level)
        }
        RuleParams::Pfister {
            n,
            generators,
            subject_discriminant,
            adjoined_dim,
            adjoined_discriminant,
        } => {
            let Some(adj) = state.adjunction(cert.level) else {
                return false;
            };
            cert.status == Status::Anisotropic
                && *n >= 1
                && generators.len() == *n as usize
                && formal_pfister(generators).same_multiset(&cert.subject)
                && adj.form.dim() == *adjoined_dim
                && *adjoined_dim == 1usize << n
                && cert.subject.signed_discriminant() == *subject_discriminant
                && adj.form.signed_discriminant() == *adjoined_discriminant
                && subject_discriminant != adjoined_discriminant
                && single_premise(Status::Anisotropic, cert.level - 1)
        }
        RuleParams::Hoffmann {
            n,
            subject_dim,
            adjoined_dim,
        } => {
            let Some(adj) = state.adjunction(cert.level) else {
                return false;
            };
            let power = 1usize.checked_shl(*n).unwrap_or(usize::MAX);
            cert.status == Status::Anisotropic
                && cert.subject.dim() == *subject_dim
                && adj.form.dim() == *adjoined_dim
                && *subject_dim <= power
                && power < *adjoined_dim
                && single_premise(Status::Anisotropic, cert.level - 1)
        }
        RuleParams::Chain {
            first_level,
            last_level,
        } => {
            cert.status == Status::Anisotropic
                && first_level <= last_level
                && *last_level == cert.level
                && single_premise(Status::Anisotropic, *last_level)
        }
    };
    node_ok && cert.premises.iter().all(|p| replay(p, state))
}

/// A copy of `cert` with one rule-specific fact at the root falsified.
/// Replay must reject the result.
pub fn tamper(cert: &Certificate) -> Certificate {
    let mut t = cert.clone();
    match &mut t.params {
        RuleParams::Base { failing_place } => {
            t.status = match t.status {
                Status::Anisotropic => Status::Isotropic,
                _ => Status::Anisotropic,
            };
            if failing_place.is_none() {
                *failing_place = Some(Place::Infinite);
            }
        }
        RuleParams::Assume { id } => {
            id.push_str("-missing");
            t.assumptions = collected_assumptions(&t.params, &t.premises)
                .into_iter()
                .collect();
        }
        RuleParams::Generic { .. } => {
            t.subject = t
                .subject
                .orthogonal_sum(&TowerForm::new(vec![FormalClass::one()]).expect("nonempty"));
        }
        RuleParams::Monotone { from_level } => {
            *from_level = t.level;
        }
        RuleParams::Pfister {
            subject_discriminant,
            adjoined_discriminant,
            ..
        } => {
            *adjoined_discriminant = subject_discriminant.clone();
        }
        RuleParams::Hoffmann {
            n, adjoined_dim, ..
        } => {
            *adjoined_dim = 1usize << *n;
        }
        RuleParams::Chain { last_level, .. } => {
            *last_level += 1;
        }
    }
    t
}

/// Anything that carries certificates.
pub trait CertificateSource {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>);

    fn certificates(&self) -> Vec<&Certificate> {
        let mut out = Vec::new();
        self.collect_certificates(&mut out);
        out
    }
}

impl CertificateSource for Certificate {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        out.push(self);
    }
}

impl<T: CertificateSource> CertificateSource for Vec<T> {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        for item in self {
            item.collect_certificates(out);
        }
    }
}

impl<T: CertificateSource> CertificateSource for Option<T> {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        if let Some(item) = self {
            item.collect_certificates(out);
        }
    }
}
