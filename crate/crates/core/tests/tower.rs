use quatgenus_core::arith::{witness_order, SquareClass};
use quatgenus_core::quaternion::QuaternionAlgebra;
use quatgenus_core::tower::*;

fn q(a: i64, b: i64) -> QuaternionAlgebra {
    QuaternionAlgebra::from_integers(a, b).unwrap()
}

fn sc(n: i64) -> SquareClass {
    SquareClass::from_i64(n)
}

fn tf(s: &str) -> TowerForm {
    s.parse().unwrap()
}

fn worked() -> Vec<QuaternionAlgebra> {
    vec![q(-1, -1), q(-1, -3)]
}

fn window(bound: u64) -> Vec<SquareClass> {
    witness_order(bound)
        .into_iter()
        .filter(|c| !c.is_one())
        .collect()
}

fn all_replay(src: &impl CertificateSource, st: &TowerState) {
    let certs = src.certificates();
    assert!(!certs.is_empty());
    for c in certs {
        assert!(
            replay(c, st),
            "replay failed: {}",
            serde_json::to_string(c).unwrap()
        );
    }
    assert!(st.replay_adjunctions());
}

fn abstract_pair() -> (TowerState, Family) {
    let base = Base::abstract_with(vec![
        Assumption {
            id: "QD".into(),
            subject: tf("1,-a,-b,a*b"),
        },
        Assumption {
            id: "QE".into(),
            subject: tf("1,-c,-d,c*d"),
        },
        Assumption {
            id: "ALB".into(),
            subject: tf("a,b,-a*b,-c,-d,c*d"),
        },
    ])
    .unwrap();
    let family = Family {
        algebras: vec!["a,b".parse().unwrap(), "c,d".parse().unwrap()],
        linked: vec![],
    };
    (TowerState::new(base), family)
}

#[test]
fn worked_pushing_step() {
    let (st, rep) = step_pushing_extension(&TowerState::rationals(), &worked(), &[sc(-2)]).unwrap();
    assert_eq!(rep.pairs.len(), 1);
    let pair = &rep.pairs[0];
    assert_eq!((pair.class.clone(), pair.algebra), (sc(-2), 1));
    assert_eq!(pair.form, tf("-2,1,3,3"));
    assert_eq!(pair.discriminant, "-2".parse().unwrap());
    assert_eq!(pair.anisotropy.rule(), Rule::Base);

    let subjects: Vec<&TowerForm> = rep
        .injectivity
        .iter()
        .map(|s| &s.statement.subject)
        .collect();
    assert_eq!(subjects, [&tf("1,1,1,1"), &tf("1,1,3,3"), &tf("1,1,-3,-3")]);
    for s in &rep.injectivity {
        let c = s.statement.certificate.as_ref().unwrap();
        assert_eq!(c.status, Status::Anisotropic);
        match &c.params {
            RuleParams::Pfister {
                n,
                subject_discriminant,
                adjoined_discriminant,
                ..
            } => {
                assert_eq!(*n, 2);
                assert_eq!(subject_discriminant.to_string(), "1");
                assert_eq!(adjoined_discriminant.to_string(), "-2");
            }
            other => panic!("expected R-PFISTER, got {other:?}"),
        }
        assert_eq!(c.premises[0].rule(), Rule::Base);
    }
    assert_eq!(rep.embeddings.len(), 2);
    assert!(rep
        .embeddings
        .iter()
        .all(|e| e.statement.status == Status::Isotropic));
    assert_eq!(
        rep.embeddings[1]
            .statement
            .certificate
            .as_ref()
            .unwrap()
            .rule(),
        Rule::Generic
    );
    assert!(rep.is_complete());
    all_replay(&rep, &st);
}

#[test]
fn trivial_pushing_steps() {
    let st0 = TowerState::rationals();
    let (st, rep) = step_pushing_extension(&st0, &worked(), &[]).unwrap();
    assert_eq!(st.top(), 0);
    assert!(rep.pairs.is_empty());
    let (st, rep) = step_pushing_extension(&st0, &worked(), &[sc(-1)]).unwrap();
    assert_eq!(st.top(), 0);
    assert!(rep.exclusions[0].not_containing.is_empty());
    assert!(matches!(
        step_pushing_extension(&st0, &worked(), &[sc(1)]),
        Err(TowerError::TrivialClass)
    ));
    assert!(matches!(
        step_pushing_extension(&st0, &[q(1, 5)], &[sc(-2)]),
        Err(TowerError::NotDivision(_))
    ));
    assert!(matches!(
        step_pushing_extension(&st0, &[q(-1, -1), q(-2, -1)], &[sc(-2)]),
        Err(TowerError::Isomorphic(..))
    ));
}

#[test]
fn distinguishing_sets() {
    let st0 = TowerState::rationals();
    let w = window(10);
    let scan = compute_s(&st0, &worked(), &w).unwrap();
    assert_eq!(scan.distinguishing, [sc(-2), sc(-5), sc(-7)]);
    for c in &scan.distinguishing {
        let a = worked()[0].contains_subfield(c);
        let b = worked()[1].contains_subfield(c);
        assert_ne!(a, b);
    }
    assert!(scan.unresolved.is_empty());

    let (st, _) = step_pushing_extension(&st0, &worked(), &[sc(-2)]).unwrap();
    let scan = compute_s(&st, &worked(), &[sc(-2)]).unwrap();
    assert!(scan.distinguishing.is_empty());

    assert!(compute_s(&st0, &[q(-1, -1)], &w)
        .unwrap()
        .distinguishing
        .is_empty());
}

#[test]
fn iteration_stabilises() {
    let (st, rep) = iterate_theorem1(&TowerState::rationals(), &worked(), &window(10), 3).unwrap();
    assert!(rep.stabilized);
    assert!(rep.weakly_isomorphic_in_window);
    assert!(rep.unknown.is_empty());
    assert_eq!(rep.initial_distinguishing, [sc(-2), sc(-5), sc(-7)]);
    assert_eq!(rep.rounds.len(), 1);
    assert!(rep
        .final_scan
        .rows
        .iter()
        .all(|r| r.entries.iter().all(|e| e.verdict == Verdict::Contained)));
    for s in &rep.injectivity {
        assert_eq!(
            s.statement.certificate.as_ref().unwrap().rule(),
            Rule::Chain
        );
    }
    all_replay(&rep, &st);
    for (_, subject) in st.tracked_subjects() {
        let h = st.status_history(subject);
        assert!(h.iter().all(|s| *s == Status::Anisotropic));
    }
}

#[test]
fn iteration_edge_cases() {
    let st0 = TowerState::rationals();
    let (st, rep) = iterate_theorem1(&st0, &worked(), &[], 3).unwrap();
    assert!(rep.stabilized && rep.rounds.is_empty());
    assert_eq!(st.top(), 0);
    let (st, rep) = iterate_theorem1(&st0, &worked(), &window(10), 0).unwrap();
    assert_eq!(st.top(), 0);
    assert_eq!(rep.initial_distinguishing, [sc(-2), sc(-5), sc(-7)]);
    assert!(!rep.stabilized);
}

#[test]
fn concrete_linking_is_identity() {
    let family = Family::concrete(&worked());
    let (st, rep) = step_linking_extension(&TowerState::rationals(), &family).unwrap();
    assert_eq!(st.top(), 0);
    assert!(rep.adjoined.is_empty());
    assert_eq!(rep.pairs[0].before, PairState::Linked);
    assert_eq!(rep.notes.len(), 1);
    all_replay(&rep, &st);
}

#[test]
fn abstract_linking_step() {
    let (st0, family) = abstract_pair();
    let (st, rep) = step_linking_extension(&st0, &family).unwrap();
    assert_eq!(st.top(), 1);
    assert_eq!(rep.pairs[0].before, PairState::Unlinked);
    let after = rep.pairs[0].after.certificate.as_ref().unwrap();
    assert_eq!(after.rule(), Rule::Generic);
    assert_eq!(rep.adjoined[0].anisotropy.rule(), Rule::Assume);
    assert_eq!(rep.preserved.len(), 2);
    for s in &rep.preserved {
        let c = s.statement.certificate.as_ref().unwrap();
        assert_eq!(
            c.params,
            RuleParams::Hoffmann {
                n: 2,
                subject_dim: 4,
                adjoined_dim: 6
            }
        );
    }
    assert!(rep.is_complete());
    all_replay(&rep, &st);
}

#[test]
fn missing_albert_assumption() {
    let base = Base::abstract_with(vec![Assumption {
        id: "QD".into(),
        subject: tf("1,-a,-b,a*b"),
    }])
    .unwrap();
    let family = Family {
        algebras: vec!["a,b".parse().unwrap(), "c,d".parse().unwrap()],
        linked: vec![],
    };
    let err = step_linking_extension(&TowerState::new(base), &family).unwrap_err();
    assert!(matches!(err, TowerError::MissingAssumption { .. }));
    assert!(err.to_string().contains("assumption id"));
}

#[test]
fn theorem_c_concrete() {
    let family = Family::concrete(&worked());
    let (st, rep) =
        run_theorem_c_truncation(&TowerState::rationals(), &family, &window(10), 1, 3).unwrap();
    assert!(rep.complete);
    assert!(rep.rounds[0].linking.adjoined.is_empty());
    assert!(rep.rounds[0].iteration.as_ref().unwrap().stabilized);
    all_replay(&rep, &st);

    let (st, rep) =
        run_theorem_c_truncation(&TowerState::rationals(), &family, &window(10), 0, 3).unwrap();
    assert_eq!(st.top(), 0);
    assert!(rep.rounds.is_empty());

    let (_, rep) =
        run_theorem_c_truncation(&TowerState::rationals(), &family, &window(10), 2, 3).unwrap();
    assert!(rep.complete);
}

#[test]
fn theorem_c_abstract_three_algebras() {
    let base = Base::abstract_with(vec![
        Assumption {
            id: "Q0".into(),
            subject: tf("1,-a,-b,a*b"),
        },
        Assumption {
            id: "Q1".into(),
            subject: tf("1,-a,-c,a*c"),
        },
        Assumption {
            id: "Q2".into(),
            subject: tf("1,-d,-e,d*e"),
        },
        Assumption {
            id: "Q01".into(),
            subject: tf("1,-a,-b*c,a*b*c"),
        },
        Assumption {
            id: "ALB".into(),
            subject: tf("a,b,-a*b,-d,-e,d*e"),
        },
    ])
    .unwrap();
    let family = Family {
        algebras: vec![
            "a,b".parse().unwrap(),
            "a,c".parse().unwrap(),
            "d,e".parse().unwrap(),
        ],
        linked: vec![(0, 1), (1, 2)],
    };
    let st0 = TowerState::new(base);
    let (st, rep) = run_theorem_c_truncation(&st0, &family, &[], 1, 3).unwrap();
    assert_eq!(st.top(), 1);
    assert!(rep.complete, "{:?}", rep.unknown);
    let linking = &rep.rounds[0].linking;
    let states: Vec<PairState> = linking.pairs.iter().map(|p| p.before).collect();
    assert_eq!(
        states,
        [
            PairState::DeclaredLinked,
            PairState::Unlinked,
            PairState::DeclaredLinked
        ]
    );
    assert_eq!(rep.injectivity.len(), 4);
    assert!(rep
        .injectivity
        .iter()
        .all(|s| s.statement.status == Status::Anisotropic));
    all_replay(&rep, &st);

    // A second round finds every pair linked and adjoins nothing.
    let (st2, rep2) = run_theorem_c_truncation(&st0, &family, &[], 2, 3).unwrap();
    assert_eq!(st2.top(), 1);
    assert!(rep2.rounds[1].linking.adjoined.is_empty());
    assert!(rep2.complete);
}

#[test]
fn tampering_every_rule_kind() {
    let (st_a, fam) = abstract_pair();
    let (st_a, rep_a) = step_linking_extension(&st_a, &fam).unwrap();
    let (st_c, rep_c) =
        iterate_theorem1(&TowerState::rationals(), &worked(), &window(10), 3).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for (st, certs) in [(&st_a, rep_a.certificates()), (&st_c, rep_c.certificates())] {
        for c in certs {
            for node in c.nodes() {
                assert!(replay(node, st));
                assert!(!replay(&tamper(node), st), "{}", node.rule());
                seen.insert(node.rule());
            }
        }
    }
    assert_eq!(seen.len(), Rule::ALL.len(), "{seen:?}");
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        let (_, rep) =
            iterate_theorem1(&TowerState::rationals(), &worked(), &window(10), 3).unwrap();
        serde_json::to_string(&rep).unwrap()
    };
    assert_eq!(run(), run());
}
