//! Construction scripts for the tower engine and the `tower run` command.
//!
//! A script names a base, a family of algebras and a list of steps. See
//! `docs/script-format.md` for the schema.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use quatgenus_core::arith::{witness_order, SquareClass};
use quatgenus_core::tower::{
    compute_s, iterate_theorem1, replay, run_theorem_c_truncation, step_linking_extension,
    step_pushing_extension, Algebra, Assumption, Base, Certificate, CertificateSource,
    IterationReport, LabelledStatement, LinkingReport, PairState, PushingReport, Status,
    TheoremCReport, TowerForm, TowerState, TrackedStatement, Unresolved,
};

use crate::{join, to_json, yes_no, CliError, Exit, Outcome, RunConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(default)]
    pub base: BaseSpec,
    pub algebras: Vec<Algebra>,
    /// Pairs declared linked over an abstract base.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linked: Vec<(usize, usize)>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    #[default]
    Rationals,
    Abstract {
        assumptions: Vec<AssumptionSpec>,
    },
}

/// Hypothesis that `anisotropic` is anisotropic over the base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionSpec {
    pub id: String,
    #[serde(alias = "subject", with = "form_text")]
    pub anisotropic: TowerForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Step {
    #[serde(rename = "pushing")]
    Pushing { classes: Vec<SquareClass> },
    #[serde(rename = "iterateP")]
    IterateP {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_levels: Option<usize>,
    },
    #[serde(rename = "linking")]
    Linking,
    #[serde(rename = "theoremC")]
    TheoremC {
        rounds: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_levels: Option<usize>,
    },
    #[serde(rename = "adjoin")]
    Adjoin {
        #[serde(with = "form_text")]
        form: TowerForm,
    },
}

impl Step {
    pub fn kind(&self) -> &'static str {
        match self {
            Step::Pushing { .. } => "pushing",
            Step::IterateP { .. } => "iterateP",
            Step::Linking => "linking",
            Step::TheoremC { .. } => "theoremC",
            Step::Adjoin { .. } => "adjoin",
        }
    }
}

/// Forms are written either as a list or as text such as `"<1,-a,-b,a*b>"`.
mod form_text {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        List(TowerForm),
    }

    pub fn serialize<S: Serializer>(form: &TowerForm, s: S) -> Result<S::Ok, S::Error> {
        form.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TowerForm, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Repr::List(f) => Ok(f),
        }
    }
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed script: {e}")))
    }

    pub fn initial_state(&self) -> Result<TowerState, CliError> {
        let base = match &self.base {
            BaseSpec::Rationals => Base::Rationals,
            BaseSpec::Abstract { assumptions } => Base::abstract_with(
                assumptions
                    .iter()
                    .map(|a| Assumption {
                        id: a.id.clone(),
                        subject: a.anisotropic.clone(),
                    })
                    .collect(),
            )?,
        };
        Ok(TowerState::new(base))
    }

    pub fn family(&self) -> quatgenus_core::tower::Family {
        quatgenus_core::tower::Family {
            algebras: self.algebras.clone(),
            linked: self.linked.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjoinReport {
    pub from_level: usize,
    pub to_level: usize,
    pub form: TowerForm,
    pub anisotropy: Certificate,
}

impl CertificateSource for AdjoinReport {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        out.push(&self.anisotropy);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum StepReport {
    #[serde(rename = "pushing")]
    Pushing(PushingReport),
    #[serde(rename = "iterateP")]
    IterateP(IterationReport),
    #[serde(rename = "linking")]
    Linking(LinkingReport),
    #[serde(rename = "theoremC")]
    TheoremC(TheoremCReport),
    #[serde(rename = "adjoin")]
    Adjoin(AdjoinReport),
}

impl StepReport {
    pub fn is_complete(&self) -> bool {
        match self {
            StepReport::Pushing(r) => r.is_complete(),
            StepReport::IterateP(r) => r.is_complete(),
            StepReport::Linking(r) => r.is_complete(),
            StepReport::TheoremC(r) => r.complete,
            StepReport::Adjoin(_) => true,
        }
    }

    pub fn unknown(&self) -> &[Unresolved] {
        match self {
            StepReport::Pushing(r) => &r.unresolved,
            StepReport::IterateP(r) => &r.unknown,
            StepReport::Linking(r) => &r.unresolved,
            StepReport::TheoremC(r) => &r.unknown,
            StepReport::Adjoin(_) => &[],
        }
    }
}

impl CertificateSource for StepReport {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        match self {
            StepReport::Pushing(r) => r.collect_certificates(out),
            StepReport::IterateP(r) => r.collect_certificates(out),
            StepReport::Linking(r) => r.collect_certificates(out),
            StepReport::TheoremC(r) => r.collect_certificates(out),
            StepReport::Adjoin(r) => r.collect_certificates(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplaySummary {
    pub certificates: usize,
    pub nodes: usize,
    pub adjunctions: bool,
    /// Indices, in collection order, of certificates that failed replay.
    pub failed: Vec<usize>,
}

impl ReplaySummary {
    pub fn passed(&self) -> bool {
        self.adjunctions && self.failed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScriptReport {
    pub window: u64,
    pub max_levels: usize,
    pub steps: Vec<StepReport>,
    pub tower: TowerState,
    pub tracked: Vec<LabelledStatement>,
    pub replay: ReplaySummary,
    pub unknown: usize,
    pub complete: bool,
}

impl ScriptReport {
    pub fn exit(&self) -> Exit {
        if !self.replay.passed() {
            Exit::PropertyFailure
        } else if !self.complete {
            Exit::Incomplete
        } else {
            Exit::Success
        }
    }
}

impl CertificateSource for ScriptReport {
    fn collect_certificates<'a>(&'a self, out: &mut Vec<&'a Certificate>) {
        self.steps.collect_certificates(out);
        self.tracked.collect_certificates(out);
    }
}

fn window_classes(bound: u64) -> Vec<SquareClass> {
    witness_order(bound)
        .into_iter()
        .filter(|c| !c.is_one())
        .collect()
}

fn run_step(
    state: &TowerState,
    script: &Script,
    step: &Step,
    cfg: &RunConfig,
) -> Result<(TowerState, StepReport), CliError> {
    let family = script.family();
    let window = |w: &Option<u64>| window_classes(w.unwrap_or(cfg.witness_window));
    Ok(match step {
        Step::Pushing { classes } => {
            let algebras = family.to_concrete()?;
            let (st, r) = step_pushing_extension(state, &algebras, classes)?;
            (st, StepReport::Pushing(r))
        }
        Step::IterateP {
            window: w,
            max_levels,
        } => {
            let algebras = family.to_concrete()?;
            let levels = max_levels.unwrap_or(cfg.max_levels);
            let (st, r) = iterate_theorem1(state, &algebras, &window(w), levels)?;
            (st, StepReport::IterateP(r))
        }
        Step::Linking => {
            let (st, r) = step_linking_extension(state, &family)?;
            (st, StepReport::Linking(r))
        }
        Step::TheoremC {
            rounds,
            window: w,
            max_levels,
        } => {
            let levels = max_levels.unwrap_or(cfg.max_levels);
            let (st, r) = run_theorem_c_truncation(state, &family, &window(w), *rounds, levels)?;
            (st, StepReport::TheoremC(r))
        }
        Step::Adjoin { form } => {
            let st = state.adjoin(form)?;
            let adj = st.adjunctions().last().expect("adjoin appends a level");
            let r = AdjoinReport {
                from_level: state.top(),
                to_level: st.top(),
                form: form.clone(),
                anisotropy: adj.anisotropy.clone(),
            };
            (st, StepReport::Adjoin(r))
        }
    })
}

/// Executes every step in order and replays every certificate against the
/// final tower.
pub fn run(script: &Script, cfg: &RunConfig) -> Result<ScriptReport, CliError> {
    let mut state = script.initial_state()?;
    let mut steps = Vec::new();
    for (i, step) in script.steps.iter().enumerate() {
        let (next, report) = run_step(&state, script, step, cfg)
            .map_err(|e| with_context(e, &format!("step {} ({})", i + 1, step.kind())))?;
        state = next;
        steps.push(report);
    }
    let tracked = state.tracked();
    let mut report = ScriptReport {
        window: cfg.witness_window,
        max_levels: cfg.max_levels,
        steps,
        tower: state,
        tracked,
        replay: ReplaySummary {
            certificates: 0,
            nodes: 0,
            adjunctions: false,
            failed: Vec::new(),
        },
        unknown: 0,
        complete: false,
    };
    let certs = report.certificates();
    let failed: Vec<usize> = certs
        .iter()
        .enumerate()
        .filter(|(_, c)| !replay(c, &report.tower))
        .map(|(i, _)| i)
        .collect();
    let replay_summary = ReplaySummary {
        certificates: certs.len(),
        nodes: certs.iter().map(|c| c.nodes().len()).sum(),
        adjunctions: report.tower.replay_adjunctions(),
        failed,
    };
    let unknown = report
        .steps
        .iter()
        .map(|s| s.unknown().len())
        .sum::<usize>()
        + report
            .tracked
            .iter()
            .filter(|t| t.statement.status == Status::Unknown)
            .count();
    report.complete = unknown == 0 && report.steps.iter().all(StepReport::is_complete);
    report.unknown = unknown;
    report.replay = replay_summary;
    Ok(report)
}

fn with_context(e: CliError, context: &str) -> CliError {
    match e {
        CliError::Input(m) => CliError::Input(format!("{context}: {m}")),
        CliError::Precondition(m) => CliError::Precondition(format!("{context}: {m}")),
        CliError::Incomplete(m) => CliError::Incomplete(format!("{context}: {m}")),
        CliError::Internal(m) => CliError::Internal(format!("{context}: {m}")),
    }
}

/// The `tower run` command on script text.
pub fn run_text(text: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let script = Script::parse(text)?;
    let report = run(&script, cfg)?;
    Ok(Outcome::new(
        report.exit(),
        render(&script, &report),
        to_json(&report),
    ))
}

fn statement(s: &TrackedStatement) -> String {
    match (&s.certificate, &s.unknown) {
        (Some(c), _) => format!(
            "{} {} at level {} by {}",
            s.subject,
            s.status,
            s.level,
            c.rule()
        ),
        (None, Some(r)) => format!(
            "{} UNKNOWN at level {} (stuck at level {}: {})",
            s.subject, s.level, r.level, r.reason
        ),
        (None, None) => format!("{} {} at level {}", s.subject, s.status, s.level),
    }
}

fn unresolved(u: &Unresolved) -> String {
    let mut parts = Vec::new();
    if let Some(c) = &u.class {
        parts.push(format!("class {c}"));
    }
    if !u.algebras.is_empty() {
        parts.push(format!("algebras {}", join(&u.algebras, ",")));
    }
    if let Some(s) = &u.subject {
        parts.push(s.to_string());
    }
    format!(
        "unknown {} at level {}: {}",
        parts.join(" "),
        u.level,
        u.reason
    )
}

fn pair_state(p: PairState) -> &'static str {
    match p {
        PairState::Linked => "linked",
        PairState::DeclaredLinked => "declared linked",
        PairState::Unlinked => "unlinked",
        PairState::Unresolved => "unresolved",
    }
}

fn push_labelled(out: &mut Vec<String>, pad: &str, tag: &str, items: &[LabelledStatement]) {
    for s in items {
        out.push(format!(
            "{pad}{tag} {} {}",
            s.label,
            statement(&s.statement)
        ));
    }
}

fn render_pushing(out: &mut Vec<String>, pad: &str, r: &PushingReport) {
    out.push(format!("{pad}classes {}", join(&r.classes, ",")));
    for e in &r.exclusions {
        out.push(format!(
            "{pad}class {} missing from {}",
            e.class,
            join(&e.not_containing, ",")
        ));
    }
    for p in &r.pairs {
        out.push(format!(
            "{pad}adjoin level {} {} for ({}, {}) discriminant {} anisotropic by {}",
            p.level,
            p.form,
            p.class,
            p.algebra,
            p.discriminant,
            p.anisotropy.rule()
        ));
    }
    push_labelled(out, pad, "injectivity", &r.injectivity);
    for e in &r.embeddings {
        out.push(format!(
            "{pad}embedding {} into {} {}",
            e.class,
            e.algebra,
            statement(&e.statement)
        ));
    }
    for u in &r.unresolved {
        out.push(format!("{pad}{}", unresolved(u)));
    }
}

fn render_iteration(out: &mut Vec<String>, pad: &str, r: &IterationReport) {
    out.push(format!("{pad}window {}", join(&r.window, ",")));
    out.push(format!(
        "{pad}initial distinguishing {}",
        join(&r.initial_distinguishing, ",")
    ));
    let inner = format!("{pad}  ");
    for round in &r.rounds {
        out.push(format!(
            "{pad}round {} distinguishing {} pushed {}",
            round.round,
            join(&round.distinguishing, ","),
            join(&round.pushed, ",")
        ));
        render_pushing(out, &inner, &round.pushing);
    }
    out.push(format!("{pad}stabilized {}", yes_no(r.stabilized)));
    out.push(format!(
        "{pad}weakly isomorphic in window {}",
        yes_no(r.weakly_isomorphic_in_window)
    ));
    push_labelled(out, pad, "injectivity", &r.injectivity);
    for u in &r.unknown {
        out.push(format!("{pad}{}", unresolved(u)));
    }
    for n in &r.notes {
        out.push(format!("{pad}note {n}"));
    }
}

fn render_linking(out: &mut Vec<String>, pad: &str, r: &LinkingReport) {
    for p in &r.pairs {
        out.push(format!(
            "{pad}pair {} {} {} -> albert {}",
            p.first,
            p.second,
            pair_state(p.before),
            statement(&p.after)
        ));
    }
    for a in &r.adjoined {
        out.push(format!(
            "{pad}adjoin level {} {} for pair {} {} anisotropic by {}",
            a.level,
            a.form,
            a.first,
            a.second,
            a.anisotropy.rule()
        ));
    }
    push_labelled(out, pad, "preserved", &r.preserved);
    for u in &r.unresolved {
        out.push(format!("{pad}{}", unresolved(u)));
    }
    for n in &r.notes {
        out.push(format!("{pad}note {n}"));
    }
}

fn render(script: &Script, report: &ScriptReport) -> Vec<String> {
    let mut out = Vec::new();
    out.push(format!("algebras {}", join(&script.algebras, " ")));
    for (i, (step, r)) in script.steps.iter().zip(&report.steps).enumerate() {
        let (from, to) = match r {
            StepReport::Pushing(r) => (r.from_level, r.to_level),
            StepReport::IterateP(r) => (r.from_level, r.to_level),
            StepReport::Linking(r) => (r.from_level, r.to_level),
            StepReport::TheoremC(r) => (r.from_level, r.to_level),
            StepReport::Adjoin(r) => (r.from_level, r.to_level),
        };
        out.push(format!(
            "step {} {}: level {from} -> {to}",
            i + 1,
            step.kind()
        ));
        let pad = "  ";
        match r {
            StepReport::Pushing(r) => render_pushing(&mut out, pad, r),
            StepReport::IterateP(r) => render_iteration(&mut out, pad, r),
            StepReport::Linking(r) => render_linking(&mut out, pad, r),
            StepReport::TheoremC(r) => {
                for round in &r.rounds {
                    out.push(format!("{pad}round {} linking", round.round));
                    render_linking(&mut out, "    ", &round.linking);
                    if let Some(it) = &round.iteration {
                        out.push(format!("{pad}round {} pushing", round.round));
                        render_iteration(&mut out, "    ", it);
                    }
                }
                push_labelled(&mut out, pad, "injectivity", &r.injectivity);
                for u in &r.unknown {
                    out.push(format!("{pad}{}", unresolved(u)));
                }
                for n in &r.notes {
                    out.push(format!("{pad}note {n}"));
                }
                out.push(format!("{pad}complete {}", yes_no(r.complete)));
            }
            StepReport::Adjoin(r) => out.push(format!(
                "{pad}adjoin level {} {} anisotropic by {}",
                r.to_level,
                r.form,
                r.anisotropy.rule()
            )),
        }
    }
    out.push(format!("tower level {}", report.tower.top()));
    for adj in report.tower.adjunctions() {
        out.push(format!(
            "  level {} {} ({})",
            adj.level, adj.form, adj.origin
        ));
    }
    push_labelled(&mut out, "", "tracked", &report.tracked);
    out.push(format!(
        "replay {} certificates, {} nodes, {} failed, adjunctions {}",
        report.replay.certificates,
        report.replay.nodes,
        report.replay.failed.len(),
        if report.replay.adjunctions {
            "ok"
        } else {
            "FAILED"
        }
    ));
    out.push(format!("unknown {}", report.unknown));
    out.push(format!(
        "result {}",
        if report.complete {
            "complete"
        } else {
            "incomplete"
        }
    ));
    out
}

/// The distinguishing classes of the window at the base, for scripts that
/// want to push them explicitly.
pub fn base_distinguishing(script: &Script, window: u64) -> Result<Vec<SquareClass>, CliError> {
    let algebras = script.family().to_concrete()?;
    let scan = compute_s(&script.initial_state()?, &algebras, &window_classes(window))?;
    Ok(scan.distinguishing)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = r#"{
        "algebras": ["-1,-1", "-1,-3"],
        "steps": [{"kind": "pushing", "classes": [-2]}]
    }"#;

    #[test]
    fn worked_script_runs() {
        let o = run_text(WORKED, &RunConfig::default()).unwrap();
        assert_eq!(o.exit, Exit::Success);
        assert!(o
            .lines
            .iter()
            .any(|l| l.contains("adjoin level 1 <-2,1,3,3> for (-2, 1)")));
        assert_eq!(o.lines.last().unwrap(), "result complete");
    }

    #[test]
    fn malformed_scripts() {
        let cfg = RunConfig::default();
        for bad in [
            "{",
            r#"{"algebras": ["-1,-1"]}"#,
            r#"{"algebras": ["-1,-1"], "steps": [{"kind": "bogus"}]}"#,
            r#"{"algebras": ["-1,-1"], "steps": [], "extra": 1}"#,
            r#"{"algebras": ["-1,0"], "steps": []}"#,
        ] {
            assert_eq!(
                run_text(bad, &cfg).unwrap_err().exit(),
                Exit::InputError,
                "{bad}"
            );
        }
    }

    #[test]
    fn hyperbolic_adjunction_is_refused() {
        let s = r#"{"algebras": [], "steps": [{"kind": "adjoin", "form": "<1,-1>"}]}"#;
        let e = run_text(s, &RunConfig::default()).unwrap_err();
        assert_eq!(e.exit(), Exit::InputError);
        assert!(e.to_string().starts_with("step 1 (adjoin)"));
    }

    #[test]
    fn preconditions() {
        let cfg = RunConfig::default();
        let split = r#"{"algebras": ["1,5"], "steps": [{"kind": "pushing", "classes": [-2]}]}"#;
        assert_eq!(
            run_text(split, &cfg).unwrap_err().exit(),
            Exit::PreconditionError
        );
        let abs = r#"{"base": {"kind": "abstract", "assumptions": []}, "algebras": ["a,b"],
                      "steps": [{"kind": "pushing", "classes": [-2]}]}"#;
        assert_eq!(
            run_text(abs, &cfg).unwrap_err().exit(),
            Exit::PreconditionError
        );
    }

    #[test]
    fn base_window_scan() {
        let s = Script::parse(WORKED).unwrap();
        let d = base_distinguishing(&s, 10).unwrap();
        assert_eq!(
            d,
            [
                SquareClass::from_i64(-2),
                SquareClass::from_i64(-5),
                SquareClass::from_i64(-7)
            ]
        );
    }
}
