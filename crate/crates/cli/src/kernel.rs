//! `symbol`, `form` and `quat` commands.

use num_bigint::BigInt;
use serde_json::json;

use quatgenus_core::arith::{Rational, SquareClass};
use quatgenus_core::forms::{
    invariants, isotropic_vector, isotropy, witt_decompose, DiagonalForm, FormInvariants, Isotropy,
};
use quatgenus_core::local::{hilbert_symbol, Place};
use quatgenus_core::quaternion::{
    common_subfield_witness, distinguishing_witness, genus_report, is_isomorphic, is_linked,
    PairVerdict, QuaternionAlgebra,
};

use crate::{join, to_json, yes_no, CliError, Exit, Outcome, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormCommand {
    Analyze,
    Isotropic,
    Witt,
}

/// Parses a comma-separated list of nonzero integers into a form.
pub fn parse_form(text: &str) -> Result<DiagonalForm, CliError> {
    let t = text.trim();
    let t = t
        .strip_prefix('<')
        .and_then(|t| t.strip_suffix('>'))
        .or_else(|| t.strip_prefix('[').and_then(|t| t.strip_suffix(']')))
        .unwrap_or(t);
    let mut coefficients = Vec::new();
    for item in t.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let n: BigInt = item
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse coefficient {item:?}")))?;
        if n == BigInt::from(0) {
            return Err(CliError::Input(format!("zero coefficient in {text:?}")));
        }
        coefficients.push(SquareClass::of_integer(n)?);
    }
    Ok(DiagonalForm::new(coefficients)?)
}

pub fn parse_algebra(text: &str) -> Result<QuaternionAlgebra, CliError> {
    Ok(text.parse::<QuaternionAlgebra>()?)
}

pub fn parse_class(text: &str) -> Result<SquareClass, CliError> {
    let n: BigInt = text
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("cannot parse square class {text:?}")))?;
    Ok(SquareClass::of_integer(n)?)
}

pub fn symbol(a: &str, b: &str, place: &str) -> Result<Outcome, CliError> {
    let ra: Rational = a.parse()?;
    let rb: Rational = b.parse()?;
    let v: Place = place.parse()?;
    let s = hilbert_symbol(&ra, &rb, &v)?;
    Ok(Outcome::new(
        Exit::Success,
        vec![s.to_string()],
        json!({ "a": ra.to_string(), "b": rb.to_string(), "place": v, "symbol": s }),
    ))
}

fn isotropy_line(iso: &Isotropy) -> String {
    match iso {
        Isotropy::Isotropic => "isotropic".to_string(),
        Isotropy::Anisotropic { failing_place } => {
            format!("anisotropic (fails at {failing_place})")
        }
    }
}

fn invariant_lines(inv: &FormInvariants) -> Vec<String> {
    let hasse: Vec<String> = inv.hasse.iter().map(|(v, h)| format!("{v}:{h}")).collect();
    vec![
        format!("dimension {}", inv.dimension),
        format!("determinant {}", inv.determinant),
        format!("discriminant {}", inv.signed_discriminant),
        format!("signature ({},{})", inv.signature.0, inv.signature.1),
        format!("hasse {}", hasse.join(" ")),
    ]
}

fn vector_text(x: &[BigInt]) -> String {
    format!("[{}]", join(x, ","))
}

pub fn form(cmd: FormCommand, coefficients: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let q = parse_form(coefficients)?;
    match cmd {
        FormCommand::Analyze => {
            let inv = invariants(&q);
            let iso = isotropy(&q);
            let mut lines = vec![format!("form {q}")];
            lines.extend(invariant_lines(&inv));
            lines.push(isotropy_line(&iso));
            let json = json!({ "form": q, "invariants": inv, "isotropy": iso });
            Ok(Outcome::new(Exit::Success, lines, json))
        }
        FormCommand::Isotropic => {
            let iso = isotropy(&q);
            let mut lines = vec![isotropy_line(&iso)];
            let vector = if iso.is_isotropic() {
                isotropic_vector(&q, cfg.height_bound)
            } else {
                None
            };
            if iso.is_isotropic() {
                lines.push(match &vector {
                    Some(x) => format!("vector {}", vector_text(x)),
                    None => format!("vector none with entries up to {}", cfg.height_bound),
                });
            }
            let json = json!({ "form": q, "isotropy": iso, "vector": vector });
            Ok(Outcome::new(Exit::Success, lines, json))
        }
        FormCommand::Witt => {
            let w = witt_decompose(&q)?;
            let part = match w.anisotropic_part.as_form() {
                Some(f) => f.to_string(),
                None => "0".to_string(),
            };
            let mut lines = vec![
                format!("witt index {}", w.witt_index),
                format!("anisotropic part {part}"),
            ];
            for x in &w.explicit_witnesses {
                lines.push(format!("witness {}", vector_text(x)));
            }
            lines.push(format!("synthesized {}", yes_no(w.synthesized)));
            let json = json!({ "form": q, "decomposition": w });
            Ok(Outcome::new(Exit::Success, lines, json))
        }
    }
}

fn algebra_json(d: &QuaternionAlgebra) -> serde_json::Value {
    json!({
        "algebra": d.to_string(),
        "ramification": d.ramification(),
        "division": d.is_division(),
    })
}

fn algebra_line(label: &str, d: &QuaternionAlgebra) -> String {
    format!(
        "{label} {d} ramified {} division {}",
        d.ramification(),
        yes_no(d.is_division())
    )
}

pub fn quat_compare(first: &str, second: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d1 = parse_algebra(first)?;
    let d2 = parse_algebra(second)?;
    let mut lines = vec![algebra_line("first", &d1), algebra_line("second", &d2)];
    let linked = is_linked(&d1, &d2)?;
    let common = common_subfield_witness(&d1, &d2, cfg.height_bound)?;
    let isomorphic = is_isomorphic(&d1, &d2);
    lines.push(format!("isomorphic {}", yes_no(isomorphic)));
    lines.push(format!("linked {}", yes_no(linked)));
    lines.push(match &common {
        Some(c) => format!("common subfield {c}"),
        None => format!("common subfield none up to {}", cfg.height_bound),
    });
    let mut exit = if linked && common.is_none() {
        Exit::Incomplete
    } else {
        Exit::Success
    };
    let witness = if isomorphic {
        None
    } else {
        let w = distinguishing_witness(&d1, &d2, cfg.height_bound)?;
        match &w {
            Some(c) => {
                let side = if d1.contains_subfield(c) {
                    "first"
                } else {
                    "second"
                };
                lines.push(format!("witness {c} (embeds in {side} only)"));
            }
            None => {
                lines.push(format!("witness none up to {}", cfg.height_bound));
                exit = Exit::Incomplete;
            }
        }
        w
    };
    let json = json!({
        "first": algebra_json(&d1),
        "second": algebra_json(&d2),
        "isomorphic": isomorphic,
        "linked": linked,
        "common_subfield": common,
        "witness": witness.as_ref().map(|c| json!({
            "class": c,
            "embeds_in_first": d1.contains_subfield(c),
            "embeds_in_second": d2.contains_subfield(c),
        })),
    });
    Ok(Outcome::new(exit, lines, json))
}

pub fn quat_embeds(algebra: &str, class: &str) -> Result<Outcome, CliError> {
    let d = parse_algebra(algebra)?;
    let c = parse_class(class)?;
    let embeds = d.contains_subfield(&c);
    Ok(Outcome::new(
        Exit::Success,
        vec![embeds.to_string()],
        json!({ "algebra": d.to_string(), "class": c, "embeds": embeds }),
    ))
}

pub fn quat_witness(first: &str, second: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d1 = parse_algebra(first)?;
    let d2 = parse_algebra(second)?;
    match distinguishing_witness(&d1, &d2, cfg.height_bound)? {
        Some(c) => {
            let in_first = d1.contains_subfield(&c);
            let side = if in_first { "first" } else { "second" };
            Ok(Outcome::new(
                Exit::Success,
                vec![c.to_string(), format!("embeds in {side} only")],
                json!({ "class": c, "embeds_in_first": in_first, "embeds_in_second": !in_first }),
            ))
        }
        None => Ok(Outcome::new(
            Exit::Incomplete,
            vec![format!("none up to {}", cfg.height_bound)],
            json!({ "class": null, "height_bound": cfg.height_bound }),
        )),
    }
}

pub fn quat_genus(algebras: &[String], cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(flag) = algebras.iter().find(|s| s.starts_with("--")) {
        return Err(CliError::Input(format!(
            "unexpected {flag:?} in the algebra list; options go before the algebras"
        )));
    }
    let family = algebras
        .iter()
        .map(|s| parse_algebra(s))
        .collect::<Result<Vec<_>, _>>()?;
    if family.is_empty() {
        return Err(CliError::Input("genus needs at least one algebra".into()));
    }
    let report = genus_report(&family, cfg.height_bound)?;
    let mut lines = Vec::new();
    for (i, d) in family.iter().enumerate() {
        lines.push(format!(
            "algebra {i} {d} ramified {}",
            report.ramification[i]
        ));
    }
    for p in &report.pairs {
        let verdict = match &p.verdict {
            PairVerdict::Isomorphic => "isomorphic".to_string(),
            PairVerdict::Distinguished {
                witness,
                embeds_in_first,
            } => {
                let only = if *embeds_in_first { p.first } else { p.second };
                format!("witness {witness} embeds in {only} only")
            }
            PairVerdict::Inconclusive => format!("inconclusive up to {}", cfg.height_bound),
        };
        lines.push(format!("pair {} {} {verdict}", p.first, p.second));
    }
    let classes: Vec<String> = report
        .classes
        .iter()
        .map(|c| format!("{{{}}}", join(c, ",")))
        .collect();
    lines.push(format!("classes {}", classes.join(" ")));
    lines.push(format!("resolved {}", yes_no(report.is_resolved())));
    let exit = if report.is_resolved() {
        Exit::Success
    } else {
        Exit::Incomplete
    };
    Ok(Outcome::new(exit, lines, to_json(&report)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(o: Result<Outcome, CliError>) -> Vec<String> {
        o.unwrap().lines
    }

    #[test]
    fn symbols() {
        assert_eq!(text(symbol("-1", "-1", "inf")), ["-1"]);
        assert_eq!(text(symbol("-1", "-1", "2")), ["-1"]);
        assert_eq!(text(symbol("1", "7", "3")), ["1"]);
        assert_eq!(text(symbol("2/3", "-1", "3")), ["-1"]);
        assert_eq!(symbol("0", "1", "3").unwrap_err().exit(), Exit::InputError);
        assert_eq!(symbol("1", "1", "4").unwrap_err().exit(), Exit::InputError);
        assert_eq!(symbol("1", "1", "x").unwrap_err().exit(), Exit::InputError);
    }

    #[test]
    fn forms() {
        let cfg = RunConfig::default();
        assert_eq!(
            text(form(FormCommand::Isotropic, "1,1,1,-7", &cfg)),
            ["anisotropic (fails at 2)"]
        );
        assert_eq!(
            text(form(FormCommand::Isotropic, "1,-1", &cfg)),
            ["isotropic", "vector [1,-1]"]
        );
        let w = text(form(FormCommand::Witt, "1,1,1,1,-1,-1,-3,-3", &cfg));
        assert_eq!(&w[..2], ["witt index 2", "anisotropic part <1,1,-3,-3>"]);
        let a = text(form(FormCommand::Analyze, "-2,1,3,3", &cfg));
        assert!(a.contains(&"discriminant -2".to_string()));
        assert!(a.contains(&"signature (3,1)".to_string()));
        assert_eq!(
            form(FormCommand::Analyze, "1,0,2", &cfg)
                .unwrap_err()
                .exit(),
            Exit::InputError
        );
        assert_eq!(
            form(FormCommand::Analyze, "", &cfg).unwrap_err().exit(),
            Exit::InputError
        );
        assert_eq!(
            form(FormCommand::Analyze, "1,x", &cfg).unwrap_err().exit(),
            Exit::InputError
        );
    }

    #[test]
    fn quaternions() {
        let cfg = RunConfig::default();
        let c = text(quat_compare("-1,-1", "-1,-3", &cfg));
        assert!(c.contains(&"isomorphic no".to_string()));
        assert!(c.contains(&"linked yes".to_string()));
        assert!(c.contains(&"witness -2 (embeds in first only)".to_string()));
        assert_eq!(text(quat_embeds("-1,-1", "-2")), ["true"]);
        assert_eq!(text(quat_embeds("-1,-1", "-7")), ["false"]);
        assert_eq!(text(quat_witness("-1,-1", "-1,-3", &cfg))[0], "-2");
        assert_eq!(
            quat_witness("-1,-1", "-2,-1", &cfg).unwrap_err().exit(),
            Exit::PreconditionError
        );
        assert_eq!(
            quat_witness("1,5", "-1,-1", &cfg).unwrap_err().exit(),
            Exit::PreconditionError
        );
        assert_eq!(
            quat_compare("1,5", "-1,-1", &cfg).unwrap_err().exit(),
            Exit::PreconditionError
        );
        assert_eq!(parse_algebra("-1").unwrap_err().exit(), Exit::InputError);

        let g = quat_genus(&["-1,-1".into(), "-1,-3".into(), "-1,-7".into()], &cfg).unwrap();
        assert_eq!(g.exit, Exit::Success);
        assert_eq!(g.lines.iter().filter(|l| l.starts_with("pair ")).count(), 3);
        assert!(g.lines.contains(&"resolved yes".to_string()));
    }
}
