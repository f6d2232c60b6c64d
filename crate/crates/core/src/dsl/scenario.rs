use std::fmt::Write;

use super::lexer::{lex_line, Tok};
use super::{lines, Cursor, ErrorKind, SourceError};
use crate::expr::Value;
use crate::interp::{Arg, Scenario, Stimulus};
use crate::model::Statechart;

/// Parses a scenario script and checks every event against `sc`.
///
/// ```text
/// scenario exact_money
/// powerOn
/// selectTicket n=2
/// ```
pub fn parse_scenarios(text: &str, sc: &Statechart) -> Result<Vec<Scenario>, SourceError> {
    let mut out: Vec<Scenario> = Vec::new();
    for (line, raw) in lines(text) {
        let toks = lex_line(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(&toks, line, raw.chars().count());
        if matches!(&toks[0].tok, Tok::Ident(w) if w == "scenario") {
            cur.keyword("scenario")?;
            let (name, _) = cur.ident("a scenario name")?;
            cur.finish()?;
            out.push(Scenario {
                name,
                events: Vec::new(),
            });
            continue;
        }
        let Some(current) = out.last_mut() else {
            return Err(cur.error("expected `scenario <name>` before the first event"));
        };
        let (event, ecol) = cur.ident("an event name")?;
        let decl = sc.event(&event).ok_or_else(|| {
            SourceError::new(
                ErrorKind::Resolve,
                line,
                ecol,
                format!("unknown event `{event}`"),
            )
        })?;
        let mut given: Vec<(Arg, usize)> = Vec::new();
        while !cur.at_end() {
            let (name, col) = cur.ident("a parameter name")?;
            cur.expect(Tok::Eq)?;
            let negative = matches!(cur.peek().map(|t| &t.tok), Some(Tok::Minus));
            if negative {
                cur.expect(Tok::Minus)?;
            }
            let value = match cur.peek().map(|t| t.tok.clone()) {
                Some(Tok::Int(v)) => Value::Int(if negative { -v } else { v }),
                Some(Tok::Ident(w)) if !negative && w == "true" => Value::Bool(true),
                Some(Tok::Ident(w)) if !negative && w == "false" => Value::Bool(false),
                _ => return Err(cur.error("expected an integer or boolean value")),
            };
            cur.skip();
            if given.iter().any(|(a, _)| a.name == name) {
                return Err(SourceError::new(
                    ErrorKind::Resolve,
                    line,
                    col,
                    format!("`{name}` given twice"),
                ));
            }
            given.push((Arg { name, value }, col));
        }
        for (arg, col) in &given {
            match decl.params.iter().find(|p| p.name == arg.name) {
                None => {
                    return Err(SourceError::new(
                        ErrorKind::Resolve,
                        line,
                        *col,
                        format!("`{event}` has no parameter `{}`", arg.name),
                    ))
                }
                Some(p) if p.ty != arg.value.ty() => {
                    return Err(SourceError::new(
                        ErrorKind::Type,
                        line,
                        *col,
                        format!("`{}` must be {}", p.name, p.ty),
                    ))
                }
                _ => {}
            }
        }
        let mut args = Vec::new();
        for p in &decl.params {
            match given.iter().find(|(a, _)| a.name == p.name) {
                Some((a, _)) => args.push(a.clone()),
                None => {
                    return Err(SourceError::new(
                        ErrorKind::Resolve,
                        line,
                        ecol,
                        format!("`{event}` needs parameter `{}`", p.name),
                    ))
                }
            }
        }
        current.events.push(Stimulus { event, args });
    }
    Ok(out)
}

/// Script text for `scenarios`; parses back to the same values.
pub fn render_scenarios(scenarios: &[Scenario]) -> String {
    let mut out = String::new();
    for (i, s) in scenarios.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "scenario {}", s.name).unwrap();
        for ev in &s.events {
            out.push_str(&ev.event);
            for a in &ev.args {
                write!(out, " {}={}", a.name, a.value).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    fn rtvm() -> Statechart {
        parse_model(include_str!("../../../../fixtures/rtvm.scm")).unwrap()
    }

    #[test]
    fn parses_fixture_scenarios() {
        let sc = rtvm();
        let scns = parse_scenarios(include_str!("../../../../fixtures/rtvm.scn"), &sc).unwrap();
        let names: Vec<&str> = scns.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["less_money", "exact_money", "more_money"]);
        assert_eq!(scns[2].events.len(), 5);
        assert_eq!(scns[2].events[2].args[0].value, Value::Int(500));
        assert_eq!(
            parse_scenarios(&render_scenarios(&scns), &sc).unwrap(),
            scns
        );
    }

    #[test]
    fn scenario_errors() {
        let sc = rtvm();
        let err = parse_scenarios("powerOn\n", &sc).unwrap_err();
        assert_eq!((err.kind, err.line), (ErrorKind::Parse, 1));
        let err = parse_scenarios("scenario s\nfly\n", &sc).unwrap_err();
        assert_eq!((err.kind, err.line, err.column), (ErrorKind::Resolve, 2, 1));
        let err = parse_scenarios("scenario s\nselectTicket\n", &sc).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Resolve);
        let err = parse_scenarios("scenario s\nselectTicket n=true\n", &sc).unwrap_err();
        assert_eq!((err.kind, err.column), (ErrorKind::Type, 14));
        let err = parse_scenarios("scenario s\nselectTicket n=1 n=2\n", &sc).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Resolve);
        let err = parse_scenarios("scenario s\nselectTicket m=1\n", &sc).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Resolve);
        let ok = parse_scenarios("scenario s\nselectTicket n=-3 # comment\n", &sc).unwrap();
        assert_eq!(ok[0].events[0].args[0].value, Value::Int(-3));
    }
}
