use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use super::{BsArg, DpsArg, Header, Instruction, MeasureKind, Prep, Program, Step, Sweep, Value};
use crate::config::parameter_names;
use crate::interferometry::GateMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownInstruction,
    BadArgument,
    DuplicateSweep,
    UnresolvedPlaceholder,
    UnusedPlaceholder,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::UnknownInstruction => "unknown instruction",
            ParseErrorKind::BadArgument => "bad argument",
            ParseErrorKind::DuplicateSweep => "duplicate sweep",
            ParseErrorKind::UnresolvedPlaceholder => "unresolved placeholder",
            ParseErrorKind::UnusedPlaceholder => "unused placeholder",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let body = match line.find('#') {
        Some(p) => &line[..p],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in body.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { text: &body[s..i], column: body[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &body[s..], column: body[..s].chars().count() + 1 });
    }
    out
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn err(&self, kind: ParseErrorKind, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { kind, line: self.line, column, message: message.into() }
    }

    fn bad(&self, tok: &Tok, message: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::BadArgument, tok.column, message)
    }
}

/// Number with an optional `pi` factor: `1.5`, `pi`, `-pi`, `0.25pi`.
fn parse_real(text: &str) -> Option<f64> {
    let v = if let Some(coef) = text.strip_suffix("pi") {
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.strip_suffix('*').unwrap_or(c).parse::<f64>().ok()?,
        };
        c * PI
    } else {
        text.parse::<f64>().ok()?
    };
    v.is_finite().then_some(v)
}

fn parse_value(ctx: &Ctx, tok: &Tok, text: &str, placeholders: &mut Vec<(String, usize)>) -> Result<Value, ParseError> {
    if let Some(name) = text.strip_prefix('$') {
        if !valid_ident(name) {
            return Err(ctx.bad(tok, format!("`{text}` is not a valid placeholder")));
        }
        placeholders.push((name.to_string(), tok.column));
        return Ok(Value::Placeholder(name.to_string()));
    }
    parse_real(text).map(Value::Num).ok_or_else(|| ctx.bad(tok, format!("`{text}` is not a number")))
}

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_usize(ctx: &Ctx, tok: &Tok) -> Result<usize, ParseError> {
    tok.text.parse().map_err(|_| ctx.bad(tok, format!("`{}` is not a non-negative integer", tok.text)))
}

fn parse_cavity(ctx: &Ctx, tok: &Tok, text: &str) -> Result<usize, ParseError> {
    match text {
        "a" | "A" | "alice" => Ok(0),
        "b" | "B" | "bob" => Ok(1),
        _ => Err(ctx.bad(tok, format!("`{text}` is not a cavity (expected a or b)"))),
    }
}

/// `key=value` arguments with duplicate and unknown-key checks.
struct Args<'a> {
    items: Vec<(&'a str, &'a str, Tok<'a>)>,
}

impl<'a> Args<'a> {
    fn new(ctx: &Ctx, toks: &[Tok<'a>], allowed: &[&str]) -> Result<Self, ParseError> {
        let mut items: Vec<(&str, &str, Tok)> = Vec::new();
        for tok in toks {
            let (k, v) = tok
                .text
                .split_once('=')
                .ok_or_else(|| ctx.bad(tok, format!("expected key=value, found `{}`", tok.text)))?;
            if !allowed.contains(&k) {
                return Err(ctx.bad(tok, format!("unknown argument `{k}` (expected one of {})", allowed.join(", "))));
            }
            if items.iter().any(|(key, _, _)| *key == k) {
                return Err(ctx.bad(tok, format!("argument `{k}` given twice")));
            }
            if v.is_empty() {
                return Err(ctx.bad(tok, format!("argument `{k}` has no value")));
            }
            items.push((k, v, *tok));
        }
        Ok(Args { items })
    }

    fn get(&self, key: &str) -> Option<(&'a str, Tok<'a>)> {
        self.items.iter().find(|(k, _, _)| *k == key).map(|(_, v, t)| (*v, *t))
    }
}

fn value_arg(ctx: &Ctx, args: &Args, key: &str, ph: &mut Vec<(String, usize)>) -> Result<Option<Value>, ParseError> {
    match args.get(key) {
        Some((v, tok)) => parse_value(ctx, &tok, v, ph).map(Some),
        None => Ok(None),
    }
}

fn mode_arg(ctx: &Ctx, args: &Args) -> Result<Option<GateMode>, ParseError> {
    match args.get("mode") {
        Some((v, tok)) => v.parse().map(Some).map_err(|e: String| ctx.bad(&tok, e)),
        None => Ok(None),
    }
}

fn non_negative(ctx: &Ctx, args: &Args, key: &str, v: &Value) -> Result<(), ParseError> {
    if let Value::Num(x) = v {
        if *x < 0.0 {
            let tok = args.get(key).map(|a| a.1).expect("argument present");
            return Err(ctx.bad(&tok, format!("`{key}` must be non-negative")));
        }
    }
    Ok(())
}

fn parse_on_off(ctx: &Ctx, tok: &Tok) -> Result<bool, ParseError> {
    match tok.text {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        other => Err(ctx.bad(tok, format!("expected on or off, found `{other}`"))),
    }
}

fn exactly<'a>(ctx: &Ctx, head: &Tok, rest: &'a [Tok<'a>], n: usize, what: &str) -> Result<&'a [Tok<'a>], ParseError> {
    if rest.len() != n {
        let col = rest.get(n).map_or(head.column, |t| t.column);
        return Err(ctx.bad(&Tok { text: head.text, column: col }, format!("`{}` expects {what}", head.text)));
    }
    Ok(rest)
}

fn set_once<T>(ctx: &Ctx, tok: &Tok, slot: &mut Option<T>, value: T) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ctx.bad(tok, format!("`{}` given twice", tok.text)));
    }
    *slot = Some(value);
    Ok(())
}

pub fn parse(text: &str) -> Result<Program, ParseError> {
    let mut header = Header::default();
    let mut steps = Vec::new();
    let mut sweep: Option<(Sweep, usize, usize)> = None;
    let mut placeholders: Vec<(String, usize, usize)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ctx = Ctx { line: i + 1 };
        let toks = tokenize(raw);
        let Some((head, rest)) = toks.split_first() else { continue };
        let mut ph: Vec<(String, usize)> = Vec::new();
        let instruction = match head.text {
            "dims" => {
                let r = exactly(&ctx, head, rest, 2, "two dimensions")?;
                let (a, b) = (parse_usize(&ctx, &r[0])?, parse_usize(&ctx, &r[1])?);
                for (d, tok) in [(a, &r[0]), (b, &r[1])] {
                    if d < 2 {
                        return Err(ctx.bad(tok, "each dimension must be at least 2"));
                    }
                }
                set_once(&ctx, head, &mut header.dims, (a, b))?;
                None
            }
            "config" => {
                if rest.is_empty() {
                    return Err(ctx.bad(head, "`config` expects a path"));
                }
                let start = raw.char_indices().nth(rest[0].column - 1).map_or(0, |c| c.0);
                let body = raw[start..].split('#').next().unwrap_or("").trim().to_string();
                set_once(&ctx, head, &mut header.config, body)?;
                None
            }
            "mode" => {
                let r = exactly(&ctx, head, rest, 1, "ideal or physical")?;
                let m: GateMode = r[0].text.parse().map_err(|e: String| ctx.bad(&r[0], e))?;
                set_once(&ctx, head, &mut header.mode, m)?;
                None
            }
            "spam" | "postselect" => {
                let r = exactly(&ctx, head, rest, 1, "on or off")?;
                let v = parse_on_off(&ctx, &r[0])?;
                let slot = if head.text == "spam" { &mut header.spam } else { &mut header.postselect };
                set_once(&ctx, head, slot, v)?;
                None
            }
            "sweep" => {
                if let Some((_, line, _)) = &sweep {
                    return Err(ctx.err(
                        ParseErrorKind::DuplicateSweep,
                        head.column,
                        format!("a sweep is already declared on line {line}"),
                    ));
                }
                let r = exactly(&ctx, head, rest, 7, "`NAME from X to Y steps N`")?;
                if !valid_ident(r[0].text) {
                    return Err(ctx.bad(&r[0], format!("`{}` is not a valid name", r[0].text)));
                }
                for (tok, kw) in [(&r[1], "from"), (&r[3], "to"), (&r[5], "steps")] {
                    if tok.text != kw {
                        return Err(ctx.bad(tok, format!("expected `{kw}`, found `{}`", tok.text)));
                    }
                }
                let start = parse_real(r[2].text).ok_or_else(|| ctx.bad(&r[2], format!("`{}` is not a number", r[2].text)))?;
                let stop = parse_real(r[4].text).ok_or_else(|| ctx.bad(&r[4], format!("`{}` is not a number", r[4].text)))?;
                let n = parse_usize(&ctx, &r[6])?;
                sweep = Some((Sweep { name: r[0].text.to_string(), start, stop, steps: n }, ctx.line, r[0].column));
                None
            }
            "prep" | "prepare" => {
                let kind = rest.first().ok_or_else(|| ctx.bad(head, "`prep` expects fock, coherent or state21"))?;
                let prep = match kind.text {
                    "fock" => {
                        let r = exactly(&ctx, head, &rest[1..], 2, "`fock N M`")?;
                        Prep::Fock { n: parse_usize(&ctx, &r[0])?, m: parse_usize(&ctx, &r[1])? }
                    }
                    "coherent" => {
                        let pos: Vec<&Tok> = rest[1..].iter().take_while(|t| !t.text.contains('=')).collect();
                        if pos.len() != 2 {
                            return Err(ctx.bad(kind, "`coherent` expects two amplitudes"));
                        }
                        let ra = parse_value(&ctx, pos[0], pos[0].text, &mut ph)?;
                        let rb = parse_value(&ctx, pos[1], pos[1].text, &mut ph)?;
                        let args = Args::new(&ctx, &rest[3..], &["phase_a", "phase_b"])?;
                        let phase_a = value_arg(&ctx, &args, "phase_a", &mut ph)?.unwrap_or(Value::Num(0.0));
                        let phase_b = value_arg(&ctx, &args, "phase_b", &mut ph)?.unwrap_or(Value::Num(0.0));
                        for (v, t) in [(&ra, pos[0]), (&rb, pos[1])] {
                            if matches!(v, Value::Num(x) if *x < 0.0) {
                                return Err(ctx.bad(t, "amplitudes must be non-negative"));
                            }
                        }
                        Prep::Coherent { ra, rb, phase_a, phase_b }
                    }
                    "state21" => {
                        exactly(&ctx, head, &rest[1..], 0, "no arguments after state21")?;
                        Prep::State21
                    }
                    other => return Err(ctx.bad(kind, format!("unknown preparation `{other}`"))),
                };
                Some(Instruction::Prepare(prep))
            }
            "bs" => {
                let args = Args::new(&ctx, rest, &["theta", "t", "phi", "mode"])?;
                let theta = value_arg(&ctx, &args, "theta", &mut ph)?;
                let t = value_arg(&ctx, &args, "t", &mut ph)?;
                let arg = match (theta, t) {
                    (Some(v), None) => {
                        non_negative(&ctx, &args, "theta", &v)?;
                        BsArg::Theta(v)
                    }
                    (None, Some(v)) => {
                        non_negative(&ctx, &args, "t", &v)?;
                        BsArg::Time(v)
                    }
                    (Some(_), Some(_)) => {
                        let tok = args.get("t").expect("present").1;
                        return Err(ctx.bad(&tok, "give either theta= or t=, not both"));
                    }
                    (None, None) => return Err(ctx.bad(head, "`bs` needs theta= or t=")),
                };
                let phi = value_arg(&ctx, &args, "phi", &mut ph)?.unwrap_or(Value::Num(0.0));
                Some(Instruction::Bs { arg, phi, mode: mode_arg(&ctx, &args)? })
            }
            "dps" => {
                let args = Args::new(&ctx, rest, &["phi", "branch", "t", "mode"])?;
                let mut given = Vec::new();
                for (key, make) in [
                    ("phi", DpsArg::Phi as fn(Value) -> DpsArg),
                    ("branch", DpsArg::Branch),
                    ("t", DpsArg::Time),
                ] {
                    if let Some(v) = value_arg(&ctx, &args, key, &mut ph)? {
                        if key == "t" {
                            non_negative(&ctx, &args, key, &v)?;
                        }
                        given.push((make(v), key));
                    }
                }
                if given.len() != 1 {
                    let tok = given.get(1).and_then(|g| args.get(g.1)).map_or(*head, |a| a.1);
                    return Err(ctx.bad(&tok, "`dps` needs exactly one of phi=, branch=, t="));
                }
                Some(Instruction::Dps { arg: given.remove(0).0, mode: mode_arg(&ctx, &args)? })
            }
            "displace" => {
                let args = Args::new(&ctx, rest, &["cavity", "alpha", "phase"])?;
                let cavity = match args.get("cavity") {
                    Some((v, tok)) => parse_cavity(&ctx, &tok, v)?,
                    None => return Err(ctx.bad(head, "`displace` needs cavity=a|b")),
                };
                let alpha = value_arg(&ctx, &args, "alpha", &mut ph)?.ok_or_else(|| ctx.bad(head, "`displace` needs alpha="))?;
                let phase = value_arg(&ctx, &args, "phase", &mut ph)?.unwrap_or(Value::Num(0.0));
                Some(Instruction::Displace { cavity, alpha, phase })
            }
            "wait" => {
                let args = Args::new(&ctx, rest, &["t"])?;
                let t = value_arg(&ctx, &args, "t", &mut ph)?.ok_or_else(|| ctx.bad(head, "`wait` needs t="))?;
                non_negative(&ctx, &args, "t", &t)?;
                Some(Instruction::Wait { t })
            }
            "measure" => {
                let kind = rest.first().ok_or_else(|| ctx.bad(head, "`measure` expects joint, parity or overlap"))?;
                let m = match kind.text {
                    "joint" => {
                        exactly(&ctx, head, &rest[1..], 0, "no arguments after joint")?;
                        MeasureKind::Joint
                    }
                    "parity" => {
                        let r = exactly(&ctx, head, &rest[1..], 1, "`parity a|b`")?;
                        MeasureKind::Parity(parse_cavity(&ctx, &r[0], r[0].text)?)
                    }
                    "overlap" => {
                        exactly(&ctx, head, &rest[1..], 0, "no arguments after overlap")?;
                        MeasureKind::Overlap
                    }
                    other => return Err(ctx.bad(kind, format!("unknown measurement `{other}`"))),
                };
                Some(Instruction::Measure(m))
            }
            "set" => {
                let r = exactly(&ctx, head, rest, 1, "one KEY=VALUE")?;
                let (k, v) = r[0].text.split_once('=').ok_or_else(|| ctx.bad(&r[0], "expected KEY=VALUE"))?;
                if !parameter_names().any(|n| n == k) {
                    return Err(ctx.bad(&r[0], format!("unknown device parameter `{k}`")));
                }
                let value = parse_value(&ctx, &r[0], v, &mut ph)?;
                Some(Instruction::Set { key: k.to_string(), value })
            }
            other => {
                return Err(ctx.err(ParseErrorKind::UnknownInstruction, head.column, format!("`{other}`")));
            }
        };
        placeholders.extend(ph.into_iter().map(|(n, c)| (n, ctx.line, c)));
        if let Some(instruction) = instruction {
            steps.push(Step { instruction, line: ctx.line, column: head.column });
        }
    }

    let mut used: HashMap<&str, usize> = HashMap::new();
    for (name, line, column) in &placeholders {
        match &sweep {
            Some((s, _, _)) if s.name == *name => *used.entry(name).or_default() += 1,
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnresolvedPlaceholder,
                    line: *line,
                    column: *column,
                    message: format!("`${name}` is not bound by a sweep"),
                })
            }
        }
    }
    if let Some((s, line, column)) = &sweep {
        if !used.contains_key(s.name.as_str()) {
            return Err(ParseError {
                kind: ParseErrorKind::UnusedPlaceholder,
                line: *line,
                column: *column,
                message: format!("sweep variable `{}` is never used", s.name),
            });
        }
    }
    Ok(Program { header, steps, sweep: sweep.map(|s| s.0) })
}
