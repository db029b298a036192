//! Line-oriented parser. Total: any input yields an AST or a [`ParseError`].

use std::collections::HashMap;
use std::fmt;

use cvfaraday::{FrameDirection, Quadrature};

use crate::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    UnknownKeyword,
    Arity,
    BadValue,
    UseBeforeDeclaration,
    MeasuredBeamReused,
    Redeclared,
    KindMismatch,
}

impl ParseErrorKind {
    fn describe(self) -> &'static str {
        match self {
            Self::Lexical => "lexical error",
            Self::UnknownKeyword => "unknown keyword",
            Self::Arity => "wrong number of arguments",
            Self::BadValue => "invalid value",
            Self::UseBeforeDeclaration => "use before declaration",
            Self::MeasuredBeamReused => "beam already measured",
            Self::Redeclared => "already declared",
            Self::KindMismatch => "wrong kind of mode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}: {} (at `{}`)",
            self.line,
            self.column,
            self.kind.describe(),
            self.message,
            self.token
        )
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    span: SourceSpan,
}

impl<'a> Token<'a> {
    fn err(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line: self.span.line,
            column: self.span.column,
            token: self.text.chars().take(64).collect(),
            message: message.into(),
        }
    }

    /// Sub-token starting `skip` bytes in; `skip` must be a char boundary.
    fn tail(&self, skip: usize) -> Token<'a> {
        let column = self.span.column + self.text[..skip].chars().count();
        Token {
            text: &self.text[skip..],
            span: SourceSpan::new(self.span.line, column),
        }
    }

    fn head(&self, len: usize) -> Token<'a> {
        Token {
            text: &self.text[..len],
            span: self.span,
        }
    }
}

fn tokenize(line: &str, number: usize) -> PResult<Vec<Token<'_>>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (i, c)) in content.char_indices().enumerate() {
        let column = col + 1;
        if c == ' ' || c == '\t' || c == '\r' {
            if let Some((s, sc)) = start.take() {
                tokens.push(Token {
                    text: &content[s..i],
                    span: SourceSpan::new(number, sc),
                });
            }
        } else if c.is_ascii_graphic() {
            if start.is_none() {
                start = Some((i, column));
            }
        } else {
            let bad = Token {
                text: &content[i..i + c.len_utf8()],
                span: SourceSpan::new(number, column),
            };
            return Err(bad.err(ParseErrorKind::Lexical, format!("unexpected character {c:?}")));
        }
    }
    if let Some((s, sc)) = start {
        tokens.push(Token {
            text: &content[s..],
            span: SourceSpan::new(number, sc),
        });
    }
    Ok(tokens)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const KEYWORDS: [&str; 9] = [
    "param", "ensemble", "beam", "pass", "measure", "rotate", "report", "sweep", "as",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Ensemble,
    Beam,
}

#[derive(Debug, Default)]
struct Scope {
    modes: HashMap<String, (Kind, bool)>,
    params: HashMap<String, ()>,
}

struct Parser {
    scope: Scope,
}

fn literal(tok: Token<'_>) -> PResult<f64> {
    let ok = !tok.text.is_empty()
        && tok
            .text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
    let value = if ok { tok.text.parse::<f64>().ok() } else { None };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(tok.err(ParseErrorKind::BadValue, "expected a finite number")),
    }
}

fn exact_arity(head: Token<'_>, args: &[Token<'_>], n: usize) -> PResult<()> {
    if args.len() != n {
        return Err(head.err(
            ParseErrorKind::Arity,
            format!("`{}` takes {n} argument(s), got {}", head.text, args.len()),
        ));
    }
    Ok(())
}

fn key_value<'a>(tok: Token<'a>, key: &str) -> PResult<Token<'a>> {
    match tok.text.split_once('=') {
        Some((k, _)) if k == key => Ok(tok.tail(key.len() + 1)),
        _ => Err(tok.err(ParseErrorKind::BadValue, format!("expected `{key}=…`"))),
    }
}

fn index_list(tok: Token<'_>) -> PResult<Vec<usize>> {
    if tok.text.is_empty() {
        return Ok(Vec::new());
    }
    tok.text
        .split(',')
        .map(|s| match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(tok.err(ParseErrorKind::BadValue, "expected 1-based mode positions")),
        })
        .collect()
}

fn pi_fraction(tok: Token<'_>) -> PResult<Option<Angle>> {
    let Some(at) = tok.text.find("pi") else {
        return Ok(None);
    };
    let bad = || tok.err(ParseErrorKind::BadValue, "expected an angle like `pi/4` or `-3pi/4`");
    let (sign, digits) = match &tok.text[..at] {
        s if s.starts_with('-') => (-1i64, &s[1..]),
        s => (1, s),
    };
    let num: i64 = match digits {
        "" => 1,
        d if d.chars().all(|c| c.is_ascii_digit()) => d.parse().map_err(|_| bad())?,
        _ => return Err(bad()),
    };
    let den: u32 = match &tok.text[at + 2..] {
        "" => 1,
        rest => match rest.strip_prefix('/') {
            Some(d) if !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()) => d.parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        },
    };
    let num = i32::try_from(sign * num).map_err(|_| bad())?;
    if den == 0 {
        return Err(bad());
    }
    Ok(Some(Angle::PiFraction { num, den }))
}

impl Parser {
    fn ident(&self, tok: Token<'_>) -> PResult<Ident> {
        if !is_ident(tok.text) || KEYWORDS.contains(&tok.text) {
            return Err(tok.err(ParseErrorKind::BadValue, "expected an identifier"));
        }
        Ok(Spanned::new(tok.text.to_string(), tok.span))
    }

    fn num(&self, tok: Token<'_>) -> PResult<Spanned<Num>> {
        let node = match tok.text.strip_prefix('$') {
            Some(name) => {
                if !is_ident(name) {
                    return Err(tok.err(ParseErrorKind::BadValue, "expected `$name`"));
                }
                if !self.scope.params.contains_key(name) {
                    return Err(tok.err(ParseErrorKind::UseBeforeDeclaration, format!("parameter `{name}` is not declared")));
                }
                Num::Param(name.to_string())
            }
            None => Num::Lit(literal(tok)?),
        };
        Ok(Spanned::new(node, tok.span))
    }

    fn angle(&self, tok: Token<'_>) -> PResult<Spanned<Angle>> {
        let node = if let Some(a) = pi_fraction(tok)? {
            a
        } else if let Some(deg) = tok.text.strip_suffix("deg") {
            Angle::Degrees(literal(tok.head(deg.len()))?)
        } else {
            Angle::Radians(self.num(tok)?.node)
        };
        Ok(Spanned::new(node, tok.span))
    }

    /// A declared, still-present mode of the given kind.
    fn live_mode(&self, tok: Token<'_>, want: Option<Kind>) -> PResult<Ident> {
        let id = self.ident(tok)?;
        match self.scope.modes.get(tok.text) {
            None => Err(tok.err(ParseErrorKind::UseBeforeDeclaration, format!("`{}` is not declared", tok.text))),
            Some(&(kind, _)) if want.is_some_and(|w| w != kind) => Err(tok.err(
                ParseErrorKind::KindMismatch,
                format!(
                    "`{}` is {}",
                    tok.text,
                    if kind == Kind::Beam { "a beam" } else { "an ensemble" }
                ),
            )),
            Some(&(_, false)) => Err(tok.err(
                ParseErrorKind::MeasuredBeamReused,
                format!("`{}` was measured; declare it again for a fresh beam", tok.text),
            )),
            Some(_) => Ok(id),
        }
    }

    fn declare(&mut self, tok: Token<'_>, kind: Kind) -> PResult<Ident> {
        let id = self.ident(tok)?;
        if let Some(&(_, true)) = self.scope.modes.get(tok.text) {
            return Err(tok.err(ParseErrorKind::Redeclared, format!("`{}` is already declared", tok.text)));
        }
        self.scope.modes.insert(tok.text.to_string(), (kind, true));
        Ok(id)
    }

    fn statement(&mut self, head: Token<'_>, args: &[Token<'_>]) -> PResult<StatementKind> {
        match head.text {
            "param" => {
                exact_arity(head, args, 1)?;
                let Some((name, _)) = args[0].text.split_once('=') else {
                    return Err(args[0].err(ParseErrorKind::BadValue, "expected `name=value`"));
                };
                let name_tok = args[0].head(name.len());
                let name = self.ident(name_tok)?;
                let value_tok = args[0].tail(name.node.len() + 1);
                let value = Spanned::new(literal(value_tok)?, value_tok.span);
                if self.scope.params.insert(name.node.clone(), ()).is_some() {
                    return Err(name_tok.err(ParseErrorKind::Redeclared, "parameter already declared"));
                }
                Ok(StatementKind::Param { name, value })
            }
            "ensemble" => {
                exact_arity(head, args, 2)?;
                let n = self.num(key_value(args[1], "n")?)?;
                let id = self.declare(args[0], Kind::Ensemble)?;
                Ok(StatementKind::Ensemble { id, n })
            }
            "beam" => {
                exact_arity(head, args, 1)?;
                Ok(StatementKind::Beam {
                    id: self.declare(args[0], Kind::Beam)?,
                })
            }
            "pass" => {
                exact_arity(head, args, 4)?;
                Ok(StatementKind::Pass {
                    beam: self.live_mode(args[0], Some(Kind::Beam))?,
                    sample: self.live_mode(args[1], Some(Kind::Ensemble))?,
                    kappa: self.num(key_value(args[2], "kappa")?)?,
                    alpha: self.angle(key_value(args[3], "alpha")?)?,
                })
            }
            "measure" => {
                exact_arity(head, args, 3)?;
                let beam = self.live_mode(args[0], Some(Kind::Beam))?;
                let quadrature = match args[1].text {
                    "x" => Quadrature::X,
                    "p" => Quadrature::P,
                    _ => return Err(args[1].err(ParseErrorKind::BadValue, "expected `x` or `p`")),
                };
                let policy = if args[2].text == "sample" {
                    Policy::Sample
                } else {
                    Policy::Fixed(self.num(key_value(args[2], "fixed")?)?)
                };
                if let Some(entry) = self.scope.modes.get_mut(&beam.node) {
                    entry.1 = false;
                }
                Ok(StatementKind::Measure {
                    beam,
                    quadrature,
                    policy,
                })
            }
            "rotate" => {
                if args.len() < 2 {
                    return Err(head.err(ParseErrorKind::Arity, "`rotate` takes a direction and at least one mode"));
                }
                let direction = match args[0].text {
                    "to_primed" => FrameDirection::ToPrimed,
                    "from_primed" => FrameDirection::FromPrimed,
                    _ => return Err(args[0].err(ParseErrorKind::BadValue, "expected `to_primed` or `from_primed`")),
                };
                let targets = args[1..]
                    .iter()
                    .map(|&t| self.live_mode(t, None))
                    .collect::<PResult<_>>()?;
                Ok(StatementKind::Rotate { direction, targets })
            }
            "report" => self.report(head, args).map(StatementKind::Report),
            "sweep" => {
                exact_arity(head, args, 2)?;
                let param = self.ident(args[0])?;
                if !self.scope.params.contains_key(&param.node) {
                    return Err(args[0].err(ParseErrorKind::UseBeforeDeclaration, "sweep over an undeclared parameter"));
                }
                let parts: Vec<&str> = args[1].text.split(':').collect();
                if parts.len() != 3 {
                    return Err(args[1].err(ParseErrorKind::BadValue, "expected `start:stop:step`"));
                }
                let mut offset = 0;
                let mut values = [0.0; 3];
                for (slot, part) in values.iter_mut().zip(&parts) {
                    let t = args[1].tail(offset).head(part.len());
                    *slot = literal(t)?;
                    offset += part.len() + 1;
                }
                if values[2] <= 0.0 {
                    return Err(args[1].err(ParseErrorKind::BadValue, "sweep step must be positive"));
                }
                Ok(StatementKind::Sweep {
                    param,
                    start: values[0],
                    stop: values[1],
                    step: values[2],
                })
            }
            _ => Err(head.err(ParseErrorKind::UnknownKeyword, "expected a declaration, step, report or sweep")),
        }
    }

    fn report(&mut self, head: Token<'_>, args: &[Token<'_>]) -> PResult<Report> {
        let (args, name) = match args {
            [rest @ .., kw, n] if kw.text == "as" => (rest, Some(self.ident(*n)?)),
            _ => (args, None),
        };
        let Some((what, rest)) = args.split_first() else {
            return Err(head.err(ParseErrorKind::Arity, "`report` needs a kind"));
        };
        let kind = match what.text {
            "state" => {
                exact_arity(*what, rest, 0)?;
                if name.is_some() {
                    return Err(what.err(ParseErrorKind::Arity, "`report state` cannot be renamed"));
                }
                ReportKind::State
            }
            "ppt" => {
                exact_arity(*what, rest, 1)?;
                let tok = rest[0];
                if tok.text == "all" {
                    if name.is_some() {
                        return Err(tok.err(ParseErrorKind::Arity, "`report ppt all` names its outputs per split"));
                    }
                    ReportKind::Ppt(Partition::All)
                } else {
                    let Some((a, _)) = tok.text.split_once('|') else {
                        return Err(tok.err(ParseErrorKind::BadValue, "expected `A1,A2|A3`"));
                    };
                    let side_a = self.id_list(tok.head(a.len()))?;
                    let side_b = self.id_list(tok.tail(a.len() + 1))?;
                    ReportKind::Ppt(Partition::Split(side_a, side_b))
                }
            }
            "duan" => {
                exact_arity(*what, rest, 3)?;
                ReportKind::Duan {
                    a: self.live_mode(rest[0], None)?,
                    b: self.live_mode(rest[1], None)?,
                    lambda: self.num(key_value(rest[2], "lambda")?)?,
                }
            }
            "vlf" => ReportKind::Vlf(self.vlf(*what, rest)?),
            "variance" => {
                if rest.is_empty() {
                    return Err(what.err(ParseErrorKind::Arity, "`variance` needs at least one term"));
                }
                ReportKind::Variance(rest.iter().map(|&t| self.term(t)).collect::<PResult<_>>()?)
            }
            _ => return Err(what.err(ParseErrorKind::UnknownKeyword, "unknown report kind")),
        };
        Ok(Report { kind, name })
    }

    fn id_list(&self, tok: Token<'_>) -> PResult<Vec<Ident>> {
        let mut out = Vec::new();
        let mut offset = 0;
        for part in tok.text.split(',') {
            out.push(self.live_mode(tok.tail(offset).head(part.len()), None)?);
            offset += part.len() + 1;
        }
        Ok(out)
    }

    fn num_list(&self, tok: Token<'_>) -> PResult<Vec<Spanned<Num>>> {
        let mut out = Vec::new();
        let mut offset = 0;
        for part in tok.text.split(',') {
            out.push(self.num(tok.tail(offset).head(part.len()))?);
            offset += part.len() + 1;
        }
        Ok(out)
    }

    fn term(&self, tok: Token<'_>) -> PResult<Term> {
        let bad = || tok.err(ParseErrorKind::BadValue, "expected `x:ID=coeff` or `p:ID=coeff`");
        let quadrature = match tok.text.get(..2) {
            Some("x:") => Quadrature::X,
            Some("p:") => Quadrature::P,
            _ => return Err(bad()),
        };
        let body = tok.tail(2);
        let Some((id, _)) = body.text.split_once('=') else {
            return Err(bad());
        };
        Ok(Term {
            quadrature,
            mode: self.live_mode(body.head(id.len()), None)?,
            coeff: self.num(body.tail(id.len() + 1))?,
        })
    }

    fn vlf(&self, what: Token<'_>, rest: &[Token<'_>]) -> PResult<Vlf> {
        if let [tok] = rest {
            let named = match tok.text {
                "delta1" => Some(DeltaName::Delta1),
                "delta2" => Some(DeltaName::Delta2),
                "delta3" => Some(DeltaName::Delta3),
                _ => None,
            };
            if let Some(n) = named {
                return Ok(Vlf::Named(n));
            }
        }
        if !(3..=4).contains(&rest.len()) {
            return Err(what.err(
                ParseErrorKind::Arity,
                "expected `delta1|delta2|delta3` or `h=… g=… split=…|… [exchange=…]`",
            ));
        }
        let h = self.num_list(key_value(rest[0], "h")?)?;
        let g = self.num_list(key_value(rest[1], "g")?)?;
        let split = key_value(rest[2], "split")?;
        let Some((l, _)) = split.text.split_once('|') else {
            return Err(split.err(ParseErrorKind::BadValue, "expected `l,…|m,…`"));
        };
        let left = index_list(split.head(l.len()))?;
        let right = index_list(split.tail(l.len() + 1))?;
        if left.is_empty() || right.is_empty() {
            return Err(split.err(ParseErrorKind::BadValue, "each side needs a distinguished mode"));
        }
        let exchanged = match rest.get(3) {
            Some(&t) => index_list(key_value(t, "exchange")?)?,
            None => Vec::new(),
        };
        Ok(Vlf::Explicit(ExplicitVlf {
            h,
            g,
            left,
            right,
            exchanged,
        }))
    }
}

pub fn parse(text: &str) -> Result<ScenarioAst, ParseError> {
    let mut parser = Parser { scope: Scope::default() };
    let mut statements = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let tokens = tokenize(line, i + 1)?;
        let Some((&head, args)) = tokens.split_first() else {
            continue;
        };
        let node = parser.statement(head, args)?;
        statements.push(Spanned::new(node, head.span));
    }
    Ok(ScenarioAst { statements })
}

/// Parses raw bytes, rejecting invalid UTF-8 with the position of the first
/// bad byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<ScenarioAst, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = good.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let column = std::str::from_utf8(&good[line_start..]).map_or(1, |s| s.chars().count() + 1);
            Err(ParseError {
                kind: ParseErrorKind::Lexical,
                line,
                column,
                token: format!("{:#04x}", bytes[e.valid_up_to()]),
                message: "invalid UTF-8".into(),
            })
        }
    }
}
