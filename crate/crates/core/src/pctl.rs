//! PCTL formulas: abstract syntax, concrete grammar, printer and validator.
//!
//! The concrete syntax is whitespace-insensitive:
//!
//! ```text
//! lead   := until [ "~>" "{" ">=" INT "," "<=" (INT|"inf") "}" [pbound] until ]
//! until  := imp [ ("U"|"W") tbound imp ]
//! imp    := or [ "->" imp ]
//! or     := and { "|" and }
//! and    := unary { "&" unary }
//! unary  := "!" unary | "(" lead ")" | "[" until "]" pbound | quant
//!         | "true" | "false" | IDENT
//! quant  := ("A"|"E"|"F"|"G") [tbound] [pbound] unary
//! tbound := "{" "<=" (INT|"inf") "}"
//! pbound := "{" (">="|">") FLOAT "}"
//! ```
//!
//! Binding strength, loosest first: `~>`, `U`/`W`, `->` (right-associative),
//! `|`, `&`, `!`. The quantifiers are sugar and never survive parsing:
//! `A f` is `[f]{>=1}`, `E f` is `[f]{>0}`, `F f` is `true U{<=inf} f` and
//! `G f` is `f W{<=inf} false`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Upper time bound of a path operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeBound {
    Finite(u64),
    Infinite,
}

impl TimeBound {
    pub fn finite(self) -> Option<u64> {
        match self {
            TimeBound::Finite(t) => Some(t),
            TimeBound::Infinite => None,
        }
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBound::Finite(t) => write!(f, "{t}"),
            TimeBound::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    /// `>=`
    AtLeast,
    /// `>`
    Greater,
}

impl Comparison {
    pub fn holds(self, value: f64, p: f64) -> bool {
        match self {
            Comparison::AtLeast => value >= p,
            Comparison::Greater => value > p,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::AtLeast => ">=",
            Comparison::Greater => ">",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbBound {
    pub cmp: Comparison,
    pub p: f64,
}

impl ProbBound {
    pub fn new(cmp: Comparison, p: f64) -> Self {
        ProbBound { cmp, p }
    }
}

impl fmt::Display for ProbBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}{}}}", self.cmp, self.p)
    }
}

/// A PCTL formula. State and path formulas share one tree; [`validate`]
/// checks that each node sits in a position of the right kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// `[path]{cmp p}`: the probability of the path formula compared against `p`.
    Prob {
        path: Box<Formula>,
        bound: ProbBound,
    },
    /// Bounded until: `left U{<=bound} right`.
    Until {
        left: Box<Formula>,
        right: Box<Formula>,
        bound: TimeBound,
    },
    /// Bounded unless (weak until): `left W{<=bound} right`.
    Unless {
        left: Box<Formula>,
        right: Box<Formula>,
        bound: TimeBound,
    },
    /// `cause ~>{>=tmin,<=tmax} effect`: effect holds between `tmin` and
    /// `tmax` time units after the cause.
    LeadsTo {
        cause: Box<Formula>,
        effect: Box<Formula>,
        tmin: u64,
        tmax: TimeBound,
    },
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn until(self, other: Formula, bound: TimeBound) -> Self {
        Formula::Until {
            left: Box::new(self),
            right: Box::new(other),
            bound,
        }
    }

    pub fn unless(self, other: Formula, bound: TimeBound) -> Self {
        Formula::Unless {
            left: Box::new(self),
            right: Box::new(other),
            bound,
        }
    }

    pub fn leads_to(self, effect: Formula, tmin: u64, tmax: TimeBound) -> Self {
        Formula::LeadsTo {
            cause: Box::new(self),
            effect: Box::new(effect),
            tmin,
            tmax,
        }
    }

    pub fn prob(self, cmp: Comparison, p: f64) -> Self {
        Formula::Prob {
            path: Box::new(self),
            bound: ProbBound::new(cmp, p),
        }
    }

    /// True for until, unless and leads-to nodes.
    pub fn is_path(&self) -> bool {
        matches!(
            self,
            Formula::Until { .. } | Formula::Unless { .. } | Formula::LeadsTo { .. }
        )
    }

    /// True when the formula uses only atoms and boolean connectives.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_propositional(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            _ => false,
        }
    }

    /// Names of all atoms mentioned in the formula.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(name) => {
                out.insert(name);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Prob { path, .. } => path.collect_atoms(out),
            Formula::Until { left, right, .. } | Formula::Unless { left, right, .. } => {
                left.collect_atoms(out);
                right.collect_atoms(out);
            }
            Formula::LeadsTo { cause, effect, .. } => {
                cause.collect_atoms(out);
                effect.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::LeadsTo { .. } => 0,
            Formula::Prob { path, .. } if matches!(**path, Formula::LeadsTo { .. }) => 0,
            Formula::Until { .. } | Formula::Unless { .. } => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }
}

// ---------------------------------------------------------------------------
// Printing

/// Renders a formula in canonical concrete syntax.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}

fn write_prec(node: &Formula, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = node.precedence() < min;
    if wrap {
        f.write_str("(")?;
    }
    match node {
        Formula::True => f.write_str("true")?,
        Formula::False => f.write_str("false")?,
        Formula::Atom(name) => f.write_str(name)?,
        Formula::Not(inner) => {
            f.write_str("!")?;
            write_prec(inner, 5, f)?;
        }
        Formula::And(a, b) => binary(a, " & ", b, 4, 5, f)?,
        Formula::Or(a, b) => binary(a, " | ", b, 3, 4, f)?,
        Formula::Implies(a, b) => binary(a, " -> ", b, 3, 2, f)?,
        Formula::Prob { path, bound } => match &**path {
            Formula::LeadsTo {
                cause,
                effect,
                tmin,
                tmax,
            } => {
                write_prec(cause, 1, f)?;
                write!(f, " ~>{{>={tmin},<={tmax}}}{bound} ")?;
                write_prec(effect, 1, f)?;
            }
            other => {
                f.write_str("[")?;
                write_prec(other, 1, f)?;
                write!(f, "]{bound}")?;
            }
        },
        Formula::Until { left, right, bound } => {
            write_prec(left, 2, f)?;
            write!(f, " U{{<={bound}}} ")?;
            write_prec(right, 2, f)?;
        }
        Formula::Unless { left, right, bound } => {
            write_prec(left, 2, f)?;
            write!(f, " W{{<={bound}}} ")?;
            write_prec(right, 2, f)?;
        }
        Formula::LeadsTo {
            cause,
            effect,
            tmin,
            tmax,
        } => {
            write_prec(cause, 1, f)?;
            write!(f, " ~>{{>={tmin},<={tmax}}} ")?;
            write_prec(effect, 1, f)?;
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

fn binary(
    a: &Formula,
    op: &str,
    b: &Formula,
    left_min: u8,
    right_min: u8,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    write_prec(a, left_min, f)?;
    f.write_str(op)?;
    write_prec(b, right_min, f)
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    OutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at position {position}: {message}", match .kind {
    ParseErrorKind::Syntax => "syntax error",
    ParseErrorKind::OutOfRange => "numeric literal out of range",
})]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn syntax(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            kind: ParseErrorKind::Syntax,
            position,
            message: message.into(),
        }
    }

    fn range(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            kind: ParseErrorKind::OutOfRange,
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Squiggle,
    Ge,
    Gt,
    Le,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "'{s}'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrack => f.write_str("'['"),
            Tok::RBrack => f.write_str("']'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Bang => f.write_str("'!'"),
            Tok::Amp => f.write_str("'&'"),
            Tok::Pipe => f.write_str("'|'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Squiggle => f.write_str("'~>'"),
            Tok::Ge => f.write_str("'>='"),
            Tok::Gt => f.write_str("'>'"),
            Tok::Le => f.write_str("'<='"),
            Tok::Comma => f.write_str("','"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = |next: u8| bytes.get(i + 1) == Some(&next);
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBrack,
            b']' => Tok::RBrack,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Pipe,
            b',' => Tok::Comma,
            b'-' if two(b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'~' if two(b'>') => {
                i += 1;
                Tok::Squiggle
            }
            b'>' if two(b'=') => {
                i += 1;
                Tok::Ge
            }
            b'>' => Tok::Gt,
            b'<' if two(b'=') => {
                i += 1;
                Tok::Le
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                if bytes.get(i + 1) == Some(&b'.') {
                    i += 1;
                    if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                        return Err(ParseError::syntax(start, "malformed number"));
                    }
                    while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                        i += 1;
                    }
                }
                Tok::Number(text[start..=i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::syntax(
                    start,
                    format!("unexpected character '{ch}'"),
                ));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses a formula from its concrete syntax, expanding the A/E/F/G sugar.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = parser.lead()?;
    match parser.peek() {
        Tok::Eof => Ok(f),
        other => Err(ParseError::syntax(
            parser.offset(),
            format!("unexpected {other} after formula"),
        )),
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::syntax(
                self.offset(),
                format!("expected {want}, found {}", self.peek()),
            ))
        }
    }

    fn is_path_op(&self, ahead: usize) -> bool {
        matches!(self.peek_at(ahead), Tok::Ident(s) if s == "U" || s == "W")
            && *self.peek_at(ahead + 1) == Tok::LBrace
    }

    fn lead(&mut self) -> Result<Formula, ParseError> {
        let cause = self.until()?;
        if *self.peek() != Tok::Squiggle {
            return Ok(cause);
        }
        self.bump();
        self.expect(Tok::LBrace)?;
        self.expect(Tok::Ge)?;
        let tmin = self.integer()?;
        self.expect(Tok::Comma)?;
        self.expect(Tok::Le)?;
        let tmax = self.time_value()?;
        self.expect(Tok::RBrace)?;
        let bound = if *self.peek() == Tok::LBrace {
            Some(self.prob_bound()?)
        } else {
            None
        };
        let effect = self.until()?;
        let node = cause.leads_to(effect, tmin, tmax);
        Ok(match bound {
            Some(bound) => Formula::Prob {
                path: Box::new(node),
                bound,
            },
            None => node,
        })
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let left = self.implies()?;
        if !self.is_path_op(0) {
            return Ok(left);
        }
        let weak = matches!(self.bump(), Tok::Ident(s) if s == "W");
        let bound = self.time_bound()?;
        let right = self.implies()?;
        Ok(if weak {
            left.unless(right, bound)
        } else {
            left.until(right, bound)
        })
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let left = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.implies()?;
            return Ok(left.implies(right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            acc = acc.or(self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            acc = acc.and(self.unary()?);
        }
        Ok(acc)
    }

    /// A quantifier letter only acts as a quantifier when the next token
    /// can start its operand; otherwise it is an ordinary atom.
    fn starts_quantifier(&self) -> bool {
        match self.peek_at(1) {
            Tok::LBrace | Tok::LParen | Tok::Bang | Tok::LBrack => true,
            Tok::Ident(_) => !self.is_path_op(1),
            _ => false,
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let inner = self.lead()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::LBrack => {
                self.bump();
                let path = self.until()?;
                self.expect(Tok::RBrack)?;
                let bound = self.prob_bound()?;
                Ok(Formula::Prob {
                    path: Box::new(path),
                    bound,
                })
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => {
                    self.bump();
                    Ok(Formula::True)
                }
                "false" => {
                    self.bump();
                    Ok(Formula::False)
                }
                "A" | "E" | "F" | "G" if self.starts_quantifier() => self.quantifier(&name, at),
                _ => {
                    self.bump();
                    Ok(Formula::Atom(name))
                }
            },
            other => Err(ParseError::syntax(
                at,
                format!("expected a formula, found {other}"),
            )),
        }
    }

    fn quantifier(&mut self, q: &str, at: usize) -> Result<Formula, ParseError> {
        self.bump();
        let time = if *self.peek() == Tok::LBrace && *self.peek_at(1) == Tok::Le {
            Some(self.time_bound()?)
        } else {
            None
        };
        let prob = if *self.peek() == Tok::LBrace {
            Some(self.prob_bound()?)
        } else {
            None
        };
        let operand = self.unary()?;
        match q {
            "F" | "G" => {
                let bound = time.unwrap_or(TimeBound::Infinite);
                let path = if q == "F" {
                    Formula::True.until(operand, bound)
                } else {
                    operand.unless(Formula::False, bound)
                };
                Ok(match prob {
                    Some(bound) => Formula::Prob {
                        path: Box::new(path),
                        bound,
                    },
                    None => path,
                })
            }
            _ => {
                if time.is_some() || prob.is_some() {
                    return Err(ParseError::syntax(
                        at,
                        format!("path quantifier {q} takes no bounds"),
                    ));
                }
                if !operand.is_path() {
                    return Err(ParseError::syntax(
                        at,
                        format!("path quantifier {q} expects a path formula"),
                    ));
                }
                let bound = if q == "A" {
                    ProbBound::new(Comparison::AtLeast, 1.0)
                } else {
                    ProbBound::new(Comparison::Greater, 0.0)
                };
                Ok(Formula::Prob {
                    path: Box::new(operand),
                    bound,
                })
            }
        }
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Number(s) if !s.contains('.') => s
                .parse::<u64>()
                .map_err(|_| ParseError::range(at, format!("integer {s} does not fit in 64 bits"))),
            other => Err(ParseError::syntax(
                at,
                format!("expected an integer, found {other}"),
            )),
        }
    }

    fn time_value(&mut self) -> Result<TimeBound, ParseError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "inf") {
            self.bump();
            return Ok(TimeBound::Infinite);
        }
        Ok(TimeBound::Finite(self.integer()?))
    }

    fn time_bound(&mut self) -> Result<TimeBound, ParseError> {
        self.expect(Tok::LBrace)?;
        self.expect(Tok::Le)?;
        let t = self.time_value()?;
        self.expect(Tok::RBrace)?;
        Ok(t)
    }

    fn prob_bound(&mut self) -> Result<ProbBound, ParseError> {
        self.expect(Tok::LBrace)?;
        let cmp = match self.bump() {
            Tok::Ge => Comparison::AtLeast,
            Tok::Gt => Comparison::Greater,
            other => {
                return Err(ParseError::syntax(
                    self.offset(),
                    format!("expected '>=' or '>', found {other}"),
                ))
            }
        };
        let at = self.offset();
        let p = match self.bump() {
            Tok::Number(s) => s
                .parse::<f64>()
                .map_err(|_| ParseError::syntax(at, format!("malformed probability {s}")))?,
            other => {
                return Err(ParseError::syntax(
                    at,
                    format!("expected a probability, found {other}"),
                ))
            }
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(ParseError::range(
                at,
                format!("probability {p} outside [0, 1]"),
            ));
        }
        self.expect(Tok::RBrace)?;
        Ok(ProbBound::new(cmp, p))
    }
}

// ---------------------------------------------------------------------------
// Validation

/// A broken invariant, located by a slash-separated path from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub node: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {} ({})", self.message, self.location, self.node)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Any,
    State,
    Path,
    /// Leads-to antecedent: a state formula or an until/unless path.
    Cause,
}

pub const PROB_OUT_OF_RANGE: &str = "probability out of range";
pub const TMIN_TOO_SMALL: &str = "tmin must be ≥ 1";
pub const TMIN_EXCEEDS_TMAX: &str = "tmin must not exceed tmax";
pub const PATH_IN_STATE_SLOT: &str = "path formula where a state formula is required";
pub const STATE_IN_PATH_SLOT: &str = "probability bound requires a path formula";

/// Lists every node that breaks a typing or range invariant.
pub fn validate(f: &Formula) -> Vec<Violation> {
    let mut out = Vec::new();
    check(f, Slot::Any, "root".to_string(), &mut out);
    out
}

fn check(f: &Formula, slot: Slot, loc: String, out: &mut Vec<Violation>) {
    let mut flag = |message: &str| {
        out.push(Violation {
            location: loc.clone(),
            node: f.to_string(),
            message: message.to_string(),
        })
    };
    match slot {
        Slot::State if f.is_path() => flag(PATH_IN_STATE_SLOT),
        Slot::Path if !f.is_path() => flag(STATE_IN_PATH_SLOT),
        Slot::Cause if matches!(f, Formula::LeadsTo { .. }) => flag(PATH_IN_STATE_SLOT),
        _ => {}
    }
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => {}
        Formula::Not(inner) => check(inner, Slot::State, format!("{loc}/not"), out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check(a, Slot::State, format!("{loc}/left"), out);
            check(b, Slot::State, format!("{loc}/right"), out);
        }
        Formula::Prob { path, bound } => {
            if !(0.0..=1.0).contains(&bound.p) {
                flag(PROB_OUT_OF_RANGE);
            }
            check(path, Slot::Path, format!("{loc}/path"), out);
        }
        Formula::Until { left, right, .. } | Formula::Unless { left, right, .. } => {
            check(left, Slot::State, format!("{loc}/left"), out);
            check(right, Slot::State, format!("{loc}/right"), out);
        }
        Formula::LeadsTo {
            cause,
            effect,
            tmin,
            tmax,
        } => {
            if *tmin < 1 {
                flag(TMIN_TOO_SMALL);
            }
            if let TimeBound::Finite(t) = tmax {
                if tmin > t {
                    flag(TMIN_EXCEEDS_TMAX);
                }
            }
            check(cause, Slot::Cause, format!("{loc}/cause"), out);
            check(effect, Slot::State, format!("{loc}/effect"), out);
        }
    }
}
