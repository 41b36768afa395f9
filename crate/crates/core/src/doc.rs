//! The model document format: a line-oriented text syntax for alphabets,
//! element sets, labeled graphs, plain and compact automata, and the system
//! declaration tying them together.
//!
//! ```text
//! format 1
//! alphabet { s nostress }
//! set X { x_ge1000:letter x_lt1000:letter }
//! graph Gtau over X labels { tau } {
//!   x_ge1000 -tau-> x_lt1000
//! }
//! automaton appraisal {
//!   states { a na* }
//!   trans {
//!     na -tau-> a
//!     a -s-> a
//!   }
//! }
//! compact environment over X {
//!   cstate e1 = X
//!   cstate e2 = X
//!   init { x_ge1000 }
//!   ctrans e1 -[edge Gtau]-> e2
//!   ctrans e1 -[label src.name]-> e1
//! }
//! system { appraisal environment }
//! ```
//!
//! `*` marks initial states, `nostress` spells the no-stress letter, and
//! guards combine the atoms `label <name>`, `label src.name`,
//! `label src.under`, `target counterpart`, `src <elt>`, `target <elt>`,
//! `edge <graph>` with `&`, `|`, `!` and parentheses. `#` starts a line
//! comment; `;` may separate statements but is never required.
//!
//! Parsing is total: malformed input produces a list of positioned errors,
//! never a panic. Serialization is canonical — declarations sorted by kind
//! and name, list items sorted, two-space indentation, trailing newline —
//! so serializing twice is byte-identical and `parse . serialize` is the
//! identity on well-formed documents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use crate::automaton::{validate_automaton, Diagnostic, FiniteAutomaton, Transition};
use crate::compact::{
    validate_compact, CompactAutomaton, ElementAnnotations, ElementUniverse, Guard, LabeledGraph,
};
use crate::error::ModelError;
use crate::label::{Alphabet, Label};
use crate::system::System;

/// A parsed model document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDocument {
    pub format_version: u32,
    pub alphabet: Alphabet,
    pub sets: BTreeMap<String, ElementUniverse>,
    pub graphs: BTreeMap<String, LabeledGraph>,
    pub automata: BTreeMap<String, AutomatonDecl>,
    /// Member names of the single system declaration, in order.
    pub system: Vec<String>,
}

/// An automaton declaration: plain, or compact (unfolded on demand).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutomatonDecl {
    Plain(FiniteAutomaton),
    Compact(CompactAutomaton),
}

impl AutomatonDecl {
    pub fn name(&self) -> &str {
        match self {
            AutomatonDecl::Plain(a) => &a.name,
            AutomatonDecl::Compact(c) => &c.name,
        }
    }

    pub fn unfolded(&self) -> FiniteAutomaton {
        match self {
            AutomatonDecl::Plain(a) => a.clone(),
            AutomatonDecl::Compact(c) => c.unfold(),
        }
    }
}

impl ModelDocument {
    /// Builds the declared system, unfolding compact members.
    pub fn build_system(&self) -> Result<System, ModelError> {
        let mut members = Vec::new();
        for name in &self.system {
            let decl = self
                .automata
                .get(name)
                .ok_or_else(|| ModelError::UnknownAutomaton(name.clone()))?;
            members.push(decl.unfolded());
        }
        System::new(members)
    }

    /// Semantic validation of every declaration; empty means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags: Vec<Diagnostic> = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut push = |diags: &mut Vec<Diagnostic>, d: Diagnostic| {
            if seen.insert(d.message.clone()) {
                diags.push(d);
            }
        };

        for set in self.sets.values() {
            for (element, ann) in &set.annotations {
                if !set.elements.contains(element) {
                    push(
                        &mut diags,
                        Diagnostic::new(format!(
                            "set `{}`: annotation on unknown element `{element}`",
                            set.name
                        )),
                    );
                }
                for letter in [&ann.linked_letter, &ann.underlying_letter]
                    .into_iter()
                    .flatten()
                {
                    if !self.alphabet.contains(letter) {
                        push(
                            &mut diags,
                            Diagnostic::new(format!(
                                "set `{}`: element `{element}` references letter `{letter}` outside the alphabet",
                                set.name
                            )),
                        );
                    }
                }
                if let Some(other) = &ann.counterpart {
                    if !set.elements.contains(other) {
                        push(
                            &mut diags,
                            Diagnostic::new(format!(
                                "set `{}`: element `{element}` pairs with unknown element `{other}`",
                                set.name
                            )),
                        );
                    }
                }
            }
        }

        for graph in self.graphs.values() {
            match self.sets.get(&graph.universe) {
                None => push(
                    &mut diags,
                    Diagnostic::new(format!(
                        "graph `{}` is over undeclared set `{}`",
                        graph.name, graph.universe
                    )),
                ),
                Some(universe) => {
                    for (s, l, t) in &graph.edges {
                        if !universe.elements.contains(s) || !universe.elements.contains(t) {
                            push(
                                &mut diags,
                                Diagnostic::new(format!(
                                    "graph `{}` edge ({s},{l},{t}) uses elements outside `{}`",
                                    graph.name, graph.universe
                                )),
                            );
                        }
                        if !graph.labels.contains(l) {
                            push(
                                &mut diags,
                                Diagnostic::new(format!(
                                    "graph `{}` edge ({s},{l},{t}) uses a label outside its label set",
                                    graph.name
                                )),
                            );
                        }
                    }
                }
            }
            for l in &graph.labels {
                if !self.alphabet.contains_label(l) {
                    push(
                        &mut diags,
                        Diagnostic::new(format!(
                            "graph `{}` declares label `{l}` outside the alphabet",
                            graph.name
                        )),
                    );
                }
            }
        }

        for decl in self.automata.values() {
            match decl {
                AutomatonDecl::Plain(a) => {
                    for d in validate_automaton(a) {
                        push(
                            &mut diags,
                            Diagnostic::new(format!("automaton `{}`: {}", a.name, d.message)),
                        );
                    }
                }
                AutomatonDecl::Compact(c) => {
                    for d in validate_compact(c) {
                        push(
                            &mut diags,
                            Diagnostic::new(format!("compact `{}`: {}", c.name, d.message)),
                        );
                    }
                }
            }
        }

        diags
    }
}

/// Kind of parse failure, each distinctly coded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnresolvedReference,
    DuplicateName,
    MissingDeclaration,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::UnresolvedReference => "unresolved-reference",
            ParseErrorKind::DuplicateName => "duplicate-name",
            ParseErrorKind::MissingDeclaration => "missing-declaration",
        })
    }
}

/// A positioned parse error (1-based line and column).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} error: {}",
            self.line, self.col, self.kind, self.message
        )
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Star,
    Colon,
    Equals,
    Amp,
    Pipe,
    Bang,
    /// `-label->`
    Arrow(String),
    /// `-[`
    GuardOpen,
    /// `]->`
    GuardClose,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Arrow(l) => write!(f, "`-{l}->`"),
            Tok::GuardOpen => f.write_str("`-[`"),
            Tok::GuardClose => f.write_str("`]->`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let (tok_line, tok_col) = (line, col);
        let Some(&c) = chars.peek() else { break };
        match c {
            '\n' | ' ' | '\t' | '\r' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '{' => {
                bump!();
                toks.push(Spanned { tok: Tok::LBrace, line: tok_line, col: tok_col });
            }
            '}' => {
                bump!();
                toks.push(Spanned { tok: Tok::RBrace, line: tok_line, col: tok_col });
            }
            '(' => {
                bump!();
                toks.push(Spanned { tok: Tok::LParen, line: tok_line, col: tok_col });
            }
            ')' => {
                bump!();
                toks.push(Spanned { tok: Tok::RParen, line: tok_line, col: tok_col });
            }
            '*' => {
                bump!();
                toks.push(Spanned { tok: Tok::Star, line: tok_line, col: tok_col });
            }
            ':' => {
                bump!();
                toks.push(Spanned { tok: Tok::Colon, line: tok_line, col: tok_col });
            }
            '=' => {
                bump!();
                toks.push(Spanned { tok: Tok::Equals, line: tok_line, col: tok_col });
            }
            ';' => {
                bump!(); // statement separator, never significant
            }
            '&' => {
                bump!();
                toks.push(Spanned { tok: Tok::Amp, line: tok_line, col: tok_col });
            }
            '|' => {
                bump!();
                toks.push(Spanned { tok: Tok::Pipe, line: tok_line, col: tok_col });
            }
            '!' => {
                bump!();
                toks.push(Spanned { tok: Tok::Bang, line: tok_line, col: tok_col });
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'[') {
                    bump!();
                    toks.push(Spanned { tok: Tok::GuardOpen, line: tok_line, col: tok_col });
                    continue;
                }
                let mut label = String::new();
                while let Some(&c) = chars.peek() {
                    if is_ident_char(c) {
                        label.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if label.is_empty() || chars.peek() != Some(&'-') {
                    return Err(ParseError {
                        line: tok_line,
                        col: tok_col,
                        kind: ParseErrorKind::Syntax,
                        message: "expected an arrow of the form `-label->`".into(),
                    });
                }
                bump!(); // '-'
                if chars.peek() != Some(&'>') {
                    return Err(ParseError {
                        line: tok_line,
                        col: tok_col,
                        kind: ParseErrorKind::Syntax,
                        message: "expected `>` to close the arrow".into(),
                    });
                }
                bump!(); // '>'
                toks.push(Spanned { tok: Tok::Arrow(label), line: tok_line, col: tok_col });
            }
            ']' => {
                bump!();
                if chars.peek() != Some(&'-') {
                    return Err(ParseError {
                        line: tok_line,
                        col: tok_col,
                        kind: ParseErrorKind::Syntax,
                        message: "expected `->` after `]`".into(),
                    });
                }
                bump!();
                if chars.peek() != Some(&'>') {
                    return Err(ParseError {
                        line: tok_line,
                        col: tok_col,
                        kind: ParseErrorKind::Syntax,
                        message: "expected `->` after `]`".into(),
                    });
                }
                bump!();
                toks.push(Spanned { tok: Tok::GuardClose, line: tok_line, col: tok_col });
            }
            c if is_ident_char(c) => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if is_ident_char(c) {
                        ident.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                toks.push(Spanned { tok: Tok::Ident(ident), line: tok_line, col: tok_col });
            }
            other => {
                return Err(ParseError {
                    line: tok_line,
                    col: tok_col,
                    kind: ParseErrorKind::Syntax,
                    message: format!("unexpected character `{}`", other.escape_default()),
                });
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser (raw declarations, with recovery at top-level keywords)
// ---------------------------------------------------------------------------

const DECL_KEYWORDS: [&str; 7] = [
    "format",
    "alphabet",
    "set",
    "graph",
    "automaton",
    "compact",
    "system",
];

#[derive(Debug)]
enum RawDecl {
    Format(u32),
    Alphabet(Vec<String>),
    Set {
        name: String,
        elements: Vec<(String, ElementAnnotations)>,
    },
    Graph {
        name: String,
        universe: String,
        labels: Vec<String>,
        edges: Vec<(String, String, String)>,
    },
    Automaton {
        name: String,
        states: Vec<(String, bool)>,
        transitions: Vec<(String, String, String)>,
    },
    Compact {
        name: String,
        universe: String,
        cstates: Vec<(String, RawImage)>,
        initials: Vec<String>,
        transitions: Vec<(String, Guard, String)>,
    },
    System(Vec<String>),
}

#[derive(Debug)]
enum RawImage {
    WholeSet(String),
    Elements(Vec<String>),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn error_here(&mut self, kind: ParseErrorKind, message: impl Into<String>) {
        let (line, col) = self.here();
        self.errors.push(ParseError {
            line,
            col,
            kind,
            message: message.into(),
        });
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ()> {
        match self.peek() {
            Some(t) if &t.tok == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let (message, line, col) =
                    (format!("expected {want}, found {}", t.tok), t.line, t.col);
                self.errors.push(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax,
                    message,
                });
                Err(())
            }
            None => {
                self.error_here(ParseErrorKind::Syntax, format!("expected {want}, found end of input"));
                Err(())
            }
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ()> {
        match self.peek() {
            Some(Spanned { tok: Tok::Ident(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => {
                let (message, line, col) =
                    (format!("expected {what}, found {}", t.tok), t.line, t.col);
                self.errors.push(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax,
                    message,
                });
                Err(())
            }
            None => {
                self.error_here(ParseErrorKind::Syntax, format!("expected {what}, found end of input"));
                Err(())
            }
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), ()> {
        let got = self.expect_ident(&format!("`{word}`"))?;
        if got == word {
            Ok(())
        } else {
            self.pos -= 1;
            self.error_here(ParseErrorKind::Syntax, format!("expected `{word}`, found `{got}`"));
            self.pos += 1;
            Err(())
        }
    }

    /// Skips forward to the next top-level declaration keyword.
    fn synchronize(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match &t.tok {
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth = depth.saturating_sub(1),
                Tok::Ident(word)
                    if depth == 0 && DECL_KEYWORDS.contains(&word.as_str()) =>
                {
                    return;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    /// `{ ident* }`, tolerant of stars after names when `allow_star`.
    fn ident_list(&mut self, allow_star: bool) -> Result<Vec<(String, bool)>, ()> {
        self.expect(&Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(Tok::Ident(name)) => {
                    self.pos += 1;
                    let starred = if allow_star && matches!(self.peek().map(|t| &t.tok), Some(Tok::Star)) {
                        self.pos += 1;
                        true
                    } else {
                        false
                    };
                    out.push((name, starred));
                }
                _ => {
                    self.error_here(ParseErrorKind::Syntax, "expected a name or `}`");
                    return Err(());
                }
            }
        }
    }

    /// `{ src -label-> tgt ... }`
    fn transition_list(&mut self) -> Result<Vec<(String, String, String)>, ()> {
        self.expect(&Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(Tok::Ident(source)) => {
                    self.pos += 1;
                    match self.next().map(|t| t.tok) {
                        Some(Tok::Arrow(label)) => {
                            let target = self.expect_ident("a target state")?;
                            out.push((source, label, target));
                        }
                        _ => {
                            self.pos = self.pos.saturating_sub(1);
                            self.error_here(ParseErrorKind::Syntax, "expected `-label->`");
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.error_here(ParseErrorKind::Syntax, "expected a transition or `}`");
                    return Err(());
                }
            }
        }
    }

    fn guard(&mut self) -> Result<Guard, ()> {
        let mut left = self.guard_and()?;
        while matches!(self.peek().map(|t| &t.tok), Some(Tok::Pipe)) {
            self.pos += 1;
            let right = self.guard_and()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn guard_and(&mut self) -> Result<Guard, ()> {
        let mut left = self.guard_unary()?;
        while matches!(self.peek().map(|t| &t.tok), Some(Tok::Amp)) {
            self.pos += 1;
            let right = self.guard_unary()?;
            left = left.and(right);
        }
        Ok(left)
    }

    fn guard_unary(&mut self) -> Result<Guard, ()> {
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(!self.guard_unary()?)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.guard()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Ident(word)) => {
                self.pos += 1;
                match word.as_str() {
                    "true" => Ok(Guard::True),
                    "label" => {
                        let arg = self.expect_ident("a label or `src.name`/`src.under`")?;
                        match arg.as_str() {
                            "src.name" => Ok(Guard::LabelEqualsSourceName),
                            "src.under" => Ok(Guard::LabelEqualsSourceUnderlying),
                            other => match Label::parse(other) {
                                Ok(label) => Ok(Guard::LabelIs(label)),
                                Err(e) => {
                                    self.error_here(ParseErrorKind::Syntax, e.to_string());
                                    Err(())
                                }
                            },
                        }
                    }
                    "target" => {
                        let arg = self.expect_ident("an element or `counterpart`")?;
                        if arg == "counterpart" {
                            Ok(Guard::TargetIsCounterpartOfSource)
                        } else {
                            Ok(Guard::TargetIs(arg))
                        }
                    }
                    "src" => Ok(Guard::SourceIs(self.expect_ident("an element")?)),
                    "edge" => Ok(Guard::EdgeIn(self.expect_ident("a graph name")?)),
                    other => {
                        self.pos -= 1;
                        self.error_here(
                            ParseErrorKind::Syntax,
                            format!("unknown guard atom `{other}`"),
                        );
                        self.pos += 1;
                        Err(())
                    }
                }
            }
            _ => {
                self.error_here(ParseErrorKind::Syntax, "expected a guard");
                Err(())
            }
        }
    }

    fn declaration(&mut self) -> Result<Option<RawDecl>, ()> {
        let keyword = self.expect_ident("a declaration keyword")?;
        match keyword.as_str() {
            "format" => {
                let number = self.expect_ident("a version number")?;
                match number.parse::<u32>() {
                    Ok(v) => Ok(Some(RawDecl::Format(v))),
                    Err(_) => {
                        self.error_here(
                            ParseErrorKind::Syntax,
                            format!("`{number}` is not a version number"),
                        );
                        Err(())
                    }
                }
            }
            "alphabet" => {
                let letters = self.ident_list(false)?;
                Ok(Some(RawDecl::Alphabet(
                    letters.into_iter().map(|(n, _)| n).collect(),
                )))
            }
            "set" => {
                let name = self.expect_ident("a set name")?;
                self.expect(&Tok::LBrace)?;
                let mut elements = Vec::new();
                loop {
                    match self.peek().map(|t| t.tok.clone()) {
                        Some(Tok::RBrace) => {
                            self.pos += 1;
                            break;
                        }
                        Some(Tok::Ident(element)) => {
                            self.pos += 1;
                            let mut ann = ElementAnnotations::default();
                            while matches!(self.peek().map(|t| &t.tok), Some(Tok::Colon)) {
                                self.pos += 1;
                                let key = self.expect_ident("an annotation")?;
                                match key.as_str() {
                                    "letter" => {
                                        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Equals)) {
                                            self.pos += 1;
                                            ann.linked_letter =
                                                Some(self.expect_ident("a letter")?);
                                        } else {
                                            ann.linked_letter = Some(element.clone());
                                        }
                                    }
                                    "under" => {
                                        self.expect(&Tok::Equals)?;
                                        ann.underlying_letter =
                                            Some(self.expect_ident("a letter")?);
                                    }
                                    "pair" => {
                                        self.expect(&Tok::Equals)?;
                                        ann.counterpart =
                                            Some(self.expect_ident("an element")?);
                                    }
                                    other => {
                                        self.pos -= 1;
                                        self.error_here(
                                            ParseErrorKind::Syntax,
                                            format!("unknown annotation `{other}`"),
                                        );
                                        self.pos += 1;
                                        return Err(());
                                    }
                                }
                            }
                            elements.push((element, ann));
                        }
                        _ => {
                            self.error_here(ParseErrorKind::Syntax, "expected an element or `}`");
                            return Err(());
                        }
                    }
                }
                Ok(Some(RawDecl::Set { name, elements }))
            }
            "graph" => {
                let name = self.expect_ident("a graph name")?;
                self.expect_keyword("over")?;
                let universe = self.expect_ident("a set name")?;
                self.expect_keyword("labels")?;
                let labels = self
                    .ident_list(false)?
                    .into_iter()
                    .map(|(n, _)| n)
                    .collect();
                let edges = self.transition_list()?;
                Ok(Some(RawDecl::Graph {
                    name,
                    universe,
                    labels,
                    edges,
                }))
            }
            "automaton" => {
                let name = self.expect_ident("an automaton name")?;
                self.expect(&Tok::LBrace)?;
                let mut states = Vec::new();
                let mut transitions = Vec::new();
                loop {
                    match self.peek().map(|t| t.tok.clone()) {
                        Some(Tok::RBrace) => {
                            self.pos += 1;
                            break;
                        }
                        Some(Tok::Ident(section)) if section == "states" => {
                            self.pos += 1;
                            states = self.ident_list(true)?;
                        }
                        Some(Tok::Ident(section)) if section == "trans" => {
                            self.pos += 1;
                            transitions = self.transition_list()?;
                        }
                        _ => {
                            self.error_here(
                                ParseErrorKind::Syntax,
                                "expected `states`, `trans` or `}`",
                            );
                            return Err(());
                        }
                    }
                }
                Ok(Some(RawDecl::Automaton {
                    name,
                    states,
                    transitions,
                }))
            }
            "compact" => {
                let name = self.expect_ident("an automaton name")?;
                self.expect_keyword("over")?;
                let universe = self.expect_ident("a set name")?;
                self.expect(&Tok::LBrace)?;
                let mut cstates = Vec::new();
                let mut initials = Vec::new();
                let mut transitions = Vec::new();
                loop {
                    match self.peek().map(|t| t.tok.clone()) {
                        Some(Tok::RBrace) => {
                            self.pos += 1;
                            break;
                        }
                        Some(Tok::Ident(item)) if item == "cstate" => {
                            self.pos += 1;
                            let cname = self.expect_ident("a compact state name")?;
                            self.expect(&Tok::Equals)?;
                            let image = match self.peek().map(|t| t.tok.clone()) {
                                Some(Tok::Ident(set_name)) => {
                                    self.pos += 1;
                                    RawImage::WholeSet(set_name)
                                }
                                Some(Tok::LBrace) => RawImage::Elements(
                                    self.ident_list(false)?
                                        .into_iter()
                                        .map(|(n, _)| n)
                                        .collect(),
                                ),
                                _ => {
                                    self.error_here(
                                        ParseErrorKind::Syntax,
                                        "expected a set name or `{ elements }`",
                                    );
                                    return Err(());
                                }
                            };
                            cstates.push((cname, image));
                        }
                        Some(Tok::Ident(item)) if item == "init" => {
                            self.pos += 1;
                            initials = self
                                .ident_list(false)?
                                .into_iter()
                                .map(|(n, _)| n)
                                .collect();
                        }
                        Some(Tok::Ident(item)) if item == "ctrans" => {
                            self.pos += 1;
                            let source = self.expect_ident("a compact state")?;
                            self.expect(&Tok::GuardOpen)?;
                            let guard = self.guard()?;
                            self.expect(&Tok::GuardClose)?;
                            let target = self.expect_ident("a compact state")?;
                            transitions.push((source, guard, target));
                        }
                        _ => {
                            self.error_here(
                                ParseErrorKind::Syntax,
                                "expected `cstate`, `init`, `ctrans` or `}`",
                            );
                            return Err(());
                        }
                    }
                }
                Ok(Some(RawDecl::Compact {
                    name,
                    universe,
                    cstates,
                    initials,
                    transitions,
                }))
            }
            "system" => {
                let members = self
                    .ident_list(false)?
                    .into_iter()
                    .map(|(n, _)| n)
                    .collect();
                Ok(Some(RawDecl::System(members)))
            }
            other => {
                self.pos -= 1;
                self.error_here(
                    ParseErrorKind::Syntax,
                    format!("expected a declaration, found `{other}`"),
                );
                self.pos += 1;
                Err(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

/// Parses a document. On failure returns every error found, each with its
/// line and column; parsing never panics, whatever the input.
pub fn parse_document(text: &str) -> Result<ModelDocument, Vec<ParseError>> {
    let toks = match lex(text) {
        Ok(toks) => toks,
        Err(e) => return Err(vec![e]),
    };
    let mut parser = Parser {
        toks,
        pos: 0,
        errors: Vec::new(),
    };
    let mut decls: Vec<(RawDecl, (usize, usize))> = Vec::new();
    while parser.peek().is_some() {
        let at = parser.here();
        match parser.declaration() {
            Ok(Some(decl)) => decls.push((decl, at)),
            Ok(None) => {}
            Err(()) => parser.synchronize(),
        }
    }
    let mut errors = parser.errors;

    let mut format_version: Option<u32> = None;
    let mut alphabet: Option<Alphabet> = None;
    let mut sets: BTreeMap<String, ElementUniverse> = BTreeMap::new();
    struct RawGraph {
        at: (usize, usize),
        name: String,
        universe: String,
        labels: Vec<String>,
        edges: Vec<(String, String, String)>,
    }
    let mut graphs_raw: Vec<RawGraph> = Vec::new();
    let mut automata_raw: Vec<((usize, usize), RawDecl)> = Vec::new();
    let mut system: Option<(Vec<String>, (usize, usize))> = None;

    let error_at = |errors: &mut Vec<ParseError>,
                    at: (usize, usize),
                    kind: ParseErrorKind,
                    message: String| {
        errors.push(ParseError {
            line: at.0,
            col: at.1,
            kind,
            message,
        });
    };

    for (decl, at) in decls {
        match decl {
            RawDecl::Format(v) => {
                if format_version.replace(v).is_some() {
                    error_at(
                        &mut errors,
                        at,
                        ParseErrorKind::DuplicateName,
                        "duplicate format declaration".into(),
                    );
                }
            }
            RawDecl::Alphabet(letters) => match Alphabet::new(letters) {
                Ok(sigma) => {
                    if alphabet.replace(sigma).is_some() {
                        error_at(
                            &mut errors,
                            at,
                            ParseErrorKind::DuplicateName,
                            "duplicate alphabet declaration".into(),
                        );
                    }
                }
                Err(e) => error_at(&mut errors, at, ParseErrorKind::Syntax, e.to_string()),
            },
            RawDecl::Set { name, elements } => {
                let mut universe = ElementUniverse::new(name.clone(), Vec::<String>::new());
                for (element, ann) in elements {
                    universe.elements.insert(element.clone());
                    if !ann.is_empty() {
                        universe.annotations.insert(element, ann);
                    }
                }
                if sets.insert(name.clone(), universe).is_some() {
                    error_at(
                        &mut errors,
                        at,
                        ParseErrorKind::DuplicateName,
                        format!("duplicate set `{name}`"),
                    );
                }
            }
            RawDecl::Graph {
                name,
                universe,
                labels,
                edges,
            } => graphs_raw.push(RawGraph {
                at,
                name,
                universe,
                labels,
                edges,
            }),
            decl @ (RawDecl::Automaton { .. } | RawDecl::Compact { .. }) => {
                automata_raw.push((at, decl));
            }
            RawDecl::System(members) => {
                if system.replace((members, at)).is_some() {
                    error_at(
                        &mut errors,
                        at,
                        ParseErrorKind::DuplicateName,
                        "duplicate system declaration".into(),
                    );
                }
            }
        }
    }

    let alphabet = alphabet.unwrap_or_default();

    let mut graphs: BTreeMap<String, LabeledGraph> = BTreeMap::new();
    for RawGraph {
        at,
        name,
        universe,
        labels,
        edges,
    } in graphs_raw
    {
        if !sets.contains_key(&universe) {
            error_at(
                &mut errors,
                at,
                ParseErrorKind::UnresolvedReference,
                format!("graph `{name}` is over undeclared set `{universe}`"),
            );
            continue;
        }
        let mut parsed_labels = BTreeSet::new();
        let mut parsed_edges = BTreeSet::new();
        let mut ok = true;
        for l in labels {
            match Label::parse(&l) {
                Ok(label) => {
                    parsed_labels.insert(label);
                }
                Err(e) => {
                    error_at(&mut errors, at, ParseErrorKind::Syntax, e.to_string());
                    ok = false;
                }
            }
        }
        for (s, l, t) in edges {
            match Label::parse(&l) {
                Ok(label) => {
                    parsed_edges.insert((s, label, t));
                }
                Err(e) => {
                    error_at(&mut errors, at, ParseErrorKind::Syntax, e.to_string());
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        let graph = LabeledGraph {
            name: name.clone(),
            universe,
            labels: parsed_labels,
            edges: parsed_edges,
        };
        if graphs.insert(name.clone(), graph).is_some() {
            error_at(
                &mut errors,
                at,
                ParseErrorKind::DuplicateName,
                format!("duplicate graph `{name}`"),
            );
        }
    }

    let mut automata: BTreeMap<String, AutomatonDecl> = BTreeMap::new();
    for (at, decl) in automata_raw {
        match decl {
            RawDecl::Automaton {
                name,
                states,
                transitions,
            } => {
                let mut parsed = BTreeSet::new();
                let mut ok = true;
                for (source, label, target) in transitions {
                    match Label::parse(&label) {
                        Ok(label) => {
                            parsed.insert(Transition::new(source, label, target));
                        }
                        Err(e) => {
                            error_at(&mut errors, at, ParseErrorKind::Syntax, e.to_string());
                            ok = false;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let automaton = FiniteAutomaton::new(
                    name.clone(),
                    alphabet.clone(),
                    states.iter().map(|(n, _)| n.clone()),
                    parsed,
                    states
                        .iter()
                        .filter(|(_, initial)| *initial)
                        .map(|(n, _)| n.clone()),
                );
                if automata
                    .insert(name.clone(), AutomatonDecl::Plain(automaton))
                    .is_some()
                {
                    error_at(
                        &mut errors,
                        at,
                        ParseErrorKind::DuplicateName,
                        format!("duplicate automaton `{name}`"),
                    );
                }
            }
            RawDecl::Compact {
                name,
                universe,
                cstates,
                initials,
                transitions,
            } => {
                let Some(universe_value) = sets.get(&universe) else {
                    error_at(
                        &mut errors,
                        at,
                        ParseErrorKind::UnresolvedReference,
                        format!("compact `{name}` is over undeclared set `{universe}`"),
                    );
                    continue;
                };
                let mut images = BTreeMap::new();
                let mut ok = true;
                for (cname, image) in cstates {
                    let elements = match image {
                        RawImage::WholeSet(set_name) => {
                            if set_name == universe {
                                universe_value.elements.clone()
                            } else {
                                error_at(
                                    &mut errors,
                                    at,
                                    ParseErrorKind::UnresolvedReference,
                                    format!(
                                        "compact `{name}`: image `{set_name}` is not the set it is over (`{universe}`)"
                                    ),
                                );
                                ok = false;
                                continue;
                            }
                        }
                        RawImage::Elements(elements) => elements.into_iter().collect(),
                    };
                    if images.insert(cname.clone(), elements).is_some() {
                        error_at(
                            &mut errors,
                            at,
                            ParseErrorKind::DuplicateName,
                            format!("compact `{name}`: duplicate compact state `{cname}`"),
                        );
                    }
                }
                if !ok {
                    continue;
                }
                // Embed the graphs the guards reference.
                let mut used_graphs = BTreeMap::new();
                for (_, guard, _) in &transitions {
                    for g in guard.referenced_graphs() {
                        match graphs.get(g) {
                            Some(graph) => {
                                used_graphs.insert(g.to_string(), graph.clone());
                            }
                            None => {
                                error_at(
                                    &mut errors,
                                    at,
                                    ParseErrorKind::UnresolvedReference,
                                    format!(
                                        "compact `{name}`: guard references undeclared graph `{g}`"
                                    ),
                                );
                                ok = false;
                            }
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let compact = CompactAutomaton {
                    name: name.clone(),
                    alphabet: alphabet.clone(),
                    universe: universe_value.clone(),
                    images,
                    transitions: transitions.into_iter().collect(),
                    initials: initials.into_iter().collect(),
                    graphs: used_graphs,
                };
                if automata
                    .insert(name.clone(), AutomatonDecl::Compact(compact))
                    .is_some()
                {
                    error_at(
                        &mut errors,
                        at,
                        ParseErrorKind::DuplicateName,
                        format!("duplicate automaton `{name}`"),
                    );
                }
            }
            _ => unreachable!(),
        }
    }

    let system = match system {
        Some((members, at)) => {
            let mut ok = true;
            if members.is_empty() {
                error_at(
                    &mut errors,
                    at,
                    ParseErrorKind::MissingDeclaration,
                    "system declaration has no members".into(),
                );
                ok = false;
            }
            for member in &members {
                if !automata.contains_key(member) {
                    error_at(
                        &mut errors,
                        at,
                        ParseErrorKind::UnresolvedReference,
                        format!("system references undeclared automaton `{member}`"),
                    );
                    ok = false;
                }
            }
            if ok {
                members
            } else {
                Vec::new()
            }
        }
        None => {
            errors.push(ParseError {
                line: 1,
                col: 1,
                kind: ParseErrorKind::MissingDeclaration,
                message: "missing system declaration".into(),
            });
            Vec::new()
        }
    };

    if !errors.is_empty() {
        return Err(errors);
    }

    Ok(ModelDocument {
        format_version: format_version.unwrap_or(1),
        alphabet,
        sets,
        graphs,
        automata,
        system,
    })
}

// ---------------------------------------------------------------------------
// Serialization (canonical)
// ---------------------------------------------------------------------------

fn braced(items: impl IntoIterator<Item = String>) -> String {
    let items: Vec<String> = items.into_iter().collect();
    if items.is_empty() {
        "{ }".to_string()
    } else {
        format!("{{ {} }}", items.join(" "))
    }
}

fn element_with_annotations(universe: &ElementUniverse, element: &str) -> String {
    let mut out = element.to_string();
    if let Some(ann) = universe.annotations_of(element) {
        if let Some(letter) = &ann.linked_letter {
            if letter == element {
                out.push_str(":letter");
            } else {
                let _ = write!(out, ":letter={letter}");
            }
        }
        if let Some(letter) = &ann.underlying_letter {
            let _ = write!(out, ":under={letter}");
        }
        if let Some(other) = &ann.counterpart {
            let _ = write!(out, ":pair={other}");
        }
    }
    out
}

/// Serializes a plain automaton declaration (also used on its own by the
/// unfold subcommand).
pub fn serialize_automaton(a: &FiniteAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "automaton {} {{", a.name);
    let states = a.states.iter().map(|s| {
        if a.initials.contains(s) {
            format!("{s}*")
        } else {
            s.clone()
        }
    });
    let _ = writeln!(out, "  states {}", braced(states));
    if a.transitions.is_empty() {
        let _ = writeln!(out, "  trans {{ }}");
    } else {
        let _ = writeln!(out, "  trans {{");
        for t in &a.transitions {
            let _ = writeln!(out, "    {} -{}-> {}", t.source, t.label, t.target);
        }
        let _ = writeln!(out, "  }}");
    }
    out.push_str("}\n");
    out
}

fn serialize_compact(c: &CompactAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "compact {} over {} {{", c.name, c.universe.name);
    for (cname, image) in &c.images {
        if image == &c.universe.elements {
            let _ = writeln!(out, "  cstate {} = {}", cname, c.universe.name);
        } else {
            let _ = writeln!(out, "  cstate {} = {}", cname, braced(image.iter().cloned()));
        }
    }
    let _ = writeln!(out, "  init {}", braced(c.initials.iter().cloned()));
    let mut transitions: Vec<&(String, Guard, String)> = c.transitions.iter().collect();
    transitions.sort_by_key(|(s, g, t)| (s.clone(), g.to_string(), t.clone()));
    for (source, guard, target) in transitions {
        let _ = writeln!(out, "  ctrans {source} -[{guard}]-> {target}");
    }
    out.push_str("}\n");
    out
}

/// Canonical text of a document: declarations sorted by (kind, name), list
/// items sorted, two-space indentation, trailing newline. Serializing twice
/// yields identical bytes, and parsing the output reproduces the document.
pub fn serialize_document(doc: &ModelDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format {}", doc.format_version);
    let _ = writeln!(
        out,
        "alphabet {}",
        braced(doc.alphabet.letters().map(str::to_string))
    );
    for (name, universe) in &doc.sets {
        let elements = universe
            .elements
            .iter()
            .map(|e| element_with_annotations(universe, e));
        let _ = writeln!(out, "set {} {}", name, braced(elements));
    }
    for (name, graph) in &doc.graphs {
        let labels = graph.labels.iter().map(ToString::to_string);
        let _ = writeln!(
            out,
            "graph {} over {} labels {} {{",
            name,
            graph.universe,
            braced(labels)
        );
        for (s, l, t) in &graph.edges {
            let _ = writeln!(out, "  {s} -{l}-> {t}");
        }
        let _ = writeln!(out, "}}");
    }
    for decl in doc.automata.values() {
        if let AutomatonDecl::Plain(a) = decl {
            out.push_str(&serialize_automaton(a));
        }
    }
    for decl in doc.automata.values() {
        if let AutomatonDecl::Compact(c) = decl {
            out.push_str(&serialize_compact(c));
        }
    }
    let _ = writeln!(out, "system {}", braced(doc.system.iter().cloned()));
    out
}
