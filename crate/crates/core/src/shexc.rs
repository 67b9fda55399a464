//! ShExC reader and writer for the supported subset, plus a canonical JSON
//! rendering.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::model::{
    canonicalize, Cardinality, Iri, Literal, Max, NodeConstraint, PrefixMap, Schema, Shape, ShapeLabel,
    TripleConstraint, ValueSetItem,
};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticKind {
    Syntax,
    UnsupportedFeature,
    DuplicatePredicate,
    DanglingRef,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Syntax => "SYNTAX",
            DiagnosticKind::UnsupportedFeature => "UNSUPPORTED_FEATURE",
            DiagnosticKind::DuplicatePredicate => "DUPLICATE_PREDICATE",
            DiagnosticKind::DanglingRef => "DANGLING_REF",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: DiagnosticKind,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.kind, self.message)
    }
}

/// All diagnostics produced for one source text, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    IriRef(String),
    PName(String, String),
    Word(String),
    Str(String),
    LangTag(String),
    Number(String),
    At,
    DoubleCaret,
    Punct(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::IriRef(s) => format!("<{s}>"),
            Tok::PName(p, l) => format!("{p}:{l}"),
            Tok::Word(w) => format!("'{w}'"),
            Tok::Str(_) => "string literal".to_owned(),
            Tok::LangTag(t) => format!("@{t}"),
            Tok::Number(n) => format!("number {n}"),
            Tok::At => "'@'".to_owned(),
            Tok::DoubleCaret => "'^^'".to_owned(),
            Tok::Punct(c) => format!("'{c}'"),
            Tok::Eof => "end of input".to_owned(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
    diags: Vec<ParseDiagnostic>,
    last_was_string: bool,
}

fn is_pn_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.' || (!c.is_ascii() && !c.is_whitespace())
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), pos: Pos { line: 1, column: 1 }, diags: Vec::new(), last_was_string: false }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn error(&mut self, at: Pos, kind: DiagnosticKind, message: impl Into<String>) {
        self.diags.push(ParseDiagnostic { line: at.line, column: at.column, message: message.into(), kind });
    }

    fn tokenize(mut self) -> (Vec<(Tok, Pos)>, Vec<ParseDiagnostic>) {
        let mut out = Vec::new();
        loop {
            let tok = self.next_token();
            let done = matches!(tok.0, Tok::Eof);
            self.last_was_string = matches!(tok.0, Tok::Str(_));
            out.push(tok);
            if done {
                break;
            }
        }
        (out, self.diags)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> (Tok, Pos) {
        loop {
            self.skip_trivia();
            let start = self.pos;
            let Some(c) = self.peek() else { return (Tok::Eof, start) };
            if let Some(tok) = self.lex_one(c, start) {
                return (tok, start);
            }
        }
    }

    fn lex_one(&mut self, c: char, start: Pos) -> Option<Tok> {
        match c {
            '<' => {
                self.bump();
                self.lex_iriref(start)
            }
            '"' | '\'' => {
                self.bump();
                self.lex_string(c, start)
            }
            '@' => {
                self.bump();
                if self.last_was_string && self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    let mut tag = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == '-' {
                            tag.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Some(Tok::LangTag(tag))
                } else {
                    Some(Tok::At)
                }
            }
            '^' => {
                self.bump();
                if self.peek() == Some('^') {
                    self.bump();
                    Some(Tok::DoubleCaret)
                } else {
                    Some(Tok::Punct('^'))
                }
            }
            '{' | '}' | '[' | ']' | '(' | ')' | ';' | '=' | '?' | '*' | ',' | '|' | '~' | '$' | '&' | '%' | '/' => {
                self.bump();
                Some(Tok::Punct(c))
            }
            '+' | '-' => {
                self.bump();
                if self.peek().is_some_and(|d| d.is_ascii_digit()) {
                    let mut n = String::from(c);
                    self.lex_number_into(&mut n);
                    Some(Tok::Number(n))
                } else {
                    Some(Tok::Punct(c))
                }
            }
            '.' => {
                self.bump();
                if self.peek().is_some_and(|d| d.is_ascii_digit()) {
                    let mut n = String::from('.');
                    self.lex_number_into(&mut n);
                    Some(Tok::Number(n))
                } else {
                    Some(Tok::Punct('.'))
                }
            }
            d if d.is_ascii_digit() => {
                let mut n = String::new();
                self.lex_number_into(&mut n);
                Some(Tok::Number(n))
            }
            ':' => {
                self.bump();
                Some(self.lex_pname_local(String::new()))
            }
            a if a.is_alphabetic() || a == '_' => {
                let mut word = String::new();
                while let Some(c) = self.peek() {
                    if is_pn_char(c) {
                        word.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                while word.ends_with('.') {
                    // A trailing dot is punctuation, not part of the name. We
                    // already consumed it, so it is simply dropped.
                    word.pop();
                }
                if self.peek() == Some(':') {
                    self.bump();
                    Some(self.lex_pname_local(word))
                } else {
                    Some(Tok::Word(word))
                }
            }
            other => {
                self.bump();
                self.error(start, DiagnosticKind::Syntax, format!("unexpected character {other:?}"));
                None
            }
        }
    }

    fn lex_pname_local(&mut self, prefix: String) -> Tok {
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if is_pn_char(c) {
                local.push(c);
                self.bump();
            } else if c == '\\' {
                self.bump();
                if let Some(e) = self.bump() {
                    local.push(e);
                }
            } else if c == '%' {
                local.push(c);
                self.bump();
            } else {
                break;
            }
        }
        while local.ends_with('.') {
            local.pop();
        }
        Tok::PName(prefix, local)
    }

    fn lex_number_into(&mut self, n: &mut String) {
        let mut seen_exp = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                n.push(c);
                self.bump();
            } else if c == '.' && !n.contains('.') && !seen_exp {
                // Only part of the number if a digit follows.
                let mut look = self.chars.clone();
                look.next();
                if look.next().is_some_and(|d| d.is_ascii_digit()) {
                    n.push(c);
                    self.bump();
                } else {
                    break;
                }
            } else if (c == 'e' || c == 'E') && !seen_exp {
                seen_exp = true;
                n.push(c);
                self.bump();
                if let Some(s @ ('+' | '-')) = self.peek() {
                    n.push(s);
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn lex_unicode_escape(&mut self, len: usize, at: Pos) -> Option<char> {
        let mut hex = String::new();
        for _ in 0..len {
            match self.peek() {
                Some(h) if h.is_ascii_hexdigit() => {
                    hex.push(h);
                    self.bump();
                }
                _ => break,
            }
        }
        let c = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32);
        if c.is_none() || hex.len() != len {
            self.error(at, DiagnosticKind::Syntax, "malformed unicode escape");
        }
        c
    }

    fn lex_iriref(&mut self, start: Pos) -> Option<Tok> {
        let mut iri = String::new();
        loop {
            let here = self.pos;
            match self.peek() {
                Some('>') => {
                    self.bump();
                    return Some(Tok::IriRef(iri));
                }
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some('u') => iri.extend(self.lex_unicode_escape(4, here)),
                        Some('U') => iri.extend(self.lex_unicode_escape(8, here)),
                        _ => self.error(here, DiagnosticKind::Syntax, "invalid escape in IRI"),
                    }
                }
                Some(c) if !c.is_whitespace() && !matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    iri.push(c);
                    self.bump();
                }
                _ => {
                    self.error(start, DiagnosticKind::Syntax, "unterminated IRI reference");
                    return None;
                }
            }
        }
    }

    fn lex_string(&mut self, quote: char, start: Pos) -> Option<Tok> {
        let mut s = String::new();
        loop {
            let here = self.pos;
            match self.bump() {
                Some(c) if c == quote => return Some(Tok::Str(s)),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('b') => s.push('\u{8}'),
                    Some('f') => s.push('\u{c}'),
                    Some('u') => s.extend(self.lex_unicode_escape(4, here)),
                    Some('U') => s.extend(self.lex_unicode_escape(8, here)),
                    Some(c @ ('"' | '\'' | '\\')) => s.push(c),
                    _ => self.error(here, DiagnosticKind::Syntax, "invalid escape in string"),
                },
                Some('\n') | None => {
                    self.error(start, DiagnosticKind::Syntax, "unterminated string literal");
                    return None;
                }
                Some(c) => s.push(c),
            }
        }
    }
}

const UNSUPPORTED_WORDS: &[&str] = &[
    "AND", "OR", "NOT", "IMPORT", "CLOSED", "LITERAL", "NONLITERAL", "BNODE", "EXTENDS", "ABSTRACT",
    "RESTRICTS", "LENGTH", "MINLENGTH", "MAXLENGTH", "PATTERN", "MININCLUSIVE", "MINEXCLUSIVE",
    "MAXINCLUSIVE", "MAXEXCLUSIVE", "TOTALDIGITS", "FRACTIONDIGITS", "EXTERNAL",
];

fn is_unsupported_word(w: &str) -> bool {
    UNSUPPORTED_WORDS.iter().any(|u| u.eq_ignore_ascii_case(w))
}

struct RawConstraint {
    constraint: TripleConstraint,
    pred_pos: Pos,
    ref_pos: Option<Pos>,
}

struct RawShape {
    label: ShapeLabel,
    pos: Pos,
    extra: BTreeSet<Iri>,
    constraints: Vec<RawConstraint>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
    prefixes: PrefixMap,
    base: Option<String>,
    diags: Vec<ParseDiagnostic>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.idx + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx].1
    }

    fn advance(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error<T>(&mut self, at: Pos, kind: DiagnosticKind, message: impl Into<String>) -> PResult<T> {
        self.diags.push(ParseDiagnostic { line: at.line, column: at.column, message: message.into(), kind });
        Err(())
    }

    fn unexpected<T>(&mut self, wanted: &str) -> PResult<T> {
        let (tok, pos) = (self.peek().clone(), self.pos());
        if let Tok::Word(w) = &tok {
            if is_unsupported_word(w) {
                return self.error(pos, DiagnosticKind::UnsupportedFeature, format!("'{w}' is not supported"));
            }
        }
        if let Tok::Punct(c @ ('/' | '%' | '$' | '&' | '|' | '^' | '~' | '(' | '.')) = tok {
            return self.error(pos, DiagnosticKind::UnsupportedFeature, format!("'{c}' is not supported"));
        }
        self.error(pos, DiagnosticKind::Syntax, format!("expected {wanted}, found {}", tok.describe()))
    }

    fn expect_punct(&mut self, c: char) -> PResult<Pos> {
        if *self.peek() == Tok::Punct(c) {
            Ok(self.advance().1)
        } else {
            self.unexpected(&format!("'{c}'"))
        }
    }

    fn resolve_iriref(&self, raw: &str) -> String {
        match &self.base {
            Some(base) if !raw.contains(':') => format!("{base}{raw}"),
            _ => raw.to_owned(),
        }
    }

    fn make_iri(&mut self, text: String, at: Pos) -> PResult<Iri> {
        match Iri::new(text) {
            Ok(iri) => Ok(iri),
            Err(e) => self.error(at, DiagnosticKind::Syntax, e.to_string()),
        }
    }

    /// IRI reference or prefixed name.
    fn iri(&mut self, wanted: &str) -> PResult<Iri> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::IriRef(raw) => {
                self.advance();
                let resolved = self.resolve_iriref(&raw);
                self.make_iri(resolved, pos)
            }
            Tok::PName(p, l) => {
                self.advance();
                match self.prefixes.expand(&p, &l) {
                    Some(iri) => Ok(iri),
                    None => self.error(pos, DiagnosticKind::Syntax, format!("undeclared prefix '{p}:'")),
                }
            }
            _ => self.unexpected(wanted),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x.eq_ignore_ascii_case(w))
    }

    fn parse(mut self) -> (Option<Schema>, Vec<ParseDiagnostic>) {
        let mut shapes: Vec<RawShape> = Vec::new();
        let mut start: Option<(ShapeLabel, Pos)> = None;
        while *self.peek() != Tok::Eof {
            let before = self.idx;
            let res = if self.is_word("PREFIX") {
                self.prefix_decl()
            } else if self.is_word("BASE") {
                self.base_decl()
            } else if self.is_word("start") && *self.peek_at(1) == Tok::Punct('=') {
                self.start_decl().map(|s| start = Some(s))
            } else if matches!(self.peek(), Tok::IriRef(_) | Tok::PName(..)) {
                self.shape_decl().map(|s| shapes.push(s))
            } else {
                self.unexpected("a PREFIX declaration, start directive or shape declaration")
            };
            if res.is_err() {
                self.recover_top_level(before);
            }
        }

        let first_error_free = self.diags.is_empty();
        let schema = self.finish(shapes, start);
        if first_error_free && self.diags.is_empty() {
            (schema, self.diags)
        } else {
            (None, self.diags)
        }
    }

    fn recover_top_level(&mut self, before: usize) {
        if self.idx == before {
            self.advance();
        }
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Punct('{') => depth += 1,
                Tok::Punct('}') => {
                    self.advance();
                    if depth <= 1 {
                        return;
                    }
                    depth -= 1;
                    continue;
                }
                Tok::Word(w) if depth == 0 && (w.eq_ignore_ascii_case("PREFIX") || w == "start") => return,
                _ => {}
            }
            self.advance();
        }
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        self.advance();
        let pos = self.pos();
        let prefix = match self.peek().clone() {
            Tok::PName(p, l) if l.is_empty() => {
                self.advance();
                p
            }
            _ => return self.unexpected("a prefix name ending in ':'"),
        };
        let ns_pos = self.pos();
        let Tok::IriRef(ns) = self.peek().clone() else { return self.unexpected("a namespace IRI") };
        self.advance();
        let ns = self.resolve_iriref(&ns);
        let ns = self.make_iri(ns, ns_pos)?;
        let _ = pos;
        self.prefixes.insert(&prefix, ns);
        Ok(())
    }

    fn base_decl(&mut self) -> PResult<()> {
        self.advance();
        let Tok::IriRef(base) = self.peek().clone() else { return self.unexpected("a base IRI") };
        self.advance();
        self.base = Some(base);
        Ok(())
    }

    fn start_decl(&mut self) -> PResult<(ShapeLabel, Pos)> {
        self.advance();
        self.expect_punct('=')?;
        let pos = self.pos();
        if *self.peek() != Tok::At {
            return self.unexpected("'@' followed by a shape label");
        }
        self.advance();
        let label = self.label()?;
        Ok((label, pos))
    }

    fn label(&mut self) -> PResult<ShapeLabel> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::IriRef(raw) => {
                self.advance();
                if raw.is_empty() {
                    return self.error(pos, DiagnosticKind::Syntax, "empty shape label");
                }
                Ok(ShapeLabel::new(self.resolve_iriref(&raw)))
            }
            Tok::PName(..) => self.iri("a shape label").map(|iri| ShapeLabel::from(&iri)),
            _ => self.unexpected("a shape label"),
        }
    }

    fn shape_decl(&mut self) -> PResult<RawShape> {
        let pos = self.pos();
        let label = self.label()?;
        let mut extra = BTreeSet::new();
        loop {
            if self.is_word("EXTRA") {
                self.advance();
                let mut any = false;
                while matches!(self.peek(), Tok::IriRef(_) | Tok::PName(..)) || self.is_word("a") {
                    extra.insert(self.predicate()?);
                    any = true;
                }
                if !any {
                    return self.unexpected("at least one predicate after EXTRA");
                }
            } else if *self.peek() == Tok::Punct('{') {
                break;
            } else {
                return self.unexpected("'{' or EXTRA");
            }
        }
        let open = self.expect_punct('{')?;
        let mut constraints: Vec<RawConstraint> = Vec::new();
        let mut failed = false;
        loop {
            if *self.peek() == Tok::Punct('}') {
                self.advance();
                break;
            }
            if *self.peek() == Tok::Eof {
                return self.error(open, DiagnosticKind::Syntax, "unterminated shape body");
            }
            match self.triple_constraint() {
                Ok(c) => constraints.push(c),
                Err(()) => {
                    failed = true;
                    self.recover_in_body();
                    continue;
                }
            }
            match self.peek() {
                Tok::Punct(';') => {
                    self.advance();
                }
                Tok::Punct('}') => {}
                _ => {
                    failed = true;
                    let _: PResult<()> = self.unexpected("';' or '}'");
                    self.recover_in_body();
                }
            }
        }
        if failed {
            return Err(());
        }
        if constraints.is_empty() {
            return self.error(pos, DiagnosticKind::Syntax, format!("shape {label} has no constraints"));
        }
        Ok(RawShape { label, pos, extra, constraints })
    }

    fn recover_in_body(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Punct(';') if depth == 0 => {
                    self.advance();
                    return;
                }
                Tok::Punct('}') if depth == 0 => return,
                Tok::Punct('[' | '{' | '(') => depth += 1,
                Tok::Punct(']' | '}' | ')') => depth = depth.saturating_sub(1),
                _ => {}
            }
            self.advance();
        }
    }

    fn predicate(&mut self) -> PResult<Iri> {
        if self.is_word("a") {
            self.advance();
            return Ok(Iri::from_static(vocab::RDF_TYPE));
        }
        self.iri("a predicate")
    }

    fn triple_constraint(&mut self) -> PResult<RawConstraint> {
        let pred_pos = self.pos();
        let predicate = self.predicate()?;
        let node_pos = self.pos();
        let (node, ref_pos) = self.node_constraint()?;
        let _ = node_pos;
        let cardinality = self.cardinality()?;
        if let Tok::Word(w) = self.peek().clone() {
            if is_unsupported_word(&w) {
                let pos = self.pos();
                return self.error(pos, DiagnosticKind::UnsupportedFeature, format!("'{w}' is not supported"));
            }
        }
        Ok(RawConstraint { constraint: TripleConstraint::new(predicate, node, cardinality), pred_pos, ref_pos })
    }

    fn node_constraint(&mut self) -> PResult<(NodeConstraint, Option<Pos>)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Word(w) if w == "IRI" => {
                self.advance();
                Ok((NodeConstraint::NodeKindIri, None))
            }
            Tok::IriRef(_) | Tok::PName(..) => Ok((NodeConstraint::Datatype(self.iri("a datatype")?), None)),
            Tok::At => {
                self.advance();
                Ok((NodeConstraint::ShapeRef(self.label()?), Some(pos)))
            }
            Tok::Punct('[') => self.value_set().map(|v| (v, None)),
            Tok::Punct('{') => self.error(pos, DiagnosticKind::UnsupportedFeature, "inline shapes are not supported"),
            _ => self.unexpected("a node constraint"),
        }
    }

    fn value_set(&mut self) -> PResult<NodeConstraint> {
        let open = self.advance().1;
        let mut values: Vec<ValueSetItem> = Vec::new();
        loop {
            let pos = self.pos();
            let item = match self.peek().clone() {
                Tok::Punct(']') => {
                    self.advance();
                    break;
                }
                Tok::IriRef(_) | Tok::PName(..) => ValueSetItem::Iri(self.iri("a value")?),
                Tok::Str(s) => {
                    self.advance();
                    ValueSetItem::Literal(self.literal_suffix(s)?)
                }
                Tok::Number(n) => {
                    self.advance();
                    let dt = if n.contains(['e', 'E']) {
                        vocab::XSD_DOUBLE
                    } else if n.contains('.') {
                        vocab::XSD_DECIMAL
                    } else {
                        vocab::XSD_INTEGER
                    };
                    ValueSetItem::Literal(Literal::typed(n, Iri::from_static(dt)))
                }
                Tok::Word(w) if w == "true" || w == "false" => {
                    self.advance();
                    ValueSetItem::Literal(Literal::typed(w, Iri::from_static(vocab::XSD_BOOLEAN)))
                }
                Tok::Eof => return self.error(open, DiagnosticKind::Syntax, "unterminated value set"),
                _ => return self.unexpected("a value or ']'"),
            };
            if matches!(self.peek(), Tok::Punct('~')) {
                let p = self.pos();
                return self.error(p, DiagnosticKind::UnsupportedFeature, "value stems are not supported");
            }
            if values.contains(&item) {
                return self.error(pos, DiagnosticKind::Syntax, "duplicate value in value set");
            }
            values.push(item);
        }
        if values.is_empty() {
            return self.error(open, DiagnosticKind::Syntax, "empty value set");
        }
        Ok(NodeConstraint::ValueSet(values))
    }

    fn literal_suffix(&mut self, lexical: String) -> PResult<Literal> {
        match self.peek().clone() {
            Tok::LangTag(tag) => {
                self.advance();
                Ok(Literal { lexical, datatype: None, language: Some(tag) })
            }
            Tok::DoubleCaret => {
                self.advance();
                let dt = self.iri("a datatype IRI")?;
                Ok(Literal { lexical, datatype: Some(dt), language: None })
            }
            _ => Ok(Literal::string(lexical)),
        }
    }

    fn cardinality(&mut self) -> PResult<Cardinality> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Punct('?') => {
                self.advance();
                Ok(Cardinality::OPTIONAL)
            }
            Tok::Punct('*') => {
                self.advance();
                Ok(Cardinality::STAR)
            }
            Tok::Punct('+') => {
                self.advance();
                Ok(Cardinality::PLUS)
            }
            Tok::Punct('{') if matches!(self.peek_at(1), Tok::Number(_)) => {
                self.advance();
                let min = self.card_number()?;
                let max = match self.peek() {
                    Tok::Punct('}') => Max::Bounded(min),
                    Tok::Punct(',') => {
                        self.advance();
                        match self.peek() {
                            Tok::Punct('}') => Max::Unbounded,
                            Tok::Punct('*') => {
                                self.advance();
                                Max::Unbounded
                            }
                            _ => Max::Bounded(self.card_number()?),
                        }
                    }
                    _ => return self.unexpected("',' or '}'"),
                };
                self.expect_punct('}')?;
                match Cardinality::new(min, max) {
                    Ok(c) => Ok(c),
                    Err(e) => self.error(pos, DiagnosticKind::Syntax, e.to_string()),
                }
            }
            _ => Ok(Cardinality::ONE),
        }
    }

    fn card_number(&mut self) -> PResult<u32> {
        let pos = self.pos();
        if let Tok::Number(n) = self.peek().clone() {
            if let Ok(v) = n.parse::<u32>() {
                self.advance();
                return Ok(v);
            }
            return self.error(pos, DiagnosticKind::Syntax, format!("invalid repeat count {n}"));
        }
        self.unexpected("a repeat count")
    }

    fn finish(&mut self, shapes: Vec<RawShape>, start: Option<(ShapeLabel, Pos)>) -> Option<Schema> {
        if shapes.is_empty() {
            if self.diags.is_empty() {
                let _: PResult<()> = self.error(Pos { line: 1, column: 1 }, DiagnosticKind::Syntax, "no shape declarations");
            }
            return None;
        }
        let mut declared: HashMap<ShapeLabel, Pos> = HashMap::new();
        for s in &shapes {
            if declared.insert(s.label.clone(), s.pos).is_some() {
                let _: PResult<()> = self.error(s.pos, DiagnosticKind::Syntax, format!("shape {} declared twice", s.label));
            }
        }
        for s in &shapes {
            let mut seen: BTreeMap<&Iri, ()> = BTreeMap::new();
            for rc in &s.constraints {
                if seen.insert(&rc.constraint.predicate, ()).is_some() {
                    let _: PResult<()> = self.error(
                        rc.pred_pos,
                        DiagnosticKind::DuplicatePredicate,
                        format!("predicate {} repeated in shape {}", rc.constraint.predicate, s.label),
                    );
                }
                if let NodeConstraint::ShapeRef(target) = &rc.constraint.node {
                    if !declared.contains_key(target) {
                        let at = rc.ref_pos.unwrap_or(rc.pred_pos);
                        let _: PResult<()> =
                            self.error(at, DiagnosticKind::DanglingRef, format!("shape {target} is not declared"));
                    }
                }
            }
        }
        let (start_label, start_pos) = match start {
            Some(s) => s,
            None => (shapes[0].label.clone(), shapes[0].pos),
        };
        if !declared.contains_key(&start_label) {
            let _: PResult<()> =
                self.error(start_pos, DiagnosticKind::DanglingRef, format!("start shape {start_label} is not declared"));
        }
        if !self.diags.is_empty() {
            return None;
        }
        let shapes: Vec<Shape> = shapes
            .into_iter()
            .map(|s| Shape {
                label: s.label,
                extra: s.extra,
                constraints: s.constraints.into_iter().map(|c| c.constraint).collect(),
            })
            .collect();
        let start_shape = shapes.iter().find(|s| s.label == start_label).expect("start declared");
        let typing = start_shape.typing_classes_ordered();
        let focus = if typing.iter().any(|c| c.as_str() == start_label.as_str()) {
            Iri::new(start_label.as_str()).ok()
        } else {
            typing.first().cloned()
        }
        .or_else(|| Iri::new(start_label.as_str()).ok());
        let Some(focus) = focus else {
            let _: PResult<()> = self.error(start_pos, DiagnosticKind::Syntax, "cannot determine focus class");
            return None;
        };
        match Schema::new(std::mem::take(&mut self.prefixes), start_label, shapes, focus) {
            Ok(schema) => Some(schema),
            Err(e) => {
                let _: PResult<()> = self.error(start_pos, DiagnosticKind::Syntax, e.to_string());
                None
            }
        }
    }
}

/// Parses ShExC text. The focus class is the start label when the start
/// shape types its nodes with it, otherwise the first typing class of the
/// start shape, otherwise the start label itself.
pub fn parse_shexc(text: &str) -> Result<Schema, ParseError> {
    let (toks, mut diags) = Lexer::new(text).tokenize();
    let parser = Parser { toks, idx: 0, prefixes: PrefixMap::new(), base: None, diags: Vec::new() };
    let (schema, parse_diags) = parser.parse();
    diags.extend(parse_diags);
    diags.sort_by_key(|d| (d.line, d.column));
    diags.dedup();
    match schema {
        Some(s) if diags.is_empty() => Ok(s),
        _ => Err(ParseError { diagnostics: diags }),
    }
}

/// True when the text contains nothing but whitespace and comments.
pub fn is_blank_shexc(text: &str) -> bool {
    text.lines().all(|l| {
        let t = l.trim_start();
        t.is_empty() || t.starts_with('#')
    })
}

fn escape_iri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for c in iri.chars() {
        if matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out
}

fn write_iri(out: &mut String, iri: &str, prefixes: &PrefixMap) {
    match prefixes.compact(iri) {
        Some(c) => out.push_str(&c),
        None => {
            out.push('<');
            out.push_str(&escape_iri(iri));
            out.push('>');
        }
    }
}

fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_value(out: &mut String, v: &ValueSetItem, prefixes: &PrefixMap) {
    match v {
        ValueSetItem::Iri(iri) => write_iri(out, iri.as_str(), prefixes),
        ValueSetItem::Literal(lit) => {
            out.push_str(&escape_string(&lit.lexical));
            if let Some(lang) = &lit.language {
                out.push('@');
                out.push_str(lang);
            } else if let Some(dt) = &lit.datatype {
                out.push_str("^^");
                write_iri(out, dt.as_str(), prefixes);
            }
        }
    }
}

/// ShExC token for a cardinality; empty for exactly-one.
pub fn cardinality_token(c: &Cardinality) -> String {
    match (c.min(), c.max()) {
        (1, Max::Bounded(1)) => String::new(),
        (0, Max::Bounded(1)) => "?".to_owned(),
        (0, Max::Unbounded) => "*".to_owned(),
        (1, Max::Unbounded) => "+".to_owned(),
        (m, Max::Unbounded) => format!("{{{m},}}"),
        (m, Max::Bounded(n)) if m == n => format!("{{{m}}}"),
        (m, Max::Bounded(n)) => format!("{{{m},{n}}}"),
    }
}

fn label_prefixes(schema: &Schema) -> PrefixMap {
    schema.prefixes().clone()
}

/// Serializes the canonical form of `schema`. Fails only for schemas that
/// violate the model invariants (for instance [`Schema::empty`]).
pub fn serialize_shexc(schema: &Schema) -> Result<String, crate::ModelError> {
    schema.validate()?;
    let canon = canonicalize(schema);
    let prefixes = label_prefixes(&canon);
    let mut out = String::new();
    for (p, ns) in prefixes.iter() {
        let _ = writeln!(out, "PREFIX {p}: <{}>", escape_iri(ns.as_str()));
    }
    if !prefixes.is_empty() {
        out.push('\n');
    }
    out.push_str("start = @");
    write_iri(&mut out, canon.start_label().as_str(), &prefixes);
    out.push('\n');
    for shape in canon.shapes() {
        out.push('\n');
        write_iri(&mut out, shape.label.as_str(), &prefixes);
        if !shape.extra.is_empty() {
            out.push_str(" EXTRA");
            for p in &shape.extra {
                out.push(' ');
                write_iri(&mut out, p.as_str(), &prefixes);
            }
        }
        out.push_str(" {\n");
        let n = shape.constraints.len();
        for (i, c) in shape.constraints.iter().enumerate() {
            out.push_str("  ");
            write_iri(&mut out, c.predicate.as_str(), &prefixes);
            out.push(' ');
            match &c.node {
                NodeConstraint::NodeKindIri => out.push_str("IRI"),
                NodeConstraint::Datatype(dt) => write_iri(&mut out, dt.as_str(), &prefixes),
                NodeConstraint::ValueSet(values) => {
                    out.push('[');
                    for (j, v) in values.iter().enumerate() {
                        if j > 0 {
                            out.push(' ');
                        }
                        write_value(&mut out, v, &prefixes);
                    }
                    out.push(']');
                }
                NodeConstraint::ShapeRef(label) => {
                    out.push('@');
                    write_iri(&mut out, label.as_str(), &prefixes);
                }
            }
            let card = cardinality_token(&c.cardinality);
            if !card.is_empty() {
                out.push(' ');
                out.push_str(&card);
            }
            if i + 1 < n {
                out.push_str(" ;");
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }
    Ok(out)
}

fn value_json(v: &ValueSetItem) -> Value {
    match v {
        ValueSetItem::Iri(iri) => Value::String(iri.to_string()),
        ValueSetItem::Literal(lit) => {
            let mut m = serde_json::Map::new();
            m.insert("value".into(), Value::String(lit.lexical.clone()));
            if let Some(dt) = &lit.datatype {
                m.insert("type".into(), Value::String(dt.to_string()));
            }
            if let Some(lang) = &lit.language {
                m.insert("language".into(), Value::String(lang.clone()));
            }
            Value::Object(m)
        }
    }
}

fn node_json(nc: &NodeConstraint) -> Value {
    match nc {
        NodeConstraint::NodeKindIri => json!({"nodeKind": "iri"}),
        NodeConstraint::Datatype(dt) => json!({"datatype": dt.as_str()}),
        NodeConstraint::ValueSet(values) => json!({"values": values.iter().map(value_json).collect::<Vec<_>>()}),
        NodeConstraint::ShapeRef(label) => json!({"shapeRef": label.as_str()}),
    }
}

/// Canonical structured rendering with sorted keys and explicit bounds
/// (`-1` for unbounded). Shapes are listed start shape first.
pub fn to_canonical_json(schema: &Schema) -> String {
    let canon = canonicalize(schema);
    let prefixes: serde_json::Map<String, Value> =
        canon.prefixes().iter().map(|(p, ns)| (p.to_owned(), Value::String(ns.to_string()))).collect();
    let shapes: Vec<Value> = canon
        .shapes()
        .map(|s| {
            let constraints: Vec<Value> = s
                .constraints
                .iter()
                .map(|c| {
                    let max = match c.cardinality.max() {
                        Max::Bounded(m) => i64::from(m),
                        Max::Unbounded => -1,
                    };
                    let min = c.cardinality.min();
                    json!({
                        "predicate": c.predicate.as_str(),
                        "valueExpr": node_json(&c.node),
                        "min": min,
                        "max": max,
                    })
                })
                .collect();
            json!({
                "id": s.label.as_str(),
                "extra": s.extra.iter().map(Iri::as_str).collect::<Vec<_>>(),
                "constraints": constraints,
            })
        })
        .collect();
    let doc = json!({
        "type": "Schema",
        "focusClass": canon.focus_class().as_str(),
        "start": canon.start_label().as_str(),
        "prefixes": prefixes,
        "shapes": shapes,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const MUSEUM: &str = r#"PREFIX wd: <http://www.wikidata.org/entity/>
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>

<Museum> EXTRA wdt:P31 {
  wdt:P31 [wd:Q33506] ;
  wdt:P17 @<Country> ;
  wdt:P856 IRI * ;
  wdt:P1174 xsd:decimal *
}

<Country> EXTRA wdt:P31 {
  wdt:P31 [wd:Q6256]
}
"#;

    fn first_diag(text: &str) -> ParseDiagnostic {
        parse_shexc(text).unwrap_err().diagnostics.remove(0)
    }

    #[test]
    fn parses_museum() {
        let s = parse_shexc(MUSEUM).unwrap();
        assert_eq!(s.start_label().as_str(), "Museum");
        assert_eq!(s.focus_class().as_str(), "http://www.wikidata.org/entity/Q33506");
        assert_eq!(s.constraint_count(), 4);
        let p856 = s.start_shape().constraint(&Iri::new(format!("{}P856", vocab::WDT)).unwrap()).unwrap();
        assert_eq!(p856.cardinality, Cardinality::STAR);
        assert_eq!(p856.node, NodeConstraint::NodeKindIri);
        let p31 = &s.start_shape().constraints[0];
        assert_eq!(p31.cardinality, Cardinality::ONE);
    }

    #[test]
    fn cardinality_tokens() {
        let cases = [
            (Cardinality::ONE, ""),
            (Cardinality::OPTIONAL, "?"),
            (Cardinality::STAR, "*"),
            (Cardinality::PLUS, "+"),
            (Cardinality::at_least(2), "{2,}"),
            (Cardinality::bounded(3, 3).unwrap(), "{3}"),
            (Cardinality::bounded(0, 3).unwrap(), "{0,3}"),
        ];
        for (c, tok) in cases {
            assert_eq!(cardinality_token(&c), tok);
        }
    }

    #[test]
    fn serialize_then_parse_matches_canonical() {
        let s = parse_shexc(MUSEUM).unwrap();
        let text = serialize_shexc(&s).unwrap();
        let back = parse_shexc(&text).unwrap();
        assert_eq!(canonicalize(&back), canonicalize(&s));
        assert_eq!(serialize_shexc(&back).unwrap(), text);
    }

    #[test]
    fn canonical_json_bounds() {
        let s = parse_shexc(MUSEUM).unwrap();
        let j: Value = serde_json::from_str(&to_canonical_json(&s)).unwrap();
        let start = &j["shapes"][0];
        assert_eq!(start["constraints"].as_array().unwrap().len(), 4);
        let star = start["constraints"].as_array().unwrap().iter().find(|c| c["predicate"].as_str().unwrap().ends_with("P856")).unwrap();
        assert_eq!(star["min"], 0);
        assert_eq!(star["max"], -1);
    }

    #[test]
    fn rejects_unsupported_constructs() {
        let text = "PREFIX ex: <http://ex.org/>\nPREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n<S> {\n  ex:name xsd:string MINLENGTH 3\n}\n";
        let d = first_diag(text);
        assert_eq!(d.kind, DiagnosticKind::UnsupportedFeature);
        assert_eq!((d.line, d.column), (4, 22));

        let d = first_diag("IMPORT <http://ex.org/other>\n<S> { <p> IRI }");
        assert_eq!(d.kind, DiagnosticKind::UnsupportedFeature);

        let d = first_diag("<S> { <p> IRI OR <q> }");
        assert_eq!(d.kind, DiagnosticKind::UnsupportedFeature);

        let d = first_diag("<S> CLOSED { <p> IRI }");
        assert_eq!(d.kind, DiagnosticKind::UnsupportedFeature);
    }

    #[test]
    fn reports_duplicate_and_dangling() {
        let d = first_diag("<S> {\n  <p> IRI ;\n  <p> IRI *\n}");
        assert_eq!(d.kind, DiagnosticKind::DuplicatePredicate);
        assert_eq!((d.line, d.column), (3, 3));
        let d = first_diag("<S> {\n  <p> @<T>\n}");
        assert_eq!(d.kind, DiagnosticKind::DanglingRef);
        assert_eq!((d.line, d.column), (2, 7));
    }

    #[test]
    fn empty_shape_and_empty_input_rejected() {
        assert_eq!(first_diag("<X> { }").kind, DiagnosticKind::Syntax);
        let d = first_diag("# only a comment\n");
        assert_eq!((d.line, d.column), (1, 1));
        assert!(is_blank_shexc("# only a comment\n\n"));
    }

    #[test]
    fn literals_and_a_keyword() {
        let text = "PREFIX ex: <http://ex.org/>\nex:S {\n  a [ex:C] ;\n  ex:lang [\"x\"@en 'y' 5 2.5 true \"z\"^^ex:dt] {2,}\n}";
        let s = parse_shexc(text).unwrap();
        assert_eq!(s.start_shape().constraints[0].predicate.as_str(), vocab::RDF_TYPE);
        assert_eq!(s.focus_class().as_str(), "http://ex.org/C");
        let NodeConstraint::ValueSet(v) = &s.start_shape().constraints[1].node else { panic!() };
        assert_eq!(v.len(), 6);
        assert_eq!(s.start_shape().constraints[1].cardinality, Cardinality::at_least(2));
        let back = parse_shexc(&serialize_shexc(&s).unwrap()).unwrap();
        assert_eq!(canonicalize(&back), canonicalize(&s));
    }

    #[test]
    fn explicit_start_wins() {
        let s = parse_shexc("start = @<B>\n<A> { <p> IRI }\n<B> { <q> IRI }").unwrap();
        assert_eq!(s.start_label().as_str(), "B");
    }
}
