//! Recursive-descent parser with per-item error recovery.

use std::collections::HashMap;

use super::lexer::{lex, Comment, Tok, Token};
use super::{ParseError, ParseErrorCode, SourceSpan};
use crate::model::{
    BasicEvent, Decision, Gate, GateKind, Identifier, InfluenceEdge, ModelDoc, ModuleDef,
    ModuleInstance, ProbabilitySpec,
};

const ITEM_KEYWORDS: &[&str] =
    &["model", "event", "gate", "decision", "influence", "module", "instance", "top", "output"];

/// Parse a whole model. On failure every recoverable error is returned,
/// sorted by position, and no document is produced.
pub fn parse(src: &str) -> Result<ModelDoc, Vec<ParseError>> {
    let lexed = lex(src);
    let mut parser = Parser { tokens: lexed.tokens, comments: lexed.comments, pos: 0, errors: Vec::new() };
    let doc = parser.model();
    if parser.errors.is_empty() {
        Ok(doc)
    } else {
        let mut errors = parser.errors;
        errors.sort_by(|a, b| a.span.cmp(&b.span));
        Err(errors)
    }
}

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Module,
}

enum Item {
    Event(BasicEvent),
    Gate(Gate),
    Decision(Decision),
    Influence(InfluenceEdge),
    Module(ModuleDef),
    Instance(ModuleInstance),
    Top(Identifier),
}

/// Declared names of one scope, with where they were declared.
#[derive(Default)]
struct Names {
    nodes: HashMap<Identifier, SourceSpan>,
    modules: HashMap<Identifier, SourceSpan>,
    influences: HashMap<(Identifier, Identifier), SourceSpan>,
    top: Option<SourceSpan>,
}

struct Parser {
    tokens: Vec<Token>,
    comments: Vec<Vec<Comment>>,
    pos: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn token(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek(&self) -> &Tok {
        &self.token().tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn error_here(&self, expected: impl Into<String>) -> ParseError {
        let t = self.token();
        ParseError {
            code: ParseErrorCode::Syntax,
            span: t.span,
            expected: expected.into(),
            found: t.tok.describe(),
            related: None,
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Token> {
        if self.at_word(w) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("`{w}`")))
        }
    }

    fn expect(&mut self, want: Tok) -> PResult<Token> {
        if *self.peek() == want {
            Ok(self.bump())
        } else {
            Err(self.error_here(want.describe()))
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match *self.peek() {
            Tok::Number(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error_here("number")),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error_here("string")),
        }
    }

    fn id_ref(&mut self) -> PResult<(Identifier, SourceSpan)> {
        let t = self.token().clone();
        match &t.tok {
            Tok::Word(w) => match Identifier::new(w.as_str()) {
                Ok(id) => {
                    self.bump();
                    Ok((id, t.span))
                }
                Err(_) => Err(ParseError {
                    code: ParseErrorCode::InvalidIdentifier,
                    span: t.span,
                    expected: "identifier matching [a-z][a-z0-9_]*".into(),
                    found: t.tok.describe(),
                    related: None,
                }),
            },
            _ => Err(self.error_here("identifier")),
        }
    }

    fn id_decl(&mut self) -> PResult<(Identifier, SourceSpan)> {
        let (id, span) = self.id_ref()?;
        if id.is_simple() {
            Ok((id, span))
        } else {
            Err(ParseError {
                code: ParseErrorCode::InvalidIdentifier,
                span,
                expected: "undotted identifier in a declaration".into(),
                found: format!("`{id}`"),
                related: None,
            })
        }
    }

    fn label(&mut self) -> PResult<Option<String>> {
        if self.at_word("label") {
            self.bump();
            Ok(Some(self.string()?))
        } else {
            Ok(None)
        }
    }

    fn take_comments(&mut self, idx: usize, trailing_only: bool) -> Vec<String> {
        let Some(slot) = self.comments.get_mut(idx) else { return Vec::new() };
        let (take, keep): (Vec<Comment>, Vec<Comment>) =
            std::mem::take(slot).into_iter().partition(|c| !trailing_only || c.trailing);
        *slot = keep;
        take.into_iter().map(|c| c.text).collect()
    }

    /// Comments inside `[start, pos)` not claimed by a nested item, plus
    /// comments trailing the last token on its line.
    fn finish_notes(&mut self, start: usize, notes: &mut Vec<String>) {
        for i in start + 1..self.pos {
            let c = self.take_comments(i, false);
            notes.extend(c);
        }
        let pos = self.pos;
        notes.extend(self.take_comments(pos, true));
    }

    fn at_line_start(&self) -> bool {
        self.pos == 0 || self.tokens[self.pos - 1].end_line != self.token().span.line
    }

    /// Rewind to the start of a failed item and skip to the next plausible
    /// item start, keeping `{ }` balanced. Item keywords at the start of a
    /// line end the skip unless we are inside a module body.
    fn recover_from(&mut self, start: usize) {
        let module = self.pos > start && matches!(&self.tokens[start].tok, Tok::Word(w) if w == "module");
        self.pos = start;
        self.bump();
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => return,
                Tok::RBrace => {
                    depth -= 1;
                    if module && depth == 0 {
                        self.bump();
                        return;
                    }
                }
                Tok::Word(w)
                    if (!module || depth == 0) && self.at_line_start() && ITEM_KEYWORDS.contains(&w.as_str()) =>
                {
                    return
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn model(&mut self) -> ModelDoc {
        let mut doc = ModelDoc::default();
        let mut notes = self.take_comments(0, false);
        match self.header() {
            Ok(name) => doc.name = name,
            Err(e) => {
                self.errors.push(e);
                let at_item = matches!(self.peek(), Tok::Word(w) if ITEM_KEYWORDS.contains(&w.as_str()));
                if !at_item {
                    let here = self.pos;
                    self.recover_from(here);
                }
            }
        }
        self.finish_notes(0, &mut notes);
        doc.notes = notes;

        let mut names = Names::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::RBrace => {
                    let e = self.error_here("item");
                    self.errors.push(e);
                    self.bump();
                }
                _ => {
                    let start = self.pos;
                    match self.item(Ctx::Top) {
                        Ok((item, span, notes)) => self.insert_top(&mut doc, &mut names, item, span, notes),
                        Err(e) => {
                            self.errors.push(e);
                            self.recover_from(start);
                        }
                    }
                }
            }
        }
        let eof = self.pos;
        doc.notes.extend(self.take_comments(eof, false));
        doc
    }

    fn header(&mut self) -> PResult<String> {
        self.expect_word("model")?;
        self.string()
    }

    /// Parses one item. Returns the item, the span of its identifier and
    /// its notes.
    fn item(&mut self, ctx: Ctx) -> PResult<(Item, SourceSpan, Vec<String>)> {
        let start = self.pos;
        let mut notes = self.take_comments(start, false);
        let keyword = match self.peek() {
            Tok::Word(w) => w.clone(),
            _ => return Err(self.error_here(item_expectation(ctx))),
        };
        let misplaced = |p: &Parser, what: &str| ParseError {
            code: ParseErrorCode::Misplaced,
            span: p.token().span,
            expected: item_expectation(ctx).into(),
            found: format!("{what} inside a module"),
            related: None,
        };
        let (item, span) = match keyword.as_str() {
            "event" => self.event()?,
            "gate" => self.gate()?,
            "decision" if ctx == Ctx::Top => self.decision()?,
            "influence" => self.influence()?,
            "module" if ctx == Ctx::Top => {
                let (def, span) = self.module()?;
                (Item::Module(def), span)
            }
            "instance" => self.instance()?,
            "top" if ctx == Ctx::Top => {
                let kw = self.bump();
                self.expect(Tok::Eq)?;
                let (id, _) = self.id_ref()?;
                (Item::Top(id), kw.span)
            }
            "decision" | "module" | "top" => return Err(misplaced(self, &keyword)),
            _ => return Err(self.error_here(item_expectation(ctx))),
        };
        self.finish_notes(start, &mut notes);
        Ok((item, span, notes))
    }

    fn event(&mut self) -> PResult<(Item, SourceSpan)> {
        self.expect_word("event")?;
        let (id, span) = self.id_decl()?;
        let label = self.label()?;
        self.expect(Tok::LBrace)?;
        self.expect_word("p")?;
        let prob = match self.peek() {
            Tok::Eq => {
                self.bump();
                ProbabilitySpec::Point { p: self.number()? }
            }
            Tok::Tilde => {
                self.bump();
                let beta = self.at_word("beta");
                if !beta && !self.at_word("uniform") {
                    return Err(self.error_here("`beta` or `uniform`"));
                }
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.number()?;
                self.expect(Tok::Comma)?;
                let b = self.number()?;
                self.expect(Tok::RParen)?;
                if beta {
                    ProbabilitySpec::Beta { alpha: a, beta: b }
                } else {
                    ProbabilitySpec::Uniform { lo: a, hi: b }
                }
            }
            _ => return Err(self.error_here("`=` or `~`")),
        };
        self.expect(Tok::RBrace)?;
        Ok((Item::Event(BasicEvent { id, label, prob, notes: vec![] }), span))
    }

    fn gate(&mut self) -> PResult<(Item, SourceSpan)> {
        let kw = self.expect_word("gate")?;
        let (id, span) = self.id_decl()?;
        let label = self.label()?;
        self.expect(Tok::Eq)?;
        let kind = match self.peek() {
            Tok::Word(w) if w == "AND" => GateKind::And,
            Tok::Word(w) if w == "OR" => GateKind::Or,
            Tok::Word(w) if w == "NOT" => GateKind::Not,
            Tok::Word(w) if w == "ANDOR" => GateKind::AndOr { w: f64::NAN },
            _ => return Err(self.error_here("`AND`, `OR`, `NOT` or `ANDOR`")),
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let kind = match kind {
            GateKind::AndOr { .. } => {
                self.expect_word("w")?;
                self.expect(Tok::Eq)?;
                let w = self.number()?;
                self.expect(Tok::Semi)?;
                GateKind::AndOr { w }
            }
            k => k,
        };
        let mut children = vec![self.id_ref()?.0];
        while *self.peek() == Tok::Comma {
            self.bump();
            children.push(self.id_ref()?.0);
        }
        let close = self.expect(Tok::RParen)?;
        if !kind.arity_ok(children.len()) {
            let length = if close.span.line == kw.span.line {
                close.span.column + close.span.length - kw.span.column
            } else {
                kw.span.length
            };
            self.errors.push(ParseError {
                code: ParseErrorCode::Arity,
                span: SourceSpan { length, ..kw.span },
                expected: format!("{} gate with {}", kind.name(), kind.arity_rule()),
                found: format!("{} children", children.len()),
                related: None,
            });
        }
        Ok((Item::Gate(Gate { id, label, kind, children, notes: vec![] }), span))
    }

    fn decision(&mut self) -> PResult<(Item, SourceSpan)> {
        self.expect_word("decision")?;
        let (id, span) = self.id_decl()?;
        let label = self.label()?;
        let cost = if self.at_word("cost") {
            self.bump();
            self.expect(Tok::Eq)?;
            Some(self.number()?)
        } else {
            None
        };
        Ok((Item::Decision(Decision { id, label, cost, notes: vec![] }), span))
    }

    fn influence(&mut self) -> PResult<(Item, SourceSpan)> {
        self.expect_word("influence")?;
        let (decision, span) = self.id_ref()?;
        self.expect(Tok::Arrow)?;
        let (target, _) = self.id_ref()?;
        self.expect(Tok::LBrace)?;
        self.expect_word("factor")?;
        self.expect(Tok::Eq)?;
        let factor = self.number()?;
        self.expect(Tok::RBrace)?;
        Ok((Item::Influence(InfluenceEdge { decision, target, factor, notes: vec![] }), span))
    }

    fn instance(&mut self) -> PResult<(Item, SourceSpan)> {
        self.expect_word("instance")?;
        let (id, span) = self.id_decl()?;
        self.expect(Tok::Eq)?;
        let (def, _) = self.id_decl()?;
        Ok((Item::Instance(ModuleInstance { id, def, notes: vec![] }), span))
    }

    fn module(&mut self) -> PResult<(ModuleDef, SourceSpan)> {
        self.expect_word("module")?;
        let (id, span) = self.id_decl()?;
        self.expect(Tok::LBrace)?;
        let placeholder = Identifier::new("out").expect("valid");
        let mut def = ModuleDef::new(id, placeholder);
        let mut names = Names::default();
        loop {
            match self.peek() {
                Tok::Eof => return Err(self.error_here("`output = <id>` and `}`")),
                Tok::RBrace => return Err(self.error_here("`output = <id>` before `}`")),
                Tok::Word(w) if w == "output" => {
                    let start = self.pos;
                    self.bump();
                    self.expect(Tok::Eq)?;
                    let (out, _) = self.id_decl()?;
                    def.output = out;
                    self.expect(Tok::RBrace)?;
                    let mut notes = Vec::new();
                    self.finish_notes(start, &mut notes);
                    def.notes.extend(notes);
                    break;
                }
                _ => {
                    let start = self.pos;
                    match self.item(Ctx::Module) {
                        Ok((item, span, notes)) => self.insert_module(&mut def, &mut names, item, span, notes),
                        Err(e) => {
                            self.errors.push(e);
                            self.recover_from(start);
                        }
                    }
                }
            }
        }
        Ok((def, span))
    }

    fn duplicate(&mut self, what: String, span: SourceSpan, first: SourceSpan) {
        self.errors.push(ParseError {
            code: ParseErrorCode::DuplicateId,
            span,
            expected: "unique identifier".into(),
            found: format!("duplicate {what} (first declared at {first})"),
            related: Some(first),
        });
    }

    fn claim_node(&mut self, names: &mut Names, id: &Identifier, span: SourceSpan) -> bool {
        if let Some(&first) = names.nodes.get(id) {
            self.duplicate(format!("`{id}`"), span, first);
            false
        } else {
            names.nodes.insert(id.clone(), span);
            true
        }
    }

    fn claim_influence(&mut self, names: &mut Names, edge: &InfluenceEdge, span: SourceSpan) -> bool {
        let key = (edge.decision.clone(), edge.target.clone());
        if let Some(&first) = names.influences.get(&key) {
            self.duplicate(format!("influence `{} -> {}`", edge.decision, edge.target), span, first);
            false
        } else {
            names.influences.insert(key, span);
            true
        }
    }

    fn insert_top(&mut self, doc: &mut ModelDoc, names: &mut Names, item: Item, span: SourceSpan, notes: Vec<String>) {
        match item {
            Item::Event(mut e) => {
                if self.claim_node(names, &e.id, span) {
                    e.notes = notes;
                    doc.events.insert(e.id.clone(), e);
                }
            }
            Item::Gate(mut g) => {
                if self.claim_node(names, &g.id, span) {
                    g.notes = notes;
                    doc.gates.insert(g.id.clone(), g);
                }
            }
            Item::Decision(mut d) => {
                if self.claim_node(names, &d.id, span) {
                    d.notes = notes;
                    doc.decisions.insert(d.id.clone(), d);
                }
            }
            Item::Instance(mut i) => {
                if self.claim_node(names, &i.id, span) {
                    i.notes = notes;
                    doc.instances.insert(i.id.clone(), i);
                }
            }
            Item::Influence(mut e) => {
                if self.claim_influence(names, &e, span) {
                    e.notes = notes;
                    doc.influences.insert((e.decision.clone(), e.target.clone()), e);
                }
            }
            Item::Module(mut m) => {
                if let Some(&first) = names.modules.get(&m.id) {
                    self.duplicate(format!("module `{}`", m.id), span, first);
                } else {
                    names.modules.insert(m.id.clone(), span);
                    let mut all = notes;
                    all.append(&mut m.notes);
                    m.notes = all;
                    doc.modules.insert(m.id.clone(), m);
                }
            }
            Item::Top(id) => {
                if let Some(first) = names.top {
                    self.duplicate("`top`".into(), span, first);
                } else {
                    names.top = Some(span);
                    doc.top = Some(id);
                    doc.notes.extend(notes);
                }
            }
        }
    }

    fn insert_module(&mut self, def: &mut ModuleDef, names: &mut Names, item: Item, span: SourceSpan, notes: Vec<String>) {
        match item {
            Item::Event(mut e) => {
                if self.claim_node(names, &e.id, span) {
                    e.notes = notes;
                    def.events.insert(e.id.clone(), e);
                }
            }
            Item::Gate(mut g) => {
                if self.claim_node(names, &g.id, span) {
                    g.notes = notes;
                    def.gates.insert(g.id.clone(), g);
                }
            }
            Item::Instance(mut i) => {
                if self.claim_node(names, &i.id, span) {
                    i.notes = notes;
                    def.instances.insert(i.id.clone(), i);
                }
            }
            Item::Influence(mut e) => {
                if self.claim_influence(names, &e, span) {
                    e.notes = notes;
                    def.influences.insert((e.decision.clone(), e.target.clone()), e);
                }
            }
            Item::Decision(_) | Item::Module(_) | Item::Top(_) => unreachable!("rejected by item()"),
        }
    }
}

fn item_expectation(ctx: Ctx) -> &'static str {
    match ctx {
        Ctx::Top => "item (event, gate, decision, influence, module, instance or top)",
        Ctx::Module => "module item (event, gate, influence, instance or output)",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model \"m\"\nevent a { p = 0.2 }\nevent b { p = 0.3 }\ngate t = OR(a, b)\ntop = t";

    #[test]
    fn minimal_model() {
        let doc = parse(MINIMAL).unwrap();
        assert_eq!(doc.name, "m");
        assert_eq!(doc.events.len(), 2);
        assert_eq!(doc.gates.len(), 1);
        assert_eq!(doc.top.as_ref().unwrap().as_str(), "t");
        let t = doc.gates.values().next().unwrap();
        assert_eq!(t.kind, GateKind::Or);
    }

    #[test]
    fn and_with_one_child_is_an_arity_error_at_the_gate() {
        let src = "model \"m\"\nevent a { p = 0.2 }\ngate t = AND(a)\ntop = t\n";
        let errs = parse(src).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ParseErrorCode::Arity);
        assert_eq!(errs[0].span, SourceSpan { line: 3, column: 1, length: 15 });
        assert_eq!(errs[0].render("m.risk"), "m.risk:3:1: expected AND gate with at least 2 children, found 1 children");
    }

    #[test]
    fn duplicate_id_reports_both_spans() {
        let src = "model \"m\"\nevent a { p = 0.2 }\ngate a = OR(b, c)\n";
        let errs = parse(src).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ParseErrorCode::DuplicateId);
        assert_eq!(errs[0].span.line, 3);
        assert_eq!(errs[0].related, Some(SourceSpan { line: 2, column: 7, length: 1 }));
    }

    #[test]
    fn several_errors_in_one_pass() {
        let src = "model \"m\"\nevent a { p = }\nevent b { p = 0.3 }\ngate t = XOR(a, b)\nevent c { q = 1 }\ntop = t\n";
        let errs = parse(src).unwrap_err();
        let lines: Vec<usize> = errs.iter().map(|e| e.span.line).collect();
        assert_eq!(lines, vec![2, 4, 5]);
        assert_eq!(errs[0].to_string(), "2:15: expected number, found `}`");
    }

    #[test]
    fn andor_and_distributions() {
        let src = "model \"m\"\nevent a { p ~ beta(2, 3) }\nevent b label \"B \\\"q\\\"\" { p ~ uniform(0.1, 0.4) }\ngate u = ANDOR(w = 0.25; a, b)\ntop = u\n";
        let doc = parse(src).unwrap();
        let a = &doc.events[&"a".parse().unwrap()];
        assert_eq!(a.prob, ProbabilitySpec::Beta { alpha: 2.0, beta: 3.0 });
        let b = &doc.events[&"b".parse().unwrap()];
        assert_eq!(b.label.as_deref(), Some("B \"q\""));
        assert_eq!(doc.gates.values().next().unwrap().kind, GateKind::AndOr { w: 0.25 });
    }

    #[test]
    fn modules_and_notes() {
        let src = "# header\nmodel \"m\"\ndecision d # why\n# y note\nmodule y {\n  # leaf note\n  event l1 { p = 0.5 }\n  event l2 { p = 0.5 }\n  gate g = OR(l1, l2)\n  influence d -> l1 { factor = 0.5 }\n  output = g\n}\ninstance i = y\ntop = i.out\n# tail\n";
        let doc = parse(src).unwrap();
        assert_eq!(doc.notes, vec!["header", "tail"]);
        let d = &doc.decisions[&"d".parse().unwrap()];
        assert_eq!(d.notes, vec!["why"]);
        let y = &doc.modules[&"y".parse().unwrap()];
        assert_eq!(y.notes, vec!["y note"]);
        assert_eq!(y.events[&"l1".parse().unwrap()].notes, vec!["leaf note"]);
        assert_eq!(y.output.as_str(), "g");
        assert_eq!(doc.top.as_ref().unwrap().as_str(), "i.out");
    }

    #[test]
    fn misplaced_items() {
        let src = "model \"m\"\nmodule y {\n  decision d\n  event a { p = 0.1 }\n  output = a\n}\n";
        let errs = parse(src).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ParseErrorCode::Misplaced);
        assert!(parse("model \"m\"\noutput = a\n").is_err());
    }

    #[test]
    fn module_without_output() {
        let errs = parse("model \"m\"\nmodule y {\n  event a { p = 0.1 }\n}\n").unwrap_err();
        assert!(errs[0].expected.contains("output"));
    }

    #[test]
    fn dotted_declaration_rejected() {
        let errs = parse("model \"m\"\nevent a.b { p = 0.1 }\n").unwrap_err();
        assert_eq!(errs[0].code, ParseErrorCode::InvalidIdentifier);
        let errs = parse("model \"m\"\nevent Abc { p = 0.1 }\n").unwrap_err();
        assert_eq!(errs[0].code, ParseErrorCode::InvalidIdentifier);
    }

    #[test]
    fn duplicate_top_and_influence() {
        let src = "model \"m\"\ndecision d\nevent a { p = 0.1 }\ninfluence d -> a { factor = 0.5 }\ninfluence d -> a { factor = 0.4 }\ntop = a\ntop = a\n";
        let errs = parse(src).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|e| e.code == ParseErrorCode::DuplicateId && e.related.is_some()));
    }

    #[test]
    fn missing_header() {
        let errs = parse("event a { p = 0.1 }\n").unwrap_err();
        assert_eq!(errs[0].expected, "`model`");
        assert!(parse("").is_err());
    }

    #[test]
    fn invalid_utf8() {
        let errs = super::super::parse_bytes(b"model \"m\"\n\xff").unwrap_err();
        assert_eq!(errs[0].code, ParseErrorCode::InvalidUtf8);
        assert_eq!((errs[0].span.line, errs[0].span.column), (2, 1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn check_spans(src: &str, errs: &[ParseError]) {
            let lines: Vec<&str> = src.split('\n').collect();
            for e in errs {
                assert!(e.span.line >= 1 && e.span.column >= 1);
                assert!(e.span.line <= lines.len(), "{e} outside {src:?}");
                let len = lines[e.span.line - 1].chars().count();
                assert!(e.span.column <= len + 1, "{e} outside {src:?}");
            }
        }

        proptest! {
            #[test]
            fn parse_is_total(src in any::<String>()) {
                if let Err(errs) = parse(&src) {
                    prop_assert!(!errs.is_empty());
                    check_spans(&src, &errs);
                }
            }

            #[test]
            fn parse_is_total_on_near_miss_input(
                parts in proptest::collection::vec(
                    prop_oneof![
                        Just("model"), Just("\"m\""), Just("event"), Just("gate"), Just("a"), Just("b.out"),
                        Just("{"), Just("}"), Just("("), Just(")"), Just("="), Just("~"), Just("p"),
                        Just("0.5"), Just("-1"), Just(","), Just(";"), Just("->"), Just("AND"), Just("ANDOR"),
                        Just("module"), Just("output"), Just("instance"), Just("top"), Just("\n"), Just("# c\n"),
                        Just("beta"), Just("w"), Just("decision"), Just("influence"), Just("factor"),
                    ],
                    0..40,
                )
            ) {
                let src = parts.join(" ");
                if let Err(errs) = parse(&src) {
                    check_spans(&src, &errs);
                }
            }

            #[test]
            fn parse_bytes_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
                let _ = super::super::super::parse_bytes(&bytes);
            }
        }
    }
}
