use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::query::ConjunctiveQuery;
use crate::rule::ExistentialRule;
use crate::term::{Atom, Term};

use super::{Document, Span, Statement, StatementKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Arity,
    ReservedName,
    DuplicateLabel,
    UnboundAnswer,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{at}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub at: Position,
    pub message: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, at: Position, message: impl Into<String>) -> Self {
        ParseError { kind, at, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Label(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Implies,
    Question,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Label(s) => write!(f, "`[{s}]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Implies => f.write_str("`:-`"),
            Tok::Question => f.write_str("`?`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |at, msg: String| ParseError::new(ParseErrorKind::Syntax, at, msg);
    while i < chars.len() {
        let c = chars[i];
        let at = Position { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push((Tok::LParen, at));
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push((Tok::RParen, at));
                advance(1, &mut i, &mut col);
            }
            ',' => {
                out.push((Tok::Comma, at));
                advance(1, &mut i, &mut col);
            }
            '.' => {
                out.push((Tok::Dot, at));
                advance(1, &mut i, &mut col);
            }
            '?' => {
                out.push((Tok::Question, at));
                advance(1, &mut i, &mut col);
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                out.push((Tok::Implies, at));
                advance(2, &mut i, &mut col);
            }
            '[' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j] != ']' && chars[j] != '\n' {
                    j += 1;
                }
                if chars.get(j) != Some(&']') {
                    return Err(syntax(at, "unterminated rule label".into()));
                }
                let label: String = chars[start..j].iter().collect::<String>().trim().to_owned();
                if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(syntax(at, format!("invalid rule label `{label}`")));
                }
                if label.starts_with("__") {
                    return Err(ParseError::new(
                        ParseErrorKind::ReservedName,
                        at,
                        format!("label `{label}` uses the reserved `__` prefix"),
                    ));
                }
                out.push((Tok::Label(label), at));
                advance(j + 1 - i, &mut i, &mut col);
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                if word.starts_with("__") {
                    return Err(ParseError::new(
                        ParseErrorKind::ReservedName,
                        at,
                        format!("`{word}` uses the reserved `__` prefix"),
                    ));
                }
                if !word.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(syntax(at, format!("identifier `{word}` must start with a letter")));
                }
                out.push((Tok::Ident(word), at));
            }
            other => return Err(syntax(at, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    pos: usize,
    end: Position,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> Position {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn error(&self, message: String) -> ParseError {
        ParseError::new(ParseErrorKind::Syntax, self.here(), message)
    }

    fn expect(&mut self, want: Tok) -> Result<Position, ParseError> {
        match self.toks.get(self.pos) {
            Some((t, p)) if *t == want => {
                let p = *p;
                self.pos += 1;
                Ok(p)
            }
            Some((t, _)) => Err(self.error(format!("expected {want}, found {t}"))),
            None => Err(self.error(format!("expected {want}, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.toks.get(self.pos) {
            Some((Tok::Ident(s), _)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some((t, _)) => Err(self.error(format!("expected an identifier, found {t}"))),
            None => Err(self.error("expected an identifier, found end of input".into())),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.ident()?;
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            Ok(Term::variable(name))
        } else {
            Ok(Term::constant(name))
        }
    }

    fn term_list(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(args);
                }
                _ => return Err(self.error("expected `,` or `)` in argument list".into())),
            }
        }
    }

    fn atom(&mut self) -> Result<(Atom, Position), ParseError> {
        let at = self.here();
        let pred = self.ident()?;
        if !pred.starts_with(|c: char| c.is_ascii_lowercase()) {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                at,
                format!("predicate `{pred}` must start with a lowercase letter"),
            ));
        }
        let args = self.term_list()?;
        if args.is_empty() {
            return Err(ParseError::new(ParseErrorKind::Syntax, at, format!("predicate `{pred}` needs arguments")));
        }
        Ok((Atom::new(pred, args), at))
    }

    fn atoms(&mut self) -> Result<Vec<(Atom, Position)>, ParseError> {
        let mut out = vec![self.atom()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            out.push(self.atom()?);
        }
        Ok(out)
    }
}

/// Parses a document of rules (`[label] head :- body.`), facts (`atoms.`)
/// and queries (`?(X,..) :- atoms.` or `? :- atoms.`).
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let toks = lex(text)?;
    let last_line = text.lines().count().max(1);
    let end = Position { line: last_line, column: text.lines().last().map_or(1, |l| l.chars().count() + 1) };
    let mut p = Parser { toks, pos: 0, end };
    let mut doc = Document::default();
    let mut arities: HashMap<String, (usize, Position)> = HashMap::new();
    let mut labels: HashSet<String> = HashSet::new();
    let mut unlabeled: Vec<usize> = Vec::new();

    let mut check_arity = |atoms: &[(Atom, Position)]| -> Result<(), ParseError> {
        for (a, at) in atoms {
            match arities.get(a.predicate()) {
                Some(&(n, first)) if n != a.arity() => {
                    return Err(ParseError::new(
                        ParseErrorKind::Arity,
                        *at,
                        format!("predicate `{}` used with arity {} but declared with arity {n} at {first}", a.predicate(), a.arity()),
                    ))
                }
                Some(_) => {}
                None => {
                    arities.insert(a.predicate().to_owned(), (a.arity(), *at));
                }
            }
        }
        Ok(())
    };
    let strip = |v: Vec<(Atom, Position)>| v.into_iter().map(|(a, _)| a).collect::<Vec<_>>();

    while p.pos < p.toks.len() {
        let start = p.here();
        let statement = match p.peek() {
            Some(Tok::Question) => {
                p.pos += 1;
                let answer = if p.peek() == Some(&Tok::LParen) { p.term_list()? } else { Vec::new() };
                p.expect(Tok::Implies)?;
                let body = p.atoms()?;
                check_arity(&body)?;
                let q = ConjunctiveQuery::new(strip(body), answer).map_err(|e| {
                    ParseError::new(ParseErrorKind::UnboundAnswer, start, e.to_string())
                })?;
                doc.queries.push(q);
                StatementKind::Query(doc.queries.len() - 1)
            }
            _ => {
                let label = match p.peek() {
                    Some(Tok::Label(l)) => {
                        let l = l.clone();
                        p.pos += 1;
                        if !labels.insert(l.clone()) {
                            return Err(ParseError::new(
                                ParseErrorKind::DuplicateLabel,
                                start,
                                format!("rule label `{l}` is used twice"),
                            ));
                        }
                        Some(l)
                    }
                    _ => None,
                };
                let head = p.atoms()?;
                check_arity(&head)?;
                if p.peek() == Some(&Tok::Implies) {
                    p.pos += 1;
                    let body = p.atoms()?;
                    check_arity(&body)?;
                    if label.is_none() {
                        unlabeled.push(doc.rules.len());
                    }
                    doc.rules.push(ExistentialRule::new(label.unwrap_or_default(), strip(body), strip(head)));
                    StatementKind::Rule(doc.rules.len() - 1)
                } else if label.is_some() {
                    return Err(p.error("a labelled statement must be a rule (`head :- body.`)".into()));
                } else {
                    doc.facts.push(strip(head));
                    StatementKind::Fact(doc.facts.len() - 1)
                }
            }
        };
        let end = p.expect(Tok::Dot)?;
        doc.statements.push(Statement { kind: statement, span: Span { start, end } });
    }

    let mut next = 0usize;
    for i in unlabeled {
        let label = loop {
            next += 1;
            let candidate = format!("r{next}");
            if !labels.contains(&candidate) {
                break candidate;
            }
        };
        labels.insert(label.clone());
        let r = &doc.rules[i];
        doc.rules[i] = ExistentialRule::new(label, r.body().to_vec(), r.head().to_vec());
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    #[test]
    fn rule_with_existential() {
        let d = parse_document("[r1] p(X,Y) :- q(X).").unwrap();
        let r = &d.rules[0];
        assert_eq!(r.label(), "r1");
        assert_eq!(r.body(), &[atom("q", &["X"])]);
        assert_eq!(r.head(), &[atom("p", &["X", "Y"])]);
        assert!(r.is_existential(&var("Y")));
    }

    #[test]
    fn boolean_query() {
        let d = parse_document("? :- p(U,V), p(W,V), r(U,W).").unwrap();
        assert_eq!(d.queries[0], cq(&[("p", &["U", "V"]), ("p", &["W", "V"]), ("r", &["U", "W"])]));
        let e = parse_document("?() :- p(U).").unwrap();
        assert!(e.queries[0].is_boolean());
    }

    #[test]
    fn query_with_answers() {
        let d = parse_document("?(X) :- p(X,Y).").unwrap();
        assert_eq!(d.queries[0].answer(), &[var("X")]);
        let err = parse_document("?(Z) :- p(X,Y).").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnboundAnswer);
    }

    #[test]
    fn fact_with_variable() {
        let d = parse_document("p(a,B).").unwrap();
        assert_eq!(d.facts[0], atoms(&[("p", &["a", "B"])]));
    }

    #[test]
    fn comments_and_spans() {
        let text = "% a comment\nq(a).\n\n[r] p(X,Y) :- q(X). % trailing\n";
        let d = parse_document(text).unwrap();
        assert_eq!(d.statements.len(), 2);
        assert_eq!(d.statements[1].span.start, Position { line: 4, column: 1 });
        assert_eq!(d.statements[1].span.end, Position { line: 4, column: 19 });
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_document("q(a).\np(a) :- q(a,b).").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
        assert_eq!(e.at, Position { line: 2, column: 9 });
        let e = parse_document("p(__ans).").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::ReservedName);
        let e = parse_document("p(a)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        let e = parse_document("P(a).").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        let e = parse_document("[r] p(X) :- q(X). [r] s(X) :- q(X).").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateLabel);
    }

    #[test]
    fn unlabeled_rules_get_unused_labels() {
        let d = parse_document("[r1] p(X) :- q(X). s(X) :- p(X). t(X) :- s(X).").unwrap();
        let labels: Vec<&str> = d.rules.iter().map(|r| r.label()).collect();
        assert_eq!(labels, vec!["r1", "r2", "r3"]);
    }
}
