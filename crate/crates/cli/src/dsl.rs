//! The diagram DSL: object/classical/box declarations and one `main`
//! term, with `;` as diagram-order composition (left first), `*` as
//! tensor and `dg(…)` as dagger.
//!
//! ```text
//! object A dim 3;
//! classical X dim 2;
//! box f : A -> X * A = "f.json";
//! main = delta ; (id[X] * eps) ;
//! ```

use dcnet::object::{ClassicalObject, Factor, ObjectType};
use dcnet::term::{Term, TermError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: undeclared name `{name}`")]
    Undeclared {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: {source}")]
    Type {
        line: usize,
        col: usize,
        source: TermError,
    },
}

pub type DslResult<T> = Result<T, DslError>;

/// A parsed program: declarations plus the main term.
#[derive(Debug)]
pub struct DslProgram {
    pub objects: BTreeMap<String, Factor>,
    pub boxes: BTreeMap<String, BoxDecl>,
    pub main: Term,
}

#[derive(Debug, Clone)]
pub struct BoxDecl {
    pub dom: ObjectType,
    pub cod: ObjectType,
    pub path: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Str(String),
    Semi,
    Colon,
    Eq,
    Star,
    Arrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> DslResult<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        let bump = |ch: char, line: &mut usize, col: &mut usize| {
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                chars.next();
                bump(c, &mut line, &mut col);
            }
            '#' => {
                // comment to end of line
                for ch in chars.by_ref() {
                    bump(ch, &mut line, &mut col);
                    if ch == '\n' {
                        break;
                    }
                }
            }
            ';' | ':' | '=' | '*' | '(' | ')' | '[' | ']' | ',' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let tok = match c {
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    '*' => Tok::Star,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    _ => Tok::Comma,
                };
                out.push(Spanned {
                    tok,
                    line: l0,
                    col: c0,
                });
            }
            '-' => {
                chars.next();
                bump('-', &mut line, &mut col);
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        bump('>', &mut line, &mut col);
                        out.push(Spanned {
                            tok: Tok::Arrow,
                            line: l0,
                            col: c0,
                        });
                    }
                    _ => {
                        return Err(DslError::Syntax {
                            line: l0,
                            col: c0,
                            msg: "expected `->`".into(),
                        })
                    }
                }
            }
            '"' => {
                chars.next();
                bump('"', &mut line, &mut col);
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            bump('"', &mut line, &mut col);
                            break;
                        }
                        Some(ch) => {
                            bump(ch, &mut line, &mut col);
                            s.push(ch);
                        }
                        None => {
                            return Err(DslError::Syntax {
                                line: l0,
                                col: c0,
                                msg: "unterminated string".into(),
                            })
                        }
                    }
                }
                out.push(Spanned {
                    tok: Tok::Str(s),
                    line: l0,
                    col: c0,
                });
            }
            _ if c.is_ascii_digit() => {
                let mut n = 0usize;
                while let Some(&d) = chars.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n * 10 + v as usize;
                        chars.next();
                        bump(d, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Int(n),
                    line: l0,
                    col: c0,
                });
            }
            _ if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        bump(d, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line: l0,
                    col: c0,
                });
            }
            other => {
                return Err(DslError::Syntax {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    objects: BTreeMap<String, Factor>,
    boxes: BTreeMap<String, BoxDecl>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn peek2(&self) -> Option<&Spanned> {
        self.toks.get(self.pos + 1)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or((0, 0), |s| (s.line, s.col))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> DslResult<T> {
        let (line, col) = self.here();
        Err(DslError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> DslResult<Spanned> {
        match self.next() {
            Some(s) if s.tok == tok => Ok(s),
            Some(s) => Err(DslError::Syntax {
                line: s.line,
                col: s.col,
                msg: format!("expected {what}, found {:?}", s.tok),
            }),
            None => Err(DslError::Syntax {
                line: 0,
                col: 0,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn ident(&mut self, what: &str) -> DslResult<(String, usize, usize)> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => Ok((s, line, col)),
            Some(s) => Err(DslError::Syntax {
                line: s.line,
                col: s.col,
                msg: format!("expected {what}, found {:?}", s.tok),
            }),
            None => Err(DslError::Syntax {
                line: 0,
                col: 0,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn lookup(&self, name: &str, line: usize, col: usize) -> DslResult<Factor> {
        self.objects
            .get(name)
            .cloned()
            .ok_or_else(|| DslError::Undeclared {
                line,
                col,
                name: name.into(),
            })
    }

    /// The unique classical object, for bare `delta`/`eps`/`eta`/`cap`.
    fn sole_classical(&self, line: usize, col: usize, gen: &str) -> DslResult<ClassicalObject> {
        let mut classical = self.objects.values().filter_map(Factor::as_classical);
        match (classical.next(), classical.next()) {
            (Some(x), None) => Ok(x),
            (None, _) => Err(DslError::Undeclared {
                line,
                col,
                name: format!("{gen} (no classical object declared)"),
            }),
            (Some(_), Some(_)) => Err(DslError::Syntax {
                line,
                col,
                msg: format!("`{gen}` is ambiguous: several classical objects; write {gen}[X]"),
            }),
        }
    }

    fn classical_arg(&mut self, gen: &str, line: usize, col: usize) -> DslResult<ClassicalObject> {
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::LBracket)) {
            self.next();
            let (name, l, c) = self.ident("classical object name")?;
            self.expect(Tok::RBracket, "`]`")?;
            match self.lookup(&name, l, c)?.as_classical() {
                Some(x) => Ok(x),
                None => Err(DslError::Type {
                    line: l,
                    col: c,
                    source: TermError::NotClassical(format!("{gen} on {name}")),
                }),
            }
        } else {
            self.sole_classical(line, col, gen)
        }
    }

    fn object_type(&mut self) -> DslResult<ObjectType> {
        // TYPE := I | NAME (* NAME)*
        let mut factors = Vec::new();
        loop {
            let (name, l, c) = self.ident("object name")?;
            if name == "I" {
                // unit contributes no factors
            } else {
                factors.push(self.lookup(&name, l, c)?);
            }
            if matches!(self.peek().map(|s| &s.tok), Some(Tok::Star)) {
                self.next();
            } else {
                break;
            }
        }
        Ok(ObjectType { factors })
    }

    fn atom(&mut self) -> DslResult<Term> {
        let s = match self.peek() {
            Some(s) => s.clone(),
            None => return self.fail("expected a term"),
        };
        match &s.tok {
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(name) => {
                let (line, col) = (s.line, s.col);
                match name.as_str() {
                    "dg" => {
                        self.next();
                        self.expect(Tok::LParen, "`(` after dg")?;
                        let t = self.term()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Term::dagger(t))
                    }
                    "id" => {
                        self.next();
                        self.expect(Tok::LBracket, "`[` after id")?;
                        let o = self.object_type()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        Ok(Term::Identity(o))
                    }
                    "swap" => {
                        self.next();
                        self.expect(Tok::LBracket, "`[` after swap")?;
                        let a = self.object_type()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let b = self.object_type()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        Ok(Term::swap(a, b))
                    }
                    "delta" => {
                        self.next();
                        Ok(Term::delta(&self.classical_arg("delta", line, col)?))
                    }
                    "eps" => {
                        self.next();
                        Ok(Term::epsilon(&self.classical_arg("eps", line, col)?))
                    }
                    "eta" => {
                        self.next();
                        Ok(Term::cup(self.classical_arg("eta", line, col)?.factor()))
                    }
                    "cap" => {
                        self.next();
                        Ok(Term::cap(self.classical_arg("cap", line, col)?.factor()))
                    }
                    other => {
                        self.next();
                        match self.boxes.get(other) {
                            Some(decl) => {
                                Ok(Term::boxed(other, decl.dom.clone(), decl.cod.clone()))
                            }
                            None => Err(DslError::Undeclared {
                                line,
                                col,
                                name: other.to_string(),
                            }),
                        }
                    }
                }
            }
            other => self.fail(format!("expected a term, found {other:?}")),
        }
    }

    fn tensor_expr(&mut self) -> DslResult<Term> {
        let mut t = self.atom()?;
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Star)) {
            self.next();
            let rhs = self.atom()?;
            t = Term::tensor(t, rhs);
        }
        Ok(t)
    }

    fn term(&mut self) -> DslResult<Term> {
        let mut t = self.tensor_expr()?;
        // `a ; b` composes in diagram order; a trailing `;` before a
        // non-term token terminates the expression instead.
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Semi)) {
            let starts_term = matches!(
                self.peek2().map(|s| &s.tok),
                Some(Tok::Ident(_)) | Some(Tok::LParen)
            );
            if !starts_term {
                break;
            }
            let semi = self.next().expect("peeked semi");
            let rhs = self.tensor_expr()?;
            t = Term::compose(rhs, t).map_err(|source| DslError::Type {
                line: semi.line,
                col: semi.col,
                source,
            })?;
        }
        Ok(t)
    }

    fn declaration(&mut self) -> DslResult<Option<Term>> {
        let (kw, line, col) = self.ident("declaration keyword")?;
        match kw.as_str() {
            "object" | "classical" => {
                let (name, l, c) = self.ident("object name")?;
                let (dimkw, dl, dc) = self.ident("`dim`")?;
                if dimkw != "dim" {
                    return Err(DslError::Syntax {
                        line: dl,
                        col: dc,
                        msg: format!("expected `dim`, found `{dimkw}`"),
                    });
                }
                let dim = match self.next() {
                    Some(Spanned {
                        tok: Tok::Int(n), ..
                    }) if n >= 1 => n,
                    _ => {
                        return Err(DslError::Syntax {
                            line: dl,
                            col: dc,
                            msg: "expected a positive dimension".into(),
                        })
                    }
                };
                self.expect(Tok::Semi, "`;`")?;
                if self.objects.contains_key(&name) {
                    return Err(DslError::Syntax {
                        line: l,
                        col: c,
                        msg: format!("`{name}` declared twice"),
                    });
                }
                let factor = if kw == "classical" {
                    Factor::Classical {
                        name: name.clone(),
                        dim,
                    }
                } else {
                    Factor::Generic {
                        name: name.clone(),
                        dim,
                        dual: false,
                    }
                };
                self.objects.insert(name, factor);
                Ok(None)
            }
            "box" => {
                let (name, l, c) = self.ident("box name")?;
                self.expect(Tok::Colon, "`:`")?;
                let dom = self.object_type()?;
                self.expect(Tok::Arrow, "`->`")?;
                let cod = self.object_type()?;
                self.expect(Tok::Eq, "`=`")?;
                let path = match self.next() {
                    Some(Spanned {
                        tok: Tok::Str(p), ..
                    }) => p,
                    _ => {
                        return Err(DslError::Syntax {
                            line: l,
                            col: c,
                            msg: "expected a matrix file path string".into(),
                        })
                    }
                };
                self.expect(Tok::Semi, "`;`")?;
                if self.boxes.contains_key(&name) {
                    return Err(DslError::Syntax {
                        line: l,
                        col: c,
                        msg: format!("box `{name}` declared twice"),
                    });
                }
                self.boxes.insert(name, BoxDecl { dom, cod, path });
                Ok(None)
            }
            "main" => {
                self.expect(Tok::Eq, "`=`")?;
                let t = self.term()?;
                // optional trailing `;`
                if matches!(self.peek().map(|s| &s.tok), Some(Tok::Semi)) {
                    self.next();
                }
                Ok(Some(t))
            }
            other => Err(DslError::Syntax {
                line,
                col,
                msg: format!("expected `object`, `classical`, `box` or `main`, found `{other}`"),
            }),
        }
    }
}

/// Parse a program: declarations in any order, `main` required last.
pub fn parse(src: &str) -> DslResult<DslProgram> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        objects: BTreeMap::new(),
        boxes: BTreeMap::new(),
    };
    let mut main = None;
    while p.peek().is_some() {
        if main.is_some() {
            return p.fail("`main` must be the last declaration");
        }
        main = p.declaration()?;
    }
    match main {
        Some(term) => Ok(DslProgram {
            objects: p.objects,
            boxes: p.boxes,
            main: term,
        }),
        None => Err(DslError::Syntax {
            line: 0,
            col: 0,
            msg: "missing `main`".into(),
        }),
    }
}
