//! Recursive-descent parser for `.pfj` programs and for predicates.

use thiserror::Error;

use crate::syntax::{
    name, ClassDecl, Entry, Expr, FieldDecl, Member, MethodDecl, Name, Param, Predicate, Program, OBJECT, RESERVED,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("program has no main expression")]
    MissingMain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Dot,
    Comma,
    Semi,
    Eq,
    EqEq,
    Colon,
    ColonColon,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Colon => "`:`".into(),
            Tok::ColonColon => "`::`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, column: tc });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '<' => push(Tok::Lt, 1, &mut i, &mut col),
            '>' => push(Tok::Gt, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'=') => push(Tok::EqEq, 2, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&':') => push(Tok::ColonColon, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Ident(word), line: tl, column: tc });
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    allow_omega: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str, allow_omega: bool) -> PResult<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0, allow_omega })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError::Syntax { line: t.line, column: t.column, message: message.into() })
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", want.describe(), self.peek().describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.peek().describe()))
        }
    }

    /// A non-reserved identifier.
    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => {
                self.error(format!("reserved word `{s}` cannot be used as {what}"))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(name(&s))
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut classes = Vec::new();
        while self.is_keyword("class") {
            classes.push(self.class_decl()?);
        }
        if *self.peek() == Tok::Eof {
            return Err(ParseError::MissingMain);
        }
        let main = self.expr()?;
        if *self.peek() != Tok::Eof {
            return self
                .error(format!("expected end of input after main expression, found {}", self.peek().describe()));
        }
        Ok(Program { classes, main })
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        self.keyword("class")?;
        if self.is_keyword(OBJECT) {
            return self.error("cannot declare a class named `Object`");
        }
        let cname = self.ident("a class name")?;
        self.keyword("extends")?;
        let superclass = self.ident("a superclass name")?;
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while *self.peek() != Tok::RBrace {
            let ty = self.ident("a type")?;
            let member = self.ident("a member name")?;
            if *self.peek() == Tok::LParen {
                methods.push(self.method_rest(ty, member)?);
            } else {
                if !methods.is_empty() {
                    return self.error("field declarations must precede method declarations");
                }
                if *self.peek() == Tok::Semi {
                    self.bump();
                }
                fields.push(FieldDecl { ty, name: member });
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(ClassDecl { name: cname, superclass, fields, methods })
    }

    fn method_rest(&mut self, return_type: Name, mname: Name) -> PResult<MethodDecl> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let ty = self.ident("a parameter type")?;
                let pname = self.ident("a parameter name")?;
                params.push(Param { ty, name: pname });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let body = self.expr()?;
        self.expect(Tok::RBrace)?;
        Ok(MethodDecl { return_type, name: mname, params, body })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let member = self.ident("a member name")?;
            match self.peek() {
                Tok::LParen => {
                    let args = self.args()?;
                    e = Expr::Invoke(Box::new(e), member, args);
                }
                Tok::Eq => {
                    self.bump();
                    let value = self.expr()?;
                    return Ok(Expr::Assign(Box::new(e), member, Box::new(value)));
                }
                Tok::EqEq => return self.error("`==` is not a pFJ operator"),
                _ => e = Expr::Field(Box::new(e), member),
            }
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(w) if w == "null" => {
                self.bump();
                Ok(Expr::Null)
            }
            Tok::Ident(w) if w == "this" => {
                self.bump();
                Ok(Expr::this())
            }
            Tok::Ident(w) if w == "omega" => {
                if self.allow_omega {
                    self.bump();
                    Ok(Expr::Omega)
                } else {
                    self.error("`omega` may only appear in approximate expressions")
                }
            }
            Tok::Ident(w) if w == "new" => {
                self.bump();
                let c = self.ident("a class name")?;
                let args = self.args()?;
                Ok(Expr::New(c, args))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident("a variable")?)),
            other => self.error(format!("expected an expression, found {}", other.describe())),
        }
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "top" => {
                self.bump();
                Ok(Predicate::Top)
            }
            Tok::Ident(w) if w == "nn" => {
                self.bump();
                Ok(Predicate::Nil)
            }
            Tok::Lt => {
                self.bump();
                let mut entries = Vec::new();
                if *self.peek() != Tok::Gt {
                    loop {
                        entries.push(self.entry()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::Gt)?;
                Ok(Predicate::Object(entries))
            }
            other => self.error(format!("expected a predicate, found {}", other.describe())),
        }
    }

    fn normal_predicate(&mut self, what: &str) -> PResult<Predicate> {
        if self.is_keyword("top") {
            return self.error(format!("{what} must be a normal predicate, not `top`"));
        }
        self.predicate()
    }

    fn entry(&mut self) -> PResult<Entry> {
        let label = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                name(&s)
            }
            other => return self.error(format!("expected a label, found {}", other.describe())),
        };
        self.expect(Tok::Colon)?;
        let member = if *self.peek() == Tok::LParen {
            self.bump();
            let this = self.predicate()?;
            self.expect(Tok::ColonColon)?;
            let mut args = Vec::new();
            if *self.peek() != Tok::Arrow {
                loop {
                    args.push(self.predicate()?);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::Arrow)?;
            let result = self.normal_predicate("a method result")?;
            self.expect(Tok::RParen)?;
            Member::Method { this, args, result }
        } else {
            Member::Value(self.normal_predicate("a field member")?)
        };
        Ok(Entry { label, member })
    }

    fn finish<T>(&mut self, value: T) -> PResult<T> {
        if *self.peek() == Tok::Eof {
            Ok(value)
        } else {
            self.error(format!("unexpected {}", self.peek().describe()))
        }
    }
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    Parser::new(src, false)?.program()
}

/// Parses a plain expression; `omega` is rejected.
pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src, false)?;
    let e = p.expr()?;
    p.finish(e)
}

/// Parses an approximate expression, in which `omega` is allowed.
pub fn parse_approx_expression(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src, true)?;
    let e = p.expr()?;
    p.finish(e)
}

pub fn parse_predicate(src: &str) -> Result<Predicate, ParseError> {
    let mut p = Parser::new(src, false)?;
    let pred = p.predicate()?;
    p.finish(pred)
}
