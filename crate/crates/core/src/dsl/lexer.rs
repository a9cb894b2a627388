use num_bigint::BigInt;

use super::report::{Diagnostic, Severity};
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(BigInt),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Dot,
    DotDot,
    Arrow,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Tilde,
    At,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Arrow => "->",
            Tok::Assign => ":=",
            Tok::Eq => "=",
            Tok::Ne => "<>",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Tilde => "~",
            Tok::At => "@",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Words that can never be identifiers.
pub const KEYWORDS: &[&str] = &[
    "model",
    "template",
    "action",
    "type",
    "role",
    "invariant",
    "static",
    "dynamic",
    "at",
    "system",
    "conforms",
    "object",
    "link",
    "unlink",
    "time",
    "rule",
    "for",
    "create",
    "delete",
    "reclassify",
    "as",
    "true",
    "false",
    "and",
    "or",
    "not",
    "implies",
    "forall",
    "exists",
    "size",
    "isEmpty",
    "includes",
    "includesAll",
    "trace",
    "snapshot",
    "step",
    "int",
    "bool",
    "string",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub(crate) fn lex(text: &str, file: &str, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut lexer = Lexer {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        last: (1, 1),
        file,
    };
    let mut out = Vec::new();
    loop {
        match lexer.next_token() {
            Ok(Some(t)) => out.push(t),
            Ok(None) => break,
            Err((message, span)) => diags.push(Diagnostic {
                severity: Severity::Error,
                span,
                message,
            }),
        }
    }
    let eof = lexer.last;
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(file, eof, eof),
    });
    out
}

struct Lexer<'f> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    /// Position of the last consumed character.
    last: (u32, u32),
    file: &'f str,
}

type LexResult = Result<Option<Token>, (String, SourceSpan)>;

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        self.last = (self.line, self.col);
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn span_from(&self, start: (u32, u32)) -> SourceSpan {
        SourceSpan::new(self.file, start, self.last)
    }

    fn skip_trivia(&mut self) -> Result<(), (String, SourceSpan)> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let start = self.here();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(("unterminated block comment".into(), self.span_from(start))),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> LexResult {
        self.skip_trivia()?;
        let start = self.here();
        let Some(c) = self.bump() else {
            return Ok(None);
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '~' => Tok::Tilde,
            '@' => Tok::At,
            '=' => Tok::Eq,
            ':' => {
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::Assign
                } else {
                    Tok::Colon
                }
            }
            '.' => {
                if self.peek() == Some('.') {
                    self.bump();
                    Tok::DotDot
                } else {
                    Tok::Dot
                }
            }
            '-' => {
                if self.peek() == Some('>') {
                    self.bump();
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '<' => match self.peek() {
                Some('=') => {
                    self.bump();
                    Tok::Le
                }
                Some('>') => {
                    self.bump();
                    Tok::Ne
                }
                _ => Tok::Lt,
            },
            '>' => {
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '!' if self.peek() == Some('=') => {
                self.bump();
                Tok::Ne
            }
            '⁻' if self.peek() == Some('¹') => {
                self.bump();
                Tok::Tilde
            }
            '"' => self.string(start)?,
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    self.bump();
                }
                Tok::Int(digits.parse().expect("ascii digits"))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::from(c);
                while let Some(d) = self.peek().filter(|d| d.is_ascii_alphanumeric() || *d == '_') {
                    word.push(d);
                    self.bump();
                }
                Tok::Ident(word)
            }
            other => {
                return Err((format!("unexpected character `{other}`"), self.span_from(start)));
            }
        };
        Ok(Some(Token {
            tok,
            span: self.span_from(start),
        }))
    }

    fn string(&mut self, start: (u32, u32)) -> Result<Tok, (String, SourceSpan)> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(("unterminated string literal".into(), self.span_from(start)));
                }
                Some('"') => return Ok(Tok::Str(s)),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    _ => return Err(("invalid escape sequence".into(), self.span_from(start))),
                },
                Some(c) => s.push(c),
            }
        }
    }
}
