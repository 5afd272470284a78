//! Tokenizer shared by the source and target parsers.
//!
//! Comments run from `--` to end of line. Sum constructor tokens are
//! longest-match after `+`, so `+?1` is one token, not `+?` then `1`.

use super::ast::{Index, SumCon};
use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    LParen,
    RParen,
    Colon,
    Bar,
    Lt,
    Gt,
    /// `->`
    Arrow,
    /// `=>`
    FatArrow,
    Sum(SumCon),
    Fn,
    Case,
    Of,
    Inj(Index),
    Matchfail,
    Ident(String),
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Colon => "':'".into(),
            Token::Bar => "'|'".into(),
            Token::Lt => "'<'".into(),
            Token::Gt => "'>'".into(),
            Token::Arrow => "'->'".into(),
            Token::FatArrow => "'=>'".into(),
            Token::Sum(c) => format!("'{}'", c.token()),
            Token::Fn => "'fn'".into(),
            Token::Case => "'case'".into(),
            Token::Of => "'of'".into(),
            Token::Inj(i) => format!("'inj{i}'"),
            Token::Matchfail => "'matchfail'".into(),
            Token::Ident(x) => format!("identifier '{x}'"),
        }
    }
}

/// A token with its source position (1-based) and character length.
#[derive(Debug, Clone)]
pub struct Lexed {
    pub tok: Token,
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Scanner {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, line: usize, col: usize, expected: &str, found: String) -> ParseError {
        ParseError {
            line,
            col,
            expected: vec![expected.to_string()],
            found,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut s = Scanner {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();

    while let Some(c) = s.peek() {
        let (line, col) = (s.line, s.col);
        if c.is_whitespace() {
            s.bump();
            continue;
        }
        let start = s.pos;
        let tok = match c {
            '(' => {
                s.bump();
                Token::LParen
            }
            ')' => {
                s.bump();
                Token::RParen
            }
            ':' => {
                s.bump();
                Token::Colon
            }
            '|' => {
                s.bump();
                Token::Bar
            }
            '<' => {
                s.bump();
                Token::Lt
            }
            '>' => {
                s.bump();
                Token::Gt
            }
            '-' => {
                s.bump();
                if s.eat('-') {
                    // Comment to end of line.
                    while let Some(c) = s.peek() {
                        if c == '\n' {
                            break;
                        }
                        s.bump();
                    }
                    continue;
                } else if s.eat('>') {
                    Token::Arrow
                } else {
                    let found = s.peek().map_or("end of input".into(), |c| format!("'{c}'"));
                    return Err(s.error(line, col, "'->' or '--'", found));
                }
            }
            '=' => {
                s.bump();
                if s.eat('>') {
                    Token::FatArrow
                } else {
                    let found = s.peek().map_or("end of input".into(), |c| format!("'{c}'"));
                    return Err(s.error(line, col, "'=>'", found));
                }
            }
            '+' => {
                s.bump();
                let con = if s.eat('?') {
                    if s.eat('1') {
                        SumCon::PlusQ1
                    } else if s.eat('2') {
                        SumCon::PlusQ2
                    } else {
                        SumCon::PlusQ
                    }
                } else if s.eat('*') {
                    if s.eat('1') {
                        SumCon::PlusStar1
                    } else if s.eat('2') {
                        SumCon::PlusStar2
                    } else {
                        let found = s.peek().map_or("end of input".into(), |c| format!("'{c}'"));
                        return Err(s.error(s.line, s.col, "'1' or '2' after '+*'", found));
                    }
                } else if s.eat('1') {
                    SumCon::Plus1
                } else if s.eat('2') {
                    SumCon::Plus2
                } else {
                    SumCon::Plus
                };
                Token::Sum(con)
            }
            c if is_ident_start(c) => {
                let mut word = String::new();
                while let Some(c) = s.peek() {
                    if is_ident_continue(c) {
                        word.push(c);
                        s.bump();
                    } else {
                        break;
                    }
                }
                match word.as_str() {
                    "fn" => Token::Fn,
                    "case" => Token::Case,
                    "of" => Token::Of,
                    "inj1" => Token::Inj(Index::One),
                    "inj2" => Token::Inj(Index::Two),
                    "matchfail" => Token::Matchfail,
                    _ => Token::Ident(word),
                }
            }
            c => {
                return Err(s.error(line, col, "a token", format!("'{c}'")));
            }
        };
        out.push(Lexed {
            tok,
            line,
            col,
            len: s.pos - start,
        });
    }

    Ok(out)
}
