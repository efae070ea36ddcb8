use super::{ParseError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const SYMBOLS: [&str; 24] = [
    ":=", "*=", "!=", "?", "!", "[", "]", "{", "}", "(", ")", ",", ";", ".", "|", "+", "-", "*", "/", "\\", ">", "<",
    "=", "✓",
];

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '#'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#' || c == '\''
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while self.peek(0).is_some_and(&f) {
            s.push(self.bump());
        }
        s
    }
}

/// Token cursor with arbitrary lookahead. `//` starts a line comment.
#[derive(Debug, Clone)]
pub struct Lexer {
    toks: Vec<Token>,
    at: usize,
}

impl Lexer {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor { chars: src.chars().collect(), i: 0, line: 1, col: 1 };
        let mut toks = Vec::new();
        while let Some(c) = cur.peek(0) {
            let pos = Pos { line: cur.line, col: cur.col };
            if c.is_whitespace() {
                cur.bump();
                continue;
            }
            if c == '/' && cur.peek(1) == Some('/') {
                while cur.peek(0).is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                continue;
            }
            if ident_start(c) {
                let s = cur.take_while(ident_continue);
                toks.push(Token { tok: Tok::Ident(s), pos });
                continue;
            }
            if c.is_ascii_digit() {
                let mut s = cur.take_while(|c| c.is_ascii_digit());
                if cur.peek(0) == Some('.') && cur.peek(1).is_some_and(|c| c.is_ascii_digit()) {
                    s.push(cur.bump());
                    s.push_str(&cur.take_while(|c| c.is_ascii_digit()));
                }
                if matches!(cur.peek(0), Some('e' | 'E')) {
                    let sign = matches!(cur.peek(1), Some('-' | '+'));
                    let digit_at = if sign { 2 } else { 1 };
                    if cur.peek(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                        for _ in 0..digit_at {
                            s.push(cur.bump());
                        }
                        s.push_str(&cur.take_while(|c| c.is_ascii_digit()));
                    }
                }
                toks.push(Token { tok: Tok::Number(s), pos });
                continue;
            }
            let rest: String = [cur.peek(0), cur.peek(1)].into_iter().flatten().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    for _ in s.chars() {
                        cur.bump();
                    }
                    toks.push(Token { tok: Tok::Sym(s), pos });
                }
                None => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
            }
        }
        toks.push(Token { tok: Tok::Eof, pos: Pos { line: cur.line, col: cur.col } });
        Ok(Lexer { toks, at: 0 })
    }

    pub fn peek(&self) -> &Tok {
        self.peek_at(0)
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at.min(self.toks.len() - 1)].pos
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.at.min(self.toks.len() - 1)].clone();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_sym_at(&self, k: usize, s: &str) -> bool {
        matches!(self.peek_at(k), Tok::Sym(x) if *x == s)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`")))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    /// Identifier or integer literal.
    pub fn expect_name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            Tok::Number(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn expect_usize(&mut self, what: &str) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let pos = self.pos();
                self.bump();
                s.parse().map_err(|_| ParseError::new(pos, format!("expected {what}")))
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        ParseError::new(self.pos(), format!("{}, found {found}", message.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_positions_and_skips_comments() {
        let mut lx = Lexer::new("a // note\n  c?[x]").unwrap();
        assert_eq!(lx.bump().tok, Tok::Ident("a".into()));
        let t = lx.bump();
        assert_eq!(t.tok, Tok::Ident("c".into()));
        assert_eq!(t.pos, Pos { line: 2, col: 3 });
        assert_eq!(lx.bump().tok, Tok::Sym("?"));
    }

    #[test]
    fn numbers_do_not_swallow_prefix_dots() {
        let mut lx = Lexer::new("0.P 0.25 1e-3").unwrap();
        assert_eq!(lx.bump().tok, Tok::Number("0".into()));
        assert_eq!(lx.bump().tok, Tok::Sym("."));
        lx.bump();
        assert_eq!(lx.bump().tok, Tok::Number("0.25".into()));
        assert_eq!(lx.bump().tok, Tok::Number("1e-3".into()));
    }

    #[test]
    fn rejects_unknown_characters() {
        let err = Lexer::new("a\n @").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 2 });
    }
}
