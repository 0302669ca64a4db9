use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ParseError;
use crate::kernel::BitString;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Num(u64),
    Bits(BitString),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 21] = [
    "::", "-o", "=>", ".", ",", ";", ":", "=", "(", ")", "{", "}", "[", "]", "|", "!", "*", "+", "&",
    "^", "/",
];

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let tok = if is_word_start(c) {
            let start = i;
            let mut j = i;
            while j < chars.len() && is_word_char(chars[j]) {
                j += 1;
            }
            let w: String = chars[start..j].iter().collect();
            advance(j - start, &mut i);
            Tok::Word(w)
        } else if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            let n = s
                .parse::<u64>()
                .map_err(|_| ParseError::new(tl, tc, "numeral out of range"))?;
            advance(j - start, &mut i);
            Tok::Num(n)
        } else if c == '#' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j] == '0' || chars[j] == '1') {
                j += 1;
            }
            let s: String = chars[i + 1..j].iter().collect();
            let bits = BitString::parse_bits(&s).unwrap_or_default();
            advance(j - i, &mut i);
            Tok::Bits(bits)
        } else if c == '@' {
            advance(1, &mut i);
            Tok::Sym("@")
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    advance(s.len(), &mut i);
                    Tok::Sym(s)
                }
                None => {
                    return Err(ParseError::new(tl, tc, &alloc::format!("unexpected character `{c}`")));
                }
            }
        };
        toks.push(Token { tok, line: tl, col: tc });
    }
    toks.push(Token { tok: Tok::Eof, line, col });
    Ok(toks)
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => alloc::format!("`{w}`"),
            Tok::Num(n) => alloc::format!("`{n}`"),
            Tok::Bits(b) => alloc::format!("`{b}`"),
            Tok::Sym(s) => alloc::format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}
