//! Tokenizer for the specification syntax.

use super::SpecError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    Str(String),
    /// Backslash operators such as `\in`, `\union`, `\A`; the payload is the
    /// word after the backslash. A lone `\` (set difference) has an empty word.
    Backslash(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// First token on its line.
    pub line_start: bool,
}

impl Token {
    pub fn is_sym(&self, s: &str) -> bool {
        matches!(&self.tok, Tok::Sym(x) if *x == s)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.tok, Tok::Ident(x) if x == s)
    }

    pub fn is_backslash(&self, s: &str) -> bool {
        matches!(&self.tok, Tok::Backslash(x) if x == s)
    }
}

// Longest match first.
const SYMBOLS: &[&str] = &[
    "|->", "/\\", "\\/", "<<", ">>", "=>", "/=", "<=", "=<", ">=", "..", ":>", "@@", "==", "(",
    ")", "[", "]", "{", "}", ",", ":", "=", "<", ">", "~", "'", "!", ".", "+", "-", "*", "%", "#",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SpecError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out: Vec<Token> = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut last_line = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        // `\*` line comment
        if c == '\\' && chars.get(i + 1) == Some(&'*') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok, out: &mut Vec<Token>| {
            out.push(Token {
                tok,
                line: start_line,
                col: start_col,
                line_start: last_line != start_line,
            });
            last_line = start_line;
        };
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            // `1..3` must not swallow the dots
            let text: String = chars[i..j].iter().collect();
            let n = text.parse::<i64>().map_err(|_| SpecError::Syntax {
                line,
                col,
                msg: format!("integer literal out of range: {text}"),
            })?;
            push(Tok::Num(n), &mut out);
            col += j - i;
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            push(Tok::Ident(chars[i..j].iter().collect()), &mut out);
            col += j - i;
            i = j;
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            let mut s = String::new();
            while j < chars.len() && chars[j] != '"' {
                if chars[j] == '\n' {
                    return Err(SpecError::Syntax {
                        line,
                        col,
                        msg: "unterminated string literal".into(),
                    });
                }
                s.push(chars[j]);
                j += 1;
            }
            if j >= chars.len() {
                return Err(SpecError::Syntax {
                    line,
                    col,
                    msg: "unterminated string literal".into(),
                });
            }
            push(Tok::Str(s), &mut out);
            col += j + 1 - i;
            i = j + 1;
            continue;
        }
        if c == '\\' {
            // `\/` is disjunction, handled by the symbol table
            if chars.get(i + 1) != Some(&'/') {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                push(Tok::Backslash(chars[i + 1..j].iter().collect()), &mut out);
                col += j - i;
                i = j;
                continue;
            }
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                push(Tok::Sym(sym), &mut out);
                col += sym.len();
                i += sym.len();
            }
            None => {
                return Err(SpecError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(out)
}
