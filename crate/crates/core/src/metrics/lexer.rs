//! Comment- and string-aware Solidity lexer.
//!
//! Not a grammar: it only splits text into tokens and comments, which is
//! enough for line counts, decision points, Halstead counts and method
//! spans across compiler versions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Identifier,
    Keyword,
    Operator,
    Literal,
    /// Grouping only: `; , ( ) { }`.
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommentStyle {
    Line,
    Block,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    /// Raw text including the `//` or `/* */` delimiters.
    pub text: String,
    pub start_line: u32,
    pub end_line: u32,
    pub style: CommentStyle,
    pub offset: usize,
    pub end_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum LexError {
    #[error("unterminated block comment starting on line {line}")]
    UnterminatedComment { line: u32 },
    #[error("unterminated string literal on line {line}")]
    UnterminatedString { line: u32 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
    /// Problems found in best-effort mode; tokenization still reaches EOF.
    pub errors: Vec<LexError>,
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "address",
    "anonymous",
    "as",
    "assembly",
    "bool",
    "break",
    "byte",
    "bytes",
    "calldata",
    "case",
    "catch",
    "constant",
    "constructor",
    "continue",
    "contract",
    "days",
    "default",
    "delete",
    "do",
    "else",
    "emit",
    "enum",
    "error",
    "ether",
    "event",
    "external",
    "finney",
    "fixed",
    "for",
    "from",
    "function",
    "gwei",
    "hours",
    "if",
    "immutable",
    "import",
    "indexed",
    "int",
    "interface",
    "internal",
    "is",
    "let",
    "library",
    "mapping",
    "memory",
    "minutes",
    "modifier",
    "new",
    "override",
    "payable",
    "pragma",
    "private",
    "public",
    "pure",
    "return",
    "returns",
    "revert",
    "seconds",
    "storage",
    "string",
    "struct",
    "super",
    "switch",
    "szabo",
    "this",
    "throw",
    "try",
    "type",
    "ufixed",
    "uint",
    "unchecked",
    "using",
    "var",
    "view",
    "virtual",
    "weeks",
    "wei",
    "while",
    "years",
];

const OPERATORS: &[&str] = &[
    ">>>=", ">>=", "<<=", ">>>", "**", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "|=", "&=", "^=", "=>", "->", "<<", ">>", ":=", "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~",
    "?", ":", ".", "[", "]",
];

fn is_sized_type(word: &str) -> bool {
    let sized = |prefix: &str| {
        word.strip_prefix(prefix)
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
    };
    sized("uint") || sized("int") || sized("bytes")
}

fn is_keyword(word: &str) -> bool {
    KEYWORDS.binary_search(&word).is_ok() || is_sized_type(word)
}

fn ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_' || c == b'$'
}

fn ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    out: TokenStream,
}

impl<'a> Lexer<'a> {
    fn push(&mut self, kind: TokenKind, start: usize, line: u32) {
        self.out.tokens.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            line,
            offset: start,
        });
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn line_comment(&mut self) {
        let start = self.pos;
        while let Some(c) = self.peek(0) {
            if c == b'\n' {
                break;
            }
            self.pos += 1;
        }
        self.out.comments.push(Comment {
            text: self.src[start..self.pos].trim_end_matches('\r').to_string(),
            start_line: self.line,
            end_line: self.line,
            style: CommentStyle::Line,
            offset: start,
            end_offset: self.pos,
        });
    }

    fn block_comment(&mut self) {
        let start = self.pos;
        let start_line = self.line;
        self.pos += 2;
        let mut closed = false;
        while let Some(c) = self.peek(0) {
            if c == b'*' && self.peek(1) == Some(b'/') {
                self.pos += 2;
                closed = true;
                break;
            }
            if c == b'\n' {
                self.line += 1;
            }
            self.pos += 1;
        }
        if !closed {
            self.out.errors.push(LexError::UnterminatedComment { line: start_line });
        }
        self.out.comments.push(Comment {
            text: self.src[start..self.pos].to_string(),
            start_line,
            end_line: self.line,
            style: CommentStyle::Block,
            offset: start,
            end_offset: self.pos,
        });
    }

    /// String body after the opening quote at `self.pos`. Newlines end an
    /// unterminated string so the rest of the file still lexes.
    fn string(&mut self, start: usize) {
        let quote = self.bytes[self.pos];
        let line = self.line;
        self.pos += 1;
        loop {
            match self.peek(0) {
                None | Some(b'\n') => {
                    self.out.errors.push(LexError::UnterminatedString { line });
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    if self.peek(0).is_some_and(|c| c != b'\n') {
                        self.pos += 1;
                    }
                }
                Some(c) if c == quote => {
                    self.pos += 1;
                    break;
                }
                Some(_) => self.pos += 1,
            }
        }
        self.push(TokenKind::Literal, start, line);
    }

    fn number(&mut self) {
        let start = self.pos;
        if self.peek(0) == Some(b'0') && matches!(self.peek(1), Some(b'x' | b'X')) {
            self.pos += 2;
            while self.peek(0).is_some_and(|c| c.is_ascii_hexdigit() || c == b'_') {
                self.pos += 1;
            }
        } else {
            let digits = |lx: &mut Self| {
                while lx.peek(0).is_some_and(|c| c.is_ascii_digit() || c == b'_') {
                    lx.pos += 1;
                }
            };
            digits(self);
            if self.peek(0) == Some(b'.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
                digits(self);
            }
            if matches!(self.peek(0), Some(b'e' | b'E')) {
                let sign = usize::from(self.peek(1) == Some(b'-'));
                if self.peek(1 + sign).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1 + sign;
                    digits(self);
                }
            }
        }
        let line = self.line;
        self.push(TokenKind::Literal, start, line);
    }

    fn word(&mut self) {
        let start = self.pos;
        while self.peek(0).is_some_and(ident_char) {
            self.pos += 1;
        }
        let word = &self.src[start..self.pos];
        if (word == "hex" || word == "unicode") && matches!(self.peek(0), Some(b'"' | b'\'')) {
            self.string(start);
            return;
        }
        let kind = match word {
            "true" | "false" => TokenKind::Literal,
            w if is_keyword(w) => TokenKind::Keyword,
            _ => TokenKind::Identifier,
        };
        let line = self.line;
        self.push(kind, start, line);
    }

    fn symbol(&mut self) {
        let start = self.pos;
        let line = self.line;
        let c = self.bytes[self.pos];
        if matches!(c, b';' | b',' | b'(' | b')' | b'{' | b'}') {
            self.pos += 1;
            self.push(TokenKind::Punctuation, start, line);
            return;
        }
        let rest = &self.src[self.pos..];
        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            self.pos += op.len();
        } else {
            // Anything else (stray `@`, `#`, non-ASCII) becomes a one-char operator.
            self.pos += rest.chars().next().map_or(1, char::len_utf8);
        }
        self.push(TokenKind::Operator, start, line);
    }

    fn run(mut self) -> TokenStream {
        while let Some(c) = self.peek(0) {
            match c {
                b'\n' => {
                    self.line += 1;
                    self.pos += 1;
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                b'/' if self.peek(1) == Some(b'/') => self.line_comment(),
                b'/' if self.peek(1) == Some(b'*') => self.block_comment(),
                b'"' | b'\'' => self.string(self.pos),
                c if c.is_ascii_digit() => self.number(),
                c if ident_start(c) => self.word(),
                _ => self.symbol(),
            }
        }
        self.out
    }
}

pub fn tokenize(source: &str) -> TokenStream {
    Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        line: 1,
        out: TokenStream::default(),
    }
    .run()
}

impl TokenStream {
    /// Tokens back on their original lines, separated by single spaces.
    /// Comments are dropped.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = 1;
        let mut first_on_line = true;
        for t in &self.tokens {
            while line < t.line {
                out.push('\n');
                line += 1;
                first_on_line = true;
            }
            if !first_on_line {
                out.push(' ');
            }
            out.push_str(&t.text);
            first_on_line = false;
        }
        out
    }
}

/// Token texts joined by single spaces.
pub fn normalize_tokens(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
}
