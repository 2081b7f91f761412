//! Method spans located by brace matching.

use serde::{Deserialize, Serialize};

use super::lexer::{Token, TokenKind, TokenStream};
use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Function,
    Modifier,
    Constructor,
    Fallback,
    Receive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpan {
    pub name: String,
    pub kind: MethodKind,
    pub start_line: u32,
    pub end_line: u32,
    /// Byte range from the declaring keyword through the closing brace or `;`.
    pub start_offset: usize,
    pub end_offset: usize,
    /// Tokens strictly between the body braces; empty for `;` declarations.
    pub body_tokens: Vec<Token>,
}

impl MethodSpan {
    pub fn contains_offset(&self, offset: usize) -> bool {
        self.start_offset <= offset && offset < self.end_offset
    }
}

fn is(t: &Token, kind: TokenKind, text: &str) -> bool {
    t.kind == kind && t.text == text
}

fn punct(t: &Token, text: &str) -> bool {
    is(t, TokenKind::Punctuation, text)
}

/// Declaration starting at `i`: kind, name, and the index to scan the
/// header from.
fn declaration(tokens: &[Token], i: usize) -> Option<(MethodKind, String, usize)> {
    let t = &tokens[i];
    let next = tokens.get(i + 1)?;
    let after_dot = i > 0 && tokens[i - 1].text == ".";
    match (t.kind, t.text.as_str()) {
        (TokenKind::Keyword, "function") => match next.kind {
            TokenKind::Identifier => Some((MethodKind::Function, next.text.clone(), i + 2)),
            // Pre-0.6 unnamed fallback `function () …`.
            TokenKind::Punctuation if next.text == "(" => Some((MethodKind::Fallback, "fallback".into(), i + 1)),
            _ => None,
        },
        (TokenKind::Keyword, "modifier") if next.kind == TokenKind::Identifier => {
            Some((MethodKind::Modifier, next.text.clone(), i + 2))
        }
        (TokenKind::Keyword, "constructor") if punct(next, "(") => {
            Some((MethodKind::Constructor, "constructor".into(), i + 1))
        }
        (TokenKind::Identifier, "fallback") if punct(next, "(") && !after_dot => {
            Some((MethodKind::Fallback, "fallback".into(), i + 1))
        }
        (TokenKind::Identifier, "receive") if punct(next, "(") && !after_dot => {
            Some((MethodKind::Receive, "receive".into(), i + 1))
        }
        _ => None,
    }
}

/// Index of the brace closing the `{` at `open`.
fn matching_brace(tokens: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (j, t) in tokens.iter().enumerate().skip(open) {
        if punct(t, "{") {
            depth += 1;
        } else if punct(t, "}") {
            depth -= 1;
            if depth == 0 {
                return Some(j);
            }
        }
    }
    None
}

pub fn extract_methods(stream: &TokenStream) -> Result<Vec<MethodSpan>, MetricsError> {
    let tokens = &stream.tokens;
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let Some((kind, name, header)) = declaration(tokens, i) else {
            i += 1;
            continue;
        };
        // Header runs to the first `{` or `;` outside parentheses.
        let mut depth = 0i64;
        let mut end = None;
        for (j, t) in tokens.iter().enumerate().skip(header) {
            match t.text.as_str() {
                "(" if t.kind == TokenKind::Punctuation => depth += 1,
                ")" if t.kind == TokenKind::Punctuation => depth -= 1,
                "{" | ";" if t.kind == TokenKind::Punctuation && depth <= 0 => {
                    end = Some(j);
                    break;
                }
                _ => {}
            }
        }
        let Some(term) = end else {
            return Err(MetricsError::BraceImbalance { line: tokens[i].line });
        };
        let start = &tokens[i];
        if punct(&tokens[term], ";") {
            // `function (…) external f;` is a function-typed variable, not a method.
            if !(kind == MethodKind::Fallback && tokens[i].text == "function") {
                spans.push(MethodSpan {
                    name,
                    kind,
                    start_line: start.line,
                    end_line: tokens[term].line,
                    start_offset: start.offset,
                    end_offset: tokens[term].offset + 1,
                    body_tokens: Vec::new(),
                });
            }
            i = term + 1;
            continue;
        }
        let close = matching_brace(tokens, term).ok_or(MetricsError::BraceImbalance { line: start.line })?;
        spans.push(MethodSpan {
            name,
            kind,
            start_line: start.line,
            end_line: tokens[close].line,
            start_offset: start.offset,
            end_offset: tokens[close].offset + 1,
            body_tokens: tokens[term + 1..close].to_vec(),
        });
        i = close + 1;
    }
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::lexer::tokenize;

    fn spans(src: &str) -> Vec<MethodSpan> {
        extract_methods(&tokenize(src)).unwrap()
    }

    #[test]
    fn interface_functions_have_empty_bodies() {
        let s = spans("interface I {\n function a() external;\n function b(uint x) external returns (uint);\n}");
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|m| m.body_tokens.is_empty()));
        assert_eq!((s[0].name.as_str(), s[1].name.as_str()), ("a", "b"));
        assert_eq!((s[1].start_line, s[1].end_line), (3, 3));
    }

    #[test]
    fn nested_braces_span_to_matching_brace() {
        let src = "contract C {\n function f() public {\n  if (x) {\n   y = 1;\n  } else { y = 2; }\n }\n function g() public {}\n}";
        let s = spans(src);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].start_line, s[0].end_line), (2, 6));
        assert_eq!(s[0].body_tokens.first().unwrap().text, "if");
        assert_eq!(s[0].body_tokens.last().unwrap().text, "}");
        assert_eq!(s[1].name, "g");
    }

    #[test]
    fn no_functions() {
        assert!(spans("pragma solidity ^0.8.0;\ncontract C { uint a; }").is_empty());
    }

    #[test]
    fn all_method_kinds() {
        let src = "contract C {\n constructor(uint a) { }\n modifier onlyOwner { _; }\n fallback() external {}\n receive() external payable {}\n function() payable {}\n}";
        let kinds: Vec<MethodKind> = spans(src).iter().map(|m| m.kind).collect();
        assert_eq!(
            kinds,
            vec![
                MethodKind::Constructor,
                MethodKind::Modifier,
                MethodKind::Fallback,
                MethodKind::Receive,
                MethodKind::Fallback
            ]
        );
    }

    #[test]
    fn function_types_are_not_methods() {
        let src = "contract C {\n function (uint) external returns (uint) cb;\n function run(function (uint) external g) public { g(1); }\n}";
        let s = spans(src);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].name, "run");
    }

    #[test]
    fn member_named_receive_is_not_a_method() {
        let s = spans("contract C { function f() public { token.receive(1); } }");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn unclosed_body_is_brace_imbalance() {
        assert!(matches!(
            extract_methods(&tokenize("contract C {\n function f() public {\n uint a;\n")),
            Err(MetricsError::BraceImbalance { line: 2 })
        ));
    }

    #[test]
    fn header_braces_inside_parens_ignored() {
        // Modifier invocation with a struct-literal-like argument list.
        let s = spans("contract C { function f() public m({a: 1}) { x; } }");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].body_tokens.len(), 2);
    }
}
