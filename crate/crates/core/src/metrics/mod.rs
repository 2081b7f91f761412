//! SLOC, McCabe, Halstead volume and maintainability index for Solidity
//! sources, at file or method level.

pub mod lexer;
pub mod methods;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;
pub use lexer::{normalize_tokens, tokenize, Comment, CommentStyle, LexError, Token, TokenKind, TokenStream};
pub use methods::{extract_methods, MethodKind, MethodSpan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("unbalanced braces in method declared on line {line}")]
    BraceImbalance { line: u32 },
}

/// Tokens counted as decision points.
pub const DECISION_KEYWORDS: [&str; 5] = ["if", "while", "for", "do", "catch"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    File,
    Method,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::File => "file",
            Level::Method => "method",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "file" => Ok(Level::File),
            "method" => Ok(Level::Method),
            other => Err(format!("unknown level {other:?} (expected file or method)")),
        }
    }
}

/// Number of distinct lines holding at least one code token.
pub fn sloc(tokens: &[Token]) -> usize {
    tokens.iter().map(|t| t.line).collect::<BTreeSet<_>>().len()
}

/// Whether `t` is a decision point; `next` is the token after it. A `for`
/// only counts when it opens a loop header, not in `using L for T`.
pub fn is_decision_point(t: &Token, next: Option<&Token>) -> bool {
    match t.kind {
        TokenKind::Keyword if t.text == "for" => next.is_some_and(|n| n.text == "("),
        TokenKind::Keyword => DECISION_KEYWORDS.contains(&t.text.as_str()),
        TokenKind::Operator => t.text == "?",
        _ => false,
    }
}

/// One plus the number of decision points.
pub fn mccabe(tokens: &[Token]) -> usize {
    1 + tokens
        .iter()
        .enumerate()
        .filter(|(i, t)| is_decision_point(t, tokens.get(i + 1)))
        .count()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalsteadCounts {
    pub distinct_operators: usize,
    pub distinct_operands: usize,
    pub total_operators: usize,
    pub total_operands: usize,
}

impl HalsteadCounts {
    /// Keywords and operators are operators; identifiers and literals are
    /// operands; grouping punctuation is neither.
    pub fn from_tokens(tokens: &[Token]) -> Self {
        let mut ops = HashSet::new();
        let mut opnds = HashSet::new();
        let mut c = HalsteadCounts::default();
        for t in tokens {
            match t.kind {
                TokenKind::Keyword | TokenKind::Operator => {
                    c.total_operators += 1;
                    ops.insert(t.text.as_str());
                }
                TokenKind::Identifier | TokenKind::Literal => {
                    c.total_operands += 1;
                    opnds.insert(t.text.as_str());
                }
                TokenKind::Punctuation => {}
            }
        }
        c.distinct_operators = ops.len();
        c.distinct_operands = opnds.len();
        c
    }

    pub fn length(&self) -> usize {
        self.total_operators + self.total_operands
    }

    pub fn vocabulary(&self) -> usize {
        self.distinct_operators + self.distinct_operands
    }

    /// `length · log2(vocabulary)`, zero for an empty vocabulary.
    pub fn volume<T: Scalar>(&self) -> T {
        let n = self.vocabulary();
        if n == 0 {
            return T::zero();
        }
        T::from_count(self.length()) * T::from_count(n).log2()
    }
}

pub fn halstead_volume<T: Scalar>(tokens: &[Token]) -> T {
    HalsteadCounts::from_tokens(tokens).volume()
}

/// `171 − 5.2·ln(HV) − 0.23·CC − 16.2·ln(SLOC)`, with HV and SLOC clamped
/// to at least 1 so the logarithms stay finite.
pub fn maintainability_index<T: Scalar>(sloc: usize, mccabe: usize, hv: T) -> T {
    let hv = hv.max(T::one());
    let sloc = T::from_count(sloc.max(1));
    T::lit(171.0) - T::lit(5.2) * hv.ln() - T::lit(0.23) * T::from_count(mccabe) - T::lit(16.2) * sloc.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord<T = f64> {
    pub subject: String,
    pub level: Level,
    pub sloc: usize,
    pub mccabe: usize,
    pub halstead_volume: T,
    pub maintainability_index: T,
}

impl<T: Scalar> MetricsRecord<T> {
    pub fn from_tokens(subject: impl Into<String>, level: Level, tokens: &[Token]) -> Self {
        let sloc = sloc(tokens);
        let mccabe = mccabe(tokens);
        let hv = halstead_volume::<T>(tokens);
        MetricsRecord {
            subject: subject.into(),
            level,
            sloc,
            mccabe,
            halstead_volume: hv,
            maintainability_index: maintainability_index(sloc, mccabe, hv),
        }
    }
}

/// Records for one source plus non-fatal lexer diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis<T = f64> {
    pub records: Vec<MetricsRecord<T>>,
    pub diagnostics: Vec<LexError>,
}

/// File level yields one record named `subject`; method level yields one
/// record per method, named `subject#method`.
pub fn analyze<T: Scalar>(subject: &str, source: &str, level: Level) -> Result<Analysis<T>, MetricsError> {
    let stream = tokenize(source);
    let records = match level {
        Level::File => vec![MetricsRecord::from_tokens(subject, Level::File, &stream.tokens)],
        Level::Method => extract_methods(&stream)?
            .iter()
            .map(|m| MetricsRecord::from_tokens(format!("{subject}#{}", m.name), Level::Method, &m.body_tokens))
            .collect(),
    };
    Ok(Analysis {
        records,
        diagnostics: stream.errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Token> {
        tokenize(src).tokens
    }

    #[test]
    fn sloc_examples() {
        assert_eq!(sloc(&toks("")), 0);
        let src = "uint a;\n// one\nuint b;\n\n/* two */\nuint c;";
        assert_eq!(sloc(&toks(src)), 3);
        assert_eq!(sloc(&toks("a = 1; // trailing")), 1);
    }

    #[test]
    fn mccabe_examples() {
        assert_eq!(mccabe(&toks("return x;")), 1);
        assert_eq!(mccabe(&toks("if (a) { for (;;) {} }")), 3);
        let file = "contract C {\n function f() public { x; }\n function g() public { if (a) {} for (;;) {} }\n}";
        assert_eq!(mccabe(&toks(file)), 3);
        assert_eq!(mccabe(&toks("x = a ? b : c; do { } while (y); try f() {} catch {}")), 5);
        // `&&` and `||` are not decision points; `else if` counts via its `if`.
        assert_eq!(mccabe(&toks("if (a && b || c) {} else if (d) {}")), 3);
        assert_eq!(mccabe(&toks("using SafeMath for uint256;")), 1);
    }

    #[test]
    fn halstead_examples() {
        assert_eq!(halstead_volume::<f64>(&[]), 0.0);
        let c = HalsteadCounts::from_tokens(&toks("a = b + c"));
        assert_eq!(
            c,
            HalsteadCounts {
                distinct_operators: 2,
                distinct_operands: 3,
                total_operators: 2,
                total_operands: 3
            }
        );
        assert!((halstead_volume::<f64>(&toks("a = b + c")) - 5.0 * 5f64.log2()).abs() < 1e-12);
        assert!((halstead_volume::<f64>(&toks("a = b + c")) - 11.6096).abs() < 1e-4);
        assert_eq!(halstead_volume::<f64>(&toks("a = a")), 3.0);
        // Grouping punctuation is ignored.
        assert_eq!(halstead_volume::<f64>(&toks("(a = a);")), 3.0);
    }

    #[test]
    fn maintainability_examples() {
        assert!((maintainability_index(1, 1, 1.0f64) - 170.77).abs() < 1e-9);
        let direct = 171.0 - 5.2 * 1000f64.ln() - 0.23 * 10.0 - 16.2 * 100f64.ln();
        assert!((maintainability_index(100, 10, 1000.0f64) - direct).abs() < 1e-9);
        assert!((maintainability_index(100, 10, 1000.0f64) - 58.176).abs() < 1e-3);
        assert!((maintainability_index(0, 1, 0.0f64) - 170.77).abs() < 1e-9);
        assert!((maintainability_index(1, 1, 1.0f32) - 170.77).abs() < 1e-4);
    }

    #[test]
    fn getter_method_level() {
        let src = "contract C {\n uint x;\n function get() public view returns (uint) {\n  return x;\n }\n}";
        let a = analyze::<f64>("C.sol", src, Level::Method).unwrap();
        assert_eq!(a.records.len(), 1);
        assert_eq!(a.records[0].subject, "C.sol#get");
        assert_eq!((a.records[0].sloc, a.records[0].mccabe), (1, 1));
    }

    #[test]
    fn empty_file_level() {
        let a = analyze::<f64>("e.sol", "", Level::File).unwrap();
        let r = &a.records[0];
        assert_eq!((r.sloc, r.mccabe, r.halstead_volume), (0, 1, 0.0));
        assert!((r.maintainability_index - 170.77).abs() < 1e-9);
    }

    #[test]
    fn lexer_errors_become_diagnostics() {
        let a = analyze::<f64>("x.sol", "uint a;\n/* open", Level::File).unwrap();
        assert_eq!(a.diagnostics.len(), 1);
        assert_eq!(a.records[0].sloc, 1);
    }

    #[test]
    fn level_parsing() {
        assert_eq!("file".parse::<Level>().unwrap(), Level::File);
        assert_eq!("method".parse::<Level>().unwrap(), Level::Method);
        assert!("both".parse::<Level>().is_err());
    }
}
