use serde::{Deserialize, Serialize};

pub const DEFAULT_KEYWORDS: [&str; 9] = [
    "todo",
    "fix",
    "fixme",
    "deprecated",
    "refactor",
    "temporary",
    "wip",
    "work in progress",
    "workaround",
];

/// Debt-signalling phrases, lowercase. Multi-word phrases match as
/// consecutive words with any whitespace between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordList {
    pub phrases: Vec<String>,
}

impl Default for KeywordList {
    fn default() -> Self {
        KeywordList {
            phrases: DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Lowercase words of `text`; word characters are ASCII alphanumerics and `_`.
pub(crate) fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl KeywordList {
    pub fn new<S: AsRef<str>>(phrases: impl IntoIterator<Item = S>) -> Self {
        KeywordList {
            phrases: phrases
                .into_iter()
                .map(|p| {
                    p.as_ref()
                        .split_whitespace()
                        .collect::<Vec<_>>()
                        .join(" ")
                        .to_lowercase()
                })
                .filter(|p| !p.is_empty())
                .collect(),
        }
    }

    /// One phrase per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty()),
        )
    }

    /// First phrase, in list order, occurring in `text` on word boundaries.
    pub fn first_match(&self, text: &str) -> Option<&str> {
        let ws = words(text);
        self.phrases
            .iter()
            .find(|p| {
                let pw: Vec<&str> = p.split(' ').collect();
                ws.windows(pw.len()).any(|w| w.iter().zip(&pw).all(|(a, b)| a == b))
            })
            .map(String::as_str)
    }
}
