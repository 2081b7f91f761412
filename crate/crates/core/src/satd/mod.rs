//! Self-admitted technical debt: keyword-bearing comments, the code they
//! refer to, and how both change across a family's versions.

pub mod keywords;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linker::ContractIdentity;
use crate::metrics::{
    extract_methods, normalize_tokens, tokenize, Comment, MethodSpan, MetricsError, TokenKind, TokenStream,
};
use crate::Scalar;
pub use keywords::{KeywordList, DEFAULT_KEYWORDS};

pub const FILE_SCOPE: &str = "file-scope";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatdError {
    #[error("no timelines to summarise")]
    EmptyInput,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatdInstance {
    /// Lowercased, whitespace-collapsed comment text.
    pub comment_text: String,
    pub matched_keyword: String,
    /// Normalized code the comment refers to.
    pub snippet: String,
    /// Enclosing method name, or [`FILE_SCOPE`].
    pub location: String,
    pub line: u32,
}

pub fn normalize_comment(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Instances for keyword-bearing comments, one per comment. Snippets are
/// left empty and the location is file scope until linked.
pub fn detect_satd(comments: &[Comment], keywords: &KeywordList) -> Vec<SatdInstance> {
    comments
        .iter()
        .filter_map(|c| {
            keywords.first_match(&c.text).map(|k| SatdInstance {
                comment_text: normalize_comment(&c.text),
                matched_keyword: k.to_string(),
                snippet: String::new(),
                location: FILE_SCOPE.to_string(),
                line: c.start_line,
            })
        })
        .collect()
}

/// Location and normalized snippet for a comment: the enclosing method's
/// body, or at file scope the code from the comment through the end of the
/// next statement or block.
pub fn link_snippet(comment: &Comment, stream: &TokenStream, methods: &[MethodSpan]) -> (String, String) {
    if let Some(m) = methods.iter().find(|m| m.contains_offset(comment.offset)) {
        return (m.name.clone(), normalize_tokens(&m.body_tokens));
    }
    let start = stream.tokens.partition_point(|t| t.offset < comment.end_offset);
    let rest = &stream.tokens[start..];
    let mut depth = 0i64;
    let mut end = 0;
    for (i, t) in rest.iter().enumerate() {
        if t.kind == TokenKind::Punctuation {
            match t.text.as_str() {
                "{" => depth += 1,
                "}" => {
                    depth -= 1;
                    if depth < 0 {
                        break;
                    }
                    if depth == 0 {
                        end = i + 1;
                        break;
                    }
                }
                ";" if depth == 0 => {
                    end = i + 1;
                    break;
                }
                _ => {}
            }
        }
        end = i + 1;
    }
    (FILE_SCOPE.to_string(), normalize_tokens(&rest[..end]))
}

/// Normalized code of one version, used to decide whether a removed
/// comment's snippet still exists unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeView {
    pub methods: BTreeMap<String, Vec<String>>,
    pub full: String,
}

impl CodeView {
    pub fn new(stream: &TokenStream, methods: &[MethodSpan]) -> Self {
        let mut by_name: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for m in methods {
            by_name
                .entry(m.name.clone())
                .or_default()
                .push(normalize_tokens(&m.body_tokens));
        }
        CodeView {
            methods: by_name,
            full: normalize_tokens(&stream.tokens),
        }
    }

    /// Whether `snippet` survives unchanged at `location`.
    pub fn has_snippet(&self, location: &str, snippet: &str) -> bool {
        if location == FILE_SCOPE {
            snippet.is_empty() || format!(" {} ", self.full).contains(&format!(" {snippet} "))
        } else {
            self.methods
                .get(location)
                .is_some_and(|bodies| bodies.iter().any(|b| b == snippet))
        }
    }
}

/// Debt found in one version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionDebt {
    pub version_index: u32,
    pub instances: Vec<SatdInstance>,
    #[serde(skip)]
    pub code: CodeView,
}

/// Detects and links every debt comment in `source`.
pub fn scan_source(version_index: u32, source: &str, keywords: &KeywordList) -> Result<VersionDebt, SatdError> {
    let stream = tokenize(source);
    let methods = extract_methods(&stream)?;
    let mut instances = detect_satd(&stream.comments, keywords);
    let debt_comments = stream
        .comments
        .iter()
        .filter(|c| keywords.first_match(&c.text).is_some());
    for (inst, comment) in instances.iter_mut().zip(debt_comments) {
        let (location, snippet) = link_snippet(comment, &stream, &methods);
        inst.location = location;
        inst.snippet = snippet;
    }
    Ok(VersionDebt {
        version_index,
        instances,
        code: CodeView::new(&stream, &methods),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DebtEventKind {
    Introduced,
    Resolved,
    InconsistentCommentRemoval,
    PersistsDespiteCodeChange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebtEvent {
    pub kind: DebtEventKind,
    pub comment_text: String,
    /// Which occurrence of `comment_text` within its version (0-based).
    pub occurrence: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionTimeline {
    pub version_index: u32,
    pub instances: Vec<SatdInstance>,
    /// Changes relative to the previous version.
    pub events: Vec<DebtEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebtTimeline {
    pub family: ContractIdentity,
    pub per_version: Vec<VersionTimeline>,
}

impl DebtTimeline {
    pub fn initial_debt(&self) -> usize {
        self.per_version.first().map_or(0, |v| v.instances.len())
    }

    pub fn count(&self, kind: DebtEventKind) -> usize {
        self.per_version
            .iter()
            .flat_map(|v| &v.events)
            .filter(|e| e.kind == kind)
            .count()
    }
}

/// Instances keyed by (comment text, occurrence number).
fn keyed(instances: &[SatdInstance]) -> Vec<((&str, usize), &SatdInstance)> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    instances
        .iter()
        .map(|i| {
            let n = seen.entry(i.comment_text.as_str()).or_insert(0);
            let key = (i.comment_text.as_str(), *n);
            *n += 1;
            (key, i)
        })
        .collect()
}

fn event(kind: DebtEventKind, key: (&str, usize)) -> DebtEvent {
    DebtEvent {
        kind,
        comment_text: key.0.to_string(),
        occurrence: key.1,
    }
}

/// Compares adjacent versions. Instances match by exact comment text, the
/// n-th duplicate to the n-th duplicate.
pub fn track_evolution(family: ContractIdentity, versions: &[VersionDebt]) -> DebtTimeline {
    let mut per_version = Vec::with_capacity(versions.len());
    for (i, cur) in versions.iter().enumerate() {
        let mut events = Vec::new();
        if i > 0 {
            let prev = &versions[i - 1];
            let prev_keys = keyed(&prev.instances);
            let cur_keys: HashMap<(&str, usize), &SatdInstance> = keyed(&cur.instances).into_iter().collect();
            for (key, old) in &prev_keys {
                match cur_keys.get(key) {
                    Some(new) if new.snippet != old.snippet => {
                        events.push(event(DebtEventKind::PersistsDespiteCodeChange, *key))
                    }
                    Some(_) => {}
                    None if cur.code.has_snippet(&old.location, &old.snippet) => {
                        events.push(event(DebtEventKind::InconsistentCommentRemoval, *key))
                    }
                    None => events.push(event(DebtEventKind::Resolved, *key)),
                }
            }
            let prev_set: HashMap<(&str, usize), ()> = prev_keys.iter().map(|(k, _)| (*k, ())).collect();
            for (key, _) in keyed(&cur.instances) {
                if !prev_set.contains_key(&key) {
                    events.push(event(DebtEventKind::Introduced, key));
                }
            }
        }
        per_version.push(VersionTimeline {
            version_index: cur.version_index,
            instances: cur.instances.clone(),
            events,
        });
    }
    DebtTimeline { family, per_version }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebtStats<T = f64> {
    pub families: usize,
    pub mean_initial_debt: T,
    pub median_initial_debt: T,
    /// Share of families with initial debt that later resolved some debt.
    pub pct_with_removal: T,
    pub families_with_initial_debt: usize,
    pub families_with_removal: usize,
    /// Set when no family carries initial debt; the percentage is then 0.
    pub removal_undefined: bool,
}

pub fn debt_stats<T: Scalar>(timelines: &[DebtTimeline]) -> Result<DebtStats<T>, SatdError> {
    if timelines.is_empty() {
        return Err(SatdError::EmptyInput);
    }
    let mut initial: Vec<usize> = timelines.iter().map(DebtTimeline::initial_debt).collect();
    initial.sort_unstable();
    let n = initial.len();
    let mean = T::from_count(initial.iter().sum::<usize>()) / T::from_count(n);
    let median = if n % 2 == 1 {
        T::from_count(initial[n / 2])
    } else {
        (T::from_count(initial[n / 2 - 1]) + T::from_count(initial[n / 2])) / T::lit(2.0)
    };
    let with_debt: Vec<&DebtTimeline> = timelines.iter().filter(|t| t.initial_debt() > 0).collect();
    let removed = with_debt
        .iter()
        .filter(|t| t.count(DebtEventKind::Resolved) > 0)
        .count();
    let undefined = with_debt.is_empty();
    let pct = if undefined {
        T::zero()
    } else {
        T::lit(100.0) * T::from_count(removed) / T::from_count(with_debt.len())
    };
    Ok(DebtStats {
        families: n,
        mean_initial_debt: mean,
        median_initial_debt: median,
        pct_with_removal: pct,
        families_with_initial_debt: with_debt.len(),
        families_with_removal: removed,
        removal_undefined: undefined,
    })
}

#[cfg(test)]
mod tests;
