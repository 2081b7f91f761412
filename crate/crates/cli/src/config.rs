use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use verscan_core::gateway::DEFAULT_API_URL;
use verscan_core::linker::DEFAULT_MAX_VERSIONS;
use verscan_core::metrics::Level;
use verscan_core::satd::KeywordList;

pub const DEFAULT_WORKERS: usize = 3;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub keys: Option<PathBuf>,
    pub workers: usize,
    pub max_versions: usize,
    pub fixtures: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub vulns: Option<PathBuf>,
    pub level: Level,
    pub api_url: String,
    /// Save every explorer response here for later offline replay.
    pub record: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            output: output.into(),
            keys: None,
            workers: DEFAULT_WORKERS,
            max_versions: DEFAULT_MAX_VERSIONS,
            fixtures: None,
            keywords: None,
            vulns: None,
            level: Level::File,
            api_url: DEFAULT_API_URL.to_string(),
            record: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            bail!("--workers must be at least 1");
        }
        if self.max_versions == 0 {
            bail!("--max-versions must be at least 1");
        }
        if self.fixtures.is_some() && self.record.is_some() {
            bail!("--record cannot be combined with --fixtures");
        }
        Ok(())
    }

    pub fn keyword_list(&self) -> Result<KeywordList> {
        match &self.keywords {
            None => Ok(KeywordList::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading keyword list {}", path.display()))?;
                let list = KeywordList::parse(&text);
                if list.phrases.is_empty() {
                    bail!("keyword list {} is empty", path.display());
                }
                Ok(list)
            }
        }
    }

    pub fn vulns_path(&self) -> Result<&Path> {
        self.vulns
            .as_deref()
            .context("--vulns <report.json> is required for this command")
    }
}
