//! On-disk dataset layout.
//!
//! ```text
//! root/
//!   manifest.json
//!   <ContractName>/<deployer>/<address>_<ContractName>_V<index>.sol
//! ```
//!
//! Addresses are lowercase hex. Version indices start at 1.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linker::{ContractIdentity, ContractVersion};
use crate::primitives::Address;

pub const MANIFEST_FILE: &str = "manifest.json";
const ADDRESS_CHARS: usize = 42;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("malformed file name {0:?}")]
    MalformedName(String),
    #[error("contract name {0:?} cannot be used as a directory name")]
    InvalidContractName(String),
    #[error("version {index} of {address} has no source text")]
    MissingSource { address: Address, index: u32 },
    #[error("{path} already exists with different content")]
    Conflict { path: PathBuf },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Splits `<address>_<name>.sol` into its parts. The name may itself contain
/// underscores.
pub fn parse_sanctuary_name(filename: &str) -> Result<(Address, String), StoreError> {
    let malformed = || StoreError::MalformedName(filename.to_string());
    let stem = filename.strip_suffix(".sol").ok_or_else(malformed)?;
    if stem.len() <= ADDRESS_CHARS + 1 || !stem.is_char_boundary(ADDRESS_CHARS) {
        return Err(malformed());
    }
    let (addr, rest) = stem.split_at(ADDRESS_CHARS);
    let name = rest.strip_prefix('_').ok_or_else(malformed)?;
    let address: Address = addr.parse().map_err(|_| malformed())?;
    if name.is_empty() {
        return Err(malformed());
    }
    Ok((address, name.to_string()))
}

/// File name of a stored version.
pub fn version_file_name(address: &Address, name: &str, index: u32) -> String {
    format!("{address}_{name}_V{index}.sol")
}

/// Inverse of [`version_file_name`].
pub fn parse_version_file_name(filename: &str) -> Result<(Address, String, u32), StoreError> {
    let malformed = || StoreError::MalformedName(filename.to_string());
    let (address, rest) = parse_sanctuary_name(filename)?;
    let (name, index) = rest.rsplit_once("_V").ok_or_else(malformed)?;
    if name.is_empty() || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let index: u32 = index.parse().map_err(|_| malformed())?;
    if index == 0 {
        return Err(malformed());
    }
    Ok((address, name.to_string(), index))
}

fn check_contract_name(name: &str) -> Result<(), StoreError> {
    let ok =
        !name.is_empty() && name != "." && name != ".." && !name.contains(['/', '\\', '\0']) && !name.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidContractName(name.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredVersion {
    pub address: Address,
    pub version_index: u32,
    pub path: PathBuf,
}

impl StoredVersion {
    pub fn read_source(&self) -> Result<String, StoreError> {
        fs::read_to_string(&self.path).map_err(io_err(&self.path))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredFamily {
    pub identity: ContractIdentity,
    /// Sorted by version index.
    pub versions: Vec<StoredVersion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StoreScan {
    /// Sorted by name, then deployer.
    pub families: Vec<StoredFamily>,
    pub diagnostics: Vec<String>,
}

impl IntoIterator for StoreScan {
    type Item = StoredFamily;
    type IntoIter = std::vec::IntoIter<StoredFamily>;

    fn into_iter(self) -> Self::IntoIter {
        self.families.into_iter()
    }
}

/// Counts recorded after an extraction run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub seeds: usize,
    pub families: usize,
    pub versions: usize,
    pub excluded_anomalous: usize,
    pub failed: usize,
    /// Identities of families dropped by the anomaly threshold.
    #[serde(default)]
    pub excluded: Vec<ContractIdentity>,
}

#[derive(Debug, Clone)]
pub struct DatasetLayout {
    root: PathBuf,
}

impl DatasetLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DatasetLayout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn family_dir(&self, identity: &ContractIdentity) -> PathBuf {
        self.root.join(&identity.name).join(identity.deployer.to_string())
    }

    pub fn version_path(&self, identity: &ContractIdentity, address: &Address, index: u32) -> PathBuf {
        self.family_dir(identity)
            .join(version_file_name(address, &identity.name, index))
    }

    /// Writes one version atomically. Writing identical content again is a
    /// no-op; different content at the same path is a conflict.
    pub fn write_version(&self, version: &ContractVersion) -> Result<PathBuf, StoreError> {
        check_contract_name(&version.identity.name)?;
        if version.source.source_text.is_empty() {
            return Err(StoreError::MissingSource {
                address: version.address,
                index: version.version_index,
            });
        }
        let dir = self.family_dir(&version.identity);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = self.version_path(&version.identity, &version.address, version.version_index);
        let content = version.source.source_text.as_bytes();

        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(&dir))?;
        tmp.write_all(content).map_err(io_err(tmp.path()))?;
        tmp.as_file().sync_all().map_err(io_err(&path))?;
        match tmp.persist_noclobber(&path) {
            Ok(_) => Ok(path),
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => {
                let existing = fs::read(&path).map_err(io_err(&path))?;
                if existing == content {
                    Ok(path)
                } else {
                    Err(StoreError::Conflict { path })
                }
            }
            Err(e) => Err(StoreError::Io { path, source: e.error }),
        }
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<PathBuf, StoreError> {
        fs::create_dir_all(&self.root).map_err(io_err(&self.root))?;
        let path = self.root.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(manifest).map_err(|source| StoreError::Json {
            path: path.clone(),
            source,
        })?;
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn read_manifest(&self) -> Result<Manifest, StoreError> {
        let path = self.root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|source| StoreError::Json { path, source })
    }

    /// Scans the layout. Files and directories that do not conform are
    /// skipped and reported in `diagnostics`.
    pub fn read_families(&self) -> Result<StoreScan, StoreError> {
        let mut scan = StoreScan::default();
        for name_entry in sorted_entries(&self.root)? {
            let name_path = name_entry.path();
            let Some(name) = file_name(&name_path) else {
                scan.diagnostics
                    .push(format!("{}: non-UTF-8 name", name_path.display()));
                continue;
            };
            if !name_path.is_dir() {
                if name != MANIFEST_FILE {
                    scan.diagnostics
                        .push(format!("{}: not a family directory", name_path.display()));
                }
                continue;
            }
            for dep_entry in sorted_entries(&name_path)? {
                let dep_path = dep_entry.path();
                let deployer = match file_name(&dep_path).and_then(|d| d.parse::<Address>().ok()) {
                    Some(d) if dep_path.is_dir() => d,
                    _ => {
                        scan.diagnostics
                            .push(format!("{}: not a deployer directory", dep_path.display()));
                        continue;
                    }
                };
                let mut versions = Vec::new();
                for file in sorted_entries(&dep_path)? {
                    let path = file.path();
                    let parsed = file_name(&path).map(parse_version_file_name);
                    match parsed {
                        Some(Ok((address, file_contract, index))) if file_contract == name && path.is_file() => {
                            versions.push(StoredVersion {
                                address,
                                version_index: index,
                                path,
                            })
                        }
                        _ => scan.diagnostics.push(format!("{}: not a version file", path.display())),
                    }
                }
                if versions.is_empty() {
                    continue;
                }
                versions.sort_by_key(|v| (v.version_index, v.address));
                scan.families.push(StoredFamily {
                    identity: ContractIdentity {
                        name: name.to_string(),
                        deployer,
                    },
                    versions,
                });
            }
        }
        scan.families.sort_by(|a, b| a.identity.cmp(&b.identity));
        Ok(scan)
    }
}

fn file_name(path: &Path) -> Option<&str> {
    path.file_name().and_then(|n| n.to_str())
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>, StoreError> {
    let mut entries = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err(dir))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{AbiSpec, Transaction, VerifiedSource};
    use crate::{Bytes, TxHash};

    fn version(name: &str, deployer: u8, addr: u8, index: u32, text: &str) -> ContractVersion {
        ContractVersion {
            identity: ContractIdentity {
                name: name.into(),
                deployer: Address([deployer; 20]),
            },
            address: Address([addr; 20]),
            version_index: index,
            creation_tx: Transaction {
                hash: TxHash([addr; 32]),
                from_addr: Address([deployer; 20]),
                to_addr: None,
                input: Bytes(vec![]),
                contract_address: Some(Address([addr; 20])),
                block_number: u64::from(index),
                tx_index: 0,
                timestamp: 0,
            },
            source: VerifiedSource::new(name, text, AbiSpec::default()),
        }
    }

    #[test]
    fn sanctuary_names() {
        let (a, n) = parse_sanctuary_name("0x004de0313fd383c166b6f4390f1ba6c476c505d1_MultiSigStub.sol").unwrap();
        assert_eq!(a.to_string(), "0x004de0313fd383c166b6f4390f1ba6c476c505d1");
        assert_eq!(n, "MultiSigStub");
        assert!(matches!(
            parse_sanctuary_name("Foo.sol"),
            Err(StoreError::MalformedName(_))
        ));
        let (_, n) = parse_sanctuary_name("0xABCDEF0123456789abcdef0123456789ABCDEF01_My_Token.sol").unwrap();
        assert_eq!(n, "My_Token");
        assert!(parse_sanctuary_name("0x004de0313fd383c166b6f4390f1ba6c476c505d1_MultiSigStub.txt").is_err());
        assert!(parse_sanctuary_name("0x004de0313fd383c166b6f4390f1ba6c476c505d1_.sol").is_err());
        assert!(parse_sanctuary_name("0x004de0313fd383c166b6f4390f1ba6c476c505d1MultiSigStub.sol").is_err());
    }

    #[test]
    fn version_file_names_round_trip() {
        let a = Address([0xab; 20]);
        let f = version_file_name(&a, "MultiSigStub", 640);
        assert!(f.ends_with("_MultiSigStub_V640.sol"));
        assert_eq!(parse_version_file_name(&f).unwrap(), (a, "MultiSigStub".into(), 640));
        let f = version_file_name(&a, "Token_V2", 3);
        assert_eq!(parse_version_file_name(&f).unwrap().1, "Token_V2");
        assert!(parse_version_file_name(&version_file_name(&a, "X", 0)).is_err());
        assert!(parse_version_file_name(&format!("{a}_Foo.sol")).is_err());
    }

    #[test]
    fn layout_and_idempotent_write() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        let v = version("Foo", 0xd0, 1, 1, "contract Foo {}");
        let p = layout.write_version(&v).unwrap();
        let expected = dir
            .path()
            .join("Foo")
            .join(Address([0xd0; 20]).to_string())
            .join(format!("{}_Foo_V1.sol", Address([1; 20])));
        assert_eq!(p, expected);
        assert_eq!(layout.write_version(&v).unwrap(), p);
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);

        let changed = version("Foo", 0xd0, 1, 1, "contract Foo { uint x; }");
        assert!(matches!(
            layout.write_version(&changed),
            Err(StoreError::Conflict { .. })
        ));
        assert_eq!(fs::read_to_string(&p).unwrap(), "contract Foo {}");
    }

    #[test]
    fn two_deployers_are_siblings() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        layout.write_version(&version("Foo", 1, 10, 1, "a")).unwrap();
        layout.write_version(&version("Foo", 2, 11, 1, "b")).unwrap();
        assert_eq!(fs::read_dir(dir.path().join("Foo")).unwrap().count(), 2);
        let scan = layout.read_families().unwrap();
        assert_eq!(scan.families.len(), 2);
    }

    #[test]
    fn read_back_in_index_order_with_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        for (addr, idx) in [(3u8, 3u32), (1, 1), (2, 2)] {
            layout.write_version(&version("Foo", 9, addr, idx, "x")).unwrap();
        }
        let fam_dir = layout.family_dir(&version("Foo", 9, 1, 1, "x").identity);
        fs::write(fam_dir.join("README.md"), "notes").unwrap();
        layout.write_manifest(&Manifest::default()).unwrap();

        let scan = layout.read_families().unwrap();
        assert_eq!(scan.families.len(), 1);
        let idx: Vec<u32> = scan.families[0].versions.iter().map(|v| v.version_index).collect();
        assert_eq!(idx, vec![1, 2, 3]);
        assert_eq!(scan.diagnostics.len(), 1);
        assert!(scan.diagnostics[0].contains("README.md"));
        assert_eq!(scan.families[0].versions[1].read_source().unwrap(), "x");
    }

    #[test]
    fn empty_root_and_bad_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        assert!(layout.read_families().unwrap().families.is_empty());
        assert!(matches!(
            layout.write_version(&version("Foo", 1, 1, 1, "")),
            Err(StoreError::MissingSource { .. })
        ));
        assert!(matches!(
            layout.write_version(&version("../x", 1, 1, 1, "a")),
            Err(StoreError::InvalidContractName(_))
        ));
        assert!(layout.read_manifest().is_err());
        let m = Manifest {
            seeds: 5,
            families: 4,
            versions: 10,
            excluded_anomalous: 1,
            failed: 0,
            excluded: vec![],
        };
        layout.write_manifest(&m).unwrap();
        assert_eq!(layout.read_manifest().unwrap(), m);
    }
}
