use tiny_keccak::{Hasher, Keccak};

pub type Selector = [u8; 4];

pub fn keccak256(data: impl AsRef<[u8]>) -> [u8; 32] {
    let mut out = [0u8; 32];
    let mut h = Keccak::v256();
    h.update(data.as_ref());
    h.finalize(&mut out);
    out
}

/// First four bytes of the Keccak-256 hash of a canonical method signature.
pub fn selector_of(canonical_signature: &str) -> Selector {
    let h = keccak256(canonical_signature.as_bytes());
    [h[0], h[1], h[2], h[3]]
}

/// Leading selector of call data, if there are at least four bytes.
pub fn selector_from_input(input: &[u8]) -> Option<Selector> {
    input.get(..4).map(|s| [s[0], s[1], s[2], s[3]])
}
