//! SHA-256 content digests for manifests and file headers.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::Result;

pub fn sha256_bytes(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

pub fn sha256_file(path: &Path) -> Result<[u8; 32]> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().into())
}

pub fn to_hex(digest: &[u8; 32]) -> String {
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// `sha256:<hex>` form used everywhere a digest appears in JSON.
pub fn format_digest(digest: &[u8; 32]) -> String {
    format!("sha256:{}", to_hex(digest))
}

pub fn file_digest_string(path: &Path) -> Result<String> {
    Ok(format_digest(&sha256_file(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_value() {
        // SHA-256 of the empty string.
        assert_eq!(
            to_hex(&sha256_bytes(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn file_and_bytes_agree() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        std::fs::write(&path, b"abc123").unwrap();
        assert_eq!(sha256_file(&path).unwrap(), sha256_bytes(b"abc123"));
        assert!(format_digest(&sha256_bytes(b"abc123")).starts_with("sha256:"));
    }
}
