//! Flat binary parameter checkpoints.
//!
//! Layout (little-endian): magic `RSPL`, version u32, H u32, D u32, C u32,
//! then the xi (H*D), gamma (H), mu (H*C) and omega (H) arrays as f64
//! row-major. A JSON sidecar at `<path>.json` carries free-form metadata.

use crate::error::{Error, Result};
use crate::network::SplineParams;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"RSPL";
const VERSION: u32 = 1;

/// Sidecar metadata; all fields optional free text.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct CheckpointMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

pub fn save_checkpoint(path: &Path, params: &SplineParams, meta: &CheckpointMeta) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MAGIC)?;
    for v in [VERSION, params.h() as u32, params.d() as u32, params.c() as u32] {
        out.write_all(&v.to_le_bytes())?;
    }
    let mut write_all = |vals: &mut dyn Iterator<Item = f64>| -> Result<()> {
        for v in vals {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    };
    write_all(&mut params.xi.iter().copied())?;
    write_all(&mut params.gamma.iter().copied())?;
    write_all(&mut params.mu.iter().copied())?;
    write_all(&mut params.omega.iter().copied())?;
    drop(write_all);
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(meta).unwrap())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(SplineParams, CheckpointMeta)> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:?}, expected RSPL")));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |f: &mut dyn Read| -> Result<u32> {
        f.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut file)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let h = read_u32(&mut file)? as usize;
    let d = read_u32(&mut file)? as usize;
    let c = read_u32(&mut file)? as usize;
    drop(read_u32);
    let mut read_vec = |count: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; count * 8];
        file.read_exact(&mut buf).map_err(|e| {
            Error::Checkpoint(format!("truncated parameter block: {e}"))
        })?;
        Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    };
    let xi = Array2::from_shape_vec((h, d), read_vec(h * d)?).unwrap();
    let gamma = Array1::from_vec(read_vec(h)?);
    let mu = Array2::from_shape_vec((h, c), read_vec(h * c)?).unwrap();
    let omega = Array1::from_vec(read_vec(h)?);
    let params = SplineParams { xi, gamma, mu, omega };
    params.validate().map_err(|e| Error::Checkpoint(format!("invalid parameters: {e}")))?;
    let meta = match std::fs::read_to_string(sidecar_path(path)) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("bad sidecar: {e}")))?,
        Err(_) => CheckpointMeta::default(),
    };
    Ok((params, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join("rspl-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("net.rspl");
        let params = SplineParams::init_uniform(7, 3, 2, 1.5, 42);
        let meta = CheckpointMeta {
            activation: Some("relu".into()),
            seed: Some(42),
            step: Some(3),
            note: None,
        };
        save_checkpoint(&path, &params, &meta).unwrap();
        let (loaded, loaded_meta) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, params);
        assert_eq!(loaded_meta, meta);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let dir = std::env::temp_dir().join("rspl-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let bad = dir.join("bad.rspl");
        std::fs::write(&bad, b"NOPE").unwrap();
        assert!(load_checkpoint(&bad).is_err());

        let trunc = dir.join("trunc.rspl");
        let params = SplineParams::init_uniform(4, 2, 1, 1.0, 1);
        save_checkpoint(&trunc, &params, &CheckpointMeta::default()).unwrap();
        let bytes = std::fs::read(&trunc).unwrap();
        std::fs::write(&trunc, &bytes[..bytes.len() - 9]).unwrap();
        assert!(load_checkpoint(&trunc).is_err());
    }
}
