//! On-disk cache of algebra presentations keyed by (type, rank, p).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use endoscope_core::algebra::{build_restricted_enveloping, PbwAlgebra, Presentation};
use endoscope_core::rootdata::{build_root_system, RootType};

const FORMAT: &str = "endoscope-algebra-v1";

pub struct AlgebraCache {
    dir: PathBuf,
}

impl AlgebraCache {
    /// `ENDOSCOPE_CACHE_DIR`, else a directory under the system temp dir.
    pub fn from_env() -> AlgebraCache {
        let dir = std::env::var_os("ENDOSCOPE_CACHE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("endoscope-cache"));
        AlgebraCache { dir }
    }

    pub fn at(dir: &Path) -> AlgebraCache {
        AlgebraCache { dir: dir.to_path_buf() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, kind: RootType, rank: usize, p: u32) -> PathBuf {
        let digest = Sha256::digest(format!("{FORMAT}|{kind}|{rank}|{p}").as_bytes());
        let hash8: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("alg-{kind}{rank}-p{p}-{hash8}.json"))
    }

    /// Load a cached presentation, or build and store it. Unreadable or stale
    /// entries are rebuilt.
    pub fn get(&self, kind: RootType, rank: usize, p: u32) -> Result<Arc<PbwAlgebra>> {
        let path = self.path_for(kind, rank, p);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(pres) = serde_json::from_str::<Presentation>(&text) {
                if let Ok(alg) = PbwAlgebra::from_presentation(&pres) {
                    if alg.p() == p {
                        return Ok(Arc::new(alg));
                    }
                }
            }
        }
        let rs = build_root_system(kind, rank).map_err(|e| anyhow::anyhow!("{e}"))?;
        let alg = build_restricted_enveloping(&rs, p).map_err(|e| anyhow::anyhow!("{e}"))?;
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&alg.presentation())?)?;
        fs::rename(&tmp, &path)?;
        Ok(Arc::new(alg))
    }
}
