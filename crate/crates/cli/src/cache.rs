//! Persistent cache of eigenbases and Petersson norms.
//!
//! One JSON file per key, `{"digest": <sha256 of payload>, "payload": ...}`,
//! with every real stored as a decimal string that parses back to the same
//! binary value at the stated precision. Files are written to a temporary
//! name and renamed into place, so readers never see partial entries.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use quelab_core::eigenforms::{EigenBasis, Eigenform};
use quelab_core::qseries::IntPoly;
use quelab_core::rug::{Float, Integer};
use quelab_core::specfun::LogReal;
use quelab_core::verify::{BasisProvider, DirectProvider};
use quelab_core::Result;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever the stored layout or the numerics behind it change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheKey {
    pub k: u32,
    pub ncoeffs: usize,
    pub precision_bits: u32,
    pub schema_version: u32,
}

impl CacheKey {
    pub fn new(k: u32, ncoeffs: usize, precision_bits: u32) -> Self {
        CacheKey {
            k,
            ncoeffs,
            precision_bits,
            schema_version: SCHEMA_VERSION,
        }
    }

    fn stem(&self) -> String {
        format!("k{}_n{}_p{}_v{}", self.k, self.ncoeffs, self.precision_bits, self.schema_version)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredForm {
    pub index: usize,
    pub t2_eigenvalue: String,
    pub lambda: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: CacheKey,
    /// Exact integer coefficients of the `T_2` characteristic polynomial,
    /// constant term first.
    pub charpoly: Vec<String>,
    pub forms: Vec<StoredForm>,
}

/// Norm entries also depend on the quadrature settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormKey {
    pub basis: CacheKey,
    pub y_split: f64,
    pub quad_tol: f64,
}

impl NormKey {
    fn stem(&self) -> String {
        format!("{}_norm_y{:e}_tol{:e}", self.basis.stem(), self.y_split, self.quad_tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredLog {
    pub sign: i8,
    /// `None` for zero.
    pub logmag: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub key: NormKey,
    pub norms: Vec<StoredLog>,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    digest: String,
    payload: T,
}

/// An entry that failed to parse or validate.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptEntry {
    pub path: PathBuf,
    pub reason: String,
}

impl fmt::Display for CorruptEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "corrupt cache entry {}: {}", self.path.display(), self.reason)
    }
}

impl std::error::Error for CorruptEntry {}

fn float_str(x: &Float) -> String {
    x.to_string_radix(10, None)
}

fn parse_float(s: &str, prec: u32) -> std::result::Result<Float, String> {
    Float::parse(s).map(|p| Float::with_val(prec, p)).map_err(|e| format!("{s:?}: {e}"))
}

impl CacheEntry {
    pub fn from_basis(basis: &EigenBasis) -> Self {
        CacheEntry {
            key: CacheKey::new(basis.weight(), basis.ncoeffs(), basis.precision_bits()),
            charpoly: basis.charpoly().coeffs().iter().map(Integer::to_string).collect(),
            forms: basis
                .forms()
                .iter()
                .map(|f| StoredForm {
                    index: f.index(),
                    t2_eigenvalue: float_str(f.t2_eigenvalue()),
                    lambda: f.lambdas().iter().map(float_str).collect(),
                })
                .collect(),
        }
    }

    pub fn to_basis(&self) -> std::result::Result<EigenBasis, String> {
        let key = &self.key;
        let coeffs = self
            .charpoly
            .iter()
            .map(|c| c.parse::<Integer>().map_err(|e| format!("{c:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let forms = self
            .forms
            .iter()
            .map(|f| {
                if f.lambda.len() != key.ncoeffs {
                    return Err(format!("form {} has {} coefficients", f.index, f.lambda.len()));
                }
                let lambda = f
                    .lambda
                    .iter()
                    .map(|s| parse_float(s, key.precision_bits))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let t2 = parse_float(&f.t2_eigenvalue, key.precision_bits)?;
                Eigenform::from_parts(key.k, f.index, key.precision_bits, t2, lambda).map_err(|e| e.to_string())
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        EigenBasis::from_parts(key.k, IntPoly::new(coeffs), forms).map_err(|e| e.to_string())
    }
}

impl NormEntry {
    pub fn from_norms(key: NormKey, norms: &[LogReal]) -> Self {
        NormEntry {
            key,
            norms: norms
                .iter()
                .map(|n| StoredLog {
                    sign: n.sign(),
                    logmag: (!n.is_zero()).then(|| float_str(n.logmag())),
                })
                .collect(),
        }
    }

    pub fn to_norms(&self, prec: u32) -> std::result::Result<Vec<LogReal>, String> {
        self.norms
            .iter()
            .map(|n| match (&n.logmag, n.sign) {
                (None, 0) => Ok(LogReal::zero(prec)),
                (Some(s), 1 | -1) => Ok(LogReal::from_parts(n.sign, parse_float(s, prec)?)),
                _ => Err("inconsistent sign and magnitude".into()),
            })
            .collect()
    }
}

fn digest<T: Serialize>(payload: &T) -> String {
    let bytes = serde_json::to_vec(payload).expect("payload serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Directory-backed store that doubles as a [`BasisProvider`].
pub struct Cache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
    corrupt: AtomicUsize,
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache {
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            corrupt: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.stem()))
    }

    pub fn norm_path(&self, key: &NormKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.stem()))
    }

    /// `(hits, misses, corrupt)` since opening.
    pub fn stats(&self) -> (usize, usize, usize) {
        (
            self.hits.load(Ordering::Relaxed),
            self.misses.load(Ordering::Relaxed),
            self.corrupt.load(Ordering::Relaxed),
        )
    }

    fn read<T: Serialize + DeserializeOwned>(&self, path: &Path) -> std::result::Result<Option<T>, CorruptEntry> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => {
                return Err(CorruptEntry {
                    path: path.into(),
                    reason: e.to_string(),
                })
            }
        };
        let corrupt = |reason: String| CorruptEntry {
            path: path.into(),
            reason,
        };
        let env: Envelope<T> = serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
        if digest(&env.payload) != env.digest {
            return Err(corrupt("digest mismatch".into()));
        }
        Ok(Some(env.payload))
    }

    fn write<T: Serialize>(&self, path: &Path, payload: &T) -> io::Result<()> {
        let env = Envelope {
            digest: digest(payload),
            payload,
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &env)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn get(&self, key: &CacheKey) -> std::result::Result<Option<CacheEntry>, CorruptEntry> {
        let path = self.path(key);
        match self.read::<CacheEntry>(&path)? {
            Some(e) if e.key != *key => Err(CorruptEntry {
                path,
                reason: "stored key differs from file name".into(),
            }),
            e => Ok(e),
        }
    }

    pub fn put(&self, entry: &CacheEntry) -> io::Result<()> {
        self.write(&self.path(&entry.key), entry)
    }

    pub fn get_norms(&self, key: &NormKey) -> std::result::Result<Option<NormEntry>, CorruptEntry> {
        let path = self.norm_path(key);
        match self.read::<NormEntry>(&path)? {
            Some(e) if e.key != *key => Err(CorruptEntry {
                path,
                reason: "stored key differs from file name".into(),
            }),
            e => Ok(e),
        }
    }

    pub fn put_norms(&self, entry: &NormEntry) -> io::Result<()> {
        self.write(&self.norm_path(&entry.key), entry)
    }

    fn note_corrupt(&self, e: &CorruptEntry) {
        self.corrupt.fetch_add(1, Ordering::Relaxed);
        eprintln!("warning: {e}; recomputing");
    }

    fn note_write(result: io::Result<()>, path: &Path) {
        if let Err(e) = result {
            eprintln!("warning: could not write cache entry {}: {e}", path.display());
        }
    }
}

impl BasisProvider for Cache {
    fn basis(&self, k: u32, ncoeffs: usize, precision_bits: u32) -> Result<EigenBasis> {
        let key = CacheKey::new(k, ncoeffs, precision_bits);
        let stored = match self.get(&key) {
            Ok(Some(e)) => match e.to_basis() {
                Ok(b) => Some(b),
                Err(reason) => {
                    self.note_corrupt(&CorruptEntry {
                        path: self.path(&key),
                        reason,
                    });
                    None
                }
            },
            Ok(None) => None,
            Err(e) => {
                self.note_corrupt(&e);
                None
            }
        };
        if let Some(b) = stored {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(b);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let b = DirectProvider.basis(k, ncoeffs, precision_bits)?;
        let entry = CacheEntry::from_basis(&b);
        Cache::note_write(self.put(&entry), &self.path(&key));
        Ok(b)
    }

    fn norms(&self, basis: &EigenBasis, y_split: f64, quad_tol: f64) -> Result<Vec<LogReal>> {
        let key = NormKey {
            basis: CacheKey::new(basis.weight(), basis.ncoeffs(), basis.precision_bits()),
            y_split,
            quad_tol,
        };
        let prec = basis.precision_bits();
        let stored = match self.get_norms(&key) {
            Ok(Some(e)) if e.norms.len() == basis.dim() => match e.to_norms(prec) {
                Ok(n) => Some(n),
                Err(reason) => {
                    self.note_corrupt(&CorruptEntry {
                        path: self.norm_path(&key),
                        reason,
                    });
                    None
                }
            },
            Ok(Some(_)) => {
                self.note_corrupt(&CorruptEntry {
                    path: self.norm_path(&key),
                    reason: "wrong number of norms".into(),
                });
                None
            }
            Ok(None) => None,
            Err(e) => {
                self.note_corrupt(&e);
                None
            }
        };
        if let Some(n) = stored {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(n);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let n = DirectProvider.norms(basis, y_split, quad_tol)?;
        Cache::note_write(self.put_norms(&NormEntry::from_norms(key.clone(), &n)), &self.norm_path(&key));
        Ok(n)
    }
}
