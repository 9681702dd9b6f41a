use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::eigenforms::{eigen_decompose, EigenBasis};
use crate::error::Result;
use crate::massmeasure::{norm_ncoeffs, petersson_norm_sq, strip_ncoeffs, MassProfile};
use crate::specfun::LogReal;

/// Source of eigenbases and Petersson norms, e.g. a persistent cache.
pub trait BasisProvider: Send + Sync {
    fn basis(&self, k: u32, ncoeffs: usize, precision_bits: u32) -> Result<EigenBasis>;

    fn norms(&self, basis: &EigenBasis, y_split: f64, quad_tol: f64) -> Result<Vec<LogReal>> {
        basis.forms().par_iter().map(|f| petersson_norm_sq(f, y_split, quad_tol)).collect()
    }
}

impl<P: BasisProvider + ?Sized> BasisProvider for Arc<P> {
    fn basis(&self, k: u32, ncoeffs: usize, precision_bits: u32) -> Result<EigenBasis> {
        (**self).basis(k, ncoeffs, precision_bits)
    }

    fn norms(&self, basis: &EigenBasis, y_split: f64, quad_tol: f64) -> Result<Vec<LogReal>> {
        (**self).norms(basis, y_split, quad_tol)
    }
}

/// Computes everything from scratch.
pub struct DirectProvider;

impl BasisProvider for DirectProvider {
    fn basis(&self, k: u32, ncoeffs: usize, precision_bits: u32) -> Result<EigenBasis> {
        eigen_decompose(k, ncoeffs, precision_bits)
    }
}

/// Memoizing front end shared by the scenario runners.
pub struct Lab {
    pub precision_bits: u32,
    pub y_split: f64,
    pub quad_tol: f64,
    provider: Box<dyn BasisProvider>,
    bases: Mutex<BTreeMap<u32, Arc<EigenBasis>>>,
    profiles: Mutex<BTreeMap<u32, Arc<Vec<MassProfile>>>>,
    decompositions: AtomicUsize,
}

impl Lab {
    pub fn new(precision_bits: u32) -> Self {
        Lab::with_provider(precision_bits, Box::new(DirectProvider))
    }

    pub fn with_provider(precision_bits: u32, provider: Box<dyn BasisProvider>) -> Self {
        Lab {
            precision_bits,
            y_split: crate::massmeasure::DEFAULT_Y_SPLIT,
            quad_tol: crate::massmeasure::DEFAULT_QUAD_TOL,
            provider,
            bases: Mutex::new(BTreeMap::new()),
            profiles: Mutex::new(BTreeMap::new()),
            decompositions: AtomicUsize::new(0),
        }
    }

    /// Number of bases fetched from the provider so far.
    pub fn decompositions(&self) -> usize {
        self.decompositions.load(Ordering::Relaxed)
    }

    /// Coefficients for norms at the split height and masses above `t_min`.
    pub fn mass_ncoeffs(&self, k: u32, t_min: f64) -> Result<usize> {
        Ok(norm_ncoeffs(k, self.y_split)?.max(strip_ncoeffs(k, t_min)?))
    }

    /// Basis with at least `ncoeffs` coefficients, reusing a memoized one.
    pub fn basis(&self, k: u32, ncoeffs: usize) -> Result<Arc<EigenBasis>> {
        if let Some(b) = self.bases.lock().expect("lock").get(&k) {
            if b.ncoeffs() >= ncoeffs {
                return Ok(b.clone());
            }
        }
        let b = Arc::new(self.provider.basis(k, ncoeffs, self.precision_bits)?);
        self.decompositions.fetch_add(1, Ordering::Relaxed);
        let mut map = self.bases.lock().expect("lock");
        let keep = map.get(&k).map_or(true, |old| old.ncoeffs() < b.ncoeffs());
        if keep {
            map.insert(k, b.clone());
        }
        Ok(b)
    }

    /// Basis together with one mass profile per form.
    pub fn profiles(&self, k: u32, ncoeffs: usize) -> Result<(Arc<EigenBasis>, Arc<Vec<MassProfile>>)> {
        let need = ncoeffs.max(norm_ncoeffs(k, self.y_split)?);
        let basis = self.basis(k, need)?;
        if let Some(p) = self.profiles.lock().expect("lock").get(&k) {
            return Ok((basis, p.clone()));
        }
        let norms = self.provider.norms(&basis, self.y_split, self.quad_tol)?;
        let profiles: Vec<MassProfile> = basis
            .forms()
            .iter()
            .zip(norms)
            .map(|(f, n)| MassProfile::from_norm(f, n, self.y_split, self.quad_tol))
            .collect::<Result<_>>()?;
        let profiles = Arc::new(profiles);
        self.profiles.lock().expect("lock").insert(k, profiles.clone());
        Ok((basis, profiles))
    }
}
