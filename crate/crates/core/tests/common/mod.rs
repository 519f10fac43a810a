//! Shared fixtures: the converged torus at the resolutions a test binary
//! needs, solved once per binary.

use shrinker_spectra_core::solver::{shoot_closed_torus, ShootOptions, ShootingResult, DEFAULT_BRACKET};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

static CACHE: OnceLock<Mutex<HashMap<usize, &'static ShootingResult>>> = OnceLock::new();

/// Converged torus resampled to `n` points; cached and leaked for the life of
/// the test binary.
pub fn torus(n: usize) -> &'static ShootingResult {
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    if let Some(r) = map.get(&n) {
        return r;
    }
    let opts = ShootOptions::default();
    let result = shoot_closed_torus(DEFAULT_BRACKET, n, &opts).expect("torus solve");
    let leaked: &'static ShootingResult = Box::leak(Box::new(result));
    map.insert(n, leaked);
    leaked
}
