//! Second-order polaron master equation with a time-nonlocal memory kernel.

mod evolve;
mod kernel;

pub use evolve::{evolve, liouvillian_apply, EvolveOptions};
pub use kernel::{Generator, KernelCache};

pub use crate::analysis::{find_steady_state, SteadyState};

use crate::bath::CorrelationTables;
use crate::error::Result;
use crate::system::SystemModel;

/// Builds the memory-kernel cache of `model` for the given bath tables.
pub fn precompute_kernel(
    model: &SystemModel,
    tables: &CorrelationTables,
    site_diagonal: bool,
) -> Result<KernelCache> {
    KernelCache::new(model, tables, site_diagonal)
}
