//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction uses a fixed partition of the index range followed by
//! pairwise summation, so results are bit-identical whether the chunks run on
//! one thread or many.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static PARALLEL: AtomicBool = AtomicBool::new(cfg!(feature = "parallel"));

/// Leaf size below which pairwise summation runs a plain loop.
const PAIRWISE_LEAF: usize = 32;

/// Number of outer chunks used by [`chunked_sum`].
const OUTER_CHUNKS: usize = 64;

/// Enable or disable parallel execution at runtime. Has no effect when the
/// crate is built without the `parallel` feature.
pub fn set_parallel(enabled: bool) {
    PARALLEL.store(enabled && cfg!(feature = "parallel"), Ordering::Relaxed);
}

pub fn is_parallel() -> bool {
    PARALLEL.load(Ordering::Relaxed)
}

/// Cap the global worker pool. Must run before the first parallel call;
/// later calls are ignored.
pub fn init_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// Pairwise (cascade) sum of `f(i)` for `i in 0..n`.
pub fn pairwise_sum<F>(n: usize, f: F) -> C64
where
    F: Fn(usize) -> C64,
{
    pairwise_range(0, n, &f)
}

fn pairwise_range<F>(lo: usize, hi: usize, f: &F) -> C64
where
    F: Fn(usize) -> C64,
{
    if hi - lo <= PAIRWISE_LEAF {
        let mut acc = C64::new(0.0, 0.0);
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_range(lo, mid, f) + pairwise_range(mid, hi, f)
    }
}

/// Pairwise sum of an explicit slice of terms.
pub fn pairwise_slice(terms: &[C64]) -> C64 {
    pairwise_sum(terms.len(), |i| terms[i])
}

/// Sum `f(i)` for `i in 0..n` over a fixed set of chunks, in parallel when
/// enabled. `f` gets a per-chunk scratch value created by `init`.
pub fn chunked_sum<S, I, F>(n: usize, init: I, f: F) -> C64
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, usize) -> C64 + Sync,
{
    if n == 0 {
        return C64::new(0.0, 0.0);
    }
    let chunk = n.div_ceil(OUTER_CHUNKS).max(1);
    let bounds: Vec<(usize, usize)> = (0..n)
        .step_by(chunk)
        .map(|lo| (lo, (lo + chunk).min(n)))
        .collect();
    let run = |&(lo, hi): &(usize, usize)| {
        let mut scratch = init();
        let mut acc_terms = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            acc_terms.push(f(&mut scratch, i));
        }
        pairwise_slice(&acc_terms)
    };
    let partials: Vec<C64> = map_slice(&bounds, run);
    pairwise_slice(&partials)
}

/// Order-preserving map over a slice, parallel when enabled.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() && items.len() > 1 {
            return items.par_iter().map(&f).collect();
        }
    }
    items.iter().map(f).collect()
}
