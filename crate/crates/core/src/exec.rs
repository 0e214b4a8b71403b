//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel site is elementwise over disjoint output slots, so results
//! are bit-identical for any thread count; reductions stay sequential on
//! purpose for the same reason.

/// Below this many elements the parallel dispatch overhead outweighs the
/// work; small (1D and moderate 2D) grids always run sequentially. The
/// `parallelism` bench measures where the crossover sits on a given
/// machine; coarse parallelism over independent runs pays off much
/// earlier than these elementwise loops.
pub(crate) const PAR_THRESHOLD: usize = 1 << 15;

/// Fill `out[i] = f(i)`, in parallel when the `parallel` feature is enabled,
/// the slice is large and the pool has more than one thread. `force_seq`
/// pins the sequential path regardless.
pub(crate) fn fill_indexed(out: &mut [f64], force_seq: bool, f: impl Fn(usize) -> f64 + Sync) {
    #[cfg(feature = "parallel")]
    if !force_seq && out.len() >= PAR_THRESHOLD && rayon::current_num_threads() > 1 {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
        return;
    }
    let _ = force_seq;
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Fill two same-length slices from one evaluation per index, so a shared
/// subexpression is computed once.
pub(crate) fn fill2_indexed(
    out1: &mut [f64],
    out2: &mut [f64],
    force_seq: bool,
    f: impl Fn(usize) -> (f64, f64) + Sync,
) {
    debug_assert_eq!(out1.len(), out2.len());
    #[cfg(feature = "parallel")]
    if !force_seq && out1.len() >= PAR_THRESHOLD && rayon::current_num_threads() > 1 {
        use rayon::prelude::*;
        out1.par_iter_mut()
            .zip(out2.par_iter_mut())
            .enumerate()
            .for_each(|(i, (v1, v2))| {
                let (a, b) = f(i);
                *v1 = a;
                *v2 = b;
            });
        return;
    }
    let _ = force_seq;
    for (i, (v1, v2)) in out1.iter_mut().zip(out2.iter_mut()).enumerate() {
        let (a, b) = f(i);
        *v1 = a;
        *v2 = b;
    }
}
