//! Deterministic fan-out over independent tasks.
//!
//! Results are collected by task index, so the merged output is identical for
//! any thread count, including 1.

/// Run `f(i)` for `i ∈ 0..n` on up to `threads` workers (0 = all available)
/// and return the results in index order.
pub fn map_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = effective_threads(threads).min(n.max(1));
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunks: Vec<(usize, &mut [Option<T>])> = {
        let mut out = Vec::new();
        let base = n / workers;
        let extra = n % workers;
        let mut rest = slots.as_mut_slice();
        let mut start = 0;
        for w in 0..workers {
            let len = base + usize::from(w < extra);
            let (head, tail) = rest.split_at_mut(len);
            out.push((start, head));
            start += len;
            rest = tail;
        }
        out
    };
    std::thread::scope(|scope| {
        for (start, chunk) in chunks {
            let f = &f;
            scope.spawn(move || {
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(f(start + offset));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled slot")).collect()
}

pub fn effective_threads(threads: usize) -> usize {
    if threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        threads
    }
}
