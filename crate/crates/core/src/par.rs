//! Minimal scoped-thread parallel map for independent schedule levels.
//! Thread count comes from `PMOD_THREADS` (default: available parallelism).
//! Results are reassembled in input order, so output is deterministic
//! regardless of the thread count.

pub fn thread_count() -> usize {
    if let Ok(v) = std::env::var("PMOD_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Applies `f` to every item, fanning out over up to `thread_count()`
/// threads. Falls back to a plain loop for a single thread or single item.
pub fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let threads = thread_count().min(items.len().max(1));
    if threads <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let tagged: Vec<(usize, T)> = items.into_iter().enumerate().collect();
    let chunk = tagged.len().div_ceil(threads);
    let mut out: Vec<(usize, R)> = Vec::with_capacity(tagged.len());
    let fref = &f;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        let mut rest = tagged;
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let batch: Vec<(usize, T)> = rest.drain(..take).collect();
            handles.push(scope.spawn(move || {
                batch
                    .into_iter()
                    .map(|(i, t)| (i, fref(t)))
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            out.extend(h.join().expect("worker panicked"));
        }
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, r)| r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let items: Vec<u64> = (0..37).collect();
        let out = par_map(items.clone(), |x| x * x);
        let expect: Vec<u64> = items.iter().map(|x| x * x).collect();
        assert_eq!(out, expect);
    }
}
