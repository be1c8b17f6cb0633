//! Per-thread pool of sample buffers for the transient planes of a transform
//! level.
//!
//! Large buffers that are freed after every call tend to be handed back to
//! the OS and faulted in again on the next one; keeping a few around makes
//! repeated transforms of same-sized frames allocation-free for these
//! intermediates.

use std::cell::RefCell;

use crate::frame::Plane;

/// Buffers kept per thread; extra returns are dropped.
const POOL_SIZE: usize = 16;

thread_local! {
    static POOL: RefCell<Vec<Vec<f64>>> = const { RefCell::new(Vec::new()) };
}

/// A zeroed `width x height` plane, reusing a pooled buffer when one is large enough.
pub(crate) fn plane(width: usize, height: usize) -> Plane {
    let len = width * height;
    let reused = POOL.with(|p| {
        let mut pool = p.borrow_mut();
        let i = pool.iter().position(|b| b.capacity() >= len)?;
        Some(pool.swap_remove(i))
    });
    let data = match reused {
        Some(mut buf) => {
            buf.clear();
            buf.resize(len, 0.0);
            buf
        }
        None => vec![0.0; len],
    };
    Plane::from_vec(width, height, data).expect("buffer length matches dims")
}

/// Return a plane's buffer to the pool.
pub(crate) fn recycle(p: Plane) {
    let buf = p.into_vec();
    POOL.with(|p| {
        let mut pool = p.borrow_mut();
        if pool.len() < POOL_SIZE {
            pool.push(buf);
        } else if let Some(smallest) = pool.iter_mut().min_by_key(|b| b.capacity()) {
            if smallest.capacity() < buf.capacity() {
                *smallest = buf;
            }
        }
    });
}
