//! Bounded single-producer/single-consumer ring.
//!
//! The producer is the processing path and must never wait, so the hot path
//! is one Acquire load plus one Release store on each side. Capacity is
//! rounded up to a power of two for mask indexing.

use std::cell::UnsafeCell;
use std::mem::MaybeUninit;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

struct Inner<T> {
    buf: Box<[UnsafeCell<MaybeUninit<T>>]>,
    mask: usize,
    /// Next slot the producer writes. Only the producer stores it.
    head: AtomicUsize,
    /// Next slot the consumer reads. Only the consumer stores it.
    tail: AtomicUsize,
}

// The two endpoints have exclusive access to disjoint slot ranges, fenced by
// the head/tail publications.
unsafe impl<T: Send> Send for Inner<T> {}
unsafe impl<T: Send> Sync for Inner<T> {}

impl<T> Drop for Inner<T> {
    fn drop(&mut self) {
        let head = *self.head.get_mut();
        let mut tail = *self.tail.get_mut();
        while tail != head {
            unsafe {
                (*self.buf[tail & self.mask].get()).assume_init_drop();
            }
            tail = tail.wrapping_add(1);
        }
    }
}

/// Create a ring with room for at least `capacity` items.
pub fn ring<T>(capacity: usize) -> (Producer<T>, Consumer<T>) {
    assert!(capacity >= 1);
    let cap = capacity.next_power_of_two();
    let buf = (0..cap)
        .map(|_| UnsafeCell::new(MaybeUninit::uninit()))
        .collect::<Vec<_>>()
        .into_boxed_slice();
    let inner = Arc::new(Inner {
        buf,
        mask: cap - 1,
        head: AtomicUsize::new(0),
        tail: AtomicUsize::new(0),
    });
    (
        Producer { inner: Arc::clone(&inner), cached_tail: 0 },
        Consumer { inner, cached_head: 0 },
    )
}

pub struct Producer<T> {
    inner: Arc<Inner<T>>,
    cached_tail: usize,
}

impl<T> Producer<T> {
    /// Non-blocking push; on a full ring the value comes straight back.
    pub fn push(&mut self, value: T) -> Result<(), T> {
        let inner = &*self.inner;
        let head = inner.head.load(Ordering::Relaxed);
        if head.wrapping_sub(self.cached_tail) > inner.mask {
            self.cached_tail = inner.tail.load(Ordering::Acquire);
            if head.wrapping_sub(self.cached_tail) > inner.mask {
                return Err(value);
            }
        }
        unsafe {
            (*inner.buf[head & inner.mask].get()).write(value);
        }
        inner.head.store(head.wrapping_add(1), Ordering::Release);
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.inner.mask + 1
    }
}

pub struct Consumer<T> {
    inner: Arc<Inner<T>>,
    cached_head: usize,
}

impl<T> Consumer<T> {
    pub fn pop(&mut self) -> Option<T> {
        let inner = &*self.inner;
        let tail = inner.tail.load(Ordering::Relaxed);
        if tail == self.cached_head {
            self.cached_head = inner.head.load(Ordering::Acquire);
            if tail == self.cached_head {
                return None;
            }
        }
        let value = unsafe { (*inner.buf[tail & inner.mask].get()).assume_init_read() };
        inner.tail.store(tail.wrapping_add(1), Ordering::Release);
        Some(value)
    }

    /// Pop up to `max` items into `out`, returning how many were moved.
    pub fn pop_batch(&mut self, out: &mut Vec<T>, max: usize) -> usize {
        let mut n = 0;
        while n < max {
            match self.pop() {
                Some(v) => {
                    out.push(v);
                    n += 1;
                }
                None => break,
            }
        }
        n
    }

    pub fn is_empty(&self) -> bool {
        let inner = &*self.inner;
        inner.tail.load(Ordering::Relaxed) == inner.head.load(Ordering::Acquire)
    }
}
