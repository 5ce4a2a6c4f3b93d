//! Hand-off primitives between the ingress, engine, and render activities.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

/// Single-slot latest-value cell: writers overwrite, readers sample the most
/// recent value.
#[derive(Debug, Default)]
pub struct LatestValue<T> {
    slot: Mutex<(Option<T>, u64)>,
}

impl<T: Clone> LatestValue<T> {
    pub fn new() -> Self {
        Self {
            slot: Mutex::new((None, 0)),
        }
    }

    pub fn publish(&self, value: T) {
        let mut slot = self.slot.lock().unwrap();
        slot.0 = Some(value);
        slot.1 += 1;
    }

    pub fn latest(&self) -> Option<T> {
        self.slot.lock().unwrap().0.clone()
    }

    /// Number of values published so far.
    pub fn version(&self) -> u64 {
        self.slot.lock().unwrap().1
    }

    /// Removes and returns the value if one was published since the last take.
    pub fn take_if_newer(&self) -> Option<T> {
        self.slot.lock().unwrap().0.take()
    }
}

/// Bounded FIFO that drops the oldest entry when full.
#[derive(Debug)]
pub struct NewestWinsQueue<T> {
    inner: Mutex<(VecDeque<T>, u64)>,
    ready: Condvar,
    capacity: usize,
}

impl<T> NewestWinsQueue<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        Self {
            inner: Mutex::new((VecDeque::with_capacity(capacity), 0)),
            ready: Condvar::new(),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Pushes `value`, returning true if an older entry was dropped.
    pub fn push(&self, value: T) -> bool {
        let mut g = self.inner.lock().unwrap();
        let dropped = if g.0.len() == self.capacity {
            g.0.pop_front();
            g.1 += 1;
            true
        } else {
            false
        };
        g.0.push_back(value);
        drop(g);
        self.ready.notify_one();
        dropped
    }

    pub fn pop(&self) -> Option<T> {
        self.inner.lock().unwrap().0.pop_front()
    }

    pub fn pop_timeout(&self, timeout: Duration) -> Option<T> {
        let g = self.inner.lock().unwrap();
        let (mut g, _) = self.ready.wait_timeout_while(g, timeout, |q| q.0.is_empty()).unwrap();
        g.0.pop_front()
    }

    pub fn drain(&self) -> Vec<T> {
        self.inner.lock().unwrap().0.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total entries dropped on overflow.
    pub fn dropped(&self) -> u64 {
        self.inner.lock().unwrap().1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_drops_oldest() {
        let q = NewestWinsQueue::new(3);
        for i in 0..5 {
            q.push(i);
        }
        assert_eq!(q.drain(), vec![2, 3, 4]);
        assert_eq!(q.dropped(), 2);
    }

    #[test]
    fn latest_value_overwrites() {
        let v = LatestValue::new();
        v.publish(1);
        v.publish(2);
        assert_eq!(v.latest(), Some(2));
        assert_eq!(v.version(), 2);
        assert_eq!(v.take_if_newer(), Some(2));
        assert_eq!(v.take_if_newer(), None);
    }
}
