//! Indexed binary min-heap over dense integer ids.
//!
//! Keys are `f64` putative times; ties are broken by the smaller id so the
//! minimum is fully deterministic. Every id owns exactly one slot and its
//! key can be moved in either direction in `O(log n)`.

use std::cmp::Ordering;

#[derive(Debug, Clone, Default)]
pub struct IndexedMinHeap {
    /// Heap-ordered ids.
    heap: Vec<usize>,
    /// `position[id]` is the slot of `id` in `heap`.
    position: Vec<usize>,
    key: Vec<f64>,
}

impl IndexedMinHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Inserts the next id, which must equal the current length.
    pub fn push(&mut self, id: usize, key: f64) {
        assert_eq!(id, self.key.len(), "ids must be inserted densely");
        assert!(!key.is_nan(), "NaN key");
        self.key.push(key);
        self.position.push(self.heap.len());
        self.heap.push(id);
        self.sift_up(self.heap.len() - 1);
    }

    pub fn key(&self, id: usize) -> f64 {
        self.key[id]
    }

    pub fn update(&mut self, id: usize, key: f64) {
        assert!(!key.is_nan(), "NaN key");
        let old = self.key[id];
        self.key[id] = key;
        let slot = self.position[id];
        match compare(key, id, old, id) {
            Ordering::Less => self.sift_up(slot),
            Ordering::Greater => self.sift_down(slot),
            Ordering::Equal => {}
        }
    }

    /// Id with the smallest key (smallest id among equal keys).
    pub fn peek(&self) -> Option<(usize, f64)> {
        self.heap.first().map(|&id| (id, self.key[id]))
    }

    /// Checks the heap property and the position index.
    pub fn is_consistent(&self) -> bool {
        self.heap.iter().enumerate().all(|(slot, &id)| {
            self.position[id] == slot
                && (slot == 0 || !self.less(slot, (slot - 1) / 2))
        })
    }

    fn less(&self, a: usize, b: usize) -> bool {
        let (ia, ib) = (self.heap[a], self.heap[b]);
        compare(self.key[ia], ia, self.key[ib], ib) == Ordering::Less
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.position[self.heap[a]] = a;
        self.position[self.heap[b]] = b;
    }

    fn sift_up(&mut self, mut slot: usize) {
        while slot > 0 {
            let parent = (slot - 1) / 2;
            if !self.less(slot, parent) {
                break;
            }
            self.swap(slot, parent);
            slot = parent;
        }
    }

    fn sift_down(&mut self, mut slot: usize) {
        loop {
            let left = 2 * slot + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len() && self.less(right, left) {
                right
            } else {
                left
            };
            if !self.less(child, slot) {
                break;
            }
            self.swap(slot, child);
            slot = child;
        }
    }
}

fn compare(ka: f64, ia: usize, kb: f64, ib: usize) -> Ordering {
    ka.total_cmp(&kb).then(ia.cmp(&ib))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_go_to_lower_id() {
        let mut q = IndexedMinHeap::new();
        q.push(0, 5.0);
        q.push(1, 3.0);
        q.push(2, 3.0);
        assert_eq!(q.peek(), Some((1, 3.0)));
        q.update(1, f64::INFINITY);
        assert_eq!(q.peek(), Some((2, 3.0)));
        q.update(0, 3.0);
        assert_eq!(q.peek(), Some((0, 3.0)));
    }

    proptest! {
        #[test]
        fn minimum_matches_linear_scan(
            initial in prop::collection::vec(0.0..100.0f64, 1..40),
            edits in prop::collection::vec((0usize..40, prop_oneof![0.0..100.0f64, Just(f64::INFINITY)]), 0..80),
        ) {
            let mut q = IndexedMinHeap::new();
            let mut keys = initial.clone();
            for (i, &k) in initial.iter().enumerate() {
                q.push(i, k);
            }
            for (id, k) in edits {
                let id = id % keys.len();
                keys[id] = k;
                q.update(id, k);
                prop_assert!(q.is_consistent());
                let scan = keys
                    .iter()
                    .enumerate()
                    .min_by(|a, b| compare(*a.1, a.0, *b.1, b.0))
                    .map(|(i, &k)| (i, k));
                prop_assert_eq!(q.peek(), scan);
            }
        }
    }
}
