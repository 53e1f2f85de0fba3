//! Indexed binary min-heap over vertex ids with decrease-key.
//!
//! Entries are ordered by `(cost, vertex)` so equal-cost pops are
//! deterministic (smallest vertex id first). Costs must never be NaN.

const INVALID: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Entry {
    cost: f64,
    vertex: u32,
}

impl Entry {
    #[inline]
    fn less(&self, other: &Entry) -> bool {
        debug_assert!(!self.cost.is_nan() && !other.cost.is_nan());
        self.cost < other.cost || (self.cost == other.cost && self.vertex < other.vertex)
    }
}

pub struct IndexedMinHeap {
    // position of each vertex inside `data`, INVALID when absent
    positions: Vec<u32>,
    data: Vec<Entry>,
}

impl IndexedMinHeap {
    pub fn new(n_vertices: usize) -> Self {
        IndexedMinHeap {
            positions: vec![INVALID; n_vertices],
            data: Vec::new(),
        }
    }

    /// Insert `vertex` with `cost`, or lower its key when already queued.
    /// Increasing an existing key is a caller bug and is ignored.
    pub fn insert_or_decrease(&mut self, vertex: u32, cost: f64) {
        let pos = self.positions[vertex as usize];
        if pos == INVALID {
            let at = self.data.len();
            self.data.push(Entry { cost, vertex });
            self.positions[vertex as usize] = at as u32;
            self.sift_up(at);
        } else {
            let at = pos as usize;
            if cost < self.data[at].cost {
                self.data[at].cost = cost;
                self.sift_up(at);
            }
        }
    }

    /// Remove and return the minimum `(cost, vertex)` entry.
    pub fn pop(&mut self) -> Option<(f64, u32)> {
        if self.data.is_empty() {
            return None;
        }
        let top = self.data[0];
        self.positions[top.vertex as usize] = INVALID;
        let last = self.data.pop().expect("non-empty");
        if !self.data.is_empty() {
            self.data[0] = last;
            self.positions[last.vertex as usize] = 0;
            self.sift_down(0);
        }
        Some((top.cost, top.vertex))
    }

    fn sift_up(&mut self, mut at: usize) {
        while at > 0 {
            let parent = (at - 1) / 2;
            if self.data[at].less(&self.data[parent]) {
                self.swap(at, parent);
                at = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut at: usize) {
        loop {
            let left = 2 * at + 1;
            if left >= self.data.len() {
                return;
            }
            let mut smallest = left;
            let right = left + 1;
            if right < self.data.len() && self.data[right].less(&self.data[left]) {
                smallest = right;
            }
            if self.data[smallest].less(&self.data[at]) {
                self.swap(at, smallest);
                at = smallest;
            } else {
                return;
            }
        }
    }

    #[inline]
    fn swap(&mut self, a: usize, b: usize) {
        self.data.swap(a, b);
        self.positions[self.data[a].vertex as usize] = a as u32;
        self.positions[self.data[b].vertex as usize] = b as u32;
    }
}
