//! Arena-backed order-statistic treap.
//!
//! Used by every scheduler to answer "what is the rank of this key among the
//! resident keys" and "which key has rank r" in expected `O(log n)`.

use alloc::vec::Vec;

const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node<K> {
    key: K,
    prio: u64,
    left: u32,
    right: u32,
    size: u32,
}

/// Ordered multiset-free set of keys with rank and select queries.
#[derive(Clone, Debug)]
pub struct OrderStatTree<K> {
    nodes: Vec<Node<K>>,
    free: Vec<u32>,
    root: u32,
    prio_state: u64,
}

impl<K: Ord + Copy> Default for OrderStatTree<K> {
    fn default() -> Self {
        Self::new()
    }
}

/// splitmix64 step; node priorities only need to be well mixed, not secret.
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl<K: Ord + Copy> OrderStatTree<K> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            prio_state: 0x005E_ED0F_7EA9,
        }
    }

    pub fn len(&self) -> usize {
        self.size(self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    fn size(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    fn pull(&mut self, t: u32) {
        let (l, r) = {
            let n = &self.nodes[t as usize];
            (n.left, n.right)
        };
        let s = self.size(l) + self.size(r) + 1;
        self.nodes[t as usize].size = s;
    }

    /// Splits `t` into (keys < key, keys >= key).
    fn split(&mut self, t: u32, key: &K) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        if self.nodes[t as usize].key < *key {
            let r = self.nodes[t as usize].right;
            let (a, b) = self.split(r, key);
            self.nodes[t as usize].right = a;
            self.pull(t);
            (t, b)
        } else {
            let l = self.nodes[t as usize].left;
            let (a, b) = self.split(l, key);
            self.nodes[t as usize].left = b;
            self.pull(t);
            (a, t)
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.nodes[a as usize].right;
            let m = self.merge(r, b);
            self.nodes[a as usize].right = m;
            self.pull(a);
            a
        } else {
            let l = self.nodes[b as usize].left;
            let m = self.merge(a, l);
            self.nodes[b as usize].left = m;
            self.pull(b);
            b
        }
    }

    pub fn contains(&self, key: &K) -> bool {
        let mut t = self.root;
        while t != NIL {
            let n = &self.nodes[t as usize];
            match key.cmp(&n.key) {
                core::cmp::Ordering::Less => t = n.left,
                core::cmp::Ordering::Greater => t = n.right,
                core::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Inserts `key`; returns false if it was already present.
    pub fn insert(&mut self, key: K) -> bool {
        if self.contains(&key) {
            return false;
        }
        let prio = splitmix64(&mut self.prio_state);
        let node = Node {
            key,
            prio,
            left: NIL,
            right: NIL,
            size: 1,
        };
        let idx = match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        let (a, b) = self.split(self.root, &key);
        let m = self.merge(a, idx);
        self.root = self.merge(m, b);
        true
    }

    /// Removes `key`; returns false if it was absent.
    pub fn remove(&mut self, key: &K) -> bool {
        let (a, b) = self.split(self.root, key);
        // b holds keys >= key; peel off its minimum if it equals key
        let (mid, rest) = self.split_first(b);
        let found = mid != NIL && self.nodes[mid as usize].key == *key;
        let b = if found {
            self.free.push(mid);
            rest
        } else if mid == NIL {
            rest
        } else {
            self.merge(mid, rest)
        };
        self.root = self.merge(a, b);
        found
    }

    /// Detaches the leftmost node of `t`, returning (leftmost, remainder).
    fn split_first(&mut self, t: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let l = self.nodes[t as usize].left;
        if l == NIL {
            let r = self.nodes[t as usize].right;
            self.nodes[t as usize].right = NIL;
            self.nodes[t as usize].size = 1;
            return (t, r);
        }
        let (first, rest) = self.split_first(l);
        self.nodes[t as usize].left = rest;
        self.pull(t);
        (first, t)
    }

    /// Number of stored keys strictly less than `key`.
    pub fn count_less(&self, key: &K) -> usize {
        let mut t = self.root;
        let mut acc = 0;
        while t != NIL {
            let n = &self.nodes[t as usize];
            if n.key < *key {
                acc += self.size(n.left) as usize + 1;
                t = n.right;
            } else {
                t = n.left;
            }
        }
        acc
    }

    /// 1-based rank of `key` among stored keys, or `None` if absent.
    pub fn rank(&self, key: &K) -> Option<usize> {
        if self.contains(key) {
            Some(self.count_less(key) + 1)
        } else {
            None
        }
    }

    /// Key with 1-based rank `r`.
    pub fn select(&self, r: usize) -> Option<K> {
        if r == 0 || r > self.len() {
            return None;
        }
        let mut t = self.root;
        let mut r = r as u32;
        while t != NIL {
            let n = &self.nodes[t as usize];
            let ls = self.size(n.left);
            if r <= ls {
                t = n.left;
            } else if r == ls + 1 {
                return Some(n.key);
            } else {
                r -= ls + 1;
                t = n.right;
            }
        }
        None
    }

    pub fn first(&self) -> Option<K> {
        self.select(1)
    }

    /// In-order keys.
    pub fn to_vec(&self) -> Vec<K> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut t = self.root;
        while t != NIL || !stack.is_empty() {
            while t != NIL {
                stack.push(t);
                t = self.nodes[t as usize].left;
            }
            let top = stack.pop().unwrap();
            out.push(self.nodes[top as usize].key);
            t = self.nodes[top as usize].right;
        }
        out
    }
}
