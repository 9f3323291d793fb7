//! Mixed-radix indexing over variable instantiations.
//!
//! Tables over a list of discrete variables are stored flat, with the
//! leftmost variable varying slowest. This is the row convention used by
//! conditional probability tables, cluster potentials and the brute-force
//! enumerator alike.

/// The shape of a table over an ordered list of discrete variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    cards: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(cards: Vec<usize>) -> Shape {
        let len = cards.iter().product::<usize>().max(1);
        Shape { cards, len }
    }

    /// Total number of instantiations (1 for an empty scope).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// Flat index of an instantiation, leftmost position slowest.
    pub fn index_of(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.cards.len());
        let mut idx = 0;
        for (v, c) in values.iter().zip(&self.cards) {
            debug_assert!(v < c);
            idx = idx * c + v;
        }
        idx
    }

    /// Iterate all instantiations in index order.
    pub fn assignments(&self) -> Assignments<'_> {
        Assignments {
            shape: self,
            current: vec![0; self.cards.len()],
            remaining: self.len,
        }
    }
}

pub struct Assignments<'a> {
    shape: &'a Shape,
    current: Vec<usize>,
    remaining: usize,
}

impl Iterator for Assignments<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.current.clone();
        self.remaining -= 1;
        // odometer step, rightmost fastest
        for pos in (0..self.current.len()).rev() {
            self.current[pos] += 1;
            if self.current[pos] < self.shape.cards[pos] {
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}
