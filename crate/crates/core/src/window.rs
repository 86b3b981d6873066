//! Ordered product of the most recent matrices in a sliding window.
//!
//! For a window `e_1 (oldest) .. e_L (newest)` the product is
//! `e_L · … · e_1`. The factors are generally singular, so there is no
//! inverse-based sliding update; instead the window is kept as a two-stack
//! queue. The back stack holds raw recent factors plus their running
//! product, the front stack holds suffix products of the older factors.
//! Pushes cost one multiplication, pops are amortized one multiplication.
//!
//! Without evictions the product is the plain running left-multiplication
//! `e_L · (… · (e_2 · e_1))`, bit-for-bit.

use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct WindowProduct {
    n: usize,
    capacity: Option<usize>,
    /// Suffix products of the front block; the last entry covers the oldest factor.
    front: Vec<DMatrix<f64>>,
    /// Raw factors of the back block, oldest first.
    back: Vec<DMatrix<f64>>,
    /// Product of the back block, `I` when empty.
    back_product: DMatrix<f64>,
    pushed: usize,
}

impl WindowProduct {
    /// `capacity = None` keeps every factor (the product then runs from the first push).
    pub fn new(n: usize, capacity: Option<usize>) -> Self {
        assert!(capacity != Some(0), "window capacity must be positive");
        Self {
            n,
            capacity,
            front: Vec::new(),
            back: Vec::new(),
            back_product: DMatrix::identity(n, n),
            pushed: 0,
        }
    }

    pub fn len(&self) -> usize {
        match self.capacity {
            Some(_) => self.front.len() + self.back.len(),
            None => self.pushed,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    /// Appends the newest factor, evicting the oldest one when full.
    pub fn push(&mut self, factor: DMatrix<f64>) {
        debug_assert_eq!(factor.shape(), (self.n, self.n));
        self.back_product = &factor * &self.back_product;
        self.pushed += 1;
        if let Some(cap) = self.capacity {
            self.back.push(factor);
            if self.len() > cap {
                self.pop_oldest();
            }
        }
    }

    fn pop_oldest(&mut self) {
        if self.front.is_empty() {
            // newest back factor first, each suffix extends towards older ones
            let mut acc: Option<DMatrix<f64>> = None;
            let mut suffixes = Vec::with_capacity(self.back.len());
            for f in self.back.drain(..).rev() {
                let next = match acc {
                    None => f,
                    Some(ref a) => a * f,
                };
                suffixes.push(next.clone());
                acc = Some(next);
            }
            self.front = suffixes;
            self.back_product = DMatrix::identity(self.n, self.n);
        }
        self.front.pop();
    }

    /// Product of the window, newest factor on the left. `I` when empty.
    pub fn product(&self) -> DMatrix<f64> {
        match self.front.last() {
            Some(front) if self.back.is_empty() => front.clone(),
            Some(front) => &self.back_product * front,
            None => self.back_product.clone(),
        }
    }
}
