use crate::error::{Error, Result};

/// Periodic 1D mesh; the first and last vertex are identified.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    vertices: Vec<f64>,
}

/// Which one-sided limit to take at an element interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from the left, `x^-`.
    Minus,
    /// Limit from the right, `x^+`.
    Plus,
}

impl Mesh1D {
    pub fn from_vertices(vertices: Vec<f64>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidMesh("need at least two vertices".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex".into()));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMesh("vertices must be strictly increasing".into()));
        }
        Ok(Self { vertices })
    }

    pub fn uniform(left: f64, right: f64, n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidMesh("need at least one element".into()));
        }
        let h = (right - left) / n_elements as f64;
        let mut vertices: Vec<f64> = (0..n_elements).map(|k| left + k as f64 * h).collect();
        vertices.push(right);
        Self::from_vertices(vertices)
    }

    pub fn n_elements(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn left(&self) -> f64 {
        self.vertices[0]
    }

    pub fn right(&self) -> f64 {
        *self.vertices.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.right() - self.left()
    }

    /// Left vertex of element `k`.
    pub fn x_left(&self, k: usize) -> f64 {
        self.vertices[k]
    }

    pub fn x_right(&self, k: usize) -> f64 {
        self.vertices[k + 1]
    }

    pub fn width(&self, k: usize) -> f64 {
        self.vertices[k + 1] - self.vertices[k]
    }

    pub fn center(&self, k: usize) -> f64 {
        0.5 * (self.vertices[k] + self.vertices[k + 1])
    }

    pub fn max_width(&self) -> f64 {
        (0..self.n_elements()).map(|k| self.width(k)).fold(0.0, f64::max)
    }

    pub fn min_width(&self) -> f64 {
        (0..self.n_elements())
            .map(|k| self.width(k))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max h / min h`.
    pub fn quasi_uniformity(&self) -> f64 {
        self.max_width() / self.min_width()
    }

    /// Element to the left of `k`, with periodic wrap.
    pub fn prev(&self, k: usize) -> usize {
        if k == 0 {
            self.n_elements() - 1
        } else {
            k - 1
        }
    }

    pub fn next(&self, k: usize) -> usize {
        if k + 1 == self.n_elements() {
            0
        } else {
            k + 1
        }
    }

    /// Width used at vertex `i` (between elements `i-1` and `i`): the
    /// harmonic mean of the two adjacent widths.
    pub fn interface_width(&self, i: usize) -> f64 {
        let hl = self.width(self.prev(i));
        let hr = self.width(i);
        2.0 * hl * hr / (hl + hr)
    }

    /// Wraps `x` into `[left, right)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length();
        let mut y = (x - self.left()) % l;
        if y < 0.0 {
            y += l;
        }
        self.left() + y
    }

    /// Element containing `x` and the reference coordinate in `[-1, 1]`.
    ///
    /// On a vertex, `Side::Minus` selects the element to its left.
    pub fn locate(&self, x: f64, side: Side) -> (usize, f64) {
        let x = self.wrap(x);
        let m = self.n_elements();
        // index of the first vertex strictly greater than x
        let upper = self.vertices.partition_point(|&v| v <= x);
        let mut k = upper.saturating_sub(1).min(m - 1);
        if side == Side::Minus && x == self.vertices[k] {
            k = self.prev(k);
            return (k, 1.0);
        }
        let r = 2.0 * (x - self.vertices[k]) / self.width(k) - 1.0;
        (k, r.clamp(-1.0, 1.0))
    }
}
