//! Uniform spatial hash over the first (at most three) coordinates, used for
//! radius queries on point clouds of any dimension.

use std::collections::HashMap;

const HASHED_DIMS: usize = 3;

type Cell = [i64; HASHED_DIMS];

#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    dim: usize,
    points: Vec<f64>,
    cells: HashMap<Cell, Vec<usize>>,
}

impl PointGrid {
    /// `cell` should be at least the query radius.
    pub fn new(dim: usize, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell must be positive");
        Self {
            cell,
            dim,
            points: Vec::new(),
            cells: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn key(&self, x: &[f64]) -> Cell {
        let mut c = [0i64; HASHED_DIMS];
        for (k, v) in c.iter_mut().zip(x) {
            *k = (v / self.cell).floor() as i64;
        }
        c
    }

    /// Inserts `x` and returns its index.
    pub fn insert(&mut self, x: &[f64]) -> usize {
        debug_assert_eq!(x.len(), self.dim);
        let idx = self.len();
        self.points.extend_from_slice(x);
        let key = self.key(x);
        self.cells.entry(key).or_default().push(idx);
        idx
    }

    /// Calls `visit(index, squared distance)` for every stored point within
    /// `radius` of `x`. `radius` must not exceed the cell size.
    pub fn for_each_within(&self, x: &[f64], radius: f64, mut visit: impl FnMut(usize, f64)) {
        debug_assert!(radius <= self.cell * (1.0 + 1e-12));
        let r2 = radius * radius;
        let base = self.key(x);
        let hashed = self.dim.min(HASHED_DIMS);
        let span = 3usize.pow(hashed as u32);
        for code in 0..span {
            let mut key = base;
            let mut c = code;
            for k in key.iter_mut().take(hashed) {
                *k += (c % 3) as i64 - 1;
                c /= 3;
            }
            let Some(bucket) = self.cells.get(&key) else { continue };
            for &j in bucket {
                let d2 = dist2(x, self.point(j));
                if d2 <= r2 {
                    visit(j, d2);
                }
            }
        }
    }

    pub fn any_within(&self, x: &[f64], radius: f64) -> bool {
        let mut hit = false;
        self.for_each_within(x, radius, |_, _| hit = true);
        hit
    }
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}
