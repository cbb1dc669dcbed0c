use std::collections::HashMap;

use crate::geometry::Vec2;

/// Uniform grid hash over agent positions, optionally periodic in x.
///
/// `query` visits a superset of the entries within the given radius; callers
/// filter by exact (minimum-image) distance.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell_x: f64,
    cell_y: f64,
    periodic: Option<Periodic>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

#[derive(Debug, Clone, Copy)]
struct Periodic {
    x_min: f64,
    nx: i64,
}

impl SpatialIndex {
    /// `cell_size` must be positive. Under a periodic x axis the cell width is
    /// stretched so that an integer number of cells tiles the period.
    pub fn new(cell_size: f64, periodic_x: Option<(f64, f64)>) -> Self {
        assert!(cell_size > 0.0 && cell_size.is_finite(), "cell size must be positive");
        let (cell_x, periodic) = match periodic_x {
            Some((x_min, x_max)) => {
                let period = x_max - x_min;
                let nx = ((period / cell_size).floor() as i64).max(1);
                (period / nx as f64, Some(Periodic { x_min, nx }))
            }
            None => (cell_size, None),
        };
        SpatialIndex {
            cell_x,
            cell_y: cell_size,
            periodic,
            cells: HashMap::new(),
        }
    }

    pub fn build(positions: impl IntoIterator<Item = Vec2>, cell_size: f64, periodic_x: Option<(f64, f64)>) -> Self {
        let mut index = SpatialIndex::new(cell_size, periodic_x);
        for (i, p) in positions.into_iter().enumerate() {
            index.insert(i, p);
        }
        index
    }

    fn wrap_ix(&self, ix: i64) -> i64 {
        match self.periodic {
            Some(p) => ix.rem_euclid(p.nx),
            None => ix,
        }
    }

    fn cell_of(&self, p: Vec2) -> (i64, i64) {
        let x0 = self.periodic.map_or(0.0, |p| p.x_min);
        let ix = ((p.x - x0) / self.cell_x).floor() as i64;
        let iy = (p.y / self.cell_y).floor() as i64;
        (self.wrap_ix(ix), iy)
    }

    pub fn insert(&mut self, entry: usize, p: Vec2) {
        let key = self.cell_of(p);
        self.cells.entry(key).or_default().push(entry);
    }

    pub fn remove(&mut self, entry: usize, p: Vec2) {
        let key = self.cell_of(p);
        if let Some(bucket) = self.cells.get_mut(&key) {
            if let Some(pos) = bucket.iter().position(|&e| e == entry) {
                bucket.swap_remove(pos);
            }
        }
    }

    pub fn relocate(&mut self, entry: usize, from: Vec2, to: Vec2) {
        if self.cell_of(from) != self.cell_of(to) {
            self.remove(entry, from);
            self.insert(entry, to);
        }
    }

    /// Calls `visit` for every entry whose cell may hold points within
    /// `radius` of `p`. Each entry is visited at most once.
    pub fn query(&self, p: Vec2, radius: f64, mut visit: impl FnMut(usize)) {
        let (cx, cy) = self.cell_of(p);
        let kx = (radius / self.cell_x).ceil() as i64;
        let ky = (radius / self.cell_y).ceil() as i64;
        let mut xs: Vec<i64> = (cx - kx..=cx + kx).map(|ix| self.wrap_ix(ix)).collect();
        if self.periodic.is_some() {
            xs.sort_unstable();
            xs.dedup();
        }
        for &ix in &xs {
            for iy in cy - ky..=cy + ky {
                if let Some(bucket) = self.cells.get(&(ix, iy)) {
                    for &e in bucket {
                        visit(e);
                    }
                }
            }
        }
    }
}
