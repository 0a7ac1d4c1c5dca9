//! Bounding volume hierarchy over triangles, built with binned SAH.

use crate::Vec3;

#[derive(Debug, Clone, Copy)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn grow(&mut self, p: Vec3) {
        self.min = self.min.min_by_component(p);
        self.max = self.max.max_by_component(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.min_by_component(o.min), max: self.max.max_by_component(o.max) }
    }

    pub fn centroid(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn surface_area(&self) -> f64 {
        let d = self.max - self.min;
        if d.x < 0.0 {
            return 0.0;
        }
        2.0 * (d.x * d.y + d.y * d.z + d.z * d.x)
    }

    /// Slab test; returns the entry distance when the box overlaps `[t_min, t_max]`.
    #[inline]
    fn hit(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for axis in 0..3 {
            let o = origin.component(axis);
            let inv = inv_dir.component(axis);
            let mut near = (self.min.component(axis) - o) * inv;
            let mut far = (self.max.component(axis) - o) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN from 0*inf keeps the interval unchanged
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive index; interior: index of the right child (left is `self + 1`).
    offset: u32,
    /// Zero for interior nodes.
    count: u32,
    axis: u8,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Primitive ids in leaf order.
    order: Vec<u32>,
}

const LEAF_SIZE: usize = 4;
const BINS: usize = 12;

impl Bvh {
    pub fn build(prim_bounds: &[Aabb]) -> Self {
        let mut order: Vec<u32> = (0..prim_bounds.len() as u32).collect();
        let centroids: Vec<Vec3> = prim_bounds.iter().map(Aabb::centroid).collect();
        let mut nodes = Vec::with_capacity(2 * prim_bounds.len().max(1));
        if prim_bounds.is_empty() {
            nodes.push(Node { bounds: Aabb::empty(), offset: 0, count: 0, axis: 0 });
        } else {
            build_recursive(prim_bounds, &centroids, &mut order, 0, prim_bounds.len(), &mut nodes);
        }
        Self { nodes, order }
    }

    /// Visits candidate primitives front-to-back. `visit` returns the current closest
    /// distance, used to prune the traversal.
    #[inline]
    pub fn traverse(&self, origin: Vec3, dir: Vec3, t_min: f64, mut t_max: f64, mut visit: impl FnMut(u32) -> f64) {
        if self.order.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        let mut idx = 0usize;
        if self.nodes[0].bounds.hit(origin, inv, t_min, t_max).is_none() {
            return;
        }
        loop {
            let node = &self.nodes[idx];
            if node.count > 0 {
                let start = node.offset as usize;
                for &prim in &self.order[start..start + node.count as usize] {
                    t_max = t_max.min(visit(prim));
                }
            } else {
                let (first, second) = if dir.component(node.axis as usize) < 0.0 {
                    (node.offset as usize, idx + 1)
                } else {
                    (idx + 1, node.offset as usize)
                };
                let h1 = self.nodes[first].bounds.hit(origin, inv, t_min, t_max);
                let h2 = self.nodes[second].bounds.hit(origin, inv, t_min, t_max);
                match (h1, h2) {
                    (Some(_), Some(_)) => {
                        stack[sp] = second as u32;
                        sp += 1;
                        idx = first;
                        continue;
                    }
                    (Some(_), None) => {
                        idx = first;
                        continue;
                    }
                    (None, Some(_)) => {
                        idx = second;
                        continue;
                    }
                    (None, None) => {}
                }
            }
            loop {
                if sp == 0 {
                    return;
                }
                sp -= 1;
                let candidate = stack[sp] as usize;
                if self.nodes[candidate].bounds.hit(origin, inv, t_min, t_max).is_some() {
                    idx = candidate;
                    break;
                }
            }
        }
    }
}

fn build_recursive(
    bounds: &[Aabb],
    centroids: &[Vec3],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let node_idx = nodes.len();
    let mut nb = Aabb::empty();
    let mut cb = Aabb::empty();
    for &p in &order[start..end] {
        nb = nb.union(&bounds[p as usize]);
        cb.grow(centroids[p as usize]);
    }
    nodes.push(Node { bounds: nb, offset: start as u32, count: (end - start) as u32, axis: 0 });
    let n = end - start;
    if n <= LEAF_SIZE {
        return node_idx;
    }

    let extent = cb.max - cb.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let lo = cb.min.component(axis);
    let span = extent.component(axis);

    let mid = if span <= 1e-12 {
        start + n / 2
    } else {
        let mut bin_bounds = [Aabb::empty(); BINS];
        let mut bin_counts = [0usize; BINS];
        let bin_of = |p: u32| -> usize {
            let f = (centroids[p as usize].component(axis) - lo) / span;
            ((f * BINS as f64) as usize).min(BINS - 1)
        };
        for &p in &order[start..end] {
            let b = bin_of(p);
            bin_counts[b] += 1;
            bin_bounds[b] = bin_bounds[b].union(&bounds[p as usize]);
        }
        let mut best = (f64::INFINITY, 0usize);
        for split in 1..BINS {
            let (mut l, mut r) = (Aabb::empty(), Aabb::empty());
            let (mut nl, mut nr) = (0usize, 0usize);
            for b in 0..split {
                l = l.union(&bin_bounds[b]);
                nl += bin_counts[b];
            }
            for b in split..BINS {
                r = r.union(&bin_bounds[b]);
                nr += bin_counts[b];
            }
            if nl == 0 || nr == 0 {
                continue;
            }
            let cost = l.surface_area() * nl as f64 + r.surface_area() * nr as f64;
            if cost < best.0 {
                best = (cost, split);
            }
        }
        if best.0.is_finite() {
            let split = best.1;
            let slice = &mut order[start..end];
            let mut i = 0;
            for j in 0..slice.len() {
                if bin_of(slice[j]) < split {
                    slice.swap(i, j);
                    i += 1;
                }
            }
            start + i
        } else {
            start + n / 2
        }
    };
    let mid = if mid == start || mid == end {
        // all centroids fell into one bin; median split on the axis
        order[start..end].sort_by(|a, b| {
            centroids[*a as usize]
                .component(axis)
                .total_cmp(&centroids[*b as usize].component(axis))
                .then(a.cmp(b))
        });
        start + n / 2
    } else {
        mid
    };

    build_recursive(bounds, centroids, order, start, mid, nodes);
    let right = build_recursive(bounds, centroids, order, mid, end, nodes);
    let node = &mut nodes[node_idx];
    node.offset = right as u32;
    node.count = 0;
    node.axis = axis as u8;
    node_idx
}
