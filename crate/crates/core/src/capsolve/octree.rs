//! Octree over panel centroids. Each node covers a contiguous range of the
//! tree ordering of panels.

use super::kernel::PanelFrame;
use crate::geometry::Vec3;

const MAX_DEPTH: usize = 40;

#[derive(Debug, Clone)]
pub(crate) struct Node {
    /// Centre of the bounding box of the node's panel vertices.
    pub center: Vec3,
    /// Largest distance from `center` to any panel vertex in the node.
    pub radius: f64,
    pub start: usize,
    pub end: usize,
    pub children: Vec<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Octree {
    pub nodes: Vec<Node>,
    /// Panel indices in tree order.
    pub order: Vec<usize>,
}

impl Octree {
    pub fn build(frames: &[PanelFrame], vertices: &[[Vec3; 4]], leaf_size: usize) -> Self {
        let n = frames.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for f in frames {
            for k in 0..3 {
                lo[k] = lo[k].min(f.centroid[k]);
                hi[k] = hi[k].max(f.centroid[k]);
            }
        }
        let center: Vec3 = std::array::from_fn(|k| 0.5 * (lo[k] + hi[k]));
        let half = (0..3).fold(0.0f64, |m, k| m.max(0.5 * (hi[k] - lo[k])));
        let mut tree = Octree {
            nodes: Vec::new(),
            order: Vec::new(),
        };
        tree.split(frames, vertices, &mut order, 0, center, half, leaf_size, 0);
        tree.order = order;
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn split(
        &mut self,
        frames: &[PanelFrame],
        vertices: &[[Vec3; 4]],
        order: &mut [usize],
        start: usize,
        cube_center: Vec3,
        half: f64,
        leaf_size: usize,
        depth: usize,
    ) -> usize {
        let (center, radius) = enclosing(order, vertices);
        let id = self.nodes.len();
        self.nodes.push(Node {
            center,
            radius,
            start,
            end: start + order.len(),
            children: Vec::new(),
        });
        if order.len() <= leaf_size || depth >= MAX_DEPTH || half == 0.0 {
            return id;
        }
        let octant = |i: usize| {
            let c = frames[i].centroid;
            (0..3).fold(0usize, |o, k| o | (((c[k] >= cube_center[k]) as usize) << k))
        };
        // stable bucket sort by octant
        let mut buckets: [Vec<usize>; 8] = Default::default();
        for &i in order.iter() {
            buckets[octant(i)].push(i);
        }
        let mut children = Vec::new();
        let mut off = 0;
        for (o, bucket) in buckets.into_iter().enumerate() {
            if bucket.is_empty() {
                continue;
            }
            let len = bucket.len();
            order[off..off + len].copy_from_slice(&bucket);
            let h = 0.5 * half;
            let cc: Vec3 = std::array::from_fn(|k| {
                cube_center[k] + if (o >> k) & 1 == 1 { h } else { -h }
            });
            let child = self.split(
                frames,
                vertices,
                &mut order[off..off + len],
                start + off,
                cc,
                h,
                leaf_size,
                depth + 1,
            );
            children.push(child);
            off += len;
        }
        self.nodes[id].children = children;
        id
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }
}

fn enclosing(panels: &[usize], vertices: &[[Vec3; 4]]) -> (Vec3, f64) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in panels {
        for v in &vertices[i] {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
    }
    let c: Vec3 = std::array::from_fn(|k| 0.5 * (lo[k] + hi[k]));
    let mut r2 = 0.0f64;
    for &i in panels {
        for v in &vertices[i] {
            let d = (v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2);
            r2 = r2.max(d);
        }
    }
    (c, r2.sqrt())
}
