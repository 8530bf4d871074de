//! KD-tree radius search over obstacle estimates.
//!
//! The fusion stage gathers every estimate within the association radius of
//! a track. A 2D KD-tree over estimate means keeps that query cheap; results
//! are guaranteed identical to a linear scan (property tested).

use crate::model::{GaussianObstacle, Vec2};

#[derive(Debug)]
struct KdNode {
    point: Vec2,
    /// Index into the original input slice.
    item: usize,
    left: Option<Box<KdNode>>,
    right: Option<Box<KdNode>>,
}

fn build_node(points: &mut [(Vec2, usize)], depth: usize) -> Option<Box<KdNode>> {
    if points.is_empty() {
        return None;
    }
    let axis = depth % 2;
    let mid = points.len() / 2;
    points.select_nth_unstable_by(mid, |a, b| {
        let (ka, kb) = if axis == 0 {
            (a.0.x, b.0.x)
        } else {
            (a.0.y, b.0.y)
        };
        ka.total_cmp(&kb)
    });
    let (point, item) = points[mid];
    let (lo, hi) = points.split_at_mut(mid);
    Some(Box::new(KdNode {
        point,
        item,
        left: build_node(lo, depth + 1),
        right: build_node(&mut hi[1..], depth + 1),
    }))
}

/// KD-tree over the means of a frame's obstacle estimates. Each entry keeps
/// the full estimate so queries can hand measurements straight to the filter.
#[derive(Debug)]
pub struct SpatialIndex {
    root: Option<Box<KdNode>>,
    items: Vec<GaussianObstacle>,
}

impl SpatialIndex {
    pub fn build(obstacles: &[GaussianObstacle]) -> Self {
        let mut points: Vec<(Vec2, usize)> = obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| (o.mean, i))
            .collect();
        Self {
            root: build_node(&mut points, 0),
            items: obstacles.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, item: usize) -> &GaussianObstacle {
        &self.items[item]
    }

    /// Indices and distances of all estimates within `radius` of `center`
    /// (inclusive), ascending by distance; ties broken by input order.
    /// Distances use the same arithmetic as a plain linear scan, so results
    /// are bit-identical to one.
    pub fn within_radius(&self, center: Vec2, radius: f64) -> Vec<(usize, f64)> {
        let mut hits = Vec::new();
        let mut stack: Vec<(&KdNode, usize)> = Vec::new();
        if let Some(root) = &self.root {
            stack.push((root, 0));
        }
        while let Some((node, depth)) = stack.pop() {
            let d = (node.point - center).norm();
            if d <= radius {
                hits.push((node.item, d));
            }
            let axis = depth % 2;
            let diff = if axis == 0 {
                center.x - node.point.x
            } else {
                center.y - node.point.y
            };
            let (near, far) = if diff < 0.0 {
                (&node.left, &node.right)
            } else {
                (&node.right, &node.left)
            };
            if let Some(n) = near {
                stack.push((n, depth + 1));
            }
            // The far side can only contain hits if the splitting plane is
            // within the query radius.
            if diff.abs() <= radius {
                if let Some(f) = far {
                    stack.push((f, depth + 1));
                }
            }
        }
        hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        hits
    }
}

/// Reference implementation used by tests and sanity checks.
pub fn linear_within_radius(
    obstacles: &[GaussianObstacle],
    center: Vec2,
    radius: f64,
) -> Vec<(usize, f64)> {
    let mut hits: Vec<(usize, f64)> = obstacles
        .iter()
        .enumerate()
        .filter_map(|(i, o)| {
            let d = (o.mean - center).norm();
            (d <= radius).then_some((i, d))
        })
        .collect();
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    hits
}
