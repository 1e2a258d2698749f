//! Gauss-Legendre panels.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Nodes and weights on a union of panels, sorted by node.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

fn reference(order: usize) -> Vec<(f64, f64)> {
    let order = NonZeroUsize::new(order.max(1)).expect("order is positive");
    let mut pairs = GaussLegendre::new(order).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Composite rule with `order` points on each of the given panels.
pub fn panels(edges: &[f64], order: usize) -> Rule {
    let base = reference(order);
    let mut rule = Rule::default();
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
        for &(x, w) in &base {
            rule.nodes.push(m + h * x);
            rule.weights.push(h * w);
        }
    }
    rule
}

/// Plain Gauss-Legendre on `[a, b]`.
pub fn legendre(a: f64, b: f64, order: usize) -> Rule {
    panels(&[a, b], order)
}

/// Panel edges on `[0, 1]`: `0`, then a geometric sequence with the given
/// ratio from `depth` up to `1`.
pub fn graded_edges(depth: f64, ratio: f64) -> Vec<f64> {
    let mut edges = vec![1.0];
    let mut e = 1.0;
    while e > depth {
        e /= ratio;
        edges.push(e);
    }
    edges.push(0.0);
    edges.reverse();
    edges
}

/// Edges on `[0, 1]` refined geometrically toward both ends.
pub fn two_sided_edges(depth: f64, ratio: f64) -> Vec<f64> {
    let left: Vec<f64> = graded_edges(2.0 * depth, ratio).iter().map(|s| 0.5 * s).collect();
    let mut edges = left.clone();
    edges.extend(left.iter().rev().skip(1).map(|&s| 1.0 - s));
    edges
}
