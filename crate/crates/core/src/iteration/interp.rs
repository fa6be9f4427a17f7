//! Off-lattice velocity for stages without a closed form: cubic Lagrange
//! interpolation in time between cached lattice snapshots of v_ℓ and ∇v_ℓ,
//! tricubic Lagrange interpolation in space.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use super::flow::VelocitySampler;
use super::triple::EulerReynoldsTriple;
use crate::error::Result;
use crate::field::eval::EvalScratch;
use crate::field::{mollify, ops, GridSpec};
use crate::linalg::{Mat3, Vec3};

struct Node {
    /// v_1, v_2, v_3, then ∂_j v_m at 3 + 3m + j
    comps: Vec<Vec<f64>>,
}

pub struct InterpolatingSampler {
    prev: Arc<EulerReynoldsTriple>,
    ell: f64,
    tau: f64,
    nodes: Mutex<BTreeMap<i64, Arc<Node>>>,
}

const MAX_NODES: usize = 96;

impl InterpolatingSampler {
    pub fn new(prev: Arc<EulerReynoldsTriple>, ell: f64, tau: f64) -> Self {
        InterpolatingSampler {
            prev,
            ell,
            tau,
            nodes: Mutex::new(BTreeMap::new()),
        }
    }

    fn build(&self, j: i64) -> Result<Node> {
        let t = j as f64 * self.tau;
        let v = self.prev.velocity(t)?;
        let v = mollify(&*v, self.ell)?.field;
        let grads = ops::first_derivatives(&v.grid, &v.comps);
        let mut comps: Vec<Vec<f64>> = v.comps.to_vec();
        for g in grads {
            comps.extend(g);
        }
        Ok(Node { comps })
    }

    fn node(&self, j: i64) -> Option<Arc<Node>> {
        self.nodes.lock().unwrap().get(&j).cloned()
    }
}

/// Weights of the cubic Lagrange stencil at nodes −1, 0, 1, 2 for s ∈ [0, 1).
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

fn spatial(grid: &GridSpec, node: &Node, x: &Vec3, out: &mut [f64; 12]) {
    let n = grid.n as i64;
    let h = grid.spacing();
    let mut base = [0i64; 3];
    let mut w = [[0.0; 4]; 3];
    for a in 0..3 {
        let u = x[a] / h;
        let f = u.floor();
        base[a] = f as i64;
        w[a] = cubic_weights(u - f);
    }
    for c in out.iter_mut() {
        *c = 0.0;
    }
    for (d3, w3) in w[2].iter().enumerate() {
        let i3 = (base[2] + d3 as i64 - 1).rem_euclid(n) as usize;
        for (d2, w2) in w[1].iter().enumerate() {
            let i2 = (base[1] + d2 as i64 - 1).rem_euclid(n) as usize;
            for (d1, w1) in w[0].iter().enumerate() {
                let i1 = (base[0] + d1 as i64 - 1).rem_euclid(n) as usize;
                let idx = grid.index(i1, i2, i3);
                let wt = w1 * w2 * w3;
                for (c, o) in out.iter_mut().enumerate() {
                    *o += wt * node.comps[c][idx];
                }
            }
        }
    }
}

impl VelocitySampler for InterpolatingSampler {
    fn prepare(&self, t0: f64, t1: f64) -> Result<()> {
        let lo = (t0.min(t1) / self.tau).floor() as i64 - 1;
        let hi = (t0.max(t1) / self.tau).floor() as i64 + 2;
        for j in lo..=hi {
            if self.node(j).is_some() {
                continue;
            }
            let node = Arc::new(self.build(j)?);
            let mut nodes = self.nodes.lock().unwrap();
            nodes.insert(j, node);
            // drop the nodes farthest from the window
            while nodes.len() > MAX_NODES {
                let first = *nodes.keys().next().unwrap();
                let last = *nodes.keys().next_back().unwrap();
                if lo - first > last - hi {
                    nodes.remove(&first);
                } else {
                    nodes.remove(&last);
                }
            }
        }
        Ok(())
    }

    fn sample(&self, x: &Vec3, t: f64, _: &mut EvalScratch) -> (Vec3, Mat3) {
        let u = t / self.tau;
        let f = u.floor();
        let wt = cubic_weights(u - f);
        let j0 = f as i64;
        let mut acc = [0.0; 12];
        let mut buf = [0.0; 12];
        for (d, w) in wt.iter().enumerate() {
            let node = self
                .node(j0 + d as i64 - 1)
                .expect("interpolation node requested outside the prepared window");
            spatial(&self.prev.grid, &node, x, &mut buf);
            for c in 0..12 {
                acc[c] += w * buf[c];
            }
        }
        let v = [acc[0], acc[1], acc[2]];
        let dv = std::array::from_fn(|m| std::array::from_fn(|j| acc[3 + 3 * m + j]));
        (v, dv)
    }
}
