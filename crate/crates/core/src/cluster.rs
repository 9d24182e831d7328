//! Agglomerative clustering of variables from a relevance matrix.
//!
//! Similarities are the squared off-diagonal entries `s_jk = v_jk²`, turned
//! into distances `d_jk = 1 − s_jk / max_{j≠k} s_jk`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    #[default]
    Average,
    Complete,
    Single,
}

/// One agglomeration step. Leaves are `0..p`; the cluster created by merge
/// `k` has id `p + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
    pub linkage: Linkage,
}

impl ClusterTree {
    pub fn leaves(&self) -> usize {
        self.labels.len()
    }

    /// Cluster index (`0..k`, numbered by smallest member) of every leaf
    /// after undoing the last `k − 1` merges.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let p = self.leaves();
        if k == 0 || k > p {
            return Err(Error::InvalidArgument(format!("cannot cut {p} leaves into {k} clusters")));
        }
        let mut parent: Vec<usize> = (0..2 * p - 1).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (m, merge) in self.merges.iter().take(p - k).enumerate() {
            let id = p + m;
            let l = find(&mut parent, merge.left);
            let r = find(&mut parent, merge.right);
            parent[l] = id;
            parent[r] = id;
        }
        let roots: Vec<usize> = (0..p).map(|i| find(&mut parent, i)).collect();
        let mut order: Vec<usize> = Vec::new();
        Ok(roots
            .iter()
            .map(|r| match order.iter().position(|o| o == r) {
                Some(i) => i,
                None => {
                    order.push(*r);
                    order.len() - 1
                }
            })
            .collect())
    }
}

/// Distance matrix from a relevance matrix.
pub fn similarity_distances(v: &Matrix) -> Result<Matrix> {
    let p = v.rows();
    let mut smax: f64 = 0.0;
    for j in 0..p {
        for k in 0..p {
            if j != k {
                smax = smax.max(v[(j, k)] * v[(j, k)]);
            }
        }
    }
    if smax == 0.0 {
        return Err(Error::DegenerateSimilarity);
    }
    Ok(Matrix::from_fn(p, p, |j, k| {
        if j == k {
            0.0
        } else {
            1.0 - v[(j, k)] * v[(j, k)] / smax
        }
    }))
}

pub fn cluster_variables(v: &Matrix, names: &[String], linkage: Linkage) -> Result<ClusterTree> {
    let p = v.rows();
    if p < 2 || !v.is_square() {
        return Err(Error::InvalidArgument("clustering needs a square matrix with p >= 2".into()));
    }
    if names.len() != p {
        return Err(Error::DimensionMismatch(format!("{} names for {p} variables", names.len())));
    }
    let mut d = similarity_distances(v)?;
    let mut active: Vec<Option<(usize, usize)>> = (0..p).map(|i| Some((i, 1))).collect();
    let mut merges = Vec::with_capacity(p - 1);
    for step in 0..p - 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..p {
            if active[a].is_none() {
                continue;
            }
            for b in a + 1..p {
                if active[b].is_some() && d[(a, b)] < best.0 {
                    best = (d[(a, b)], a, b);
                }
            }
        }
        let (height, a, b) = best;
        let (ida, na) = active[a].unwrap();
        let (idb, nb) = active[b].unwrap();
        for c in 0..p {
            if c == a || c == b || active[c].is_none() {
                continue;
            }
            let (dac, dbc) = (d[(a, c)], d[(b, c)]);
            let new = match linkage {
                Linkage::Average => (na as f64 * dac + nb as f64 * dbc) / (na + nb) as f64,
                Linkage::Complete => dac.max(dbc),
                Linkage::Single => dac.min(dbc),
            };
            d[(a, c)] = new;
            d[(c, a)] = new;
        }
        active[a] = Some((p + step, na + nb));
        active[b] = None;
        merges.push(Merge {
            left: ida.min(idb),
            right: ida.max(idb),
            height,
            size: na + nb,
        });
    }
    Ok(ClusterTree {
        labels: names.to_vec(),
        merges,
        linkage,
    })
}
