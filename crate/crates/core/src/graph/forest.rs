use super::SymMatrix;
use crate::error::{Error, Result};

/// Cheapest `X`-rooted spanning forest of `U`: every component contains a root.
///
/// Contract the roots into one super-vertex, grow a minimum spanning tree
/// from it (Prim), then expand each super-vertex edge back to the root it
/// came from. Ties go to the smallest vertex index.
pub fn mst_rooted_forest(vertices: &[usize], roots: &[usize], cost: &SymMatrix) -> Result<Vec<(usize, usize)>> {
    if roots.is_empty() {
        return Err(Error::InvalidArgument(
            "rooted spanning forest needs a nonempty root set".into(),
        ));
    }
    let n = cost.n();
    let mut is_root = vec![false; n];
    for &r in roots {
        is_root[r] = true;
    }
    let mut pending: Vec<usize> = vertices.iter().copied().filter(|&v| !is_root[v]).collect();
    pending.sort_unstable();
    pending.dedup();

    let mut sorted_roots = roots.to_vec();
    sorted_roots.sort_unstable();
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    for &v in &pending {
        for &r in &sorted_roots {
            let c = cost.get(r, v);
            if c < key[v] {
                key[v] = c;
                parent[v] = r;
            }
        }
    }

    let mut forest = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let (pos, _) = pending
            .iter()
            .enumerate()
            .min_by(|a, b| key[*a.1].total_cmp(&key[*b.1]).then(a.1.cmp(b.1)))
            .expect("pending is nonempty");
        let v = pending.swap_remove(pos);
        pending.sort_unstable();
        forest.push((parent[v], v));
        for &w in &pending {
            let c = cost.get(v, w);
            if c < key[w] {
                key[w] = c;
                parent[w] = v;
            }
        }
    }
    Ok(forest)
}
