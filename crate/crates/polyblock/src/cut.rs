fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Removes the cone `{y : y_i ≥ x_i for every i with x_i > 0}` from the
/// polyblock spanned by `vertices`.
///
/// Every vertex `z` strictly above `x` on the positive coordinates of `x` is
/// replaced by its children `z^(i) = z + (x_i - z_i) e_i`. Children dominated
/// by another vertex are never emitted, so a proper vertex set stays proper.
/// `child` builds the child of `z` along coordinate `i` and may return `None`
/// to discard it (used for co-normal pruning and bound pruning).
///
/// Returns the new vertex set and the number of vertices that were cut.
pub(crate) fn cut_vertices<V, F>(vertices: Vec<V>, x: &[f64], mut child: F) -> (Vec<V>, usize)
where
    V: AsRef<[f64]>,
    F: FnMut(&V, usize) -> Option<V>,
{
    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    let mut star = Vec::new();
    let mut rest = Vec::with_capacity(vertices.len());
    // Vertices outside the cone that could still dominate a child: they sit
    // on the boundary of the cone (z ≥ x with equality somewhere).
    let mut blockers = Vec::new();
    for v in vertices {
        let z = v.as_ref();
        if active.iter().all(|&i| z[i] > x[i]) {
            star.push(v);
        } else {
            if active.iter().all(|&i| z[i] >= x[i]) {
                blockers.push(rest.len());
            }
            rest.push(v);
        }
    }
    let cut = star.len();
    if cut == 0 {
        return (rest, 0);
    }

    let mut children = Vec::new();
    let mut probe = vec![0.0; x.len()];
    for (a, za) in star.iter().enumerate() {
        let z = za.as_ref();
        for &i in &active {
            let shadowed = star.iter().enumerate().any(|(b, zb)| {
                if a == b {
                    return false;
                }
                let w = zb.as_ref();
                let mut strict = false;
                for j in 0..z.len() {
                    if j == i {
                        continue;
                    }
                    if w[j] < z[j] {
                        return false;
                    }
                    strict |= w[j] > z[j];
                }
                strict || b < a
            });
            if shadowed {
                continue;
            }
            probe.copy_from_slice(z);
            probe[i] = x[i];
            if blockers
                .iter()
                .any(|&r| dominates(rest[r].as_ref(), &probe))
            {
                continue;
            }
            if let Some(c) = child(za, i) {
                children.push(c);
            }
        }
    }
    rest.extend(children);
    (rest, cut)
}

/// Cuts the cone above `x` out of the polyblock with vertex set `vertices`,
/// dropping improper children and children outside the co-normal set.
pub fn cut_cone(
    vertices: &[Vec<f64>],
    x: &[f64],
    in_conormal: impl Fn(&[f64]) -> bool,
) -> Vec<Vec<f64>> {
    let (out, _) = cut_vertices(vertices.to_vec(), x, |z, i| {
        let mut c = z.clone();
        c[i] = x[i];
        in_conormal(&c).then_some(c)
    });
    out
}

/// `true` when no vertex is dominated by another one.
pub fn is_proper(vertices: &[Vec<f64>]) -> bool {
    vertices.iter().enumerate().all(|(a, za)| {
        vertices
            .iter()
            .enumerate()
            .all(|(b, zb)| a == b || !dominates(zb, za))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(_: &[f64]) -> bool {
        true
    }

    #[test]
    fn single_vertex_in_two_dimensions() {
        let out = cut_cone(&[vec![1.0, 1.0]], &[0.5, 0.5], all);
        assert_eq!(out, vec![vec![0.5, 1.0], vec![1.0, 0.5]]);
    }

    #[test]
    fn no_vertex_above_cut_point_leaves_set_unchanged() {
        let verts = vec![vec![0.5, 1.0], vec![1.0, 0.5]];
        let out = cut_cone(&verts, &[0.7, 0.7], all);
        assert_eq!(out, verts);
    }

    #[test]
    fn three_dimensional_interior_cut() {
        // Children of b = (1,1,1) at x = (0.3,0.5,0.7), enumerated by hand:
        // (0.3,1,1), (1,0.5,1), (1,1,0.7). Each has one coordinate below the
        // others' value in that coordinate, so none dominates another.
        let out = cut_cone(&[vec![1.0, 1.0, 1.0]], &[0.3, 0.5, 0.7], all);
        assert_eq!(
            out,
            vec![
                vec![0.3, 1.0, 1.0],
                vec![1.0, 0.5, 1.0],
                vec![1.0, 1.0, 0.7]
            ]
        );
        assert!(is_proper(&out));
    }

    #[test]
    fn dominated_children_are_dropped() {
        // Both vertices lie above x. (0.8, 0.5) is dominated by (1.0, 0.5) and
        // (0.5, 0.8) by (0.5, 1.0).
        let verts = vec![vec![0.8, 1.0], vec![1.0, 0.8]];
        let out = cut_cone(&verts, &[0.5, 0.5], all);
        assert!(is_proper(&out));
        assert_eq!(out, vec![vec![0.5, 1.0], vec![1.0, 0.5]]);
    }

    #[test]
    fn children_outside_conormal_set_are_pruned() {
        let out = cut_cone(&[vec![1.0, 1.0]], &[0.5, 0.5], |z| z[0] >= 0.75);
        assert_eq!(out, vec![vec![1.0, 0.5]]);
    }

    #[test]
    fn zero_coordinates_of_cut_point_generate_no_child() {
        let out = cut_cone(&[vec![1.0, 0.0, 1.0]], &[0.5, 0.0, 0.25], all);
        assert_eq!(out, vec![vec![0.5, 0.0, 1.0], vec![1.0, 0.0, 0.25]]);
    }
}
