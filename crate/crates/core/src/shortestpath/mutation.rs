//! Add/Delete path mutation.
//!
//! Random draws per call, in order: the operation (fair coin), the position,
//! then the inserted vertex when several are valid. Candidate vertices are
//! enumerated in ascending order before the draw.

use rand::Rng;

use super::graph::{Path, WeightedDigraph};

/// Default cap on the number of vertices in a walk, as a multiple of `n`.
pub const DEFAULT_WALK_FACTOR: usize = 2;

/// All paths reachable by an Add at position `i` (`0 ≤ i ≤ l`): a detour
/// vertex between `v_i` and `v_{i+1}`, or a successor appended at the end.
pub fn add_candidates(g: &WeightedDigraph, p: &Path, i: usize) -> Vec<Path> {
    let v = p.vertices();
    assert!(i < v.len(), "position {i} outside path of {} vertices", v.len());
    let insert = |x: usize| {
        let mut out = Vec::with_capacity(v.len() + 1);
        out.extend_from_slice(&v[..=i]);
        out.push(x);
        out.extend_from_slice(&v[i + 1..]);
        Path::from_vec_unchecked(out)
    };
    if i + 1 == v.len() {
        g.successors(v[i]).map(insert).collect()
    } else {
        let next = v[i + 1];
        g.successors(v[i])
            .filter(|&x| g.has_edge(x, next))
            .map(insert)
            .collect()
    }
}

/// Delete at position `i` (`1 ≤ i ≤ l-1`): removes `v_{i+1}` when the
/// shortcut `(v_i, v_{i+2})` exists, or drops the last vertex when
/// `i = l-1`.
pub fn delete_at(g: &WeightedDigraph, p: &Path, i: usize) -> Option<Path> {
    let v = p.vertices();
    let l = p.len();
    if i == 0 || i + 1 > l {
        return None;
    }
    if i == l - 1 {
        return Some(Path::from_vec_unchecked(v[..l].to_vec()));
    }
    if !g.has_edge(v[i], v[i + 2]) {
        return None;
    }
    let mut out = Vec::with_capacity(v.len() - 1);
    out.extend_from_slice(&v[..=i]);
    out.extend_from_slice(&v[i + 2..]);
    Some(Path::from_vec_unchecked(out))
}

/// One Add or Delete step. `None` means the chosen operation had no valid
/// completion or the result would exceed `max_vertices`.
pub fn mutate_path<R: Rng + ?Sized>(g: &WeightedDigraph, p: &Path, max_vertices: usize, rng: &mut R) -> Option<Path> {
    let l = p.len();
    let child = if rng.random_bool(0.5) {
        let i = rng.random_range(0..=l);
        let mut candidates = add_candidates(g, p, i);
        if candidates.is_empty() {
            return None;
        }
        let pick = rng.random_range(0..candidates.len());
        candidates.swap_remove(pick)
    } else {
        if l < 2 {
            return None;
        }
        let i = rng.random_range(1..l);
        delete_at(g, p, i)?
    };
    (child.vertices().len() <= max_vertices).then_some(child)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixture_graph;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(v: &[usize]) -> Path {
        Path::new(v.to_vec()).unwrap()
    }

    #[test]
    fn delete_examples() {
        let g = fixture_graph();
        let p = path(&[1, 3, 4, 5]);
        assert_eq!(delete_at(&g, &p, 1), Some(path(&[1, 3, 5])));
        assert_eq!(delete_at(&g, &p, 2), Some(path(&[1, 3, 4])));
        assert_eq!(delete_at(&g, &p, 0), None);
        assert_eq!(delete_at(&g, &p, 3), None);
        // (2,4) is not an edge
        assert_eq!(delete_at(&g, &path(&[1, 2, 3, 4, 5]), 1), None);
    }

    #[test]
    fn add_examples() {
        let g = fixture_graph();
        assert_eq!(
            add_candidates(&g, &Path::source(), 0),
            vec![path(&[1, 2]), path(&[1, 3])]
        );
        assert_eq!(add_candidates(&g, &path(&[1, 3]), 0), vec![path(&[1, 2, 3])]);
        assert_eq!(add_candidates(&g, &path(&[1, 3, 5]), 1), vec![path(&[1, 3, 4, 5])]);
        assert!(add_candidates(&g, &path(&[1, 3, 4, 5]), 3).is_empty());
    }

    #[test]
    fn first_step_from_source_is_fair() {
        let g = fixture_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut to2, mut to3, mut none) = (0, 0, 0);
        for _ in 0..40_000 {
            match mutate_path(&g, &Path::source(), 10, &mut rng) {
                Some(p) if p == path(&[1, 2]) => to2 += 1,
                Some(p) if p == path(&[1, 3]) => to3 += 1,
                Some(p) => panic!("unexpected {p}"),
                None => none += 1,
            }
        }
        // Delete never applies to the bare source.
        assert!((none as f64 / 40_000.0 - 0.5).abs() < 0.02);
        assert!((to2 as f64 / (to2 + to3) as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn walk_cap_blocks_growth() {
        let g = fixture_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = path(&[1, 3, 4]);
        for _ in 0..1_000 {
            if let Some(child) = mutate_path(&g, &p, 3, &mut rng) {
                assert!(child.vertices().len() <= 3);
            }
        }
    }

    proptest! {
        #[test]
        fn mutation_keeps_edges(seed in any::<u64>(), steps in 1usize..200) {
            let g = fixture_graph();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = Path::source();
            for _ in 0..steps {
                if let Some(child) = mutate_path(&g, &p, 10, &mut rng) {
                    prop_assert!(child.validate(&g).is_ok());
                    prop_assert_eq!(child.vertices()[0], 1);
                    p = child;
                }
            }
        }
    }
}
