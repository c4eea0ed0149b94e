use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::graph::{Color, CostGraph};
use super::CostError;

/// Proper 2-coloring of the simplex adjacency graph (simplices adjacent when
/// they share a joint). Each component starts blue at its lowest-index simplex.
pub fn two_color(g: &CostGraph) -> Result<Vec<Color>, CostError> {
    let members = g.memberships();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); g.witness.len()];
    for m in &members {
        for a in 0..m.len() {
            for b in a + 1..m.len() {
                nbrs[m[a]].push(m[b]);
                nbrs[m[b]].push(m[a]);
            }
        }
    }
    let mut color: Vec<Option<Color>> = vec![None; g.witness.len()];
    let mut queue = VecDeque::new();
    for start in 0..g.witness.len() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(Color::Blue);
        queue.push_back(start);
        while let Some(s) = queue.pop_front() {
            let c = color[s].expect("queued simplices are colored");
            for &t in &nbrs[s] {
                match color[t] {
                    None => {
                        color[t] = Some(c.flipped());
                        queue.push_back(t);
                    }
                    Some(ct) if ct == c => return Err(CostError::NotTwoColorable(t.min(s))),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(color.into_iter().map(|c| c.expect("all visited")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Dim;

    #[test]
    fn bowtie_is_blue_green() {
        let g = CostGraph::from_witness(Dim::Two, 5, vec![vec![0, 1, 2], vec![0, 3, 4]]);
        assert_eq!(two_color(&g).unwrap(), vec![Color::Blue, Color::Green]);
    }

    #[test]
    fn odd_cycle_of_triangles_is_rejected() {
        // three triangles pairwise sharing one joint
        let g = CostGraph::from_witness(Dim::Two, 6, vec![vec![0, 1, 3], vec![1, 2, 4], vec![2, 0, 5]]);
        assert!(matches!(two_color(&g), Err(CostError::NotTwoColorable(_))));
    }
}
