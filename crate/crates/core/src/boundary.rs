//! Boundary conditions for FK percolation: partitions of the boundary
//! vertex set into wired classes.

use crate::geometry::GraphTopology;

/// A partition of the boundary vertices. Vertices absent from every class
/// are free (singletons). At most one class may be flagged as the plus
/// class: clusters touching it take spin +1 under the spin/bond coupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPartition {
    classes: Vec<Vec<u32>>,
    plus_class: Option<usize>,
}

impl BoundaryPartition {
    /// All singletons.
    pub fn free() -> Self {
        BoundaryPartition { classes: Vec::new(), plus_class: None }
    }

    /// All boundary vertices in a single plus-flagged class.
    pub fn wired(g: &GraphTopology) -> Self {
        let class = g.boundary_vertices();
        if class.is_empty() {
            return Self::free();
        }
        BoundaryPartition { classes: vec![class], plus_class: Some(0) }
    }

    /// Explicit classes; panics on overlap.
    pub fn custom(classes: Vec<Vec<u32>>) -> Self {
        let mut seen = std::collections::HashSet::new();
        for class in &classes {
            for &v in class {
                assert!(seen.insert(v), "overlapping boundary classes");
            }
        }
        let mut classes = classes;
        for c in &mut classes {
            c.sort_unstable();
        }
        classes.retain(|c| c.len() > 1);
        BoundaryPartition { classes, plus_class: None }
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn plus_class(&self) -> Option<&[u32]> {
        self.plus_class.map(|i| self.classes[i].as_slice())
    }

    pub fn is_free(&self) -> bool {
        self.classes.is_empty()
    }

    /// True when every class of `self` is contained in a class of `other`
    /// (so `self` imposes less wiring: `self <= other` in the stochastic
    /// ordering sense).
    pub fn refines(&self, other: &BoundaryPartition) -> bool {
        self.classes.iter().all(|class| {
            class.len() < 2
                || other
                    .classes
                    .iter()
                    .any(|big| class.iter().all(|v| big.binary_search(v).is_ok()))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_graph, Pt};

    #[test]
    fn refinement_order() {
        let g = build_box_graph(2, 1, Pt::zero()).unwrap();
        let free = BoundaryPartition::free();
        let wired = BoundaryPartition::wired(&g);
        assert!(free.refines(&wired));
        assert!(free.refines(&free));
        assert!(wired.refines(&wired));
        assert!(!wired.refines(&free));

        let b = g.boundary_vertices();
        let half = BoundaryPartition::custom(vec![b[..4].to_vec()]);
        assert!(half.refines(&wired));
        assert!(!wired.refines(&half));
    }
}
