//! Built-in desk-scale maps. Edge weights are travel times in seconds,
//! sized so that single-digit patrol teams produce inter-visit gaps
//! comparable to attack durations of 30–180 s.

use crate::graph::PatrolGraph;

pub const BUILTIN_NAMES: [&str; 3] = ["grid5x4", "corridor12", "rings18"];

/// Looks up a built-in map by name.
pub fn builtin(name: &str) -> Option<PatrolGraph> {
    match name {
        "grid5x4" => Some(grid5x4()),
        "corridor12" => Some(corridor12()),
        "rings18" => Some(rings18()),
        _ => None,
    }
}

/// 5-column, 4-row lattice; 20 vertices, 10 s edges.
pub fn grid5x4() -> PatrolGraph {
    let cols = 5;
    let rows = 4;
    let mut edges = Vec::new();
    let mut coords = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let id = r * cols + c;
            coords.push([c as f64 * 10.0, r as f64 * 10.0]);
            if c + 1 < cols {
                edges.push((id, id + 1, 10.0));
            }
            if r + 1 < rows {
                edges.push((id, id + cols, 10.0));
            }
        }
    }
    PatrolGraph::new(cols * rows, edges, Some(coords)).expect("grid is valid")
}

/// Office-like corridor: an 8-vertex spine (vertices 0..=7, 8 s edges) with
/// four dead-end rooms (vertices 8..=11, 5 s stubs) hanging off it.
pub fn corridor12() -> PatrolGraph {
    let mut edges = Vec::new();
    for i in 0..7 {
        edges.push((i, i + 1, 8.0));
    }
    edges.push((1, 8, 5.0));
    edges.push((3, 9, 5.0));
    edges.push((5, 10, 5.0));
    edges.push((7, 11, 5.0));
    let mut coords: Vec<[f64; 2]> = (0..8).map(|i| [i as f64 * 8.0, 0.0]).collect();
    coords.extend([[8.0, 5.0], [24.0, 5.0], [40.0, 5.0], [56.0, 5.0]]);
    PatrolGraph::new(12, edges, Some(coords)).expect("corridor is valid")
}

/// Two 9-vertex rings (8 s edges) joined by two 12 s bridges.
pub fn rings18() -> PatrolGraph {
    let mut edges = Vec::new();
    for i in 0..9 {
        edges.push((i, (i + 1) % 9, 8.0));
        edges.push((9 + i, 9 + (i + 1) % 9, 8.0));
    }
    edges.push((0, 9, 12.0));
    edges.push((4, 13, 12.0));
    let mut coords = Vec::new();
    for ring in 0..2 {
        for i in 0..9 {
            let angle = i as f64 * std::f64::consts::TAU / 9.0;
            coords.push([
                ring as f64 * 40.0 + 12.0 * angle.cos(),
                12.0 * angle.sin(),
            ]);
        }
    }
    PatrolGraph::new(18, edges, Some(coords)).expect("rings are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid_and_sized_as_documented() {
        assert_eq!(grid5x4().vertex_count(), 20);
        assert_eq!(corridor12().vertex_count(), 12);
        assert_eq!(rings18().vertex_count(), 18);
        for name in BUILTIN_NAMES {
            assert!(builtin(name).is_some());
        }
        assert!(builtin("nope").is_none());
    }
}
