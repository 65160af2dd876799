//! Per-vertex input features for the attack-prediction network: a distance
//! metric `d` (sum of reciprocal agent distances), a velocity metric `v`
//! (approach speed over distance, summed over agents), and the vertex
//! idleness `i`.

use crate::graph::{position_distance, DistanceMatrix, PatrolGraph};
use crate::trace::TraceFrame;

/// Per-vertex `(d, v, i)` triples at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub values: Vec<[f64; 3]>,
}

impl FeatureFrame {
    pub fn vertex_count(&self) -> usize {
        self.values.len()
    }
}

/// Extraction parameters. Distances are clamped below by `dt` so an agent
/// standing on the vertex contributes a finite reciprocal; idleness is
/// scaled by `1/tau` by default to keep the input channels comparable.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    pub dt: f64,
    pub tau: f64,
    pub scale_idleness: bool,
}

impl FeatureExtractor {
    pub fn compute(
        &self,
        graph: &PatrolGraph,
        dm: &DistanceMatrix,
        frame: &TraceFrame,
        prev: Option<&TraceFrame>,
    ) -> FeatureFrame {
        let n = graph.vertex_count();
        let mut values = Vec::with_capacity(n);
        for x in 0..n {
            let mut d = 0.0;
            let mut vel = 0.0;
            for (a, &pos) in frame.positions.iter().enumerate() {
                let dist_now = position_distance(graph, dm, pos, x).max(self.dt);
                d += 1.0 / dist_now;
                if let Some(p) = prev {
                    let dist_prev = position_distance(graph, dm, p.positions[a], x).max(self.dt);
                    vel += ((dist_prev - dist_now) / self.dt) / dist_now;
                }
            }
            let idl = if self.scale_idleness {
                frame.idleness[x] / self.tau
            } else {
                frame.idleness[x]
            };
            values.push([d, vel, idl]);
        }
        FeatureFrame { values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs_shortest_paths, GraphPosition};

    fn line_graph(len: usize) -> PatrolGraph {
        let edges = (0..len - 1).map(|i| (i, i + 1, 1.0)).collect();
        PatrolGraph::new(len, edges, None).unwrap()
    }

    fn frame(positions: Vec<GraphPosition>, n: usize, t: f64) -> TraceFrame {
        TraceFrame {
            t,
            positions,
            idleness: vec![6.0; n],
        }
    }

    #[test]
    fn distance_metric_sums_reciprocals() {
        let g = line_graph(7);
        let dm = all_pairs_shortest_paths(&g);
        let fx = FeatureExtractor {
            dt: 1.0,
            tau: 30.0,
            scale_idleness: true,
        };
        // One agent at distance 4 from vertex 0.
        let f = fx.compute(&g, &dm, &frame(vec![GraphPosition::AtVertex(4)], 7, 0.0), None);
        assert_eq!(f.values[0][0], 0.25);
        // Agents at distances 2 and 4.
        let f = fx.compute(
            &g,
            &dm,
            &frame(
                vec![GraphPosition::AtVertex(2), GraphPosition::AtVertex(4)],
                7,
                0.0,
            ),
            None,
        );
        assert_eq!(f.values[0][0], 0.75);
        // An agent on the vertex itself is clamped to distance dt.
        let f = fx.compute(&g, &dm, &frame(vec![GraphPosition::AtVertex(0)], 7, 0.0), None);
        assert_eq!(f.values[0][0], 1.0);
    }

    #[test]
    fn velocity_metric_signs() {
        let g = line_graph(7);
        let dm = all_pairs_shortest_paths(&g);
        let fx = FeatureExtractor {
            dt: 1.0,
            tau: 30.0,
            scale_idleness: true,
        };
        let at4 = frame(vec![GraphPosition::AtVertex(4)], 7, 0.0);
        let at5 = frame(vec![GraphPosition::AtVertex(5)], 7, 1.0);
        // Approaching vertex 0: distance 5 -> 4 gives (5-4)/1 / 4.
        let f = fx.compute(&g, &dm, &at4, Some(&at5));
        assert_eq!(f.values[0][1], 0.25);
        // Receding: 4 -> 5 gives (4-5)/1 / 5.
        let f = fx.compute(&g, &dm, &at5, Some(&at4));
        assert_eq!(f.values[0][1], -0.2);
        // No previous frame: velocity is zero.
        let f = fx.compute(&g, &dm, &at4, None);
        assert_eq!(f.values[0][1], 0.0);
    }

    #[test]
    fn idleness_scaling_toggle() {
        let g = line_graph(3);
        let dm = all_pairs_shortest_paths(&g);
        let f = frame(vec![GraphPosition::AtVertex(1)], 3, 0.0);
        let scaled = FeatureExtractor {
            dt: 1.0,
            tau: 30.0,
            scale_idleness: true,
        }
        .compute(&g, &dm, &f, None);
        assert_eq!(scaled.values[0][2], 0.2);
        let raw = FeatureExtractor {
            dt: 1.0,
            tau: 30.0,
            scale_idleness: false,
        }
        .compute(&g, &dm, &f, None);
        assert_eq!(raw.values[0][2], 6.0);
    }
}
