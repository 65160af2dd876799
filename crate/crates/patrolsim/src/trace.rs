//! Patrol trace data model: line-oriented serialization, windowing of long
//! runs, ingestion of externally recorded data, and the ground-truth
//! attack-outcome oracle.

use crate::graph::{GraphPosition, VertexId};
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tolerance for frame-grid time comparisons, relative to dt.
const GRID_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("trace line {line}: {what} length {got} does not match header ({expected})")]
    LengthMismatch {
        line: usize,
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("trace line {line}: timestamp {t} is not the expected {expected} on the frame grid")]
    BadTimestamp { line: usize, t: f64, expected: f64 },
    #[error("trace is missing its header line")]
    MissingHeader,
    #[error("window [{start}, {end}] outside trace range [{t0}, {t1}]")]
    WindowOutOfRange {
        start: f64,
        end: f64,
        t0: f64,
        t1: f64,
    },
    #[error("time {t} is not aligned to the {dt} s frame grid")]
    Misaligned { t: f64, dt: f64 },
    #[error("attack query (vertex {vertex}, t={t}, tau={tau}) outside trace")]
    QueryOutOfRange { vertex: VertexId, t: f64, tau: f64 },
}

/// One observed timestep: every agent position and every vertex idleness.
/// This is the adversaries' sole observation channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFrame {
    pub t: f64,
    pub positions: Vec<GraphPosition>,
    pub idleness: Vec<f64>,
}

/// An ordered sequence of frames on a fixed `dt` grid, tied to a graph by
/// content hash. Immutable after load.
#[derive(Debug, Clone, PartialEq)]
pub struct PatrolTrace {
    pub graph_hash: String,
    pub dt: f64,
    pub n_vertices: usize,
    pub n_agents: usize,
    pub frames: Vec<TraceFrame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackOutcome {
    Success,
    Failure,
    NotLaunched,
}

/// Result of one adversary scenario: which vertex was attacked, when, and
/// whether it succeeded — or that no attack was launched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub launched: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<VertexId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<f64>,
    pub outcome: AttackOutcome,
}

impl AttackRecord {
    pub fn launched(target: VertexId, t: f64, outcome: AttackOutcome) -> Self {
        debug_assert!(outcome != AttackOutcome::NotLaunched);
        Self {
            launched: true,
            target: Some(target),
            t: Some(t),
            outcome,
        }
    }

    pub fn not_launched() -> Self {
        Self {
            launched: false,
            target: None,
            t: None,
            outcome: AttackOutcome::NotLaunched,
        }
    }
}

// Positions serialize as `[v]` at a vertex and `[u, v, s]` mid-edge.
impl Serialize for GraphPosition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            GraphPosition::AtVertex(v) => {
                let mut seq = serializer.serialize_seq(Some(1))?;
                seq.serialize_element(&v)?;
                seq.end()
            }
            GraphPosition::OnEdge { from, to, offset } => {
                let mut seq = serializer.serialize_seq(Some(3))?;
                seq.serialize_element(&from)?;
                seq.serialize_element(&to)?;
                seq.serialize_element(&offset)?;
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for GraphPosition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PosVisitor;
        impl<'de> Visitor<'de> for PosVisitor {
            type Value = GraphPosition;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("position array [v] or [u, v, s]")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let first: VertexId = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                match seq.next_element::<VertexId>()? {
                    None => Ok(GraphPosition::AtVertex(first)),
                    Some(to) => {
                        let offset: f64 = seq
                            .next_element()?
                            .ok_or_else(|| de::Error::invalid_length(2, &self))?;
                        if seq.next_element::<serde_json::Value>()?.is_some() {
                            return Err(de::Error::invalid_length(4, &self));
                        }
                        Ok(GraphPosition::OnEdge {
                            from: first,
                            to,
                            offset,
                        })
                    }
                }
            }
        }
        deserializer.deserialize_seq(PosVisitor)
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    graph_hash: String,
    dt: f64,
    n: usize,
    agents: usize,
}

#[derive(Serialize, Deserialize)]
struct FrameLine {
    t: f64,
    pos: Vec<GraphPosition>,
    idl: Vec<f64>,
}

impl PatrolTrace {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.frames.first().map_or(0.0, |f| f.t)
    }

    pub fn end_time(&self) -> f64 {
        self.frames.last().map_or(0.0, |f| f.t)
    }

    /// Frame index for an on-grid time, or a misalignment/out-of-range error.
    pub fn frame_index(&self, t: f64) -> Result<usize, TraceError> {
        let rel = (t - self.start_time()) / self.dt;
        let k = rel.round();
        if (rel - k).abs() > GRID_EPS {
            return Err(TraceError::Misaligned { t, dt: self.dt });
        }
        if k < 0.0 || (k as usize) >= self.frames.len() {
            return Err(TraceError::WindowOutOfRange {
                start: t,
                end: t,
                t0: self.start_time(),
                t1: self.end_time(),
            });
        }
        Ok(k as usize)
    }
}

/// Serializes a trace: one JSON header line, then one JSON frame per line.
/// Numbers round-trip exactly.
pub fn write_trace(trace: &PatrolTrace) -> String {
    let mut out = String::new();
    let header = HeaderLine {
        graph_hash: trace.graph_hash.clone(),
        dt: trace.dt,
        n: trace.n_vertices,
        agents: trace.n_agents,
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for frame in &trace.frames {
        let line = FrameLine {
            t: frame.t,
            pos: frame.positions.clone(),
            idl: frame.idleness.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("frame serializes"));
        out.push('\n');
    }
    out
}

/// Parses a trace, validating vector lengths against the header and the
/// frame-time grid. Errors carry 1-based line numbers.
pub fn parse_trace(text: &str) -> Result<PatrolTrace, TraceError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(TraceError::MissingHeader)?;
    let header: HeaderLine =
        serde_json::from_str(header_line).map_err(|e| TraceError::Parse {
            line: 1,
            msg: e.to_string(),
        })?;
    if !(header.dt > 0.0) {
        return Err(TraceError::Parse {
            line: 1,
            msg: format!("non-positive dt {}", header.dt),
        });
    }
    let mut frames = Vec::new();
    let mut t0 = 0.0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let parsed: FrameLine = serde_json::from_str(line).map_err(|e| TraceError::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        if parsed.pos.len() != header.agents {
            return Err(TraceError::LengthMismatch {
                line: lineno,
                what: "agent positions",
                expected: header.agents,
                got: parsed.pos.len(),
            });
        }
        if parsed.idl.len() != header.n {
            return Err(TraceError::LengthMismatch {
                line: lineno,
                what: "idleness vector",
                expected: header.n,
                got: parsed.idl.len(),
            });
        }
        if frames.is_empty() {
            t0 = parsed.t;
        } else {
            let expected = t0 + frames.len() as f64 * header.dt;
            if (parsed.t - expected).abs() > GRID_EPS * header.dt {
                return Err(TraceError::BadTimestamp {
                    line: lineno,
                    t: parsed.t,
                    expected,
                });
            }
        }
        frames.push(TraceFrame {
            t: parsed.t,
            positions: parsed.pos,
            idleness: parsed.idl,
        });
    }
    Ok(PatrolTrace {
        graph_hash: header.graph_hash,
        dt: header.dt,
        n_vertices: header.n,
        n_agents: header.agents,
        frames,
    })
}

/// Extracts the inclusive window `[start, start + length]`, re-basing frame
/// times to zero. Idleness values carry over unmodified, so the absolute
/// idleness at the window start is preserved.
pub fn extract_window(
    trace: &PatrolTrace,
    start: f64,
    length: f64,
) -> Result<PatrolTrace, TraceError> {
    let first = trace.frame_index(start).map_err(|e| match e {
        TraceError::WindowOutOfRange { .. } => TraceError::WindowOutOfRange {
            start,
            end: start + length,
            t0: trace.start_time(),
            t1: trace.end_time(),
        },
        other => other,
    })?;
    let count = (length / trace.dt).round() as usize;
    if (length / trace.dt - count as f64).abs() > GRID_EPS {
        return Err(TraceError::Misaligned {
            t: length,
            dt: trace.dt,
        });
    }
    let last = first + count;
    if last >= trace.frames.len() {
        return Err(TraceError::WindowOutOfRange {
            start,
            end: start + length,
            t0: trace.start_time(),
            t1: trace.end_time(),
        });
    }
    let frames = trace.frames[first..=last]
        .iter()
        .enumerate()
        .map(|(k, f)| TraceFrame {
            t: k as f64 * trace.dt,
            positions: f.positions.clone(),
            idleness: f.idleness.clone(),
        })
        .collect();
    Ok(PatrolTrace {
        graph_hash: trace.graph_hash.clone(),
        dt: trace.dt,
        n_vertices: trace.n_vertices,
        n_agents: trace.n_agents,
        frames,
    })
}

/// Whether an attack launched on vertex `v` at on-grid time `t` succeeds: it
/// does iff no frame in the half-open interval `[t, t + tau)` shows a visit
/// (idleness zero) at `v`. Visits are read from the idleness channel so the
/// rule applies identically to simulated and ingested traces.
pub fn attack_outcome(
    trace: &PatrolTrace,
    v: VertexId,
    t: f64,
    tau: f64,
) -> Result<AttackOutcome, TraceError> {
    if v >= trace.n_vertices || tau <= 0.0 {
        return Err(TraceError::QueryOutOfRange { vertex: v, t, tau });
    }
    let first = trace.frame_index(t).map_err(|_| TraceError::QueryOutOfRange {
        vertex: v,
        t,
        tau,
    })?;
    if t + tau > trace.end_time() + GRID_EPS * trace.dt {
        return Err(TraceError::QueryOutOfRange { vertex: v, t, tau });
    }
    for frame in trace.frames[first..].iter() {
        if frame.t >= t + tau - GRID_EPS * trace.dt {
            break;
        }
        if frame.idleness[v] == 0.0 {
            return Ok(AttackOutcome::Failure);
        }
    }
    Ok(AttackOutcome::Success)
}
