//! Node deployment and unit-disk connectivity.
//!
//! Deployments are drawn from a `ChaCha8Rng` seeded with `seed_from_u64(seed)`
//! on stream 0. Each node consumes two `f64` samples in `[0, 1)` (x first, then
//! y), scaled by the area width and height. The generator is part of the
//! reproducibility contract: changing it changes every run.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense node identifier, an index into the topology's node tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Where the sink sits inside the service area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SinkPlacement {
    Center,
    /// The origin corner, `(0, 0)`.
    Corner,
    At(Position),
}

impl SinkPlacement {
    pub fn resolve(&self, width: f64, height: f64) -> Position {
        match *self {
            SinkPlacement::Center => Position::new(width / 2.0, height / 2.0),
            SinkPlacement::Corner => Position::new(0.0, 0.0),
            SinkPlacement::At(p) => p,
        }
    }
}

/// Draws `node_count` positions uniformly over `[0, width] x [0, height]`.
pub fn generate_deployment(
    node_count: usize,
    width: f64,
    height: f64,
    seed: u64,
) -> Result<Vec<Position>> {
    if node_count == 0 {
        return Err(Error::config("node_count", "must be at least 1"));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::config(
            "area_w_m",
            format!("must be positive, got {width}"),
        ));
    }
    if !(height.is_finite() && height > 0.0) {
        return Err(Error::config(
            "area_h_m",
            format!("must be positive, got {height}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..node_count)
        .map(|_| {
            let x = rng.random::<f64>() * width;
            let y = rng.random::<f64>() * height;
            Position::new(x, y)
        })
        .collect())
}

/// Node positions plus symmetric unit-disk adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    radio_range: f64,
    // Sorted ascending by id.
    adjacency: Vec<Vec<NodeId>>,
}

/// Connects every pair of distinct nodes at most `radio_range` apart.
pub fn build_adjacency(positions: Vec<Position>, radio_range: f64) -> Topology {
    let n = positions.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if positions[i].distance(&positions[j]) <= radio_range {
                adjacency[i].push(NodeId(j as u32));
                adjacency[j].push(NodeId(i as u32));
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Topology {
        positions,
        radio_range,
        adjacency,
    }
}

impl Topology {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.positions.len()
    }

    pub fn position(&self, id: NodeId) -> Position {
        self.positions[id.index()]
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id.index()]
    }

    pub fn are_neighbors(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.position(a).distance(&self.position(b))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.positions.len() as u32).map(NodeId)
    }
}

/// Breadth-first hop distance from `sink`; `None` marks unreachable nodes.
pub fn bfs_hop_distance(topology: &Topology, sink: NodeId) -> Result<Vec<Option<u32>>> {
    if !topology.contains(sink) {
        return Err(Error::UnknownNode(sink));
    }
    let mut dist = vec![None; topology.len()];
    dist[sink.index()] = Some(0);
    let mut frontier = VecDeque::from([sink]);
    while let Some(u) = frontier.pop_front() {
        let next = dist[u.index()].map(|d| d + 1);
        for &v in topology.neighbors(u) {
            if dist[v.index()].is_none() {
                dist[v.index()] = next;
                frontier.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Positions, sink and radio range as stored in a deployment file.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentFile {
    pub positions: Vec<Position>,
    pub sink: NodeId,
    pub radio_range: f64,
}

impl DeploymentFile {
    /// Writes `# sink <id> range <r>` followed by one `id x y` line per node.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# sink {} range {:.16e}", self.sink, self.radio_range)?;
        for (id, p) in self.positions.iter().enumerate() {
            writeln!(out, "{id} {:.16e} {:.16e}", p.x, p.y)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut header: Option<(NodeId, f64)> = None;
        let mut entries: Vec<(u32, Position)> = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let bad = |message: &str| Error::Deployment {
                line: lineno,
                message: message.to_string(),
            };
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if let ["sink", id, "range", r] = fields.as_slice() {
                    let id = id.parse::<u32>().map_err(|_| bad("bad sink id"))?;
                    let r = r.parse::<f64>().map_err(|_| bad("bad range"))?;
                    header = Some((NodeId(id), r));
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let [id, x, y] = fields.as_slice() else {
                return Err(bad("expected `id x y`"));
            };
            let id = id.parse::<u32>().map_err(|_| bad("bad node id"))?;
            let x = x.parse::<f64>().map_err(|_| bad("bad x coordinate"))?;
            let y = y.parse::<f64>().map_err(|_| bad("bad y coordinate"))?;
            entries.push((id, Position::new(x, y)));
        }
        let (sink, radio_range) = header.ok_or(Error::Deployment {
            line: 0,
            message: "missing `# sink <id> range <r>` header".into(),
        })?;
        entries.sort_by_key(|(id, _)| *id);
        for (expected, (id, _)) in entries.iter().enumerate() {
            if *id as usize != expected {
                return Err(Error::Deployment {
                    line: 0,
                    message: format!(
                        "node ids must be dense from 0; missing or repeated id near {id}"
                    ),
                });
            }
        }
        if sink.index() >= entries.len() {
            return Err(Error::UnknownNode(sink));
        }
        Ok(Self {
            positions: entries.into_iter().map(|(_, p)| p).collect(),
            sink,
            radio_range,
        })
    }
}
