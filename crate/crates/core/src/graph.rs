//! Location-tagged network: immutable CSR adjacency plus one coordinate per node.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Earth radius used by the geodesic metric, in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// A node location. In planar mode `x`/`y` are kilometers; in geodesic mode
/// `x` is longitude and `y` is latitude, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub x: f64,
    pub y: f64,
}

impl GeoPoint {
    pub fn new(x: f64, y: f64) -> Self {
        GeoPoint { x, y }
    }
}

/// How pairwise distances are measured. Both report kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    PlanarEuclidean,
    Geodesic,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::PlanarEuclidean => "planar",
            Metric::Geodesic => "geodesic",
        }
    }
}

/// Distance between two points under the given metric, in kilometers.
pub fn point_distance(a: GeoPoint, b: GeoPoint, metric: Metric) -> f64 {
    match metric {
        Metric::PlanarEuclidean => {
            let dx = a.x - b.x;
            let dy = a.y - b.y;
            (dx * dx + dy * dy).sqrt()
        }
        Metric::Geodesic => haversine_km(a, b),
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat_a = a.y.to_radians();
    let lat_b = b.y.to_radians();
    let dlat = (b.y - a.y).to_radians();
    let dlon = (b.x - a.x).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat_a.cos() * lat_b.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Counters for input rows dropped while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

/// An undirected, simple, location-tagged network.
///
/// Nodes carry a dense index `0..n`; external string ids are mapped to
/// indices by lexicographic order so that repeated loads of the same files
/// index identically. Adjacency is CSR with sorted neighbor lists, and each
/// adjacency slot knows its canonical edge index.
#[derive(Debug, Clone)]
pub struct Network {
    ids: Vec<String>,
    id_index: HashMap<String, u32>,
    points: Vec<GeoPoint>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    slot_edge: Vec<u32>,
    edges: Vec<(u32, u32)>,
    degrees: Vec<u32>,
    metric: Metric,
}

impl Network {
    /// Build from dense parts. Edge endpoints are node indices; self-loops or
    /// duplicate edges are rejected. Node ids are synthesized with enough
    /// zero padding that lexicographic and numeric order coincide.
    pub fn from_indexed(
        points: Vec<GeoPoint>,
        edges: Vec<(u32, u32)>,
        metric: Metric,
    ) -> Result<Self> {
        let ids = synthetic_ids(points.len());
        Network::assemble(ids, points, edges, metric)
    }

    /// Build from externally named nodes. Ids are sorted lexicographically to
    /// fix the dense indexing; edges reference ids.
    pub fn from_named(
        nodes: Vec<(String, GeoPoint)>,
        edges: &[(String, String)],
        metric: Metric,
    ) -> Result<Self> {
        let mut nodes = nodes;
        nodes.sort_by(|a, b| a.0.cmp(&b.0));
        let index: HashMap<&str, u32> = nodes
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.as_str(), i as u32))
            .collect();
        if index.len() != nodes.len() {
            return Err(Error::InvalidConfig("duplicate node id".into()));
        }
        let mut indexed = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            let ui = *index
                .get(u.as_str())
                .ok_or_else(|| Error::MissingLocation { id: u.clone() })?;
            let vi = *index
                .get(v.as_str())
                .ok_or_else(|| Error::MissingLocation { id: v.clone() })?;
            indexed.push((ui, vi));
        }
        let (ids, points): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
        Network::assemble(ids, points, indexed, metric)
    }

    fn assemble(
        ids: Vec<String>,
        points: Vec<GeoPoint>,
        mut edges: Vec<(u32, u32)>,
        metric: Metric,
    ) -> Result<Self> {
        let n = points.len();
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return Err(Error::InvalidConfig(format!(
                    "self-loop on node index {}",
                    e.0
                )));
            }
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            if e.1 as usize >= n {
                return Err(Error::InvalidConfig(format!(
                    "edge endpoint {} out of range",
                    e.1
                )));
            }
        }
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        if edges.len() != before {
            return Err(Error::InvalidConfig("duplicate edge".into()));
        }

        let mut degrees = vec![0u32; n];
        for &(u, v) in &edges {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for v in 0..n {
            offsets.push(offsets[v] + degrees[v] as usize);
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; edges.len() * 2];
        let mut slot_edge = vec![0u32; edges.len() * 2];
        for (e, &(u, v)) in edges.iter().enumerate() {
            neighbors[cursor[u as usize]] = v;
            slot_edge[cursor[u as usize]] = e as u32;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            slot_edge[cursor[v as usize]] = e as u32;
            cursor[v as usize] += 1;
        }
        // Canonical edges are sorted, so each neighbor list built this way is
        // sorted as well.
        let id_index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        Ok(Network {
            ids,
            id_index,
            points,
            offsets,
            neighbors,
            slot_edge,
            edges,
            degrees,
            metric,
        })
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.degrees[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn point(&self, v: u32) -> GeoPoint {
        self.points[v as usize]
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn id(&self, v: u32) -> &str {
        &self.ids[v as usize]
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.id_index.get(id).copied()
    }

    /// Sorted neighbor indices of `v`.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    /// Canonical edge list, each edge once with `u < v`, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Canonical index of the edge `{v, w}`, if present.
    pub fn edge_index(&self, v: u32, w: u32) -> Option<usize> {
        let span = self.offsets[v as usize]..self.offsets[v as usize + 1];
        let list = &self.neighbors[span.clone()];
        list.binary_search(&w)
            .ok()
            .map(|pos| self.slot_edge[span.start + pos] as usize)
    }

    pub fn has_edge(&self, v: u32, w: u32) -> bool {
        self.edge_index(v, w).is_some()
    }

    /// Geographic distance between two nodes, in kilometers.
    pub fn distance(&self, v: u32, w: u32) -> f64 {
        point_distance(
            self.points[v as usize],
            self.points[w as usize],
            self.metric,
        )
    }

    /// Size of the intersection of the two (sorted) neighbor lists.
    pub fn common_neighbor_count(&self, v: u32, w: u32) -> usize {
        assert_ne!(v, w, "common neighbors are defined for distinct nodes");
        let (mut a, mut b) = (self.neighbors(v).iter(), self.neighbors(w).iter());
        let (mut x, mut y) = (a.next(), b.next());
        let mut count = 0;
        while let (Some(&i), Some(&j)) = (x, y) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => x = a.next(),
                std::cmp::Ordering::Greater => y = b.next(),
                std::cmp::Ordering::Equal => {
                    count += 1;
                    x = a.next();
                    y = b.next();
                }
            }
        }
        count
    }
}

fn synthetic_ids(n: usize) -> Vec<String> {
    let width = if n <= 1 { 1 } else { (n - 1).to_string().len() };
    (0..n).map(|i| format!("n{i:0width$}")).collect()
}

/// Load a network from an edge file and a location file.
///
/// Edge file: one `<id_u>\t<id_v>` per line. Location file: `<id>\t<x>\t<y>`.
/// Lines starting with `#` are ignored in both. Self-loops and duplicate
/// edges are dropped and counted; nodes that appear only in the location file
/// are kept as isolated nodes; an edge endpoint without a location is an
/// error.
pub fn load_network(
    edge_path: &Path,
    location_path: &Path,
    metric: Metric,
) -> Result<(Network, LoadStats)> {
    let mut nodes: Vec<(String, GeoPoint)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (lineno, line) in read_lines(location_path)?.enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (id, xs, ys) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(id), Some(x), Some(y), None) => (id, x, y),
            _ => {
                return Err(Error::Parse {
                    path: location_path.into(),
                    line: lineno + 1,
                    message: "expected <id>\\t<x>\\t<y>".into(),
                })
            }
        };
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: location_path.into(),
                line: lineno + 1,
                message: format!("bad coordinate {s:?}"),
            })
        };
        let (x, y) = (parse(xs)?, parse(ys)?);
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFiniteCoordinate {
                path: location_path.into(),
                line: lineno + 1,
                x,
                y,
            });
        }
        if metric == Metric::Geodesic && !(-180.0..=180.0).contains(&x)
            || metric == Metric::Geodesic && !(-90.0..=90.0).contains(&y)
        {
            return Err(Error::CoordinateOutOfRange {
                path: location_path.into(),
                line: lineno + 1,
                x,
                y,
            });
        }
        if seen.insert(id.to_string(), lineno + 1).is_some() {
            return Err(Error::DuplicateLocation {
                path: location_path.into(),
                line: lineno + 1,
                id: id.to_string(),
            });
        }
        nodes.push((id.to_string(), GeoPoint::new(x, y)));
    }

    nodes.sort_by(|a, b| a.0.cmp(&b.0));
    let index: HashMap<&str, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (id.as_str(), i as u32))
        .collect();

    let mut stats = LoadStats::default();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (lineno, line) in read_lines(edge_path)?.enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (u, v) = match (fields.next(), fields.next(), fields.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => {
                return Err(Error::Parse {
                    path: edge_path.into(),
                    line: lineno + 1,
                    message: "expected <id_u>\\t<id_v>".into(),
                })
            }
        };
        let ui = *index
            .get(u)
            .ok_or_else(|| Error::MissingLocation { id: u.to_string() })?;
        let vi = *index
            .get(v)
            .ok_or_else(|| Error::MissingLocation { id: v.to_string() })?;
        if ui == vi {
            stats.self_loops_dropped += 1;
            continue;
        }
        edges.push((ui.min(vi), ui.max(vi)));
    }
    edges.sort_unstable();
    let before = edges.len();
    edges.dedup();
    stats.duplicate_edges_dropped = before - edges.len();

    let (ids, points): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
    let network = Network::assemble(ids, points, edges, metric)?;
    Ok((network, stats))
}

fn read_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = File::open(path)?;
    Ok(BufReader::new(file).lines())
}
