//! Problem instances: the five-vertex worked example, a planted-tree UAV
//! style generator, and references that name either of them or a file.

mod format;

use std::collections::VecDeque;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use format::{parse_instance, write_instance, HEADER};

use crate::shortestpath::{GraphBuilder, SpError, WeightedDigraph, SOURCE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: expected header `bpmosp v1`, found {found:?}")]
    Header { line: usize, found: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: SpError },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid instance reference {0:?}")]
    BadReference(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
}

impl InstanceError {
    /// Line the error refers to, for parse errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            InstanceError::Header { line, .. }
            | InstanceError::Malformed { line, .. }
            | InstanceError::Graph { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// The five-vertex, seven-edge bi-party graph whose path totals are listed
/// in the worked example (paths from 1 to 5 and to 2, 3, 4).
pub fn fixture_graph() -> WeightedDigraph {
    const EDGES: [(usize, usize, [u64; 2], [u64; 2]); 7] = [
        (1, 2, [1, 2], [2, 4]),
        (1, 3, [3, 2], [3, 5]),
        (2, 3, [3, 3], [2, 1]),
        (2, 5, [9, 2], [6, 1]),
        (3, 4, [2, 1], [1, 1]),
        (3, 5, [1, 3], [4, 3]),
        (4, 5, [2, 1], [1, 1]),
    ];
    let mut b = GraphBuilder::new(5, vec![2, 2]).expect("valid shape");
    for (u, v, w1, w2) in EDGES {
        b.add_edge(u, v, vec![w1.to_vec(), w2.to_vec()]).expect("valid edge");
    }
    b.build().expect("fixture is connected")
}

/// Physical constants that shape the generated weights. They only scale
/// magnitudes; the planted common paths do not depend on them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavConstants {
    /// Side of the square flight area, metres.
    pub area: f64,
    /// Altitude range of waypoints, metres.
    pub altitude: (f64, f64),
    /// Crash probability per flight.
    pub p_crash: f64,
    /// Impact area of a falling UAV, square metres.
    pub impact_area: f64,
    /// Population density range, people per square metre.
    pub density: (f64, f64),
    /// Log-normal noise profile over altitude: (median metres, sigma).
    pub noise_profile: (f64, f64),
    /// Metres per unit of length and hover-distance weight.
    pub distance_unit: f64,
    pub fatal_scale: f64,
    pub eco_scale: f64,
}

impl Default for UavConstants {
    fn default() -> Self {
        UavConstants {
            area: 1000.0,
            altitude: (30.0, 120.0),
            p_crash: 2e-3,
            impact_area: 6.5,
            density: (5e-4, 1e-2),
            noise_profile: (60.0, 0.5),
            distance_unit: 10.0,
            fatal_scale: 1e6,
            eco_scale: 10.0,
        }
    }
}

/// Parameters of a planted instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub n: usize,
    pub seed: u64,
    /// Extra cost added to off-tree weights, drawn from `0..=jitter`.
    pub jitter: u64,
    /// Mission hover points.
    pub hover_points: usize,
    /// Nearest neighbours each waypoint links to (both directions).
    pub neighbours: usize,
    pub constants: UavConstants,
}

impl PlantedSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        PlantedSpec {
            n,
            seed,
            jitter: 0,
            hover_points: 3,
            neighbours: 3,
            constants: UavConstants::default(),
        }
    }

    /// Canonical `planted:` reference string.
    pub fn reference(&self) -> String {
        format!(
            "planted:n={},seed={},jitter={},hover={},knn={}",
            self.n, self.seed, self.jitter, self.hover_points, self.neighbours
        )
    }
}

/// A generated graph and the breadth-first tree planted in it.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub spec: PlantedSpec,
    pub graph: WeightedDigraph,
    /// `tree_parent[v]` for `v ≥ 2`; entries 0 and 1 are unused.
    pub tree_parent: Vec<usize>,
}

impl PlantedInstance {
    /// Hop depth of `v` in the planted tree.
    pub fn depth(&self, mut v: usize) -> usize {
        let mut d = 0;
        while v != SOURCE {
            v = self.tree_parent[v];
            d += 1;
        }
        d
    }

    /// Vertex sequence of the tree path from the source to `v`.
    pub fn tree_path(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while v != SOURCE {
            v = self.tree_parent[v];
            out.push(v);
        }
        out.reverse();
        out
    }
}

const GENERATION_ATTEMPTS: u64 = 8;

/// Builds a connected waypoint graph, weights its edges from UAV-style cost
/// models, and plants a breadth-first tree from the source: tree edges cost 1
/// in every objective, every other edge at least 2. Each tree path then
/// strictly beats every alternative route for both parties.
pub fn generate_planted(spec: &PlantedSpec) -> Result<PlantedInstance, InstanceError> {
    if spec.n < 2 {
        return Err(InstanceError::Generation(format!(
            "need at least 2 vertices, got {}",
            spec.n
        )));
    }
    if spec.neighbours == 0 || spec.hover_points == 0 {
        return Err(InstanceError::Generation(
            "neighbours and hover points must be positive".to_string(),
        ));
    }
    let mut last = String::new();
    for attempt in 0..GENERATION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        match attempt_planted(spec, &mut rng) {
            Ok(inst) => return Ok(inst),
            Err(e) => last = e,
        }
    }
    Err(InstanceError::Generation(format!(
        "gave up after {GENERATION_ATTEMPTS} attempts: {last}"
    )))
}

struct Waypoint {
    x: f64,
    y: f64,
    z: f64,
}

fn attempt_planted<R: Rng>(spec: &PlantedSpec, rng: &mut R) -> Result<PlantedInstance, String> {
    let c = &spec.constants;
    let n = spec.n;
    let points: Vec<Waypoint> = (0..=n)
        .map(|_| Waypoint {
            x: rng.random_range(0.0..c.area),
            y: rng.random_range(0.0..c.area),
            z: rng.random_range(c.altitude.0..=c.altitude.1),
        })
        .collect();
    let hovers: Vec<(f64, f64)> = (0..spec.hover_points)
        .map(|_| (rng.random_range(0.0..c.area), rng.random_range(0.0..c.area)))
        .collect();
    // Two Gaussian population hot spots over a uniform background.
    let spots: Vec<(f64, f64, f64)> = (0..2)
        .map(|_| {
            (
                rng.random_range(0.0..c.area),
                rng.random_range(0.0..c.area),
                rng.random_range(0.1 * c.area..0.4 * c.area),
            )
        })
        .collect();
    let density = |x: f64, y: f64| {
        let bump: f64 = spots
            .iter()
            .map(|&(sx, sy, w)| (-((x - sx).powi(2) + (y - sy).powi(2)) / (2.0 * w * w)).exp())
            .sum::<f64>()
            .min(1.0);
        c.density.0 + (c.density.1 - c.density.0) * bump
    };
    let planar =
        |a: usize, b: usize| ((points[a].x - points[b].x).powi(2) + (points[a].y - points[b].y).powi(2)).sqrt();

    let mut adjacent = vec![vec![false; n + 1]; n + 1];
    let link = |adjacent: &mut Vec<Vec<bool>>, a: usize, b: usize| {
        adjacent[a][b] = true;
        adjacent[b][a] = true;
    };
    for v in 1..=n {
        let mut others: Vec<usize> = (1..=n).filter(|&u| u != v).collect();
        others.sort_by(|&a, &b| planar(v, a).total_cmp(&planar(v, b)).then(a.cmp(&b)));
        for &u in others.iter().take(spec.neighbours) {
            link(&mut adjacent, v, u);
        }
    }
    // Join components to the source's by their closest pair.
    loop {
        let reach = reachable(&adjacent, n);
        if reach.iter().skip(1).all(|&r| r) {
            break;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for a in (1..=n).filter(|&a| reach[a]) {
            for b in (1..=n).filter(|&b| !reach[b]) {
                let d = planar(a, b);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("some vertex is unreachable");
        link(&mut adjacent, a, b);
    }

    // Breadth-first tree over ascending vertex ids.
    let mut parent = vec![0usize; n + 1];
    let mut seen = vec![false; n + 1];
    seen[SOURCE] = true;
    let mut queue = VecDeque::from([SOURCE]);
    while let Some(u) = queue.pop_front() {
        for v in 1..=n {
            if adjacent[u][v] && !seen[v] {
                seen[v] = true;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }

    let (median, sigma) = c.noise_profile;
    let psi = |z: f64| {
        let t = (z.ln() - median.ln()) / sigma;
        (-0.5 * t * t).exp() / (z * sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    // Fatality given impact falls with altitude-dependent shelter.
    let fatality = |z: f64| 1.0 / (1.0 + (60.0 / z).powi(2));
    let mut builder = GraphBuilder::new(n, vec![2, 2]).map_err(|e| e.to_string())?;
    for u in 1..=n {
        for v in (1..=n).filter(|&v| adjacent[u][v]) {
            let weights = if parent[v] == u {
                vec![vec![1, 1], vec![1, 1]]
            } else {
                let (a, b) = (&points[u], &points[v]);
                let length = (planar(u, v).powi(2) + (a.z - b.z).powi(2)).sqrt();
                let hover = hovers
                    .iter()
                    .map(|&(hx, hy)| ((b.x - hx).powi(2) + (b.y - hy).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                let (mx, my, mz) = ((a.x + b.x) / 2.0, (a.y + b.y) / 2.0, (a.z + b.z) / 2.0);
                let fatal = c.p_crash * c.impact_area * density(mx, my) * fatality(mz) * length / 1000.0;
                let eco = psi(mz) * length;
                let raw = [
                    length / c.distance_unit,
                    hover / c.distance_unit,
                    fatal * c.fatal_scale,
                    eco * c.eco_scale,
                ];
                let mut w: Vec<u64> = raw.iter().map(|&x| (x.ceil() as u64).max(2)).collect();
                if spec.jitter > 0 {
                    for x in &mut w {
                        *x += rng.random_range(0..=spec.jitter);
                    }
                }
                vec![w[..2].to_vec(), w[2..].to_vec()]
            };
            builder.add_edge(u, v, weights).map_err(|e| e.to_string())?;
        }
    }
    let graph = builder.build().map_err(|e| e.to_string())?;
    let inst = PlantedInstance {
        spec: *spec,
        graph,
        tree_parent: parent,
    };
    if crate::oracles::planted_tree(&inst.graph).as_deref() != Some(&inst.tree_parent[..]) {
        return Err("planted tree is not recoverable from the weights".to_string());
    }
    Ok(inst)
}

fn reachable(adjacent: &[Vec<bool>], n: usize) -> Vec<bool> {
    let mut seen = vec![false; n + 1];
    seen[SOURCE] = true;
    let mut stack = vec![SOURCE];
    while let Some(u) = stack.pop() {
        for v in 1..=n {
            if adjacent[u][v] && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Names an instance: `fixture`, `planted:n=..,seed=..[,jitter=..,hover=..,knn=..]`
/// or a path to a `bpmosp v1` file.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceRef {
    Fixture,
    Planted(PlantedSpec),
    File(PathBuf),
}

impl InstanceRef {
    pub fn load(&self) -> Result<WeightedDigraph, InstanceError> {
        match self {
            InstanceRef::Fixture => Ok(fixture_graph()),
            InstanceRef::Planted(spec) => generate_planted(spec).map(|p| p.graph),
            InstanceRef::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                parse_instance(&text)
            }
        }
    }
}

impl fmt::Display for InstanceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceRef::Fixture => f.write_str("fixture"),
            InstanceRef::Planted(spec) => f.write_str(&spec.reference()),
            InstanceRef::File(path) => write!(f, "{}", path.display()),
        }
    }
}

impl FromStr for InstanceRef {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "fixture" {
            return Ok(InstanceRef::Fixture);
        }
        let Some(args) = s.strip_prefix("planted:") else {
            if s.is_empty() {
                return Err(InstanceError::BadReference(s.to_string()));
            }
            return Ok(InstanceRef::File(PathBuf::from(s)));
        };
        let bad = || InstanceError::BadReference(s.to_string());
        let mut n = None;
        let mut spec = PlantedSpec::new(0, 0);
        for kv in args.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: u64 = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "n" => n = Some(v as usize),
                "seed" => spec.seed = v,
                "jitter" => spec.jitter = v,
                "hover" => spec.hover_points = v as usize,
                "knn" => spec.neighbours = v as usize,
                _ => return Err(bad()),
            }
        }
        spec.n = n.ok_or_else(bad)?;
        Ok(InstanceRef::Planted(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shortestpath::Path;

    fn totals(g: &WeightedDigraph, v: &[usize]) -> String {
        g.eval_path(&Path::new(v.to_vec()).unwrap()).unwrap().to_string()
    }

    #[test]
    fn fixture_reproduces_path_tables() {
        let g = fixture_graph();
        let rows: [(&[usize], &str); 5] = [
            (&[1, 2, 5], "(10,4)/(8,5)"),
            (&[1, 2, 3, 5], "(5,8)/(8,8)"),
            (&[1, 2, 3, 4, 5], "(8,7)/(6,7)"),
            (&[1, 3, 5], "(4,5)/(7,8)"),
            (&[1, 3, 4, 5], "(7,4)/(5,7)"),
        ];
        for (p, want) in rows {
            assert_eq!(totals(&g, p), want, "{p:?}");
        }
    }

    #[test]
    fn planted_tree_paths_have_unit_costs() {
        let inst = generate_planted(&PlantedSpec::new(12, 4)).unwrap();
        assert_eq!(inst.graph.n(), 12);
        for v in inst.graph.endpoints() {
            let d = inst.depth(v) as u64;
            let want = format!("({d},{d})/({d},{d})");
            assert_eq!(totals(&inst.graph, &inst.tree_path(v)), want);
        }
        for e in inst.graph.edges() {
            let on_tree = inst.tree_parent[e.to] == e.from;
            let all_one = e.weights.parties().iter().flat_map(|w| w.values()).all(|&x| x == 1);
            assert_eq!(on_tree, all_one);
        }
    }

    #[test]
    fn planted_generation_is_deterministic() {
        let spec = PlantedSpec::new(10, 7);
        assert_eq!(generate_planted(&spec).unwrap(), generate_planted(&spec).unwrap());
        let jittered = PlantedSpec { jitter: 3, ..spec };
        assert_eq!(
            generate_planted(&jittered).unwrap(),
            generate_planted(&jittered).unwrap()
        );
    }

    #[test]
    fn references_parse() {
        assert_eq!("fixture".parse::<InstanceRef>().unwrap(), InstanceRef::Fixture);
        let r: InstanceRef = "planted:n=10,seed=3".parse().unwrap();
        assert_eq!(r, InstanceRef::Planted(PlantedSpec::new(10, 3)));
        assert_eq!(r.to_string().parse::<InstanceRef>().unwrap(), r);
        assert!("planted:seed=3".parse::<InstanceRef>().is_err());
        assert!("planted:n=10,colour=2".parse::<InstanceRef>().is_err());
        assert_eq!(
            "graphs/a.txt".parse::<InstanceRef>().unwrap(),
            InstanceRef::File(PathBuf::from("graphs/a.txt"))
        );
    }
}
