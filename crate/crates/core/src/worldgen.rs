//! Seeded synthetic indoor worlds: a grid of square rooms, one node per room,
//! doors between grid-adjacent rooms, and annotated objects scattered inside.
//!
//! Everything here is a pure function of its inputs. The same [`WorldSpec`]
//! (seed included) always yields the same graph and ground truth.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, weighted::WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::error::{GraphError, WorldError};
use crate::graph::{euclidean, Datagraph, GraphBuilder, NodeId, Pose, SceneObject, Snapshot};
use crate::paths::{geodesic_table, hop_table, shortest_path, Metric};
use crate::query::{Predicate, Query, QueryMode};

const PLACEMENT_ATTEMPTS: usize = 32;
const MAX_ROOMS: u64 = 1 << 20;
/// Duplicated objects end up within this distance of the shared wall.
pub const BOUNDARY_BAND_M: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeRule {
    Fixed { key: String, value: String },
    /// Uniform pick per instance.
    Choice { key: String, values: Vec<String> },
    /// Distinct numbers drawn without replacement from `1..=10·count`.
    UniqueNumber { key: String },
    /// Copies the numbers of another label's instances (shuffled, without
    /// replacement); surplus instances get fresh unused numbers.
    PairedNumber { key: String, with_label: String },
}

impl AttributeRule {
    fn key(&self) -> &str {
        match self {
            AttributeRule::Fixed { key, .. }
            | AttributeRule::Choice { key, .. }
            | AttributeRule::UniqueNumber { key }
            | AttributeRule::PairedNumber { key, .. } => key,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    #[serde(default)]
    pub attributes: Vec<AttributeRule>,
    pub weight: f64,
}

impl CatalogEntry {
    pub fn new(label: &str, weight: f64) -> Self {
        CatalogEntry {
            label: label.to_string(),
            attributes: Vec::new(),
            weight,
        }
    }

    pub fn with_rule(mut self, rule: AttributeRule) -> Self {
        self.attributes.push(rule);
        self
    }
}

fn default_duplicate_offset() -> f64 {
    0.3
}

fn default_min_separation() -> f64 {
    1.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub grid_w: u32,
    pub grid_h: u32,
    pub room_size_m: f64,
    /// Chance that a wall outside the forced spanning tree still gets a door.
    pub door_prob: f64,
    pub catalog: Vec<CatalogEntry>,
    pub objects_per_room_mean: f64,
    pub boundary_duplicate_prob: f64,
    /// Horizontal displacement of a duplicate relative to its original.
    #[serde(default = "default_duplicate_offset")]
    pub duplicate_offset_m: f64,
    /// Minimum distance between any two placed (non-duplicate) objects.
    #[serde(default = "default_min_separation")]
    pub min_separation_m: f64,
    pub seed: u64,
}

impl WorldSpec {
    pub fn new(grid_w: u32, grid_h: u32, seed: u64) -> Self {
        WorldSpec {
            grid_w,
            grid_h,
            room_size_m: 4.0,
            door_prob: 0.3,
            catalog: default_catalog(),
            objects_per_room_mean: 2.5,
            boundary_duplicate_prob: 0.0,
            duplicate_offset_m: default_duplicate_offset(),
            min_separation_m: default_min_separation(),
            seed,
        }
    }

    pub fn room_count(&self) -> u64 {
        u64::from(self.grid_w) * u64::from(self.grid_h)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |msg: String| Err(WorldError::InvalidSpec(msg));
        if self.grid_w == 0 || self.grid_h == 0 {
            return bad(format!("grid {}x{} has no rooms", self.grid_w, self.grid_h));
        }
        if self.room_count() > MAX_ROOMS {
            return bad(format!("grid has {} rooms, limit is {MAX_ROOMS}", self.room_count()));
        }
        if !(self.room_size_m.is_finite() && self.room_size_m > 0.0) {
            return bad(format!("room_size_m must be positive, got {}", self.room_size_m));
        }
        for (name, p) in [
            ("door_prob", self.door_prob),
            ("boundary_duplicate_prob", self.boundary_duplicate_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.objects_per_room_mean.is_finite() && self.objects_per_room_mean >= 0.0) {
            return bad(format!("objects_per_room_mean must be >= 0, got {}", self.objects_per_room_mean));
        }
        if !(0.0..BOUNDARY_BAND_M).contains(&self.duplicate_offset_m) {
            return bad(format!("duplicate_offset_m must lie in [0, {BOUNDARY_BAND_M}), got {}", self.duplicate_offset_m));
        }
        if !(self.min_separation_m.is_finite() && self.min_separation_m >= 0.0) {
            return bad(format!("min_separation_m must be >= 0, got {}", self.min_separation_m));
        }
        let mut labels = BTreeSet::new();
        for entry in &self.catalog {
            if entry.label.is_empty() || entry.label != entry.label.to_lowercase() {
                return bad(format!("catalog label {:?} must be non-empty lowercase", entry.label));
            }
            if !labels.insert(entry.label.as_str()) {
                return bad(format!("catalog label {:?} appears twice", entry.label));
            }
            if !(entry.weight.is_finite() && entry.weight >= 0.0) {
                return bad(format!("weight of {:?} must be >= 0", entry.label));
            }
            for rule in &entry.attributes {
                if let AttributeRule::Choice { values, .. } = rule {
                    if values.is_empty() {
                        return bad(format!("choice rule {:?} of {:?} has no values", rule.key(), entry.label));
                    }
                }
            }
        }
        for entry in &self.catalog {
            for rule in &entry.attributes {
                if let AttributeRule::PairedNumber { with_label, .. } = rule {
                    if !labels.contains(with_label.as_str()) {
                        return bad(format!("{:?} pairs with unknown label {with_label:?}", entry.label));
                    }
                }
            }
        }
        if self.objects_per_room_mean > 0.0 && !self.catalog.iter().any(|c| c.weight > 0.0) {
            return bad("objects requested but every catalog weight is zero".to_string());
        }
        Ok(())
    }
}

/// Doors with numbers, keyfobs paired to them, and a few common and hazardous items.
pub fn default_catalog() -> Vec<CatalogEntry> {
    let number = || String::from("number");
    let hazard = || AttributeRule::Fixed {
        key: "hazard".into(),
        value: "true".into(),
    };
    vec![
        CatalogEntry::new("door", 1.0).with_rule(AttributeRule::UniqueNumber { key: number() }),
        CatalogEntry::new("keyfob", 0.8).with_rule(AttributeRule::PairedNumber {
            key: number(),
            with_label: "door".into(),
        }),
        CatalogEntry::new("extinguisher", 1.0),
        CatalogEntry::new("chair", 1.5).with_rule(AttributeRule::Choice {
            key: "color".into(),
            values: vec!["red".into(), "blue".into(), "gray".into()],
        }),
        CatalogEntry::new("toolbox", 0.6),
        CatalogEntry::new("gas_canister", 0.3).with_rule(hazard()),
        CatalogEntry::new("debris", 0.2).with_rule(hazard()),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub instance_id: i64,
    pub label: String,
    pub attributes: BTreeMap<String, String>,
    pub world_position: [f64; 3],
    pub home_node: NodeId,
    /// Set on the copy written into a neighboring room's snapshot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub instances: Vec<Instance>,
}

impl GroundTruth {
    pub fn originals(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(|i| i.duplicate_of.is_none())
    }

    pub fn duplicates(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(|i| i.duplicate_of.is_some())
    }

    pub fn true_count(&self, predicate: &Predicate) -> u64 {
        self.originals()
            .filter(|i| predicate.matches_parts(&i.label, &i.attributes))
            .count() as u64
    }

    /// Every node whose snapshot holds a matching object, duplicates included.
    pub fn nodes_matching(&self, predicate: &Predicate) -> BTreeSet<NodeId> {
        self.instances
            .iter()
            .filter(|i| predicate.matches_parts(&i.label, &i.attributes))
            .map(|i| i.home_node)
            .collect()
    }
}

struct DisjointSet(Vec<u32>);

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet((0..n as u32).collect())
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.0[i as usize] != i {
            let p = self.0[i as usize];
            self.0[i as usize] = self.0[p as usize];
            i = p;
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb) as usize] = ra.min(rb);
        true
    }
}

struct Placed {
    catalog_index: usize,
    home: u32,
    position: [f64; 3],
    attributes: BTreeMap<String, String>,
}

/// Builds the world graph and its ground truth from `spec`.
pub fn generate_world(spec: &WorldSpec) -> Result<(Datagraph, GroundTruth), WorldError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.grid_w, spec.grid_h);
    let n = (w * h) as usize;
    let size = spec.room_size_m;

    // Doors: a random spanning tree keeps every room reachable, then each
    // remaining wall opens with door_prob.
    let mut walls = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let id = y * w + x;
            if x + 1 < w {
                walls.push((id, id + 1));
            }
            if y + 1 < h {
                walls.push((id, id + w));
            }
        }
    }
    walls.shuffle(&mut rng);
    let mut components = DisjointSet::new(n);
    let mut doors = Vec::new();
    for (a, b) in walls {
        if components.union(a, b) || rng.random_bool(spec.door_prob) {
            doors.push((a, b));
        }
    }
    doors.sort_unstable();
    let door_set: BTreeSet<(u32, u32)> = doors.iter().copied().collect();

    let mut placed = place_objects(spec, &mut rng, n)?;
    assign_attributes(spec, &mut rng, &mut placed);

    let mut instances: Vec<Instance> = placed
        .into_iter()
        .enumerate()
        .map(|(i, p)| Instance {
            instance_id: i as i64,
            label: spec.catalog[p.catalog_index].label.clone(),
            attributes: p.attributes,
            world_position: p.position,
            home_node: NodeId(p.home),
            duplicate_of: None,
        })
        .collect();

    if spec.boundary_duplicate_prob > 0.0 {
        let band = BOUNDARY_BAND_M - spec.duplicate_offset_m;
        let originals = instances.len();
        for i in 0..originals {
            let inst = &instances[i];
            let room = inst.home_node.0;
            let (rx, ry) = (room % w, room / w);
            let (x0, y0) = (f64::from(rx) * size, f64::from(ry) * size);
            let [px, py, _] = inst.world_position;
            let mut eligible = Vec::new();
            if rx > 0 && px - x0 <= band {
                eligible.push(room - 1);
            }
            if rx + 1 < w && x0 + size - px <= band {
                eligible.push(room + 1);
            }
            if ry > 0 && py - y0 <= band {
                eligible.push(room - w);
            }
            if ry + 1 < h && y0 + size - py <= band {
                eligible.push(room + w);
            }
            eligible.retain(|&other| door_set.contains(&(room.min(other), room.max(other))));
            if eligible.is_empty() || !rng.random_bool(spec.boundary_duplicate_prob) {
                continue;
            }
            let neighbor = eligible[rng.random_range(0..eligible.len())];
            let angle = rng.random::<f64>() * core::f64::consts::TAU;
            let offset = spec.duplicate_offset_m;
            let copy = Instance {
                instance_id: instances.len() as i64,
                label: inst.label.clone(),
                attributes: inst.attributes.clone(),
                world_position: [
                    px + offset * libm::cos(angle),
                    py + offset * libm::sin(angle),
                    inst.world_position[2],
                ],
                home_node: NodeId(neighbor),
                duplicate_of: Some(inst.instance_id),
            };
            instances.push(copy);
        }
    }

    let mut snapshots: Vec<Vec<SceneObject>> = vec![Vec::new(); n];
    for inst in &instances {
        snapshots[inst.home_node.index()].push(SceneObject {
            label: inst.label.clone(),
            attributes: inst.attributes.clone(),
            world_position: inst.world_position,
            instance_id: inst.instance_id,
        });
    }

    let mut builder = GraphBuilder::new();
    for (id, objects) in snapshots.into_iter().enumerate() {
        let (x, y) = (id as u32 % w, id as u32 / w);
        let pose = Pose::at((f64::from(x) + 0.5) * size, (f64::from(y) + 0.5) * size, 0.0);
        let snapshot = Snapshot {
            objects,
            payload_ref: Some(format!("synthetic://room/{x}/{y}")),
        };
        builder.add_node(pose, snapshot)?;
    }
    for (a, b) in doors {
        builder.add_edge(NodeId(a), NodeId(b), true, None)?;
    }
    Ok((builder.seal(), GroundTruth { instances }))
}

fn place_objects(spec: &WorldSpec, rng: &mut ChaCha8Rng, rooms: usize) -> Result<Vec<Placed>, WorldError> {
    if spec.objects_per_room_mean == 0.0 || spec.catalog.is_empty() {
        return Ok(Vec::new());
    }
    let counts = Poisson::new(spec.objects_per_room_mean)
        .map_err(|e| WorldError::InvalidSpec(format!("objects_per_room_mean: {e}")))?;
    let pick = WeightedIndex::new(spec.catalog.iter().map(|c| c.weight))
        .map_err(|e| WorldError::InvalidSpec(format!("catalog weights: {e}")))?;
    let size = spec.room_size_m;
    let min_sep = spec.min_separation_m;
    let mut placed: Vec<Placed> = Vec::new();
    for room in 0..rooms as u32 {
        let x0 = f64::from(room % spec.grid_w) * size;
        let y0 = f64::from(room / spec.grid_w) * size;
        let k = counts.sample(rng) as u64;
        for _ in 0..k {
            let catalog_index = pick.sample(rng);
            // Crowded rooms may reject an object; it is then left out.
            for _ in 0..PLACEMENT_ATTEMPTS {
                let position = [x0 + rng.random::<f64>() * size, y0 + rng.random::<f64>() * size, 0.0];
                if placed.iter().all(|p| euclidean(&p.position, &position) >= min_sep) {
                    placed.push(Placed {
                        catalog_index,
                        home: room,
                        position,
                        attributes: BTreeMap::new(),
                    });
                    break;
                }
            }
        }
    }
    Ok(placed)
}

fn assign_attributes(spec: &WorldSpec, rng: &mut ChaCha8Rng, placed: &mut [Placed]) {
    let members = |idx: usize, placed: &[Placed]| -> Vec<usize> {
        placed
            .iter()
            .enumerate()
            .filter(|(_, p)| p.catalog_index == idx)
            .map(|(i, _)| i)
            .collect()
    };

    for (ci, entry) in spec.catalog.iter().enumerate() {
        let own = members(ci, placed);
        for rule in &entry.attributes {
            match rule {
                AttributeRule::Fixed { key, value } => {
                    for &i in &own {
                        placed[i].attributes.insert(key.clone(), value.clone());
                    }
                }
                AttributeRule::Choice { key, values } => {
                    for &i in &own {
                        let v = values[rng.random_range(0..values.len())].clone();
                        placed[i].attributes.insert(key.clone(), v);
                    }
                }
                AttributeRule::UniqueNumber { key } => {
                    let k = own.len();
                    let numbers = index::sample(rng, 10 * k.max(1), k);
                    for (&i, number) in own.iter().zip(numbers.iter()) {
                        placed[i].attributes.insert(key.clone(), (number + 1).to_string());
                    }
                }
                AttributeRule::PairedNumber { .. } => {}
            }
        }
    }

    // Paired rules read the numbers produced above.
    for (ci, entry) in spec.catalog.iter().enumerate() {
        for rule in &entry.attributes {
            let AttributeRule::PairedNumber { key, with_label } = rule else {
                continue;
            };
            let own = members(ci, placed);
            let source_idx = spec.catalog.iter().position(|c| &c.label == with_label);
            let mut pool: Vec<String> = source_idx
                .map(|si| {
                    members(si, placed)
                        .into_iter()
                        .filter_map(|i| placed[i].attributes.get(key).cloned())
                        .collect()
                })
                .unwrap_or_default();
            pool.shuffle(rng);
            let mut used: BTreeSet<String> = pool.iter().cloned().collect();
            let range = 10 * (own.len() + pool.len()).max(1);
            for (j, &i) in own.iter().enumerate() {
                let value = match pool.get(j) {
                    Some(v) => v.clone(),
                    None => loop {
                        let candidate = (rng.random_range(0..range) + 1).to_string();
                        if used.insert(candidate.clone()) {
                            break candidate;
                        }
                    },
                };
                placed[i].attributes.insert(key.clone(), value);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    NearestSearch,
    RouteHazard,
    KeyfobMatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub agent_node: NodeId,
    pub query: Query,
    /// Hop distance from the agent to the nearest matching node.
    pub expected_min_hops: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<Vec<NodeId>>,
    /// The instance the task is built around, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_instance: Option<i64>,
}

/// Nearest node holding a matching object, with ties going to the smallest id.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestHit {
    pub node: NodeId,
    pub hops: u32,
    pub meters: f64,
}

impl NearestHit {
    pub fn distance(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Hops => f64::from(self.hops),
            Metric::Meters => self.meters,
        }
    }
}

/// Exhaustive ground-truth answer to "which matching node is closest to the
/// agent". Reads only the ground truth and graph distances.
pub fn ground_truth_nearest(
    graph: &Datagraph,
    truth: &GroundTruth,
    agent: NodeId,
    predicate: &Predicate,
    metric: Metric,
) -> Result<Option<NearestHit>, GraphError> {
    let hops = hop_table(graph, agent, false)?;
    let meters = geodesic_table(graph, agent, false)?;
    let mut best: Option<NearestHit> = None;
    for node in truth.nodes_matching(predicate) {
        let (Some(&Some(h)), Some(&Some(m))) = (hops.get(node.index()), meters.get(node.index())) else {
            continue;
        };
        let hit = NearestHit { node, hops: h, meters: m };
        // nodes_matching is ascending, so strict improvement keeps the smallest id on ties
        let better = match best {
            None => true,
            Some(b) => hit.distance(metric) < b.distance(metric),
        };
        if better {
            best = Some(hit);
        }
    }
    Ok(best)
}

pub fn hazard_predicate() -> Predicate {
    Predicate::attribute("hazard", "true")
}

pub fn hazard_query() -> Query {
    Query::new(
        "Is there anything in this area that makes passing through it unsafe?",
        hazard_predicate(),
        QueryMode::AssessHazard,
    )
}

fn expected_hops(graph: &Datagraph, truth: &GroundTruth, agent: NodeId, predicate: &Predicate) -> Result<Option<u32>, WorldError> {
    Ok(ground_truth_nearest(graph, truth, agent, predicate, Metric::Hops)?.map(|h| h.hops))
}

/// Picks a label present in the world and an agent node, independently and uniformly.
pub fn make_nearest_task(graph: &Datagraph, truth: &GroundTruth, seed: u64) -> Result<TaskSpec, WorldError> {
    let labels: BTreeSet<&str> = truth.originals().map(|i| i.label.as_str()).collect();
    if labels.is_empty() || graph.is_empty() {
        return Err(WorldError::TaskUnavailable("world contains no objects"));
    }
    let labels: Vec<&str> = labels.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = labels[rng.random_range(0..labels.len())];
    let agent = NodeId(rng.random_range(0..graph.node_count() as u32));
    let predicate = Predicate::label(label);
    let expected_min_hops = expected_hops(graph, truth, agent, &predicate)?;
    Ok(TaskSpec {
        kind: TaskKind::NearestSearch,
        agent_node: agent,
        query: Query::find(format!("Where is the nearest {label}?"), predicate),
        expected_min_hops,
        route: None,
        target_instance: None,
    })
}

/// The agent stands at a numbered door and must find the keyfob carrying
/// the same number.
pub fn make_keyfob_task(graph: &Datagraph, truth: &GroundTruth, seed: u64) -> Result<TaskSpec, WorldError> {
    let number_of = |i: &Instance| i.attributes.get("number").cloned();
    let doors: Vec<&Instance> = truth
        .originals()
        .filter(|i| i.label == "door" && i.attributes.contains_key("number"))
        .collect();
    let keyfobs: Vec<&Instance> = truth
        .originals()
        .filter(|i| i.label == "keyfob" && i.attributes.contains_key("number"))
        .collect();
    if doors.is_empty() {
        return Err(WorldError::TaskUnavailable("world contains no numbered door"));
    }
    if keyfobs.is_empty() {
        return Err(WorldError::TaskUnavailable("world contains no numbered keyfob"));
    }
    // Only doors opened by exactly one keyfob make an unambiguous task.
    let candidates: Vec<(&Instance, &Instance)> = doors
        .iter()
        .filter_map(|d| {
            let n = number_of(d);
            let mut fobs = keyfobs.iter().filter(|k| number_of(k) == n);
            match (fobs.next(), fobs.next()) {
                (Some(k), None) => Some((*d, *k)),
                _ => None,
            }
        })
        .collect();
    if candidates.is_empty() {
        return Err(WorldError::TaskUnavailable("no door has exactly one matching keyfob"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (door, fob) = candidates[rng.random_range(0..candidates.len())];
    let number = number_of(door).unwrap_or_default();
    let predicate = Predicate::label("keyfob").and_attribute("number", number.clone());
    let expected_min_hops = expected_hops(graph, truth, door.home_node, &predicate)?;
    Ok(TaskSpec {
        kind: TaskKind::KeyfobMatch,
        agent_node: door.home_node,
        query: Query::find(
            format!("Locked door number {number}: where is the keyfob with number {number}?"),
            predicate,
        ),
        expected_min_hops,
        route: None,
        target_instance: Some(fob.instance_id),
    })
}

/// Random start and goal; the route is the hop-shortest path between them.
pub fn make_route_task(graph: &Datagraph, truth: &GroundTruth, seed: u64) -> Result<TaskSpec, WorldError> {
    if graph.is_empty() {
        return Err(WorldError::TaskUnavailable("world has no rooms"));
    }
    let n = graph.node_count() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NodeId(rng.random_range(0..n));
    let goal = if n > 1 {
        let g = rng.random_range(0..n - 1);
        NodeId(if g >= start.0 { g + 1 } else { g })
    } else {
        start
    };
    let route = shortest_path(graph, start, goal, Metric::Hops, false)?
        .ok_or(WorldError::TaskUnavailable("goal is unreachable from start"))?;
    let expected_min_hops = expected_hops(graph, truth, start, &hazard_predicate())?;
    Ok(TaskSpec {
        kind: TaskKind::RouteHazard,
        agent_node: start,
        query: hazard_query(),
        expected_min_hops,
        route: Some(route),
        target_instance: None,
    })
}

pub fn make_task(kind: TaskKind, graph: &Datagraph, truth: &GroundTruth, seed: u64) -> Result<TaskSpec, WorldError> {
    match kind {
        TaskKind::NearestSearch => make_nearest_task(graph, truth, seed),
        TaskKind::RouteHazard => make_route_task(graph, truth, seed),
        TaskKind::KeyfobMatch => make_keyfob_task(graph, truth, seed),
    }
}
