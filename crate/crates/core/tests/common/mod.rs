//! Independent oracles used by the integration and acceptance tests. Nothing
//! here calls into the search or the point optimizer unless stated.
#![allow(dead_code)]

use cegrp::geometry::{Disk, Point2};
use cegrp::instance::{FleetSpec, GeneratorParams, Instance, Orientation, TaskKey, TaskKind, TaskRef};

fn d(a: Point2, b: Point2) -> f64 {
    ((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)).sqrt()
}

/// Minimum chain length over one point per disk, by dynamic programming over
/// discretized disks with iterative zoom around the incumbent.
///
/// Each level places a `grid x grid` lattice over a square window around the
/// current best point of every free disk, pulls lattice points outside the
/// disk onto its boundary, and solves the discrete chain problem exactly.
/// The window then halves. The problem is convex, so zooming cannot lose
/// the global basin.
pub fn touring_grid_oracle(disks: &[Disk], grid: usize, levels: usize) -> f64 {
    let n = disks.len();
    let mut centers: Vec<Point2> = disks.iter().map(|k| k.center).collect();
    let mut half: Vec<f64> = disks.iter().map(|k| k.radius).collect();
    let mut best = f64::INFINITY;

    for _ in 0..levels {
        let cands: Vec<Vec<Point2>> = (0..n)
            .map(|i| {
                let disk = disks[i];
                if disk.radius <= 0.0 {
                    return vec![disk.center];
                }
                let mut v = Vec::with_capacity(grid * grid);
                for gx in 0..grid {
                    for gy in 0..grid {
                        let fx = -1.0 + 2.0 * gx as f64 / (grid - 1) as f64;
                        let fy = -1.0 + 2.0 * gy as f64 / (grid - 1) as f64;
                        let q = Point2::new(centers[i].x + fx * half[i], centers[i].y + fy * half[i]);
                        let off = d(q, disk.center);
                        let q = if off > disk.radius {
                            let s = disk.radius / off;
                            Point2::new(disk.center.x + (q.x - disk.center.x) * s, disk.center.y + (q.y - disk.center.y) * s)
                        } else {
                            q
                        };
                        v.push(q);
                    }
                }
                v
            })
            .collect();

        let mut cost = vec![0.0; cands[0].len()];
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(n);
        back.push(vec![0; cands[0].len()]);
        for layer in 1..n {
            let mut next = vec![f64::INFINITY; cands[layer].len()];
            let mut arg = vec![0; cands[layer].len()];
            for (j, &q) in cands[layer].iter().enumerate() {
                for (k, &p) in cands[layer - 1].iter().enumerate() {
                    let c = cost[k] + d(p, q);
                    if c < next[j] {
                        next[j] = c;
                        arg[j] = k;
                    }
                }
            }
            cost = next;
            back.push(arg);
        }
        let (mut j, &val) = cost
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        best = best.min(val);
        for layer in (0..n).rev() {
            centers[layer] = cands[layer][j];
            j = back[layer][j];
        }
        for h in &mut half {
            *h *= 0.5;
        }
    }
    best
}

/// Every oriented ordering of `keys`: permutations times edge orientations.
pub fn all_oriented_orders(keys: &[TaskKey]) -> Vec<Vec<TaskRef>> {
    let mut perms = Vec::new();
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    permute(&mut idx, 0, &mut perms);
    let mut out = Vec::new();
    for p in perms {
        let edges: Vec<usize> = p.iter().enumerate().filter(|(_, &i)| keys[i].kind == TaskKind::Edge).map(|(pos, _)| pos).collect();
        for mask in 0..(1u32 << edges.len()) {
            let mut seq: Vec<TaskRef> = p
                .iter()
                .map(|&i| match keys[i].kind {
                    TaskKind::Node => TaskRef::Node(keys[i].id),
                    TaskKind::Edge => TaskRef::Edge(keys[i].id, Orientation::Forward),
                })
                .collect();
            for (bit, &pos) in edges.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    seq[pos] = seq[pos].flipped();
                }
            }
            out.push(seq);
        }
    }
    out
}

fn permute(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == idx.len() {
        out.push(idx.clone());
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, out);
        idx.swap(k, i);
    }
}

/// Center-evaluated length of a task sequence, computed from raw coordinates.
pub fn center_length(tasks: &[TaskRef], inst: &Instance) -> f64 {
    let mut pos = inst.depot();
    let mut total = 0.0;
    for &t in tasks {
        let (entry, exit) = match t {
            TaskRef::Node(id) => {
                let n = inst.nodes().iter().find(|n| n.id == id).unwrap();
                (n.center, n.center)
            }
            TaskRef::Edge(id, o) => {
                let e = inst.edges().iter().find(|e| e.id == id).unwrap();
                match o {
                    Orientation::Forward => (e.a, e.b),
                    Orientation::Reverse => (e.b, e.a),
                }
            }
        };
        total += d(pos, entry) + d(entry, exit);
        pos = exit;
    }
    total + d(pos, inst.depot())
}

/// Brute-force optimal center length of one route over the given task set.
pub fn brute_force_route(keys: &[TaskKey], inst: &Instance) -> f64 {
    all_oriented_orders(keys).iter().map(|s| center_length(s, inst)).fold(f64::INFINITY, f64::min)
}

pub fn unbounded_fleet(l: f64, q: u32) -> FleetSpec {
    FleetSpec { flight_range: l, node_capacity: q, max_vehicles: None }
}

/// Small mixed instance on a 1000-unit square.
pub fn tiny_params(n_nodes: usize, n_edges: usize, radius: f64) -> GeneratorParams {
    GeneratorParams { n_nodes, n_edges, area: 1000.0, radius, fleet: unbounded_fleet(3000.0, 4) }
}

/// Medium instance: 6 nodes, 15 edges on a 1000-unit square.
pub fn medium_params(radius: f64) -> GeneratorParams {
    GeneratorParams { n_nodes: 6, n_edges: 15, area: 1000.0, radius, fleet: unbounded_fleet(3000.0, 4) }
}

/// Vertex disks of a task sequence built from raw instance data: depot, one
/// disk per node, both endpoints of each edge, depot.
pub fn chain_disks(tasks: &[TaskRef], inst: &Instance) -> Vec<Disk> {
    let depot = Disk { center: inst.depot(), radius: 0.0 };
    let mut out = vec![depot];
    for &t in tasks {
        match t {
            TaskRef::Node(id) => {
                let n = inst.nodes().iter().find(|n| n.id == id).unwrap();
                out.push(Disk { center: n.center, radius: n.radius });
            }
            TaskRef::Edge(id, o) => {
                let e = inst.edges().iter().find(|e| e.id == id).unwrap();
                let (a, b) = match o {
                    Orientation::Forward => (e.a, e.b),
                    Orientation::Reverse => (e.b, e.a),
                };
                out.push(Disk { center: a, radius: 0.0 });
                out.push(Disk { center: b, radius: 0.0 });
            }
        }
    }
    out.push(depot);
    out
}

/// Exact close-enough optimum by enumerating set partitions (in reverse
/// order of the oracle under test), every oriented ordering of each block,
/// and a grid search over the touring points.
pub fn brute_force_global(inst: &Instance) -> Option<f64> {
    let mut keys = inst.task_keys();
    keys.reverse();
    let fleet = *inst.fleet();
    let mut best_block: Vec<Option<f64>> = vec![None; 1 << keys.len()];
    for mask in 1usize..(1 << keys.len()) {
        let block: Vec<TaskKey> = (0..keys.len()).filter(|i| mask & (1 << i) != 0).map(|i| keys[i]).collect();
        if block.iter().filter(|k| k.kind == TaskKind::Node).count() > fleet.node_capacity as usize {
            continue;
        }
        for seq in all_oriented_orders(&block) {
            if center_length(&seq, inst) > fleet.flight_range + 1e-9 {
                continue;
            }
            let f = touring_grid_oracle(&chain_disks(&seq, inst), 15, 30);
            best_block[mask] = Some(best_block[mask].map_or(f, |b: f64| b.min(f)));
        }
    }
    let mut best: Option<f64> = None;
    let limit = fleet.max_vehicles.map_or(usize::MAX, |m| m as usize);
    partitions((1 << keys.len()) - 1, 0, 0.0, &best_block, limit, &mut best);
    best
}

fn partitions(rest: usize, used: usize, acc: f64, blocks: &[Option<f64>], limit: usize, best: &mut Option<f64>) {
    if rest == 0 {
        *best = Some(best.map_or(acc, |b| b.min(acc)));
        return;
    }
    if used == limit {
        return;
    }
    let high = usize::BITS - 1 - rest.leading_zeros();
    let others = rest & !(1 << high);
    let mut sub = others;
    loop {
        let block = sub | (1 << high);
        if let Some(f) = blocks[block] {
            partitions(rest & !block, used + 1, acc + f, blocks, limit, best);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
}
