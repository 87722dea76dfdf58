//! Reference implementations used as oracles by the integration tests.
//! They work on raw lattice coordinates and share no code with the crate's
//! router.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use mosaic::mask::Mask;
use mosaic::topology::{GridConfig, NtIndex};

pub type Site = (usize, usize);

pub fn is_nt(s: Site) -> bool {
    s.0 % 2 == 0 && s.1 % 2 == 0
}

pub fn is_rt1(s: Site) -> bool {
    s.0 % 2 == 1 && s.1 % 2 == 1
}

pub fn site(nt: NtIndex) -> Site {
    (2 * nt.col, 2 * nt.row)
}

fn size(config: &GridConfig) -> (usize, usize) {
    (2 * config.nt_cols - 1, 2 * config.nt_rows - 1)
}

fn neighbours(s: Site, config: &GridConfig) -> Vec<Site> {
    let (w, h) = size(config);
    let mut out = Vec::new();
    if s.0 > 0 {
        out.push((s.0 - 1, s.1));
    }
    if s.0 + 1 < w {
        out.push((s.0 + 1, s.1));
    }
    if s.1 > 0 {
        out.push((s.0, s.1 - 1));
    }
    if s.1 + 1 < h {
        out.push((s.0, s.1 + 1));
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Leg {
    Injected,
    X,
    Y,
}

/// Fewest router tiles on a legal path: leave the source through any
/// router, move along x, turn at most once (at an RT1) to move along y,
/// and enter the destination from an adjacent router. Neuron tiles other
/// than the endpoints cannot be crossed.
pub fn bfs_distance(src: NtIndex, dst: NtIndex, config: &GridConfig) -> Option<usize> {
    if src == dst {
        return Some(0);
    }
    let (s, d) = (site(src), site(dst));
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for r in neighbours(s, config) {
        queue.push_back((r, Leg::Injected, 1));
    }
    while let Some((t, leg, len)) = queue.pop_front() {
        if !seen.insert((t, leg)) {
            continue;
        }
        if neighbours(t, config).contains(&d) {
            return Some(len);
        }
        for n in neighbours(t, config) {
            if is_nt(n) {
                continue;
            }
            let horizontal = n.1 == t.1;
            let next = match (leg, horizontal) {
                (Leg::Injected | Leg::X, true) => Leg::X,
                (Leg::Injected | Leg::Y, false) => Leg::Y,
                (Leg::X, false) if is_rt1(t) => Leg::Y,
                _ => continue,
            };
            queue.push_back((n, next, len + 1));
        }
    }
    None
}

/// Checks a full path (source NT, routers, destination NT) against the
/// one-turn rule. Returns the reason on failure.
pub fn check_path(path: &[Site], config: &GridConfig) -> Result<(), String> {
    let (w, h) = size(config);
    if path.len() < 2 {
        return Err("path shorter than its endpoints".into());
    }
    if path.iter().any(|&(x, y)| x >= w || y >= h) {
        return Err("leaves the lattice".into());
    }
    for pair in path.windows(2) {
        if pair[0].0.abs_diff(pair[1].0) + pair[0].1.abs_diff(pair[1].1) != 1 {
            return Err(format!("{:?} -> {:?} is not a single step", pair[0], pair[1]));
        }
    }
    let routers = &path[1..path.len() - 1];
    if let Some(nt) = routers.iter().find(|&&s| is_nt(s)) {
        return Err(format!("crosses neuron tile {nt:?}"));
    }
    let mut turned = false;
    for (i, pair) in routers.windows(2).enumerate() {
        let vertical = pair[0].0 == pair[1].0;
        if vertical && !turned {
            let after_x = i > 0 && routers[i - 1].1 == routers[i].1;
            if after_x && !is_rt1(pair[0]) {
                return Err(format!("turns at {:?}, which is not an RT1", pair[0]));
            }
            turned = true;
        } else if !vertical && turned {
            return Err("moves along x after moving along y".into());
        }
    }
    Ok(())
}

/// The single-destination route under the router's conventions: use the
/// router row below the source when the destination is below (or, for a
/// same-row destination, when there is a row below), run along it to the
/// RT1 column next to the destination on the source side (the column east
/// of the source when both share a column, west on the last column), then
/// run along that column to the destination's row.
pub fn oracle_path(src: NtIndex, dst: NtIndex, config: &GridConfig) -> Option<Vec<Site>> {
    let (a, b, c, d) = (src.col, src.row, dst.col, dst.row);
    let (sx, sy) = (2 * a, 2 * b);
    let (m, n) = (a.abs_diff(c), b.abs_diff(d));
    if (m, n) == (0, 0) {
        return Some(Vec::new());
    }
    if (m, n) == (1, 0) {
        return Some(vec![(if c > a { sx + 1 } else { sx - 1 }, sy)]);
    }
    if (m, n) == (0, 1) {
        return Some(vec![(sx, if d > b { sy + 1 } else { sy - 1 })]);
    }
    let down = if n == 0 {
        if config.nt_rows < 2 {
            return None;
        }
        b + 1 < config.nt_rows
    } else {
        d > b
    };
    let row = if down { sy + 1 } else { sy - 1 };
    let turn_x = if n == 0 {
        2 * c
    } else if c > a {
        2 * c - 1
    } else if c < a {
        2 * c + 1
    } else if config.nt_cols < 2 {
        return None;
    } else if a + 1 < config.nt_cols {
        sx + 1
    } else {
        sx - 1
    };
    let mut path = vec![(sx, row)];
    let mut x = sx;
    while x != turn_x {
        x = if turn_x > x { x + 1 } else { x - 1 };
        path.push((x, row));
    }
    if n > 0 {
        let mut y = row;
        while y != 2 * d {
            y = if 2 * d > y { y + 1 } else { y - 1 };
            path.push((turn_x, y));
        }
    }
    Some(path)
}

pub fn tile_of(neuron: usize, config: &GridConfig) -> NtIndex {
    let t = neuron / config.neurons_per_tile;
    NtIndex::new(t / config.nt_cols, t % config.nt_cols)
}

/// Per-axon recount: router loads and remote fan-in rows per neuron tile.
pub struct Recount {
    pub rt: BTreeMap<Site, usize>,
    pub remote: BTreeMap<Site, usize>,
}

pub fn recount(mask: &Mask, config: &GridConfig) -> Recount {
    let mut rt = BTreeMap::new();
    let mut remote = BTreeMap::new();
    for pre in 0..mask.rows() {
        let src = tile_of(pre, config);
        let dests: BTreeSet<NtIndex> =
            (0..mask.cols()).filter(|&post| mask.get(pre, post)).map(|post| tile_of(post, config)).collect();
        let mut tiles = BTreeSet::new();
        for &d in dests.iter().filter(|&&d| d != src) {
            *remote.entry(site(d)).or_insert(0) += 1;
            tiles.extend(oracle_path(src, d, config).expect("routable pair"));
        }
        for t in tiles {
            *rt.entry(t).or_insert(0) += 1;
        }
    }
    Recount { rt, remote }
}

/// Hop distance of every pair of tiles, from the BFS oracle.
pub fn all_pairs(config: &GridConfig) -> Vec<(NtIndex, NtIndex, Option<usize>)> {
    let tiles: Vec<NtIndex> =
        (0..config.nt_rows).flat_map(|r| (0..config.nt_cols).map(move |c| NtIndex::new(r, c))).collect();
    let mut out = Vec::new();
    for &s in &tiles {
        for &d in &tiles {
            out.push((s, d, bfs_distance(s, d, config)));
        }
    }
    out
}

pub fn grids_up_to_4x4() -> Vec<(usize, usize)> {
    (1..=4).flat_map(|r| (1..=4).map(move |c| (r, c))).collect()
}
