//! Grid searches: flood fill, shortest paths and snake respawn placement.

use std::collections::VecDeque;

use super::types::{Direction, GridPosition};

/// Tiles reachable from `start` moving orthogonally through tiles for which
/// `passable` holds. `start` itself is always included. Indexed row-major.
pub fn flood_fill(map_size: u32, start: GridPosition, passable: impl Fn(GridPosition) -> bool) -> Vec<bool> {
    let mut seen = vec![false; (map_size * map_size) as usize];
    let mut queue = VecDeque::new();
    seen[start.index(map_size)] = true;
    queue.push_back(start);
    while let Some(pos) = queue.pop_front() {
        for dir in Direction::ORDER {
            if let Some(next) = pos.step(dir, map_size) {
                let idx = next.index(map_size);
                if !seen[idx] && passable(next) {
                    seen[idx] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}

/// First move of a breadth-first shortest path from `start` to `goal`.
/// Neighbours are expanded in [`Direction::ORDER`], so ties resolve the same way every time.
pub fn first_step_towards(
    map_size: u32,
    start: GridPosition,
    goal: GridPosition,
    passable: impl Fn(GridPosition) -> bool,
) -> Option<(Direction, u32)> {
    if start == goal {
        return None;
    }
    let tiles = (map_size * map_size) as usize;
    let mut first: Vec<Option<(Direction, u32)>> = vec![None; tiles];
    let mut seen = vec![false; tiles];
    let mut queue = VecDeque::new();
    seen[start.index(map_size)] = true;
    queue.push_back(start);
    while let Some(pos) = queue.pop_front() {
        for dir in Direction::ORDER {
            let Some(next) = pos.step(dir, map_size) else { continue };
            let idx = next.index(map_size);
            if seen[idx] || !(next == goal || passable(next)) {
                continue;
            }
            seen[idx] = true;
            let (initial, dist) = match first[pos.index(map_size)] {
                Some((d, n)) => (d, n + 1),
                None => (dir, 1),
            };
            first[idx] = Some((initial, dist));
            if next == goal {
                return first[idx];
            }
            queue.push_back(next);
        }
    }
    None
}

const RESPAWN_SEARCH_BUDGET: usize = 4_000;

/// Lays out a snake of `len` tiles as close to the centre as possible.
///
/// Heads are tried by distance from the centre, then row-major. The body is
/// grown from the head by depth-first search preferring Left, Up, Down, Right,
/// so on an open map the snake lies horizontally to the left of its head. A
/// layout is accepted when the head has a free tile in front of it and
/// `accept` approves the body.
pub fn respawn_layout(
    map_size: u32,
    len: usize,
    blocked: impl Fn(GridPosition) -> bool,
    accept: impl Fn(&[GridPosition]) -> bool,
) -> Option<(Vec<GridPosition>, Direction)> {
    let centre = GridPosition::new(map_size / 2, map_size / 2);
    let mut heads: Vec<GridPosition> = (0..map_size)
        .flat_map(|y| (0..map_size).map(move |x| GridPosition::new(x, y)))
        .filter(|p| !blocked(*p))
        .collect();
    heads.sort_by_key(|p| (p.manhattan(centre), p.y, p.x));

    for head in heads {
        let mut body = vec![head];
        let mut budget = RESPAWN_SEARCH_BUDGET;
        if !grow_body(map_size, len, &blocked, &mut body, &mut budget) {
            continue;
        }
        let heading = [Direction::Right, Direction::Up, Direction::Down, Direction::Left]
            .into_iter()
            .find(|dir| match head.step(*dir, map_size) {
                Some(next) => !blocked(next) && !body.contains(&next),
                None => false,
            });
        let Some(heading) = heading else { continue };
        if accept(&body) {
            return Some((body, heading));
        }
    }
    None
}

fn grow_body(
    map_size: u32,
    len: usize,
    blocked: &impl Fn(GridPosition) -> bool,
    body: &mut Vec<GridPosition>,
    budget: &mut usize,
) -> bool {
    if body.len() == len {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let tail = *body.last().expect("body starts with a head");
    for dir in [Direction::Left, Direction::Up, Direction::Down, Direction::Right] {
        let Some(next) = tail.step(dir, map_size) else { continue };
        if blocked(next) || body.contains(&next) {
            continue;
        }
        body.push(next);
        if grow_body(map_size, len, blocked, body, budget) {
            return true;
        }
        body.pop();
    }
    false
}
