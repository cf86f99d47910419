//! Grouping of surviving cells into clusters of touching cells on the torus.

use crate::dict::{torus_distance, wrap_frequency, Band, Cell, EDGE_TOL};

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn cells_touch(a: &Cell, b: &Cell) -> bool {
    a.iter().zip(b).all(|(x, y)| x.touches(y))
}

/// Connected components of the touching relation (diagonal neighbours count
/// in M-D). Groups are ordered by their smallest member.
pub fn cluster_cells(cells: &[Cell]) -> Vec<Vec<usize>> {
    let n = cells.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if cells_touch(&cells[i], &cells[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Midpoint of the arc covered by `bands`: the complement of the largest gap.
fn arc_midpoint(bands: &[Band]) -> f64 {
    let mut iv: Vec<(f64, f64)> = bands.iter().map(|b| (b.lo, b.hi)).collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in iv {
        match merged.last_mut() {
            Some(last) if lo <= last.1 + EDGE_TOL => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    // largest gap, scanning the wrap-around gap too
    let k = merged.len();
    let mut best_gap = -1.0;
    let mut arc_start = merged[0].0;
    let mut arc_end = merged[k - 1].1;
    for i in 0..k {
        let end = merged[i].1;
        let next = merged[(i + 1) % k].0;
        let gap = (next - end).rem_euclid(1.0);
        let gap = if i + 1 == k && gap <= EDGE_TOL {
            0.0
        } else {
            gap
        };
        if gap > best_gap {
            best_gap = gap;
            arc_end = end;
            arc_start = next;
        }
    }
    if best_gap <= EDGE_TOL {
        // the cluster wraps the whole circle
        return 0.5;
    }
    let len = (arc_end - arc_start).rem_euclid(1.0);
    let len = if len == 0.0 { 1.0 } else { len };
    wrap_frequency(arc_start + 0.5 * len)
}

/// Per-dimension arc midpoint of the cluster. If that point is not covered by
/// any cell of the cluster (possible for irregular M-D shapes) the centre of
/// the nearest cell is used instead.
pub fn cluster_estimate(cells: &[Cell], group: &[usize]) -> Vec<f64> {
    let dims = cells[group[0]].len();
    let mid: Vec<f64> = (0..dims)
        .map(|m| {
            let bands: Vec<Band> = group.iter().map(|&j| cells[j][m]).collect();
            arc_midpoint(&bands)
        })
        .collect();
    let covered = group
        .iter()
        .any(|&j| cells[j].iter().zip(&mid).all(|(b, &f)| b.contains(f)));
    if covered {
        return mid;
    }
    let dist = |j: usize| -> f64 {
        cells[j]
            .iter()
            .zip(&mid)
            .map(|(b, &f)| torus_distance(b.center(), f).powi(2))
            .sum()
    };
    let best = group
        .iter()
        .copied()
        .min_by(|&a, &b| dist(a).total_cmp(&dist(b)))
        .expect("non-empty cluster");
    cells[best].iter().map(Band::center).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(lo: f64, hi: f64) -> Band {
        Band::new(lo, hi).unwrap()
    }

    #[test]
    fn adjacent_bands_merge() {
        let cells = vec![vec![b(0.1, 0.2)], vec![b(0.5, 0.6)], vec![b(0.2, 0.3)]];
        assert_eq!(cluster_cells(&cells), vec![vec![0, 2], vec![1]]);
        let est = cluster_estimate(&cells, &[0, 2]);
        assert!((est[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn wrap_around_cluster() {
        let cells = vec![vec![b(0.0, 0.1)], vec![b(0.9, 1.0)]];
        let g = cluster_cells(&cells);
        assert_eq!(g.len(), 1);
        let est = cluster_estimate(&cells, &g[0]);
        assert!(torus_distance(est[0], 0.0) < 1e-12);
        let cells = vec![vec![b(0.0, 0.1)], vec![b(0.85, 1.0)]];
        let est = cluster_estimate(&cells, &[0, 1]);
        assert!(torus_distance(est[0], 0.975) < 1e-12);
    }

    #[test]
    fn single_cell_centre() {
        let cells = vec![vec![b(0.25, 0.5)]];
        assert_eq!(cluster_estimate(&cells, &[0]), vec![0.375]);
    }

    #[test]
    fn diagonal_cells_touch_in_2d() {
        let cells = vec![
            vec![b(0.1, 0.2), b(0.1, 0.2)],
            vec![b(0.2, 0.3), b(0.2, 0.3)],
            vec![b(0.2, 0.3), b(0.5, 0.6)],
        ];
        assert_eq!(cluster_cells(&cells), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn uncovered_midpoint_falls_back_to_a_cell() {
        // L-shape: the bounding-box midpoint is empty
        let cells = vec![
            vec![b(0.1, 0.2), b(0.1, 0.2)],
            vec![b(0.2, 0.3), b(0.1, 0.2)],
            vec![b(0.1, 0.2), b(0.2, 0.3)],
        ];
        let est = cluster_estimate(&cells, &[0, 1, 2]);
        assert!(cells
            .iter()
            .any(|c| c[0].contains(est[0]) && c[1].contains(est[1])));
    }
}
