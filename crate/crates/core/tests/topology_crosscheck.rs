//! Rebuilds each hardware graph by testing every pair of qubits against a
//! coordinate predicate and compares with the constructive generators.

use std::collections::BTreeSet;

use posiform::topology::{chimera_graph, pegasus, zephyr, EdgeSet};

fn edges(e: &EdgeSet) -> BTreeSet<(usize, usize)> {
    e.edges().collect()
}

fn by_predicate(n: usize, coupled: impl Fn(usize, usize) -> bool) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            if coupled(a, b) {
                out.insert((a, b));
            }
        }
    }
    out
}

#[test]
fn chimera_matches_cell_predicate() {
    for (rows, cols, t) in [(1, 1, 4), (2, 2, 4), (3, 5, 4), (4, 4, 4), (2, 3, 2)] {
        let decode = |x: usize| (x / t / 2 / cols, x / t / 2 % cols, x / t % 2, x % t);
        let want = by_predicate(rows * cols * 2 * t, |a, b| {
            let (i0, j0, u0, k0) = decode(a);
            let (i1, j1, u1, k1) = decode(b);
            let same_cell = i0 == i1 && j0 == j1;
            (same_cell && u0 != u1)
                || (u0 == 0 && u1 == 0 && j0 == j1 && k0 == k1 && i0.abs_diff(i1) == 1)
                || (u0 == 1 && u1 == 1 && i0 == i1 && k0 == k1 && j0.abs_diff(j1) == 1)
        });
        assert_eq!(edges(&chimera_graph(rows, cols, t).unwrap()), want, "C({rows},{cols},{t})");
    }
}

const OFF: [[i64; 12]; 2] = [
    [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6],
    [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10],
];

/// A Pegasus qubit drawn as a unit-width segment on a 12m x 12m grid: a
/// track position across its orientation and a half-open span of length 12
/// along it.
#[derive(Clone, Copy)]
struct Segment {
    u: usize,
    track: i64,
    start: i64,
    w: usize,
    k: usize,
    z: usize,
}

fn pegasus_segments(m: usize) -> Vec<Segment> {
    let m1 = m - 1;
    (0..24 * m * m1)
        .map(|x| {
            let z = x % m1;
            let k = x / m1 % 12;
            let w = x / m1 / 12 % m;
            let u = x / m1 / 12 / m;
            Segment {
                u,
                track: 12 * w as i64 + k as i64,
                start: 12 * z as i64 + OFF[u][k],
                w,
                k,
                z,
            }
        })
        .collect()
}

fn crosses(v: &Segment, h: &Segment) -> bool {
    (h.start..h.start + 12).contains(&v.track) && (v.start..v.start + 12).contains(&h.track)
}

fn pegasus_coupled(a: &Segment, b: &Segment) -> bool {
    if a.u != b.u {
        let (v, h) = if a.u == 0 { (a, b) } else { (b, a) };
        return crosses(v, h);
    }
    let collinear_neighbours = a.track == b.track && a.start.abs_diff(b.start) == 12;
    let odd_pair = a.w == b.w && a.z == b.z && a.k / 2 == b.k / 2 && a.k != b.k;
    collinear_neighbours || odd_pair
}

#[test]
fn pegasus_matches_segment_geometry() {
    for m in [2, 3, 4, 6, 16] {
        let segs = pegasus_segments(m);
        // the main fabric: qubits that cross at least one perpendicular qubit
        let fabric: Vec<usize> = (0..segs.len())
            .filter(|&a| segs.iter().any(|b| b.u != segs[a].u && {
                let (v, h) = if segs[a].u == 0 { (&segs[a], b) } else { (b, &segs[a]) };
                crosses(v, h)
            }))
            .collect();
        let mut want = BTreeSet::new();
        for (ia, &a) in fabric.iter().enumerate() {
            for (ib, &b) in fabric.iter().enumerate().skip(ia + 1) {
                if pegasus_coupled(&segs[a], &segs[b]) {
                    want.insert((ia, ib));
                }
            }
        }
        let got = pegasus(m).unwrap();
        assert_eq!(got.num_vars(), fabric.len(), "P{m} nodes");
        assert_eq!(edges(&got), want, "P{m} edges");
        assert!(got.max_degree() <= 15);
        assert!(got.is_connected());
    }
}

#[test]
fn pegasus_reference_sizes() {
    for (m, nodes, couplers) in [(6, 680, 4484), (16, 5640, 40484)] {
        let e = pegasus(m).unwrap();
        assert_eq!((e.num_vars(), e.num_edges()), (nodes, couplers));
    }
}

#[test]
fn zephyr_matches_coordinate_predicate() {
    for (m, t) in [(1, 1), (1, 4), (2, 2), (2, 4), (3, 4), (4, 4)] {
        let big_m = 2 * m + 1;
        let decode = |x: usize| {
            let z = x % m;
            let j = x / m % 2;
            let k = x / m / 2 % t;
            let w = x / m / 2 / t % big_m;
            let u = x / m / 2 / t / big_m;
            (u, w as i64, k, j as i64, z as i64)
        };
        let want = by_predicate(4 * t * m * big_m, |a, b| {
            let (u0, w0, k0, j0, z0) = decode(a);
            let (u1, w1, k1, j1, z1) = decode(b);
            if u0 != u1 {
                let ((w0, j0, z0), (w1, j1, z1)) = if u0 == 0 {
                    ((w0, j0, z0), (w1, j1, z1))
                } else {
                    ((w1, j1, z1), (w0, j0, z0))
                };
                return [0, 2 * j1 - 1].contains(&(w0 - 2 * z1 - 1))
                    && [0, 2 * j0 - 1].contains(&(w1 - 2 * z0 - 1));
            }
            if w0 != w1 || k0 != k1 {
                return false;
            }
            if j0 == j1 {
                return z0.abs_diff(z1) == 1;
            }
            let (z_even, z_odd) = if j0 == 0 { (z0, z1) } else { (z1, z0) };
            z_even - z_odd == 0 || z_even - z_odd == 1
        });
        let got = zephyr(m, t).unwrap();
        assert_eq!(edges(&got), want, "Z({m},{t})");
        assert!(got.is_connected());
        if t == 4 && m >= 3 {
            assert_eq!(got.max_degree(), 20);
        }
    }
}

#[test]
fn zephyr_reference_size() {
    let e = zephyr(4, 4).unwrap();
    assert_eq!((e.num_vars(), e.num_edges()), (576, 5032));
}
