/// Nested dissection driven by node coordinates.
///
/// The node set is split at the median of its longer bounding-box axis; the
/// nodes of the lower half adjacent to the upper half form the separator,
/// which is numbered after both halves. Returns the elimination order.
pub fn geometric_nested_dissection(coords: &[[f64; 2]], adjacency: &[Vec<usize>], leaf_size: usize) -> Vec<usize> {
    let n = coords.len();
    assert_eq!(adjacency.len(), n);
    let mut order = Vec::with_capacity(n);
    // side[v]: 0 unassigned, 1 left, 2 right, during one split
    let mut side = vec![0u8; n];
    enum Frame {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Frame::Split((0..n).collect())];
    while let Some(frame) = stack.pop() {
        let mut nodes = match frame {
            Frame::Emit(sep) => {
                order.extend(sep);
                continue;
            }
            Frame::Split(nodes) => nodes,
        };
        if nodes.len() <= leaf_size.max(1) {
            order.extend(nodes);
            continue;
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for &v in &nodes {
            for a in 0..2 {
                lo[a] = lo[a].min(coords[v][a]);
                hi[a] = hi[a].max(coords[v][a]);
            }
        }
        let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
        let mid = nodes.len() / 2;
        nodes.select_nth_unstable_by(mid, |&a, &b| {
            coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b))
        });
        let (left, right) = nodes.split_at(mid);
        for &v in left {
            side[v] = 1;
        }
        for &v in right {
            side[v] = 2;
        }
        let mut sep = Vec::new();
        let mut left_rest = Vec::with_capacity(left.len());
        for &v in left {
            if adjacency[v].iter().any(|&w| side[w] == 2) {
                sep.push(v);
            } else {
                left_rest.push(v);
            }
        }
        let right = right.to_vec();
        for &v in &nodes {
            side[v] = 0;
        }
        if left_rest.is_empty() || right.is_empty() {
            // no progress possible; fall back to the given order
            order.extend(left_rest);
            order.extend(right);
            order.extend(sep);
            continue;
        }
        stack.push(Frame::Emit(sep));
        stack.push(Frame::Split(right));
        stack.push(Frame::Split(left_rest));
    }
    order
}
