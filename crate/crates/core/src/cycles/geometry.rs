//! Predicates on closed polylines: orientation, winding, intersection.
//!
//! A polyline is a list of vertices with an implied closing edge from the
//! last vertex back to the first.

pub type Point = (f64, f64);

/// Shoelace signed area; positive for counter-clockwise traversal.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

/// Axis-aligned bounding box `(xmin, xmax, ymin, ymax)`.
pub fn bounding_box(poly: &[Point]) -> (f64, f64, f64, f64) {
    poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |(a, b, c, d), &(x, y)| {
        (a.min(x), b.max(x), c.min(y), d.max(y))
    })
}

#[inline]
fn is_left(a: Point, b: Point, p: Point) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1)
}

/// Winding number of the closed polyline around `p`.
pub fn winding_number(poly: &[Point], p: Point) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.1 <= p.1 {
            if b.1 > p.1 && is_left(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && is_left(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    (p.0 - qx).hypot(p.1 - qy)
}

/// Euclidean distance from `p` to the closed polyline.
pub fn distance_to_polyline(poly: &[Point], p: Point) -> f64 {
    let n = poly.len();
    (0..n).map(|i| segment_distance(poly[i], poly[(i + 1) % n], p)).fold(f64::INFINITY, f64::min)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    is_left(a, b, c)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Closed-segment intersection test.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Uniform grid of segment ids, for near-linear intersection queries.
struct SegmentGrid {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl SegmentGrid {
    fn new(segs: &[(Point, Point)], bbox: (f64, f64, f64, f64)) -> Self {
        let (xmin, xmax, ymin, ymax) = bbox;
        let n = segs.len().max(1);
        let w = (xmax - xmin).max(1e-300);
        let h = (ymax - ymin).max(1e-300);
        let cells = (n as f64).sqrt().ceil().max(1.0);
        let cell = (w.max(h) / cells).max(1e-300);
        let nx = ((w / cell).ceil() as usize).clamp(1, 4096);
        let ny = ((h / cell).ceil() as usize).clamp(1, 4096);
        let mut g = SegmentGrid { x0: xmin, y0: ymin, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for (k, s) in segs.iter().enumerate() {
            for c in g.cells_of(s) {
                g.buckets[c].push(k);
            }
        }
        g
    }

    fn cells_of(&self, s: &(Point, Point)) -> Vec<usize> {
        let ix = |x: f64| (((x - self.x0) / self.cell).floor().max(0.0) as usize).min(self.nx - 1);
        let iy = |y: f64| (((y - self.y0) / self.cell).floor().max(0.0) as usize).min(self.ny - 1);
        let (a, b) = s;
        let (i0, i1) = (ix(a.0.min(b.0)), ix(a.0.max(b.0)));
        let (j0, j1) = (iy(a.1.min(b.1)), iy(a.1.max(b.1)));
        let mut out = Vec::with_capacity((i1 - i0 + 1) * (j1 - j0 + 1));
        for i in i0..=i1 {
            for j in j0..=j1 {
                out.push(j * self.nx + i);
            }
        }
        out
    }
}

fn edges(poly: &[Point]) -> Vec<(Point, Point)> {
    let n = poly.len();
    (0..n).map(|i| (poly[i], poly[(i + 1) % n])).collect()
}

fn merge_bbox(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> (f64, f64, f64, f64) {
    (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3))
}

/// True if any edge of `a` meets any edge of `b`.
pub fn polylines_intersect(a: &[Point], b: &[Point]) -> bool {
    let ba = bounding_box(a);
    let bb = bounding_box(b);
    if ba.1 < bb.0 || bb.1 < ba.0 || ba.3 < bb.2 || bb.3 < ba.2 {
        return false;
    }
    let ea = edges(a);
    let eb = edges(b);
    let grid = SegmentGrid::new(&ea, merge_bbox(ba, bb));
    let mut seen = vec![usize::MAX; ea.len()];
    for (kb, sb) in eb.iter().enumerate() {
        for c in grid.cells_of(sb) {
            for &ka in &grid.buckets[c] {
                if seen[ka] == kb {
                    continue;
                }
                seen[ka] = kb;
                if segments_intersect(ea[ka].0, ea[ka].1, sb.0, sb.1) {
                    return true;
                }
            }
        }
    }
    false
}

/// True if no two non-adjacent edges of the closed polyline meet.
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let e = edges(poly);
    let grid = SegmentGrid::new(&e, bounding_box(poly));
    for bucket in &grid.buckets {
        for (u, &i) in bucket.iter().enumerate() {
            for &j in &bucket[u + 1..] {
                let adjacent = i.abs_diff(j) == 1 || i.abs_diff(j) == n - 1;
                if !adjacent && segments_intersect(e[i].0, e[i].1, e[j].0, e[j].1) {
                    return false;
                }
            }
        }
    }
    true
}

/// Sign-change test of `alpha + beta x + gamma y` along the closed polyline.
///
/// A vertex lying exactly on the line counts as an intersection.
pub fn polyline_meets_line(poly: &[Point], alpha: f64, beta: f64, gamma: f64) -> bool {
    let val = |p: &Point| alpha + beta * p.0 + gamma * p.1;
    let n = poly.len();
    (0..n).any(|i| {
        let a = val(&poly[i]);
        let b = val(&poly[(i + 1) % n]);
        a == 0.0 || a.signum() != b.signum()
    })
}

#[cfg(test)]
pub(crate) fn circle(cx: f64, cy: f64, r: f64, n: usize, ccw: bool) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let th = if ccw { th } else { -th };
            (cx + r * th.cos(), cy + r * th.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_and_orientation() {
        let c = circle(0.0, 0.0, 1.0, 2000, true);
        assert!((signed_area(&c) - std::f64::consts::PI).abs() < 1e-5);
        let cw = circle(0.0, 0.0, 1.0, 2000, false);
        assert!(signed_area(&cw) < 0.0);
    }

    #[test]
    fn winding() {
        let c = circle(0.0, 0.0, 1.0, 100, true);
        assert_eq!(winding_number(&c, (0.0, 0.0)), 1);
        assert_eq!(winding_number(&c, (2.0, 0.0)), 0);
        let cw = circle(0.0, 0.0, 1.0, 100, false);
        assert_eq!(winding_number(&cw, (0.1, -0.2)), -1);
    }

    #[test]
    fn intersections() {
        let a = circle(0.0, 0.0, 1.0, 500, true);
        let b = circle(0.0, 0.0, 0.5, 500, true);
        let c = circle(1.5, 0.0, 1.0, 500, true);
        let d = circle(5.0, 0.0, 1.0, 500, true);
        assert!(!polylines_intersect(&a, &b));
        assert!(polylines_intersect(&a, &c));
        assert!(!polylines_intersect(&a, &d));
        assert!(is_simple(&a));
        let bowtie = vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)];
        assert!(!is_simple(&bowtie));
    }

    #[test]
    fn line_meeting() {
        let a = circle(0.0, 0.0, 1.0, 500, true);
        assert!(polyline_meets_line(&a, 0.0, 1.0, 0.0));
        assert!(!polyline_meets_line(&a, -2.0, 1.0, 0.0));
    }
}
