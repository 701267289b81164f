//! Planar polygon helpers used by mesh construction and the regularity report.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Mass center of a simple polygon.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let a = signed_area(poly);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let c = cross(p, q);
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

pub fn perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| dist(poly[i], poly[(i + 1) % n])).sum()
}

/// Largest distance between two vertices (the diameter of a convex polygon).
pub fn diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            d = d.max(dist(poly[i], poly[j]));
        }
    }
    d
}

/// Strict convexity for a counter-clockwise polygon: every turn is a left turn.
pub fn is_strictly_convex(poly: &[Point]) -> bool {
    let n = poly.len();
    let scale = perimeter(poly).powi(2);
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        cross(sub(b, a), sub(c, b)) > 1e-14 * scale
    })
}

/// Radius of the largest disc inscribed in a convex counter-clockwise polygon.
///
/// Solves the three-variable linear program `max r` subject to
/// `n_i . (x - p_i) >= r` for every edge with inward unit normal `n_i`. The
/// optimum sits on a vertex of the feasible set where three constraints are
/// active, so every triple is enumerated.
pub fn inradius(poly: &[Point]) -> f64 {
    let n = poly.len();
    let edges: Vec<(Point, f64)> = (0..n)
        .filter_map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let t = sub(b, a);
            let len = t[0].hypot(t[1]);
            if len == 0.0 {
                return None;
            }
            let nrm = [-t[1] / len, t[0] / len];
            Some((nrm, dot(nrm, a)))
        })
        .collect();
    let m = edges.len();
    let tol = 1e-12 * diameter(poly).max(f64::MIN_POSITIVE);
    let mut best: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                // rows: n . x - r = c
                let rows = [edges[i], edges[j], edges[k]];
                let mat = nalgebra::Matrix3::new(
                    rows[0].0[0], rows[0].0[1], -1.0,
                    rows[1].0[0], rows[1].0[1], -1.0,
                    rows[2].0[0], rows[2].0[1], -1.0,
                );
                let rhs = nalgebra::Vector3::new(rows[0].1, rows[1].1, rows[2].1);
                let Some(sol) = mat.lu().solve(&rhs) else { continue };
                let (x, r) = ([sol[0], sol[1]], sol[2]);
                if !r.is_finite() || r <= best {
                    continue;
                }
                if edges.iter().all(|(nrm, c)| dot(*nrm, x) - c >= r - tol) {
                    best = r;
                }
            }
        }
    }
    best
}
