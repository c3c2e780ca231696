//! Convex patches and solids in `R^N` and their splitting by hyperplanes.
//!
//! A [`Patch`] is a codimension-one convex piece (a point, a segment or a
//! planar polygon) and carries jump facets. A [`Solid`] is a full-dimensional
//! convex piece (interval, polygon or polyhedron) used for volume integrals.
//! Coordinates are zero-padded to three components.

use crate::quadrature::integrate_simplex;

pub type Point = [f64; 3];

/// Classification tolerance for "on the plane".
pub const PLANE_EPS: f64 = 1e-12;

/// The hyperplane `{x : normal . x = offset}`; `normal` need not be unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub normal: Point,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Point, offset: f64) -> Self {
        Plane { normal, offset }
    }

    pub fn signed(&self, x: &Point) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    /// Zero set of the affine function `x -> slope . (x - anchor) + value`.
    pub fn zero_set(slope: Point, anchor: Point, value: f64) -> Option<Plane> {
        if norm(&slope) <= 1e-14 {
            return None;
        }
        Some(Plane { normal: slope, offset: dot(&slope, &anchor) - value })
    }
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

fn lerp(p: &Point, q: &Point, t: f64) -> Point {
    add(p, &scale(&sub(q, p), t))
}

fn mean(points: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in points {
        c = add(&c, p);
    }
    scale(&c, 1.0 / points.len() as f64)
}

/// Which side of a plane a convex set occupies.
enum Side {
    Below,
    Above,
    Both,
}

fn classify(points: &[Point], plane: &Plane) -> Side {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        let s = plane.signed(p);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if hi <= PLANE_EPS {
        Side::Below
    } else if lo >= -PLANE_EPS {
        Side::Above
    } else {
        Side::Both
    }
}

/// Sutherland–Hodgman clip of a closed vertex loop, keeping `sign * d >= 0`.
fn clip_loop(verts: &[Point], plane: &Plane, sign: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(verts.len() + 2);
    let n = verts.len();
    for i in 0..n {
        let p = &verts[i];
        let q = &verts[(i + 1) % n];
        let dp = sign * plane.signed(p);
        let dq = sign * plane.signed(q);
        if dp >= -PLANE_EPS {
            out.push(*p);
        }
        if (dp > PLANE_EPS && dq < -PLANE_EPS) || (dp < -PLANE_EPS && dq > PLANE_EPS) {
            out.push(lerp(p, q, dp / (dp - dq)));
        }
    }
    dedupe_loop(out)
}

fn dedupe_loop(mut pts: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        if out.last().map_or(true, |l| norm(&sub(l, &p)) > 1e-13) {
            out.push(p);
        }
    }
    while out.len() > 1 && norm(&sub(&out[0], out.last().unwrap())) <= 1e-13 {
        out.pop();
    }
    out
}

fn polygon_area_vector(verts: &[Point]) -> Point {
    let mut a = [0.0; 3];
    let n = verts.len();
    for i in 0..n {
        a = add(&a, &cross(&verts[i], &verts[(i + 1) % n]));
    }
    scale(&a, 0.5)
}

fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * norm(&cross(&sub(b, a), &sub(c, a)))
}

/// Orthonormal pair spanning the plane with the given normal (3-D only).
fn tangent_pair(normal: &Point) -> (Point, Point) {
    let n = scale(normal, 1.0 / norm(normal));
    let axis = (0..3)
        .min_by(|&a, &b| n[a].abs().partial_cmp(&n[b].abs()).unwrap())
        .unwrap();
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let t1 = cross(&e, &n);
    let t1 = scale(&t1, 1.0 / norm(&t1));
    let t2 = cross(&n, &t1);
    (t1, t2)
}

/// A convex codimension-one piece in `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub dim: usize,
    pub verts: Vec<Point>,
}

impl Patch {
    pub fn new(dim: usize, verts: Vec<Point>) -> Self {
        Patch { dim, verts }
    }

    /// Length, area, or 1 for a point patch in one dimension.
    pub fn measure(&self) -> f64 {
        match self.dim {
            1 => 1.0,
            2 => norm(&sub(&self.verts[1], &self.verts[0])),
            _ => norm(&polygon_area_vector(&self.verts)),
        }
    }

    /// Measure-weighted centroid.
    pub fn centroid(&self) -> Point {
        match self.dim {
            1 => self.verts[0],
            2 => lerp(&self.verts[0], &self.verts[1], 0.5),
            _ => {
                let o = self.verts[0];
                let mut c = [0.0; 3];
                let mut total = 0.0;
                for i in 1..self.verts.len() - 1 {
                    let (a, b) = (&self.verts[i], &self.verts[i + 1]);
                    let w = triangle_area(&o, a, b);
                    c = add(&c, &scale(&add(&add(&o, a), b), w / 3.0));
                    total += w;
                }
                if total > 0.0 {
                    scale(&c, 1.0 / total)
                } else {
                    mean(&self.verts)
                }
            }
        }
    }

    fn is_degenerate(&self) -> bool {
        match self.dim {
            1 => self.verts.len() != 1,
            2 => self.verts.len() != 2 || self.measure() <= 1e-13,
            _ => self.verts.len() < 3 || self.measure() <= 1e-24,
        }
    }

    /// Split by a plane into the parts with `signed <= 0` and `signed >= 0`.
    pub fn split(&self, plane: &Plane) -> (Option<Patch>, Option<Patch>) {
        match classify(&self.verts, plane) {
            Side::Below => return (Some(self.clone()), None),
            Side::Above => return (None, Some(self.clone())),
            Side::Both => {}
        }
        let piece = |sign: f64| -> Option<Patch> {
            let verts = match self.dim {
                1 => unreachable!("a point cannot straddle a plane"),
                2 => {
                    let (p, q) = (&self.verts[0], &self.verts[1]);
                    let (dp, dq) = (plane.signed(p), plane.signed(q));
                    let x = lerp(p, q, dp / (dp - dq));
                    if sign * dp > 0.0 { vec![*p, x] } else { vec![x, *q] }
                }
                _ => clip_loop(&self.verts, plane, sign),
            };
            let p = Patch::new(self.dim, verts);
            (!p.is_degenerate()).then_some(p)
        };
        (piece(-1.0), piece(1.0))
    }

    /// Split by every plane in turn; pieces never straddle any of them.
    pub fn split_all(&self, planes: &[Plane]) -> Vec<Patch> {
        let mut pieces = vec![self.clone()];
        for plane in planes {
            let mut next = Vec::with_capacity(pieces.len() + 1);
            for p in pieces {
                let (a, b) = p.split(plane);
                next.extend(a);
                next.extend(b);
            }
            pieces = next;
        }
        pieces
    }

    /// `(vertices, measure)` of a simplicial decomposition.
    pub fn simplices(&self) -> Vec<(Vec<Point>, f64)> {
        match self.dim {
            1 => vec![(vec![self.verts[0]], 1.0)],
            2 => vec![(self.verts.clone(), self.measure())],
            _ => {
                let o = self.verts[0];
                (1..self.verts.len() - 1)
                    .map(|i| {
                        let (a, b) = (self.verts[i], self.verts[i + 1]);
                        (vec![o, a, b], triangle_area(&o, &a, &b))
                    })
                    .collect()
            }
        }
    }

    /// Integral of `f`, after splitting along the given kink planes.
    pub fn integrate(&self, kinks: &[Plane], f: impl Fn(Point) -> f64) -> f64 {
        self.split_all(kinks)
            .iter()
            .flat_map(|p| p.simplices())
            .map(|(v, m)| integrate_simplex(&v, m, &f))
            .sum()
    }

    /// The intersection of the hyperplane with a convex solid, if it has
    /// positive measure.
    pub fn plane_section(plane: &Plane, solid: &Solid) -> Option<Patch> {
        let dim = solid.dim();
        let nn = norm(&plane.normal);
        let p0 = scale(&plane.normal, plane.offset / (nn * nn));
        let reach = 4.0 * (norm(&p0) + solid.diameter() + 1.0);
        let start = match dim {
            1 => vec![p0],
            2 => {
                let t = [-plane.normal[1] / nn, plane.normal[0] / nn, 0.0];
                vec![add(&p0, &scale(&t, -reach)), add(&p0, &scale(&t, reach))]
            }
            _ => {
                let (t1, t2) = tangent_pair(&plane.normal);
                let c = |a: f64, b: f64| add(&p0, &add(&scale(&t1, a * reach), &scale(&t2, b * reach)));
                vec![c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)]
            }
        };
        let mut patch = Patch::new(dim, start);
        for (h, sign) in solid.halfspaces() {
            let (below, above) = patch.split(&h);
            patch = if sign > 0.0 { above? } else { below? };
        }
        // the section must cut through the interior, not graze a face
        match classify(&solid.vertices(), plane) {
            Side::Both => Some(patch),
            _ => None,
        }
    }
}

/// A convex full-dimensional piece in `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub enum Solid {
    Interval(f64, f64),
    /// Vertex loop in the `z = 0` plane.
    Polygon(Vec<Point>),
    /// Faces as vertex loops.
    Polyhedron(Vec<Vec<Point>>),
}

impl Solid {
    pub fn dim(&self) -> usize {
        match self {
            Solid::Interval(..) => 1,
            Solid::Polygon(_) => 2,
            Solid::Polyhedron(_) => 3,
        }
    }

    /// Box `[lo, hi]` in local coordinates, mapped to global ones by the
    /// rotation `frame` (row-major, `x = frame * y`).
    pub fn from_box(dim: usize, lo: &[f64], hi: &[f64], frame: &[[f64; 3]; 3]) -> Solid {
        let map = |y: [f64; 3]| -> Point {
            let mut x = [0.0; 3];
            for i in 0..dim {
                for j in 0..dim {
                    x[i] += frame[i][j] * y[j];
                }
            }
            x
        };
        match dim {
            1 => {
                let (a, b) = (map([lo[0], 0.0, 0.0])[0], map([hi[0], 0.0, 0.0])[0]);
                Solid::Interval(a.min(b), a.max(b))
            }
            2 => Solid::Polygon(vec![
                map([lo[0], lo[1], 0.0]),
                map([hi[0], lo[1], 0.0]),
                map([hi[0], hi[1], 0.0]),
                map([lo[0], hi[1], 0.0]),
            ]),
            _ => {
                let corner = |i: usize, j: usize, k: usize| {
                    map([[lo[0], hi[0]][i], [lo[1], hi[1]][j], [lo[2], hi[2]][k]])
                };
                let faces = vec![
                    vec![corner(0, 0, 0), corner(0, 1, 0), corner(0, 1, 1), corner(0, 0, 1)],
                    vec![corner(1, 0, 0), corner(1, 0, 1), corner(1, 1, 1), corner(1, 1, 0)],
                    vec![corner(0, 0, 0), corner(0, 0, 1), corner(1, 0, 1), corner(1, 0, 0)],
                    vec![corner(0, 1, 0), corner(1, 1, 0), corner(1, 1, 1), corner(0, 1, 1)],
                    vec![corner(0, 0, 0), corner(1, 0, 0), corner(1, 1, 0), corner(0, 1, 0)],
                    vec![corner(0, 0, 1), corner(0, 1, 1), corner(1, 1, 1), corner(1, 0, 1)],
                ];
                Solid::Polyhedron(faces)
            }
        }
    }

    pub fn vertices(&self) -> Vec<Point> {
        match self {
            Solid::Interval(a, b) => vec![[*a, 0.0, 0.0], [*b, 0.0, 0.0]],
            Solid::Polygon(v) => v.clone(),
            Solid::Polyhedron(faces) => {
                let mut out: Vec<Point> = Vec::new();
                for p in faces.iter().flatten() {
                    if !out.iter().any(|q| norm(&sub(p, q)) <= 1e-13) {
                        out.push(*p);
                    }
                }
                out
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut d: f64 = 0.0;
        for a in &v {
            for b in &v {
                d = d.max(norm(&sub(a, b)));
            }
        }
        d
    }

    /// Supporting halfspaces as `(plane, sign)`, interior at `sign * d >= 0`.
    /// Only valid for solids produced by [`Solid::from_box`] or clipping.
    pub fn halfspaces(&self) -> Vec<(Plane, f64)> {
        let c = mean(&self.vertices());
        let oriented = |normal: Point, on: &Point| {
            let plane = Plane::new(normal, dot(&normal, on));
            let sign = if plane.signed(&c) >= 0.0 { 1.0 } else { -1.0 };
            (plane, sign)
        };
        match self {
            Solid::Interval(a, b) => {
                vec![(Plane::new([1.0, 0.0, 0.0], *a), 1.0), (Plane::new([1.0, 0.0, 0.0], *b), -1.0)]
            }
            Solid::Polygon(v) => (0..v.len())
                .map(|i| {
                    let e = sub(&v[(i + 1) % v.len()], &v[i]);
                    oriented([-e[1], e[0], 0.0], &v[i])
                })
                .collect(),
            Solid::Polyhedron(faces) => faces
                .iter()
                .map(|f| oriented(polygon_area_vector(f), &f[0]))
                .collect(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Solid::Interval(a, b) => b - a,
            Solid::Polygon(v) => norm(&polygon_area_vector(v)),
            Solid::Polyhedron(_) => self.simplices().iter().map(|(_, m)| m).sum(),
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            Solid::Interval(a, b) => [0.5 * (a + b), 0.0, 0.0],
            Solid::Polygon(v) => Patch::new(3, v.clone()).centroid(),
            Solid::Polyhedron(_) => {
                let mut c = [0.0; 3];
                let mut total = 0.0;
                for (v, m) in self.simplices() {
                    c = add(&c, &scale(&mean(&v), m));
                    total += m;
                }
                scale(&c, 1.0 / total)
            }
        }
    }

    fn is_degenerate(&self) -> bool {
        match self {
            Solid::Interval(a, b) => b - a <= 1e-13,
            Solid::Polygon(v) => v.len() < 3 || self.volume() <= 1e-24,
            Solid::Polyhedron(f) => f.len() < 4 || self.volume() <= 1e-30,
        }
    }

    pub fn split(&self, plane: &Plane) -> (Option<Solid>, Option<Solid>) {
        match classify(&self.vertices(), plane) {
            Side::Below => return (Some(self.clone()), None),
            Side::Above => return (None, Some(self.clone())),
            Side::Both => {}
        }
        let piece = |sign: f64| -> Option<Solid> {
            let s = match self {
                Solid::Interval(a, b) => {
                    let t = plane.offset / plane.normal[0];
                    let below_left = plane.normal[0] > 0.0;
                    if (sign < 0.0) == below_left { Solid::Interval(*a, t) } else { Solid::Interval(t, *b) }
                }
                Solid::Polygon(v) => Solid::Polygon(clip_loop(v, plane, sign)),
                Solid::Polyhedron(faces) => {
                    let mut kept: Vec<Vec<Point>> = Vec::with_capacity(faces.len() + 1);
                    let mut cap: Vec<Point> = Vec::new();
                    for f in faces {
                        let c = clip_loop(f, plane, sign);
                        for p in &c {
                            if plane.signed(p).abs() <= PLANE_EPS
                                && !cap.iter().any(|q| norm(&sub(p, q)) <= 1e-13)
                            {
                                cap.push(*p);
                            }
                        }
                        if c.len() >= 3 {
                            kept.push(c);
                        }
                    }
                    if cap.len() >= 3 {
                        let centre = mean(&cap);
                        let (t1, t2) = tangent_pair(&plane.normal);
                        cap.sort_by(|p, q| {
                            let (dp, dq) = (sub(p, &centre), sub(q, &centre));
                            let ap = dot(&dp, &t2).atan2(dot(&dp, &t1));
                            let aq = dot(&dq, &t2).atan2(dot(&dq, &t1));
                            ap.partial_cmp(&aq).unwrap()
                        });
                        kept.push(cap);
                    }
                    Solid::Polyhedron(kept)
                }
            };
            (!s.is_degenerate()).then_some(s)
        };
        (piece(-1.0), piece(1.0))
    }

    pub fn split_all(&self, planes: &[Plane]) -> Vec<Solid> {
        let mut pieces = vec![self.clone()];
        for plane in planes {
            let mut next = Vec::with_capacity(pieces.len() + 1);
            for p in pieces {
                let (a, b) = p.split(plane);
                next.extend(a);
                next.extend(b);
            }
            pieces = next;
        }
        pieces
    }

    pub fn simplices(&self) -> Vec<(Vec<Point>, f64)> {
        match self {
            Solid::Interval(a, b) => vec![(vec![[*a, 0.0, 0.0], [*b, 0.0, 0.0]], b - a)],
            Solid::Polygon(v) => Patch::new(3, v.clone()).simplices(),
            Solid::Polyhedron(faces) => {
                let c = mean(&self.vertices());
                let mut out = Vec::new();
                for f in faces {
                    for i in 1..f.len() - 1 {
                        let (a, b, d) = (f[0], f[i], f[i + 1]);
                        let vol = dot(&sub(&a, &c), &cross(&sub(&b, &c), &sub(&d, &c))).abs() / 6.0;
                        out.push((vec![c, a, b, d], vol));
                    }
                }
                out
            }
        }
    }

    pub fn integrate(&self, kinks: &[Plane], f: impl Fn(Point) -> f64) -> f64 {
        self.split_all(kinks)
            .iter()
            .flat_map(|p| p.simplices())
            .map(|(v, m)| integrate_simplex(&v, m, &f))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ID: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    #[test]
    fn unit_cube_volume_and_split() {
        let cube = Solid::from_box(3, &[0.0; 3], &[1.0; 3], &ID);
        assert!((cube.volume() - 1.0).abs() < 1e-14);
        let plane = Plane::new([1.0, 1.0, 1.0], 1.0);
        let (lo, hi) = cube.split(&plane);
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        assert!((lo.volume() - 1.0 / 6.0).abs() < 1e-14);
        assert!((hi.volume() - 5.0 / 6.0).abs() < 1e-14);
        let c = lo.centroid();
        assert!((c[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn plane_section_of_square_and_cube() {
        let sq = Solid::from_box(2, &[-0.5, -0.5], &[0.5, 0.5], &ID);
        let s = Patch::plane_section(&Plane::new([0.6, 0.8, 0.0], 0.0), &sq).unwrap();
        // the line through the centre with normal (0.6, 0.8) has length 1/0.8
        assert!((s.measure() - 1.25).abs() < 1e-13);
        // a plane on the boundary is not a section
        assert!(Patch::plane_section(&Plane::new([1.0, 0.0, 0.0], 0.5), &sq).is_none());

        let cube = Solid::from_box(3, &[-0.5; 3], &[0.5; 3], &ID);
        let s = Patch::plane_section(&Plane::new([0.0, 0.0, 1.0], 0.1), &cube).unwrap();
        assert!((s.measure() - 1.0).abs() < 1e-13);
        let n = 1.0 / 3f64.sqrt();
        let s = Patch::plane_section(&Plane::new([n, n, n], 0.0), &cube).unwrap();
        // regular hexagon with side 1/sqrt(2)
        let side = 1.0 / 2f64.sqrt();
        assert!((s.measure() - 1.5 * 3f64.sqrt() * side * side).abs() < 1e-12);
    }

    #[test]
    fn integrate_abs_linear_exactly() {
        let sq = Solid::from_box(2, &[0.0, 0.0], &[1.0, 1.0], &ID);
        // int |x + y - 1| over the unit square = 1/3
        let kink = Plane::new([1.0, 1.0, 0.0], 1.0);
        let v = sq.integrate(&[kink], |x| (x[0] + x[1] - 1.0).abs());
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        let seg = Patch::new(2, vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let v = seg.integrate(&[Plane::new([1.0, 0.0, 0.0], 0.5)], |x| (x[0] - 0.5).abs());
        assert!((v - (0.125 + 1.125)).abs() < 1e-14);
    }

    #[test]
    fn repeated_splits_conserve_measure() {
        let cube = Solid::from_box(3, &[-0.5; 3], &[0.5; 3], &ID);
        let planes: Vec<Plane> = (0..7)
            .map(|k| Plane::new([0.3, -0.5, 0.81], -0.6 + 0.2 * k as f64))
            .chain((0..5).map(|k| Plane::new([0.9, 0.1, -0.2], -0.4 + 0.2 * k as f64)))
            .collect();
        let pieces = cube.split_all(&planes);
        let total: f64 = pieces.iter().map(Solid::volume).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        let face = Patch::new(3, vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]);
        let pieces = face.split_all(&planes);
        let total: f64 = pieces.iter().map(Patch::measure).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_split() {
        let s = Solid::Interval(0.0, 1.0);
        let (a, b) = s.split(&Plane::new([-1.0, 0.0, 0.0], -0.25));
        // -x <= -0.25  <=>  x >= 0.25
        assert_eq!(a.unwrap(), Solid::Interval(0.25, 1.0));
        assert_eq!(b.unwrap(), Solid::Interval(0.0, 0.25));
    }
}
