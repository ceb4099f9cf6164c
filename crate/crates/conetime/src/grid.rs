//! Planar convex shapes and the uniform lattices laid over them.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Points closer than this (relative to the shape size) count as on the boundary.
const INSIDE_EPS: f64 = 1e-12;

/// A bounded convex planar shape containing the origin in its interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// Vertices in counter-clockwise order.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Shape {
    pub fn unit_disk() -> Self {
        Shape::Disk { radius: 1.0 }
    }

    /// Axis-aligned rectangle `[x0,x1] x [y0,y1]`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Shape::Polygon { vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]] }
    }

    /// Checks the shape is well formed and normalises polygon orientation.
    pub fn validated(self) -> Result<Self> {
        match self {
            Shape::Disk { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidShape(format!("disk radius {radius}")));
                }
                Ok(self)
            }
            Shape::Ellipse { a, b } => {
                if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
                    return Err(Error::InvalidShape(format!("ellipse axes {a}, {b}")));
                }
                Ok(self)
            }
            Shape::Polygon { mut vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidShape("polygon needs at least 3 vertices".into()));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidShape("non-finite polygon vertex".into()));
                }
                let area2: f64 = (0..vertices.len())
                    .map(|i| {
                        let p = vertices[i];
                        let q = vertices[(i + 1) % vertices.len()];
                        p[0] * q[1] - p[1] * q[0]
                    })
                    .sum();
                if area2 < 0.0 {
                    vertices.reverse();
                }
                let m = vertices.len();
                for i in 0..m {
                    let p = Vec2::from(vertices[i]);
                    let q = Vec2::from(vertices[(i + 1) % m]);
                    let r = Vec2::from(vertices[(i + 2) % m]);
                    let cross = (q - p).perp(&(r - q));
                    if cross < -1e-12 {
                        return Err(Error::InvalidShape("polygon is not convex".into()));
                    }
                    // origin strictly inside: every edge line has the origin on its left
                    if p.perp(&q) <= 0.0 {
                        return Err(Error::InvalidShape(
                            "polygon does not contain the origin in its interior".into(),
                        ));
                    }
                }
                Ok(Shape::Polygon { vertices })
            }
        }
    }

    /// Edge lines `n.x = 1` of a polygon (origin strictly inside so the offset can be normalised).
    fn edge_normals(vertices: &[[f64; 2]]) -> Vec<Vec2> {
        let m = vertices.len();
        (0..m)
            .map(|i| {
                let p = Vec2::from(vertices[i]);
                let q = Vec2::from(vertices[(i + 1) % m]);
                let e = q - p;
                let n = Vec2::new(e.y, -e.x);
                n / n.dot(&p)
            })
            .collect()
    }

    /// Minkowski gauge: `< 1` inside, `= 1` on the boundary.
    pub fn gauge(&self, p: &Vec2) -> f64 {
        match self {
            Shape::Disk { radius } => p.norm() / radius,
            Shape::Ellipse { a, b } => ((p.x / a).powi(2) + (p.y / b).powi(2)).sqrt(),
            Shape::Polygon { vertices } => Self::edge_normals(vertices)
                .iter()
                .map(|n| n.dot(p))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, p: &Vec2) -> bool {
        self.gauge(p) < 1.0 - INSIDE_EPS
    }

    /// Support function `sup_{x in shape} x.d`.
    pub fn support(&self, d: &Vec2) -> f64 {
        match self {
            Shape::Disk { radius } => radius * d.norm(),
            Shape::Ellipse { a, b } => ((a * d.x).powi(2) + (b * d.y).powi(2)).sqrt(),
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|v| Vec2::from(*v).dot(d))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Distance from an interior point to the boundary along the unit direction `d`.
    pub fn exit_distance(&self, p: &Vec2, d: &Vec2) -> f64 {
        match self {
            Shape::Disk { radius } => {
                let b = p.dot(d);
                let c = p.norm_squared() - radius * radius;
                -b + (b * b - c).max(0.0).sqrt()
            }
            Shape::Ellipse { a, b } => {
                let q = Vec2::new(p.x / a, p.y / b);
                let e = Vec2::new(d.x / a, d.y / b);
                let aa = e.norm_squared();
                let bb = q.dot(&e);
                let cc = q.norm_squared() - 1.0;
                (-bb + (bb * bb - aa * cc).max(0.0).sqrt()) / aa
            }
            Shape::Polygon { vertices } => Self::edge_normals(vertices)
                .iter()
                .filter_map(|n| {
                    let nd = n.dot(d);
                    (nd > 0.0).then(|| (1.0 - n.dot(p)) / nd)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Unsigned Euclidean distance to the boundary curve.
    pub fn boundary_distance(&self, p: &Vec2) -> f64 {
        match self {
            Shape::Disk { radius } => (radius - p.norm()).abs(),
            Shape::Ellipse { a, b } => ellipse_distance(*a, *b, p),
            Shape::Polygon { vertices } => {
                let m = vertices.len();
                (0..m)
                    .map(|i| {
                        let s = Vec2::from(vertices[i]);
                        let e = Vec2::from(vertices[(i + 1) % m]);
                        let t = ((p - s).dot(&(e - s)) / (e - s).norm_squared()).clamp(0.0, 1.0);
                        (p - (s + (e - s) * t)).norm()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Smallest box `[xmin, xmax, ymin, ymax]` containing the shape.
    pub fn bounding_box(&self) -> [f64; 4] {
        match self {
            Shape::Disk { radius } => [-radius, *radius, -radius, *radius],
            Shape::Ellipse { a, b } => [-a, *a, -b, *b],
            Shape::Polygon { vertices } => {
                let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
                for v in vertices {
                    bb[0] = bb[0].min(v[0]);
                    bb[1] = bb[1].max(v[0]);
                    bb[2] = bb[2].min(v[1]);
                    bb[3] = bb[3].max(v[1]);
                }
                bb
            }
        }
    }

    /// `m` boundary points spaced uniformly in arc length, counter-clockwise.
    pub fn boundary_samples(&self, m: usize) -> Vec<Vec2> {
        let dense: Vec<Vec2> = match self {
            Shape::Disk { radius } => {
                return (0..m)
                    .map(|k| {
                        let t = std::f64::consts::TAU * k as f64 / m as f64;
                        Vec2::new(radius * t.cos(), radius * t.sin())
                    })
                    .collect();
            }
            Shape::Ellipse { a, b } => {
                let k = 64 * m.max(64);
                (0..k)
                    .map(|i| {
                        let t = std::f64::consts::TAU * i as f64 / k as f64;
                        Vec2::new(a * t.cos(), b * t.sin())
                    })
                    .collect()
            }
            Shape::Polygon { vertices } => vertices.iter().map(|v| Vec2::from(*v)).collect(),
        };
        resample_closed(&dense, m)
    }

    /// Polar set `{y : x.y < 1 for all x in the closure}`.
    pub fn polar(&self) -> Shape {
        match self {
            Shape::Disk { radius } => Shape::Disk { radius: 1.0 / radius },
            Shape::Ellipse { a, b } => Shape::Ellipse { a: 1.0 / a, b: 1.0 / b },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: Self::edge_normals(vertices).iter().map(|n| [n.x, n.y]).collect(),
            },
        }
    }

    /// Outward unit normal at a boundary point (any supporting normal at a polygon corner).
    pub fn outward_normal(&self, p: &Vec2) -> Vec2 {
        match self {
            Shape::Disk { .. } => p.normalize(),
            Shape::Ellipse { a, b } => Vec2::new(p.x / (a * a), p.y / (b * b)).normalize(),
            Shape::Polygon { vertices } => {
                let normals = Self::edge_normals(vertices);
                let best = normals
                    .iter()
                    .max_by(|u, v| u.dot(p).total_cmp(&v.dot(p)))
                    .expect("polygon has edges");
                best.normalize()
            }
        }
    }
}

fn resample_closed(poly: &[Vec2], m: usize) -> Vec<Vec2> {
    let k = poly.len();
    let mut cum = Vec::with_capacity(k + 1);
    cum.push(0.0);
    for i in 0..k {
        let d = (poly[(i + 1) % k] - poly[i]).norm();
        cum.push(cum[i] + d);
    }
    let total = cum[k];
    let mut out = Vec::with_capacity(m);
    let mut seg = 0;
    for j in 0..m {
        let s = total * j as f64 / m as f64;
        while seg + 1 < k && cum[seg + 1] <= s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        out.push(poly[seg] + (poly[(seg + 1) % k] - poly[seg]) * t);
    }
    out
}

fn ellipse_distance(a: f64, b: f64, p: &Vec2) -> f64 {
    let point = |t: f64| Vec2::new(a * t.cos(), b * t.sin());
    let samples = 256;
    let mut best_t = 0.0;
    let mut best_d = f64::INFINITY;
    for i in 0..samples {
        let t = std::f64::consts::TAU * i as f64 / samples as f64;
        let d = (point(t) - p).norm_squared();
        if d < best_d {
            best_d = d;
            best_t = t;
        }
    }
    // Newton on the stationarity condition (e(t) - p).e'(t) = 0
    let mut t = best_t;
    for _ in 0..20 {
        let e = point(t);
        let de = Vec2::new(-a * t.sin(), b * t.cos());
        let dde = Vec2::new(-a * t.cos(), -b * t.sin());
        let f = (e - p).dot(&de);
        let df = de.norm_squared() + (e - p).dot(&dde);
        if df.abs() < 1e-300 {
            break;
        }
        let step = f / df;
        t -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    (point(t) - p).norm().min(best_d.sqrt())
}

/// A uniform lattice over a shape, restricted to strictly interior nodes,
/// together with boundary samples.
///
/// Nodes are stored in lexicographic `(i, j)` order so ties broken by index are
/// broken lexicographically.
#[derive(Clone, Debug)]
pub struct GridDomain {
    shape: Shape,
    resolution: usize,
    spacing: f64,
    origin: Vec2,
    nx: usize,
    ny: usize,
    nodes: Vec<Vec2>,
    lattice: Vec<(usize, usize)>,
    index: Vec<u32>,
    boundary: Vec<Vec2>,
}

const NO_NODE: u32 = u32::MAX;

impl PartialEq for GridDomain {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.resolution == other.resolution
    }
}

impl GridDomain {
    /// Lattice with `resolution` nodes along the longer side of the bounding box.
    pub fn new(shape: Shape, resolution: usize) -> Result<Self> {
        let shape = shape.validated()?;
        if resolution < 3 {
            return Err(Error::InvalidInput(format!("resolution {resolution} < 3")));
        }
        let origin_inside = shape.contains(&Vec2::zeros());
        if !origin_inside {
            return Err(Error::InvalidShape("shape does not contain the origin".into()));
        }
        let [x0, x1, y0, y1] = shape.bounding_box();
        let (w, hgt) = (x1 - x0, y1 - y0);
        let spacing = w.max(hgt) / (resolution - 1) as f64;
        let count = |len: f64| -> usize {
            if len >= w.max(hgt) {
                resolution
            } else {
                // keep parity with `resolution` so the lattice stays centred
                let mut c = (len / spacing).floor() as usize + 1;
                if c % 2 != resolution % 2 {
                    c += 1;
                }
                c
            }
        };
        let nx = count(w);
        let ny = count(hgt);
        let cx = 0.5 * (x0 + x1);
        let cy = 0.5 * (y0 + y1);
        let origin = Vec2::new(
            cx - 0.5 * (nx - 1) as f64 * spacing,
            cy - 0.5 * (ny - 1) as f64 * spacing,
        );
        let mut nodes = Vec::new();
        let mut lattice = Vec::new();
        let mut index = vec![NO_NODE; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                let p = origin + Vec2::new(i as f64, j as f64) * spacing;
                if shape.contains(&p) {
                    index[i * ny + j] = nodes.len() as u32;
                    nodes.push(p);
                    lattice.push((i, j));
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::InvalidInput("lattice has no interior nodes".into()));
        }
        let boundary = shape.boundary_samples(4 * resolution);
        Ok(GridDomain { shape, resolution, spacing, origin, nx, ny, nodes, lattice, index, boundary })
    }

    /// Rectangular window `[x0,x1] x [y0,y1]`; it must contain the origin.
    pub fn window(x0: f64, x1: f64, y0: f64, y1: f64, resolution: usize) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::InvalidInput(format!("empty window [{x0},{x1}]x[{y0},{y1}]")));
        }
        Self::new(Shape::rectangle(x0, x1, y0, y1), resolution)
    }

    /// Same resolution over the polar shape.
    pub fn polar(&self) -> Result<Self> {
        Self::new(self.shape.polar(), self.resolution)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }
    pub fn resolution(&self) -> usize {
        self.resolution
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }
    pub fn node(&self, k: usize) -> Vec2 {
        self.nodes[k]
    }
    pub fn lattice_index(&self, k: usize) -> (usize, usize) {
        self.lattice[k]
    }
    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
    /// Boundary samples, `4 * resolution` of them.
    pub fn boundary(&self) -> &[Vec2] {
        &self.boundary
    }

    /// Interior node at lattice position `(i, j)`, if any.
    pub fn node_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        let k = self.index[i as usize * self.ny + j as usize];
        (k != NO_NODE).then_some(k as usize)
    }

    /// Lattice neighbour of node `k` offset by `(di, dj)`.
    pub fn neighbor(&self, k: usize, di: isize, dj: isize) -> Option<usize> {
        let (i, j) = self.lattice[k];
        self.node_at(i as isize + di, j as isize + dj)
    }

    /// Lattice cell containing `p`: lower-left lattice index and local coordinates in `[0,1)`.
    pub fn locate(&self, p: &Vec2) -> (isize, isize, f64, f64) {
        let u = (p.x - self.origin.x) / self.spacing;
        let v = (p.y - self.origin.y) / self.spacing;
        let (i, j) = (u.floor(), v.floor());
        (i as isize, j as isize, u - i, v - j)
    }

    /// Position of lattice point `(i, j)` whether or not it is an interior node.
    pub fn lattice_point(&self, i: isize, j: isize) -> Vec2 {
        self.origin + Vec2::new(i as f64, j as f64) * self.spacing
    }

    /// Nearest interior node to `p`.
    pub fn nearest_node(&self, p: &Vec2) -> usize {
        let (i, j, fu, fv) = self.locate(p);
        let (ri, rj) = (i + (fu >= 0.5) as isize, j + (fv >= 0.5) as isize);
        if let Some(k) = self.node_at(ri, rj) {
            return k;
        }
        (0..self.nodes.len())
            .min_by(|&a, &b| {
                (self.nodes[a] - p).norm_squared().total_cmp(&(self.nodes[b] - p).norm_squared())
            })
            .expect("domain has nodes")
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        self.shape.contains(p)
    }

    /// Distance of an interior point to the boundary.
    pub fn boundary_distance(&self, p: &Vec2) -> f64 {
        self.shape.boundary_distance(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_lattice_is_symmetric() {
        let g = GridDomain::new(Shape::unit_disk(), 21).unwrap();
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.lattice_dims(), (21, 21));
        // origin is a node and the lattice is centred
        let k = g.nearest_node(&Vec2::zeros());
        assert!(g.node(k).norm() < 1e-14);
        assert!(g.nodes().iter().all(|p| p.norm() < 1.0));
        // points on the circle such as (1, 0) are excluded
        assert!(g.nodes().iter().all(|p| (p.norm() - 1.0).abs() > 1e-9));
        assert_eq!(g.boundary().len(), 84);
    }

    #[test]
    fn rejects_shape_without_origin() {
        let sq = Shape::rectangle(0.5, 1.5, -1.0, 1.0);
        assert!(GridDomain::new(sq, 11).is_err());
        assert!(Shape::Disk { radius: -1.0 }.validated().is_err());
    }

    #[test]
    fn polar_of_square_is_diamond() {
        let sq = Shape::rectangle(-1.0, 1.0, -1.0, 1.0);
        let Shape::Polygon { vertices } = sq.polar() else { panic!() };
        let mut v: Vec<_> = vertices.iter().map(|p| (p[0].round() as i32, p[1].round() as i32)).collect();
        v.sort();
        assert_eq!(v, vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
        assert_eq!(Shape::Disk { radius: 2.0 }.polar(), Shape::Disk { radius: 0.5 });
        assert_eq!(Shape::Ellipse { a: 2.0, b: 0.5 }.polar(), Shape::Ellipse { a: 0.5, b: 2.0 });
    }

    #[test]
    fn exit_distance_and_gauge_agree() {
        let shapes = [
            Shape::unit_disk(),
            Shape::Ellipse { a: 1.5, b: 0.7 },
            Shape::Polygon { vertices: vec![[1.0, 0.0], [0.0, 1.2], [-0.8, -0.3], [0.2, -1.0]] },
        ];
        for s in shapes {
            let s = s.validated().unwrap();
            let p = Vec2::new(0.1, -0.05);
            for k in 0..16 {
                let t = k as f64 * 0.4;
                let d = Vec2::new(t.cos(), t.sin());
                let q = p + d * s.exit_distance(&p, &d);
                assert!((s.gauge(&q) - 1.0).abs() < 1e-12);
                assert!(s.boundary_distance(&q) < 1e-9);
            }
        }
    }

    #[test]
    fn ellipse_distance_matches_dense_search() {
        let (a, b) = (1.5, 0.6);
        let p = Vec2::new(0.7, 0.2);
        let dense = (0..200_000)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 200_000.0;
                (Vec2::new(a * t.cos(), b * t.sin()) - p).norm()
            })
            .fold(f64::INFINITY, f64::min);
        let d = Shape::Ellipse { a, b }.boundary_distance(&p);
        assert!((d - dense).abs() < 1e-8, "{d} vs {dense}");
    }

    #[test]
    fn boundary_samples_are_uniform_on_polygons() {
        let sq = Shape::rectangle(-1.0, 1.0, -1.0, 1.0).validated().unwrap();
        let pts = sq.boundary_samples(16);
        assert_eq!(pts.len(), 16);
        for w in pts.windows(2) {
            assert!(((w[1] - w[0]).norm() - 0.5).abs() < 1e-12);
        }
        assert!(pts.iter().all(|p| (sq.gauge(p) - 1.0).abs() < 1e-12));
    }
}
