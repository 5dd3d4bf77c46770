//! Planar quadrature mesh: a polar background disk plus graded polar patches
//! around each singular point.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, TodaError};

const GAUSS3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
/// Gauss-Legendre points per smooth angular piece when clipping cells.
const CLIP_ORDER: usize = 16;
/// Smallest patch ring radius relative to `max(1, |p|)`, so ring nodes stay
/// distinguishable from the point in double precision.
const MIN_INNER_RADIUS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshConfig {
    /// Truncation radius, measured from the mesh center.
    pub radius: f64,
    /// Background node spacing in the uniform region.
    pub resolution: f64,
    /// Radius of the uniform region; beyond it ring widths grow geometrically.
    pub uniform_radius: f64,
    /// Growth factor of ring widths in the outer region.
    pub stretch: f64,
    /// Requested patch radius around each singular point.
    pub patch_radius: f64,
    /// Largest acceptable share of a point's local integral left in the
    /// unresolved core disk, assuming density `~ r^{-2 beta}`.
    pub core_fraction: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            radius: 16.0,
            resolution: 0.1,
            uniform_radius: 4.0,
            stretch: 1.25,
            patch_radius: 0.5,
            core_fraction: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Patch {
    pub center: [f64; 2],
    pub radius: f64,
    /// Radius of the core disk left out of the quadrature.
    pub inner_radius: f64,
    /// True when the requested radius was reduced to keep patches apart.
    pub shrunk: bool,
    /// Share of the local integral in the core disk for the largest exponent
    /// at this point; above `core_fraction` when the octave cap was hit.
    pub core_fraction: f64,
    pub first_node: usize,
    pub node_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub center: [f64; 2],
    pub radius: f64,
    pub resolution: f64,
    pub uniform_radius: f64,
    /// Background nodes come first, `0..background_count`.
    pub background_count: usize,
    /// Background nodes whose cell was clipped by a patch.
    pub clipped: Vec<bool>,
    pub patches: Vec<Patch>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Distance from the mesh center.
    pub fn radial(&self, k: usize) -> f64 {
        dist(self.nodes[k], self.center)
    }

    /// Nodes with `lo <= |x - center| <= hi`.
    pub fn annulus(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| {
                let r = self.radial(k);
                r >= lo && r <= hi
            })
            .collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

struct Cell {
    r0: f64,
    r1: f64,
    t0: f64,
    t1: f64,
}

impl Cell {
    fn area(&self) -> f64 {
        0.5 * (self.r1 * self.r1 - self.r0 * self.r0) * (self.t1 - self.t0)
    }

    fn node(&self, center: [f64; 2]) -> [f64; 2] {
        let r = 0.5 * (self.r0 + self.r1);
        let t = 0.5 * (self.t0 + self.t1);
        [center[0] + r * t.cos(), center[1] + r * t.sin()]
    }
}

/// Builds the mesh. `exponents[l]` is the largest exponent at point `l`; it
/// sets how deep the patch grading goes.
pub fn build_mesh(points: &[[f64; 2]], exponents: &[f64], config: &MeshConfig) -> Result<Mesh> {
    if points.len() != exponents.len() {
        return Err(TodaError::DimensionMismatch(format!(
            "{} points, {} exponents",
            points.len(),
            exponents.len()
        )));
    }
    if !(config.resolution > 0.0 && config.resolution.is_finite()) {
        return Err(TodaError::Grid(format!("resolution {} must be positive", config.resolution)));
    }
    if !(config.stretch >= 1.0) || !(config.patch_radius > 0.0) || !(config.core_fraction > 0.0) {
        return Err(TodaError::Grid("stretch must be >= 1, patch radius and core fraction > 0".into()));
    }
    let max_norm = points.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    if !(config.radius > 2.0 * max_norm + 1.0) {
        return Err(TodaError::Grid(format!(
            "radius {} must exceed 2 max|p| + 1 = {}",
            config.radius,
            2.0 * max_norm + 1.0
        )));
    }
    let center = if points.is_empty() {
        [0.0, 0.0]
    } else {
        let m = points.len() as f64;
        [
            points.iter().map(|p| p[0]).sum::<f64>() / m,
            points.iter().map(|p| p[1]).sum::<f64>() / m,
        ]
    };

    // patch radii
    let mut radius = config.patch_radius;
    let mut shrunk = false;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d = dist(points[a], points[b]);
            if 2.0 * radius > 0.9 * d {
                radius = 0.45 * d;
                shrunk = true;
            }
        }
    }
    for p in points {
        let room = config.radius - dist(*p, center);
        if radius > 0.5 * room {
            radius = 0.5 * room;
            shrunk = true;
        }
    }
    if shrunk {
        log::info!("patch radius reduced to {radius:.4}");
    }

    let h = config.resolution;
    let r_c = config.uniform_radius.min(config.radius).max(h);
    let mut cells = Vec::new();
    // central disk
    cells.push(None);
    let mut k = 1usize;
    let mut edges = Vec::new();
    while (k as f64) * h < r_c - 1e-12 {
        edges.push((k as f64) * h);
        k += 1;
    }
    edges.push(r_c);
    let mut dr = h;
    loop {
        let last = *edges.last().unwrap();
        if last >= config.radius - 1e-12 {
            break;
        }
        dr *= config.stretch;
        let next = last + dr;
        if next + 0.5 * dr >= config.radius {
            edges.push(config.radius);
            break;
        }
        edges.push(next);
    }
    let inner = edges[0];
    for pair in edges.windows(2) {
        let (r0, r1) = (pair[0], pair[1]);
        let mid = 0.5 * (r0 + r1);
        let n_theta = ((2.0 * PI * mid / (r1 - r0)).round() as usize).max(6);
        let dt = 2.0 * PI / n_theta as f64;
        for j in 0..n_theta {
            cells.push(Some(Cell {
                r0,
                r1,
                t0: j as f64 * dt,
                t1: (j + 1) as f64 * dt,
            }));
        }
    }

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut clipped = Vec::new();
    let clipper = Clipper::new(center, points, radius);
    for cell in &cells {
        match cell {
            None => {
                let node = center;
                let w = PI * inner * inner;
                if points.iter().any(|p| dist(node, *p) < radius + inner) {
                    // clip the central disk like any other cell
                    let c = Cell {
                        r0: 0.0,
                        r1: inner,
                        t0: 0.0,
                        t1: 2.0 * PI,
                    };
                    if let Some((x, wc)) = clipper.clip(&c) {
                        nodes.push(x);
                        weights.push(wc);
                        clipped.push(true);
                    }
                } else {
                    nodes.push(node);
                    weights.push(w);
                    clipped.push(false);
                }
            }
            Some(c) => {
                let node = c.node(center);
                let diam = (c.r1 - c.r0) + c.r1 * (c.t1 - c.t0);
                if points.iter().any(|p| dist(node, *p) < radius + diam) {
                    if let Some((x, wc)) = clipper.clip(c) {
                        let whole = (wc - c.area()).abs() <= 1e-13 * c.area();
                        nodes.push(if whole { node } else { x });
                        weights.push(if whole { c.area() } else { wc });
                        clipped.push(!whole);
                    }
                } else {
                    nodes.push(node);
                    weights.push(c.area());
                    clipped.push(false);
                }
            }
        }
    }
    let background_count = nodes.len();

    let mut patches = Vec::new();
    for (p, beta) in points.iter().zip(exponents) {
        let first_node = nodes.len();
        let decay = 2.0 - 2.0 * beta;
        let wanted = (config.core_fraction.ln() / (0.5f64.ln() * decay)).ceil();
        let floor = MIN_INNER_RADIUS * p[0].hypot(p[1]).max(1.0);
        let max_octaves = ((radius / floor).log2().floor() as usize).max(1);
        let octaves = if wanted.is_finite() && wanted > 0.0 {
            (wanted as usize).clamp(1, max_octaves)
        } else {
            max_octaves
        };
        let inner_radius = radius * 0.5f64.powi(octaves as i32);
        let core_fraction = 0.5f64.powf(decay * octaves as f64);
        if core_fraction > config.core_fraction {
            log::warn!(
                "patch at ({:.4}, {:.4}): core disk holds ~{core_fraction:.2e} of the local integral",
                p[0],
                p[1]
            );
        }
        for o in 0..octaves {
            let r_out = radius * 0.5f64.powi(o as i32);
            let s0 = (0.5 * r_out).ln();
            let s1 = r_out.ln();
            let n_theta = ((2.0 * PI * r_out / h / 4.0).ceil() as usize * 4).max(8);
            let dt = 2.0 * PI / n_theta as f64;
            for (g, gw) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
                let s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * g;
                let r = s.exp();
                // area element r^2 ds dtheta
                let w = gw * 0.5 * (s1 - s0) * r * r * dt;
                for j in 0..n_theta {
                    // stagger alternate rings to avoid radial spokes
                    let t = (j as f64 + 0.5 * ((o % 2) as f64)) * dt;
                    nodes.push([p[0] + r * t.cos(), p[1] + r * t.sin()]);
                    weights.push(w);
                }
            }
        }
        patches.push(Patch {
            center: *p,
            radius,
            inner_radius,
            shrunk,
            core_fraction,
            first_node,
            node_count: nodes.len() - first_node,
        });
    }
    Ok(Mesh {
        nodes,
        weights,
        center,
        radius: config.radius,
        resolution: h,
        uniform_radius: r_c,
        background_count,
        clipped,
        patches,
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Removes the patch disks from polar background cells.
///
/// Along each ray from the mesh center the part outside the disks is a union
/// of intervals, so the radial integrals are exact. The angular integrand is
/// smooth between tangent and crossing angles; each piece gets a Gauss rule
/// after the substitution `t = a + (b - a)(3s^2 - 2s^3)`, which absorbs the
/// square-root behaviour at tangents.
struct Clipper<'a> {
    center: [f64; 2],
    points: &'a [[f64; 2]],
    radius: f64,
    rule: (Vec<f64>, Vec<f64>),
}

impl<'a> Clipper<'a> {
    fn new(center: [f64; 2], points: &'a [[f64; 2]], radius: f64) -> Self {
        Self {
            center,
            points,
            radius,
            rule: gauss_legendre(CLIP_ORDER),
        }
    }

    /// `(int r dr, int r^2 dr)` over the part of `[r0, r1]` along angle `t`
    /// that lies outside every patch.
    fn ray(&self, t: f64, r0: f64, r1: f64) -> (f64, f64) {
        let (ct, st) = (t.cos(), t.sin());
        let mut first = 0.5 * (r1 * r1 - r0 * r0);
        let mut second = (r1.powi(3) - r0.powi(3)) / 3.0;
        for p in self.points {
            let dx = p[0] - self.center[0];
            let dy = p[1] - self.center[1];
            let along = dx * ct + dy * st;
            let across = dx * st - dy * ct;
            let disc = self.radius * self.radius - across * across;
            if disc <= 0.0 {
                continue;
            }
            let half = disc.sqrt();
            // disks are disjoint, so the removed pieces never overlap
            let a = (along - half).max(r0);
            let b = (along + half).min(r1);
            if b > a {
                first -= 0.5 * (b * b - a * a);
                second -= (b.powi(3) - a.powi(3)) / 3.0;
            }
        }
        (first.max(0.0), second.max(0.0))
    }

    /// Angles in `[t0, t1]` where the clipped radial set changes shape.
    fn breakpoints(&self, c: &Cell) -> Vec<f64> {
        let mut out = vec![c.t0, c.t1];
        let mut push = |a: f64| {
            let k = ((c.t0 - a) / (2.0 * PI)).ceil();
            let a = a + 2.0 * PI * k;
            if a > c.t0 && a < c.t1 {
                out.push(a);
            }
        };
        for p in self.points {
            let d = dist(*p, self.center);
            let phi = (p[1] - self.center[1]).atan2(p[0] - self.center[0]);
            if d > self.radius {
                let w = (self.radius / d).asin();
                push(phi - w);
                push(phi + w);
            }
            for r in [c.r0, c.r1] {
                if r > 0.0 && d > 0.0 {
                    let cos = (d * d + r * r - self.radius * self.radius) / (2.0 * d * r);
                    if cos.abs() < 1.0 {
                        let w = cos.acos();
                        push(phi - w);
                        push(phi + w);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Area and centroid of the part of a polar cell outside every patch.
    fn clip(&self, c: &Cell) -> Option<([f64; 2], f64)> {
        let (xs, ws) = &self.rule;
        let mut area = 0.0;
        let mut mx = 0.0;
        let mut my = 0.0;
        for piece in self.breakpoints(c).windows(2) {
            let (a, b) = (piece[0], piece[1]);
            for (x, w) in xs.iter().zip(ws) {
                let s = 0.5 * (x + 1.0);
                let t = a + (b - a) * s * s * (3.0 - 2.0 * s);
                let jac = 0.5 * w * (b - a) * 6.0 * s * (1.0 - s);
                let (first, second) = self.ray(t, c.r0, c.r1);
                area += jac * first;
                mx += jac * second * t.cos();
                my += jac * second * t.sin();
            }
        }
        if area > 1e-15 * c.area() {
            Some(([self.center[0] + mx / area, self.center[1] + my / area], area))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(radius: f64, resolution: f64) -> MeshConfig {
        MeshConfig {
            radius,
            resolution,
            ..MeshConfig::default()
        }
    }

    #[test]
    fn background_only() {
        let mesh = build_mesh(&[], &[], &cfg(8.0, 0.2)).unwrap();
        assert!(mesh.patches.is_empty());
        assert_eq!(mesh.background_count, mesh.len());
        assert!((mesh.total_weight() / (PI * 64.0) - 1.0).abs() < 1e-12);
        assert!(mesh.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn weights_cover_disk_with_patches() {
        let pts = [[0.0, 0.0], [1.0, 0.3], [-0.7, 0.8]];
        let mesh = build_mesh(&pts, &[0.5, 0.3, 0.9], &cfg(10.0, 0.1)).unwrap();
        let core: f64 = mesh.patches.iter().map(|p| PI * p.inner_radius.powi(2)).sum();
        let rel = ((mesh.total_weight() + core) / (PI * 100.0) - 1.0).abs();
        assert!(rel < 1e-6, "relative area error {rel:e}");
        for p in &pts {
            assert!(mesh.nodes.iter().all(|x| x != p));
        }
    }

    #[test]
    fn singular_integral() {
        let mesh = build_mesh(&[[0.0, 0.0]], &[0.5], &cfg(8.0, 0.1)).unwrap();
        let f: Vec<f64> = mesh
            .nodes
            .iter()
            .map(|x| {
                let r = x[0].hypot(x[1]);
                if r < 1.0 {
                    1.0 / r
                } else {
                    0.0
                }
            })
            .collect();
        let rel = (mesh.integrate(&f) / (2.0 * PI) - 1.0).abs();
        assert!(rel < 5e-3, "{rel}");
    }

    #[test]
    fn patches_disjoint_and_shrunk() {
        let pts = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]];
        let mesh = build_mesh(&pts, &[0.5; 3], &cfg(6.0, 0.1)).unwrap();
        assert_eq!(mesh.patches.len(), 3);
        assert!(mesh.patches.iter().all(|p| p.shrunk));
        for a in 0..3 {
            for b in a + 1..3 {
                let pa = &mesh.patches[a];
                let pb = &mesh.patches[b];
                assert!(dist(pa.center, pb.center) > pa.radius + pb.radius);
            }
        }
    }

    #[test]
    fn rejects_small_radius() {
        assert!(build_mesh(&[[3.0, 0.0]], &[0.5], &cfg(6.0, 0.1)).is_err());
        assert!(build_mesh(&[], &[], &cfg(6.0, 0.0)).is_err());
    }

    #[test]
    fn deterministic() {
        let pts = [[0.2, 0.1], [-0.4, 0.3]];
        let a = build_mesh(&pts, &[0.5, 0.5], &cfg(6.0, 0.15)).unwrap();
        let b = build_mesh(&pts, &[0.5, 0.5], &cfg(6.0, 0.15)).unwrap();
        assert_eq!(a, b);
    }
}
