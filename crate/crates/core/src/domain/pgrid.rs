//! Cell-centred Cartesian lattice in the ball `|p| < 2τ√E` with a tube
//! around the line `L_ν = Rν` removed.

use crate::error::{Error, Result};
use crate::vec3::Vec3;

use super::RunConfig;

#[derive(Debug, Clone)]
pub struct PGrid {
    pub radius: f64,
    pub nu: Vec3,
    pub tube: f64,
    /// Lattice spacing.
    pub h: f64,
    /// Lattice points per axis.
    pub n_axis: usize,
    pub nodes: Vec<Vec3>,
    /// Lattice cell -> node index for cells whose centre is a node.
    cell_node: Vec<Option<usize>>,
}

impl PGrid {
    pub fn new(radius: f64, nu: Vec3, tube: f64, n_axis: usize) -> Result<Self> {
        if n_axis < 4 {
            return Err(Error::config("n_p", "grid resolutions must be >= 4"));
        }
        if !(radius > 0.0) {
            return Err(Error::config("tau", "ball radius must be positive"));
        }
        let h = 2.0 * radius / n_axis as f64;
        let mut nodes = Vec::new();
        let mut cell_node = vec![None; n_axis * n_axis * n_axis];
        for (c, slot) in cell_node.iter_mut().enumerate() {
            let p = Self::centre(radius, h, n_axis, c);
            let axial = p - nu.scale(p.dot(&nu));
            if p.norm() < radius && axial.norm() > tube {
                *slot = Some(nodes.len());
                nodes.push(p);
            }
        }
        if nodes.is_empty() {
            return Err(Error::GridMismatch("p-grid has no nodes".into()));
        }
        Ok(PGrid { radius, nu, tube, h, n_axis, nodes, cell_node })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Self::new(cfg.ball_radius(), cfg.nu(), cfg.tube_radius(), cfg.n_p)
    }

    fn centre(radius: f64, h: f64, n: usize, c: usize) -> Vec3 {
        let (i, j, k) = (c / (n * n), (c / n) % n, c % n);
        let at = |i: usize| -radius + h * (i as f64 + 0.5);
        Vec3::new(at(i), at(j), at(k))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn cell(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        self.cell_node[(i * self.n_axis + j) * self.n_axis + k]
    }

    /// Trilinear interpolation of a nodal field at `q`. Corners that are not
    /// nodes are dropped and the remaining weights renormalized; points
    /// outside the ball give `None` (the caller treats them as zero).
    pub fn interp_weights(&self, q: &Vec3) -> Option<smallvec::SmallVec<[(usize, f64); 8]>> {
        if q.norm() >= self.radius {
            return None;
        }
        let n = self.n_axis;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let t = (q.0[a] + self.radius) / self.h - 0.5;
            let i0 = (t.floor().max(0.0) as usize).min(n - 2);
            base[a] = i0;
            frac[a] = (t - i0 as f64).clamp(0.0, 1.0);
        }
        let mut out: smallvec::SmallVec<[(usize, f64); 8]> = smallvec::SmallVec::new();
        let mut total = 0.0;
        for corner in 0..8 {
            let d = [(corner >> 2) & 1, (corner >> 1) & 1, corner & 1];
            let w: f64 = (0..3)
                .map(|a| if d[a] == 1 { frac[a] } else { 1.0 - frac[a] })
                .product();
            if w == 0.0 {
                continue;
            }
            if let Some(node) = self.cell(base[0] + d[0], base[1] + d[1], base[2] + d[2]) {
                out.push((node, w));
                total += w;
            }
        }
        if total > 1e-3 {
            for e in out.iter_mut() {
                e.1 /= total;
            }
            Some(out)
        } else {
            Some(smallvec::smallvec![(self.nearest(q), 1.0)])
        }
    }

    pub fn interpolate<T>(&self, values: &[T], q: &Vec3) -> Option<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.interp_weights(q)
            .map(|w| w.iter().map(|&(i, w)| values[i] * w).sum())
    }

    /// Node closest to `q` (ties broken by lowest index).
    pub fn nearest(&self, q: &Vec3) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.nodes.iter().enumerate() {
            let d = p.dist(q);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    fn nearest_ties(&self, q: &Vec3) -> Vec<usize> {
        let best = self.nodes[self.nearest(q)].dist(q);
        let tol = 1e-9 * self.h;
        (0..self.len()).filter(|&i| self.nodes[i].dist(q) <= best + tol).collect()
    }

    /// Quadrature over the full ball: every lattice cell whose centre lies
    /// inside, weighted by the fraction of the cell inside the ball, paired
    /// with the node that carries its value (the cell itself, or the nearest
    /// nodes for cells inside the excluded tube).
    pub fn ball_quadrature(&self) -> Vec<(Vec3, usize, f64)> {
        const SUB: usize = 4;
        let n = self.n_axis;
        let vol = self.h.powi(3);
        let mut out = Vec::new();
        for c in 0..n * n * n {
            let centre = Self::centre(self.radius, self.h, n, c);
            if centre.norm() - 0.87 * self.h >= self.radius {
                continue;
            }
            let mut inside = 0usize;
            for s in 0..SUB * SUB * SUB {
                let off = |i: usize| self.h * ((i as f64 + 0.5) / SUB as f64 - 0.5);
                let x = centre + Vec3::new(off(s / (SUB * SUB)), off((s / SUB) % SUB), off(s % SUB));
                if x.norm() < self.radius {
                    inside += 1;
                }
            }
            if inside == 0 {
                continue;
            }
            let w = vol * inside as f64 / (SUB * SUB * SUB) as f64;
            match self.cell_node[c] {
                Some(owner) => out.push((centre, owner, w)),
                None => {
                    // ties are split so the rule stays symmetric under p -> -p
                    let ties = self.nearest_ties(&centre);
                    let share = w / ties.len() as f64;
                    out.extend(ties.into_iter().map(|o| (centre, o, share)));
                }
            }
        }
        out
    }
}
