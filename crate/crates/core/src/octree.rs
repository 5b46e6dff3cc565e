//! Octree over point positions for Barnes-Hut approximation of all-pairs repulsion.
//!
//! Cells live in a flat arena. The root box is the axis-aligned bounding box
//! of the input (not forced cubic), widened by a relative margin so no point
//! sits on the outer boundary. A cell is split at its box center; the child
//! octant of a point is `(x > cx) | (y > cy) << 1 | (z > cz) << 2`.

use crate::error::SpatialError;
use crate::vec3::Vec3;

pub const LEAF_CAPACITY: usize = 1;
pub const MAX_DEPTH: u32 = 32;

const BOUNDS_MARGIN: f64 = 1e-9;
const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn longest_side(&self) -> f64 {
        let d = self.max - self.min;
        d.x.max(d.y).max(d.z)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    fn octant_of(&self, p: Vec3) -> usize {
        let c = self.center();
        (p.x > c.x) as usize | ((p.y > c.y) as usize) << 1 | ((p.z > c.z) as usize) << 2
    }

    fn child(&self, octant: usize) -> Aabb {
        let c = self.center();
        let pick = |bit: usize, lo: f64, mid: f64, hi: f64| {
            if octant & bit != 0 {
                (mid, hi)
            } else {
                (lo, mid)
            }
        };
        let (x0, x1) = pick(1, self.min.x, c.x, self.max.x);
        let (y0, y1) = pick(2, self.min.y, c.y, self.max.y);
        let (z0, z1) = pick(4, self.min.z, c.z, self.max.z);
        Aabb {
            min: Vec3::new(x0, y0, z0),
            max: Vec3::new(x1, y1, z1),
        }
    }
}

#[derive(Debug, Clone)]
pub enum CellContent {
    /// Child cell ids per octant; empty octants have no cell.
    Internal([u32; 8]),
    /// A run of `len` entries in the point order starting at `start`.
    Leaf { start: u32, len: u32 },
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub bounds: Aabb,
    pub mass: f64,
    pub center_of_mass: Vec3,
    pub depth: u32,
    pub content: CellContent,
}

/// Pairwise repulsion `k_repel * L^2 / d` directed away from the source,
/// with `d` clamped below at `min_distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepulsionKernel {
    pub k_repel: f64,
    pub ideal_length: f64,
    pub min_distance: f64,
}

impl RepulsionKernel {
    /// Force on a body at `on` from `mass` bodies concentrated at `from`.
    /// Exactly coincident points exert no force (there is no direction).
    #[inline]
    pub fn force(&self, on: Vec3, from: Vec3, mass: f64) -> Vec3 {
        let delta = on - from;
        let dist = delta.norm();
        if dist == 0.0 {
            return Vec3::ZERO;
        }
        let d = dist.max(self.min_distance);
        delta * (mass * self.k_repel * self.ideal_length * self.ideal_length / (d * dist))
    }
}

#[derive(Debug, Clone)]
pub struct OctreeIndex {
    cells: Vec<Cell>,
    points: Vec<Vec3>,
    order: Vec<usize>,
}

impl OctreeIndex {
    pub fn build(points: &[Vec3]) -> Result<Self, SpatialError> {
        if points.is_empty() {
            return Err(SpatialError::Empty);
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(SpatialError::NonFinite { index });
        }

        let mut lo = points[0];
        let mut hi = points[0];
        for &p in &points[1..] {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let extent = (hi - lo).x.max((hi - lo).y).max((hi - lo).z);
        let scale = extent.max(lo.x.abs().max(lo.y.abs()).max(lo.z.abs()));
        let scale = scale
            .max(hi.x.abs().max(hi.y.abs()).max(hi.z.abs()))
            .max(1.0);
        let pad = Vec3::new(1.0, 1.0, 1.0) * (BOUNDS_MARGIN * scale);
        let root = Aabb {
            min: lo - pad,
            max: hi + pad,
        };

        let mut tree = Self {
            cells: Vec::with_capacity(2 * points.len()),
            points: points.to_vec(),
            order: (0..points.len()).collect(),
        };
        let mut scratch = vec![0usize; points.len()];
        tree.build_cell(root, 0, 0, points.len(), &mut scratch);
        Ok(tree)
    }

    /// Builds the cell covering `order[start..end]` and returns its id.
    fn build_cell(
        &mut self,
        bounds: Aabb,
        depth: u32,
        start: usize,
        end: usize,
        scratch: &mut [usize],
    ) -> u32 {
        let id = self.cells.len() as u32;
        self.cells.push(Cell {
            bounds,
            mass: 0.0,
            center_of_mass: Vec3::ZERO,
            depth,
            content: CellContent::Leaf {
                start: start as u32,
                len: (end - start) as u32,
            },
        });

        let len = end - start;
        if len <= LEAF_CAPACITY || depth >= MAX_DEPTH {
            let mut sum = Vec3::ZERO;
            for &i in &self.order[start..end] {
                sum += self.points[i];
            }
            let cell = &mut self.cells[id as usize];
            cell.mass = len as f64;
            cell.center_of_mass = sum / len as f64;
            return id;
        }

        // Stable counting sort of this run by octant.
        let mut counts = [0usize; 8];
        for &i in &self.order[start..end] {
            counts[bounds.octant_of(self.points[i])] += 1;
        }
        let mut offsets = [0usize; 8];
        for o in 1..8 {
            offsets[o] = offsets[o - 1] + counts[o - 1];
        }
        let mut cursor = offsets;
        for &i in &self.order[start..end] {
            let o = bounds.octant_of(self.points[i]);
            scratch[start + cursor[o]] = i;
            cursor[o] += 1;
        }
        self.order[start..end].copy_from_slice(&scratch[start..end]);

        let mut children = [NO_CHILD; 8];
        let mut mass = 0.0;
        let mut moment = Vec3::ZERO;
        for o in 0..8 {
            if counts[o] == 0 {
                continue;
            }
            let s = start + offsets[o];
            let child = self.build_cell(bounds.child(o), depth + 1, s, s + counts[o], scratch);
            let c = &self.cells[child as usize];
            mass += c.mass;
            moment += c.center_of_mass * c.mass;
            children[o] = child;
        }
        let cell = &mut self.cells[id as usize];
        cell.mass = mass;
        cell.center_of_mass = moment / mass;
        cell.content = CellContent::Internal(children);
        id
    }

    pub fn root(&self) -> &Cell {
        &self.cells[0]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Point indices stored in a leaf cell.
    pub fn leaf_points(&self, cell: &Cell) -> &[usize] {
        match cell.content {
            CellContent::Leaf { start, len } => &self.order[start as usize..(start + len) as usize],
            CellContent::Internal(_) => &[],
        }
    }

    pub fn children<'a>(&'a self, cell: &'a Cell) -> impl Iterator<Item = &'a Cell> + 'a {
        let ids = match &cell.content {
            CellContent::Internal(c) => *c,
            CellContent::Leaf { .. } => [NO_CHILD; 8],
        };
        ids.into_iter()
            .filter(|&c| c != NO_CHILD)
            .map(move |c| &self.cells[c as usize])
    }

    pub fn depth(&self) -> u32 {
        self.cells.iter().map(|c| c.depth).max().unwrap_or(0)
    }

    /// Barnes-Hut estimate of the repulsion on an arbitrary point from every
    /// indexed point. A cell is used as a pseudo-body when
    /// `longest_side / distance < theta` and the query lies outside its box;
    /// `theta = 0` visits every point.
    pub fn approx_repulsion(&self, query: Vec3, theta: f64, kernel: &RepulsionKernel) -> Vec3 {
        self.accumulate(query, None, theta, kernel)
    }

    /// Repulsion on indexed point `node` from all other indexed points.
    pub fn repulsion_on(&self, node: usize, theta: f64, kernel: &RepulsionKernel) -> Vec3 {
        self.accumulate(self.points[node], Some(node), theta, kernel)
    }

    fn accumulate(
        &self,
        query: Vec3,
        exclude: Option<usize>,
        theta: f64,
        kernel: &RepulsionKernel,
    ) -> Vec3 {
        let mut force = Vec3::ZERO;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            let cell = &self.cells[id as usize];
            match &cell.content {
                CellContent::Leaf { start, len } => {
                    for &i in &self.order[*start as usize..(*start + *len) as usize] {
                        if Some(i) != exclude {
                            force += kernel.force(query, self.points[i], 1.0);
                        }
                    }
                }
                CellContent::Internal(children) => {
                    let dist = query.distance(cell.center_of_mass);
                    if theta > 0.0
                        && dist > 0.0
                        && cell.bounds.longest_side() / dist < theta
                        && !cell.bounds.contains(query)
                    {
                        force += kernel.force(query, cell.center_of_mass, cell.mass);
                    } else {
                        // Reverse push so children pop in octant order.
                        for &c in children.iter().rev() {
                            if c != NO_CHILD {
                                stack.push(c);
                            }
                        }
                    }
                }
            }
        }
        force
    }
}
